"""Shared fixtures for driving a Chain by hand in unit tests."""

from __future__ import annotations

from qcspend.agents import Wallet
from qcspend.consensus import Chain, ChainConfig, GenesisGrant
from qcspend.fawkescoin import RevealMode, RevealPayload, commit_payload
from qcspend.groups import pk_ec, toy_group
from qcspend.hdwallet import DerivationPath
from qcspend.ledger import (
    Address,
    Transaction,
    TxInput,
    TxKind,
    TxOutput,
    Witness,
    WitnessKind,
    pk_hash_address,
)
from qcspend.params import Params

KDF_ITERS = 8


class Harness:
    """A chain plus named wallets and grants, in-era from genesis by
    default (canary pre-killed, zero countdown)."""

    def __init__(self, q: int = 8191, killed_at=0, seed: int = 7, **overrides):
        overrides.setdefault("era_countdown", 0)
        self.params = Params().with_overrides(**overrides)
        self.q = q
        self.seed = seed
        self.group = toy_group(q)
        self._wallets: dict[str, Wallet] = {}
        self._grants: list[tuple[str, GenesisGrant]] = []
        self._killed_at = killed_at
        self.chain: Chain | None = None
        self.outpoints: dict[str, tuple[bytes, int]] = {}

    def wallet(self, name: str) -> Wallet:
        if name not in self._wallets:
            self._wallets[name] = Wallet(self.group, name, self.seed, KDF_ITERS)
        return self._wallets[name]

    def grant(self, label: str, address: Address, value: int, wait: int = 0) -> None:
        assert self.chain is None, "grant before build()"
        self._grants.append((label, GenesisGrant(address, value, wait)))

    def grant_hashed(self, label: str, owner: str, path: str, value: int, wait: int = 0) -> None:
        pk = self.wallet(owner).derived_pk(DerivationPath.parse(path))
        self.grant(label, pk_hash_address(pk), value, wait)

    def grant_pq(self, label: str, owner: str, value: int) -> None:
        self.grant(label, self.wallet(owner).pq_address(), value)

    def build(self) -> Chain:
        canary_group = toy_group(8191)
        canary_pk = pk_ec(canary_group, 4242).encode()
        self.config = ChainConfig(
            params=self.params,
            group_q=self.q,
            canary_q=8191,
            canary_pk=canary_pk,
            canary_nonce=b"nonce" * 4,
            canary_killed_at=self._killed_at,
            grants=tuple(g for _, g in self._grants),
        )
        self.chain = self.config.build()
        genesis_txid = self.chain.blocks[0].coinbase.txid()
        for i, (label, _) in enumerate(self._grants):
            self.outpoints[label] = (genesis_txid, i)
        return self.chain

    # -- block driving -----------------------------------------------------

    def mine(self, n: int = 1, miner: str = "m0") -> None:
        for _ in range(n):
            self.chain.begin_block(miner, self.wallet(miner).pq_address())
            self.chain.end_block()

    def mine_to(self, height: int, miner: str = "m0") -> None:
        while self.chain.height < height:
            self.mine(miner=miner)

    def mine_with(self, txs, reports=(), miner: str = "m0"):
        self.chain.begin_block(miner, self.wallet(miner).pq_address())
        for tx in txs:
            self.chain.add_tx(tx)
        return self.chain.end_block(reports)

    def pq_outpoint(self, owner: str):
        """The owner's smallest live post-quantum output (so deposits,
        which the fixtures make larger, are left alone)."""
        address = self.wallet(owner).pq_address().serialize()
        live = [
            u
            for u in self.chain.utxos.values()
            if u.address.serialize() == address and not u.coinbase and u.outpoint not in self.chain.lfc_locks
        ]
        assert live, f"{owner} has no post-quantum output"
        return min(live, key=lambda u: (u.value, u.created_height, u.outpoint)).outpoint

    # -- transaction builders ---------------------------------------------------

    def signed(self, kind, inputs_with_signers, outputs, payload=b"") -> Transaction:
        """inputs_with_signers: list of (outpoint, signer) where signer is
        ("pre", wallet, sk), ("pq", wallet), or None."""
        skeleton = Transaction(kind, tuple(TxInput(op) for op, _ in inputs_with_signers), tuple(outputs), payload)
        sighash = skeleton.sighash()
        inputs = []
        for op, signer in inputs_with_signers:
            if signer is None:
                inputs.append(TxInput(op, Witness(WitnessKind.NONE)))
            elif signer[0] == "pre":
                inputs.append(TxInput(op, signer[1].witness_pre(signer[2], sighash)))
            else:
                inputs.append(TxInput(op, signer[1].witness_pq(sighash)))
        return Transaction(kind, tuple(inputs), tuple(outputs), payload)

    def fc_commit_tx(self, owner: str, committed_hash: bytes, fee: int = 0) -> Transaction:
        wallet = self.wallet(owner)
        op = self.pq_outpoint(owner)
        value = self.chain.utxos[op].value
        outputs = [TxOutput(wallet.pq_address(), value - fee)] if value > fee else []
        return self.signed(TxKind.FC_COMMIT, [(op, ("pq", wallet))], outputs, commit_payload(committed_hash))

    def fc_reveal_hashed(self, owner: str, label: str, path: str, fee: int = 0, dest: Address | None = None) -> Transaction:
        wallet = self.wallet(owner)
        op = self.outpoints[label]
        utxo = self.chain.utxos[op]
        sk = wallet.derived_sk(DerivationPath.parse(path))
        payload = RevealPayload(RevealMode.HASHED).serialize(self.group)
        outputs = [TxOutput(dest or wallet.pq_address(), utxo.value - fee)]
        return self.signed(TxKind.FC_REVEAL, [(op, ("pre", wallet, sk))], outputs, payload)

    def fc_flow_hashed(self, owner: str, label: str, path: str, fee: int = 0, commit_fee: int = 0):
        """Commit now, mine out the wait, return the ready reveal tx."""
        reveal = self.fc_reveal_hashed(owner, label, path, fee)
        self.mine_with([self.fc_commit_tx(owner, reveal.txid(), commit_fee)])
        wait = self.chain.utxos[self.outpoints[label]].wait_blocks(self.params.wait_blocks, self.params.wait_floor)
        self.mine(wait - 1)
        return reveal
