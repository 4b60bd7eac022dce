"""Assertions over the bundled scenario runs: the protocol stories the
simulator must reproduce, with exact value accounting."""

import pytest

from qcspend.fawkescoin import ChallengeStatus
from qcspend.ledger import TxKind
from qcspend.lifted_fawkescoin import LfcState
from qcspend.scenarios import BUNDLED, load_scenario, run_adversary, run_scenario
from qcspend.simulation import ConfigError, ScenarioConfig, Simulation


def run(name):
    return run_scenario(name)


class TestHonestFawkesCoin:
    def test_spends_finalize_and_fees_are_the_only_cost(self):
        sim = run("honest-fc")
        assert sim.profits()["alice"] == -220  # 2 x (fee 100 + commit fee 10)
        assert sim.chain.utxo(sim.grant_outpoint("u-hashed")) is None
        assert sim.chain.utxo(sim.grant_outpoint("u-derived")) is None
        assert not sim.chain.violations
        sim.chain.recompute_balance()

    def test_canary_kill_pays_bounty(self):
        sim = run("honest-fc")
        assert sim.chain.canary.killed_at == 5
        assert sim.profits()["oracle"] == sim.config.params.canary_bounty

    def test_classical_agent_cannot_kill_the_canary(self):
        config = ScenarioConfig.from_dict(
            {
                "name": "classical-killer",
                "blocks": 30,
                "agents": [
                    {"id": "m0", "kind": "miner"},
                    {"id": "carl", "kind": "user", "quantum": False,
                     "script": [{"height": 5, "do": "kill_canary"}]},
                ],
                "miners": ["m0"],
            }
        )
        sim = Simulation(config)
        sim.run()
        assert sim.chain.canary.killed_at is None  # alive through the run
        assert any("cannot kill" in a for a in sim.agents["carl"].actions)


class TestFrontRunner:
    def test_nets_zero_against_fawkescoin(self):
        sim = run("front-runner")
        assert sim.profits()["eve"] == 0
        assert sim.profits()["alice"] == -100  # just the fee
        # the honest spend completed
        assert sim.chain.utxo(sim.grant_outpoint("u1")) is None

    def test_positive_against_unprotected_direct_spending(self):
        sim = run("front-runner-direct")
        assert sim.profits()["eve"] == 50_000
        assert sim.profits()["bob"] == -50_000


class TestLfcSpammer:
    def test_spammer_loses_the_whole_output_to_the_miner(self):
        sim = run("lfc-spammer")
        assert sim.profits()["spammer"] == -100_000
        record = next(iter(sim.chain.lfc_by_hash.values()))
        assert record.state is LfcState.CLAIMED_BY_MINER
        # sigma hit the chain exactly once (in the claim), never earlier
        claims = [t for b in sim.chain.blocks for t in b.transactions if t.kind is TxKind.LFC_CLAIM]
        assert len(claims) == 1


class TestLfcDelay:
    def test_attacker_pays_the_flat_fine_and_victim_is_compensated(self):
        sim = run("lfc-delay")
        assert sim.profits()["victim"] == 3_350  # 3.35% of 100,000
        record = next(iter(sim.chain.lfc_by_hash.values()))
        assert record.state is LfcState.EXPIRED_FINED
        assert record.resolved_height - record.height_included == 301
        # mallory mined exactly one block and the fine came out of it
        reward = sim.config.params.block_reward
        assert sim.profits()["mallory"] == reward - 3_350
        # the victim's output is unlocked again
        assert sim.grant_outpoint("u-victim") not in sim.chain.lfc_locks


class TestFraudProof:
    def test_deposit_redistribution_is_exact(self):
        sim = run("fraud-proof")
        assert sim.profits()["thief"] == -80_500  # the whole deposit
        assert sim.profits()["baiter"] == 80_000  # deposit minus the 500 fee
        record = next(iter(sim.chain.challenges.values()))
        assert record.status is ChallengeStatus.DEFEATED
        assert record.fee + 80_000 == record.deposit_value
        sim.chain.recompute_balance()


SALVAGE_EXPECTED = {
    # (scenario, utxo) -> survives?        owner profit, notes encoded in tests below
    ("salvage-restrictive", "u-naked"): True,
    ("salvage-restrictive", "u-lost"): True,
    ("salvage-restrictive", "u-steal"): True,
    ("salvage-unrestrictive", "u-naked"): False,
    ("salvage-unrestrictive", "u-lost"): True,
    ("salvage-unrestrictive", "u-steal"): False,
    ("salvage-permissive", "u-naked"): False,
    ("salvage-permissive", "u-lost"): False,
    ("salvage-permissive", "u-steal"): False,
}


class TestSalvageMatrix:
    def test_restrictive_burns_everything(self):
        sim = run("salvage-restrictive")
        for name in ("u-naked", "u-lost", "u-steal"):
            assert sim.chain.utxo(sim.grant_outpoint(name)) is not None
        rules = [r for _, r, _ in sim.chain.violations]
        assert rules.count("fc-mode") == 3
        assert sim.profits()["owner"] == 0
        assert sim.profits()["thief"] == 0

    def test_unrestrictive_statuses(self):
        sim = run("salvage-unrestrictive")
        # naked: the owner recovered it (value moved, owner whole)
        assert sim.chain.utxo(sim.grant_outpoint("u-naked")) is None
        # lost: unspendable -- the mode rejection left it in place
        assert sim.chain.utxo(sim.grant_outpoint("u-lost")) is not None
        # stealable: quantum loot -- classical thief aborted, quantum took it
        assert sim.chain.utxo(sim.grant_outpoint("u-steal")) is None
        assert sim.profits()["pickpocket"] == 0
        assert sim.profits()["thief"] == 30_000
        assert sim.profits()["owner"] == -30_000
        assert any("steal aborted" in a for a in sim.agents["pickpocket"].actions)

    def test_permissive_statuses(self):
        sim = run("salvage-permissive")
        assert sim.chain.utxo(sim.grant_outpoint("u-naked")) is None
        assert sim.chain.utxo(sim.grant_outpoint("u-lost")) is None  # owner recovered
        assert sim.chain.utxo(sim.grant_outpoint("u-steal")) is None  # classical loot
        assert sim.profits()["pickpocket"] == 30_000
        assert sim.profits()["owner"] == -30_000


@pytest.fixture(scope="module")
def epoch_sim():
    return run("epoch-mechanics")


class TestEpochMechanics:
    @pytest.fixture
    def sim(self, epoch_sim):
        return epoch_sim

    def test_era_starts_at_kill_plus_countdown(self, sim):
        assert sim.chain.canary.killed_at == 50
        assert sim.chain.era_start() == 8_050

    def test_rotation_lengths(self, sim):
        for epoch in sim.chain.epochs:
            expected = 1_900 if epoch.kind.value == "fc" else 500
            assert epoch.length == expected

    def test_epoch_of_consistent_with_cumulative_lengths(self, sim):
        running = sim.chain.era_start()
        for epoch in sim.chain.epochs:
            assert epoch.start == running
            running = epoch.end
        for height in range(8_050, 30_001, 97):
            epoch = sim.chain.epoch_of(height)
            assert epoch.start <= height < epoch.end

    def test_exactly_one_extension(self, sim):
        extensions = [e for e in sim.chain.epochs if e.extension]
        assert len(extensions) == 1
        assert extensions[0].start == 12_850

    def test_no_commitments_inside_cutoff_windows(self, sim):
        for block in sim.chain.blocks[1:]:
            epoch = sim.chain.epoch_of(block.height)
            for tx in block.transactions:
                if tx.kind is TxKind.FC_COMMIT:
                    assert epoch.offset(block.height) < 1_800
                if tx.kind is TxKind.LFC_COMMIT:
                    assert epoch.offset(block.height) < 200
        rules = [r for _, r, _ in sim.chain.violations]
        assert "fc-commit-cutoff" in rules
        assert "lfc-commit-cutoff" in rules

    def test_extension_withholds_the_fine_until_rotation(self, sim):
        fake = next(r for r in sim.chain.lfc_by_hash.values() if r.state is LfcState.EXPIRED_FINED)
        extension = next(e for e in sim.chain.epochs if e.extension)
        assert fake.resolved_height == extension.end - 1  # paid only at the extension's end
        assert fake.height_included == 12_549

    def test_burst_was_the_trigger(self, sim):
        trigger_epoch_end = 12_850
        claims = [h for h in sim.chain.lfc_claim_heights if trigger_epoch_end - 100 <= h < trigger_epoch_end]
        assert len(claims) == 6 > sim.config.params.extension_threshold()

    def test_balance_holds_over_the_full_run(self, sim):
        sim.chain.recompute_balance()


class TestDeterminism:
    @pytest.mark.parametrize("name", ["honest-fc", "front-runner", "fraud-proof"])
    def test_same_seed_byte_identical(self, name):
        a, b = run(name), run(name)
        assert a.snapshot() == b.snapshot()
        assert a.report() == b.report()

    def test_different_seed_differs(self):
        a = run_scenario("honest-fc", seed=1)
        b = run_scenario("honest-fc", seed=2)
        assert a.snapshot() != b.snapshot()


class TestAdversaryReports:
    def test_front_runner_report(self):
        fc, direct = run_adversary("FrontRunner")
        assert fc.adversary_profit == 0
        assert direct.adversary_profit == 50_000
        assert any("front-ran" in a for a in direct.outcome_of("eve").actions)

    def test_spammer_report(self):
        (report,) = run_adversary("Spammer")
        assert report.adversary_profit == -100_000

    def test_loot_thief_and_baiter(self):
        (report,) = run_adversary("LootThief")
        assert report.adversary_profit == -80_500
        assert report.outcome_of("baiter").profit == 80_000

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            run_adversary("Gremlin")


class TestConfigStrictness:
    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown scenario fields"):
            ScenarioConfig.from_dict({"name": "x", "blocks": 1, "agents": [], "miners": [], "zorp": 1})

    def test_unknown_agent_kind_rejected(self):
        with pytest.raises(ConfigError, match="unknown agent kind"):
            ScenarioConfig.from_dict(
                {"name": "x", "blocks": 1, "agents": [{"id": "a", "kind": "wizard"}], "miners": []}
            )

    def test_bad_params_rejected(self):
        with pytest.raises(ConfigError, match="bad params"):
            ScenarioConfig.from_dict(
                {"name": "x", "blocks": 1, "agents": [], "miners": [], "params": {"nope": 3}}
            )

    def test_all_bundled_parse(self):
        for name in BUNDLED:
            config = load_scenario(name)
            assert config.name == name
