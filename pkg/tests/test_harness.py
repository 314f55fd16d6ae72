import io

import numpy as np
import pytest

from rdsma.netgen import MixingSpec
from rdsma.rdssim import SamplingDesign
from rdsma.estimate import MaConfig, child_rng
from rdsma.bootstrap import BootstrapConfig
from rdsma.harness import (StudySpec, parse_study_config, run_replicate,
                           run_sensitivity_N, run_study)


def tiny_spec(**kw):
    defaults = dict(
        networks=[MixingSpec(n=120, prevalence=0.25, mean_degree=4.0)],
        designs=[SamplingDesign(n=40, n_seeds=4)],
        estimators=("mean", "vh", "ma"),
        replications=3,
        ma=MaConfig(pop_size=0, iterations=1, m1=2, m2=2, tetrad_n=1500),
        master_seed=77,
    )
    defaults.update(kw)
    return StudySpec(**defaults)


def csv_text(result):
    buf = io.StringIO()
    result.write_csv(buf)
    return buf.getvalue()


class TestRunStudy:
    def test_row_per_cell_and_estimator(self):
        res = run_study(tiny_spec())
        assert len(res.rows) == 3
        assert [r["estimator"] for r in res.rows] == ["mean", "vh", "ma"]
        for r in res.rows:
            assert r["replications"] == 3
            assert r["bias"] == pytest.approx(r["mean_estimate"] - 0.25, abs=1e-12)

    def test_true_prevalence_is_realized_count(self):
        # floor(N*mu + 0.5)/N: with N=121, mu=0.25 the truth is 30/121
        spec = tiny_spec(networks=[MixingSpec(n=121, prevalence=0.25, mean_degree=4.0)])
        res = run_study(spec)
        row = res.rows[0]
        assert row["bias"] == pytest.approx(row["mean_estimate"] - 30 / 121, abs=1e-12)

    def test_deterministic_across_threads(self):
        r1 = run_study(tiny_spec(threads=1))
        r2 = run_study(tiny_spec(threads=2))
        assert csv_text(r1) == csv_text(r2)

    def test_deterministic_rerun(self):
        assert csv_text(run_study(tiny_spec())) == csv_text(run_study(tiny_spec()))

    def test_seed_changes_results(self):
        r1 = run_study(tiny_spec())
        r2 = run_study(tiny_spec(master_seed=78))
        assert csv_text(r1) != csv_text(r2)

    def test_bootstrap_columns(self):
        spec = tiny_spec(bootstrap=BootstrapConfig(B=10, mode="fast"),
                         replications=2)
        res = run_study(spec)
        ma_row = [r for r in res.rows if r["estimator"] == "ma"][0]
        assert ma_row["mean_boot_se"] > 0
        assert 0.0 <= ma_row["coverage_95"] <= 1.0
        assert "coverage_90" in res.columns

    def test_infeasible_cell_skipped(self, capsys):
        bad = MixingSpec(n=20, prevalence=0.5, mean_degree=12.0, homophily_R=1000.0)
        spec = tiny_spec(networks=[MixingSpec(n=120, prevalence=0.25, mean_degree=4.0), bad])
        res = run_study(spec)
        skipped = [r for r in res.rows if r["estimator"] == "skipped"]
        assert len(skipped) == 1
        assert skipped[0]["homophily_R"] == 1000.0
        assert "infeasible" in capsys.readouterr().err

    def test_fewer_seeds_reduce_seed_bias(self):
        # same target size, biased seeds; more waves wash the seeds out
        nets = [MixingSpec(n=400, prevalence=0.25, mean_degree=6.0, homophily_R=5.0)]
        spec_many = StudySpec(
            networks=nets,
            designs=[SamplingDesign(n=160, n_seeds=20, seed_mode="pps_infected")],
            estimators=("mean",), replications=60, master_seed=5)
        spec_few = StudySpec(
            networks=nets,
            designs=[SamplingDesign(n=160, n_seeds=6, seed_mode="pps_infected")],
            estimators=("mean",), replications=60, master_seed=5)
        bias_many = run_study(spec_many).rows[0]["bias"]
        bias_few = run_study(spec_few).rows[0]["bias"]
        assert bias_few < bias_many


class TestSensitivity:
    def test_assumed_sizes_vary_only_n(self):
        spec = tiny_spec(replications=2)
        res = run_sensitivity_N(spec, [120, 160, 200])
        ma_rows = [r for r in res.rows if r["estimator"] == "ma"]
        assert [r["assumed_N"] for r in ma_rows] == [120, 160, 200]
        ref = [r for r in res.rows if r["estimator"] in ("mean", "vh")]
        assert len(ref) == 2

    def test_samples_identical_across_grid(self):
        # the replicate stream is a pure function of (seed, cell, rep)
        spec = tiny_spec()
        from rdsma.netgen import gen_bernoulli_mixing
        from rdsma.rdssim import run_rds, select_seeds
        nets, samples = [], []
        for _ in range(2):
            net = gen_bernoulli_mixing(spec.networks[0], child_rng(77, 0, 0, 0))
            rng_s = child_rng(77, 0, 0, 1)
            seeds = select_seeds(net, spec.designs[0], rng_s)
            samples.append(run_rds(net, spec.designs[0], seeds, rng_s))
        assert np.array_equal(samples[0].nodes, samples[1].nodes)

    def test_rejects_n_below_sample(self):
        spec = tiny_spec(replications=1)
        with pytest.raises(ValueError, match="below sample size"):
            run_sensitivity_N(spec, [10])


GOOD_CONFIG = """
# null-case study at desk scale
network.N = 1000
network.prevalence = 0.2
network.mean_degree = 7
network.homophily_R = 1, 3, 5
network.activity_w = 1
design.n = 500
design.n_seeds = 10
design.seed_bias = infected
design.coupons = 2
estimators = mean, vh, ma
replications = 200
ma.iterations = 3
ma.m1 = 10
ma.m2 = 10
ma.tetrad_n = 20000
bootstrap.B = 200
bootstrap.mode = fast
bootstrap.levels = 0.95, 0.90
seed = 42
threads = 2
"""


class TestConfigParsing:
    def test_full_config(self):
        spec = parse_study_config(GOOD_CONFIG)
        assert len(spec.networks) == 3
        assert {ns.homophily_R for ns in spec.networks} == {1.0, 3.0, 5.0}
        assert spec.designs[0].seed_mode == "pps_infected"
        assert spec.replications == 200
        assert spec.ma.m1 == 10 and spec.ma.tetrad_n == 20000
        assert spec.bootstrap.B == 200 and spec.bootstrap.ci_levels == (0.95, 0.90)
        assert spec.master_seed == 42 and spec.threads == 2

    def test_defaults(self):
        spec = parse_study_config("replications = 5")
        assert len(spec.networks) == 1
        assert spec.networks[0].n == 1000
        assert spec.designs[0].coupons == 2
        assert spec.bootstrap is None
        assert spec.estimators == ("mean", "vh", "ma")

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            parse_study_config("network.size = 100")

    def test_bad_seed_bias(self):
        with pytest.raises(ValueError, match="seed_bias"):
            parse_study_config("design.seed_bias = all")

    def test_list_on_scalar_key_rejected(self):
        with pytest.raises(ValueError, match="single value"):
            parse_study_config("replications = 5, 6")

    def test_grid_product(self):
        spec = parse_study_config(
            "network.N = 100, 200\nnetwork.homophily_R = 1, 5\ndesign.n = 40")
        assert len(spec.networks) == 4
        assert len(spec.designs) == 1

    def test_missing_value_rejected(self):
        with pytest.raises(ValueError, match="expected key"):
            parse_study_config("replications 5")


class TestRunReplicate:
    def test_returns_all_estimates(self):
        out = run_replicate(MixingSpec(n=100, prevalence=0.3, mean_degree=4.0),
                            SamplingDesign(n=30, n_seeds=3),
                            ("mean", "vh", "ma"),
                            MaConfig(pop_size=0, iterations=1, m1=2, m2=2, tetrad_n=800),
                            None, 3, 0, 0)
        assert set(out) >= {"true_mu", "sample_size", "mean", "vh", "ma"}
        assert out["sample_size"] == 30
