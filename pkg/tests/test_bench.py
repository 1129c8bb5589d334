import math

import numpy as np
import pytest

from csiid.bench import BenchConfig, instance_seed, random_instance, run_benchmark
from csiid.errors import PreconditionError
from csiid.labels import is_regular


def test_instances_are_deterministic():
    cfg = BenchConfig(n_values=(30,), repetitions=1)
    a = random_instance(cfg, 30, instance_seed(0, 30, 5))
    b = random_instance(cfg, 30, instance_seed(0, 30, 5))
    assert a.graph == b.graph and a.labels == b.labels
    assert a.treatment == b.treatment and a.outcome == b.outcome
    c = random_instance(cfg, 30, instance_seed(1, 30, 5))
    assert (c.graph, c.treatment) != (a.graph, a.treatment)


def test_instance_shape():
    cfg = BenchConfig(n_values=(40,), repetitions=1)
    for i in range(30):
        inst = random_instance(cfg, 40, instance_seed(3, 40, i))
        g = inst.graph
        assert inst.treatment and inst.outcome and not inst.treatment & inst.outcome
        assert set(inst.treatment | inst.outcome) == set(g.observed) - {"C"}
        if inst.controls.controls:
            assert inst.controls.controls == ("C",)
            assert not g.parents("C")
            assert is_regular(g, inst.labels)


def test_edge_density_within_three_sigma():
    n, reps = 50, 1000
    cfg = BenchConfig(n_values=(n,), repetitions=reps, p_control=0.0)
    p = cfg.p_edge(n)
    pairs = n * (n - 1) // 2
    counts = [len(random_instance(cfg, n, instance_seed(0, n, i)).graph.edges) for i in range(reps)]
    sigma = math.sqrt(pairs * p * (1 - p) / reps)
    assert abs(np.mean(counts) - pairs * p) <= 3 * sigma


def test_observed_fraction_within_three_sigma():
    n, reps = 50, 400
    cfg = BenchConfig(n_values=(n,), repetitions=reps, p_control=0.0)
    frac = [len(random_instance(cfg, n, instance_seed(0, n, i)).graph.observed) / n for i in range(reps)]
    sigma = math.sqrt(0.7 * 0.3 / (n * reps))
    assert abs(np.mean(frac) - 0.7) <= 3 * sigma


def test_single_repetition_collapses_interval():
    report = run_benchmark(BenchConfig(n_values=(30,), repetitions=1))
    for _, _, mean, lo, hi, _ in report.rows():
        assert lo == mean == hi


def test_untimed_csv_is_reproducible():
    cfg = BenchConfig(n_values=(30, 40), repetitions=10, seed=4, timing=False)
    a, b = run_benchmark(cfg).to_csv(), run_benchmark(cfg).to_csv()
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "n,algorithm,mean_runtime_s,ci_low,ci_high,pct_identifiable"
    assert len(lines) == 5
    assert lines[1].startswith("30,csi,NA,NA,NA,")


def test_process_pool_matches_serial():
    cfg = BenchConfig(n_values=(30,), repetitions=12, timing=False)
    par = BenchConfig(n_values=(30,), repetitions=12, timing=False, threads=2)
    assert run_benchmark(cfg).to_csv() == run_benchmark(par).to_csv()


def test_labels_never_hurt():
    report = run_benchmark(BenchConfig(n_values=(30, 50), repetitions=40, timing=False))
    assert report.monotonicity_violations() == 0
    rows = report.rows()
    for n in (30, 50):
        csi = next(r for r in rows if r[0] == n and r[1] == "csi")
        plain = next(r for r in rows if r[0] == n and r[1] == "plain")
        assert csi[5] >= plain[5]


def test_plot_writes_files(tmp_path):
    pytest.importorskip("matplotlib")
    report = run_benchmark(BenchConfig(n_values=(30, 40), repetitions=3))
    paths = report.plot(str(tmp_path / "b"))
    assert [p.rsplit("_", 1)[1] for p in paths] == ["runtime.png", "identifiable.png"]
    assert all((tmp_path / p.rsplit("/", 1)[1]).stat().st_size > 0 for p in paths)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"p_observed": 1.5},
        {"p_control": -0.1},
        {"repetitions": 0},
        {"n_values": (2,)},
        {"n_values": ()},
        {"edge_prob": "dense"},
        {"edge_prob": "2.0"},
        {"threads": 0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(PreconditionError):
        BenchConfig(**kwargs)


def test_fixed_edge_probability():
    cfg = BenchConfig(edge_prob="0.25")
    assert cfg.p_edge(10) == 0.25
    assert BenchConfig().p_edge(100) == pytest.approx(math.log(100) / 100)


def test_instance_without_controls_degenerates_to_plain_identification():
    from csiid.csi import identify_csi
    from csiid.estimand import is_identified
    from csiid.identification import identify, latent_project

    cfg = BenchConfig(n_values=(30,), repetitions=1, p_control=0.0)
    inst = random_instance(cfg, 30, instance_seed(0, 30, 0))
    assert inst.controls.controls == () and inst.labels.is_empty()
    a = identify_csi(inst.graph, inst.labels, inst.controls, inst.treatment, inst.outcome)
    b = identify(latent_project(inst.graph), inst.treatment, inst.outcome)
    assert is_identified(a) == is_identified(b)
    if is_identified(a):
        assert a.branches == (((), b),)
