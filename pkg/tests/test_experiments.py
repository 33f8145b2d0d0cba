import json
import warnings

import pytest

from pts.errors import PtsError
from pts.experiments import (format_noise_table, format_timing_table, report_json,
                             run_noise_experiment, run_timing_benchmark)

SMALL = {"classes": ["circle", "two_circles", "blob"], "n_points": 40, "levels": [0.05, 0.3],
         "trials": 2, "pts": {"grid_k": 20, "perturb_m": 10}}


def test_clean_queries_are_perfect():
    rep = run_noise_experiment(dict(SMALL, levels=[0.0]))
    for r in rep["results"].values():
        assert r["per_level"] == [1.0] and r["mean"] == 1.0


def test_report_shape_and_table():
    rep = run_noise_experiment(SMALL)
    assert rep["seed"] == 0 and rep["config"]["n_points"] == 40
    assert set(rep["results"]) == {"w1", "bottleneck", "pts_geo", "pts_chordal"}
    for r in rep["results"].values():
        assert len(r["per_level"]) == 2
        assert sum(map(sum, r["confusion"])) == 2 * 3 * 2
        assert all(0 <= a <= 1 for a in r["per_level"])
    json.loads(report_json(rep))
    assert format_noise_table(rep).splitlines()[0].startswith("method")


def test_deterministic_across_threads():
    a = report_json(run_noise_experiment(SMALL, threads=1))
    b = report_json(run_noise_experiment(SMALL, threads=3))
    assert a == b
    assert a == report_json(run_noise_experiment(SMALL, threads=1))


def test_unknown_key():
    with pytest.raises(PtsError):
        run_noise_experiment({"bogus": 1})


def test_timing_small():
    cfg = {"n_points": 20, "pairs": 3, "repetitions": 5, "batches": 2, "grid_k": 10,
           "grid_sizes": [5, 10], "pts": {"perturb_m": 6, "subspace_p": 3}, "sweep_p": 2}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = run_timing_benchmark(cfg, threads=4)
    assert any("single-threaded" in str(w.message) for w in caught)
    assert rep["timings"]["chordal"]["ratio_to_chordal"] == 1.0
    assert set(rep["grid_sweep"]) == {"5", "10"}
    assert rep["diagram_sizes"] == [19]
    assert "ratio" in format_timing_table(rep)
    with pytest.raises(PtsError):
        run_timing_benchmark(dict(cfg, batches=1))
