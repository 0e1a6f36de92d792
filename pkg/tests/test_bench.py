import json
import math
import random
import statistics

import pytest

from comhash import BenchError
from comhash.bench import (
    REFERENCE_TIMINGS,
    BenchPoint,
    LinearFit,
    bench_params,
    fit_points,
    linear_fit,
    read_csv,
    read_reference_csv,
    reference_fit,
    run_bench,
    write_csv,
)
from comhash import cli


def test_exact_line_recovered():
    fit = linear_fit([(1, 3.0), (2, 5.0), (3, 7.0)])
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_singular_inputs_rejected():
    with pytest.raises(ValueError):
        linear_fit([(4, 1.0), (4, 2.0), (4, 3.0)])
    with pytest.raises(ValueError):
        linear_fit([(4, 1.0)])


def test_reference_fit_ec_column():
    fit = reference_fit("ec")
    # frozen from the closed-form least-squares oracle over the 13 rows
    assert fit.slope == pytest.approx(0.00796675228276824, rel=1e-9)
    assert fit.intercept == pytest.approx(-0.733436291739892, rel=1e-9)
    assert fit.r_squared == pytest.approx(0.9984174277223707, rel=1e-9)
    # and it lands on the published coefficients
    assert abs(fit.slope - 0.008) <= 0.05 * 0.008
    assert abs(fit.intercept - (-0.733)) <= 0.05


def test_reference_fit_modp_column():
    fit = reference_fit("modp")
    assert fit.slope == pytest.approx(0.13092224242567446, rel=1e-9)
    assert fit.intercept == pytest.approx(-42.06310391036908, rel=1e-9)
    assert abs(fit.slope - 0.13) <= 0.05 * 0.13


def test_noisy_line_recovered_within_3_sigma():
    # uniform noise of half-width eps has variance eps^2 / 3
    slope_true, intercept_true, eps = 0.004, -0.2, 0.05
    xs = [float(x) for x in (4, 8, 16, 32, 64, 128, 256, 512)]
    n = len(xs)
    xbar = statistics.fmean(xs)
    sxx = sum((x - xbar) ** 2 for x in xs)
    sigma = eps / math.sqrt(3.0)
    se_slope = sigma / math.sqrt(sxx)
    se_intercept = sigma * math.sqrt(1.0 / n + xbar**2 / sxx)
    rng = random.Random(314)
    hits = 0
    for _ in range(100):
        pts = [(x, slope_true * x + intercept_true + rng.uniform(-eps, eps))
               for x in xs]
        fit = linear_fit(pts)
        if (abs(fit.slope - slope_true) <= 3 * se_slope
                and abs(fit.intercept - intercept_true) <= 3 * se_intercept):
            hits += 1
    assert hits >= 99  # 3-sigma misses should be rare


def test_run_bench_single_trial(toy_subgroup):
    points = run_bench("modp", [4], trials=1, seed=5, params=toy_subgroup)
    assert len(points) == 1
    p = points[0]
    assert (p.backend, p.n, p.trials) == ("modp", 4, 1)
    assert p.mean_s > 0 and p.stddev_s == 0.0


def test_run_bench_full_size_sweep_shape(toy_subgroup):
    sizes = [4 * 2**i for i in range(13)]  # 4 .. 16384
    points = run_bench("modp", sizes, trials=1, seed=6, params=toy_subgroup)
    assert [p.n for p in points] == sizes
    assert len(points) == 13
    # time grows with the participant count at the large end
    assert points[-1].mean_s > points[0].mean_s


def test_run_bench_rejects_bad_args(toy_subgroup):
    with pytest.raises(BenchError):
        run_bench("modp", [4], trials=0, params=toy_subgroup)
    with pytest.raises(BenchError):
        run_bench("modp", [0], trials=1, params=toy_subgroup)


def test_bench_params_selects_backend():
    assert bench_params("ec", 8).name == "toy17"
    assert bench_params("modp", 5).modulus == 23


def test_csv_round_trip(tmp_path, toy_subgroup):
    points = run_bench("modp", [4, 8], trials=2, seed=7, params=toy_subgroup)
    path = tmp_path / "out.csv"
    write_csv(points, str(path))
    loaded = read_csv(str(path))
    assert [(p.backend, p.n, p.trials) for p in loaded] == \
        [(p.backend, p.n, p.trials) for p in points]
    assert loaded[0].mean_s == pytest.approx(points[0].mean_s, abs=1e-9)


def test_read_reference_csv_matches_builtin(tmp_path):
    path = tmp_path / "table.csv"
    with open(path, "w") as fh:
        fh.write("participants,ec_seconds,modp_seconds\n")
        for n, ec, modp in REFERENCE_TIMINGS:
            fh.write(f"{n},{ec},{modp}\n")
    rows = read_reference_csv(str(path))
    assert tuple(rows) == REFERENCE_TIMINGS
    fit = reference_fit("ec", rows)
    assert fit.slope == pytest.approx(0.00796675228276824, rel=1e-9)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_bench_writes_csv_and_fit(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    rc = cli.main(["bench", "--backend", "modp", "--bits", "5",
                   "--sizes", "2,4,8", "--trials", "2", "--seed", "3",
                   "--out", str(out), "--fit"])
    assert rc == 0
    rows = read_csv(str(out))
    assert [p.n for p in rows] == [2, 4, 8]
    fit = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert set(fit) == {"slope", "intercept", "r2"}


def test_cli_bench_stdout_table(capsys):
    rc = cli.main(["bench", "--backend", "ec", "--bits", "8",
                   "--sizes", "2,3", "--trials", "1"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "backend,N,trials,mean_s,stddev_s"
    assert len(lines) == 3


def test_cli_verify_bundled_table(capsys):
    rc = cli.main(["verify"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert abs(report["ec"]["slope"] - 0.008) <= 0.05 * 0.008
    assert abs(report["ec"]["intercept"] + 0.733) <= 0.05
    assert abs(report["modp"]["slope"] - 0.13) <= 0.05 * 0.13
    assert 0.0 <= report["ec"]["r2"] <= 1.0


def test_cli_verify_explicit_table(tmp_path, capsys):
    path = tmp_path / "table.csv"
    with open(path, "w") as fh:
        fh.write("participants,ec_seconds,modp_seconds\n")
        fh.write("1,1.0,2.0\n2,2.0,4.0\n3,3.0,6.0\n")
    rc = cli.main(["verify", "--table1", str(path)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ec"]["slope"] == pytest.approx(1.0)
    assert report["modp"]["slope"] == pytest.approx(2.0)


def test_cli_rejects_bad_sizes():
    with pytest.raises(SystemExit):
        cli.main(["bench", "--backend", "modp", "--sizes", "4,-2"])
