"""Acceptance criteria 1-11.

Each criterion prints one ``PASS``/``FAIL`` line.  Run with ``pytest -v
tests/test_acceptance.py`` or directly as ``python3 tests/test_acceptance.py``.
"""

import contextlib
import io
import math
import sys
import time

import numpy as np
import pytest

from tailscope.cli import main as cli_main
from tailscope.distributions import (
    Gaussian,
    Laplace,
    Pareto,
    ReciprocalPareto,
    SymmetricPareto,
    SymmetricReciprocalPareto,
    SymmetricStable,
    ThreePointExtremal,
    ptd_outlier_gain_condition,
    put_tail_down,
    reciprocal_pareto_stats,
    sample,
)
from tailscope.estimators import first_kind_prob_mc, max_ratio_prob_mc, stability_index_mc
from tailscope.multivariate import brute_force_hull_area, convex_hull_area, pairwise_distances
from tailscope.oracles import (
    exact_max_ratio_prob,
    exact_min_ratio_prob,
    gaussian_first_kind_reference,
    limit_min_ratio,
)


def criterion_1():
    t0 = time.perf_counter()
    alpha = 0.089115
    var, tail = reciprocal_pareto_stats(alpha)
    closed_ok = abs(tail - 0.0417598) <= 1e-6
    x = sample(SymmetricReciprocalPareto(alpha), 10**6, master_seed=1).values
    freq = float(np.mean(np.abs(x) >= 3 * math.sqrt(var)))
    se = math.sqrt(tail * (1 - tail) / len(x))
    mc_ok = abs(freq - tail) <= 3 * se
    elapsed = time.perf_counter() - t0
    ok = closed_ok and mc_ok and elapsed < 5
    return ok, f"tail={tail:.7f} mc={freq:.7f} se={se:.1e} t={elapsed:.2f}s"


def criterion_2():
    m = ThreePointExtremal(1.0, 3.0)
    tail, mean, var = m.tail_prob(3.0), m.mean(), m.variance()
    ok = tail == 1 / 9 and mean == 0.0 and var == 1.0
    return ok, f"P(|X|>=3)={tail!r} mean={mean!r} var={var!r}"


def criterion_3():
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0):
        for n in (2, 5, 20, 50):
            for kappa in (0.2, 0.5, 0.8):
                worst = max(worst, abs(exact_max_ratio_prob(Pareto(alpha, 1.0), n, kappa) - kappa**alpha))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-7 and elapsed < 30, f"max dev={worst:.2e} t={elapsed:.2f}s"


def criterion_4():
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0):
        for n in (2, 5, 20):
            for rho in (1.5, 2.0, 4.0):
                complement = 1.0 - exact_min_ratio_prob(ReciprocalPareto(alpha), n, rho)
                worst = max(worst, abs(complement - limit_min_ratio(alpha, rho)))
    return worst <= 1e-7, f"max dev={worst:.2e}"


def criterion_5():
    t0 = time.perf_counter()
    parts, ok = [], True
    for alpha in (0.5, 0.7, 1.5):
        lo = first_kind_prob_mc(SymmetricStable(alpha), 10**2, 3.0, 20_000, seed=20251014)
        mid = first_kind_prob_mc(SymmetricStable(alpha), 10**3, 3.0, 20_000, seed=20251014)
        hi = first_kind_prob_mc(SymmetricStable(alpha), 10**4, 3.0, 20_000, seed=20251014)
        cell = hi.estimate + 3 * hi.std_error < lo.estimate - 3 * lo.std_error
        ok &= cell
        parts.append(f"a={alpha}: {lo.estimate:.4f}/{mid.estimate:.4f}/{hi.estimate:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    return ok, "; ".join(parts) + f" t={elapsed:.0f}s"


def criterion_6():
    grid = (2, 5, 10, 100, 1000, 10**4, 10**5)
    gauss = [exact_max_ratio_prob(Gaussian(), n, 0.5) for n in grid]
    decreasing = all(a > b for a, b in zip(gauss, gauss[1:])) and gauss[-1] < 1e-10
    pareto_dev = max(abs(exact_max_ratio_prob(Pareto(2.0, 1.0), n, 0.5) - 0.25) for n in grid)
    stays = pareto_dev <= 1e-8
    # pooled 50-seed battery over six cells
    cells = [(Gaussian(), 2), (Gaussian(), 5), (Gaussian(), 20), (Pareto(2.0), 2), (Pareto(2.0), 20), (Pareto(2.0), 200)]
    hits = runs = 0
    for model, n in cells:
        truth = exact_max_ratio_prob(model, n, 0.5)
        for seed in range(50):
            hits += max_ratio_prob_mc(model, n, 0.5, 5000, seed=seed).within(truth)
            runs += 1
    battery = hits / runs >= 0.99
    ok = decreasing and stays and battery
    return ok, f"gauss n=1e5 {gauss[-1]:.1e}; pareto dev={pareto_dev:.1e}; battery {hits}/{runs}"


def criterion_7():
    case1 = ptd_outlier_gain_condition(Laplace(1.0), 0.5, 20.0)
    case2 = ptd_outlier_gain_condition(SymmetricPareto(3.0, 1.0), 0.5, 100.0)
    base = Laplace(1.0)
    model = put_tail_down(base, 0.5)
    x = sample(model, 10**6, master_seed=7).values
    sq = x * x
    se = sq.std() / math.sqrt(len(x))
    target = 0.5 * base.variance()
    var_ok = abs(sq.mean() - target) <= 3 * se
    ok = case1 and case2 and var_ok
    return ok, f"laplace={case1} pareto3={case2} var={sq.mean():.5f} vs {target:.5f} (se {se:.1e})"


def criterion_8():
    est = first_kind_prob_mc(Gaussian(), 10**4, 3.0, 10**5, seed=8)
    ref = gaussian_first_kind_reference(3.0)
    ok = abs(ref - 0.0026998) <= 1e-7 and est.within(ref)
    return ok, f"mc={est.estimate:.6f} se={est.std_error:.1e} ref={ref:.7f}"


def criterion_9():
    alpha, se, _ = stability_index_mc(Pareto(1.5, 1.0), 10**3, 0.5, 10**5, seed=9)
    return abs(alpha - 1.5) <= 3 * se, f"alpha_hat={alpha:.4f} se={se:.4f}"


def criterion_10():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(200):
        pts = rng.standard_normal((12, 2))
        fast, slow = convex_hull_area(pts).area, brute_force_hull_area(pts)
        worst = max(worst, abs(fast - slow) / slow)
    motion = 0.0
    for _ in range(50):
        pts = rng.standard_normal((40, 2))
        theta = rng.uniform(0, 2 * math.pi)
        rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        moved = pts @ rot.T + rng.uniform(-100, 100, 2)
        a = convex_hull_area(pts).area
        motion = max(motion, abs(convex_hull_area(moved).area - a) / a)
        d = pairwise_distances(pts)
        motion_d = np.max(np.abs(pairwise_distances(pts @ rot.T) - d))
        if motion_d > 1e-12:
            return False, f"pairwise distances moved by {motion_d:.1e}"
    ok = worst <= 1e-9 and motion <= 1e-9
    return ok, f"hull vs brute force rel={worst:.1e}; rigid motion rel={motion:.1e}"


def _cli_csv(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(argv)
    return code, buf.getvalue()


def criterion_11():
    runs = [
        ["converge", "first-kind", "--model", "stable:alpha=0.7", "--k", "3", "--ngrid", "100,1000,10000",
         "--reps", "20000", "--seed", "42"],
        ["converge", "max-ratio", "--model", "laplace:b=1", "--kappa", "0.5", "--ngrid", "5,50,500",
         "--reps", "5000", "--seed", "3"],
        ["hull", "--model", "gaussian", "--n", "10", "--kappa", "0.5", "--mode", "order-kappa",
         "--reps", "2000", "--seed", "5"],
    ]
    for argv in runs:
        code1, one = _cli_csv(argv + ["--threads", "1"])
        code8, eight = _cli_csv(argv + ["--threads", "8"])
        if code1 or code8 or one != eight or not one:
            return False, f"{argv[0]} {argv[1]} differs between thread counts"
    return True, f"{len(runs)} CLI runs byte-identical with 1 and 8 threads"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


def _report(i, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {i}: {detail}", flush=True)


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    with capsys.disabled():
        print()
        _report(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for i, fn in CRITERIA.items():
        ok, detail = fn()
        _report(i, ok, detail)
        failures += not ok
    sys.exit(1 if failures else 0)
