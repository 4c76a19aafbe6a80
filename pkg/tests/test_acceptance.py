"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (see ``conftest.py``); the lines are
repeated in the terminal summary.  Tolerances are the stated ones and are not
tuned per run.
"""

import numpy as np
import pytest

from syndaware.channels import average_error_rate, classify_syndromes, ml_normalize
from syndaware.codes import catalog, parse_target
from syndaware.fisher import eps_csynd, limit_ratio_classical, ratio_row
from syndaware.haar import (
    default_noise,
    fig6_sweep,
    lemma1_average,
    lemma2_check,
    prop3_average,
    sample_haar,
    sample_rngs,
    theta_sq_average,
    thm2_ratio,
)
from syndaware.noise import depolarizing, enumerate_exact, enumerate_leading, enumerate_truncated, noise_from_name
from syndaware.protocols import run_classical, run_quantum
from syndaware.qfisher import covariance, random_mixed_theta, simplified_state_suite, sld_oracle
from syndaware.surface_mc import run_gap_experiment

from oracles import density_from_theta

EXACT_CODES = ["rep2", "rep3", "surface2", "surface3", "513", "steane", "carbon", "carbon_promoted"]
ALL_CODES = EXACT_CODES[:4] + ["surface4", "surface5"] + EXACT_CODES[4:]
TRUNCATE = {"surface5": 5}


def _target(code) -> int:
    return parse_target("Z", code.k)


def _table(name: str, eta: float, noise: str | None = None, z_only: bool = False):
    code = catalog(name)
    nz = noise_from_name(noise or default_noise(name), eta)
    if name in TRUNCATE:
        raw = enumerate_truncated(code, nz, TRUNCATE[name], z_only=z_only)
    else:
        raw = enumerate_exact(code, nz, z_only=z_only)
    return ml_normalize(raw, _target(code))


def _ratio(name: str, eta: float, theta: float = 0.0, **kw) -> float:
    code = catalog(name)
    return ratio_row(_table(name, eta, **kw), _target(code), theta).ratio


@pytest.mark.slow
def test_criterion_01_fisher_bounds(report):
    worst, bad = np.inf, []
    for name in EXACT_CODES:
        code = catalog(name)
        i = _target(code)
        for eta in (1e-4, 1e-3, 1e-2, 0.05, 0.1):
            table = ml_normalize(enumerate_exact(code, depolarizing(eta)), i)
            eps_i = average_error_rate(table, i)
            for theta in (0.0, 0.5):
                ec = eps_csynd(table, i, theta)
                lo = (1 - theta**2) / 2 * eps_i
                margin = min(ec - lo, eps_i - ec)
                worst = min(worst, margin)
                if not (lo - 1e-12 <= ec <= eps_i + 1e-12):
                    bad.append((name, eta, theta))
    ok = report(1, not bad, f"{len(EXACT_CODES)} codes x 5 eta x 2 theta, min margin {worst:.3e}, violations {bad}")
    assert ok


def test_criterion_02_low_error_ratios(report):
    r = {name: _ratio(name, 1e-4, noise="depolarizing") for name in ("surface2", "513", "steane", "surface3")}
    rz = {name: _ratio(name, 1e-4, noise="depolarizing", z_only=True) for name in ("steane", "surface3")}
    checks = {
        "surface2 = 0.5 +- 0.01": abs(r["surface2"] - 0.5) <= 0.01,
        "513 >= 0.99": r["513"] >= 0.99,
        "steane < 1": r["steane"] < 1.0,
        "surface3 < 1": r["surface3"] < 1.0,
        "steane Z-only >= 0.99": rz["steane"] >= 0.99,
        "surface3 Z-only >= 0.99": rz["surface3"] >= 0.99,
    }
    vals = ", ".join(f"{k}={v:.4f}" for k, v in r.items()) + ", " + \
        ", ".join(f"{k}(Z-only)={v:.4f}" for k, v in rz.items())
    failed = [k for k, v in checks.items() if not v]
    ok = report(2, not failed, f"{vals}; failed {failed}")
    assert ok


@pytest.mark.slow
def test_criterion_03_limit_matches_finite_eta(report):
    worst, bad = 0.0, []
    for name in ALL_CODES:
        code = catalog(name)
        i = _target(code)
        lead = enumerate_leading(code, noise_from_name(default_noise(name), 0.1))
        cls = classify_syndromes(lead, i, code.d)
        table = _table(name, 1e-4)
        for theta in (0.0, 0.5):
            lim = limit_ratio_classical(cls, theta)
            fin = ratio_row(table, i, theta).ratio
            rel = abs(fin - lim) / lim
            worst = max(worst, rel)
            if rel >= 0.01:
                bad.append((name, theta, fin, lim))
    ok = report(3, not bad, f"{len(ALL_CODES)} codes x 2 theta, max relative gap {worst:.2e}, failures {bad}")
    assert ok


@pytest.mark.slow
def test_criterion_04_haar_identities(report):
    items = []
    for k in range(1, 5):
        items.append((f"theta^2 k={k}", theta_sq_average(k), 1 / (2**k + 1)))
        items.append((f"delta k={k}", lemma1_average(k), 2.0 ** -(k + 2)))
    for code, noise in (("rep2", "bitflip"), ("surface2", "depolarizing")):
        for k in range(1, 4):
            items.append((f"{code}-{noise} ratio k={k}", thm2_ratio(code, k, noise=noise), 2.0 ** -(k + 1)))
    bad = [(label, q.mean, q.se) for label, q, exp in items if not q.agrees(exp, 5.0, 0.1)]
    n_diag = 0
    for k in (1, 2):
        m = prop3_average(k)
        for j in range(len(m.labels)):
            n_diag += 1
            mean, se = m.mean[j, j], m.se[j, j]
            if not (abs(mean - 2.0**-k) <= 5 * se and se / abs(mean) < 0.1):
                bad.append((f"schur diag k={k} j={j}", mean, se))
    zmax = max(abs(q.z(exp)) for _, q, exp in items)
    ok = report(4, not bad, f"{len(items)} scalar averages + {n_diag} diagonal entries, max |z| {zmax:.2f}, failures {bad}")
    assert ok


def test_criterion_05_pure_state_covariance(report):
    bad, dev = [], 0.0
    for k in (1, 2, 3):
        for rng in sample_rngs(500 + k, 100):
            res = lemma2_check(sample_haar(k, rng), tol=1e-9)
            dev = max(dev, res["max_dev"])
            if not res["ok"]:
                bad.append((k, res))
    ok = report(5, not bad, f"300 Haar states k=1..3, max eigenvalue deviation {dev:.1e}, failures {len(bad)}")
    assert ok


def test_criterion_06_sld_oracle(report):
    worst = 0.0
    for k in (1, 2):
        rng = np.random.default_rng(600 + k)
        for _ in range(50):
            theta = random_mixed_theta(k, rng)
            _, J = sld_oracle(density_from_theta(theta, k))
            Jf = np.linalg.inv(covariance(theta))
            worst = max(worst, float(np.abs(J - Jf).max() / max(1.0, np.abs(Jf).max())))
    ok = report(6, worst <= 1e-6, f"100 mixed states k=1,2, max scaled deviation {worst:.2e} (tol 1e-6)")
    assert ok


def test_criterion_07_simplified_state(report):
    worst = 0.0
    for k in (1, 2, 3):
        rng = np.random.default_rng(700 + k)
        i, Q = parse_target("Z", k), parse_target("X", k)
        for j in range(100):
            theta = sample_haar(k, rng).theta if j % 2 else random_mixed_theta(k, rng)
            p = float(rng.uniform(0.05, 0.6))
            suite = simplified_state_suite(theta, p, Q, i)
            worst = max(worst, float(np.abs(suite.jinv - suite.jinv_direct).max()))
    ok = report(7, worst <= 1e-8, f"300 states (half pure) k=1..3, max deviation {worst:.2e} (tol 1e-8)")
    assert ok


@pytest.mark.slow
def test_criterion_08_block_code_sweep(report):
    even, odd = ["rep2", "surface2", "carbon_promoted", "surface4"], ["rep3", "513", "steane", "surface3"]
    rows = {(r["code"], r["k"]): r for r in fig6_sweep(even + odd, [1, 2, 3])}
    bad_even, bad_odd, halves = [], [], []
    for name in even:
        for k in (1, 2):
            h = rows[(name, k + 1)]["mean"] / rows[(name, k)]["mean"]
            halves.append(h)
            if not 0.4 <= h <= 0.6:
                bad_even.append((name, k, round(h, 3)))
    for name in odd:
        r1 = rows[(name, 1)]
        for k in (2, 3):
            rk = rows[(name, k)]
            if abs(rk["mean"] - r1["mean"]) > 3 * np.hypot(rk["se"], r1["se"]):
                bad_odd.append((name, k, round(r1["mean"], 4), round(rk["mean"], 4)))
    ok = report(8, not bad_even and not bad_odd,
                f"even halving factors {min(halves):.3f}..{max(halves):.3f} (failures {bad_even}); "
                f"odd not flat within 3 SE: {bad_odd}")
    assert ok


@pytest.mark.slow
def test_criterion_09_estimator_efficiency(report):
    n, reps = 100_000, 2000
    table = _table("surface2", 0.05, noise="depolarizing")
    i = _target(catalog("surface2"))
    results = {p: run_classical(table, i, 0.5, n, reps, seed=900 + j, protocol=p)
               for j, p in enumerate(("agnostic", "csynd", "shuffled"))}
    theta = sample_haar(1, sample_rngs(907, 1)[0]).theta
    for mode in ("oracle_init", "rough_init"):
        results[mode] = run_quantum(theta, 0.2, parse_target("X", 1), parse_target("Z", 1), n, reps, seed=910, mode=mode)
    bad = []
    for name, res in results.items():
        crb = results["agnostic"].crb if name == "shuffled" else res.crb
        ratio = res.var / crb
        if not (0.9 <= ratio <= 1.2 and res.bias_ok):
            bad.append((name, round(ratio, 3), round(res.bias / res.bias_se, 2)))
    gain = results["agnostic"].crb / results["csynd"].crb
    detail = ", ".join(f"{k} {v.var / (results['agnostic'].crb if k == 'shuffled' else v.crb):.3f}"
                       for k, v in results.items())
    ok = report(9, not bad and gain > 1.1, f"var/CRB: {detail}; agnostic/csynd CRB {gain:.3f}; failures {bad}")
    assert ok


@pytest.mark.slow
def test_criterion_10_complementary_gap(report):
    main2 = run_gap_experiment(2, 0.01, 1_000_000, seed=1)
    main3 = run_gap_experiment(3, 0.003, 1_000_000, seed=2)
    runs = [main2, main3]
    for d in (2, 3):
        for eta in (0.003, 0.01, 0.03):
            if (d, eta) not in ((2, 0.01), (3, 0.003)):
                runs.append(run_gap_experiment(d, eta, 200_000, seed=10 * d + int(eta * 1000)))
    floor_bad = [(r.d, r.eta, round(r.ratio, 4)) for r in runs if r.ratio < 0.5 - 3 * r.ratio_se()]
    ok2 = abs(main2.ratio - 0.5) <= 0.05
    ok3 = main3.ratio >= 0.95
    ok = report(10, ok2 and ok3 and not floor_bad,
                f"d=2 eta=0.01 ratio {main2.ratio:.4f}+-{main2.ratio_se():.4f}; "
                f"d=3 eta=0.003 ratio {main3.ratio:.4f}+-{main3.ratio_se():.4f}; "
                f"{len(runs)} runs, below 0.5-3SE: {floor_bad}")
    assert ok


@pytest.mark.slow
def test_criterion_11_slopes_agree(report):
    etas = np.geomspace(1e-4, 1e-3, 5)
    worst, bad = 0.0, []
    for name in ALL_CODES:
        i = _target(catalog(name))
        rows = [ratio_row(_table(name, eta), i, 0.0) for eta in etas]
        s_eps = np.polyfit(np.log(etas), np.log([r.eps for r in rows]), 1)[0]
        s_cs = np.polyfit(np.log(etas), np.log([r.eps_csynd for r in rows]), 1)[0]
        worst = max(worst, abs(s_eps - s_cs))
        if abs(s_eps - s_cs) >= 0.05:
            bad.append((name, round(s_eps, 3), round(s_cs, 3)))
    ok = report(11, not bad, f"{len(ALL_CODES)} codes, max slope difference {worst:.4f}, failures {bad}")
    assert ok
