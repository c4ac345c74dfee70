"""End-to-end acceptance criteria, one test per criterion.

Each test records a one-line verdict in ``RESULTS``; the conftest hook
prints them at the end of the session.
"""

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from thermoshift.demos import four_state_chain, six_state_chain, symmetric_two_well
from thermoshift.interval_app import p_coefficients, splitting_experiment
from thermoshift.interval_app.demos import two_half_family
from thermoshift.metastability import splitting_limit
from thermoshift.verify import complement_identities, coupling_identities, pressure_oracles

ROOT = Path(__file__).resolve().parents[1]
RESULTS: dict = {}


def verdict(number: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[number] = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(RESULTS[number])
    assert ok, RESULTS[number]


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def by_name(props):
    return {p.name: p for p in props}


@pytest.fixture(scope="module")
def complement_suite():
    props, seconds = timed(complement_identities, 0)
    return by_name(props), seconds


@pytest.fixture(scope="module")
def four_state():
    shift, fam = four_state_chain()
    assert len(fam.grid) == 20
    rep, seconds = timed(splitting_limit, fam, shift, [[1, 3], [1, 2, 3, 4]])
    return rep, seconds


@pytest.fixture(scope="module")
def six_state():
    shift, fam = six_state_chain()
    return splitting_limit(fam, shift)


@pytest.fixture(scope="module")
def interval_run():
    fam = two_half_family(1.0, 2.0)
    rep, seconds = timed(splitting_experiment, fam, cell_depth=8, lebesgue_depth=10, mc_iterates=10**6, mc_orbits=20000, mc_eps=1e-3, seed=0)
    return rep, seconds


def test_criterion_01_schur_frobenius(complement_suite):
    props, seconds = complement_suite
    p = props["schur_frobenius_residual"]
    ok = p.ok and p.total == 300 and seconds < 5.0
    verdict(1, "Schur-Frobenius identity", ok, f"{p.passed}/{p.total} residuals < 1e-12 (worst {p.worst:.2e}), suite {seconds:.2f} s")


def test_criterion_02_eigen_transfer(complement_suite):
    props, seconds = complement_suite
    p = props["eigen_transfer_residual"]
    ok = p.ok and p.total == 100 and seconds < 10.0
    verdict(2, "eigenvalue transfer", ok, f"{p.passed}/{p.total} both directions < 1e-9 (worst {p.worst:.2e})")


def test_criterion_03_complement_radius(complement_suite):
    props, seconds = complement_suite
    p = props["complement_spectral_radius"]
    ok = p.ok and p.total == 100 and seconds < 10.0
    verdict(3, "complement spectral radius", ok, f"{p.passed}/{p.total} within 1e-10 (worst {p.worst:.2e})")


def test_criterion_04_series_closed_form(complement_suite):
    props, _ = complement_suite
    agree, tail = props["series_minus_closed_form_beyond_tail"], props["series_tail_bound"]
    ok = agree.ok and tail.ok and agree.total == tail.total == 50
    verdict(4, "series vs closed form", ok, f"{agree.passed}/{agree.total} within tail bound, {tail.passed}/{tail.total} tails < 1e-8 (worst {tail.worst:.2e})")


def test_criterion_05_pressure_oracles():
    props = by_name(pressure_oracles(0))
    ok = props["full_shift_log2_every_n"].ok and props["golden_mean_spectral_pressure"].ok and props["bernoulli_pressure_zero"].ok
    detail = ", ".join(f"{k} worst {props[k].worst:.1e}" for k in ("full_shift_log2_every_n", "golden_mean_spectral_pressure", "bernoulli_pressure_zero"))
    verdict(5, "pressure oracles", ok, detail)


def test_criterion_06_coupling():
    props = by_name(coupling_identities(0))
    dec, de, beta = props["decomposition_residual"], props["normalized_D_equals_E"], props["normalized_beta_is_one"]
    ok = dec.ok and de.ok and beta.ok and dec.total == de.total == 50
    verdict(6, "coupling decomposition", ok, f"{dec.passed}/{dec.total} residuals < 1e-9, {de.passed}/{de.total} D=E within 1e-10")


def test_criterion_07_four_state(four_state):
    rep, seconds = four_state
    # Oracle: the left well holds 2 / (3 + eps) of the stationary vector, 2/3 in the limit.
    err = abs(rep.delta[0] - 2 / 3)
    tilde_dev = max(abs(t.sum() - 1.0) for cv in rep.curves for t in cv.tilde_delta)
    assert rep.eps[-1] == 2.0**-20
    cb_dev = max(abs(v[-1] - 1.0) for v in rep.curves[-1].cb_ratio.values())
    ok = err < 1e-2 and tilde_dev <= 1e-9 and cb_dev <= 1e-2 and seconds < 30.0
    verdict(7, "metastable 4-state chain", ok, f"|delta-2/3|={err:.1e}, sum tilde dev {tilde_dev:.1e}, c/b dev {cb_dev:.1e}, {seconds:.2f} s")


def test_criterion_08_lower_component_decays(six_state):
    final = six_state.curves[-1]
    cols = [k for k, lab in enumerate(final.tilde_labels) if lab.startswith("S1")]
    assert final.eps[-1] == 2.0**-20 and cols
    weight = float(final.tilde_delta[-1, cols].sum())
    verdict(8, "lower-pressure mass decay", weight < 1e-3, f"S1 weight {weight:.2e} at eps=2^-20")


def test_criterion_09_mass_inequality(four_state, six_state, interval_run):
    shift, fam = symmetric_two_well()
    sym = splitting_limit(fam, shift)
    reports = [sym, four_state[0], six_state]
    sums = [r.delta_sum for r in reports] + [interval_run[0].check_values["p_limit_sum"]]
    bound_ok = all(s <= 1.0 + 1e-8 for s in sums)
    prob_ok = all(abs(r.delta_sum - 1.0) < 1e-3 for r in reports if r.a4_pass)
    a4 = sum(r.a4_pass for r in reports)
    verdict(9, "mass inequality", bound_ok and prob_ok and a4 > 0, f"sums {', '.join(f'{s:.10f}' for s in sums)}; A4 passed in {a4}/{len(reports)}")


def test_criterion_10_interval_application(interval_run):
    rep, seconds = interval_run
    sym = p_coefficients(two_half_family(), 1e-3).delta
    asym_left = rep.record(1e-3).component_mass[0]
    mc_left = float(rep.mc.group_mass[0])
    leb = rep.check_values["lebesgue_max_error"]
    ok = (
        np.max(np.abs(sym - 0.5)) < 0.02
        and abs(asym_left - 2 / 3) < 0.02
        and abs(mc_left - 2 / 3) < 0.02
        and rep.mc.iterates >= 10**6
        and rep.mc_l1 < 0.05
        and leb < 1e-3
        and seconds < 120.0
    )
    detail = f"sym p {sym.round(4).tolist()}, left mass {asym_left:.4f} (MC {mc_left:.4f}), MC L1 {rep.mc_l1:.4f}, Lebesgue {leb:.1e}, {seconds:.1f} s"
    verdict(10, "interval application", ok, detail)


def run_cli(config: Path, out_dir: Path, threads: str) -> int:
    env = {**os.environ, "THERMOSHIFT_THREADS": threads}
    src = str(ROOT / "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    cmd = [sys.executable, "-m", "thermoshift", "run", str(config), "--out-dir", str(out_dir)]
    return subprocess.run(cmd, env=env, capture_output=True, text=True).returncode


def test_criterion_11_determinism(tmp_path):
    same = []
    for name in ("metastable-4state", "interval-two-half"):
        cfg = ROOT / "configs" / f"{name}.json"
        outputs = json.loads(cfg.read_text())["output"]
        blobs = []
        for k, threads in enumerate(("1", "4")):
            out = tmp_path / f"run{k}"
            assert run_cli(cfg, out, threads) == 0
            blobs.append(((out / outputs["json"]).read_bytes(), (out / outputs["csv"]).read_bytes()))
        same.append(blobs[0] == blobs[1])
    verdict(11, "determinism", all(same), f"byte-identical JSON and CSV across two runs (1 and 4 threads): {same}")
