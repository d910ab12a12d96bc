"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.optimize

sys.path.insert(0, str(Path(__file__).parent))

import conftest  # noqa: E402
from ptlindblad.basis import PAULI_Z, make_basis, reconstruct  # noqa: E402
from ptlindblad.cli import main  # noqa: E402
from ptlindblad.events import grid_vertex, local_maxima, local_minima  # noqa: E402
from ptlindblad.liouvillian import LindbladModel, Phase, bloch_generator, classify_phase  # noqa: E402
from ptlindblad.metric import Kind, hermitian_counterpart, metric_condition, param_count  # noqa: E402
from ptlindblad.models import (  # noqa: E402
    NAMED_KETS,
    NAMED_STATES,
    TwoLevelParams,
    dephasing_model,
    dephasing_speed_closed_form,
    oscillation_period,
    pt_closed_form,
    pt_model,
)
from ptlindblad.propagator import evolve_exact, evolve_exact_grid  # noqa: E402
from ptlindblad.speed import (  # noqa: E402
    FUBINI_STUDY_RATIO,
    aa_speed,
    energy_variance,
    modified_skew,
    radial_speed,
    sk_velocity,
    speed_squared,
    trajectory_speeds,
    variance,
    wy_skew,
)
from ptlindblad.unravel import ensemble_mean, shifted_channels  # noqa: E402
from ptlindblad.verify import ModelGenerator, random_model, random_state  # noqa: E402

SEED = 1729
UP = NAMED_STATES["up_z"]


def _match(got, want):
    """Largest distance after greedily pairing each expected value with its nearest computed one."""
    got = list(got)
    worst = 0.0
    for w in want:
        k = int(np.argmin([abs(g - w) for g in got]))
        worst = max(worst, abs(got.pop(k) - w))
    return worst


# ---------------------------------------------------------------------------
# criteria


def criterion_1():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for g, gamma in rng.uniform(0.1, 5.0, size=(100, 2)):
        vals = classify_phase(pt_model((g, gamma))).eigenvalues.values
        root = np.sqrt(complex(gamma * gamma - g * g))
        want = [0.0, -2 * gamma, -gamma + root, -gamma - root]
        worst = max(worst, _match(vals, want))
    assert worst <= 1e-9, f"max eigenvalue error {worst:.2e} > 1e-9"
    return f"100 draws, max |error| = {worst:.1e}"


def criterion_2():
    want = {(2.0, 1.0): Phase.UNBROKEN, (1.0, 1.0): Phase.EXCEPTIONAL_POINT, (1.0, 2.0): Phase.BROKEN}
    notes = []
    for (g, gamma), label in want.items():
        c = classify_phase(pt_model((g, gamma)))
        assert c.label is label, f"(g, gamma) = ({g}, {gamma}) classified {c.label.value}"
        if label is Phase.EXCEPTIONAL_POINT:
            cond = c.eigenvalues.vector_condition
            assert c.coalescence_gap <= 1e-7 or cond > 1e8
            notes.append(f"EP gap={c.coalescence_gap:.1e}, cond={cond:.1e}")
    return "Unbroken/ExceptionalPoint/Broken; " + ", ".join(notes)


def criterion_3():
    rng = np.random.default_rng(SEED + 3)
    ts = np.linspace(0.0, 10.0, 101)
    worst, phases = 0.0, {"unbroken": 0, "ep": 0, "broken": 0}
    for i in range(50):
        g = rng.uniform(0.1, 3.0)
        gamma = [rng.uniform(0.0, g), g, rng.uniform(g, 3.0)][i % 3]
        p = TwoLevelParams(g, gamma)
        phases[p.phase] += 1
        r0 = rng.standard_normal(3)
        r0 *= rng.uniform(0.0, 1 / math.sqrt(2)) / np.linalg.norm(r0)
        gen = bloch_generator(pt_model(p))
        exact = np.array([evolve_exact(gen, r0, t) for t in ts])
        worst = max(worst, float(np.max(np.abs(exact - pt_closed_form(p, r0, ts)))))
    assert min(phases.values()) > 0, f"phase coverage {phases}"
    assert worst <= 1e-9, f"max-norm deviation {worst:.2e} > 1e-9"
    return f"50 draws {phases}, max deviation {worst:.1e}"


def criterion_4():
    p = TwoLevelParams(1.3, 0.4)
    model = dephasing_model(p)
    r0 = np.array([0.35, -0.42, 0.2])
    traj = evolve_exact_grid(bloch_generator(model), r0, 10.0, 10.0 / 999)
    assert len(traj) == 1000
    b = make_basis(2)
    got = np.array([speed_squared(model, reconstruct(r, b), b) for r in traj.states])
    want = dephasing_speed_closed_form(p, r0, traj.times)
    rel = float(np.max(np.abs(got - want) / want))
    assert rel <= 1e-10, f"relative error {rel:.2e} > 1e-10"
    return f"1000 samples, max relative error {rel:.1e}"


def criterion_5():
    rng = np.random.default_rng(SEED + 5)
    worst, non_hermitian = 0.0, 0
    for i in range(1000):
        gen = ModelGenerator(
            n=int(rng.integers(2, 4)),
            n_lindblads=int(rng.integers(1, 4)),
            hermitian_lindblads=bool(i % 4 == 0),
            lindblad_scale=float(rng.uniform(0.1, 2.0)),
            seed=int(rng.integers(2**31)),
        )
        model = random_model(gen)
        non_hermitian += not gen.hermitian_lindblads
        rho = random_state(rng, model.n)
        dev = rho - np.eye(model.n) / model.n
        rad = math.sqrt(np.einsum("ij,ji->", dev, dev).real)
        v_r = radial_speed(model, rho)
        rhs = abs(sum(modified_skew(l, rho) for l in model.lindblads)) / rad
        worst = max(worst, abs(v_r - rhs) / max(v_r, 1.0))
    assert worst <= 1e-9, f"scaled deviation {worst:.2e} > 1e-9"
    return f"1000 models ({non_hermitian} with non-Hermitian L), max scaled deviation {worst:.1e}"


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    low = high = pure_err = stat_err = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 5))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = (a + a.conj().T) / 2
        rho = random_state(rng, n)
        skew, var = wy_skew(h, rho), variance(h, rho)
        low, high = min(low, skew), max(high, skew - var)
        pure = random_state(rng, n, pure=True)
        pure_err = max(pure_err, abs(wy_skew(h, pure) - variance(h, pure)))
        w, v = np.linalg.eigh(h)
        stationary = (v * rng.dirichlet(np.ones(n))) @ v.conj().T
        stat_err = max(stat_err, abs(wy_skew(h, stationary)))
    assert low >= -1e-10 and high <= 1e-10, f"sandwich violated: min I = {low:.2e}, max I - var = {high:.2e}"
    assert pure_err <= 1e-10, f"pure-state gap {pure_err:.2e}"
    assert stat_err <= 1e-12, f"stationary skew {stat_err:.2e}"
    return f"1000 draws; pure gap {pure_err:.1e}, stationary {stat_err:.1e}"


def criterion_7():
    rng = np.random.default_rng(SEED + 7)
    cross = euclid_err = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 5))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = (a + a.conj().T) / 2
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        psi /= np.linalg.norm(psi)
        var = energy_variance(h, psi)
        aa = aa_speed(h, psi)
        assert aa == 4 * var, "aa_speed differs from 4 Var(H)"
        v = sk_velocity(h, psi)
        cross = max(cross, abs(4 * np.vdot(v, v).real - aa) / max(1.0, aa))
        euclid = speed_squared(LindbladModel(H=h), np.outer(psi, psi.conj()))
        euclid_err = max(euclid_err, abs(euclid - 2 * var))
        assert aa == FUBINI_STUDY_RATIO * (2 * var)
    assert FUBINI_STUDY_RATIO == 2.0
    assert cross <= 1e-12, f"4<v|v> cross-check {cross:.2e}"
    assert euclid_err <= 1e-10, f"Euclidean speed error {euclid_err:.2e}"
    return f"200 draws; 4<v|v> deviation {cross:.1e}, Euclidean 2Var deviation {euclid_err:.1e}, ratio exactly 2"


def _figure1_run(g, gamma, t_max):
    model = pt_model((g, gamma))
    gen = bloch_generator(model)
    traj = evolve_exact_grid(gen, UP, t_max, 1e-3 / max(g, gamma))
    return model, gen, trajectory_speeds(model, traj.times, traj.states)


def _figure1_subchecks():
    """Every clause of criterion 8 except the count of maxima of v."""
    g, gamma = 1.0, 0.5
    tau = oscillation_period(TwoLevelParams(g, gamma))
    model, gen, un = _figure1_run(g, gamma, 3 * tau)
    assert abs(un.v_R[0]) <= 1e-10, f"v_R(0) = {un.v_R[0]:.2e}"
    align = 0.0
    mins = local_minima(un.v_R)
    assert mins.size >= 2, f"only {mins.size} interior minima of v_R"
    h = un.t[1] - un.t[0]
    b = make_basis(2)

    def v_r(t):
        return radial_speed(model, reconstruct(evolve_exact(gen, UP, t), b))

    for i in mins:
        # v_R ~ r_y^2 near a minimum: smooth, so a bounded scalar minimiser converges
        res = scipy.optimize.minimize_scalar(v_r, bounds=(un.t[i] - 2 * h, un.t[i] + 2 * h), method="bounded",
                                             options={"xatol": 1e-12})
        t_min = res.x
        r = evolve_exact(gen, UP, t_min)
        align = max(align, abs(r[0]), abs(r[1]))
    assert align <= 1e-6, f"Bloch vector off the z axis by {align:.2e} at a v_R minimum"
    _, _, br = _figure1_run(1.0, 2.0, 10.0)
    n_vt = local_maxima(br.v_T).size
    assert n_vt <= 1, f"broken-phase v_T has {n_vt} local maxima"
    return un, tau, f"v_R(0)={un.v_R[0]:.0e}, z-alignment {align:.1e} at {mins.size} v_R minima, broken v_T maxima {n_vt}"


def criterion_8():
    un, tau, detail = _figure1_subchecks()
    peaks = [grid_vertex(un.t, un.v, i) for i in local_maxima(un.v)]
    assert len(peaks) >= 2, (
        f"v(t) has {len(peaks)} local maxima on [0, 3 tau] (need >= 2; max dv/dt step {np.max(np.diff(un.v)):.1e}); {detail}"
    )
    spacing = np.diff(peaks)
    assert np.all(np.abs(spacing - tau) <= 0.02 * tau), f"maxima spacing {spacing} vs tau {tau:.4f}"
    return f"{len(peaks)} maxima spaced {spacing}; {detail}"


def criterion_9():
    model = pt_model((2.0, 1.0))
    gen = bloch_generator(model)
    lines = []
    for t in (0.5, 1.0, 2.0):
        est = ensemble_mean(model, NAMED_KETS["up_z"], t, 1e-3, 10_000, seed=SEED)
        exact = evolve_exact(gen, UP, t)
        z = np.abs(est.bloch - exact) / np.where(est.standard_error > 0, est.standard_error, np.inf)
        bound = 3 * est.standard_error + 1e-10
        assert np.all(np.abs(est.bloch - exact) <= bound), f"t={t}: |mean - exact| = {np.abs(est.bloch - exact)} > {bound}"
        lines.append(f"t={t}: max {np.max(z):.2f} SE")
    free = LindbladModel(H=np.zeros((2, 2)), lindblads=(PAULI_Z,))
    ket = np.array([math.sqrt(0.8), math.sqrt(0.2)], dtype=complex)
    for label, m in (("sigma_z jumps", free), ("projective jumps", shifted_channels(free, 1.0))):
        est = ensemble_mean(m, ket, 1.0, 1e-3, 10_000, seed=SEED)
        sz = math.sqrt(2) * est.bloch[2]
        se = math.sqrt(2) * est.standard_error[2]
        assert abs(sz - 0.6) <= 3 * se + 1e-10, f"H = 0 ({label}): <sigma_z> = {sz:.4f} +- {se:.4f}, expected 0.6"
        lines.append(f"H=0 {label}: <sigma_z>={sz:.4f}+-{se:.1e}")
    return "; ".join(lines)


def criterion_10():
    assert (param_count(2, Kind.HERMITIAN), param_count(2, Kind.PT_SYMMETRIC)) == (4, 6)
    rng = np.random.default_rng(SEED + 10)
    worst, worst_cond = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(2, 5))
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        w = np.geomspace(1.0, 10 ** rng.uniform(0, 6), n)
        metric = (q * w) @ q.conj().T
        u = (q * np.sqrt(w)) @ q.conj().T
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h0 = (a + a.conj().T) / 2
        f = u @ h0 @ np.linalg.inv(u)
        worst_cond = max(worst_cond, metric_condition(metric))
        got = np.linalg.eigvalsh(hermitian_counterpart(f, metric))
        worst = max(worst, float(np.max(np.abs(got - np.linalg.eigvalsh(h0)))))
    assert worst_cond <= 1e6 * (1 + 1e-9)
    assert worst <= 1e-9, f"spectrum changed by {worst:.2e}"
    return f"param_count (4, 6); 100 instances up to cond {worst_cond:.1e}, max spectral shift {worst:.1e}"


def criterion_11():
    import tempfile

    commands = [
        ["simulate", "--g", "2", "--gamma", "1", "--format", "csv"],
        ["simulate", "--g", "1", "--gamma", "2", "--format", "json"],
        ["classify", "--g", "1", "--gamma", "1", "--format", "json"],
        ["sweep", "--g-grid", "0.5,1,1.5", "--gamma-grid", "0.5,1,1.5", "--workers", "3"],
        ["unravel", "--g", "2", "--gamma", "1", "--n-traj", "500", "--times", "0.5,1", "--seed", "9", "--workers", "2"],
        ["figure1"],
        ["verify", "--cases", "30", "--seed", "2", "--workers", "2"],
    ]
    with tempfile.TemporaryDirectory() as d:
        base = Path(d)
        for k, argv in enumerate(commands):
            outputs = []
            for rep in range(2):
                target = base / f"{k}-{rep}"
                path = target if argv[0] == "figure1" else target.with_suffix(".out")
                code = main(argv + ["--out", str(path)])
                assert code == 0, f"{' '.join(argv)} exited {code}"
                if path.is_dir():
                    outputs.append([(f.name, f.read_bytes()) for f in sorted(path.iterdir())])
                else:
                    outputs.append(path.read_bytes())
            assert outputs[0] == outputs[1], f"{' '.join(argv)} is not byte-deterministic"
    return f"{len(commands)} commands repeated, outputs byte-identical"


CRITERIA = {
    1: ("Liouvillian spectrum", criterion_1, 1.0),
    2: ("phase classification", criterion_2, 1.0),
    3: ("closed-form trajectory oracle", criterion_3, 5.0),
    4: ("dephasing speed law", criterion_4, 1.0),
    5: ("radial-speed identity", criterion_5, 10.0),
    6: ("skew-information sandwich", criterion_6, 5.0),
    7: ("unitary speed relations", criterion_7, None),
    8: ("three-phase speed profiles", criterion_8, 5.0),
    9: ("Monte Carlo oracle", criterion_9, 60.0),
    10: ("pseudo-Hermiticity toolkit", criterion_10, 1.0),
    11: ("determinism", criterion_11, None),
}


def evaluate(n):
    name, fn, budget = CRITERIA[n]
    start = time.perf_counter()
    try:
        detail = fn()
        ok = True
    except AssertionError as exc:
        detail, ok = str(exc).splitlines()[0], False
    elapsed = time.perf_counter() - start
    if ok and budget is not None and elapsed > budget:
        ok, detail = False, f"{detail}; runtime {elapsed:.2f}s exceeds {budget}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {name} -- {detail} ({elapsed:.2f}s)"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok, detail


@pytest.mark.parametrize("n", [k for k in CRITERIA if k != 8])
def test_criterion(n):
    ok, detail = evaluate(n)
    assert ok, detail


@pytest.mark.xfail(
    strict=True,
    reason="from an up_z start v(t) is non-increasing for every g > gamma; its oscillation shows as plateaus, not maxima",
)
def test_criterion_8():
    ok, detail = evaluate(8)
    assert ok, detail


def test_criterion_8_other_clauses():
    """The clauses of criterion 8 that do hold must keep holding."""
    _figure1_subchecks()


def test_speed_is_monotone_with_period_tau_plateaus():
    """Why the maxima clause fails: dv/dt <= 0 with zeros spaced by tau."""
    g, gamma = 1.0, 0.5
    tau = oscillation_period(TwoLevelParams(g, gamma))
    _, _, un = _figure1_run(g, gamma, 3 * tau)
    dv = np.diff(un.v)
    assert np.max(dv) <= 1e-12 * np.max(un.v)
    # stationary points are the local maxima of dv (which touch zero)
    flats = [grid_vertex(un.t[:-1], dv, i) for i in local_maxima(dv)]
    flats = [t for t, i in zip(flats, local_maxima(dv)) if dv[i] > -1e-6]
    np.testing.assert_allclose(np.diff(flats), tau, rtol=0.02)


if __name__ == "__main__":
    results = [evaluate(n)[0] for n in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
