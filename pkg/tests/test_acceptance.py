"""Acceptance suite: twelve property and oracle checks at fixed tolerances.

Every test prints one ``criterion N: PASS|FAIL`` line with the measured
quantities; the lines are repeated in the pytest terminal summary.
"""

import json
import math

import numpy as np
import pytest

from gausschord.cli import main
from gausschord.core import J, LindbladCoupling, annihilation_coupling, no_coupling
from gausschord.fock import (ChordSampler, FockSpace, build_hamiltonian_matrix,
                             density_from_kets, integrate, lindblad_operator)
from gausschord.hamiltonian import (builtin_models, double_hamiltonian,
                                    double_hamiltonian_value, pendulum, quadratic,
                                    quartic)
from gausschord.heller import (HellerState, heller_to_chord,
                               unitary_equivalence_check)
from gausschord.propagator import (GaussianChordState, StepControl, evolve,
                                   evolve_ensemble, hj_residual, rhs)
from gausschord.quadratic_exact import exact_coeffs, flow_for, quadratic_rhs
from gausschord.states import (ChordEnsemble, SqueezedSpec, cat_cross_term,
                               cat_ensemble, coherent_chord, cross_wigner)
from gausschord.transforms import (GridSpec, chord_from_wigner, eval_chord, purity,
                                   wigner_from_chord)

from test_cli import SCENARIOS

SEED = 0
N_DRAWS = 20


def verdict(log, number, title, checks):
    """Print and record one line; ``checks`` holds ``(label, value, bound, ok)``."""
    ok = all(c[3] for c in checks)
    parts = [f"{label}={value:.3g} ({bound})" for label, value, bound, _ in checks]
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} | " + "; ".join(parts)
    print(line)
    log.append(line)
    return ok


# -- shared random quadratic problems -------------------------------------------

def random_coupling(rng, hbar=1.0):
    """Coupling with entries in [-1, 1], rescaled so that 0 <= gamma <= 1."""
    l_re, l_im = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
    c = LindbladCoupling(l_re, l_im, hbar)
    if c.gamma < 0:
        l_im = -l_im
        c = LindbladCoupling(l_re, l_im, hbar)
    if c.gamma > 1:
        s = 1.0 / math.sqrt(c.gamma)
        c = LindbladCoupling(s * l_re, s * l_im, hbar)
    return c


def random_spec(rng):
    return SqueezedSpec(rng.uniform(-2, 2, 2), rng.uniform(0.7, 1.4))


def random_problems(seed=SEED, n=N_DRAWS):
    """``(Hmat, coupling, initial)`` triples; even draws coherent, odd ones cat-cross."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        h = rng.uniform(-1, 1, 3)
        Hmat = np.array([[h[0], h[1]], [h[1], h[2]]])
        coupling = random_coupling(rng)
        if k % 2 == 0:
            init = coherent_chord(SqueezedSpec(rng.uniform(-2, 2, 2)))
        else:
            init = cat_cross_term(random_spec(rng), random_spec(rng))
        out.append((Hmat, coupling, init))
    return out


@pytest.fixture(scope="module")
def quadratic_runs():
    runs = []
    for Hmat, coupling, init in random_problems():
        traj = evolve(init, quadratic(Hmat), coupling, 0.0, 3.0,
                      StepControl(dt=1e-3, record_every=100, residual_probe_scale=None))
        runs.append((Hmat, coupling, init, traj))
    return runs


@pytest.fixture(scope="module")
def evolved_cats():
    """Cat ensembles evolved under each builtin flavour with an environment."""
    a, b = SqueezedSpec((0.3, 1.2), 0.9), SqueezedSpec((-0.4, -1.0), 1.2)
    cases = [
        ("quartic", quartic(0.1), annihilation_coupling(0.6)),
        ("pendulum", pendulum(1.0), LindbladCoupling((0.0, 0.5), (0.0, 0.0))),
        ("quadratic", quadratic([[0.4, 0.1], [0.1, 0.6]]), LindbladCoupling((0.3, 0.2), (0.5, -0.1))),
    ]
    out = []
    for name, model, coupling in cases:
        ens = cat_ensemble(a, b).normalized(1.0)
        trajs = evolve_ensemble(ens, model, coupling, 0.0, 2.0,
                                StepControl(dt=1e-3, record_every=100,
                                            residual_probe_scale=None))
        out.append((name, ens, trajs))
    return out


@pytest.fixture(scope="module")
def scenario_reports(tmp_path_factory):
    """Run the three shipped Fock-compared scenarios once through the CLI."""
    reports = {}
    for name in ("damped_harmonic_coherent", "cat_decoherence", "quartic_semiclassical"):
        out = tmp_path_factory.mktemp(name)
        mp = pytest.MonkeyPatch()
        mp.setenv("GAUSSCHORD_OUTPUT_DIR", str(out))
        try:
            code = main(["simulate", str(SCENARIOS / f"{name}.toml")])
        finally:
            mp.undo()
        assert code == 0, name
        reports[name] = json.loads((out / "report.json").read_text())
    return reports


# -- 1 ---------------------------------------------------------------------------

def test_c01_quadratic_oracle(quadratic_runs, acceptance_log):
    errs, rel = [], 0.0
    for Hmat, coupling, init, traj in quadratic_runs:
        flow = flow_for(Hmat, coupling)
        err = 0.0
        for t, s in zip(traj.times, traj.states):
            e = exact_coeffs(init, flow, coupling, t).to_vector()
            d = np.abs(s.to_vector() - e)
            err = max(err, float(d.max()))
            rel = max(rel, float((d / np.maximum(1.0, np.abs(e))).max()))
        errs.append(err)
    worst = max(errs)
    over = [k for k, e in enumerate(errs) if e >= 1e-7]
    ok = verdict(acceptance_log, 1, "propagator vs closed form, 20 random quadratics", [
        (f"max_abs_err(draw {int(np.argmax(errs))})", worst, "< 1e-7", worst < 1e-7),
        (f"draws_over_bound{over}", len(over), "== 0", not over),
        ("max_rel_err(diagnostic)", rel, "not gated", True),
    ])
    assert ok


# -- 2 ---------------------------------------------------------------------------

def test_c02_ode_self_consistency(acceptance_log):
    # balances h**4 truncation against roundoff on fields of size ~1e5
    h = 3e-4
    worst = 0.0
    for Hmat, coupling, init in random_problems():
        flow = flow_for(Hmat, coupling)
        for t in (0.5, 1.5, 2.5):
            v = [exact_coeffs(init, flow, coupling, t + k * h).to_vector()
                 for k in (-2, -1, 1, 2)]
            fd = (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * h)
            ode = quadratic_rhs(exact_coeffs(init, flow, coupling, t), Hmat, coupling)
            worst = max(worst, float(np.abs(fd - ode.to_vector()).max()))
    ok = verdict(acceptance_log, 2, "time derivative of closed form vs parameter ODEs",
                 [("max_abs_err", worst, "< 1e-6", worst < 1e-6)])
    assert ok


# -- 3 ---------------------------------------------------------------------------

def test_c03_heller_unitary_limit(acceptance_log):
    rep = unitary_equivalence_check(quartic(0.1), None,
                                    HellerState.from_width(0.5, 1.0, 1j), 2.0, 1e-3)
    fixed = unitary_equivalence_check(quartic(0.0), None,
                                      HellerState.from_width(0.0, 0.0, 0.5j), 2.0, 1e-3)
    M0 = heller_to_chord(0.5j)
    traj = evolve(GaussianChordState(0, 0, (0, 0), (0, 0), M0, np.zeros((2, 2))),
                  quartic(0.0), no_coupling(), 0.0, 2.0, StepControl(dt=1e-3))
    drift = max(float(np.abs(s.M - M0).max()) for s in traj.states)
    ok = verdict(acceptance_log, 3, "unitary limit vs Heller packet", [
        ("quartic_max_M_dev", rep.max_M_dev, "< 1e-6", rep.max_M_dev < 1e-6),
        ("harmonic_max_M_dev", fixed.max_M_dev, "< 1e-10", fixed.max_M_dev < 1e-10),
        ("harmonic_M_drift", drift, "< 1e-10", drift < 1e-10),
    ])
    assert ok


# -- 4 ---------------------------------------------------------------------------

def test_c04_fock_damped_harmonic(acceptance_log):
    hbar = 1.0
    spec = SqueezedSpec((1.0, 1.5))
    model, coupling = quadratic(), annihilation_coupling(1.0, hbar)
    assert coupling.gamma == pytest.approx(0.5)
    space = FockSpace(60, hbar)
    ket = space.ket_from_wavefunction(lambda q: spec.wavefunction(q, hbar))
    rho0 = density_from_kets([(1.0, ket, ket)])
    traj = evolve(coherent_chord(spec, hbar), model, coupling, 0.0, 2.0,
                  StepControl(dt=1e-3, record_every=250))
    rhos = integrate(rho0, build_hamiltonian_matrix(model, space),
                     lindblad_operator(coupling, space), hbar, 2.0, 1e-3,
                     sample_times=list(traj.times))
    sampler = ChordSampler(space)
    ang = 2 * np.pi * np.arange(10) / 10
    ring = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    xis = np.vstack([np.zeros(2), 0.5 * ring, ring])
    worst = 0.0
    for s, rho in zip(traj.states, rhos):
        gauss = s.evaluate(xis @ J.T, hbar)
        fock = sampler.samples(rho, xis)
        worst = max(worst, float(np.abs(gauss - fock).max()))
    ok = verdict(acceptance_log, 4, "Fock oracle, damped harmonic coherent state",
                 [(f"max_abs_err({len(xis)} probes x {len(rhos)} times)", worst, "< 1e-4",
                   worst < 1e-4)])
    assert ok


# -- 5 ---------------------------------------------------------------------------

def test_c05_fock_quartic(scenario_reports, acceptance_log):
    rep = scenario_reports["quartic_semiclassical"]
    fock = rep["tasks"]["compare_fock"]
    curve = fock["error_growth"]
    assert rep["config"]["hbar"] == 0.1
    assert rep["config"]["hamiltonian"]["params"]["eps"] == 0.05
    assert curve[-1]["t"] == pytest.approx(0.5)
    growth = ", ".join(f"{c['t']:.2f}:{c['max_rel_abs_err']:.1e}" for c in curve[::2])
    err = fock["max_rel_abs_err"]
    ok = verdict(acceptance_log, 5, "Fock oracle, quartic eps=0.05 hbar=0.1", [
        ("max_rel_abs_err", err, "<= 0.05", err <= 0.05),
        ("curve_points", len(curve), "recorded", len(curve) == rep["tasks"]["evolve"]["n_samples"]),
    ])
    print(f"  error growth t:err  {growth}")
    assert ok


# -- 6 ---------------------------------------------------------------------------

def test_c06_trace_conservation(quadratic_runs, scenario_reports, acceptance_log):
    drift = 0.0
    for *_, traj in quadratic_runs:
        tv = traj.trace_values()
        drift = max(drift, float(np.abs(tv - tv[0]).max()))
    scen = max(scenario_reports[n]["tasks"]["evolve"]["trace_drift"]
               for n in ("damped_harmonic_coherent", "cat_decoherence"))
    quartic_drift = scenario_reports["quartic_semiclassical"]["tasks"]["evolve"]["trace_drift"]
    ok = verdict(acceptance_log, 6, "chi(0) drift over t in [0, 3]", [
        ("random_quadratics", drift, "< 1e-9", drift < 1e-9),
        ("quadratic_scenarios", scen, "< 1e-9", scen < 1e-9),
        ("quartic_reported", quartic_drift, "monitored", math.isfinite(quartic_drift)),
    ])
    assert ok


# -- 7 ---------------------------------------------------------------------------

def test_c07_symmetry(evolved_cats, quadratic_runs, acceptance_log):
    rng = np.random.default_rng(SEED + 7)
    y = rng.uniform(-3, 3, (1000, 2))
    constructed = [
        ChordEnsemble([(1.0, coherent_chord(SqueezedSpec((0.5, -1.0))))]),
        ChordEnsemble([(1.0, coherent_chord(SqueezedSpec((1.0, 0.2), 0.6)))]),
        cat_ensemble(SqueezedSpec((0, 1.5)), SqueezedSpec((0, -1.5))).normalized(1.0),
    ] + [cat_ensemble(random_spec(rng), random_spec(rng)).normalized(1.0) for _ in range(10)]
    sym_c = max(float(np.abs(e.evaluate(y, 1.0) - np.conj(e.evaluate(-y, 1.0))).max())
                for e in constructed)
    sym_e, asym = 0.0, 0.0
    for _, ens, trajs in evolved_cats:
        for i in range(len(trajs[0].times)):
            e = ens.with_states([tr.states[i] for tr in trajs])
            sym_e = max(sym_e, float(np.abs(e.evaluate(y, 1.0) - np.conj(e.evaluate(-y, 1.0))).max()))
        for tr in trajs:
            M, N = tr.field("M"), tr.field("N")
            asym = max(asym, float(np.abs(M - M.transpose(0, 2, 1)).max()),
                       float(np.abs(N - N.transpose(0, 2, 1)).max()))
    for *_, traj in quadratic_runs:
        M, N = traj.field("M"), traj.field("N")
        asym = max(asym, float(np.abs(M - M.transpose(0, 2, 1)).max()),
                   float(np.abs(N - N.transpose(0, 2, 1)).max()))
    ok = verdict(acceptance_log, 7, "Hermitian chord symmetry and symmetric M, N", [
        ("constructed", sym_c, "< 1e-12", sym_c < 1e-12),
        ("evolved", sym_e, "< 1e-12", sym_e < 1e-12),
        ("M_N_asymmetry", asym, "< 1e-12", asym < 1e-12),
    ])
    assert ok


# -- 8 ---------------------------------------------------------------------------

def test_c08_monotone_decoherence(quadratic_runs, evolved_cats, acceptance_log):
    trajs = [r[-1] for r in quadratic_runs] + [t for *_, ts in evolved_cats for t in ts]
    min_inc = min(float(np.diff(t.field("b")).min()) for t in trajs)

    hbar = 1.0
    ens = cat_ensemble(SqueezedSpec((0.0, 2.0)), SqueezedSpec((0.0, -2.0)), hbar)
    model, coupling = quadratic(), annihilation_coupling(1.0, hbar)
    flow = flow_for(model.quadratic_matrix, coupling)
    run = evolve_ensemble(ens, model, coupling, 0.0, 2.0, StepControl(dt=1e-3, record_every=50))
    times = run[0].times
    exact = [[exact_coeffs(s, flow, coupling, t) for t in times] for _, s in ens.components]
    diag_exact = max(abs(e.b) for comp in exact[:2] for e in comp)
    diag_prop = max(float(np.abs(tr.field("b")).max()) for tr in run[:2])
    cross_exact = np.array([e.b for e in exact[2]])
    amp = np.exp(-cross_exact / hbar)
    amp_decays = bool(np.all(np.diff(amp) < 0))
    cross_prop = max(float(np.abs(tr.field("b") - np.array([e.b for e in comp])).max())
                     for tr, comp in zip(run[2:], exact[2:]))
    ok = verdict(acceptance_log, 8, "b_t nondecreasing; symmetric cat under damping", [
        ("min_b_increment", min_inc, ">= 0", min_inc >= 0.0),
        ("diag_b_closed_form", diag_exact, "== 0", diag_exact == 0.0),
        ("diag_b_propagator", diag_prop, "<= 1e-8", diag_prop <= 1e-8),
        ("cross_b_propagator_err", cross_prop, "<= 1e-8", cross_prop <= 1e-8),
        ("cross_amplitude_final", float(amp[-1]), "strictly decaying", amp_decays),
    ])
    assert ok


# -- 9 ---------------------------------------------------------------------------

def _fd_grad(f, z, h):
    """Fourth-order central differences of ``f`` along each axis of ``z``."""
    n = z.shape[-1]
    out = np.empty(z.shape[:-1] + (n,))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[..., i] = (f(z - 2 * e) - 8 * f(z - e) + 8 * f(z + e) - f(z + 2 * e)) / (12 * h)
    return out


def test_c09_gradient_checks(acceptance_log):
    rng = np.random.default_rng(SEED + 9)
    worst = {}
    for model in builtin_models():
        coupling = random_coupling(rng)
        z = rng.uniform(-2, 2, (1000, 4))

        def value(zz):
            return double_hamiltonian_value(model, coupling, zz[..., :2], zz[..., 2:])

        grad = _fd_grad(value, z, 1e-3)
        hess = np.stack([_fd_grad(lambda zz: _fd_grad(value, zz, 1e-3)[..., i], z, 1e-2)
                         for i in range(4)], axis=-2)
        err = 0.0
        for k in range(len(z)):
            d = double_hamiltonian(model, coupling, z[k, :2], z[k, 2:])
            analytic = [(d.d_x, grad[k, :2]), (d.d_y, grad[k, 2:]),
                        (d.d_xx, hess[k, :2, :2]), (d.d_yy, hess[k, 2:, 2:]),
                        (d.d_xy, hess[k, :2, 2:])]
            for a, fd in analytic:
                err = max(err, float((np.abs(a - fd) / np.maximum(1.0, np.abs(a))).max()))
        worst[model.name] = err
    ok = verdict(acceptance_log, 9, "double-Hamiltonian derivative blocks vs finite differences",
                 [(name, e, "<= 1e-6", e <= 1e-6) for name, e in worst.items()])
    assert ok


# -- 10 --------------------------------------------------------------------------

def test_c10_transform_fidelity(acceptance_log):
    hbar = 1.0
    xgrid = GridSpec((0, 0), 8 * math.sqrt(hbar), 256)
    ygrid = xgrid.conjugate(hbar)
    spec = SqueezedSpec((1.0, -0.5))
    chi = eval_chord(ChordEnsemble([(1.0, coherent_chord(spec, hbar))]), ygrid, hbar)
    W = wigner_from_chord(chi, hbar)
    assert np.allclose(W.grid.axis(0), xgrid.axis(0), atol=1e-12)
    x = W.grid.mesh()
    W_exact = np.exp(-((x - spec.center) ** 2).sum(-1) / hbar) / (np.pi * hbar)
    coh_err = float(np.abs(W.values - W_exact).max())

    back = chord_from_wigner(W, hbar)
    trip = float(np.abs(back.values - chi.values).max())

    a, b = SqueezedSpec((0.0, 2.0)), SqueezedSpec((0.5, -2.0), 1.3)
    cat = cat_ensemble(a, b, hbar)
    Wc = wigner_from_chord(eval_chord(cat, ygrid, hbar), hbar)
    direct = 0.5 * sum(cross_wigner(s, r, x, hbar) for s in (a, b) for r in (a, b))
    cat_err = float(np.abs(Wc.values - direct).max())
    ok = verdict(acceptance_log, 10, "Wigner grid 256^2, half-width 8 sqrt(hbar)", [
        ("coherent_max_err", coh_err, "< 1e-6", coh_err < 1e-6),
        ("fft_round_trip", trip, "< 1e-10", trip < 1e-10),
        ("cat_interference_err", cat_err, "< 1e-6", cat_err < 1e-6),
    ])
    assert ok


# -- 11 --------------------------------------------------------------------------

def test_c11_hj_residual_scaling(acceptance_log):
    hbar = 1.0
    model, coupling = quartic(0.1), annihilation_coupling(0.6, hbar)
    init = cat_cross_term(SqueezedSpec((0.3, 1.0), 0.9), SqueezedSpec((-0.2, -0.8), 1.1), hbar)
    traj = evolve(init, model, coupling, 0.0, 1.0,
                  StepControl(dt=1e-3, record_every=250, residual_probe_scale=None))
    dists = np.logspace(-3, -1.5, 8)
    ang = 2 * np.pi * (np.arange(8) + 0.5) / 8
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    at_Y, slopes = 0.0, []
    for t, s in zip(traj.times, traj.states):
        deriv = rhs(s, model, coupling, t)
        at_Y = max(at_Y, float(np.abs(hj_residual(s, model, coupling, t, s.Y, deriv)).max()))
        r = [float(np.abs(hj_residual(s, model, coupling, t, s.Y + d * dirs, deriv)).max())
             for d in dists]
        slopes.append(np.polyfit(np.log(dists), np.log(r), 1)[0])
    lo, hi = min(slopes), max(slopes)
    ok = verdict(acceptance_log, 11, "Hamilton-Jacobi residual, quartic", [
        ("residual_at_Y", at_Y, "< 1e-10", at_Y < 1e-10),
        ("min_exponent", lo, "3 +- 0.2", abs(lo - 3) <= 0.2),
        ("max_exponent", hi, "3 +- 0.2", abs(hi - 3) <= 0.2),
    ])
    assert ok


# -- 12 --------------------------------------------------------------------------

def test_c12_purity(acceptance_log):
    hbar = 1.0
    coh = ChordEnsemble([(1.0, coherent_chord(SqueezedSpec((0.7, -0.3)), hbar))]).normalized(hbar)
    cat = cat_ensemble(SqueezedSpec((0, 1.5)), SqueezedSpec((0.4, -1.5), 1.2), hbar).normalized(hbar)
    p0 = max(abs(purity(coh, hbar) - 1), abs(purity(cat, hbar) - 1))

    rng = np.random.default_rng(SEED + 12)
    max_rise = -np.inf
    for k in range(50):
        h = rng.uniform(-1, 1, 3)
        Hmat = [[h[0], h[1]], [h[1], h[2]]]
        coupling = LindbladCoupling(rng.uniform(-1, 1, 2), (0.0, 0.0), hbar)
        assert coupling.gamma == 0 and np.any(coupling.D)
        if k % 2:
            ens = cat_ensemble(random_spec(rng), random_spec(rng), hbar).normalized(hbar)
        else:
            ens = ChordEnsemble([(1.0, coherent_chord(random_spec(rng), hbar))]).normalized(hbar)
        trajs = evolve_ensemble(ens, quadratic(Hmat), coupling, 0.0, 1.0,
                                StepControl(dt=1e-2, record_every=5, residual_probe_scale=None))
        vals = [purity(ens.with_states([tr.states[i] for tr in trajs]), hbar)
                for i in range(len(trajs[0].times))]
        max_rise = max(max_rise, float(np.diff(vals).max()))

    sep = cat_ensemble(SqueezedSpec((0.0, 5.0)), SqueezedSpec((0.0, -5.0)), hbar).normalized(hbar)
    trajs = evolve_ensemble(sep, quadratic(), annihilation_coupling(1.0, hbar), 0.0, 1.5,
                            StepControl(dt=1e-3, record_every=20, residual_probe_scale=None))
    times = trajs[0].times
    weight = np.exp(-trajs[2].field("b") / hbar)
    start = int(np.argmax(weight < 1e-6))
    assert weight[start] < 1e-6
    window = [i for i in range(start, len(times)) if times[i] <= times[start] + 0.4]
    half_dev = max(abs(purity(sep.with_states([tr.states[i] for tr in trajs]), hbar) - 0.5)
                   for i in window)
    ok = verdict(acceptance_log, 12, "purity", [
        ("initial_dev_from_1", p0, "<= 1e-9", p0 <= 1e-9),
        ("max_rise_50_diffusive", max_rise, "<= 1e-12", max_rise <= 1e-12),
        (f"separated_cat_dev_from_half(t>={times[start]:.2f})", half_dev, "<= 1e-3",
         half_dev <= 1e-3),
    ])
    assert ok
