"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

A clause that misses its stated tolerance for a documented, analysed reason is
reported as FAIL with the reason; the test then pins the measured value to a
narrow band so any change in behaviour is still caught.
"""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

from mirrorlab import analysis, analytic, potential
from mirrorlab.analysis import DegenerateClassification, FixedPointKind, classify, fit_steady_state, validity_report
from mirrorlab.dynamics import Scenario, State, Tolerances, energy, integrate, period_estimate
from mirrorlab.modes import ModeParams, eval_mode, lorentzian_lk_sq, resonance_table, transmissivity, xi_from_reflectivity
from mirrorlab.params import REFERENCE_CANTILEVER, REFERENCE_LASER, cantilever_pipeline, nondimensionalize

FINE = Tolerances(1e-11, 1e-13)
XIS = [0.5, 1.0, 6.4, 10.0, 50.0]


def rel(a, b):
    return abs(a - b) / abs(b)


def C(label, ok, detail, deviation=None):
    return (label, bool(ok), detail, deviation)


def fprime_exact(x, xi):
    d = 1 + xi**2 * np.sin(x) ** 2 - xi * np.sin(2 * x)
    dp = xi**2 * np.sin(2 * x) - 2 * xi * np.cos(2 * x)
    return -dp / (2 * d * d)


def test_criterion_01_potential_bounds(criterion):
    x = np.linspace(0, 10 * math.pi, 1_000_000)
    clauses = []
    for xi in XIS:
        v = potential.v_rwa(x, xi)
        bad = int(np.count_nonzero(~((v > -math.pi / 2) & (v <= 0))))
        clauses.append(C(f"xi={xi:g}", bad == 0, f"{bad} violations in 1e6 samples"))
    criterion(1, "-pi/2 < V <= 0", clauses)


def test_criterion_02_force_potential_consistency(criterion):
    clauses = []
    for xi in XIS:
        x = np.linspace(0.01, 10 * math.pi, 10_000)
        h = 1e-4 / max(1.0, xi)

        def central(step):
            hi, lo = x + step, x - step
            return -(potential.v_rwa(hi, xi) - potential.v_rwa(lo, xi)) / (hi - lo)

        d = (4 * central(h / 2) - central(h)) / 3
        f = potential.f_rwa(x, xi)
        mask = np.abs(f) > 1e-3
        worst = float(np.max(np.abs(d[mask] - f[mask]) / np.abs(f[mask])))
        clauses.append(C(f"xi={xi:g}", worst < 1e-6, f"max rel err {worst:.2e} on {mask.sum()} pts"))
    criterion(2, "-dV/dx = f", clauses)


def test_criterion_03_extrema(criterion):
    xi = 50.0
    t = potential.extrema_table(xi, 5)
    n = np.arange(5)
    pos_err = float(np.max(np.abs(t.f_max_at - (n * math.pi + 1 / xi))))
    peak_target = xi**2 / 2 - 7 / 18
    peak_err = float(np.max(np.abs(t.f_max_values - peak_target) / peak_target))
    vmin = float(t.v_min_values[0])
    vmin_err = rel(vmin, -math.atan(xi))
    ok = criterion(3, "extrema at xi = 50", [
        C("f-max position", pos_err < 1e-3, f"max |x - (n pi + 1/xi)| = {pos_err:.2e}"),
        C("f-max value", peak_err < 1e-2, f"rel err vs xi^2/2 - 7/18 = {peak_err:.2e}"),
        C("V-min", vmin_err < 1e-2, f"V = {vmin:.6f} vs -atan(xi) = {-math.atan(xi):.6f}, gap {vmin_err:.2%}",
          "-atan(xi) is the leading term only; the exact minimum lies about 1/xi above it (0.0200 at xi = 50)"),
    ])
    # pin the documented shortfall: the gap is the O(1/xi) correction
    assert not ok and 0.0125 < vmin_err < 0.0133
    assert vmin + math.atan(xi) == pytest.approx(1 / xi, rel=0.02)


def test_criterion_04_transmissivity(criterion):
    xi_a = xi_from_reflectivity(0.91)
    r_b = transmissivity(50.0)[1]
    criterion(4, "transmissivity round trip", [
        C("R = 0.91 -> xi", rel(xi_a, 6.4) < 1e-2, f"xi = {xi_a:.5f}"),
        C("xi = 50 -> R", abs(r_b - 0.9984) < 1e-4, f"R = {r_b:.6f}"),
        C("inverse", rel(transmissivity(xi_a)[1], 0.91) < 1e-12, "T(xi(R)) = R"),
    ])


def test_criterion_05_energy_conservation(criterion):
    xi = 50.0
    sc = Scenario.build("radiation", "rwa", xi)
    traj = integrate(sc, State(0.0, 4 * math.pi + 1 / xi, 0.0), 20.0, FINE)
    e = traj.energy()
    drift = float(np.max(np.abs(e - e[0])))
    criterion(5, "energy conservation, xi = 50, tau in [0, 20]", [
        C("|dE|", drift < 1e-8, f"{drift:.2e} at rtol {FINE.rel:g}, atol {FINE.abs:g}"),
    ])


def test_criterion_06_pasted_orbit(criterion):
    xi = 50.0
    sc = Scenario.build("radiation", "rwa", xi)
    ic = State(0.0, 4 * math.pi + 1 / xi, 0.0)
    v0 = analytic.ic_match(energy(ic, sc), xi)
    P = analytic.pasted_period(xi, v0)
    traj = integrate(sc, ic, 3 * P, FINE)
    est = period_estimate(traj)
    orbit = analytic.rwa_pasted(xi, 4, v0, tau_end=2 * P, start="wall")
    tau = np.linspace(0, 2 * P, 40001)
    dx = float(np.max(np.abs(traj(tau)[0] - orbit.evaluate(tau)[0])))
    m = potential.sawtooth_slope(xi)
    v_opt = math.sqrt(m / xi)
    p_min = analytic.pasted_period(xi, v_opt)
    p_ref = 4 * math.sqrt(2 / xi)
    # numeric period at the optimal speed, reported for context only
    fast = period_estimate(integrate(sc, State(0.0, potential.force_zero(xi, 4), v_opt), 10.0, FINE))
    criterion(6, "pasted orbit, Fig. 6 regime", [
        C("period", rel(est.period, P) < 0.05, f"numeric {est.period:.4f} vs P = {P:.4f}"),
        C("max |dx|", dx < 0.1, f"{dx:.4f} over two periods"),
        C("P_min", rel(p_min, p_ref) < 0.10,
          f"P_min = {p_min:.4f} vs 4 sqrt(2/xi) = {p_ref:.4f} (numeric orbit at v_opt: {fast.period:.4f})"),
    ])


def test_criterion_07_rwa_convergence(criterion):
    xi = 10.0
    ic = State(0.0, 4 * math.pi + 1 / xi, 0.0)
    ref = integrate(Scenario.build("radiation", "rwa", xi), ic, 30.0, FINE)
    dists = []
    for om in (100.0, 250.0, 500.0):
        full = integrate(Scenario.build("radiation", "full", xi, Omega=om), ic, 30.0)
        grid = np.linspace(0, 30, int(10 * om * 30 / (2 * math.pi)) + 1)
        dists.append(float(np.max(np.abs(full(grid)[0] - ref(grid)[0]))))
    dec = all(a > b for a, b in zip(dists, dists[1:]))
    criterion(7, "RWA convergence, xi = 10", [
        C("sup-distance", dec, "Omega 100/250/500 -> " + " / ".join(f"{d:.4g}" for d in dists)),
    ])


def test_criterion_08_stability_thresholds(criterion):
    xi = 10.0
    xb = potential.force_zero(xi, 4)
    g_c = 2 * math.sqrt(abs(fprime_exact(xb, xi)))

    def kind(g):
        try:
            return classify(xb, Scenario.build("friction", "rwa", xi, Gamma=g)).kind
        except DegenerateClassification:
            return None

    lo, hi = 1.0, 7.0
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        k = kind(mid)
        if k is None:
            lo = hi = mid
        elif k is FixedPointKind.STABLE_SPIRAL:
            lo = mid
        else:
            hi = mid
    flip = 0.5 * (lo + hi)
    saddle = classify(4 * math.pi, Scenario.build("friction", "rwa", xi, Gamma=1.0)).kind
    criterion(8, "stability thresholds", [
        C("flip", abs(flip - g_c) < 1e-6, f"Gamma_flip = {flip:.9f} vs 2 sqrt|f'| = {g_c:.9f}"),
        C("Gamma=1", kind(1.0) is FixedPointKind.STABLE_SPIRAL, f"{kind(1.0).value}"),
        C("Gamma=7", kind(7.0) is FixedPointKind.STABLE_NODE, f"{kind(7.0).value}"),
        C("4 pi", saddle is FixedPointKind.SADDLE, saddle.value),
    ])


def test_criterion_09_friction_settling(criterion):
    xi, gamma = 10.0, 1.0
    sc = Scenario.build("friction", "rwa", xi, Gamma=gamma)
    traj = integrate(sc, State(0.0, 4 * math.pi + 1 / xi, 0.0), 50.0, FINE)
    tau = np.linspace(0, 50, 500_001)
    x, v = traj(tau)
    e = 0.5 * v**2 + potential.v_rwa(x, xi)
    dist = abs(x[-1] - potential.force_zero(xi, 4))
    rise = float(np.max(np.diff(e)))
    balance = abs((e[0] - e[-1]) - gamma * simpson(v**2, x=tau))
    criterion(9, "friction settling, xi = 10, Gamma = 1", [
        C("|x(50) - x**|", dist < 1e-3, f"{dist:.2e}"),
        C("dE <= 0", rise <= 1e-12, f"largest step change {rise:.2e}"),
        C("balance", balance < 1e-6, f"|dE - Gamma int v^2| = {balance:.2e}"),
    ])


def test_criterion_10_harmonic_fixed_point(criterion):
    xi, w = 10.0, 10.0
    sc = Scenario.build("harmonic", "rwa", xi, omega_ho=w, well=4, trap_center="seed")
    x, info = analysis.harmonic_fixed_point(sc)
    u = x - sc.params.x_E
    coeffs, roots, u_c = analysis.harmonic_cubic(xi, w)
    grid = np.geomspace(1e-12, 1e3, 1_000_001)
    vals = np.polyval(coeffs, grid)
    changes = int(np.count_nonzero(np.sign(vals[:-1]) != np.sign(vals[1:])))
    criterion(10, "harmonic fixed point, xi = omega_ho = 10", [
        C("u_n", abs(u - 0.033175) < 1e-4, f"{u:.7f} (cubic estimate {u_c:.7f})"),
        C("cubic", changes == 1 and abs(np.polyval(coeffs, u_c)) < 1e-15,
          f"{changes} positive sign change(s) on a dense grid"),
    ])


def _trap_fit(omega, omega_ho):
    sc = Scenario.build("harmonic", "full", 10.0, Omega=omega, Gamma=1.0, omega_ho=omega_ho, well=4, trap_center="seed")
    rwa = Scenario.build("harmonic", "rwa", 10.0, omega_ho=omega_ho, well=4, trap_center="seed")
    x0, _ = analysis.harmonic_fixed_point(rwa)
    traj = integrate(sc, State(0.0, x0, 0.0), 60.0)
    fit = fit_steady_state(traj, 50.0, center=sc.params.x_E)
    return fit, x0 - sc.params.x_E


def test_criterion_11_steady_state(criterion):
    fit_a, u_a = _trap_fit(500.0, 10.0)
    shift = fit_a.offset - u_a
    fit_b, _ = _trap_fit(500.0, 500.0)
    criterion(11, "trap steady state (Fig. 12)", [
        C("12a frequency", rel(fit_a.frequency, 500.0) < 1e-2, f"{fit_a.frequency:.4f}"),
        C("12a amplitude", rel(fit_a.amplitude, 1.33e-5) < 0.2, f"{fit_a.amplitude:.4e}"),
        C("12a shift", rel(shift, 4.4e-6) < 0.3, f"offset - u_n = {shift:.3e}"),
        C("12b amplitude", rel(fit_b.amplitude, 1e-2) < 0.2, f"{fit_b.amplitude:.4e}"),
    ])


def test_criterion_12_validity_audit(criterion):
    a = Scenario.build("friction", "full", 10.0, Omega=6.0, Gamma=1.0)
    rep_a = validity_report(integrate(a, State(0.0, 4 * math.pi + 0.1, 0.0), 50.0))
    b = Scenario.build("friction", "full", 50.0, Omega=14.1, Gamma=1.0)
    rep_b = validity_report(integrate(b, State(0.0, 4 * math.pi + 0.02, 0.0), 40.0), tau_min=15.0)
    c = Scenario.build("radiation", "rwa", 6.4, Omega=1e9)
    rep_c = validity_report(integrate(c, State(0.0, 4 * math.pi + 1 / 6.4, 0.0), 20.0))
    margin_c = min(e.margin for _, e in rep_c.entries())
    qdd_b = rep_b.max_qddot_over_c_omega0
    ok = criterion(12, "validity audit", [
        C("11a fails", not rep_a.passed, "report fails"),
        C("11a qddot", rel(rep_a.max_qddot_over_c_omega0, 0.2) < 0.15, f"{rep_a.max_qddot_over_c_omega0:.5f}"),
        C("11a qdot", rel(rep_a.max_qdot_over_c, 0.087) < 0.15, f"{rep_a.max_qdot_over_c:.5f}"),
        C("11b passes", rep_b.passed, "tail report passes"),
        C("11b qddot", qdd_b <= 0.03, f"{qdd_b:.6f} vs 0.03",
          "0.03 is 4 * 1.5 / 14.1^2 = 0.0302 rounded down; the tail has max |x''| = 1.5"),
        C("11b qdot", rep_b.max_qdot_over_c <= 0.015, f"{rep_b.max_qdot_over_c:.5f}"),
        C("reference point", rep_c.passed and rep_c.sufficient_passed and rep_c.rwa_regime_passed and margin_c >= 1e6,
          f"min margin {margin_c:.3g}"),
    ])
    assert not ok and 0.030 < qdd_b < 0.0303


def test_criterion_13_parameter_pipeline(criterion):
    r = cantilever_pipeline(REFERENCE_CANTILEVER, REFERENCE_LASER)
    p = r.params
    nd = nondimensionalize(p)
    criterion(13, "parameter pipeline", [
        C("M", rel(r.effective_mass, 3.3e-12) < 0.02, f"{r.effective_mass:.4e} kg"),
        C("M0", rel(p.M0, 6.8e-6) < 0.02, f"{p.M0:.4e} kg/m^2"),
        C("Delta/g0", rel(nd.Delta / p.g0, 3.8e12) < 0.02, f"{nd.Delta / p.g0:.4e}"),
        C("Omega g0", rel(nd.Omega * p.g0, 1562.6) < 0.02, f"{nd.Omega * p.g0:.2f}"),
        C("g0 bound", rel(p.g0, 5.2e-7) < 0.02, f"{p.g0:.4e}"),
    ])


def test_criterion_14_modes(criterion):
    clauses = []
    k = 1.0
    worst = 0.0
    for xi in (10.0, 50.0, 126.0):
        p = ModeParams(k, xi / (4 * math.pi * k))
        t = resonance_table(p, 3)
        for n, q in enumerate(t.maximizers):
            kq = np.linspace(n * math.pi - math.pi / 2, n * math.pi + math.pi / 2, 100_001)
            kq = kq[kq > 0]
            L = (2 / math.pi) ** 0.5 / np.sqrt(1 + xi**2 * np.sin(kq) ** 2 - xi * np.sin(2 * kq))
            i = int(np.argmax(L))
            fine = np.linspace(kq[i - 1], kq[i + 1], 100_001)
            Lf = (2 / math.pi) ** 0.5 / np.sqrt(1 + xi**2 * np.sin(fine) ** 2 - xi * np.sin(2 * fine))
            worst = max(worst, abs(fine[int(np.argmax(Lf))] / k - q) / (math.pi / k))
    clauses.append(C("positions", worst < 1e-6, f"max offset {worst:.2e} pi/k"))
    for xi in (50.0, 126.0):
        p = ModeParams(k, xi / (4 * math.pi * k))
        t = resonance_table(p, 3)
        err = float(np.max(np.abs(t.peak_values / ((2 / math.pi) ** 0.5 * xi) - 1)))
        clauses.append(C(f"peak xi={xi:g}", err < 1e-2, f"rel err {err:.2e}"))
        q0 = t.maximizers[1]
        peak = lorentzian_lk_sq(q0, p, 1, q_center=q0)[0]
        exact_peak = eval_mode(q0, p).L ** 2
        halves = [lorentzian_lk_sq(q0 + s / (xi**2 * k), p, 1, q_center=q0)[0] / peak for s in (-1, 1)]
        exact_halves = [eval_mode(q0 + s / (xi**2 * k), p).L ** 2 / exact_peak for s in (-1, 1)]
        herr = max(abs(h - 0.5) / 0.5 for h in halves + exact_halves)
        clauses.append(C(f"half max xi={xi:g}", herr < 2e-2, f"max rel err {herr:.2e}"))
    criterion(14, "mode acceptance", clauses)
