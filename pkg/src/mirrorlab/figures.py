"""Figure registry: each id maps to a shipped config and a dataset builder.

Every builder is deterministic (fixed grids, fixed tolerances, no clocks), so
re-running a figure reproduces its CSV files byte for byte.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import analysis, analytic, potential
from .config import ConfigError, RunConfig, figure_config_path, load
from .dynamics import Scenario, State, Treatment, energy, integrate
from .modes import ModeParams, eval_mode, resonance_table
from .output import write_blocks, write_csv, write_gnuplot

__all__ = ["FIGURES", "figure_ids", "expand", "build_figure"]

# id -> config stems; multi-panel figures run every panel
FIGURES = {
    "1": ["fig1"],
    "2": ["fig2"],
    "3": ["fig3"],
    "4": ["fig4"],
    "5": ["fig5"],
    "6": ["fig6"],
    "7": ["fig7"],
    "8": ["fig8a", "fig8b"],
    "9": ["fig9a", "fig9b"],
    "10": ["fig10"],
    "11": ["fig11a", "fig11b"],
    "12": ["fig12a", "fig12b"],
}


def figure_ids():
    return list(FIGURES)


def expand(ident):
    """``"8"`` -> ``["fig8a", "fig8b"]``; ``"8a"``/``"fig8a"`` -> ``["fig8a"]``."""
    key = str(ident).strip().lower()
    key = key[3:] if key.startswith("fig") else key
    if key in FIGURES:
        return FIGURES[key]
    stems = [s for group in FIGURES.values() for s in group]
    if "fig" + key in stems:
        return ["fig" + key]
    raise ConfigError(f"unknown figure {ident!r}; choose from {', '.join(FIGURES)}")


def _header(rc: RunConfig, stem):
    items = [(k, v) for k, v in rc.resolved_items() if not k.startswith("output.")]
    return [("figure", stem)] + items


def _sample_traj(traj, rc, n_default=2001):
    n = rc.samples or n_default
    tau = np.linspace(traj.tau[0], traj.tau[-1], n)
    return traj.resample(tau)


def _traj_data(traj, with_energy=True, audit=False):
    data = {"tau": traj.tau, "x": traj.x, "v": traj.v}
    cols = ["tau", "x", "v"]
    if with_energy and not traj.scenario.is_full:
        data["energy"] = traj.energy()
        cols.append("energy")
    if audit:
        om = traj.scenario.params.Omega
        data["qdot_over_c"] = 2.0 / om * traj.v
        data["qddot_over_comega0"] = 4.0 / om**2 * traj.acceleration()
        cols += ["qdot_over_c", "qddot_over_comega0"]
    return cols, data


def _plot(rc, out, stem, title, plots, **kw):
    if rc.plot:
        return [write_gnuplot(out / f"{stem}.gp", title, plots, **kw)]
    return []


# --- builders -----------------------------------------------------------


def _mode_amplitude(rc, out, stem):
    p = ModeParams(k=rc.number("modes", "k"), chi0=rc.number("modes", "chi0"))
    q_min, q_max = rc.number("modes", "q_min"), rc.number("modes", "q_max")
    grid = np.linspace(q_min, q_max, int(rc.number("modes", "n", 20001)))
    table = resonance_table(p, int(rc.number("modes", "n_max", 4)))
    # resolve each narrow resonance with extra points within +-20 half widths
    extra = [q + table.hwhm_q * np.linspace(-20, 20, 401) for q in table.maximizers]
    q = np.unique(np.concatenate([grid, *extra]))
    q = q[(q >= q_min) & (q <= q_max)]
    L = np.array([eval_mode(float(z), p).L for z in q])
    files = [write_csv(out / f"{stem}.csv", ["q", "L"], data={"q": q, "L": L}, header=_header(rc, stem))]
    files += _plot(rc, out, stem, "L_k(q)", [(f"{stem}.csv", "1:2", "L", "lines")], xlabel="q", ylabel="L")
    return files


def _potential_family(rc, out, stem):
    xs = np.linspace(rc.number("potential", "x_min"), rc.number("potential", "x_max"), int(rc.number("potential", "n")))
    xis = rc.numbers("figure", "xi_values")
    cols = ["x"] + [f"V_xi{xi:g}" for xi in xis]
    data = {"x": xs, **{f"V_xi{xi:g}": potential.v_rwa(xs, xi) for xi in xis}}
    files = [write_csv(out / f"{stem}.csv", cols, data=data, header=_header(rc, stem))]
    plots = [(f"{stem}.csv", f"1:{i + 2}", c, "lines") for i, c in enumerate(cols[1:])]
    return files + _plot(rc, out, stem, "V_RWA", plots, xlabel="x", ylabel="V")


def _sawtooth(rc, out, stem):
    n = int(rc.number("figure", "well"))
    xi = rc.number("potential", "xi")
    npts = int(rc.number("potential", "n"))
    lo, hi = n * math.pi, (n + 1) * math.pi
    # a dense patch across the wall and floor, a regular grid elsewhere
    xs = np.unique(np.concatenate([np.linspace(lo, hi, npts), np.linspace(lo, lo + 3.0 / xi, npts // 4)]))
    a = {"x": xs, "V": potential.v_rwa(xs, xi), "V_sawtooth": potential.v_sawtooth(xs, xi)}
    files = [write_csv(out / f"{stem}a.csv", ["x", "V", "V_sawtooth"], data=a, header=_header(rc, stem))]
    xis = rc.numbers("figure", "xi_values")
    xs_b = np.unique(np.concatenate([np.linspace(lo, hi, npts), np.linspace(lo, lo + 2.0 / min(xis), npts // 4)]))
    xs_b = xs_b[(xs_b > lo) & (xs_b < hi)]  # V vanishes at the well edges
    b = {"x": xs_b}
    for z in xis:
        v = potential.v_rwa(xs_b, z)
        b[f"relerr_xi{z:g}"] = np.abs(v - potential.v_sawtooth(xs_b, z)) / np.abs(v)
    cols_b = ["x"] + [f"relerr_xi{z:g}" for z in xis]
    files.append(write_csv(out / f"{stem}b.csv", cols_b, data=b, header=_header(rc, stem)))
    files += _plot(
        rc, out, stem + "a", "sawtooth",
        [(f"{stem}a.csv", "1:2", "V", "lines"), (f"{stem}a.csv", "1:3", "sawtooth", "lines dt 2")],
        xlabel="x", ylabel="V",
    )
    plots = [(f"{stem}b.csv", f"1:{i + 2}", c, "lines") for i, c in enumerate(cols_b[1:])]
    files += _plot(rc, out, stem + "b", "relative error", plots, xlabel="x", ylabel="error", extra=["set logscale y"])
    return files


def _energy_contour(rc, out, stem):
    xi = rc.number("potential", "xi")
    xs = np.linspace(rc.number("potential", "x_min"), rc.number("potential", "x_max"), int(rc.number("potential", "n")))
    vs = np.linspace(rc.number("figure", "v_min"), rc.number("figure", "v_max"), int(rc.number("figure", "nv")))
    blocks = []
    for x in xs:
        e = 0.5 * vs**2 + potential.v_rwa(float(x), xi)
        blocks.append((f"x = {x:.17g}", {"x": np.full_like(vs, x), "v": vs, "energy": e}))
    # gnuplot's grid format wants single blank lines between scan lines
    path = out / f"{stem}.csv"
    write_blocks(path, ["x", "v", "energy"], blocks, header=_header(rc, stem))
    text = path.read_text(encoding="utf-8").replace("\n\n\n", "\n\n")
    path.write_text(text, encoding="utf-8")
    levels = ",".join(f"{z:g}" for z in sorted(rc.numbers("figure", "levels")))
    extra = ["set contour base", f"set cntrparam levels discrete {levels}", "unset surface", "set view map"]
    files = [path]
    if rc.plot:
        gp = out / f"{stem}.gp"
        lines = [
            "set datafile separator ','",
            *extra,
            "set xlabel 'x'",
            "set ylabel 'v'",
            f"splot '{stem}.csv' using 1:2:3 with lines notitle",
            "pause -1",
        ]
        gp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        files.append(gp)
    return files


def _mode_profile(rc, out, stem):
    p = ModeParams(k=rc.number("modes", "k"), chi0=rc.number("modes", "chi0"))
    n = int(rc.number("figure", "well"))
    per = int(rc.number("figure", "points_per_wavelength"))
    outside = rc.number("figure", "wavelengths_outside")
    lam = 2.0 * math.pi / p.k
    files = []
    for panel, kq in (("a", n * math.pi + 1.0 / p.xi), ("b", (n + 0.5) * math.pi)):
        q = kq / p.k
        mode = eval_mode(q, p)
        x_end = q + outside * lam
        xs = np.linspace(0.0, x_end, int(round(x_end / lam * per)) + 1)
        xs = np.unique(np.concatenate([xs, [q]]))
        prof = mode.profile(xs)
        hdr = _header(rc, stem) + [("mirror.kq", repr(kq)), ("mirror.q", repr(q)), ("mode.L", repr(mode.L))]
        files.append(write_csv(out / f"{stem}{panel}.csv", ["x", "V"], data={"x": xs, "V": prof}, header=hdr))
        files += _plot(
            rc, out, f"{stem}{panel}", f"mode profile, kq = {kq:.6g}",
            [(f"{stem}{panel}.csv", "1:2", "V", "lines")], xlabel="x", ylabel="V",
            extra=[f"set arrow from {q!r}, graph 0 to {q!r}, graph 1 nohead lc rgb 'blue'"],
        )
    return files


def _rwa_vs_pasted(rc, out, stem):
    sc, ic = rc.scenario, rc.initial
    xi = sc.xi
    n = math.floor(ic.x / math.pi)
    E = energy(ic, sc)
    v0 = analytic.ic_match(E, xi)
    orbit = analytic.rwa_pasted(xi, n, v0, tau0=ic.tau, start="wall")
    periods = rc.number("figure", "periods", 2)
    tau_end = rc.tau_end or ic.tau + periods * orbit.period
    traj = _sample_traj(integrate(sc, ic, tau_end, rc.tol), rc)
    orbit = analytic.rwa_pasted(xi, n, v0, tau0=ic.tau, tau_end=tau_end, start="wall")
    px, pv = orbit.evaluate(traj.tau)
    hdr = _header(rc, stem) + [("pasted.v0", repr(v0)), ("pasted.period", repr(orbit.period))]
    cols, data = _traj_data(traj)
    files = [
        write_csv(out / f"{stem}_numeric.csv", cols, data=data, header=hdr),
        write_csv(out / f"{stem}_pasted.csv", ["tau", "x", "v"], data={"tau": traj.tau, "x": px, "v": pv}, header=hdr),
    ]
    files += _plot(
        rc, out, stem, "RWA orbit vs pasted orbit",
        [(f"{stem}_numeric.csv", "1:2", "numeric", "lines"), (f"{stem}_pasted.csv", "1:2", "pasted", "lines dt 2")],
    )
    return files


def _drive_family(rc, out, stem):
    base = rc.scenario
    ic = rc.initial
    files = []
    plots = []
    omegas = rc.numbers("figure", "omegas")
    runs = [(f"Omega{om:g}", Scenario(base.kind, Treatment.FULL, base.params.with_(Omega=om))) for om in omegas]
    runs.append(("rwa", Scenario(base.kind, Treatment.RWA, base.params)))
    rwa_traj = integrate(runs[-1][1], ic, rc.tau_end, rc.tol)
    grid = np.linspace(ic.tau, rc.tau_end, rc.samples or 2001)
    x_rwa = rwa_traj(grid)[0]
    summary = []
    for label, sc in runs:
        traj = rwa_traj if label == "rwa" else integrate(sc, ic, rc.tau_end, rc.tol)
        res = traj.resample(grid)
        cols, data = _traj_data(res)
        hdr = _header(rc, stem) + [("run", label), ("run.Omega", repr(sc.params.Omega)), ("run.treatment", sc.treatment.value)]
        files.append(write_csv(out / f"{stem}_{label}.csv", cols, data=data, header=hdr))
        plots.append((f"{stem}_{label}.csv", "1:2", label, "lines"))
        if label != "rwa":
            summary.append((sc.params.Omega, float(np.max(np.abs(res.x - x_rwa))), float(np.max(np.abs(res.v)))))
    files.append(
        write_csv(
            out / f"{stem}_distance.csv", ["Omega", "sup_dx_to_rwa", "max_abs_v"], rows=summary, header=_header(rc, stem)
        )
    )
    return files + _plot(rc, out, stem, "driven vs RWA", plots)


def _phase_portrait(rc, out, stem):
    sc = rc.scenario
    xs = rc.numbers("figure", "x_starts")
    vs = rc.numbers("figure", "v_starts")
    blocks = []
    for x0 in xs:
        for v0 in vs:
            traj = integrate(sc, State(0.0, x0, v0), rc.tau_end, rc.tol)
            res = _sample_traj(traj, rc)
            blocks.append((f"x0 = {x0:.17g}, v0 = {v0:.17g}", {"tau": res.tau, "x": res.x, "v": res.v}))
    files = [write_blocks(out / f"{stem}_trajectories.csv", ["tau", "x", "v"], blocks, header=_header(rc, stem))]
    n = int(rc.number("scenario", "well", 4))
    fps = analysis.fixed_points(sc, wells=[n])
    rows = []
    for fp in fps:
        l1, l2 = fp.eigenvalues
        rows.append((fp.x, 0.0, fp.kind.value, l1.real, l1.imag, l2.real, l2.imag, fp.stiffness))
    cols = ["x", "v", "kind", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "stiffness"]
    files.append(write_csv(out / f"{stem}_fixed_points.csv", cols, rows=rows, header=_header(rc, stem)))
    half = rc.number("figure", "manifold_half_length", 0.3)
    mblocks = []
    for fp in fps:
        if fp.kind is analysis.FixedPointKind.SADDLE:
            man = analysis.manifolds(fp)
            dx = np.linspace(-half, half, 201)
            mblocks.append(("unstable", {"x": fp.x + dx, "v": man.unstable(fp.x + dx)}))
            mblocks.append(("stable", {"x": fp.x + dx, "v": man.stable(fp.x + dx)}))
    files.append(write_blocks(out / f"{stem}_manifolds.csv", ["x", "v"], mblocks, header=_header(rc, stem)))
    if rc.plot:
        nb = len(blocks)
        plots = [(f"{stem}_trajectories.csv", "2:3", "orbits", "lines")]
        plots.append((f"{stem}_fixed_points.csv", "1:2", "fixed points", "points pt 7"))
        if mblocks:
            plots.append((f"{stem}_manifolds.csv", "1:2", "manifolds", "lines dt 2"))
        files.append(write_gnuplot(out / f"{stem}.gp", f"phase portrait ({nb} orbits)", plots, xlabel="x", ylabel="v"))
    return files


def _friction_vs_pasted(rc, out, stem):
    sc, ic = rc.scenario, rc.initial
    xi, G = sc.xi, sc.params.Gamma
    E = 0.5 * ic.v**2 + float(potential.v_rwa(ic.x, xi))
    v0 = analytic.ic_match(E, xi)
    traj = _sample_traj(integrate(sc, ic, rc.tau_end, rc.tol), rc)
    orbit = analytic.friction_pasted(xi, G, (ic.x, v0), rc.tau_end, tau0=ic.tau)
    px, pv = orbit.evaluate(traj.tau)
    hdr = _header(rc, stem) + [("pasted.v0", repr(v0)), ("pasted.settled", str(orbit.settled))]
    cols, data = _traj_data(traj)
    files = [
        write_csv(out / f"{stem}_numeric.csv", cols, data=data, header=hdr),
        write_csv(out / f"{stem}_pasted.csv", ["tau", "x", "v"], data={"tau": traj.tau, "x": px, "v": pv}, header=hdr),
    ]
    files += _plot(
        rc, out, stem, "damped orbit vs pasted orbit",
        [(f"{stem}_numeric.csv", "1:2", "numeric", "lines"), (f"{stem}_pasted.csv", "1:2", "pasted", "lines dt 2")],
    )
    return files


def _audited_orbit(rc, out, stem):
    sc, ic = rc.scenario, rc.initial
    traj = integrate(sc, ic, rc.tau_end, rc.tol)
    res = _sample_traj(traj, rc)
    cols, data = _traj_data(res, audit=True)
    files = [write_csv(out / f"{stem}.csv", cols, data=data, header=_header(rc, stem))]
    rows = []
    for tau_min, label in ((None, "all"), (rc.tau_min, "tail")):
        if label == "tail" and tau_min is None:
            continue
        rep = analysis.validity_report(traj, tau_min=tau_min, factor=rc.factor)
        for group, c in rep.entries():
            rows.append((label, rep.tau_window[0], group, c.name, c.lhs, c.rhs, c.margin, c.passed))
    vcols = ["window", "tau_min", "group", "condition", "lhs", "rhs", "margin", "passed"]
    files.append(write_csv(out / f"{stem}_validity.csv", vcols, rows=rows, header=_header(rc, stem)))
    n = math.floor(ic.x / math.pi)
    xi = sc.xi
    marks = [n * math.pi + k / xi for k in (1, 2, 3)]
    extra = [f"set arrow from graph 0, first {y!r} to graph 1, first {y!r} nohead dt 3" for y in marks]
    return files + _plot(rc, out, stem, "driven orbit", [(f"{stem}.csv", "1:2", "x", "lines")], extra=extra)


def _trap_steady_state(rc, out, stem):
    sc, ic = rc.scenario, rc.initial
    traj = integrate(sc, ic, rc.tau_end, rc.tol)
    window = rc.number("figure", "fit_window", 10.0)
    tau_min = rc.tau_end - window
    x_E = sc.params.x_E
    u_n = ic.x - x_E
    fit = analysis.fit_steady_state(traj, tau_min, center=x_E)
    tail = np.linspace(tau_min, rc.tau_end, rc.samples or 2001)
    res = traj.resample(tail)
    cols, data = _traj_data(res)
    data["u"] = res.x - x_E
    data["u_fit"] = fit.offset + fit.amplitude * np.cos(fit.frequency * res.tau - fit.psi)
    cols += ["u", "u_fit"]
    hdr = _header(rc, stem)
    files = [write_csv(out / f"{stem}.csv", cols, data=data, header=hdr)]
    rows = [
        ("u_n", u_n),
        ("offset", fit.offset),
        ("offset_minus_u_n", fit.offset - u_n),
        ("amplitude", fit.amplitude),
        ("psi", fit.psi),
        ("frequency", fit.frequency),
        ("rms_residual", fit.rms_residual),
        ("fit_tau_min", fit.window[0]),
        ("fit_tau_max", fit.window[1]),
    ]
    for key in ("reference_amplitude", "reference_shift"):
        ref = rc.number("figure", key)
        if ref is not None:
            rows.append((key, ref))
    est = analytic.harmonic_steady_state(sc.xi, sc.params.Omega, sc.params.Gamma, sc.params.omega_ho)
    rows += [("estimate_amplitude", est.amplitude), ("estimate_theta", est.theta)]
    files.append(write_csv(out / f"{stem}_fit.csv", ["quantity", "value"], rows=rows, header=hdr))
    plots = [(f"{stem}.csv", f"1:{cols.index('u') + 1}", "u", "lines"),
             (f"{stem}.csv", f"1:{cols.index('u_fit') + 1}", "fit", "lines dt 3")]
    return files + _plot(rc, out, stem, "trap steady state", plots, ylabel="u")


HANDLERS = {
    "mode_amplitude": (_mode_amplitude, False),
    "potential_family": (_potential_family, False),
    "sawtooth": (_sawtooth, False),
    "energy_contour": (_energy_contour, False),
    "mode_profile": (_mode_profile, False),
    "rwa_vs_pasted": (_rwa_vs_pasted, True),
    "drive_family": (_drive_family, True),
    "phase_portrait": (_phase_portrait, True),
    "friction_vs_pasted": (_friction_vs_pasted, True),
    "audited_orbit": (_audited_orbit, True),
    "trap_steady_state": (_trap_steady_state, True),
}


def build_figure(stem, out_dir=None, sets=(), overrides=None, plot=None):
    """Build one registry entry (``"fig6"``) and return the written paths."""
    path = figure_config_path(stem)
    rc = load(path, sets=sets, overrides=overrides, need_params=False)
    handler = (rc.get("figure", "handler") or "").strip()
    if handler not in HANDLERS:
        raise ConfigError(f"{path.name}: unknown figure handler {handler!r}")
    func, needs_scenario = HANDLERS[handler]
    if needs_scenario and rc.scenario is None:
        raise ConfigError(f"{path.name}: handler {handler!r} needs [scenario] and [params]")
    if out_dir is not None:
        rc.out_dir = Path(out_dir)
    if plot is not None:
        rc.plot = plot
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    return func(rc, rc.out_dir, stem)
