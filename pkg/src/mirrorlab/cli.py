"""``mirrorlab`` command line: parameters, potential, modes, simulation, analysis, sweeps, figures.

Exit codes: 0 success, 1 validity failure under ``--strict``, 2 configuration
or usage error, 3 numerical diagnostic (stiffness, half-line exit, runaway
pasting).
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from . import __version__, analysis, potential
from .analytic import RunawayPastingError
from .config import ConfigError, figure_config_path, load
from .dynamics import Kind, NumericalDiagnostic, Treatment, integrate
from .figures import FIGURES, build_figure, expand
from .modes import DomainError, ModeParams, eval_mode, resonance_table
from .output import write_csv, write_gnuplot
from .params import nondimensionalize
from .sweep import COLUMNS, grid_points, run_sweep

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors already; keep the message on stderr
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", metavar="PATH", help="INI config file, or the name of a shipped one (e.g. fig11a.cfg)")
    p.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value; KEY is section.key or a key unique to one section (repeatable)")
    p.add_argument("--out", metavar="DIR", help="output directory (default: $MIRRORLAB_OUT or .)")
    p.add_argument("--tol-rel", type=float, help="integrator relative tolerance")
    p.add_argument("--tol-abs", type=float, help="integrator absolute tolerance")
    p.add_argument("--tau-end", type=float, help="final time")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (sweep only)")
    p.add_argument("--plot", action="store_true", help="also write a gnuplot script next to each CSV")


def build_parser():
    parser = _Parser(prog="mirrorlab", description="Dynamics of a laser-driven, partially transparent cavity mirror.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "params": "derive nondimensional parameters from laboratory data",
        "potential": "tabulate the radiation-pressure potential and force",
        "modes": "tabulate the mode amplitude and locate its resonances",
        "simulate": "integrate one scenario and write the trajectory",
        "fixed-points": "locate and classify the fixed points of the RWA system",
        "validity": "audit a trajectory against the slow-mirror conditions",
        "sweep": "run a parameter grid and summarise each point",
        "figure": "regenerate figure datasets from the shipped configs",
    }
    cmds = {}
    for name, text in helps.items():
        cmds[name] = sub.add_parser(name, help=text, description=text)
        _common(cmds[name])
    cmds["simulate"].add_argument("--audit", action="store_true", help="add qdot/c and qddot/(c w0) columns")
    cmds["validity"].add_argument("--tau-min", type=float, help="start of the audit window")
    cmds["validity"].add_argument("--strict", action="store_true", help="exit 1 if the report fails")
    cmds["figure"].add_argument("ids", nargs="+", help=f"figure ids ({', '.join(FIGURES)}, panels like 8a, or 'all')")
    return parser


def _load(args, **kw):
    overrides = {
        "run.tau_end": args.tau_end,
        "run.tol_rel": args.tol_rel,
        "run.tol_abs": args.tol_abs,
        "output.dir": args.out,
        "output.plot": "yes" if args.plot else None,
    }
    if getattr(args, "tau_min", None) is not None:
        overrides["run.tau_min"] = args.tau_min
    return load(args.config, sets=args.sets, overrides=overrides, **kw)


def _header(rc, command):
    return [("command", command), ("mirrorlab", __version__)] + [(k, v) for k, v in rc.resolved_items() if not k.startswith("output.")]


def _outfile(rc, default):
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    return rc.out_dir / f"{rc.name or default}.csv"


def _say(*lines):
    for line in lines:
        print(line)


# --- subcommands ----------------------------------------------------------


def cmd_params(args):
    if args.config is None:
        args.config = str(figure_config_path("cantilever"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rc = _load(args, need_params=True)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rows = []
    if rc.pipeline is not None:
        rows += [(name, value, unit) for name, value, unit in rc.pipeline.steps]
    elif rc.physical is not None and rc.physical.g0 is not None:
        nd = nondimensionalize(rc.physical)
        rows += [("rate Delta", nd.Delta, "1/s"), ("field frequency omega0", nd.omega0, "rad/s")]
    nd = rc.nondim
    if nd is not None:
        rows += [("xi", nd.xi, ""), ("Omega", nd.Omega, ""), ("Gamma", nd.Gamma, ""),
                 ("omega_ho", nd.omega_ho, ""), ("x_E", nd.x_E, "")]
    width = max(len(r[0]) for r in rows) if rows else 0
    _say(*(f"{n:<{width}}  {v:.6g} {u}".rstrip() for n, v, u in rows))
    path = write_csv(_outfile(rc, "params"), ["quantity", "value", "unit"], rows=rows, header=_header(rc, "params"))
    _say(f"wrote {path}")
    return EXIT_OK


def _xi_for(rc, section):
    xi = rc.number(section, "xi")
    if xi is None and rc.nondim is not None:
        xi = rc.nondim.xi
    if xi is None:
        raise ConfigError(f"give [{section}] xi or a parameter source")
    return xi


def cmd_potential(args):
    rc = _load(args, need_params=False)
    xi = _xi_for(rc, "potential")
    x_min = rc.number("potential", "x_min", 0.0)
    x_max = rc.number("potential", "x_max", 2.0 * math.pi)
    n = int(rc.number("potential", "n", 2001))
    x = np.linspace(x_min, x_max, n)
    data = {
        "x": x,
        "V": potential.v_rwa(x, xi),
        "f": potential.f_rwa(x, xi),
        "V_sawtooth": potential.v_sawtooth(x, xi) if xi > 0 else np.zeros_like(x),
    }
    cols = list(data)
    path = write_csv(_outfile(rc, "potential"), cols, data=data, header=_header(rc, "potential"))
    _say(f"xi = {xi:g}")
    if xi > 0:
        table = potential.extrema_table(xi, int(rc.number("potential", "n_max", 5)))
        _say("n  f_max_at              f_max            V_min_at              V_min")
        for i in range(table.f_max_at.size):
            _say(f"{i:<2d} {table.f_max_at[i]:<21.15g} {table.f_max_values[i]:<16.10g} "
                 f"{table.v_min_at[i]:<21.15g} {table.v_min_values[i]:.10g}")
        if table.numeric_only:
            _say("note: xi < 5, the n pi + 1/xi seeds are unreliable; values come from bracketed roots only")
    if rc.plot:
        write_gnuplot(path.with_suffix(".gp"), f"potential, xi = {xi:g}",
                      [(path.name, "1:2", "V", "lines"), (path.name, "1:4", "sawtooth", "lines dt 2")],
                      xlabel="x", ylabel="V")
    _say(f"wrote {path}")
    return EXIT_OK


def cmd_modes(args):
    rc = _load(args, need_params=False)
    k = rc.number("modes", "k")
    chi0 = rc.number("modes", "chi0")
    if k is None or chi0 is None:
        raise ConfigError("[modes] needs k and chi0")
    p = ModeParams(k=k, chi0=chi0)
    q_min = rc.number("modes", "q_min", 1e-3 / k)
    q_max = rc.number("modes", "q_max", 2.0 * math.pi / k)
    q = np.linspace(q_min, q_max, int(rc.number("modes", "n", 2001)))
    evals = [eval_mode(float(z), p) for z in q]
    data = {"q": q, "L": [e.L for e in evals], "delta": [e.delta for e in evals]}
    path = write_csv(_outfile(rc, "modes"), ["q", "L", "delta"], data=data, header=_header(rc, "modes"))
    table = resonance_table(p, int(rc.number("modes", "n_max", 4)))
    _say(f"xi = {p.xi:.10g}, resonance half width = {table.hwhm_q:.6g} m ({table.hwhm_kq:.6g} in kq)")
    for i, (qm, L) in enumerate(zip(table.maximizers, table.peak_values)):
        _say(f"q_2n[{i}] = {qm:.15g} m, L = {L:.10g}")
    for note in table.notes:
        _say(f"note: {note}")
    rpath = write_csv(
        rc.out_dir / f"{rc.name or 'modes'}_resonances.csv",
        ["n", "q_max", "L_max", "q_min", "L_min"],
        rows=zip(range(table.maximizers.size), table.maximizers, table.peak_values, table.minimizers, table.trough_values),
        header=_header(rc, "modes"),
    )
    _say(f"wrote {path}", f"wrote {rpath}")
    return EXIT_OK


def _simulate(rc):
    if rc.scenario is None:
        raise ConfigError("simulation needs [scenario] and a parameter source")
    if rc.tau_end is None:
        raise ConfigError("run.tau_end (or --tau-end) is required")
    return integrate(rc.scenario, rc.initial, rc.tau_end, rc.tol)


def _sampled(rc, traj):
    if rc.samples:
        return traj.resample(np.linspace(traj.tau[0], traj.tau[-1], rc.samples))
    return traj


def cmd_simulate(args):
    rc = _load(args, need_scenario=True)
    traj = _simulate(rc)
    out = _sampled(rc, traj)
    cols, data = ["tau", "x", "v"], {"tau": out.tau, "x": out.x, "v": out.v}
    if not rc.scenario.is_full:
        cols.append("energy")
        data["energy"] = out.energy()
    if args.audit:
        om = rc.scenario.params.Omega
        data["qdot_over_c"] = 2.0 / om * out.v
        data["qddot_over_comega0"] = 4.0 / om**2 * out.acceleration()
        cols += ["qdot_over_c", "qddot_over_comega0"]
    path = write_csv(_outfile(rc, "simulate"), cols, data=data, header=_header(rc, "simulate"))
    if rc.plot:
        write_gnuplot(path.with_suffix(".gp"), "trajectory", [(path.name, "1:2", "x", "lines")])
    _say(f"{len(traj)} steps, {traj.nfev} evaluations, x(tau_end) = {traj.x[-1]:.15g}", f"wrote {path}")
    return EXIT_OK


def cmd_fixed_points(args):
    rc = _load(args, need_scenario=True)
    sc = rc.scenario
    if sc.treatment is not Treatment.RWA:
        raise ConfigError("fixed points are defined for the RWA treatment; set scenario.treatment = rwa")
    well = int(rc.number("scenario", "well", 4))
    if sc.kind is Kind.HARMONIC:
        fps = analysis.fixed_points(sc)
    else:
        fps = analysis.fixed_points(sc, wells=range(max(well - 1, 0), well + 2))
    rows = []
    for fp in fps:
        l1, l2 = fp.eigenvalues
        s = fp.manifold_slopes or ("", "")
        rows.append((fp.well, fp.x, fp.kind.value, l1.real, l1.imag, l2.real, l2.imag, fp.stiffness, s[0], s[1],
                     fp.residual))
        _say(f"x = {fp.x:.15g} (well {fp.well}): {fp.kind.value}, eigenvalues {l1:.6g}, {l2:.6g}")
        if "u" in fp.extra:
            _say(f"  u_n = x - x_E = {fp.extra['u']:.10g} (cubic estimate {fp.extra.get('cubic_u')!r})")
    for d in fps.diagnostics:
        _say(f"note: {d}")
    cols = ["well", "x", "kind", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "stiffness",
            "unstable_slope", "stable_slope", "residual"]
    path = write_csv(_outfile(rc, "fixed_points"), cols, rows=rows, header=_header(rc, "fixed-points"))
    _say(f"wrote {path}")
    return EXIT_OK


def cmd_validity(args):
    rc = _load(args, need_scenario=True)
    traj = _simulate(rc)
    rep = analysis.validity_report(traj, tau_min=rc.tau_min, factor=rc.factor)
    _say(rep.summary())
    rows = [(g, c.name, c.lhs, c.rhs, c.margin, c.passed) for g, c in rep.entries()]
    path = write_csv(_outfile(rc, "validity"), ["group", "condition", "lhs", "rhs", "margin", "passed"], rows=rows,
                     header=_header(rc, "validity"))
    _say(f"wrote {path}")
    if args.strict and not rep.passed:
        return EXIT_INVALID
    return EXIT_OK


def cmd_sweep(args):
    rc = _load(args, need_params=False)
    points = grid_points(rc)
    rows = run_sweep(points, jobs=args.jobs)
    path = write_csv(_outfile(rc, "sweep"), COLUMNS, rows=rows, header=_header(rc, "sweep"))
    failed = sum(1 for r in rows if r[-1])
    _say(f"{len(rows)} points, {failed} with diagnostics", f"wrote {path}")
    return EXIT_OK


def cmd_figure(args):
    ids = list(FIGURES) if args.ids == ["all"] else args.ids
    stems = [s for ident in ids for s in expand(ident)]
    out = args.out  # None -> each config's output.dir / $MIRRORLAB_OUT / .
    overrides = {"run.tol_rel": args.tol_rel, "run.tol_abs": args.tol_abs, "run.tau_end": args.tau_end}
    for stem in stems:
        files = build_figure(stem, out_dir=out, sets=args.sets, overrides=overrides, plot=args.plot or None)
        for f in files:
            _say(f"wrote {f}")
    return EXIT_OK


COMMANDS = {
    "params": cmd_params,
    "potential": cmd_potential,
    "modes": cmd_modes,
    "simulate": cmd_simulate,
    "fixed-points": cmd_fixed_points,
    "validity": cmd_validity,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"mirrorlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalDiagnostic, RunawayPastingError) as exc:
        print(f"mirrorlab: numerical diagnostic: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # domain errors raised by the library (e.g. an orbit energy outside its well)
        print(f"mirrorlab: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
