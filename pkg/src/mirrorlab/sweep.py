"""Parameter sweeps: one integration per grid point, one summary row per point.

Points are independent, so they may run in worker processes; rows are always
assembled in grid order, which keeps the output deterministic.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analysis, potential
from .config import ConfigError, RunConfig, _xi_funcs, evaluate
from .dynamics import Kind, NumericalDiagnostic, Scenario, State, Tolerances, Treatment, integrate, period_estimate

__all__ = ["AXES", "COLUMNS", "SweepPoint", "grid_points", "run_point", "run_sweep"]

AXES = ("xi", "Omega", "Gamma", "omega_ho", "v0")
COLUMNS = [
    "index", "xi", "Omega", "Gamma", "omega_ho", "v0", "x0",
    "well", "hops", "periodic", "period", "validity_pass", "attractor", "rwa_distance", "diagnostic",
]


@dataclass(frozen=True)
class SweepPoint:
    index: int
    kind: str
    treatment: str
    trap_center: str
    well: int
    xi: float
    Omega: float
    Gamma: float
    omega_ho: float
    v0: float
    x0_text: str | None
    tau0: float
    tau_end: float
    rtol: float
    atol: float
    factor: float


def grid_points(rc: RunConfig):
    """Cartesian product over the ``[sweep]`` axes that are present (empty if none)."""
    axes = {a: rc.numbers("sweep", a) for a in AXES if rc.raw.has_option("sweep", a)}
    if not axes or any(len(v) == 0 for v in axes.values()):
        return []
    if rc.scenario is None or rc.tau_end is None:
        raise ConfigError("a sweep needs [scenario], a parameter source and run.tau_end")
    sc, ic = rc.scenario, rc.initial
    base = {
        "xi": sc.params.xi,
        "Omega": sc.params.Omega,
        "Gamma": sc.params.Gamma,
        "omega_ho": sc.params.omega_ho,
        "v0": ic.v,
    }
    names = [a for a in AXES if a in axes]
    x0_text = rc.get("initial", "x")
    points = []
    for i, combo in enumerate(itertools.product(*(axes[a] for a in names))):
        values = {**base, **dict(zip(names, combo))}
        points.append(
            SweepPoint(
                index=i,
                kind=sc.kind.value,
                treatment=sc.treatment.value,
                trap_center=sc.trap_center,
                well=int(rc.number("scenario", "well", 4)),
                x0_text=x0_text,
                tau0=ic.tau,
                tau_end=rc.tau_end,
                rtol=rc.tol.rel,
                atol=rc.tol.abs,
                factor=rc.factor,
                **values,
            )
        )
    return points


def _hops(x):
    cells = np.floor(np.asarray(x) / math.pi)
    return int(np.count_nonzero(np.diff(cells)))


def _periodic(traj):
    t0, t1 = traj.tau[0], traj.tau[-1]
    start = t0 + 0.25 * (t1 - t0)  # skip the transient
    level = float(np.mean(traj.window(tau_min=start).x))
    est = period_estimate(traj, tau_min=start, level=level, min_crossings=3)
    if est is None or est.std > 1e-2 * est.period:
        return False, None
    # a decaying spiral also crosses its mean regularly; require a steady amplitude
    q3 = traj.window(t0 + 0.5 * (t1 - t0), t0 + 0.75 * (t1 - t0)).x
    q4 = traj.window(t0 + 0.75 * (t1 - t0)).x
    a3, a4 = float(np.ptp(q3)), float(np.ptp(q4))
    return bool(a4 > 1e-6 and a4 > 0.9 * a3), est.period


def _attractor(sc, well):
    rwa = Scenario(sc.kind, Treatment.RWA, sc.params, trap_center=sc.trap_center)
    if sc.params.xi == 0:
        return "none"
    try:
        if sc.kind is Kind.HARMONIC:
            x, info = analysis.harmonic_fixed_point(rwa)
            if x is None:
                return "none"
        else:
            x = potential.force_zero(sc.params.xi, well)
        return analysis.classify(x, rwa).kind.value
    except analysis.DegenerateClassification:
        return "degenerate"


def run_point(pt: SweepPoint):
    row = {c: "" for c in COLUMNS}
    row.update(index=pt.index, xi=pt.xi, Omega=pt.Omega, Gamma=pt.Gamma, omega_ho=pt.omega_ho, v0=pt.v0)
    try:
        if pt.kind == Kind.HARMONIC.value:
            sc = Scenario.build(pt.kind, pt.treatment, pt.xi, pt.Omega, pt.Gamma, pt.omega_ho, well=pt.well,
                                trap_center=pt.trap_center)
        else:
            sc = Scenario.build(pt.kind, pt.treatment, pt.xi, pt.Omega, pt.Gamma, pt.omega_ho)
        if pt.x0_text is None or pt.x0_text.strip() == "fixed_point":
            if sc.kind is Kind.HARMONIC:
                x0, _ = analysis.harmonic_fixed_point(sc)
            else:
                x0 = pt.well * math.pi + 1.0 / pt.xi
        else:
            names = {"xi": pt.xi, "Omega": pt.Omega}
            x0 = evaluate(pt.x0_text, names, _xi_funcs(pt.xi) if pt.xi > 0 else {})
        row["x0"] = x0
        tol = Tolerances(pt.rtol, pt.atol)
        ic = State(pt.tau0, x0, pt.v0)
        traj = integrate(sc, ic, pt.tau_end, tol)
        row["well"] = math.floor(traj.x[-1] / math.pi)
        row["hops"] = _hops(traj.x)
        row["periodic"], row["period"] = _periodic(traj)
        row["validity_pass"] = analysis.validity_report(traj, factor=pt.factor).passed
        row["attractor"] = "center" if (sc.params.Gamma == 0 and sc.kind is not Kind.HARMONIC) else _attractor(sc, row["well"])
        if sc.is_full:
            ref = integrate(Scenario(sc.kind, Treatment.RWA, sc.params, trap_center=sc.trap_center), ic, pt.tau_end, tol)
            n = int(max(2001, 10.0 * pt.Omega * (pt.tau_end - pt.tau0) / (2.0 * math.pi))) + 1
            grid = np.linspace(pt.tau0, pt.tau_end, n)
            row["rwa_distance"] = float(np.max(np.abs(traj(grid)[0] - ref(grid)[0])))
    except (NumericalDiagnostic, ValueError, ArithmeticError) as exc:
        row["diagnostic"] = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return [row[c] for c in COLUMNS]


def run_sweep(points, jobs=1):
    """Evaluate every point; rows come back in grid order."""
    if jobs and jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_point, points))
    return [run_point(p) for p in points]
