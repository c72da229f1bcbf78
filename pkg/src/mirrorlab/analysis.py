"""Fixed points, stability, bounded-motion tests and model-validity audits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, curve_fit

from . import potential
from .dynamics import Kind, Scenario, Trajectory, Treatment, energy_series, period_estimate

__all__ = [
    "FixedPointKind",
    "FixedPoint",
    "FixedPointList",
    "DegenerateClassification",
    "Manifolds",
    "ConditionEntry",
    "ValidityReport",
    "force_derivative",
    "classify",
    "fixed_points",
    "manifolds",
    "harmonic_cubic",
    "harmonic_fixed_point",
    "validity_report",
    "bounded_motion_check",
    "SteadyFit",
    "fit_steady_state",
]

_DEGENERATE_TOL = 1e-8


class FixedPointKind(enum.Enum):
    SADDLE = "saddle"
    STABLE_SPIRAL = "stable_spiral"
    STABLE_NODE = "stable_node"
    CENTER = "center"  # Gamma = 0 well bottoms of the conservative system


class DegenerateClassification(ValueError):
    """An eigenvalue vanishes or the pair is repeated; the linearization cannot decide."""


@dataclass(frozen=True)
class FixedPoint:
    x: float
    kind: FixedPointKind
    eigenvalues: tuple
    stiffness: float  # omega_ho^2 - f'(x), the restoring constant of the linearization
    manifold_slopes: tuple | None = None  # (unstable, stable) for saddles
    residual: float = 0.0
    well: int = 0
    extra: dict = field(default_factory=dict)


class FixedPointList(list):
    """List of fixed points that also carries search diagnostics."""

    def __init__(self, items=(), diagnostics=None):
        super().__init__(items)
        self.diagnostics = list(diagnostics or [])


def force_derivative(x, xi, h=1e-6):
    """Richardson-extrapolated central difference of the RWA force."""

    def central(step):
        # divide by the step actually taken: x +/- step is rounded for large x
        hi, lo = x + step, x - step
        return (potential.f_rwa(hi, xi) - potential.f_rwa(lo, xi)) / (hi - lo)

    return (4.0 * central(h / 2) - central(h)) / 3.0


def _require_rwa(sc):
    if sc.treatment is not Treatment.RWA:
        raise ValueError("fixed-point analysis applies to the RWA (autonomous) equations only")


def classify(x, sc: Scenario, tol=_DEGENERATE_TOL) -> FixedPoint:
    """Linearize at ``(x, 0)`` and classify from the Jacobian ``[[0, 1], [f' - w^2, -Gamma]]``.

    Raises
    ------
    DegenerateClassification
        If an eigenvalue is within ``tol`` of zero, or the discriminant
        ``(Gamma/2)^2 - (w^2 - f')`` is within ``tol`` of zero (spiral/node boundary).
    """
    _require_rwa(sc)
    p = sc.params
    fp = force_derivative(x, p.xi) if p.xi > 0 else 0.0
    k = p.omega_ho**2 - fp
    half = 0.5 * p.Gamma
    disc = half * half - k
    root = complex(disc) ** 0.5
    lam = (-half + root, -half - root)
    if min(abs(z) for z in lam) < tol:
        raise DegenerateClassification(f"eigenvalue within {tol} of zero at x = {x!r}")
    slopes = None
    if k < 0:
        kind = FixedPointKind.SADDLE
        slopes = (lam[0].real, lam[1].real)
    elif p.Gamma == 0:
        kind = FixedPointKind.CENTER
    elif abs(disc) < tol:
        raise DegenerateClassification(
            f"repeated eigenvalue at x = {x!r}: Gamma/2 = {half!r} equals sqrt(w^2 - f') = {math.sqrt(k)!r}"
        )
    elif disc < 0:
        kind = FixedPointKind.STABLE_SPIRAL
    else:
        kind = FixedPointKind.STABLE_NODE
    from .dynamics import acceleration

    residual = float(abs(acceleration(0.0, x, 0.0, sc)))
    return FixedPoint(
        x=float(x),
        kind=kind,
        eigenvalues=lam,
        stiffness=k,
        manifold_slopes=slopes,
        residual=residual,
        well=math.floor(x / math.pi),
    )


@dataclass(frozen=True)
class Manifolds:
    x: float
    unstable_slope: float
    stable_slope: float

    def unstable(self, x):
        return self.unstable_slope * (np.asarray(x) - self.x)

    def stable(self, x):
        return self.stable_slope * (np.asarray(x) - self.x)


def manifolds(fp: FixedPoint) -> Manifolds:
    """Linear stable/unstable manifolds ``x' = lambda_(-/+) (x - x_s)`` of a saddle."""
    if fp.kind is not FixedPointKind.SADDLE:
        raise ValueError(f"manifolds are defined for saddles only, got {fp.kind.value}")
    return Manifolds(fp.x, fp.manifold_slopes[0], fp.manifold_slopes[1])


def harmonic_cubic(xi, omega_ho):
    """Coefficients and roots of the Lorentzian fixed-point cubic.

    ``u^3 + u^2/(2 w^2) + u/xi^4 = (1 - 1/xi^2)/(2 xi^2 w^2)`` with ``u``
    measured from ``n pi + 1/xi``. Returns ``(coeffs, roots, positive_root)``;
    by Descartes' rule there is exactly one positive root when xi > 1.
    """
    w2 = omega_ho * omega_ho
    coeffs = np.array([1.0, 1.0 / (2.0 * w2), xi**-4, -(1.0 - xi**-2) / (2.0 * xi * xi * w2)])
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) <= 1e-12 * np.maximum(1.0, np.abs(roots))].real
    positive = real[real > 0]
    return coeffs, roots, (float(positive.max()) if positive.size else None)


def harmonic_fixed_point(sc: Scenario):
    """Exact trap fixed point ``x_n^ho`` right of ``x_E`` plus the cubic estimate.

    Returns ``(x_ho, info)``; ``x_ho`` is None when the bracket
    ``(x_E, x_n**)`` holds no sign change.
    """
    p = sc.params
    n = math.floor(p.x_E / math.pi)
    w2 = p.omega_ho**2

    def g(x):
        return potential.f_rwa(x, p.xi) - w2 * (x - p.x_E)

    lo, hi = p.x_E, potential.force_zero(p.xi, n)
    info = {"well": n, "bracket": (lo, hi)}
    if p.xi > 1:
        _, _, u_cubic = harmonic_cubic(p.xi, p.omega_ho)
        info["cubic_u"] = u_cubic
        info["cubic_x"] = n * math.pi + 1.0 / p.xi + u_cubic if u_cubic is not None else None
    if not (g(lo) > 0 > g(hi)):
        info["diagnostic"] = f"no sign change of f - w^2 (x - x_E) on [{lo!r}, {hi!r}]"
        return None, info
    seed = info.get("cubic_x")
    if seed is not None and lo < seed < hi:
        # tighten the bracket around the cubic estimate when it straddles the root
        a, b = max(lo, seed - 1e-2), min(hi, seed + 1e-2)
        if g(a) > 0 > g(b):
            lo, hi = a, b
    x = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    info["u"] = x - p.x_E
    return x, info


def fixed_points(sc: Scenario, wells=range(1, 5)) -> FixedPointList:
    """Fixed points of the RWA system.

    Radiation/friction: the saddle ``(n pi, 0)`` and the well bottom
    ``(x_n**, 0)`` for every ``n`` in ``wells`` (``x = 0`` is excluded, it is
    the fixed mirror). Harmonic trap: the trap fixed point ``x_n^ho``.
    """
    _require_rwa(sc)
    p = sc.params
    out = FixedPointList()
    if sc.kind is Kind.HARMONIC:
        x, info = harmonic_fixed_point(sc)
        if x is None:
            out.diagnostics.append(info["diagnostic"])
            return out
        fp = classify(x, sc)
        fp.extra.update(info)
        out.append(fp)
        return out
    if p.xi == 0:
        out.diagnostics.append("xi = 0: every point with v = 0 is a fixed point")
        return out
    for n in wells:
        if n > 0:
            out.append(classify(n * math.pi, sc))
        out.append(classify(potential.force_zero(p.xi, n), sc))
    return out


@dataclass(frozen=True)
class ConditionEntry:
    name: str
    lhs: float
    rhs: float
    factor: float = 10.0

    @property
    def margin(self):
        return math.inf if self.lhs == 0 else self.rhs / self.lhs

    @property
    def passed(self):
        return self.lhs < self.rhs / self.factor


@dataclass
class ValidityReport:
    """Observed relativistic smallness parameters plus the a-priori sufficient conditions.

    ``passed`` judges the observed maxima (both ``|qdot/c|`` and
    ``|qddot/(c w0)|`` below ``1/factor``); ``sufficient_passed`` additionally
    requires every a-priori bound to hold, which is stronger.
    """

    max_qdot_over_c: float
    max_qddot_over_c_omega0: float
    observed: list
    conditions: list
    rwa_regime: list
    factor: float
    tau_window: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.observed)

    @property
    def sufficient_passed(self):
        return all(c.passed for c in self.conditions)

    @property
    def rwa_regime_passed(self):
        return all(c.passed for c in self.rwa_regime)

    def entries(self):
        for group, items in (("observed", self.observed), ("sufficient", self.conditions), ("rwa", self.rwa_regime)):
            for c in items:
                yield group, c

    def summary(self):
        lines = [
            f"window tau in [{self.tau_window[0]:.6g}, {self.tau_window[1]:.6g}], '<<' means lhs < rhs/{self.factor:g}",
            f"max |qdot/c| = {self.max_qdot_over_c:.6g}",
            f"max |qddot/(c w0)| = {self.max_qddot_over_c_omega0:.6g}",
        ]
        for group, c in self.entries():
            flag = "pass" if c.passed else "FAIL"
            lines.append(f"[{group}] {c.name}: lhs={c.lhs:.6g} rhs={c.rhs:.6g} margin={c.margin:.3g} {flag}")
        lines.append(f"overall (observed): {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _f_max(xi):
    return potential.f_rwa(potential.force_maximizer(xi, 0), xi) if xi > 0 else 0.0


def validity_report(traj: Trajectory, sc: Scenario | None = None, tau_min=None, factor=10.0) -> ValidityReport:
    """Audit ``|qdot/c| << 1`` and ``|qddot/(c w0)| << 1`` along a trajectory.

    ``qdot/c = (2/Omega) x'`` and ``qddot/(c w0) = (4/Omega^2) x''``. The
    maxima are taken over ``tau >= tau_min``; a-priori bounds that involve the
    initial energy use the first sample of the full trajectory.
    """
    sc = sc or traj.scenario
    p = sc.params
    Om, G, xi, w = p.Omega, p.Gamma, p.xi, p.omega_ho
    win = traj.window(tau_min=tau_min)
    if win.tau.size == 0:
        raise ValueError("empty validity window")
    acc = win.acceleration()
    vmax = float(np.max(np.abs(win.v)))
    amax = float(np.max(np.abs(acc)))
    qdot = 2.0 / Om * vmax
    qddot = 4.0 / Om**2 * amax

    def entry(name, lhs, rhs):
        return ConditionEntry(name, float(lhs), float(rhs), factor)

    observed = [entry("|qdot/c| << 1", qdot, 1.0), entry("|qddot/(c w0)| << 1", qddot, 1.0)]
    fmax = _f_max(xi)
    conds = []
    rwa = []
    if sc.treatment is Treatment.RWA:
        E0 = float(energy_series(traj.x[0], traj.v[0], sc))
        vbound = math.sqrt(max(2.0 * E0 + math.pi, 0.0))
        conds.append(entry("2 sqrt(2 E0 + pi) << Omega", 2.0 * vbound, Om))
        if sc.kind is Kind.RADIATION:
            conds.append(entry("8 f_max << Omega^2", 8.0 * fmax, Om**2))
            if xi >= 5 and E0 <= 0:
                conds.append(entry("4 xi^2 << Omega^2", 4.0 * xi * xi, Om**2))
        elif sc.kind is Kind.FRICTION:
            conds.append(entry("4 f_max + 4 Gamma sqrt(2 E0 + pi) << Omega^2", 4.0 * fmax + 4.0 * G * vbound, Om**2))
            if xi >= 5 and E0 <= 0:
                conds.append(entry("4 Gamma sqrt(pi) + 2 xi^2 << Omega^2", 4.0 * G * math.sqrt(math.pi) + 2 * xi * xi, Om**2))
        else:
            dev = float(np.max(np.abs(win.x - p.x_E)))
            bound = 8.0 * fmax / Om**2 + 2.0 * G / Om * (2.0 / Om * vbound) + 4.0 * w * w / Om**2 * dev
            conds.append(entry("8 f_max/Omega^2 + (2 Gamma/Omega)|qdot/c| + (4 w^2/Omega^2)|x - x_E| << 1", bound, 1.0))
            for label, value in (("Gamma", G), ("sqrt(2 E0 + pi)", vbound), ("xi", xi), ("omega_ho", w)):
                conds.append(entry(f"{label} << Omega/2", value, Om / 2.0))
    else:
        if sc.kind is Kind.HARMONIC:
            root = math.sqrt(G**2 * Om**2 + (Om**2 - w**2) ** 2)
            conds.append(entry("|xi^2 - 1| / sqrt(G^2 Om^2 + (Om^2 - w^2)^2) << 1", abs(xi * xi - 1.0) / root, 1.0))
            dev = float(np.max(np.abs(win.x - p.x_E)))
            bound = 8.0 * fmax / Om**2 + 2.0 * G / Om * qdot + 4.0 * w * w / Om**2 * dev
            conds.append(entry("8 f_max/Omega^2 + (2 Gamma/Omega)|qdot/c| + (4 w^2/Omega^2)|x - x_E| << 1", bound, 1.0))
            for label, value in (("xi", xi), ("Gamma", G), ("omega_ho", w)):
                conds.append(entry(f"{label} << Omega", value, Om))
        else:
            conds.append(entry("2 v_max << Omega", 2.0 * vmax, Om))
            conds.append(entry("4 Gamma v_max + 8 f_max << Omega^2", 4.0 * G * vmax + 8.0 * fmax, Om**2))
            if xi >= 5:
                conds.append(entry("4 Gamma v_max + 4 xi^2 << Omega^2", 4.0 * G * vmax + 4.0 * xi * xi, Om**2))
    # RWA-regime conditions: the drive must be fast compared with the mirror motion
    if sc.kind is Kind.HARMONIC:
        root = math.sqrt(G**2 * Om**2 + (Om**2 - w**2) ** 2)
        rwa.append(entry("(xi^2 - 1)/2 << sqrt(G^2 Om^2 + (Om^2 - w^2)^2)", 0.5 * abs(xi * xi - 1.0), root))
    elif xi > 2.0 / math.pi:
        period = None
        if sc.treatment is Treatment.RWA and G == 0:
            est = period_estimate(traj)
            period = est.period if est is not None else None
        if period is not None:
            rwa.append(entry("2 pi/Omega << P", 2.0 * math.pi / Om, period))
        rwa.append(entry("(pi/2) sqrt(m+ xi) << Omega", 0.5 * math.pi * math.sqrt(potential.sawtooth_slope(xi) * xi), Om))
    return ValidityReport(
        max_qdot_over_c=qdot,
        max_qddot_over_c_omega0=qddot,
        observed=observed,
        conditions=conds,
        rwa_regime=rwa,
        factor=factor,
        tau_window=(float(win.tau[0]), float(win.tau[-1])),
    )


@dataclass(frozen=True)
class BoundedMotion:
    bounded: bool
    v0_max: float


def bounded_motion_check(E0, xi, n=0) -> BoundedMotion:
    """Radiation-only RWA: motion stays in one well iff ``E0 <= 0``.

    ``v0_max = sqrt(2 |V(x_n**)|)`` is the largest speed at the well bottom
    that keeps the motion bounded (never more than sqrt(pi)).
    """
    depth = abs(potential.v_rwa(potential.force_zero(xi, n), xi)) if xi > 0 else 0.0
    return BoundedMotion(bounded=E0 <= 0, v0_max=math.sqrt(2.0 * depth))


@dataclass(frozen=True)
class SteadyFit:
    """``u(tau) ~ offset + amplitude cos(frequency tau - psi)`` on a tail window."""

    offset: float
    amplitude: float
    psi: float
    frequency: float
    rms_residual: float
    window: tuple


def fit_steady_state(traj: Trajectory, tau_min, tau_max=None, center=0.0, n=200_001, frequency=None):
    """Fit a single harmonic to ``x - center`` sampled densely on ``[tau_min, tau_max]``.

    A linear least-squares fit at the drive frequency ``Omega`` seeds a
    nonlinear fit in which the frequency is free (pass ``frequency`` to pin a
    different seed). The phase is reported in ``[0, 2 pi)``.
    """
    tau_max = traj.tau[-1] if tau_max is None else tau_max
    om = traj.scenario.params.Omega if frequency is None else frequency
    t = np.linspace(tau_min, tau_max, n)
    u = np.asarray(traj(t)[0]) - center
    basis = np.column_stack([np.ones_like(t), np.cos(om * t), np.sin(om * t)])
    c, *_ = np.linalg.lstsq(basis, u, rcond=None)
    seed = [c[0], math.hypot(c[1], c[2]), om, math.atan2(c[2], c[1])]

    def model(tt, u0, a, w, ph):
        return u0 + a * np.cos(w * tt - ph)

    popt, _ = curve_fit(model, t, u, p0=seed)
    u0, a, w, ph = (float(z) for z in popt)
    if a < 0:
        a, ph = -a, ph + math.pi
    resid = float(np.sqrt(np.mean((model(t, u0, a, w, ph) - u) ** 2)))
    return SteadyFit(u0, a, ph % (2.0 * math.pi), w, resid, (float(tau_min), float(tau_max)))
