"""Equations of motion for the driven mirror and their numerical integration.

Three physical scenarios (radiation pressure only, linear friction, harmonic
trap) each come in a full driven form and a rotating-wave (RWA) form::

    x'' = [1 + cos(Omega tau + 2x - 2 delta(x))] f(x) - Gamma x' - w^2 (x - x_E)   (full)
    x'' = f(x) - Gamma x' - w^2 (x - x_E)                                          (RWA)

The driving phase only ever appears as ``2(x - delta)`` inside a cosine, so it
is evaluated from the mode's defining sine/cosine pair without choosing a
branch for ``delta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import potential
from .params import NondimParams

__all__ = [
    "Kind",
    "Treatment",
    "Scenario",
    "State",
    "Trajectory",
    "Tolerances",
    "PeriodEstimate",
    "HalfLineViolation",
    "StiffnessError",
    "UnsupportedTreatment",
    "drive_phase_terms",
    "trap_center",
    "rhs",
    "acceleration",
    "integrate",
    "energy",
    "period_estimate",
]


class Kind(enum.Enum):
    RADIATION = "radiation"
    FRICTION = "friction"
    HARMONIC = "harmonic"


class Treatment(enum.Enum):
    FULL = "full"
    RWA = "rwa"


class NumericalDiagnostic(RuntimeError):
    """Base class for integration failures reported by the CLI with exit code 3."""


class HalfLineViolation(NumericalDiagnostic):
    """The mirror reached x <= 0, outside the model's half-line."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StiffnessError(NumericalDiagnostic):
    """The adaptive step size collapsed."""


class UnsupportedTreatment(ValueError):
    pass


TRAP_CENTERS = ("polished", "seed")


def trap_center(xi, n, mode="polished"):
    """Resonance position ``x_{2n}`` used as the trap centre.

    ``"polished"`` is the exact force maximizer; ``"seed"`` is the
    one-Newton-step value ``n pi + 1/xi``, which is what reproduces the
    published harmonic-trap numbers (the two differ by ~1.3e-3 at xi = 10,
    well inside the resonance width 1/xi^2).
    """
    if mode == "polished":
        return potential.force_maximizer(xi, n)
    if mode == "seed":
        return n * math.pi + 1.0 / xi
    raise ValueError(f"trap_center must be one of {TRAP_CENTERS}, got {mode!r}")


_center_position = trap_center  # the Scenario field of the same name shadows it


@dataclass(frozen=True)
class Scenario:
    kind: Kind
    treatment: Treatment
    params: NondimParams
    x_E_tol: float = 1e-8
    trap_center: str = "polished"

    def __post_init__(self):
        kind = Kind(self.kind)
        treatment = Treatment(self.treatment)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "treatment", treatment)
        p = self.params
        if kind is Kind.RADIATION and p.Gamma != 0:
            raise ValueError("radiation-only scenario must have Gamma = 0")
        if kind is not Kind.HARMONIC and p.omega_ho != 0:
            raise ValueError("omega_ho is only meaningful for the harmonic trap")
        if kind is Kind.HARMONIC:
            if p.omega_ho <= 0:
                raise ValueError("harmonic trap requires omega_ho > 0")
            if p.xi <= 0:
                raise ValueError("harmonic trap needs xi > 0 to locate a resonance")
            n = math.floor(p.x_E / math.pi)
            candidates = [_center_position(p.xi, m, self.trap_center) for m in (n - 1, n, n + 1) if m >= 0]
            best = min(candidates, key=lambda c: abs(c - p.x_E))
            if abs(best - p.x_E) > self.x_E_tol:
                raise ValueError(
                    f"x_E = {p.x_E!r} is not a force maximizer (nearest {self.trap_center} "
                    f"centre is {best!r}); the trap must sit on a cavity resonance"
                )

    @property
    def xi(self):
        return self.params.xi

    @property
    def is_full(self):
        return self.treatment is Treatment.FULL

    @classmethod
    def build(
        cls, kind, treatment, xi, Omega=1.0, Gamma=0.0, omega_ho=0.0, well=None, x_E=None, trap_center="polished"
    ):
        """Convenience constructor; for the trap, ``well`` (default 4) picks ``x_E = x_{2n}``."""
        if Kind(kind) is Kind.HARMONIC and x_E is None:
            x_E = _center_position(xi, 4 if well is None else well, trap_center)
        return cls(
            Kind(kind),
            Treatment(treatment),
            NondimParams(xi=xi, Omega=Omega, Gamma=Gamma, omega_ho=omega_ho, x_E=x_E or 0.0),
            trap_center=trap_center,
        )


@dataclass(frozen=True)
class State:
    tau: float
    x: float
    v: float

    def __post_init__(self):
        if not all(math.isfinite(z) for z in (self.tau, self.x, self.v)):
            raise ValueError("state must be finite")


@dataclass(frozen=True)
class Tolerances:
    rel: float = 1e-9
    abs: float = 1e-12

    def __post_init__(self):
        if not 1e-12 <= self.rel <= 1e-6:
            raise ValueError(f"relative tolerance must lie in [1e-12, 1e-6], got {self.rel}")
        if self.abs <= 0:
            raise ValueError("absolute tolerance must be > 0")


def drive_phase_terms(x, xi):
    """Return ``(cos 2(x - delta), sin 2(x - delta))`` without a branch choice for delta."""
    s = np.sin(x)
    c = np.cos(x)
    a = 1.0 - xi * s * c
    b = xi * s * s
    d = 1.0 + xi * xi * s * s - xi * np.sin(2.0 * x)
    return (a * a - b * b) / d, -2.0 * a * b / d


def acceleration(tau, x, v, sc: Scenario):
    """Vectorized right-hand side ``x''(tau, x, v)``."""
    p = sc.params
    xi = p.xi
    s = np.sin(x)
    d = 1.0 + xi * xi * s * s - xi * np.sin(2.0 * x)
    f = 0.5 * (1.0 - d) / d
    if sc.is_full:
        cc, ss = drive_phase_terms(x, xi)
        wt = p.Omega * np.asarray(tau)
        f = f * (1.0 + np.cos(wt) * cc - np.sin(wt) * ss)
    return f - p.Gamma * v - p.omega_ho**2 * (x - p.x_E)


def rhs(s: State, sc: Scenario) -> float:
    return float(acceleration(s.tau, s.x, s.v, sc))


def _make_fun(sc: Scenario):
    p = sc.params
    xi, Om, G, w2, xE = p.xi, p.Omega, p.Gamma, p.omega_ho**2, p.x_E
    xi2 = xi * xi
    sin, cos = math.sin, math.cos
    full = sc.is_full

    def fun(tau, y):
        x, v = y
        s = sin(x)
        c = cos(x)
        d = 1.0 + xi2 * s * s - 2.0 * xi * s * c
        f = 0.5 * (1.0 - d) / d
        if full:
            a = 1.0 - xi * s * c
            b = xi * s * s
            wt = Om * tau
            f *= 1.0 + (cos(wt) * (a * a - b * b) + sin(wt) * 2.0 * a * b) / d
        return [v, f - G * v - w2 * (x - xE)]

    return fun


@dataclass
class Trajectory:
    """Accepted integrator steps plus the dense-output interpolant."""

    tau: np.ndarray
    x: np.ndarray
    v: np.ndarray
    scenario: Scenario
    sol: object = None
    nfev: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.tau.size

    def acceleration(self):
        return acceleration(self.tau, self.x, self.v, self.scenario)

    def energy(self):
        return energy_series(self.x, self.v, self.scenario)

    def window(self, tau_min=None, tau_max=None):
        mask = np.ones(self.tau.size, dtype=bool)
        if tau_min is not None:
            mask &= self.tau >= tau_min
        if tau_max is not None:
            mask &= self.tau <= tau_max
        return Trajectory(self.tau[mask], self.x[mask], self.v[mask], self.scenario, self.sol, self.nfev, self.meta)

    def __call__(self, tau):
        """Dense-output evaluation; returns ``(x, v)``."""
        if self.sol is None:
            raise ValueError("trajectory has no dense output")
        y = self.sol(tau)
        return y[0], y[1]

    def resample(self, tau):
        tau = np.asarray(tau, dtype=float)
        x, v = self(tau)
        return Trajectory(tau, np.asarray(x), np.asarray(v), self.scenario, self.sol, self.nfev, self.meta)


def integrate(sc: Scenario, ic: State, tau_end: float, tol: Tolerances | None = None, max_step=None) -> Trajectory:
    """Integrate from ``ic`` to ``tau_end`` with an embedded 5(4) Runge-Kutta pair.

    For the full driven equations the step is capped at ``2 pi / (20 Omega)``
    so that every drive period is sampled at least twenty times.

    Raises
    ------
    HalfLineViolation
        If x reaches 0; the partial trajectory is attached.
    StiffnessError
        If the step size underflows.
    """
    tol = tol or Tolerances()
    if not tau_end > ic.tau:
        raise ValueError("tau_end must exceed the initial time")
    if ic.x <= 0:
        raise HalfLineViolation(f"initial position x = {ic.x} is not on the half-line x > 0")
    cap = np.inf if max_step is None else max_step
    if sc.is_full:
        cap = min(cap, 2.0 * math.pi / (20.0 * sc.params.Omega))

    def wall(tau, y):
        return y[0]

    wall.terminal = True
    wall.direction = -1

    res = solve_ivp(
        _make_fun(sc),
        (ic.tau, tau_end),
        [ic.x, ic.v],
        method="RK45",
        rtol=tol.rel,
        atol=tol.abs,
        max_step=cap,
        dense_output=True,
        events=wall,
    )
    traj = Trajectory(res.t, res.y[0], res.y[1], sc, res.sol, res.nfev, {"rtol": tol.rel, "atol": tol.abs})
    if res.status == -1:
        raise StiffnessError(f"integration failed at tau = {res.t[-1]:.6g}: {res.message}")
    if res.status == 1:
        raise HalfLineViolation(f"mirror reached x = 0 at tau = {res.t_events[0][0]:.10g}", traj)
    return traj


def energy_series(x, v, sc: Scenario):
    if sc.is_full:
        raise UnsupportedTreatment("energy is only defined for the RWA equations")
    p = sc.params
    e = 0.5 * np.asarray(v) ** 2 + potential.v_rwa(x, p.xi)
    if sc.kind is Kind.HARMONIC:
        e = e + 0.5 * p.omega_ho**2 * (np.asarray(x) - p.x_E) ** 2
    return e


def energy(s: State, sc: Scenario) -> float:
    """``v^2/2 + V(x)`` (plus the trap energy); RWA treatments only."""
    return float(energy_series(s.x, s.v, sc))


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    std: float
    crossings: np.ndarray
    level: float


def period_estimate(traj: Trajectory, level=None, tau_min=None, min_crossings=4):
    """Mean spacing of upward crossings of ``level`` (default: the well bottom ``x_n**``).

    For the harmonic trap the default level is the mean position over the
    window. Crossing times are refined on the dense output to 1e-10 in tau.
    Returns None when fewer than ``min_crossings`` crossings (three
    recurrences) are found, e.g. for an orbit that escapes its well.
    """
    t = traj.window(tau_min=tau_min)
    if t.tau.size < 2:
        return None
    if level is None:
        if traj.scenario.kind is Kind.HARMONIC:
            level = float(np.mean(t.x))
        else:
            n = math.floor(t.x[0] / math.pi)
            level = potential.force_zero(traj.scenario.xi, n)
    g = t.x - level
    idx = np.nonzero((g[:-1] < 0) & (g[1:] >= 0))[0]
    times = []
    for i in idx:
        a, b = t.tau[i], t.tau[i + 1]
        if traj.sol is None:
            times.append(a - g[i] * (b - a) / (g[i + 1] - g[i]))
        else:
            times.append(brentq(lambda s: traj.sol(s)[0] - level, a, b, xtol=1e-10))
    times = np.asarray(times)
    if times.size < min_crossings:
        return None
    gaps = np.diff(times)
    return PeriodEstimate(float(gaps.mean()), float(gaps.std()), times, float(level))
