"""Closed-form approximate solutions built on the sawtooth potential.

In the sawtooth approximation a well ``[n pi, (n+1) pi]`` has an impenetrable
wall at ``n pi + 1/xi``, a flat floor on ``[n pi + 1/xi, n pi + 2/xi]`` and a
constant restoring force ``-m+`` to the right of ``n pi + 2/xi``. Orbits are
assembled ("pasted") from the exact solutions on each piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import potential

__all__ = [
    "Segment",
    "PastedOrbit",
    "EnergyOverflowError",
    "RunawayPastingError",
    "rwa_pasted",
    "pasted_period",
    "ic_match",
    "friction_pasted",
    "SteadyState",
    "harmonic_steady_state",
]

PARABOLIC_FALL = "ParabolicFall"
UNIFORM_LEFT = "UniformLeft"
UNIFORM_RIGHT = "UniformRight"
EXP_RELAX = "ExpRelax"
EXP_FALL = "ExpFall"
BOUNCE = "Bounce"


class EnergyOverflowError(ValueError):
    """The requested orbit would leave its potential well."""


class RunawayPastingError(RuntimeError):
    """Too many pasted segments; the event sequence did not terminate."""


def _phi1(s, gamma):
    # (1 - exp(-gamma s)) / gamma, tends to s as gamma -> 0
    if gamma == 0:
        return s
    return -np.expm1(-gamma * s) / gamma


def _phi2(s, gamma):
    # (gamma s - 1 + exp(-gamma s)) / gamma^2, tends to s^2/2 as gamma -> 0
    s = np.asarray(s, dtype=float)
    z = gamma * s
    series = s * s * (0.5 - z / 6.0 + z * z / 24.0 - z**3 / 120.0)
    if gamma == 0:
        return series
    with np.errstate(invalid="ignore", divide="ignore"):
        closed = (z + np.expm1(-z)) / (gamma * gamma)
    return np.where(np.abs(z) < 1e-3, series, closed)


@dataclass(frozen=True)
class Segment:
    """One analytic piece, valid on ``[t0, t1]`` with ``s = tau - t0``.

    ``accel`` is the constant force (``-m+`` on the slope, 0 elsewhere) and
    ``gamma`` the friction coefficient; together they cover all piece types.
    """

    kind: str
    t0: float
    t1: float
    x0: float
    v0: float
    accel: float = 0.0
    gamma: float = 0.0

    @property
    def duration(self):
        return self.t1 - self.t0

    def state(self, tau):
        s = np.asarray(tau, dtype=float) - self.t0
        g = self.gamma
        x = self.x0 + self.v0 * _phi1(s, g) + self.accel * _phi2(s, g)
        v = self.v0 * np.exp(-g * s) + self.accel * _phi1(s, g)
        return x, v

    @property
    def end_state(self):
        x, v = self.state(self.t1)
        return float(x), float(v)


@dataclass
class PastedOrbit:
    segments: list
    xi: float
    well: int
    period: float | None = None
    settled: bool = False
    notes: list = field(default_factory=list)

    @property
    def tau_start(self):
        return self.segments[0].t0

    @property
    def tau_end(self):
        return self.segments[-1].t1

    def evaluate(self, tau):
        """Return ``(x, v)`` at the requested times (right-continuous at joints)."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        segs = [s for s in self.segments if s.t1 > s.t0]
        starts = np.array([s.t0 for s in segs])
        idx = np.clip(np.searchsorted(starts, tau, side="right") - 1, 0, len(segs) - 1)
        x = np.empty_like(tau)
        v = np.empty_like(tau)
        for i in np.unique(idx):
            m = idx == i
            x[m], v[m] = segs[i].state(tau[m])
        return x, v

    def sample(self, n=2001, tau=None):
        if tau is None:
            tau = np.linspace(self.tau_start, self.tau_end, n)
        x, v = self.evaluate(tau)
        return np.asarray(tau, dtype=float), x, v


def pasted_period(xi, v0):
    """``P = 2 v0 / m+ + 2 / (xi v0)``."""
    m = potential.sawtooth_slope(xi)
    return 2.0 * v0 / m + 2.0 / (xi * v0)


def _well_depth(xi, n):
    return abs(potential.v_rwa(potential.force_zero(xi, n), xi))


def rwa_pasted(xi, n, v0, tau0=0.0, tau_end=None, start="bottom"):
    """Pasted conservative orbit in well ``n``.

    Parameters
    ----------
    xi : float
        Opacity (the approximation is meant for xi >= 50).
    n : int
        Well index.
    v0 : float
        Speed on the flat floor, ``0 < v0 <= sqrt(2 |V(x_n**)|)``.
    tau0, tau_end : float
        Time span; by default exactly one period.
    start : {"bottom", "wall"}
        ``"bottom"`` starts at ``n pi + 2/xi`` moving right; ``"wall"`` starts
        at ``n pi + 1/xi`` moving right, just after a bounce.
    """
    vmax = math.sqrt(2.0 * _well_depth(xi, n))
    if not 0 < v0 <= vmax:
        raise EnergyOverflowError(f"v0 must lie in (0, {vmax:.6g}], got {v0!r}")
    if start not in ("bottom", "wall"):
        raise ValueError("start must be 'bottom' or 'wall'")
    m = potential.sawtooth_slope(xi)
    period = pasted_period(xi, v0)
    if tau_end is None:
        tau_end = tau0 + period
    wall = n * math.pi + 1.0 / xi
    bottom = n * math.pi + 2.0 / xi
    t_par = 2.0 * v0 / m
    t_flat = 1.0 / (xi * v0)
    cycle = [
        (PARABOLIC_FALL, t_par, bottom, v0, -m),
        (UNIFORM_LEFT, t_flat, bottom, -v0, 0.0),
        (BOUNCE, 0.0, wall, v0, 0.0),  # bounces store the outgoing velocity
        (UNIFORM_RIGHT, t_flat, wall, v0, 0.0),
    ]
    if start == "wall":
        cycle = cycle[3:] + cycle[:3]
    segs = []
    t = tau0
    i = 0
    while t < tau_end:
        kind, dur, x0, vv, a = cycle[i % 4]
        segs.append(Segment(kind, t, t + dur, x0, vv, a))
        t += dur
        i += 1
    return PastedOrbit(segs, xi, n, period=period)


def ic_match(E, xi):
    """Floor speed of the sawtooth orbit with energy ``E``: ``sqrt(2 (E - V(2/xi)))``."""
    floor = potential.v_rwa(2.0 / xi, xi)
    if E < floor:
        raise ValueError(f"energy {E!r} lies below the sawtooth floor {floor!r}")
    return math.sqrt(2.0 * (E - floor))


def friction_pasted(xi, gamma, ic, tau_end, tau0=0.0, max_segments=1_000_000, v_settle=1e-10):
    """Pasted damped orbit: free fall with friction on the slope, pure relaxation on the floor.

    ``ic`` is ``(x, v)`` with x on the floor or the slope of one well. The wall
    at ``n pi + 1/xi`` reflects elastically. Once the speed drops below
    ``v_settle`` (or the mirror can no longer reach the next joint) the last
    relaxation segment is extended to ``tau_end`` and the orbit is flagged
    ``settled``.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    x, v = map(float, ic)
    n = math.floor(x / math.pi)
    wall = n * math.pi + 1.0 / xi
    bottom = n * math.pi + 2.0 / xi
    top = (n + 1) * math.pi
    m = potential.sawtooth_slope(xi)
    if x < wall - 1e-12:
        raise ValueError("initial position lies left of the sawtooth wall")
    floor = potential.v_rwa(2.0 / xi, xi)
    # wall and floor share the sawtooth's floor value; avoid round-off in x - n pi at the wall
    v_saw = floor + m * max(x - bottom, 0.0)
    if 0.5 * v * v + v_saw >= 0:
        raise EnergyOverflowError("initial energy must be negative (bounded motion)")
    segs = []
    t = tau0
    settled = False
    while t < tau_end:
        if len(segs) >= max_segments:
            raise RunawayPastingError(f"more than {max_segments} pasted segments")
        if x >= bottom and not (x == bottom and v < 0):
            # sloped region: decelerate, turn around, come back to the floor edge
            seg = Segment(EXP_FALL, t, np.inf, x, v, -m, gamma)
            s_peak = math.log1p(gamma * max(v, 0.0) / m) / gamma if gamma > 0 else max(v, 0.0) / m
            x_peak = float(seg.state(t + s_peak)[0])
            if x_peak >= top:
                raise EnergyOverflowError("orbit climbs over the well edge")
            hi = max(2.0 * s_peak, 1e-6)
            while float(seg.state(t + hi)[0]) > bottom:
                hi *= 2.0
            lo = s_peak if float(seg.state(t + s_peak)[0]) > bottom else 0.0
            if lo == 0.0 and x <= bottom:
                s_hit = 0.0
            else:
                s_hit = brentq(lambda s: float(seg.state(t + s)[0]) - bottom, lo, hi, xtol=1e-14)
            if t + s_hit >= tau_end:
                segs.append(Segment(EXP_FALL, t, tau_end, x, v, -m, gamma))
                break
            segs.append(Segment(EXP_FALL, t, t + s_hit, x, v, -m, gamma))
            t += s_hit
            x, v = bottom, float(segs[-1].end_state[1])
            continue
        # flat region between the wall and the floor edge
        if abs(v) < v_settle:
            settled = True
            segs.append(Segment(EXP_RELAX, t, tau_end, x, v, 0.0, gamma))
            break
        target = bottom if v > 0 else wall
        dist = target - x
        reach = gamma * dist / v  # fraction of the available glide distance needed
        if gamma == 0:
            s_hit = dist / v
        elif reach < 1.0:
            s_hit = -math.log1p(-reach) / gamma
        else:
            settled = True
            segs.append(Segment(EXP_RELAX, t, tau_end, x, v, 0.0, gamma))
            break
        end = min(t + s_hit, tau_end)
        segs.append(Segment(EXP_RELAX, t, end, x, v, 0.0, gamma))
        if end >= tau_end:
            break
        t = end
        v = float(segs[-1].end_state[1])
        x = target
        if target == wall:
            segs.append(Segment(BOUNCE, t, t, wall, -v))
            v = -v
            if 0.5 * v * v < 1e-12:
                settled = True
    orbit = PastedOrbit(segs, xi, n, settled=settled)
    return orbit


@dataclass(frozen=True)
class SteadyState:
    """Driven steady oscillation ``u(tau) = offset + amplitude cos(Omega tau - theta)``."""

    offset: float
    amplitude: float
    theta: float
    Omega: float

    def __call__(self, tau):
        return self.offset + self.amplitude * np.cos(self.Omega * np.asarray(tau) - self.theta)


def harmonic_steady_state(xi, Omega, Gamma, omega_ho):
    """Order-of-magnitude steady state of the trapped, driven mirror about ``x_E``.

    The estimate treats the force near the resonance as a constant
    ``(xi^2 - 1)/2`` times the drive bracket; it overestimates the amplitude
    (by about 15x at xi = 10, Omega = 500, omega_ho = 10).
    """
    if omega_ho <= 0:
        raise ValueError("omega_ho must be > 0")
    root = math.sqrt(Gamma**2 * Omega**2 + (Omega**2 - omega_ho**2) ** 2)
    if root == 0:
        raise ValueError("undamped exact resonance: amplitude diverges")
    half = 0.5 * (xi * xi - 1.0)
    theta = math.acos((omega_ho**2 - Omega**2) / root)
    return SteadyState(offset=half / omega_ho**2, amplitude=half / root, theta=theta, Omega=Omega)
