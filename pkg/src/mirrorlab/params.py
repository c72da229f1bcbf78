"""Laboratory quantities and their nondimensional counterparts.

All interfaces are SI except the field strength ``g0``, which keeps the
Gaussian-unit value in N^(1/2) and only enters through the rate ``Delta`` and
the laser-power bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

from .modes import xi_from_reflectivity

__all__ = [
    "C_LIGHT",
    "ModelApplicabilityWarning",
    "Cantilever",
    "Laser",
    "PhysicalParams",
    "NondimParams",
    "nondimensionalize",
    "physicalize",
    "force_prefactor",
    "cantilever_pipeline",
    "g0_bound",
    "PipelineResult",
]

C_LIGHT = 2.99792458e8  # m/s


class ModelApplicabilityWarning(UserWarning):
    """The inputs break an assumption of the thin-mirror model."""


def _positive(name, value, allow_zero=False):
    if value is None:
        return
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")


@dataclass(frozen=True)
class Cantilever:
    length: float  # m
    width: float  # m
    thickness: float  # m
    spring_constant: float  # N/m
    omega1: float  # rad/s, fundamental mechanical mode
    damping_rate: float  # 1/s
    reflectivity: float | None = None

    def __post_init__(self):
        for name in ("length", "width", "thickness", "spring_constant", "omega1"):
            _positive(name, getattr(self, name))
        _positive("damping_rate", self.damping_rate, allow_zero=True)

    @property
    def area(self) -> float:
        return self.length * self.width

    @property
    def effective_mass(self) -> float:
        return self.spring_constant / self.omega1**2


@dataclass(frozen=True)
class Laser:
    wavelength: float  # m
    max_power: float | None = None  # W

    def __post_init__(self):
        _positive("wavelength", self.wavelength)
        _positive("max_power", self.max_power, allow_zero=True)

    @property
    def wave_number(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def omega0(self) -> float:
        return C_LIGHT * self.wave_number


@dataclass(frozen=True)
class PhysicalParams:
    """Mirror + field parameters in laboratory units (per unit mirror area)."""

    chi0: float  # m
    M0: float  # kg/m^2
    k_N0: float  # 1/m
    g0: float | None = None  # N^(1/2)
    gamma: float = 0.0  # N s/m^3
    k_ho: float = 0.0  # N/m^3
    q_E: float = 0.0  # m
    cantilever: Cantilever | None = None
    laser: Laser | None = None

    def __post_init__(self):
        _positive("chi0", self.chi0, allow_zero=True)
        _positive("M0", self.M0)
        _positive("k_N0", self.k_N0)
        _positive("g0", self.g0)
        _positive("gamma", self.gamma, allow_zero=True)
        _positive("k_ho", self.k_ho, allow_zero=True)
        _positive("q_E", self.q_E, allow_zero=True)

    @property
    def omega0(self) -> float:
        return C_LIGHT * self.k_N0


@dataclass(frozen=True)
class NondimParams:
    """Dimensionless control set; ``Delta`` and ``omega0`` are kept for unit conversion."""

    xi: float
    Omega: float
    Gamma: float = 0.0
    omega_ho: float = 0.0
    x_E: float = 0.0
    Delta: float | None = None  # 1/s
    omega0: float | None = None  # rad/s

    def __post_init__(self):
        _positive("xi", self.xi, allow_zero=True)
        _positive("Omega", self.Omega)
        _positive("Gamma", self.Gamma, allow_zero=True)
        _positive("omega_ho", self.omega_ho, allow_zero=True)
        if not math.isfinite(self.x_E):
            raise ValueError("x_E must be finite")

    def with_(self, **changes) -> "NondimParams":
        return replace(self, **changes)


def nondimensionalize(p: PhysicalParams) -> NondimParams:
    if p.g0 is None:
        raise ValueError("g0 is required to fix the time scale Delta")
    omega0 = p.omega0
    delta = math.sqrt(p.g0**2 * omega0**3 / (math.pi**2 * p.M0 * C_LIGHT**3))
    return NondimParams(
        xi=4.0 * math.pi * p.chi0 * p.k_N0,
        Omega=2.0 * omega0 / delta,
        Gamma=p.gamma / (delta * p.M0),
        omega_ho=math.sqrt(p.k_ho / (delta**2 * p.M0)),
        x_E=p.k_N0 * p.q_E,
        Delta=delta,
        omega0=omega0,
    )


def physicalize(nd: NondimParams, M0: float) -> PhysicalParams:
    """Inverse of :func:`nondimensionalize` given the areal mass ``M0``."""
    if nd.Delta is None or nd.omega0 is None:
        raise ValueError("Delta and omega0 are needed to restore units")
    k = nd.omega0 / C_LIGHT
    g0 = nd.Delta * math.pi * math.sqrt(M0 * C_LIGHT**3 / nd.omega0**3)
    return PhysicalParams(
        chi0=nd.xi / (4.0 * math.pi * k),
        M0=M0,
        k_N0=k,
        g0=g0,
        gamma=nd.Gamma * nd.Delta * M0,
        k_ho=nd.omega_ho**2 * nd.Delta**2 * M0,
        q_E=nd.x_E / k,
    )


def force_prefactor(p: PhysicalParams) -> float:
    """``(g0 omega0 / (pi c))^2``, the pressure scale multiplying the nondimensional force."""
    return (p.g0 * p.omega0 / (math.pi * C_LIGHT)) ** 2


def g0_bound(laser: Laser, cantilever: Cantilever) -> float:
    """Largest ``g0`` whose incident laser power stays below ``laser.max_power``."""
    if laser.max_power is None:
        raise ValueError("laser.max_power is required")
    return (2.0 * math.pi / laser.omega0) * math.sqrt(C_LIGHT * laser.max_power / cantilever.area)


@dataclass
class PipelineResult:
    params: PhysicalParams
    effective_mass: float
    thinning: float
    steps: list = field(default_factory=list)  # (name, value, unit)

    def report(self) -> str:
        width = max(len(s[0]) for s in self.steps)
        lines = [f"{name:<{width}}  {value:.6g} {unit}".rstrip() for name, value, unit in self.steps]
        return "\n".join(lines)


def cantilever_pipeline(
    cantilever: Cantilever,
    laser: Laser,
    *,
    g0: float | None = None,
    chi0: float | None = None,
    q_E: float = 0.0,
    thinning: float = 0.01,
) -> PipelineResult:
    """Turn cantilever and laser data into :class:`PhysicalParams`.

    The areal mass is that of the cantilever thinned by ``thinning`` (default
    1/100) so the thin-mirror condition can hold. ``chi0`` defaults to the
    value implied by the cantilever reflectivity, and ``g0`` to the laser-power
    bound when the laser carries ``max_power``.
    """
    if not 0 < thinning <= 1:
        raise ValueError("thinning must lie in (0, 1]")
    effective_thickness = thinning * cantilever.thickness
    if effective_thickness > laser.wavelength / 10:
        warnings.warn(
            f"mirror thickness {effective_thickness:.3g} m exceeds lambda/10 = "
            f"{laser.wavelength / 10:.3g} m; the delta-mirror model does not apply",
            ModelApplicabilityWarning,
            stacklevel=2,
        )
    M = cantilever.effective_mass
    M0 = thinning * M / cantilever.area
    k = laser.wave_number
    omega0 = laser.omega0
    steps = [
        ("effective mass M", M, "kg"),
        ("thinning factor", thinning, ""),
        ("areal mass M0", M0, "kg/m^2"),
        ("wave number k_N0", k, "1/m"),
        ("field frequency omega0", omega0, "rad/s"),
    ]
    if chi0 is None and cantilever.reflectivity is not None:
        xi = xi_from_reflectivity(cantilever.reflectivity)
        chi0 = xi / (4.0 * math.pi * k)
        steps.append(("opacity xi (from R)", xi, ""))
    if chi0 is None:
        raise ValueError("chi0 or cantilever.reflectivity is required")
    steps.append(("coupling length chi0", chi0, "m"))
    if laser.max_power is not None:
        bound = g0_bound(laser, cantilever)
        steps.append(("g0 bound", bound, "N^1/2"))
        if g0 is None:
            g0 = bound
    if g0 is not None:
        steps.append(("field strength g0", g0, "N^1/2"))
    params = PhysicalParams(
        chi0=chi0,
        M0=M0,
        k_N0=k,
        g0=g0,
        gamma=cantilever.damping_rate * M0,
        k_ho=cantilever.omega1**2 * M0,
        q_E=q_E,
        cantilever=cantilever,
        laser=laser,
    )
    if g0 is not None:
        nd = nondimensionalize(params)
        steps += [
            ("rate Delta", nd.Delta, "1/s"),
            ("Delta / g0", nd.Delta / g0, "1/(s N^1/2)"),
            ("Omega", nd.Omega, ""),
            ("Omega * g0", nd.Omega * g0, "N^1/2"),
            ("Gamma", nd.Gamma, ""),
            ("omega_ho", nd.omega_ho, ""),
            ("Gamma / Omega", nd.Gamma / nd.Omega, ""),
            ("omega_ho / Omega", nd.omega_ho / nd.Omega, ""),
            ("Gamma / omega_ho", nd.Gamma / nd.omega_ho, ""),
        ]
    return PipelineResult(params=params, effective_mass=M, thinning=thinning, steps=steps)


REFERENCE_CANTILEVER = Cantilever(
    length=223e-6,
    width=22e-6,
    thickness=512e-9,
    spring_constant=0.01,
    omega1=2 * math.pi * 8.7e3,
    damping_rate=30.0,
    reflectivity=0.91,
)
REFERENCE_LASER = Laser(wavelength=633e-9, max_power=1.0)
