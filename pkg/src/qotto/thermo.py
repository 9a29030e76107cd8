"""Closed-form thermodynamics of the quasistatic oscillator Otto cycle.

The working body is a harmonic oscillator whose frequency is switched
between omega_c and omega_h; it equilibrates alternately with a cold bath
(omega_c, T_c) and a hot bath (omega_h, T_h).  Natural units hbar = k_B = 1
throughout, so frequencies and temperatures share the same energy unit.

With nu_i = nbar(omega_i/T_i) + 1/2, the cycle energies are

    R1 = -(omega_h - omega_c) nu_c          work on the compression stroke
    R2 =  (omega_h - omega_c) nu_h          work on the expansion stroke
    Q1 =  omega_h (nu_h - nu_c)             heat exchanged with the hot bath
    Q2 = -omega_c (nu_h - nu_c)             heat exchanged with the cold bath

and the cycle direction is set by lambda = omega_c/T_c - omega_h/T_h:
positive lambda runs a heat engine with efficiency 1 - omega_c/omega_h,
negative lambda a refrigerator with COP omega_c/(omega_h - omega_c).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "Reservoir",
    "QuasistaticCycle",
    "CycleMode",
    "CycleReport",
    "thermal_occupation",
    "nu_kappa",
    "stage_entropy",
    "quasistatic_report",
    "clausius_residuals",
    "cooling_limit",
]


@dataclass(frozen=True)
class Reservoir:
    """A thermal bath: oscillator frequency and temperature (hbar = k_B = 1)."""

    omega: float
    temperature: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


@dataclass(frozen=True)
class QuasistaticCycle:
    """Cold/hot reservoir pair with omega_h > omega_c; temperatures are free."""

    cold: Reservoir
    hot: Reservoir

    def __post_init__(self):
        if not self.hot.omega > self.cold.omega:
            raise ValueError(
                f"cycle requires hot.omega > cold.omega, got "
                f"{self.hot.omega} <= {self.cold.omega}"
            )


class CycleMode(enum.Enum):
    HEAT_ENGINE = "heat_engine"
    REFRIGERATOR = "refrigerator"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class CycleReport:
    """All quasistatic cycle quantities derived from a reservoir pair.

    eta is present only in heat-engine mode, zeta only in refrigerator
    mode.  C_BC and C_DA are the Clausius residuals of the two isochores
    (entropy change minus absorbed heat over bath temperature); both are
    nonnegative and vanish together exactly at lam = 0.
    """

    nu_c: float
    nu_h: float
    kappa_c: float
    kappa_h: float
    R1: float
    R2: float
    R: float
    Q1: float
    Q2: float
    lam: float
    mode: CycleMode
    eta: float | None
    zeta: float | None
    eta_carnot: float
    S_AB: float
    S_CD: float
    C_BC: float
    C_DA: float


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation nbar = 1 / (exp(omega/T) - 1)."""
    return 1.0 / math.expm1(omega / temperature)


def nu_kappa(omega: float, temperature: float) -> tuple[float, float]:
    """Return (nu, kappa) with nu = nbar + 1/2 and kappa = tanh(omega/2T).

    The identity kappa = 1/(2 nu) holds to rounding.
    """
    nu = thermal_occupation(omega, temperature) + 0.5
    kappa = math.tanh(0.5 * omega / temperature)
    return nu, kappa


def stage_entropy(omega: float, temperature: float) -> float:
    """Thermal-state entropy -ln[2 sinh(omega/2T)] + (omega/2T) coth(omega/2T).

    Evaluated in the form 2x u/(1-u) - ln(1-u) with x = omega/2T and
    u = exp(-2x), which stays accurate both deep in the ground state
    (result -> 0+) and in the classical limit (result ~ 1 - ln(2x)).
    """
    x = 0.5 * omega / temperature
    u = math.exp(-2.0 * x)
    if u == 1.0:  # x below rounding; classical divergence
        return 1.0 - math.log(2.0 * x)
    return 2.0 * x * u / (1.0 - u) - math.log1p(-u)


def quasistatic_report(cycle: QuasistaticCycle) -> CycleReport:
    """Evaluate work, heats, direction, efficiencies and Clausius residuals."""
    cold, hot = cycle.cold, cycle.hot
    nu_c, kappa_c = nu_kappa(cold.omega, cold.temperature)
    nu_h, kappa_h = nu_kappa(hot.omega, hot.temperature)
    d_omega = hot.omega - cold.omega
    d_nu = nu_h - nu_c

    r1 = -d_omega * nu_c
    r2 = d_omega * nu_h
    r = d_omega * d_nu
    q1 = hot.omega * d_nu
    q2 = -cold.omega * d_nu
    lam = cold.omega / cold.temperature - hot.omega / hot.temperature

    if lam > 0:
        mode = CycleMode.HEAT_ENGINE
        eta = 1.0 - cold.omega / hot.omega
        zeta = None
    elif lam < 0:
        mode = CycleMode.REFRIGERATOR
        eta = None
        zeta = cold.omega / d_omega
    else:
        mode = CycleMode.DEGENERATE
        eta = None
        zeta = None

    s_ab = stage_entropy(cold.omega, cold.temperature)
    s_cd = stage_entropy(hot.omega, hot.temperature)
    c_bc, c_da = clausius_residuals(cycle)

    return CycleReport(
        nu_c=nu_c,
        nu_h=nu_h,
        kappa_c=kappa_c,
        kappa_h=kappa_h,
        R1=r1,
        R2=r2,
        R=r,
        Q1=q1,
        Q2=q2,
        lam=lam,
        mode=mode,
        eta=eta,
        zeta=zeta,
        eta_carnot=1.0 - cold.temperature / hot.temperature,
        S_AB=s_ab,
        S_CD=s_cd,
        C_BC=c_bc,
        C_DA=c_da,
    )


def clausius_residuals(cycle: QuasistaticCycle) -> tuple[float, float]:
    """Clausius residuals of the two isochores, both >= 0.

    Each residual is the entropy change along the isochore minus the heat
    absorbed there divided by the bath temperature.  On BC the system
    equilibrates with the hot bath and absorbs Q1; on DA it equilibrates
    with the cold bath and absorbs Q2.  Both vanish exactly when
    omega_c/T_c = omega_h/T_h (the whole cycle stays in equilibrium).
    """
    cold, hot = cycle.cold, cycle.hot
    nu_c, _ = nu_kappa(cold.omega, cold.temperature)
    nu_h, _ = nu_kappa(hot.omega, hot.temperature)
    d_nu = nu_h - nu_c
    s_ab = stage_entropy(cold.omega, cold.temperature)
    s_cd = stage_entropy(hot.omega, hot.temperature)
    q1 = hot.omega * d_nu
    q2 = -cold.omega * d_nu
    c_bc = s_cd - s_ab - q1 / hot.temperature
    c_da = s_ab - s_cd - q2 / cold.temperature
    return c_bc, c_da


def cooling_limit(hot: Reservoir, omega_c: float, omega_h: float) -> float:
    """Lowest cold-bath temperature the refrigerator branch can reach.

    Refrigeration requires lam < 0, i.e. T_c > T_h omega_c/omega_h; the
    returned temperature T_h omega_c/omega_h is the boundary, where lam = 0
    exactly and the cooling power vanishes.
    """
    if not omega_h > omega_c > 0:
        raise ValueError(
            f"need omega_h > omega_c > 0, got omega_c={omega_c}, omega_h={omega_h}"
        )
    return hot.temperature * omega_c / omega_h
