"""Airflow side of the gripper: Bernoulli suction, blower line, leak laws
and the pressure-flow operating point."""
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import ConvergenceError, DomainError
from .geometry import TWO_PI, check_d_theta

PA_PER_MBAR = 100.0

P_STALL_MAX = 410.0 * PA_PER_MBAR   # blower maximum, 410 mbar
Q_FREE_MAX = 0.1                    # free flow at full power [m^3/s], assumed

LEAK_KINDS = ("linear", "orifice")
FLOW_MODES = ("total", "apportioned")


@dataclass(frozen=True)
class AirEnvironment:
    rho: float = 1.225       # [kg/m^3], sea level at 15 C
    p_air: float = 101325.0  # [Pa]
    g: float = 9.81          # [m/s^2]

    def __post_init__(self):
        for name in ("rho", "p_air", "g"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class BlowerState:
    power: float
    p_stall: float   # vacuum at zero flow [Pa]
    q_free: float    # flow at zero vacuum [m^3/s]

    def __post_init__(self):
        if not 0.0 <= self.power <= 1.0:
            raise DomainError(f"power must lie in [0, 1], got {self.power}")
        if self.p_stall < 0.0 or self.q_free < 0.0:
            raise DomainError("blower stall pressure and free flow must be non-negative")
        if (self.p_stall > 0.0) != (self.q_free > 0.0):
            raise DomainError("an active blower needs both p_stall > 0 and q_free > 0")

    @property
    def inert(self) -> bool:
        return self.p_stall == 0.0

    def pressure_at(self, q: float) -> float:
        """Vacuum delivered at flow ``q`` on the straight blower line."""
        if self.inert:
            return 0.0
        return self.p_stall * (1.0 - q / self.q_free)


@dataclass(frozen=True)
class BlowerConfig:
    p_stall_max: float = P_STALL_MAX
    q_free_max: float = Q_FREE_MAX
    # maps power fraction to the (p_stall, q_free) multipliers
    shape: Optional[Callable[[float], tuple]] = None

    def __post_init__(self):
        if not (self.p_stall_max > 0.0 and self.q_free_max > 0.0):
            raise DomainError("blower maxima must be positive")


@dataclass(frozen=True)
class LeakModel:
    kind: str = "linear"
    c0: float = 0.0                # base conductance
    gap0: float = 0.0              # initial lip-object gap [m]
    closure_exponent: float = 2.0

    def __post_init__(self):
        if self.kind not in LEAK_KINDS:
            raise DomainError(f"leak kind must be one of {LEAK_KINDS}, got {self.kind!r}")
        if self.c0 < 0.0 or self.gap0 < 0.0 or self.closure_exponent < 0.0:
            raise DomainError("c0, gap0 and closure_exponent must be non-negative")

    def conductance(self, y_tip: float) -> float:
        """Effective conductance with the lip deflected by ``y_tip``.

        With no initial gap the leak path does not run past the lip, so the
        conductance stays at ``c0``.
        """
        if self.gap0 == 0.0 or self.c0 == 0.0:
            return self.c0
        opening = max(0.0, 1.0 - y_tip / self.gap0)
        if opening == 0.0:
            return 0.0
        return self.c0 * opening**self.closure_exponent

    def flow(self, dp: float, c: Optional[float] = None) -> float:
        return leak_flow(self.kind, self.c0 if c is None else c, dp)


def leak_flow(kind: str, c: float, dp: float) -> float:
    if math.isinf(c):
        return math.inf if dp > 0.0 else 0.0
    if kind == "linear":
        return c * dp
    if kind == "orifice":
        return c * math.sqrt(max(dp, 0.0))
    raise DomainError(f"unknown leak kind {kind!r}")


def bernoulli_dp(env: AirEnvironment, q: float, a: float, v_out: float = 0.0) -> float:
    """Pressure drop of flow ``q`` squeezed through area ``a``."""
    if not a > 0.0:
        raise DomainError(f"flow area must be positive, got {a}")
    if q < 0.0:
        raise DomainError(f"flow must be non-negative, got {q}")
    return 0.5 * env.rho * ((q / a) ** 2 - v_out**2)


def blower_curve(power: float, config: BlowerConfig = BlowerConfig()) -> BlowerState:
    if not 0.0 <= power <= 1.0:
        raise DomainError(f"power must lie in [0, 1], got {power}")
    if config.shape is None:
        kp = kq = power
    else:
        kp, kq = config.shape(power)
    return BlowerState(power=power, p_stall=kp * config.p_stall_max, q_free=kq * config.q_free_max)


def operating_point(blower: BlowerState, c: float, kind: str = "linear",
                    tol: float = 1e-6, max_iter: int = 200):
    """Intersect the blower line with the leak law.

    Bisection on the vacuum level over [0, p_stall]; both laws are monotone
    so the bracket always holds the unique root. Returns ``(dp, q)``.
    """
    if c < 0.0:
        raise DomainError(f"conductance must be non-negative, got {c}")
    if kind not in LEAK_KINDS:
        raise DomainError(f"leak kind must be one of {LEAK_KINDS}, got {kind!r}")
    if blower.inert:
        return 0.0, 0.0
    if c == 0.0:
        return blower.p_stall, 0.0
    if math.isinf(c):
        return 0.0, blower.q_free

    p_stall, q_free = blower.p_stall, blower.q_free

    def excess(dp):
        # blower supply minus leak demand, strictly decreasing in dp
        return p_stall * (1.0 - leak_flow(kind, c, dp) / q_free) - dp

    # the flow bound keeps both curves satisfied when c amplifies pressure error
    q_tol = 1e-12 * q_free
    lo, hi = 0.0, p_stall
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 2.0 * math.ulp(hi):
            break
        if hi - lo <= tol and leak_flow(kind, c, hi) - leak_flow(kind, c, lo) <= q_tol:
            break
    else:
        raise ConvergenceError("operating point bisection did not converge", last=hi, previous=lo)
    dp = 0.5 * (lo + hi)
    q = min(leak_flow(kind, c, dp), q_free)
    return dp, q


def apportion_flow(q_total: float, d_theta: float, mode: str = "total") -> float:
    """Flow assigned to one segment: the whole flow, or its angular share."""
    if q_total < 0.0:
        raise DomainError(f"flow must be non-negative, got {q_total}")
    d_theta = check_d_theta(d_theta)
    if mode == "total":
        return q_total
    if mode == "apportioned":
        if d_theta == TWO_PI:
            return q_total
        return q_total * d_theta / TWO_PI
    raise DomainError(f"flow mode must be one of {FLOW_MODES}, got {mode!r}")
