"""Three-stage grasp simulation: conform, jam, seal and regulate.

The seal/regulate stage couples lip closure to the pneumatic operating
point. Leak flow deflects the lip, the deflection narrows the leak gap,
and the narrower gap lowers the flow, iterated to a fixed point.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .deflection import check_interpretation, closure_state, tip_value
from .errors import ConvergenceError, DomainError
from .geometry import LipGeometry, as_d_theta, make_grid
from .pneumatics import FLOW_MODES, AirEnvironment, BlowerState, LeakModel, operating_point

GRIPPER_MASS = 0.1375   # FH-R80 [kg]
APERTURE = 0.08         # FH-R80 aperture, inferred from the model name [m]


class Stage(str, Enum):
    CONFORMING = "Conforming"
    JAMMED = "Jammed"
    SEALED_REGULATED = "SealedRegulated"
    FAILED = "Failed"


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    diameter: float          # [m]
    mass: float              # [kg]
    leak: LeakModel
    a_seal: float            # effective sealed area [m^2]
    mu: float = 0.5          # stored only; vertical lift ignores friction

    def __post_init__(self):
        if not self.diameter > 0.0:
            raise DomainError(f"{self.name}: diameter must be positive")
        if self.mass < 0.0:
            raise DomainError(f"{self.name}: mass must be non-negative")
        if not self.a_seal > 0.0:
            raise DomainError(f"{self.name}: a_seal must be positive")
        if self.mu < 0.0:
            raise DomainError(f"{self.name}: mu must be non-negative")

    def with_fit(self, c0: Optional[float] = None, a_seal: Optional[float] = None) -> "ObjectSpec":
        leak = self.leak if c0 is None else replace(self.leak, c0=c0)
        return replace(self, leak=leak, a_seal=self.a_seal if a_seal is None else a_seal)


@dataclass(frozen=True)
class GraspModes:
    flow_mode: str = "total"
    interpretation: str = "paper_faithful"
    gripper_mass: float = GRIPPER_MASS
    # required ratio of suction force to object weight for a lift to hold
    holding_margin: float = 1.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if self.flow_mode not in FLOW_MODES:
            raise DomainError(f"flow mode must be one of {FLOW_MODES}, got {self.flow_mode!r}")
        check_interpretation(self.interpretation)
        if not self.gripper_mass > 0.0:
            raise DomainError("gripper mass must be positive")
        if self.holding_margin < 0.0:
            raise DomainError("holding margin must be non-negative")


@dataclass(frozen=True)
class GraspOutcome:
    object_name: str
    stage: Stage
    dp_op: float
    q_op: float
    y_tip: float
    sealed: bool
    mhf: float
    load_ratio: float
    iterations: int
    residual_gap: float = 0.0
    history: tuple = field(default=(), repr=False)
    warnings: tuple = ()

    def report(self) -> dict:
        return {
            "object": self.object_name,
            "stage": self.stage.value,
            "sealed": self.sealed,
            "dp_op_pa": self.dp_op,
            "q_op_m3s": self.q_op,
            "y_tip_m": self.y_tip,
            "residual_gap_m": self.residual_gap,
            "mhf_n": self.mhf,
            "load_ratio": self.load_ratio,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }


def holding_force(dp_op: float, obj: ObjectSpec) -> float:
    """Suction holding force for a vertical pull: dp * a_seal."""
    if dp_op < 0.0:
        raise DomainError(f"pressure differential must be non-negative, got {dp_op}")
    return dp_op * obj.a_seal


def load_ratio(mhf: float, gripper_mass: float, env: AirEnvironment = AirEnvironment()) -> float:
    if not gripper_mass > 0.0:
        raise DomainError(f"gripper mass must be positive, got {gripper_mass}")
    return mhf / (gripper_mass * env.g)


def lifting_ratio(object_mass: float, gripper_mass: float) -> float:
    """Object mass over gripper mass."""
    if not gripper_mass > 0.0:
        raise DomainError(f"gripper mass must be positive, got {gripper_mass}")
    return object_mass / gripper_mass


@dataclass(frozen=True)
class ApertureClass:
    ratio: float
    self_closure: bool    # object smaller than the aperture

    @property
    def path(self) -> str:
        return "self-closure" if self.self_closure else "full-interface"


def aperture_ratio(object_diameter: float, aperture: float = APERTURE) -> ApertureClass:
    if not aperture > 0.0:
        raise DomainError(f"aperture must be positive, got {aperture}")
    ratio = object_diameter / aperture
    return ApertureClass(ratio=ratio, self_closure=ratio < 1.0)


def _regulate(geom, env, blower, leak, d_theta, modes):
    """Fixed-point iteration of lip deflection against the operating point.

    Returns ``(y, dp, q, iterations, history)``. The step is halved each
    time its sign flips, which turns the alternating undamped sequence into
    a monotone one.
    """
    y = 0.0
    history = [y]
    omega = 1.0
    last_step = 0.0
    for it in range(1, modes.max_iter + 1):
        dp, q = operating_point(blower, leak.conductance(y), leak.kind)
        target = tip_value(env, q, geom, d_theta, modes.flow_mode, modes.interpretation)
        step = target - y
        if abs(step) <= max(modes.rel_tol * abs(y), modes.abs_tol):
            return y, dp, q, it, tuple(history)
        if step * last_step < 0.0:
            omega *= 0.5
        last_step = step
        y = y + omega * step
        history.append(y)
    raise ConvergenceError(
        f"lip closure iteration did not converge in {modes.max_iter} steps",
        last=history[-1], previous=history[-2],
    )


def simulate_grasp(geom: LipGeometry, env: AirEnvironment, blower: BlowerState, obj: ObjectSpec,
                   grid=None, modes: GraspModes = GraspModes()) -> GraspOutcome:
    d_theta = as_d_theta(make_grid() if grid is None else grid)
    leak = obj.leak
    weight = obj.mass * env.g
    warnings = []

    # Conform: contact made, the lip sits at gap0 from the surface.
    if blower.inert:
        stage = Stage.FAILED if weight > 0.0 else Stage.CONFORMING
        sealed, gap = closure_state(0.0, leak.gap0)
        return GraspOutcome(obj.name, stage, 0.0, 0.0, 0.0, sealed, 0.0, 0.0, 0,
                            residual_gap=gap, history=(0.0,), warnings=("vacuum inactive",))

    # Jam: vacuum on. A leak-free interface is airtight and stops here.
    if leak.c0 == 0.0:
        y, dp, q, iterations, history = 0.0, blower.p_stall, 0.0, 1, (0.0,)
        stage = Stage.JAMMED
        sealed, gap = True, 0.0
    else:
        # Seal/regulate.
        y, dp, q, iterations, history = _regulate(geom, env, blower, leak, d_theta, modes)
        sealed, gap = closure_state(y, leak.gap0)
        stage = Stage.SEALED_REGULATED if sealed else Stage.JAMMED
        if leak.gap0 > 0.0 and y > 0.0 and not sealed:
            warnings.append(f"lip self-closure incomplete, residual gap {gap:.3g} m")

    mhf = holding_force(dp, obj)
    if mhf < modes.holding_margin * weight:
        stage = Stage.FAILED
        warnings.append("suction cannot support the object weight")
    return GraspOutcome(
        object_name=obj.name,
        stage=stage,
        dp_op=dp,
        q_op=q,
        y_tip=y,
        sealed=sealed,
        mhf=mhf,
        load_ratio=load_ratio(mhf, modes.gripper_mass, env),
        iterations=iterations,
        residual_gap=gap,
        history=history,
        warnings=tuple(warnings),
    )


def reference_objects(aperture: float = APERTURE):
    """Objects from the holding-force experiments on the FH-R80.

    The egg diameter (54.5 % of the aperture) and the brick mass (3.3 kg)
    are reported values. Everything else, including the leak parameters,
    is a placeholder meant to be calibrated. Seal areas default to the
    full aperture disc, on which the vacuum acts.
    """
    a_aperture = math.pi * (aperture / 2.0) ** 2
    small_gap = LeakModel("linear", c0=1e-6, gap0=1.5e-3)
    mid_gap = LeakModel("linear", c0=1e-6, gap0=1.0e-3)
    flat = LeakModel("linear", c0=1e-7, gap0=0.0)
    return [
        ObjectSpec("egg", 0.545 * aperture, 0.060, small_gap, a_aperture, mu=0.3),
        ObjectSpec("tomato", 0.050, 0.100, small_gap, a_aperture, mu=0.4),
        ObjectSpec("lemon", 0.055, 0.110, mid_gap, a_aperture, mu=0.5),
        ObjectSpec("mug", 0.075, 0.300, flat, a_aperture, mu=0.4),
        ObjectSpec("brick", 0.110, 3.300, flat, a_aperture, mu=0.8),
        ObjectSpec("metal part", 0.090, 1.200, flat, a_aperture, mu=0.3),
    ]
