"""Calibration of unobservable leak/seal parameters, log-log sensitivity
exponents and inverse design of the lip."""
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .deflection import tip_value
from .errors import DomainError, InfeasibleError
from .geometry import DEFAULT_N_SEGMENTS, TWO_PI, LipGeometry, check_d_theta
from .grasp import GraspModes, ObjectSpec, holding_force, reference_objects, simulate_grasp
from .pneumatics import AirEnvironment, BlowerConfig, blower_curve

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_D_THETA = TWO_PI / DEFAULT_N_SEGMENTS

# egg and tomato share one stabilised flow, brick, metal part and mug another
REFERENCE_FLOW_GROUPS = {
    "egg": "small", "tomato": "small",
    "lemon": "lemon",
    "brick": "flat", "metal part": "flat", "mug": "flat",
}


@dataclass(frozen=True)
class Observation:
    name: str
    power: float
    mhf_measured: Optional[float] = None   # [N]
    q_plateau: Optional[float] = None      # [m^3/s]

    def __post_init__(self):
        if not 0.0 < self.power <= 1.0:
            raise DomainError(f"{self.name}: power must lie in (0, 1], got {self.power}")
        if self.mhf_measured is not None and self.mhf_measured < 0.0:
            raise DomainError(f"{self.name}: measured MHF must be non-negative")
        if self.q_plateau is not None and self.q_plateau < 0.0:
            raise DomainError(f"{self.name}: plateau flow must be non-negative")
        if self.mhf_measured is None and self.q_plateau is None:
            raise DomainError(f"{self.name}: observation carries no measurement")


def reference_observations(power: float = 0.4, egg_mhf: float = 45.0):
    """Values stated in the text at 40 % power.

    Egg and tomato MHFs are only bounded (< 50 N); ``egg_mhf`` is a
    placeholder under that bound.
    """
    def m3h(v):
        return v / 3600.0

    return [
        Observation("egg", power, egg_mhf, m3h(47.9)),
        Observation("tomato", power, egg_mhf, m3h(47.9)),
        Observation("lemon", power, None, m3h(27.5)),
        Observation("brick", power, 127.1, m3h(7.4)),
        Observation("metal part", power, 127.1, m3h(7.4)),
        Observation("mug", power, None, m3h(7.4)),
    ]


@dataclass
class FitResult:
    c0: dict                      # object name -> fitted conductance
    a_seal: dict                  # object name -> fitted seal area
    groups: dict                  # object name -> flow group label
    residual_norm: float
    iterations: int
    converged: bool
    residuals: list = field(default_factory=list)

    def params(self):
        return {name: (self.c0[name], self.a_seal[name]) for name in self.c0}

    def apply(self, objects):
        """Objects with the fitted parameters substituted."""
        out = []
        for obj in objects:
            if obj.name in self.c0:
                obj = obj.with_fit(c0=self.c0[obj.name], a_seal=self.a_seal[obj.name])
            out.append(obj)
        return out


def golden_section(f, lo, hi, tol=1e-10):
    """Minimise a unimodal ``f`` on [lo, hi]; returns the bracket midpoint."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _rel(pred, meas):
    scale = meas if meas > 0.0 else 1.0
    return (pred - meas) / scale


class _LogBox:
    """Maps [0, 1] onto a positive interval logarithmically."""

    def __init__(self, lo, hi):
        if not 0.0 < lo < hi:
            raise DomainError(f"bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")
        self.lo, self.hi = lo, hi
        self.span = math.log(hi / lo)

    def value(self, u):
        return self.lo * math.exp(u * self.span)


def fit_parameters(observations, objects, geom: LipGeometry, env: AirEnvironment = AirEnvironment(),
                   blower_config: BlowerConfig = BlowerConfig(), grid=None,
                   modes: GraspModes = GraspModes(), groups=None,
                   fit_c0: bool = True, fit_a_seal: bool = True,
                   c0_bounds=(1e-12, 1e-2), a_seal_bounds=(1e-6, 1.0),
                   tol: float = 1e-10, max_sweeps: int = 50) -> FitResult:
    """Fit leak conductance and seal area per object to measured MHF and flow.

    Minimises the sum of squared relative residuals by coordinate descent;
    each coordinate is line-searched with golden section in log space over
    its bounds. Objects that share a flow group share one conductance.
    A seal area is only fitted for objects with a measured MHF.
    """
    observations = list(observations)
    if not observations:
        raise DomainError("no observations to fit")
    by_name = {obj.name: obj for obj in objects}
    per_object = {}
    for ob in observations:
        if ob.name not in by_name:
            raise DomainError(f"observation for unknown object {ob.name!r}")
        per_object.setdefault(ob.name, []).append(ob)
    names = list(per_object)
    groups = {name: (groups or {}).get(name, name) for name in names}
    members = {}
    for name in names:
        members.setdefault(groups[name], []).append(name)

    c0_box = _LogBox(*c0_bounds)
    a_box = _LogBox(*a_seal_bounds)

    def clip(v, box):
        return min(max(v, box.lo), box.hi)

    c0 = {g: clip(by_name[ms[0]].leak.c0, c0_box) if fit_c0 else by_name[ms[0]].leak.c0
          for g, ms in members.items()}
    a_seal = {name: by_name[name].a_seal for name in names}
    has_mhf = {name: any(ob.mhf_measured is not None for ob in per_object[name]) for name in names}

    cache = {}

    def operating(name, c):
        obj = by_name[name]
        out = []
        for ob in per_object[name]:
            key = (replace(obj.leak, c0=c), ob.power)
            if key not in cache:
                res = simulate_grasp(geom, env, blower_curve(ob.power, blower_config),
                                     obj.with_fit(c0=c), grid, modes)
                cache[key] = (res.dp_op, res.q_op)
            out.append(cache[key])
        return out

    def residuals(name, c, a):
        rows = []
        for ob, (dp, q) in zip(per_object[name], operating(name, c)):
            if ob.mhf_measured is not None:
                rows.append(("mhf", ob, _rel(dp * a, ob.mhf_measured)))
            if ob.q_plateau is not None:
                rows.append(("flow", ob, _rel(q, ob.q_plateau)))
        return rows

    def cost(name, c, a):
        return math.fsum(r * r for _, _, r in residuals(name, c, a))

    def group_cost(g, c):
        return math.fsum(cost(name, c, a_seal[name]) for name in members[g])

    def total():
        return math.fsum(group_cost(g, c0[g]) for g in members)

    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        change = 0.0
        if fit_c0:
            for g in members:
                trial = c0_box.value(golden_section(lambda u: group_cost(g, c0_box.value(u)), 0.0, 1.0, tol))
                if group_cost(g, trial) < group_cost(g, c0[g]):
                    change = max(change, abs(trial - c0[g]) / c0[g])
                    c0[g] = trial
        if fit_a_seal:
            for name in names:
                if not has_mhf[name]:
                    continue
                c = c0[groups[name]]
                trial = a_box.value(golden_section(lambda u: cost(name, c, a_box.value(u)), 0.0, 1.0, tol))
                if cost(name, c, trial) < cost(name, c, a_seal[name]):
                    change = max(change, abs(trial - a_seal[name]) / a_seal[name])
                    a_seal[name] = trial
        if change <= 1e-12:
            converged = True
            break

    rows = []
    for name in names:
        for kind, ob, r in residuals(name, c0[groups[name]], a_seal[name]):
            rows.append({"object": name, "power": ob.power, "quantity": kind, "relative_residual": r})
    return FitResult(
        c0={name: c0[groups[name]] for name in names},
        a_seal=dict(a_seal),
        groups=groups,
        residual_norm=math.sqrt(total()),
        iterations=sweeps,
        converged=converged,
        residuals=rows,
    )


def fit_holding_margin(obj: ObjectSpec, power_threshold: float, geom: LipGeometry,
                       env: AirEnvironment = AirEnvironment(),
                       blower_config: BlowerConfig = BlowerConfig(), grid=None,
                       modes: GraspModes = GraspModes()) -> float:
    """Suction-to-weight margin at which ``obj`` just holds at ``power_threshold``.

    With this margin the object fails at any lower power, provided its
    holding force rises with power.
    """
    if not obj.mass > 0.0:
        raise DomainError(f"{obj.name}: a failure threshold needs a positive mass")
    res = simulate_grasp(geom, env, blower_curve(power_threshold, blower_config), obj, grid, modes)
    return holding_force(res.dp_op, obj) / (obj.mass * env.g)


SENSITIVITY_PARAMETERS = ("Q", "b", "E", "r", "R", "alpha", "rho", "d_theta")


def _tip_at(parameter, value, geom, env, q_total, d_theta, flow_mode, interpretation):
    if parameter == "Q":
        q_total = value
    elif parameter in ("b", "E", "r", "R", "alpha"):
        geom = geom.replace(**{parameter: value})
    elif parameter == "rho":
        env = replace(env, rho=value)
    elif parameter == "d_theta":
        d_theta = check_d_theta(value)
    else:
        raise DomainError(f"unknown parameter {parameter!r}; choose from {SENSITIVITY_PARAMETERS}")
    return tip_value(env, q_total, geom, d_theta, flow_mode, interpretation)


def _base_value(parameter, geom, env, q_total, d_theta):
    if parameter == "Q":
        return q_total
    if parameter == "rho":
        return env.rho
    if parameter == "d_theta":
        return d_theta
    if parameter in ("b", "E", "r", "R", "alpha"):
        return getattr(geom, parameter)
    raise DomainError(f"unknown parameter {parameter!r}; choose from {SENSITIVITY_PARAMETERS}")


def sensitivity(geom: LipGeometry, env: AirEnvironment, q_total: float, parameter: str,
                d_theta: float = DEFAULT_D_THETA, flow_mode: str = "total",
                interpretation: str = "paper_faithful", step_ratio: float = 1.001) -> float:
    """d ln(y_tip) / d ln(parameter) by a central difference in log space."""
    p0 = _base_value(parameter, geom, env, q_total, d_theta)
    if not p0 > 0.0:
        raise DomainError(f"{parameter}={p0} sits on the domain boundary")
    ys = []
    for p in (p0 * step_ratio, p0 / step_ratio):
        try:
            y = _tip_at(parameter, p, geom, env, q_total, d_theta, flow_mode, interpretation)
        except DomainError as exc:
            raise DomainError(f"{parameter}={p0} is too close to the domain boundary: {exc}") from exc
        if not y > 0.0:
            raise DomainError(f"tip deflection vanishes at {parameter}={p}")
        ys.append(y)
    return (math.log(ys[0]) - math.log(ys[1])) / (2.0 * math.log(step_ratio))


DESIGN_PARAMETERS = ("b", "E", "alpha")


def design_search(target: float, free: str, bounds, geom: LipGeometry, env: AirEnvironment,
                  q_total: float, d_theta: float = DEFAULT_D_THETA, flow_mode: str = "total",
                  interpretation: str = "paper_faithful", tol: float = 1e-12,
                  max_iter: int = 200) -> float:
    """Lip parameter value whose free-end deflection equals ``target``, by bisection."""
    if free not in DESIGN_PARAMETERS:
        raise DomainError(f"free parameter must be one of {DESIGN_PARAMETERS}, got {free!r}")
    lo, hi = bounds
    if not lo < hi:
        raise DomainError(f"empty bounds ({lo}, {hi})")

    def f(p):
        return _tip_at(free, p, geom, env, q_total, d_theta, flow_mode, interpretation) - target

    f_lo, f_hi = f(lo), f(hi)
    if abs(f_lo) < tol:
        return lo
    if abs(f_hi) < tol:
        return hi
    if f_lo * f_hi > 0.0:
        y_lo, y_hi = f_lo + target, f_hi + target
        span = (min(y_lo, y_hi), max(y_lo, y_hi))
        raise InfeasibleError(
            f"target {target:.6g} m outside achievable range [{span[0]:.6g}, {span[1]:.6g}] m "
            f"for {free} in [{lo}, {hi}]", achievable=span)
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < tol or mid in (lo, hi):
            break
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid


SWEEP_PARAMETERS = ("power", "b", "E", "alpha", "r", "R", "c0", "gap0")


def sweep_grid(parameter: str, values, geom: LipGeometry, obj: ObjectSpec,
               env: AirEnvironment = AirEnvironment(), blower_config: BlowerConfig = BlowerConfig(),
               power: float = 0.4, grid=None, modes: GraspModes = GraspModes()):
    """Grasp predictions over a one-parameter grid, one row per value."""
    if parameter not in SWEEP_PARAMETERS:
        raise DomainError(f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}")
    rows = []
    for v in values:
        g, o, pw = geom, obj, power
        if parameter == "power":
            pw = v
        elif parameter in ("b", "E", "alpha", "r", "R"):
            g = geom.replace(**{parameter: v})
        elif parameter == "c0":
            o = obj.with_fit(c0=v)
        else:
            o = replace(obj, leak=replace(obj.leak, gap0=v))
        res = simulate_grasp(g, env, blower_curve(pw, blower_config), o, grid, modes)
        rows.append({
            "value": v,
            "y_tip_m": res.y_tip,
            "dp_op_pa": res.dp_op,
            "q_op_m3s": res.q_op,
            "mhf_n": res.mhf,
            "stage": res.stage.value,
        })
    return rows


def calibrate_reference_set(geom: LipGeometry, env: AirEnvironment = AirEnvironment(),
                        blower_config: BlowerConfig = BlowerConfig(), grid=None,
                        modes: GraspModes = GraspModes(), objects=None, observations=None,
                        failure_object: str = "brick", failure_power: float = 0.4):
    """Fit the built-in object set to the stated values and fix the holding
    margin so ``failure_object`` fails below ``failure_power``.

    Returns ``(objects, fit, modes)`` with the margin folded into ``modes``.
    """
    objects = reference_objects() if objects is None else objects
    observations = reference_observations() if observations is None else observations
    fit = fit_parameters(observations, objects, geom, env, blower_config, grid, modes,
                         groups=REFERENCE_FLOW_GROUPS)
    fitted = fit.apply(objects)
    target = next(o for o in fitted if o.name == failure_object)
    margin = fit_holding_margin(target, failure_power, geom, env, blower_config, grid, modes)
    return fitted, fit, replace(modes, holding_margin=margin)
