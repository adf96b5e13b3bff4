"""Time integration of the curvature flows to their steady states.

Two parametrizations are integrated with the same explicit midpoint scheme:

* flat ambient, support function on the Gauss sphere:
      ds/dt = Phi(f) - Phi(F(kappa))
* curved Riemannian ambient (hemisphere, hyperbolic plane), radial graph:
      dr/dt = sigma (Phi(f) - Phi(F)) v

with Phi(y) = y for the contracting mode and Phi(y) = -1/y for the
expanding one.  Runs start on a barrier slice (or another validated barrier
profile), enforce the barrier sandwich, nodewise monotone motion and a
pinching cap at every accepted step, and declare convergence on the
elliptic residual sup|F - f| together with a small speed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from types import SimpleNamespace
from typing import Optional

import numpy as np

from . import barrier as barrier_mod
from .barrier import BarrierPair, validate_barrier
from .errors import (ConfigError, ConvexityError, DataError, DomainError,
                     MonitorError, StallError)
from .profile import (RadialProfile, SupportProfile, FULL_CIRCLE, LATITUDE,
                      damped_increment)
from .spaceform import DESITTER, EUCLID, SpaceformConfig, warping_values
from .verify import surface_fields

log = logging.getLogger("curveflow")

CONTRACTING = "contracting"
EXPANDING = "expanding"
MODES = (CONTRACTING, EXPANDING)

DT_MIN = 1e-12
DT_MAX = 1e-1
STALL_DT = 1e-14
SAFETY = 0.2


def phi_map(mode: str, y):
    return y if mode == CONTRACTING else -1.0 / y


def phi_slope(mode: str, y):
    return np.ones_like(np.asarray(y, dtype=float)) if mode == CONTRACTING else 1.0 / np.asarray(y) ** 2


@dataclass(frozen=True)
class ProblemSpec:
    """A fully assembled prescribed-curvature problem."""

    space: SpaceformConfig
    F: object
    data: object
    mode: str
    n: int
    barriers: BarrierPair
    start_side: str = "lower"

    @property
    def parametrization(self) -> str:
        return "support" if self.space.kind == EUCLID else "radial"

    def describe(self) -> dict:
        return {
            "space": {"kind": self.space.kind, "annulus": list(self.space.annulus)},
            "curvature": self.F.name,
            "data": self.data.describe(),
            "mode": self.mode,
            "n": self.n,
            "start_side": self.start_side,
            "barriers": [self.barriers.r_lower, self.barriers.r_upper],
        }


def make_problem(space: SpaceformConfig, F, data, mode: str,
                 start_side: str = "lower",
                 barriers: Optional[BarrierPair] = None) -> ProblemSpec:
    """Validate a problem assembly and locate barriers when not supplied."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    if space.kind == DESITTER:
        raise ConfigError("de Sitter flows are out of scope: barrier arithmetic only")
    if F.n != data.n:
        raise ConfigError(f"dimension mismatch: F has n={F.n}, data has n={data.n}")
    n = F.n
    if space.kind != EUCLID:
        if n != 1:
            raise ConfigError("curved-ambient runs use radial graphs with n = 1")
        if data.form in ("curvature_measure", "dual_minkowski", "lp_aleksandrov"):
            raise ConfigError(f"{data.form} data is defined in the flat ambient only")
    if start_side != "lower":
        raise ConfigError(
            "runs start from the lower barrier; upper-barrier starts belong to "
            "the Lorentzian case, which is out of scope"
        )
    if barriers is None:
        probe = SimpleNamespace(space=space, data=data, n=n)
        barriers = barrier_mod.find_spherical_barriers(probe)
    return ProblemSpec(space, F, data, mode, n, barriers, start_side)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


def speed_values(problem: ProblemSpec, fields) -> np.ndarray:
    """Nodewise normal speed sigma (Phi(f) - Phi(F)), with the tilt factor
    v for radial graphs."""
    sp = problem.space.sigma * (phi_map(problem.mode, fields.f)
                                - phi_map(problem.mode, fields.F))
    if fields.kind == "radial":
        sp = sp * fields.v
    return sp


def rhs_support(problem: ProblemSpec, profile: SupportProfile) -> np.ndarray:
    """d s / dt at the grid nodes (flat ambient)."""
    if problem.parametrization != "support":
        raise DomainError("rhs_support applies to flat-ambient problems")
    return speed_values(problem, surface_fields(profile, problem.F, problem.data))


def rhs_radial(problem: ProblemSpec, profile: RadialProfile) -> np.ndarray:
    """d r / dt at the grid nodes (radial graphs, any Riemannian kind, n = 1)."""
    if not isinstance(profile, RadialProfile):
        raise DomainError("rhs_radial expects a radial profile")
    return speed_values(problem, surface_fields(profile, problem.F, problem.data))


@lru_cache(maxsize=64)
def _dual_of(F):
    return F.dual()


def stiff_coefficient(problem: ProblemSpec, state) -> float:
    """Max diffusion coefficient of the linearized flow.

    Support flows: Phi'(F) F^2 dF_*/dr1, the coefficient of the linearized
    support flow in the s'' direction (dF_*/dr1 is identically 1 at n = 1,
    where F_* is the identity).  Radial flows: the graph coefficient
    Phi'(F) / (r'^2 + theta^2).
    """
    profile, fields = state.profile, state.fields
    dphi = phi_slope(problem.mode, fields.F)
    if fields.kind == "radial":
        th, _ = warping_values(problem.space.kind, profile.values)
        w2 = fields.sp**2 + th**2
        coef = dphi / w2
    elif problem.n == 1:
        coef = dphi * fields.F**2
    else:
        radii = 1.0 / fields.kappa  # (M, n) rows in the positive cone
        dual_grad1 = _dual_of(problem.F).gradient(radii)[:, 0]
        coef = dphi * fields.F**2 * dual_grad1
    return float(np.max(coef))


def adaptive_dt(problem: ProblemSpec, state) -> float:
    """Parabolic stability bound SAFETY h^2 / stiff_coefficient for the
    explicit midpoint step, clamped to [DT_MIN, DT_MAX]."""
    profile = state.profile
    h = (2.0 * np.pi if profile.domain == FULL_CIRCLE else np.pi) / profile.M
    dt = SAFETY * h**2 / stiff_coefficient(problem, state)
    return float(np.clip(dt, DT_MIN, DT_MAX))


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------


class StepRejected(Exception):
    """Internal: trial step left the admissible set; halve dt and retry."""


@dataclass
class FlowState:
    profile: object
    fields: object
    speed: object = None   # cached speed_values of these fields
    t: float = 0.0
    step_count: int = 0
    dt_last: float = 0.0


def _sandwich_ok(problem: ProblemSpec, values: np.ndarray) -> bool:
    bars = problem.barriers
    slack = 1e-9 * (bars.r_upper - bars.r_lower)
    return bool(np.all(values >= bars.r_lower - slack)
                and np.all(values <= bars.r_upper + slack))


def step(problem: ProblemSpec, state: FlowState, dt: float) -> FlowState:
    """One explicit midpoint step; raises StepRejected if the trial profile
    leaves the admissible set (positivity, strict convexity, barrier
    sandwich), StallError if dt has underflowed."""
    if dt < STALL_DT:
        from .profile import diagnostics

        raise StallError(
            f"time step underflow (dt = {dt:.3e}) at t = {state.t:.6g}",
            diagnostics=diagnostics(state.profile, problem),
        )
    profile = state.profile
    try:
        k1 = state.speed if state.speed is not None else speed_values(problem, state.fields)
        mid = profile.with_values(profile.values + 0.5 * dt * k1)
        fields_mid = surface_fields(mid, problem.F, problem.data)
        k2 = speed_values(problem, fields_mid)
        new = profile.with_values(profile.values + dt * k2)
        if not _sandwich_ok(problem, new.values):
            raise StepRejected("barrier sandwich violated")
        fields_new = surface_fields(new, problem.F, problem.data)
    except (DomainError, ConvexityError, DataError) as exc:
        raise StepRejected(str(exc)) from exc
    return FlowState(profile=new, fields=fields_new,
                     speed=speed_values(problem, fields_new), t=state.t + dt,
                     step_count=state.step_count + 1, dt_last=dt)


def _step_imex(problem: ProblemSpec, state: FlowState, dt: float,
               slack: float) -> FlowState:
    """Stabilized step: the explicit increment is damped modewise by
    1/(1 + dt a k^2) with a the stiff coefficient, i.e. the diffusion part
    is treated implicitly.  Unconditionally stable in the stiff part, first
    order in time, with exactly the same steady states as the explicit
    scheme.  Rejected (like a trial overshoot) when the admissible set or
    the monotone-motion margin is violated, so the caller's dt controller
    can back off.
    """
    if dt < STALL_DT:
        from .profile import diagnostics

        raise StallError(
            f"time step underflow (dt = {dt:.3e}) at t = {state.t:.6g}",
            diagnostics=diagnostics(state.profile, problem),
        )
    profile = state.profile
    try:
        a = stiff_coefficient(problem, state)
        inc = damped_increment(dt * state.speed, profile.domain, dt * a)
        new = profile.with_values(profile.values + inc)
        if not _sandwich_ok(problem, new.values):
            raise StepRejected("barrier sandwich violated")
        fields_new = surface_fields(new, problem.F, problem.data)
        speed_new = speed_values(problem, fields_new)
        if float(np.min(speed_new)) < -slack:
            raise StepRejected("monotone-motion margin violated (scheme overshoot)")
    except (DomainError, ConvexityError, DataError) as exc:
        raise StepRejected(str(exc)) from exc
    return FlowState(profile=new, fields=fields_new, speed=speed_new,
                     t=state.t + dt, step_count=state.step_count + 1, dt_last=dt)


# ---------------------------------------------------------------------------
# the driver
# ---------------------------------------------------------------------------


@dataclass
class RunOptions:
    tol: float = 1e-8
    max_steps: int = 200_000
    grid: int = 128
    record_every: int = 100
    seed: int = 0
    start: object = None          # None -> start_side barrier slice; float or profile
    monitor_slack: Optional[float] = None  # defaults to tol
    pinch_cap: float = 1e6
    dt_max: float = DT_MAX
    scheme: str = "rk2"           # "rk2" (explicit, CFL-limited) or "imex"
    dt_max_imex: float = 0.05


@dataclass
class FlowResult:
    profile: object
    converged: bool
    steps: int
    t_final: float
    stop_reason: str
    history: dict
    diagnostics: dict

    def to_dict(self, config_echo=None) -> dict:
        from .profile import profile_to_dict

        hist = [[int(s), float(r)] for s, r in zip(self.history["step"],
                                                   self.history["residual"])]
        return {
            "config": config_echo,
            "converged": self.converged,
            "steps": self.steps,
            "t_final": self.t_final,
            "stop_reason": self.stop_reason,
            "final_profile": profile_to_dict(self.profile),
            "residual_history": hist,
            "diagnostics": self.diagnostics,
        }


def _start_profile(problem: ProblemSpec, options: RunOptions):
    start = options.start
    if isinstance(start, (SupportProfile, RadialProfile)):
        return start
    if start is None:
        radius = (problem.barriers.r_lower if problem.start_side == "lower"
                  else problem.barriers.r_upper)
    else:
        radius = float(start)
    values = np.full(options.grid, radius)
    if problem.parametrization == "radial":
        return RadialProfile(values, space=problem.space)
    domain = FULL_CIRCLE if problem.n == 1 else LATITUDE
    return SupportProfile(values, domain=domain, n=problem.n)


def _node_extrema(fields, n: int):
    """(min radius, max radius, max trace B, pinch ratio) from the fields."""
    if fields.kind == "radial":
        radii = 1.0 / fields.kappa
        B = radii
        kmax, kmin = float(np.max(fields.kappa)), float(np.min(fields.kappa))
    else:
        radii = 1.0 / fields.kappa
        B = radii[:, 0] + (radii.shape[1] - 1) * radii[:, -1]
        kmax, kmin = float(np.max(fields.kappa)), float(np.min(fields.kappa))
    return (float(np.min(radii)), float(np.max(radii)), float(np.max(B)),
            kmax / kmin)


def run(problem: ProblemSpec, options: Optional[RunOptions] = None) -> FlowResult:
    """Integrate the flow until the elliptic residual and the speed drop
    below tol, or max_steps is exhausted.

    Monitors enforced at every accepted step (violations raise MonitorError
    with the history attached, never a silent failure):

    * barrier sandwich between the lower and upper barrier slices,
    * monotone motion: nodewise speed >= -monitor_slack (the run starts on
      a validated lower barrier, so the profile moves outward),
    * pinching: max B below pinch_cap.
    """
    options = options or RunOptions()
    slack = options.monitor_slack if options.monitor_slack is not None else options.tol

    profile = _start_profile(problem, options)
    margin = validate_barrier(problem, profile, problem.start_side)
    scale = max(1.0, float(np.max(np.abs(profile.values))))
    if problem.start_side == "lower" and margin < -1e-9 * scale:
        raise ConfigError(
            f"start profile is not a lower barrier (margin {margin:.3e}); "
            "runs must start on a barrier"
        )
    if problem.start_side == "upper" and margin > 1e-9 * scale:
        raise ConfigError(
            f"start profile is not an upper barrier (margin {margin:.3e})"
        )

    fields = surface_fields(profile, problem.F, problem.data)
    state = FlowState(profile=profile, fields=fields,
                      speed=speed_values(problem, fields))

    history = {key: [] for key in ("step", "t", "dt", "residual", "speed_min",
                                   "speed_max", "min_radius", "max_radius",
                                   "value_min", "value_max", "trace", "pinch")}
    min_speed_seen = np.inf
    max_pinch_seen = 0.0
    max_trace_seen = 0.0
    value_min_seen = np.inf
    value_max_seen = -np.inf

    def record(st, res, spd):
        rmin, rmax, trace, pinch = _node_extrema(st.fields, problem.n)
        history["step"].append(st.step_count)
        history["t"].append(st.t)
        history["dt"].append(st.dt_last)
        history["residual"].append(res)
        history["speed_min"].append(float(np.min(spd)))
        history["speed_max"].append(float(np.max(spd)))
        history["min_radius"].append(rmin)
        history["max_radius"].append(rmax)
        history["value_min"].append(float(np.min(st.profile.values)))
        history["value_max"].append(float(np.max(st.profile.values)))
        history["trace"].append(trace)
        history["pinch"].append(pinch)

    speed = state.speed
    res0 = float(np.max(np.abs(fields.F - fields.f)))
    record(state, res0, speed)

    if options.scheme not in ("rk2", "imex"):
        raise ConfigError(f"unknown scheme {options.scheme!r}")
    imex = options.scheme == "imex"
    dt_ctrl: Optional[float] = None  # running step size of the imex controller

    converged = False
    stop_reason = "max_steps"
    while state.step_count < options.max_steps:
        if imex:
            # grow gently from the explicit bound; rejections back it off
            base = adaptive_dt(problem, state)
            dt_ctrl = base if dt_ctrl is None else min(dt_ctrl * 1.2,
                                                       options.dt_max_imex)
            dt = max(dt_ctrl, base)
        else:
            dt = min(adaptive_dt(problem, state), options.dt_max)
        while True:
            try:
                if imex:
                    new_state = _step_imex(problem, state, dt, slack)
                else:
                    new_state = step(problem, state, dt)
                break
            except StepRejected as exc:
                log.debug("step rejected at t=%.6g (%s); halving dt", state.t, exc)
                dt *= 0.5
                if imex:
                    dt_ctrl = dt
                if dt < STALL_DT:
                    # surfaces the diagnostics via step's stall path
                    step(problem, state, dt)
        state = new_state
        speed = state.speed
        res = float(np.max(np.abs(state.fields.F - state.fields.f)))

        smin = float(np.min(speed))
        min_speed_seen = min(min_speed_seen, smin)
        if smin < -slack:
            record(state, res, speed)
            raise MonitorError(
                f"monotone motion violated at step {state.step_count}: "
                f"min speed {smin:.3e} < -{slack:.1e}",
                history=history,
            )
        rmin, rmax, trace, pinch = _node_extrema(state.fields, problem.n)
        max_pinch_seen = max(max_pinch_seen, pinch)
        max_trace_seen = max(max_trace_seen, trace)
        value_min_seen = min(value_min_seen, float(np.min(state.profile.values)))
        value_max_seen = max(value_max_seen, float(np.max(state.profile.values)))
        if trace > options.pinch_cap:
            record(state, res, speed)
            raise MonitorError(
                f"pinching trace exceeded cap at step {state.step_count}: "
                f"{trace:.3e} > {options.pinch_cap:.1e}",
                history=history,
            )

        if state.step_count % options.record_every == 0:
            record(state, res, speed)
        if res < options.tol and float(np.max(np.abs(speed))) < options.tol:
            converged = True
            stop_reason = "converged"
            record(state, res, speed)
            break

    if not converged:
        speed = state.speed
        res = float(np.max(np.abs(state.fields.F - state.fields.f)))
        record(state, res, speed)

    res_hist = np.asarray(history["residual"])
    tail = res_hist[max(0, int(0.9 * len(res_hist))):]
    # empirical check, recorded for inspection: the residual should not grow
    # over the last decade of records (5% jitter allowed)
    if len(tail) > 1:
        tail_monotone = bool(np.all(tail[1:] <= 1.05 * tail[:-1] + 1e-16))
    else:
        tail_monotone = True

    diagnostics = {
        "min_radius": history["min_radius"][-1],
        "max_radius": history["max_radius"][-1],
        "max_pinch": max_pinch_seen,
        "max_trace": max_trace_seen,
        "min_speed_seen": float(min_speed_seen),
        "value_min_seen": (float(value_min_seen) if np.isfinite(value_min_seen)
                           else float(np.min(state.profile.values))),
        "value_max_seen": (float(value_max_seen) if np.isfinite(value_max_seen)
                           else float(np.max(state.profile.values))),
        "residual_final": history["residual"][-1],
        "residual_tail_monotone": tail_monotone,
    }
    return FlowResult(profile=state.profile, converged=converged,
                      steps=state.step_count, t_final=state.t,
                      stop_reason=stop_reason, history=history,
                      diagnostics=diagnostics)


def suggest_annulus(kind: str, data, n: int, probe_range=(1e-3, 1e3),
                    samples: int = 241) -> tuple[float, float]:
    """Annulus (a, b) whose end slices are barriers, from a log-radius scan.

    Useful for position-weighted data where the admissible scale window
    follows from the homogeneity of f versus the -1 homogeneity of the
    slice curvature.
    """
    from .spaceform import KINDS, _KIND_PARAMS  # sigma lookup without a config

    if kind not in KINDS or kind == DESITTER:
        raise DomainError(f"suggest_annulus supports Riemannian kinds, got {kind!r}")
    lo, hi = probe_range
    if kind == "sphere":
        hi = min(hi, np.pi / 2 - 1e-3)
    shim = SimpleNamespace(kind=kind, sigma=_KIND_PARAMS[kind][1], annulus=(lo, hi))
    radii = np.geomspace(lo, hi, samples)
    margins = [barrier_mod.slice_margins(shim, data, n, r) for r in radii]
    lower_idx = [i for i, (lo_m, _) in enumerate(margins) if lo_m >= 0.0]
    upper_idx = [i for i, (_, up_m) in enumerate(margins) if up_m <= 0.0]
    for i in lower_idx:
        later = [j for j in upper_idx if j > i]
        if later:
            return float(radii[i]), float(radii[later[len(later) // 2]])
    raise DomainError("no barrier-compatible annulus found in the probe range")
