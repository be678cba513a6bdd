"""Time stepping of patch boundaries by the normal velocity.

Each node moves with u_n n (classical RK4, velocity recomputed at every stage).
Normal-only transport lets nodes drift along the curve, so the curves are
periodically resampled equispaced in arc length. Individual node paths are
therefore gauge artifacts; only the geometric curves are meaningful.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import _spectral as sp
from .curves import (GeometryError, PatchSystem, min_distance,
                     polylines_intersect, reparametrize_arclength)
from .diagnostics import DiagnosticsRecord, DiagnosticsTracker
from .velocity import DEFAULT_RULE, QuadratureRule, normal_velocity_arrays

CFL_FLOOR = 1e-12
# RK4 is stable on the imaginary axis up to |omega dt| = 2 sqrt(2)
RK4_IMAGINARY_LIMIT = 2.0 * math.sqrt(2.0)
# resample early when the node gaps drift this far from uniform
EARLY_REPARAM_RATIO = 1.3


class SplashError(RuntimeError):
    """Distinct boundary pieces came closer than the stop distance, or crossed.

    ``system`` holds the post-step state when it is still a valid system.
    """

    def __init__(self, message: str, system: PatchSystem | None = None) -> None:
        super().__init__(message)
        self.system = system


class InvariantError(RuntimeError):
    """A boundary self-intersected or otherwise left the admissible state space."""


class CFLCollapseError(RuntimeError):
    """The admissible time step fell below the floor."""


@dataclass(frozen=True)
class EvolutionConfig:
    dt_max: float = 1e-2
    cfl: float = 0.5
    t_end: float = 1.0
    reparam_every: int = 5
    stop_distance: float | None = None   # None: 3 node spacings of the finest patch
    filter_order: int = 36               # exponential Fourier filter at each resampling; 0 disables

    def __post_init__(self) -> None:
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if int(self.reparam_every) != self.reparam_every or self.reparam_every < 1:
            raise ValueError("reparam_every must be a positive integer")
        if self.stop_distance is not None and self.stop_distance < 0:
            raise ValueError("stop_distance must be nonnegative")
        if self.filter_order < 0:
            raise ValueError("filter_order must be nonnegative")

    def resolved_stop(self, system: PatchSystem) -> float:
        if self.stop_distance is not None:
            return float(self.stop_distance)
        return 3.0 * min(p.param_spacing for p in system.patches)

    def to_dict(self) -> dict:
        return asdict(self)


def _velocity(system: PatchSystem, nodes, rule):
    values, normals, _ = normal_velocity_arrays(
        nodes, [p.coupling for p in system.patches], system.alpha, system.k, system.gamma, rule)
    return [v[:, None] * n for v, n in zip(values, normals)], max(float(np.abs(v).max()) for v in values)


def wave_frequency(system: PatchSystem, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Largest angular frequency of short boundary waves, by a linear-response probe.

    Normal-only transport still carries waves along the boundary (the
    tangential flow advects shape perturbations), and their frequency grows
    with the wavenumber. Each patch is perturbed along its normals by a high
    mode and the induced normal speed is projected back onto that mode.
    """
    nodes = [p.nodes for p in system.patches]
    couplings = [p.coupling for p in system.patches]
    base, normals, _ = normal_velocity_arrays(nodes, couplings, system.alpha, system.k,
                                              system.gamma, rule)
    omega = 0.0
    for i, patch in enumerate(system.patches):
        n = patch.n
        th = 2 * np.pi * np.arange(n) / n
        eps = 1e-6 * patch.param_spacing
        # the response peaks just below the Nyquist mode (whose normals are not resolved)
        m = int(0.47 * n)
        probe = list(nodes)
        probe[i] = nodes[i] + eps * np.cos(m * th)[:, None] * normals[i]
        vals, _, _ = normal_velocity_arrays(probe, couplings, system.alpha, system.k,
                                            system.gamma, rule)
        dv = vals[i] - base[i]
        c = 2.0 / n * np.sum(dv * np.cos(m * th))
        s = 2.0 / n * np.sum(dv * np.sin(m * th))
        omega = max(omega, math.hypot(c, s) / eps)
    return omega


def choose_dt(system: PatchSystem, config: EvolutionConfig, max_speed: float,
              omega: float = 0.0) -> float:
    """min(dt_max, cfl * spacing / max|u_n|, cfl * 2 sqrt(2) / omega, time left)."""
    spacing = min(float(p.gaps().min()) for p in system.patches)
    dt = config.dt_max
    if max_speed > 0:
        dt = min(dt, config.cfl * spacing / max_speed)
    if omega > 0:
        dt = min(dt, config.cfl * RK4_IMAGINARY_LIMIT / omega)
    return min(dt, config.t_end - system.time)


def step(system: PatchSystem, config: EvolutionConfig, *, step_index: int = 0,
         dt: float | None = None, omega: float | None = None,
         rule: QuadratureRule = DEFAULT_RULE) -> PatchSystem:
    """One RK4 step of dx/dt = u_n(x) n(x); returns the new validated system.

    ``step_index`` (the number of steps already taken) drives the
    reparametrization schedule. ``dt`` overrides the time step choice;
    ``omega`` is a precomputed :func:`wave_frequency` (probed here when None).
    """
    stop = config.resolved_stop(system)
    d, _ = min_distance(system)
    if d <= stop:
        raise SplashError(f"distance {d!r} already at or below the stop distance {stop!r}", system)

    z0 = [p.nodes for p in system.patches]
    k1, vmax = _velocity(system, z0, rule)
    if dt is None:
        if omega is None:
            omega = wave_frequency(system, rule)
        dt = choose_dt(system, config, vmax, omega)
    if not dt >= CFL_FLOOR:
        raise CFLCollapseError(f"time step {dt!r} below {CFL_FLOOR}")
    z1 = [z + 0.5 * dt * k for z, k in zip(z0, k1)]
    k2, _ = _velocity(system, z1, rule)
    z2 = [z + 0.5 * dt * k for z, k in zip(z0, k2)]
    k3, _ = _velocity(system, z2, rule)
    z3 = [z + dt * k for z, k in zip(z0, k3)]
    k4, _ = _velocity(system, z3, rule)
    new_nodes = [z + dt / 6.0 * (a + 2 * b + 2 * c + e) for z, a, b, c, e in zip(z0, k1, k2, k3, k4)]

    # crossing between patches means the discrete curves already touched
    for i in range(len(new_nodes)):
        for j in range(i + 1, len(new_nodes)):
            if polylines_intersect(new_nodes[i], new_nodes[j]):
                raise SplashError("boundaries of distinct patches intersect")

    scheduled = (step_index + 1) % config.reparam_every == 0
    patches = []
    try:
        for old, nodes in zip(system.patches, new_nodes):
            patch = old.with_nodes(nodes)
            gaps = patch.gaps()
            if scheduled or gaps.max() / gaps.min() > EARLY_REPARAM_RATIO:
                patch = reparametrize_arclength(patch, old.n)
                if config.filter_order:
                    z = sp.exponential_filter(sp.to_complex(patch.nodes), config.filter_order)
                    patch = patch.with_nodes(sp.to_points(z), patch.param_spacing)
            patches.append(patch)
        new = system.replace(patches=tuple(patches), time=system.time + dt)
    except GeometryError as exc:
        raise InvariantError(str(exc)) from exc
    d_new, _ = min_distance(new)
    if d_new <= stop:
        raise SplashError(f"distance {d_new!r} fell below the stop distance {stop!r}", new)
    return new


@dataclass
class RunState:
    """Everything needed to continue a run bit-exactly."""

    system: PatchSystem
    steps: int
    tracker: DiagnosticsTracker
    omega: float = 0.0    # wave frequency probed at the last refresh

    def to_dict(self) -> dict:
        return {"system": self.system.to_dict(), "steps": self.steps,
                "tracker": self.tracker.state(), "omega": self.omega}

    @classmethod
    def from_dict(cls, data: dict, rule: QuadratureRule = DEFAULT_RULE) -> "RunState":
        return cls(PatchSystem.from_dict(data["system"]), int(data["steps"]),
                   DiagnosticsTracker.from_state(data["tracker"], rule), float(data["omega"]))

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str, rule: QuadratureRule = DEFAULT_RULE) -> "RunState":
        return cls.from_dict(json.loads(text), rule)


@dataclass
class RunResult:
    records: list[DiagnosticsRecord]
    reason: str              # "t_end", "splash", or "error"
    message: str
    final: RunState


def run(system: PatchSystem, config: EvolutionConfig, diagnostics_every: int = 1, *,
        state: RunState | None = None, rule: QuadratureRule = DEFAULT_RULE,
        on_record: Callable[[DiagnosticsRecord, RunState], None] | None = None,
        checkpoint_every: int | None = None,
        on_checkpoint: Callable[[RunState], None] | None = None,
        raise_errors: bool = True) -> RunResult:
    """Step until t_end or a splash stop, recording diagnostics along the way.

    Pass ``state`` (from a checkpoint) to resume; ``system`` is then ignored.
    A record is taken at the start (fresh runs only), every
    ``diagnostics_every`` steps, and at termination. With ``raise_errors``
    false, invariant and CFL failures end the run with reason "error" instead
    of propagating.
    """
    if diagnostics_every < 1:
        raise ValueError("diagnostics_every must be at least 1")
    records: list[DiagnosticsRecord] = []

    def emit(st: RunState) -> None:
        rec = st.tracker.record(st.system)
        records.append(rec)
        if on_record is not None:
            on_record(rec, st)

    if state is None:
        state = RunState(system, 0, DiagnosticsTracker(rule))
        emit(state)
    last_recorded = state.steps
    reason, message = "t_end", ""
    while state.system.time < config.t_end and not math.isclose(state.system.time, config.t_end,
                                                                  rel_tol=0.0, abs_tol=CFL_FLOOR):
        if state.steps % config.reparam_every == 0:
            # the wave frequency is refreshed on the reparametrization schedule
            state.omega = wave_frequency(state.system, rule)
        try:
            new = step(state.system, config, step_index=state.steps, omega=state.omega, rule=rule)
        except SplashError as exc:
            reason, message = "splash", str(exc)
            if exc.system is not None and exc.system is not state.system:
                state = RunState(exc.system, state.steps + 1, state.tracker, state.omega)
                emit(state)
                last_recorded = state.steps
            break
        except (InvariantError, CFLCollapseError) as exc:
            if raise_errors:
                raise
            reason, message = "error", str(exc)
            break
        state = RunState(new, state.steps + 1, state.tracker, state.omega)
        if state.steps % diagnostics_every == 0:
            emit(state)
            last_recorded = state.steps
        if checkpoint_every and on_checkpoint is not None and state.steps % checkpoint_every == 0:
            on_checkpoint(state)
    if last_recorded != state.steps:
        emit(state)
    return RunResult(records, reason, message, state)
