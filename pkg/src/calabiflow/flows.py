"""Combinatorial Calabi and Ricci flows on circle packing metrics.

Four flow kinds evolve the log radii ``u``:

* ``calabi``:            du/dt = Delta K        (= -L K)
* ``ricci_normalized``:  du/dt = K_av - K
* ``calabi_prescribed``: du/dt = L (Kbar - K)
* ``ricci_prescribed``:  du/dt = Kbar - K

where ``L`` is the dual Laplacian and ``Kbar`` a prescribed target
curvature (the average curvature for the first two kinds).  The Calabi
kinds are the negative gradient flow of the energy ``sum (K_i - Kbar_i)^2``
and conserve ``sum u_i`` exactly in continuous time; the Ricci kinds are
the negative gradient flow of the Ricci potential.

Integration is explicit Euler with an energy guard: a trial step that
increases the energy (for Calabi kinds) or the Ricci potential difference
along the step segment (for Ricci kinds) is halved and retried, up to
``max_halvings`` times.  The step grows again by ``growth_factor`` after
every ``growth_interval`` consecutive accepted steps, capped at
``max_step``.  ``sum u`` is re-centered every ``recenter_interval``
accepted steps for Calabi kinds to repair floating point drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DomainError, StepCollapseError
from .geometry import PackingMetric, Weight
from .laplacian import DualLaplacian, assemble
from .mesh import Triangulation

__all__ = [
    "FlowKind",
    "IntegratorOptions",
    "FlowSample",
    "FlowTrace",
    "velocity",
    "step",
    "StepResult",
    "integrate",
    "curvature_derivative_check",
]

KIND_NAMES = ("calabi", "ricci_normalized", "calabi_prescribed", "ricci_prescribed")


@dataclass(frozen=True, eq=False)
class FlowKind:
    """One of the four flow kinds, with its target curvature if prescribed."""

    name: str
    target: Optional[np.ndarray]
    uses_laplacian: bool

    @classmethod
    def calabi(cls) -> "FlowKind":
        return cls("calabi", None, True)

    @classmethod
    def ricci_normalized(cls) -> "FlowKind":
        return cls("ricci_normalized", None, False)

    @classmethod
    def calabi_prescribed(cls, target) -> "FlowKind":
        return cls("calabi_prescribed", np.asarray(target, dtype=np.float64), True)

    @classmethod
    def ricci_prescribed(cls, target) -> "FlowKind":
        return cls("ricci_prescribed", np.asarray(target, dtype=np.float64), False)

    def resolve_target(self, t: Triangulation) -> np.ndarray:
        """The target curvature vector: ``Kbar``, or ``K_av`` if unprescribed."""
        if self.target is None:
            k_av = 2.0 * math.pi * t.chi / t.n_vertices
            return np.full(t.n_vertices, k_av)
        tgt = np.ascontiguousarray(self.target, dtype=np.float64)
        if tgt.shape != (t.n_vertices,):
            raise DomainError(
                f"target curvature has {tgt.shape} entries for {t.n_vertices} vertices"
            )
        if not np.all(np.isfinite(tgt)):
            raise DomainError("target curvature must be finite")
        return tgt


@dataclass(frozen=True)
class IntegratorOptions:
    """Explicit Euler controller settings.

    ``max_step`` bounds step regrowth; the large default effectively
    removes the cap, which divergent runs need to reach the ``u_max``
    guard quickly.  Pass a small cap (e.g. ``0.02``) when the measured
    decay rate of a converging run should track continuous time.
    """

    initial_step: float = 1e-2
    max_steps: int = 10**6
    curvature_tol: float = 1e-10
    u_max: float = 50.0
    max_step: float = 1e12
    growth_factor: float = 1.2
    growth_interval: int = 10
    max_halvings: int = 60
    recenter_interval: int = 1000
    guard_panels: int = 4
    sample_target: int = 1000

    def __post_init__(self):
        if self.initial_step <= 0 or self.max_step <= 0:
            raise DomainError("step sizes must be positive")
        if self.max_steps < 1 or self.max_halvings < 0:
            raise DomainError("step counts must be positive")
        if self.curvature_tol <= 0 or self.u_max <= 0:
            raise DomainError("tolerances must be positive")


@dataclass(frozen=True)
class FlowSample:
    """One recorded state of a flow run.

    ``lambda1`` is the first nonzero dual Laplacian eigenvalue at the
    sampled state; it is NaN when the state is so degenerate that the dual
    weights do not evaluate in floating point (deep divergent escapes).
    """

    t: float
    step_size: float
    u: np.ndarray
    curvatures: np.ndarray
    energy: float
    lambda1: float


@dataclass
class FlowTrace:
    """Full record of a flow run.

    ``samples`` holds the initial state, every ``max(1, k/1000)``-th
    accepted step (``k`` the running count), and the final state.  For
    Calabi kinds every accepted step satisfied the energy guard, so the
    recorded energies are non-increasing.
    """

    kind_name: str
    target: np.ndarray
    status: str
    accepted_steps: int
    t_final: float
    final_metric: PackingMetric
    samples: list[FlowSample] = field(default_factory=list)

    def max_curvature_deviation(self) -> float:
        last = self.samples[-1]
        return float(np.max(np.abs(last.curvatures - self.target)))


def _mesh_arrays(t: Triangulation, w: Weight):
    return t.faces, t.face_edges, t.edges[:, 0], t.edges[:, 1], w.cos_phi


def _state_of(u, t, w):
    fv, fe, ea, eb, cphi = _mesh_arrays(t, w)
    _, _, _, curv, b, kn, err = _kernels.state(np.exp(u), fv, fe, ea, eb, cphi)
    _kernels.raise_state_error(err)
    return curv, b, kn


def velocity(kind: FlowKind, t: Triangulation, w: Weight, m: PackingMetric) -> np.ndarray:
    """The right-hand side du/dt at a metric."""
    target = kind.resolve_target(t)
    curv, b, _ = _state_of(m.u, t, w)
    dev = curv - target
    if kind.uses_laplacian:
        return _kernels.lap_apply(b, t.edges[:, 0], t.edges[:, 1], dev)
    return -dev


@dataclass(frozen=True)
class StepResult:
    metric: PackingMetric
    h: float
    energy: float
    halved: bool


def step(
    kind: FlowKind,
    t: Triangulation,
    w: Weight,
    m: PackingMetric,
    h: float,
    opts: IntegratorOptions | None = None,
) -> StepResult:
    """One guarded explicit Euler step of size at most ``h``.

    If the energy guard rejects the step, ``h`` is halved and retried up
    to ``opts.max_halvings`` times; the returned ``h`` is the accepted
    size.
    """
    opts = opts or IntegratorOptions()
    if h <= 0:
        raise DomainError("step size must be positive")
    target = kind.resolve_target(t)
    fv, fe, ea, eb, cphi = _mesh_arrays(t, w)
    curv, b, kn = _state_of(m.u, t, w)
    energy = float(np.sum((curv - target) ** 2))
    status, done, u, h_out, t_out, _, _, _, _, energy_out, err = _kernels.advance(
        m.u.copy(),
        float(h),
        0.0,
        0,
        1,
        fv,
        fe,
        ea,
        eb,
        cphi,
        target,
        kind.uses_laplacian,
        m.u.copy(),
        opts.curvature_tol,
        float("inf"),  # a single probe step should not trip the guard
        opts.max_step,
        opts.max_halvings,
        opts.growth_factor,
        opts.growth_interval + 2,  # no regrowth within a single step
        opts.guard_panels,
        curv,
        b,
        kn,
        energy,
    )
    if status == _kernels.ADV_STATE_ERROR:
        _kernels.raise_state_error(err)
    if status == _kernels.ADV_STEP_COLLAPSE:
        raise StepCollapseError(
            f"no acceptable step after {opts.max_halvings} halvings"
        )
    return StepResult(
        metric=PackingMetric.from_log_radii(u),
        h=t_out,
        energy=energy_out,
        halved=t_out < h,
    )


def integrate(
    kind: FlowKind,
    t: Triangulation,
    w: Weight,
    m0: PackingMetric,
    opts: IntegratorOptions | None = None,
) -> FlowTrace:
    """Run a flow until convergence, divergence, or the step limit.

    Convergence means ``max |K - target| < curvature_tol``; divergence
    means some ``|u_i - u_i(0)|`` exceeded ``u_max``.  Step collapse and
    violations of quantities that are bounded by theory raise; everything
    else is reported through ``FlowTrace.status``.
    """
    opts = opts or IntegratorOptions()
    target = kind.resolve_target(t)
    fv, fe, ea, eb, cphi = _mesh_arrays(t, w)
    if m0.n != t.n_vertices:
        raise DomainError("metric size does not match the mesh")

    u = m0.u.copy()
    u_ref = m0.u.copy()
    sum_u0 = float(u.sum())
    curv, b, kn = _state_of(u, t, w)
    energy = float(np.sum((curv - target) ** 2))
    recenter = kind.name in ("calabi", "calabi_prescribed")

    samples: list[FlowSample] = []

    def record(t_now, h_now, u_now, curv_now, energy_now, b_now):
        if not kind.uses_laplacian:
            # Ricci kinds advance on curvatures alone, so the dual weights
            # are re-derived here; deep escapes can degenerate their formula
            # in floating point, which is reported as a NaN lambda1.
            _, _, _, _, b_now, _, err = _kernels.state(np.exp(u_now), fv, fe, ea, eb, cphi)
            if err != _kernels.ERR_OK:
                b_now = None
        if b_now is None:
            lam = float("nan")
        else:
            lam = DualLaplacian(t.n_vertices, t.edges, b_now).lambda1()
        samples.append(
            FlowSample(
                t=float(t_now),
                step_size=float(h_now),
                u=u_now.copy(),
                curvatures=curv_now.copy(),
                energy=float(energy_now),
                lambda1=lam,
            )
        )

    h = opts.initial_step
    t_now = 0.0
    accepted = 0
    streak = 0
    record(t_now, h, u, curv, energy, b)

    if float(np.max(np.abs(curv - target))) < opts.curvature_tol:
        return FlowTrace(
            kind_name=kind.name,
            target=target,
            status="converged",
            accepted_steps=0,
            t_final=0.0,
            final_metric=PackingMetric.from_log_radii(u),
            samples=samples,
        )

    status = "step_limit"
    last_recorded = 0
    while accepted < opts.max_steps:
        stride = max(1, accepted // opts.sample_target)
        boundaries = [last_recorded + stride - accepted, opts.max_steps - accepted]
        if recenter:
            next_recenter = ((accepted // opts.recenter_interval) + 1) * opts.recenter_interval
            boundaries.append(next_recenter - accepted)
        n_chunk = max(1, min(boundaries))
        (
            adv_status,
            done,
            u,
            h,
            t_now,
            streak,
            curv,
            b,
            kn,
            energy,
            err,
        ) = _kernels.advance(
            u,
            h,
            t_now,
            streak,
            n_chunk,
            fv,
            fe,
            ea,
            eb,
            cphi,
            target,
            kind.uses_laplacian,
            u_ref,
            opts.curvature_tol,
            opts.u_max,
            opts.max_step,
            opts.max_halvings,
            opts.growth_factor,
            opts.growth_interval,
            opts.guard_panels,
            curv,
            b,
            kn,
            energy,
        )
        accepted += done
        if adv_status == _kernels.ADV_STATE_ERROR:
            _kernels.raise_state_error(err)
        if adv_status == _kernels.ADV_STEP_COLLAPSE:
            raise StepCollapseError(
                f"step collapsed after {opts.max_halvings} halvings at "
                f"t={t_now!r} (step {accepted})"
            )
        if adv_status == _kernels.ADV_CONVERGED:
            status = "converged"
        elif adv_status == _kernels.ADV_DIVERGED:
            status = "diverged"
        terminal = adv_status in (_kernels.ADV_CONVERGED, _kernels.ADV_DIVERGED)
        if recenter and not terminal and accepted % opts.recenter_interval == 0:
            u = u - (u.sum() - sum_u0) / t.n_vertices
            curv, b, kn = _state_of(u, t, w)
            energy = float(np.sum((curv - target) ** 2))
        if accepted - last_recorded >= stride or terminal:
            record(t_now, h, u, curv, energy, b)
            last_recorded = accepted
        if terminal:
            break

    if status == "step_limit" and last_recorded != accepted:
        record(t_now, h, u, curv, energy, b)

    return FlowTrace(
        kind_name=kind.name,
        target=target,
        status=status,
        accepted_steps=accepted,
        t_final=t_now,
        final_metric=PackingMetric.from_log_radii(u),
        samples=samples,
    )


def curvature_derivative_check(
    kind: FlowKind,
    t: Triangulation,
    w: Weight,
    m: PackingMetric,
    fd_step: float = 1e-6,
) -> float:
    """Residual between the finite-difference curvature derivative along the
    flow and its closed forms.

    Compares ``(K(u + s v) - K(u - s v)) / 2s`` against ``L v``, and for the
    plain Calabi flow also against ``-L (L K)``.  Returns the largest
    absolute residual.
    """
    v = velocity(kind, t, w, m)
    fv, fe, ea, eb, cphi = _mesh_arrays(t, w)

    def curv_at(u):
        k, err = _kernels.curvatures(np.exp(u), fv, fe, ea, eb, cphi)
        _kernels.raise_state_error(err)
        return k

    fd = (curv_at(m.u + fd_step * v) - curv_at(m.u - fd_step * v)) / (2.0 * fd_step)
    lap = assemble(t, w, m)
    residual = float(np.max(np.abs(fd - lap.matrix @ v)))
    if kind.name == "calabi":
        curv = curv_at(m.u)
        closed = -(lap.matrix @ (lap.matrix @ curv))
        residual = max(residual, float(np.max(np.abs(fd - closed))))
    return residual
