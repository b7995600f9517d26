"""Bicharacteristic ray tracing for the principal symbol, as a geometric
diagnostic.

The Hamiltonian is ``H(x, xi) = 0.5 * sum a^{ij}(x) xi_i xi_j``; trajectories
follow ``dx/dt = dH/dxi`` and ``dxi/dt = -dH/dx`` under classical fixed-step
fourth-order integration.  A trace ends at the first boundary contact
(refined by bisection to 1e-9 in time) or at the horizon; rays are not
reflected.  Relative Hamiltonian drift above 1e-6 triggers step halving and
a full retry, up to eight times.
"""

import math
from dataclasses import dataclass

import numpy as np

from .coeff import CoefficientField
from .domain import Region, contains
from .errors import StepCollapseError
from .expr import differentiate
from .expr import _eval_scalar as _ev

DRIFT_TOLERANCE = 1e-6
_TIME_REFINEMENT = 1e-9
_MAX_HALVINGS = 8


@dataclass(frozen=True)
class RayState:
    """Position, covector, and time along a bicharacteristic."""

    x: tuple
    xi: tuple
    t: float = 0.0


@dataclass(frozen=True)
class RayOutcome:
    """Escape-time summary of one traced ray."""

    escaped: bool
    escape_time: float | None
    min_boundary_distance: float
    hamiltonian_drift: float
    step_used: float
    path: np.ndarray | None = None  # (k, dim) sampled positions

    @property
    def label(self) -> str:
        return "escaped" if self.escaped else "trapped_until_horizon"


class _Flow:
    """Prebuilt scalar evaluation tables for one field/region pair.

    Ray integration evaluates a handful of small trees millions of times, so
    everything goes through the scalar expression evaluator on plain tuples.
    """

    def __init__(self, field: CoefficientField, region: Region, consts):
        n = field.dim
        self.n = n
        self.consts = consts or {}
        self.entries = [[field.entry(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]
        self.partials = [
            [[field.partial(i, j, k) for k in range(1, n + 1)] for j in range(1, n + 1)]
            for i in range(1, n + 1)
        ]
        self.region = region
        self.constraints = region.constraints
        self.constraint_grads = [
            tuple(differentiate(g, k) for k in range(1, n + 1)) for g in region.constraints
        ]

    def matrix(self, x):
        c = self.consts
        return [[_ev(e, x, c) for e in row] for row in self.entries]

    def hamiltonian(self, x, xi):
        a = self.matrix(x)
        total = 0.0
        for i in range(self.n):
            for j in range(self.n):
                total += a[i][j] * xi[i] * xi[j]
        return 0.5 * total

    def rhs(self, x, xi):
        """(dx/dt, dxi/dt) = (A xi, -0.5 * xi^T (dA/dx_k) xi per axis)."""
        c = self.consts
        n = self.n
        a = self.matrix(x)
        dx = tuple(sum(a[i][j] * xi[j] for j in range(n)) for i in range(n))
        dxi = []
        for k in range(n):
            acc = 0.0
            for i in range(n):
                row = self.partials[i]
                for j in range(n):
                    acc += _ev(row[j][k], x, c) * xi[i] * xi[j]
            dxi.append(-0.5 * acc)
        return dx, tuple(dxi)

    def step(self, x, xi, h):
        n = self.n
        k1x, k1p = self.rhs(x, xi)
        x2 = tuple(x[i] + 0.5 * h * k1x[i] for i in range(n))
        p2 = tuple(xi[i] + 0.5 * h * k1p[i] for i in range(n))
        k2x, k2p = self.rhs(x2, p2)
        x3 = tuple(x[i] + 0.5 * h * k2x[i] for i in range(n))
        p3 = tuple(xi[i] + 0.5 * h * k2p[i] for i in range(n))
        k3x, k3p = self.rhs(x3, p3)
        x4 = tuple(x[i] + h * k3x[i] for i in range(n))
        p4 = tuple(xi[i] + h * k3p[i] for i in range(n))
        k4x, k4p = self.rhs(x4, p4)
        x_new = tuple(
            x[i] + (h / 6.0) * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i])
            for i in range(n)
        )
        xi_new = tuple(
            xi[i] + (h / 6.0) * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i])
            for i in range(n)
        )
        return x_new, xi_new

    def inside(self, x):
        bound = -self.region.margin if self.region.margin > 0 else 0.0
        for (lo, hi), v in zip(self.region.box, x):
            if not (lo <= v <= hi):
                return False
        for g in self.constraints:
            if _ev(g, x, self.consts) > bound:
                return False
        return True

    def boundary_distance(self, x):
        """First-order estimate of the distance to the region boundary."""
        dist = math.inf
        for (lo, hi), v in zip(self.region.box, x):
            dist = min(dist, v - lo, hi - v)
        c = self.consts
        for g, grads in zip(self.constraints, self.constraint_grads):
            val = _ev(g, x, c)
            norm = math.sqrt(sum(_ev(ge, x, c) ** 2 for ge in grads))
            if norm > 0.0:
                dist = min(dist, max(0.0, -val) / norm)
        return max(0.0, dist)


def trace(
    field: CoefficientField,
    region: Region,
    start: RayState,
    horizon: float,
    step: float,
    consts=None,
    store_path: bool = False,
) -> RayOutcome:
    """Integrate one ray until first boundary contact or the horizon.

    The start position must lie inside the region; the covector is
    normalized to energy one half before integration.  The accepted trace
    keeps relative Hamiltonian drift within 1e-6, halving the step and
    restarting when it does not; :class:`StepCollapseError` is raised after
    eight halvings.
    """
    if step <= 0.0 or horizon <= 0.0:
        raise ValueError("horizon and step must be positive")
    flow = _Flow(field, region, consts)
    x0 = tuple(float(v) for v in start.x)
    if len(x0) != region.dim:
        raise ValueError("start point dimension does not match the region")
    if not contains(region, x0, consts):
        raise ValueError(f"start point {x0} is outside the region")
    h0 = flow.hamiltonian(x0, tuple(float(v) for v in start.xi))
    if h0 <= 0.0:
        raise ValueError("initial covector has nonpositive energy")
    scale = 1.0 / math.sqrt(2.0 * h0)
    xi0 = tuple(scale * float(v) for v in start.xi)

    h = float(step)
    for _ in range(_MAX_HALVINGS + 1):
        outcome = _trace_once(flow, x0, xi0, horizon, h, store_path)
        if outcome is not None:
            return outcome
        h *= 0.5
    raise StepCollapseError(
        f"drift above {DRIFT_TOLERANCE:g} even after {_MAX_HALVINGS} step halvings"
    )


def _trace_once(flow: _Flow, x0, xi0, horizon, h, store_path):
    """One fixed-step pass; returns None when the drift tolerance fails."""
    h_ref = flow.hamiltonian(x0, xi0)
    x, xi, t = x0, xi0, 0.0
    drift_max = 0.0
    min_dist = flow.boundary_distance(x)
    path = [x] if store_path else None

    while t < horizon - 1e-15:
        h_step = min(h, horizon - t)
        x_new, xi_new = flow.step(x, xi, h_step)
        drift = abs(flow.hamiltonian(x_new, xi_new) - h_ref) / h_ref
        if drift > DRIFT_TOLERANCE:
            return None
        drift_max = max(drift_max, drift)
        if not flow.inside(x_new):
            t_cross, x_in = _refine_crossing(flow, x, xi, t, h_step)
            min_dist = min(min_dist, flow.boundary_distance(x_in))
            if path is not None:
                path.append(x_in)
            return RayOutcome(
                escaped=True,
                escape_time=t_cross,
                min_boundary_distance=min_dist,
                hamiltonian_drift=drift_max,
                step_used=h,
                path=np.array(path) if path is not None else None,
            )
        x, xi, t = x_new, xi_new, t + h_step
        min_dist = min(min_dist, flow.boundary_distance(x))
        if path is not None:
            path.append(x)

    return RayOutcome(
        escaped=False,
        escape_time=None,
        min_boundary_distance=min_dist,
        hamiltonian_drift=drift_max,
        step_used=h,
        path=np.array(path) if path is not None else None,
    )


def _refine_crossing(flow: _Flow, x_in, xi_in, t_in, h_step):
    """Bisect the crossing time inside one step to 1e-9, re-integrating from
    the last interior state each round."""
    lo, hi = 0.0, h_step
    x_best = x_in
    while hi - lo > _TIME_REFINEMENT:
        mid = 0.5 * (lo + hi)
        x_mid, _ = flow.step(x_in, xi_in, mid)
        if flow.inside(x_mid):
            lo = mid
            x_best = x_mid
        else:
            hi = mid
    return t_in + hi, x_best


def fan(
    field: CoefficientField,
    region: Region,
    center,
    count: int,
    horizon: float,
    step: float,
    consts=None,
    store_paths: bool = False,
):
    """Trace ``count`` rays with deterministically enumerated directions.

    Directions are uniform on the unit circle in 2D (angles 2*pi*k/count)
    and a Fibonacci sphere in 3D; higher dimensions are not supported.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    center = tuple(float(v) for v in center)
    dim = region.dim
    outcomes = []
    for k in range(count):
        if dim == 2:
            angle = 2.0 * math.pi * k / count
            direction = (math.cos(angle), math.sin(angle))
        elif dim == 3:
            # Fibonacci sphere: deterministic, near-uniform
            golden = (1.0 + math.sqrt(5.0)) / 2.0
            z = 1.0 - (2.0 * k + 1.0) / count
            r = math.sqrt(max(0.0, 1.0 - z * z))
            phi = 2.0 * math.pi * k / golden
            direction = (r * math.cos(phi), r * math.sin(phi), z)
        else:
            raise ValueError("fan directions are only enumerated for dim 2 or 3")
        state = RayState(x=center, xi=direction, t=0.0)
        outcomes.append(
            trace(field, region, state, horizon, step, consts, store_path=store_paths)
        )
    return outcomes
