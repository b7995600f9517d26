"""Constructive search for exponential certification weights.

When every off-index diagonal coefficient keeps one strict sign of its
partial along some axis j, an explicit weight of the form

* ``exp(lambda*(shift + x_j)) + sum_{i != j} exp(lambda*x_i)``
  (negative case: the off-index partials are < 0), or
* ``exp(-lambda*(x_j - shift)) + sum_{i != j} exp(-lambda*x_i)``
  (positive case: the partials are > 0)

certifies the condition once the rate ``lambda`` is large enough.  This
module detects admissible axes, picks the smallest grid-feasible shift,
searches the rate by doubling plus bisection, and exposes the row-scaled
matrix together with its explicit rate-to-infinity limit so the proof
asymptotics can be checked numerically.

Note on the shift in the positive case: the bound actually used mirrors the
negative case, ``shift >= 1 + max sum_{i != j} |x_i| + max x_j``, because a
one-sided bound through ``min sum |x_i|`` degenerates on domains touching
the coordinate axes and no longer controls the derivative ratios the large
rate analysis needs.
"""

from dataclasses import dataclass

import numpy as np

from .coeff import CoefficientField
from .condition import (
    ConditionReport,
    WeightFunction,
    check_condition,
    multiplier_matrix_diagonal,
    weight_function,
)
from .domain import Region, SampleGrid, sample
from .errors import (
    ExpOverflowError,
    LambdaMaxExceededError,
    WeightOverflowError,
)
from .expr import BinOp, Call, Neg, Num, Var

SIGN_NEGATIVE = "negative"
SIGN_POSITIVE = "positive"
_SIGN_ORDER = (SIGN_NEGATIVE, SIGN_POSITIVE)

DEFAULT_LAMBDA_MAX = 2**20
DEFAULT_RESOLUTION = 33
_BISECTION_ROUNDS = 10


@dataclass(frozen=True)
class AdmissibleIndex:
    """An axis whose off-index partials keep one strict sign over the grid."""

    axis: int
    sign_case: str
    sign_margin: float  # distance of the closest-to-zero partial from 0


@dataclass(frozen=True)
class WeightCertificate:
    """A certified exponential weight: construction parameters plus report.

    ``refinement_report`` re-checks the same weight on the nested grid of
    doubled resolution (2r - 1).  A near-minimal rate certifies its own grid
    by construction but can sit below the finer grid's threshold; that
    outcome is recorded here rather than hidden.
    """

    axis: int
    sign_case: str
    shift: float
    lam: float
    weight: WeightFunction
    report: ConditionReport
    sign_margin: float
    refinement_report: ConditionReport | None = None

    @property
    def resolution_robust(self) -> bool:
        return self.refinement_report is not None and self.refinement_report.certified


def index_sign_ranges(field: CoefficientField, grid: SampleGrid, consts=None):
    """Grid range of every off-index partial: {(axis, entry): (min, max)}."""
    n = field.dim
    pts = grid.points
    da = field.diag_partial_values(pts, consts)
    ranges = {}
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            if i == j:
                continue
            vals = da[:, i - 1, j - 1]
            ranges[(j, i)] = (float(np.min(vals)), float(np.max(vals)))
    return ranges


def detect_index(field: CoefficientField, grid: SampleGrid, consts=None):
    """All admissible (axis, sign) pairs, ordered by axis then sign.

    The axis's own partial along itself is deliberately not tested.  For a
    one-dimensional field the hypothesis is vacuous and both sign cases are
    admissible with an infinite margin sentinel.
    """
    n = field.dim
    if n == 1:
        return [
            AdmissibleIndex(1, sign, float("inf")) for sign in _SIGN_ORDER
        ]
    ranges = index_sign_ranges(field, grid, consts)
    found = []
    for j in range(1, n + 1):
        lows = [ranges[(j, i)][0] for i in range(1, n + 1) if i != j]
        highs = [ranges[(j, i)][1] for i in range(1, n + 1) if i != j]
        if max(highs) < 0.0:
            found.append(AdmissibleIndex(j, SIGN_NEGATIVE, -max(highs)))
        if min(lows) > 0.0:
            found.append(AdmissibleIndex(j, SIGN_POSITIVE, min(lows)))
    return found


def compute_shift(grid: SampleGrid, axis: int, sign_case: str) -> float:
    """Smallest grid-feasible shift for the given axis and sign case.

    Negative case: ``1 + max sum_{i != axis} |x_i| - min x_axis``; positive
    case is the mirror with ``+ max x_axis`` (see the module note).
    """
    pts = grid.points
    j = axis - 1
    others = np.delete(np.abs(pts), j, axis=1)
    abs_sum_max = float(np.max(others.sum(axis=1))) if others.shape[1] else 0.0
    if sign_case == SIGN_NEGATIVE:
        return 1.0 + abs_sum_max - float(np.min(pts[:, j]))
    if sign_case == SIGN_POSITIVE:
        return 1.0 + abs_sum_max + float(np.max(pts[:, j]))
    raise ValueError(f"unknown sign case {sign_case!r}")


def construct_weight(
    axis: int, sign_case: str, shift: float, lam: float, dim: int
) -> WeightFunction:
    """The explicit exponential weight for one case, with exact derivatives.

    In the negative case every first and second partial is positive; in the
    positive case first partials are negative and second partials positive.
    """
    if lam <= 0.0:
        raise ValueError("rate must be positive")
    if not 1 <= axis <= dim:
        raise ValueError(f"axis {axis} out of range for dimension {dim}")
    rate = Num(float(lam))
    shift_lit = Num(float(shift))
    if sign_case == SIGN_NEGATIVE:
        terms = [Call("exp", BinOp("*", rate, BinOp("+", shift_lit, Var(axis))))]
        terms += [
            Call("exp", BinOp("*", rate, Var(i)))
            for i in range(1, dim + 1)
            if i != axis
        ]
    elif sign_case == SIGN_POSITIVE:
        terms = [
            Call("exp", Neg(BinOp("*", rate, BinOp("-", Var(axis), shift_lit))))
        ]
        terms += [
            Call("exp", Neg(BinOp("*", rate, Var(i))))
            for i in range(1, dim + 1)
            if i != axis
        ]
    else:
        raise ValueError(f"unknown sign case {sign_case!r}")
    expr = terms[0]
    for t in terms[1:]:
        expr = BinOp("+", expr, t)
    return weight_function(expr, dim)


def _measured_sign_margin(field, grid, axis, sign_case, consts):
    if field.dim == 1:
        return float("inf")
    ranges = index_sign_ranges(field, grid, consts)
    lows = [ranges[(axis, i)][0] for i in range(1, field.dim + 1) if i != axis]
    highs = [ranges[(axis, i)][1] for i in range(1, field.dim + 1) if i != axis]
    if sign_case == SIGN_NEGATIVE:
        return -max(highs)
    return min(lows)


def find_lambda(
    field: CoefficientField,
    region: Region,
    axis: int,
    sign_case: str,
    shift: float | None = None,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    target_margin: float = 0.0,
    resolution: int = DEFAULT_RESOLUTION,
    consts=None,
    threads: int = 1,
) -> WeightCertificate:
    """Search the exponential rate by doubling, then sharpen by bisection.

    Doubles ``lambda`` through 1, 2, 4, ... until the condition certifies
    with margin at least ``target_margin * alpha_min``, then runs ten
    bisection rounds between the last failing and first passing rate and
    returns a certificate at the near-minimal passing rate found.  The
    certificate also carries a re-check of that weight at doubled grid
    resolution (see :class:`WeightCertificate.refinement_report`).

    Raises :class:`LambdaMaxExceededError` (best failing report attached)
    when the budget runs out, and :class:`WeightOverflowError` when the
    weight's exponentials leave double range first; translating the domain
    toward the origin shrinks the exponent range in the latter case.
    """
    if lambda_max < 1:
        raise ValueError("lambda_max must be >= 1")
    grid = sample(region, resolution, consts)
    if shift is None:
        shift = compute_shift(grid, axis, sign_case)

    def attempt(lam):
        weight = construct_weight(axis, sign_case, shift, lam, field.dim)
        report = check_condition(
            field, weight, region, resolution, consts=consts, threads=threads
        )
        passed = report.certified and report.margin >= target_margin * report.alpha_min
        return weight, report, passed

    best_fail = (None, None)  # (lambda, report) with the largest margin seen
    lam = 1.0
    lam_fail = None
    while True:
        try:
            weight, report, passed = attempt(lam)
        except ExpOverflowError as exc:
            raise WeightOverflowError(
                f"weight exponential exceeded 1e300 at lambda={lam:g}; "
                "translate the domain toward the origin and retry",
                best_report=best_fail[1],
                best_lambda=best_fail[0],
            ) from exc
        if passed:
            break
        if best_fail[1] is None or (
            report.margin is not None
            and (best_fail[1].margin is None or report.margin > best_fail[1].margin)
        ):
            best_fail = (lam, report)
        lam_fail = lam
        lam *= 2.0
        if lam > lambda_max:
            raise LambdaMaxExceededError(
                "lambda_max exceeded",
                best_report=best_fail[1],
                best_lambda=best_fail[0],
            )

    lam_pass, weight_pass, report_pass = lam, weight, report
    if lam_fail is not None:
        lo, hi = lam_fail, lam_pass
        for _ in range(_BISECTION_ROUNDS):
            mid = 0.5 * (lo + hi)
            weight_mid, report_mid, passed = attempt(mid)
            if passed:
                hi, weight_pass, report_pass = mid, weight_mid, report_mid
            else:
                lo = mid
        lam_pass = hi

    refinement = check_condition(
        field,
        weight_pass,
        region,
        2 * resolution - 1,
        consts=consts,
        threads=threads,
    )

    return WeightCertificate(
        axis=axis,
        sign_case=sign_case,
        shift=float(shift),
        lam=float(lam_pass),
        weight=weight_pass,
        report=report_pass,
        sign_margin=_measured_sign_margin(field, grid, axis, sign_case, consts),
        refinement_report=refinement,
    )


# ---------------------------------------------------------------------------
# proof asymptotics


def scaled_multiplier_matrix(
    field: CoefficientField,
    weight: WeightFunction,
    axis: int,
    sign_case: str,
    point,
    consts=None,
) -> np.ndarray:
    """Row-normalized multiplier matrix whose large-rate limit is explicit.

    Rows other than ``axis`` are divided by the weight's first partial along
    the axis (negated in the positive case so the scaling stays positive);
    the axis row is divided by the axis second partial.  Exponential weights
    make both divisors nonvanishing.
    """
    pts = np.asarray(point, dtype=float)
    batched = pts.ndim == 2
    mats = multiplier_matrix_diagonal(field, weight, pts, consts)
    if not batched:
        mats = mats[None, :, :]
        pts2 = pts[None, :]
    else:
        pts2 = pts
    grad = weight.grad_values(pts2, consts)
    hess = weight.hess_values(pts2, consts)
    j = axis - 1
    dj = grad[:, j]
    if sign_case == SIGN_POSITIVE:
        dj = -dj
    djj = hess[:, j, j]
    scale = np.repeat(dj[:, None], field.dim, axis=1)
    scale[:, j] = djj
    out = mats / scale[:, :, None]
    return out if batched else out[0]


def limit_matrix(
    field: CoefficientField, axis: int, sign_case: str, point, consts=None
) -> np.ndarray:
    """Explicit limit of the row-scaled matrix as the rate goes to infinity.

    Nonzeros sit on the diagonal and in column ``axis``: with ``s = -1`` for
    the negative case and ``s = +1`` for the positive case,

    * entry (axis, axis) is ``(a^axis)^2``,
    * entry (i, i), i != axis, is ``s/2 * a^axis * da^i/dx_axis``,
    * entry (i, axis), i != axis, is ``-s/2 * a^i * da^axis/dx_i``.
    """
    pts = np.asarray(point, dtype=float)
    batched = pts.ndim == 2
    pts2 = pts if batched else pts[None, :]
    a = field.diag_values(pts2, consts)
    da = field.diag_partial_values(pts2, consts)
    m, n = a.shape
    j = axis - 1
    if sign_case == SIGN_NEGATIVE:
        s = -1.0
    elif sign_case == SIGN_POSITIVE:
        s = 1.0
    else:
        raise ValueError(f"unknown sign case {sign_case!r}")
    out = np.zeros((m, n, n))
    for i in range(n):
        if i == j:
            out[:, j, j] = a[:, j] ** 2
        else:
            out[:, i, i] = 0.5 * s * a[:, j] * da[:, i, j]
            out[:, i, j] = -0.5 * s * a[:, i] * da[:, j, i]
    return out if batched else out[0]


def scaled_limit_distance(
    field: CoefficientField,
    axis: int,
    sign_case: str,
    shift: float,
    lam: float,
    points,
    consts=None,
) -> float:
    """Sup over points of the entrywise gap between scaled matrix and limit."""
    weight = construct_weight(axis, sign_case, shift, lam, field.dim)
    scaled = scaled_multiplier_matrix(field, weight, axis, sign_case, points, consts)
    limit = limit_matrix(field, axis, sign_case, points, consts)
    return float(np.max(np.abs(scaled - limit)))


def derivative_ratio_maxima(
    weight: WeightFunction, axis: int, points, consts=None
) -> tuple:
    """Grid maxima of the three ratio families the large-rate analysis kills.

    Returns ``(max |d_i / d_jj| over all i, max |d_i / d_j| over i != j,
    max |d_ii / d_j| over i != j)`` with j the given axis.
    """
    pts = np.asarray(points, dtype=float)
    grad = weight.grad_values(pts, consts)
    hess = weight.hess_values(pts, consts)
    j = axis - 1
    dj = grad[:, j]
    djj = hess[:, j, j]
    fam1 = float(np.max(np.abs(grad / djj[:, None])))
    others = [i for i in range(weight.dim) if i != j]
    if not others:  # one-dimensional: the off-axis families are empty
        return fam1, 0.0, 0.0
    fam2 = float(np.max(np.abs(grad[:, others] / dj[:, None])))
    diag2 = np.stack([hess[:, i, i] for i in others], axis=1)
    fam3 = float(np.max(np.abs(diag2 / dj[:, None])))
    return fam1, fam2, fam3


def pick_index(candidates, force_axis=None):
    """Choose the admissible pair with the largest margin (earliest on ties).

    With ``force_axis``, the first candidate on that axis is returned.  None
    means nothing qualifies; callers holding the grid report the measured
    sign ranges alongside that outcome.
    """
    if force_axis is not None:
        for cand in candidates:
            if cand.axis == force_axis:
                return cand
        return None
    best = None
    for cand in candidates:
        if best is None or cand.sign_margin > best.sign_margin:
            best = cand
    return best
