"""Cohort statistics: log-log regression of complexity on age, Pearson
correlation with two-sided t-test p-values, and Benjamini-Hochberg FDR
adjustment across scales.

Logs are natural (base e) throughout; Pearson r and p are base-invariant,
slopes and intercepts are not, so report renderers state the base. The
regression treats log age as the predictor and log complexity as the
response, i.e. slope = d(ln C)/d(ln age). p-values below 1e-300 are
clamped and rendered as "<1e-300".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import betainc

from .complexity import ComplexityProfile, ScaleSchedule
from .errors import StatsError
from .npy_io import Manifest

P_CLAMP = 1e-300


class OutOfRangeError(StatsError):
    """A p-value outside [0, 1]."""


class DegenerateVarianceError(StatsError):
    """Zero variance in x or y makes r undefined."""


class TooFewPointsError(StatsError):
    """Fewer than 3 points."""


class UnknownSubjectError(StatsError):
    """A profile's subject_id is missing from the manifest."""


class EmptyAfterFilteringError(StatsError):
    """No usable (complexity, age) pairs remain at this scale."""


@dataclass(frozen=True)
class CorrelationRow:
    scale_index: int
    scale_factor: int
    n: int
    r: float
    p: float
    q_fdr: float
    slope: float
    intercept: float


class RegressionResult(NamedTuple):
    r: float
    slope: float
    intercept: float
    p: float


def log_log_pairs(
    profiles: Sequence[ComplexityProfile],
    ages: Manifest,
    scale_index: int,
) -> list[tuple[float, float]]:
    """(ln C, ln age) pairs at one scale, in manifest order.

    Subjects whose complexity is zero at this scale are excluded (their log
    is undefined); callers can count exclusions as cohort size minus the
    returned length.
    """
    age_of = ages.ages_by_subject()
    by_subject = {}
    for prof in profiles:
        if prof.subject_id not in age_of:
            raise UnknownSubjectError(f"subject {prof.subject_id!r} not in manifest")
        by_subject[prof.subject_id] = prof
    pairs: list[tuple[float, float]] = []
    for entry in ages:
        prof = by_subject.get(entry.subject_id)
        if prof is None:
            continue
        scale = prof.entry_for(scale_index)
        if scale is None or scale.complexity <= 0.0:
            continue
        pairs.append((math.log(scale.complexity), math.log(entry.age_years)))
    if not pairs:
        raise EmptyAfterFilteringError(f"no usable subjects at scale {scale_index}")
    return pairs


def pearson_regression(pairs: Sequence[tuple[float, float]]) -> RegressionResult:
    """Least-squares fit of y on x plus the sample Pearson coefficient.

    The two-sided p-value comes from t = r*sqrt((n-2)/(1-r^2)) under the
    t-distribution with n-2 degrees of freedom, evaluated through the
    regularized incomplete beta function.
    """
    n = len(pairs)
    if n < 3:
        raise TooFewPointsError(f"need at least 3 points, got {n}")
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    xm = float(xs.mean())
    ym = float(ys.mean())
    dx = xs - xm
    dy = ys - ym
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    sxy = float(np.dot(dx, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVarianceError("x or y values are all equal")
    slope = sxy / sxx
    intercept = ym - slope * xm
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        # two-sided tail of the t-distribution: I_{df/(df+t^2)}(df/2, 1/2)
        t_sq = r * r * df / (1.0 - r * r)
        p = float(betainc(df / 2.0, 0.5, df / (df + t_sq)))
    return RegressionResult(r=r, slope=slope, intercept=intercept, p=max(p, P_CLAMP))


def benjamini_hochberg(p_values: Sequence[float]) -> list[float]:
    """Step-up FDR q-values: q_(i) = min_{j >= i} p_(j) * m / j, capped at 1."""
    for p in p_values:
        if not (0.0 <= p <= 1.0):
            raise OutOfRangeError(f"p-value {p} outside [0, 1]")
    m = len(p_values)
    if m == 0:
        return []
    p_arr = np.asarray(p_values, dtype=np.float64)
    order = np.argsort(p_arr, kind="stable")
    # multiply by m/j (always >= 1.0 exactly) so q_(i) >= p_(i) holds in
    # floating point, not just in exact arithmetic
    scaled = p_arr[order] * (m / np.arange(1, m + 1))
    q_sorted = np.minimum.accumulate(scaled[::-1])[::-1]
    q_sorted = np.minimum(q_sorted, 1.0)
    q = np.empty(m)
    q[order] = q_sorted
    return [float(v) for v in q]


def correlation_table(
    profiles: Sequence[ComplexityProfile],
    manifest: Manifest,
    schedule: ScaleSchedule,
    skip_failures: bool = False,
) -> list[CorrelationRow]:
    """One correlation row per scale, with q-values adjusted jointly across
    all scales of the run.

    With ``skip_failures`` scales that cannot be scored (too few points,
    degenerate variance, nothing left after filtering) are dropped from the
    table, and from the FDR family, instead of raising.
    """
    partial = []
    for k, factor in enumerate(schedule.factors):
        try:
            pairs = log_log_pairs(profiles, manifest, k)
            # regress ln C on ln age: age is the predictor
            fit = pearson_regression([(age, c) for c, age in pairs])
        except StatsError:
            if skip_failures:
                continue
            raise
        partial.append((k, factor, len(pairs), fit))
    qs = benjamini_hochberg([fit.p for _, _, _, fit in partial])
    return [
        CorrelationRow(
            scale_index=k,
            scale_factor=factor,
            n=n,
            r=fit.r,
            p=fit.p,
            q_fdr=q,
            slope=fit.slope,
            intercept=fit.intercept,
        )
        for (k, factor, n, fit), q in zip(partial, qs)
    ]


TABLE_COLUMNS = ("scale_index", "scale_factor", "n", "r", "p", "q_fdr", "slope", "intercept")


def _format_p(p: float) -> str:
    if p <= P_CLAMP:
        return "<1e-300"
    return f"{p:.3e}"


def table_to_csv(rows: Iterable[CorrelationRow]) -> str:
    lines = [",".join(TABLE_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                [
                    str(row.scale_index),
                    str(row.scale_factor),
                    str(row.n),
                    repr(row.r),
                    repr(row.p),
                    repr(row.q_fdr),
                    repr(row.slope),
                    repr(row.intercept),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def table_to_text(rows: Iterable[CorrelationRow]) -> str:
    """Aligned plain-text report (scale, r, p, q, slope, intercept columns)."""
    header = ["scale", "factor", "n", "r", "p", "q_fdr", "slope", "intercept"]
    body = [
        [
            str(row.scale_index),
            f"x{row.scale_factor}",
            str(row.n),
            f"{row.r:+.3f}",
            _format_p(row.p),
            _format_p(row.q_fdr),
            f"{row.slope:+.3f}",
            f"{row.intercept:+.3f}",
        ]
        for row in rows
    ]
    widths = [max(len(col[i]) for col in [header] + body) for i in range(len(header))]
    lines = ["# log base: natural (ln); slope = d(ln C)/d(ln age)"]
    for cells in [header] + body:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"
