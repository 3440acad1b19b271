"""Large-n behavior: limit gaps, seed sensitivity, and precision studies.

The conjectured picture for the canonical orbit is x_n -> gamma and
y_n + n*gamma -> (gamma-alpha)(gamma-beta) on the standard lattice
(x_n -> 1 and y_n + n -> (1-alpha)(1-beta) on the shifted one).  Reaching
it numerically is the interesting part: the recursion amplifies both seed
errors and roundoff, so every report here carries a divergence index.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dpainleve import iterate
from .errors import InvalidParam, PrecisionExhausted
from .numerics import PrecisionCtx, bits_for_digits
from .weights import Lattice

_MAX_ESCALATIONS = 3


@dataclass(frozen=True)
class StudyReport:
    """Outcome of one run: how close to the conjectured limits it got."""

    params: object
    bits: int
    N: int
    x_limit_gap: object
    y_limit_gap: object
    divergence_index: int | None = None
    notes: str = ""
    digits: int | None = None


def _targets(params, ctx):
    """(x-limit, limit of y_n + n * x-limit) for the lattice at hand."""
    a, bta, g, _ = params.as_reals(ctx)
    if params.lattice is Lattice.SHIFTED:
        one = ctx.mp.mpf(1)
        return one, (1 - a) * (1 - bta)
    return g, (g - a) * (g - bta)


def limit_report(params, N: int, ctx) -> StudyReport:
    """Gaps to the conjectured limits at index N, canonical seed.

    If the run fails a singular step or trips the consistency monitor, the
    precision is doubled (at most three times) and the run repeated; a run
    still unhealthy after that raises PrecisionExhausted.
    """
    if N < 1:
        raise InvalidParam("N must be >= 1")
    cur = ctx
    notes = []
    xy = None
    for attempt in range(_MAX_ESCALATIONS + 1):
        xy = iterate(params, N, cur)
        if xy.failure_index is None and xy.precision_suspect_at is None:
            break
        if attempt == _MAX_ESCALATIONS:
            raise PrecisionExhausted(
                f"run unhealthy up to {cur.bits} bits "
                f"(failure_index={xy.failure_index}, "
                f"suspect={xy.precision_suspect_at}); N={N} needs more"
            )
        notes.append(
            f"unhealthy at {cur.bits} bits "
            f"(failure_index={xy.failure_index}, suspect={xy.precision_suspect_at}); doubling"
        )
        cur = cur.with_bits(cur.bits * 2)
    tx, ty = _targets(params, cur)
    return StudyReport(
        params=params,
        bits=cur.bits,
        N=N,
        x_limit_gap=abs(xy.x[N] - tx),
        y_limit_gap=abs(xy.y[N] + N * tx - ty),
        notes="; ".join(notes),
    )


def perturbation_study(params, deltas, N: int, ctx, seed_x0=None) -> list:
    """One report per delta: seed (x0_base + delta, 0) against the baseline.

    x0_base is the canonical seed unless ``seed_x0`` overrides it.  The
    divergence index is the first n where the perturbed orbit's distance to
    the x-limit exceeds ten times the baseline's; a singular step before
    visible divergence is reported at its own index in ``notes``.
    """
    if N < 1:
        raise InvalidParam("N must be >= 1")
    mp = ctx.mp
    if seed_x0 is None:
        base = iterate(params, N, ctx)
    else:
        base = iterate(params, N, ctx, seed=(ctx.real(seed_x0), mp.mpf(0)))
    if base.failure_index is not None:
        raise PrecisionExhausted(
            f"baseline run hit a singular step at n={base.failure_index}; raise bits"
        )
    tx, ty = _targets(params, ctx)
    base_gap = [abs(xv - tx) for xv in base.x]
    x0 = base.x[0]
    reports = []
    for delta in deltas:
        dr = ctx.real(delta)
        xy = iterate(params, N, ctx, seed=(x0 + dr, mp.mpf(0)))
        div = None
        for n in range(len(xy.x)):
            if abs(xy.x[n] - tx) > 10 * base_gap[n]:
                div = n
                break
        notes = ""
        if xy.failure_index is not None:
            if div is None:
                div = xy.failure_index
            notes = f"singular step at n={xy.failure_index}"
        last = len(xy.x) - 1
        reports.append(
            StudyReport(
                params=params,
                bits=ctx.bits,
                N=last,
                x_limit_gap=abs(xy.x[last] - tx),
                y_limit_gap=abs(xy.y[last] + last * tx - ty),
                divergence_index=div,
                notes=notes,
            )
        )
    return reports


def precision_study(params, digit_levels, N: int) -> list:
    """Re-run the recursion at several decimal-digit levels against one
    high-precision reference; report where each level falls off.

    The reference runs at four times the largest requested digit level.
    The divergence index of a level is the first n where its x_n or y_n
    deviates from the reference by more than 1e-3 relative (comparisons are
    done after exact injection into the reference context, so the study
    measures the runs, not the comparison).
    """
    levels = list(digit_levels)
    if not levels:
        raise InvalidParam("need at least one digit level")
    if any(d < 1 for d in levels):
        raise InvalidParam("digit levels must be positive")
    if N < 1:
        raise InvalidParam("N must be >= 1")
    ref_ctx = PrecisionCtx(bits=max(24, bits_for_digits(4 * max(levels))))
    ref = iterate(params, N, ref_ctx)
    if ref.failure_index is not None or ref.precision_suspect_at is not None:
        raise PrecisionExhausted(
            f"reference run at {ref_ctx.bits} bits is itself unhealthy "
            f"(failure_index={ref.failure_index}, suspect={ref.precision_suspect_at})"
        )
    mpr = ref_ctx.mp
    tol = mpr.mpf("1e-3")
    tx, ty = _targets(params, ref_ctx)
    reports = []
    for d in levels:
        bits = max(24, bits_for_digits(d))
        run_ctx = PrecisionCtx(bits=bits)
        xy = iterate(params, N, run_ctx)
        div = None
        for n in range(len(xy.x)):
            rx = abs(ref_ctx.real(xy.x[n]) - ref.x[n]) / abs(ref.x[n])
            dy = abs(ref_ctx.real(xy.y[n]) - ref.y[n])
            ry = dy / abs(ref.y[n]) if ref.y[n] != 0 else (mpr.mpf(0) if dy == 0 else mpr.inf)
            if rx > tol or ry > tol:
                div = n
                break
        notes = ""
        if xy.failure_index is not None:
            if div is None:
                div = xy.failure_index
            notes = f"singular step at n={xy.failure_index}"
        last = len(xy.x) - 1
        reports.append(
            StudyReport(
                params=params,
                bits=bits,
                N=last,
                x_limit_gap=abs(ref_ctx.real(xy.x[last]) - tx),
                y_limit_gap=abs(ref_ctx.real(xy.y[last]) + last * tx - ty),
                divergence_index=div,
                notes=notes,
                digits=d,
            )
        )
    return reports
