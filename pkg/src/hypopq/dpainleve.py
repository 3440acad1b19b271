"""Nonlinear difference recursion for the Painleve variables (x_n, y_n).

The pair of first-order relations below propagates (x_n, y_n) without ever
touching a moment determinant, which makes it both the fast path and the
thing most worth double-checking:

  * first kind:  a quadratic factor times its shift equals a fixed quartic
    in x_n, solved here for y_{n+1};
  * second kind: a rational map giving x_m from (x_{m-1}, y_m).

Seeds are x_0 = m_1/m_0 - ((alpha+beta)c - gamma)/(1-c), y_0 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParam, PrecisionExhausted, SingularStep
from .oracle import XYSeq
from .reporting import ResidualReport, normalized_residual
from .weights import Lattice, initial_xy, shifted_params

_MONITOR_EVERY = 10
_MONITOR_THRESHOLD = "1e-6"


@dataclass(frozen=True)
class DPState:
    n: int
    x: object
    y: object


def dp1_step(params, n: int, x_n, y_n, ctx):
    """Advance the first-kind relation: returns y_{n+1} given (x_n, y_n).

    The left side factors as P * (P + x_n), P = y_n - alpha*beta
    + (alpha+beta+n) x_n - x_n^2; when |P| underflows relative to the
    quartic right side the division is refused with SingularStep.
    """
    mp = ctx.mp
    a, bta, g, c = params.as_reals(ctx)
    x_n = ctx.real(x_n)
    y_n = ctx.real(y_n)
    P = y_n - a * bta + (a + bta + n) * x_n - x_n * x_n
    rhs = (x_n - 1) * (x_n - a) * (x_n - bta) * (x_n - g) / c
    eps = mp.ldexp(1, -(ctx.bits - ctx.guard_bits))
    if abs(P) <= eps * abs(rhs):
        msg = f"first-kind factor vanished at n={n}"
        if params.is_meixner:
            msg += (
                "; alpha == gamma or beta == gamma pins x_n at gamma, "
                "making both sides identically zero (closed form applies)"
            )
        raise SingularStep(msg, index=n, which="P")
    return rhs / P - (-a * bta + (a + bta + n + 1) * x_n - x_n * x_n)


def dp2_step(params, m: int, x_prev, y_m, ctx):
    """Advance the second-kind relation: returns x_m given (x_{m-1}, y_m).

    Two denominators can vanish: the linearizing factor D and the shifted
    unknown x_{m-1} + Y_m.  Each raises SingularStep with ``which`` naming
    the culprit.
    """
    if m < 1:
        raise InvalidParam("second-kind step needs m >= 1")
    mp = ctx.mp
    a, bta, g, c = params.as_reals(ctx)
    x_prev = ctx.real(x_prev)
    y = ctx.real(y_m)
    eps = mp.ldexp(1, -(ctx.bits - ctx.guard_bits))
    mm = m + a + bta - g - 1
    D = y * (m + mm) + m * ((m + a + bta) * mm - a * bta + g)
    numY = y * y + y * (m * mm - a * bta + g) - a * bta * m * mm
    if abs(D) <= eps * max(mp.mpf(1), abs(numY)):
        raise SingularStep(
            f"linearizing denominator vanished at m={m}", index=m, which="D"
        )
    Y = numY / D
    quart = (
        (y + m * a)
        * (y + m * bta)
        * (y + m * g - (g - a) * (g - bta))
        * (y + m - (1 - a) * (1 - bta))
    )
    rhs = quart / (D * D)
    den = x_prev + Y
    if abs(den) <= eps * max(mp.mpf(1), abs(rhs)):
        raise SingularStep(
            f"x_prev + Y vanished at m={m}", index=m, which="x_prev+Y"
        )
    return rhs / den - Y


def _second_kind_parts(params, m, y_m, ctx):
    """(Y_m, rhs) of the second-kind relation, for residual checks."""
    mp = ctx.mp
    a, bta, g, c = params.as_reals(ctx)
    y = ctx.real(y_m)
    mm = m + a + bta - g - 1
    D = y * (m + mm) + m * ((m + a + bta) * mm - a * bta + g)
    numY = y * y + y * (m * mm - a * bta + g) - a * bta * m * mm
    Y = numY / D
    quart = (
        (y + m * a)
        * (y + m * bta)
        * (y + m * g - (g - a) * (g - bta))
        * (y + m - (1 - a) * (1 - bta))
    )
    return Y, quart / (D * D)


def _monitor_residual(mp, a, bta, g, c, x, y, S, m):
    """Max of the five extended residuals at index m (1 <= m < len-1),
    with a2 and b reconstructed from (x, y, S) on the fly.

    The a2-difference relation is identically satisfied under this
    reconstruction (it telescopes), so the signal comes from the other
    four; it is kept for uniformity and costs nothing.
    """
    q = (1 - c) / c

    def a2_at(k):
        return c / (1 - c) * (y[k] + S[k] + mp.mpf(k) * (k + a + bta - g - 1) / (1 - c))

    bm = x[m] + (m + (m + a + bta) * c - g) / (1 - c)
    a2m = a2_at(m)
    a2m1 = a2_at(m + 1)
    res = normalized_residual(
        mp,
        [y[m + 1], y[m]],
        [-q * bm * x[m], a * bta, -g / c, q * S[m + 1]],
    )
    res = max(
        res,
        normalized_residual(
            mp,
            [q * a2m1, -q * a2m],
            [y[m + 1], -y[m], bm, a + bta + m],
        ),
    )
    res = max(
        res,
        normalized_residual(
            mp,
            [q * a2m1 * x[m + 1], -q * a2m * x[m - 1]],
            [-bm * (y[m + 1] - y[m]), a * bta, -y[m]],
        ),
    )
    res = max(
        res,
        normalized_residual(
            mp,
            [q * q * a2m * x[m] * x[m - 1]],
            [y[m] * (y[m] - a * bta + g / c), -(y[m] - a * bta) * q * S[m]],
        ),
    )
    res = max(
        res,
        normalized_residual(
            mp,
            [q * q * a2m * (x[m] + x[m - 1])],
            [
                -y[m] * (m * (1 + c) / c + a + bta - (g + 1) / c),
                (a * bta - g) * m / c,
                (a + bta + m) * q * S[m],
            ],
        ),
    )
    return res


def iterate(params, N: int, ctx, seed=None, strict: bool = False) -> XYSeq:
    """Run the difference recursion to index N.

    Canonical seeds (seed=None) come from the first two moments.  A custom
    seed is a pair (x0, y0).  On a singular step the prefix computed so far
    is returned with ``failure_index`` set (or the SingularStep is raised
    when strict=True).  For canonical runs a consistency monitor evaluates
    the five nonlinear cross-identities every ten steps; the first index
    where any exceeds 1e-6 is recorded as ``precision_suspect_at`` (raised as
    PrecisionExhausted when strict=True).  The monitor is a coarse guard:
    it flags garbage orbits but not the first few corrupted digits.
    """
    if N < 0:
        raise InvalidParam("N must be >= 0")
    mp = ctx.mp

    if params.lattice is Lattice.SHIFTED:
        # Identical recursion on the transformed standard parameters; map
        # back with x -> x + (gamma-1), y -> y - n(gamma-1).
        tparams = shifted_params(params)
        tshift = ctx.real(params.gamma) - 1
        if seed is None:
            inner = iterate(tparams, N, ctx, None, strict)
        else:
            sx, sy = ctx.real(seed[0]), ctx.real(seed[1])
            inner = iterate(tparams, N, ctx, (sx - tshift, sy), strict)
        x = [xi + tshift for xi in inner.x]
        y = [inner.y[n] - n * tshift for n in range(len(inner.y))]
        S = [mp.mpf(0)]
        for xi in x:
            S.append(S[-1] + xi)
        return XYSeq(
            params=params,
            x=x,
            y=y,
            S=S,
            ctx=ctx,
            failure_index=inner.failure_index,
            precision_suspect_at=inner.precision_suspect_at,
        )

    canonical = seed is None
    if canonical and params.is_meixner:
        # The orbit is a fixed point of the first-kind quartic: x_n = gamma,
        # y_n = -n*gamma, exactly.  The generic step would divide 0/0 here.
        gv = ctx.real(params.gamma)
        x = [gv] * (N + 1)
        y = [-mp.mpf(n) * gv for n in range(N + 1)]
        S = [mp.mpf(0)]
        for xi in x:
            S.append(S[-1] + xi)
        return XYSeq(params=params, x=x, y=y, S=S, ctx=ctx)

    if canonical:
        x0, y0 = initial_xy(params, ctx)
    else:
        x0, y0 = ctx.real(seed[0]), ctx.real(seed[1])

    a, bta, g, c = params.as_reals(ctx)
    threshold = mp.mpf(_MONITOR_THRESHOLD)
    x = [x0]
    y = [y0]
    S = [mp.mpf(0), x0]
    failure = None
    suspect = None
    for n in range(N):
        try:
            y1 = dp1_step(params, n, x[n], y[n], ctx)
            x1 = dp2_step(params, n + 1, x[n], y1, ctx)
        except SingularStep:
            if strict:
                raise
            failure = n
            break
        x.append(x1)
        y.append(y1)
        S.append(S[-1] + x1)
        j = n + 1
        if canonical and suspect is None and j >= 2 and j % _MONITOR_EVERY == 0:
            if _monitor_residual(mp, a, bta, g, c, x, y, S, j - 1) > threshold:
                suspect = j - 1
                if strict:
                    raise PrecisionExhausted(
                        f"consistency monitor tripped at n={suspect}: "
                        f"the orbit no longer satisfies the cross-identities "
                        f"at {ctx.bits} bits"
                    )
    return XYSeq(
        params=params,
        x=x,
        y=y,
        S=S,
        ctx=ctx,
        failure_index=failure,
        precision_suspect_at=suspect,
    )


def dp_residuals(params, xy: XYSeq, coeffs=None, ctx=None) -> ResidualReport:
    """Residuals of both difference relations along a computed orbit.

    Base entries "dp1" and "dp2" need only (x, y).  Passing the matching
    CoeffSeq adds five cross-identities tying (x, y, S) to (a2, b).  All
    residuals are normalized by the largest additive term.  The relations
    take the same parameter form on both lattices, so no transform is
    applied here.
    """
    if ctx is None:
        ctx = xy.ctx
    mp = ctx.mp
    a, bta, g, c = params.as_reals(ctx)
    q = (1 - c) / c
    rep = ResidualReport(params=params, ctx=ctx)
    N = xy.N
    x, y, S = xy.x, xy.y, xy.S

    for n in range(N):
        P = y[n] - a * bta + (a + bta + n) * x[n] - x[n] * x[n]
        Q = y[n + 1] - a * bta + (a + bta + n + 1) * x[n] - x[n] * x[n]
        rhs = (x[n] - 1) * (x[n] - a) * (x[n] - bta) * (x[n] - g) / c
        rep.add("dp1", n, normalized_residual(mp, [P * Q], [rhs]))
    for m in range(1, N + 1):
        try:
            Y, rhs = _second_kind_parts(params, m, y[m], ctx)
            rep.add(
                "dp2",
                m,
                normalized_residual(mp, [(x[m] + Y) * (x[m - 1] + Y)], [rhs]),
            )
        except ZeroDivisionError:
            rep.add("dp2", m, mp.inf)

    if coeffs is None:
        return rep
    a2, b = coeffs.a2, coeffs.b
    NN = min(N, coeffs.N)
    for n in range(NN):
        rep.add(
            "y_pair_sum",
            n,
            normalized_residual(
                mp,
                [y[n + 1], y[n]],
                [-q * b[n] * x[n], a * bta, -g / c, q * S[n + 1]],
            ),
        )
        rep.add(
            "a2_difference",
            n,
            normalized_residual(
                mp,
                [q * a2[n + 1], -q * a2[n]],
                [y[n + 1], -y[n], b[n], a + bta + n],
            ),
        )
    for n in range(1, NN):
        rep.add(
            "a2x_difference",
            n,
            normalized_residual(
                mp,
                [q * a2[n + 1] * x[n + 1], -q * a2[n] * x[n - 1]],
                [-b[n] * (y[n + 1] - y[n]), a * bta, -y[n]],
            ),
        )
    for n in range(1, NN + 1):
        rep.add(
            "a2_x_product",
            n,
            normalized_residual(
                mp,
                [q * q * a2[n] * x[n] * x[n - 1]],
                [y[n] * (y[n] - a * bta + g / c), -(y[n] - a * bta) * q * S[n]],
            ),
        )
        rep.add(
            "a2_x_sum",
            n,
            normalized_residual(
                mp,
                [q * q * a2[n] * (x[n] + x[n - 1])],
                [
                    -y[n] * (n * (1 + c) / c + a + bta - (g + 1) / c),
                    (a * bta - g) * n / c,
                    (a + bta + n) * q * S[n],
                ],
            ),
        )
    return rep
