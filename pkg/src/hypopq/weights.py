"""The hypergeometric weight family, its moments, and parameter transforms.

Weights ``w_k = (alpha)_k (beta)_k / ((gamma)_k k!) * c**k`` on the lattice
``k = 0, 1, 2, ...`` for ``alpha, beta, gamma > 0`` and ``0 < c < 1``.  The
shifted lattice ``k + 1 - gamma`` is always routed through the exact
parameter transform (:func:`shifted_params`); no Gamma-function evaluation
and no non-integer lattice summation happens anywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath.libmp import (
    fone,
    fzero,
    from_int,
    from_rational,
    mpf_abs,
    mpf_add,
    mpf_div,
    mpf_le,
    mpf_mul,
    mpf_mul_int,
    mpf_pos,
    from_man_exp,
    round_nearest,
)

from .errors import DomainExceeded, InvalidParam, NonConvergent, PoleHit
from .numerics import PrecisionCtx, sum_series

_RND = round_nearest


class Lattice(enum.Enum):
    STANDARD = "standard"
    SHIFTED = "shifted"

    @classmethod
    def parse(cls, text):
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise InvalidParam(f"unknown lattice {text!r} (standard|shifted)") from None


def _rational(value, name):
    """Exact rational from int/Fraction/str.  Floats are rejected: binary
    floats would smuggle representation error into the exact contract."""
    if isinstance(value, bool):
        raise InvalidParam(f"{name} must be a rational number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InvalidParam(f"{name}={value!r} is not a rational") from None
    if isinstance(value, float):
        raise InvalidParam(
            f"{name} given as float; pass a string or Fraction to keep inputs exact"
        )
    raise InvalidParam(f"{name} must be a rational number")


@dataclass(frozen=True)
class Params:
    """One orthogonality measure: weight parameters plus lattice choice.

    All four numeric fields are exact :class:`fractions.Fraction` values;
    admissibility (``alpha, beta, gamma > 0``, ``0 < c < 1``, and for the
    shifted lattice positivity of the transformed parameters) is enforced at
    construction.  Swapping ``alpha`` and ``beta`` yields an equivalent
    measure: every derived sequence is invariant under the swap.
    """

    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    c: Fraction
    lattice: Lattice = Lattice.STANDARD

    def __post_init__(self):
        object.__setattr__(self, "alpha", _rational(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _rational(self.beta, "beta"))
        object.__setattr__(self, "gamma", _rational(self.gamma, "gamma"))
        object.__setattr__(self, "c", _rational(self.c, "c"))
        if not isinstance(self.lattice, Lattice):
            object.__setattr__(self, "lattice", Lattice.parse(self.lattice))
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) <= 0:
                raise InvalidParam(f"{name} must be positive")
        if not (0 < self.c < 1):
            raise InvalidParam("c must lie in (0, 1)")
        if self.lattice is Lattice.SHIFTED:
            for name, val in (
                ("alpha - gamma + 1", self.alpha - self.gamma + 1),
                ("beta - gamma + 1", self.beta - self.gamma + 1),
                ("2 - gamma", 2 - self.gamma),
            ):
                if val <= 0:
                    raise InvalidParam(
                        f"shifted lattice requires {name} > 0 (got {val})"
                    )

    @property
    def is_meixner(self):
        """True when the weight degenerates to a Meixner weight."""
        return self.alpha == self.gamma or self.beta == self.gamma

    def swapped(self):
        """The equivalent measure with alpha and beta exchanged."""
        return Params(self.beta, self.alpha, self.gamma, self.c, self.lattice)

    def as_reals(self, ctx):
        """(alpha, beta, gamma, c) as BigReals of ``ctx``."""
        return (
            ctx.real(self.alpha),
            ctx.real(self.beta),
            ctx.real(self.gamma),
            ctx.real(self.c),
        )

    def key(self):
        return (self.alpha, self.beta, self.gamma, self.c, self.lattice)


def _require_standard(params, what):
    if params.lattice is not Lattice.STANDARD:
        raise InvalidParam(
            f"{what} uses standard-lattice semantics; apply shifted_params() "
            "and the caller-side shift for the shifted lattice"
        )


def shifted_params(params):
    """Standard-lattice parameters equivalent to the shifted-lattice measure.

    Returns ``(alpha - gamma + 1, beta - gamma + 1, 2 - gamma, c)`` on the
    standard lattice.  The recurrence coefficients transform as
    ``a_n^2 -> a_n^2`` and ``b_n -> b_n + 1 - gamma``; seeds pick up
    ``+ gamma - 1``.  Raises ``InvalidParam`` when a transformed parameter
    is not positive.
    """
    return Params(
        params.alpha - params.gamma + 1,
        params.beta - params.gamma + 1,
        2 - params.gamma,
        params.c,
        Lattice.STANDARD,
    )


def weight_sequence(params, kmax, ctx):
    """Weights ``w_0 .. w_kmax`` via the ratio recurrence
    ``w_{k+1} = w_k (alpha+k)(beta+k) c / ((gamma+k)(k+1))``, ``w_0 = 1``.
    """
    _require_standard(params, "weight_sequence")
    if kmax < 0:
        raise InvalidParam("kmax must be >= 0")
    mp = ctx.mp
    a, b, g, c = params.as_reals(ctx)
    out = [mp.mpf(1)]
    for k in range(kmax):
        out.append(out[k] * (a + k) * (b + k) * c / ((g + k) * (k + 1)))
    return out


def hyp2f1(a, b, cc, z, ctx):
    """Gauss hypergeometric series ``sum (a)_k (b)_k / ((cc)_k k!) z^k``.

    Terms are updated by their ratio (no factorials, no Gamma).  Requires
    ``0 <= z < 1``; ``cc`` must not be a non-positive integer.
    """
    mp = ctx.mp
    a = ctx.real(a)
    b = ctx.real(b)
    cc = ctx.real(cc)
    z = ctx.real(z)
    if cc <= 0 and cc == mp.floor(cc):
        raise InvalidParam("hyp2f1: third parameter is a non-positive integer")
    if not (0 <= z < 1):
        raise DomainExceeded("hyp2f1: z must satisfy 0 <= z < 1")
    last = [mp.mpf(1)]

    def term(k):
        if k > 0:
            j = k - 1
            last[0] = last[0] * (a + j) * (b + j) * z / ((cc + j) * k)
        return last[0]

    return sum_series(term, ctx)


def _effective_cap(c, ctx):
    """Series term cap; raised deterministically for c close to 1."""
    cap = ctx.series_max_terms
    cf = float(c)
    if cf > 0.9:
        need = math.ceil(1.2 * (ctx.bits + ctx.guard_bits) * math.log(2) / -math.log(cf))
        cap = max(cap, need + 1000)
    return cap


def _moment_batch_raw(params, count, ctx):
    """Moments ``m_0 .. m_{count-1}`` of the standard-lattice weight.

    One pass over the lattice: per k the power ``k^n`` is carried as a
    running product across n, so no big-integer exponentials appear.  Each
    series stops independently under the sum_series rule (three consecutive
    terms below ``2^-(bits+guard)`` of its partial sum).  Uses the raw
    mpmath kernel API: this is the package's hottest loop.
    """
    bits = ctx.bits
    prec = bits + ctx.guard_bits
    a = from_rational(params.alpha.numerator, params.alpha.denominator, prec, _RND)
    b = from_rational(params.beta.numerator, params.beta.denominator, prec, _RND)
    g = from_rational(params.gamma.numerator, params.gamma.denominator, prec, _RND)
    c = from_rational(params.c.numerator, params.c.denominator, prec, _RND)
    eps = from_man_exp(1, -prec)
    cap = _effective_cap(params.c, ctx)

    sums = [fzero] * count
    consec = [0] * count
    done = [False] * count
    ndone = 0
    w = fone
    k = 0
    while ndone < count:
        if k >= cap:
            raise NonConvergent(f"moment series exceeded {cap} terms")
        pw = fone
        for n in range(count):
            if n > 0:
                pw = mpf_mul_int(pw, k, prec, _RND)
            if done[n]:
                continue
            t = mpf_mul(pw, w, prec, _RND)
            s = mpf_add(sums[n], t, prec, _RND)
            sums[n] = s
            if mpf_le(mpf_abs(t), mpf_mul(eps, mpf_abs(s), prec, _RND)):
                consec[n] += 1
                if consec[n] >= 3:
                    done[n] = True
                    ndone += 1
            else:
                consec[n] = 0
        kf = from_int(k)
        num = mpf_mul(
            mpf_mul(mpf_add(a, kf, prec, _RND), mpf_add(b, kf, prec, _RND), prec, _RND),
            c,
            prec,
            _RND,
        )
        den = mpf_mul_int(mpf_add(g, kf, prec, _RND), k + 1, prec, _RND)
        w = mpf_mul(w, mpf_div(num, den, prec, _RND), prec, _RND)
        k += 1
    return [mpf_pos(s, bits, _RND) for s in sums]


def _moment_list(params, count, ctx):
    mp = ctx.mp
    return [mp.make_mpf(raw) for raw in _moment_batch_raw(params, count, ctx)]


def moment(params, n, ctx):
    """The n-th moment ``m_n = sum_k k^n w_k`` by direct series summation."""
    _require_standard(params, "moment")
    if n < 0:
        raise InvalidParam("moment index must be >= 0")
    return _moment_list(params, n + 1, ctx)[n]


@dataclass(frozen=True)
class MomentTable:
    """Immutable table ``m_0 .. m_{2N+1}`` for Hankel work up to index N."""

    params: Params
    moments: list
    ctx: PrecisionCtx = field(repr=False)

    @classmethod
    def build(cls, params, N, ctx):
        _require_standard(params, "MomentTable")
        if N < 0:
            raise InvalidParam("N must be >= 0")
        return cls(params, _moment_list(params, 2 * N + 2, ctx), ctx)

    def __len__(self):
        return len(self.moments)


def potential_u(params, x, ctx):
    """Discrete potential ``u(x) = -1 + (gamma+x-1) x / (c (alpha+x-1)(beta+x-1))``.

    Satisfies ``u(k) = -(w_k - w_{k-1}) / w_k`` on the lattice.  Raises
    ``PoleHit`` when the denominator underflows the context (simple poles at
    ``x = 1 - alpha`` and ``x = 1 - beta``).
    """
    mp = ctx.mp
    a, b, g, c = params.as_reals(ctx)
    x = ctx.real(x)
    num = (g + x - 1) * x
    den = c * (a + x - 1) * (b + x - 1)
    floor = mp.ldexp(1, -(ctx.bits - ctx.guard_bits)) * max(mp.mpf(1), abs(num))
    if abs(den) <= floor:
        raise PoleHit("potential_u evaluated at (or too near) a pole")
    return -1 + num / den


def initial_xy(params, ctx):
    """Seed values ``(x_0, 0)`` of the symmetric variables.

    Standard lattice: ``x_0 = m_1/m_0 - ((alpha+beta) c - gamma)/(1-c)``.
    Shifted lattice: the transformed-parameter seed plus ``gamma - 1``.
    """
    mp = ctx.mp
    if params.lattice is Lattice.SHIFTED:
        x0, _ = initial_xy(shifted_params(params), ctx)
        return x0 + ctx.real(params.gamma) - 1, mp.mpf(0)
    a, b, g, c = params.as_reals(ctx)
    m = _moment_list(params, 2, ctx)
    x0 = m[1] / m[0] - ((a + b) * c - g) / (1 - c)
    return x0, mp.mpf(0)
