"""Shared parameter sets and precision contexts.

Two fixed parameter quadruples are used throughout:

* asym: (alpha, beta, gamma, c) = (3/2, 3, 1/3, 1/2) — generic, alpha != beta
* sym:  (1, 1, 2, 1/2) — alpha == beta (exercises the ladder guard), gamma = 2
  so it is *not* admissible on the shifted lattice
"""

from fractions import Fraction

import pytest

import hypopq as H

F = Fraction


def asym_params(lattice=H.Lattice.STANDARD):
    return H.Params(F(3, 2), F(3), F(1, 3), F(1, 2), lattice)


def sym_params():
    return H.Params(F(1), F(1), F(2), F(1, 2))


def meixner_params(beta=F(2), c=F(1, 2)):
    # alpha == gamma collapses the weight to Meixner's (beta)_k c^k / k!
    return H.Params(F(3), beta, F(3), c)


# ----------------------------------------------------------------------
# Exact rational oracles (test-side only, no package code): Stirling-number
# form of the Meixner moments, Pochhammer products, exact weights.


def stirling2(n, k):
    if n == 0:
        return 1 if k == 0 else 0
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def pochhammer_frac(a, n):
    out = F(1)
    for i in range(n):
        out *= a + i
    return out


def meixner_moment_exact(beta, c, n):
    """Exact rational n-th moment of the Meixner weight (beta)_k c^k / k!.

    m_n = (1-c)^(-beta) sum_j S(n,j) (beta)_j (c/(1-c))^j; requires integer
    beta so the prefactor stays rational.
    """
    assert beta == int(beta)
    scale = F(1, 1) / (1 - c) ** int(beta)
    r = c / (1 - c)
    return scale * sum(
        stirling2(n, j) * pochhammer_frac(F(beta), j) * r**j for j in range(n + 1)
    )


def exact_weight(params, k):
    num = pochhammer_frac(params.alpha, k) * pochhammer_frac(params.beta, k)
    den = pochhammer_frac(params.gamma, k) * pochhammer_frac(F(1), k)
    return num / den * params.c**k


def frac_det(rows):
    """Exact determinant of a small square Fraction matrix (Laplace)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = F(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        total += (-1) ** j * rows[0][j] * frac_det(minor)
    return total


# ----------------------------------------------------------------------
# Acceptance verdict plumbing: test_acceptance registers one line per
# criterion; they are replayed after the run summary so they survive
# pytest's fd-level capture.

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def ctx128():
    return H.PrecisionCtx(bits=128)


@pytest.fixture(scope="session")
def ctx256():
    return H.PrecisionCtx(bits=256)


@pytest.fixture(scope="session")
def ctx512():
    return H.PrecisionCtx(bits=512)
