"""Residual bookkeeping shared by the verification modules."""

from __future__ import annotations

from dataclasses import dataclass, field


def normalized_residual(mp, lhs_terms, rhs_terms):
    """|sum(lhs) - sum(rhs)| scaled by the largest additive term.

    Normalizing by the dominant term keeps "everything is tiny" from being
    mistaken for "the identity holds".  When every term is exactly zero the
    absolute residual (zero) is returned.
    """
    lhs_terms = list(lhs_terms)
    rhs_terms = list(rhs_terms)
    diff = abs(sum(lhs_terms, mp.mpf(0)) - sum(rhs_terms, mp.mpf(0)))
    scale = mp.mpf(0)
    for t in lhs_terms:
        scale = max(scale, abs(t))
    for t in rhs_terms:
        scale = max(scale, abs(t))
    if scale == 0:
        return diff
    return diff / scale


@dataclass
class ResidualEntry:
    name: str
    n: int
    value: object  # BigReal


@dataclass
class ResidualReport:
    """Named residuals with the tolerances they were tested against."""

    params: object
    ctx: object
    entries: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def add(self, name, n, value):
        self.entries.append(ResidualEntry(name, n, value))

    def names(self):
        seen = []
        for e in self.entries:
            if e.name not in seen:
                seen.append(e.name)
        return seen

    def by_name(self, name):
        return [(e.n, e.value) for e in self.entries if e.name == name]

    def max_residual(self, name=None):
        vals = [e.value for e in self.entries if name is None or e.name == name]
        if not vals:
            return self.ctx.mp.mpf(0)
        return max(vals)

    def set_tolerance(self, name, tol):
        self.tolerances[name] = tol

    def within(self, tol=None):
        """True when every entry is below its tolerance (or ``tol``)."""
        for e in self.entries:
            bound = self.tolerances.get(e.name, tol)
            if bound is None:
                continue
            if not e.value < bound:
                return False
        return True
