"""Limit gaps, seed-perturbation divergence, and digit-level studies."""

from fractions import Fraction

import pytest

import hypopq as H
from hypopq.asymptotics import (
    StudyReport,
    _targets,
    limit_report,
    perturbation_study,
    precision_study,
)
from hypopq.errors import InvalidParam
from hypopq.numerics import bits_for_digits
from hypopq.weights import Lattice

from conftest import asym_params, meixner_params

F = Fraction


def test_targets(ctx256):
    tx, ty = _targets(asym_params(), ctx256)
    assert tx == ctx256.real(F(1, 3))
    assert abs(ty - ctx256.real(F(28, 9))) < 1e-70  # (1/3-3/2)(1/3-3)
    tx, ty = _targets(asym_params(Lattice.SHIFTED), ctx256)
    assert tx == 1
    assert abs(ty - 1) < 1e-70  # (1-3/2)(1-3) = 1


def test_limit_report_converges(ctx256):
    rep = limit_report(asym_params(), 60, ctx256)
    assert rep.bits == 256
    assert rep.notes == ""
    assert rep.divergence_index is None
    assert rep.x_limit_gap < 0.05
    assert rep.y_limit_gap < 1
    assert rep.digits is None


def test_limit_report_meixner_exact(ctx256):
    # closed orbit: x_n = gamma exactly, y_n + n gamma = 0 = (g-a)(g-b)
    rep = limit_report(meixner_params(), 40, ctx256)
    assert rep.x_limit_gap == 0
    assert rep.y_limit_gap == 0


def test_limit_report_escalates_precision():
    # 26 bits dies at n=34; the report must come back from a doubled run
    rep = limit_report(asym_params(), 60, H.PrecisionCtx(bits=26))
    assert rep.bits > 26
    assert "doubling" in rep.notes
    assert rep.x_limit_gap < 0.1


def test_limit_report_validation(ctx256):
    with pytest.raises(InvalidParam):
        limit_report(asym_params(), 0, ctx256)


def test_perturbation_study(ctx128):
    p = asym_params()
    zero, kicked = perturbation_study(p, [0, F(1, 1000)], 60, ctx128)
    assert zero.divergence_index is None
    assert kicked.divergence_index is not None
    assert 0 < kicked.divergence_index <= 60
    assert zero.bits == 128


def test_perturbation_study_seed_override(ctx128):
    p = asym_params()
    reports = perturbation_study(p, [0], 20, ctx128, seed_x0=F(6, 5))
    assert reports[0].divergence_index is None
    assert reports[0].N == 20
    with pytest.raises(InvalidParam):
        perturbation_study(p, [0], 0, ctx128)


def test_precision_study():
    p = asym_params()
    r8, r25 = precision_study(p, [8, 25], 50)
    assert (r8.digits, r25.digits) == (8, 25)
    assert r8.bits == bits_for_digits(8)
    assert r25.bits == bits_for_digits(25)
    assert r8.divergence_index is not None and r8.divergence_index <= 50
    assert r25.divergence_index is None


def test_precision_study_validation():
    p = asym_params()
    with pytest.raises(InvalidParam):
        precision_study(p, [], 50)
    with pytest.raises(InvalidParam):
        precision_study(p, [0, 10], 50)
    with pytest.raises(InvalidParam):
        precision_study(p, [10], 0)
