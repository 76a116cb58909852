"""Tests for the Hopf and saddle-node analysis."""

import math

import pytest

from src.bifurcation import (
    alpha_of_u,
    alpha_prime_numeric,
    first_lyapunov_numeric,
    hopf_analysis,
    normal_form_partials,
    predicted_cycle_radius,
    saddle_node_normal_form,
)
from src.equilibria import thresholds
from src.errors import NotApplicableError
from src.model_core import jacobian_normalized
from src.models import NormalizedParams, StabilityClass, State
from src.normal_forms import focus_quantity

Y3 = math.sqrt(3) - 1


def test_hopf_report_worked_example(example):
    """β ≈ 0.30466, period ≈ 20.62, α1 < 0 for (0.5, 0.2)."""
    report = hopf_analysis(example)
    assert report.u_critical == pytest.approx(0.0732051, abs=1e-7)
    assert report.alpha == pytest.approx(0.0, abs=1e-12)
    assert report.beta == pytest.approx(0.30466, rel=1e-4)
    assert report.predicted_period == pytest.approx(20.62, abs=0.01)
    assert report.alpha_prime == pytest.approx(-1 / Y3, rel=1e-12)
    assert report.alpha1 == pytest.approx(-0.136164, abs=1e-5)
    assert report.l1 < 0
    assert report.stable_cycles_below_critical
    assert report.published_label == "subcritical"
    assert "supercritical" in report.naming_note


def test_hopf_report_ignores_release(example):
    """The report depends on (k̄, m̄) only."""
    assert hopf_analysis(example) == hopf_analysis(example.with_release(0.12))


def test_numeric_focus_quantity_matches_closed_form(example):
    """The 1/16 formula on finite-difference partials reproduces α1."""
    closed = focus_quantity(example.k, example.m, Y3)
    assert first_lyapunov_numeric(example) == pytest.approx(closed, rel=1e-6)


ALPHA1_GRID = [(k, m) for k in (0.1, 0.2, 0.5, 1, 2, 5, 10) for m in (0.1, 0.2, 0.5, 1, 2)]


@pytest.mark.parametrize("k, m", ALPHA1_GRID)
def test_focus_quantity_negative_across_parameters(k, m):
    """α1 < 0 for every k̄ >= 0, m̄ > 0; numeric and closed forms agree."""
    report = hopf_analysis(NormalizedParams(k=k, m=m))
    assert report.alpha1 < 0
    assert report.alpha1_numeric == pytest.approx(report.alpha1, rel=1e-6)


@pytest.mark.parametrize("k", [0.0, 1e-3, 1.0, 10.0, 20.0, 1e2, 1e4])
@pytest.mark.parametrize("m", [1e-3, 0.1, 5.0, 100.0])
def test_focus_quantity_agrees_across_scales(k, m):
    """Numeric α1 tracks the closed form while x3 and ω span decades."""
    p = NormalizedParams(k=k, m=m)
    closed = focus_quantity(k, m, thresholds(p).y3)
    assert closed < 0
    assert first_lyapunov_numeric(p) == pytest.approx(closed, rel=1e-6)


def test_eigenvalues_purely_imaginary_at_hopf(example):
    """At ū = u0/2, J(E3) has eigenvalues ±iβ with β = y3ω."""
    report = hopf_analysis(example)
    at_hopf = example.with_release(report.u_critical)
    jac = jacobian_normalized(at_hopf, State(x=report.x3, y=report.y3))
    low, high = jac.eigenvalues()
    assert abs(low.real) < 1e-10
    assert abs(high.real) < 1e-10
    assert high.imag == pytest.approx(report.y3 * report.omega, abs=1e-10)
    assert low.imag == pytest.approx(-report.y3 * report.omega, abs=1e-10)


def test_uninhibited_focus_quantity():
    """For k̄ = 0 the bracket is -1 and α1 = -1/4."""
    p = NormalizedParams(k=0.0, m=0.2)
    assert focus_quantity(p.k, p.m, 1.0) == pytest.approx(-0.25, rel=1e-12)
    assert hopf_analysis(p).alpha1 == pytest.approx(-0.25, rel=1e-12)


def test_vanishing_partials(example):
    """Pure-ξ partials of F and G vanish; the mixed ones match closed forms."""
    d = normal_form_partials(example)
    for key in ("F_xx", "F_xxx", "G_xx", "G_xxx"):
        assert d[key] == pytest.approx(0.0, abs=1e-7), key
    assert d["N"] == pytest.approx(0.0, abs=1e-12)
    big_k = example.k * Y3 * Y3 + 1
    assert d["F_xy"] == pytest.approx(-big_k * d["M"], abs=1e-7)
    assert d["G_xy"] == pytest.approx(2 * Y3, abs=1e-7)


def test_third_focus_value_closed_form(example):
    """Third focus value reduces to -(π/2ω)(k̄²x3²y3²/ω² + x3/y3²)."""
    report = hopf_analysis(example)
    x3, omega = report.x3, report.omega
    expected = -(math.pi / (2 * omega)) * (
        example.k**2 * x3**2 * Y3**2 / omega**2 + x3 / Y3**2
    )
    assert report.third_focus_value == pytest.approx(expected, rel=1e-9)
    assert report.third_focus_value < 0


def test_alpha_is_linear_in_release(example):
    """α(ū) = m̄/2 - ū/y3, so α'(u0/2) = -1/y3."""
    assert alpha_of_u(example, 0.05) == pytest.approx(0.1 - 0.05 / Y3, rel=1e-12)
    assert alpha_prime_numeric(example) == pytest.approx(-1 / Y3, rel=1e-6)


def test_predicted_cycle_radius(example):
    """sqrt(-α/α1) just below the Hopf value, zero at and above it."""
    uh = thresholds(example).u_hopf
    alpha1 = focus_quantity(example.k, example.m, Y3)
    below = example.with_release(0.99 * uh)
    alpha = example.m / 2 - below.u / Y3
    assert predicted_cycle_radius(below) == pytest.approx(math.sqrt(-alpha / alpha1), rel=1e-12)
    assert predicted_cycle_radius(below) == pytest.approx(0.0857, abs=1e-3)
    assert predicted_cycle_radius(example.with_release(uh)) == 0.0
    assert predicted_cycle_radius(example.with_release(1.2 * uh)) == 0.0


def test_saddle_node_worked_example(example):
    """Quadratic coefficient y2²(k̄y2² + 1)/m̄² ≈ 16.987 at ū = u0."""
    report = saddle_node_normal_form(example.with_release(thresholds(example).u0))
    assert report.y2 == pytest.approx(Y3, rel=1e-12)
    assert report.quadratic_coefficient == pytest.approx(16.9873, rel=1e-5)
    assert report.cubic_coefficient < 0
    assert report.verdict is StabilityClass.ATTRACTING_SADDLE_NODE


def test_saddle_node_uninhibited():
    """k̄ = 0, m̄ = 1: y2 = 1, quadratic coefficient 1, no cubic term."""
    report = saddle_node_normal_form(NormalizedParams(k=0.0, m=1.0, u=1.0))
    assert report.quadratic_coefficient == pytest.approx(1.0, rel=1e-15)
    assert report.cubic_coefficient == 0.0


def test_saddle_node_requires_threshold(example):
    """Away from u0 the normal form is not applicable."""
    with pytest.raises(NotApplicableError):
        saddle_node_normal_form(example.with_release(0.1))
