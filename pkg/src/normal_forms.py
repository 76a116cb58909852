"""Closed-form normal-form coefficients of the normalized release model.

Shared by the equilibrium classifiers (which only need signs) and the
bifurcation reports (which publish the values).
"""

import math


def saddle_node_coefficients(k: float, m: float, y2: float) -> tuple[float, float]:
    """Quadratic and cubic coefficients of the center-manifold flow at ū = u0.

    After the time rescaling τ = -m t the restricted dynamics read
    dX/dτ = a X^2 + b X^3 + ... with a = y2^2 (k y2^2 + 1)/m^2 and
    b = -k^2 y2^7 / m^3.
    """
    quadratic = y2 * y2 * (k * y2 * y2 + 1.0) / (m * m)
    cubic = -(k * k) * y2**7 / m**3
    return quadratic, cubic


def hopf_point(k: float, m: float, y3: float) -> tuple[float, float, float]:
    """x3, ω and β of the positive equilibrium at ū = u0/2."""
    x3 = m / (2.0 * y3)
    omega = math.sqrt(x3 * (k * y3 * y3 + 1.0))
    return x3, omega, y3 * omega


def focus_quantity(k: float, m: float, y3: float) -> float:
    """First focus quantity α1 at ū = u0/2 in the κ = sqrt(1 + 4k) - 1 form."""
    x3, omega, beta = hopf_point(k, m, y3)
    big_m = beta / (omega * omega)
    kappa = 4.0 * k / (math.sqrt(1.0 + 4.0 * k) + 1.0)
    bracket = kappa * kappa / ((kappa + 2.0) * (2.0 * kappa + 2.0)) - 1.0
    return x3 * y3 * big_m / (4.0 * beta) * bracket


def third_focus_value(k: float, m: float, y3: float) -> float:
    """Focus value from the cubic coefficients after X̄ = (y3/ω) X.

    With dX̄/dt = -β Ȳ + A11 X̄Ȳ + A02 Ȳ^2 + A12 X̄Ȳ^2 + ... and
    dȲ/dt = β X̄ + B11 X̄Ȳ + B02 Ȳ^2 + ..., the value is
    π A12/(4β) - π (2 A02 B02 - A11 A02 + B11 B02)/(4β^2).
    """
    x3, omega, beta = hopf_point(k, m, y3)
    a11 = -(k * y3 * y3 + 1.0)
    a02 = k * k * x3 * y3**4 / omega
    a12 = k * k * y3**3
    b11 = 2.0 * omega
    b02 = x3
    return math.pi * a12 / (4.0 * beta) - math.pi * (
        2.0 * a02 * b02 - a11 * a02 + b11 * b02
    ) / (4.0 * beta * beta)
