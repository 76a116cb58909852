"""Worked example: r = 2, k = 0.5, c = 2, m = 0.4, i.e. k̄ = 0.5, m̄ = 0.2.

Five release rates, one per regime, with the published equilibrium
coordinates (3 decimals) and classifications. ū = u/2 for this parameter set.
"""

import math

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

example_original = {"r": 2.0, "k": 0.5, "c": 2.0, "m": 0.4}
example_normalized = {"k": 0.5, "m": 0.2}

example_cases = {
    "below_hopf": {
        "u": 0.1 * (SQRT2 - 1.0),
        "E2": {"location": (0.0, 0.207), "stability": "saddle"},
        "E3": {"location": (0.196, 0.732), "stability": "unstable focus"},
    },
    "controlled": {
        "u": 0.1,
        "E2": {"location": (0.0, 0.5), "stability": "saddle"},
        "E3": {"location": (0.087, 0.732), "stability": "stable focus"},
    },
    "at_elimination": {
        "u": 0.2 * (SQRT3 - 1.0),
        "E2": {"location": (0.0, 0.732), "stability": "attracting saddle node"},
        "E3": None,
    },
    "eliminating": {
        "u": 0.2,
        "E2": {"location": (0.0, 1.0), "stability": "stable node"},
        "E3": None,
    },
    "at_hopf": {
        "u": 0.1 * (SQRT3 - 1.0),
        "E2": {"location": (0.0, 0.366), "stability": "saddle"},
        "E3": {"location": (0.137, 0.732), "stability": "center type stable focus"},
    },
}

# Published order of the five cases.
example_u_values = [case["u"] for case in example_cases.values()]

presets = {
    "example": {
        "original": example_original,
        "normalized": example_normalized,
        "cases": example_cases,
    },
}
