"""Shared parameter sets."""

import pytest

from src.models import IntegratorConfig, NormalizedParams, OriginalParams
from src.presets import example_normalized, example_original


@pytest.fixture
def example() -> NormalizedParams:
    """k̄ = 0.5, m̄ = 0.2 without release."""
    return NormalizedParams(**example_normalized)


@pytest.fixture
def example_dimensional() -> OriginalParams:
    """r = 2, k = 0.5, c = 2, m = 0.4 without release."""
    return OriginalParams(**example_original)


@pytest.fixture
def quick_cfg() -> IntegratorConfig:
    """Looser tolerances for short integrations."""
    return IntegratorConfig(rel_tol=1e-8, abs_tol=1e-11, t_end=300.0, dense_output_dt=0.1)
