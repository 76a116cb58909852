"""Application configuration management."""

from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="NEMATODE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Application
    app_name: str = "nematode-release"
    app_version: str = "1.0.0"
    debug: bool = False
    log_level: str = "WARNING"

    # Output
    output_dir: Path = Path("nematode-output")

    # Analysis tolerances
    threshold_rel_tol: float = 1e-9
    k_series_eps: float = 1e-8
    fd_step: float = 1e-5

    # Integrator defaults (normalized time units)
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 1.0
    t_end: float = 500.0
    dense_output_dt: float = 0.05

    # Batches
    max_workers: int = 1


settings = Settings()
