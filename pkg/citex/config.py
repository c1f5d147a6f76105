"""
Application configuration management.
"""
from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    """Settings loaded from CITEX_* environment variables or a .env file."""

    # Output
    out: Path = Path("results")
    csv_precision: int = 6  # significant digits

    # Bundled reference data
    data_dir: Path = Path(__file__).parent / "data"
    fixture_dir: Optional[Path] = None

    # Reproducibility
    seed: int = 20100101

    # Eigenfactor
    damping: float = 0.85
    eigen_tol: float = 1e-12
    eigen_max_iter: int = 10000

    # Stigler fit
    fit_tol: float = 1e-10
    fit_max_iter: int = 100
    separation_bound: float = 30.0

    # Ranking lasso
    lasso_points: int = 101
    group_tol: float = 1e-4
    weight_cap: float = 1e8
    lasso_initial_rho: float = 1.0
    lasso_rho_factor: float = 10.0
    lasso_inner_tol: float = 1e-8
    lasso_outer_tol: float = 1e-6
    lasso_max_iter: int = 20000

    # Simulation envelope
    simulation_workers: int = 4
    envelope_level: float = 0.95

    # Assessment
    min_coverage: float = 0.5

    # Logging
    log_level: str = "INFO"

    class Config:
        env_prefix = "CITEX_"
        env_file = ".env"
        env_file_encoding = "utf-8"

    def ensure_directories(self, out: Optional[Path] = None) -> Path:
        """Create the output directory if it doesn't exist."""
        target = Path(out) if out is not None else self.out
        target.mkdir(parents=True, exist_ok=True)
        return target


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
