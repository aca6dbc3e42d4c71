from dotenv import find_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict


class ExpanderSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=find_dotenv(),
        env_file_encoding="utf-8",
        env_ignore_empty=True,
        extra="ignore",
        validate_default=False,
    )

    # Reproducibility
    DEFAULT_SEED: int = 42
    DEFAULT_TOL: float = 1e-9

    # Linear algebra tolerances
    HERMITIAN_TOL: float = 1e-10
    RANK_TOL: float = 1e-8
    KRAUS_DISCARD_TOL: float = 1e-10
    FIXED_POINT_GAP: float = 1e-7

    # Quantum edge expansion search
    HQ_BUDGET: int = 200
    HQ_DESCENT_STEPS: int = 50
    HQ_DIAGONAL_MAX_DIM: int = 12

    # Search guards and retry counts
    BRUTE_FORCE_MAX_VERTICES: int = 24
    COVER_MAX_RETRIES: int = 16
    IRREP_MAX_RETRIES: int = 8
    MAX_GROUP_ORDER: int = 5000
    ASSOCIATIVITY_SAMPLES: int = 10_000
    TECHNICAL_TRIALS: int = 1000


class ReportSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=find_dotenv(),
        env_file_encoding="utf-8",
        env_ignore_empty=True,
        extra="ignore",
        validate_default=False,
    )

    REPORT_INDENT: int = 2
    CSV_DELIMITER: str = ","
