import os


def _env(name, default, cast=str):
    raw = os.getenv(f"TONESPLIT_{name}")
    return default if raw is None or raw == "" else cast(raw)


DATABASE_URL = _env("DATABASE_URL", "sqlite:///tonesplit.db")
LOG_LEVEL = _env("LOG_LEVEL", "INFO")

# refinement / decomposition defaults
DEFAULT_EPSILON = _env("EPSILON", 1e-4, float)
DEFAULT_MAX_TONES = _env("MAX_TONES", 32, int)
DEFAULT_RESIDUAL_FRACTION = _env("RESIDUAL_FRACTION", 1e-3, float)

# normal-matrix condition estimate above which a joint fit is refused
CONDITION_LIMIT = _env("CONDITION_LIMIT", 1e10, float)

# bin detection: η = DEGENERATE_SCALE * eps * max|X_k|; on-bin limit below ON_BIN_RATIO
DEGENERATE_SCALE = _env("DEGENERATE_SCALE", 64.0, float)
ON_BIN_RATIO = _env("ON_BIN_RATIO", 1e-6, float)

# dense grid oracle: max grid points * samples held in memory at once
ORACLE_CHUNK_ELEMENTS = _env("ORACLE_CHUNK_ELEMENTS", 2 ** 22, int)
