# app/config/mermin_config.py
import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv

if os.path.exists(".env"):
    load_dotenv()


def _env_int(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw.replace("_", ""))
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


# Simulation Configuration
SIMULATION_CONFIG: Dict[str, Any] = {
    "mc_vectors": _env_int("MERMIN_MC_VECTORS", 1_000_000),
    "device_trials": _env_int("MERMIN_DEVICE_TRIALS", 9_000_000),
    "p_minus": _env_float("MERMIN_P_MINUS", 0.25),
    "chunk_size": _env_int("MERMIN_CHUNK_SIZE", 250_000),
    "threads": _env_int("MERMIN_THREADS", 1),
    "seed": _env_int("MERMIN_SEED", None),
    "generator": "numpy.PCG64",
}

# Run store Configuration
STORE_CONFIG: Dict[str, Any] = {
    "database_url": os.getenv("DATABASE_URL", "sqlite:///mermin_runs.db"),
    "echo": os.getenv("DATABASE_ECHO", "false").lower() == "true",
}

# HTTP API Configuration
API_CONFIG: Dict[str, Any] = {
    "host": os.getenv("API_HOST", "0.0.0.0"),
    "port": _env_int("API_PORT", 8080),
    "reload": os.getenv("API_RELOAD", "false").lower() == "true",
    "cors_origins": [o.strip() for o in os.getenv("API_CORS_ORIGINS", "*").split(",") if o.strip()],
}

LOG_CONFIG: Dict[str, Any] = {
    "level": os.getenv("MERMIN_LOG_LEVEL", "WARNING").upper(),
}
