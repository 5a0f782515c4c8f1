"""Runtime settings and bundled scenario locations."""

from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# src/ufls/config.py -> src/ufls -> src -> repo root
PACKAGE_ROOT = Path(__file__).parent.parent.parent
DEFAULT_SCENARIO_DIR = PACKAGE_ROOT / "configs"

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]


class Settings(BaseSettings):
    """Process-level settings read from ``UFLS_*`` environment variables or ``.env``."""

    model_config = SettingsConfigDict(env_prefix="UFLS_", env_file=".env", extra="ignore")

    out_dir: Path = Path("results")
    jobs: int = Field(default=1, ge=1)
    log_level: LogLevel = "WARNING"
    scenario_dir: Path = DEFAULT_SCENARIO_DIR


def bundled_scenario(name: str, scenario_dir: Path = DEFAULT_SCENARIO_DIR) -> Path:
    """Path of a bundled scenario by stem, e.g. ``case1_sectionalizer``."""
    path = scenario_dir / (name if name.endswith(".yaml") else f"{name}.yaml")
    if not path.exists():
        available = sorted(p.stem for p in scenario_dir.glob("*.yaml"))
        raise FileNotFoundError(f"no bundled scenario {name!r}; available: {available}")
    return path
