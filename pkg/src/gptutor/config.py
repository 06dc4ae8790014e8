"""Service configuration and its discovery chain.

Settings come from, in increasing precedence: built-in defaults, a
``gptutor.json`` file at the workspace root (or an explicit --config path),
``GPTUTOR_*`` environment variables, and finally CLI flags. The API key
itself is never stored in config; only the name of the environment variable
holding it is (``apiKeyEnv``, default OPENAI_API_KEY).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from gptutor.extractor import DEFAULT_DEFINING_FILE_BUDGET
from gptutor.gateway import BACKEND_LIVE, LlmConfig
from gptutor.indexer import IndexConfig
from gptutor.prompt import Budget


@dataclass(frozen=True)
class ServiceConfig:
    workspace_root: Path
    llm: LlmConfig = field(default_factory=LlmConfig)
    budget: Budget = field(default_factory=Budget)
    index_config: IndexConfig = field(default_factory=IndexConfig)
    cache_capacity: int = 256
    defining_file_budget: int = DEFAULT_DEFINING_FILE_BUDGET
    default_backend: str = BACKEND_LIVE
    transcript_path: Path | None = None

    def __post_init__(self) -> None:
        if self.cache_capacity < 0:
            raise ValueError("cache_capacity must be >= 0")


_ENV_KEYS = {
    "GPTUTOR_API_BASE": "apiBase",
    "GPTUTOR_MODEL": "model",
    "GPTUTOR_TEMPERATURE": "temperature",
    "GPTUTOR_TOKEN_BUDGET": "tokenBudget",
}


def _read_config_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ValueError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    return data


def _apply_settings(config: ServiceConfig, settings: dict) -> ServiceConfig:
    llm = config.llm
    if "apiBase" in settings:
        llm = replace(llm, api_base=str(settings["apiBase"]))
    if "apiKeyEnv" in settings:
        llm = replace(llm, api_key_source=str(settings["apiKeyEnv"]))
    if "model" in settings:
        llm = replace(llm, model=str(settings["model"]))
    if "temperature" in settings:
        llm = replace(llm, temperature=float(settings["temperature"]))

    budget = config.budget
    if "tokenBudget" in settings:
        budget = replace(budget, max_tokens=int(settings["tokenBudget"]))

    index_config = config.index_config
    if "include" in settings:
        index_config = replace(index_config, include=tuple(settings["include"]))
    if "exclude" in settings:
        index_config = replace(index_config, exclude=tuple(settings["exclude"]))

    out = replace(config, llm=llm, budget=budget, index_config=index_config)
    if "definingFileBudget" in settings:
        out = replace(out, defining_file_budget=int(settings["definingFileBudget"]))
    if "backend" in settings:
        out = replace(out, default_backend=str(settings["backend"]))
    if "transcripts" in settings:
        out = replace(out, transcript_path=Path(str(settings["transcripts"])))
    if "cacheCapacity" in settings:
        out = replace(out, cache_capacity=int(settings["cacheCapacity"]))
    return out


def load_service_config(
    workspace_root: str | Path,
    *,
    config_path: str | Path | None = None,
    env: dict[str, str] | None = None,
    flag_settings: dict | None = None,
) -> ServiceConfig:
    """Resolve the effective config: flag > env > file > default."""
    root = Path(workspace_root)
    config = ServiceConfig(workspace_root=root)

    file_path = Path(config_path) if config_path else root / "gptutor.json"
    if file_path.is_file():
        config = _apply_settings(config, _read_config_file(file_path))

    env = os.environ if env is None else env
    env_settings = {key: env[name] for name, key in _ENV_KEYS.items() if name in env}
    if env_settings:
        config = _apply_settings(config, env_settings)

    if flag_settings:
        config = _apply_settings(config, flag_settings)
    return config
