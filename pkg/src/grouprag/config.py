"""Deployment configuration.

Flat key/value config file (``key = value`` lines, ``#`` comments) with a
per-key environment override: key ``database_url`` is overridden by
``GROUPRAG_DATABASE_URL``, and so on. Secrets are best supplied through the
environment override rather than the file. Validation is fail-fast: any
missing required field aborts startup naming the field.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .errors import ConfigError

ENV_PREFIX = "GROUPRAG_"

_REQUIRED = ("database_url", "blob_backend", "provider")

_CONDITIONAL_REQUIRED = {
    ("blob_backend", "fs"): ("blob_fs_root",),
    ("blob_backend", "s3"): (
        "blob_s3_endpoint",
        "blob_s3_bucket",
        "blob_s3_access_key",
        "blob_s3_secret_key",
    ),
    ("provider", "scripted"): ("provider_script",),
    ("provider", "http"): ("provider_base_url", "provider_model"),
    ("embedder", "remote"): ("embedder_endpoint", "embedder_model"),
}

_CHOICES = {
    "blob_backend": ("fs", "s3"),
    "provider": ("scripted", "http"),
    "embedder": ("hash", "remote"),
}


@dataclass
class ServiceConfig:
    database_url: str
    blob_backend: str
    provider: str
    bind_host: str = "127.0.0.1"
    bind_port: int = 8000
    blob_fs_root: str | None = None
    blob_s3_endpoint: str | None = None
    blob_s3_bucket: str | None = None
    blob_s3_access_key: str | None = None
    blob_s3_secret_key: str | None = None
    blob_s3_region: str = "us-east-1"
    embedder: str = "hash"
    embedder_dimension: int = 64
    embedder_endpoint: str | None = None
    embedder_model: str | None = None
    embedder_api_key: str | None = None
    provider_script: str | None = None
    provider_base_url: str | None = None
    provider_model: str | None = None
    provider_api_key: str | None = None
    chunk_size: int = 1600
    chunk_overlap: int = 200
    fusion_alpha: float = 0.7
    fusion_k: int = 8
    fusion_n_vec: int = 50
    fusion_n_lex: int = 50
    max_tool_rounds: int = 8


def parse_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"line {lineno}", f"config line {lineno} is not 'key = value': {line!r}"
            )
        key, _, value = stripped.partition("=")
        values[key.strip().lower()] = value.strip()
    return values


def load_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> ServiceConfig:
    """Merge file values and environment overrides into a validated config."""
    env = os.environ if env is None else env
    raw = parse_config_file(path) if path is not None else {}
    known = {f.name for f in fields(ServiceConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, f"unknown config field: {key}")
    for name in known:
        override = env.get(ENV_PREFIX + name.upper())
        if override is not None:
            raw[name] = override

    for name in _REQUIRED:
        if not raw.get(name):
            raise ConfigError(name)
    for (selector, value), needed in _CONDITIONAL_REQUIRED.items():
        if raw.get(selector, _default(selector)) == value:
            for name in needed:
                if not raw.get(name):
                    raise ConfigError(name)
    for selector, choices in _CHOICES.items():
        value = raw.get(selector, _default(selector))
        if value not in choices:
            raise ConfigError(
                selector,
                f"config field {selector} must be one of {', '.join(choices)}; got {value!r}",
            )

    kwargs: dict = {}
    for f in fields(ServiceConfig):
        if f.name not in raw:
            continue
        value = raw[f.name]
        try:
            if f.type in ("int", int):
                kwargs[f.name] = int(value)
            elif f.type in ("float", float):
                kwargs[f.name] = float(value)
            else:
                kwargs[f.name] = value
        except ValueError:
            raise ConfigError(
                f.name, f"config field {f.name} has invalid value {value!r}"
            ) from None
    return ServiceConfig(**kwargs)


def _default(name: str) -> str | None:
    for f in fields(ServiceConfig):
        if f.name == name:
            return f.default  # type: ignore[return-value]
    return None
