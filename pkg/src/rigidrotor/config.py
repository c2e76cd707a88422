"""Run configuration shared by the command-line tools."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Optional

from .errors import ConfigError


def _default_tolerances() -> dict:
    return {
        "geometry": 1e-5,
        "curvature": 1e-6,
        "conservation": 1e-9,
        "expectation": 1e-4,
        "marginal": 2e-2,
        "overlap": 1e-3,
        "coherence": 1e-4,
        "su2_volume": 1e-6,
        "su2_wigner": 1e-8,
        "su2_norm": 1e-3,
    }


@dataclass
class RunConfig:
    hbar: float = 1.0
    inertia: list = field(default_factory=lambda: [1.0, 2.0, 3.0])
    jmax: int = 8
    gamma_grid: list = field(default_factory=lambda: [32, 24, 48])
    euler_band: int = 16
    momentum_nodes: int = 33
    momentum_scale: float = 1.0
    tolerances: dict = field(default_factory=_default_tolerances)
    output: str = "-"
    seed: int = 0

    def validate(self) -> "RunConfig":
        if not self.hbar > 0:
            raise ConfigError("hbar must be positive")
        if len(self.inertia) != 3 or any(not float(x) > 0 for x in self.inertia):
            raise ConfigError("inertia needs three positive moments")
        if int(self.jmax) < 0:
            raise ConfigError("jmax must be >= 0")
        if len(self.gamma_grid) != 3 or any(int(n) < 4 for n in self.gamma_grid):
            raise ConfigError("gamma_grid needs three resolutions >= 4")
        if int(self.euler_band) < 2:
            raise ConfigError("euler_band must be >= 2")
        if int(self.momentum_nodes) < 3 or not self.momentum_scale > 0:
            raise ConfigError("momentum grid needs >= 3 nodes and a positive scale")
        for k, v in self.tolerances.items():
            if not float(v) > 0:
                raise ConfigError(f"tolerance {k!r} must be positive")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        """Stable digest of everything except the output location."""
        d = self.to_dict()
        d.pop("output", None)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for k, v in data.items():
            if k == "tolerances":
                merged = _default_tolerances()
                merged.update(v)
                v = merged
            setattr(cfg, k, v)
        return cfg.validate()

    @classmethod
    def load(cls, path: Optional[str], overrides: Optional[dict[str, Any]] = None) -> "RunConfig":
        data: dict = {}
        if path:
            try:
                with open(path) as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object")
        for k, v in (overrides or {}).items():
            if v is not None:
                data[k] = v
        return cls.from_dict(data)


def worker_count() -> int:
    """Worker cap from ``ROTOR_THREADS`` (default 1)."""
    raw = os.environ.get("ROTOR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"ROTOR_THREADS must be an integer, got {raw!r}") from exc


def ordered_map(fn: Callable, items: Iterable, workers: Optional[int] = None) -> list:
    """``[fn(x) for x in items]`` on a thread pool; results keep input order."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
