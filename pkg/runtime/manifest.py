import hashlib
import json
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, Optional

from runtime.config import TOOL_VERSION


def _canonical(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value


def config_hash(config: Dict[str, Any]) -> str:
    """sha256 over the canonical JSON form of a resolved configuration."""
    payload = json.dumps(_canonical(config), sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    config_hash: str
    seed: Optional[int]
    tool_version: str = TOOL_VERSION
    wall_time_s: float = 0.0
    config: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def for_run(cls, subcommand: str, config: Dict[str, Any], seed: Optional[int] = None) -> "RunManifest":
        return cls(subcommand=subcommand, config_hash=config_hash(config), seed=seed,
                   config=_canonical(config))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def audit_key(self) -> Dict[str, Any]:
        """Manifest fields that must match between two runs with identical inputs."""
        data = self.to_dict()
        data.pop("wall_time_s")
        return data
