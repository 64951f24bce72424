"""Bundled protocols and reference strategies."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..protocol import Protocol, load_protocol
from ..strategy import load_strategy

DATA = Path(__file__).parent / "data"


class UnknownBundle(KeyError):
    pass


@dataclass
class GameBundle:
    name: str
    protocol: Protocol
    strategies: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)   # id -> (value or None, provenance)
    folder: Path | None = None

    def strategy_path(self, sid: str) -> Path:
        return self.folder / f"{sid}.json"


def list_bundles() -> list[str]:
    return sorted(p.name for p in DATA.iterdir() if (p / "bundle.json").exists())


def load_bundle(name: str) -> GameBundle:
    folder = DATA / name
    if not (folder / "bundle.json").exists():
        raise UnknownBundle(f"unknown game {name!r}; known: {', '.join(list_bundles())}")
    manifest = json.loads((folder / "bundle.json").read_text())
    bundle = GameBundle(name, load_protocol(folder / manifest["protocol"]), folder=folder)
    for sid, entry in manifest["strategies"].items():
        bundle.strategies[sid] = load_strategy(folder / entry["file"])
        bundle.expected[sid] = (entry.get("value"), entry.get("provenance", ""))
    return bundle
