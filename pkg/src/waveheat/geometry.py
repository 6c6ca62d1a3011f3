"""One-dimensional two-region domain: heat on (0, gamma), wave on (gamma, L)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

HEAT, INTERFACE, WAVE = "heat", "interface", "wave"


@dataclass(frozen=True)
class DomainConfig:
    length: float = 1.0
    gamma: float = 0.5
    n1: int = 50
    n2: int = 50

    def validate(self) -> None:
        if not (np.isfinite(self.length) and self.length > 0):
            raise ConfigError("length", f"must be positive, got {self.length!r}")
        if not (0 < self.gamma < self.length):
            raise ConfigError("gamma", f"must lie in (0, length={self.length!r}), got {self.gamma!r}")
        for name in ("n1", "n2"):
            n = getattr(self, name)
            if int(n) != n or n < 4:
                raise ConfigError(name, f"must be an integer >= 4, got {n!r}")


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid per region; the interface node is shared by both regions.

    Node 0 (x = 0) and the last node (x = L) carry the Dirichlet conditions
    for the heat and wave fields respectively.
    """

    config: DomainConfig
    nodes: np.ndarray
    interface_index: int
    labels: tuple
    h1: float
    h2: float

    @property
    def n1(self) -> int:
        return self.config.n1

    @property
    def n2(self) -> int:
        return self.config.n2

    @property
    def heat_nodes(self) -> np.ndarray:
        return self.nodes[: self.interface_index + 1]

    @property
    def wave_nodes(self) -> np.ndarray:
        return self.nodes[self.interface_index:]

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.config == other.config
                and np.array_equal(self.nodes, other.nodes)
                and self.labels == other.labels)

    __hash__ = None


def build_grid(config: DomainConfig) -> Grid:
    config.validate()
    n1, n2 = int(config.n1), int(config.n2)
    gamma, length = float(config.gamma), float(config.length)
    h1 = gamma / n1
    h2 = (length - gamma) / n2
    left = gamma * np.arange(n1 + 1) / n1
    right = gamma + (length - gamma) * np.arange(1, n2 + 1) / n2
    nodes = np.concatenate([left, right])
    # pin endpoints exactly; the affine formulas above can be off by an ulp
    nodes[0], nodes[n1], nodes[-1] = 0.0, gamma, length
    labels = (HEAT,) * n1 + (INTERFACE,) + (WAVE,) * n2
    return Grid(config=config, nodes=nodes, interface_index=n1, labels=labels, h1=h1, h2=h2)
