"""Device-bin bipartite graph of a scenario and its structural diagnostics.

Simulator-side only: the decoder never looks at any of this.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Component:
    devices: tuple[int, ...]
    bins: tuple[int, ...]
    edges: int

    @property
    def vertices(self) -> int:
        return len(self.devices) + len(self.bins)

    @property
    def is_tree(self) -> bool:
        return self.edges == self.vertices - 1

    @property
    def is_unicyclic(self) -> bool:
        return self.edges == self.vertices

    @property
    def device_count(self) -> int:
        return len(self.devices)


class DiscoveryGraph:
    def __init__(self, adjacency: dict[int, tuple[int, ...]], n_bins: int):
        self.adjacency = {int(k): tuple(v) for k, v in adjacency.items()}
        self.n_bins = n_bins
        self.bin_members: dict[int, list[int]] = defaultdict(list)
        for k, bins in self.adjacency.items():
            for b in bins:
                self.bin_members[b].append(k)

    @property
    def devices(self) -> list[int]:
        return list(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.adjacency.values())

    def degree(self, device: int) -> int:
        return len(self.adjacency[device])

    def components(self) -> list[Component]:
        """Connected components that contain at least one device."""
        seen_dev: set[int] = set()
        out = []
        for start in self.adjacency:
            if start in seen_dev:
                continue
            devs, bins, stack = [], set(), [start]
            seen_dev.add(start)
            while stack:
                k = stack.pop()
                devs.append(k)
                for b in self.adjacency[k]:
                    if b in bins:
                        continue
                    bins.add(b)
                    for j in self.bin_members[b]:
                        if j not in seen_dev:
                            seen_dev.add(j)
                            stack.append(j)
            edges = sum(len(self.adjacency[k]) for k in devs)
            out.append(Component(tuple(sorted(devs)), tuple(sorted(bins)), edges))
        return out


def build_graph(scenario, codebook, cfg=None) -> DiscoveryGraph:
    n_bins = (cfg or codebook.cfg).b_bins
    return DiscoveryGraph({k: codebook.bins(k) for k in scenario.devices}, n_bins)


def classify_components(graph: DiscoveryGraph) -> dict:
    comps = graph.components()
    rows = [
        {"is_tree": c.is_tree, "is_unicyclic": c.is_unicyclic, "device_count": c.device_count}
        for c in comps
    ]
    return {
        "components": rows,
        "all_tree_or_unicyclic": all(c.is_tree or c.is_unicyclic for c in comps),
        "max_device_count": max((c.device_count for c in comps), default=0),
        "n_components": len(comps),
        "n_tree": sum(c.is_tree for c in comps),
        "n_unicyclic": sum(c.is_unicyclic for c in comps),
    }


def peel(graph: DiscoveryGraph, rng: np.random.Generator | None = None) -> set[int]:
    """Devices removable by repeatedly resolving degree-1 bins.

    ``rng`` shuffles the processing order; the result does not depend on it.
    """
    remaining = {b: set(m) for b, m in graph.bin_members.items()}
    queue = [b for b, m in remaining.items() if len(m) == 1]
    if rng is not None:
        rng.shuffle(queue)
    peeled: set[int] = set()
    while queue:
        idx = int(rng.integers(len(queue))) if rng is not None else 0
        b = queue.pop(idx)
        if len(remaining[b]) != 1:
            continue
        (k,) = remaining[b]
        peeled.add(k)
        for b2 in graph.adjacency[k]:
            remaining[b2].discard(k)
            if len(remaining[b2]) == 1:
                queue.append(b2)
    return peeled
