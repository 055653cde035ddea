"""Causal dependency sets of a layered circuit.

For each layer/qubit the interaction set records which qubits touch a common
entangler (plus the qubit itself); backward closures propagate those sets from
the final layer down to layer 1.  From the closures we derive the extended
past light cone of every observable (parameter indices), the extended future
light cone of every parameter (qubit indices), the correlation neighbourhoods
between observables, and the cardinality summaries the bound formulas consume.

Neighbourhoods are computed from light-cone overlap, a sufficient condition
for statistical dependence; the over-approximation only loosens bound
constants.  Sets are stored as sorted integer tuples and graph distances come
from breadth-first search (m is small, clarity wins).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .circuit import ArchitectureSpec, param_index


@dataclass(frozen=True)
class LightConeTable:
    """All dependency sets for one architecture.

    interaction[ell-1][k]   qubits interacting with qubit k in layer ell (incl. k)
    closure[k][ell-1]       qubits feeding observable k from layer ell downward
    past[k]                 parameter indices that can influence observable k
    future[i]               observables parameter i can influence
    neighborhoods[k]        observables whose light cones overlap k's
    two_hop[k]              union of neighborhoods over k's neighbourhood
    """

    interaction: tuple[tuple[tuple[int, ...], ...], ...]
    closure: tuple[tuple[tuple[int, ...], ...], ...]
    past: tuple[tuple[int, ...], ...]
    future: tuple[tuple[int, ...], ...]
    neighborhoods: tuple[tuple[int, ...], ...]
    two_hop: tuple[tuple[int, ...], ...]
    degree: int
    degree_4hop: int
    max_future: int
    max_past: int

    def to_json(self) -> str:
        doc = {
            "interaction": [[list(s) for s in layer] for layer in self.interaction],
            "closure": [[list(s) for s in per_layer] for per_layer in self.closure],
            "past": [list(s) for s in self.past],
            "future": [list(s) for s in self.future],
            "neighborhoods": [list(s) for s in self.neighborhoods],
            "two_hop": [list(s) for s in self.two_hop],
            "degree": self.degree,
            "degree_4hop": self.degree_4hop,
            "max_future": self.max_future,
            "max_past": self.max_past,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def _bfs_within(adjacency: list[set[int]], source: int, radius: int) -> set[int]:
    seen = {source}
    frontier = deque([(source, 0)])
    while frontier:
        node, dist = frontier.popleft()
        if dist == radius:
            continue
        for nxt in adjacency[node]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, dist + 1))
    return seen


def graph_distance_sets(
    neighborhoods,
) -> tuple[tuple[tuple[int, ...], ...], int]:
    """Two-hop closures and the 4-hop degree of the overlap graph.

    Accepts a populated table or its neighbourhood sets directly.  The graph
    has an edge (k, k') whenever k' is in k's neighbourhood; the two-hop
    closure of i is the union of neighbourhoods over i's neighbourhood, and
    the 4-hop degree is the largest number of vertices within graph distance
    4 of any vertex.
    """
    if isinstance(neighborhoods, LightConeTable):
        neighborhoods = neighborhoods.neighborhoods
    m = len(neighborhoods)
    adjacency = [set(nbrs) - {k} for k, nbrs in enumerate(neighborhoods)]
    two_hop = tuple(
        tuple(sorted(set().union(*(set(neighborhoods[j]) for j in neighborhoods[i]))))
        for i in range(m)
    )
    degree_4hop = max(len(_bfs_within(adjacency, i, 4)) for i in range(m))
    return two_hop, degree_4hop


def build_lightcones(arch: ArchitectureSpec) -> LightConeTable:
    """Populate every dependency set by the backward-closure recursion."""
    m, L = arch.m, arch.L

    interaction: list[list[set[int]]] = []
    for layer in arch.layers:
        sets = [{k} for k in range(m)]
        for a, b in layer.entangler_pairs:
            sets[a].add(b)
            sets[b].add(a)
        interaction.append(sets)

    # closure[k][ell-1]: recursion from the last layer down
    closure: list[list[set[int]]] = [[set() for _ in range(L)] for _ in range(m)]
    for k in range(m):
        closure[k][L - 1] = set(interaction[L - 1][k])
        for ell in range(L - 1, 0, -1):
            acc: set[int] = set()
            for kp in closure[k][ell]:
                acc |= interaction[ell - 1][kp]
            closure[k][ell - 1] = acc

    past: list[set[int]] = []
    for k in range(m):
        params = {
            param_index(m, ell, kp)
            for ell in range(1, L + 1)
            for kp in closure[k][ell - 1]
        }
        past.append(params)

    future: list[set[int]] = [set() for _ in range(L * m)]
    for k in range(m):
        for i in past[k]:
            future[i].add(k)

    supports = [closure[k][0] for k in range(m)]
    neighborhoods = tuple(
        tuple(sorted(kp for kp in range(m) if supports[k] & supports[kp]))
        for k in range(m)
    )
    two_hop, degree_4hop = graph_distance_sets(neighborhoods)

    return LightConeTable(
        interaction=tuple(tuple(tuple(sorted(s)) for s in layer) for layer in interaction),
        closure=tuple(tuple(tuple(sorted(s)) for s in per_layer) for per_layer in closure),
        past=tuple(tuple(sorted(s)) for s in past),
        future=tuple(tuple(sorted(s)) for s in future),
        neighborhoods=neighborhoods,
        two_hop=two_hop,
        degree=max(len(p) for p in neighborhoods),
        degree_4hop=degree_4hop,
        max_future=max(len(f) for f in future),
        max_past=max(len(p) for p in past),
    )
