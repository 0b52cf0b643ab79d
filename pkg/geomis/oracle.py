"""Exact offline computations on small graphs."""

import math
from collections.abc import Mapping, Set
from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from geomis.adversaries import random_class_neighbourhood
from geomis.errors import OracleRefusal, UsageError
from geomis.geometry import intersection_graph
from geomis.online import ArrivalSequence, RunResult, empirical_ratio
from geomis.randomized import all_rect_classes

DEFAULT_NODE_LIMIT = 40

Graph = Mapping[int, Set[int]]


@dataclass(frozen=True)
class MisResult:
    size: int
    witness: tuple[int, ...]


@dataclass(frozen=True)
class IknResult:
    zeta: int
    witness_center: Optional[int]
    witness_set: tuple[int, ...]


@dataclass(frozen=True)
class RatioCheck:
    opt: int
    alg: int
    ratio: float
    zeta: int
    bound_satisfied: bool
    dominating: bool
    maximal: bool


def to_networkx(graph: Graph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(graph)
    g.add_edges_from((u, v) for u, ns in graph.items() for v in ns)
    return g


def induced_subgraph(graph: Graph, vertices: Set[int]) -> dict[int, frozenset[int]]:
    return {v: frozenset(graph[v] & vertices) for v in vertices}


class _BranchAndBound:
    """Maximum independent set size on a bitmask graph."""

    def __init__(self, adj: list[int]) -> None:
        self.adj = adj
        self.best = 0

    def size(self, cand: int) -> int:
        self.best = self._greedy(cand)
        self._branch(cand, 0)
        return self.best

    def _greedy(self, cand: int) -> int:
        size = 0
        while cand:
            v = min(_bits(cand), key=lambda u: (self.adj[u] & cand).bit_count())
            cand &= ~(self.adj[v] | (1 << v))
            size += 1
        return size

    def _clique_cover(self, cand: int) -> int:
        # an independent set meets each clique of a cover at most once
        cliques = 0
        while cand:
            v = (cand & -cand).bit_length() - 1
            clique = 1 << v
            common = self.adj[v] & cand
            while common:
                u = (common & -common).bit_length() - 1
                clique |= 1 << u
                common &= self.adj[u]
            cand &= ~clique
            cliques += 1
        return cliques

    def _branch(self, cand: int, size: int) -> None:
        # vertices of degree <= 1 belong to some maximum independent set
        reduced = True
        while reduced:
            reduced = False
            for v in _bits(cand):
                if not (cand >> v) & 1:
                    continue
                nbrs = self.adj[v] & cand
                if nbrs.bit_count() <= 1:
                    cand &= ~(nbrs | (1 << v))
                    size += 1
                    reduced = True
        if not cand:
            self.best = max(self.best, size)
            return
        degrees = {v: (self.adj[v] & cand).bit_count() for v in _bits(cand)}
        max_degree = max(degrees.values())
        edges = sum(degrees.values()) // 2
        # every edge has an endpoint outside an independent set: alpha <= n - m / max_degree
        upper = min(len(degrees) - math.ceil(edges / max_degree), self._clique_cover(cand))
        if size + upper <= self.best:
            return
        v = max(degrees, key=lambda u: (degrees[u], -u))
        self._branch(cand & ~(self.adj[v] | (1 << v)), size + 1)
        self._branch(cand & ~(1 << v), size)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _bitmask_graph(graph: Graph, node_limit: int) -> tuple[list[int], list[int]]:
    if len(graph) > node_limit:
        raise OracleRefusal(f"Graph has {len(graph)} vertices, node limit is {node_limit}")
    order = sorted(graph)
    index = {v: i for i, v in enumerate(order)}
    return order, [sum(1 << index[u] for u in graph[v] if u != v) for v in order]


def independence_number(graph: Graph, node_limit: int = DEFAULT_NODE_LIMIT) -> int:
    """Size of a maximum independent set, without a witness."""
    order, adj = _bitmask_graph(graph, node_limit)
    return _BranchAndBound(adj).size((1 << len(order)) - 1)


def exact_mis(graph: Graph, node_limit: int = DEFAULT_NODE_LIMIT) -> MisResult:
    """
    Maximum independent set by branch and bound.

    Args:
        graph: Symmetric adjacency mapping.
        node_limit: Largest graph the solver agrees to handle.

    Returns:
        The independence number and the lexicographically smallest maximum independent set.

    Raises:
        OracleRefusal: If the graph has more than node_limit vertices.
    """
    order, adj = _bitmask_graph(graph, node_limit)
    solver = _BranchAndBound(adj)
    everything = (1 << len(order)) - 1
    size = solver.size(everything)

    witness = []
    cand, need = everything, size
    for i in range(len(order)):
        if need == 0:
            break
        if not (cand >> i) & 1:
            continue
        later = cand & ~((1 << (i + 1)) - 1)
        rest = later & ~adj[i]
        if 1 + solver.size(rest) >= need:
            witness.append(order[i])
            cand, need = rest, need - 1
        else:
            cand = later
    return MisResult(size, tuple(witness))


def independent_kissing_number(graph: Graph, node_limit: int = DEFAULT_NODE_LIMIT) -> IknResult:
    """
    Largest independent set inside a single neighbourhood, maximised over all vertices.

    Ties go to the smallest centre id. A graph without edges has independent kissing number 0.

    Raises:
        OracleRefusal: If some neighbourhood has more than node_limit vertices.
    """
    oversized = [v for v in graph if len(graph[v]) > node_limit]
    if oversized:
        raise OracleRefusal(f"Neighbourhood of vertex {min(oversized)} exceeds the node limit {node_limit}")
    best = IknResult(0, None, ())
    for v in sorted(graph):
        if len(graph[v]) <= best.zeta:
            continue
        mis = exact_mis(induced_subgraph(graph, frozenset(graph[v])), node_limit)
        if mis.size > best.zeta:
            best = IknResult(mis.size, v, mis.witness)
    return best


def is_independent(graph: Graph, vertices: Set[int]) -> bool:
    return all(not (graph[v] & vertices) for v in vertices)


def verify_ratio(stream: ArrivalSequence, run: RunResult, node_limit: int = DEFAULT_NODE_LIMIT) -> RatioCheck:
    """
    Compare a run against the exact optimum and the independent kissing number of the instance.

    ``bound_satisfied`` states opt <= zeta * alg, the guarantee of FirstFit; on an edgeless graph
    zeta is 0 and the bound reads opt <= alg. ``maximal`` holds when the accepted set is independent and
    dominating, which FirstFit always achieves.
    """
    graph = stream.adjacency()
    opt = exact_mis(graph, node_limit).size
    zeta = independent_kissing_number(graph, node_limit).zeta
    dominating = bool(nx.is_dominating_set(to_networkx(graph), run.accepted))
    accepted = frozenset(run.accepted)
    return RatioCheck(
        opt=opt,
        alg=run.size,
        ratio=empirical_ratio(opt, run),
        zeta=zeta,
        bound_satisfied=opt <= max(zeta, 1) * run.size,
        dominating=dominating,
        maximal=dominating and is_independent(graph, accepted),
    )


def class_kissing_search(
    M: float,
    dim: int,
    configs: int,
    seed: int,
    count: Optional[int] = None,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> dict[tuple[int, ...], int]:
    """
    Randomized search for large independent neighbourhoods among same-class hyper-rectangles.

    For every class, ``configs`` random configurations of a centre rectangle and ``count``
    same-class rectangles touching it are drawn; the result maps each class to the largest
    independent set found inside the neighbourhood of any rectangle of any configuration.
    """
    if configs < 1:
        raise UsageError(f"configs must be at least 1, got {configs}")
    if count is None:
        count = min(2 * 4**dim, node_limit)
    rng = np.random.default_rng(seed)
    best: dict[tuple[int, ...], int] = {}
    for cls in all_rect_classes(M, dim):
        found = 0
        for _ in range(configs):
            graph = intersection_graph(random_class_neighbourhood(M, cls, count, rng))
            for v in sorted(graph, key=lambda u: -len(graph[u])):
                if len(graph[v]) > found:
                    found = max(found, independence_number(induced_subgraph(graph, graph[v]), node_limit))
        best[cls] = found
    return best
