"""Directed graphs from edge lists and the centrality rankers built on them."""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp
from sklearn.exceptions import ConvergenceWarning

from .ranking import Ranking, rank_by_score

logger = logging.getLogger(__name__)

METRICS = ("indegree", "outdegree", "w_indegree", "w_outdegree", "pagerank", "w_pagerank", "hub", "authority")


class EdgeListError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ScoreVector:
    scores: Mapping
    metric_name: str = ""

    def __getitem__(self, c) -> float:
        return self.scores[c]

    def __len__(self) -> int:
        return len(self.scores)


class Graph:
    """Directed graph with positive edge weights and no self-loops.

    Parallel edges are collapsed to weight 1 (``mode="collapse"``) or have
    their weights summed (``mode="sum"``).
    """

    def __init__(self, edges: Iterable = (), nodes: Iterable = (), mode: Literal["collapse", "sum"] = "collapse"):
        if mode not in ("collapse", "sum"):
            raise ValueError(f"mode must be 'collapse' or 'sum', got {mode!r}")
        self.mode = mode
        self._index: dict = {}
        self.nodes: list = []
        self.dropped_self_loops = 0
        for n in nodes:
            self._add_node(n)
        acc: dict = {}
        for edge in edges:
            src, dst = edge[0], edge[1]
            w = float(edge[2]) if len(edge) > 2 else 1.0
            if not (w > 0 and math.isfinite(w)):
                raise EdgeListError(f"edge weight must be positive and finite: {edge!r}")
            i, j = self._add_node(src), self._add_node(dst)
            if i == j:
                self.dropped_self_loops += 1
                continue
            if mode == "collapse":
                acc[(i, j)] = 1.0
            else:
                acc[(i, j)] = acc.get((i, j), 0.0) + w
        if self.dropped_self_loops:
            logger.warning("dropped %d self-loops", self.dropped_self_loops)
        n = len(self.nodes)
        if acc:
            (rows, cols), vals = zip(*acc.keys()), list(acc.values())
        else:
            rows, cols, vals = (), (), []
        self.adjacency = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)

    def _add_node(self, n) -> int:
        idx = self._index.get(n)
        if idx is None:
            idx = self._index[n] = len(self.nodes)
            self.nodes.append(n)
        return idx

    def __contains__(self, n) -> bool:
        return n in self._index

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz

    @property
    def edges(self) -> list:
        coo = self.adjacency.tocoo()
        return [(self.nodes[i], self.nodes[j], float(w)) for i, j, w in zip(coo.row, coo.col, coo.data)]

    def reverse(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.mode, g._index, g.nodes = self.mode, dict(self._index), list(self.nodes)
        g.dropped_self_loops = self.dropped_self_loops
        g.adjacency = self.adjacency.T.tocsr()
        return g

    def _vector(self, values, name: str) -> ScoreVector:
        return ScoreVector(dict(zip(self.nodes, map(float, values))), name)


def read_edge_list(path, mode: Literal["collapse", "sum"] = "collapse") -> Graph:
    """Read ``src<TAB>dst[<TAB>weight]`` lines; ``#`` lines are comments.

    Lines without a tab are split on whitespace.
    """
    path = Path(path)
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            parts = [p.strip() for p in parts]
            if len(parts) not in (2, 3) or not all(parts):
                raise EdgeListError(f"{path}:{lineno}: expected 'src<TAB>dst[<TAB>weight]', got {line!r}")
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError(f"{path}:{lineno}: weight {parts[2]!r} is not a number") from None
                if not (w > 0 and math.isfinite(w)):
                    raise EdgeListError(f"{path}:{lineno}: weight must be positive, got {parts[2]!r}")
                edges.append((parts[0], parts[1], w))
            else:
                edges.append((parts[0], parts[1]))
    return Graph(edges, mode=mode)


def degree(graph: Graph, direction: Literal["in", "out"] = "in", weighted: bool = False) -> ScoreVector:
    A = graph.adjacency
    if not weighted:
        A = A.copy()
        A.data[:] = 1.0
    if direction == "in":
        vals = np.asarray(A.sum(axis=0)).ravel()
    elif direction == "out":
        vals = np.asarray(A.sum(axis=1)).ravel()
    else:
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    name = ("w_" if weighted else "") + direction + "degree"
    return graph._vector(vals, name)


def pagerank(
    graph: Graph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
    weighted: bool = False,
) -> ScoreVector:
    """PageRank by power iteration with uniform teleportation.

    Out-edges are followed in proportion to their weight when ``weighted``.
    Dangling nodes spread their mass uniformly. Stops once the L1 change
    between iterates drops below ``tol``.
    """
    if not 0 < damping < 1:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    n = graph.n_nodes
    if n == 0:
        return ScoreVector({}, "pagerank")
    A = graph.adjacency
    if not weighted:
        A = A.copy()
        A.data[:] = 1.0
    out = np.asarray(A.sum(axis=1)).ravel()
    dangling = out == 0
    inv = np.divide(1.0, out, out=np.zeros(n), where=~dangling)
    # transpose of the row-stochastic transition matrix
    PT = (sp.diags(inv) @ A).T.tocsr()
    x = np.full(n, 1.0 / n)
    residual = math.inf
    for _ in range(max_iter):
        nxt = damping * (PT @ x + x[dangling].sum() / n) + (1.0 - damping) / n
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - x).sum())
        x = nxt
        if residual < tol:
            return graph._vector(x, "w_pagerank" if weighted else "pagerank")
    raise ConvergenceError(f"PageRank did not converge in {max_iter} iterations (L1 residual {residual:.3g})", residual)


def hits(graph: Graph, tol: float = 1e-10, max_iter: int = 200) -> tuple[ScoreVector, ScoreVector]:
    """Hub and authority scores by mutual reinforcement, L2-normalized each step."""
    if graph.n_edges == 0:
        raise ValueError("HITS is undefined on a graph without edges")
    A = graph.adjacency.copy()
    A.data[:] = 1.0
    AT = A.T.tocsr()
    n = graph.n_nodes
    hub = np.full(n, 1.0 / math.sqrt(n))
    auth = hub.copy()
    for _ in range(max_iter):
        new_auth = AT @ hub
        new_auth /= np.linalg.norm(new_auth)
        new_hub = A @ new_auth
        new_hub /= np.linalg.norm(new_hub)
        residual = np.abs(new_hub - hub).sum() + np.abs(new_auth - auth).sum()
        hub, auth = new_hub, new_auth
        if residual < tol:
            break
    else:
        warnings.warn(f"HITS stopped after {max_iter} iterations (residual {residual:.3g})", ConvergenceWarning)
    return graph._vector(hub, "hub"), graph._vector(auth, "authority")


def compute_metric(graph: Graph, name: str, **kwargs) -> ScoreVector:
    """Dispatch one of :data:`METRICS` by name."""
    if name == "indegree":
        return degree(graph, "in")
    if name == "outdegree":
        return degree(graph, "out")
    if name == "w_indegree":
        return degree(graph, "in", weighted=True)
    if name == "w_outdegree":
        return degree(graph, "out", weighted=True)
    if name == "pagerank":
        return pagerank(graph, **kwargs)
    if name == "w_pagerank":
        return pagerank(graph, weighted=True, **kwargs)
    if name in ("hub", "authority"):
        h, a = hits(graph, **kwargs)
        return h if name == "hub" else a
    raise ValueError(f"unknown metric {name!r}; choose from {', '.join(METRICS)}")


def ranking_from_scores(scores: ScoreVector | Mapping, seed: int = 0, candidates: Optional[Iterable] = None) -> Ranking:
    """Rank by descending score with seeded random tie-breaking.

    ``candidates`` restricts the ranking; ids missing from ``scores`` score 0.
    """
    s = scores.scores if isinstance(scores, ScoreVector) else scores
    if candidates is not None:
        s = {c: s.get(c, 0.0) for c in candidates}
    return rank_by_score(s, seed)
