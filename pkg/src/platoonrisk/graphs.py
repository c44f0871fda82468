"""Platoon communication topologies, graph Laplacians, and spectral decomposition.

Vehicles are nodes of a connected undirected weighted graph.  Supported
families: the complete graph, the p-cycle (circulant graph where each node is
linked to its p/2 nearest ring neighbours on each side; p=2 is the plain
ring), the path, and explicit edge lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import GraphError

#: tolerance for the zero eigenvalue of a Laplacian
_ZERO_EIG_TOL = 1e-10
#: per-eigenpair residual tolerance ||L q - lambda q||
_RESIDUAL_TOL = 1e-8
#: elementwise orthonormality tolerance for Q^T Q - I
_ORTHO_TOL = 1e-9

TOPOLOGY_KINDS = ("complete", "pcycle", "path", "explicit")


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted communication graph on n >= 2 vehicles.

    ``edges`` holds (i, j, w) triples with 1-based endpoints, i < j and w > 0.
    Construction verifies simplicity and connectivity.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n < 2:
            raise GraphError(f"need at least 2 vehicles, got n={self.n}")
        seen = set()
        for i, j, w in self.edges:
            if not (1 <= i < j <= self.n):
                raise GraphError(f"edge ({i},{j}) violates 1 <= i < j <= n={self.n}")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i},{j})")
            if not w > 0.0:
                raise GraphError(f"edge ({i},{j}) has nonpositive weight {w}")
            seen.add((i, j))
        if not self._connected():
            raise GraphError("graph is disconnected")

    def _connected(self) -> bool:
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i, j, _ in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {1}
        stack = [1]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.n


@dataclass(frozen=True)
class LaplacianSpectrum:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a graph Laplacian.

    The null-space eigenvector is fixed to +(1/sqrt(n)) * ones; the sign of
    every other eigenvector is fixed by making its largest-magnitude entry
    positive, so the decomposition is deterministic.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns q_1 .. q_n
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, float))
        object.__setattr__(self, "eigenvectors", np.asarray(self.eigenvectors, float))
        if not self._validate:
            return
        lam, Q = self.eigenvalues, self.eigenvectors
        n = lam.shape[0]
        if Q.shape != (n, n):
            raise ValueError("eigenvector matrix shape mismatch")
        if abs(lam[0]) > _ZERO_EIG_TOL:
            raise ValueError(f"smallest eigenvalue {lam[0]} not zero within {_ZERO_EIG_TOL}")
        if np.any(np.diff(lam) < -1e-12):
            raise ValueError("eigenvalues not ascending")
        if np.max(np.abs(Q.T @ Q - np.eye(n))) > _ORTHO_TOL:
            raise ValueError("eigenvectors not orthonormal")

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def _resolve_weights(n_edges: int, weights, seed) -> np.ndarray:
    """Weights for ``n_edges`` edges: a uniform value or a seeded [lo, hi] draw.

    Random weights come from numpy's PCG64 generator keyed by the 64-bit
    ``seed``, drawn once per edge in canonical (i, j)-sorted order, so graphs
    are bit-reproducible across runs and platforms.
    """
    if np.isscalar(weights):
        w = float(weights)
        if w <= 0:
            raise GraphError(f"uniform weight must be positive, got {w}")
        return np.full(n_edges, w)
    lo, hi = float(weights[0]), float(weights[1])
    if not (0 < lo <= hi):
        raise GraphError(f"weight range [{lo}, {hi}] must satisfy 0 < lo <= hi")
    if seed is None:
        raise GraphError("a seed is required for random edge weights")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    return rng.uniform(lo, hi, size=n_edges)


def build_topology(kind: str, n: int, p: int | None = None,
                   weights=1.0, seed: int | None = None) -> WeightedGraph:
    """Construct a platoon topology of the requested shape.

    kind: "complete", "pcycle" (requires even p with 2 <= p <= n-1), or "path".
    weights: a positive scalar, or a (lo, hi) range sampled with ``seed``.
    """
    if n < 2:
        raise GraphError(f"need at least 2 vehicles, got n={n}")
    if kind == "complete":
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    elif kind == "pcycle":
        if p is None:
            raise GraphError("pcycle topology requires p")
        if p % 2 != 0 or not (2 <= p <= n - 1):
            raise GraphError(f"pcycle requires even p with 2 <= p <= n-1, got p={p}, n={n}")
        pairs = sorted(
            {tuple(sorted(((i % n) + 1, ((i + s) % n) + 1)))
             for i in range(n) for s in range(1, p // 2 + 1)}
        )
    elif kind == "path":
        pairs = [(i, i + 1) for i in range(1, n)]
    else:
        raise GraphError(f"unknown topology kind {kind!r}")
    w = _resolve_weights(len(pairs), weights, seed)
    edges = tuple((i, j, float(wk)) for (i, j), wk in zip(pairs, w))
    return WeightedGraph(n=n, edges=edges)


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Weighted graph Laplacian: degree matrix minus weighted adjacency."""
    L = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        a, b = i - 1, j - 1
        L[a, b] -= w
        L[b, a] -= w
        L[a, a] += w
        L[b, b] += w
    return L


def spectrum(L: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> LaplacianSpectrum:
    """Spectral decomposition of a symmetric Laplacian via cyclic Jacobi rotations.

    Eigenvalues are returned ascending; the zero-mode eigenvector is replaced
    by exactly +(1/sqrt(n)) * ones and remaining signs are canonicalised.
    Raises EigenConvergenceError if the sweep cap is hit and ValueError if the
    result violates the spectrum invariants.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    scale = max(1.0, float(np.max(np.abs(L))))
    if np.max(np.abs(L - L.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within 1e-12")
    lam, Q = _kernels.jacobi_eigh(L, tol, max_sweeps)
    order = np.argsort(lam, kind="stable")
    lam = np.asarray(lam)[order]
    Q = np.asarray(Q)[:, order]
    # pin the null-space basis vector; for a connected graph it is unique up to sign
    Q[:, 0] = 1.0 / np.sqrt(n)
    lam[0] = 0.0 if abs(lam[0]) <= _ZERO_EIG_TOL else lam[0]
    for k in range(1, n):
        col = Q[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            Q[:, k] = -col
    spec = LaplacianSpectrum(eigenvalues=lam, eigenvectors=Q)
    res = np.max(np.linalg.norm(L @ Q - Q * lam[None, :], axis=0))
    if res > _RESIDUAL_TOL:
        raise ValueError(f"eigenpair residual {res:.3e} exceeds {_RESIDUAL_TOL}")
    return spec


def graph_from_spec(doc: dict) -> WeightedGraph:
    """Build a WeightedGraph from its JSON document form.

    {"kind": "complete"|"pcycle"|"path", "n": int, "p": int?, "weights":
    {"uniform": w} | {"range": [lo, hi], "seed": int}} or
    {"kind": "explicit", "n": int, "edges": [[i, j, w], ...]}.
    """
    kind = doc["kind"]
    n = int(doc["n"])
    if kind == "explicit":
        edges = tuple((int(i), int(j), float(w)) for i, j, w in doc["edges"])
        return WeightedGraph(n=n, edges=edges)
    wspec = doc.get("weights", {"uniform": 1.0})
    if "uniform" in wspec:
        return build_topology(kind, n, p=doc.get("p"), weights=float(wspec["uniform"]))
    lo, hi = wspec["range"]
    return build_topology(kind, n, p=doc.get("p"), weights=(lo, hi), seed=int(wspec["seed"]))
