"""Signed relations from dyad marginals: ``phi = a * P(X < A) + b * P(X > A)``."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ModelInconsistencyError, NumericError, ParseError
from .graph import InteractionGraph, degrees
from .hype import DyadMarginals, PossibilityMatrix, all_marginals

SIGN_ZERO_BAND = 1e-12


@dataclass(frozen=True)
class PhiCoefficients:
    a: float = 1.0
    b: float = -1.0
    c: float = 0.0  # regression baseline; not used for the network weights

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not math.isfinite(getattr(self, name)):
                raise NumericError(f"coefficient {name} is not finite")

    @classmethod
    def from_dict(cls, d):
        return cls(a=float(d["a"]), b=float(d["b"]), c=float(d.get("c", 0.0)))


DEFAULT_COEFFICIENTS = PhiCoefficients()


def phi_score(p_under, p_over, coeff: PhiCoefficients = DEFAULT_COEFFICIENTS):
    """Works elementwise on arrays as well as on scalars."""
    return coeff.a * p_under + coeff.b * p_over


def sign_of(phi: float) -> int:
    if abs(phi) < SIGN_ZERO_BAND:
        return 0
    return 1 if phi > 0 else -1


@dataclass(frozen=True)
class SignedNetwork:
    """Dense weight matrix; ``nan`` marks dyads without a weight (both ends isolated, or the diagonal)."""

    nodes: tuple[str, ...]
    phi: np.ndarray
    coefficients: PhiCoefficients
    symmetric: bool = True
    graph_digest: str = ""
    counts: np.ndarray | None = None

    @property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def weight(self, v: str, w: str) -> float:
        idx = self.index
        return float(self.phi[idx[v], idx[w]])

    def sign(self, v: str, w: str) -> int:
        return sign_of(self.weight(v, w))

    def dyads(self):
        """``(i, j)`` pairs carrying a weight: ``i < j`` if symmetric, all ordered pairs otherwise."""
        n = len(self.nodes)
        for i in range(n):
            for j in range(i + 1 if self.symmetric else 0, n):
                if i != j and not math.isnan(self.phi[i, j]):
                    yield i, j

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["source", "target", "phi", "sign"])
            for i, j in self.dyads():
                p = float(self.phi[i, j])
                out.writerow([self.nodes[i], self.nodes[j], format(p, ".17g"), sign_of(p)])

    def sidecar(self) -> dict:
        return {
            "coefficients": asdict(self.coefficients),
            "symmetric": self.symmetric,
            "graph_digest": self.graph_digest,
            "nodes": len(self.nodes),
            "dyads": sum(1 for _ in self.dyads()),
        }


def read_signed_network(path) -> SignedNetwork:
    """Load a ``source,target,phi,sign`` CSV plus its ``.json`` sidecar when present."""
    order: dict[str, int] = {}
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"source", "target", "phi"} <= set(reader.fieldnames):
            raise ParseError(f"{path}: expected columns source,target,phi[,sign]", 1)
        for lineno, row in enumerate(reader, start=2):
            try:
                p = float(row["phi"])
            except (TypeError, ValueError):
                raise ParseError(f"{path}: phi {row['phi']!r} is not a number", lineno) from None
            v, w = row["source"], row["target"]
            order.setdefault(v, len(order))
            order.setdefault(w, len(order))
            rows.append((v, w, p))
    coeff, symmetric, digest = DEFAULT_COEFFICIENTS, True, ""
    side = str(path) + ".json"
    try:
        with open(side, encoding="utf-8") as fh:
            meta = json.load(fh)
        coeff = PhiCoefficients.from_dict(meta["coefficients"])
        symmetric = bool(meta.get("symmetric", True))
        digest = meta.get("graph_digest", "")
    except FileNotFoundError:
        pass
    n = len(order)
    phi = np.full((n, n), np.nan)
    for v, w, p in rows:
        phi[order[v], order[w]] = p
        if symmetric:
            phi[order[w], order[v]] = p
    return SignedNetwork(nodes=tuple(order), phi=phi, coefficients=coeff, symmetric=symmetric, graph_digest=digest)


def build_signed_network(
    g: InteractionGraph,
    xi: PossibilityMatrix,
    coeff: PhiCoefficients = DEFAULT_COEFFICIENTS,
    marginals: DyadMarginals | None = None,
    workers: int | None = None,
) -> SignedNetwork:
    """Weight every dyad of ``g`` by ``phi``.

    Non-interacting but active dyads are kept: their weight is usually
    negative. Graphs from undirected sources must yield a symmetric matrix.
    """
    if marginals is None:
        marginals = all_marginals(xi, g, workers=workers)
    phi = phi_score(marginals.p_under, marginals.p_over, coeff)
    k_out, k_in = degrees(g)
    isolated = (k_out + k_in) == 0
    phi = phi.astype(float, copy=True)
    phi[np.ix_(isolated, isolated)] = np.nan
    np.fill_diagonal(phi, np.nan)
    symmetric = not g.directed
    if symmetric:
        both = ~np.isnan(phi)
        diff = np.abs(phi - phi.T)[both]
        if diff.size and diff.max() > 1e-12:
            raise ModelInconsistencyError(f"phi asymmetric by {diff.max():.3g} on an undirected graph")
    return SignedNetwork(
        nodes=g.nodes,
        phi=phi,
        coefficients=coeff,
        symmetric=symmetric,
        graph_digest=g.digest(),
        counts=marginals.counts,
    )
