"""Hypergeometric ensemble null model.

Each ordered dyad ``(v, w)`` owns ``Xi[v, w] = k_out(v) * k_in(w)`` balls of an
urn holding ``M`` balls in total; a realisation draws ``m`` balls without
replacement. The dyad count ``X[v, w]`` is hypergeometric and the observed
count ``A[v, w]`` is located in its distribution through the lower tail,
point mass and upper tail.

Point masses use Loader's saddle-point expansion (``stirlerr`` and ``bd0``),
which stays accurate when ``M`` is of order 1e12 where naive log-gamma
differences lose several digits.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ModelInconsistencyError
from .graph import InteractionGraph, degrees

LN_2PI = math.log(2.0 * math.pi)
LN_SQRT_2PI = 0.5 * LN_2PI

_S0 = 1.0 / 12
_S1 = 1.0 / 360
_S2 = 1.0 / 1260
_S3 = 1.0 / 1680
_S4 = 1.0 / 1188

# relative size below which tail terms are dropped
_TAIL_EPS = 1e-17


def stirlerr(n: float) -> float:
    """``log(n!) - log(sqrt(2 pi n) (n/e)^n)`` for ``n >= 1``."""
    if n <= 15.0:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - LN_SQRT_2PI
    nn = n * n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


def bd0(x: float, np_: float) -> float:
    """Deviance term ``x log(x/np) + np - x`` without cancellation."""
    if abs(x - np_) < 0.1 * (x + np_):
        v = (x - np_) / (x + np_)
        s = (x - np_) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / np_) + np_ - x


def log_binom_raw(x: float, n: float, p: float, q: float) -> float:
    if p == 0.0:
        return 0.0 if x == 0 else -math.inf
    if q == 0.0:
        return 0.0 if x == n else -math.inf
    if x == 0:
        if n == 0:
            return 0.0
        return -bd0(n, n * q) - n * p if p < 0.1 else n * math.log(q)
    if x == n:
        return -bd0(n, n * p) - n * q if q < 0.1 else n * math.log(p)
    if x < 0 or x > n:
        return -math.inf
    lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q)
    lf = LN_2PI + math.log(x) + math.log1p(-x / n)
    return lc - 0.5 * lf


def log_hypergeom_pmf(x: int, successes: int, population: int, draws: int) -> float:
    """``log P(X = x)`` for ``draws`` taken from ``population`` balls of which ``successes`` are marked."""
    failures = population - successes
    if x < 0 or x > successes or x > draws or draws - x > failures:
        return -math.inf
    if draws == 0:
        return 0.0
    p = draws / population
    q = (population - draws) / population
    return (
        log_binom_raw(float(x), float(successes), p, q)
        + log_binom_raw(float(draws - x), float(failures), p, q)
        - log_binom_raw(float(draws), float(population), p, q)
    )


def _log_tail(a0, step, lpe, successes, population, draws, stop):
    """Log of the sum of pmf terms from ``a0 + step`` outward to ``stop`` (inclusive).

    Terms are generated by the pmf ratio and must be non-increasing, which
    holds whenever the walk moves away from the mode.
    """
    failures = population - successes
    lt = lpe
    a = a0
    acc = 0.0  # sum of exp(term - lpe)
    while a != stop:
        if step < 0:
            num = a * (failures - draws + a)
            den = (successes - a + 1) * (draws - a + 1)
        else:
            num = (successes - a) * (draws - a)
            den = (a + 1) * (failures - draws + a + 1)
        if num == 0:
            break
        lt += math.log(num / den)
        a += step
        term = math.exp(lt - lpe)
        acc += term
        if term < _TAIL_EPS * acc:
            break
    if acc == 0.0:
        return -math.inf
    return lpe + math.log(acc)


def hypergeom_tails(observed: int, successes: int, population: int, draws: int) -> tuple[float, float, float]:
    """``(P(X < observed), P(X = observed), P(X > observed))``.

    The tail on the far side of the mode is summed directly; the other one is
    the complement. At the mode both are summed.
    """
    if successes < 0 or draws < 0 or successes > population or draws > population:
        raise ModelInconsistencyError(
            f"invalid urn: successes={successes}, draws={draws}, population={population}"
        )
    lo = max(0, draws - (population - successes))
    hi = min(successes, draws)
    if observed > successes:
        raise ModelInconsistencyError(
            f"observed count {observed} exceeds the urn capacity {successes}"
        )
    if observed < lo or observed > hi:
        raise ModelInconsistencyError(
            f"observed count {observed} outside the support [{lo}, {hi}]"
        )
    if lo == hi:
        return 0.0, 1.0, 0.0
    lpe = log_hypergeom_pmf(observed, successes, population, draws)
    pe = math.exp(lpe)
    mode = ((draws + 1) * (successes + 1)) // (population + 2)
    mode = min(max(mode, lo), hi)
    pu = po = None
    if observed <= mode:
        pu = 0.0 if observed == lo else math.exp(_log_tail(observed, -1, lpe, successes, population, draws, lo))
    if observed >= mode:
        po = 0.0 if observed == hi else math.exp(_log_tail(observed, 1, lpe, successes, population, draws, hi))
    if pu is None:
        pu = max(0.0, 1.0 - pe - po)
    elif po is None:
        po = max(0.0, 1.0 - pe - pu)
    return pu, pe, po


def hypergeom_pmf_vector(successes: int, population: int, draws: int) -> np.ndarray:
    """Full pmf over ``0..min(successes, draws)``; for small urns and checks."""
    hi = min(successes, draws)
    return np.array([math.exp(log_hypergeom_pmf(a, successes, population, draws)) for a in range(hi + 1)])


@dataclass(frozen=True)
class PossibilityMatrix:
    """Urn capacities ``xi[v, w]`` and total urn size ``M`` for ``m`` draws."""

    xi: np.ndarray
    M: int
    m: int
    include_diagonal: bool = False

    def __getitem__(self, ij) -> int:
        return int(self.xi[ij])


def _int_dtype(m: int):
    # products of degrees are bounded by m**2
    return np.int64 if m < 2**31 else object


def build_possibility_matrix(g: InteractionGraph, include_diagonal: bool = False) -> PossibilityMatrix:
    k_out, k_in = degrees(g)
    dtype = _int_dtype(g.m)
    xi = np.outer(k_out.astype(dtype), k_in.astype(dtype))
    M = g.m * g.m
    if not include_diagonal:
        diag = sum(int(a) * int(b) for a, b in zip(k_out, k_in))
        M -= diag
        np.fill_diagonal(xi, 0)
    return PossibilityMatrix(xi=xi, M=int(M), m=g.m, include_diagonal=include_diagonal)


def log_ensemble_probability(g: InteractionGraph, xi: PossibilityMatrix) -> float:
    """``log Pr(X = A)`` of the whole observed configuration under the ensemble."""

    def log_comb(n, k):
        return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)

    total = -log_comb(xi.M, xi.m)
    for (i, j), a in g.edge_counts.items():
        cap = int(xi.xi[i, j])
        if a > cap:
            raise ModelInconsistencyError(f"A[{g.nodes[i]}, {g.nodes[j]}] = {a} exceeds Xi = {cap}")
        total += log_comb(cap, a)
    return total


def dyad_marginals(xi: PossibilityMatrix, g: InteractionGraph, v: str, w: str) -> tuple[float, float, float]:
    """``(p_under, p_eq, p_over)`` of one ordered dyad, addressed by node id."""
    idx = g.index
    i, j = idx[v], idx[w]
    cap = int(xi.xi[i, j])
    a = g.edge_counts.get((i, j), 0)
    if cap == 0:
        if a:
            raise ModelInconsistencyError(f"A[{v}, {w}] = {a} but Xi = 0")
        return 0.0, 1.0, 0.0
    return hypergeom_tails(a, cap, xi.M, xi.m)


@dataclass(frozen=True)
class DyadMarginals:
    """Dense per-dyad tail probabilities; the diagonal holds the degenerate triple."""

    nodes: tuple[str, ...]
    p_under: np.ndarray
    p_eq: np.ndarray
    p_over: np.ndarray
    counts: np.ndarray
    xi: np.ndarray

    def triple(self, v: str, w: str) -> tuple[float, float, float]:
        i, j = self.nodes.index(v), self.nodes.index(w)
        return float(self.p_under[i, j]), float(self.p_eq[i, j]), float(self.p_over[i, j])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["source", "target", "A", "Xi", "p_under", "p_eq", "p_over"])
            n = len(self.nodes)
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    out.writerow([
                        self.nodes[i], self.nodes[j], int(self.counts[i, j]), int(self.xi[i, j]),
                        format(self.p_under[i, j], ".17g"),
                        format(self.p_eq[i, j], ".17g"),
                        format(self.p_over[i, j], ".17g"),
                    ])


def _tails_batch(args):
    M, m, keys = args
    return [hypergeom_tails(a, cap, M, m) for a, cap in keys]


def all_marginals(xi: PossibilityMatrix, g: InteractionGraph, workers: int | None = None) -> DyadMarginals:
    """Marginals for every ordered dyad ``v != w``.

    Dyads sharing ``(A, Xi)`` share their result, so each distinct pair is
    evaluated once. ``workers > 1`` spreads distinct pairs over processes;
    the output does not depend on it.
    """
    n = g.n
    A = g.adjacency()
    if np.any(A > xi.xi):
        i, j = np.argwhere(A > xi.xi)[0]
        raise ModelInconsistencyError(
            f"A[{g.nodes[i]}, {g.nodes[j]}] = {A[i, j]} exceeds Xi = {xi.xi[i, j]}"
        )
    off = ~np.eye(n, dtype=bool)
    active = off & (xi.xi != 0)
    keys = sorted({(int(a), int(c)) for a, c in zip(A[active], xi.xi[active])})
    if workers and workers > 1 and len(keys) > 1000:
        chunks = [keys[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_tails_batch, [(xi.M, xi.m, c) for c in chunks]))
        table = {}
        for c, res in zip(chunks, parts):
            table.update(zip(c, res))
    else:
        table = dict(zip(keys, _tails_batch((xi.M, xi.m, keys))))
    pu = np.zeros((n, n))
    pe = np.ones((n, n))
    po = np.zeros((n, n))
    for i, j in zip(*np.nonzero(active)):
        pu[i, j], pe[i, j], po[i, j] = table[int(A[i, j]), int(xi.xi[i, j])]
    return DyadMarginals(nodes=g.nodes, p_under=pu, p_eq=pe, p_over=po, counts=A, xi=xi.xi)
