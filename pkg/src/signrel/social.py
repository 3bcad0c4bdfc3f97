"""Homophily tests and triad importance on an inferred signed network."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GroupTooSmallError, ModelError, NoPositiveRelationsError
from .graph import NodeAttributes
from .phi import SIGN_ZERO_BAND, SignedNetwork

logger = logging.getLogger(__name__)

TRIAD_TYPES = ("+++", "++-", "+--", "---")

# factors below this are treated as underflow risks and handled in log space
_TINY = 1e-290


def binomial_upper_tail(n: int, l: int, p: float) -> float:
    """``P(Y >= l)`` for ``Y ~ Binomial(n, p)`` by exact summation, no normal approximation."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise ValueError("need n >= 0 and 0 <= p <= 1")
    if l <= 0:
        return 1.0
    if l > n:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    q = 1.0 - p
    logp, logq = math.log(p), math.log1p(-p)
    direct = []
    logs = []
    for i in range(l, n + 1):
        c = math.comb(n, i)
        pi, qi = p**i, q ** (n - i)
        if c < 1e300 and pi > _TINY and qi > _TINY:
            direct.append(float(c) * pi * qi)
        else:
            lc = math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
            logs.append(lc + i * logp + (n - i) * logq)
    total = math.fsum(direct)
    if logs:
        top = max(logs)
        if top > -math.inf:
            total += math.exp(top) * math.fsum(math.exp(t - top) for t in logs)
    return min(total, 1.0)


@dataclass
class HomophilyReport:
    attribute: str
    p_positive: float  # percent of positive-relation dyads sharing the attribute
    p_random: float  # percent of all attributed dyads sharing it
    n: int
    l: int
    p_value: float
    same_pairs: int = 0
    different_pairs: int = 0
    excluded_nodes: int = 0

    def summary(self) -> str:
        return (
            f"{self.attribute}: positive relations {self.p_positive:.1f}% | random pairs {self.p_random:.1f}%"
            f"  (n={self.n}, l={self.l}, p={self.p_value:.3g})"
        )


def _dyad_weight(signed: SignedNetwork):
    phi = signed.phi
    if signed.symmetric:
        return phi
    return np.nanmean(np.stack([phi, phi.T]), axis=0)


def homophily(
    signed: SignedNetwork,
    attrs: NodeAttributes,
    attribute: str,
    universe=None,
) -> HomophilyReport:
    """Share of positively related pairs with the same attribute value, against all pairs.

    Positive relation means inferred weight ``phi > 0``. Nodes lacking the
    attribute are dropped and counted in ``excluded_nodes``.
    """
    idx = signed.index
    nodes = list(universe) if universe is not None else list(signed.nodes)
    values = attrs.column(attribute)
    keep = [v for v in nodes if v in values and v in idx]
    excluded = len(nodes) - len(keep)
    cats = np.array([values[v] for v in keep], dtype=object)
    ii = np.array([idx[v] for v in keep], dtype=int)
    same = cats[:, None] == cats[None, :]
    upper = np.triu(np.ones((len(keep), len(keep)), dtype=bool), 1)
    m_sg = int(np.sum(same & upper))
    m_dg = int(np.sum(~same & upper))
    if m_sg + m_dg == 0:
        raise ModelError(f"no attributed pairs for {attribute!r}")
    W = _dyad_weight(signed)[np.ix_(ii, ii)]
    positive = upper & (W > SIGN_ZERO_BAND)
    n = int(positive.sum())
    if n == 0:
        raise NoPositiveRelationsError("no positive relations among attributed nodes")
    l = int(np.sum(positive & same))
    p = m_sg / (m_sg + m_dg)
    return HomophilyReport(
        attribute=attribute,
        p_positive=100.0 * l / n,
        p_random=100.0 * p,
        n=n,
        l=l,
        p_value=binomial_upper_tail(n, l, p),
        same_pairs=m_sg,
        different_pairs=m_dg,
        excluded_nodes=excluded,
    )


@dataclass
class TriadReport:
    group: str
    importance: dict = field(default_factory=dict)
    relative: dict = field(default_factory=dict)
    total: float = 0.0
    triads: dict = field(default_factory=dict)
    voided: int = 0

    def summary(self) -> str:
        parts = " ".join(f"{t}:{self.relative[t]:.2f}" for t in TRIAD_TYPES)
        return f"{self.group}: {parts}  (N={self.total:.4g})"


def triad_importance(
    signed: SignedNetwork,
    group,
    mode: str = "all",
    node: str | None = None,
    interacting_only: bool = False,
    name: str = "",
) -> TriadReport:
    """Importance of each sign pattern over all triples of ``group``.

    A triple's weight is the product of its three absolute weights. ``mode``
    is ``"all"``, ``"involving"`` (only triples containing ``node``) or
    ``"excluding"`` (``node`` removed from the group). Triples with a zero or
    undefined dyad are skipped and counted in ``voided``.
    """
    idx = signed.index
    members = []
    for v in group:
        if v in idx:
            members.append(v)
        else:
            logger.warning("group member %s not in the signed network", v)
    members = sorted(set(members), key=idx.__getitem__)
    if mode == "excluding":
        members = [v for v in members if v != node]
    elif mode == "involving":
        if node not in members:
            raise GroupTooSmallError(f"node {node!r} is not in the group")
    elif mode != "all":
        raise ValueError(f"unknown triad filter {mode!r}")
    if len(members) < 3:
        raise GroupTooSmallError(f"group has {len(members)} node(s), need at least 3")
    ii = np.array([idx[v] for v in members])
    W = _dyad_weight(signed)[np.ix_(ii, ii)]
    if interacting_only:
        if signed.counts is None:
            raise ModelError("interaction counts unavailable for this signed network")
        C = signed.counts[np.ix_(ii, ii)]
        W = np.where((C + C.T) > 0, W, np.nan)
    valid = ~np.isnan(W) & (np.abs(W) >= SIGN_ZERO_BAND)
    neg = W < 0
    absw = np.where(valid, np.abs(W), 0.0)
    g = len(members)
    sums = np.zeros(4)
    counts = np.zeros(4, dtype=np.int64)
    voided = 0
    anchor = [members.index(node)] if mode == "involving" else range(g)
    for a in anchor:
        if mode == "involving":
            others = np.array([b for b in range(g) if b != a])
        else:
            others = np.arange(a + 1, g)
        if len(others) < 2:
            continue
        j, k = np.triu_indices(len(others), 1)
        j, k = others[j], others[k]
        ok = valid[a, j] & valid[a, k] & valid[j, k]
        voided += int(np.sum(~ok))
        j, k = j[ok], k[ok]
        n_neg = neg[a, j].astype(int) + neg[a, k].astype(int) + neg[j, k].astype(int)
        w = absw[a, j] * absw[a, k] * absw[j, k]
        sums += np.bincount(n_neg, weights=w, minlength=4)
        counts += np.bincount(n_neg, minlength=4)
    total = float(sums.sum())
    importance = {t: float(s) for t, s in zip(TRIAD_TYPES, sums)}
    relative = {t: (s / total if total > 0 else math.nan) for t, s in importance.items()}
    label = name or (f"{mode} {node}" if node else "group")
    return TriadReport(
        group=label,
        importance=importance,
        relative=relative,
        total=total,
        triads={t: int(c) for t, c in zip(TRIAD_TYPES, counts)},
        voided=voided,
    )
