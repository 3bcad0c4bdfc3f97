"""Synthetic communities with planted signed relations.

Interactions are drawn as ``m`` multinomial draws over undirected dyads with
probability proportional to ``activity(v) * activity(w) * beta(relation)``,
so positive relations boost and negative relations damp interaction rates.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .graph import InteractionGraph, RelationLabels, ingest_interactions, make_relations


@dataclass(frozen=True)
class SynthConfig:
    n: int = 60
    groups: int = 2
    p_pos_within: float = 0.5
    p_neg_between: float = 0.6
    activity_sigma: float = 0.5
    m: int = 5000
    beta_pos: float = 3.0
    beta_neg: float = 0.3
    surveyed_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_pos_within", "p_neg_between", "surveyed_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        # equality is allowed: beta_pos == beta_neg == 1 is the null community
        if not (self.beta_pos >= 1.0 >= self.beta_neg > 0.0):
            raise ValueError("need beta_pos >= 1 >= beta_neg > 0")
        if self.m < 0 or self.n < 2 or self.groups < 1 or self.activity_sigma < 0:
            raise ValueError("need m >= 0, n >= 2, groups >= 1, activity_sigma >= 0")

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def replace(self, **kw) -> "SynthConfig":
        d = asdict(self)
        d.update(kw)
        return SynthConfig(**d)


@dataclass(frozen=True)
class SynthCommunity:
    config: SynthConfig
    graph: InteractionGraph
    labels: RelationLabels
    planted: np.ndarray  # n x n, +1 / 0 / -1 by node index of ``node_ids``
    activity: np.ndarray
    group: np.ndarray
    dyad_counts: np.ndarray  # undirected event counts, n x n symmetric
    node_ids: tuple[str, ...]

    def write(self, outdir) -> dict[str, Path]:
        """Write CSVs in the ingestion formats; binary labels list every surveyed pair explicitly."""
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        ids = self.node_ids
        n = len(ids)
        paths = {
            "interactions": out / "interactions.csv",
            "labels": out / "labels.csv",
            "attributes": out / "attributes.csv",
            "planted": out / "planted.csv",
        }
        with open(paths["interactions"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", "target", "weight"])
            for i in range(n):
                for j in range(i + 1, n):
                    if self.dyad_counts[i, j]:
                        w.writerow([ids[i], ids[j], int(self.dyad_counts[i, j])])
        surveyed = sorted(self.labels.surveyed, key=ids.index)
        with open(paths["labels"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", "target", "relation"])
            for a, v in enumerate(surveyed):
                for u in surveyed[a + 1:]:
                    w.writerow([v, u, int(self.labels.entries.get((v, u), 0))])
        with open(paths["attributes"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "group"])
            for i in range(n):
                w.writerow([ids[i], f"G{self.group[i] + 1}"])
        with open(paths["planted"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", "target", "sign"])
            for i in range(n):
                for j in range(i + 1, n):
                    w.writerow([ids[i], ids[j], int(self.planted[i, j])])
        return paths


def generate(config: SynthConfig) -> SynthCommunity:
    rng = np.random.default_rng(config.seed)
    n = config.n
    ids = tuple(f"v{i:03d}" for i in range(n))
    group = np.arange(n) * config.groups // n
    activity = rng.lognormal(mean=0.0, sigma=config.activity_sigma, size=n)

    iu, ju = np.triu_indices(n, 1)
    same = group[iu] == group[ju]
    draw = rng.random(len(iu))
    sign = np.zeros(len(iu), dtype=int)
    sign[same & (draw < config.p_pos_within)] = 1
    sign[~same & (draw < config.p_neg_between)] = -1
    planted = np.zeros((n, n), dtype=int)
    planted[iu, ju] = sign
    planted[ju, iu] = sign

    beta = np.where(sign > 0, config.beta_pos, np.where(sign < 0, config.beta_neg, 1.0))
    rate = activity[iu] * activity[ju] * beta
    counts = rng.multinomial(config.m, rate / rate.sum())
    dyad_counts = np.zeros((n, n), dtype=np.int64)
    dyad_counts[iu, ju] = counts
    dyad_counts[ju, iu] = counts

    n_survey = int(round(config.surveyed_fraction * n))
    surveyed_idx = np.sort(rng.choice(n, size=n_survey, replace=False))
    in_survey = np.zeros(n, dtype=bool)
    in_survey[surveyed_idx] = True
    entries = {
        (ids[i], ids[j]): 1
        for i, j, s in zip(iu, ju, sign)
        if s > 0 and in_survey[i] and in_survey[j]
    }
    labels = make_relations(entries, "binary", surveyed=[ids[i] for i in surveyed_idx])

    records = [(ids[i], ids[j], None, int(c)) for i, j, c in zip(iu, ju, counts) if c]
    graph = ingest_interactions(records, directed=False, nodes=ids)
    return SynthCommunity(
        config=config, graph=graph, labels=labels, planted=planted,
        activity=activity, group=group, dyad_counts=dyad_counts, node_ids=ids,
    )
