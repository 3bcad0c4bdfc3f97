"""Loaders for the public communities.

* Zachary karate club: weighted co-attendance edge list (34 members, 78 pairs,
  total weight 231) and the post-split club of each member, bundled as CSV.
  Member 1 is the instructor (Mr. Hi), member 34 the president (John A.).
* SocioPatterns high school (2013): not bundled. Point the loaders at the
  files ``High-School_data_2013.csv``, ``Friendship-network_data_2013.csv``
  and ``metadata_2013.txt`` from sociopatterns.org.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError
from .graph import (
    InteractionGraph,
    NodeAttributes,
    RelationLabels,
    ingest_interactions,
    load_attributes,
    make_relations,
    read_edge_list,
)
from .hype import DyadMarginals
from .models import TrainingSet, dyad_features

KARATE_LEADERS = ("1", "34")


def _data_path(name: str) -> Path:
    return Path(str(resources.files("signrel") / "data" / name))


def load_karate() -> tuple[InteractionGraph, NodeAttributes]:
    g = read_edge_list(_data_path("karate_edges.csv"), directed=False)
    attrs = load_attributes(_data_path("karate_factions.csv"), graph=g)
    return g, attrs


def karate_paths() -> dict[str, Path]:
    return {"edges": _data_path("karate_edges.csv"), "factions": _data_path("karate_factions.csv")}


def leader_contrast_set(
    g: InteractionGraph,
    attrs: NodeAttributes,
    marginals: DyadMarginals | None = None,
    predictor: str = "phi",
    attribute: str = "faction",
    leaders: tuple[str, str] = KARATE_LEADERS,
) -> TrainingSet:
    """One row per non-leader member: its relation to the first leader minus its relation to the second.

    The response is 1 when the member shares the first leader's faction.
    Because the features are differences of the usual dyad features, the
    fitted slopes keep their meaning as weights on ``P(X < A)`` and
    ``P(X > A)`` (or on ``A`` and ``mu`` for the baselines).
    """
    idx = g.index
    la, lb = leaders
    target = attrs.get(la, attribute)
    members = [v for v in g.nodes if v not in leaders and attrs.get(v, attribute) is not None]
    ia, ib = idx[la], idx[lb]
    rows = np.array([idx[v] for v in members])
    fa = dyad_features(predictor, g, np.column_stack([rows, np.full(len(rows), ia)]), marginals)
    fb = dyad_features(predictor, g, np.column_stack([rows, np.full(len(rows), ib)]), marginals)
    y = np.array([1.0 if attrs.get(v, attribute) == target else 0.0 for v in members])
    return TrainingSet(X=fa - fb, y=y, dyads=tuple((v, la) for v in members), predictor=predictor)


def read_sociopatterns_contacts(path, merge_gap: int | None = 20) -> InteractionGraph:
    """Contacts ``t i j Ci Cj`` (whitespace separated, 20 s resolution).

    With ``merge_gap``, consecutive windows of the same pair no more than
    ``merge_gap`` seconds apart are one interaction.
    """
    records = []
    last: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise ParseError(f"{path}: expected 't i j ...'", lineno)
            try:
                t = int(parts[0])
            except ValueError:
                raise ParseError(f"{path}: bad timestamp {parts[0]!r}", lineno) from None
            i, j = sorted((parts[1], parts[2]))
            prev = last.get((i, j))
            last[i, j] = t
            if merge_gap is not None and prev is not None and 0 <= t - prev <= merge_gap:
                continue
            records.append((i, j, t))
    return ingest_interactions(records, directed=False)


def read_sociopatterns_friendship(path, surveyed=None) -> RelationLabels:
    """Friendship pairs ``i j``; declared in either direction counts for both."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise ParseError(f"{path}: expected 'i j'", lineno)
            entries[parts[0], parts[1]] = 1
    return make_relations(entries, "binary", surveyed=surveyed, symmetrize=True)


def read_sociopatterns_metadata(path) -> NodeAttributes:
    """``id class gender`` (tab separated); ``Unknown`` gender is treated as missing."""
    values = {}
    cats: dict[str, set] = {"class": set(), "gender": set()}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise ParseError(f"{path}: expected 'id class gender'", lineno)
            node, cls, gender = parts[:3]
            entry = {"class": cls}
            cats["class"].add(cls)
            if gender.lower() not in ("unknown", "na", ""):
                entry["gender"] = gender
                cats["gender"].add(gender)
            values[node] = entry
    return NodeAttributes(values=values, categories={k: tuple(sorted(v)) for k, v in cats.items()})


def find_highschool(root) -> dict[str, Path] | None:
    """Locate the three high-school files under ``root``; ``None`` if any is missing."""
    if root is None:
        return None
    root = Path(root)
    names = {
        "contacts": "High-School_data_2013.csv",
        "friendship": "Friendship-network_data_2013.csv",
        "metadata": "metadata_2013.txt",
    }
    paths = {k: root / v for k, v in names.items()}
    return paths if all(p.exists() for p in paths.values()) else None
