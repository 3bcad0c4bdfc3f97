"""Reusable experiment drivers shared by ``scripts/`` and the acceptance suite."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .datasets import (
    KARATE_LEADERS,
    find_highschool,
    leader_contrast_set,
    load_karate,
    read_sociopatterns_contacts,
    read_sociopatterns_friendship,
)
from .evaluation import IN_SAMPLE, METHODS, EvalReport, SplitPolicy, compare_training_sets, evaluate
from .graph import make_relations
from .hype import all_marginals, build_possibility_matrix
from .models import FitResult, FitSpec, assemble_training_set, fit
from .phi import build_signed_network
from .synth import SynthConfig, generate

logger = logging.getLogger(__name__)


@dataclass
class KarateResult:
    fit: FitResult
    in_sample: EvalReport
    out_of_sample: EvalReport
    comparison: dict  # method -> out-of-sample EvalReport
    signed: object = None


def karate_reproduction(policy: SplitPolicy = SplitPolicy(k=5, seed=0)) -> KarateResult:
    """Faction ~ phi on the karate club, plus the threshold and modularity baselines."""
    g, attrs = load_karate()
    xi = build_possibility_matrix(g)
    mg = all_marginals(xi, g)
    sets = {m: leader_contrast_set(g, attrs, mg, predictor=m) for m in METHODS}
    spec = FitSpec(predictor="phi", response="logistic")
    model = fit(spec, sets["phi"])
    comparison = compare_training_sets(sets, "logistic", policy)
    return KarateResult(
        fit=model,
        in_sample=evaluate(spec, sets["phi"], IN_SAMPLE),
        out_of_sample=comparison["phi"],
        comparison=comparison,
        signed=build_signed_network(g, xi, model.phi_coefficients(), marginals=mg),
    )


def karate_factions():
    g, attrs = load_karate()
    col = attrs.column("faction")
    return {f: [v for v in g.nodes if col.get(v) == f] for f in sorted(set(col.values()))}, KARATE_LEADERS


@dataclass
class SeedOutcome:
    seed: int
    ba: dict  # method -> out-of-sample balanced accuracy
    a: float
    b: float
    fold_scores: list = field(default_factory=list)


def synthetic_recovery(config: SynthConfig = SynthConfig(), seeds=range(20), k: int = 5) -> list[SeedOutcome]:
    """Per seed: generate, compare the three methods out of sample, fit phi on everything."""
    out = []
    for s in seeds:
        com = generate(config.replace(seed=s))
        g = com.graph
        mg = all_marginals(build_possibility_matrix(g), g)
        sets = {m: assemble_training_set(com.labels, g, mg, predictor=m) for m in METHODS}
        reports = compare_training_sets(sets, "logistic", SplitPolicy(k=k, seed=s))
        model = fit(FitSpec(), sets["phi"])
        out.append(SeedOutcome(
            seed=s,
            ba={m: r.balanced_accuracy for m, r in reports.items()},
            a=model.coef["a"],
            b=model.coef["b"],
            fold_scores=reports["phi"].fold_scores,
        ))
    return out


@dataclass
class DegreeCorrection:
    seed: int
    phi_deviation: float  # mean phi over top-decile-activity dyads minus the global mean
    threshold_share: float  # share of those dyads that raw counts place in their own top decile


def degree_correction(config: SynthConfig, seeds=range(20), quantile: float = 0.9) -> list[DegreeCorrection]:
    """Compare phi and raw counts on the most active dyads of a community without planted relations.

    Ties in the raw-count ranking are broken at random so equal counts do not
    favour any dyad.
    """
    out = []
    for s in seeds:
        com = generate(config.replace(seed=s))
        g = com.graph
        net = build_signed_network(g, build_possibility_matrix(g))
        iu, ju = np.triu_indices(config.n, 1)
        idx = g.index
        gi = np.array([idx[com.node_ids[i]] for i in iu])
        gj = np.array([idx[com.node_ids[j]] for j in ju])
        phi = net.phi[gi, gj]
        act = com.activity[iu] * com.activity[ju]
        counts = com.dyad_counts[iu, ju]
        top = act >= np.quantile(act, quantile)
        rng = np.random.default_rng(s)
        order = np.lexsort((rng.random(len(counts)), -counts))
        n_top = int(round((1 - quantile) * len(counts)))
        top_a = np.zeros(len(counts), dtype=bool)
        top_a[order[:n_top]] = True
        ok = ~np.isnan(phi)
        out.append(DegreeCorrection(
            seed=s,
            phi_deviation=float(np.mean(phi[top & ok]) - np.mean(phi[ok])),
            threshold_share=float(np.sum(top & top_a) / np.sum(top)),
        ))
    return out


def highschool_comparison(root, policy: SplitPolicy = SplitPolicy(k=5, seed=0)) -> dict | None:
    """Friendship ~ interactions on the SocioPatterns high school data; ``None`` if the files are absent."""
    paths = find_highschool(root)
    if paths is None:
        return None
    g = read_sociopatterns_contacts(paths["contacts"])
    declared = read_sociopatterns_friendship(paths["friendship"])
    # the survey covers the students who answered it and appear in the contacts
    keep = {v for v in declared.surveyed if v in g.index}
    labels = make_relations(
        {(v, w): r for (v, w), r in declared.entries.items() if v in keep and w in keep},
        "binary", surveyed=keep,
    )
    logger.info("high school: %d nodes, %d surveyed, %d friendship dyads", g.n, len(keep), len(labels.unordered()))
    mg = all_marginals(build_possibility_matrix(g), g)
    sets = {m: assemble_training_set(labels, g, mg, predictor=m) for m in METHODS}
    return compare_training_sets(sets, "logistic", policy)
