"""Splits, classification/regression metrics and method comparison."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ModelError
from .models import RESPONSE_FOR_KIND, FitSpec, TrainingSet, assemble_training_set, fit, predict


@dataclass(frozen=True)
class SplitPolicy:
    kind: str = "kfold"  # "in-sample", "holdout" or "kfold"
    k: int = 5
    fraction: float = 0.2
    seed: int = 0
    stratify: bool = True

    def describe(self) -> str:
        if self.kind == "in-sample":
            return "in-sample"
        if self.kind == "holdout":
            return f"holdout({self.fraction:g}, seed={self.seed})"
        return f"{self.k}-fold(seed={self.seed})"


IN_SAMPLE = SplitPolicy(kind="in-sample")


def split(y, policy: SplitPolicy) -> list[tuple[np.ndarray, np.ndarray]]:
    """Train/test index pairs.

    Stratified k-fold deals each class, shuffled, round-robin across folds so
    per-fold class counts differ by at most one.
    """
    y = np.asarray(y)
    n = len(y)
    if policy.kind == "in-sample":
        idx = np.arange(n)
        return [(idx, idx)]
    rng = np.random.default_rng(policy.seed)
    if policy.stratify:
        groups = [np.flatnonzero(y == c) for c in np.unique(y)]
    else:
        groups = [np.arange(n)]
    if policy.kind == "holdout":
        if not 0 < policy.fraction < 1:
            raise ValueError("holdout fraction must be in (0, 1)")
        test = []
        for gidx in groups:
            perm = rng.permutation(gidx)
            test.extend(perm[: int(round(policy.fraction * len(gidx)))])
        test = np.sort(np.asarray(test, dtype=int))
        train = np.setdiff1d(np.arange(n), test)
        return [(train, test)]
    if policy.kind != "kfold":
        raise ValueError(f"unknown split policy {policy.kind!r}")
    k = policy.k
    if k < 2 or k > n:
        raise ModelError(f"cannot make {k} folds from {n} rows")
    if policy.stratify:
        small = [len(gidx) for gidx in groups if len(gidx) < k]
        if small:
            raise ModelError(f"a class has {min(small)} member(s), fewer than {k} folds")
    order = np.concatenate([rng.permutation(gidx) for gidx in groups])
    fold_of = np.empty(n, dtype=int)
    fold_of[order] = np.arange(n) % k
    folds = []
    for f in range(k):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        folds.append((train, test))
    return folds


@dataclass
class EvalReport:
    split: str = "in-sample"
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    sensitivity: float = math.nan
    specificity: float = math.nan
    balanced_accuracy: float = math.nan
    r2: float = math.nan
    rmse: float = math.nan
    r2_defined: bool = True
    n: int = 0
    fold_scores: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def score(self) -> float:
        """Balanced accuracy for classification reports, R^2 otherwise."""
        return self.balanced_accuracy if not math.isnan(self.balanced_accuracy) else self.r2


def classification_metrics(predictions, truth, split_name: str = "in-sample") -> EvalReport:
    pred = np.asarray(predictions).astype(int)
    true = np.asarray(truth).astype(int)
    if len(pred) != len(true) or len(pred) == 0:
        raise ValueError("predictions and truth must have equal, non-zero length")
    tp = int(np.sum((pred == 1) & (true == 1)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    tn = int(np.sum((pred == 0) & (true == 0)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    sens = tp / (tp + fn) if tp + fn else math.nan
    spec = tn / (tn + fp) if tn + fp else math.nan
    return EvalReport(
        split=split_name, tp=tp, fp=fp, tn=tn, fn=fn,
        sensitivity=sens, specificity=spec, balanced_accuracy=(sens + spec) / 2, n=len(pred),
    )


def regression_metrics(predictions, truth, split_name: str = "in-sample") -> EvalReport:
    pred = np.asarray(predictions, dtype=float)
    true = np.asarray(truth, dtype=float)
    if len(pred) != len(true) or len(pred) == 0:
        raise ValueError("predictions and truth must have equal, non-zero length")
    ss_res = float(np.sum((true - pred) ** 2))
    ss_tot = float(np.sum((true - true.mean()) ** 2))
    defined = ss_tot > 0
    return EvalReport(
        split=split_name,
        r2=1.0 - ss_res / ss_tot if defined else math.nan,
        rmse=math.sqrt(ss_res / len(pred)),
        r2_defined=defined,
        n=len(pred),
    )


def evaluate(spec: FitSpec, ts: TrainingSet, policy: SplitPolicy = IN_SAMPLE, cutoff: float = 0.5) -> EvalReport:
    """Fit on each training part, predict its test part, pool the predictions.

    Per-fold scores are kept in ``fold_scores`` so the spread between folds
    is visible.
    """
    folds = split(ts.y, policy) if spec.response != "linear" else split(
        ts.y, SplitPolicy(policy.kind, policy.k, policy.fraction, policy.seed, stratify=False)
    )
    pooled_pred, pooled_true, fold_scores = [], [], []
    for train, test in folds:
        model = fit(spec, ts.subset(train))
        out = predict(model, ts.X[test], cutoff=cutoff)
        if spec.response == "logistic":
            pr = out.classes
            fold_scores.append(classification_metrics(pr, ts.y[test]).balanced_accuracy)
        elif spec.response == "ordered":
            pr = out.classes
            fold_scores.append(float(np.mean(pr == ts.y[test])))
        else:
            pr = out.values
            fold_scores.append(regression_metrics(pr, ts.y[test]).r2)
        pooled_pred.append(pr)
        pooled_true.append(ts.y[test])
    pred = np.concatenate(pooled_pred)
    true = np.concatenate(pooled_true)
    if spec.response == "linear":
        rep = regression_metrics(pred, true, policy.describe())
    elif spec.response == "ordered":
        # ordered classes are scored by exact agreement, reported as balanced accuracy over levels
        rep = EvalReport(split=policy.describe(), n=len(true))
        recalls = [float(np.mean(pred[true == c] == c)) for c in np.unique(true)]
        rep.balanced_accuracy = float(np.mean(recalls))
    else:
        rep = classification_metrics(pred, true, policy.describe())
    rep.fold_scores = [float(s) for s in fold_scores]
    return rep


METHODS = ("threshold", "modularity", "phi")
METHOD_LABELS = {"threshold": "M_T", "modularity": "M_M", "phi": "M_Phi"}


def compare_training_sets(
    sets: dict[str, TrainingSet],
    response: str = "logistic",
    policy: SplitPolicy = SplitPolicy(),
    levels: int | None = None,
) -> dict[str, EvalReport]:
    """One report per method; all methods see identical splits because rows align and the seed is shared."""
    ys = [s.y for s in sets.values()]
    if any(not np.array_equal(ys[0], y) for y in ys[1:]):
        raise ModelError("training sets of the compared methods have different responses")
    return {
        name: evaluate(FitSpec(predictor=name, response=response, levels=levels), ts, policy)
        for name, ts in sets.items()
    }


def compare_methods(g, labels, methods=METHODS, policy: SplitPolicy = SplitPolicy(), marginals=None):
    response = RESPONSE_FOR_KIND[labels.kind]
    sets = {m: assemble_training_set(labels, g, marginals, predictor=m) for m in methods}
    return compare_training_sets(sets, response, policy, levels=labels.levels)


def format_report_table(reports: dict[str, EvalReport], title: str = "") -> str:
    """Aligned text table, one column per report."""
    rows = [
        ("Sensitivity", "sensitivity"),
        ("Specificity", "specificity"),
        ("Balanced Accuracy", "balanced_accuracy"),
        ("R^2", "r2"),
        ("RMSE", "rmse"),
    ]
    names = list(reports)
    width = max(12, *(len(n) + 2 for n in names))
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'':<18}" + "".join(f"{n:>{width}}" for n in names))
    for label, attr in rows:
        vals = [getattr(reports[n], attr) for n in names]
        if all(math.isnan(v) for v in vals):
            continue
        lines.append(f"{label:<18}" + "".join(
            f"{'':>{width}}" if math.isnan(v) else f"{v:>{width}.3f}" for v in vals
        ))
    return "\n".join(lines)


def _clean(o):
    if isinstance(o, float) and math.isnan(o):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, list):
        return [_clean(v) for v in o]
    return o


def reports_to_json(reports: dict[str, EvalReport]) -> str:
    return json.dumps({k: _clean(v.to_dict()) for k, v in reports.items()}, indent=2, sort_keys=True) + "\n"
