"""Calibration of the signed-relation weights against surveyed relations.

The calibrated model is the generalised linear model
``r ~ a * P(X < A) + b * P(X > A) + c``, which is the two-feature form of
``r ~ phi(a, b) + c``. The two baselines swap the features for the raw count
``A`` (threshold method) or the modularity residual ``A - k_out k_in / m``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit

from .errors import DegenerateTrainingError, ModelError, UndefinedScoreError
from .graph import InteractionGraph, RelationLabels, degrees
from .hype import DyadMarginals, all_marginals, build_possibility_matrix
from .phi import PhiCoefficients

logger = logging.getLogger(__name__)

PREDICTORS = {
    "phi": ("a", "b"),
    "threshold": ("alpha",),
    "modularity": ("alpha",),
}
RESPONSES = ("logistic", "linear", "ordered")
RESPONSE_FOR_KIND = {"binary": "logistic", "continuous": "linear", "ordered": "ordered"}


@dataclass(frozen=True)
class FitSpec:
    predictor: str = "phi"
    response: str = "logistic"
    levels: int | None = None
    ridge: float = 0.0
    auto_ridge: float = 1e-4
    max_iter: int = 200
    tol: float = 1e-9

    def __post_init__(self):
        if self.predictor not in PREDICTORS:
            raise ValueError(f"unknown predictor {self.predictor!r}")
        if self.response not in RESPONSES:
            raise ValueError(f"unknown response {self.response!r}")
        if self.ridge < 0 or self.auto_ridge < 0:
            raise ValueError("ridge strength must be >= 0")
        if self.response == "ordered" and (self.levels is None or self.levels < 3):
            raise ValueError("ordered responses need levels >= 3")


@dataclass(frozen=True)
class TrainingSet:
    X: np.ndarray
    y: np.ndarray
    dyads: tuple[tuple[str, str], ...]
    predictor: str

    def __len__(self):
        return len(self.y)

    def subset(self, idx) -> "TrainingSet":
        idx = np.asarray(idx)
        return TrainingSet(
            X=self.X[idx], y=self.y[idx],
            dyads=tuple(self.dyads[i] for i in idx), predictor=self.predictor,
        )

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.predictor.encode())
        h.update(np.ascontiguousarray(self.X, dtype=float).tobytes())
        h.update(np.ascontiguousarray(self.y, dtype=float).tobytes())
        return h.hexdigest()[:16]


def modularity_matrix(g: InteractionGraph) -> np.ndarray:
    """``mu[v, w] = A[v, w] - k_out(v) k_in(w) / m``.

    For undirected sources the formula uses total degrees over twice the
    number of undirected events, which on the symmetric expansion is the same
    number as the directed one.
    """
    if g.m == 0:
        raise UndefinedScoreError("modularity score undefined for an empty graph (m = 0)")
    A = g.adjacency().astype(float)
    k_out, k_in = degrees(g)
    if g.directed:
        return A - np.outer(k_out, k_in) / g.m
    k = k_out.astype(float)  # total undirected degree
    m_events = g.m / 2
    return A - np.outer(k, k) / (2 * m_events)


def modularity_score(g: InteractionGraph, v: str, w: str) -> float:
    idx = g.index
    return float(modularity_matrix(g)[idx[v], idx[w]])


def dyad_features(
    predictor: str,
    g: InteractionGraph,
    pairs,
    marginals: DyadMarginals | None = None,
) -> np.ndarray:
    """Feature rows for index pairs; both orientations are averaged."""
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    i, j = pairs[:, 0], pairs[:, 1]
    if predictor == "phi":
        if marginals is None:
            raise ValueError("phi features need dyad marginals")
        pu = 0.5 * (marginals.p_under[i, j] + marginals.p_under[j, i])
        po = 0.5 * (marginals.p_over[i, j] + marginals.p_over[j, i])
        return np.column_stack([pu, po])
    if predictor == "threshold":
        A = g.adjacency().astype(float)
        return (0.5 * (A[i, j] + A[j, i]))[:, None]
    if predictor == "modularity":
        mu = modularity_matrix(g)
        return (0.5 * (mu[i, j] + mu[j, i]))[:, None]
    raise ValueError(f"unknown predictor {predictor!r}")


def assemble_training_set(
    labels: RelationLabels,
    g: InteractionGraph,
    marginals: DyadMarginals | None = None,
    predictor: str = "phi",
) -> TrainingSet:
    """Rows for the surveyed dyads.

    Binary labels: labelled dyads are positives and every other unordered pair
    of surveyed individuals is a negative. Ordered and continuous labels use
    the labelled dyads only.
    """
    if not labels.surveyed:
        raise DegenerateTrainingError("empty surveyed node set")
    idx = g.index
    missing = sorted(v for v in labels.surveyed if v not in idx)
    if missing:
        logger.warning("%d surveyed node(s) absent from the interaction graph are ignored", len(missing))
    surveyed = sorted((idx[v] for v in labels.surveyed if v in idx))
    values = {}
    for (v, w), r in labels.unordered().items():
        if v in idx and w in idx:
            i, j = sorted((idx[v], idx[w]))
            values[i, j] = r
    if labels.kind == "binary":
        pairs = [(i, j) for a, i in enumerate(surveyed) for j in surveyed[a + 1:]]
        y = [values.get(p, 0.0) for p in pairs]
    else:
        pairs = sorted(values)
        y = [values[p] for p in pairs]
    y = np.asarray(y, dtype=float)
    if len(np.unique(y)) < 2:
        raise DegenerateTrainingError(f"training set has {len(np.unique(y))} distinct response value(s)")
    if predictor == "phi" and marginals is None:
        marginals = all_marginals(build_possibility_matrix(g), g)
    X = dyad_features(predictor, g, pairs, marginals)
    dyads = tuple((g.nodes[i], g.nodes[j]) for i, j in pairs)
    return TrainingSet(X=X, y=y, dyads=dyads, predictor=predictor)


@dataclass
class FitResult:
    predictor: str
    response: str
    coef: dict
    intercept: float
    cutpoints: tuple = ()
    std_errors: dict = field(default_factory=dict)
    iterations: int = 0
    grad_norm: float = 0.0
    converged: bool = True
    separated: bool = False
    ridge: float = 0.0
    n: int = 0
    levels: int | None = None
    training_digest: str = ""

    @property
    def beta(self) -> np.ndarray:
        return np.array([self.coef[k] for k in PREDICTORS[self.predictor]])

    def phi_coefficients(self) -> PhiCoefficients:
        if self.predictor != "phi":
            raise ModelError(f"{self.predictor} fit has no phi coefficients")
        c = self.intercept if self.response != "ordered" else 0.0
        return PhiCoefficients(a=float(self.coef["a"]), b=float(self.coef["b"]), c=float(c))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cutpoints"] = list(self.cutpoints)
        return d

    def to_json(self, path, spec: FitSpec | None = None, extra: dict | None = None) -> None:
        d = self.to_dict()
        if spec is not None:
            d["spec"] = asdict(spec)
        if extra:
            d.update(extra)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(d, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d) -> "FitResult":
        keys = cls.__dataclass_fields__
        d = {k: v for k, v in d.items() if k in keys}
        d["cutpoints"] = tuple(d.get("cutpoints", ()))
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "FitResult":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def logistic_loglik(beta, Xd, y, ridge=0.0):
    eta = Xd @ beta
    pen = 0.5 * ridge * float(beta[1:] @ beta[1:])
    return float(y @ eta - np.logaddexp(0.0, eta).sum()) - pen


def logistic_gradient(beta, Xd, y, ridge=0.0):
    g = Xd.T @ (y - expit(Xd @ beta))
    g[1:] -= ridge * beta[1:]
    return g


def _irls(Xd, y, ridge, max_iter, tol):
    n, p = Xd.shape
    P = np.eye(p)
    P[0, 0] = 0.0
    beta = np.zeros(p)
    ll = logistic_loglik(beta, Xd, y, ridge)
    grad = logistic_gradient(beta, Xd, y, ridge)
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        if np.linalg.norm(grad) <= tol * n:
            converged = True
            it -= 1
            break
        mu = expit(Xd @ beta)
        w = mu * (1.0 - mu)
        H = (Xd * w[:, None]).T @ Xd + ridge * P
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        t = 1.0
        while True:
            cand = beta + t * step
            ll_new = logistic_loglik(cand, Xd, y, ridge)
            if ll_new >= ll - 1e-12 * abs(ll) or t < 1e-10:
                break
            t *= 0.5
        beta, ll = cand, ll_new
        grad = logistic_gradient(beta, Xd, y, ridge)
        if not np.all(np.isfinite(beta)):
            break
    else:
        converged = np.linalg.norm(grad) <= tol * n
    return beta, grad, it, bool(converged)


def _fit_logistic(spec, X, y):
    Xd = np.column_stack([np.ones(len(y)), X])
    ridge = spec.ridge
    beta, grad, it, conv = _irls(Xd, y, ridge, spec.max_iter, spec.tol)
    eta = Xd @ beta
    perfect = bool(np.all((eta > 0) == (y > 0.5)) and np.all(eta != 0))
    separated = perfect or not conv or np.linalg.norm(beta) > 1e3
    if separated and ridge == 0.0:
        logger.info("separation detected; refitting with ridge %g", spec.auto_ridge)
        ridge = spec.auto_ridge
        beta, grad, it2, conv = _irls(Xd, y, ridge, spec.max_iter, spec.tol)
        it += it2
    mu = expit(Xd @ beta)
    P = np.eye(Xd.shape[1])
    P[0, 0] = 0.0
    H = (Xd * (mu * (1 - mu))[:, None]).T @ Xd + ridge * P
    se = _safe_se(H)
    return beta, se, it, float(np.linalg.norm(grad)), conv, separated, ridge


def _safe_se(H):
    try:
        return np.sqrt(np.clip(np.diag(np.linalg.inv(H)), 0, None))
    except np.linalg.LinAlgError:
        return np.full(H.shape[0], np.nan)


def _fit_linear(spec, X, y):
    Xd = np.column_stack([np.ones(len(y)), X])
    n, p = Xd.shape
    P = np.eye(p)
    P[0, 0] = 0.0
    G = Xd.T @ Xd + spec.ridge * P
    if spec.ridge == 0.0:
        beta = np.linalg.lstsq(Xd, y, rcond=None)[0]
    else:
        beta = np.linalg.solve(G, Xd.T @ y)
    resid = y - Xd @ beta
    grad = Xd.T @ resid - spec.ridge * (P @ beta)
    dof = max(n - p, 1)
    sigma2 = float(resid @ resid) / dof
    se = _safe_se(G / sigma2) if sigma2 > 0 else np.zeros(p)
    return beta, se, 1, float(np.linalg.norm(grad)), True, False, spec.ridge


def _log_prob_between(u, l):
    """``log(sigmoid(u) - sigmoid(l))`` for ``u > l`` with infinite ends allowed."""
    out = np.empty_like(u)
    upper = u + l > 0  # both arguments mostly on the right: use the complement form
    lu, ll_ = log_expit(-l[upper]), log_expit(-u[upper])
    out[upper] = lu + np.log1p(-np.exp(ll_ - lu))
    lo = ~upper
    lu, ll_ = log_expit(u[lo]), log_expit(l[lo])
    out[lo] = lu + np.log1p(-np.exp(ll_ - lu))
    return out


def ordered_unpack(params, K):
    theta = np.empty(K - 1)
    theta[0] = params[0]
    if K > 2:
        theta[1:] = params[0] + np.cumsum(np.exp(params[1:K - 1]))
        # a gap far below the spacing of floats near theta would vanish in rounding
        for k in range(1, K - 1):
            if theta[k] <= theta[k - 1]:
                theta[k] = np.nextafter(theta[k - 1], np.inf)
    return theta, params[K - 1:]


def ordered_negloglik(params, X, y, K, ridge=0.0):
    """Negative log-likelihood of ``P(Y <= k) = sigmoid(theta_k - x beta)`` and its gradient.

    ``params`` holds the first cutpoint, log-gaps between successive
    cutpoints and the slopes, so cutpoints stay strictly increasing for any
    parameter vector.
    """
    theta, beta = ordered_unpack(params, K)
    eta = X @ beta
    yk = y.astype(int)
    big = np.concatenate([[-np.inf], theta, [np.inf]])
    u = big[yk] - eta
    l = big[yk - 1] - eta
    lp = _log_prob_between(u, l)
    nll = -lp.sum() + 0.5 * ridge * float(beta @ beta)
    prob = np.exp(lp)

    def dens(z):
        s = expit(z)
        return np.where(np.isfinite(z), s * (1.0 - s), 0.0)

    fu, fl = dens(u), dens(l)
    d_beta = -(X.T @ ((-(fu - fl)) / prob)) + ridge * beta
    d_theta = np.zeros(K - 1)
    np.add.at(d_theta, yk[yk < K] - 1, -(fu[yk < K] / prob[yk < K]))
    np.add.at(d_theta, yk[yk > 1] - 2, fl[yk > 1] / prob[yk > 1])
    grad = np.empty_like(params)
    grad[0] = d_theta.sum()
    if K > 2:
        tail = np.cumsum(d_theta[::-1])[::-1]  # sum over cutpoints k >= j
        grad[1:K - 1] = np.exp(params[1:K - 1]) * tail[1:]
    grad[K - 1:] = d_beta
    return nll, grad


def _fit_ordered(spec, X, y):
    K = spec.levels
    if y.min() < 1 or y.max() > K:
        raise DegenerateTrainingError(f"ordered response outside 1..{K}")
    cum = np.array([(y <= k).mean() for k in range(1, K)])
    cum = np.clip(cum, 1e-3, 1 - 1e-3)
    theta0 = np.maximum.accumulate(np.log(cum / (1 - cum)))
    gaps = np.maximum(np.diff(theta0), 1e-2)
    params0 = np.concatenate([[theta0[0]], np.log(gaps), np.zeros(X.shape[1])])
    res = minimize(
        ordered_negloglik, params0, args=(X, y, K, spec.ridge), jac=True,
        method="BFGS", options={"maxiter": spec.max_iter * 10, "gtol": spec.tol * len(y)},
    )
    theta, beta = ordered_unpack(res.x, K)
    grad = ordered_negloglik(res.x, X, y, K, spec.ridge)[1]
    gnorm = float(np.linalg.norm(grad))
    conv = bool(res.success or gnorm <= 1e-6 * len(y))
    se = np.full(len(beta), np.nan)
    if hasattr(res, "hess_inv"):
        # slopes are the trailing parameters and enter untransformed
        se = np.sqrt(np.clip(np.diag(res.hess_inv)[K - 1:], 0, None))
    return theta, beta, se, int(res.nit), gnorm, conv


def fit(spec: FitSpec, ts: TrainingSet) -> FitResult:
    if spec.predictor != ts.predictor:
        raise ModelError(f"spec predictor {spec.predictor!r} does not match training set {ts.predictor!r}")
    X, y = ts.X, ts.y
    if len(np.unique(y)) < 2:
        raise DegenerateTrainingError("need at least two distinct response values")
    names = PREDICTORS[spec.predictor]
    if spec.response == "ordered":
        theta, beta, se, it, gnorm, conv = _fit_ordered(spec, X, y)
        result = FitResult(
            predictor=spec.predictor, response="ordered",
            coef=dict(zip(names, map(float, beta))), intercept=0.0,
            cutpoints=tuple(map(float, theta)),
            std_errors=dict(zip(names, map(float, se))),
            iterations=int(it), grad_norm=float(gnorm), converged=bool(conv), ridge=float(spec.ridge),
            n=len(y), levels=spec.levels, training_digest=ts.digest(),
        )
    else:
        if spec.response == "logistic" and not np.all((y == 0) | (y == 1)):
            raise ModelError("logistic response must be 0/1")
        fn = _fit_logistic if spec.response == "logistic" else _fit_linear
        beta, se, it, gnorm, conv, sep, ridge = fn(spec, X, y)
        result = FitResult(
            predictor=spec.predictor, response=spec.response,
            coef=dict(zip(names, map(float, beta[1:]))), intercept=float(beta[0]),
            std_errors=dict(zip(("c",) + names, map(float, se))),
            iterations=int(it), grad_norm=float(gnorm), converged=bool(conv), separated=bool(sep), ridge=float(ridge),
            n=len(y), training_digest=ts.digest(),
        )
    if not result.converged:
        logger.warning("%s/%s fit did not converge (|grad| = %.3g)", spec.predictor, spec.response, result.grad_norm)
    if not all(math.isfinite(v) for v in result.coef.values()):
        raise ModelError("fitted coefficients are not finite")
    return result


@dataclass(frozen=True)
class Prediction:
    values: np.ndarray  # probability (logistic), class (ordered) or fitted value (linear)
    classes: np.ndarray | None = None


def predict(fit_: FitResult, X, predictor: str | None = None, cutoff: float = 0.5) -> Prediction:
    if predictor is not None and predictor != fit_.predictor:
        raise ModelError(f"features are {predictor!r} but the model was fit on {fit_.predictor!r}")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if len(PREDICTORS[fit_.predictor]) == 1 else X[None, :]
    if X.shape[1] != len(PREDICTORS[fit_.predictor]):
        raise ModelError(f"expected {len(PREDICTORS[fit_.predictor])} feature column(s), got {X.shape[1]}")
    eta = X @ fit_.beta
    if fit_.response == "logistic":
        prob = expit(eta + fit_.intercept)
        return Prediction(values=prob, classes=(prob >= cutoff).astype(int))
    if fit_.response == "linear":
        return Prediction(values=eta + fit_.intercept)
    theta = np.asarray(fit_.cutpoints)
    cls = 1 + np.searchsorted(theta, eta, side="left")
    return Prediction(values=cls.astype(float), classes=cls)
