"""ROC/AUC, operating-point confusion matrices, grouped CV and the 5x2-CV t-test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset import upsample_stress
from .features import FeatureTable
from .models import ModelSpec, TrainedModel, train


class EvaluationError(ValueError):
    pass


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # thresholds[0] is a sentinel above every score
    n_pos: int
    n_neg: int

    def points(self) -> list[tuple[float, float, float]]:
        return [(float(f), float(t), float(h)) for f, t, h in zip(self.fpr, self.tpr, self.thresholds)]


def roc_curve(scores, labels) -> RocCurve:
    """Sweep every distinct score as a ``score >= threshold`` cut, highest first."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(np.int64)
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("ROC needs at least one positive and one negative label")
    order = np.argsort(-scores, kind="stable")
    s, lab = scores[order], labels[order]
    last_of_run = np.r_[np.flatnonzero(s[1:] != s[:-1]), len(s) - 1]
    tp = np.cumsum(lab)[last_of_run]
    fp = (last_of_run + 1) - tp
    sentinel = float(s[0]) + 1.0
    return RocCurve(
        fpr=np.r_[0.0, fp / n_neg],
        tpr=np.r_[0.0, tp / n_pos],
        thresholds=np.r_[sentinel, s[last_of_run]],
        n_pos=n_pos,
        n_neg=n_neg,
    )


def auc(roc: RocCurve) -> float:
    """Trapezoidal area under the ROC polyline."""
    dx = np.diff(roc.fpr)
    return float(np.sum(dx * (roc.tpr[1:] + roc.tpr[:-1]) / 2.0))


def roc_auc(scores, labels) -> float:
    return auc(roc_curve(scores, labels))


@dataclass
class Confusion:
    TP: int
    FN: int
    FP: int
    TN: int

    @property
    def TPR(self) -> float:
        return self.TP / (self.TP + self.FN) if self.TP + self.FN else 0.0

    @property
    def FPR(self) -> float:
        return self.FP / (self.FP + self.TN) if self.FP + self.TN else 0.0

    def as_dict(self) -> dict:
        return {"TP": self.TP, "FN": self.FN, "FP": self.FP, "TN": self.TN, "TPR": self.TPR, "FPR": self.FPR}


def confusion_at(scores, labels, threshold: float) -> Confusion:
    pred = np.asarray(scores, dtype=float) >= threshold
    labels = np.asarray(labels).astype(bool)
    tp = int((pred & labels).sum())
    fp = int((pred & ~labels).sum())
    return Confusion(tp, int(labels.sum()) - tp, fp, int((~labels).sum()) - fp)


@dataclass(frozen=True)
class Scenario:
    kind: str  # "tpr_at_least" | "fpr_at_most"
    bound: float

    @property
    def name(self) -> str:
        return f"{self.kind}:{self.bound:g}"

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        kind, _, bound = text.partition(":")
        if kind not in ("tpr_at_least", "fpr_at_most") or not bound:
            raise ValueError(f"bad scenario {text!r}; expected tpr_at_least:<x> or fpr_at_most:<x>")
        return cls(kind, float(bound))


DEFAULT_SCENARIOS = (Scenario("tpr_at_least", 1.0), Scenario("tpr_at_least", 0.5), Scenario("fpr_at_most", 0.1))


def scenario_threshold(roc: RocCurve, scenario: Scenario) -> float:
    """Cut-off for an operating constraint.

    tpr_at_least: the largest threshold whose TPR reaches the floor.
    fpr_at_most: the smallest threshold whose FPR stays under the cap.
    Thresholds descend along the curve, so both are first/last index scans.
    """
    if scenario.kind == "tpr_at_least":
        ok = np.flatnonzero(roc.tpr >= scenario.bound)
        return float(roc.thresholds[ok[0]]) if len(ok) else float(roc.thresholds[-1])
    if scenario.kind == "fpr_at_most":
        ok = np.flatnonzero(roc.fpr <= scenario.bound)
        return float(roc.thresholds[ok[-1]])
    raise ValueError(f"unknown scenario kind {scenario.kind!r}")


def accuracy(model: TrainedModel, table: FeatureTable, threshold: float = 0.5) -> float:
    return float(np.mean(model.predict(table.X, threshold) == table.y))


@dataclass
class EvalReport:
    train_accuracy: float
    test_accuracy: float
    auc: float
    roc: RocCurve
    cv_score: float | None = None
    scenario_matrices: dict[str, dict] = field(default_factory=dict)

    def metrics(self) -> dict:
        return {
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
            "cv_score": self.cv_score,
            "auc": self.auc,
        }


def evaluate(
    model: TrainedModel,
    train_rows: FeatureTable,
    test_rows: FeatureTable,
    scenarios=DEFAULT_SCENARIOS,
    cv_score: float | None = None,
) -> EvalReport:
    test_scores = model.score(test_rows.X)
    roc = roc_curve(test_scores, test_rows.y)
    matrices = {}
    for sc in scenarios:
        thr = scenario_threshold(roc, sc)
        matrices[sc.name] = {"threshold": thr, **confusion_at(test_scores, test_rows.y, thr).as_dict()}
    return EvalReport(
        train_accuracy=100.0 * accuracy(model, train_rows),
        test_accuracy=100.0 * float(np.mean((test_scores >= 0.5) == test_rows.y)),
        auc=auc(roc),
        roc=roc,
        cv_score=cv_score,
        scenario_matrices=matrices,
    )


# ---------------------------------------------------------------- cross-validation


def _fold_ids(rows: FeatureTable, k: int, grouping: str, rng: np.random.Generator) -> np.ndarray:
    if grouping == "participant":
        ids = rows.participants()
        if len(ids) < k:
            raise EvaluationError(f"{k}-fold participant CV needs >= {k} participants, got {len(ids)}")
        perm = rng.permutation(len(ids))
        fold_of = {ids[p]: i % k for i, p in enumerate(perm)}
        return np.array([fold_of[str(p)] for p in rows.participant], dtype=np.int64)
    if grouping == "none":
        if len(rows) < k:
            raise EvaluationError(f"{k}-fold CV needs >= {k} rows")
        folds = np.empty(len(rows), dtype=np.int64)
        folds[rng.permutation(len(rows))] = np.arange(len(rows)) % k
        return folds
    raise ValueError(f"unknown grouping {grouping!r}")


def kfold_cv(
    spec: ModelSpec,
    rows: FeatureTable,
    k: int = 10,
    grouping: str = "participant",
    seed: int = 0,
    upsample_ratio: tuple[int, int] | None = None,
    trainer: Callable = train,
) -> float:
    """Mean held-out accuracy (percent) over k folds.

    With ``grouping="participant"`` folds partition participants, so no
    person is in both the fitting and the scoring side of any fold.
    """
    if k < 2:
        raise EvaluationError("k must be >= 2")
    rng = np.random.default_rng(seed)
    folds = _fold_ids(rows, k, grouping, rng)
    accs = []
    for f in range(k):
        held = folds == f
        fit = rows.subset(~held)
        if upsample_ratio is not None and (fit.y == 1).any():
            fit = upsample_stress(fit, upsample_ratio, seed + f)
        model = trainer(spec, fit.X, fit.y)
        accs.append(float(np.mean(model.predict(rows.X[held]) == rows.y[held])))
    return 100.0 * float(np.mean(accs))


# ---------------------------------------------------------------- Student t


def _betacf(a: float, b: float, x: float, eps: float = 1e-15, max_iter: int = 10_000) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t)."""
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * betainc_regularized(df / 2.0, 0.5, df / (df + t * t))
    return tail if t >= 0 else 1.0 - tail


def student_t_cdf(t: float, df: float) -> float:
    return 1.0 - student_t_sf(t, df)


def two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return betainc_regularized(df / 2.0, 0.5, df / (df + t * t))


# ---------------------------------------------------------------- 5x2 CV


@dataclass
class FiveByTwoResult:
    t: float
    p: float
    differences: list[tuple[float, float]]
    variances: list[float]
    degenerate: bool = False
    accuracies: list[dict] = field(default_factory=list)
    df: int = 5

    @property
    def decision(self) -> str:
        return "significant" if self.p < 0.05 and not (self.degenerate and self.t == 0) else "no difference"

    def to_dict(self) -> dict:
        return {
            "t": None if math.isnan(self.t) else (self.t if math.isfinite(self.t) else ("inf" if self.t > 0 else "-inf")),
            "p": self.p,
            "df": self.df,
            "degenerate": self.degenerate,
            "decision": self.decision,
            "differences": [list(d) for d in self.differences],
            "variances": list(self.variances),
            "replications": list(self.accuracies),
        }


def five_by_two_statistic(differences) -> FiveByTwoResult:
    """Combine 5 x 2 fold accuracy differences into the paired t statistic.

    ``t = p_11 / sqrt(mean_i s_i^2)`` with ``s_i^2`` the two-fold variance of
    replication i, referred to Student t with 5 degrees of freedom. When
    every ``s_i^2`` is zero the statistic is flagged degenerate: infinite
    (p = 0) if ``p_11 != 0``, otherwise 0 (p = 1).
    """
    diffs = [(float(a), float(b)) for a, b in differences]
    if len(diffs) != 5:
        raise EvaluationError("5x2 CV needs exactly 5 replications of 2 folds")
    variances = []
    for a, b in diffs:
        mean = (a + b) / 2.0
        variances.append((a - mean) ** 2 + (b - mean) ** 2)
    denom_sq = sum(variances) / 5.0
    p11 = diffs[0][0]
    if denom_sq == 0.0:
        if p11 == 0.0:
            return FiveByTwoResult(0.0, 1.0, diffs, variances, degenerate=True)
        return FiveByTwoResult(math.copysign(math.inf, p11), 0.0, diffs, variances, degenerate=True)
    t = p11 / math.sqrt(denom_sq)
    return FiveByTwoResult(t, two_sided_p(t, 5), diffs, variances)


def five_by_two_ttest(
    spec_a: ModelSpec,
    spec_b: ModelSpec,
    rows: FeatureTable,
    seed: int = 0,
    grouping: str = "participant",
    upsample_ratio: tuple[int, int] | None = None,
    trainer: Callable = train,
) -> FiveByTwoResult:
    """Five seeded 2-fold splits; both models see the same folds.

    Swapping the two specs negates every difference and hence ``t``.
    """
    rng = np.random.default_rng(seed)
    diffs, details = [], []
    for rep in range(5):
        folds = _fold_ids(rows, 2, grouping, np.random.default_rng(rng.integers(0, 2**63)))
        pair, rep_acc = [], []
        for f in (0, 1):
            fit, held = rows.subset(folds != f), rows.subset(folds == f)
            if upsample_ratio is not None and (fit.y == 1).any():
                fit = upsample_stress(fit, upsample_ratio, seed + 2 * rep + f)
            acc_a = float(np.mean(trainer(spec_a, fit.X, fit.y).predict(held.X) == held.y))
            acc_b = float(np.mean(trainer(spec_b, fit.X, fit.y).predict(held.X) == held.y))
            pair.append(acc_a - acc_b)
            rep_acc.append({"fold": f, "accuracy_a": acc_a, "accuracy_b": acc_b})
        diffs.append(tuple(pair))
        details.append({"replication": rep, "folds": rep_acc})
    result = five_by_two_statistic(diffs)
    result.accuracies = details
    return result
