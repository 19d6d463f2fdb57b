"""RBF-kernel SVM trained by sequential minimal optimization, Platt-scaled."""

from __future__ import annotations

import warnings

import numpy as np

from .base import ConvergenceWarning, ModelSpec, Standardizer, TrainedModel, floats, prepare

_TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def smo(K: np.ndarray, ys: np.ndarray, C: float, tol: float, max_iter: int):
    """Solve ``min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0`` with ``Q = yy'K``.

    Working pairs use maximal-violation for the first index and second-order
    gain for the second. Terminates once ``max_up(-yG) - min_low(-yG) < tol``.
    Returns ``(alpha, bias, n_iter, converged)``.
    """
    n = len(ys)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(K).copy()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        pos = ys > 0
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        viol = -ys * grad
        if not up.any() or not low.any():
            converged = True
            break
        cand_up = np.where(up, viol, -np.inf)
        i = int(np.argmax(cand_up))
        g_max = cand_up[i]
        g_min = np.min(np.where(low, viol, np.inf))
        if g_max - g_min < tol:
            converged = True
            break
        b = g_max - viol
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, _TAU)
        obj = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(obj))

        old_i, old_j = alpha[i], alpha[j]
        Kij = K[i, j]
        if ys[i] != ys[j]:
            quad = max(diag[i] + diag[j] - 2.0 * Kij, _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            ai, aj = alpha[i] + delta, alpha[j] + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(diag[i] + diag[j] - 2.0 * Kij, _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            ai, aj = alpha[i] - delta, alpha[j] + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
                if aj > C:
                    aj, ai = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
                if ai < 0:
                    ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += ys * (K[:, i] * ys[i] * (ai - old_i) + K[:, j] * ys[j] * (aj - old_j))

    free = (alpha > 0) & (alpha < C)
    yg = ys * grad
    if free.any():
        rho = float(yg[free].mean())
    else:
        pos = ys > 0
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        ub = np.min(np.where(up, yg, np.inf)) if up.any() else np.inf
        lb = np.max(np.where(low, yg, -np.inf)) if low.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub + lb) else 0.0
    return alpha, -rho, it, converged


def kkt_violations(alpha, ys, decision, C, tol):
    """Indices whose margin ``y f(x)`` breaks the KKT conditions by more than ``tol``."""
    m = ys * decision
    at_zero = alpha <= 0
    at_c = alpha >= C
    free = ~at_zero & ~at_c
    bad = (at_zero & (m < 1 - tol)) | (at_c & (m > 1 + tol)) | (free & (np.abs(m - 1) > tol))
    return np.flatnonzero(bad)


def platt_fit(f: np.ndarray, y: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Fit ``P(y=1|f) = 1 / (1 + exp(A f + B))`` by Newton's method with backtracking.

    Uses the regularized targets of Platt (1999) and the numerically stable
    formulation of Lin, Lin & Weng (2007).
    """
    prior1 = float(y.sum())
    prior0 = float(len(y) - prior1)
    hi, lo = (prior1 + 1) / (prior1 + 2), 1 / (prior0 + 2)
    t = np.where(y == 1, hi, lo)
    A, B = 0.0, float(np.log((prior0 + 1) / (prior1 + 1)))

    def objective(A, B):
        fa = f * A + B
        return float(np.sum(np.where(fa >= 0, t * fa + np.log1p(np.exp(-np.abs(fa))), (t - 1) * fa + np.log1p(np.exp(-np.abs(fa))))))

    fval = objective(A, B)
    sigma, min_step, eps = 1e-12, 1e-10, 1e-5
    for _ in range(max_iter):
        fa = f * A + B
        e = np.exp(-np.abs(fa))
        p = np.where(fa >= 0, e / (1 + e), 1 / (1 + e))
        q = 1 - p
        d2 = p * q
        h11 = sigma + float(np.sum(f * f * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(f * d2))
        d1 = t - p
        g1, g2 = float(np.sum(f * d1)), float(np.sum(d1))
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            nA, nB = A + step * dA, B + step * dB
            nval = objective(nA, nB)
            if nval < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nval
                break
            step /= 2
        else:
            break
    return A, B


class RBFSupportVectorMachine(TrainedModel):
    family = "svm_rbf"

    def __init__(self, spec, standardizer, support, dual, bias, gamma, platt, info=None):
        super().__init__(spec, standardizer)
        self.support = np.asarray(support, dtype=float).reshape(-1, len(standardizer.mean))
        self.dual = np.asarray(dual, dtype=float)  # alpha_i * y_i for support vectors
        self.bias = float(bias)
        self.gamma = float(gamma)
        self.platt = (float(platt[0]), float(platt[1]))
        self.info = info or {}

    def decision(self, X) -> np.ndarray:
        Z = self.standardizer.transform(np.atleast_2d(X))
        out = np.full(len(Z), self.bias)
        for start in range(0, len(Z), 512):
            chunk = Z[start : start + 512]
            out[start : start + 512] += rbf_kernel(chunk, self.support, self.gamma) @ self.dual
        return out

    def score(self, X) -> np.ndarray:
        A, B = self.platt
        z = A * self.decision(X) + B
        return 0.5 * (1.0 - np.tanh(0.5 * z))

    def _state(self) -> dict:
        return {
            "support": [floats(r) for r in self.support],
            "dual": floats(self.dual),
            "bias": self.bias,
            "gamma": self.gamma,
            "platt": list(self.platt),
            **self.info,
        }

    @classmethod
    def from_state(cls, spec, state, standardizer):
        info = {k: v for k, v in state.items() if k not in ("support", "dual", "bias", "gamma", "platt")}
        return cls(spec, standardizer, state["support"], state["dual"], state["bias"], state["gamma"], state["platt"], info)


def train_svm_rbf(X, y, spec: ModelSpec | None = None, **hyperparameters) -> RBFSupportVectorMachine:
    spec = spec or ModelSpec("svm_rbf", hyperparameters)
    hp = spec.resolved()
    X, y = prepare(X, y)
    std = Standardizer.fit(X)
    Z = std.transform(X)
    gamma = hp["gamma"]
    if gamma is None:
        var = float(Z.var())
        gamma = 1.0 / (Z.shape[1] * var) if var > 0 else 1.0
    ys = 2.0 * y - 1.0
    K = rbf_kernel(Z, Z, gamma)
    C = float(hp["C"])
    alpha, bias, n_iter, converged = smo(K, ys, C, hp["tol"], hp["max_passes"] * len(y))
    if not converged:
        warnings.warn(f"SMO stopped after {n_iter} updates without meeting tol", ConvergenceWarning, stacklevel=2)
    sv = alpha > 0
    decision = K[:, sv] @ (alpha[sv] * ys[sv]) + bias
    platt = platt_fit(decision, y) if 0 < y.sum() < len(y) else (-1.0, 0.0)
    model = RBFSupportVectorMachine(
        spec, std, Z[sv], alpha[sv] * ys[sv], bias, gamma, platt,
        info={"n_iter": int(n_iter), "converged": bool(converged), "C": C},
    )
    model.train_alpha = alpha
    model.train_decision = decision
    model.train_labels = ys
    return model
