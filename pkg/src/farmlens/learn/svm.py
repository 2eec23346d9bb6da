"""nu-parameterized soft-margin SVM with an RBF kernel, trained by SMO.

The dual here has one equality constraint per class (the per-class dual mass
is nu/2 each), so every SMO step transfers mass between two multipliers of
the same class, picked as the maximal violating pair. The box constraint is
0 <= alpha_i <= 1/n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-7
DEFAULT_MAX_UPDATES = 10**6
_REFRESH_EVERY = 8192  # recompute the gradient from scratch to cap drift


class ConvergenceError(RuntimeError):
    """SMO hit the update cap before reaching the KKT tolerance."""

    def __init__(self, residual: float, max_updates: int):
        super().__init__(
            f"no convergence after {max_updates} updates (KKT residual {residual:.3e})")
        self.residual = residual


class InfeasibleNuError(ValueError):
    """nu exceeds 2*min(n+, n-)/n and cannot be satisfied."""


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """K(x, y) = exp(-gamma * ||x - y||^2)."""
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass
class NuSVM:
    gamma: float
    nu: float
    tol: float = DEFAULT_TOL
    max_updates: int = DEFAULT_MAX_UPDATES
    clamp_infeasible_nu: bool = True

    # learned state
    support_x: np.ndarray | None = None
    dual_coef: np.ndarray | None = None  # alpha_i * y_i over support vectors
    bias: float = 0.0
    rho: float = 0.0
    effective_nu: float = 0.0
    kkt_residual: float = float("inf")
    # full solution kept for feasibility checks
    _alpha: np.ndarray | None = None
    _y: np.ndarray | None = None
    _x: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "NuSVM":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n = len(y)
        pos = np.where(y > 0)[0]
        neg = np.where(y < 0)[0]
        if len(pos) == 0 or len(neg) == 0:
            raise ValueError("training data must contain both classes")
        nu_max = 2.0 * min(len(pos), len(neg)) / n
        nu = self.nu
        if nu > nu_max:
            if not self.clamp_infeasible_nu:
                raise InfeasibleNuError(f"nu={nu} exceeds feasible maximum {nu_max:.4f}")
            warnings.warn(f"nu={nu} infeasible for class balance; clamped to {nu_max:.4f}",
                          RuntimeWarning, stacklevel=2)
            nu = nu_max * (1.0 - 1e-12)
        self.effective_nu = nu

        box = 1.0 / n
        kernel = rbf_kernel(x, x, self.gamma)
        q = kernel * np.outer(y, y)
        alpha = np.zeros(n)
        for cls_idx in (pos, neg):
            remaining = nu / 2.0
            for i in cls_idx:
                take = min(box, remaining)
                alpha[i] = take
                remaining -= take
                if remaining <= 0:
                    break
        grad = q @ alpha

        eps = box * 1e-12
        residual = np.inf
        updates = 0
        while updates < self.max_updates:
            if updates and updates % _REFRESH_EVERY == 0:
                grad = q @ alpha
            residual = 0.0
            chosen = None
            for cls_idx in (pos, neg):
                a_cls = alpha[cls_idx]
                g_cls = grad[cls_idx]
                can_grow = a_cls < box - eps
                can_shrink = a_cls > eps
                if not can_grow.any() or not can_shrink.any():
                    continue
                g_grow = np.where(can_grow, g_cls, np.inf)
                g_shrink = np.where(can_shrink, g_cls, -np.inf)
                i_local = int(np.argmin(g_grow))
                j_local = int(np.argmax(g_shrink))
                violation = g_shrink[j_local] - g_grow[i_local]
                if violation > residual:
                    residual = violation
                    chosen = (int(cls_idx[i_local]), int(cls_idx[j_local]))
            if residual <= self.tol or chosen is None:
                break
            i, j = chosen
            eta = q[i, i] + q[j, j] - 2.0 * q[i, j]
            step = (grad[j] - grad[i]) / eta if eta > 1e-15 else np.inf
            step = min(step, box - alpha[i], alpha[j])
            alpha[i] += step
            alpha[j] -= step
            grad += step * (q[:, i] - q[:, j])
            updates += 1
        else:
            raise ConvergenceError(float(residual), self.max_updates)

        # Per-class thresholds from the final gradient, then margin and bias.
        grad = q @ alpha  # exact gradient for the stored diagnostics
        rho_by_class = {}
        for sign, cls_idx in ((+1, pos), (-1, neg)):
            a_cls = alpha[cls_idx]
            g_cls = grad[cls_idx]
            free = (a_cls > eps) & (a_cls < box - eps)
            if free.any():
                rho_by_class[sign] = float(g_cls[free].mean())
            else:
                lo = g_cls[a_cls > eps].max() if (a_cls > eps).any() else -np.inf
                hi = g_cls[a_cls < box - eps].min() if (a_cls < box - eps).any() else np.inf
                rho_by_class[sign] = float((lo + hi) / 2.0)
        self.bias = (rho_by_class[-1] - rho_by_class[+1]) / 2.0
        self.rho = (rho_by_class[-1] + rho_by_class[+1]) / 2.0
        self.kkt_residual = self._max_violation(alpha, grad, pos, neg, box, eps)

        support = alpha > eps
        self.support_x = x[support]
        self.dual_coef = alpha[support] * y[support]
        self._alpha = alpha
        self._y = y
        self._x = x
        return self

    @staticmethod
    def _max_violation(alpha, grad, pos, neg, box, eps) -> float:
        worst = 0.0
        for cls_idx in (pos, neg):
            a_cls = alpha[cls_idx]
            g_cls = grad[cls_idx]
            can_grow = a_cls < box - eps
            can_shrink = a_cls > eps
            if can_grow.any() and can_shrink.any():
                worst = max(worst, float(g_cls[can_shrink].max() - g_cls[can_grow].min()))
        return worst

    def feasibility(self) -> dict[str, float]:
        """Residuals of the dual constraints for the trained model."""
        if self._alpha is None:
            raise RuntimeError("model is not fitted")
        alpha, y = self._alpha, self._y
        box = 1.0 / len(alpha)
        return {
            "box_violation": float(max(0.0, -alpha.min(), alpha.max() - box)),
            "class_balance": float(abs(alpha @ y)),
            "mass_deficit": float(max(0.0, self.effective_nu - alpha.sum())),
            "kkt_residual": float(self.kkt_residual),
        }

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        if self.support_x is None:
            raise RuntimeError("model is not fitted")
        k = rbf_kernel(self.support_x, np.asarray(x, dtype=float), self.gamma)
        return self.dual_coef @ k + self.bias

    def predict(self, x: np.ndarray) -> np.ndarray:
        scores = self.decision_function(x)
        return np.where(scores >= 0, 1, -1)

    def to_params(self) -> dict:
        return {
            "gamma": self.gamma,
            "nu": self.nu,
            "effective_nu": self.effective_nu,
            "bias": self.bias,
            "rho": self.rho,
            "kkt_residual": self.kkt_residual,
            "support_x": self.support_x.tolist(),
            "dual_coef": self.dual_coef.tolist(),
        }

    @classmethod
    def from_params(cls, params: dict) -> "NuSVM":
        model = cls(gamma=params["gamma"], nu=params["nu"])
        model.effective_nu = params["effective_nu"]
        model.bias = params["bias"]
        model.rho = params["rho"]
        model.kkt_residual = params["kkt_residual"]
        model.support_x = np.array(params["support_x"], dtype=float)
        model.dual_coef = np.array(params["dual_coef"], dtype=float)
        return model
