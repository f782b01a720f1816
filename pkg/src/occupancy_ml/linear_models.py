"""Penalized logistic regression and a primal linear SVM.

Both fit ``d(x) = w.z + b`` on standardized features ``z`` (training-split
statistics) and predict class 1 iff ``d(x) > 0``.

Objectives use the ``C`` convention: ``C`` scales the data term, the
penalty is unscaled.

    logistic:  penalty(w) + C * sum log(1 + exp(-s_i d(x_i)))
    svm:       0.5 |w|^2  + C * sum max(0, 1 - s_i d(x_i))

with ``s_i = 2 y_i - 1``, ``penalty = 0.5 |w|^2`` (l2) or ``|w|_1`` (l1).
The bias is never penalized.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .data import Standardizer, fit_standardizer


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    standardizer: Standardizer | None = None
    feature_names: tuple | None = None
    converged: bool = True
    n_iter: int = 0
    objective: float = float("nan")

    def decision_function(self, X) -> np.ndarray:
        return decision_function(self, X)

    def predict(self, X) -> np.ndarray:
        return predict_linear(self, X)


def decision_function(model: LinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.weights.shape[0]:
        raise ValueError(f"expected {model.weights.shape[0]} feature columns, got shape {X.shape}")
    Z = model.standardizer.transform(X) if model.standardizer is not None else X
    return Z @ model.weights + model.bias


def predict_linear(model: LinearModel, X) -> np.ndarray:
    """Class 1 iff the decision value is strictly positive."""
    return (decision_function(model, X) > 0).astype(np.int64)


def _signs(labels) -> np.ndarray:
    y = np.asarray(labels)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return 2.0 * y - 1.0


def _check_both_classes(labels) -> None:
    y = np.asarray(labels)
    if y.size == 0 or y.min() == y.max():
        raise ValueError("training labels must contain both classes")


def _prepare(X, standardize: bool):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty 2-D training matrix")
    if not standardize:
        return X, None
    s = fit_standardizer(X)
    return s.transform(X), s


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# logistic regression


@dataclass(frozen=True)
class LogisticParams:
    C: float = 1.0
    penalty: str = "l2"
    random_state: int = 0
    tolerance: float = 1e-6
    max_iterations: int = 10_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be > 0, got {self.C}")
        if self.penalty not in ("l1", "l2"):
            raise ValueError(f"penalty must be 'l1' or 'l2', got {self.penalty!r}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")


class LossGradient(NamedTuple):
    objective: float
    gradient: np.ndarray  # d/dw followed by d/db, smooth part only


def logistic_loss_and_gradient(weights, bias, X, labels, C: float, penalty: str = "l2") -> LossGradient:
    """Full objective and the gradient of its smooth part.

    The l1 term is counted in the objective but left out of the gradient;
    it is handled by the proximal step.
    """
    w = np.asarray(weights, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != w.shape[0]:
        raise ValueError(f"weights of length {w.shape[0]} do not match X of shape {X.shape}")
    s = _signs(labels)
    if s.shape != (X.shape[0],):
        raise ValueError("labels and X have different row counts")
    margin = s * (X @ w + bias)
    data = C * float(np.sum(np.logaddexp(0.0, -margin)))
    # d/dd log(1+exp(-s d)) = -s * sigmoid(-s d)
    coef = -C * s * _sigmoid(-margin)
    grad_w = X.T @ coef
    grad_b = float(coef.sum())
    if penalty == "l2":
        obj = data + 0.5 * float(w @ w)
        grad_w = grad_w + w
    elif penalty == "l1":
        obj = data + float(np.abs(w).sum())
    else:
        raise ValueError(f"unknown penalty {penalty!r}")
    return LossGradient(obj, np.append(grad_w, grad_b))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def soft_threshold(v, t):
    """Proximal map of ``t * |.|_1``: ``sign(v) * max(|v| - t, 0)``."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _stop_tolerance(params: LogisticParams) -> float:
    # For C < 1 the tolerance applies to the objective divided by C (same
    # minimizer); otherwise a near-flat objective stops before the bias moves.
    return params.tolerance * min(1.0, params.C)


def _fit_l2_newton(Z, y, params: LogisticParams, theta: np.ndarray):
    """Damped Newton on the smooth l2 objective; stops on |grad| <= tolerance * min(1, C)."""
    n, p = Z.shape
    tol = _stop_tolerance(params)
    Za = np.hstack([Z, np.ones((n, 1))])
    reg = np.ones(p + 1)
    reg[-1] = 0.0
    obj, grad = logistic_loss_and_gradient(theta[:-1], theta[-1], Z, y, params.C, "l2")
    for it in range(1, params.max_iterations + 1):
        if np.linalg.norm(grad) <= tol:
            return theta, obj, True, it - 1
        d = Za @ theta
        pq = _sigmoid(d) * _sigmoid(-d)
        H = (Za.T * (params.C * pq)) @ Za + np.diag(reg)
        try:
            step = -np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = -grad
        if not step @ grad < 0:
            step = -grad
        t = 1.0
        while True:
            cand = theta + t * step
            c_obj, c_grad = logistic_loss_and_gradient(cand[:-1], cand[-1], Z, y, params.C, "l2")
            if c_obj <= obj + 1e-4 * t * (grad @ step) or t < 1e-12:
                break
            t *= 0.5
        if c_obj > obj:
            # numerically stalled at the optimum
            return theta, obj, np.linalg.norm(grad) <= tol, it
        theta, obj, grad = cand, c_obj, c_grad
    return theta, obj, np.linalg.norm(grad) <= tol, params.max_iterations


def _fit_l1_proximal(Z, y, params: LogisticParams, theta: np.ndarray, callback=None, weights=None):
    """Accelerated proximal gradient (FISTA) with backtracking and
    function-value restarts. Soft-thresholding acts on the weights only,
    with per-weight penalty factors ``weights`` (default 1).

    Stops when the proximal-gradient mapping ``|x - prox(x - t grad)| / t``
    at the current iterate is at most ``tolerance * min(1, C)``. Objective changes are
    accumulated per sample as ``log1p(sigmoid(-m) * expm1(-dm))`` so the
    sufficient-decrease test stays meaningful far below the rounding error
    of the objective itself.
    """
    C = params.C
    tol = _stop_tolerance(params)
    p = Z.shape[1]
    s = _signs(y)

    def margins(th):
        return s * (Z @ th[:-1] + th[-1])

    def grad(m):
        coef = -C * s * _sigmoid(-m)
        return np.append(Z.T @ coef, coef.sum())

    lam = np.ones(p) if weights is None else np.asarray(weights, dtype=float)

    def delta_smooth(m, m_new):
        # f(m_new) - f(m) for f = C * sum softplus(-m); large moves use the plain difference
        d = m - m_new
        near = np.abs(d) <= 30.0
        precise = np.log1p(_sigmoid(-m) * np.expm1(np.minimum(d, 30.0)))
        plain = np.logaddexp(0.0, -m_new) - np.logaddexp(0.0, -m)
        return C * float(np.sum(np.where(near, precise, plain)))

    def l1(th):
        return float((lam * np.abs(th[:-1])).sum())

    def prox(v, t):
        out = v.copy()
        out[:p] = soft_threshold(v[:p], t * lam)
        return out

    x = theta.copy()
    mx = margins(x)
    v, mv = x.copy(), mx
    k = 1.0
    t = 1.0 / max(C * Z.shape[0], 1.0)
    for it in range(1, params.max_iterations + 1):
        gv = grad(mv)
        t *= 2.0
        while True:
            x_new = prox(v - t * gv, t)
            diff = x_new - v
            m_new = margins(x_new)
            if delta_smooth(mv, m_new) <= gv @ diff + (diff @ diff) / (2 * t) or t < 1e-20:
                break
            t *= 0.5
        if callback is not None:
            callback(v.copy(), gv.copy(), t, x_new.copy())
        g_new = grad(m_new)
        mapping = np.linalg.norm(x_new - prox(x_new - t * g_new, t)) / t
        if mapping <= tol:
            x = x_new
            break
        if delta_smooth(mx, m_new) + l1(x_new) - l1(x) > 0:
            # objective went up: drop the momentum
            k = 1.0
            v, mv = x_new.copy(), m_new
        else:
            k_next = (1.0 + math.sqrt(1.0 + 4.0 * k * k)) / 2.0
            v = x_new + ((k - 1.0) / k_next) * (x_new - x)
            mv = margins(v)
            k = k_next
        x, mx = x_new, m_new
    else:
        it = params.max_iterations
        mapping = np.inf
    objective = C * float(np.sum(np.logaddexp(0.0, -margins(x)))) + l1(x)
    return x, objective, mapping <= tol, it


def _fit_l1_raw(X, y, params: LogisticParams, theta: np.ndarray, callback=None):
    """l1 fit on unscaled features through an exact change of variables.

    With ``z = (x - mu) / sigma`` and ``w' = w * sigma`` the margins are
    unchanged and ``|w|_1`` becomes ``sum |w'_j| / sigma_j``; the bias is
    unpenalized so centering is free. The minimizer is the same, but the
    solver sees well-conditioned columns. Constant columns keep sigma = 1.
    """
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    sigma[sigma == 0] = 1.0
    Z = (X - mu) / sigma
    w, b = theta[:-1], theta[-1]
    start = np.append(w * sigma, b + w @ mu)
    out, obj, ok, n_iter = _fit_l1_proximal(Z, y, params, start, callback, weights=1.0 / sigma)
    w = out[:-1] / sigma
    return np.append(w, out[-1] - w @ mu), obj, ok, n_iter


def fit_logistic(
    X,
    labels,
    params: LogisticParams = LogisticParams(),
    standardize: bool = True,
    feature_names=None,
    callback: Callable | None = None,
) -> LinearModel:
    """Fit l2 (Newton) or l1 (accelerated proximal gradient) logistic regression.

    The starting point is a small random vector drawn from
    ``params.random_state``. Non-convergence emits :class:`ConvergenceWarning`
    and returns the last iterate with ``converged=False``.

    ``callback(v, grad, step, v_next)`` is invoked after every l1 proximal step.
    """
    _check_both_classes(labels)
    Z, std = _prepare(X, standardize)
    y = np.asarray(labels)
    rng = np.random.default_rng(params.random_state)
    theta = rng.normal(scale=0.01, size=Z.shape[1] + 1)
    if params.penalty == "l2":
        theta, obj, ok, n_iter = _fit_l2_newton(Z, y, params, theta)
    elif std is not None:
        theta, obj, ok, n_iter = _fit_l1_proximal(Z, y, params, theta, callback)
    else:
        theta, obj, ok, n_iter = _fit_l1_raw(Z, y, params, theta, callback)
    if not ok:
        warnings.warn(
            f"logistic regression ({params.penalty}, C={params.C}) did not converge in {n_iter} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    return LinearModel(
        _frozen(theta[:-1]),
        float(theta[-1]),
        std,
        tuple(feature_names) if feature_names is not None else None,
        bool(ok),
        int(n_iter),
        float(obj),
    )


# ---------------------------------------------------------------------------
# linear SVM

KNOWN_KERNELS = ("linear", "rbf", "poly", "sigmoid")


@dataclass(frozen=True)
class SvmParams:
    kernel: str = "linear"
    C: float = 1.0
    random_state: int = 0
    epochs: int = 100
    # stop once 10 epochs together improve the objective by less than this
    # fraction; 0 runs every epoch
    tolerance: float = 0.0

    def __post_init__(self):
        if self.kernel not in KNOWN_KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; expected one of {KNOWN_KERNELS}")
        if self.kernel != "linear":
            raise NotImplementedError(f"kernel {self.kernel!r} is not implemented; only 'linear' is supported")
        if not self.C > 0:
            raise ValueError(f"C must be > 0, got {self.C}")
        if int(self.epochs) < 1:
            raise ValueError("epochs must be >= 1")


def svm_objective(weights, bias, Z, labels, C: float) -> float:
    w = np.asarray(weights, dtype=float)
    s = _signs(labels)
    hinge = np.maximum(0.0, 1.0 - s * (np.asarray(Z, dtype=float) @ w + bias))
    return 0.5 * float(w @ w) + C * float(hinge.sum())


def optimal_bias(scores, signs) -> float:
    """Exact minimizer over ``b`` of ``sum max(0, 1 - s_i (a_i + b))``.

    The sum is convex and piecewise linear in ``b``; the smallest breakpoint
    whose right-hand slope is non-negative is a minimizer.
    """
    a = np.asarray(scores, dtype=float)
    s = np.asarray(signs, dtype=float)
    breaks = np.where(s > 0, 1.0 - a, -1.0 - a)
    pos = np.sort(breaks[s > 0])
    neg = np.sort(breaks[s < 0])
    cand = np.sort(breaks)
    # right slope: negatives already active minus positives still active
    slope = np.searchsorted(neg, cand, side="right") - (pos.size - np.searchsorted(pos, cand, side="right"))
    ok = np.flatnonzero(slope >= 0)
    return float(cand[ok[0]] if ok.size else cand[-1])


@dataclass(frozen=True)
class SvmTrace:
    """Per-epoch record of the kept iterate (entry 0 is the zero model)."""

    objectives: tuple
    weights: tuple
    biases: tuple


def _pegasos(Z, s, C, order, epochs, tol):
    n, p = Z.shape
    lam = 1.0 / (C * n)
    y01 = (s > 0).astype(int)
    Zo, so = Z[order], s[order]
    w = np.zeros(p)
    b = 0.0
    t = 0
    run_w, run_count = np.zeros(p), 0

    best_w, best_b = np.zeros(p), 0.0
    best_obj = svm_objective(best_w, best_b, Z, y01, C)
    objs, ws, bs = [best_obj], [best_w], [best_b]
    for _ in range(epochs):
        epoch_w = np.zeros(p)
        for z, yi in zip(Zo, so):
            t += 1
            violated = yi * (w @ z + b) < 1.0
            w *= 1.0 - 1.0 / t
            if violated:
                eta = 1.0 / (lam * t)
                w = w + eta * yi * z
                b += eta * yi / n
            epoch_w += w
        run_w += epoch_w
        run_count += n
        # candidates: epoch average, running average, last iterate; bias refit exactly
        for cw in (epoch_w / n, run_w / run_count, w.copy()):
            cb = optimal_bias(Z @ cw, s)
            obj = svm_objective(cw, cb, Z, y01, C)
            if obj < best_obj:
                best_obj, best_w, best_b = obj, cw, cb
        b = best_b
        objs.append(best_obj)
        ws.append(best_w)
        bs.append(best_b)
        if len(objs) > 10 and objs[-11] - best_obj < tol * abs(objs[-11]):
            break
    return best_w, best_b, SvmTrace(tuple(objs), tuple(ws), tuple(bs))


def fit_linear_svm(
    X,
    labels,
    params: SvmParams = SvmParams(),
    standardize: bool = True,
    feature_names=None,
    return_trace: bool = False,
):
    """Primal subgradient SVM with Pegasos steps ``1/(lam t)``, ``lam = 1/(C n)``.

    Rows are visited in one fixed order shuffled by ``random_state``. The
    bias is unregularized: within an epoch it moves by ``eta/n`` per margin
    violation, and after each epoch it is refit exactly for the candidate
    weights (epoch average, running average, last iterate). The best
    candidate is kept only if it lowers the objective, so the recorded
    objective never increases.
    """
    _check_both_classes(labels)
    Z, std = _prepare(X, standardize)
    s = _signs(labels)
    order = np.random.default_rng(params.random_state).permutation(Z.shape[0])
    w, b, trace = _pegasos(Z, s, params.C, order, int(params.epochs), params.tolerance)
    model = LinearModel(
        _frozen(w),
        float(b),
        std,
        tuple(feature_names) if feature_names is not None else None,
        True,
        len(trace.objectives) - 1,
        trace.objectives[-1],
    )
    return (model, trace) if return_trace else model
