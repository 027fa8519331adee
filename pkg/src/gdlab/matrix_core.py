"""Deep linear network with square d x d layers.

Objective ``F(W_1, ..., W_k) = 0.5 * ||W_1 W_2 ... W_k - Y||_F^2``.

The gradient with respect to ``W_j`` is ``L_j^T R R_j^T`` with ``R`` the
residual, ``L_j = W_1 ... W_{j-1}`` and ``R_j = W_{j+1} ... W_k``.  Prefix and
suffix products are cached so one gradient costs 4k - 5 matrix products.  The
operation order mirrors :mod:`gdlab.scalar_core` exactly, so ``d = 1`` runs
reproduce scalar runs bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .scalar_core import (
    CONVERGED,
    DIVERGED,
    MAX_ITERS,
    RUNNING,
    Diverged,
    RunResult,
    Status,
    StepPlan,
)

_STATUS_FROM_CODE = {
    CONVERGED: Status.CONVERGED,
    MAX_ITERS: Status.MAX_ITERS,
    DIVERGED: Status.DIVERGED,
}


@dataclass(frozen=True)
class MatrixState:
    mats: np.ndarray  # shape (k, d, d)
    t: int = 0

    def __post_init__(self):
        mats = np.array(self.mats, dtype=np.float64, order="C")
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2] or mats.shape[0] < 1:
            raise ValueError(f"expected k >= 1 square matrices, got shape {mats.shape}")
        if not np.all(np.isfinite(mats)):
            raise Diverged("state has non-finite entries")
        mats.flags.writeable = False
        object.__setattr__(self, "mats", mats)

    @property
    def k(self) -> int:
        return self.mats.shape[0]

    @property
    def d(self) -> int:
        return self.mats.shape[1]


@dataclass(frozen=True)
class MatrixTarget:
    Y: np.ndarray

    def __post_init__(self):
        Y = np.array(self.Y, dtype=np.float64, order="C")
        if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
            raise ValueError(f"target must be a square matrix, got shape {Y.shape}")
        Y.flags.writeable = False
        object.__setattr__(self, "Y", Y)

    @classmethod
    def minus_identity(cls, d: int) -> "MatrixTarget":
        return cls(-np.eye(d))

    @property
    def d(self) -> int:
        return self.Y.shape[0]


# ---------------------------------------------------------------------------
# kernels


@nb.njit(cache=True)
def _residual_objective(P, Y, R):
    d = P.shape[0]
    s = 0.0
    for a in range(d):
        for b in range(d):
            r = P[a, b] - Y[a, b]
            R[a, b] = r
            s += r * r
    return 0.5 * s


@nb.njit(cache=True)
def _prefixes(W, L):
    # L[j] = W_0 ... W_{j-1}; L[0] is unused (identity)
    k = W.shape[0]
    L[1] = W[0]
    for j in range(1, k):
        np.dot(L[j], W[j], L[j + 1])


@nb.njit(cache=True)
def _gradient_into(W, R, L, S, G, tmp):
    k = W.shape[0]
    # S[j] = W_{j+1} ... W_{k-1}; S[k-1] is unused (identity)
    if k >= 2:
        S[k - 2] = W[k - 1]
        for j in range(k - 3, -1, -1):
            np.dot(W[j + 1], S[j + 1], S[j])
    for j in range(k):
        if j == 0:
            tmp[:, :] = R
        else:
            np.dot(L[j].T, R, tmp)
        if j == k - 1:
            G[j] = tmp
        else:
            np.dot(tmp, S[j].T, G[j])


@nb.njit(cache=True)
def _objective_only(W, Y, L, R):
    _prefixes(W, L)
    return _residual_objective(L[W.shape[0]], Y, R)


@nb.njit(cache=True)
def _advance(W, Y, eta, threshold, t, t_stop, max_iters):
    k, d = W.shape[0], W.shape[1]
    L = np.empty((k + 1, d, d))
    S = np.empty((k, d, d))
    G = np.empty((k, d, d))
    R = np.empty((d, d))
    tmp = np.empty((d, d))
    while True:
        obj = _objective_only(W, Y, L, R)
        if not np.isfinite(obj):
            return DIVERGED, t, obj
        if obj <= threshold:
            return CONVERGED, t, obj
        if t >= max_iters:
            return MAX_ITERS, t, obj
        if t >= t_stop:
            return RUNNING, t, obj
        _gradient_into(W, R, L, S, G, tmp)
        for j in range(k):
            for a in range(d):
                for b in range(d):
                    W[j, a, b] = W[j, a, b] - eta * G[j, a, b]
        t += 1


@nb.njit(cache=True)
def _gradient(W, Y):
    k, d = W.shape[0], W.shape[1]
    L = np.empty((k + 1, d, d))
    S = np.empty((k, d, d))
    G = np.empty((k, d, d))
    R = np.empty((d, d))
    tmp = np.empty((d, d))
    obj = _objective_only(W, Y, L, R)
    _gradient_into(W, R, L, S, G, tmp)
    return obj, G


@nb.njit(cache=True)
def _product_of(W):
    k, d = W.shape[0], W.shape[1]
    L = np.empty((k + 1, d, d))
    _prefixes(W, L)
    return L[k].copy()


# ---------------------------------------------------------------------------
# public operations


def _as_state(state) -> MatrixState:
    return state if isinstance(state, MatrixState) else MatrixState(state)


def _check_dims(state: MatrixState, target: MatrixTarget) -> None:
    if state.d != target.d:
        raise ValueError(f"layer size {state.d} does not match target size {target.d}")


def matrix_product(state) -> np.ndarray:
    """W_1 W_2 ... W_k, multiplied left to right."""
    state = _as_state(state)
    return _product_of(np.array(state.mats))


def matrix_objective(state, target: MatrixTarget) -> float:
    state = _as_state(state)
    _check_dims(state, target)
    d = state.d
    value = _objective_only(
        np.array(state.mats), target.Y, np.empty((state.k + 1, d, d)), np.empty((d, d))
    )
    if not np.isfinite(value):
        raise Diverged(f"objective overflowed at t={state.t}")
    return float(value)


def matrix_gradient(state, target: MatrixTarget) -> np.ndarray:
    """Gradients for every layer, stacked with shape (k, d, d)."""
    state = _as_state(state)
    _check_dims(state, target)
    obj, G = _gradient(np.array(state.mats), target.Y)
    if not (np.isfinite(obj) and np.all(np.isfinite(G))):
        raise Diverged(f"gradient overflowed at t={state.t}")
    return G


def matrix_step(state, target: MatrixTarget, eta: float) -> MatrixState:
    state = _as_state(state)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    G = matrix_gradient(state, target)
    return MatrixState(state.mats - eta * G, state.t + 1)


def matrix_run(init, target: MatrixTarget, plan: StepPlan, recorder=None) -> RunResult:
    """Matrix analogue of :func:`gdlab.scalar_core.scalar_run`."""
    init = _as_state(init)
    _check_dims(init, target)
    W = np.array(init.mats)
    t = init.t
    if recorder is not None:
        recorder.begin(t, _layer_norms(W), matrix_objective(init, target), _product_norm(W))
    while True:
        t_stop = plan.max_iters if recorder is None else recorder.next_stop(t)
        code, t, obj = _advance(
            W, target.Y, float(plan.eta), float(plan.stop_threshold), t, t_stop, plan.max_iters
        )
        if recorder is not None:
            recorder.observe(t, _layer_norms(W), obj, _product_norm(W), event=False)
        if code in _STATUS_FROM_CODE:
            break
    if recorder is not None:
        recorder.finish(t)
    final = MatrixState(W, t) if np.all(np.isfinite(W)) else None
    return RunResult(_STATUS_FROM_CODE[code], int(t), float(obj), final)


def _layer_norms(W: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(W * W, axis=(1, 2)))


def _product_norm(W: np.ndarray) -> float:
    with np.errstate(all="ignore"):
        P = _product_of(W)
        return float(np.sqrt(np.sum(P * P)))
