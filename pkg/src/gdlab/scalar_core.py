"""Deep linear network with one-dimensional layers: F(w) = f(w_1 * ... * w_k).

The hot loops live in numba kernels so that experiments reaching 10^8 - 10^9
iterations stay tractable.  Every public function funnels through the same
kernels, which keeps single steps, long runs and the matrix reduction
bit-identical.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numba as nb
import numpy as np

QUADRATIC = 0
LOGISTIC = 1

# kernel status codes
RUNNING = 0
CONVERGED = 1
MAX_ITERS = 2
DIVERGED = 3
SIGN_EVENT = 4


class Diverged(ArithmeticError):
    """Raised when an objective or gradient evaluation becomes non-finite."""


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"


_STATUS_FROM_CODE = {
    CONVERGED: Status.CONVERGED,
    MAX_ITERS: Status.MAX_ITERS,
    DIVERGED: Status.DIVERGED,
}


@dataclass(frozen=True)
class ScalarState:
    w: np.ndarray
    t: int = 0

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64).reshape(-1)
        if w.size < 1:
            raise ValueError("state needs at least one coordinate")
        if not np.all(np.isfinite(w)):
            raise Diverged("state has non-finite coordinates")
        if self.t < 0:
            raise ValueError("iteration index must be non-negative")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def k(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class ScalarLoss:
    """Outer loss f applied to the product of the coordinates.

    ``Quadratic(y)`` is 0.5 * (p - y)^2 and ``Logistic`` is log(1 + exp(p)).
    """

    kind: int = QUADRATIC
    y: float = 0.0

    @classmethod
    def quadratic(cls, y: float) -> "ScalarLoss":
        return cls(QUADRATIC, float(y))

    @classmethod
    def logistic(cls) -> "ScalarLoss":
        return cls(LOGISTIC, 0.0)

    @property
    def name(self) -> str:
        return "quadratic" if self.kind == QUADRATIC else "logistic"

    def value(self, p: float) -> float:
        return float(_loss_value(self.kind, self.y, float(p)))

    def derivative(self, p: float) -> float:
        return float(_loss_derivative(self.kind, self.y, float(p)))

    def sup_abs_derivative(self, bound: float) -> float:
        """sup of |f'(p)| over |p| <= bound (both built-ins have monotone f')."""
        if self.kind == QUADRATIC:
            return abs(bound) + abs(self.y)
        return self.derivative(abs(bound))


@dataclass(frozen=True)
class StepPlan:
    eta: float
    max_iters: int = 10**9
    stop_threshold: float = 0.1

    def __post_init__(self):
        if not self.eta >= 0.0 or not np.isfinite(self.eta):
            raise ValueError(f"eta must be a finite non-negative number, got {self.eta}")
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        object.__setattr__(self, "max_iters", int(self.max_iters))


@dataclass
class RunResult:
    """Outcome of a single gradient descent run (scalar or matrix)."""

    status: Status
    iterations: int
    final_objective: float
    final_state: object = field(repr=False)


# ---------------------------------------------------------------------------
# kernels


@nb.njit(cache=True)
def _loss_value(kind, y, p):
    if kind == QUADRATIC:
        r = p - y
        return 0.5 * (r * r)
    if p > 30.0:
        return p + np.log1p(np.exp(-p))
    return np.log1p(np.exp(p))


@nb.njit(cache=True)
def _loss_derivative(kind, y, p):
    if kind == QUADRATIC:
        return p - y
    if p >= 0.0:
        return 1.0 / (1.0 + np.exp(-p))
    e = np.exp(p)
    return e / (1.0 + e)


@nb.njit(cache=True)
def _product(w):
    p = 1.0
    for i in range(w.size):
        p *= w[i]
    return p


@nb.njit(cache=True)
def _gradient_into(w, dfp, out, suffix):
    # out[j] = (w_1 ... w_{j-1} * f'(p)) * (w_{j+1} ... w_k); no division
    k = w.size
    suffix[k - 1] = 1.0
    for j in range(k - 2, -1, -1):
        suffix[j] = w[j + 1] * suffix[j + 1]
    prefix = 1.0
    for j in range(k):
        out[j] = (prefix * dfp) * suffix[j]
        prefix = prefix * w[j]


@nb.njit(cache=True)
def _advance(w, kind, y, eta, threshold, t, t_stop, max_iters, stop_on_sign):
    """Iterate in place from iteration t.

    Returns (code, t, objective).  Stops at a terminal condition, at t_stop, or
    (when requested) at the first iteration whose sign pattern differs from the
    previous one.
    """
    k = w.size
    g = np.empty(k)
    suffix = np.empty(k)
    nonpos = w <= 0.0
    while True:
        p = _product(w)
        obj = _loss_value(kind, y, p)
        if not np.isfinite(obj):
            return DIVERGED, t, obj
        if obj <= threshold:
            return CONVERGED, t, obj
        if t >= max_iters:
            return MAX_ITERS, t, obj
        if t >= t_stop:
            return RUNNING, t, obj
        dfp = _loss_derivative(kind, y, p)
        _gradient_into(w, dfp, g, suffix)
        for j in range(k):
            w[j] = w[j] - eta * g[j]
        t += 1
        if stop_on_sign:
            changed = False
            for j in range(k):
                if (w[j] <= 0.0) != nonpos[j]:
                    changed = True
            if changed:
                p = _product(w)
                obj = _loss_value(kind, y, p)
                if not np.isfinite(obj):
                    return DIVERGED, t, obj
                return SIGN_EVENT, t, obj


@nb.njit(cache=True)
def _trajectory(w0, kind, y, eta, steps):
    k = w0.size
    ws = np.empty((steps + 1, k))
    objs = np.empty(steps + 1)
    w = w0.copy()
    g = np.empty(k)
    suffix = np.empty(k)
    for s in range(steps + 1):
        ws[s] = w
        p = _product(w)
        objs[s] = _loss_value(kind, y, p)
        if s == steps:
            break
        _gradient_into(w, _loss_derivative(kind, y, p), g, suffix)
        for j in range(k):
            w[j] = w[j] - eta * g[j]
    return ws, objs


# ---------------------------------------------------------------------------
# public operations


def _as_state(state) -> ScalarState:
    return state if isinstance(state, ScalarState) else ScalarState(np.asarray(state, dtype=float))


def scalar_objective(state, loss: ScalarLoss) -> float:
    state = _as_state(state)
    p = _product(state.w)
    value = _loss_value(loss.kind, loss.y, p)
    if not (np.isfinite(p) and np.isfinite(value)):
        raise Diverged(f"objective overflowed at t={state.t}")
    return float(value)


def scalar_gradient(state, loss: ScalarLoss) -> np.ndarray:
    state = _as_state(state)
    p = _product(state.w)
    dfp = _loss_derivative(loss.kind, loss.y, p)
    if not (np.isfinite(p) and np.isfinite(dfp)):
        raise Diverged(f"gradient overflowed at t={state.t}")
    out = np.empty(state.k)
    _gradient_into(state.w, dfp, out, np.empty(state.k))
    if not np.all(np.isfinite(out)):
        raise Diverged(f"gradient overflowed at t={state.t}")
    return out


def scalar_step(state, loss: ScalarLoss, eta: float) -> ScalarState:
    """One simultaneous gradient step; the gradient is evaluated at w(t)."""
    state = _as_state(state)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    g = scalar_gradient(state, loss)
    w = state.w - eta * g
    return ScalarState(w, state.t + 1)


def scalar_trajectory(state, loss: ScalarLoss, eta: float, steps: int):
    """Every iterate of ``steps`` plain gradient steps.

    Returns ``(ws, objectives)`` with shapes ``(steps + 1, k)`` and
    ``(steps + 1,)``.  No stopping rule is applied, non-finite values are
    stored as they come.
    """
    state = _as_state(state)
    return _trajectory(np.array(state.w), loss.kind, float(loss.y), float(eta), int(steps))


def scalar_run(init, loss: ScalarLoss, plan: StepPlan, recorder=None) -> RunResult:
    """Run gradient descent until convergence, the iteration cap or divergence.

    ``iterations`` is the number of steps taken: Converged reports the first t
    with F(w(t)) <= threshold, Diverged the first t with a non-finite value.
    """
    init = _as_state(init)
    w = np.array(init.w)
    t = init.t
    stop_on_sign = bool(recorder is not None and recorder.sign_events)
    if recorder is not None:
        recorder.begin(t, w, _loss_value(loss.kind, loss.y, _product(w)), _product(w))
    while True:
        t_stop = plan.max_iters if recorder is None else recorder.next_stop(t)
        code, t, obj = _advance(
            w, loss.kind, float(loss.y), float(plan.eta), float(plan.stop_threshold),
            t, t_stop, plan.max_iters, stop_on_sign,
        )
        if recorder is not None:
            recorder.observe(t, w, obj, _product(w), event=code == SIGN_EVENT)
        if code in _STATUS_FROM_CODE:
            break
    if recorder is not None:
        recorder.finish(t)
    status = _STATUS_FROM_CODE[code]
    final = ScalarState(w, t) if np.all(np.isfinite(w)) else None
    return RunResult(status, int(t), float(obj), final)


def check_loss_conditions(loss: ScalarLoss, grid=None, z: float = 10.0, lipschitz=None) -> dict:
    """Conditions on the outer loss evaluated on a finite grid of points.

    Clauses: the derivative agrees with central differences, f is strictly
    increasing on [-1/2, z), |f'| stays below ``lipschitz`` (default: the
    largest |f'| seen on the grid, i.e. only finiteness is tested), and
    min f over grid points >= -1/2 exceeds min f over the whole grid.
    Returns ``{clause: {"measured": ..., "passed": ...}}``; the grid is the
    caller's choice, so passing is evidence on that grid only.
    """
    grid = np.linspace(-20.0, 20.0, 4001) if grid is None else np.sort(np.asarray(grid, dtype=np.float64))
    f = np.array([loss.value(p) for p in grid])
    df = np.array([loss.derivative(p) for p in grid])
    h = 1e-6 * np.maximum(1.0, np.abs(grid))
    fd = np.array([(loss.value(p + s) - loss.value(p - s)) / (2 * s) for p, s in zip(grid, h)])
    fd_err = float(np.max(np.abs(fd - df) / np.maximum(1.0, np.abs(df))))
    inc = grid[(grid >= -0.5) & (grid < z)]
    f_inc = np.array([loss.value(p) for p in inc])
    step = float(np.min(np.diff(f_inc))) if inc.size > 1 else 0.0
    lip = float(np.max(np.abs(df)))
    bound = lip if lipschitz is None else float(lipschitz)
    right = grid >= -0.5
    gap = float(np.min(f[right]) - np.min(f)) if right.any() else float("nan")
    return {
        "differentiable": {"measured": fd_err, "passed": bool(fd_err <= 1e-5)},
        "strictly_increasing": {"measured": step, "passed": bool(step > 0)},
        "lipschitz": {"measured": lip, "passed": bool(np.isfinite(lip) and lip <= bound)},
        "positive_gap": {"measured": gap, "passed": bool(gap > 0)},
    }
