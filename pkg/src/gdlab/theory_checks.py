"""Instance-level numerical checks of the inequalities behind the convergence analysis.

Each check returns a :class:`LemmaReport`.  Margins are signed: positive means
the inequality holds with room to spare, and an instance counts as a
violation only when its margin drops below ``-tolerance``.  All random probes
come from :func:`gdlab.init.stream`, so reports are reproducible from a seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .init import (
    PLUS_MINUS_ONE,
    SCALAR_NEAR_ONE,
    XAVIER_GAUSSIAN,
    XAVIER_UNIFORM,
    InitScheme,
    check_assumption,
    sample_entries,
    stream,
)
from .scalar_core import (
    QUADRATIC,
    ScalarLoss,
    Status,
    StepPlan,
    scalar_gradient,
    scalar_objective,
    scalar_run,
    scalar_trajectory,
)


class PreconditionError(ValueError):
    """The inputs do not satisfy the hypotheses of the checked statement."""


class InfeasibleRegion(ValueError):
    pass


@dataclass
class LemmaReport:
    lemma_id: str
    n_instances: int
    n_violations: int
    worst_margin: float
    tolerance: float
    applicable: bool = True
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        out["worst_margin"] = _json_float(self.worst_margin)
        return out


def _json_float(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None if x is None or math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(x)


class _Tally:
    def __init__(self, lemma_id, tolerance):
        self.lemma_id = lemma_id
        self.tolerance = tolerance
        self.n = 0
        self.violations = 0
        self.worst = math.inf
        self.first_violation = None

    def add(self, margin, info=None):
        self.n += 1
        margin = float(margin)
        if math.isnan(margin):
            margin = -math.inf
        self.worst = min(self.worst, margin)
        if margin < -self.tolerance:
            self.violations += 1
            if self.first_violation is None:
                self.first_violation = info
        return margin

    def report(self, **details) -> LemmaReport:
        if self.first_violation is not None:
            details["first_violation"] = self.first_violation
        return LemmaReport(self.lemma_id, self.n, self.violations, self.worst, self.tolerance,
                           details=details)


def merge_reports(lemma_id: str, reports: Sequence[LemmaReport], **details) -> LemmaReport:
    applicable = [r for r in reports if r.applicable]
    return LemmaReport(
        lemma_id,
        sum(r.n_instances for r in applicable),
        sum(r.n_violations for r in applicable),
        min((r.worst_margin for r in applicable), default=math.inf),
        max((r.tolerance for r in reports), default=0.0),
        details={"parts": len(reports), "not_applicable": len(reports) - len(applicable), **details},
    )


def _leave_one_out(w: np.ndarray) -> np.ndarray:
    """prod_{i != j} w_i along the last axis, via prefix/suffix products."""
    w = np.asarray(w, dtype=np.float64)
    ones = np.ones(w.shape[:-1] + (1,))
    prefix = np.concatenate([ones, np.cumprod(w, axis=-1)[..., :-1]], axis=-1)
    suffix = np.concatenate([np.cumprod(w[..., ::-1], axis=-1)[..., ::-1][..., 1:], ones], axis=-1)
    return prefix * suffix


# ---------------------------------------------------------------------------
# elementary inequalities


def check_gm_inequality(samples: Iterable, tolerance: float = 1e-9) -> LemmaReport:
    """prod(w_i - alpha) <= ((prod w_i)^(1/k) - alpha)^k for min w_i > alpha > 0.

    ``samples`` yields ``(w, alpha)`` pairs.  Margins are relative to the
    right-hand side.
    """
    tally = _Tally("gm", tolerance)
    for w, alpha in samples:
        w = np.asarray(w, dtype=np.float64)
        if not (alpha > 0 and np.min(w) > alpha):
            raise PreconditionError("need alpha > 0 and min w_i > alpha")
        k = w.size
        lhs = float(np.prod(w - alpha))
        rhs = (float(np.prod(w)) ** (1.0 / k) - alpha) ** k
        tally.add((rhs - lhs) / max(abs(rhs), 1e-300), {"w": w.tolist(), "alpha": alpha})
    return tally.report()


def random_gm_samples(n: int, seed: int = 0, k_max: int = 10):
    rng = stream(seed, 1)
    for _ in range(n):
        k = int(rng.integers(1, k_max + 1))
        alpha = float(rng.uniform(0.0, 2.0)) or 1.0
        w = alpha + rng.uniform(0.0, 10.0, k)
        w[w <= alpha] = alpha + 1e-12 * alpha
        yield w, alpha


def check_logab(samples: Iterable, tolerance: float = 1e-12) -> LemmaReport:
    """log(a + b) <= log(a) + b / a for a > 0, b >= 0 (absolute slack)."""
    tally = _Tally("logab", tolerance)
    for a, b in samples:
        if not (a > 0 and b >= 0):
            raise PreconditionError("need a > 0 and b >= 0")
        tally.add(math.log(a) + b / a - math.log(a + b), {"a": a, "b": b})
    return tally.report()


def random_logab_samples(n: int, seed: int = 0):
    rng = stream(seed, 2)
    a = np.exp(rng.uniform(-7.0, 7.0, n))
    b = np.where(rng.random(n) < 0.5, a * rng.uniform(0.0, 1e-3, n), np.exp(rng.uniform(-7.0, 7.0, n)))
    return list(zip(a.tolist(), b.tolist()))


# ---------------------------------------------------------------------------
# probability and flat-region statements


def check_smallinit(scheme: InitScheme, k: int, a: float, n_mc: int = 10**5,
                    seed: int = 0) -> LemmaReport:
    """P(max_j |prod_{i!=j} w_i| >= k a^((k-1)/2)) <= a^((k-1)/2) by Monte Carlo.

    The empirical frequency may exceed the bound by at most three standard
    errors (computed at the bound).  E|w| <= a is first checked on the same
    draws and a clear violation raises :class:`PreconditionError`.
    """
    if n_mc < 10**4:
        raise PreconditionError("n_mc must be at least 10^4")
    if k < 2:
        raise PreconditionError("k must be at least 2")
    rng = stream(seed, 3)
    draws = sample_entries(scheme.kind, rng, (n_mc, k), d=1, k=k,
                           radius_exponent=scheme.radius_exponent)
    abs_w = np.abs(draws)
    abs_mean = float(abs_w.mean())
    abs_se = float(abs_w.std(ddof=1) / math.sqrt(abs_w.size))
    if abs_mean - 3.0 * abs_se > a:
        raise PreconditionError(f"E|w| ~ {abs_mean:.4f} exceeds a = {a}")
    bound = a ** ((k - 1) / 2.0)
    threshold = k * bound
    hits = int(np.count_nonzero(np.max(np.abs(_leave_one_out(draws)), axis=1) >= threshold))
    freq = hits / n_mc
    p0 = min(bound, 1.0)
    se = math.sqrt(p0 * (1.0 - p0) / n_mc)
    tally = _Tally("smallinit", 0.0)
    tally.add(bound + 3.0 * se - freq)
    return tally.report(scheme=scheme.scheme_id, k=k, a=a, n_mc=n_mc, bound=bound,
                        empirical=freq, standard_error=se, abs_mean=abs_mean)


def flatball_radius(k: int, alpha: float, beta: float, delta: float) -> float:
    return delta / math.sqrt(k - 1) * math.log(beta / alpha)


def check_flatball(w, loss: ScalarLoss, alpha: float, beta: float, delta: float,
                   n_probes: int = 1000, seed: int = 0, tolerance: float = 1e-12) -> LemmaReport:
    """Probe the ball around w where the gradient must stay small.

    Preconditions (raise :class:`PreconditionError`): k >= 2, beta > alpha,
    max_j |prod_{i!=j} w_i| <= alpha and min |w_i| >= delta.  For probes v in
    the ball of radius delta / sqrt(k-1) * log(beta / alpha) (v = w first),
    asserts |prod v| <= beta ||v||_inf and
    ||grad F(v)|| <= sup_{|p| <= beta ||v||_inf} |f'(p)| sqrt(k) beta.
    """
    w = np.asarray(getattr(w, "w", w), dtype=np.float64)
    k = w.size
    if k < 2:
        raise PreconditionError("k must be at least 2")
    if not (0 < alpha < beta and delta > 0):
        raise PreconditionError("need 0 < alpha < beta and delta > 0")
    if np.max(np.abs(_leave_one_out(w))) > alpha:
        raise PreconditionError("max_j |prod_{i != j} w_i| exceeds alpha")
    if np.min(np.abs(w)) < delta:
        raise PreconditionError("some |w_i| is below delta")
    radius = flatball_radius(k, alpha, beta, delta)
    rng = stream(seed, 4)
    tally = _Tally("flatball", tolerance)
    for i in range(n_probes):
        if i == 0:
            v = w.copy()
        else:
            u = rng.standard_normal(k)
            u /= np.linalg.norm(u)
            v = w + radius * rng.random() ** (1.0 / k) * u
        vmax = float(np.max(np.abs(v)))
        prod_bound = beta * vmax
        m1 = (prod_bound - abs(float(np.prod(v)))) / max(prod_bound, 1e-300)
        grad_bound = loss.sup_abs_derivative(prod_bound) * math.sqrt(k) * beta
        gnorm = float(np.linalg.norm(scalar_gradient(v, loss)))
        m2 = (grad_bound - gnorm) / max(grad_bound, 1e-300)
        tally.add(min(m1, m2), {"probe": i})
    return tally.report(radius=radius, alpha=alpha, beta=beta, delta=delta, k=k)


# ---------------------------------------------------------------------------
# the positive-target regime


@dataclass(frozen=True)
class RegionW:
    """Points with prod w in [0, y), every w_i >= delta and all but one >= gamma."""

    y: float
    delta: float
    gamma: float
    k: int

    def __post_init__(self):
        if not (self.y > 0 and self.delta > 0 and self.gamma >= self.delta and self.k >= 1):
            raise ValueError("region needs y > 0, gamma >= delta > 0 and k >= 1")

    def contains(self, w) -> bool:
        w = np.sort(np.asarray(w, dtype=np.float64))
        p = float(np.prod(w))
        return bool(0 <= p < self.y and w[0] >= self.delta and (w.size < 2 or w[1] >= self.gamma))

    @property
    def pl_constant(self) -> float:
        """mu in ||grad F||^2 >= mu F on the region."""
        return 2.0 * self.k * self.delta**2 * self.gamma ** (2 * (self.k - 2))

    @property
    def smoothness(self) -> float:
        return 2.0 * self.k * self.y**2 / self.delta**2


def sample_region(region: RegionW, n: int, seed: int = 0, max_attempts: int = 10**6) -> np.ndarray:
    """Rejection sampler for points of the region.

    Proposal: a uniformly chosen coordinate gets lower bound delta, the others
    gamma; log-excesses over the lower bounds are exponential with mean
    budget / k, and a proposal is accepted when the product stays below y.
    """
    k = region.k
    budget = math.log(region.y) - (math.log(region.delta) + (k - 1) * math.log(region.gamma))
    if not budget > 0:
        raise InfeasibleRegion("lower corner already has product >= y")
    rng = stream(seed, 5)
    out = []
    attempts = 0
    while len(out) < n:
        batch = max(64, 2 * (n - len(out)))
        attempts += batch
        if attempts > max_attempts:
            raise InfeasibleRegion(f"fewer than {n} accepted points after {max_attempts} attempts")
        lower = np.full((batch, k), math.log(region.gamma))
        lower[np.arange(batch), rng.integers(0, k, batch)] = math.log(region.delta)
        excess = rng.exponential(budget / k, (batch, k))
        logs = lower + excess
        pts = np.exp(logs)
        ok = np.prod(pts, axis=1) < region.y
        out.extend(pts[ok])
    return np.array(out[:n])


def check_pl_condition(region: RegionW, n_probes: int = 1000, seed: int = 0,
                       tolerance: float = 1e-9) -> LemmaReport:
    """||grad F(w)||^2 >= 2 k delta^2 gamma^(2(k-2)) F(w) on the region (quadratic loss, target y)."""
    loss = ScalarLoss.quadratic(region.y)
    mu = region.pl_constant
    probes = []
    corner = np.array([region.delta] + [region.gamma] * (region.k - 1))
    if region.contains(corner):
        probes.append(corner)
    probes.extend(sample_region(region, n_probes - len(probes), seed))
    tally = _Tally("pl", tolerance)
    for i, w in enumerate(probes):
        if not region.contains(w):
            raise AssertionError("sampler produced a point outside the region")
        g = scalar_gradient(w, loss)
        lhs = float(g @ g)
        rhs = mu * scalar_objective(w, loss)
        tally.add((lhs - rhs) / max(rhs, 1e-300), {"probe": i})
    return tally.report(mu=mu, **asdict(region))


def hessian_formula(w, y: float) -> np.ndarray:
    """Closed-form Hessian of 0.5 (prod w - y)^2; needs every w_i != 0."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w == 0):
        raise PreconditionError("closed-form Hessian divides by w_r w_s")
    p = float(np.prod(w))
    outer = np.outer(w, w)
    H = (p - y) * p / outer + p * p / outer
    np.fill_diagonal(H, p * p / w**2)
    return H


def hessian_fd(w, y: float, h: Optional[float] = None) -> np.ndarray:
    """Second-order central finite differences of F."""
    w = np.asarray(w, dtype=np.float64)
    k = w.size
    loss = ScalarLoss.quadratic(y)
    F = lambda v: scalar_objective(v, loss)
    steps = (1e-4 if h is None else h) * np.maximum(1.0, np.abs(w))
    H = np.empty((k, k))
    f0 = F(w)
    for r in range(k):
        er = np.zeros(k)
        er[r] = steps[r]
        H[r, r] = (F(w + er) - 2.0 * f0 + F(w - er)) / steps[r] ** 2
        for s in range(r + 1, k):
            es = np.zeros(k)
            es[s] = steps[s]
            H[r, s] = H[s, r] = (F(w + er + es) - F(w + er - es) - F(w - er + es) + F(w - er - es)) / (
                4.0 * steps[r] * steps[s])
    return H


def check_hessian(w, y: float, region: Optional[RegionW] = None, tolerance: float = 1e-4) -> LemmaReport:
    """Closed-form Hessian vs finite differences (relative max-entry error).

    When ``region`` is given and contains w, the spectral norm is also checked
    against 2 k y^2 / delta^2.
    """
    w = np.asarray(getattr(w, "w", w), dtype=np.float64)
    H = hessian_formula(w, y)
    fd = hessian_fd(w, y)
    scale = max(float(np.max(np.abs(H))), 1e-12)
    tally = _Tally("hessian", tolerance)
    tally.add(-float(np.max(np.abs(fd - H))) / scale, {"w": w.tolist(), "y": y})
    spectral = None
    if region is not None and region.contains(w):
        spectral = float(np.linalg.norm(H, 2))
        bound = region.smoothness
        if spectral > bound * (1 + 1e-12):
            tally.violations += 1
            tally.first_violation = tally.first_violation or {"spectral": spectral, "bound": bound}
    return tally.report(spectral_norm=spectral)


def random_hessian_instances(n: int, seed: int = 0, k_max: int = 6):
    rng = stream(seed, 6)
    for _ in range(n):
        k = int(rng.integers(1, k_max + 1))
        w = rng.uniform(0.5, 1.5, k) * rng.choice([-1.0, 1.0], k)
        yield w, float(rng.uniform(-2.0, 2.0))


# ---------------------------------------------------------------------------
# trajectory statements


def check_signswitch(w1, sigma, y: float, eta: float, steps: int) -> LemmaReport:
    """Flipping coordinate signs (and the target by their product) mirrors the trajectory exactly."""
    w1 = np.asarray(getattr(w1, "w", w1), dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if steps < 1:
        raise PreconditionError("steps must be >= 1")
    if w1.shape != sigma.shape or not np.all(np.abs(sigma) == 1.0):
        raise PreconditionError("sigma must be a +-1 vector matching w")
    s = float(np.prod(sigma))
    ws, fw = scalar_trajectory(w1, ScalarLoss.quadratic(y), eta, steps)
    vs, fv = scalar_trajectory(sigma * w1, ScalarLoss.quadratic(s * y), eta, steps)
    tally = _Tally("signswitch", 0.0)
    for t in range(steps + 1):
        same = bool(np.all(vs[t] == sigma * ws[t]) and fw[t] == fv[t])
        tally.add(0.0 if same else -1.0, {"t": t})
    return tally.report()


def random_signswitch(n: int = 100, steps: int = 1000, seed: int = 0, eta: float = 1e-3) -> LemmaReport:
    rng = stream(seed, 7)
    reports = []
    for _ in range(n):
        k = int(rng.integers(1, 9))
        w1 = rng.uniform(-1.2, 1.2, k)
        sigma = rng.choice([-1.0, 1.0], k)
        y = float(rng.uniform(-2.0, 2.0))
        reports.append(check_signswitch(w1, sigma, y, eta, steps))
    return merge_reports("signswitch", reports, trajectories=n, steps=steps)


def check_step_invariants(ws: np.ndarray, y: float, eta: float, gap_tol: float = 1e-12) -> dict:
    """Per-step statements along a full quadratic-loss trajectory ``ws`` (steps + 1, k).

    Returns reports for monotone decay while every coordinate is positive and
    y < 0, non-shrinking gaps while every coordinate is non-negative and y < 0,
    and the squared-gap identity (with the drift bound it implies) whenever the
    minimum coordinate is positive.
    """
    ws = np.asarray(ws, dtype=np.float64)
    decay = _Tally("decay", 0.0)
    gaps = _Tally("gapincrease", gap_tol)
    ident = _Tally("gap", 1e-9)
    for t in range(ws.shape[0] - 1):
        w, wn = ws[t], ws[t + 1]
        p, pn = float(np.prod(w)), float(np.prod(wn))
        dfp = p - y
        if y < 0 and np.min(w) > 0:
            decay.add(min(float(np.min(w - wn)), p - pn), {"t": t})
        if y < 0 and np.min(w) >= 0:
            order = np.argsort(w, kind="stable")
            before = w[order][None, :] - w[order][:, None]
            after = wn[order][None, :] - wn[order][:, None]
            upper = np.triu_indices(w.size, 1)
            if upper[0].size:
                gaps.add(float(np.min(after[upper] - before[upper])), {"t": t})
        if np.min(w) > 0 and w.size >= 2:
            sq, sqn = w**2, wn**2
            loo2 = _leave_one_out(w) ** 2
            predicted = (sq[:, None] - sq[None, :]) + eta**2 * dfp**2 * (loo2[:, None] - loo2[None, :])
            actual = sqn[:, None] - sqn[None, :]
            scale = max(1.0, float(np.max(np.abs(actual))))
            c2 = dfp**2 * np.abs(1.0 / sq[:, None] - 1.0 / sq[None, :])
            drift = np.abs(actual) - np.abs(sq[:, None] - sq[None, :])
            slack = c2 * eta**2 * p**2 - drift
            ident.add(min(-float(np.max(np.abs(predicted - actual))) / scale,
                          float(np.min(slack)) / scale), {"t": t})
    return {"decay": decay.report(), "gapincrease": gaps.report(), "gap": ident.report()}


def check_phase_structure(trajectory, result, y: float, *, c2: float = 2.0, c4: float = 2.0,
                          pair_product_bound: float = 4.0) -> LemmaReport:
    """Structure of a run from a positive init with target y < 0.

    ``trajectory`` must be a :class:`~gdlab.experiments.TrajectoryRecorder`
    built with ``sign_events=True`` so zero crossings are recorded exactly;
    its first snapshot is taken as w(1).  Initializations outside the
    hypotheses (non-positive coordinates, or failing the separation assumption
    with the supplied constants) give a report with ``applicable=False``.

    Asserted: exactly one coordinate ever becomes non-positive; it is the
    initial argmin; at its first non-positive iteration t0 every other
    coordinate is positive and larger; at t0 + 1 it is strictly negative while
    the others stay positive; afterwards the objective is non-increasing and
    the run converges.
    """
    if not getattr(trajectory, "sign_events", False):
        raise ValueError("trajectory must be recorded with sign_events=True")
    coords = trajectory.coordinates
    w1 = coords[0]
    a4 = check_assumption("A4", state=w1, y=y, c2=c2, c4=c4, pair_product_bound=pair_product_bound)
    if not (np.all(w1 > 0) and a4.passed):
        return LemmaReport("phase_structure", 0, 0, math.inf, 0.0, applicable=False,
                           details={"reason": "initialization outside the hypotheses",
                                    "clauses": {c.name: c.passed for c in a4.clauses}})
    tally = _Tally("phase_structure", 0.0)
    ts = np.asarray(trajectory.t)
    nonpos = coords <= 0.0
    crossed = np.flatnonzero(nonpos.any(axis=0))
    tally.add(0.0 if crossed.size == 1 else -1.0, {"clause": "unique_crossing", "coords": crossed.tolist()})
    j_star = int(np.argmin(w1))
    tally.add(0.0 if crossed.size >= 1 and crossed[0] == j_star else -1.0,
              {"clause": "initial_argmin", "argmin": j_star})
    details = {"j_star": j_star}
    if crossed.size >= 1:
        j = int(crossed[0])
        i0 = int(np.flatnonzero(nonpos[:, j])[0])
        t0 = int(ts[i0])
        others = np.delete(coords[i0], j)
        tally.add(min(float(np.min(others - coords[i0, j])), float(np.min(others))) if others.size else 0.0,
                  {"clause": "others_positive_at_t0", "t0": t0})
        has_next = i0 + 1 < ts.size and ts[i0 + 1] == t0 + 1
        if has_next:
            nxt = coords[i0 + 1]
            m = min(-float(nxt[j]), float(np.min(np.delete(nxt, j))) if others.size else math.inf)
            tally.add(m if m > 0 else -1.0, {"clause": "strictly_negative_at_t0_plus_1"})
            tail = np.asarray(trajectory.objective[i0 + 1:])
            inc = float(np.max(np.diff(tail))) if tail.size > 1 else -0.0
            tally.add(-max(inc, 0.0), {"clause": "objective_decreasing_after_t0_plus_1"})
        else:
            tally.add(-1.0, {"clause": "strictly_negative_at_t0_plus_1", "missing_snapshot": True})
        details.update(t0=t0, w_star_t0=float(coords[i0, j]))
    tally.add(0.0 if result.status == Status.CONVERGED else -1.0, {"clause": "converged"})
    details["iterations"] = int(result.iterations)
    return tally.report(**details)


def run_phase_structure(w1, y: float, eta: float, max_iters: int = 10**8, threshold: float = 0.1,
                        **constants) -> LemmaReport:
    from .experiments import TrajectoryRecorder

    rec = TrajectoryRecorder("geometric", 1.05, sign_events=True)
    result = scalar_run(np.asarray(w1, dtype=np.float64), ScalarLoss.quadratic(y),
                        StepPlan(eta, max_iters, threshold), rec)
    return check_phase_structure(rec, result, y, **constants)


def random_separated_init(rng: np.random.Generator, k: int, low: float = 0.7, high: float = 1.3,
                          c4: float = 2.0, pair_product_bound: float = 4.0, y: float = -1.0) -> np.ndarray:
    """Uniform draw on [low, high]^k conditioned on the separation assumption."""
    for _ in range(10**5):
        w = rng.uniform(low, high, k)
        if check_assumption("A4", state=w, y=y, c4=c4, pair_product_bound=pair_product_bound).passed:
            return w
    raise InfeasibleRegion("could not draw a separated initialization")


# ---------------------------------------------------------------------------
# distribution constants


def check_abs_mean(scheme: InitScheme, bound: float, n: int = 10**6, seed: int = 0) -> LemmaReport:
    """Monte Carlo E|w| for a unit-variance scheme against an upper ``bound``.

    A violation needs the estimate to exceed the bound by three standard errors.
    """
    rng = stream(seed, 8)
    x = np.abs(sample_entries(scheme.kind, rng, n, d=1, k=1))
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n))
    tally = _Tally(f"abs_mean_{scheme.scheme_id}", 0.0)
    tally.add(bound - (mean - 3.0 * se))
    return tally.report(estimate=mean, standard_error=se, bound=bound)


# ---------------------------------------------------------------------------
# suite


def verify_suite(seed: int = 42, quick: bool = False) -> dict:
    """All checks with the default sizes; ``quick`` shrinks sample counts ~10x."""
    scale = 10 if quick else 1
    out = {}
    out["gm"] = check_gm_inequality(random_gm_samples(10**4 // scale, seed))
    out["logab"] = check_logab(random_logab_samples(10**5 // scale, seed))
    out["pl"] = check_pl_condition(RegionW(y=1.0, delta=0.2, gamma=0.5, k=6), 10**3 // scale, seed)
    out["flatball"] = merge_reports("flatball", [
        check_flatball(np.ones(10), ScalarLoss.quadratic(-1.0), 1.0, 2.0, 1.0, 10**3 // scale, seed),
        check_flatball(np.full(12, 0.6), ScalarLoss.logistic(), 0.004, 0.01, 0.6, 10**3 // scale, seed),
    ])
    out["smallinit"] = merge_reports("smallinit", [
        check_smallinit(InitScheme(XAVIER_GAUSSIAN), 21, 0.8, 10**5 // scale, seed),
        check_smallinit(InitScheme(XAVIER_UNIFORM), 11, 0.9, 10**5 // scale, seed),
        check_smallinit(InitScheme(PLUS_MINUS_ONE), 11, 1.0, 10**5 // scale, seed),
    ])
    out["signswitch"] = random_signswitch(100 // scale, 1000, seed)
    out["hessian"] = merge_reports("hessian", [
        check_hessian(w, y) for w, y in random_hessian_instances(100, seed)
    ] + [check_hessian(np.array([0.2] + [0.5] * 5), 1.0, RegionW(1.0, 0.2, 0.5, 6))])
    rng = stream(seed, 9)
    steps = {"decay": [], "gapincrease": [], "gap": []}
    for _ in range(20 // (2 if quick else 1)):
        k = int(rng.integers(2, 9))
        ws, _ = scalar_trajectory(rng.uniform(0.6, 1.2, k), ScalarLoss.quadratic(-1.0), 1e-2, 2000)
        for name, rep in check_step_invariants(ws, -1.0, 1e-2).items():
            steps[name].append(rep)
    for name, reps in steps.items():
        out[name] = merge_reports(name, reps)
    phase = []
    for i in range(20 // (2 if quick else 1)):
        k = 3 + i % 5
        phase.append(run_phase_structure(random_separated_init(rng, k), -1.0, 1e-3))
    out["phase_structure"] = merge_reports("phase_structure", phase)
    out["abs_mean_gaussian"] = check_abs_mean(InitScheme(XAVIER_GAUSSIAN), 0.8, 10**6 // scale, seed)
    out["abs_mean_uniform"] = check_abs_mean(InitScheme(XAVIER_UNIFORM), 0.9, 10**6 // scale, seed)
    return out
