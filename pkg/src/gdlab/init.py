"""Random initialization schemes and the per-trial randomness contract.

Stream derivation
-----------------
Every draw for a given ``(seed, trial_index)`` comes from::

    numpy.random.Generator(PCG64(SeedSequence(entropy=seed, spawn_key=(trial_index,))))

which is exactly the ``trial_index``-th child of ``SeedSequence(seed).spawn``.
The mapping is a pure function of the pair, so trials can run in any order or
in parallel without changing results.  Gaussian entries use numpy's
``standard_normal`` (ziggurat); uniform entries use ``Generator.uniform``.
The golden-seed tests pin both.

Entry layout: scalar schemes draw one length-k vector; matrix schemes draw a
single ``(k, d, d)`` block in C order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .matrix_core import MatrixState
from .scalar_core import ScalarState

XAVIER_GAUSSIAN = "xavier_gaussian"
XAVIER_UNIFORM = "xavier_uniform"
NEAR_IDENTITY = "near_identity"
SCALAR_NEAR_ONE = "scalar_near_one"
PLUS_MINUS_ONE = "plus_minus_one"
EXPLICIT = "explicit"

ONE_OVER_DK = "1/dk"
ONE_OVER_DK_SQUARED = "1/(dk)^2"

KINDS = (XAVIER_GAUSSIAN, XAVIER_UNIFORM, NEAR_IDENTITY, SCALAR_NEAR_ONE, PLUS_MINUS_ONE, EXPLICIT)
SCALAR_KINDS = (XAVIER_GAUSSIAN, XAVIER_UNIFORM, SCALAR_NEAR_ONE, PLUS_MINUS_ONE, EXPLICIT)
MATRIX_KINDS = (XAVIER_GAUSSIAN, XAVIER_UNIFORM, NEAR_IDENTITY, EXPLICIT)

SEED_LIMIT = 2**64


class IncompatibleScheme(ValueError):
    pass


@dataclass(frozen=True)
class InitScheme:
    kind: str
    variance_rule: str = ONE_OVER_DK
    radius_exponent: float = 1.0
    values: Optional[tuple] = None
    seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown init scheme {self.kind!r}; expected one of {KINDS}")
        if self.variance_rule not in (ONE_OVER_DK, ONE_OVER_DK_SQUARED):
            raise ValueError(f"unknown variance rule {self.variance_rule!r}")
        if not self.radius_exponent > 0:
            raise ValueError("radius_exponent must be positive")
        if not 0 <= int(self.seed) < SEED_LIMIT:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if int(self.trial_index) < 0:
            raise ValueError("trial_index must be non-negative")
        if self.kind == EXPLICIT:
            if self.values is None:
                raise ValueError("explicit scheme needs values")
            object.__setattr__(self, "values", _freeze(self.values))

    @property
    def scheme_id(self) -> str:
        if self.kind == NEAR_IDENTITY:
            return "near_identity_dk" if self.variance_rule == ONE_OVER_DK else "near_identity_dk2"
        return self.kind

    def for_trial(self, seed: int, trial_index: int) -> "InitScheme":
        return replace(self, seed=int(seed), trial_index=int(trial_index))

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == NEAR_IDENTITY:
            out["variance_rule"] = self.variance_rule
        if self.kind == SCALAR_NEAR_ONE:
            out["radius_exponent"] = self.radius_exponent
        if self.kind == EXPLICIT:
            out["values"] = _thaw(self.values)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "InitScheme":
        data = dict(data)
        if "values" in data and data["values"] is not None:
            data["values"] = _freeze(data["values"])
        return cls(**data)


def _freeze(values):
    if isinstance(values, (list, tuple, np.ndarray)):
        return tuple(_freeze(v) for v in values)
    return float(values)


def _thaw(values):
    if isinstance(values, tuple):
        return [_thaw(v) for v in values]
    return values


def stream(seed: int, trial_index: int) -> np.random.Generator:
    """The documented (seed, trial_index) -> generator mapping."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_entries(kind: str, rng: np.random.Generator, shape, *, d: int = 1, k: int = 1,
                   variance_rule: str = ONE_OVER_DK, radius_exponent: float = 1.0) -> np.ndarray:
    """Raw i.i.d. entries for the random schemes (no identity shift)."""
    if kind == XAVIER_GAUSSIAN:
        return rng.standard_normal(shape) * math.sqrt(1.0 / d)
    if kind == XAVIER_UNIFORM:
        half = math.sqrt(3.0 / d)
        return rng.uniform(-half, half, shape)
    if kind == NEAR_IDENTITY:
        var = 1.0 / (d * k) if variance_rule == ONE_OVER_DK else 1.0 / (d * k) ** 2
        return rng.standard_normal(shape) * math.sqrt(var)
    if kind == SCALAR_NEAR_ONE:
        r = float(k) ** (-radius_exponent)
        return rng.uniform(1.0 - r, 1.0 + r, shape)
    if kind == PLUS_MINUS_ONE:
        return rng.integers(0, 2, shape).astype(np.float64) * 2.0 - 1.0
    raise IncompatibleScheme(f"scheme {kind!r} has no random entries")


def draw_scalar_init(scheme: InitScheme, k: int) -> ScalarState:
    if k < 1:
        raise ValueError("k must be >= 1")
    if scheme.kind not in SCALAR_KINDS:
        raise IncompatibleScheme(f"{scheme.scheme_id} is a matrix-only scheme")
    if scheme.kind == EXPLICIT:
        w = np.asarray(scheme.values, dtype=np.float64)
        if w.shape != (k,):
            raise IncompatibleScheme(f"explicit values have shape {w.shape}, expected ({k},)")
        return ScalarState(w)
    rng = stream(scheme.seed, scheme.trial_index)
    return ScalarState(sample_entries(scheme.kind, rng, k, d=1, k=k,
                                      radius_exponent=scheme.radius_exponent))


def draw_matrix_init(scheme: InitScheme, k: int, d: int) -> MatrixState:
    if k < 1 or d < 1:
        raise ValueError("k and d must be >= 1")
    if scheme.kind not in MATRIX_KINDS:
        raise IncompatibleScheme(f"{scheme.scheme_id} is a scalar-only scheme")
    if scheme.kind == EXPLICIT:
        mats = np.asarray(scheme.values, dtype=np.float64)
        if mats.shape != (k, d, d):
            raise IncompatibleScheme(f"explicit values have shape {mats.shape}, expected {(k, d, d)}")
        return MatrixState(mats)
    rng = stream(scheme.seed, scheme.trial_index)
    mats = sample_entries(scheme.kind, rng, (k, d, d), d=d, k=k, variance_rule=scheme.variance_rule)
    if scheme.kind == NEAR_IDENTITY:
        mats = mats + np.eye(d)
    return MatrixState(mats)


# ---------------------------------------------------------------------------
# assumption predicates


@dataclass
class Clause:
    name: str
    measured: float
    constant: float
    passed: bool
    relation: str = "<="


@dataclass
class AssumptionReport:
    which: str
    clauses: list = field(default_factory=list)
    notes: str = "constants are caller-supplied; the source leaves them abstract"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def add(self, name, measured, constant, relation="<="):
        ok = {
            "<=": measured <= constant,
            ">=": measured >= constant,
            "<": measured < constant,
            ">": measured > constant,
            "==": measured == constant,
        }[relation]
        self.clauses.append(Clause(name, float(measured), float(constant), bool(ok), relation))


def distribution_stats(scheme: InitScheme, k: int = 1) -> dict:
    """Mean, variance, E|w| and sup_a P(|w| <= a)/a of a scalar scheme's entries."""
    kind = scheme.kind
    if kind == XAVIER_GAUSSIAN:
        c = math.sqrt(2.0 / math.pi)
        return {"mean": 0.0, "variance": 1.0, "abs_mean": c, "small_ball": c}
    if kind == XAVIER_UNIFORM:
        return {"mean": 0.0, "variance": 1.0, "abs_mean": math.sqrt(3.0) / 2.0,
                "small_ball": 1.0 / math.sqrt(3.0)}
    if kind == PLUS_MINUS_ONE:
        return {"mean": 0.0, "variance": 1.0, "abs_mean": 1.0, "small_ball": 1.0}
    if kind == SCALAR_NEAR_ONE:
        r = float(k) ** (-scheme.radius_exponent)
        abs_mean = 1.0 if r <= 1.0 else (1.0 + r * r) / (2.0 * r)
        small_ball = 1.0 / (1.0 + r) if r < 1.0 else 1.0 / (2.0 * r)
        return {"mean": 1.0, "variance": r * r / 3.0, "abs_mean": abs_mean, "small_ball": small_ball}
    if kind == EXPLICIT:
        v = np.asarray(scheme.values, dtype=np.float64).ravel()
        a = np.sort(np.abs(v))
        with np.errstate(divide="ignore"):
            ratios = (np.arange(1, a.size + 1) / a.size) / a
        return {"mean": float(v.mean()), "variance": float(v.var()),
                "abs_mean": float(a.mean()), "small_ball": float(ratios.max())}
    raise IncompatibleScheme(f"{scheme.scheme_id} has no scalar entry distribution")


def check_assumption(which: str, *, scheme: Optional[InitScheme] = None, state=None,
                     y: Optional[float] = None, c1: float = 1.0, c2: Optional[float] = None,
                     c3: Optional[float] = None, c4: float = 1.0,
                     pair_product_bound: float = math.e) -> AssumptionReport:
    """Evaluate the initialization assumptions clause by clause.

    ``A2``: i.i.d. zero-mean unit-variance entries with P(|w| <= a) <= c1 a and
    E|w| <= 1 - c2 (defaults c1 = 1, c2 = 0.1).

    ``A3``: max_j |w_j - 1| <= k^-c1 and c2 <= prod w <= c3 (defaults c1 = 1,
    c2 = 1/4, c3 = e, which contain every product of a radius 1/k box for k >= 2).

    ``A4``: y < 0, max |w_i| <= c2 (default 2), prod w > y, pairwise gaps of
    |w_j| at least k^-c4, and every product leaving out two coordinates at most
    ``pair_product_bound``.
    """
    report = AssumptionReport(which)
    if which == "A2":
        if scheme is None:
            raise ValueError("A2 needs a scheme")
        stats = distribution_stats(scheme, k=1)
        c2 = 0.1 if c2 is None else c2
        report.add("zero_mean", abs(stats["mean"]), 1e-12)
        report.add("unit_variance", abs(stats["variance"] - 1.0), 1e-12)
        report.add("small_ball", stats["small_ball"], c1)
        report.add("abs_mean", stats["abs_mean"], 1.0 - c2)
        return report

    if state is None:
        raise ValueError(f"{which} needs a state")
    w = np.asarray(state.w if isinstance(state, ScalarState) else state, dtype=np.float64)
    k = w.size
    prod = float(np.prod(w))
    if which == "A3":
        c2 = 0.25 if c2 is None else c2
        c3 = math.e if c3 is None else c3
        report.add("radius", float(np.max(np.abs(w - 1.0))), float(k) ** (-c1))
        report.add("product_lower", prod, c2, ">=")
        report.add("product_upper", prod, c3)
        return report
    if which == "A4":
        if y is None:
            raise ValueError("A4 needs the target y")
        c2 = 2.0 if c2 is None else c2
        report.add("target_negative", y, 0.0, "<")
        report.add("abs_bound", float(np.max(np.abs(w))), c2)
        report.add("product_above_target", prod, y, ">")
        report.add("abs_gap", min_abs_gap(w), float(k) ** (-c4), ">=")
        report.add("pair_products", max_pair_product(w), pair_product_bound)
        return report
    raise ValueError(f"unknown assumption {which!r}")


def min_abs_gap(w) -> float:
    a = np.sort(np.abs(np.asarray(w, dtype=np.float64)))
    if a.size < 2:
        return math.inf
    return float(np.min(np.diff(a)))


def max_pair_product(w) -> float:
    """max over j != j' of |prod_{i not in {j, j'}} w_i|."""
    w = np.asarray(w, dtype=np.float64)
    k = w.size
    best = 0.0
    for j in range(k):
        for jj in range(j + 1, k):
            mask = np.ones(k, dtype=bool)
            mask[[j, jj]] = False
            best = max(best, abs(float(np.prod(w[mask]))))
    return best
