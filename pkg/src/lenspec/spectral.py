"""Joint spectral quantities and explicit rigidity-bound evaluators.

The joint spectral radius of a finite matrix set and the joint translation
length of a finite subset of the group are both bracketed by the standard
norm/spectral-radius sandwich (the upper side is subadditive, the lower side
is exact on powers).  The closed-form bound evaluators take their constants
as plain numbers and echo the inputs in the report, so every bound is
reproducible from its JSON alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, PreconditionViolated
from .census import ElementCensus
from .matrices import MatrixSet, Representation, operator_norm, singular_values_2x2, spectral_radius
from .metrics import MetricHandle, translation_length_bracket
from .words import CyclicWord, Word, format_word, multiply

__all__ = [
    "SandwichEstimate",
    "BoundReport",
    "jsr_estimate",
    "bochi_bound",
    "default_bochi_constants",
    "joint_translation_length",
    "rigidity_bound_anosov",
    "rigidity_bound_hyperbolic",
    "geometry_bounds",
    "pinched_rigidity_constants",
    "domination_profile",
    "DEFAULT_BF_CONSTANT",
]

# The Breuillard-Fujiwara comparison constant is universal but no explicit
# value is published; this default is a documented placeholder, overridable
# wherever it enters a formula.
DEFAULT_BF_CONSTANT = 38.0


@dataclass(frozen=True)
class SandwichEstimate:
    """Two-sided estimate with the product depth that produced it."""

    lower: float
    upper: float
    depth: int

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise PreconditionViolated(
                f"sandwich lower {self.lower} exceeds upper {self.upper}")

    def contains(self, value: float, slack: float = 1e-9) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def overlaps(self, lo: float, hi: float, slack: float = 1e-9) -> bool:
        return self.lower - slack <= hi and lo <= self.upper + slack


@dataclass(frozen=True)
class BoundReport:
    formula: str
    inputs: dict
    value: float
    derived: dict = field(default_factory=dict)
    notes: str = ""

    def to_dict(self) -> dict:
        return {"formula": self.formula, "inputs": self.inputs, "value": self.value,
                "derived": self.derived, "notes": self.notes}


def _product_levels(matrices: Sequence[np.ndarray], depth: int, budget: int):
    """Yield (level, list of level-fold products); full tree, budget-capped."""
    level = [np.eye(matrices[0].shape[0])]
    total = 0
    for n in range(1, depth + 1):
        nxt = []
        for a in level:
            for b in matrices:
                nxt.append(a @ b)
        total += len(nxt)
        if total > budget:
            raise BudgetExceeded("matrix product enumeration exceeded the budget",
                                 used=total, budget=budget)
        level = nxt
        yield n, level


def jsr_estimate(mset: MatrixSet, depth: int, budget: int = 2_000_000) -> SandwichEstimate:
    """Norm/spectral-radius sandwich for the joint spectral radius.

    upper = min_n (max_{A in S^n} ||A||)^(1/n)   (submultiplicative),
    lower = max_n (max_{A in S^n} lambda_1(A))^(1/n).
    """
    if depth < 1:
        raise PreconditionViolated("sandwich depth must be >= 1")
    upper = math.inf
    lower = 0.0
    for n, level in _product_levels(list(mset), depth, budget):
        max_norm = max(operator_norm(a) for a in level)
        max_rad = max(spectral_radius(a) for a in level)
        upper = min(upper, max_norm ** (1.0 / n))
        lower = max(lower, max_rad ** (1.0 / n))
    return SandwichEstimate(lower=min(lower, upper), upper=upper, depth=depth)


def default_bochi_constants(m: int) -> tuple[float, int]:
    """(c_m, d_m) defaults: c_m = 8 log 2 + 5 log m, d_m = 2 m^3."""
    return 8.0 * math.log(2.0) + 5.0 * math.log(m), 2 * m ** 3


def bochi_bound(mset: MatrixSet, c_m: float | None = None, d_m: int | None = None,
                budget: int = 300_000, rng=None, samples_per_level: int = 200) -> BoundReport:
    """Spectral-radius upper bound for the joint spectral radius:

        JSR(S) <= exp(c_m) * max_{1 <= j <= d_m} sup_{A in S^j} lambda_1(A)^(1/j).

    Exact enumeration up to the product budget; deeper levels, if any, are
    sampled with the seeded generator and the report is marked a randomized
    lower estimate of the right-hand side.
    """
    m = mset.dimension
    c_default, d_default = default_bochi_constants(m)
    c = c_default if c_m is None else float(c_m)
    d = d_default if d_m is None else int(d_m)
    if d < 1:
        raise PreconditionViolated("d_m must be a positive integer")
    mats = list(mset)
    best = 0.0
    total = 0
    exact_levels = 0
    level = [np.eye(m)]
    for j in range(1, d + 1):
        if total + len(level) * len(mats) > budget:
            break
        nxt = []
        for a in level:
            for b in mats:
                nxt.append(a @ b)
        total += len(nxt)
        level = nxt
        best = max(best, max(spectral_radius(a) for a in level) ** (1.0 / j))
        exact_levels = j
    subsampled = exact_levels < d
    if subsampled:
        if rng is None:
            import numpy.random

            rng = numpy.random.default_rng(numpy.random.Philox(key=0))
        for j in range(exact_levels + 1, d + 1):
            for _ in range(samples_per_level):
                prod = np.eye(m)
                for _ in range(j):
                    prod = prod @ mats[int(rng.integers(0, len(mats)))]
                best = max(best, spectral_radius(prod) ** (1.0 / j))
    value = math.exp(c) * best
    notes = ""
    if subsampled:
        notes = (f"levels > {exact_levels} sampled ({samples_per_level}/level); "
                 "randomized lower estimate of the right-hand side")
    return BoundReport(
        formula="bochi",
        inputs={"c_m": c, "d_m": d, "set_size": len(mats), "dimension": m,
                "exact_levels": exact_levels},
        value=value, derived={"max_scaled_radius": best, "subsampled": subsampled},
        notes=notes)


def joint_translation_length(metric: MetricHandle, gens: Sequence[bytes], depth: int,
                             budget: int = 2_000_000) -> SandwichEstimate:
    """Sandwich for the joint translation length of a finite set S.

    upper = min_n max_{w in S^n} psi(o, w)/n; lower takes the best certified
    translation-length lower bound over all products up to the depth (exact
    cyclic lengths when the metric provides them).
    """
    if depth < 1:
        raise PreconditionViolated("sandwich depth must be >= 1")
    words = [bytes(g) for g in gens]
    if not words:
        raise PreconditionViolated("joint translation length needs a nonempty set")
    upper = math.inf
    lower = 0.0
    level: list[bytes] = [b""]
    total = 0
    for n in range(1, depth + 1):
        nxt = set()
        for u in level:
            for g in words:
                nxt.add(bytes(multiply(u, g)))
        total += len(nxt)
        if total > budget:
            raise BudgetExceeded("product enumeration exceeded the budget",
                                 used=total, budget=budget)
        level = sorted(nxt)
        upper = min(upper, max(metric.distance(w) for w in level) / n)
        for w in level:
            exact = metric.exact_class_length(CyclicWord.of(Word(w)))
            if exact is not None:
                cand = exact / n
            else:
                cand = translation_length_bracket(metric, Word(w), 2).lower / n
            if cand > lower:
                lower = cand
    return SandwichEstimate(lower=min(lower, upper), upper=upper, depth=depth)


def rigidity_bound_anosov(L: float, eta: float, alpha_rg: float, m: int,
                          c_m: float | None = None, d_m: int | None = None) -> BoundReport:
    """Dilation bound for log-norm functions of m-dimensional representations:

        c_m d_m / (L - d_m(alpha+1)) + eta * L / (L - d_m(alpha+1)).
    """
    c_default, d_default = default_bochi_constants(m)
    c = c_default if c_m is None else float(c_m)
    d = d_default if d_m is None else int(d_m)
    gap = L - d * (alpha_rg + 1.0)
    if gap <= 0:
        raise PreconditionViolated(
            f"need L > d_m (alpha + 1) = {d * (alpha_rg + 1.0)}; got L = {L}")
    if eta <= 0:
        raise PreconditionViolated("eta must be positive")
    value = c * d / gap + eta * (L / gap)
    return BoundReport(
        formula="rigidity-anosov",
        inputs={"L": L, "eta": eta, "alpha_rg": alpha_rg, "m": m, "c_m": c, "d_m": d},
        value=value, derived={"gap": gap})


def rigidity_bound_hyperbolic(L: float, eta: float, alpha_rg: float, delta: float,
                              K: float = DEFAULT_BF_CONSTANT) -> BoundReport:
    """Dilation bound for delta-hyperbolic targets:

        2 K delta / (L - 2(alpha+1)) + eta * L / (L - 2(alpha+1)).
    """
    gap = L - 2.0 * (alpha_rg + 1.0)
    if gap <= 0:
        raise PreconditionViolated(
            f"need L > 2(alpha + 1) = {2.0 * (alpha_rg + 1.0)}; got L = {L}")
    value = 2.0 * K * delta / gap + eta * (L / gap)
    return BoundReport(
        formula="rigidity-hyperbolic",
        inputs={"L": L, "eta": eta, "alpha_rg": alpha_rg, "delta": delta, "K": K},
        value=value, derived={"gap": gap})


def geometry_bounds(n: int, simplicial_volume: float, lam: float, Lam: float,
                    i_g: float, C_n: float) -> BoundReport:
    """Coarse constants of a pinched negatively curved closed n-manifold.

    From curvature in [-Lam^2, -lam^2], injectivity radius i_g and simplicial
    volume: volume and diameter bounds, hyperbolicity and rough-geodesic
    constants, and the growth-rate bracket; the normalized delta and alpha
    refer to the metric rescaled to unit growth rate.
    """
    if n < 2 or min(simplicial_volume, lam, Lam, i_g, C_n) <= 0 or Lam < lam:
        raise PreconditionViolated("need n >= 2, positive inputs and Lam >= lam")
    vol_bound = C_n * simplicial_volume * lam ** (-n)
    diam_bound = vol_bound * i_g ** (1 - n)
    delta_raw = math.log(2.0) / lam
    alpha_raw = 2.0 * diam_bound + 1.0
    v_lower = lam / C_n
    v_upper = Lam * (n - 1)
    delta_norm = Lam / lam * (n - 1) * math.log(2.0)
    alpha_norm = Lam * (n - 1) * (2.0 * vol_bound * i_g ** (1 - n) + 1.0)
    return BoundReport(
        formula="geometry-bounds",
        inputs={"n": n, "simplicial_volume": simplicial_volume, "lambda": lam,
                "Lambda": Lam, "i_g": i_g, "C_n": C_n},
        value=delta_norm,
        derived={"vol_bound": vol_bound, "diam_bound": diam_bound,
                 "delta_raw": delta_raw, "alpha_raw": alpha_raw,
                 "v_lower": v_lower, "v_upper": v_upper,
                 "delta": delta_norm, "alpha_rg": alpha_norm})


def pinched_rigidity_constants(n: int, simplicial_volume: float, lam: float, Lam: float,
                               i_g: float, eps0: float, K: float, R: float,
                               C_n: float) -> BoundReport:
    """Constants of the approximate-rigidity statement for pinched manifolds.

    L_hat_star uses the reduced injectivity radius (1 - eps0) i_g with
    exponent 1 - n; L_hat keeps the printed exponent n - 1.  The final C is
    the larger of the lower- and upper-direction constants, and L0 is the
    threshold above which the two-sided comparison closes.
    """
    if not (0.0 < eps0 < 1.0):
        raise PreconditionViolated("eps0 must lie in (0, 1)")
    if min(simplicial_volume, lam, Lam, i_g, C_n, R) <= 0 or K < 0:
        raise PreconditionViolated("inputs must be positive (K nonnegative)")
    if n < 2 or Lam < lam:
        raise PreconditionViolated("need n >= 2 and Lam >= lam")
    base = 2.0 * C_n * simplicial_volume * lam ** (-n)
    l_hat_star = base * ((1.0 - eps0) * i_g) ** (1 - n) + 2.0
    l_hat = base * i_g ** (n - 1) + 2.0
    log2_term = 2.0 * K * math.log(2.0) / lam
    c_lower = 2.0 * (l_hat_star / (1.0 - eps0) + log2_term)
    c_upper = 2.0 * R * (l_hat * (1.0 + eps0) + log2_term)
    c_final = max(c_lower, c_upper)
    p_const = 1.0 / (1.0 - eps0) + 2.0 * (l_hat_star / (1.0 - eps0) + log2_term) / (2.0 * l_hat_star)
    l0 = 2.0 * max(R * l_hat, l_hat_star, (1.0 - eps0) * i_g) + 1.0
    return BoundReport(
        formula="pinched-rigidity-constants",
        inputs={"n": n, "simplicial_volume": simplicial_volume, "lambda": lam,
                "Lambda": Lam, "i_g": i_g, "eps0": eps0, "K": K, "R": R, "C_n": C_n},
        value=c_final,
        derived={"L_hat_star": l_hat_star, "L_hat": l_hat, "C_lower": c_lower,
                 "C_upper": c_upper, "C": c_final, "P": p_const, "L0": l0})


@dataclass(frozen=True)
class DominationReport:
    slope: float
    intercept: float
    min_ratio: float
    dominated: bool
    zero_translation_letters: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "min_ratio": self.min_ratio, "dominated": self.dominated,
                "zero_translation_letters": list(self.zero_translation_letters)}


def domination_profile(rep: Representation, census: ElementCensus) -> DominationReport:
    """Fit of log(sigma_1/sigma_2) against word length over a census.

    A positive slope is evidence (not a certificate) that the top two
    singular values separate exponentially; generators whose spectral radius
    is 1 give zero translation length and are flagged.
    """
    if rep.dimension < 2:
        raise PreconditionViolated("domination profile needs dimension >= 2")
    if census.words is None:
        raise PreconditionViolated("domination profile needs stored words")
    xs = []
    ys = []
    min_ratio = math.inf
    for w in census.words:
        if not w:
            continue
        a = rep.apply(w)
        if rep.dimension == 2:
            s1, s2 = singular_values_2x2(a)
        else:
            svals = np.linalg.svd(a, compute_uv=False)
            s1, s2 = float(svals[0]), float(svals[1])
        if s2 <= 0:
            continue
        ratio = s1 / s2
        min_ratio = min(min_ratio, ratio)
        xs.append(float(len(w)))
        ys.append(math.log(ratio))
    if len(xs) < 2:
        raise PreconditionViolated("domination profile needs at least two elements")
    slope, intercept = np.polyfit(np.array(xs), np.array(ys), 1)
    zero_letters = []
    for letter in range(2 * rep.rank):
        if abs(spectral_radius(rep.letter_image(letter)) - 1.0) < 1e-12:
            zero_letters.append(format_word(bytes([letter])))
    dominated = slope > 0 and min_ratio > 1.0 + 1e-9
    return DominationReport(slope=float(slope), intercept=float(intercept),
                            min_ratio=float(min_ratio), dominated=bool(dominated),
                            zero_translation_letters=tuple(zero_letters))
