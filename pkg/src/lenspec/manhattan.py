"""Manhattan-curve sampling and the invariants derived from it.

The curve theta(a) of a metric pair is the abscissa of convergence (in b) of
the two-parameter series sum exp(-a d*(o,x) - b d(o,x)).  Truncation cannot
probe divergence directly, so theta is estimated as the growth rate in T of
the annulus-weighted sums W_a(T) = sum_{T-1 < d <= T} exp(-a d*(o,x)); this
slope statistic is unbiased under pure exponential growth.  The derived
report carries the growth-gap invariant (``beta``), the tangency parameter
``xi`` where the normalized curve has slope -1, their symmetric combination
``alpha_sym``, and census dilations with the bound checks they feed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCensus, GridTooCoarse, InsufficientAnnuli, PreconditionViolated
from .census import ConjCensus, ElementCensus, TauEstimate, intersection_number
from .metrics import LengthBracket, MetricHandle, translation_length_bracket
from .words import CyclicWord, Word, format_word

__all__ = [
    "CurveSamples",
    "BetaReport",
    "DilationEstimate",
    "sample_theta",
    "beta",
    "dilation",
    "check_bounds",
    "tau_bracket_check",
]


@dataclass
class CurveSamples:
    """Sampled Manhattan curve on an increasing grid of a-values."""

    a_grid: np.ndarray
    theta: np.ndarray
    stderr: np.ndarray
    v_d: float
    v_star: float
    window: tuple[int, int]

    def __post_init__(self):
        self.a_grid = np.asarray(self.a_grid, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if self.a_grid.ndim != 1 or np.any(np.diff(self.a_grid) <= 0):
            raise PreconditionViolated("curve grid must be strictly increasing")

    def __len__(self):
        return int(self.a_grid.shape[0])

    def convexity_defects(self) -> np.ndarray:
        """theta(mid) minus the chord over consecutive equally spaced triples.

        Positive entries violate midpoint convexity (up to noise).
        """
        th = self.theta
        return th[1:-1] - 0.5 * (th[:-2] + th[2:])

    def max_convexity_defect(self) -> tuple[float, float]:
        """(worst defect, stderr allowance at the worst triple)."""
        defects = self.convexity_defects()
        if defects.size == 0:
            return 0.0, 0.0
        i = int(np.argmax(defects))
        allowance = float(max(self.stderr[i], self.stderr[i + 1], self.stderr[i + 2]))
        return float(defects[i]), allowance

    def monotone_decreasing(self, slack: float = 1e-9) -> bool:
        return bool(np.all(np.diff(self.theta) <= slack + 2 * (self.stderr[1:] + self.stderr[:-1])))

    def endpoint_slopes(self) -> tuple[float, float]:
        """One-sided difference quotients at the two grid ends."""
        a, th = self.a_grid, self.theta
        left = (th[1] - th[0]) / (a[1] - a[0])
        right = (th[-1] - th[-2]) / (a[-1] - a[-2])
        return float(left), float(right)


def sample_theta(census: ElementCensus, a_grid, window: int = 6,
                 v_d: float | None = None, v_star: float | None = None) -> CurveSamples:
    """Estimate theta on a grid from a joint element census.

    For each a, theta(a) is the least-squares slope of log W_a(t) against t
    over the top ``window`` annuli of the base metric, with the OLS slope
    standard error recorded per grid point.  ``v_d`` defaults to the annulus
    growth rate of the census; ``v_star`` defaults to the top of the grid,
    which callers should place at the star metric's measured growth rate.
    """
    if census.d_star is None:
        raise PreconditionViolated("curve sampling needs a joint census")
    a_grid = np.asarray(a_grid, dtype=float)
    buckets = census.annulus_index()
    top = int(math.floor(census.radius))
    t_lo = top - window + 1
    if t_lo < 1:
        raise InsufficientAnnuli(
            f"census radius {census.radius} gives fewer than {window} annuli")
    if window < 3:
        raise InsufficientAnnuli("curve regression needs a window of >= 3 annuli")
    sel = (buckets >= t_lo) & (buckets <= top)
    b = buckets[sel] - t_lo
    dstar = census.d_star[sel]
    ts = np.arange(t_lo, top + 1, dtype=float)
    n_t = ts.shape[0]
    theta = np.empty(a_grid.shape[0])
    stderr = np.empty(a_grid.shape[0])
    x = ts - ts.mean()
    sxx = float((x * x).sum())
    for i, a in enumerate(a_grid):
        w = np.exp(-a * dstar)
        sums = np.bincount(b, weights=w, minlength=n_t)
        if np.any(sums <= 0):
            raise InsufficientAnnuli(f"empty annulus in the window at a={a}")
        y = np.log(sums)
        slope = float((x * (y - y.mean())).sum() / sxx)
        resid = y - (y.mean() + slope * x)
        dof = max(1, n_t - 2)
        stderr[i] = math.sqrt(float((resid * resid).sum()) / dof / sxx)
        theta[i] = slope
    if v_d is None:
        v_d = _annulus_rate(census.d, top)
    if v_star is None:
        v_star = float(a_grid[-1])
    return CurveSamples(a_grid=a_grid, theta=theta, stderr=stderr,
                        v_d=v_d, v_star=v_star, window=(t_lo, top))


def _annulus_rate(vals: np.ndarray, top: int, window: int = 4) -> float:
    counts = np.bincount(np.ceil(vals - 1e-9).astype(np.int64), minlength=top + 1)
    ratios = []
    for t in range(max(2, top - window + 1), top + 1):
        if counts[t] > 0 and counts[t - 1] > 0:
            ratios.append(math.log(counts[t] / counts[t - 1]))
    if not ratios:
        return 0.0
    return sum(ratios) / len(ratios)


@dataclass
class DilationEstimate:
    """Census suprema of length ratios; certified lower bounds of the sup."""

    value: float
    upper_hint: float
    witness: str

    def interval(self) -> tuple[float, float]:
        return (self.value, self.upper_hint)


@dataclass
class BetaReport:
    """Growth-gap invariant of a metric pair with its companions.

    All quantities are computed on the growth-normalized pair, so ``beta_bar``
    is the vertical gap between the normalized curve and the chord 1 - t,
    ``xi`` the tangency abscissa, and ``alpha_sym = xi + theta(xi)``; ``beta``
    is ``v_d * beta_bar``.
    """

    beta: float
    beta_bar: float
    xi: float
    alpha_sym: float
    v_d: float
    v_star: float
    roughly_similar: bool
    dil_ab: DilationEstimate | None = None
    dil_ba: DilationEstimate | None = None

    @property
    def delta_thurston(self) -> float | None:
        if self.dil_ab is None or self.dil_ba is None:
            return None
        prod = self.dil_ab.value * self.dil_ba.value
        return math.log(prod) if prod > 0 else None

    @property
    def tanh_bound(self) -> float | None:
        d = self.delta_thurston
        return None if d is None else math.tanh(max(0.0, d) / 4.0)

    def to_dict(self) -> dict:
        out = {
            "beta": self.beta,
            "beta_bar": self.beta_bar,
            "xi": self.xi,
            "alpha_sym": self.alpha_sym,
            "v_d": self.v_d,
            "v_star": self.v_star,
            "roughly_similar": self.roughly_similar,
        }
        if self.dil_ab is not None:
            out["dil_ab"] = {"value": self.dil_ab.value, "upper_hint": self.dil_ab.upper_hint,
                             "witness": self.dil_ab.witness}
            out["dil_ba"] = {"value": self.dil_ba.value, "upper_hint": self.dil_ba.upper_hint,
                             "witness": self.dil_ba.witness}
            out["delta_thurston"] = self.delta_thurston
            out["tanh_bound"] = self.tanh_bound
        return out


def beta(curve: CurveSamples, similar_tol: float = 0.01,
         boundary_slope_tol: float = 0.05) -> BetaReport:
    """Evaluate the growth gap sup_t (v_d - (v_d/v_star) t - theta(t)).

    Both metrics are rescaled to unit growth rate first; the supremum over
    the normalized grid is refined by a parabolic fit through the argmax
    triple (the grid interpolant is piecewise linear, so its own maximum
    sits at a node).
    """
    v_d, v_star = curve.v_d, curve.v_star
    if v_d <= 0 or v_star <= 0:
        raise PreconditionViolated("growth rates must be positive")
    t_grid = curve.a_grid / v_star
    if t_grid[0] > 1e-9 or t_grid[-1] < 1.0 - 1e-6:
        raise PreconditionViolated("curve grid must cover [0, v_star]")
    theta_hat = curve.theta / v_d
    gap = 1.0 - t_grid - theta_hat
    i = int(np.argmax(gap))
    if i in (0, len(gap) - 1):
        lo = max(0, i - 1)
        hi = min(len(gap) - 1, i + 1)
        slope = (gap[hi] - gap[lo]) / (t_grid[hi] - t_grid[lo])
        if abs(slope) > boundary_slope_tol and gap[i] > similar_tol:
            raise GridTooCoarse(
                f"gap argmax at grid boundary t={t_grid[i]:.3f} with slope {slope:.3f}")
        xi, beta_bar = float(t_grid[i]), float(gap[i])
    else:
        xi, beta_bar = _parabolic_peak(t_grid[i - 1:i + 2], gap[i - 1:i + 2])
    beta_bar = max(0.0, beta_bar)
    alpha_sym = 1.0 - beta_bar  # xi + theta_hat(xi) along the refined peak
    return BetaReport(
        beta=v_d * beta_bar, beta_bar=beta_bar, xi=xi, alpha_sym=alpha_sym,
        v_d=v_d, v_star=v_star, roughly_similar=beta_bar <= similar_tol)


def _parabolic_peak(xs, ys) -> tuple[float, float]:
    x0, x1, x2 = (float(v) for v in xs)
    y0, y1, y2 = (float(v) for v in ys)
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a >= -1e-15:  # flat or concave-up triple: keep the grid argmax
        return x1, y1
    xv = -b / (2 * a)
    if not (x0 <= xv <= x2):
        return x1, y1
    c = y1 - (a * x1 * x1 + b * x1)
    return xv, a * xv * xv + b * xv + c


def dilation(census: ConjCensus, refine: tuple[MetricHandle, MetricHandle] | None = None,
             refine_top: int = 12, refine_depth: int = 32,
             max_refine_length: int = 3) -> tuple[DilationEstimate, DilationEstimate]:
    """Census suprema of ell_d/ell_d* and ell_d*/ell_d over enumerated classes.

    Bracket endpoints are combined conservatively: the reported value uses
    numerator-lower over denominator-upper (a certified lower bound for the
    true supremum), the hint the reverse.  With ``refine`` handles, the top
    short classes get a deeper power bracket, which tightens the certified
    values without ever overstating them.
    """
    if census.star_lo is None:
        raise PreconditionViolated("dilation needs a joint conjugacy census")
    if len(census) == 0:
        raise EmptyCensus("empty conjugacy census")
    if census.reps is None:
        raise PreconditionViolated("dilation needs class representatives")
    ell_lo, ell_hi = census.ell_lo, census.ell_hi
    star_lo, star_hi = census.star_lo, census.star_hi

    def supremum(num_lo, num_hi, den_lo, den_hi):
        with np.errstate(divide="ignore", invalid="ignore"):
            low = np.where(den_hi > 0, num_lo / den_hi, 0.0)
            hint = np.where(den_lo > 0, num_hi / den_lo, np.inf)
        i = int(np.argmax(low))
        finite = hint[np.isfinite(hint)]
        top_hint = float(finite.max()) if finite.size else math.inf
        return float(low[i]), top_hint, i

    ab_val, ab_hint, i_ab = supremum(ell_lo, ell_hi, star_lo, star_hi)
    ba_val, ba_hint, i_ba = supremum(star_lo, star_hi, ell_lo, ell_hi)
    wit_ab = format_word(census.reps[i_ab])
    wit_ba = format_word(census.reps[i_ba])
    if refine is not None:
        base_metric, star_metric = refine
        order = np.argsort(-np.where(census.ell_lo > 0,
                                     census.star_hi / np.maximum(census.ell_lo, 1e-12), 0.0))
        refined = 0
        for idx in order:
            if refined >= refine_top:
                break
            rep = census.reps[int(idx)]
            if len(rep) > max_refine_length:
                continue
            refined += 1
            b_base = _exact_or_bracket(base_metric, rep, refine_depth)
            b_star = _exact_or_bracket(star_metric, rep, refine_depth)
            if b_star.upper > 0 and b_base.lower / b_star.upper > ab_val:
                ab_val = b_base.lower / b_star.upper
                wit_ab = format_word(rep)
            if b_base.upper > 0 and b_star.lower / b_base.upper > ba_val:
                ba_val = b_star.lower / b_base.upper
                wit_ba = format_word(rep)
    return (DilationEstimate(ab_val, ab_hint, wit_ab),
            DilationEstimate(ba_val, ba_hint, wit_ba))


def _exact_or_bracket(metric: MetricHandle, rep: bytes, depth: int) -> LengthBracket:
    exact = metric.exact_class_length(CyclicWord(rep))
    if exact is not None:
        return LengthBracket(exact, exact, 1)
    return translation_length_bracket(metric, Word(rep), depth)


def check_bounds(report: BetaReport, tol: float = 0.02) -> dict:
    """Bound checks relating the growth gap to census dilations.

    Census dilations underestimate the symmetric Thurston distance, so a
    violated tanh bound is reported as inconclusive rather than failing (the
    bound with the true distance is larger by monotonicity); the companion
    lower bound on alpha_sym is checked the same way.
    """
    out: dict = {"tol": tol}
    d_hat = report.delta_thurston
    if d_hat is None:
        out["status"] = "no-dilations"
        return out
    d_hat = max(0.0, d_hat)
    tanh_bound = math.tanh(d_hat / 4.0)
    alpha_floor = 2.0 / (math.exp(d_hat / 2.0) + 1.0)
    out["delta_thurston_hat"] = d_hat
    out["tanh_bound"] = tanh_bound
    out["beta_bar"] = report.beta_bar
    out["beta_bar_ok"] = report.beta_bar <= tanh_bound + tol
    out["alpha_floor"] = alpha_floor
    out["alpha_sym"] = report.alpha_sym
    out["alpha_ok"] = report.alpha_sym >= alpha_floor - tol
    if not out["beta_bar_ok"] or not out["alpha_ok"]:
        out["status"] = "inconclusive (census dilations underestimate the distance)"
    else:
        out["status"] = "ok"
    return out


def tau_bracket_check(element_census: ElementCensus, conj_census: ConjCensus,
                      eta1: float, eta2: float, c: float = 1.0, p: float = 0.5,
                      slack: float = 0.1) -> dict:
    """Two-sided length comparison implies an intersection-number bracket.

    Verifies eta1*ell - f(ell) <= ell* <= eta2*ell + f(ell) on the conjugacy
    census (f(t) = c t^p) and then checks that the measured intersection
    number lies in [eta1 - slack, eta2 + slack]; the slack absorbs the
    finite-radius bias of the ball average.
    """
    if conj_census.star_hi is None:
        raise PreconditionViolated("bracket check needs a joint conjugacy census")
    ell = conj_census.ell_hi
    star_lo, star_hi = conj_census.star_lo, conj_census.star_hi
    f = c * np.power(np.maximum(ell, 0.0), p)
    comparison_ok = bool(np.all(star_hi <= eta2 * ell + f + 1e-9)
                         and np.all(star_lo >= eta1 * ell - f - 1e-9))
    tau = intersection_number(element_census)
    return {
        "comparison_ok": comparison_ok,
        "tau": tau.value,
        "tau_previous": tau.previous,
        "eta1": eta1,
        "eta2": eta2,
        "bracket_ok": (eta1 - slack) <= tau.value <= (eta2 + slack),
    }
