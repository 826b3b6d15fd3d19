"""Censuses of elements and conjugacy classes, and growth-rate estimation.

A census is columnar: numpy arrays of distance values plus (optionally) the
underlying words, so million-row censuses stay cheap and all curve statistics
are vectorized folds.  For the standard free basis, counting with homology or
subgroup filters has exact transfer-matrix fast paths that never materialize
rows; the enumerative paths cross-check them at small radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    EmptyCensus,
    EmptyFilter,
    PreconditionViolated,
    RequiresExactLengths,
)
from .metrics import (
    LengthBracket,
    MetricHandle,
    PulledBackMetric,
    WordMetric,
    translation_length_bracket,
)
from .subgroups import SubgroupGraph
from .words import CyclicWord, Word, abelianize, cyclic_reduce, inverse, least_rotation, multiply

__all__ = [
    "ElementCensus",
    "ConjCensus",
    "WordPairCensus",
    "GrowthEstimate",
    "GrowthResult",
    "AllFilter",
    "HomologyClassFilter",
    "SubgroupFilter",
    "CommutatorFilter",
    "CorrelationFilter",
    "enumerate_elements",
    "enumerate_conjugacy",
    "enumerate_word_pair",
    "enumerate_pullback_pair",
    "growth_rate",
    "restricted_growth",
    "correlation_census",
    "conjugate_count_bound_check",
    "intersection_number",
    "ball_count_formula",
    "sphere_count_formula",
    "cyclically_reduced_count",
    "conjugacy_count_exact",
    "homology_sphere_counts",
    "subgroup_sphere_counts",
    "iter_reduced_words",
    "iter_canonical_classes",
]


# ---------------------------------------------------------------------------
# census containers


@dataclass
class ElementCensus:
    """All group elements with d(o, x) <= radius, one row per element."""

    radius: float
    rank: int
    metric_name: str
    d: np.ndarray
    star_name: str | None = None
    d_star: np.ndarray | None = None
    words: list[bytes] | None = None

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=np.float64)
        if self.d_star is not None:
            self.d_star = np.asarray(self.d_star, dtype=np.float64)

    def __len__(self):
        return int(self.d.shape[0])

    def counts(self, values: np.ndarray | None = None,
               mask: np.ndarray | None = None) -> list[tuple[int, int]]:
        """Cumulative counting sequence N(t) = #{rows : value <= t}."""
        vals = self.d if values is None else values
        if mask is not None:
            vals = vals[mask]
        top = int(math.floor(self.radius))
        out = []
        for t in range(0, top + 1):
            out.append((t, int(np.count_nonzero(vals <= t + 1e-9))))
        return out

    def annulus_index(self) -> np.ndarray:
        """Annulus bucket per row: smallest integer t with d <= t."""
        return np.ceil(self.d - 1e-9).astype(np.int64)

    def iter_rows(self) -> Iterator[tuple[bytes, float, float | None]]:
        if self.words is None:
            raise PreconditionViolated("census was built without stored words")
        star = self.d_star
        for i, w in enumerate(self.words):
            yield w, float(self.d[i]), (None if star is None else float(star[i]))


@dataclass
class ConjCensus:
    """One row per conjugacy class with translation length <= radius."""

    radius: float
    rank: int
    metric_name: str
    ell_lo: np.ndarray
    ell_hi: np.ndarray
    ell_exact: bool
    star_name: str | None = None
    star_lo: np.ndarray | None = None
    star_hi: np.ndarray | None = None
    star_exact: bool = False
    reps: list[bytes] | None = None

    def __post_init__(self):
        self.ell_lo = np.asarray(self.ell_lo, dtype=np.float64)
        self.ell_hi = np.asarray(self.ell_hi, dtype=np.float64)
        if self.star_lo is not None:
            self.star_lo = np.asarray(self.star_lo, dtype=np.float64)
            self.star_hi = np.asarray(self.star_hi, dtype=np.float64)

    def __len__(self):
        return int(self.ell_lo.shape[0])

    @property
    def ell(self) -> np.ndarray:
        return self.ell_hi

    def straddled(self) -> int:
        """Rows whose length bracket straddles the census radius."""
        return int(np.count_nonzero((self.ell_lo <= self.radius) & (self.ell_hi > self.radius)))

    def counts(self, mask: np.ndarray | None = None) -> list[tuple[int, int]]:
        vals = self.ell_hi if mask is None else self.ell_hi[mask]
        top = int(math.floor(self.radius))
        return [(t, int(np.count_nonzero(vals <= t + 1e-9))) for t in range(0, top + 1)]


@dataclass
class WordPairCensus:
    """Joint data for a pair (standard basis metric, word metric d*).

    ``primary`` lists the d-ball with both values; ``transposed`` lists the
    d*-ball up to the radius where the pruned search is provably complete,
    with the roles of the two metrics swapped.  ``star_table`` maps every
    explored word to its exact d* value (superset of the d-ball).
    """

    primary: ElementCensus
    transposed: ElementCensus
    star_table: dict[bytes, int]
    transposed_radius: int


# ---------------------------------------------------------------------------
# enumeration


def iter_reduced_words(rank: int, max_len: int) -> Iterator[bytes]:
    """All nonempty reduced words of length <= max_len, DFS preorder.

    The order is the canonical letter order applied depth-first, so it is
    reproducible and independent of everything but (rank, max_len).
    """
    two_k = 2 * rank
    word = bytearray()
    pending = [0]
    while pending:
        b = pending[-1]
        if b >= two_k:
            pending.pop()
            if word:
                word.pop()
            if pending:
                pending[-1] += 1
            continue
        if word and b == (word[-1] ^ 1):
            pending[-1] += 1
            continue
        word.append(b)
        yield bytes(word)
        if len(word) < max_len:
            pending.append(0)
        else:
            word.pop()
            pending[-1] += 1


def iter_canonical_classes(rank: int, max_len: int) -> Iterator[bytes]:
    """Canonical representatives of nontrivial conjugacy classes, ell <= max_len.

    Classes of the free group are necklaces of cyclically reduced words; the
    canonical form is the least rotation, so a word represents its class
    exactly when it is cyclically reduced and equal to its own least rotation.
    """
    for w in iter_reduced_words(rank, max_len):
        if w[0] == w[-1] ^ 1:
            continue
        if w[0] != min(w):
            continue
        k = least_rotation(w)
        if w[k:] + w[:k] == w:
            yield w


def _proper_ball(metric: MetricHandle, radius: float, budget: int,
                 lookahead: int = 2) -> list[tuple[bytes, float]]:
    # Scan tree spheres outward until `lookahead` consecutive spheres carry
    # nothing below the radius; a properness probe for non-word handles.
    basis = [bytes([b]) for b in range(2 * metric.rank)]
    rows: list[tuple[bytes, float]] = [(b"", 0.0)]
    frontier = [b""]
    seen = {b""}
    quiet = 0
    while frontier:
        nxt = []
        for u in frontier:
            for g in basis:
                v = bytes(multiply(u, g))
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if len(seen) > budget:
            raise BudgetExceeded("ball scan exceeded the node budget",
                                 used=len(seen), budget=budget)
        hits = [(v, metric.distance(v)) for v in nxt]
        hits = [(v, dv) for v, dv in hits if dv <= radius + 1e-9]
        rows.extend(hits)
        quiet = quiet + 1 if not hits else 0
        if quiet >= lookahead:
            break
        frontier = nxt
    return rows


def enumerate_elements(metric: MetricHandle, radius: float, star: MetricHandle | None = None,
                       store_words: bool = True, budget: int = 30_000_000) -> ElementCensus:
    """Exact census of {x : d(o, x) <= radius} with optional second values."""
    if isinstance(metric, WordMetric) and metric.is_standard:
        t = int(math.floor(radius))
        words: list[bytes] = [b""]
        dvals = [0]
        for w in iter_reduced_words(metric.rank, t):
            words.append(w)
            dvals.append(len(w))
            if len(words) > budget:
                raise BudgetExceeded("census exceeded the node budget",
                                     used=len(words), budget=budget)
        d = np.array(dvals, dtype=np.float64)
    elif isinstance(metric, WordMetric):
        table = metric.ball(int(math.floor(radius)), budget=budget)
        words = list(table.keys())
        d = np.array([table[w] for w in words], dtype=np.float64)
    else:
        rows = _proper_ball(metric, radius, budget)
        words = [w for w, _ in rows]
        d = np.array([dv for _, dv in rows], dtype=np.float64)
    d_star = None
    if star is not None:
        d_star = np.array([star.distance(w) for w in words], dtype=np.float64)
    return ElementCensus(
        radius=float(radius), rank=metric.rank, metric_name=metric.name, d=d,
        star_name=None if star is None else star.name, d_star=d_star,
        words=words if store_words else None)


def corridor_prune_length(radius: int, star_max_gen_len: int) -> int:
    """Reduced-length cutoff that keeps every d*-geodesic to the d-ball.

    For a target x with |x| <= T and d*(o,x) = n, any vertex u on a
    d*-geodesic satisfies |u| <= (|x| + L n)/2 (each step moves at most L
    tree edges, and the path must still reach x).  When the standard basis
    is contained in the generating set of d*, n <= |x| <= T, giving the
    bound (T + L T) / 2.
    """
    return (radius + star_max_gen_len * radius) // 2


def corridor_layer_caps(radius: int, star_max_gen_len: int) -> list[int]:
    """Per-layer length caps for the pair BFS, sharper at deep layers.

    A vertex at layer t of a d*-geodesic to a ball target still needs
    (|u| - T)/L further steps within the remaining T - t, so
    |u| <= T + L (T - t); combined with the flat corridor bound.
    """
    T, L = radius, star_max_gen_len
    flat = corridor_prune_length(T, L)
    return [min(flat, T + L * (T - t)) for t in range(1, T + 1)]


def enumerate_word_pair(metric: WordMetric, star: WordMetric, radius: int,
                        budget: int = 30_000_000) -> WordPairCensus:
    """Joint census for (standard basis, richer word metric) pairs.

    Requires the star generating set to contain the standard basis; then one
    pruned BFS of the star metric yields exact d* on the whole d-ball plus a
    complete d*-ball census up to ``prune // L`` for the transposed curve.
    """
    if not metric.is_standard:
        raise PreconditionViolated("pair census needs the standard basis as base metric")
    if not star.contains_basis:
        raise PreconditionViolated(
            "pair census needs the star generating set to contain the basis")
    T = int(radius)
    L = star.gens.max_length
    prune = corridor_prune_length(T, L)
    table = star.ball(T, budget=budget, layer_caps=corridor_layer_caps(T, L))
    primary_words: list[bytes] = []
    primary_d: list[int] = []
    primary_star: list[int] = []
    t_radius = prune // L
    trans_d: list[int] = []
    trans_star: list[int] = []
    for w, ds in table.items():
        lw = len(w)
        if lw <= T:
            primary_words.append(w)
            primary_d.append(lw)
            primary_star.append(ds)
        if ds <= t_radius:
            trans_d.append(ds)
            trans_star.append(lw)
    primary = ElementCensus(
        radius=float(T), rank=metric.rank, metric_name=metric.name,
        d=np.array(primary_d, dtype=np.float64),
        star_name=star.name, d_star=np.array(primary_star, dtype=np.float64),
        words=primary_words)
    transposed = ElementCensus(
        radius=float(t_radius), rank=metric.rank, metric_name=star.name,
        d=np.array(trans_d, dtype=np.float64),
        star_name=metric.name, d_star=np.array(trans_star, dtype=np.float64),
        words=None)
    return WordPairCensus(primary=primary, transposed=transposed,
                          star_table=table, transposed_radius=t_radius)


def _pullback_image_table(phi) -> list[bytes]:
    return [bytes(phi.apply(bytes([b]))) for b in range(2 * phi.rank)]


def _pullback_subtree(args) -> tuple[list[int], list[int]]:
    rank, max_len, prefix, table = args
    image = bytearray()
    for b in prefix:
        for c in table[b]:
            if image and image[-1] == c ^ 1:
                image.pop()
            else:
                image.append(c)
    d_out: list[int] = []
    star_out: list[int] = []
    base_len = len(prefix)
    if base_len:
        d_out.append(base_len)
        star_out.append(len(image))
    two_k = 2 * rank
    word = bytearray(prefix)
    pending = [0]
    undo: list[tuple[int, bytes]] = []
    while pending:
        b = pending[-1]
        if b >= two_k:
            pending.pop()
            if len(word) > base_len:
                word.pop()
                added, removed = undo.pop()
                del image[len(image) - added:]
                image.extend(removed)
            if pending:
                pending[-1] += 1
            continue
        if word and b == (word[-1] ^ 1):
            pending[-1] += 1
            continue
        word.append(b)
        removed = bytearray()
        added = 0
        for c in table[b]:
            if added == 0 and image and image[-1] == c ^ 1:
                removed.append(image.pop())
            elif added and image[-1] == c ^ 1:
                image.pop()
                added -= 1
            else:
                image.append(c)
                added += 1
        undo.append((added, bytes(reversed(removed))))
        d_out.append(len(word))
        star_out.append(len(image))
        if len(word) < max_len:
            pending.append(0)
        else:
            word.pop()
            added, removed_b = undo.pop()
            del image[len(image) - added:]
            image.extend(removed_b)
            pending[-1] += 1
    return d_out, star_out


def enumerate_pullback_pair(metric: WordMetric, phi, radius: int,
                            workers: int = 1) -> ElementCensus:
    """Joint census for (standard basis, its pullback under an automorphism).

    d*(o, x) = |phi(x)| is maintained incrementally along the DFS, so the
    census costs one table append per letter.  With more than one worker the
    depth-2 subtrees run in parallel; concatenation order is fixed by the
    canonical subtree order, so outputs do not depend on the worker count.
    """
    if not metric.is_standard:
        raise PreconditionViolated("pullback pair census needs the standard basis")
    rank = metric.rank
    T = int(radius)
    table = _pullback_image_table(phi)
    prefixes: list[bytes] = [b""]
    tasks = [(rank, T, p, table) for p in prefixes]
    if T >= 2:
        depth2 = []
        for b0 in range(2 * rank):
            for b1 in range(2 * rank):
                if b1 != b0 ^ 1:
                    depth2.append(bytes([b0, b1]))
        tasks = [(rank, min(T, 1), b"", table)] + [(rank, T, p, table) for p in depth2]
    results: list[tuple[list[int], list[int]]]
    if workers > 1 and len(tasks) > 1:
        import multiprocessing as mp

        try:
            with mp.get_context("fork").Pool(workers) as pool:
                results = pool.map(_pullback_subtree, tasks, chunksize=1)
        except (ImportError, OSError):
            results = [_pullback_subtree(t) for t in tasks]
    else:
        results = [_pullback_subtree(t) for t in tasks]
    d_parts = [np.array([0], dtype=np.float64)]
    star_parts = [np.array([0], dtype=np.float64)]
    for d_out, star_out in results:
        d_parts.append(np.array(d_out, dtype=np.float64))
        star_parts.append(np.array(star_out, dtype=np.float64))
    return ElementCensus(
        radius=float(T), rank=rank, metric_name=metric.name,
        d=np.concatenate(d_parts), star_name=f"pullback({metric.name})",
        d_star=np.concatenate(star_parts), words=None)


def _star_values_for_classes(reps: Sequence[bytes], star: MetricHandle, radius: float,
                             star_table: dict[bytes, int] | None, bracket_n: int,
                             delta: float | None = None):
    """(lo, hi, exact) arrays of star translation lengths for class reps."""
    exact_probe = star.exact_class_length(CyclicWord(reps[0])) if reps else None
    if exact_probe is not None:
        vals = np.empty(len(reps))
        vals[0] = exact_probe
        for i in range(1, len(reps)):
            vals[i] = star.exact_class_length(CyclicWord(reps[i]))
        return vals, vals.copy(), True
    dlt = star.delta if delta is None else delta
    lo = np.zeros(len(reps))
    hi = np.empty(len(reps))
    for i, rep in enumerate(reps):
        if star_table is not None:
            # Powers of a cyclically reduced word are literal repeats, so the
            # joint table answers every power that fits in the explored ball.
            n_fit = max(1, int(radius // max(1, len(rep))))
            dists = [0] + [star_table[rep * n] for n in range(1, n_fit + 1)]
            upper = min(dists[n] / n for n in range(1, n_fit + 1))
            lower = 0.0
            for n in range(1, n_fit // 2 + 1):
                cand = (dists[2 * n] - dists[n] - 2.0 * dlt) / n
                lower = max(lower, cand)
            lo[i] = min(lower, upper)
            hi[i] = upper
        else:
            br = translation_length_bracket(star, Word(rep), bracket_n)
            lo[i] = br.lower
            hi[i] = br.upper
    return lo, hi, False


def enumerate_conjugacy(metric: MetricHandle, radius: float, star: MetricHandle | None = None,
                        star_table: dict[bytes, int] | None = None, bracket_n: int = 4,
                        budget: int = 30_000_000,
                        element_census: ElementCensus | None = None) -> ConjCensus:
    """Census of conjugacy classes with ell_d <= radius.

    Free-basis metrics enumerate necklaces directly with exact lengths; any
    other metric derives classes from an element census (cyclic-reduce and
    deduplicate) and carries length brackets, flagging rows whose bracket
    straddles the radius.
    """
    if isinstance(metric, WordMetric) and metric.is_standard:
        reps = list(iter_canonical_classes(metric.rank, int(math.floor(radius))))
        if len(reps) > budget:
            raise BudgetExceeded("conjugacy census exceeded the node budget",
                                 used=len(reps), budget=budget)
        ell = np.array([len(r) for r in reps], dtype=np.float64)
        lo, hi, exact = (ell, ell, True)
        star_lo = star_hi = None
        star_exact = False
        if star is not None:
            star_lo, star_hi, star_exact = _star_values_for_classes(
                reps, star, radius, star_table, bracket_n)
        return ConjCensus(radius=float(radius), rank=metric.rank, metric_name=metric.name,
                          ell_lo=lo, ell_hi=hi, ell_exact=exact,
                          star_name=None if star is None else star.name,
                          star_lo=star_lo, star_hi=star_hi, star_exact=star_exact,
                          reps=reps)
    census = element_census or enumerate_elements(metric, radius, store_words=True,
                                                  budget=budget)
    if census.words is None:
        raise PreconditionViolated("conjugacy derivation needs stored words")
    seen: dict[bytes, int] = {}
    reps = []
    for w in census.words:
        if not w:
            continue
        core = bytes(CyclicWord.of(Word(w)))
        if core and core not in seen:
            seen[core] = 1
            reps.append(core)
    lo = np.zeros(len(reps))
    hi = np.zeros(len(reps))
    for i, rep in enumerate(reps):
        br = translation_length_bracket(metric, Word(rep), bracket_n)
        lo[i], hi[i] = br.lower, br.upper
    keep = lo <= radius + 1e-9
    reps = [r for r, k in zip(reps, keep) if k]
    lo, hi = lo[keep], hi[keep]
    star_lo = star_hi = None
    star_exact = False
    if star is not None:
        star_lo, star_hi, star_exact = _star_values_for_classes(
            reps, star, radius, star_table, bracket_n)
    return ConjCensus(radius=float(radius), rank=metric.rank, metric_name=metric.name,
                      ell_lo=lo, ell_hi=hi, ell_exact=False,
                      star_name=None if star is None else star.name,
                      star_lo=star_lo, star_hi=star_hi, star_exact=star_exact,
                      reps=reps)


# ---------------------------------------------------------------------------
# growth estimation


@dataclass(frozen=True)
class GrowthEstimate:
    rate: float
    method: str
    window: tuple[int, int]
    residual: float


@dataclass(frozen=True)
class GrowthResult:
    annulus: GrowthEstimate
    fit: GrowthEstimate
    degenerate: bool = False

    @property
    def rate(self) -> float:
        return self.annulus.rate


def growth_rate(counts: Sequence[tuple[float, float]], window: int = 4) -> GrowthResult:
    """Exponential growth rate from a cumulative counting sequence.

    Primary estimate: the log ratio of consecutive annulus counts averaged
    over the top ``window`` radii (its bias is O(1/T), which beats the
    straight fit under sub-exponential corrections).  Also reported: the
    least-squares slope of log N over the same window, with the max residual.
    """
    pts = [(float(t), float(n)) for t, n in counts if n > 0]
    if len(pts) < 3:
        raise PreconditionViolated("growth estimation needs >= 3 positive counts")
    ts = np.array([t for t, _ in pts])
    ns = np.array([n for _, n in pts])
    if np.any(np.diff(ts) <= 0):
        raise PreconditionViolated("counting sequence radii must be strictly increasing")
    t_hi = int(ts[-1])
    annuli = np.diff(ns)
    steps = np.diff(ts)
    degenerate = False
    ratios = []
    for i in range(1, len(annuli)):
        if annuli[i] > 0 and annuli[i - 1] > 0:
            ratios.append(math.log(annuli[i] / annuli[i - 1]) / steps[i])
    ratios = ratios[-window:]
    if not ratios:
        degenerate = True
        rate_annulus = 0.0
    else:
        rate_annulus = max(0.0, sum(ratios) / len(ratios))
    t_lo = int(ts[max(0, len(ts) - 1 - window)])
    sel = ts >= t_lo
    x = ts[sel]
    y = np.log(ns[sel])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.abs(y - (slope * x + intercept)).max())
    if degenerate and np.allclose(ns, ns[0]):
        slope = 0.0
    return GrowthResult(
        annulus=GrowthEstimate(rate_annulus, "annulus-ratio", (t_lo, t_hi),
                               float(np.std(ratios)) if ratios else 0.0),
        fit=GrowthEstimate(max(0.0, float(slope)), "linear-fit", (t_lo, t_hi), residual),
        degenerate=degenerate)


# ---------------------------------------------------------------------------
# filters


@dataclass(frozen=True)
class AllFilter:
    def mask(self, census) -> np.ndarray:
        return np.ones(len(census), dtype=bool)


@dataclass(frozen=True)
class HomologyClassFilter:
    target: tuple[int, ...]

    def mask(self, census: ElementCensus) -> np.ndarray:
        if census.words is None:
            raise PreconditionViolated("homology filter needs stored words")
        tgt = tuple(self.target)
        rank = census.rank
        return np.fromiter((abelianize(w, rank) == tgt for w in census.words),
                           dtype=bool, count=len(census))


@dataclass(frozen=True)
class CommutatorFilter:
    def mask(self, census: ElementCensus) -> np.ndarray:
        return HomologyClassFilter((0,) * census.rank).mask(census)


@dataclass(frozen=True)
class SubgroupFilter:
    graph: SubgroupGraph

    def mask(self, census: ElementCensus) -> np.ndarray:
        if census.words is None:
            raise PreconditionViolated("subgroup filter needs stored words")
        g = self.graph
        return np.fromiter((g.membership(w) for w in census.words),
                           dtype=bool, count=len(census))


@dataclass(frozen=True)
class CorrelationFilter:
    """Tolerance |l - l*| <= c * l**p (p < 1) or equality v*l == v* * l*."""

    mode: str = "tolerance"  # or "equality"
    c: float = 1.0
    p: float = 0.5
    v: float = 1.0
    v_star: float = 1.0

    def __post_init__(self):
        if self.mode not in ("tolerance", "equality"):
            raise PreconditionViolated(f"unknown correlation mode {self.mode!r}")
        if self.mode == "tolerance" and not (self.p < 1.0):
            raise PreconditionViolated("tolerance exponent must satisfy p < 1")

    def mask(self, census: ConjCensus) -> np.ndarray:
        if census.star_lo is None:
            raise PreconditionViolated("correlation filter needs a joint conjugacy census")
        if self.mode == "equality":
            if not (census.ell_exact and census.star_exact):
                raise RequiresExactLengths(
                    "equality-mode correlation needs exact lengths on both metrics")
            lhs = self.v * census.ell_hi
            rhs = self.v_star * census.star_hi
            scale = np.maximum(1.0, np.abs(lhs))
            return np.abs(lhs - rhs) <= 1e-9 * scale
        tol = self.c * np.power(np.maximum(census.ell_hi, 0.0), self.p)
        gap = np.abs(census.ell_hi - census.star_hi)
        return gap <= tol


def restricted_growth(census, flt, window: int = 4) -> GrowthResult:
    """Growth rate of the filtered census rows."""
    mask = flt.mask(census)
    if not mask.any():
        raise EmptyFilter("no census row passes the filter")
    if isinstance(census, ConjCensus):
        counts = census.counts(mask=mask)
    else:
        counts = census.counts(mask=mask)
    return growth_rate([c for c in counts if c[1] > 0], window=window)


def correlation_census(census: ConjCensus, v: float, v_star: float,
                       mode: str = "equality", c: float = 1.0,
                       p: float = 0.5) -> list[tuple[int, int]]:
    """Counting sequence of classes whose two lengths correlate."""
    flt = CorrelationFilter(mode=mode, c=c, p=p, v=v, v_star=v_star)
    mask = flt.mask(census)
    return census.counts(mask=mask)


# ---------------------------------------------------------------------------
# single-class conjugate counting (in-ball orbit enumeration)


def conjugate_count_bound_check(metric: MetricHandle, x: Word, radius: float, C: float,
                                v: float, budget: int = 2_000_000) -> dict:
    """Exhaustively count conjugates of x in the d-ball and test the bound

        log #{y in [x] : d(o,y) <= T}  <=  log(ell + C) + v (T - ell)/2 + C.
    """
    ell = metric.exact_class_length(CyclicWord.of(x))
    if ell is None:
        raise PreconditionViolated("conjugate count check needs an exact length metric")
    core, conj = cyclic_reduce(x)
    if ell > radius:
        return {"count": 0, "log_count": None,
                "bound": math.log(ell + C) + v * (radius - ell) / 2.0 + C,
                "ok": True, "ell": ell}
    u_radius = int(len(conj) + len(core) + max(0.0, (radius - ell)) // 2 + 1)
    seen: set[bytes] = set()
    count = 0
    for u in _ball_words(metric.rank, u_radius, budget):
        y = bytes(multiply(multiply(inverse(Word(u)), x), Word(u)))
        if y not in seen:
            seen.add(y)
            if metric.distance(y) <= radius + 1e-9:
                count += 1
    bound = math.log(ell + C) + v * (radius - ell) / 2.0 + C
    return {"count": count, "log_count": math.log(count) if count else None,
            "bound": bound, "ok": (count == 0) or (math.log(count) <= bound + 1e-9),
            "ell": ell}


def _ball_words(rank: int, radius: int, budget: int) -> Iterator[bytes]:
    yield b""
    n = 0
    for w in iter_reduced_words(rank, radius):
        n += 1
        if n > budget:
            raise BudgetExceeded("conjugator enumeration exceeded the budget",
                                 used=n, budget=budget)
        yield w


# ---------------------------------------------------------------------------
# intersection number


@dataclass(frozen=True)
class TauEstimate:
    value: float
    previous: float
    radius: int


def intersection_number(census: ElementCensus) -> TauEstimate:
    """Ball average of d*(o,x)/T at the top radius (and at T-1 for trend)."""
    if census.d_star is None:
        raise PreconditionViolated("intersection number needs a joint census")
    if len(census) == 0:
        raise EmptyCensus("empty joint census")
    T = int(math.floor(census.radius))
    if T < 2:
        raise EmptyCensus("intersection number needs radius >= 2")

    def avg(t: int) -> float:
        sel = census.d <= t + 1e-9
        if not sel.any():
            raise EmptyCensus(f"no rows with d <= {t}")
        return float(census.d_star[sel].mean() / t)

    return TauEstimate(value=avg(T), previous=avg(T - 1), radius=T)


# ---------------------------------------------------------------------------
# exact counting oracles (standard basis)


def sphere_count_formula(rank: int, t: int) -> int:
    if t == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (t - 1)


def ball_count_formula(rank: int, t: int) -> int:
    return sum(sphere_count_formula(rank, s) for s in range(t + 1))


def _adjacency_power_trace(rank: int, n: int) -> int:
    # Letters-follow matrix: M[b][c] = 1 unless c == b^-1; integer arithmetic.
    k2 = 2 * rank
    m = [[0 if c == b ^ 1 else 1 for c in range(k2)] for b in range(k2)]
    # integer matrix power
    def matmul(a, b):
        return [[sum(a[i][l] * b[l][j] for l in range(k2)) for j in range(k2)]
                for i in range(k2)]
    result = None
    base = m
    e = n
    while e:
        if e & 1:
            result = base if result is None else matmul(result, base)
        base = matmul(base, base)
        e >>= 1
    return sum(result[i][i] for i in range(k2))


def cyclically_reduced_count(rank: int, n: int) -> int:
    """Number of cyclically reduced words of length n (trace formula)."""
    if n == 0:
        return 1
    return _adjacency_power_trace(rank, n)


def conjugacy_count_exact(rank: int, n: int) -> int:
    """Number of conjugacy classes of length exactly n (necklace counting).

    Burnside over the rotation action: rotations with gcd j fix exactly the
    cyclically reduced words of period gcd(j, n).
    """
    if n == 0:
        return 1
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += _euler_phi(n // d) * cyclically_reduced_count(rank, d)
    return total // n


def _euler_phi(n: int) -> int:
    out = n
    p = 2
    m = n
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            out -= out // p
        p += 1
    if m > 1:
        out -= out // m
    return out


def conjugacy_ball_counts(rank: int, top: int) -> list[tuple[int, int]]:
    """Cumulative class counts (identity class excluded)."""
    out = []
    acc = 0
    for t in range(0, top + 1):
        if t >= 1:
            acc += conjugacy_count_exact(rank, t)
        out.append((t, acc))
    return out


# ---------------------------------------------------------------------------
# transfer-matrix counting with filters (standard basis fast paths)


def homology_sphere_counts(rank: int, top: int, target: tuple[int, ...]) -> list[int]:
    """#{x : |x| = t, abelianization(x) == target} for t = 0..top, exact.

    Dynamic program over (last letter, running abelianization); the state
    space is O(rank * top^rank) and everything is integer arithmetic.
    """
    zero = (0,) * rank
    out = [1 if target == zero else 0]
    if top == 0:
        return out
    # state: (last_letter, vector) -> count
    cur: dict[tuple[int, tuple[int, ...]], int] = {}
    for b in range(2 * rank):
        gen, inv = divmod(b, 2)
        vec = list(zero)
        vec[gen] += -1 if inv else 1
        cur[(b, tuple(vec))] = 1
    out.append(sum(c for (b, v), c in cur.items() if v == target))
    for _ in range(2, top + 1):
        nxt: dict[tuple[int, tuple[int, ...]], int] = {}
        for (last, vec), cnt in cur.items():
            for b in range(2 * rank):
                if b == last ^ 1:
                    continue
                gen, inv = divmod(b, 2)
                v2 = list(vec)
                v2[gen] += -1 if inv else 1
                key = (b, tuple(v2))
                nxt[key] = nxt.get(key, 0) + cnt
        cur = nxt
        out.append(sum(c for (b, v), c in cur.items() if v == target))
    return out


def subgroup_sphere_counts(graph: SubgroupGraph, rank: int, top: int) -> list[int]:
    """#{x in H : |x| = t} for t = 0..top via the folded automaton, exact."""
    out = [1]
    if top == 0:
        return out
    cur: dict[tuple[int, int], int] = {}
    for b in range(2 * rank):
        t = graph.trans[0].get(b)
        if t is not None:
            cur[(b, t)] = 1
    out.append(sum(c for (b, s), c in cur.items() if s == 0))
    for _ in range(2, top + 1):
        nxt: dict[tuple[int, int], int] = {}
        for (last, s), cnt in cur.items():
            for b, t in graph.trans[s].items():
                if b == last ^ 1:
                    continue
                key = (b, t)
                nxt[key] = nxt.get(key, 0) + cnt
        cur = nxt
        out.append(sum(c for (b, s), c in cur.items() if s == 0))
    return out


def cumulative(spheres: Sequence[int]) -> list[tuple[int, int]]:
    acc = 0
    out = []
    for t, n in enumerate(spheres):
        acc += n
        out.append((t, acc))
    return out
