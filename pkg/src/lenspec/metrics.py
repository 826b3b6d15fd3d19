"""Invariant distance-like functions on a free group, with length estimators.

Every handle evaluates d(o, x) for reduced words x.  Word metrics for the
standard basis are exact by construction (tree distance = word length); other
word metrics run graph searches over the Cayley graph with a node budget.
Hyperbolicity (delta) and rough-geodesity (alpha_rg) constants are carried on
the handle: zero for the free-basis tree, user-supplied otherwise, with
:func:`estimate_delta` as an empirical sanity floor.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BudgetExceeded, NotABasis, PreconditionViolated, ThresholdTooSmall
from .matrices import Representation, operator_norm, smallest_eigenvalue_modulus, spectral_radius
from .subgroups import SubgroupGraph
from .words import (
    CyclicWord,
    Word,
    abelianize,
    format_word,
    inverse,
    multiply,
    parse_word,
    power,
)

__all__ = [
    "GeneratingSet",
    "MetricHandle",
    "WordMetric",
    "PulledBackMetric",
    "CombinationMetric",
    "MatrixLogNormMetric",
    "SymmetrizedMatrixLogNormMetric",
    "ConedOffMetric",
    "LengthBracket",
    "standard_generating_set",
    "distance",
    "translation_length_exact",
    "translation_length_bracket",
    "threshold_generating_set",
    "verify_sandwich",
    "coned_off_distance",
    "estimate_delta",
    "word_ball_distances",
]

DEFAULT_NODE_BUDGET = 30_000_000


class GeneratingSet:
    """Finite set of nontrivial reduced words used as metric generators."""

    def __init__(self, words: Iterable[bytes], rank: int, require_symmetric: bool = True,
                 check_generates: bool = True, budget: int = 200_000):
        dedup = sorted({bytes(w) for w in words})
        if b"" in dedup:
            raise PreconditionViolated("generating set must not contain the identity")
        if not dedup:
            raise PreconditionViolated("generating set must be nonempty")
        self.rank = rank
        self.words = tuple(Word(w) for w in dedup)
        self.max_length = max(len(w) for w in self.words)
        members = set(dedup)
        self.is_symmetric = all(bytes(inverse(w)) in members for w in self.words)
        if require_symmetric and not self.is_symmetric:
            raise PreconditionViolated("generating set is not closed under inverses")
        if check_generates and not self._generates(budget):
            raise PreconditionViolated("set does not generate the group within the probe budget")

    def _generates(self, budget: int) -> bool:
        # Every basis letter must appear in some semigroup ball.
        targets = {bytes([b]) for b in range(2 * self.rank)}
        seen = {b""}
        frontier = [b""]
        while frontier and targets and len(seen) <= budget:
            nxt = []
            for u in frontier:
                for g in self.words:
                    v = bytes(multiply(u, g))
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
                        targets.discard(v)
            frontier = nxt
        return not targets

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __repr__(self):
        shown = ", ".join(format_word(w) for w in self.words[:8])
        more = "" if len(self.words) <= 8 else f", ... ({len(self.words)} total)"
        return f"GeneratingSet({{{shown}{more}}})"

    @classmethod
    def from_strings(cls, texts: Sequence[str], rank: int, **kw) -> "GeneratingSet":
        return cls([parse_word(t) for t in texts], rank, **kw)


def standard_generating_set(rank: int) -> GeneratingSet:
    return GeneratingSet([bytes([b]) for b in range(2 * rank)], rank)


@dataclass(frozen=True)
class LengthBracket:
    """Certified two-sided estimate of a stable translation length."""

    lower: float
    upper: float
    n_used: int

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0 or self.lower > self.upper + 1e-12:
            raise PreconditionViolated(f"invalid bracket [{self.lower}, {self.upper}]")

    def contains(self, value: float, slack: float = 1e-9) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    @property
    def width(self) -> float:
        return self.upper - self.lower


class MetricHandle:
    """Base class: an evaluatable Gamma-invariant distance-like function."""

    symmetric = True
    truncated = False  # True when distances may only be upper bounds

    def __init__(self, rank: int, delta: float = 0.0, alpha_rg: float = 0.0, name: str = ""):
        self.rank = rank
        self.delta = float(delta)
        self.alpha_rg = float(alpha_rg)
        self.name = name or type(self).__name__

    def distance(self, w: bytes) -> float:
        """d(o, w)."""
        raise NotImplementedError

    def pair_distance(self, u: bytes, v: bytes) -> float:
        """d(u, v) = d(o, u^-1 v) by invariance."""
        return self.distance(multiply(inverse(u), v))

    def exact_class_length(self, core: CyclicWord) -> float | None:
        """Exact stable translation length of the class, when available."""
        return None


class WordMetric(MetricHandle):
    """Graph metric of the Cayley graph for a finite generating set.

    The standard basis evaluates in O(1) as reduced word length.  Other sets
    use A* point queries with an admissible heuristic (tree length divided by
    the longest generator, sharpened by abelianized displacement) and layered
    BFS for ball enumeration; distances are memoized on the handle.
    """

    def __init__(self, gens: GeneratingSet, delta: float = 0.0, alpha_rg: float = 0.0,
                 node_budget: int = DEFAULT_NODE_BUDGET, name: str = ""):
        super().__init__(gens.rank, delta, alpha_rg, name or "word")
        self.gens = gens
        self.node_budget = node_budget
        basis = {bytes([b]) for b in range(2 * gens.rank)}
        gen_bytes = {bytes(w) for w in gens.words}
        self.is_standard = gen_bytes == basis
        self.contains_basis = basis <= gen_bytes
        self.symmetric = gens.is_symmetric
        self._memo: dict[bytes, int] = {b"": 0}
        self._gen_abelian = [abelianize(w, gens.rank) for w in gens.words]
        self._coord_step = [
            max(abs(vec[i]) for vec in self._gen_abelian) for i in range(gens.rank)
        ]

    @classmethod
    def standard(cls, rank: int, name: str = "standard") -> "WordMetric":
        return cls(standard_generating_set(rank), 0.0, 0.0, name=name)

    def distance(self, w: bytes) -> float:
        if self.is_standard:
            return float(len(w))
        hit = self._memo.get(bytes(w))
        if hit is not None:
            return float(hit)
        return float(self._astar(bytes(w)))

    def _heuristic(self, r: bytes, ab: Sequence[int]) -> int:
        h = -(-len(r) // self.gens.max_length)
        for i, step in enumerate(self._coord_step):
            if step:
                need = -(-abs(ab[i]) // step)
                if need > h:
                    h = need
        return h

    def _astar(self, target: bytes) -> int:
        # Nodes are the remaining words r = u^-1 * target; left-multiplying by
        # g^-1 realizes the step u -> u*g, so r alone identifies the node.
        gens = [bytes(g) for g in self.gens.words]
        inv_gens = [bytes(inverse(g)) for g in gens]
        rank = self.gens.rank
        start_ab = abelianize(target, rank)
        best: dict[bytes, int] = {target: 0}
        counter = 0
        heap = [(self._heuristic(target, start_ab), 0, counter, target, start_ab)]
        popped = 0
        while heap:
            f, g_cost, _, r, ab = heapq.heappop(heap)
            if g_cost > best.get(r, -1):
                continue
            if not r:
                self._memo[target] = g_cost
                return g_cost
            popped += 1
            if popped > self.node_budget:
                raise BudgetExceeded(
                    f"A* exceeded node budget while measuring {format_word(target)}",
                    used=popped, budget=self.node_budget)
            for gi, ginv in zip(self._gen_abelian, inv_gens):
                r2 = bytes(multiply(ginv, r))
                c2 = g_cost + 1
                old = best.get(r2)
                if old is None or c2 < old:
                    best[r2] = c2
                    ab2 = tuple(a - b for a, b in zip(ab, gi))
                    counter += 1
                    heapq.heappush(heap, (c2 + self._heuristic(r2, ab2), c2, counter, r2, ab2))
        raise PreconditionViolated(f"{format_word(target)} is not generated by the set")

    def ball(self, radius: int, prune_len: int | None = None,
             budget: int | None = None,
             layer_caps: Sequence[int] | None = None) -> dict[bytes, int]:
        """BFS distances for the full ball {x : d(o,x) <= radius}.

        ``prune_len`` (or per-layer ``layer_caps``) drops frontier words
        longer than the given reduced length; the caller is responsible for
        only pruning where geodesics provably stay short (see the joint pair
        enumeration in census).
        """
        out = word_ball_distances(self.gens.words, radius, prune_len,
                                  budget or self.node_budget, layer_caps)
        if prune_len is None and layer_caps is None:
            self._memo.update(out)
        return out

    def exact_class_length(self, core: CyclicWord) -> float | None:
        if self.is_standard:
            return float(len(core))
        return None


def word_ball_distances(gens: Sequence[bytes], radius: int, prune_len: int | None,
                        budget: int, layer_caps: Sequence[int] | None = None) -> dict[bytes, int]:
    """Layered BFS over right multiplication; exact spheres, insertion order.

    ``layer_caps[t-1]`` bounds the reduced length admitted at layer t (on top
    of the flat ``prune_len``); pruning safety is the caller's obligation.
    """
    gen_bytes = [bytes(g) for g in gens]
    dist: dict[bytes, int] = {b"": 0}
    frontier = [b""]
    for t in range(1, radius + 1):
        cap = prune_len
        if layer_caps is not None:
            layer_cap = layer_caps[t - 1]
            cap = layer_cap if cap is None else min(cap, layer_cap)
        nxt = []
        for u in frontier:
            lu = len(u)
            for g in gen_bytes:
                i = lu
                j = 0
                lg = len(g)
                while i > 0 and j < lg and u[i - 1] ^ 1 == g[j]:
                    i -= 1
                    j += 1
                v = u[:i] + g[j:]
                if cap is not None and len(v) > cap:
                    continue
                if v not in dist:
                    dist[v] = t
                    nxt.append(v)
        if len(dist) > budget:
            raise BudgetExceeded("ball enumeration exceeded the node budget",
                                 used=len(dist), budget=budget)
        frontier = nxt
    return dist


class PulledBackMetric(MetricHandle):
    """d^phi(x, y) = d(phi(x), phi(y)) for an automorphism phi."""

    def __init__(self, phi, inner: MetricHandle, name: str = ""):
        super().__init__(inner.rank, inner.delta, inner.alpha_rg, name or f"pullback({inner.name})")
        self.phi = phi
        self.inner = inner
        self.symmetric = inner.symmetric

    def distance(self, w: bytes) -> float:
        return self.inner.distance(self.phi.apply(w))

    def exact_class_length(self, core: CyclicWord) -> float | None:
        return self.inner.exact_class_length(CyclicWord.of(self.phi.apply(core)))


class CombinationMetric(MetricHandle):
    """Nonnegative combination s*d1 + t*d2 (+ ...)."""

    def __init__(self, terms: Sequence[tuple[float, MetricHandle]], name: str = ""):
        if not terms:
            raise PreconditionViolated("combination needs at least one term")
        rank = terms[0][1].rank
        for coef, handle in terms:
            if coef < 0:
                raise PreconditionViolated("combination coefficients must be nonnegative")
            if handle.rank != rank:
                raise PreconditionViolated("combination terms must share one group")
        delta = sum(c * h.delta for c, h in terms)
        alpha = max(h.alpha_rg for _, h in terms)
        super().__init__(rank, delta, alpha, name or "combination")
        self.terms = tuple((float(c), h) for c, h in terms)
        self.symmetric = all(h.symmetric for _, h in terms)

    def distance(self, w: bytes) -> float:
        return sum(c * h.distance(w) for c, h in self.terms)

    def exact_class_length(self, core: CyclicWord) -> float | None:
        parts = [h.exact_class_length(core) for _, h in self.terms]
        if any(p is None for p in parts):
            return None
        return sum(c * p for (c, _), p in zip(self.terms, parts))


class MatrixLogNormMetric(MetricHandle):
    """psi(x, y) = log ||rho(x^-1 y)|| for a matrix representation rho."""

    symmetric = False

    def __init__(self, rep: Representation, delta: float = 0.0, alpha_rg: float = 0.0,
                 name: str = ""):
        super().__init__(rep.rank, delta, alpha_rg, name or "matrix-log-norm")
        self.rep = rep

    def distance(self, w: bytes) -> float:
        return math.log(operator_norm(self.rep.apply(w)))

    def exact_class_length(self, core: CyclicWord) -> float | None:
        # lim log||A^n||/n is the log spectral radius.
        lam = spectral_radius(self.rep.apply(core))
        return math.log(lam) if lam > 0 else None


class SymmetrizedMatrixLogNormMetric(MetricHandle):
    """psi(x,y) + psi(y,x) for the log-norm function of a representation."""

    symmetric = True

    def __init__(self, rep: Representation, delta: float = 0.0, alpha_rg: float = 0.0,
                 name: str = ""):
        super().__init__(rep.rank, delta, alpha_rg, name or "sym-matrix-log-norm")
        self.rep = rep

    def distance(self, w: bytes) -> float:
        a = self.rep.apply(w)
        return math.log(operator_norm(a)) + math.log(operator_norm(self.rep.apply(inverse(w))))

    def exact_class_length(self, core: CyclicWord) -> float | None:
        a = self.rep.apply(core)
        top = spectral_radius(a)
        bottom = smallest_eigenvalue_modulus(a)
        if top <= 0 or bottom <= 0:
            return None
        return math.log(top / bottom)


class ConedOffMetric(MetricHandle):
    """Graph metric of a Cayley graph with a subgroup's cosets coned off.

    Cone vertices sit at distance 1 from every member of their left coset, so
    two elements in one coset are at distance 2.  Distances are computed over
    a truncated universe (base-metric ball of ``universe_radius``) and are
    therefore upper bounds, exact whenever a geodesic stays inside.
    """

    truncated = True

    def __init__(self, gens: GeneratingSet, subgroup: SubgroupGraph, universe_radius: int,
                 delta: float = 0.0, alpha_rg: float = 0.0,
                 node_budget: int = DEFAULT_NODE_BUDGET, name: str = ""):
        super().__init__(gens.rank, delta, alpha_rg, name or "coned-off")
        self.gens = gens
        self.subgroup = subgroup
        self.universe_radius = universe_radius
        self.node_budget = node_budget
        self._dist: dict[bytes, int] | None = None

    def _build(self) -> dict[bytes, int]:
        if self._dist is not None:
            return self._dist
        universe = word_ball_distances(self.gens.words, self.universe_radius, None,
                                       self.node_budget)
        cosets: dict[tuple[int, bytes], list[bytes]] = {}
        for u in universe:
            cosets.setdefault(self.subgroup.left_coset_key(u), []).append(u)
        dist: dict[bytes, int] = {b"": 0}
        cone_dist: dict[tuple[int, bytes], int] = {}
        frontier: list[bytes] = [b""]
        cone_frontier: list[tuple[int, bytes]] = []
        t = 0
        gen_bytes = [bytes(g) for g in self.gens.words]
        while frontier or cone_frontier:
            t += 1
            nxt: list[bytes] = []
            nxt_cones: list[tuple[int, bytes]] = []
            for u in frontier:
                for g in gen_bytes:
                    v = bytes(multiply(u, g))
                    if v in universe and v not in dist:
                        dist[v] = t
                        nxt.append(v)
                key = self.subgroup.left_coset_key(u)
                if key not in cone_dist:
                    cone_dist[key] = t
                    nxt_cones.append(key)
            for key in cone_frontier:
                for v in cosets.get(key, ()):
                    if v not in dist:
                        dist[v] = t
                        nxt.append(v)
            frontier = nxt
            cone_frontier = nxt_cones
        self._dist = dist
        return dist

    def distance(self, w: bytes) -> float:
        table = self._build()
        hit = table.get(bytes(w))
        if hit is None:
            raise BudgetExceeded(
                f"{format_word(w)} lies outside the truncated coned-off universe",
                used=len(table), budget=self.node_budget)
        return float(hit)


def distance(handle: MetricHandle, w: bytes) -> float:
    """d(o, w) for any handle (module-level spelling of the method)."""
    return handle.distance(w)


def translation_length_exact(metric: WordMetric, cls: CyclicWord) -> float:
    """Exact stable translation length for the standard free basis.

    Powers of a cyclically reduced word are reduced, so the subadditive limit
    equals the core length on the nose.
    """
    if not isinstance(metric, WordMetric) or not metric.is_standard:
        raise NotABasis("exact translation lengths need the standard basis word metric")
    return float(len(cls))


def translation_length_bracket(metric: MetricHandle, x: bytes, n_max: int) -> LengthBracket:
    """Certified bracket for the stable translation length of [x].

    Upper bound: subadditivity makes the limit an infimum, so every
    d(o, x^n)/n is an upper bound.  Lower bound: the displacement inequality
    ell >= d(o, g^2) - d(o, g) - 2*delta applied to powers, clamped at zero;
    exact on trees.
    """
    if n_max < 2:
        raise PreconditionViolated("bracket needs n_max >= 2")
    dists = [0.0]
    pw = Word()
    for _ in range(n_max):
        pw = multiply(pw, x)
        dists.append(metric.distance(pw))
    upper = min(dists[n] / n for n in range(1, n_max + 1))
    lower = 0.0
    for n in range(1, n_max // 2 + 1):
        cand = (dists[2 * n] - dists[n] - 2.0 * metric.delta) / n
        if cand > lower:
            lower = cand
    lower = min(lower, upper)
    return LengthBracket(lower, upper, n_max)


def threshold_generating_set(metric: MetricHandle, threshold: float,
                             budget: int = 2_000_000, lookahead: int = 2,
                             require_symmetric: bool = False) -> GeneratingSet:
    """S_n = {x != e : psi(o, x) <= n}, enumerated within a budget.

    Word metrics enumerate the exact ball.  Non-word handles scan tree balls
    of growing radius and stop once ``lookahead`` consecutive spheres stay
    above the threshold (a properness probe, budget-guarded).
    """
    if threshold <= metric.alpha_rg + 1:
        raise ThresholdTooSmall(
            f"threshold {threshold} must exceed alpha_rg + 1 = {metric.alpha_rg + 1}")
    members: list[bytes] = []
    if isinstance(metric, WordMetric):
        ball = metric.ball(int(math.floor(threshold)), budget=budget)
        members = [w for w in ball if w]
    elif isinstance(metric, PulledBackMetric) and isinstance(metric.inner, WordMetric):
        inner_ball = metric.inner.ball(int(math.floor(threshold)), budget=budget)
        members = [bytes(metric.phi.apply_inverse(w)) for w in inner_ball if w]
    else:
        basis = [bytes([b]) for b in range(2 * metric.rank)]
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
                raise BudgetExceeded("threshold enumeration exceeded the node budget",
                                     used=len(seen), budget=budget)
            hits = [v for v in nxt if metric.distance(v) <= threshold]
            members.extend(hits)
            quiet = quiet + 1 if not hits else 0
            if quiet >= lookahead:
                break
            frontier = nxt
    if not members:
        raise ThresholdTooSmall(f"no nontrivial elements below threshold {threshold}")
    return GeneratingSet(members, metric.rank, require_symmetric=require_symmetric,
                         check_generates=False)


def verify_sandwich(metric: MetricHandle, threshold: float, gens: GeneratingSet,
                    xs: Iterable[bytes], threshold_metric: WordMetric | None = None) -> bool:
    """Check (n - a - 1)|x|_{S_n} - (n - 1) <= psi(o, x) <= n |x|_{S_n}."""
    n = threshold
    a = metric.alpha_rg
    wm = threshold_metric or WordMetric(gens, name="threshold")
    for x in xs:
        word_len = wm.distance(x)
        psi = metric.distance(x)
        if not ((n - a - 1) * word_len - (n - 1) <= psi + 1e-9 and psi <= n * word_len + 1e-9):
            return False
    return True


def coned_off_distance(gens: GeneratingSet, subgroup: SubgroupGraph, x: bytes,
                       universe_radius: int, budget: int = DEFAULT_NODE_BUDGET) -> float:
    handle = ConedOffMetric(gens, subgroup, universe_radius, node_budget=budget)
    return handle.distance(x)


def estimate_delta(metric: MetricHandle, sample_size: int, rng, radius: int = 6) -> float:
    """Empirical four-point defect over sampled quadruples (a lower bound).

    Samples x, y, w and checks (x|y)_o >= min((x|w)_o, (y|w)_o) - delta in
    all three pairings; returns the largest observed violation, zero on trees.
    """
    from .words import random_reduced_word

    worst = 0.0
    for _ in range(sample_size):
        pts = []
        for _ in range(3):
            length = int(rng.integers(0, radius + 1))
            pts.append(random_reduced_word(rng, length, metric.rank))
        x, y, w = pts
        do = {p: metric.distance(p) for p in pts}

        def product(u, v):
            return 0.5 * (do[u] + do[v] - metric.pair_distance(u, v))

        pxy, pxw, pyw = product(x, y), product(x, w), product(y, w)
        for lhs, a, b in ((pxy, pxw, pyw), (pxw, pxy, pyw), (pyw, pxy, pxw)):
            defect = min(a, b) - lhs
            if defect > worst:
                worst = defect
    return worst
