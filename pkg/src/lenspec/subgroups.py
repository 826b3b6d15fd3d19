"""Folded subgroup automata for finitely generated subgroups of free groups."""

from __future__ import annotations

from typing import Sequence

from .words import Word, format_word, inverse, parse_word

__all__ = ["SubgroupGraph", "stallings_build", "membership"]


class SubgroupGraph:
    """Folded (deterministic) automaton recognizing a subgroup H < F_k.

    States are integers with base state 0; ``trans[s][letter]`` is the target
    of the unique edge labeled ``letter`` leaving ``s``, if any.  A reduced
    word lies in H exactly when it reads a loop at the base state.
    """

    def __init__(self, generators: Sequence[bytes], rank: int):
        self.rank = rank
        self.generators = tuple(Word(g) for g in generators)
        self.trans = _fold(self.generators)

    @property
    def base(self) -> int:
        return 0

    @property
    def states(self) -> range:
        return range(len(self.trans))

    def walk(self, w: bytes, start: int = 0):
        """Follow ``w`` from ``start``; returns (state, index of first stuck letter).

        The index equals ``len(w)`` when the whole word reads.
        """
        s = start
        for i, b in enumerate(w):
            t = self.trans[s].get(b)
            if t is None:
                return s, i
            s = t
        return s, len(w)

    def membership(self, w: bytes) -> bool:
        s, i = self.walk(w)
        return i == len(w) and s == 0

    def right_coset_key(self, g: bytes) -> tuple[int, bytes]:
        """Complete invariant of the right coset H*g.

        Reading is deterministic, so the maximal readable prefix of g ends in
        a well-defined state; multiplying by h in H on the left prepends a
        loop at the base and leaves (state, unread suffix) unchanged, and
        conversely two words with equal keys differ by a base loop.
        """
        s, i = self.walk(g)
        return s, bytes(g[i:])

    def left_coset_key(self, u: bytes) -> tuple[int, bytes]:
        """Complete invariant of the left coset u*H (u ~ v iff u^-1 v in H)."""
        return self.right_coset_key(inverse(u))

    def __repr__(self):
        gens = ", ".join(format_word(g) for g in self.generators)
        return f"SubgroupGraph(<{gens}>, states={len(self.trans)})"

    @classmethod
    def from_strings(cls, generators: Sequence[str], rank: int) -> "SubgroupGraph":
        return cls([parse_word(s) for s in generators], rank)


def stallings_build(generators: Sequence[bytes], rank: int) -> SubgroupGraph:
    """Wedge one loop per generator at the base state, then fold."""
    return SubgroupGraph(generators, rank)


def membership(graph: SubgroupGraph, w: bytes) -> bool:
    return graph.membership(w)


def _fold(generators: Sequence[bytes]) -> list[dict[int, int]]:
    # Build the wedge of loops, then merge states until deterministic.
    edges: list[tuple[int, int, int]] = []  # (state, letter, state)
    n = 1
    for g in generators:
        if not g:
            continue
        prev = 0
        for i, b in enumerate(g):
            nxt = 0 if i == len(g) - 1 else n
            if nxt != 0:
                n += 1
            edges.append((prev, b, nxt))
            prev = nxt

    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # Each fold merges two states; repeat until no state has two out-edges
    # with the same label.  Edges are kept both ways (letter and inverse).
    changed = True
    while changed:
        changed = False
        seen: dict[tuple[int, int], int] = {}
        for s, b, t in edges:
            for src, letter, dst in ((find(s), b, find(t)), (find(t), b ^ 1, find(s))):
                key = (src, letter)
                other = seen.get(key)
                if other is None:
                    seen[key] = dst
                elif other != dst:
                    parent[find(other)] = find(dst)
                    changed = True
        if changed:
            edges = [(find(s), b, find(t)) for s, b, t in edges]

    # Renumber reachable states deterministically: BFS from the base in
    # letter order.
    adj: dict[int, dict[int, int]] = {}
    for s, b, t in edges:
        adj.setdefault(find(s), {})[b] = find(t)
        adj.setdefault(find(t), {})[b ^ 1] = find(s)
    root = find(0)
    order = {root: 0}
    queue = [root]
    while queue:
        cur = queue.pop(0)
        for letter in sorted(adj.get(cur, ())):
            dst = adj[cur][letter]
            if dst not in order:
                order[dst] = len(order)
                queue.append(dst)
    trans: list[dict[int, int]] = [{} for _ in order]
    for old, new in order.items():
        for letter, dst in adj.get(old, {}).items():
            trans[new][letter] = order[dst]
    return trans
