"""Free products of cyclic groups: normal forms, Cayley balls, girth.

A group is specified as ``Z`` or ``Zm`` factors joined by ``*``, e.g.
``Z*Z`` (free group of rank 2), ``Z5*Z5``, ``Z2*Z2*Z2``.  Vertices of the
Cayley graph are normal-form words: sequences of (factor, exponent)
syllables with adjacent syllables from distinct factors and exponents
reduced mod the factor order.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

# syllable = (factor index, exponent); a word is a tuple of syllables
Word = tuple[tuple[int, int], ...]

IDENTITY: Word = ()

_FACTOR_RE = re.compile(r"^Z(\d*)$")

_LABELS = "abcdefghijklmnopqrstuvwxyz"


class GroupSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    """Free product of cyclic factors.  order None means infinite (Z)."""

    orders: tuple[int | None, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.orders:
            raise GroupSpecError("need at least one factor")
        for m in self.orders:
            if m is not None and m < 2:
                raise GroupSpecError(f"cyclic order must be >= 2, got {m}")
        if not self.labels:
            object.__setattr__(
                self, "labels", tuple(_LABELS[i % 26] for i in range(len(self.orders)))
            )

    @property
    def degree(self) -> int:
        return sum(1 if m == 2 else 2 for m in self.orders)

    @property
    def is_tree(self) -> bool:
        # Zm with m >= 3 closes an m-cycle; Z and Z2 factors do not.
        return all(m is None or m == 2 for m in self.orders)

    @property
    def known_girth(self) -> int | None:
        """Smallest cyclic order >= 3, or None for trees (infinite girth)."""
        cyc = [m for m in self.orders if m is not None and m >= 3]
        return min(cyc) if cyc else None

    def generators(self) -> list[tuple[int, int]]:
        """Cayley generator moves as (factor, +-1); order-2 factors are involutions."""
        gens = []
        for i, m in enumerate(self.orders):
            gens.append((i, 1))
            if m != 2:
                gens.append((i, -1))
        return gens

    def describe(self) -> str:
        return "*".join("Z" if m is None else f"Z{m}" for m in self.orders)


def parse_group_spec(text: str) -> GroupSpec:
    """Parse a presentation string like ``Z*Z`` or ``Z5*Z5``."""
    parts = text.strip().split("*")
    orders: list[int | None] = []
    for part in parts:
        m = _FACTOR_RE.match(part.strip())
        if m is None:
            raise GroupSpecError(f"malformed factor {part!r} in {text!r}")
        orders.append(int(m.group(1)) if m.group(1) else None)
    return GroupSpec(tuple(orders))


def _reduce_exponent(spec: GroupSpec, factor: int, exp: int) -> int:
    m = spec.orders[factor]
    if m is not None:
        exp %= m
    return exp


def append_syllable(spec: GroupSpec, word: Word, factor: int, exp: int) -> Word:
    """Multiply word by a single syllable, keeping normal form."""
    if not 0 <= factor < len(spec.orders):
        raise IndexError(f"factor index {factor} out of range")
    exp = _reduce_exponent(spec, factor, exp)
    if exp == 0:
        return word
    if word and word[-1][0] == factor:
        merged = _reduce_exponent(spec, factor, word[-1][1] + exp)
        if merged == 0:
            return word[:-1]
        return word[:-1] + ((factor, merged),)
    return word + ((factor, exp),)


def normal_form(spec: GroupSpec, syllables) -> Word:
    """Reduce an arbitrary syllable sequence to the unique normal form."""
    w: Word = IDENTITY
    for factor, exp in syllables:
        w = append_syllable(spec, w, factor, exp)
    return w


def multiply(spec: GroupSpec, a: Word, b: Word) -> Word:
    w = a
    for syl in b:
        w = append_syllable(spec, w, *syl)
    return w


def inverse(spec: GroupSpec, w: Word) -> Word:
    return normal_form(spec, ((f, -e) for f, e in reversed(w)))


def word_length(spec: GroupSpec, w: Word) -> int:
    """Graph distance from the identity to w in the Cayley graph.

    Each syllable contributes its distance inside the factor's cycle/line.
    """
    total = 0
    for factor, exp in w:
        m = spec.orders[factor]
        total += abs(exp) if m is None else min(exp, m - exp)
    return total


def word_str(spec: GroupSpec, w: Word) -> str:
    if not w:
        return "e"
    parts = []
    for factor, exp in w:
        lab = spec.labels[factor]
        parts.append(lab if exp == 1 else f"{lab}^{exp}")
    return ".".join(parts)


class BallCapExceeded(RuntimeError):
    pass


@dataclass
class Ball:
    """Rooted radius-R piece of the Cayley graph, BFS-complete.

    Vertex 0 is the root (identity).  ``adj`` holds neighbor lists inside
    the ball; vertices at distance < R always have full degree d, boundary
    vertices may not.  Arcs index each undirected edge as two directed
    arcs for non-backtracking walks.
    """

    spec: GroupSpec
    radius: int
    words: list[Word]
    index: dict[Word, int]
    dist: list[int]
    adj: list[list[int]]
    girth_found: int | None  # shortest cycle through root seen, None if acyclic so far
    arc_head: list[int] = field(default_factory=list, repr=False)
    arc_tail: list[int] = field(default_factory=list, repr=False)
    arc_rev: list[int] = field(default_factory=list, repr=False)
    out_arcs: list[list[int]] = field(default_factory=list, repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.words)

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def sphere_sizes(self) -> list[int]:
        sizes = [0] * (self.radius + 1)
        for r in self.dist:
            sizes[r] += 1
        return sizes

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u, nbrs in enumerate(self.adj):
            for v in nbrs:
                if u < v:
                    out.append((u, v))
        return out

    def girth_status(self) -> str:
        if self.girth_found is not None:
            return f"girth={self.girth_found}"
        return f"girth>{2 * self.radius}"

    def build_arcs(self) -> None:
        """Populate the directed-edge index (idempotent)."""
        if self.arc_head:
            return
        arc_id: dict[tuple[int, int], int] = {}
        for u, v in self.edges():
            for a, b in ((u, v), (v, u)):
                arc_id[(a, b)] = len(self.arc_tail)
                self.arc_tail.append(a)
                self.arc_head.append(b)
        self.arc_rev = [arc_id[(h, t)] for t, h in zip(self.arc_tail, self.arc_head)]
        self.out_arcs = [[] for _ in range(self.n_vertices)]
        for i, t in enumerate(self.arc_tail):
            self.out_arcs[t].append(i)

    def export_edge_list(self) -> str:
        lines = [
            f"# R={self.radius} d={self.spec.degree} {self.girth_status()} "
            f"vertices={self.n_vertices}"
        ]
        lines.extend(f"{u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"


DEFAULT_VERTEX_CAP = 5_000_000


def ball(spec: GroupSpec, radius: int, vertex_cap: int = DEFAULT_VERTEX_CAP) -> Ball:
    """BFS ball of given radius around the identity."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    gens = spec.generators()
    words: list[Word] = [IDENTITY]
    index: dict[Word, int] = {IDENTITY: 0}
    dist = [0]
    adj: list[list[int]] = [[]]
    girth_found: int | None = None
    queue = deque([0])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du == radius:
            continue
        wu = words[u]
        for factor, exp in gens:
            wv = append_syllable(spec, wu, factor, exp)
            v = index.get(wv)
            if v is None:
                if len(words) >= vertex_cap:
                    raise BallCapExceeded(
                        f"ball exceeds vertex cap {vertex_cap} at radius {radius}"
                    )
                v = len(words)
                index[wv] = v
                words.append(wv)
                dist.append(du + 1)
                adj.append([])
                queue.append(v)
                adj[u].append(v)
                adj[v].append(u)
            elif v not in adj[u]:
                # non-tree edge: closes a cycle through the root of length
                # dist(u) + dist(v) + 1
                adj[u].append(v)
                adj[v].append(u)
                cyc = du + dist[v] + 1
                if girth_found is None or cyc < girth_found:
                    girth_found = cyc
    return Ball(
        spec=spec,
        radius=radius,
        words=words,
        index=index,
        dist=dist,
        adj=adj,
        girth_found=girth_found,
    )


@dataclass(frozen=True)
class GirthReport:
    girth: int | None  # exact girth, or None when only a bound is certified
    lower_bound: int  # girth > lower_bound when girth is None

    def __str__(self) -> str:
        return str(self.girth) if self.girth is not None else f">{self.lower_bound}"


def girth(spec: GroupSpec, r_max: int, vertex_cap: int = DEFAULT_VERTEX_CAP) -> GirthReport:
    """Exact girth if a cycle closes within radius r_max, else a certified bound.

    The graph is vertex-transitive, so the shortest cycle may be assumed to
    pass through the root; BFS to radius r_max sees every such cycle of
    length <= 2*r_max + 1.
    """
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    b = ball(spec, r_max, vertex_cap=vertex_cap)
    if b.girth_found is not None:
        return GirthReport(girth=b.girth_found, lower_bound=b.girth_found - 1)
    return GirthReport(girth=None, lower_bound=2 * r_max)


def tree_vertex_count(d: int, radius: int) -> int:
    """Vertices in the radius-R ball of the d-regular tree, d >= 3."""
    if radius == 0:
        return 1
    return 1 + d * ((d - 1) ** radius - 1) // (d - 2)


def tree_sphere_size(d: int, r: int) -> int:
    return 1 if r == 0 else d * (d - 1) ** (r - 1)
