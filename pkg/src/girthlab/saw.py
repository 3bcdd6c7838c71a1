"""Self-avoiding walk: exact enumeration, Rosenbluth sampling, generating
functions and the bubble diagram.

Walks live on normal-form words directly (no ball needs to be
materialized: a length-n walk only ever holds n+1 words).  Counts are
exact Python integers.  Everything downstream (connective-constant
bounds, endpoint law, speed, chi, bubble) is derived from the census
where affordable; Rosenbluth sampling covers lengths beyond the
enumeration ceiling and is cross-checked against the census in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import GroupSpec, Word, append_syllable, tree_sphere_size, word_length
from .rng import trial_rng
from .stats import DiagramResult, Estimate, mean_estimate


@dataclass
class SawCensus:
    spec: GroupSpec
    n_max: int
    counts: list[int]  # c_n, exact
    endpoint_counts: list[dict[Word, int]]  # per n: endpoint word -> c_n(x)

    def endpoint_law(self, n: int) -> dict[Word, float]:
        cn = self.counts[n]
        return {x: c / cn for x, c in self.endpoint_counts[n].items()}

    def sup_endpoint_probability(self, n: int) -> float:
        return max(self.endpoint_counts[n].values()) / self.counts[n]

    def mean_endpoint_distance(self, n: int) -> float:
        spec = self.spec
        total = sum(c * word_length(spec, x) for x, c in self.endpoint_counts[n].items())
        return total / self.counts[n]


def _neighbors(spec: GroupSpec, w: Word) -> list[Word]:
    return [append_syllable(spec, w, f, e) for f, e in spec.generators()]


def enumerate_saw(spec: GroupSpec, n_max: int) -> SawCensus:
    """Exact DFS census of self-avoiding walks from the identity."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    counts = [0] * (n_max + 1)
    endpoint_counts: list[dict[Word, int]] = [{} for _ in range(n_max + 1)]
    gens = spec.generators()
    visited: set[Word] = set()

    def dfs(w: Word, depth: int) -> None:
        counts[depth] += 1
        ec = endpoint_counts[depth]
        ec[w] = ec.get(w, 0) + 1
        if depth == n_max:
            return
        visited.add(w)
        for f, e in gens:
            nxt = append_syllable(spec, w, f, e)
            if nxt not in visited:
                dfs(nxt, depth + 1)
        visited.discard(w)

    dfs((), 0)
    return SawCensus(spec, n_max, counts, endpoint_counts)


@dataclass
class MuBounds:
    sequence: list[float]  # c_n^{1/n}, each an upper bound on mu
    best_upper: float
    tree_exact: float | None  # d-1 when the spec is a tree

    @property
    def mu_hat(self) -> float:
        """Committed upper bound on the connective constant."""
        return self.tree_exact if self.tree_exact is not None else self.best_upper


def connective_constant(census: SawCensus) -> MuBounds:
    seq = [census.counts[n] ** (1.0 / n) for n in range(1, census.n_max + 1)]
    tree_exact = float(census.spec.degree - 1) if census.spec.is_tree else None
    return MuBounds(seq, min(seq), tree_exact)


@dataclass
class EndpointDecay:
    sup_probs: list[tuple[int, float]]  # (n, sup_x c_n(x)/c_n)
    fitted_rate: float  # slope of log sup-prob vs n
    bound_base: float  # lambda = (mu_hat^{-1} + eps)(d-1) rho_ub
    bound_constant: float  # max_n sup_prob / lambda^n over the range
    bound_applies: bool  # lambda < 1


def saw_endpoint_law(
    census: SawCensus,
    rho_ub: float | None = None,
    eps: float | None = None,
) -> EndpointDecay:
    """sup_x c_n(x)/c_n across n, with the exponential-envelope comparison.

    eps defaults to half the gap that would push the envelope base to 1.
    """
    d = census.spec.degree
    sup_probs = [(n, census.sup_endpoint_probability(n)) for n in range(1, census.n_max + 1)]
    ns = np.array([n for n, _ in sup_probs], dtype=float)
    ls = np.log([v for _, v in sup_probs])
    rate = float(np.polyfit(ns, ls, 1)[0])
    if rho_ub is None:
        return EndpointDecay(sup_probs, rate, math.nan, math.nan, False)
    mu_inv = 1.0 / connective_constant(census).mu_hat
    if eps is None:
        gap = 1.0 / ((d - 1) * rho_ub) - mu_inv
        eps = 0.5 * gap if gap > 0 else 0.0
    base = (mu_inv + eps) * (d - 1) * rho_ub
    if base >= 1.0:
        return EndpointDecay(sup_probs, rate, base, math.inf, False)
    const = max(v / base**n for n, v in sup_probs)
    return EndpointDecay(sup_probs, rate, base, const, True)


def speed_exact(census: SawCensus, n: int) -> float:
    """E[dist(0, endpoint)] / n under the uniform length-n SAW law."""
    if n < 1 or n > census.n_max:
        raise ValueError("n outside census range")
    return census.mean_endpoint_distance(n) / n


def low_displacement_mass(census: SawCensus, n: int, alpha: float) -> float:
    """P(dist(0, SAW(n)) <= alpha * n), exact from the census."""
    cutoff = alpha * n
    spec = census.spec
    total = sum(c for x, c in census.endpoint_counts[n].items()
                if word_length(spec, x) <= cutoff)
    return total / census.counts[n]


def speed_alpha(d: int, rho_ub: float, mu_inv: float, eps: float = 0.0) -> float:
    """alpha with (d-1)^alpha * lambda < 1, half way to the threshold."""
    lam = (mu_inv + eps) * (d - 1) * rho_ub
    if lam >= 1.0:
        raise ValueError("envelope base >= 1: no positive alpha certified")
    return -0.5 * math.log(lam) / math.log(d - 1)


@dataclass
class RosenbluthResult:
    n: int
    trials: int
    weights: np.ndarray
    endpoint_dists: np.ndarray
    dead_ends: int

    @property
    def c_n_estimate(self) -> Estimate:
        return mean_estimate(self.weights)

    @property
    def speed_estimate(self) -> float:
        w = self.weights.sum()
        if w == 0.0:
            raise ZeroDivisionError("all samples dead-ended")
        return float((self.weights * self.endpoint_dists).sum() / w) / self.n


def rosenbluth_sampler(spec: GroupSpec, n: int, trials: int, seed: int) -> RosenbluthResult:
    """Sequential SAW growth with importance weights; E[weight] = c_n.

    At each step the walk picks uniformly among non-visited neighbors and
    multiplies its weight by the number of choices; dead ends carry
    weight 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    weights = np.zeros(trials)
    dists = np.zeros(trials, dtype=np.int64)
    dead = 0
    for t in range(trials):
        rng = trial_rng(seed, t)
        w: Word = ()
        visited = {w}
        weight = 1
        for _ in range(n):
            choices = [u for u in _neighbors(spec, w) if u not in visited]
            if not choices:
                weight = 0
                break
            weight *= len(choices)
            w = choices[rng.integers(len(choices))]
            visited.add(w)
        if weight == 0:
            dead += 1
        weights[t] = weight
        dists[t] = word_length(spec, w)
    return RosenbluthResult(n, trials, weights, dists, dead)


@dataclass
class GreenTable:
    z: float
    truncation: int
    values: dict[Word, float]  # endpoint word -> truncated G_z(x)
    chi: float  # truncated chi(z)
    vertex_tail: float  # uniform per-vertex tail bound (inf if uncertified)
    chi_tail: float
    certified: bool


def _geometric_series_tail(base: float, start: int) -> float:
    return base**start / (1.0 - base)


def _chi_tail_tree(d: int, z: float, truncation: int) -> float:
    """Exact tail of chi on a tree: c_n = d(d-1)^{n-1}; finite iff z(d-1) < 1."""
    if z * (d - 1) < 1.0:
        base = z * (d - 1)
        return (d / (d - 1)) * _geometric_series_tail(base, truncation + 1)
    return math.inf


def _chi_tail_census(census: SawCensus, z: float, truncation: int) -> float:
    """Certified chi tail via submultiplicativity: with mu_hat = c_a^{1/a}
    minimized over a, c_n <= M mu_hat^n where M = max_{r<a} c_r / mu_hat^r,
    so the tail is geometric with base mu_hat * z < 1."""
    mu = connective_constant(census)
    a = 1 + min(range(len(mu.sequence)), key=lambda i: mu.sequence[i])
    mu_hat = mu.best_upper
    if z * mu_hat >= 1.0:
        return math.inf
    m_const = max(census.counts[r] / mu_hat**r for r in range(a))
    return m_const * _geometric_series_tail(mu_hat * z, truncation + 1)


def green_function(
    spec: GroupSpec,
    z: float,
    truncation: int,
    census: SawCensus | None = None,
    rho_ub: float | None = None,
) -> GreenTable:
    """Truncated G_z(x) = sum_{n<=N} c_n(x) z^n and chi(z) = sum c_n z^n.

    Tree specs need no census: the unique geodesic gives c_n(x) = [n = |x|].
    The per-vertex tail follows the chained kernel estimate and needs
    z(d-1)rho_ub < 1; the chi tail uses submultiplicativity of c_n.
    """
    if z < 0:
        raise ValueError("z must be >= 0")
    d = spec.degree
    if census is not None:
        if census.n_max < truncation:
            raise ValueError("census horizon below truncation")
        values: dict[Word, float] = {}
        chi = 0.0
        for n in range(truncation + 1):
            zn = z**n
            chi += census.counts[n] * zn
            for x, c in census.endpoint_counts[n].items():
                values[x] = values.get(x, 0.0) + c * zn
        chi_tail = _chi_tail_census(census, z, truncation)
    elif spec.is_tree:
        chi = sum(tree_sphere_size(d, r) * z**r for r in range(truncation + 1))
        values = {}  # per-vertex values on trees are just z^{|x|}
        chi_tail = _chi_tail_tree(d, z, truncation)
    else:
        raise ValueError("non-tree spec needs a census")
    lam = z * (d - 1) * (rho_ub if rho_ub is not None else math.inf)
    if rho_ub is not None and lam < 1.0:
        pref = d / ((d - 1) * (1.0 - rho_ub))
        vertex_tail = pref * _geometric_series_tail(lam, truncation + 1)
    else:
        vertex_tail = math.inf
    return GreenTable(z, truncation, values, chi, vertex_tail, chi_tail,
                      certified=chi_tail < math.inf)


def susceptibility_saw(
    spec: GroupSpec,
    z_grid: list[float],
    truncation: int,
    census: SawCensus | None = None,
    mu_hat: float | None = None,
):
    """chi(z) over a grid in [0, mu_hat^{-1}) with the ratio
    chi(z) * (mu_hat^{-1} - z), the bounded-above-and-below witness.

    Tree specs use the exact closed form chi(z) = 1 + dz/(1-(d-1)z).
    """
    d = spec.degree
    if census is not None and mu_hat is None:
        mu_hat = connective_constant(census).mu_hat
    if spec.is_tree and mu_hat is None:
        mu_hat = float(d - 1)
    if mu_hat is None:
        raise ValueError("need a census or a tree spec to fix mu_hat")
    mu_inv = 1.0 / mu_hat
    rows = []
    for z in z_grid:
        if z >= mu_inv:
            raise ValueError(f"grid point z={z} >= mu_hat^-1={mu_inv}")
        if spec.is_tree:
            chi = 1.0 + d * z / (1.0 - (d - 1) * z)
            tail = 0.0
            certified = True
        else:
            g = green_function(spec, z, truncation, census=census)
            chi = g.chi
            tail = g.chi_tail
            certified = g.certified
        rows.append(
            {"z": z, "chi": chi, "tail": tail, "certified": certified,
             "ratio_lo": chi * (mu_inv - z),
             "ratio_hi": (chi + tail) * (mu_inv - z) if certified else math.inf}
        )
    return rows


def bubble_diagram(
    spec: GroupSpec,
    z: float,
    truncation: int,
    census: SawCensus | None = None,
    rho_ub: float | None = None,
) -> DiagramResult:
    """B(z) = sum_x G_z(x)^2, truncated with a rigorous tail.

    Tree mode: B_N = 1 + sum_{r<=N} |S_r| z^{2r}, tail exactly geometric.
    Census mode: sum over walk-length pairs (n, m <= N) with the chained
    kernel tail over n + m > N, certified when z(d-1)rho_ub < 1.
    """
    d = spec.degree
    if census is None and spec.is_tree:
        value = 1.0 + sum(tree_sphere_size(d, r) * z ** (2 * r)
                          for r in range(1, truncation + 1))
        base = (d - 1) * z * z
        if base < 1.0:
            tail = (d / (d - 1)) * _geometric_series_tail(base, truncation + 1)
            certified = True
        else:
            tail = math.inf
            certified = False
        method = "exact-tree"
    elif census is not None:
        if census.n_max < truncation:
            raise ValueError("census horizon below truncation")
        value = 0.0
        for n in range(truncation + 1):
            for m in range(truncation + 1):
                ec_n = census.endpoint_counts[n]
                ec_m = census.endpoint_counts[m]
                small, big = (ec_n, ec_m) if len(ec_n) <= len(ec_m) else (ec_m, ec_n)
                overlap = sum(c * big[x] for x, c in small.items() if x in big)
                value += overlap * z ** (n + m)
        if rho_ub is not None and z * (d - 1) * rho_ub < 1.0:
            lam = z * (d - 1) * rho_ub
            pref = (d / (d - 1)) ** 2 / (1.0 - rho_ub) ** 2
            tail = 0.0
            s = truncation + 1
            while True:
                term = (s + 1) * lam**s
                tail += term
                if term < 1e-16 * max(tail, 1.0):
                    break
                s += 1
            tail *= pref
            certified = True
        else:
            tail = math.inf
            certified = False
        method = "census"
    else:
        raise ValueError("non-tree spec needs a census")
    return DiagramResult(
        value=value,
        truncation=truncation,
        tail_bound=tail,
        method=method,
        params={"z": z, "rho_ub": rho_ub, "d": d},
        certified=certified,
    )
