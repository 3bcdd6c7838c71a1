"""Aggregate inequality certificate: one JSON record per configured check.

Every estimated quantity enters a check at its conservative end, inputs
carry provenance, and a check that cannot run (missing spectral-radius
bound, missing universal constant) is emitted as `inconclusive` rather
than skipped.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict

from . import branching, percolation, saw as saw_mod
from .groups import GroupSpec, ball as build_ball, girth as girth_of, parse_group_spec
from .kernels import (
    check_nbw_le_rho_power,
    check_nbw_le_srw_tail,
    estimate_spectral_radius,
    kesten_rho,
)

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass
class Entry:
    id: str
    anchor: str  # which inequality/quantity this certifies, or "plumbing"
    lhs: float
    rhs: float
    status: str
    note: str = ""

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "status": self.status,
            "note": self.note,
        }


def _num(x: float):
    if x is None or isinstance(x, str):
        return x
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return float(x)


def check_perccond(d: int, pc_hi: float, rho_ub: float | None) -> Entry:
    """p_c (d-1) rho < 1, evaluated at the conservative interval ends."""
    if rho_ub is None:
        return Entry("perccond", "pc*(d-1)*rho<1", math.nan, 1.0, INCONCLUSIVE,
                     note="no certified spectral-radius upper bound")
    lhs = pc_hi * (d - 1) * rho_ub
    return Entry("perccond", "pc*(d-1)*rho<1", lhs, 1.0,
                 PASS if lhs < 1.0 else FAIL)


def girth_threshold(rho_ub: float, big_c: float) -> float:
    """L = C log(1 + (1-rho)^{-2}) / (rho^{-1} - 1)."""
    if not 0.0 < rho_ub < 1.0:
        raise ValueError("need 0 < rho_ub < 1")
    return big_c * math.log(1.0 + (1.0 - rho_ub) ** -2) / (1.0 / rho_ub - 1.0)


def check_girth_threshold(
    rho_ub: float | None, big_c: float | None, girth_lb: float
) -> Entry:
    """Compare the graph's girth certificate against the sufficient threshold L."""
    if rho_ub is None or big_c is None:
        return Entry("girth_threshold", "girth>=L(rho,C)", math.nan, math.nan,
                     INCONCLUSIVE, note="needs rho_ub and the universal constant C")
    L = girth_threshold(rho_ub, big_c)
    return Entry("girth_threshold", "girth>=L(rho,C)", L, girth_lb,
                 PASS if girth_lb >= L else FAIL,
                 note="rhs is the certified girth (or lower bound)")


def check_bnp_bound(
    d: int,
    girth_lb: float,
    rho_ub: float | None,
    big_c: float | None,
    pc_lo: float,
    pc_hi: float,
) -> Entry:
    """p_c <= 1/(d-1) + C log(1+(1-rho)^{-2}) / (d*girth).

    A girth lower bound is safe: it only enlarges the right-hand side.
    """
    if rho_ub is None or big_c is None:
        return Entry("pc_degree_girth_bound", "pc<=1/(d-1)+C*log(...)/(d*g)",
                     math.nan, math.nan, INCONCLUSIVE,
                     note="needs rho_ub and the universal constant C")
    bound = 1.0 / (d - 1) + big_c * math.log(1.0 + (1.0 - rho_ub) ** -2) / (d * girth_lb)
    if pc_hi <= bound:
        return Entry("pc_degree_girth_bound", "pc<=1/(d-1)+C*log(...)/(d*g)",
                     pc_hi, bound, PASS)
    if pc_lo <= bound:
        return Entry("pc_degree_girth_bound", "pc<=1/(d-1)+C*log(...)/(d*g)",
                     pc_hi, bound, PASS,
                     note="pc interval straddles the bound: consistent within "
                          "estimation error")
    return Entry("pc_degree_girth_bound", "pc<=1/(d-1)+C*log(...)/(d*g)",
                 pc_hi, bound, FAIL)


def check_mu_pc(mu_ub: float, pc_lo: float, pc_hi: float) -> Entry:
    """mu * p_c >= 1 consistency: with an upper bound on mu the product at
    the upper p_c end must not fall below 1."""
    product_hi = mu_ub * pc_hi
    product_lo = mu_ub * pc_lo
    return Entry("mu_pc_product", "mu*pc>=1", 1.0, product_hi,
                 PASS if product_hi >= 1.0 else FAIL,
                 note=f"interval ends: [{product_lo:.6g}, {product_hi:.6g}]")


@dataclass
class GraphJob:
    spec_text: str
    radius: int = 6
    kernel_steps: int = 6
    saw_n_max: int = 6
    trials: int = 200
    rho_ub: float | None = None  # mandatory for non-tree rho-dependent checks
    bnp_c: float | None = None  # universal constant: input, never a default
    pc_radius: int = 6
    pc_trials: int = 100


@dataclass
class VerifyConfig:
    jobs: list[GraphJob] = field(default_factory=list)
    seed: int = 0
    workers: int = 1
    theta_star: float = 0.5
    eps: float | None = None

    def to_dict(self) -> dict:
        return {"jobs": [asdict(j) for j in self.jobs], "seed": self.seed,
                "workers": self.workers, "theta_star": self.theta_star,
                "eps": self.eps}


@dataclass
class Certificate:
    graphs: list[dict]
    meta: dict

    @property
    def entries(self) -> list[dict]:
        return [e for g in self.graphs for e in g["entries"]]

    @property
    def failed(self) -> bool:
        return any(e["status"] == FAIL for e in self.entries)

    @property
    def inconclusive_count(self) -> int:
        return sum(1 for e in self.entries if e["status"] == INCONCLUSIVE)

    def to_json(self, include_meta: bool = True) -> str:
        doc = {"graphs": self.graphs}
        if include_meta:
            doc["meta"] = self.meta
        return json.dumps(doc, indent=2, sort_keys=True)


def _graph_certificate(job: GraphJob, seed: int, theta_star: float,
                       eps: float | None, workers: int) -> dict:
    spec = parse_group_spec(job.spec_text)
    d = spec.degree
    entries: list[Entry] = []

    if spec.is_tree:
        # no cyclic factor of order >= 3, so the Cayley graph has no cycle
        g_report = None
        girth_lb = math.inf
    else:
        g_report = girth_of(spec, max(job.radius, 3))
        girth_lb = float(g_report.girth if g_report.girth is not None
                         else g_report.lower_bound)

    rho = estimate_spectral_radius(spec, 200 if spec.is_tree else 2 * (job.radius // 2),
                                   rho_ub=job.rho_ub, ball_radius=job.radius)
    rho_ub = rho.rho_ub

    # p_c: exact branching interval on trees, crossing bisection otherwise
    if spec.is_tree:
        pc_lo, pc_hi = branching.estimate_pc_exact(d)
        pc_prov = "tree-branching-oracle"
    else:
        est = percolation.estimate_pc(spec, job.pc_radius, job.pc_trials, seed,
                                      theta_star=theta_star)
        pc_lo, pc_hi = est.lo, est.hi
        pc_prov = f"crossing-bisection R={job.pc_radius}"

    b = build_ball(spec, job.radius)
    n_check = min(job.kernel_steps, job.radius)
    if rho_ub is not None and rho_ub < 1.0:
        tail_entries = check_nbw_le_srw_tail(b, n_check, rho_ub)
        rho_entries = check_nbw_le_rho_power(b, n_check, rho_ub)
        for name, chk in (("nbw_le_srw_tail", tail_entries), ("nbw_le_rho_power", rho_entries)):
            worst = min(chk, key=lambda e: e.margin)
            entries.append(Entry(name, "walk-kernel inequality", worst.lhs, worst.rhs,
                                 PASS if all(e.passed for e in chk) else FAIL,
                                 note=f"worst margin over {len(chk)} (x,n) pairs"))
    else:
        for name in ("nbw_le_srw_tail", "nbw_le_rho_power"):
            entries.append(Entry(name, "walk-kernel inequality", math.nan, math.nan,
                                 INCONCLUSIVE, note="no certified rho upper bound"))

    # spectral-radius sequence sanity: every element <= rho_ub
    if rho_ub is not None:
        worst = max(rho.sequence) if rho.sequence else 0.0
        entries.append(Entry("return_rate_le_rho", "p^{2n}(0,0)^{1/2n}<=rho",
                             worst, rho_ub, PASS if worst <= rho_ub + 1e-12 else FAIL))
    else:
        entries.append(Entry("return_rate_le_rho", "p^{2n}(0,0)^{1/2n}<=rho",
                             max(rho.sequence) if rho.sequence else 0.0, math.nan,
                             INCONCLUSIVE, note="no certified rho upper bound"))

    entries.append(check_perccond(d, pc_hi, rho_ub))
    entries.append(check_girth_threshold(rho_ub, job.bnp_c, girth_lb))
    entries.append(check_bnp_bound(d, girth_lb, rho_ub, job.bnp_c, pc_lo, pc_hi))

    census = saw_mod.enumerate_saw(spec, job.saw_n_max)
    mu = saw_mod.connective_constant(census)
    entries.append(check_mu_pc(mu.best_upper, pc_lo, pc_hi))

    # triangle diagram at the conservative end of the p_c interval
    if spec.is_tree:
        tri = percolation.triangle_diagram(spec, pc_hi, min(job.radius, 5),
                                           method="exact-tree", rho_ub=rho_ub)
    else:
        tri = percolation.triangle_diagram(spec, pc_hi, min(job.radius, 4),
                                           method="mc", rho_ub=rho_ub,
                                           trials=job.trials, seed=seed)
    entries.append(Entry("triangle_finite", "triangle diagram finite at pc",
                         tri.value, tri.value + tri.tail_bound,
                         PASS if tri.certified else INCONCLUSIVE,
                         note=f"method={tri.method} truncation={tri.truncation}"))

    # bubble diagram at z = 1/mu_hat
    z = 1.0 / mu.mu_hat
    if spec.is_tree:
        bub = saw_mod.bubble_diagram(spec, z, 40)
    else:
        bub = saw_mod.bubble_diagram(spec, z, census.n_max, census=census, rho_ub=rho_ub)
    entries.append(Entry("bubble_finite", "bubble diagram finite at 1/mu",
                         bub.value, bub.value + bub.tail_bound,
                         PASS if bub.certified else INCONCLUSIVE,
                         note=f"method={bub.method} truncation={bub.truncation}"))

    # endpoint decay envelope and positive speed
    decay = saw_mod.saw_endpoint_law(census, rho_ub=rho_ub, eps=eps)
    if decay.bound_applies:
        entries.append(Entry("endpoint_decay", "sup_x law(n,x) <= C*lambda^n",
                             decay.bound_base, 1.0, PASS,
                             note=f"envelope constant {decay.bound_constant:.6g}, "
                                  f"fitted rate {decay.fitted_rate:.6g}"))
    else:
        entries.append(Entry("endpoint_decay", "sup_x law(n,x) <= C*lambda^n",
                             decay.bound_base if not math.isnan(decay.bound_base) else math.nan,
                             1.0, INCONCLUSIVE,
                             note="envelope base >= 1 or rho_ub missing"))
    n_speed = census.n_max
    speed = saw_mod.speed_exact(census, n_speed)
    entries.append(Entry("saw_speed_positive", "E dist(0,SAW(n))/n > 0",
                         0.0, speed, PASS if speed > 0 else FAIL,
                         note=f"exact census speed at n={n_speed}"))

    return {
        "graph": spec.describe(),
        "inputs": {
            "degree": d,
            "girth": "infinite (tree)" if g_report is None else str(g_report),
            "rho_ub": {"value": _num(rho_ub) if rho_ub is not None else None,
                       "provenance": rho.rho_ub_provenance},
            "pc_interval": {"lo": pc_lo, "hi": pc_hi, "provenance": pc_prov},
            "mu_ub": {"value": mu.best_upper,
                      "tree_exact": mu.tree_exact,
                      "provenance": f"census min c_n^(1/n), n<={census.n_max}"},
            "bnp_C": job.bnp_c,
        },
        "entries": [e.to_record() for e in entries],
    }


def run_certificate(config: VerifyConfig) -> Certificate:
    start = time.time()
    if config.workers > 1 and len(config.jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            graphs = list(
                pool.map(
                    _graph_certificate,
                    config.jobs,
                    [config.seed] * len(config.jobs),
                    [config.theta_star] * len(config.jobs),
                    [config.eps] * len(config.jobs),
                    [config.workers] * len(config.jobs),
                )
            )
    else:
        graphs = [
            _graph_certificate(job, config.seed, config.theta_star, config.eps,
                               config.workers)
            for job in config.jobs
        ]
    meta = {
        "seed": config.seed,
        "workers": config.workers,
        "config": config.to_dict(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "duration_s": round(time.time() - start, 3),
    }
    return Certificate(graphs, meta)
