"""Chain-propagated doubling inequalities over a chart atlas.

For an analytic f that is sectionally p-valent on every chart (degree-d1
polynomials restricted to a degree-d hypersurface have p = d*d1 by the
Bezout count), max|f| propagates from a compact subdomain Omega along a
chain of overlapping charts, losing a factor c_p / rho^p per step.  The
best chain minimizes

    sum over steps of (log c_p - p log rho)

with every step weight positive (c_p >= 1, rho <= 1), so Dijkstra over the
atlas graph from a virtual Omega source realizes the infimum over chains,
and the optimum is attained on a simple path.  All bound arithmetic is in
log space: chain bounds like c_p^40 overflow float64 routinely.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .atlas import Atlas, AtlasChart, certify_edge
from .valency import (DoublingParams, bezout_valency, log_nonconcentric_base,
                      nonconcentric_constant)


class PropagationError(ValueError):
    """No admissible chain: point uncovered or Omega out of reach."""


@dataclass(frozen=True)
class ModulusBound:
    """Constraint lo <= |z_index| <= hi on one complex coordinate; both
    sides are 1-Lipschitz in the ambient metric, so the slack doubles as
    a safe ambient margin."""

    index: int
    lo: float | None = None
    hi: float | None = None

    def margin(self, z: np.ndarray) -> float:
        mod = abs(complex(z[self.index]))
        m = math.inf
        if self.lo is not None:
            m = min(m, mod - self.lo)
        if self.hi is not None:
            m = min(m, self.hi - mod)
        return m


@dataclass
class DomainSpec:
    """Semi-algebraic subdomain of the surface with a point sampler."""

    name: str
    constraints: list[ModulusBound]
    sampler: object  # callable(rng, count) -> (count, n) complex on-surface points

    def margin(self, z) -> float:
        z = np.asarray(z, dtype=complex)
        if not self.constraints:
            return math.inf
        return min(c.margin(z) for c in self.constraints)

    def contains(self, z) -> bool:
        return self.margin(z) >= 0.0

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        pts = np.asarray(self.sampler(rng, count), dtype=complex)
        return pts


def omega_contacts(atlas: Atlas, omega: DomainSpec,
                   rng: np.random.Generator | None = None,
                   samples: int = 2048) -> dict[int, float]:
    """Certified rho(U_j, Omega) per chart, from sampled Omega witnesses.

    A witness y in U_j with Omega-margin g and chart depth r_chart - D
    gives a sigma-ball around y inside U_j and Omega, pulling back to a
    round ball of radius sigma / (Lambda r_chart) in the chart preimage.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    pts = omega.sample(rng, samples)
    margins = np.array([omega.margin(p) for p in pts])
    keep = margins > 0
    pts, margins = pts[keep], margins[keep]
    if len(pts) == 0:
        return {}
    bases = np.stack([ac.base_point for ac in atlas.charts])
    quarters = np.array([ac.r_chart for ac in atlas.charts])
    diff = pts[:, None, :] - bases[None, :, :]
    dist = np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))  # (samples, charts)
    safety = atlas.config.edge_safety
    out: dict[int, float] = {}
    for j, ac in enumerate(atlas.charts):
        near = np.nonzero(dist[:, j] < ac.r_chart)[0]
        if len(near) == 0:
            continue
        mask, _, _ = ac.chart.frame_membership(pts[near], scale=ac.r_chart)
        hit = near[mask]
        if len(hit) == 0:
            continue
        sigma = safety * np.minimum(ac.r_chart - dist[hit, j], margins[hit])
        best = float(sigma.max())
        if best > 0:
            lam = math.sqrt(1.0 + ac.slope**2)
            out[j] = min(1.0, best / (lam * ac.r_chart))
    return out


@dataclass(frozen=True)
class PropagationResult:
    log_bound: float
    chain: tuple[int, ...]
    rho_omega: float
    edge_rhos: tuple[float, ...]
    p: int
    log_cp: float
    breakdown: tuple = ()

    @property
    def bound(self) -> float:
        try:
            return math.exp(self.log_bound)
        except OverflowError:
            return math.inf

    def recompute_log(self) -> float:
        total = self.log_cp - self.p * math.log(self.rho_omega)
        for rho in self.edge_rhos:
            total += self.log_cp - self.p * math.log(rho)
        return total

    def to_dict(self) -> dict:
        return {
            "log_bound": self.log_bound,
            "bound": self.bound if math.isfinite(self.bound) else "inf",
            "chain": list(self.chain),
            "rho_omega": self.rho_omega,
            "edge_breakdown": [dict(b, edge=list(b["edge"])) for b in self.breakdown],
            "params": {"p": self.p, "log_cp": self.log_cp},
        }


class Propagator:
    """Shortest-chain engine for one (atlas, Omega, valency) triple."""

    def __init__(self, atlas: Atlas, omega: DomainSpec, params: DoublingParams,
                 rng: np.random.Generator | None = None, samples: int = 2048,
                 contacts: dict[int, float] | None = None):
        self.atlas = atlas
        self.omega = omega
        self.params = params
        self.log_cp = log_nonconcentric_base(params)
        self.contacts = contacts if contacts is not None else omega_contacts(
            atlas, omega, rng=rng, samples=samples)
        if not self.contacts:
            raise PropagationError("Omega touches no chart of the atlas")
        self._run_dijkstra()

    def _run_dijkstra(self):
        p = self.params.p
        dist = {}
        parent = {}
        heap = []
        for j, rho in sorted(self.contacts.items()):
            cost = self.log_cp - p * math.log(rho)
            if cost < dist.get(j, math.inf):
                dist[j] = cost
                parent[j] = -1
                heapq.heappush(heap, (cost, j))
        while heap:
            cost, u = heapq.heappop(heap)
            if cost > dist.get(u, math.inf):
                continue
            for v in self.atlas.neighbors(u):
                cert = self.atlas.edge(u, v)
                if cert is None or cert.rho <= 0:
                    continue
                w = self.log_cp - p * math.log(cert.rho)
                new = cost + w
                if new < dist.get(v, math.inf) - 1e-18:
                    dist[v] = new
                    parent[v] = u
                    heapq.heappush(heap, (new, v))
        self.dist = dist
        self.parent = parent

    def bound_at(self, z) -> PropagationResult:
        charts = self.atlas.locate(z)
        if not charts:
            raise PropagationError(f"point {z} is not covered by the atlas")
        best, best_chart = math.inf, None
        for j in charts:
            d = self.dist.get(j, math.inf)
            if d < best:
                best, best_chart = d, j
        if best_chart is None:
            raise PropagationError(
                "no chain joins the point's charts to Omega (different component)")
        path = [best_chart]
        while self.parent[path[-1]] != -1:
            path.append(self.parent[path[-1]])
        chain = tuple(reversed(path))  # Omega-side first
        rho_omega = self.contacts[chain[0]]
        edge_rhos = tuple(self.atlas.edge(a, b).rho
                          for a, b in zip(chain, chain[1:]))
        breakdown = [{"edge": ("omega", chain[0]), "rho": rho_omega,
                      "log_contribution": self.log_cp - self.params.p * math.log(rho_omega)}]
        for (a, b), rho in zip(zip(chain, chain[1:]), edge_rhos):
            breakdown.append({"edge": (a, b), "rho": rho,
                              "log_contribution": self.log_cp - self.params.p * math.log(rho)})
        result = PropagationResult(best, chain, rho_omega, edge_rhos,
                                   self.params.p, self.log_cp, tuple(breakdown))
        recomputed = result.recompute_log()
        if abs(recomputed - result.log_bound) > 1e-12 * max(1.0, abs(result.log_bound)):
            raise AssertionError("witness chain does not reproduce the reported bound")
        return result


def chain_bound(atlas: Atlas, omega: DomainSpec, z, params: DoublingParams,
                rng: np.random.Generator | None = None,
                samples: int = 2048) -> PropagationResult:
    """One-shot minimizing chain bound on |f(z)| / max_Omega |f| for f
    sectionally p-valent with respect to the atlas."""
    return Propagator(atlas, omega, params, rng=rng, samples=samples).bound_at(z)


def enumerate_chain_bound(atlas: Atlas, omega: DomainSpec, z,
                          params: DoublingParams,
                          contacts: dict[int, float] | None = None,
                          rng: np.random.Generator | None = None,
                          max_charts: int = 12) -> float:
    """Exhaustive minimum over all simple chains (small atlases only):
    the independent oracle for the shortest-path search."""
    if len(atlas.charts) > max_charts:
        raise ValueError(f"exhaustive search limited to {max_charts} charts")
    if contacts is None:
        contacts = omega_contacts(atlas, omega, rng=rng)
    if not contacts:
        raise PropagationError("Omega touches no chart of the atlas")
    targets = set(atlas.locate(z))
    if not targets:
        raise PropagationError("point not covered")
    p = params.p
    log_cp = log_nonconcentric_base(params)
    best = math.inf

    def dfs(node, cost, visited):
        nonlocal best
        if cost >= best:
            return
        if node in targets:
            best = min(best, cost)
        for nxt in atlas.neighbors(node):
            if nxt in visited:
                continue
            cert = atlas.edge(node, nxt)
            if cert is None or cert.rho <= 0:
                continue
            dfs(nxt, cost + log_cp - p * math.log(cert.rho), visited | {nxt})

    for j, rho in contacts.items():
        dfs(j, log_cp - p * math.log(rho), {j})
    if not math.isfinite(best):
        raise PropagationError("no chain reaches the point")
    return best


@dataclass(frozen=True)
class UniformBound:
    log_value: float
    ell: int
    kappa: int
    log_value_kappa: float

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf


def uniform_bound(atlas: Atlas, rho: float, p: int,
                  params: DoublingParams | None = None) -> UniformBound:
    """(c_p / rho^p)^ell with ell the atlas graph diameter in chart count,
    plus the weaker kappa-exponent variant."""
    params = params if params is not None else DoublingParams(p=p)
    if params.p != p:
        raise ValueError("params.p must match p")
    per_step = math.log(nonconcentric_constant(params, rho))
    ell = atlas.graph_diameter()
    return UniformBound(per_step * ell, ell, atlas.kappa, per_step * atlas.kappa)


def kappa_lower(dc: float, rho: float, p: int,
                params: DoublingParams | None = None) -> float:
    """Charts needed by any covering with intersection radii >= rho, given
    an observed doubling constant: log DC / log(c_p / rho^p)."""
    if dc <= 1.0:
        raise ValueError("doubling constant must exceed 1")
    params = params if params is not None else DoublingParams(p=p)
    denom = math.log(nonconcentric_constant(params, rho))
    if denom <= 0:
        raise ValueError("c_p / rho^p must exceed 1")
    return math.log(dc) / denom


@dataclass(frozen=True)
class PolyDCBound:
    log_bound: float
    p: int
    kappa_bound: float
    log_per_chart: float

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_bound)
        except OverflowError:
            return math.inf


def poly_dc_bound(n: int, d: int, d1: int, K: float, delta: float,
                  params: DoublingParams | None = None) -> PolyDCBound:
    """Closed-form doubling bound for degree-d1 polynomials restricted to a
    degree-d level hypersurface: (10^p c_p)^(chart count bound), p = d*d1,
    rho = 1/10.  Returned in log space; the linear value overflows float64
    for every honest input (the chart bound is ~10^20 or worse)."""
    from .atlas import chart_count_bound

    p = bezout_valency(d, d1)
    params = params if params is not None else DoublingParams(p=p)
    if params.p != p:
        raise ValueError("params.p must equal bezout_valency(d, d1)")
    kappa = chart_count_bound(n, d, K, delta)
    log_per_chart = p * math.log(10.0) + log_nonconcentric_base(params)
    return PolyDCBound(kappa * log_per_chart, p, kappa, log_per_chart)


def empirical_dc(f, g_sampler, omega_sampler, count: int = 4096,
                 rng: np.random.Generator | None = None) -> float:
    """Sampled doubling constant max_G |f| / max_Omega |f|."""
    rng = rng if rng is not None else np.random.default_rng(0)
    g_pts = np.asarray(g_sampler(rng, count), dtype=complex)
    o_pts = np.asarray(omega_sampler(rng, count), dtype=complex)
    num = float(np.abs(f(g_pts)).max())
    den = float(np.abs(f(o_pts)).max())
    if den == 0.0:
        raise ValueError("max over Omega is zero")
    return num / den
