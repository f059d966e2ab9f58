"""Chart atlases on a polynomial level hypersurface Y = {P = c}.

Two constructions:

* build_atlas: the covering pipeline.  A doubling ball cover of the
  realified cube minus the delta-neighborhood of the singular set is
  built; every ball that meets Y gets a base point by Newton projection
  of its center and an implicit chart there.  In "faithful" mode the
  doubling factor is 600 M sqrt(2n(n-1)) / K + 1 and charts get the full
  radius 12 R_j (only executed under a cube budget; the factor is ~10^3
  or worse, so the cube count is astronomical for every honest input).
  In "practical" mode (default) the factor is configurable and chart
  radii come from the certified formula with the measured per-ball
  gradient, so charts are valid but far smaller than their balls.

* seed_atlas: charts placed at caller-supplied base points with radii
  scaled to the local distance to the singular set and certified by
  sampling.  Neighboring charts genuinely overlap, which is what chart
  chains, propagated doubling bounds and the Kobayashi mechanism need.

Edge certificates are lower bounds on the intersection radius rho(U_i,U_j):
an on-surface witness y* with sigma = min_i(r_i/4 - |y* - z_i|) > 0 yields
a sigma-ball around y* inside both quarter diskoballs, whose graph patch
pulls back into each chart preimage as a round ball of radius
4 sigma / (Lambda_i r_i), Lambda = sqrt(1 + slope^2).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .ift import (ChartCertificate, ChartRejected, ImplicitChart, align_frame,
                  chart_radius, make_chart, verify_chart)
from .polyalg import (PolyC, SingularSet, complexify, distance_to_points,
                      eval_grad, find_singular_points, gradient_polys, l1_norm,
                      markov_bound, normalized, realify)
from .whitney import WhitneyCover, build_cover, neighborhood_k


class FaithfulBudgetError(RuntimeError):
    """Faithful-mode construction would exceed the configured cube budget."""

    def __init__(self, message, gamma, estimate, count_bound):
        super().__init__(message)
        self.gamma = gamma
        self.estimate = estimate
        self.count_bound = count_bound


class AtlasQueryError(ValueError):
    """Point not on the surface / not covered / not connected."""


def faithful_gamma(n: int, d: int, K: float) -> float:
    """Doubling factor 600 n d^4 sqrt(2n(n-1)) / K + 1 used by the exact
    construction (normalized polynomial, M = n d^4)."""
    if K <= 0:
        raise ValueError("K must be positive")
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    return 600.0 * n * d**4 * math.sqrt(2 * n * (n - 1)) / K + 1.0


def chart_count_bound(n: int, d: int, K: float, delta: float) -> float:
    """(C1 / K^(2n)) log2(C2 / (K delta)), C1 = (4000 n^2 d^5)^(2n),
    C2 = 6000 n^3 d^4; clamped at 0."""
    if not 0 < delta < 1:
        raise ValueError("need 0 < delta < 1")
    if K <= 0:
        raise ValueError("need K > 0")
    C1 = float(4000 * n * n * d**5) ** (2 * n)
    C2 = 6000.0 * n**3 * d**4
    log_term = math.log2(C2 / (K * delta))
    return max(0.0, C1 / K ** (2 * n) * log_term)


@dataclass
class AtlasConfig:
    mode: str = "practical"              # "practical" | "faithful"
    gamma: float | None = None           # practical default 6.0
    verify_samples: int = 256
    line_count: int = 32
    certify_edges: bool = True
    faithful_budget: int = 500_000       # max estimated cube count
    refine_samples: int = 24             # ball sampling when projection lands outside
    slope_limit: float = 1.0 / 49.0
    tube_ratio_limit: float = 1.0 / 49.0
    residual_limit: float = 1e-10
    edge_safety: float = 0.98
    seed: int = 0


@dataclass
class AtlasChart:
    index: int
    base_point: np.ndarray
    chart: ImplicitChart
    r_full: float
    eta: float
    cube_gid: int | None = None
    ball_center: np.ndarray | None = None
    ball_radius: float | None = None
    cert: ChartCertificate | None = None

    @property
    def r_chart(self) -> float:
        return self.r_full / 4.0

    @property
    def slope(self) -> float:
        if self.cert is not None and math.isfinite(self.cert.max_slope):
            return self.cert.max_slope
        return 1.0 / 49.0


@dataclass(frozen=True)
class EdgeCert:
    rho: float
    witness: tuple | None
    sigma: float


@dataclass(frozen=True)
class ChartChain:
    indices: tuple[int, ...]
    rhos: tuple[float, ...]          # per consecutive pair
    rho_omega: float | None = None

    def __len__(self):
        return len(self.indices)


class Atlas:
    def __init__(self, poly, level, mode, charts, edges, sing, config,
                 cover=None, coverage=None, params=None):
        self.poly = poly
        self.level = level
        self.mode = mode
        self.charts: list[AtlasChart] = charts
        self.edges: dict[tuple[int, int], EdgeCert] = edges
        self.sing = sing
        self.config = config
        self.cover: WhitneyCover | None = cover
        self.coverage = coverage
        self.params = params or {}
        self._adj: dict[int, list[int]] = {}
        for (i, j), cert in edges.items():
            if cert.rho > 0:
                self._adj.setdefault(i, []).append(j)
                self._adj.setdefault(j, []).append(i)
        for lst in self._adj.values():
            lst.sort()

    @property
    def kappa(self) -> int:
        return len(self.charts)

    def neighbors(self, i: int) -> list[int]:
        return self._adj.get(i, [])

    def edge(self, i: int, j: int) -> EdgeCert | None:
        return self.edges.get((min(i, j), max(i, j)))

    def rho_min(self) -> float:
        vals = [c.rho for c in self.edges.values() if c.rho > 0]
        return min(vals) if vals else 0.0

    def graph_diameter(self) -> int:
        """Longest shortest chain (chart count) over connected pairs."""
        best = 1 if self.charts else 0
        for start in range(len(self.charts)):
            depth = {start: 1}
            queue = deque([start])
            while queue:
                g = queue.popleft()
                for h in self.neighbors(g):
                    if h not in depth:
                        depth[h] = depth[g] + 1
                        queue.append(h)
            if depth:
                best = max(best, max(depth.values()))
        return best

    def locate(self, point, tol: float = 1e-8) -> list[int]:
        """Charts whose image contains the point (sorted indices)."""
        point = np.asarray(point, dtype=complex)
        out = []
        for ac in self.charts:
            if np.linalg.norm(point - ac.base_point) > ac.r_chart * (1.0 + ac.slope) + tol:
                continue
            mask, _, _ = ac.chart.frame_membership(point, scale=ac.r_chart, tol=tol)
            if bool(mask):
                out.append(ac.index)
        return out

    def contains(self, point, tol: float = 1e-8) -> bool:
        return bool(self.locate(point, tol=tol))


def project_to_level_set(poly: PolyC, c: complex, z0: np.ndarray,
                         tol: float = 1e-12, max_iter: int = 60,
                         grads=None):
    """First-order Newton projection onto {P = c} along conj-gradient
    directions; returns (points, converged mask).  The working set shrinks
    to the unconverged points each iteration."""
    grads = grads if grads is not None else gradient_polys(poly)
    z_full = np.array(z0, dtype=complex)
    single = z_full.ndim == 1
    if single:
        z_full = z_full[None, :]
    flat = z_full.reshape(-1, z_full.shape[-1])
    ok_full = np.zeros(len(flat), dtype=bool)
    idx = np.arange(len(flat))
    z = flat.copy()
    val, grad = eval_grad(poly, z, _grads=grads)
    res = val - c
    for _ in range(max_iter):
        done = np.abs(res) <= tol
        if done.any():
            flat[idx[done]] = z[done]
            ok_full[idx[done]] = True
            keep = ~done
            idx, z, res, grad = idx[keep], z[keep], res[keep], grad[keep]
        if len(idx) == 0:
            break
        g2 = np.sum(np.abs(grad) ** 2, axis=-1)
        g2 = np.where(g2 < 1e-300, 1.0, g2)
        step = (-res / g2)[:, None] * grad.conj()
        z_new = z + step
        val, grad_new = eval_grad(poly, z_new, _grads=grads)
        res_new = val - c
        for _ in range(6):
            worse = np.abs(res_new) > np.abs(res)
            if not worse.any():
                break
            step[worse] *= 0.5
            z_new[worse] = z[worse] + step[worse]
            val_w, grad_w = eval_grad(poly, z_new[worse], _grads=grads)
            res_new[worse] = val_w - c
            grad_new[worse] = grad_w
        z, res, grad = z_new, res_new, grad_new
    if len(idx):
        flat[idx] = z  # best effort for the unconverged
    out = flat.reshape(z_full.shape)
    ok = ok_full.reshape(z_full.shape[:-1])
    if single:
        return out[0], bool(ok[0])
    return out, ok


def _prepare(poly: PolyC, c: complex, sing: SingularSet | None):
    if abs(l1_norm(poly) - 1.0) > 1e-12:
        poly, c = normalized(poly, c)
    if sing is None:
        sing = find_singular_points(poly)
    if not sing.points:
        raise ValueError("no singular points: supply the singular set explicitly")
    sing_arr = sing.as_array()
    crit_vals = poly.eval(sing_arr)
    if np.abs(crit_vals - c).min() < 1e-13:
        raise ValueError("c is a critical value (distance to the level is zero)")
    return poly, complex(c), sing, sing_arr


def build_atlas(poly: PolyC, c: complex, K: float, delta: float,
                config: AtlasConfig | None = None,
                sing: SingularSet | None = None) -> Atlas:
    """Atlas subordinate to a doubling ball cover of the realified cube.

    Every retained ball is classified against Y: certified misses are
    skipped via the gradient Lipschitz bound, the rest get a Newton
    base point (center projection, then in-ball sampling for the
    inconclusive ones).  Charts use the certified radius formula
    (practical mode) or 12 R_j (faithful mode, budget permitting) and
    must pass their sampled certificate.
    """
    config = config or AtlasConfig()
    poly, c, sing, sing_arr = _prepare(poly, c, sing)
    n, d = poly.n, poly.degree
    m = 2 * n
    M = markov_bound(poly)
    rng = np.random.default_rng(config.seed)

    if config.mode == "faithful":
        gamma = faithful_gamma(n, d, K)
        k = neighborhood_k(m, gamma)
        levels_est = max(1, math.ceil(math.log2(3 * m * gamma / delta)))
        estimate = len(sing.points) * (2 * k + 2) ** m * 2**m * levels_est
        bound = chart_count_bound(n, d, K, delta)
        if estimate > config.faithful_budget:
            raise FaithfulBudgetError(
                f"faithful construction needs ~{estimate:.3e} cubes "
                f"(gamma={gamma:.5g}); budget is {config.faithful_budget}",
                gamma=gamma, estimate=estimate, count_bound=bound)
    else:
        gamma = config.gamma if config.gamma is not None else 6.0

    punctures = [tuple(realify(np.array(p, dtype=complex))) for p in sing.points]
    cover = build_cover(m, punctures, delta, gamma)
    centers_real, radii = cover.centers_radii()
    centers = complexify(centers_real)
    grads = gradient_polys(poly)

    # ball classification: a ball certainly misses Y when |P(center) - c|
    # exceeds sup_ball ||grad P|| * R; the sup is bounded both by
    # n d^4 (dist + R) and by ||grad P(center)|| + M n R
    dist_c = distance_to_points(centers, sing_arr)
    vals, grad_c = eval_grad(poly, centers, _grads=grads)
    grad_norm = np.linalg.norm(grad_c, axis=-1)
    lip = np.minimum(n * d**4 * (dist_c + radii), grad_norm + M * n * radii)
    candidate = np.abs(vals - c) <= lip * radii
    idx_cand = np.nonzero(candidate)[0]

    base_points: dict[int, np.ndarray] = {}
    inconclusive: list[int] = []
    if len(idx_cand):
        landed, ok = project_to_level_set(poly, c, centers[idx_cand], grads=grads)
        inside = ok & (np.linalg.norm(landed - centers[idx_cand], axis=-1)
                       <= radii[idx_cand] * (1 + 1e-9))
        for row, gid in enumerate(idx_cand):
            if inside[row]:
                base_points[int(gid)] = landed[row]
            else:
                inconclusive.append(int(gid))
    if inconclusive:
        # resolve all inconclusive balls with one batched probe projection
        inc = np.array(inconclusive)
        n_ref = config.refine_samples
        offs = rng.normal(size=(len(inc), n_ref, 2 * n))
        offs /= np.linalg.norm(offs, axis=2, keepdims=True)
        offs *= (radii[inc][:, None, None]
                 * rng.uniform(0, 1, size=(len(inc), n_ref, 1)) ** (1.0 / (2 * n)))
        probes = centers[inc][:, None, :] + complexify(offs)
        landed, ok = project_to_level_set(
            poly, c, probes.reshape(-1, n), grads=grads)
        landed = landed.reshape(len(inc), n_ref, n)
        ok = ok.reshape(len(inc), n_ref)
        dist_land = np.linalg.norm(landed - centers[inc][:, None, :], axis=-1)
        inside = ok & (dist_land <= radii[inc][:, None] * (1 + 1e-9))
        for row, gid in enumerate(inc):
            hit = np.nonzero(inside[row])[0]
            if len(hit):
                base_points[int(gid)] = landed[row, hit[0]]

    charts: list[AtlasChart] = []
    for gid in sorted(base_points):
        z_j = base_points[gid]
        _, g = eval_grad(poly, z_j, _grads=grads)
        eta = float(np.linalg.norm(g))
        if eta == 0:
            continue
        R = float(radii[gid])
        formula = chart_radius(eta, M, n)
        r_full = 12.0 * R if config.mode == "faithful" else min(12.0 * R, formula)
        chart = ImplicitChart(align_frame(z_j, g), r_full, poly, c, eta, M,
                              _grads=grads)
        cert = verify_chart(chart, samples=config.verify_samples, rng=rng,
                            slope_limit=config.slope_limit,
                            tube_ratio_limit=config.tube_ratio_limit,
                            residual_limit=config.residual_limit,
                            line_count=config.line_count)
        tries = 0
        while not cert.passed and tries < 3:
            r_full *= 0.5
            chart = ImplicitChart(chart.frame, r_full, poly, c, eta, M, _grads=grads)
            cert = verify_chart(chart, samples=config.verify_samples, rng=rng,
                                slope_limit=config.slope_limit,
                                tube_ratio_limit=config.tube_ratio_limit,
                                residual_limit=config.residual_limit,
                                line_count=config.line_count)
            tries += 1
        if not cert.passed:
            raise ChartRejected(
                f"chart at ball {gid} failed verification after shrinking: {cert.reason}")
        charts.append(AtlasChart(len(charts), z_j, chart, r_full, eta,
                                 cube_gid=gid, ball_center=centers[gid],
                                 ball_radius=R, cert=cert))

    gid_to_chart = {ac.cube_gid: ac.index for ac in charts}
    edges: dict[tuple[int, int], EdgeCert] = {}
    if config.certify_edges and charts:
        atlas_tmp = Atlas(poly, c, config.mode, charts, {}, sing, config, cover=cover)
        attempted: set[tuple[int, int]] = set()
        cover_adj = cover._adjacency()
        for ac in charts:
            for h in map(int, cover_adj.get(ac.cube_gid, ())):
                if h in gid_to_chart:
                    pair = tuple(sorted((ac.index, gid_to_chart[h])))
                    if pair not in attempted:
                        attempted.add(pair)
                        cert = certify_edge(atlas_tmp, pair[0], pair[1], rng=rng)
                        if cert.rho > 0:
                            edges[pair] = cert

    params = {"K": K, "delta": delta, "gamma": gamma, "mode": config.mode,
              "M": M, "n": n, "d": d}
    return Atlas(poly, c, config.mode, charts, edges, sing, config,
                 cover=cover, params=params)


def seed_atlas(poly: PolyC, c: complex, seeds, sing: SingularSet | None = None,
               radius_factor: float = 0.35, slope_limit: float = 0.45,
               verify_samples: int = 128, line_count: int = 16,
               edge_safety: float = 0.98, seed: int = 0,
               config: AtlasConfig | None = None) -> Atlas:
    """Atlas from explicit base points, radii proportional to the local
    distance to the singular set, certificates by sampling.  Charts of
    neighboring seeds overlap, so the atlas graph carries chains."""
    if config is None:
        config = AtlasConfig(mode="seeded", verify_samples=verify_samples,
                             line_count=line_count, slope_limit=slope_limit,
                             tube_ratio_limit=0.6, edge_safety=edge_safety,
                             seed=seed)
    poly, c, sing, sing_arr = _prepare(poly, c, sing)
    n = poly.n
    M = markov_bound(poly)
    rng = np.random.default_rng(seed)
    grads = gradient_polys(poly)

    seeds = np.asarray(seeds, dtype=complex).reshape(-1, n)
    landed, ok = project_to_level_set(poly, c, seeds, grads=grads)
    charts: list[AtlasChart] = []
    for row in range(len(landed)):
        if not ok[row]:
            continue
        z_j = landed[row]
        _, g = eval_grad(poly, z_j, _grads=grads)
        eta = float(np.linalg.norm(g))
        if eta == 0:
            continue
        dist = float(distance_to_points(z_j[None, :], sing_arr)[0])
        r_full = radius_factor * dist
        chart = ImplicitChart(align_frame(z_j, g), r_full, poly, c, eta, M,
                              _grads=grads)
        cert = verify_chart(chart, samples=verify_samples, rng=rng,
                            slope_limit=slope_limit, tube_ratio_limit=0.6,
                            residual_limit=1e-9, line_count=line_count)
        tries = 0
        while not cert.passed and tries < 4:
            r_full *= 0.7
            chart = ImplicitChart(chart.frame, r_full, poly, c, eta, M, _grads=grads)
            cert = verify_chart(chart, samples=verify_samples, rng=rng,
                                slope_limit=slope_limit, tube_ratio_limit=0.6,
                                residual_limit=1e-9, line_count=line_count)
            tries += 1
        if not cert.passed:
            continue
        charts.append(AtlasChart(len(charts), z_j, chart, r_full, eta, cert=cert))

    edges: dict[tuple[int, int], EdgeCert] = {}
    if charts:
        atlas_tmp = Atlas(poly, c, "seeded", charts, {}, sing, config)
        bases = np.stack([ac.base_point for ac in charts])
        quarters = np.array([ac.r_chart for ac in charts])
        diff = bases[:, None, :] - bases[None, :, :]
        dist = np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))
        reach = quarters[:, None] + quarters[None, :]
        cand = np.argwhere((dist < reach) & (dist > 0))
        for i, j in cand:
            if i < j:
                cert = certify_edge(atlas_tmp, int(i), int(j), rng=rng)
                if cert.rho > 0:
                    edges[(int(i), int(j))] = cert

    params = {"mode": "seeded", "M": M, "n": n, "d": poly.degree}
    return Atlas(poly, c, "seeded", charts, edges, sing, config, params=params)


def certify_edge(atlas: Atlas, i: int, j: int,
                 rng: np.random.Generator | None = None) -> EdgeCert:
    """Certified lower bound on the intersection radius of charts i, j."""
    rng = rng if rng is not None else np.random.default_rng(0)
    ca, cb = atlas.charts[i], atlas.charts[j]
    safety = atlas.config.edge_safety

    # sigma = min_i(r_i/4 - |y - z_i|) <= ((r_a + r_b)/4 - |z_a - z_b|)/2,
    # so distant base points certify rho = 0 without any projection
    base_gap = float(np.linalg.norm(ca.base_point - cb.base_point))
    if ca.r_chart + cb.r_chart <= base_gap:
        return EdgeCert(0.0, None, 0.0)

    cands = [0.5 * (ca.base_point + cb.base_point)]
    if ca.ball_center is not None and cb.ball_center is not None:
        c1, c2 = ca.ball_center, cb.ball_center
        r1, r2 = ca.ball_radius, cb.ball_radius
        d12 = float(np.linalg.norm(c2 - c1))
        if 0 < d12 < r1 + r2:
            t = (r1 - r2 + d12) / 2.0
            cands.append(c1 + (c2 - c1) * (t / d12))
    for frac in (0.35, 0.65):
        cands.append(ca.base_point * (1 - frac) + cb.base_point * frac)
    probes = np.stack(cands)
    landed, ok = project_to_level_set(atlas.poly, atlas.level, probes)
    best_sigma, best_witness = 0.0, None
    for row in range(len(landed)):
        if not ok[row]:
            continue
        y = landed[row]
        da = float(np.linalg.norm(y - ca.base_point))
        db = float(np.linalg.norm(y - cb.base_point))
        sigma = min(ca.r_chart - da, cb.r_chart - db)
        if sigma > best_sigma:
            best_sigma, best_witness = sigma, y
    if best_witness is None or best_sigma <= 0:
        return EdgeCert(0.0, None, 0.0)
    sigma = safety * best_sigma
    rho = min(
        4.0 * sigma / (math.sqrt(1 + ca.slope**2) * ca.r_full),
        4.0 * sigma / (math.sqrt(1 + cb.slope**2) * cb.r_full),
    )
    return EdgeCert(float(rho), tuple(best_witness), float(sigma))


def rho_lower_bound(atlas: Atlas, i: int, j: int) -> float:
    """Certified intersection-radius lower bound; 1 for i == j, 0 when no
    intersection is certified."""
    if i == j:
        return 1.0
    cached = atlas.edge(i, j)
    if cached is not None:
        return cached.rho
    return certify_edge(atlas, i, j).rho


def chain_between(atlas: Atlas, u1, u2) -> ChartChain:
    """Shortest chart chain joining two covered points of the surface."""
    res = abs(atlas.poly.eval(np.asarray(u1, dtype=complex)) - atlas.level)
    if res > 1e-6:
        raise AtlasQueryError(f"point {u1} is not on the surface (residual {res:.2e})")
    res = abs(atlas.poly.eval(np.asarray(u2, dtype=complex)) - atlas.level)
    if res > 1e-6:
        raise AtlasQueryError(f"point {u2} is not on the surface (residual {res:.2e})")
    starts = atlas.locate(u1)
    if not starts:
        raise AtlasQueryError("start point is not covered by the atlas")
    ends = set(atlas.locate(u2))
    if not ends:
        raise AtlasQueryError("end point is not covered by the atlas")
    common = sorted(set(starts) & ends)
    if common:
        return ChartChain((common[0],), ())
    parent = {s: -1 for s in starts}
    queue = deque(sorted(starts))
    goal = None
    while queue:
        g = queue.popleft()
        if g in ends:
            goal = g
            break
        for h in atlas.neighbors(g):
            if h not in parent:
                parent[h] = g
                queue.append(h)
    if goal is None:
        raise AtlasQueryError("points lie in different atlas components")
    path = [goal]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    indices = tuple(reversed(path))
    rhos = tuple(rho_lower_bound(atlas, a, b) for a, b in zip(indices, indices[1:]))
    return ChartChain(indices, rhos)


def poincare_distance(a: complex, b: complex) -> float:
    """Distance in the metric 2|dz|/(1-|z|^2) on the unit disk:
    log((1+t)/(1-t)) with t = |a-b| / |1 - conj(a) b|."""
    a, b = complex(a), complex(b)
    t = abs(a - b) / abs(1.0 - a.conjugate() * b)
    if t >= 1.0:
        raise ValueError("points not inside the unit disk")
    return math.log((1.0 + t) / (1.0 - t))


@dataclass(frozen=True)
class KobayashiLink:
    chart: int
    a: complex
    b: complex
    mod_a: float
    mod_b: float
    distance: float


@dataclass(frozen=True)
class KobayashiResult:
    bound: float
    chain: ChartChain
    links: tuple[KobayashiLink, ...]
    mechanism_ok: bool


def _pullback_unit(ac: AtlasChart, point: np.ndarray) -> np.ndarray:
    v = ac.chart.frame.to_frame(np.asarray(point, dtype=complex))
    return v[:-1] / ac.r_chart


def kobayashi_bound(atlas: Atlas, p, q) -> KobayashiResult:
    """Upper bound 3 * chain length for the Kobayashi pseudo-distance,
    with the per-link disk mechanism checked in closed form: both
    pulled-back points lie in the radius-1/3 subdisk and their hyperbolic
    distance is at most 3/2."""
    chain = chain_between(atlas, p, q)
    pts = [np.asarray(p, dtype=complex)]
    for a, b in zip(chain.indices, chain.indices[1:]):
        cert = atlas.edge(a, b) or certify_edge(atlas, a, b)
        if cert.witness is None:
            raise AtlasQueryError(f"edge ({a},{b}) has no certified intersection")
        pts.append(np.asarray(cert.witness, dtype=complex))
    pts.append(np.asarray(q, dtype=complex))

    links = []
    ok = True
    for step, idx in enumerate(chain.indices):
        ac = atlas.charts[idx]
        a_bar = _pullback_unit(ac, pts[step])
        b_bar = _pullback_unit(ac, pts[step + 1])
        gap = np.linalg.norm(b_bar - a_bar)
        if gap < 1e-15:
            a_s, b_s = 0.0 + 0j, 0.0 + 0j
        else:
            u = (b_bar - a_bar) / gap
            alpha = complex(np.vdot(u, a_bar))   # <a, u> Hermitian
            beta = complex(np.vdot(u, b_bar))
            center = a_bar - alpha * u
            h2 = float(np.vdot(center, center).real)
            R_line = math.sqrt(16.0 - h2)
            a_s, b_s = alpha / R_line, beta / R_line
        dist = poincare_distance(a_s, b_s)
        link = KobayashiLink(idx, a_s, b_s, abs(a_s), abs(b_s), dist)
        links.append(link)
        if abs(a_s) > 1 / 3 + 1e-12 or abs(b_s) > 1 / 3 + 1e-12 or dist > 1.5 + 1e-12:
            ok = False
    return KobayashiResult(3.0 * len(chain), chain, tuple(links), ok)


def atlas_coverage(atlas: Atlas, samples: int = 10_000,
                   rng: np.random.Generator | None = None) -> dict:
    """Fraction of sampled on-surface cube points covered by some chart.

    Samples are Newton projections of random cube points that stay inside
    the cube and at distance >= delta from the singular set.
    """
    rng = rng if rng is not None else np.random.default_rng(2)
    n = atlas.poly.n
    delta = atlas.params.get("delta", 0.0)
    sing_arr = atlas.sing.as_array()
    pts = []
    batch = max(256, samples // 4)
    attempts = 0
    while len(pts) < samples and attempts < 60:
        attempts += 1
        raw = complexify(rng.uniform(-1, 1, size=(batch, 2 * n)))
        landed, ok = project_to_level_set(atlas.poly, atlas.level, raw)
        keep = ok
        keep &= np.abs(realify(landed)).max(axis=1) <= 1.0
        keep &= distance_to_points(landed, sing_arr) >= delta
        pts.extend(landed[keep])
    pts = np.array(pts[:samples])
    if len(pts) == 0:
        return {"sampled": 0, "covered": 0, "fraction": 0.0, "ok": False}
    covered = 0
    if atlas.cover is not None:
        # bucket by covering cube: test only the local chart and its neighbors
        located = atlas.cover.locate_batch(realify(pts))
        gid_to_chart = {ac.cube_gid: ac for ac in atlas.charts}
        cover_adj = atlas.cover._adjacency()
        for row, gid in enumerate(located):
            cand_charts = []
            if gid >= 0:
                for g in [int(gid)] + [int(h) for h in cover_adj.get(int(gid), ())]:
                    if g in gid_to_chart:
                        cand_charts.append(gid_to_chart[g])
            if any(bool(ac.chart.frame_membership(pts[row], ac.r_chart)[0])
                   for ac in cand_charts):
                covered += 1
    else:
        for row in range(len(pts)):
            if atlas.contains(pts[row]):
                covered += 1
    frac = covered / len(pts)
    return {"sampled": len(pts), "covered": covered, "fraction": frac,
            "ok": covered == len(pts)}


def verify_atlas_charts(atlas: Atlas, samples: int = 1000,
                        rng: np.random.Generator | None = None,
                        slope_limit: float | None = None,
                        tube_ratio_limit: float | None = None,
                        residual_limit: float | None = None,
                        line_count: int = 16) -> dict:
    """Re-run every chart certificate at the given sample budget."""
    rng = rng if rng is not None else np.random.default_rng(3)
    cfg = atlas.config
    slope_limit = slope_limit if slope_limit is not None else cfg.slope_limit
    tube_ratio_limit = (tube_ratio_limit if tube_ratio_limit is not None
                        else cfg.tube_ratio_limit)
    residual_limit = residual_limit if residual_limit is not None else cfg.residual_limit
    worst_slope = worst_tube = worst_res = 0.0
    failures = 0
    for ac in atlas.charts:
        cert = verify_chart(ac.chart, samples=samples, rng=rng,
                            slope_limit=slope_limit,
                            tube_ratio_limit=tube_ratio_limit,
                            residual_limit=residual_limit,
                            line_count=min(line_count, samples))
        ac.cert = cert
        worst_slope = max(worst_slope, cert.max_slope)
        worst_tube = max(worst_tube, cert.max_tube_ratio)
        worst_res = max(worst_res, cert.max_residual)
        if not cert.passed:
            failures += 1
    return {"charts": len(atlas.charts), "failures": failures,
            "max_slope": worst_slope, "max_tube_ratio": worst_tube,
            "max_residual": worst_res, "ok": failures == 0}


def serialize_atlas(atlas: Atlas) -> dict:
    charts = []
    for ac in atlas.charts:
        charts.append({
            "index": ac.index,
            "origin": [[z.real, z.imag] for z in ac.base_point],
            "frame": [[[w.real, w.imag] for w in row] for row in ac.chart.frame.matrix],
            "theta": ac.r_full,
            "eta": ac.eta,
            "markov": ac.chart.markov,
            "level": [atlas.level.real, atlas.level.imag],
            "cube_gid": ac.cube_gid,
        })
    edges = [{"i": i, "j": j, "rho": cert.rho}
             for (i, j), cert in sorted(atlas.edges.items())]
    return {"mode": atlas.mode, "params": {k: v for k, v in atlas.params.items()},
            "kappa": atlas.kappa, "charts": charts, "edges": edges}
