"""Doubling ball covers of a punctured cube by binary subdivision.

The cube Q = [-1, 1]^m is subdivided dyadically.  Level-s cubes have edge
2/2^s and are addressed by integer coordinate vectors c: the cube occupies
prod_i [-1 + c_i * 2/2^s, -1 + (c_i + 1) * 2/2^s].  Around each puncture a
combinatorial k-neighborhood (Chebyshev distance <= k on coordinates) is
kept unresolved and subdivided further; everything else is retained, and
the circumscribed ball B of every retained cube satisfies the separation
property  gamma * B contains no puncture  -- exactly, by integer
arithmetic, since k is chosen with  gamma * r_s < (k + 1/2) * edge_s.

Retained cubes are stored per level as lexicographically sorted integer
coordinate arrays with packed uint64 keys for O(log n) membership, which
keeps covers with millions of cubes workable.  Punctures are converted to
exact dyadic rationals (every float is one), so geometric predicates that
matter (separation, containment in the delta-neighborhood) are decided
exactly or with outward-rounded margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np


class CoverBuildError(RuntimeError):
    """Construction could not complete (bad parameters or depth overflow)."""


class CoverQueryError(ValueError):
    """A query point is outside the covered region or unreachable."""


@dataclass(frozen=True)
class SubCube:
    level: int
    coords: tuple[int, ...]

    @property
    def edge(self) -> float:
        return 2.0 / 2**self.level

    def center(self) -> tuple[float, ...]:
        e = self.edge
        return tuple(c * e + e / 2.0 - 1.0 for c in self.coords)

    def radius(self) -> float:
        return math.sqrt(len(self.coords)) / 2**self.level


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float


def circumscribed_ball(cube: SubCube) -> Ball:
    return Ball(cube.center(), cube.radius())


def neighborhood_k(m: int, gamma: float) -> int:
    """Smallest k with gamma * r_s <= (k + 1/2) * edge_s, i.e.
    k = ceil((sqrt(m) * gamma - 1) / 2), bumped by one when equality
    m * gamma^2 == (2k+1)^2 holds exactly so separation is strict."""
    if gamma <= 1.0:
        raise ValueError("gamma must be > 1")
    if m < 1:
        raise ValueError("m must be >= 1")
    k = max(0, math.ceil((math.sqrt(m) * gamma - 1.0) / 2.0))
    g2m = Fraction(gamma) ** 2 * m
    while g2m >= (2 * k + 1) ** 2:
        k += 1
    # the while loop can only fire once: ceil already gives (2k+1)^2 >= m*gamma^2
    return k


def intersection_ball_radius(b1: Ball, b2: Ball) -> float:
    """Largest radius of a ball inside b1 and b2; 0 for disjoint balls."""
    d = math.dist(b1.center, b2.center)
    return max(0.0, min(b1.radius, b2.radius, 0.5 * (b1.radius + b2.radius - d)))


def _puncture_boxes(punctures_frac, level: int, k: int, m: int):
    """Integer coordinate boxes [lo, hi] of the cubes containing each
    puncture at the given level, clamped near the unit-cube window."""
    scale = 1 << (level - 1) if level >= 1 else Fraction(1, 2)
    lo = np.empty((len(punctures_frac), m), dtype=np.int64)
    hi = np.empty((len(punctures_frac), m), dtype=np.int64)
    win_lo, win_hi = -(k + 2), (1 << level) + k + 1
    for p_idx, point in enumerate(punctures_frac):
        for i, x in enumerate(point):
            t = (x + 1) * scale
            f = t.numerator // t.denominator
            if t == f:
                a, b = f - 1, f
            else:
                a = b = f
            lo[p_idx, i] = min(max(a, win_lo), win_hi)
            hi[p_idx, i] = min(max(b, win_lo), win_hi)
    return lo, hi


def _chebyshev_within(coords: np.ndarray, lo: np.ndarray, hi: np.ndarray, k: int) -> np.ndarray:
    """Mask of coords within Chebyshev distance k of any puncture box."""
    if lo.shape[0] == 0:
        return np.zeros(len(coords), dtype=bool)
    mask = np.zeros(len(coords), dtype=bool)
    for j in range(lo.shape[0]):
        d = np.maximum(lo[j] - coords, coords - hi[j])
        np.maximum(d, 0, out=d)
        mask |= d.max(axis=1) <= k
    return mask


def _pack(coords: np.ndarray, level: int, m: int) -> np.ndarray:
    """Lexicographic-order-preserving uint64 key; requires m*level <= 62."""
    if m * max(level, 1) > 62:
        raise CoverBuildError(
            f"subdivision too deep to index (m={m}, level={level})")
    keys = np.zeros(len(coords), dtype=np.uint64)
    shift = np.uint64(max(level, 1))
    for i in range(m):
        keys = (keys << shift) | coords[:, i].astype(np.uint64)
    return keys


def _sorted_level(coords: np.ndarray, level: int, m: int):
    keys = _pack(coords, level, m)
    order = np.argsort(keys, kind="stable")
    return coords[order], keys[order]


class WhitneyCover:
    """Finished cover: retained cubes per level plus the final unresolved shell."""

    def __init__(self, m, punctures, delta, gamma, k, levels, sigma_final,
                 sigma_level, level_counts, stop_reason, s_formula):
        self.m = m
        self.punctures = punctures              # tuple of float tuples
        self.delta = delta
        self.gamma = gamma
        self.k = k
        self.levels = levels                    # {level: (coords sorted, keys sorted)}
        self.sigma_final = sigma_final          # (coords, keys) at sigma_level
        self.sigma_level = sigma_level
        self.level_counts = level_counts        # {level: (|S_l|, |Sigma_l|)}
        self.stop_reason = stop_reason          # "shell-empty" | "shell-inside-delta"
        self.s_formula = s_formula              # ceil(log2(3 m gamma / delta))
        self._offsets = {}
        self._adj_cache = None
        total = 0
        for lvl in sorted(levels):
            self._offsets[lvl] = total
            total += len(levels[lvl][0])
        self.n_cubes = total
        self._punctures_arr = (np.array(punctures, dtype=float).reshape(len(punctures), m)
                               if punctures else np.zeros((0, m)))

    # -- indexing ---------------------------------------------------------

    def cube(self, gid: int) -> SubCube:
        for lvl in sorted(self.levels):
            coords, _ = self.levels[lvl]
            off = self._offsets[lvl]
            if off <= gid < off + len(coords):
                return SubCube(lvl, tuple(int(c) for c in coords[gid - off]))
        raise IndexError(gid)

    def ball(self, gid: int) -> Ball:
        return circumscribed_ball(self.cube(gid))

    def find_cube(self, level: int, coords) -> int | None:
        if level not in self.levels:
            return None
        top = 1 << level
        key = 0
        for c in coords:
            c = int(c)
            if c < 0 or c >= top:
                return None
            key = (key << level) | c
        _, keys = self.levels[level]
        pos = int(np.searchsorted(keys, np.uint64(key)))
        if pos < len(keys) and keys[pos] == key:
            return self._offsets[level] + pos
        return None

    def centers_radii(self):
        """All retained ball centers (N, m) and radii (N,), in gid order."""
        centers = []
        radii = []
        for lvl in sorted(self.levels):
            coords, _ = self.levels[lvl]
            e = 2.0 / 2**lvl
            centers.append(coords * e + (e / 2.0 - 1.0))
            radii.append(np.full(len(coords), math.sqrt(self.m) / 2**lvl))
        if not centers:
            return np.zeros((0, self.m)), np.zeros(0)
        return np.concatenate(centers), np.concatenate(radii)

    # -- point location ---------------------------------------------------

    def _candidate_coords(self, point, level):
        """Exact containing-cube coordinates at a level (1 or 2 per axis)."""
        per_axis = []
        scale = 1 << (level - 1)
        for x in point:
            t = (Fraction(x) + 1) * scale
            f = t.numerator // t.denominator
            cands = [f]
            if t == f:
                cands.append(f - 1)
            per_axis.append([c for c in cands if 0 <= c < (1 << level)])
        return [tuple(c) for c in product(*per_axis)]

    def locate(self, point) -> int | None:
        """gid of a retained cube containing the point (closed cubes), or None."""
        point = tuple(float(x) for x in point)
        if any(abs(x) > 1.0 for x in point):
            return None
        for lvl in sorted(self.levels):
            for coords in self._candidate_coords(point, lvl):
                gid = self.find_cube(lvl, coords)
                if gid is not None:
                    return gid
        return None

    def locate_batch(self, points: np.ndarray) -> np.ndarray:
        """Vectorized locate for generic (off-boundary) points; -1 if uncovered."""
        points = np.asarray(points, dtype=float)
        out = np.full(len(points), -1, dtype=np.int64)
        pending = np.abs(points).max(axis=1) <= 1.0
        for lvl in sorted(self.levels):
            if not pending.any():
                break
            idx = np.nonzero(pending)[0]
            t = (points[idx] + 1.0) * (1 << (lvl - 1))
            coords = np.floor(t).astype(np.int64)
            np.clip(coords, 0, (1 << lvl) - 1, out=coords)
            keys = _pack(coords, lvl, self.m)
            _, level_keys = self.levels[lvl]
            pos = np.searchsorted(level_keys, keys)
            pos = np.minimum(pos, len(level_keys) - 1) if len(level_keys) else pos
            hit = np.zeros(len(idx), dtype=bool)
            if len(level_keys):
                hit = level_keys[pos] == keys
            out[idx[hit]] = self._offsets[lvl] + pos[hit]
            pending[idx[hit]] = False
        return out

    # -- adjacency --------------------------------------------------------

    def neighbors(self, gid: int) -> list[int]:
        """Retained cubes sharing part of an (m-1)-face with this cube."""
        cube = self.cube(gid)
        lvl, a = cube.level, cube.coords
        m = self.m
        found = []
        # same level
        for i in range(m):
            for d in (-1, 1):
                b = a[:i] + (a[i] + d,) + a[i + 1:]
                g = self.find_cube(lvl, b)
                if g is not None:
                    found.append(g)
        # coarser level
        if lvl - 1 in self.levels:
            for i in range(m):
                for d in (-1, 1):
                    if d == -1 and a[i] % 2 == 0:
                        ci = a[i] // 2 - 1
                    elif d == 1 and (a[i] + 1) % 2 == 0:
                        ci = (a[i] + 1) // 2
                    else:
                        continue
                    b = tuple(ci if j == i else a[j] // 2 for j in range(m))
                    g = self.find_cube(lvl - 1, b)
                    if g is not None:
                        found.append(g)
        # finer level
        if lvl + 1 in self.levels:
            base = tuple(2 * c for c in a)
            for i in range(m):
                for d in (-1, 1):
                    ci = 2 * (a[i] + 1) if d == 1 else 2 * a[i] - 1
                    rest = [j for j in range(m) if j != i]
                    for bits in product((0, 1), repeat=m - 1):
                        b = list(base)
                        b[i] = ci
                        for j, bit in zip(rest, bits):
                            b[j] = base[j] + bit
                        g = self.find_cube(lvl + 1, tuple(b))
                        if g is not None:
                            found.append(g)
        return sorted(set(found))

    def _adjacency(self) -> dict[int, np.ndarray]:
        """Face-adjacency lists for every retained cube, built once with
        vectorized key lookups (same-level steps and the coarse-side halves
        of the cross-level contacts, mirrored)."""
        if getattr(self, "_adj_cache", None) is not None:
            return self._adj_cache
        pairs_a: list[np.ndarray] = []
        pairs_b: list[np.ndarray] = []
        lvls = sorted(self.levels)
        for lvl in lvls:
            coords, keys = self.levels[lvl]
            off = self._offsets[lvl]
            n, m = coords.shape
            gids = np.arange(n, dtype=np.int64) + off
            top = 1 << lvl
            for i in range(m):
                for d in (-1, 1):
                    cand = coords.copy()
                    cand[:, i] += d
                    valid = (cand[:, i] >= 0) & (cand[:, i] < top)
                    if not valid.any():
                        continue
                    ck = _pack(cand[valid], lvl, m)
                    pos = np.searchsorted(keys, ck)
                    pos = np.minimum(pos, len(keys) - 1)
                    hit = keys[pos] == ck
                    src = gids[valid][hit]
                    dst = pos[hit] + off
                    pairs_a.append(src)
                    pairs_b.append(dst)
            # contacts with the coarser level, seen from the fine side
            if lvl - 1 in self.levels:
                ckeys = self.levels[lvl - 1][1]
                coff = self._offsets[lvl - 1]
                ctop = 1 << (lvl - 1)
                for i in range(m):
                    for d in (-1, 1):
                        if d == -1:
                            mask = coords[:, i] % 2 == 0
                            ci = coords[:, i] // 2 - 1
                        else:
                            mask = (coords[:, i] + 1) % 2 == 0
                            ci = (coords[:, i] + 1) // 2
                        if not mask.any():
                            continue
                        parent = coords[mask] // 2
                        parent[:, i] = ci[mask]
                        valid = (parent[:, i] >= 0) & (parent[:, i] < ctop)
                        if not valid.any():
                            continue
                        pk = _pack(parent[valid], lvl - 1, m)
                        pos = np.searchsorted(ckeys, pk)
                        pos = np.minimum(pos, len(ckeys) - 1)
                        hit = ckeys[pos] == pk
                        src = gids[mask][valid][hit]
                        dst = pos[hit] + coff
                        pairs_a.append(src)
                        pairs_b.append(dst)
        adj: dict[int, np.ndarray] = {}
        if pairs_a:
            a = np.concatenate(pairs_a + pairs_b)
            b = np.concatenate(pairs_b + pairs_a)
            order = np.lexsort((b, a))
            a, b = a[order], b[order]
            starts = np.searchsorted(a, np.arange(self.n_cubes))
            ends = np.searchsorted(a, np.arange(self.n_cubes), side="right")
            for gid in range(self.n_cubes):
                if starts[gid] < ends[gid]:
                    adj[gid] = np.unique(b[starts[gid]:ends[gid]])
        self._adj_cache = adj
        return adj

    def adjacency_pairs(self) -> list[tuple[int, int]]:
        pairs = set()
        for gid, nbrs in self._adjacency().items():
            for h in nbrs:
                pairs.add((min(gid, int(h)), max(gid, int(h))))
        return sorted(pairs)


@dataclass(frozen=True)
class CubeChain:
    gids: tuple[int, ...]

    def __len__(self):
        return len(self.gids)


def build_cover(m: int, punctures, delta: float, gamma: float,
                max_extra_levels: int = 8) -> WhitneyCover:
    """Construct the gamma-doubling ball cover of [-1,1]^m minus the
    delta-neighborhood of the punctures.

    Subdivision keeps splitting the combinatorial k-neighborhood of the
    punctures until that shell either dies out or provably sits strictly
    inside the delta-neighborhood.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if delta >= 1:
        raise ValueError("delta must be < 1")
    if gamma <= 1:
        raise ValueError("gamma must be > 1")
    punctures = tuple(tuple(float(c) for c in p) for p in punctures)
    for p in punctures:
        if len(p) != m:
            raise ValueError(f"puncture {p} has dimension {len(p)}, expected {m}")
    k = neighborhood_k(m, gamma)
    punctures_frac = [tuple(Fraction(c) for c in p) for p in punctures]
    d = len(punctures)
    s_formula = max(1, math.ceil(math.log2(3 * m * gamma / delta))) if d else 1
    hard_cap = s_formula + max_extra_levels

    corner_offsets = np.array(list(product((0, 1), repeat=m)), dtype=np.int64)
    punct_arr = (np.array(punctures, dtype=float).reshape(d, m) if d else np.zeros((0, m)))
    delta2_strict = delta * delta * (1.0 - 1e-12)

    levels: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    level_counts: dict[int, tuple[int, int]] = {}

    def shell_inside_delta(coords: np.ndarray, level: int) -> bool:
        if len(coords) == 0:
            return True
        e = 2.0 / 2**level
        corners = (coords[:, None, :] + corner_offsets[None, :, :]) * e - 1.0
        ok = np.zeros(len(coords), dtype=bool)
        for j in range(d):
            diff = corners - punct_arr[j]
            dist2 = np.einsum("cki,cki->ck", diff, diff).max(axis=1)
            ok |= dist2 < delta2_strict
            if ok.all():
                return True
        return bool(ok.all())

    # level 1: all 2^m cubes of Q
    current = np.array(list(product((0, 1), repeat=m)), dtype=np.int64)
    level = 1
    sigma_final = (np.zeros((0, m), dtype=np.int64), np.zeros(0, dtype=np.uint64))
    sigma_level = 1
    stop_reason = None
    while True:
        lo, hi = _puncture_boxes(punctures_frac, level, k, m) if d else (
            np.zeros((0, m), dtype=np.int64), np.zeros((0, m), dtype=np.int64))
        in_sigma = _chebyshev_within(current, lo, hi, k)
        retained = current[~in_sigma]
        sigma = current[in_sigma]
        level_counts[level] = (len(retained), len(sigma))
        if len(retained):
            levels[level] = _sorted_level(retained, level, m)
        if len(sigma) == 0:
            stop_reason = "shell-empty"
            sigma_level = level
            break
        if shell_inside_delta(sigma, level):
            stop_reason = "shell-inside-delta"
            sigma_final = _sorted_level(sigma, level, m)
            sigma_level = level
            break
        if level >= hard_cap:
            raise CoverBuildError(
                f"shell not contained in the delta-neighborhood by level {level} "
                f"(formula level {s_formula} plus {max_extra_levels} extra)")
        # subdivide the shell
        children = (sigma[:, None, :] * 2 + corner_offsets[None, :, :]).reshape(-1, m)
        current = children
        level += 1

    return WhitneyCover(m, punctures, delta, gamma, k, levels, sigma_final,
                        sigma_level, level_counts, stop_reason, s_formula)


def find_chain(cover: WhitneyCover, v, w) -> CubeChain:
    """Shortest face-adjacency chain of retained cubes from v to w (BFS,
    ties broken toward smaller cube index)."""
    g_start = cover.locate(v)
    if g_start is None:
        raise CoverQueryError(f"point {tuple(v)} is not covered")
    g_end = cover.locate(w)
    if g_end is None:
        raise CoverQueryError(f"point {tuple(w)} is not covered")
    if g_start == g_end:
        return CubeChain((g_start,))
    from collections import deque

    adj = cover._adjacency()
    parent = {g_start: -1}
    queue = deque([g_start])
    while queue:
        g = queue.popleft()
        if g == g_end:
            break
        for h in adj.get(g, ()):
            h = int(h)
            if h not in parent:
                parent[h] = g
                queue.append(h)
    if g_end not in parent:
        raise CoverQueryError("points lie in different components of the cover")
    path = [g_end]
    while path[-1] != g_start:
        path.append(parent[path[-1]])
    return CubeChain(tuple(reversed(path)))


def chain_certificates(cover: WhitneyCover, chain: CubeChain) -> list[dict]:
    """Per-consecutive-pair radius ratios and intersection-ball ratios."""
    out = []
    for g1, g2 in zip(chain.gids, chain.gids[1:]):
        b1, b2 = cover.ball(g1), cover.ball(g2)
        inter = intersection_ball_radius(b1, b2)
        rmin = min(b1.radius, b2.radius)
        out.append({
            "gids": (g1, g2),
            "levels": (cover.cube(g1).level, cover.cube(g2).level),
            "radius_ratio": b2.radius / b1.radius,
            "intersection_radius": inter,
            "intersection_ratio": inter / rmin,
        })
    return out


# -- verification ---------------------------------------------------------


def separation_report(cover: WhitneyCover) -> dict:
    """Exact check that gamma * B misses every puncture, for every retained
    ball.  Float screen with an outward margin; marginal cases re-checked
    in rational arithmetic."""
    if not cover.punctures:
        return {"checked": cover.n_cubes, "violations": 0, "exact_rechecks": 0, "ok": True}
    centers, radii = cover.centers_radii()
    punct = cover._punctures_arr
    g2 = cover.gamma * cover.gamma
    violations = 0
    rechecks = 0
    gamma2 = Fraction(cover.gamma) ** 2
    for j in range(len(punct)):
        diff = centers - punct[j]
        dist2 = np.einsum("ni,ni->n", diff, diff)
        thresh = g2 * radii * radii
        marginal = dist2 <= thresh * (1.0 + 1e-9)
        for idx in np.nonzero(marginal)[0]:
            rechecks += 1
            cube = cover.cube(int(idx))
            e = Fraction(2, 2**cube.level)
            c_frac = [ci * e + e / 2 - 1 for ci in cube.coords]
            p_frac = [Fraction(x) for x in cover.punctures[j]]
            d2 = sum((a - b) ** 2 for a, b in zip(c_frac, p_frac))
            r2 = Fraction(cover.m, 4**cube.level)
            if d2 <= gamma2 * r2:
                violations += 1
    return {"checked": cover.n_cubes, "violations": violations,
            "exact_rechecks": rechecks, "ok": violations == 0}


def coverage_report(cover: WhitneyCover, samples: int = 10_000,
                    rng: np.random.Generator | None = None) -> dict:
    """Every sampled point of Q_delta must lie in a retained cube (hence
    in its circumscribed ball)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    pts = rng.uniform(-1.0, 1.0, size=(samples, cover.m))
    if cover.punctures:
        punct = cover._punctures_arr
        dist2 = ((pts[:, None, :] - punct[None, :, :]) ** 2).sum(axis=2).min(axis=1)
        pts = pts[dist2 >= cover.delta**2]
    located = cover.locate_batch(pts)
    misses = int((located < 0).sum())
    return {"sampled": len(pts), "misses": misses, "ok": misses == 0}


def count_bound_report(cover: WhitneyCover) -> dict:
    """Retained-ball count against d (3 sqrt(m) gamma)^m log2(3 m gamma / delta),
    and the per-level caps."""
    m, k = cover.m, cover.k
    d = len(cover.punctures)
    bound = None
    ok = True
    if d:
        bound = d * (3 * math.sqrt(m) * cover.gamma) ** m * math.log2(
            3 * m * cover.gamma / cover.delta)
        ok = cover.n_cubes <= bound
    per_level_cap = (2 * k + 1) ** m * 2**m * max(d, 1)
    sigma_cap = (2 * k + 1) ** m * max(d, 1)
    level_ok = True
    for lvl, (n_s, n_sigma) in cover.level_counts.items():
        # the puncture box can straddle a grid plane, widening the shell by one
        wide_sigma_cap = (2 * k + 2) ** m * max(d, 1)
        if n_s > (2 * k + 2) ** m * 2**m * max(d, 1) + 2**m or n_sigma > wide_sigma_cap:
            level_ok = False
    return {"count": cover.n_cubes, "bound": bound, "ok": bool(ok),
            "per_level_cap": per_level_cap, "sigma_cap": sigma_cap,
            "levels_ok": level_ok}


def partition_report(cover: WhitneyCover, samples: int = 2000,
                     rng: np.random.Generator | None = None) -> dict:
    """Sampled points of Q lie in exactly one cube interior across the
    retained levels plus the final shell."""
    rng = rng if rng is not None else np.random.default_rng(1)
    pts = rng.uniform(-1.0, 1.0, size=(samples, cover.m))
    bad = 0
    all_levels = dict(cover.levels)
    sig_coords, sig_keys = cover.sigma_final
    for row in pts:
        hits = 0
        for lvl, (coords, keys) in all_levels.items():
            t = (row + 1.0) * (1 << (lvl - 1))
            c = np.floor(t).astype(np.int64)
            if c.min() < 0 or c.max() >= (1 << lvl):
                continue
            key = _pack(c.reshape(1, -1), lvl, cover.m)[0]
            pos = int(np.searchsorted(keys, key))
            if pos < len(keys) and keys[pos] == key:
                hits += 1
        if len(sig_coords):
            lvl = cover.sigma_level
            t = (row + 1.0) * (1 << (lvl - 1))
            c = np.floor(t).astype(np.int64)
            if 0 <= c.min() and c.max() < (1 << lvl):
                key = _pack(c.reshape(1, -1), lvl, cover.m)[0]
                pos = int(np.searchsorted(sig_keys, key))
                if pos < len(sig_keys) and sig_keys[pos] == key:
                    hits += 1
        if hits != 1:
            bad += 1
    return {"sampled": samples, "bad": bad, "ok": bad == 0}


def level_discipline_report(cover: WhitneyCover, limit: int = 300_000) -> dict:
    """No retained cube touches a retained cube two or more levels away."""
    if cover.n_cubes > limit:
        return {"ok": True, "skipped": True}
    lvls = sorted(cover.levels)
    violations = 0
    for li, l_fine in enumerate(lvls):
        coords_f, _ = cover.levels[l_fine]
        for l_coarse in lvls[:li]:
            if l_fine - l_coarse < 2:
                continue
            P = 1 << (l_fine - l_coarse)
            anc = coords_f // P
            for i in range(cover.m):
                minus = coords_f[:, i] % P == 0
                plus = (coords_f[:, i] + 1) % P == 0
                for side, mask in ((-1, minus), (1, plus)):
                    if not mask.any():
                        continue
                    cand = anc[mask].copy()
                    cand[:, i] += side
                    valid = (cand.min(axis=1) >= 0) & (cand.max(axis=1) < (1 << l_coarse))
                    cand = cand[valid]
                    if not len(cand):
                        continue
                    keys = _pack(cand, l_coarse, cover.m)
                    _, ck = cover.levels[l_coarse]
                    pos = np.searchsorted(ck, keys)
                    pos = np.minimum(pos, len(ck) - 1)
                    violations += int((ck[pos] == keys).sum())
    return {"ok": violations == 0, "violations": violations, "skipped": False}


def serialize_cover(cover: WhitneyCover, include_adjacency: bool = True,
                    adjacency_limit: int = 100_000) -> dict:
    """Deterministic document: cubes ordered by (level, lexicographic coords)."""
    cubes = []
    for gid in range(cover.n_cubes):
        cube = cover.cube(gid)
        ball = circumscribed_ball(cube)
        cubes.append({
            "level": cube.level,
            "coords": list(cube.coords),
            "center": list(ball.center),
            "radius": ball.radius,
        })
    doc = {
        "m": cover.m,
        "delta": cover.delta,
        "gamma": cover.gamma,
        "k": cover.k,
        "punctures": [list(p) for p in cover.punctures],
        "stop_reason": cover.stop_reason,
        "cubes": cubes,
    }
    if include_adjacency and cover.n_cubes <= adjacency_limit:
        doc["adjacency"] = [list(p) for p in cover.adjacency_pairs()]
    return doc
