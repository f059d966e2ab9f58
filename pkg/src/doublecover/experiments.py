"""Built-in example surfaces, samplers, and experiment runners for the CLI.

The hyperbola z1*z2 = eps^2 is parameterized as (eps e^w, eps e^-w) with
w = t + i theta; |t| <= log(1/eps) keeps the point inside the polydisk
{|z1| <= 1, |z2| <= 1} used as the compact domain G for doubling-constant
measurements (on that domain max|z2| is exactly 1, attained at |z2| = 1).
"""

from __future__ import annotations

import math

import numpy as np

from .polyalg import PolyC


def hyperbola_poly(eps: float) -> PolyC:
    """z1*z2 - eps^2 in two variables."""
    return PolyC(2, {(1, 1): 1.0, (0, 0): -eps * eps})


def quadric_poly(n: int) -> PolyC:
    """Sum of squares in n variables."""
    return PolyC(n, {tuple(2 if j == i else 0 for j in range(n)): 1.0 for i in range(n)})


def product_factor_poly(d: int) -> PolyC:
    """z(z-1)...(z-(d-1)) * y(y-1)...(y-(d-1)): a (d-1)^2 grid of interior
    critical points between the factor roots."""
    if d < 2:
        raise ValueError("need d >= 2")
    coeffs = np.array([1.0 + 0j])
    for r in range(d):
        coeffs = np.convolve(coeffs, np.array([-float(r), 1.0], dtype=complex))
    terms: dict[tuple[int, int], complex] = {}
    for i, ci in enumerate(coeffs):
        for j, cj in enumerate(coeffs):
            c = ci * cj
            if c != 0:
                terms[(i, j)] = c
    return PolyC(2, terms)


# -- hyperbola ------------------------------------------------------------


def hyperbola_point(eps: float, w: complex) -> np.ndarray:
    """(eps e^w, eps e^-w) on {z1 z2 = eps^2}."""
    return np.array([eps * np.exp(w), eps * np.exp(-w)], dtype=complex)


def hyperbola_seed_grid(eps: float, dt: float = 0.125, dtheta: float = 0.125,
                        theta_band: float | None = None,
                        t_margin: float = 0.0) -> np.ndarray:
    """Base points on the hyperbola covering |t| <= log(1/eps) - t_margin,
    full angular range (or a band around theta = 0)."""
    T = math.log(1.0 / eps) - t_margin
    nt = max(2, int(math.ceil(2 * T / dt)) + 1)
    ts = np.linspace(-T, T, nt)
    if theta_band is None:
        ntheta = max(4, int(math.ceil(2 * math.pi / dtheta)))
        thetas = np.linspace(0.0, 2 * math.pi, ntheta, endpoint=False)
    else:
        ntheta = max(1, int(math.ceil(2 * theta_band / dtheta)) + 1)
        thetas = np.linspace(-theta_band, theta_band, ntheta)
    return np.array([hyperbola_point(eps, t + 1j * th) for t in ts for th in thetas])


def hyperbola_g_sampler(eps: float):
    """Sampler of G = {z1 z2 = eps^2, |z1| <= 1, |z2| <= 1}, mixing uniform
    interior points with the extremal families |z2| = 1 and the shrinking
    loop |z1| = |z2| = eps (which realizes the distance sqrt(2) eps to 0)."""
    T = math.log(1.0 / eps)

    def sample(rng: np.random.Generator, count: int) -> np.ndarray:
        n_loop = count // 8
        n_edge = count // 8
        n_bulk = count - n_loop - 2 * n_edge
        t = rng.uniform(-T, T, size=n_bulk)
        th = rng.uniform(0, 2 * math.pi, size=n_bulk)
        bulk = np.stack([eps * np.exp(t + 1j * th), eps * np.exp(-t - 1j * th)], axis=1)
        th = rng.uniform(0, 2 * math.pi, size=n_loop)
        loop = np.stack([eps * np.exp(1j * th), eps * np.exp(-1j * th)], axis=1)
        th = rng.uniform(0, 2 * math.pi, size=n_edge)
        hi = np.stack([eps * eps * np.exp(1j * th), np.exp(-1j * th)], axis=1)  # |z2| = 1
        lo = np.stack([np.exp(1j * th), eps * eps * np.exp(-1j * th)], axis=1)  # |z1| = 1
        return np.concatenate([bulk, loop, hi, lo])

    return sample


def hyperbola_omega_sampler(eps: float, radius: float = 0.5):
    """Sampler of Omega = {|z1| >= radius} inside G; includes the boundary
    circle |z1| = radius where |z2| attains its maximum eps^2 / radius."""
    T = math.log(1.0 / eps)
    t_min = math.log(radius / eps)

    def sample(rng: np.random.Generator, count: int) -> np.ndarray:
        n_edge = count // 4
        n_bulk = count - n_edge
        t = rng.uniform(t_min, T, size=n_bulk)
        th = rng.uniform(0, 2 * math.pi, size=n_bulk)
        bulk = np.stack([eps * np.exp(t + 1j * th), eps * np.exp(-t - 1j * th)], axis=1)
        th = rng.uniform(0, 2 * math.pi, size=n_edge)
        edge = np.stack([radius * np.exp(1j * th),
                         (eps * eps / radius) * np.exp(-1j * th)], axis=1)
        return np.concatenate([bulk, edge])

    return sample


# -- quadrics --------------------------------------------------------------


def quadric_g_sampler(n: int, eps: float):
    """Sampler of {sum z_j^2 = eps^2} near the cube, mixing projected random
    points with the real eps-sphere (where the distance eps to the origin is
    attained exactly)."""
    from .atlas import project_to_level_set
    from .polyalg import complexify, realify

    poly = quadric_poly(n)

    def sample(rng: np.random.Generator, count: int) -> np.ndarray:
        n_sphere = count // 4
        n_bulk = count - n_sphere
        raw = complexify(rng.uniform(-1, 1, size=(n_bulk, 2 * n)))
        landed, ok = project_to_level_set(poly, eps * eps, raw)
        landed = landed[ok & (np.abs(realify(landed)).max(axis=1) <= 1.0)]
        u = rng.normal(size=(n_sphere, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        sphere = (eps * u).astype(complex)
        return np.concatenate([landed, sphere])

    return sample



# -- experiment runners ------------------------------------------------------


def run_cover_cube(m: int, punctures, delta: float, gamma: float,
                   seed: int = 0, samples: int = 10_000):
    """Build a punctured-cube cover and run its invariant suite."""
    from . import whitney
    from .report import ExperimentReport

    report = ExperimentReport(
        "cover-cube",
        {"m": m, "punctures": [list(p) for p in punctures], "delta": delta,
         "gamma": gamma},
        seed)
    cover = whitney.build_cover(m, punctures, delta, gamma)
    for lvl in sorted(cover.level_counts):
        n_s, n_sigma = cover.level_counts[lvl]
        report.rows.append({"level": lvl, "retained": n_s, "shell": n_sigma})
    sep = whitney.separation_report(cover)
    report.check("separation-exact", sep["ok"],
                 f"violations={sep['violations']} rechecks={sep['exact_rechecks']}")
    cov = whitney.coverage_report(cover, samples=samples,
                                  rng=np.random.default_rng(seed))
    report.check("coverage", cov["ok"], f"misses={cov['misses']}/{cov['sampled']}")
    cb = whitney.count_bound_report(cover)
    if cb["bound"] is not None:
        report.check("count-bound", cb["ok"],
                     f"count={cb['count']} bound={cb['bound']:.1f}")
    disc = whitney.level_discipline_report(cover)
    if not disc.get("skipped"):
        report.check("level-discipline", disc["ok"],
                     f"violations={disc.get('violations', 0)}")
    part = whitney.partition_report(cover, samples=min(samples, 2000),
                                    rng=np.random.default_rng(seed + 1))
    report.check("disjoint-partition", part["ok"], f"bad={part['bad']}")
    report.extra["count"] = cover.n_cubes
    report.extra["k"] = cover.k
    report.extra["stop_reason"] = cover.stop_reason
    if m == 2 and cover.n_cubes <= 4000:
        centers, radii = cover.centers_radii()
        report.extra["ball_layout"] = {
            "balls": [[float(c[0]), float(c[1]), float(r)]
                      for c, r in zip(centers, radii)],
            "punctures": [list(p) for p in punctures],
        }
    return report


def run_chain(m: int, punctures, delta: float, gamma: float, v, w, seed: int = 0):
    """Cover chain between two points with per-step certificates."""
    from . import whitney
    from .report import ExperimentReport

    report = ExperimentReport(
        "chain",
        {"m": m, "punctures": [list(p) for p in punctures], "delta": delta,
         "gamma": gamma, "from": list(v), "to": list(w)},
        seed)
    cover = whitney.build_cover(m, punctures, delta, gamma)
    chain = whitney.find_chain(cover, v, w)
    certs = whitney.chain_certificates(cover, chain)
    for cert in certs:
        report.rows.append({
            "levels": f"{cert['levels'][0]}-{cert['levels'][1]}",
            "radius_ratio": cert["radius_ratio"],
            "intersection_ratio": cert["intersection_ratio"],
        })
    report.extra["chain_length"] = len(chain)
    ratios_ok = all(c["radius_ratio"] in (0.5, 1.0, 2.0) for c in certs)
    report.check("radius-ratios", ratios_ok, "every consecutive ratio in {1/2,1,2}")
    if m >= 3:
        worst = min((c["intersection_ratio"] for c in certs), default=1.0)
        report.check("intersection-third", worst >= 1 / 3 - 1e-12,
                     f"worst={worst:.4f}")
    elif m == 2:
        cross = [c["intersection_ratio"] for c in certs
                 if c["levels"][0] != c["levels"][1]]
        same = [c["intersection_ratio"] for c in certs
                if c["levels"][0] == c["levels"][1]]
        if cross:
            report.check("intersection-third-cross-level",
                         min(cross) >= 1 / 3 - 1e-12, f"worst={min(cross):.4f}")
        if same:
            report.check("intersection-same-level",
                         min(same) >= 1 - 1 / math.sqrt(2) - 1e-12,
                         f"worst={min(same):.4f} (1/3 is unattainable at m=2)")
    return report


def _hyperbola_atlas(eps: float, gamma: float, seed: int, verify_samples: int = 32):
    from .atlas import AtlasConfig, build_atlas
    from .polyalg import singular_set_from_points

    poly = hyperbola_poly(eps)
    sing = singular_set_from_points(poly, [(0j, 0j)])
    cfg = AtlasConfig(gamma=gamma, verify_samples=verify_samples, line_count=4,
                      certify_edges=False, seed=seed)
    return build_atlas(poly, 0.0, K=1.0, delta=math.sqrt(2) * eps,
                       config=cfg, sing=sing)


def run_hyperbola(eps_list, gamma: float = 2.0, seed: int = 0,
                  samples: int = 4096, verify_samples: int = 32):
    """Atlas scaling, measured doubling constant, and chart-count lower
    bound for the hyperbola family."""
    from .propagate import empirical_dc, kappa_lower
    from .report import ExperimentReport, fit_affine

    for eps in eps_list:
        if not 0 < eps < 0.5:
            raise ValueError(f"eps={eps} outside (0, 1/2): Omega degenerates")
    report = ExperimentReport(
        "hyperbola", {"eps_list": list(eps_list), "gamma": gamma,
                      "samples": samples}, seed)
    theta_grid = np.linspace(0, 2 * math.pi, 256, endpoint=False)
    for eps in eps_list:
        atlas = _hyperbola_atlas(eps, gamma, seed, verify_samples)
        cert_fail = sum(1 for ac in atlas.charts
                        if ac.cert is None or not ac.cert.passed)
        dc = empirical_dc(lambda z: z[..., 1], hyperbola_g_sampler(eps),
                          hyperbola_omega_sampler(eps), count=samples,
                          rng=np.random.default_rng(seed))
        expected = 1.0 / (2 * eps * eps)
        loop = np.stack([eps * np.exp(1j * theta_grid),
                         eps * np.exp(-1j * theta_grid)], axis=1)
        dist = float(np.linalg.norm(loop, axis=1).min())
        dist_err = abs(dist - math.sqrt(2) * eps)
        klow = kappa_lower(dc, 0.1, 2)
        report.rows.append({
            "eps": eps, "log2_inv_eps": math.log2(1.0 / eps),
            "kappa": atlas.kappa, "dc_measured": dc, "dc_expected": expected,
            "kappa_lower": klow, "dist_err": dist_err,
            "chart_failures": cert_fail,
        })
        report.check(f"dc-within-5%[eps={eps:g}]",
                     abs(dc - expected) <= 0.05 * expected,
                     f"measured={dc:.4g} expected={expected:.4g}")
        report.check(f"distance-sqrt2-eps[eps={eps:g}]", dist_err <= 1e-10,
                     f"err={dist_err:.2e}")
        report.check(f"kappa-lower-below-kappa[eps={eps:g}]",
                     klow <= atlas.kappa, f"lower={klow:.3f} kappa={atlas.kappa}")
        report.check(f"charts-verified[eps={eps:g}]", cert_fail == 0,
                     f"failures={cert_fail}/{atlas.kappa}")
    if len(report.rows) >= 3:
        fit = fit_affine([r["log2_inv_eps"] for r in report.rows],
                         [r["kappa"] for r in report.rows])
        report.extra["kappa_fit"] = fit
        report.check("kappa-affine-fit", fit["r2"] >= 0.99,
                     f"R2={fit['r2']:.5f} slope={fit['slope']:.1f}")
        lfit = fit_affine([r["log2_inv_eps"] for r in report.rows],
                          [r["kappa_lower"] for r in report.rows])
        report.extra["kappa_lower_fit"] = lfit
        report.check("kappa-lower-affine", lfit["r2"] >= 0.99,
                     f"R2={lfit['r2']:.5f}")
    return report


def run_quadric(n: int, eps_list, gamma: float = 2.0, seed: int = 0,
                samples: int = 4096, verify_samples: int = 32):
    """Distance geometry and atlas scaling for sum-of-squares level sets."""
    from .atlas import AtlasConfig, build_atlas
    from .polyalg import singular_set_from_points
    from .report import ExperimentReport, fit_affine

    if n not in (2, 3):
        raise ValueError(f"n={n} unsupported (need 2 or 3)")
    report = ExperimentReport(
        "quadric", {"n": n, "eps_list": list(eps_list), "gamma": gamma}, seed)
    poly = quadric_poly(n)
    sing = singular_set_from_points(poly, [tuple(0j for _ in range(n))])
    for eps in eps_list:
        sampler = quadric_g_sampler(n, eps)
        pts = sampler(np.random.default_rng(seed), samples)
        norms = np.linalg.norm(pts, axis=1)
        dist = float(norms.min())
        dist_err = abs(dist - eps)
        below = int((norms < eps - 1e-10).sum())
        row = {"eps": eps, "log2_inv_eps": math.log2(1.0 / eps),
               "dist_sampled": dist, "dist_err": dist_err}
        report.check(f"distance-eps[eps={eps:g}]",
                     dist_err <= 1e-10 and below == 0,
                     f"err={dist_err:.2e} below={below}")
        if n == 2 or eps >= 0.2:
            cfg = AtlasConfig(gamma=gamma, verify_samples=verify_samples,
                              line_count=4, certify_edges=False, seed=seed)
            atlas = build_atlas(poly, eps * eps, K=2.0, delta=eps, config=cfg,
                                sing=sing)
            cert_fail = sum(1 for ac in atlas.charts
                            if ac.cert is None or not ac.cert.passed)
            row["kappa"] = atlas.kappa
            report.check(f"charts-verified[eps={eps:g}]", cert_fail == 0,
                         f"failures={cert_fail}/{atlas.kappa}")
        report.rows.append(row)
    kappa_rows = [r for r in report.rows if "kappa" in r]
    if len(kappa_rows) >= 3:
        fit = fit_affine([r["log2_inv_eps"] for r in kappa_rows],
                         [r["kappa"] for r in kappa_rows])
        report.extra["kappa_fit"] = fit
        report.check("kappa-affine-fit", fit["r2"] >= 0.99,
                     f"R2={fit['r2']:.5f}")
    return report


def interior_critical_grid(d: int) -> list[tuple[float, float]]:
    """The (d-1)^2 critical points of z(z-1)...(z-(d-1)) * y(...) off the
    zero set: products of the factor-polynomial's critical abscissas."""
    coeffs = np.array([1.0])
    for r in range(d):
        coeffs = np.convolve(coeffs, np.array([1.0, -float(r)]))
    dcoeffs = np.polyder(coeffs)
    roots = np.sort(np.roots(dcoeffs).real)
    return [(float(x), float(y)) for x in roots for y in roots]


def run_product(d: int, eps_list, gamma: float = 1.5, seed: int = 0,
                samples: int = 4000):
    """Cover scaling for the product polynomial's critical grid inside the
    size-(d+1) cube, rescaled to the unit cube."""
    from . import whitney
    from .report import ExperimentReport

    if d < 2 or d > 4:
        raise ValueError(f"d={d} outside the supported range 2..4")
    report = ExperimentReport(
        "product", {"d": d, "eps_list": list(eps_list), "gamma": gamma}, seed)
    grid = interior_critical_grid(d)
    report.extra["puncture_count"] = len(grid)
    report.check("puncture-count", len(grid) == (d - 1) ** 2,
                 f"{len(grid)} vs (d-1)^2={(d - 1) ** 2}")
    center, half = (d - 1) / 2.0, (d + 1) / 2.0
    punctures = [((x - center) / half, 0.0, (y - center) / half, 0.0)
                 for x, y in grid]
    ratios = []
    for eps in eps_list:
        delta = eps / half
        cover = whitney.build_cover(4, punctures, delta, gamma)
        sep = whitney.separation_report(cover)
        report.check(f"separation[eps={eps:g}]", sep["ok"],
                     f"violations={sep['violations']}")
        ratio = cover.n_cubes / math.log2(1.0 / delta)
        ratios.append(ratio)
        report.rows.append({"eps": eps, "delta": delta,
                            "log2_inv_delta": math.log2(1.0 / delta),
                            "count": cover.n_cubes, "ratio": ratio})
    if len(ratios) >= 2:
        mean = sum(ratios) / len(ratios)
        spread = max(abs(r - mean) / mean for r in ratios)
        report.check("ratio-stable-15%", spread <= 0.15,
                     f"spread={spread:.3f} mean={mean:.1f}")
    return report


def run_doubling_bound(eps: float, d1: int, w: complex, omega_radius: float = 0.5,
                       dt: float = 0.125, seed: int = 0, samples: int = 2048):
    """Chain-propagated bound at a point of the hyperbola, checked against
    sampled doubling ratios of random restricted polynomials."""
    from .atlas import seed_atlas
    from .polyalg import PolyC, singular_set_from_points
    from .propagate import DomainSpec, ModulusBound, Propagator, empirical_dc
    from .report import ExperimentReport
    from .valency import DoublingParams, bezout_valency

    poly = hyperbola_poly(eps)
    sing = singular_set_from_points(poly, [(0j, 0j)])
    seeds = hyperbola_seed_grid(eps, dt=dt, dtheta=dt)
    atlas = seed_atlas(poly, 0.0, seeds, sing=sing, seed=seed)
    omega = DomainSpec("omega", [ModulusBound(0, lo=omega_radius)],
                       hyperbola_omega_sampler(eps, omega_radius))
    p = bezout_valency(2, d1)
    params = DoublingParams(p=p)
    prop = Propagator(atlas, omega, params, rng=np.random.default_rng(seed),
                      samples=samples)
    z = hyperbola_point(eps, w)
    res = prop.bound_at(z)
    report = ExperimentReport(
        "doubling-bound",
        {"eps": eps, "d1": d1, "p": p, "w": complex(w),
         "omega_radius": omega_radius, "kappa": atlas.kappa}, seed)
    report.rows = [dict(edge=list(b["edge"]), rho=b["rho"],
                        log_contribution=b["log_contribution"])
                   for b in res.breakdown]
    report.extra["log_bound"] = res.log_bound
    report.extra["chain"] = list(res.chain)
    report.extra["chain_length"] = len(res.chain)
    rng = np.random.default_rng(seed + 1)
    o_pts = omega.sample(rng, samples)
    sound = True
    worst = -math.inf
    for _ in range(16):
        coeffs = {}
        for a in range(d1 + 1):
            for b in range(d1 + 1 - a):
                coeffs[(a, b)] = complex(rng.normal(), rng.normal())
        S = PolyC(2, coeffs)
        lhs = math.log(max(abs(S.eval(z)), 1e-300)) - math.log(
            np.abs(S.eval(o_pts)).max())
        worst = max(worst, lhs - res.log_bound)
        sound &= lhs <= res.log_bound + 1e-9
    report.check("bound-dominates-sampled-ratios", sound,
                 f"worst log gap={worst:.3f}")
    report.check("witness-reproducible",
                 abs(res.recompute_log() - res.log_bound)
                 <= 1e-12 * max(1.0, abs(res.log_bound)), "")
    return report


def run_cover_hypersurface(poly_text: str, n: int, level: complex, K: float,
                           delta: float, mode: str = "practical",
                           gamma: float | None = None, seed: int = 0,
                           samples: int = 2000, verify_samples: int = 64):
    """Build an atlas for an arbitrary polynomial level set."""
    from .atlas import AtlasConfig, FaithfulBudgetError, build_atlas, serialize_atlas
    from .polyalg import parse_poly
    from .report import ExperimentReport

    poly = parse_poly(poly_text, n)
    report = ExperimentReport(
        "cover-hypersurface",
        {"poly": poly_text, "n": n, "level": complex(level), "K": K,
         "delta": delta, "mode": mode, "gamma": gamma}, seed)
    cfg = AtlasConfig(mode=mode, gamma=gamma, verify_samples=verify_samples,
                      seed=seed)
    try:
        atlas = build_atlas(poly, level, K=K, delta=delta, config=cfg)
    except FaithfulBudgetError as exc:
        report.extra["faithful_executed"] = False
        report.extra["faithful_gamma"] = exc.gamma
        report.extra["faithful_cube_estimate"] = exc.estimate
        report.extra["chart_count_bound"] = exc.count_bound
        report.check("faithful-budget-reported", True,
                     f"estimate={exc.estimate:.3e} cubes; bound {exc.count_bound:.3e}")
        return report
    cert_fail = sum(1 for ac in atlas.charts
                    if ac.cert is None or not ac.cert.passed)
    report.extra["kappa"] = atlas.kappa
    report.extra["edges"] = len(atlas.edges)
    report.extra["atlas"] = serialize_atlas(atlas) if atlas.kappa <= 2000 else None
    report.check("charts-verified", cert_fail == 0,
                 f"failures={cert_fail}/{atlas.kappa}")
    for ac in atlas.charts[: min(len(atlas.charts), 50)]:
        report.rows.append({"chart": ac.index, "eta": ac.eta,
                            "r_full": ac.r_full,
                            "max_slope": ac.cert.max_slope if ac.cert else None})
    return report


def run_verify(seed: int = 0, samples: int = 4000):
    """Quick cross-module invariant battery."""
    from itertools import permutations

    from . import whitney
    from .atlas import kobayashi_bound, seed_atlas
    from .polyalg import singular_set_from_points
    from .propagate import DomainSpec, ModulusBound, Propagator
    from .report import ExperimentReport
    from .valency import DoublingParams, cp_constant, eulerian_row, polylog_neg

    report = ExperimentReport("verify", {"samples": samples}, seed)
    rng = np.random.default_rng(seed)

    cover = whitney.build_cover(2, [(0.0, 0.0), (0.5, 0.25)], 2**-5, 2.0)
    report.check("whitney-separation", whitney.separation_report(cover)["ok"], "")
    report.check("whitney-coverage",
                 whitney.coverage_report(cover, samples=samples, rng=rng)["ok"], "")
    report.check("whitney-count",
                 whitney.count_bound_report(cover)["ok"], "")

    row6 = eulerian_row(6)
    brute = [0] * 6
    for perm in permutations(range(6)):
        brute[sum(1 for i in range(5) if perm[i] > perm[i + 1])] += 1
    report.check("eulerian-row-6", list(row6) == brute, "")
    report.check("polylog-li2", abs(polylog_neg(2, 0.5) - 6.0) < 1e-12, "")
    report.check("cp-example", abs(cp_constant(DoublingParams(p=1), 0.5, 0.25) - 36.0) < 1e-12, "")

    eps = 0.1
    poly = hyperbola_poly(eps)
    sing = singular_set_from_points(poly, [(0j, 0j)])
    seeds = hyperbola_seed_grid(eps, dt=0.125, dtheta=0.125, theta_band=0.3)
    atlas = seed_atlas(poly, 0.0, seeds, sing=sing, seed=seed)
    report.check("atlas-charts-verified",
                 all(ac.cert.passed for ac in atlas.charts),
                 f"kappa={atlas.kappa}")
    omega = DomainSpec("omega", [ModulusBound(0, lo=0.5)],
                       hyperbola_omega_sampler(eps))
    prop = Propagator(atlas, omega, DoublingParams(p=2), rng=rng)
    z = hyperbola_point(eps, 0.0)
    res = prop.bound_at(z)
    o_pts = omega.sample(rng, 2048)
    lhs = math.log(abs(z[1])) - math.log(np.abs(o_pts[:, 1]).max())
    report.check("chain-bound-sound", lhs <= res.log_bound + 1e-9,
                 f"lhs={lhs:.3f} bound={res.log_bound:.3f}")
    kob = kobayashi_bound(atlas, hyperbola_point(eps, 1.0),
                          hyperbola_point(eps, -1.0))
    report.check("kobayashi-mechanism", kob.mechanism_ok,
                 f"bound={kob.bound}")
    return report
