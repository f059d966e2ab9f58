import math

import numpy as np
import pytest

from doublecover.atlas import (
    Atlas,
    AtlasChart,
    AtlasConfig,
    AtlasQueryError,
    FaithfulBudgetError,
    build_atlas,
    certify_edge,
    chain_between,
    chart_count_bound,
    faithful_gamma,
    kobayashi_bound,
    poincare_distance,
    project_to_level_set,
    rho_lower_bound,
    seed_atlas,
    verify_atlas_charts,
)
from doublecover.experiments import (
    hyperbola_poly,
    hyperbola_seed_grid,
    quadric_poly,
)
from doublecover.ift import ImplicitChart, align_frame, verify_chart
from doublecover.polyalg import (
    SingularSet,
    eval_grad,
    gradient_polys,
    normalized,
    singular_set_from_points,
)


def origin_sing(poly):
    return singular_set_from_points(poly, [tuple(0j for _ in range(poly.n))])


class TestConstants:
    def test_faithful_gamma_values(self):
        assert faithful_gamma(2, 2, 1.0) == pytest.approx(38401.0)
        assert faithful_gamma(2, 2, 2.0) == pytest.approx(19201.0)
        # K at its cap n d^4 = 32 cancels M entirely
        assert faithful_gamma(2, 2, 32.0) == pytest.approx(600 * 2 + 1)

    def test_count_bound_constants(self):
        # C1 = (4000*4*32)^4 = 512000^4 and C2 = 6000*8*16 = 768000
        val = chart_count_bound(2, 2, 1.0, 0.5)
        expected = 512000.0**4 * math.log2(768000.0 / 0.5)
        assert val == pytest.approx(expected, rel=1e-12)

    def test_count_bound_halving_delta(self):
        n, d, K = 2, 2, 2.0
        inc = chart_count_bound(n, d, K, 0.25) - chart_count_bound(n, d, K, 0.5)
        assert inc == pytest.approx((4000 * 4 * 32) ** 4 / K**4, rel=1e-12)

    def test_count_bound_clamped(self):
        # degenerate input where the log term goes non-positive
        assert chart_count_bound(2, 2, 2 * 768000.0, 0.9) == 0.0
        assert chart_count_bound(2, 2, 768000.0, 0.999999) >= 0.0


class TestBuildAtlas:
    def test_hyperbola_practical(self):
        eps = 0.1
        poly = hyperbola_poly(eps)
        cfg = AtlasConfig(gamma=2.0, verify_samples=64, line_count=8)
        atlas = build_atlas(poly, 0.0, K=1.0, delta=math.sqrt(2) * eps,
                            config=cfg, sing=origin_sing(poly))
        assert atlas.kappa > 50
        assert all(ac.cert is not None and ac.cert.passed for ac in atlas.charts)
        # practical charts obey both radius caps
        for ac in atlas.charts:
            assert ac.r_full <= 12 * ac.ball_radius + 1e-15
        rep = verify_atlas_charts(atlas, samples=200)
        assert rep["ok"]

    def test_quadric_base_points_near_sphere(self):
        eps = 0.1
        poly = quadric_poly(2)
        cfg = AtlasConfig(gamma=2.0, verify_samples=64, line_count=8,
                          certify_edges=False)
        atlas = build_atlas(poly, eps * eps, K=2.0, delta=eps, config=cfg,
                            sing=origin_sing(poly))
        assert atlas.kappa > 50
        dists = [np.linalg.norm(ac.base_point) for ac in atlas.charts]
        assert min(dists) >= eps - 1e-9
        assert min(dists) <= 3 * eps

    def test_critical_value_rejected(self):
        eps = 0.1
        poly = hyperbola_poly(eps)
        with pytest.raises(ValueError):
            build_atlas(poly, -eps * eps, K=1.0, delta=0.1,
                        config=AtlasConfig(gamma=2.0), sing=origin_sing(poly))

    def test_faithful_budget_error(self):
        eps = 0.1
        poly = hyperbola_poly(eps)
        with pytest.raises(FaithfulBudgetError) as exc:
            build_atlas(poly, 0.0, K=1.0, delta=math.sqrt(2) * eps,
                        config=AtlasConfig(mode="faithful"),
                        sing=origin_sing(poly))
        assert exc.value.gamma == pytest.approx(38401.0)
        assert exc.value.estimate > 1e12
        assert exc.value.count_bound > 0


@pytest.fixture(scope="module")
def seeded_hyperbola():
    eps = 0.1
    poly = hyperbola_poly(eps)
    seeds = hyperbola_seed_grid(eps, dt=0.125, dtheta=0.125, theta_band=0.3)
    return seed_atlas(poly, 0.0, seeds, sing=origin_sing(poly), seed=0)


class TestSeededAtlas:
    def test_charts_and_edges_exist(self, seeded_hyperbola):
        atlas = seeded_hyperbola
        assert atlas.kappa >= 100
        assert len(atlas.edges) >= atlas.kappa  # grid graph: >= one edge per chart
        assert all(c.rho > 0 for c in atlas.edges.values())
        assert all(ac.cert.passed for ac in atlas.charts)

    def test_chain_between_endpoints(self, seeded_hyperbola):
        eps = 0.1
        chain = chain_between(seeded_hyperbola, (1.0, eps * eps), (eps * eps, 1.0))
        assert len(chain) > 5
        assert all(r > 0 for r in chain.rhos)

    def test_single_chart_chain(self, seeded_hyperbola):
        atlas = seeded_hyperbola
        base = atlas.charts[0].base_point
        chain = chain_between(atlas, base, base)
        assert len(chain) == 1

    def test_off_surface_point_rejected(self, seeded_hyperbola):
        with pytest.raises(AtlasQueryError):
            chain_between(seeded_hyperbola, (1.0, 1.0), (0.1, 0.1))

    def test_chain_length_grows_as_eps_shrinks(self):
        lengths = []
        for eps in (0.1, 0.05, 0.01):
            poly = hyperbola_poly(eps)
            seeds = hyperbola_seed_grid(eps, dt=0.125, dtheta=0.125, theta_band=0.25)
            atlas = seed_atlas(poly, 0.0, seeds, sing=origin_sing(poly), seed=0)
            chain = chain_between(atlas, (1.0, eps * eps), (eps * eps, 1.0))
            lengths.append(len(chain))
        assert lengths[0] < lengths[1] < lengths[2]


class TestRho:
    def test_same_chart_is_one(self, seeded_hyperbola):
        assert rho_lower_bound(seeded_hyperbola, 3, 3) == 1.0

    def test_disjoint_charts_zero(self, seeded_hyperbola):
        atlas = seeded_hyperbola
        bases = np.stack([ac.base_point for ac in atlas.charts])
        d = np.linalg.norm(bases - bases[0], axis=1)
        far = int(np.argmax(d))
        assert rho_lower_bound(atlas, 0, far) == 0.0

    def test_faithful_scale_edge_exceeds_tenth(self):
        # synthetic faithful-mode geometry: r_full = 12 R charts on a locally
        # flat piece of the unit circle quadric, balls with radius ratio 2
        # and worst-case face-adjacent center distance sqrt(m+8)/2^(s+1)
        poly, c = normalized(quadric_poly(2), 1.0)
        scale = 1e-4
        R1, R2 = 2 * scale, scale
        d12 = math.sqrt(12) / 2 * scale  # sqrt(m+8)/2^(s+1) with m=4
        c1 = np.array([0.0, 1.0], dtype=complex)
        c2 = c1 + np.array([d12, 0.0], dtype=complex)  # tangent direction
        charts = []
        grads = gradient_polys(poly)
        for idx, (center, R) in enumerate(((c1, R1), (c2, R2))):
            base, ok = project_to_level_set(poly, c, center)
            assert ok
            _, g = eval_grad(poly, base)
            eta = float(np.linalg.norm(g))
            chart = ImplicitChart(align_frame(base, g), 12 * R, poly, c, eta, 32.0)
            cert = verify_chart(chart, samples=300, rng=np.random.default_rng(idx))
            assert cert.passed  # the 1/49 bound holds at faithful scale
            charts.append(AtlasChart(idx, base, chart, 12 * R, eta,
                                     ball_center=center, ball_radius=R, cert=cert))
        atlas = Atlas(poly, c, "faithful", charts, {}, origin_sing(quadric_poly(2)),
                      AtlasConfig(mode="faithful"))
        cert = certify_edge(atlas, 0, 1)
        assert cert.rho >= 1.0 / 10.0
        # the chart-count bound is astronomically loose; asserted anyway
        assert atlas.kappa <= chart_count_bound(2, 2, 2.0, 1e-4)

    def test_edges_carry_witnesses(self, seeded_hyperbola):
        for (i, j), cert in list(seeded_hyperbola.edges.items())[:10]:
            assert cert.witness is not None
            assert cert.sigma > 0


class TestKobayashi:
    def test_poincare_closed_form(self):
        assert poincare_distance(0.0, 0.3) == pytest.approx(math.log(1.3 / 0.7))
        assert poincare_distance(0.3j, 0.3j) == 0.0

    def test_bound_is_three_times_length(self, seeded_hyperbola):
        eps = 0.1
        res = kobayashi_bound(seeded_hyperbola, (1.0, eps * eps), (eps * eps, 1.0))
        assert res.bound == 3.0 * len(res.chain)
        assert res.mechanism_ok
        for link in res.links:
            assert link.mod_a <= 1 / 3 + 1e-12
            assert link.mod_b <= 1 / 3 + 1e-12
            assert link.distance <= 1.5 + 1e-12

    def test_same_point_zero_links(self, seeded_hyperbola):
        atlas = seeded_hyperbola
        base = atlas.charts[0].base_point
        res = kobayashi_bound(atlas, base, base)
        assert res.bound == 3.0
        assert res.links[0].distance == pytest.approx(0.0, abs=1e-12)
