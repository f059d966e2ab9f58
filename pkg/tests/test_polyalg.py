import numpy as np
import pytest

from doublecover.polyalg import (
    DegenerateSingularityError,
    PolyC,
    PolyParseError,
    complexify,
    estimate_gradient_ratio,
    eval_grad,
    find_singular_points,
    hessian_at,
    l1_norm,
    markov_bound,
    parse_poly,
    poly_from_records,
    poly_to_records,
    realify,
    restrict_to_line,
    singular_set_from_points,
)


def hyperbola(eps):
    return PolyC(2, {(1, 1): 1.0, (0, 0): -eps * eps})


def quadric(n):
    terms = {tuple(2 if j == i else 0 for j in range(n)): 1.0 for i in range(n)}
    return PolyC(n, terms)


def random_poly(rng, n, d):
    terms = {}
    for _ in range(rng.integers(2, 7)):
        exps = tuple(int(e) for e in rng.integers(0, d + 1, size=n))
        if sum(exps) > d:
            continue
        terms[exps] = complex(rng.normal(), rng.normal())
    terms.setdefault((0,) * n, 0.3 + 0.1j)
    terms.setdefault((1,) + (0,) * (n - 1), 0.7 - 0.2j)
    return PolyC(n, terms)


class TestParse:
    def test_two_terms(self):
        p = parse_poly("z1*z2 - 0.01", n=2)
        assert p.terms == {(1, 1): 1.0 + 0j, (0, 0): -0.01 + 0j}
        assert p.degree == 2

    def test_empty_is_error(self):
        with pytest.raises(PolyParseError):
            parse_poly("", n=2)

    def test_complex_coefficient(self):
        p = parse_poly("(1+2i)*z1^2", n=2)
        assert p.terms == {(2, 0): 1 + 2j}
        assert p.degree == 2

    def test_variable_out_of_range(self):
        with pytest.raises(PolyParseError):
            parse_poly("z3 + 1", n=2)

    def test_negative_exponent(self):
        with pytest.raises(PolyParseError):
            parse_poly("z1^-2", n=2)

    def test_trailing_operator(self):
        with pytest.raises(PolyParseError):
            parse_poly("z1 +", n=2)

    def test_quadric_text(self):
        p = parse_poly("z1^2 + z2^2 + z3^2", n=3)
        assert p == quadric(3)

    def test_pure_imaginary_and_signs(self):
        p = parse_poly("-(2i)*z2 + 1.5e-1", n=2)
        assert p.terms[(0, 1)] == -2j
        assert p.terms[(0, 0)] == pytest.approx(0.15)

    def test_records_roundtrip(self):
        p = parse_poly("z1*z2 - 0.01", n=2)
        q = poly_from_records(poly_to_records(p), n=2)
        assert p == q


class TestNormsAndEval:
    def test_l1_hyperbola(self):
        assert l1_norm(hyperbola(0.1)) == pytest.approx(1.01)

    def test_l1_zero(self):
        assert l1_norm(PolyC(2, {})) == 0.0

    def test_l1_quadric3(self):
        assert l1_norm(quadric(3)) == pytest.approx(3.0)

    def test_gradient_hyperbola(self):
        rng = np.random.default_rng(1)
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        val, g = eval_grad(hyperbola(0.1), z)
        assert val == pytest.approx(z[0] * z[1] - 0.01)
        assert g[0] == pytest.approx(z[1])
        assert g[1] == pytest.approx(z[0])

    def test_gradient_quadric(self):
        rng = np.random.default_rng(2)
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        _, g = eval_grad(quadric(3), z)
        assert np.allclose(g, 2 * z)

    def test_gradient_constant(self):
        _, g = eval_grad(PolyC(2, {(0, 0): 3.0}), np.array([0.2 + 1j, -0.4]))
        assert np.allclose(g, 0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(20):
            n = int(rng.integers(1, 4))
            p = random_poly(rng, n, int(rng.integers(1, 6)))
            z = rng.normal(size=n) * 0.5 + 1j * rng.normal(size=n) * 0.5
            _, g = eval_grad(p, z)
            for i in range(n):
                e = np.zeros(n, dtype=complex)
                e[i] = h
                fd = (p.eval(z + e) - p.eval(z - e)) / (2 * h)
                scale = max(1.0, abs(g[i]))
                assert abs(fd - g[i]) / scale < 1e-6

    def test_vectorized_eval(self):
        p = hyperbola(0.1)
        z = np.array([[0.5, 0.2], [1j, -1j]], dtype=complex)
        vals = p.eval(z)
        assert vals.shape == (2,)
        assert vals[1] == pytest.approx(1 - 0.01)


class TestMarkov:
    def test_hyperbola_normalized(self):
        p, _ = __import__("doublecover.polyalg", fromlist=["normalized"]).normalized(hyperbola(0.0))
        assert markov_bound(p) == pytest.approx(32.0)

    def test_quadric_normalized(self):
        p = quadric(2).scaled(0.5)
        assert markov_bound(p) == pytest.approx(32.0)

    def test_linear(self):
        p = PolyC(3, {(1, 0, 0): 0.5, (0, 1, 0): 0.25, (0, 0, 1): 0.25})
        assert markov_bound(p) == pytest.approx(3.0)

    def test_zero_poly_error(self):
        with pytest.raises(ValueError):
            markov_bound(PolyC(2, {}))

    def test_second_partials_never_exceed_bound(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            n = int(rng.integers(2, 4))
            p = random_poly(rng, n, int(rng.integers(2, 6)))
            s = l1_norm(p)
            p = p.scaled(1.0 / s)
            M = markov_bound(p)
            reals = rng.uniform(-1, 1, size=(1000, 2 * n))
            z = complexify(reals)
            from doublecover.polyalg import gradient_polys, partial_derivative

            grads = gradient_polys(p)
            for i in range(n):
                for j in range(n):
                    vals = partial_derivative(grads[i], j).eval(z)
                    assert np.abs(vals).max() <= M + 1e-9


class TestSingular:
    def test_hyperbola_ratio_is_one(self):
        p = hyperbola(0.1)
        sing = singular_set_from_points(p, [(0j, 0j)])
        k = estimate_gradient_ratio(p, sing, sample_count=500)
        assert k == pytest.approx(1.0, abs=1e-9)

    def test_quadric_ratio_is_two(self):
        p = quadric(2)
        sing = singular_set_from_points(p, [(0j, 0j)])
        k = estimate_gradient_ratio(p, sing, sample_count=500)
        assert k == pytest.approx(2.0, abs=1e-9)

    def test_ratio_capped(self):
        rng = np.random.default_rng(5)
        p = quadric(2)
        sing = singular_set_from_points(p, [(0j, 0j)])
        k = estimate_gradient_ratio(p, sing, sample_count=100, rng=rng)
        assert k <= p.n * p.degree**4

    def test_degenerate_line_rejected(self):
        p = PolyC(2, {(2, 0): 1.0})  # z1^2: singular along the z2-axis
        sing = SingularSetFactory(p)
        with pytest.raises(DegenerateSingularityError):
            estimate_gradient_ratio(p, sing, sample_count=50)

    def test_find_singular_hyperbola(self):
        sing = find_singular_points(hyperbola(0.1), grid=5)
        assert len(sing.points) == 1
        assert np.allclose(np.array(sing.points[0]), 0)
        assert sing.nondegenerate == (True,)

    def test_find_singular_product_grid(self):
        # z(z-1)(z-2) * y(y-1)(y-2): interior critical grid has 2*2 points
        from doublecover.experiments import product_factor_poly

        p = product_factor_poly(3)
        sing = find_singular_points(p, grid=7, span=2.5)
        offgrid = [w for w in sing.points
                   if abs(p.eval(np.array(w))) > 1e-8]
        assert len(offgrid) == 4

    def test_bezout_cap_enforced(self):
        p = hyperbola(0.0)
        with pytest.raises(ValueError):
            singular_set_from_points(p, [(0j, 0j), (0j, 0j)])

    def test_hessian(self):
        H = hessian_at(hyperbola(0.1), np.array([0j, 0j]))
        assert H == pytest.approx(np.array([[0, 1], [1, 0]], dtype=complex))


def SingularSetFactory(p):
    # z1^2 has a singular line; the origin passes the gradient test but is degenerate
    from doublecover.polyalg import SingularSet

    return SingularSet(((0j, 0j),), (False,))


class TestRestrictToLine:
    def test_matches_direct_evaluation(self):
        rng = np.random.default_rng(6)
        p = random_poly(rng, 2, 4)
        base = rng.normal(size=2) + 1j * rng.normal(size=2)
        direction = rng.normal(size=2) + 1j * rng.normal(size=2)
        coeffs = restrict_to_line(p, base, direction)
        for t in rng.normal(size=5) + 1j * rng.normal(size=5):
            direct = p.eval(base + t * direction)
            horner = sum(c * t**k for k, c in enumerate(coeffs))
            assert abs(direct - horner) < 1e-9 * max(1.0, abs(direct))


class TestRealify:
    def test_roundtrip(self):
        z = np.array([0.5 + 1j, -2j])
        assert np.allclose(complexify(realify(z)), z)
