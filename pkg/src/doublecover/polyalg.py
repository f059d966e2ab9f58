"""Sparse multivariate complex polynomials.

A polynomial in n complex variables is stored as a map from exponent
tuples to complex coefficients.  Everything downstream (subdivision
covers, implicit charts, propagated bounds) evaluates polynomials and
their derivatives on numpy arrays of points, so evaluation is written
to broadcast over leading axes: points have shape (..., n).

The ambient domain Q is the realified unit cube [-1, 1]^(2n) in the
coordinates (Re z1, Im z1, ..., Re zn, Im zn).
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass, field
from itertools import product

import numpy as np

MultiIndex = tuple[int, ...]


class PolyParseError(ValueError):
    """Raised when a polynomial expression string is malformed."""


class DegenerateSingularityError(ValueError):
    """Raised when a singular point fails the non-degeneracy test."""


@dataclass(frozen=True)
class PolyC:
    """Sparse polynomial with complex coefficients in n variables."""

    n: int
    terms: dict[MultiIndex, complex]
    degree: int = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one variable")
        cleaned: dict[MultiIndex, complex] = {}
        for exps, coef in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n:
                raise ValueError(f"exponent tuple {exps} has wrong length for n={self.n}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = complex(coef)
            if c != 0:
                cleaned[exps] = cleaned.get(exps, 0.0 + 0.0j) + c
        cleaned = {e: c for e, c in cleaned.items() if c != 0}
        object.__setattr__(self, "terms", cleaned)
        object.__setattr__(self, "degree", max((sum(e) for e in cleaned), default=0))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def eval(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (..., n); returns shape (...)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for exps, coef in self.terms.items():
            term = np.full(z.shape[:-1], coef, dtype=complex)
            for i, e in enumerate(exps):
                if e:
                    term = term * z[..., i] ** e
            out += term
        return out

    def __call__(self, z):
        return self.eval(z)

    def scaled(self, factor: complex) -> "PolyC":
        return PolyC(self.n, {e: c * factor for e, c in self.terms.items()})


def poly_from_records(records, n: int) -> PolyC:
    """Build a polynomial from [{'exponents': [...], 're': x, 'im': y}, ...]."""
    terms: dict[MultiIndex, complex] = {}
    for rec in records:
        exps = tuple(int(e) for e in rec["exponents"])
        c = complex(float(rec.get("re", 0.0)), float(rec.get("im", 0.0)))
        terms[exps] = terms.get(exps, 0j) + c
    return PolyC(n, terms)


def poly_to_records(poly: PolyC) -> list[dict]:
    recs = []
    for exps in sorted(poly.terms):
        c = poly.terms[exps]
        recs.append({"exponents": list(exps), "re": c.real, "im": c.imag})
    return recs


_TOKEN = re.compile(
    r"""
    (?P<complex>\(\s*[-+]?[\d.eE+-]*\s*[-+]\s*[\d.eE]*[\d.]i\s*\)|\(\s*[-+]?[\d.eE]*[\d.]i\s*\))
  | (?P<number>\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)
  | (?P<var>z\d+)
  | (?P<caret>\^)
  | (?P<star>\*)
  | (?P<sign>[-+])
    """,
    re.VERBOSE,
)

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_COMPLEX_FULL = re.compile(rf"^([-+]?{_NUM})([-+](?:{_NUM})?)i$")
_COMPLEX_IMAG = re.compile(rf"^([-+]?(?:{_NUM})?)i$")


def _parse_complex_literal(text: str) -> complex:
    inner = text.strip()[1:-1].replace(" ", "")
    m = _COMPLEX_FULL.match(inner)
    if m:
        re_part = float(m.group(1))
        im_text = m.group(2)
        im_part = float(im_text) if im_text not in ("+", "-") else float(im_text + "1")
        return complex(re_part, im_part)
    m = _COMPLEX_IMAG.match(inner)
    if m:
        im_text = m.group(1)
        if im_text in ("", "+", "-"):
            im_text += "1"
        return complex(0.0, float(im_text))
    raise PolyParseError(f"bad complex literal {text!r}")


def parse_poly(text: str, n: int) -> PolyC:
    """Parse an expression like "2*z1^2*z2 - (1+2i)*z2 + 0.5" into a PolyC.

    Grammar: terms joined by +/-; each term is an optional coefficient
    (real literal or parenthesized complex "(a+bi)") and '*'-separated
    variable powers zK or zK^E with 1-based K.  Whitespace is ignored.
    """
    stripped = text.replace(" ", "").replace("\t", "")
    if not stripped:
        raise PolyParseError("empty polynomial expression")
    tokens = []
    pos = 0
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            raise PolyParseError(f"unexpected input at {stripped[pos:]!r}")
        tokens.append((m.lastgroup, m.group()))
        pos = m.end()

    terms: dict[MultiIndex, complex] = {}
    i = 0

    def parse_term(sign: float):
        nonlocal i
        coef = complex(sign)
        exps = [0] * n
        saw_factor = False
        expect_factor = True
        while i < len(tokens):
            kind, val = tokens[i]
            if kind == "sign" and not expect_factor:
                break
            if kind == "complex":
                coef *= _parse_complex_literal(val)
                i += 1
                saw_factor = True
            elif kind == "number":
                coef *= float(val)
                i += 1
                saw_factor = True
            elif kind == "var":
                idx = int(val[1:])
                if idx < 1 or idx > n:
                    raise PolyParseError(f"variable {val} out of range for n={n}")
                power = 1
                i += 1
                if i < len(tokens) and tokens[i][0] == "caret":
                    i += 1
                    if i >= len(tokens):
                        raise PolyParseError("dangling '^'")
                    k, v = tokens[i]
                    if k == "sign" and v == "-":
                        raise PolyParseError("negative exponents are not allowed")
                    if k != "number" or "." in v or "e" in v or "E" in v:
                        raise PolyParseError(f"bad exponent after '^': {v!r}")
                    power = int(v)
                    i += 1
                exps[idx - 1] += power
                saw_factor = True
            elif kind == "star":
                i += 1
                expect_factor = True
                continue
            elif kind == "sign":
                break
            else:
                raise PolyParseError(f"unexpected token {val!r}")
            expect_factor = False
        if not saw_factor:
            raise PolyParseError("empty term")
        key = tuple(exps)
        terms[key] = terms.get(key, 0j) + coef

    sign = 1.0
    # leading sign(s)
    while i < len(tokens) and tokens[i][0] == "sign":
        if tokens[i][1] == "-":
            sign = -sign
        i += 1
    parse_term(sign)
    while i < len(tokens):
        kind, val = tokens[i]
        if kind != "sign":
            raise PolyParseError(f"expected '+' or '-' before {val!r}")
        sign = 1.0
        while i < len(tokens) and tokens[i][0] == "sign":
            if tokens[i][1] == "-":
                sign = -sign
            i += 1
        if i >= len(tokens):
            raise PolyParseError("trailing operator")
        parse_term(sign)
    return PolyC(n, terms)


def l1_norm(poly: PolyC) -> float:
    """Sum of coefficient moduli; zero iff the polynomial is zero."""
    return float(sum(abs(c) for c in poly.terms.values()))


def normalized(poly: PolyC, level: complex = 0.0):
    """Rescale so the coefficient l1-norm is one; rescales the level too."""
    s = l1_norm(poly)
    if s == 0:
        raise ValueError("cannot normalize the zero polynomial")
    return poly.scaled(1.0 / s), complex(level) / s


def partial_derivative(poly: PolyC, j: int) -> PolyC:
    """Holomorphic partial derivative with respect to variable j (0-based)."""
    terms: dict[MultiIndex, complex] = {}
    for exps, coef in poly.terms.items():
        e = exps[j]
        if e == 0:
            continue
        new = list(exps)
        new[j] = e - 1
        key = tuple(new)
        terms[key] = terms.get(key, 0j) + coef * e
    return PolyC(poly.n, terms)


def gradient_polys(poly: PolyC) -> list[PolyC]:
    return [partial_derivative(poly, j) for j in range(poly.n)]


def eval_grad(poly: PolyC, z: np.ndarray, _grads: list[PolyC] | None = None):
    """Value and holomorphic gradient at points of shape (..., n)."""
    z = np.asarray(z, dtype=complex)
    grads = _grads if _grads is not None else gradient_polys(poly)
    value = poly.eval(z)
    grad = np.stack([g.eval(z) for g in grads], axis=-1)
    return value, grad


def hessian_at(poly: PolyC, z: np.ndarray) -> np.ndarray:
    """Matrix of second partials at a single point."""
    z = np.asarray(z, dtype=complex)
    n = poly.n
    grads = gradient_polys(poly)
    H = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            H[i, j] = H[j, i] = partial_derivative(grads[i], j).eval(z)
    return H


def markov_bound(poly: PolyC) -> float:
    """Uniform bound n*d^4*||P||_1 on second partials over the unit cube."""
    if poly.is_zero:
        raise ValueError("Markov bound undefined for the zero polynomial")
    if poly.degree < 1:
        raise ValueError("Markov bound needs degree >= 1")
    return poly.n * poly.degree**4 * l1_norm(poly)


@dataclass(frozen=True)
class SingularSet:
    """Isolated singular points of a polynomial with non-degeneracy flags."""

    points: tuple[tuple[complex, ...], ...]
    nondegenerate: tuple[bool, ...]

    def __post_init__(self):
        if len(self.points) != len(self.nondegenerate):
            raise ValueError("points / flags length mismatch")

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex).reshape(len(self.points), -1)


def singular_set_from_points(poly: PolyC, points, tol_gradient: float = 1e-10,
                             tol_hessian: float = 1e-8) -> SingularSet:
    """Validate user-supplied singular points against the gradient and Hessian.

    Enforces the degree-based cap (d-1)^n on the number of accepted
    non-degenerate points.
    """
    pts = [tuple(complex(c) for c in p) for p in points]
    flags = []
    for p in pts:
        z = np.array(p, dtype=complex)
        _, g = eval_grad(poly, z)
        if np.linalg.norm(g) > tol_gradient:
            raise ValueError(f"point {p} is not singular: |grad| = {np.linalg.norm(g):.3e}")
        H = hessian_at(poly, z)
        flags.append(bool(abs(np.linalg.det(H)) > tol_hessian))
    cap = max(1, (poly.degree - 1) ** poly.n)
    if sum(flags) > cap:
        raise ValueError(f"{sum(flags)} non-degenerate points exceeds the cap {cap}")
    return SingularSet(tuple(pts), tuple(flags))


def find_singular_points(poly: PolyC, grid: int = 5, span: float = 1.2,
                         tol_gradient: float = 1e-10, tol_hessian: float = 1e-8,
                         newton_steps: int = 60) -> SingularSet:
    """Locate singular points by Newton iteration on the gradient system.

    Seeds come from a real grid over [-span, span]^(2n); duplicates are
    merged.  This is a search, not certified root isolation: points the
    grid misses stay missed.
    """
    n = poly.n
    grads = gradient_polys(poly)
    seeds_1d = np.linspace(-span, span, grid)
    found: list[np.ndarray] = []
    for combo in product(seeds_1d, repeat=2 * n):
        z = np.array([complex(combo[2 * i], combo[2 * i + 1]) for i in range(n)])
        ok = False
        for _ in range(newton_steps):
            g = np.array([gp.eval(z) for gp in grads])
            gn = np.linalg.norm(g)
            if gn < tol_gradient:
                ok = True
                break
            H = hessian_at(poly, z)
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                break
            if np.linalg.norm(step) > 10.0:
                break
            z = z + step
        if not ok or np.linalg.norm(z) > 4 * span:
            continue
        if all(np.linalg.norm(z - w) > 1e-6 for w in found):
            found.append(z)
    found.sort(key=lambda w: tuple(np.round(w.view(float), 9)))
    return singular_set_from_points(poly, [tuple(w) for w in found],
                                    tol_gradient=max(tol_gradient, 1e-9),
                                    tol_hessian=tol_hessian)


def distance_to_points(z: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Euclidean distance from points of shape (..., n) to the nearest of `points`."""
    z = np.asarray(z, dtype=complex)
    if points.size == 0:
        return np.full(z.shape[:-1], np.inf)
    diff = z[..., None, :] - points  # (..., m, n)
    return np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1)).min(axis=-1)


def estimate_gradient_ratio(poly: PolyC, sing: SingularSet, sample_count: int = 2000,
                            rng: np.random.Generator | None = None) -> float:
    """Sampled lower constant in  K * dist(z, S) <= ||grad P(z)||  over the cube.

    Returns the minimum sampled ratio, clamped to the provable cap n*d^4.
    Not a certified lower bound for K; the true constant also satisfies
    the same cap.
    """
    if not sing.points:
        raise ValueError("need at least one singular point")
    if not all(sing.nondegenerate):
        raise DegenerateSingularityError(
            "singular set contains a degenerate (or non-isolated) point")
    rng = rng if rng is not None else np.random.default_rng(0)
    n = poly.n
    reals = rng.uniform(-1.0, 1.0, size=(sample_count, 2 * n))
    z = reals[:, 0::2] + 1j * reals[:, 1::2]
    _, g = eval_grad(poly, z)
    gn = np.linalg.norm(g, axis=-1)
    dist = distance_to_points(z, sing.as_array())
    mask = dist > 1e-12
    ratio = gn[mask] / dist[mask]
    cap = poly.n * poly.degree**4
    return float(min(ratio.min(), cap))


def restrict_to_line(poly: PolyC, base: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Coefficients (ascending) of t -> P(base + t*direction), a degree-<=d polynomial."""
    base = np.asarray(base, dtype=complex)
    direction = np.asarray(direction, dtype=complex)
    out = np.zeros(poly.degree + 1, dtype=complex)
    for exps, coef in poly.terms.items():
        term = np.array([coef], dtype=complex)
        for i, e in enumerate(exps):
            for _ in range(e):
                term = np.convolve(term, np.array([base[i], direction[i]]))
        out[: len(term)] += term
    return out


def realify(z: np.ndarray) -> np.ndarray:
    """Complex (..., n) -> real (..., 2n) as (Re z1, Im z1, ...)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def complexify(x: np.ndarray) -> np.ndarray:
    """Real (..., 2n) -> complex (..., n)."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]
