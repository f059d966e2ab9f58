"""Certified local charts on a polynomial level set.

At a base point z0 on Y = {P = c} with gradient g, a unitary frame is
chosen whose last axis is the steepest-ascent direction conj(g)/|g| (so
the frame-coordinate derivative along that axis has modulus |g| and the
tangential derivatives vanish at z0).  Inside a "diskoball" -- the
product of an (n-1)-dimensional ball and a disk of radius theta in frame
coordinates -- the level set is the graph of an analytic function
v_n = phi(v_1..v_{n-1}), solved pointwise by damped Newton iteration.

chart_radius gives the certified radius eta / (50 M sqrt(2n(n-1))) under
a second-derivative bound M; verify_chart measures the graph slope, tube
width, residuals and per-line root uniqueness by sampling, which is also
how larger, slope-targeted charts (used for chart chains) are validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polyalg import PolyC, eval_grad, gradient_polys, restrict_to_line


class ChartRejected(RuntimeError):
    """Newton failed to converge or a verification check failed hard."""


@dataclass(frozen=True)
class UnitaryFrame:
    origin: np.ndarray   # (n,) complex
    matrix: np.ndarray   # (n, n) complex unitary

    def to_frame(self, z: np.ndarray) -> np.ndarray:
        """Ambient -> frame coordinates: v = U* (z - origin)."""
        return (np.asarray(z, dtype=complex) - self.origin) @ self.matrix.conj()

    def from_frame(self, v: np.ndarray) -> np.ndarray:
        """Frame -> ambient: z = origin + U v."""
        return self.origin + np.asarray(v, dtype=complex) @ self.matrix.T


def align_frame(origin, grad) -> UnitaryFrame:
    """Unitary frame at origin whose last column is the steepest-ascent
    direction conj(grad)/|grad|, phase-fixed so the last diagonal entry
    is real non-negative."""
    origin = np.asarray(origin, dtype=complex)
    grad = np.asarray(grad, dtype=complex)
    n = len(grad)
    gn = np.linalg.norm(grad)
    if gn == 0:
        raise ValueError("zero gradient: no transverse direction")
    u = grad.conj() / gn
    phase = u[-1] / abs(u[-1]) if abs(u[-1]) > 0 else 1.0
    u_tilde = u / phase
    e_n = np.zeros(n, dtype=complex)
    e_n[-1] = 1.0
    w = u_tilde - e_n
    wn2 = np.vdot(w, w).real
    if wn2 < 1e-30:
        U = np.eye(n, dtype=complex)
    else:
        U = np.eye(n, dtype=complex) - 2.0 * np.outer(w, w.conj()) / wn2
    return UnitaryFrame(origin, U)


def chart_radius(eta: float, markov: float, n: int) -> float:
    """Certified diskoball radius eta / (50 M sqrt(2n(n-1)))."""
    if eta <= 0:
        raise ValueError("gradient norm eta must be positive (near-critical point)")
    if markov <= 0:
        raise ValueError("second-derivative bound must be positive")
    if n < 2:
        raise ValueError("need n >= 2")
    return eta / (50.0 * markov * math.sqrt(2 * n * (n - 1)))


def sample_complex_ball(rng: np.random.Generator, dim: int, radius: float,
                        count: int) -> np.ndarray:
    """Uniform samples from the complex dim-ball of the given radius."""
    g = rng.normal(size=(count, 2 * dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / (2 * dim))
    pts = g * r
    return pts[:, 0::2] + 1j * pts[:, 1::2]


@dataclass
class ImplicitChart:
    """Level-set graph chart over the frame's tangential coordinates."""

    frame: UnitaryFrame
    theta: float
    poly: PolyC
    level: complex
    eta: float
    markov: float
    _grads: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self._grads:
            self._grads = gradient_polys(self.poly)

    @property
    def n(self) -> int:
        return self.poly.n

    def embed(self, vbar: np.ndarray, vn: np.ndarray) -> np.ndarray:
        vbar = np.asarray(vbar, dtype=complex)
        vn = np.asarray(vn, dtype=complex)
        U = self.frame.matrix
        return (self.frame.origin + vbar @ U[:, :-1].T
                + vn[..., None] * U[:, -1])

    def residual_grad(self, z: np.ndarray):
        """(P(z) - c, frame-coordinate gradient of P at z)."""
        val, grad = eval_grad(self.poly, z, _grads=self._grads)
        return val - self.level, grad @ self.frame.matrix

    def solve(self, vbar: np.ndarray, tol: float = 1e-12, max_iter: int = 50,
              max_halvings: int = 8) -> np.ndarray:
        """phi(vbar): the last frame coordinate solving f = 0, by damped
        Newton from 0.  Raises ChartRejected when any point fails to
        converge -- the caller must shrink the chart."""
        vbar = np.asarray(vbar, dtype=complex)
        if np.linalg.norm(vbar, axis=-1).max() > self.theta * (1 + 1e-9):
            raise ValueError("tangential point outside the chart ball")
        vn = np.zeros(vbar.shape[:-1], dtype=complex)
        res, gf = self.residual_grad(self.embed(vbar, vn))
        for _ in range(max_iter):
            if np.abs(res).max() <= tol:
                break
            dfn = gf[..., -1]
            bad = np.abs(dfn) < 1e-14 * max(self.eta, 1e-300)
            if bad.any():
                raise ChartRejected("transverse derivative vanished during Newton")
            step = -res / dfn
            new_vn = vn + step
            new_res, new_gf = self.residual_grad(self.embed(vbar, new_vn))
            for _ in range(max_halvings):
                worse = np.abs(new_res) > np.abs(res)
                if not worse.any():
                    break
                step = np.where(worse, step * 0.5, step)
                new_vn = vn + step
                new_res, new_gf = self.residual_grad(self.embed(vbar, new_vn))
            vn, res, gf = new_vn, new_res, new_gf
        if np.abs(res).max() > tol:
            raise ChartRejected(
                f"Newton residual {np.abs(res).max():.2e} above {tol:.0e}")
        if np.abs(vn).max() > self.theta:
            raise ChartRejected("graph left the diskoball")
        return vn

    def phi_and_slope(self, vbar: np.ndarray, tol: float = 1e-12):
        """(phi, ||grad phi||, residual) at tangential points vbar."""
        vn = self.solve(vbar, tol=tol)
        res, gf = self.residual_grad(self.embed(vbar, vn))
        grad_phi = -gf[..., :-1] / gf[..., -1:]
        slope = np.linalg.norm(grad_phi, axis=-1)
        return vn, slope, np.abs(res)

    def graph_points(self, vbar: np.ndarray) -> np.ndarray:
        return self.embed(vbar, self.solve(vbar))

    def frame_membership(self, z: np.ndarray, scale: float, tol: float = 1e-8):
        """Whether ambient points lie on this chart's graph within the
        tangential radius `scale`: returns (mask, vbar, vn)."""
        v = self.frame.to_frame(z)
        vbar, vn = v[..., :-1], v[..., -1]
        inside = np.linalg.norm(vbar, axis=-1) <= scale * (1 + 1e-12)
        mask = np.zeros(inside.shape, dtype=bool)
        if inside.any():
            idx = np.nonzero(inside)[0] if inside.ndim else None
            try:
                if inside.ndim:
                    phi = self.solve(vbar[idx])
                    mask[idx] = np.abs(vn[idx] - phi) <= tol
                else:
                    phi = self.solve(vbar)
                    mask = np.abs(vn - phi) <= tol
            except ChartRejected:
                pass
        return mask, vbar, vn


def make_chart(poly: PolyC, c: complex, base_point, theta: float | None = None,
               markov: float | None = None, grads=None) -> ImplicitChart:
    """Chart at a point of {P = c}; default radius from chart_radius with
    the polynomial's cube-wide second-derivative bound."""
    from .polyalg import markov_bound

    base = np.asarray(base_point, dtype=complex)
    _, g = eval_grad(poly, base)
    eta = float(np.linalg.norm(g))
    M = markov if markov is not None else markov_bound(poly)
    th = theta if theta is not None else chart_radius(eta, M, poly.n)
    frame = align_frame(base, g)
    return ImplicitChart(frame, th, poly, complex(c), eta, M,
                         _grads=list(grads) if grads else [])


@dataclass(frozen=True)
class ChartCertificate:
    passed: bool
    samples: int
    max_slope: float
    max_tube_ratio: float      # max |phi| / theta
    min_distortion: float      # 1 / sqrt(1 + max_slope^2)
    max_residual: float
    uniqueness_ok: bool
    reason: str = ""


def _batched_root_count(coeffs: np.ndarray, radius: float) -> np.ndarray:
    """Number of roots with |t| < radius per row of ascending coefficients."""
    scale = np.abs(coeffs).max()
    if scale == 0:
        return np.zeros(len(coeffs), dtype=int)
    deg = coeffs.shape[1] - 1
    while deg > 0 and np.abs(coeffs[:, deg]).max() <= 1e-13 * scale:
        deg -= 1
    if deg == 0:
        return np.zeros(len(coeffs), dtype=int)
    lim = radius * (1.0 - 1e-9)
    with np.errstate(all="ignore"):
        if deg == 1:
            roots = (-coeffs[:, 0] / coeffs[:, 1])[:, None]
        elif deg == 2:
            a, b, c = coeffs[:, 2], coeffs[:, 1], coeffs[:, 0]
            disc = np.sqrt(b * b - 4 * a * c + 0j)
            roots = np.stack([(-b + disc) / (2 * a), (-b - disc) / (2 * a)], axis=1)
        else:
            n_rows = len(coeffs)
            comp = np.zeros((n_rows, deg, deg), dtype=complex)
            comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
            lead = coeffs[:, deg]
            comp[:, :, -1] = -coeffs[:, :deg] / lead[:, None]
            roots = np.linalg.eigvals(comp)
        finite = np.isfinite(roots)
        inside = finite & (np.abs(np.where(finite, roots, np.inf)) < lim)
    return inside.sum(axis=1)


def verify_chart(chart: ImplicitChart, samples: int = 1000,
                 rng: np.random.Generator | None = None,
                 slope_limit: float = 1.0 / 49.0,
                 tube_ratio_limit: float = 1.0 / 49.0,
                 residual_limit: float = 1e-10,
                 distortion_floor: float | None = None,
                 line_count: int = 64) -> ChartCertificate:
    """Sampled certificate for a chart: graph residuals, slope bound, tube
    containment, projection distortion, and at-most-one-root uniqueness on
    random lines parallel to the transverse axis."""
    rng = rng if rng is not None else np.random.default_rng(0)
    dim = chart.n - 1
    vbar = sample_complex_ball(rng, dim, chart.theta * (1 - 1e-12), samples)
    if distortion_floor is None:
        distortion_floor = 0.99 if slope_limit <= 1.0 / 49.0 else (
            1.0 / math.sqrt(1.0 + slope_limit**2) * (1 - 1e-9))
    try:
        phi, slope, res = chart.phi_and_slope(vbar)
    except ChartRejected as exc:
        return ChartCertificate(False, samples, math.inf, math.inf, 0.0,
                                math.inf, False, reason=str(exc))
    max_slope = float(slope.max())
    max_tube = float(np.abs(phi).max() / chart.theta)
    max_res = float(res.max())
    distortion = 1.0 / math.sqrt(1.0 + max_slope**2)

    # per-line uniqueness: the restriction to a transverse line is a
    # univariate polynomial; count its roots in the disk of radius theta
    n_lines = min(line_count, samples)
    u_n = chart.frame.matrix[:, -1]
    unique_ok = True
    if chart.poly.degree >= 1:
        coeff_rows = np.empty((n_lines, chart.poly.degree + 1), dtype=complex)
        shifted = dict(chart.poly.terms)
        zero = tuple([0] * chart.poly.n)
        shifted[zero] = shifted.get(zero, 0.0) - complex(chart.level)
        shifted_poly = PolyC(chart.poly.n, shifted)
        for i in range(n_lines):
            base = chart.embed(vbar[i], np.array(0j))
            coeff_rows[i] = restrict_to_line(shifted_poly, base, u_n)[: chart.poly.degree + 1]
        counts = _batched_root_count(coeff_rows, chart.theta)
        unique_ok = bool((counts <= 1).all())

    passed = (max_slope <= slope_limit and max_tube <= tube_ratio_limit
              and max_res <= residual_limit and distortion >= distortion_floor
              and unique_ok)
    reason = "" if passed else (
        f"slope={max_slope:.3g}/{slope_limit:.3g} tube={max_tube:.3g}/{tube_ratio_limit:.3g} "
        f"res={max_res:.2e}/{residual_limit:.0e} distortion={distortion:.4f} "
        f"unique={unique_ok}")
    return ChartCertificate(passed, samples, max_slope, max_tube, distortion,
                            max_res, unique_ok, reason=reason)
