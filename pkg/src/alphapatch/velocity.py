"""Normal component of the alpha-SQG Biot-Savart velocity on patch boundaries.

The area integral over each patch is reduced to a contour integral,

    u(x) = - sum_j theta_j / (2 alpha) * integral |x - z(s)|^(-2 alpha) z'(s) ds,

with the perpendicular taken as v -> (v2, -v1) and the constant c(alpha) set
to 1. Only the normal projection ``n(x) . u(x)`` is formed on the boundary; its
self-patch integrand vanishes at the base point, so it is integrable for every
alpha in (0, 1).

Quadrature is split with a smooth partition of unity around each singular or
nearly singular source region: the smooth remainder uses the periodic
trapezoid rule on the nodes, the windowed part uses graded Gauss-Legendre
panels evaluated through the trigonometric interpolant of the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from . import _spectral as sp
from .curves import PatchSystem

FloatArray = NDArray[np.float64]


class KernelSingularityError(RuntimeError):
    """A target point lies (numerically) on another boundary: the kernel blows up."""


@dataclass(frozen=True)
class QuadratureRule:
    """Tuning knobs of the boundary quadrature.

    ``window`` is the half-width of the partition-of-unity window in node
    spacings, ``panels``/``order`` describe the composite graded rule on each
    side of a singular point, and ``near_factor`` (in node spacings) decides
    when another piece of boundary counts as a near contact.
    """

    window: int = 32
    panels: int = 8
    order: int = 24
    check_order: int = 16
    near_factor: float = 5.0
    subdivision: float = 0.25
    max_grading: int = 10


DEFAULT_RULE = QuadratureRule()


@dataclass
class NormalVelocityField:
    """Signed outward normal speed at every node, patch by patch."""

    values: list[FloatArray]
    normals: list[FloatArray]
    quadrature_error_estimate: float
    prefactor: float = 1.0   # c(alpha); values are computed with c(alpha) = 1

    def max_abs(self) -> float:
        return max(float(np.abs(v).max()) for v in self.values)

    def concatenated(self) -> FloatArray:
        return np.concatenate(self.values)


def grading_exponent(alpha: float, k: int, gamma: float, cap: int = 10) -> int:
    """Grading q of the singular-panel substitution s = L t^q.

    The self integrand behaves like |s|^(beta - 2 alpha) with beta = min(1, k - 1 + gamma);
    q is the smallest integer making the transformed integrand vanish like t^2.
    """
    beta = min(1.0, k - 1 + gamma)
    margin = 1.0 + beta - 2.0 * alpha
    return int(min(cap, math.ceil(3.0 / margin - 1e-12)))


def _window(u: np.ndarray) -> np.ndarray:
    """Smooth bump: 1 at u=0 (flat to all orders), 0 for u >= 1 (flat to all orders)."""
    u = np.abs(np.asarray(u, dtype=np.float64))
    w = np.zeros_like(u)
    inside = u < 1.0
    uu = u[inside]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        w[inside] = np.exp(2.0 * np.exp(-1.0 / uu) / (uu - 1.0))
    w[u == 0.0] = 1.0
    return w


@lru_cache(maxsize=64)
def _graded_rule(q: int, panels: int, order: int):
    """Nodes t^q and weights of the graded composite rule on [0, 1] (unit length)."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    t = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wt = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    return t**q, q * t ** (q - 1) * wt


@lru_cache(maxsize=16)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


@dataclass
class _Curve:
    """Spectral data of one boundary at a fixed instant."""

    z: np.ndarray
    coupling: float
    label: int
    zt: np.ndarray = field(init=False)
    c: np.ndarray = field(init=False)
    ct: np.ndarray = field(init=False)
    normal: np.ndarray = field(init=False)
    dtheta: float = field(init=False)
    spacing: float = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.z)
        self.zt = sp.diff(self.z)
        self.c = sp.coefficients(self.z)
        k = sp.wavenumbers(n)
        ct = self.c * (1j * k)
        if n % 2 == 0:
            ct[n // 2] = 0.0
        self.ct = ct
        speed = np.abs(self.zt)
        self.normal = -1j * self.zt / speed
        self.dtheta = 2 * np.pi / n
        self.spacing = float(speed.mean() * self.dtheta)

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def at(self) -> sp.LocalInterpolant:
        if not hasattr(self, "_at"):
            self._at = sp.LocalInterpolant(self.z)
        return self._at

    @property
    def tangent_at(self) -> sp.LocalInterpolant:
        if not hasattr(self, "_tangent_at"):
            self._tangent_at = sp.LocalInterpolant(self.z, order=1)
        return self._tangent_at


def _integrand(x, nx, zs, zts, alpha):
    """|x - z|^(-2 alpha) * (n . z_theta) for complex arrays."""
    d = np.abs(x - zs)
    # graded nodes can sit closer to the base point than rounding resolves; their weight is negligible
    ok = d > 1e-13
    d = np.where(ok, d, 1.0)
    return np.where(ok, d ** (-2.0 * alpha) * (nx.real * zts.real + nx.imag * zts.imag), 0.0)


class _Evaluator:
    def __init__(self, curves: Sequence[_Curve], alpha: float, k: int, gamma: float,
                 rule: QuadratureRule) -> None:
        self.curves = list(curves)
        self.alpha = alpha
        self.rule = rule
        self.q = grading_exponent(alpha, k, gamma, rule.max_grading)

    # -- self-patch singular window, all nodes at once -----------------------
    def _self_width(self, cv: _Curve) -> int:
        # at most half the curve on each side
        return min(self.rule.window, cv.n // 2)

    def _self_near_nodes(self, cv: _Curve, order: int) -> np.ndarray:
        r = self.rule
        L = self._self_width(cv) * cv.dtheta
        u, wts = _graded_rule(self.q, r.panels, order)
        sig = L * u
        weights = L * wts * _window(u)
        keep = weights > 0
        sig, weights = sig[keep], weights[keep]
        total = np.zeros(cv.n)
        for sgn in (1.0, -1.0):
            # offsets from the base point, formed without subtracting absolute positions;
            # n . z_theta vanishes at the base point, so only the tangent change is projected
            dz = sp.shift_many_delta(cv.z, sgn * sig)
            dzt = sp.shift_many_delta(cv.z, sgn * sig, order=1)
            f = _integrand(0.0, cv.normal[None, :], dz, dzt, self.alpha)
            total += weights @ f
        return total

    def _self_window_weights(self, cv: _Curve) -> np.ndarray:
        w = self._self_width(cv)
        m = np.arange(-w, w + 1)
        return m, _window(m / w)

    # -- near-contact corrections --------------------------------------------
    def _clusters(self, cv: _Curve, near: np.ndarray):
        """Group near node indices into windows (center, plateau, decay) in theta units."""
        n = cv.n
        idx = np.flatnonzero(near)
        if len(idx) == 0:
            return []
        # contiguous runs with periodic wrap
        runs = []
        start = prev = idx[0]
        for j in idx[1:]:
            if j - prev > 1:
                runs.append([start, prev])
                start = j
            prev = j
        runs.append([start, prev])
        if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == n - 1:
            runs[0][0] = runs[-1][0] - n
            runs.pop()
        W = self.rule.window
        merged: list[list[int]] = []
        for a, b in sorted(runs):
            if merged and a - merged[-1][1] <= 2 * W:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        if len(merged) > 1 and merged[0][0] + n - merged[-1][1] <= 2 * W:
            merged[0][0] = merged[-1][0] - n
            merged.pop()
        out = []
        for a, b in merged:
            center = 0.5 * (a + b) * cv.dtheta
            plateau = 0.5 * (b - a) * cv.dtheta
            # coarse curves get a shorter blend so the window never wraps around
            decay = min(W, int(np.floor(0.5 * (n - (b - a)))) - 1)
            if decay < 4:
                raise KernelSingularityError("near-contact region covers the whole source curve")
            out.append((center, plateau, decay * cv.dtheta))
        return out

    def _cluster_weight(self, theta, center, plateau, decay):
        d = np.abs(np.angle(np.exp(1j * (theta - center))))
        return np.where(d <= plateau, 1.0, _window(np.maximum(d - plateau, 0.0) / decay))

    def _adaptive_integral(self, x, nx, cv: _Curve, center, plateau, decay, orders):
        """Integral of F * window over the cluster support, one value per GL order.

        All orders share the same adaptively bisected panels.
        """
        lo = center - plateau - decay
        hi = center + plateau + decay
        npan = int(np.ceil((hi - lo) / (2 * cv.dtheta)))
        edges = np.linspace(lo, hi, npan + 1)
        a, b = edges[:-1], edges[1:]
        fa, fb = [], []
        r = self.rule
        for _ in range(60):
            if len(a) == 0:
                break
            pts = cv.at(np.concatenate([a, 0.5 * (a + b), b]))
            za, zm, zb = np.split(pts, 3)
            dist = np.minimum(np.minimum(np.abs(za - x), np.abs(zm - x)), np.abs(zb - x))
            dist = np.minimum(dist, _seg_dist(x, za, zb))
            if np.any(dist < 1e-12):
                raise KernelSingularityError("evaluation point lies on a boundary")
            length = np.abs(zb - zm) + np.abs(zm - za)
            split = length > r.subdivision * dist
            fa.append(a[~split])
            fb.append(b[~split])
            m = 0.5 * (a[split] + b[split])
            a, b = np.concatenate([a[split], m]), np.concatenate([m, b[split]])
        else:
            raise KernelSingularityError("near-contact subdivision did not terminate")
        a = np.concatenate(fa)[:, None]
        b = np.concatenate(fb)[:, None]
        out = []
        for order in orders:
            xg, wg = _gauss(order)
            th = (0.5 * (b - a) * xg[None, :] + 0.5 * (a + b)).ravel()
            wt = (0.5 * (b - a) * wg[None, :]).ravel()
            f = _integrand(x, nx, cv.at(th), cv.tangent_at(th), self.alpha)
            out.append(float(np.sum(wt * self._cluster_weight(th, center, plateau, decay) * f)))
        return out

    def _near_terms(self, x, nx, cv: _Curve, near_mask, dist_row, f_row, orders):
        """Return (fine, coarse) corrections for all clusters of one target/source pair."""
        fine = coarse = 0.0
        theta_nodes = np.arange(cv.n) * cv.dtheta
        if np.any(dist_row < 1e-12):
            raise KernelSingularityError("evaluation point lies on another boundary")
        for center, plateau, decay in self._clusters(cv, near_mask):
            w = self._cluster_weight(theta_nodes, center, plateau, decay)
            trap = cv.dtheta * float(np.sum(w * f_row))
            vals = self._adaptive_integral(x, nx, cv, center, plateau, decay, orders)
            fine += vals[0] - trap
            coarse += vals[-1] - trap
        return fine, coarse

    # -- node targets -----------------------------------------------------------
    def node_values(self) -> tuple[list[np.ndarray], float]:
        r = self.rule
        values = []
        err = 0.0
        for a, ca in enumerate(self.curves):
            fine = np.zeros(ca.n)
            coarse = np.zeros(ca.n)
            for b, cb in enumerate(self.curves):
                pref = -cb.coupling / (2.0 * self.alpha)
                diff = ca.z[:, None] - cb.z[None, :]
                dist = np.abs(diff)
                proj = (ca.normal.real[:, None] * cb.zt.real[None, :]
                        + ca.normal.imag[:, None] * cb.zt.imag[None, :])
                if a == b:
                    np.fill_diagonal(dist, 1.0)
                    f = dist ** (-2.0 * self.alpha) * proj
                    np.fill_diagonal(f, 0.0)
                    m, wm = self._self_window_weights(ca)
                    idx = np.arange(ca.n)
                    far = f.sum(axis=1)
                    for mm, ww in zip(m, wm):
                        if mm != 0:
                            far -= ww * f[idx, (idx + mm) % ca.n]
                    far *= ca.dtheta
                    near_f = self._self_near_nodes(ca, r.order)
                    near_c = self._self_near_nodes(ca, r.check_order)
                    fine += pref * (far + near_f)
                    coarse += pref * (far + near_c)
                    # distant parts of the same curve that come close
                    near = dist < r.near_factor * ca.spacing
                    sep = np.abs(idx[:, None] - idx[None, :])
                    sep = np.minimum(sep, ca.n - sep)
                    near &= sep > 2 * self._self_width(ca) + 2
                else:
                    if np.any(dist < 1e-12):
                        raise KernelSingularityError(
                            f"node of patch {ca.label} lies on the boundary of patch {cb.label}")
                    f = dist ** (-2.0 * self.alpha) * proj
                    s = cb.dtheta * f.sum(axis=1)
                    fine += pref * s
                    coarse += pref * s
                    near = dist < r.near_factor * cb.spacing
                for i in np.flatnonzero(near.any(axis=1)):
                    cf, cc = self._near_terms(ca.z[i], ca.normal[i], cb, near[i], dist[i], f[i],
                                              (r.order, r.check_order))
                    fine[i] += pref * cf
                    coarse[i] += pref * cc
            values.append(fine)
            err = max(err, float(np.abs(fine - coarse).max()))
        return values, err

    # -- arbitrary boundary targets -----------------------------------------------
    def point_value(self, a: int, theta: float) -> float:
        r = self.rule
        ca = self.curves[a]
        x = complex(sp.evaluate(ca.c, np.array([theta]))[0])
        xt = complex(sp.evaluate(ca.ct, np.array([theta]))[0])
        nx = -1j * xt / abs(xt)
        total = 0.0
        for b, cb in enumerate(self.curves):
            pref = -cb.coupling / (2.0 * self.alpha)
            theta_nodes = np.arange(cb.n) * cb.dtheta
            dist = np.abs(x - cb.z)
            proj = nx.real * cb.zt.real + nx.imag * cb.zt.imag
            if a == b:
                L = self._self_width(cb) * cb.dtheta
                off = np.angle(np.exp(1j * (theta_nodes - theta)))
                w = _window(off / L)
                safe = np.where(dist > 0, dist, 1.0)
                f = np.where(w < 1.0, safe ** (-2.0 * self.alpha) * proj, 0.0)
                s = cb.dtheta * float(np.sum((1.0 - w) * f))
                u, wts = _graded_rule(self.q, r.panels, r.order)
                weights = L * wts * _window(u)
                for sgn in (1.0, -1.0):
                    # exact differences from the base point (see _self_near_nodes)
                    dz = sp.evaluate_delta(cb.c, theta, sgn * L * u)
                    dzt = sp.evaluate_delta(cb.c, theta, sgn * L * u, order=1)
                    s += float(np.sum(weights * _integrand(0.0, nx, dz, dzt, self.alpha)))
                near = ((dist < r.near_factor * cb.spacing)
                        & (np.abs(off) > (2 * self._self_width(cb) + 2) * cb.dtheta))
            else:
                f = dist ** (-2.0 * self.alpha) * proj
                s = cb.dtheta * float(np.sum(f))
                near = dist < r.near_factor * cb.spacing
            if near.any():
                cf, _ = self._near_terms(x, nx, cb, near, dist, f, (r.order,))
                s += cf
            total += pref * s
        return total


def _seg_dist(x, za, zb):
    d = zb - za
    den = np.abs(d) ** 2
    t = np.clip(((x - za) * np.conj(d)).real / np.where(den > 0, den, 1.0), 0.0, 1.0)
    return np.abs(x - (za + t * d))


def _curves(system: PatchSystem) -> list[_Curve]:
    return [_Curve(sp.to_complex(p.nodes), p.coupling, p.label) for p in system.patches]


def normal_velocity_arrays(nodes: Sequence[np.ndarray], couplings: Sequence[float], alpha: float,
                           k: int, gamma: float, rule: QuadratureRule = DEFAULT_RULE):
    """Array-level entry point used by the time stepper (no validation).

    Returns ``(values, normals, error_estimate)`` with per-patch arrays.
    """
    curves = [_Curve(sp.to_complex(z), th, i) for i, (z, th) in enumerate(zip(nodes, couplings))]
    values, err = _Evaluator(curves, alpha, k, gamma, rule).node_values()
    normals = [sp.to_points(c.normal) for c in curves]
    return values, normals, err


def normal_velocity(system: PatchSystem, rule: QuadratureRule = DEFAULT_RULE) -> NormalVelocityField:
    """Outward normal velocity u . n at every boundary node of ``system``."""
    values, normals, err = normal_velocity_arrays(
        [p.nodes for p in system.patches], [p.coupling for p in system.patches],
        system.alpha, system.k, system.gamma, rule)
    for v in values:
        if not np.isfinite(v).all():
            raise KernelSingularityError("non-finite normal velocity")
    return NormalVelocityField(values, normals, err)


def normal_velocity_at(system: PatchSystem, label: int, theta: float,
                       rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Outward normal velocity at parameter ``theta`` (node j sits at 2 pi j / N) of a patch."""
    labels = [p.label for p in system.patches]
    ev = _Evaluator(_curves(system), system.alpha, system.k, system.gamma, rule)
    return ev.point_value(labels.index(label), float(theta))


def boundary_point(system: PatchSystem, label: int, theta: float) -> tuple[FloatArray, FloatArray]:
    """Position and outward unit normal of a patch boundary at parameter ``theta``."""
    cv = _Curve(sp.to_complex(system.patch(label).nodes), 0.0, label)
    x = sp.evaluate(cv.c, np.array([theta]))[0]
    xt = sp.evaluate(cv.ct, np.array([theta]))[0]
    nx = -1j * xt / abs(xt)
    return np.array([x.real, x.imag]), np.array([nx.real, nx.imag])


def velocity_at_external_point(system: PatchSystem, x: Sequence[float]) -> FloatArray:
    """Full velocity vector at a point away from every boundary (at least 10 node spacings)."""
    xc = complex(x[0], x[1])
    total = 0.0 + 0.0j
    for cv in _curves(system):
        dist = np.abs(xc - cv.z)
        if dist.min() < 10 * cv.spacing:
            raise ValueError(
                f"point {tuple(x)} is within 10 node spacings of patch {cv.label}")
        total += -cv.coupling / (2 * system.alpha) * cv.dtheta * np.sum(dist ** (-2 * system.alpha) * cv.zt)
    return np.array([total.real, total.imag])
