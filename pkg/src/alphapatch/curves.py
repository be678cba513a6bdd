"""Closed boundary curves, patch systems and intrinsic geometry.

Curves are stored as nodes equispaced in arc length. Derivatives, arc length
and resampling use the trigonometric interpolant of the node sequence, so
quantities such as perimeter and tangent length are spectrally accurate on
smooth curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from . import _spectral as sp

FloatArray = NDArray[np.float64]

MIN_NODES = 16
QUASI_UNIFORM_RATIO = 1.5


class GeometryError(ValueError):
    """Raised when a curve or patch system violates its geometric invariants."""


# ---------------------------------------------------------------------------
# (k, gamma) bookkeeping


def regularity_index(alpha: float) -> int:
    """k = ceil(2 alpha)."""
    return int(math.ceil(2.0 * alpha))


def minimal_gamma(alpha: float) -> float:
    """Smallest Hoelder exponent allowed for a given alpha: 2 alpha - ceil(2 alpha) + 1."""
    return 2.0 * alpha - regularity_index(alpha) + 1.0


def bound_exponent(alpha: float, k: int, gamma: float) -> float:
    """Exponent (k + 2 alpha - 1) / (k + gamma - 1) of the norm in the distance bound."""
    return (k + 2.0 * alpha - 1.0) / (k + gamma - 1.0)


# ---------------------------------------------------------------------------
# Low-level polyline helpers


def signed_area(nodes: np.ndarray) -> float:
    """Shoelace area of the closed polyline (positive for counterclockwise)."""
    x, y = nodes[:, 0], nodes[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_intersect(p0, p1, q0, q1) -> np.ndarray:
    """Vectorized closed-segment intersection test (touching counts)."""
    d1 = _cross(q1 - q0, p0 - q0)
    d2 = _cross(q1 - q0, p1 - q0)
    d3 = _cross(p1 - p0, q0 - p0)
    d4 = _cross(p1 - p0, q1 - p0)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def on_seg(a0, a1, b, d):
        lo = np.minimum(a0, a1)
        hi = np.maximum(a0, a1)
        inside = np.all((b >= lo - 1e-15) & (b <= hi + 1e-15), axis=-1)
        return (d == 0) & inside

    touching = (on_seg(q0, q1, p0, d1) | on_seg(q0, q1, p1, d2)
                | on_seg(p0, p1, q0, d3) | on_seg(p0, p1, q1, d4))
    return proper | touching


def _point_segment(p, a, b):
    """Closest point on segment ab to p; returns (distance, point, t)."""
    ab = b - a
    denom = np.sum(ab * ab, axis=-1)
    t = np.where(denom > 0, np.sum((p - a) * ab, axis=-1) / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    c = a + t[..., None] * ab
    return np.linalg.norm(p - c, axis=-1), c, t


def segment_distance(p0, p1, q0, q1):
    """Distance between segments [p0,p1] and [q0,q1] with realizing points.

    Inputs broadcast over leading axes. Returns ``(dist, p, q)``.
    """
    p0, p1, q0, q1 = (np.asarray(v, dtype=np.float64) for v in (p0, p1, q0, q1))
    p0, p1, q0, q1 = np.broadcast_arrays(p0, p1, q0, q1)
    cands = []
    d, c, _ = _point_segment(p0, q0, q1)
    cands.append((d, p0, c))
    d, c, _ = _point_segment(p1, q0, q1)
    cands.append((d, p1, c))
    d, c, _ = _point_segment(q0, p0, p1)
    cands.append((d, c, q0))
    d, c, _ = _point_segment(q1, p0, p1)
    cands.append((d, c, q1))
    dist = np.stack([c[0] for c in cands])
    best = np.argmin(dist, axis=0)
    out_d = np.take_along_axis(dist, best[None, ...], axis=0)[0]
    ps = np.stack([c[1] for c in cands])
    qs = np.stack([c[2] for c in cands])
    out_p = np.take_along_axis(ps, best[None, ..., None], axis=0)[0]
    out_q = np.take_along_axis(qs, best[None, ..., None], axis=0)[0]

    hit = _segments_intersect(p0, p1, q0, q1)
    if np.any(hit):
        r = p1 - p0
        s = q1 - q0
        den = _cross(r, s)
        safe = np.where(den != 0, den, 1.0)
        t = np.clip(_cross(q0 - p0, s) / safe, 0.0, 1.0)
        x = p0 + t[..., None] * r
        x = np.where((den != 0)[..., None], x, out_p)
        out_d = np.where(hit, 0.0, out_d)
        out_p = np.where(hit[..., None], x, out_p)
        out_q = np.where(hit[..., None], x, out_q)
    return out_d, out_p, out_q


def _segment_arrays(nodes: np.ndarray):
    return nodes, np.roll(nodes, -1, axis=0)


def polyline_self_intersects(nodes: np.ndarray) -> bool:
    """True if the closed polyline through ``nodes`` has non-adjacent segments that meet."""
    a, b = _segment_arrays(nodes)
    n = len(nodes)
    lengths = np.linalg.norm(b - a, axis=1)
    mid = 0.5 * (a + b)
    pairs = cKDTree(mid).query_pairs(float(lengths.max()) * (1 + 1e-12), output_type="ndarray")
    if len(pairs) == 0:
        return False
    i, j = pairs[:, 0], pairs[:, 1]
    gap = np.abs(i - j)
    keep = (gap != 1) & (gap != n - 1)
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return False
    return bool(np.any(_segments_intersect(a[i], b[i], a[j], b[j])))


def polylines_intersect(nodes_a: np.ndarray, nodes_b: np.ndarray) -> bool:
    a0, a1 = _segment_arrays(nodes_a)
    b0, b1 = _segment_arrays(nodes_b)
    la = np.linalg.norm(a1 - a0, axis=1).max()
    lb = np.linalg.norm(b1 - b0, axis=1).max()
    r = 0.5 * (la + lb) * (1 + 1e-12)
    hits = cKDTree(0.5 * (a0 + a1)).query_ball_tree(cKDTree(0.5 * (b0 + b1)), r)
    i = np.repeat(np.arange(len(hits)), [len(h) for h in hits])
    if len(i) == 0:
        return False
    j = np.concatenate([np.asarray(h, dtype=int) for h in hits if h])
    return bool(np.any(_segments_intersect(a0[i], a1[i], b0[j], b1[j])))


def _is_inside(point: np.ndarray, nodes: np.ndarray) -> bool:
    """Even-odd point-in-polygon test."""
    x, y = point
    a, b = _segment_arrays(nodes)
    cond = (a[:, 1] > y) != (b[:, 1] > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
    return bool(np.count_nonzero(cond & (xc > x)) % 2)


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True, eq=False)
class PatchBoundary:
    """One closed, positively oriented boundary curve of a patch.

    ``param_spacing`` is the arc length between consecutive nodes; for curves
    produced by :func:`reparametrize_arclength` it is exact to interpolation
    accuracy.
    """

    nodes: FloatArray
    coupling: float = 1.0
    param_spacing: float = 0.0
    label: int = 0

    def __post_init__(self) -> None:
        nodes = np.ascontiguousarray(np.asarray(self.nodes, dtype=np.float64))
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise GeometryError("nodes must have shape (N, 2)")
        if len(nodes) < MIN_NODES:
            raise GeometryError(f"curve needs at least {MIN_NODES} nodes, got {len(nodes)}")
        if not np.isfinite(nodes).all():
            raise GeometryError("nodes contain non-finite values")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "coupling", float(self.coupling))
        object.__setattr__(self, "label", int(self.label))
        gaps = self.gaps()
        if gaps.min() <= 0:
            raise GeometryError("repeated consecutive nodes")
        if self.param_spacing <= 0:
            object.__setattr__(self, "param_spacing", float(gaps.mean()))
        if signed_area(nodes) <= 0:
            raise GeometryError("curve must be positively oriented (counterclockwise)")
        if polyline_self_intersects(nodes):
            raise GeometryError(f"polyline of patch {self.label} self-intersects")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def check_quasi_uniform(self) -> None:
        gaps = self.gaps()
        if gaps.max() / gaps.min() > QUASI_UNIFORM_RATIO:
            raise GeometryError(f"node gaps of patch {self.label} are not quasi-uniform "
                                f"(max/min = {gaps.max() / gaps.min():.3f})")

    def gaps(self) -> FloatArray:
        return np.linalg.norm(np.roll(self.nodes, -1, axis=0) - self.nodes, axis=1)

    def perimeter(self) -> float:
        """Arc length of the trigonometric interpolant."""
        zt = sp.diff(sp.to_complex(self.nodes))
        return float(np.abs(zt).mean() * 2 * np.pi)

    def area(self) -> float:
        """Enclosed area of the trigonometric interpolant (spectral quadrature)."""
        z = sp.to_complex(self.nodes)
        zt = sp.diff(z)
        return float(np.mean(z.real * zt.imag - z.imag * zt.real) * np.pi)

    def arc_positions(self) -> FloatArray:
        return np.arange(self.n) * self.param_spacing

    def with_nodes(self, nodes: np.ndarray, param_spacing: float = 0.0) -> "PatchBoundary":
        return PatchBoundary(nodes, self.coupling, param_spacing, self.label)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "coupling": self.coupling,
            "param_spacing": self.param_spacing,
            "nodes": self.nodes.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PatchBoundary":
        return cls(np.array(data["nodes"], dtype=np.float64), data["coupling"],
                   data.get("param_spacing", 0.0), data.get("label", 0))


@dataclass(frozen=True, eq=False)
class PatchSystem:
    """All patches plus the model parameters the diagnostics depend on."""

    patches: tuple[PatchBoundary, ...]
    alpha: float
    gamma: float | None = None
    rho: float = 1.0
    eta: float = 0.5
    time: float = 0.0
    k: int = field(init=False)

    def __post_init__(self) -> None:
        patches = tuple(self.patches)
        object.__setattr__(self, "patches", patches)
        if not patches:
            raise GeometryError("a patch system needs at least one patch")
        if not 0.0 < self.alpha < 1.0:
            raise GeometryError(f"alpha must lie in (0, 1), got {self.alpha}")
        k = regularity_index(self.alpha)
        object.__setattr__(self, "k", k)
        gmin = minimal_gamma(self.alpha)
        gamma = gmin if self.gamma is None else float(self.gamma)
        if gamma < gmin - 1e-12 or gamma > 1.0 or gamma <= 0.0:
            raise GeometryError(f"gamma must lie in [{gmin:g}, 1] for alpha={self.alpha}, got {gamma}")
        object.__setattr__(self, "gamma", gamma)
        if self.rho <= 0 or self.eta <= 0:
            raise GeometryError("rho and eta must be positive")
        shortest = min(p.perimeter() for p in patches)
        if self.eta >= 0.5 * shortest:
            raise GeometryError(f"eta={self.eta} must be below half the shortest perimeter ({shortest:.4g})")
        for p in patches:
            p.check_quasi_uniform()
        labels = [p.label for p in patches]
        if len(set(labels)) != len(labels):
            raise GeometryError("patch labels must be unique")
        for a in range(len(patches)):
            for b in range(a + 1, len(patches)):
                pa, pb = patches[a].nodes, patches[b].nodes
                if polylines_intersect(pa, pb) or _is_inside(pa[0], pb) or _is_inside(pb[0], pa):
                    raise GeometryError(
                        f"patches {patches[a].label} and {patches[b].label} overlap or touch")

    @property
    def exponent(self) -> float:
        return bound_exponent(self.alpha, self.k, self.gamma)

    def patch(self, label: int) -> PatchBoundary:
        for p in self.patches:
            if p.label == label:
                return p
        raise KeyError(label)

    def replace(self, **changes: Any) -> "PatchSystem":
        data = dict(patches=self.patches, alpha=self.alpha, gamma=self.gamma,
                    rho=self.rho, eta=self.eta, time=self.time)
        data.update(changes)
        return PatchSystem(**data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "rho": self.rho,
            "eta": self.eta,
            "time": self.time,
            "patches": [p.to_dict() for p in self.patches],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PatchSystem":
        return cls(tuple(PatchBoundary.from_dict(p) for p in data["patches"]),
                   data["alpha"], data.get("gamma"), data.get("rho", 1.0),
                   data.get("eta", 0.5), data.get("time", 0.0))


@dataclass(frozen=True)
class HolderNorm:
    """Discrete C^{k,gamma} norm estimate of one curve."""

    sup_derivatives: tuple[float, ...]
    seminorm: float
    total: float


# ---------------------------------------------------------------------------
# Operations


def _arclength_function(c: np.ndarray):
    """Fourier data for s(theta) = (P / 2pi) theta + periodic part."""
    n = len(c)
    k = sp.wavenumbers(n)
    speed = np.abs(np.fft.ifft(c * n * (1j * k) * _odd_mask(n)))
    sc = np.fft.fft(speed) / n
    mean = sc[0].real
    integ = np.zeros_like(sc)
    nz = k != 0
    integ[nz] = sc[nz] / (1j * k[nz])
    if n % 2 == 0:
        integ[n // 2] = 0.0
    return mean, integ, sc


def _odd_mask(n: int) -> np.ndarray:
    m = np.ones(n)
    if n % 2 == 0:
        m[n // 2] = 0.0
    return m


def reparametrize_arclength(curve: PatchBoundary, target_n: int | None = None,
                            *, tol: float = 1e-13, max_iter: int = 50) -> PatchBoundary:
    """Resample ``curve`` at ``target_n`` nodes equispaced in arc length.

    The input nodes are treated as samples of a smooth closed curve at
    equispaced parameter values; the first node is kept fixed so the map is
    idempotent.
    """
    n_in = curve.n
    target_n = n_in if target_n is None else int(target_n)
    if target_n < MIN_NODES:
        raise GeometryError(f"target_n must be at least {MIN_NODES}")
    if polyline_self_intersects(curve.nodes):
        raise GeometryError("cannot reparametrize a self-intersecting curve")
    c = sp.coefficients(sp.to_complex(curve.nodes))
    mean, integ, _ = _arclength_function(c)
    perimeter = 2 * np.pi * mean
    ds = perimeter / target_n

    def s_of(theta):
        return mean * theta + (sp.evaluate(integ, theta) - sp.evaluate(integ, np.zeros(1))[0]).real

    target_s = np.arange(target_n) * ds
    theta = target_s / mean
    dcoef = c * (1j * sp.wavenumbers(n_in)) * _odd_mask(n_in)
    for _ in range(max_iter):
        resid = s_of(theta) - target_s
        speed = np.abs(sp.evaluate(dcoef, theta))
        step = resid / speed
        theta = theta - step
        if np.max(np.abs(step)) < tol:
            break
    new = sp.to_points(sp.evaluate(c, theta))
    return PatchBoundary(new, curve.coupling, ds, curve.label)


def derivative(curve: PatchBoundary, order: int) -> FloatArray:
    """Arc-length derivative of the given order (1..3) at every node.

    Assumes the nodes are equispaced in arc length, so d/ds = (2pi/P) d/dtheta.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    z = sp.to_complex(curve.nodes)
    scale = 2 * np.pi / curve.perimeter()
    return sp.to_points(sp.diff(z, order) * scale**order)


def _max_difference_quotient(values: np.ndarray, spacing: float, gamma: float) -> float:
    """max over node pairs of |v_i - v_j| / d_ij^gamma, d_ij the periodic arc distance."""
    n = len(values)
    best = 0.0
    for m in range(1, n // 2 + 1):
        diff = np.linalg.norm(values - np.roll(values, -m, axis=0), axis=1)
        best = max(best, float(diff.max()) / (m * spacing) ** gamma)
    return best


def holder_norm(curve: PatchBoundary, k: int, gamma: float) -> HolderNorm:
    """Discrete C^{k,gamma} norm; a lower bound converging as N grows."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    sups = [float(np.linalg.norm(curve.nodes, axis=1).max())]
    top = None
    for order in range(1, k + 1):
        d = derivative(curve, order)
        sups.append(float(np.linalg.norm(d, axis=1).max()))
        top = d
    spacing = curve.perimeter() / curve.n
    semi = _max_difference_quotient(top, spacing, gamma)
    return HolderNorm(tuple(sups), semi, float(sum(sups) + semi))


def system_norm(system: PatchSystem) -> float:
    """max over patches of the C^{k,gamma} norm total."""
    return max(holder_norm(p, system.k, system.gamma).total for p in system.patches)


def arc_chord_ratio(curve: PatchBoundary, eta: float) -> float:
    """min |x(s)-x(r)| / |s-r| over node pairs with periodic arc separation in (0, eta]."""
    h = curve.param_spacing
    n = curve.n
    m_max = min(n // 2, int(np.floor(eta / h * (1 + 1e-12))))
    m_max = max(m_max, 1)
    best = np.inf
    for m in range(1, m_max + 1):
        chord = np.linalg.norm(curve.nodes - np.roll(curve.nodes, -m, axis=0), axis=1)
        best = min(best, float(chord.min()) / (m * h))
    return best


@dataclass(frozen=True)
class ClosePair:
    """Two boundary points realizing (a candidate for) the minimal distance."""

    p: FloatArray
    q: FloatArray
    distance: float
    patch_p: int
    patch_q: int
    index_p: int   # segment index (inter-patch) or node index (self)
    index_q: int


def _self_distance(curve: PatchBoundary, eta: float):
    """Node-pair distance restricted to periodic arc separation >= eta."""
    nodes = curve.nodes
    n = curve.n
    h = curve.param_spacing
    m_min = int(np.ceil(eta / h * (1 - 1e-12)))
    if m_min > n // 2:
        return np.inf, np.empty((0, 2), dtype=int)
    # upper bound from valid offsets
    ub = min(float(np.linalg.norm(nodes - np.roll(nodes, -m, axis=0), axis=1).min())
             for m in {m_min, n // 2})
    pairs = cKDTree(nodes).query_pairs(ub * (1 + 1e-9) + 1e-300, output_type="ndarray")
    if len(pairs) == 0:
        return ub, np.empty((0, 2), dtype=int)
    i, j = pairs[:, 0], pairs[:, 1]
    sep = np.abs(i - j)
    sep = np.minimum(sep, n - sep)
    ok = sep >= m_min
    i, j = i[ok], j[ok]
    dist = np.linalg.norm(nodes[i] - nodes[j], axis=1)
    return float(dist.min()), np.column_stack([i, j])[dist <= dist.min() + 1e-9]


def _inter_distance(ca: PatchBoundary, cb: PatchBoundary):
    a0, a1 = _segment_arrays(ca.nodes)
    b0, b1 = _segment_arrays(cb.nodes)
    tb = cKDTree(cb.nodes)
    ub = float(tb.query(ca.nodes)[0].min())
    la = np.linalg.norm(a1 - a0, axis=1).max()
    lb = np.linalg.norm(b1 - b0, axis=1).max()
    r = ub + 0.5 * (la + lb)
    hits = cKDTree(0.5 * (a0 + a1)).query_ball_tree(cKDTree(0.5 * (b0 + b1)), r * (1 + 1e-12))
    i = np.repeat(np.arange(len(hits)), [len(h) for h in hits])
    j = np.concatenate([np.asarray(h, dtype=int) for h in hits if h])
    dist, p, q = segment_distance(a0[i], a1[i], b0[j], b1[j])
    return dist, p, q, i, j


def min_distance(system: PatchSystem) -> tuple[float, list[ClosePair]]:
    """Minimal distance d(t) over all patch pairs and eta-separated self pairs.

    Inter-patch distances are polyline segment distances; self distances are
    node distances with periodic arc separation at least ``system.eta``.
    Every pair within 1e-9 of the minimum is returned (duplicates removed).
    """
    found: list[tuple[float, ClosePair]] = []
    patches = system.patches
    for a, ca in enumerate(patches):
        dself, idx = _self_distance(ca, system.eta)
        for i, j in idx:
            found.append((dself, ClosePair(ca.nodes[i].copy(), ca.nodes[j].copy(), dself,
                                           ca.label, ca.label, int(i), int(j))))
        for cb in patches[a + 1:]:
            dist, p, q, i, j = _inter_distance(ca, cb)
            for m in np.flatnonzero(dist <= dist.min() + 1e-9):
                found.append((float(dist[m]), ClosePair(p[m], q[m], float(dist[m]), ca.label,
                                                        cb.label, int(i[m]), int(j[m]))))
    d = min(f[0] for f in found) if found else np.inf
    pairs: list[ClosePair] = []
    seen: set[tuple] = set()
    for dist, pair in found:
        if dist > d + 1e-9:
            continue
        # segment pairs sharing an endpoint report the same point twice
        key = (pair.patch_p, pair.patch_q, *np.round(np.concatenate([pair.p, pair.q]) * 1e12).tolist())
        if key not in seen:
            seen.add(key)
            pairs.append(pair)
    return float(d), pairs


# ---------------------------------------------------------------------------
# Shape constructors


def _from_parametric(fn, n: int, coupling: float, label: int, oversample: int = 8) -> PatchBoundary:
    """Sample a parametric closed curve finely, then resample equispaced in arc length."""
    m = max(n * oversample, 256)
    fine = PatchBoundary(fn(2 * np.pi * np.arange(m) / m), coupling, 0.0, label)
    return reparametrize_arclength(fine, n)


def disc(center: Sequence[float] = (0.0, 0.0), radius: float = 1.0, n: int = 256,
         coupling: float = 1.0, label: int = 0, phase: float = 0.0) -> PatchBoundary:
    cx, cy = center
    t = phase + 2 * np.pi * np.arange(n) / n
    nodes = np.column_stack([cx + radius * np.cos(t), cy + radius * np.sin(t)])
    return PatchBoundary(nodes, coupling, 2 * np.pi * radius / n, label)


def ellipse(center: Sequence[float] = (0.0, 0.0), a: float = 2.0, b: float = 1.0,
            angle: float = 0.0, n: int = 256, coupling: float = 1.0,
            label: int = 0) -> PatchBoundary:
    cx, cy = center
    ca, sa = np.cos(angle), np.sin(angle)

    def fn(t):
        x, y = a * np.cos(t), b * np.sin(t)
        return np.column_stack([cx + ca * x - sa * y, cy + sa * x + ca * y])

    return _from_parametric(fn, n, coupling, label)


def fourier(center: Sequence[float] = (0.0, 0.0), coefficients: Sequence[Sequence[float]] = ((1.0, 0.0),),
            n: int = 256, coupling: float = 1.0, label: int = 0) -> PatchBoundary:
    """Polar Fourier curve r(t) = sum_m (a_m cos(m t) + b_m sin(m t)), m = 0, 1, ..."""
    cx, cy = center
    coef = np.asarray(coefficients, dtype=np.float64)

    def fn(t):
        r = np.zeros_like(t)
        for m, (am, bm) in enumerate(coef):
            r += am * np.cos(m * t) + bm * np.sin(m * t)
        return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])

    return _from_parametric(fn, n, coupling, label)


def curve_from_function(fn, n: int = 256, coupling: float = 1.0, label: int = 0) -> PatchBoundary:
    """Arc-length resampling of an arbitrary counterclockwise parametric curve ``fn(t)``, t in [0, 2pi)."""
    return _from_parametric(fn, n, coupling, label)
