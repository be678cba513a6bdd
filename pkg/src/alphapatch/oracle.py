"""Slow reference values of the Biot-Savart integral by direct area quadrature.

Nothing here shares code with the contour evaluator in :mod:`alphapatch.velocity`
beyond the curve containers. Patch regions are rasterized onto a uniform grid
(cell-center membership against the node polyline) and the area kernel is
summed cell by cell. The principal value at a boundary point is taken by
excising balls of radius 8h, 4h and 2h around it and extrapolating.

The grid is always placed so that the singular point sits on a cell corner,
which makes the discrete excision ball symmetric under y1 -> -y1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from . import _spectral as sp
from .curves import PatchSystem

FloatArray = NDArray[np.float64]

EXCISION_FACTORS = (8.0, 4.0, 2.0)


class OracleConvergenceError(RuntimeError):
    """Excision sums are not monotone in the radius beyond rounding noise."""


class GraphError(ValueError):
    """A boundary branch is not a single-valued graph over the admissibility window."""


@dataclass(frozen=True)
class OracleResult:
    value: float | FloatArray
    excision_radii: tuple[float, ...]
    extrapolated: bool
    # |value(h) - value(2h)|: size of the first-order rasterization error at h
    error_estimate: float | None = None


def rasterize(nodes: np.ndarray, h: float) -> tuple[FloatArray, FloatArray]:
    """Centers ((i+1/2)h, (j+1/2)h) of grid cells lying inside a closed polyline.

    Scanline even-odd rule: for each cell row the polyline crossings are
    sorted and a center is inside when an odd number of crossings lies to its
    left.
    """
    x0, y0 = nodes[:, 0], nodes[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    j_lo = int(np.floor(y0.min() / h)) - 1
    j_hi = int(np.ceil(y0.max() / h)) + 1
    i_lo = int(np.floor(x0.min() / h)) - 1
    i_hi = int(np.ceil(x0.max() / h)) + 1
    xc = (np.arange(i_lo, i_hi) + 0.5) * h
    xs, ys = [], []
    # half-open rule on edge endpoints avoids double counting at vertices
    lo_e, hi_e = np.minimum(y0, y1), np.maximum(y0, y1)
    for j in range(j_lo, j_hi):
        yc = (j + 0.5) * h
        hit = (lo_e <= yc) & (yc < hi_e)
        if not hit.any():
            continue
        t = (yc - y0[hit]) / (y1[hit] - y0[hit])
        cross = np.sort(x0[hit] + t * (x1[hit] - x0[hit]))
        inside = np.searchsorted(cross, xc) % 2 == 1
        if inside.any():
            xs.append(xc[inside])
            ys.append(np.full(int(inside.sum()), yc))
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ys)


def _frame_at(system: PatchSystem, label: int, node: int):
    """Origin and rotation (rows e1, e2) of the local frame at a boundary node."""
    patch = system.patch(label)
    z = sp.to_complex(patch.nodes)
    t = sp.diff(z)[node]
    t /= abs(t)
    e1 = np.array([t.real, t.imag])
    e2 = np.array([-t.imag, t.real])
    return patch.nodes[node].copy(), np.vstack([e1, e2])


def _extrapolate(sums: Sequence[float]) -> tuple[float, bool]:
    s8, s4, s2 = sums
    d1, d2 = s4 - s8, s2 - s4
    noise = 1e-10 * max(1.0, abs(s2))
    if abs(d1) <= noise and abs(d2) <= noise:
        return s2, False
    if d1 * d2 < 0 and min(abs(d1), abs(d2)) > noise:
        raise OracleConvergenceError(
            f"excision sums not monotone in the radius: {s8!r}, {s4!r}, {s2!r}")
    if abs(d1) <= noise:
        return s2, False
    ratio = min(max(d2 / d1, 0.0), 0.75)
    return s2 + d2 * ratio / (1.0 - ratio), True


def _pv_sum(y1, y2, alpha, h, center=(0.0, 0.0)):
    """Sums of y1 |y - c|^(-2-2a) h^2 outside balls of radius 8h, 4h, 2h around c = (c1, c2).

    The center must lie on a grid corner with c1 = 0, which keeps each discrete
    ball symmetric in y1.
    """
    r = np.hypot(y1 - center[0], y2 - center[1])
    r_safe = np.where(r > 0, r, 1.0)
    f = y1 * r_safe ** (-2.0 - 2.0 * alpha) * h * h
    order = np.argsort(r, kind="stable")
    r_sorted = r[order]
    cum = np.cumsum(f[order][::-1])[::-1]  # tail sums: sum over r >= r_sorted[i]
    out = []
    for fac in EXCISION_FACTORS:
        i = int(np.searchsorted(r_sorted, fac * h, side="right"))
        out.append(float(cum[i]) if i < len(cum) else 0.0)
    return out


def oracle_normal_velocity(system: PatchSystem, patch: int, node: int, grid_h: float) -> OracleResult:
    """Outward normal velocity at a node by rasterized area quadrature.

    In the local frame (origin at the node, y1 along the counterclockwise
    tangent) the outward normal speed is ``-sum_j theta_j PV int_{Omega_j} y1 |y|^(-2-2a) dy``.
    """
    p = system.patch(patch)
    if grid_h > p.param_spacing / 4 * (1 + 1e-12):
        raise ValueError("grid_h must not exceed a quarter of the node spacing")
    origin, rot = _frame_at(system, patch, node)
    locals_ = [((other.nodes - origin) @ rot.T, other.coupling)
               for other in system.patches if other.coupling != 0.0]

    def at(h):
        totals = np.zeros(3)
        for local, coupling in locals_:
            y1, y2 = rasterize(local, h)
            totals -= coupling * np.array(_pv_sum(y1, y2, system.alpha, h))
        return _extrapolate(list(totals))

    value, extrapolated = at(grid_h)
    coarse, _ = at(2.0 * grid_h)
    radii = tuple(f * grid_h for f in EXCISION_FACTORS)
    return OracleResult(value, radii, extrapolated, abs(value - coarse))


def oracle_velocity(system: PatchSystem, x: Sequence[float], grid_h: float) -> OracleResult:
    """Full velocity at a point outside every patch (no excision needed)."""
    x = np.asarray(x, dtype=np.float64)
    total = np.zeros(2)
    for other in system.patches:
        y1, y2 = rasterize(other.nodes - x, grid_h)
        r2 = y1 * y1 + y2 * y2
        if r2.size and r2.min() == 0.0:
            raise ValueError("evaluation point lies inside a patch")
        w = other.coupling * r2 ** (-1.0 - system.alpha) * grid_h * grid_h
        # (x - y)^perp with perp(v) = (v2, -v1), y measured from x
        total += np.array([np.sum(-y2 * w), np.sum(y1 * w)])
    return OracleResult(total, (), False)


def _branch_graph(local: np.ndarray, start: int, r: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run of consecutive nodes through ``start`` with |y1| <= r, as a graph y2 = f(y1).

    Returns the sorted abscissae, ordinates, and the node indices of the run.
    """
    n = len(local)
    inside = np.abs(local[:, 0]) <= r
    if inside.all():
        raise GraphError("the whole boundary lies in the admissibility strip")
    lo = start
    while inside[(lo - 1) % n]:
        lo -= 1
    hi = start
    while inside[(hi + 1) % n]:
        hi += 1
    idx = np.arange(lo - 1, hi + 2) % n  # include the first nodes outside the strip
    xs, ys = local[idx, 0], local[idx, 1]
    dx = np.diff(xs)
    if not (np.all(dx > 0) or np.all(dx < 0)):
        raise GraphError("boundary branch is not a graph over [-r, r]")
    if xs[0] > xs[-1]:
        xs, ys, idx = xs[::-1], ys[::-1], idx[::-1]
    if xs[0] > -r or xs[-1] < r:
        raise GraphError("boundary branch does not span [-r, r]")
    return xs, ys, idx


def oracle_I_decomposition(system: PatchSystem, pair, grid_h: float) -> tuple[float, float, float]:
    """The three pieces of the pair velocity difference by rasterized quadrature.

    Local frame: p at the origin, q = (0, delta). The pieces split
    ``int y1 (|y - q|^(-2-2a) - |y|^(-2-2a)) omega(y) dy`` into the box region
    below the lower branch (I1, coupling of p's patch), the box region above
    the upper branch (I2, coupling of q's patch) and the rest (I3, actual omega).
    Their sum is the rate of change of |p - q| under the flow, which for
    outward normals equals ``-(u_n(p) + u_n(q))``.
    """
    p, q = np.asarray(pair.p, dtype=float), np.asarray(pair.q, dtype=float)
    delta, r = float(pair.delta), float(pair.r)
    e2 = (q - p) / np.linalg.norm(q - p)
    rot = np.vstack([np.array([e2[1], -e2[0]]), e2])
    alpha = system.alpha
    pp, pq = system.patch(pair.patch_p), system.patch(pair.patch_q)

    def local_nodes(patch, origin):
        return (patch.nodes - origin) @ rot.T

    def nearest(local, target):
        return int(np.argmin(np.hypot(local[:, 0] - target[0], local[:, 1] - target[1])))

    lp = local_nodes(pp, p)
    lq = local_nodes(pq, p)
    fx, fy, run_f = _branch_graph(lp, nearest(lp, (0.0, 0.0)), r)
    gx, gy, run_g = _branch_graph(lq, nearest(lq, (0.0, delta)), r)
    if np.interp(0.0, gx, gy) - np.interp(0.0, fx, fy) <= 0:
        raise GraphError("upper branch does not lie above the lower branch")

    # no other boundary piece may enter E_p or E_q
    for patch in system.patches:
        loc = local_nodes(patch, p)
        mask = np.abs(loc[:, 0]) < r
        if patch.label == pair.patch_p:
            mask[run_f] = False
        if patch.label == pair.patch_q:
            mask[run_g] = False
        if not mask.any():
            continue
        yy, xx = loc[mask, 1], loc[mask, 0]
        in_ep = (yy >= -r) & (yy <= np.interp(xx, fx, fy))
        in_eq = (yy <= r + delta) & (yy >= np.interp(xx, gx, gy))
        if in_ep.any() or in_eq.any():
            raise GraphError("another boundary branch enters the graph region")

    # refine h so that delta is a whole number of cells: p and q both sit on cell corners
    h = delta / np.ceil(delta / grid_h)

    def in_ep(y1, y2):
        return (np.abs(y1) <= r) & (y2 >= -r) & (y2 <= np.interp(y1, fx, fy))

    def in_eq(y1, y2):
        return (np.abs(y1) <= r) & (y2 <= r + delta) & (y2 >= np.interp(y1, gx, gy))

    n1 = int(np.ceil(r / h)) + 1
    j = np.arange(-n1, int(np.ceil((r + delta) / h)) + 1)
    i = np.arange(-n1, n1)
    by1, by2 = (a.ravel() for a in np.meshgrid((i + 0.5) * h, (j + 0.5) * h, indexing="ij"))

    def piece(mask, singular_at_q):
        y1, y2 = by1[mask], by2[mask]
        c_sing, c_reg = ((0.0, delta), (0.0, 0.0)) if singular_at_q else ((0.0, 0.0), (0.0, delta))
        s, _ = _extrapolate(_pv_sum(y1, y2, alpha, h, c_sing))
        reg = float(np.sum(y1 * np.hypot(y1, y2 - c_reg[1]) ** (-2.0 - 2.0 * alpha))) * h * h
        # kernel is |y - q|^(-2-2a) - |y|^(-2-2a)
        return s - reg if singular_at_q else reg - s

    i1 = pp.coupling * piece(in_ep(by1, by2), singular_at_q=False)
    i2 = pq.coupling * piece(in_eq(by1, by2), singular_at_q=True)

    i3 = 0.0
    for patch in system.patches:
        if patch.coupling == 0.0:
            continue
        y1, y2 = rasterize(local_nodes(patch, p), h)
        keep = ~(in_ep(y1, y2) | in_eq(y1, y2))
        y1, y2 = y1[keep], y2[keep]
        k = y1 * (np.hypot(y1, y2 - delta) ** (-2.0 - 2.0 * alpha) - np.hypot(y1, y2) ** (-2.0 - 2.0 * alpha))
        i3 += patch.coupling * float(np.sum(k)) * h * h
    return float(i1), float(i2), float(i3)
