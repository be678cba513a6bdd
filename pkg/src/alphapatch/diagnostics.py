"""Monitors for the no-splash mechanism: admissible pairs, the velocity
difference bound, the distance inequality and the exponential separation floor.

Velocity difference convention
------------------------------
For a closest pair (p, q) with unit vector e = (q - p)/|q - p| the outward
normals are n(p) = e and n(q) = -e. The quantity that controls the distance is

    Delta = (u(q) - u(p)) . e = -(u_n(q) + u_n(p)),

the rate of change of |p - q| along the flow. This is what the bound and the
three-piece decomposition are about; the ratio below is |Delta| / (delta * integrand).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from . import _spectral as sp
from .curves import (HolderNorm, PatchSystem, arc_chord_ratio, holder_norm, min_distance)
from .velocity import DEFAULT_RULE, NormalVelocityField, QuadratureRule, normal_velocity_at

FloatArray = NDArray[np.float64]

VERDICT_OK = "criterion consistent"
VERDICT_VIOLATED = "bound violated — numerical artifact suspected"


class NotAdmissibleError(ValueError):
    """The velocity bound was requested for a pair that failed the admissibility test."""


@dataclass(frozen=True)
class AdmissiblePair:
    p: FloatArray
    q: FloatArray
    delta: float
    r: float
    branch_count_ok: bool
    local_min_ok: bool
    admissible: bool
    patch_p: int
    patch_q: int
    theta_p: float    # curve parameters of p and q (node j sits at 2 pi j / N)
    theta_q: float


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    d: float
    holder_total: float
    r: float
    bound_exponent: float
    integrand: float
    criterion_integral: float
    gronwall_floor: float
    velocity_diff_ratio: float | None
    area_drift: float
    arc_chord: float


CSV_COLUMNS = ("time", "d", "holder_total", "r", "integrand", "criterion_integral",
               "gronwall_floor", "velocity_diff_ratio", "area_drift", "arc_chord")


def admissibility_radius(system: PatchSystem, norm: HolderNorm | float) -> float:
    """r = 1/4 min(rho, (0.01 |dOmega|)^(-1/(k+gamma-1)))."""
    total = norm.total if isinstance(norm, HolderNorm) else float(norm)
    return 0.25 * min(system.rho, (0.01 * total) ** (-1.0 / (system.k + system.gamma - 1.0)))


def system_holder_total(system: PatchSystem) -> float:
    return max(holder_norm(p, system.k, system.gamma).total for p in system.patches)


# -- closest pair refinement ----------------------------------------------------

class _Spectral:
    def __init__(self, nodes: np.ndarray) -> None:
        z = sp.to_complex(nodes)
        self.n = len(z)
        self.c = sp.coefficients(z)

    def __call__(self, theta: float, order: int = 0) -> complex:
        return complex(sp.evaluate(self.c, np.array([theta]), order)[0])


def _refine(ca: _Spectral, cb: _Spectral, s: float, t: float, max_iter: int = 50):
    """Newton iteration for a critical point of |z_a(s) - z_b(t)|^2 / 2.

    Returns (s, t, is_local_min).
    """
    for _ in range(max_iter):
        w = ca(s) - cb(t)
        za, zaa = ca(s, 1), ca(s, 2)
        zb, zbb = cb(t, 1), cb(t, 2)
        g = np.array([(w.conjugate() * za).real, -(w.conjugate() * zb).real])
        hss = abs(za) ** 2 + (w.conjugate() * zaa).real
        htt = abs(zb) ** 2 - (w.conjugate() * zbb).real
        hst = -(za.conjugate() * zb).real
        hess = np.array([[hss, hst], [hst, htt]])
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            return s, t, False
        # keep the step inside one node spacing; the start is already node-accurate
        lim = 2 * np.pi / min(ca.n, cb.n)
        scale = min(1.0, lim / max(np.abs(step).max(), 1e-300))
        s, t = s + scale * step[0], t + scale * step[1]
        if np.abs(step).max() < 1e-14:
            break
    eig = np.linalg.eigvalsh(hess)
    return s, t, bool(eig.min() > 0)


def _components(system: PatchSystem, centers: Sequence[np.ndarray], radius: float):
    """Maximal runs of consecutive nodes inside the union of balls, per patch."""
    comps = []
    for patch in system.patches:
        inside = np.zeros(patch.n, dtype=bool)
        for c in centers:
            inside |= np.linalg.norm(patch.nodes - c, axis=1) <= radius
        if not inside.any():
            continue
        if inside.all():
            comps.append((patch.label, np.arange(patch.n)))
            continue
        # rotate so the sequence starts outside, then split at entry points
        start = int(np.flatnonzero(~inside)[0])
        order = np.roll(np.arange(patch.n), -start)
        flags = inside[order]
        edges = np.diff(flags.astype(np.int8), prepend=0, append=0)
        for a, b in zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)):
            comps.append((patch.label, order[a:b]))
    return comps


def find_admissible_pairs(system: PatchSystem) -> list[AdmissiblePair]:
    """Refined closest pairs from :func:`min_distance`, each with its admissibility verdict."""
    d, close = min_distance(system)
    if not close or not np.isfinite(d):
        return []
    total = system_holder_total(system)
    r = admissibility_radius(system, total)
    spectral = {p.label: _Spectral(p.nodes) for p in system.patches}
    out: list[AdmissiblePair] = []
    seen: set[tuple] = set()
    for cp in close:
        pa, pb = system.patch(cp.patch_p), system.patch(cp.patch_q)
        dth_a, dth_b = 2 * np.pi / pa.n, 2 * np.pi / pb.n
        if cp.patch_p == cp.patch_q:
            s0, t0 = cp.index_p * dth_a, cp.index_q * dth_b
        else:
            def frac(nodes, i, x):
                a, b = nodes[i], nodes[(i + 1) % len(nodes)]
                return float(np.clip(np.dot(x - a, b - a) / np.dot(b - a, b - a), 0.0, 1.0))
            s0 = (cp.index_p + frac(pa.nodes, cp.index_p, cp.p)) * dth_a
            t0 = (cp.index_q + frac(pb.nodes, cp.index_q, cp.q)) * dth_b
        at_cutoff = False
        if cp.patch_p == cp.patch_q:
            # the constrained self distance is a genuine local minimum only away from the cutoff
            m = abs(cp.index_p - cp.index_q)
            at_cutoff = min(m, pa.n - m) * pa.param_spacing < system.eta + 2 * pa.param_spacing
        if at_cutoff:
            # pinned by the eta cutoff: not a critical pair of the self distance
            continue
        s, t, is_min = _refine(spectral[cp.patch_p], spectral[cp.patch_q], s0, t0)
        if cp.patch_p == cp.patch_q:
            sep = abs(math.remainder(s - t, 2 * np.pi)) / (2 * np.pi) * pa.perimeter()
            if sep < system.eta:
                s, t, is_min = s0, t0, False
        zp, zq = spectral[cp.patch_p](s), spectral[cp.patch_q](t)
        p = np.array([zp.real, zp.imag])
        q = np.array([zq.real, zq.imag])
        delta = float(np.linalg.norm(q - p))
        key = (cp.patch_p, cp.patch_q, *np.round(np.concatenate([p, q]) * 1e10).tolist())
        if key in seen:
            continue
        seen.add(key)

        comps = _components(system, (p, q), 2 * r)
        ip = int(np.argmin(np.linalg.norm(pa.nodes - p, axis=1)))
        iq = int(np.argmin(np.linalg.norm(pb.nodes - q, axis=1)))
        owner_p = [k for k, (lab, idx) in enumerate(comps) if lab == cp.patch_p and ip in idx]
        owner_q = [k for k, (lab, idx) in enumerate(comps) if lab == cp.patch_q and iq in idx]
        branch_ok = (len(comps) == 2 and len(owner_p) == 1 and len(owner_q) == 1
                     and owner_p[0] != owner_q[0])

        local_ok = False
        if is_min and branch_ok:
            # nodes are points of the curves, so any closer node pair refutes minimality
            c1 = pa.nodes[comps[owner_p[0]][1]]
            c2 = pb.nodes[comps[owner_q[0]][1]]
            nearest = cKDTree(c2).query(c1)[0].min()
            local_ok = bool(nearest >= delta * (1 - 1e-9))
        out.append(AdmissiblePair(p, q, delta, r, branch_ok, local_ok, branch_ok and local_ok,
                                  cp.patch_p, cp.patch_q, float(s % (2 * np.pi)),
                                  float(t % (2 * np.pi))))
    return out


# -- velocity difference -------------------------------------------------------------

def pair_velocities(system: PatchSystem, pair: AdmissiblePair,
                    rule: QuadratureRule = DEFAULT_RULE) -> tuple[float, float, float]:
    """(u_n(p), u_n(q), Delta) with outward normals and Delta = -(u_n(p) + u_n(q))."""
    up = normal_velocity_at(system, pair.patch_p, pair.theta_p, rule)
    uq = normal_velocity_at(system, pair.patch_q, pair.theta_q, rule)
    return up, uq, -(up + uq)


def velocity_difference_ratio(system: PatchSystem, pair: AdmissiblePair,
                              field: NormalVelocityField | None = None,
                              norm: HolderNorm | float | None = None,
                              rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Empirical constant |Delta| / (delta * |dOmega|^exponent) of the velocity bound.

    ``field`` only contributes its prefactor (the kernel normalization); the
    velocities themselves are evaluated at the refined points p and q.
    """
    if not pair.admissible:
        raise NotAdmissibleError("velocity bound requested for a non-admissible pair")
    if norm is None:
        total = system_holder_total(system)
    else:
        total = norm.total if isinstance(norm, HolderNorm) else float(norm)
    prefactor = field.prefactor if field is not None else 1.0
    _, _, diff = pair_velocities(system, pair, rule)
    diff = abs(prefactor * diff)
    if diff < 1e-14:
        return 0.0
    return diff / (pair.delta * total ** system.exponent)


# -- time series --------------------------------------------------------------------

def _times(records: Sequence[DiagnosticsRecord]) -> np.ndarray:
    t = np.array([rec.time for rec in records], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("record times must be strictly increasing")
    return t


def distance_inequality_residual(records: Sequence[DiagnosticsRecord], C: float) -> float:
    """min over interior records of d'(t) + C d(t) integrand(t); d' by nonuniform central differences."""
    if len(records) < 3:
        raise ValueError("at least three records are needed")
    t = _times(records)
    d = np.array([rec.d for rec in records])
    g = np.array([rec.integrand for rec in records])
    dprime = np.gradient(d, t)
    res = dprime + C * d * g
    return float(res[1:-1].min())


def residual_series(records: Sequence[DiagnosticsRecord], C: float) -> np.ndarray:
    """d'(t) + C d(t) integrand(t) at every record (one-sided differences at the ends)."""
    t = _times(records)
    d = np.array([rec.d for rec in records])
    g = np.array([rec.integrand for rec in records])
    return np.gradient(d, t) + C * d * g


def gronwall_floor(records: Sequence[DiagnosticsRecord], C: float) -> list[float]:
    d0 = records[0].d
    return [d0 * math.exp(-C * rec.criterion_integral) for rec in records]


def fitted_constant(records: Iterable[DiagnosticsRecord]) -> float:
    """C_fit: the largest measured velocity-difference ratio (0 if none was measured)."""
    vals = [rec.velocity_diff_ratio for rec in records if rec.velocity_diff_ratio is not None]
    return max(vals) if vals else 0.0


def splash_criterion_report(records: Sequence[DiagnosticsRecord], C: float | None = None,
                            integral_cap: float = 1e3, collapse_fraction: float = 1e-2) -> dict:
    """Summary of a run against the splash criterion.

    The bound is flagged as violated when d falls below the exponential floor,
    or when d collapses (below ``collapse_fraction * d(0)``) while the
    criterion integral is still below ``integral_cap``.
    """
    c_fit = fitted_constant(records)
    c_used = 2.0 * c_fit if C is None else float(C)
    d = np.array([rec.d for rec in records])
    floor = np.array(gronwall_floor(records, c_used))
    final_integral = records[-1].criterion_integral
    min_residual = distance_inequality_residual(records, c_used) if len(records) >= 3 else None
    below_floor = bool(np.any(d < floor * (1 - 1e-9)))
    collapsed = bool(d[-1] <= collapse_fraction * d[0])
    violated = below_floor or (collapsed and final_integral < integral_cap)

    t_est = None
    blowup_exponent = None
    if len(records) >= 5:
        t = np.array([rec.time for rec in records[-5:]])
        dd = d[-5:]
        if np.all(np.diff(dd) < 0):
            coef = np.polyfit(t - t[-1], dd, 2)
            roots = [x.real for x in np.roots(coef) if abs(x.imag) < 1e-12 and x.real > 0]
            if roots:
                t_est = float(t[-1] + min(roots))
                ts = np.array([rec.time for rec in records])
                ig = np.array([rec.integrand for rec in records])
                ok = (t_est - ts > 0) & (ig > 0)
                if ok.sum() >= 2:
                    blowup_exponent = float(np.polyfit(np.log(t_est - ts[ok]), np.log(ig[ok]), 1)[0])
    margin = d / np.where(floor > 0, floor, np.inf)
    return {
        "final_integral": float(final_integral),
        "C_fit": float(c_fit),
        "C_used": float(c_used),
        "verdict": VERDICT_VIOLATED if violated else VERDICT_OK,
        "T_est": t_est,
        "T_est_is_estimate": True,
        "blowup_exponent": blowup_exponent,
        "min_residual": None if min_residual is None else float(min_residual),
        "min_distance_over_floor": float(margin.min()),
        "final_d": float(d[-1]),
        "final_floor": float(floor[-1]),
    }


# -- running tracker ----------------------------------------------------------------

class DiagnosticsTracker:
    """Builds consecutive :class:`DiagnosticsRecord` values along a run.

    Holds the running quantities (d(0), initial areas, the criterion integral,
    the running C_fit), all of which are serializable for checkpoints.
    """

    def __init__(self, rule: QuadratureRule = DEFAULT_RULE) -> None:
        self.rule = rule
        self.d0: float | None = None
        self.area0: list[float] | None = None
        self.integral = 0.0
        self.c_fit = 0.0
        self.last_time: float | None = None
        self.last_integrand: float | None = None

    def state(self) -> dict:
        return {"d0": self.d0, "area0": self.area0, "integral": self.integral, "c_fit": self.c_fit,
                "last_time": self.last_time, "last_integrand": self.last_integrand}

    @classmethod
    def from_state(cls, state: dict, rule: QuadratureRule = DEFAULT_RULE) -> "DiagnosticsTracker":
        tr = cls(rule)
        for key in ("d0", "area0", "integral", "c_fit", "last_time", "last_integrand"):
            setattr(tr, key, state[key])
        return tr

    def record(self, system: PatchSystem) -> DiagnosticsRecord:
        d, _ = min_distance(system)
        total = system_holder_total(system)
        r = admissibility_radius(system, total)
        expo = system.exponent
        integrand = total ** expo
        if self.last_time is None:
            self.d0 = float(d)
            self.area0 = [p.area() for p in system.patches]
        else:
            self.integral += 0.5 * (system.time - self.last_time) * (integrand + self.last_integrand)
        self.last_time = system.time
        self.last_integrand = integrand

        ratio = None
        best = None
        for pair in find_admissible_pairs(system):
            if pair.admissible and (best is None or pair.delta < best.delta):
                best = pair
        if best is not None:
            ratio = velocity_difference_ratio(system, best, norm=total, rule=self.rule)
            self.c_fit = max(self.c_fit, ratio)
        drift = max(abs(p.area() - a0) / a0 for p, a0 in zip(system.patches, self.area0))
        chord = min(arc_chord_ratio(p, system.eta) for p in system.patches)
        floor = self.d0 * math.exp(-2.0 * self.c_fit * self.integral) if np.isfinite(self.d0) else self.d0
        return DiagnosticsRecord(float(system.time), float(d), float(total), float(r), float(expo),
                                 float(integrand), float(self.integral), float(floor), ratio,
                                 float(drift), float(chord))


def record_to_row(rec: DiagnosticsRecord) -> list[str]:
    values = asdict(rec)
    return ["" if values[c] is None else format(values[c], ".17g") for c in CSV_COLUMNS]


def row_to_record(row: dict, bound_exponent: float | None = None) -> DiagnosticsRecord:
    """Inverse of :func:`record_to_row`; the exponent is recovered from the integrand if not given."""
    vals = {}
    for c in CSV_COLUMNS:
        raw = row[c].strip()
        vals[c] = None if raw == "" else float(raw)
        if vals[c] is None and c != "velocity_diff_ratio":
            raise ValueError(f"missing value in column {c!r}")
    if bound_exponent is None:
        h, g = vals["holder_total"], vals["integrand"]
        bound_exponent = math.log(g) / math.log(h) if h > 0 and h != 1 and g > 0 else 1.0
    names = [f.name for f in fields(DiagnosticsRecord)]
    vals["bound_exponent"] = bound_exponent
    return DiagnosticsRecord(**{n: vals[n] for n in names})
