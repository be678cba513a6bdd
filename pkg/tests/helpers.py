"""Shared configuration builders for the test suite."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from alphapatch.curves import PatchBoundary, PatchSystem, disc, ellipse, fourier
from alphapatch.diagnostics import find_admissible_pairs

REFERENCE = Path(__file__).parent / "reference" / "reference_values.json"

# one summary line per acceptance criterion, printed at the end of the session
ACCEPTANCE: dict[int, str] = {}


def report_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE[number] = line
    print(line)


def reference() -> dict:
    return json.loads(REFERENCE.read_text())


def two_discs(gap: float, n: int = 256, alpha: float = 0.25, couplings=(1.0, 1.0),
              **kw) -> PatchSystem:
    """Unit discs centred at (-1-gap/2, 0) and (1+gap/2, 0); node n/2 of disc 1 faces disc 0."""
    c = 1.0 + gap / 2
    return PatchSystem((disc((-c, 0.0), 1.0, n, couplings[0], 0),
                        disc((c, 0.0), 1.0, n, couplings[1], 1)), alpha, **kw)


def with_third_disc(system: PatchSystem, n: int | None = None) -> PatchSystem:
    """Adds a small off-axis disc that breaks the mirror symmetries of two-disc systems."""
    n = n or system.patches[0].n // 2
    extra = disc((0.8, 2.5), 0.5, n, 1.0, len(system.patches))
    return system.replace(patches=system.patches + (extra,))


# configurations for kernel versus area-quadrature comparisons: (name, builder, [(label, node)]).
# Points on a mirror axis have u_n = 0 exactly, so each config also probes off-axis nodes.
def oracle_configs(n: int = 512, alpha: float = 0.25):
    h = n // 2
    return [
        ("ellipse", lambda: PatchSystem((ellipse((0, 0), 2.0, 1.0, 0.0, n),), alpha),
         [(0, 0), (0, n // 8 + 5)]),
        ("two_discs_gap_0.5", lambda: two_discs(0.5, n, alpha), [(1, h), (1, h - n // 40)]),
        ("two_discs_gap_0.2", lambda: two_discs(0.2, n, alpha), [(1, h - n // 64), (0, n // 25)]),
        ("perturbed_circle",
         lambda: PatchSystem((fourier((0, 0), [[1.0, 0.0]] + [[0.0, 0.0]] * 4 + [[0.1, 0.0]], n),), alpha),
         [(0, n // 70), (0, n // 8 + 3)]),
        ("three_disc_line",
         lambda: PatchSystem(tuple(disc((x, 0.0), 1.0, n, 1.0, i) for i, x in enumerate((-2.3, 0.0, 2.3))),
                             alpha),
         [(1, n // 50), (2, h - n // 50)]),
    ]


def random_fourier_coefficients(seed: int = 7, modes: int = 8, amplitude: float = 0.04):
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(modes, 2)) * amplitude
    return [[1.0, 0.0], [0.0, 0.0]] + raw.tolist()


def rough_curve_nodes(n: int, gamma: float, eps: float = 0.2) -> np.ndarray:
    """Closed curve that is C^{1,gamma} but not better at node 0, smooth elsewhere.

    Polar radius 1 + eps (|sin(t/2)|^{1+gamma} + 0.5 sin(t) |sin(t/2)|^gamma),
    sampled at equispaced t; the odd term makes the roughness asymmetric.
    """
    t = 2 * np.pi * np.arange(n) / n
    s = np.abs(np.sin(t / 2))
    r = 1.0 + eps * (s ** (1 + gamma) + 0.5 * np.sin(t) * s**gamma)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def mirror_x(nodes: np.ndarray) -> np.ndarray:
    """Reflection about the x1-axis, reversed so orientation stays counterclockwise."""
    out = nodes * np.array([1.0, -1.0])
    return np.roll(out[::-1], 1, axis=0)


def boundary(nodes, coupling=1.0, label=0) -> PatchBoundary:
    return PatchBoundary(np.asarray(nodes, dtype=float), coupling, 0.0, label)


def rigid(system, angle, shift):
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    return system.replace(patches=tuple(
        p.with_nodes(p.nodes @ rot.T + np.asarray(shift), p.param_spacing) for p in system.patches))


def closest_admissible(system):
    pairs = [p for p in find_admissible_pairs(system) if p.admissible]
    assert pairs
    return min(pairs, key=lambda p: p.delta)


def point_symmetric_ellipses(n=256, alpha=0.25, gap=0.2):
    """Two congruent tilted ellipses with equal couplings, swapped by x -> -x."""
    left = ellipse((-1.2 - gap / 2, 0.0), 1.2, 0.8, 0.4, n, 1.0, 0)
    return PatchSystem((left, PatchBoundary(-left.nodes, 1.0, left.param_spacing, 1)), alpha)


def tilted_mirror_ellipses(coupling_right, n=256, alpha=0.25, gap=0.2):
    """Two congruent tilted ellipses, mirror images in the line x1 = 0."""
    left = ellipse((-1.2 - gap / 2, 0.0), 1.2, 0.8, 0.4, n, 1.0, 0)
    # node j of the right ellipse is the image of node -j of the left one
    right_nodes = np.roll((left.nodes * np.array([-1.0, 1.0]))[::-1], 1, axis=0)
    return PatchSystem((left, PatchBoundary(right_nodes, coupling_right, left.param_spacing, 1)), alpha)
