"""Trigonometric interpolation helpers for closed curves sampled at equispaced parameters.

A closed curve is stored as complex samples ``z_j = x_j + i y_j`` at
``theta_j = 2 pi j / N``. All helpers use the same convention for the Nyquist
mode (split evenly between +N/2 and -N/2), so interpolation, differentiation
and shifting are mutually consistent.
"""

from __future__ import annotations

from math import comb

import numpy as np
from numpy.typing import NDArray

ComplexArray = NDArray[np.complex128]
FloatArray = NDArray[np.float64]


def to_complex(nodes: np.ndarray) -> ComplexArray:
    nodes = np.asarray(nodes, dtype=np.float64)
    return nodes[:, 0] + 1j * nodes[:, 1]


def to_points(z: np.ndarray) -> FloatArray:
    return np.column_stack([z.real, z.imag])


def wavenumbers(n: int) -> FloatArray:
    return np.fft.fftfreq(n, d=1.0 / n)


def coefficients(z: np.ndarray) -> ComplexArray:
    """Fourier coefficients ``c_k`` with ``z(theta) = sum_k c_k exp(i k theta)``."""
    return np.fft.fft(z) / len(z)


def diff(z: np.ndarray, order: int = 1) -> ComplexArray:
    """Derivative with respect to the parameter theta at the sample points."""
    n = len(z)
    k = wavenumbers(n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[n // 2] = 0.0
    return np.fft.ifft(np.fft.fft(z) * mult)


def shift(z: np.ndarray, sigma: float, order: int = 0) -> ComplexArray:
    """Evaluate the interpolant (or its derivative) at ``theta_j + sigma`` for every j."""
    n = len(z)
    k = wavenumbers(n)
    mult = np.exp(1j * k * sigma) * (1j * k) ** order
    if n % 2 == 0:
        # cos((N/2) theta) form of the Nyquist term
        kn = n // 2
        if order == 0:
            mult[kn] = np.cos(kn * sigma)
        else:
            # d^p/dtheta^p cos(kn (theta + sigma)) evaluated on the grid
            mult[kn] = kn**order * np.cos(kn * sigma + order * np.pi / 2)
    return np.fft.ifft(np.fft.fft(z) * mult)


def shift_many(z: np.ndarray, sigmas: np.ndarray, order: int = 0) -> ComplexArray:
    """Stacked :func:`shift` for an array of offsets; result has shape (len(sigmas), N)."""
    n = len(z)
    k = wavenumbers(n)
    sig = np.asarray(sigmas, dtype=np.float64)[:, None]
    mult = np.exp(1j * k[None, :] * sig) * (1j * k[None, :]) ** order
    if n % 2 == 0:
        kn = n // 2
        mult[:, kn] = kn**order * np.cos(kn * sig[:, 0] + order * np.pi / 2)
    return np.fft.ifft(np.fft.fft(z)[None, :] * mult, axis=1)


def shift_many_delta(z: np.ndarray, sigmas: np.ndarray, order: int = 0) -> ComplexArray:
    """Stacked differences ``z^(p)(theta_j + sigma) - z^(p)(theta_j)``, shape (len(sigmas), N).

    Uses exp(i k sigma) - 1 = 2i sin(k sigma / 2) exp(i k sigma / 2), so small
    offsets keep full relative precision and the mean (position) drops out.
    """
    n = len(z)
    k = wavenumbers(n)
    sig = np.asarray(sigmas, dtype=np.float64)[:, None]
    half = 0.5 * k[None, :] * sig
    mult = 2j * np.sin(half) * np.exp(1j * half) * (1j * k[None, :]) ** order
    if n % 2 == 0:
        kn = n // 2
        # cos(kn sigma + p pi/2) - cos(p pi/2)
        a = 0.5 * kn * sig[:, 0]
        mult[:, kn] = -2.0 * kn**order * np.sin(a + order * np.pi / 2) * np.sin(a)
    return np.fft.ifft(np.fft.fft(z)[None, :] * mult, axis=1)


def evaluate(c: np.ndarray, theta: np.ndarray, order: int = 0) -> ComplexArray:
    """Evaluate the interpolant with coefficients ``c`` at arbitrary parameters.

    Direct summation, O(len(theta) * N); chunked to bound memory.
    """
    n = len(c)
    k = wavenumbers(n)
    coef = c * (1j * k) ** order
    theta = np.asarray(theta, dtype=np.float64)
    flat = theta.ravel()
    out = np.empty(flat.shape, dtype=np.complex128)
    if n % 2 == 0:
        kn = n // 2
        coef = coef.copy()
        coef[kn] = 0.0
        nyq = c[kn] * kn**order
    chunk = max(1, 2_000_000 // n)
    for start in range(0, flat.size, chunk):
        th = flat[start:start + chunk]
        out[start:start + chunk] = np.exp(1j * np.outer(th, k)) @ coef
        if n % 2 == 0:
            out[start:start + chunk] += nyq * np.cos(kn * th + order * np.pi / 2)
    return out.reshape(theta.shape)


def evaluate_delta(c: np.ndarray, theta: float, sigmas: np.ndarray, order: int = 0) -> ComplexArray:
    """Interpolant differences ``z^(p)(theta + sigma) - z^(p)(theta)`` by direct summation."""
    n = len(c)
    k = wavenumbers(n)
    sig = np.asarray(sigmas, dtype=np.float64)[:, None]
    coef = c * (1j * k) ** order
    half = 0.5 * k[None, :] * sig
    mult = 2j * np.sin(half) * np.exp(1j * (k[None, :] * theta + half))
    if n % 2 == 0:
        kn = n // 2
        coef = coef.copy()
        coef[kn] = c[kn] * kn**order
        a = 0.5 * kn * sig[:, 0]
        mult[:, kn] = -2.0 * np.sin(kn * theta + a + order * np.pi / 2) * np.sin(a)
    return mult @ coef


def upsample(z: np.ndarray, factor: int, order: int = 0) -> ComplexArray:
    """Trigonometric interpolant (or its derivative) sampled on a grid ``factor`` times finer."""
    n = len(z)
    m = n * factor
    c = np.fft.fft(z)
    k = wavenumbers(n)
    big = np.zeros(m, dtype=np.complex128)
    half = n // 2
    if n % 2 == 0:
        big[:half] = c[:half] * (1j * k[:half]) ** order
        big[m - half + 1:] = c[half + 1:] * (1j * k[half + 1:]) ** order
        # split the Nyquist mode as a cosine
        big[half] = 0.5 * c[half] * (1j * half) ** order
        big[m - half] = 0.5 * c[half] * (-1j * half) ** order
    else:
        big[:half + 1] = c[:half + 1] * (1j * k[:half + 1]) ** order
        big[m - half:] = c[half + 1:] * (1j * k[half + 1:]) ** order
    return np.fft.ifft(big) * factor


class LocalInterpolant:
    """Fast evaluation of a periodic band-limited sequence at arbitrary parameters.

    The sequence is upsampled by FFT zero padding and then interpolated with a
    centered barycentric Lagrange stencil on the fine grid.
    """

    def __init__(self, z: np.ndarray, factor: int = 8, stencil: int = 12, order: int = 0) -> None:
        self.fine = upsample(z, factor, order)
        self.m = len(self.fine)
        self.h = 2 * np.pi / self.m
        self.stencil = stencil
        self.bw = np.array([(-1) ** i * comb(stencil - 1, i) for i in range(stencil)], dtype=np.float64)

    def __call__(self, theta: np.ndarray) -> ComplexArray:
        theta = np.asarray(theta, dtype=np.float64)
        u = theta.ravel() / self.h
        p = self.stencil
        base = np.floor(u).astype(np.int64) - (p // 2 - 1)
        offs = u - base                               # position inside stencil, in [p/2-1, p/2)
        j = np.arange(p)
        diff = offs[:, None] - j[None, :]
        exact = np.abs(diff) < 1e-14
        diff = np.where(exact, 1.0, diff)
        wts = self.bw[None, :] / diff
        vals = self.fine[(base[:, None] + j[None, :]) % self.m]
        out = np.sum(wts * vals, axis=1) / np.sum(wts, axis=1)
        hit = exact.any(axis=1)
        if hit.any():
            out[hit] = vals[hit][exact[hit]]
        return out.reshape(theta.shape)


def exponential_filter(z: np.ndarray, order: int = 36, strength: float = 36.0) -> ComplexArray:
    """Damp mode k by exp(-strength (|k| / (N/2))^order); resolved modes are left untouched."""
    n = len(z)
    k = np.abs(wavenumbers(n)) / (n // 2)
    return np.fft.ifft(np.fft.fft(z) * np.exp(-strength * k**order))
