"""
Normal modes of the harmonic chain.

Fixed ends: orthonormal sine basis (DST-I), omega_k = 2 sin(k pi / (2N)), k = 1..N-1.
Ring: orthonormal real Fourier basis laid out as
[k=0, cos k=1, sin k=1, cos k=2, sin k=2, ..., (k=N/2 if N even)],
omega_k = 2 sin(k pi / N).
"""

from __future__ import annotations

import numpy as np
from scipy import fft

from fpulyap.models.chain import Boundary, ChainState

Array = np.ndarray
_SQRT2 = np.sqrt(2.0)


def mode_frequencies(n_springs: int, boundary: Boundary) -> Array:
    if boundary is Boundary.FIXED_ENDS:
        k = np.arange(1, n_springs)
        return 2.0 * np.sin(k * np.pi / (2.0 * n_springs))
    wave = _ring_wavenumbers(n_springs)
    return 2.0 * np.sin(wave * np.pi / n_springs)


def _ring_wavenumbers(n: int) -> Array:
    wave = [0]
    for k in range(1, (n - 1) // 2 + 1):
        wave += [k, k]
    if n % 2 == 0:
        wave.append(n // 2)
    return np.asarray(wave, dtype=float)


def mode_transform(x: Array, boundary: Boundary) -> Array:
    """Orthogonal map from particle coordinates (q or p) to mode amplitudes."""
    x = np.asarray(x, dtype=float)
    if boundary is Boundary.FIXED_ENDS:
        return fft.dst(x, type=1, norm="ortho")
    n = x.shape[-1]
    X = fft.rfft(x, norm="ortho")
    out = np.empty_like(x)
    out[..., 0] = X[..., 0].real
    m = (n - 1) // 2
    out[..., 1 : 2 * m + 1 : 2] = _SQRT2 * X[..., 1 : m + 1].real
    out[..., 2 : 2 * m + 2 : 2] = _SQRT2 * X[..., 1 : m + 1].imag
    if n % 2 == 0:
        out[..., -1] = X[..., n // 2].real
    return out


def inverse_mode_transform(a: Array, boundary: Boundary) -> Array:
    a = np.asarray(a, dtype=float)
    if boundary is Boundary.FIXED_ENDS:
        # DST-I with orthonormal scaling is its own inverse
        return fft.dst(a, type=1, norm="ortho")
    n = a.shape[-1]
    m = (n - 1) // 2
    X = np.zeros(a.shape[:-1] + (n // 2 + 1,), dtype=complex)
    X[..., 0] = a[..., 0]
    X[..., 1 : m + 1] = (a[..., 1 : 2 * m + 1 : 2] + 1j * a[..., 2 : 2 * m + 2 : 2]) / _SQRT2
    if n % 2 == 0:
        X[..., n // 2] = a[..., -1]
    return fft.irfft(X, n=n, norm="ortho")


def mode_energies(state: ChainState) -> Array:
    """Harmonic energy (P_k^2 + omega_k^2 Q_k^2) / 2 of every mode."""
    omega = mode_frequencies(state.n_springs, state.boundary)
    Q = mode_transform(state.q, state.boundary)
    P = mode_transform(state.p, state.boundary)
    return 0.5 * (P * P + (omega * Q) ** 2)


def harmonic_energy(state: ChainState) -> float:
    return float(np.sum(mode_energies(state)))
