"""Truncated Fourier series on the circle and the compression A_Phi = P_theta M_Phi.

Conventions: a series with coefficients ``c[0..K-1]`` represents
``f(z) = sum c[n] z^n``; samples on the L-th roots of unity are
``L * ifft(c)`` and coefficients are recovered with ``fft(samples) / L``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TruncationWarning
from .inner import InnerFunction, circle_samples
from .symbols import LaurentSymbol

TAIL_ENERGY_TOL = 1e-8


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def fft_size(K: int, M: int = 0, N: int = 0) -> int:
    """Working grid: next power of two >= 4(K + M + N)."""
    return next_pow2(4 * (K + M + N))


@dataclass
class FourierSeries:
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    @property
    def K(self) -> int:
        return len(self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def samples(self, L: int) -> np.ndarray:
        if L < self.K:
            raise ValueError("grid smaller than truncation would alias")
        c = np.zeros(L, dtype=complex)
        c[: self.K] = self.coeffs
        return L * np.fft.ifft(c)

    def __call__(self, z):
        return np.polyval(self.coeffs[::-1], z)

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        n = max(self.K, other.K)
        out = np.zeros(n, dtype=complex)
        out[: self.K] += self.coeffs
        out[: other.K] -= other.coeffs
        return FourierSeries(out)

    def scaled(self, s: complex) -> "FourierSeries":
        return FourierSeries(self.coeffs * s)

    @classmethod
    def from_samples(cls, samples: np.ndarray, K: int) -> tuple["FourierSeries", float]:
        """Coefficients 0..K-1 of the sampled function, plus the relative energy
        found at negative frequencies (zero for elements of H^2)."""
        L = len(samples)
        c = np.fft.fft(samples) / L
        total = np.linalg.norm(c)
        neg = np.linalg.norm(c[L // 2:])
        return cls(c[:K].copy()), (float(neg / total) if total > 0 else 0.0)


def band_multiply(coeffs: np.ndarray, antianalytic: Sequence[complex],
                  analytic: Sequence[complex]) -> np.ndarray:
    """Nonnegative-frequency part of Phi*f, modes 0..K-1+M."""
    K = len(coeffs)
    M = max(len(analytic) - 1, 0)
    out = np.zeros(K + M, dtype=complex)
    for l, c in enumerate(analytic):
        if c != 0:
            out[l: l + K] += c * coeffs
    for k, a in enumerate(antianalytic, start=1):
        if a != 0 and k < K:
            out[: K - k] += a * coeffs[k:]
    return out


def project_model(theta: InnerFunction, coeffs: np.ndarray, L: int,
                  theta_samples: np.ndarray | None = None) -> np.ndarray:
    """P_theta h = h - theta * P_+(conj(theta) h) for h in H^2 given by its coefficients.

    Returns the first ``L // 2`` coefficients of the projection.
    """
    if theta_samples is None:
        theta_samples = circle_samples(theta, L)
    c = np.zeros(L, dtype=complex)
    c[: len(coeffs)] = coeffs
    h = L * np.fft.ifft(c)
    u = np.fft.fft(np.conj(theta_samples) * h)
    u[L // 2:] = 0.0
    v = np.fft.fft(theta_samples * np.fft.ifft(u))
    return (c - v / L)[: L // 2]


def h2_defect(theta: InnerFunction, f: FourierSeries, L: int | None = None,
              theta_samples: np.ndarray | None = None) -> float:
    """||P_+(conj(theta) f)|| / ||f||; zero exactly when f is orthogonal to theta H^2."""
    if L is None:
        L = fft_size(f.K)
    if theta_samples is None:
        theta_samples = circle_samples(theta, L)
    g = np.fft.fft(np.conj(theta_samples) * f.samples(L)) / L
    nf = f.norm()
    return float(np.linalg.norm(g[: L // 2]) / nf) if nf > 0 else 0.0


def apply_band_tto(theta: InnerFunction, antianalytic: Sequence[complex], analytic: Sequence[complex],
                   f: FourierSeries, L: int | None = None,
                   theta_samples: np.ndarray | None = None) -> FourierSeries:
    """A_Phi f for a band symbol that may have an empty antianalytic or trivial analytic part."""
    K = f.K
    M = max(len(analytic) - 1, 0)
    N = len(antianalytic)
    if L is None:
        L = fft_size(K, M, N)
    if L < 4 * (K + M + N):
        raise ValueError("working grid must have at least 4(K+M+N) points")
    g = band_multiply(f.coeffs, antianalytic, analytic)
    out = project_model(theta, g, L, theta_samples)
    # measured against the input scale so that A f ~ 0 does not look like a pure tail
    total = max(np.linalg.norm(out), np.linalg.norm(g))
    tail = np.linalg.norm(out[K:])
    if total > 0 and tail > TAIL_ENERGY_TOL * total:
        warnings.warn(
            f"discarded Fourier tail above K={K} carries relative norm {tail / total:.3g}",
            TruncationWarning,
            stacklevel=2,
        )
    return FourierSeries(out[:K])


def apply_tto(theta: InnerFunction, phi: LaurentSymbol, f: FourierSeries, L: int | None = None,
              theta_samples: np.ndarray | None = None) -> FourierSeries:
    return apply_band_tto(theta, phi.antianalytic, phi.analytic, f, L, theta_samples)
