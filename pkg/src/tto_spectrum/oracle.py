"""Dense-matrix ground truth for A_Phi on a finite-dimensional model space.

Everything here is computed independently of the root-system criterion: the
operator is represented in an orthonormal (Takenaka-Malmquist) or kernel basis
of K_theta, entries come from FFT quadrature on the circle, and the spectrum from
a dense eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import MismatchError, NotFiniteBlaschke, TTOError
from .inner import InnerFunction
from .symbols import LaurentSymbol, roots_of_Q

COND_FLAG = 1e8


def _mobius(w: complex, z: np.ndarray) -> np.ndarray:
    if w == 0:
        return z
    return (abs(w) / w) * (w - z) / (1 - np.conj(w) * z)


def quadrature_size(zeros, M: int, N: int) -> int:
    """Grid size for exact-to-rounding quadrature of the basis products.

    Trapezoid error for the integrands decays like max|w|^L; at least 8(n+M+N) points.
    """
    n = len(zeros)
    base = 8 * (n + M + N)
    r = max((abs(w) for w in zeros), default=0.0)
    if r > 0:
        base = max(base, int(math.ceil(40.0 / -math.log(r))) + 8 * (n + M + N))
    L = 256
    while L < base:
        L *= 2
    return min(L, 1 << 22)


@dataclass
class ModelBasis:
    theta: InnerFunction
    kind: str
    zeros: list
    L: int
    samples: np.ndarray  # (n, L) basis functions on the L-th roots of unity
    gram: np.ndarray

    @property
    def gram_check(self) -> float:
        return float(np.max(np.abs(self.gram - np.eye(len(self.zeros)))))

    def coefficients(self, K: int) -> np.ndarray:
        """Taylor coefficients 0..K-1 of each basis element, shape (n, K)."""
        c = np.fft.fft(self.samples, axis=1) / self.L
        return c[:, :K]


def model_basis(theta: InnerFunction, kind: str = "tm", L: int | None = None, M: int = 0,
                N: int = 0) -> ModelBasis:
    """Basis of K_theta for a finite Blaschke product.

    ``kind="tm"``: Takenaka-Malmquist, e_k = sqrt(1-|w_k|^2)/(1-conj(w_k) z) prod_{j<k} b_{w_j};
    for theta = z^n this is 1, z, ..., z^(n-1).
    ``kind="kernel"``: Cauchy kernels 1/(1-conj(w) z) at the (distinct) zeros; not orthonormal.
    """
    if not theta.is_finite_blaschke:
        raise NotFiniteBlaschke("the dense oracle needs a finite Blaschke product")
    zeros = theta.zeros()
    n = len(zeros)
    if n == 0:
        raise NotFiniteBlaschke("constant inner function: K_theta = {0}")
    if L is None:
        L = quadrature_size(zeros, M, N)
    z = np.exp(2j * np.pi * np.arange(L) / L)
    rows = []
    if kind == "tm":
        prefix = np.ones(L, dtype=complex)
        for w in zeros:
            rows.append(math.sqrt(1 - abs(w) ** 2) / (1 - np.conj(w) * z) * prefix)
            prefix = prefix * _mobius(w, z)
    elif kind == "kernel":
        if len(set(zeros)) != n:
            raise ValueError("kernel basis needs distinct zeros")
        rows = [1.0 / (1 - np.conj(w) * z) for w in zeros]
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    samples = np.array(rows)
    gram = np.conj(samples) @ samples.T / L  # gram[l, k] = <e_k, e_l>
    return ModelBasis(theta, kind, zeros, L, samples, gram)


@dataclass
class DenseTTO:
    matrix: np.ndarray
    theta_degree: int
    symbol: LaurentSymbol
    basis: ModelBasis


def symbol_on_grid(antianalytic, analytic, L: int) -> np.ndarray:
    z = np.exp(2j * np.pi * np.arange(L) / L)
    out = np.zeros(L, dtype=complex)
    for k, a in enumerate(antianalytic, start=1):
        out += a * np.conj(z) ** k
    for l, c in enumerate(analytic):
        out += c * z ** l
    return out


def build_matrix(theta: InnerFunction, phi: LaurentSymbol, kind: str = "tm") -> DenseTTO:
    """Matrix of f -> P_theta(Phi f) in a basis of K_theta.

    In the orthonormal basis entry (l, k) is <Phi e_k, e_l>; for the kernel basis
    the Gram matrix is divided out so that the result represents the operator.
    """
    return build_band_matrix(theta, phi.antianalytic, phi.analytic, kind, symbol=phi)


def build_band_matrix(theta: InnerFunction, antianalytic, analytic, kind: str = "tm",
                      symbol: LaurentSymbol | None = None) -> DenseTTO:
    M = max(len(analytic) - 1, 0)
    N = len(antianalytic)
    basis = model_basis(theta, kind, M=M, N=N)
    phis = symbol_on_grid(antianalytic, analytic, basis.L)
    E = basis.samples
    B = np.conj(E) @ (phis * E).T / basis.L  # B[l, k] = <Phi e_k, e_l>
    if kind == "tm":
        mat = B
    else:
        mat = np.linalg.solve(basis.gram, B)
    return DenseTTO(mat, len(basis.zeros), symbol, basis)


@dataclass
class OracleEigen:
    lam: complex
    vector: np.ndarray
    condition: float

    @property
    def ill_conditioned(self) -> bool:
        return bool(self.condition > COND_FLAG)


def dense_spectrum(tto: DenseTTO) -> list:
    """All eigenvalues, sorted by (Re, Im), with unit eigenvectors and condition numbers."""
    w, vl, vr = scipy.linalg.eig(tto.matrix, left=True, right=True)
    out = []
    for i in range(len(w)):
        x = vr[:, i] / np.linalg.norm(vr[:, i])
        y = vl[:, i] / np.linalg.norm(vl[:, i])
        s = abs(np.vdot(y, x))
        cond = 1.0 / s if s > 0 else math.inf
        out.append(OracleEigen(complex(w[i]), x, cond))
    out.sort(key=lambda e: (round(e.lam.real, 12), round(e.lam.imag, 12)))
    return out


def admissible(phi: LaurentSymbol, lam: complex) -> bool:
    """True when the roots of z^N (Phi - lam) are distinct and off the circle."""
    try:
        roots_of_Q(phi, lam)
    except TTOError:
        return False
    return True


@dataclass
class MatchRow:
    oracle: complex
    admissible: bool
    found: complex | None
    distance: float | None


def default_region(phi: LaurentSymbol, pad: float = 0.1) -> tuple:
    """Square containing the numerical range of A_Phi (norm bounded by sum of |coefficients|)."""
    R = sum(abs(x) for x in phi.antianalytic) + sum(abs(x) for x in phi.analytic[1:])
    c0 = phi.analytic[0]
    R = 1.05 * R + pad
    return (c0.real - R, c0.real + R, c0.imag - R, c0.imag + R)


def cross_validate(theta: InnerFunction, phi: LaurentSymbol, region: tuple | None = None,
                   grid: int = 64, tol: float = 1e-6, K: int | None = None, raise_on_mismatch: bool = True) -> dict:
    """Compare the criterion scan with the dense spectrum."""
    from .eigensolver import scan_eigenvalues

    if region is None:
        region = default_region(phi)
    spectrum = dense_spectrum(build_matrix(theta, phi))
    scan = scan_eigenvalues(theta, phi, region, grid=grid, K=K)
    found = scan.eigenvalues
    re0, re1, im0, im1 = region
    rows = []
    missing = []
    for e in spectrum:
        if not (re0 <= e.lam.real <= re1 and im0 <= e.lam.imag <= im1):
            continue
        ok = admissible(phi, e.lam)
        best = min(found, key=lambda f: abs(f - e.lam), default=None)
        dist = abs(best - e.lam) if best is not None else None
        rows.append(MatchRow(e.lam, ok, best if dist is not None and dist < tol else None, dist))
        if ok and (dist is None or dist >= tol):
            missing.append(e.lam)
    spurious = [f for f in found if min((abs(f - e.lam) for e in spectrum), default=math.inf) >= tol]
    report = {"rows": rows, "missing": missing, "spurious": spurious, "scan": scan, "spectrum": spectrum}
    if raise_on_mismatch and (missing or spurious):
        raise MismatchError(f"unmatched oracle eigenvalues {missing}, spurious {spurious}", report)
    return report
