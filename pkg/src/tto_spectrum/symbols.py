"""Laurent-polynomial symbols and the root system of Q = z^N (Phi - lambda)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import CircleRoots, DegenerateMap, DegenerateRoots, DomainError, PreconditionError

TAU_SEP_REL = 1e-7
TAU_CIRC = 1e-7


@dataclass(frozen=True)
class LaurentSymbol:
    """Phi(z) = sum_{k=1..N} a_k z^-k + sum_{l=0..M} c_l z^l.

    ``antianalytic[k-1]`` holds a_k and ``analytic[l]`` holds c_l.  Trailing
    zeros of the analytic part are dropped so that c_M != 0 whenever M >= 1.
    """

    antianalytic: tuple
    analytic: tuple

    def __post_init__(self):
        a = tuple(complex(x) for x in self.antianalytic)
        c = [complex(x) for x in self.analytic] or [0j]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not a:
            raise ValueError("symbol needs at least one antianalytic coefficient (N >= 1)")
        if a[-1] == 0:
            raise ValueError("leading antianalytic coefficient a_N must be nonzero")
        object.__setattr__(self, "antianalytic", a)
        object.__setattr__(self, "analytic", tuple(c))

    @classmethod
    def three_term(cls, a: complex, b: complex, c: complex) -> "LaurentSymbol":
        """a*conj(z) + b + c*z on the circle."""
        return cls((a,), (b, c))

    @property
    def N(self) -> int:
        return len(self.antianalytic)

    @property
    def M(self) -> int:
        return len(self.analytic) - 1

    @property
    def is_three_term(self) -> bool:
        return self.N == 1 and self.M == 1

    def analytic_part(self, z):
        """phi(z) = sum c_l z^l (Horner)."""
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for coef in reversed(self.analytic):
            acc = acc * z + coef
        return acc

    def adjoint(self) -> "LaurentSymbol":
        """Symbol conj(Phi) on the circle; needs M >= 1 so that the result has N >= 1."""
        a = [x.conjugate() for x in self.analytic[1:]]
        c = [self.analytic[0].conjugate()] + [x.conjugate() for x in self.antianalytic]
        return LaurentSymbol(tuple(a), tuple(c))

    def q_coefficients(self, lam: complex) -> np.ndarray:
        """Coefficients of Q(z) = z^N (Phi(z) - lam), highest degree first."""
        low = [self.antianalytic[k - 1] for k in range(self.N, 0, -1)]  # z^0 .. z^(N-1)
        high = list(self.analytic)
        high[0] = high[0] - lam
        ascending = np.array(low + high, dtype=complex)
        return ascending[::-1]

    def to_dict(self) -> dict:
        return {
            "antianalytic": [[x.real, x.imag] for x in self.antianalytic],
            "analytic": [[x.real, x.imag] for x in self.analytic],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LaurentSymbol":
        def parse(items):
            out = []
            for x in items:
                if isinstance(x, (list, tuple)):
                    out.append(complex(x[0], x[1]))
                else:
                    out.append(complex(x))
            return tuple(out)

        return cls(parse(data["antianalytic"]), parse(data["analytic"]))


def eval_symbol(phi: LaurentSymbol, z: complex) -> complex:
    z = complex(z)
    if z == 0:
        raise DomainError("Phi has a pole at z = 0")
    w = 1.0 / z
    anti = 0j
    for coef in reversed(phi.antianalytic):
        anti = (anti + coef) * w
    return anti + complex(phi.analytic_part(z))


@dataclass
class RootConfiguration:
    lam: complex
    roots: np.ndarray
    inside: np.ndarray  # bool per root
    beta: np.ndarray  # 1/Q'(z_j)
    q_coeffs: np.ndarray  # highest degree first

    @property
    def n_inside(self) -> int:
        return int(np.count_nonzero(self.inside))

    def q(self, z):
        return np.polyval(self.q_coeffs, z)


def polish_roots(coeffs: np.ndarray, roots: np.ndarray, steps: int = 2) -> np.ndarray:
    dcoeffs = np.polyder(coeffs)
    z = roots.astype(complex)
    for _ in range(steps):
        d = np.polyval(dcoeffs, z)
        ok = d != 0
        z = np.where(ok, z - np.polyval(coeffs, z) / np.where(ok, d, 1.0), z)
    return z


def polynomial_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots via eigenvalues of the companion matrix (LAPACK balances it)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    deg = len(coeffs) - 1
    if deg < 1:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((deg, deg), dtype=complex)
    comp[0, :] = -coeffs[1:] / coeffs[0]
    comp[1:, :-1] = np.eye(deg - 1)
    return scipy.linalg.eigvals(comp, check_finite=False)


def roots_of_Q(phi: LaurentSymbol, lam: complex, tau_circ: float = TAU_CIRC,
               tau_sep_rel: float = TAU_SEP_REL) -> RootConfiguration:
    if phi.M < 1:
        raise PreconditionError("the criterion needs an analytic part of degree M >= 1")
    lam = complex(lam)
    coeffs = phi.q_coefficients(lam)
    z = polish_roots(coeffs, polynomial_roots(coeffs))
    z = z[np.lexsort((z.imag, z.real))]
    if len(z) > 1:
        gaps = np.abs(z[:, None] - z[None, :]) + np.diag(np.full(len(z), np.inf))
        tau_sep = tau_sep_rel * max(1.0, float(np.max(np.abs(z))))
        if gaps.min() < tau_sep:
            raise DegenerateRoots(f"roots of Q closer than {tau_sep:g} at lambda={lam}", z)
    if np.any(np.abs(np.abs(z) - 1.0) < tau_circ):
        raise CircleRoots(f"root of Q within {tau_circ:g} of the unit circle at lambda={lam}", z)
    dq = np.polyval(np.polyder(coeffs), z)
    return RootConfiguration(lam, z, np.abs(z) < 1.0, 1.0 / dq, coeffs)


# -- three-term (spe) test ------------------------------------------------


@dataclass
class SpeResult:
    holds_in_disk: bool
    holds_outside: bool
    witness_in_disk: complex | None
    witness_outside: complex | None
    max_preimage_modulus: float

    def to_dict(self) -> dict:
        def enc(w):
            return None if w is None else [w.real, w.imag]

        return {
            "holds_in_disk": self.holds_in_disk,
            "holds_outside": self.holds_outside,
            "witnesses": {"in_disk": enc(self.witness_in_disk), "outside": enc(self.witness_outside)},
            "max_preimage_modulus_on_circle": self.max_preimage_modulus,
        }


def preimage(a: complex, b: complex, c: complex, w):
    """Solve w = b + a*conj(z) + c*z for z (requires |a| != |c|)."""
    d = abs(c) ** 2 - abs(a) ** 2
    v = np.asarray(w, dtype=complex) - b
    return (np.conj(c) * v - a * np.conj(v)) / d


def in_image(a: complex, b: complex, c: complex, w) -> np.ndarray:
    """Exact membership of w in Phi(D) for Phi = a conj(z) + b + c z."""
    return np.abs(preimage(a, b, c, w)) < 1.0


def _max_on_circle(p: complex, q: complex, r: complex) -> tuple[float, complex]:
    """max over |u|=1 of |p u + q conj(u) + r| via the critical points of a trig quadratic."""
    # |p u + q/u + r|^2 = sum_k C_k u^k, k = -2..2
    c2 = p * np.conj(q)
    c1 = p * np.conj(r) + r * np.conj(q)
    # d/dt = i * sum k C_k u^k ; multiply by u^2 -> quartic in u
    poly = np.array([2 * c2, c1, 0.0, -np.conj(c1), -2 * np.conj(c2)], dtype=complex)
    while len(poly) > 1 and poly[0] == 0:
        poly = poly[1:]
    cands = [complex(np.exp(1j * t)) for t in np.linspace(0, 2 * np.pi, 64, endpoint=False)]
    if len(poly) > 1 and np.any(poly != 0):
        for u in np.roots(poly):
            if u != 0:
                cands.append(u / abs(u))
    best_u = max(cands, key=lambda u: abs(p * u + q * np.conj(u) + r))
    return float(abs(p * best_u + q * np.conj(best_u) + r)), best_u


def spe_test(a: complex, b: complex, c: complex) -> SpeResult:
    a, b, c = complex(a), complex(b), complex(c)
    d = abs(c) ** 2 - abs(a) ** 2
    if abs(abs(a) - abs(c)) < 1e-12:
        raise DegenerateMap("|a| = |c|: the real-linear map is not invertible")
    # z(w) = p w + q conj(w) + r is affine in (w, conj w); |z| is convex, so its
    # supremum over the open disk equals its maximum over the circle
    p = np.conj(c) / d
    q = -a / d
    r = -(np.conj(c) * b - a * np.conj(b)) / d
    gmax, u_star = _max_on_circle(p, q, r)
    holds_in = gmax > 1.0

    witness_in = None
    if holds_in:
        witness_in = _radial_witness_in_disk(a, b, c, u_star)

    big = abs(b) + abs(a) + abs(c) + 1.0
    direction = b / abs(b) if b != 0 else 1.0 + 0j
    witness_out = big * direction
    return SpeResult(holds_in, True, witness_in, witness_out, gmax)


def _radial_witness_in_disk(a, b, c, u_star):
    """Best point along rays from b lying in the disk but outside the ellipse."""
    d = abs(c) ** 2 - abs(a) ** 2
    best = None
    best_len = 0.0
    dirs = np.exp(1j * np.linspace(0, 2 * np.pi, 1440, endpoint=False))
    if u_star - b != 0:
        dirs = np.append(dirs, (u_star - b) / abs(u_star - b))
    lin = np.abs((np.conj(c) * dirs - a * np.conj(dirs)) / d)
    rho_e = 1.0 / lin  # exit distance from the ellipse along each ray
    # ray b + rho*dir meets |w| < 1 for rho in (rho1, rho2)
    bb = np.real(np.conj(b) * dirs)
    disc = bb ** 2 - (abs(b) ** 2 - 1.0)
    valid = disc > 0
    sq = np.sqrt(np.where(valid, disc, 0.0))
    rho1 = np.maximum(-bb - sq, 0.0)
    rho2 = -bb + sq
    lo = np.maximum(rho_e, rho1)
    span = np.where(valid, rho2 - lo, -np.inf)
    k = int(np.argmax(span))
    if span[k] > 0:
        rho = 0.5 * (lo[k] + rho2[k])
        best = complex(b + rho * dirs[k])
        best_len = span[k]
    if best is None or best_len <= 0:
        # thin sliver missed by the ray fan: step inward from the maximiser on the circle
        t_hi, t_lo = 1.0, 0.0
        for _ in range(60):
            mid = 0.5 * (t_hi + t_lo)
            if abs(preimage(a, b, c, mid * u_star)) >= 1.0:
                t_hi = mid
            else:
                t_lo = mid
        best = complex(0.5 * (t_hi + 1.0) * u_star)
    return best
