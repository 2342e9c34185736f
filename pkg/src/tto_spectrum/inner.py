"""Inner functions: finite Blaschke products times atomic singular factors.

A Blaschke factor with zero ``w`` is normalised to be positive at the origin,

    b_w(z) = (conj(w)/|w|) * (w - z) / (1 - conj(w) z),   b_0(z) = z,

and an atom at ``zeta`` (``|zeta| = 1``) with mass ``m`` contributes

    exp(m * (z + zeta) / (z - zeta)),

so ``exp((z + 1)/(z - 1))`` is a single atom at 1 with mass 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, PoleError

TAU_BDRY = 1e-8
TAU_ZERO = 1e-10
# points produced by exp(1j*t) may sit a few ulps outside the unit circle
_CIRCLE_SLACK = 1e-12


@dataclass(frozen=True)
class BlaschkeFactor:
    zero: complex
    multiplicity: int = 1

    def __post_init__(self):
        z = complex(self.zero)
        if not abs(z) < 1.0:
            raise ValueError(f"Blaschke zero must lie in the open disk, got {z}")
        if int(self.multiplicity) < 1:
            raise ValueError("multiplicity must be >= 1")
        object.__setattr__(self, "zero", z)
        object.__setattr__(self, "multiplicity", int(self.multiplicity))

    def value(self, z):
        w = self.zero
        if w == 0:
            return z
        u = w.conjugate() / abs(w)
        return u * (w - z) / (1 - w.conjugate() * z)

    def derivative(self, z):
        w = self.zero
        if w == 0:
            return np.ones_like(z) if isinstance(z, np.ndarray) else 1.0 + 0j
        u = w.conjugate() / abs(w)
        return u * (abs(w) ** 2 - 1) / (1 - w.conjugate() * z) ** 2


@dataclass(frozen=True)
class SingularAtom:
    location: complex
    mass: float

    def __post_init__(self):
        loc = complex(self.location)
        if abs(abs(loc) - 1.0) > 1e-6:
            raise ValueError(f"atom location must be on the unit circle, got {loc}")
        if not self.mass > 0:
            raise ValueError("atom mass must be positive")
        object.__setattr__(self, "location", loc / abs(loc))
        object.__setattr__(self, "mass", float(self.mass))

    @classmethod
    def at_angle(cls, angle: float, mass: float) -> "SingularAtom":
        return cls(cmath.exp(1j * angle), mass)

    def exponent(self, z):
        zeta = self.location
        return self.mass * (z + zeta) / (z - zeta)

    def exponent_derivative(self, z):
        zeta = self.location
        return -2.0 * self.mass * zeta / (z - zeta) ** 2


@dataclass(frozen=True)
class InnerFunction:
    blaschke: tuple = ()
    atoms: tuple = ()
    unimodular_constant: complex = 1.0 + 0j

    def __post_init__(self):
        object.__setattr__(self, "blaschke", tuple(self.blaschke))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        c = complex(self.unimodular_constant)
        if abs(abs(c) - 1.0) > 1e-12:
            raise ValueError("unimodular_constant must have modulus 1")
        object.__setattr__(self, "unimodular_constant", c / abs(c))

    # -- constructors -------------------------------------------------------

    @classmethod
    def monomial(cls, n: int) -> "InnerFunction":
        """theta(z) = z**n."""
        if n < 1:
            raise ValueError("degree must be >= 1")
        return cls(blaschke=(BlaschkeFactor(0j, n),))

    @classmethod
    def from_zeros(cls, zeros: Sequence[complex], constant: complex = 1.0) -> "InnerFunction":
        """Finite Blaschke product; repeated entries are merged into multiplicities."""
        merged: dict = {}
        order = []
        for w in zeros:
            w = complex(w)
            if w not in merged:
                merged[w] = 0
                order.append(w)
            merged[w] += 1
        return cls(tuple(BlaschkeFactor(w, merged[w]) for w in order), (), constant)

    @classmethod
    def atomic(cls, location: complex = 1.0, mass: float = 1.0) -> "InnerFunction":
        return cls((), (SingularAtom(location, mass),))

    # -- structure ----------------------------------------------------------

    @property
    def is_finite_blaschke(self) -> bool:
        return not self.atoms

    @property
    def degree(self) -> int:
        """Number of zeros counted with multiplicity (dimension of K_theta when finite)."""
        return sum(f.multiplicity for f in self.blaschke)

    @property
    def is_constant(self) -> bool:
        return not self.blaschke and not self.atoms

    def zeros(self) -> list:
        """Blaschke zeros repeated according to multiplicity, in stored order."""
        out = []
        for f in self.blaschke:
            out.extend([f.zero] * f.multiplicity)
        return out

    def factors(self) -> list:
        """Flat list of the scalar factors whose product is theta (constant excluded)."""
        return [f for f in self.blaschke for _ in range(f.multiplicity)] + list(self.atoms)

    def __mul__(self, other: "InnerFunction") -> "InnerFunction":
        if not isinstance(other, InnerFunction):
            return NotImplemented
        return InnerFunction(
            self.blaschke + other.blaschke,
            self.atoms + other.atoms,
            self.unimodular_constant * other.unimodular_constant,
        )

    # -- unchecked vectorised evaluation ----------------------------------

    def _values(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.unimodular_constant, dtype=complex)
        for f in self.blaschke:
            out = out * f.value(z) ** f.multiplicity
        if self.atoms:
            expo = np.zeros(z.shape, dtype=complex)
            for a in self.atoms:
                expo = expo + a.exponent(z)
            out = out * np.exp(expo)
        return out

    def _derivatives(self, z):
        z = np.asarray(z, dtype=complex)
        # product rule over Blaschke powers; the singular factor S satisfies S' = S * E'
        bvals = [f.value(z) for f in self.blaschke]
        total = np.zeros(z.shape, dtype=complex)
        for i, f in enumerate(self.blaschke):
            term = f.multiplicity * bvals[i] ** (f.multiplicity - 1) * f.derivative(z)
            for j, g in enumerate(self.blaschke):
                if j != i:
                    term = term * bvals[j] ** g.multiplicity
            total = total + term
        if not self.blaschke:
            bprod = np.ones(z.shape, dtype=complex)
        else:
            bprod = np.ones(z.shape, dtype=complex)
            for i, f in enumerate(self.blaschke):
                bprod = bprod * bvals[i] ** f.multiplicity
        if self.atoms:
            expo = np.zeros(z.shape, dtype=complex)
            dexpo = np.zeros(z.shape, dtype=complex)
            for a in self.atoms:
                expo = expo + a.exponent(z)
                dexpo = dexpo + a.exponent_derivative(z)
            s = np.exp(expo)
            total = total * s + bprod * s * dexpo
        return self.unimodular_constant * total

    # -- JSON ---------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "blaschke": [
                {"zero": [f.zero.real, f.zero.imag], "mult": f.multiplicity} for f in self.blaschke
            ],
            "atoms": [
                {"angle": cmath.phase(a.location), "mass": a.mass} for a in self.atoms
            ],
            "constant_phase": cmath.phase(self.unimodular_constant),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InnerFunction":
        blaschke = []
        for item in data.get("blaschke", []):
            re, im = item["zero"]
            blaschke.append(BlaschkeFactor(complex(re, im), int(item.get("mult", 1))))
        atoms = [SingularAtom.at_angle(float(a["angle"]), float(a["mass"])) for a in data.get("atoms", [])]
        phase = float(data.get("constant_phase", 0.0))
        return cls(tuple(blaschke), tuple(atoms), cmath.exp(1j * phase))


def boundary_spectrum(theta: InnerFunction) -> list:
    """Points of the unit circle where theta does not extend analytically.

    Finite Blaschke products contribute nothing; each atom contributes its location.
    """
    out = []
    for a in theta.atoms:
        if all(abs(a.location - p) > 1e-14 for p in out):
            out.append(a.location)
    return out


def _check_disk_or_circle(theta: InnerFunction, z: complex) -> None:
    r = abs(z)
    if r > 1.0 + _CIRCLE_SLACK:
        raise DomainError(f"|z| = {r} > 1; use eval_exterior")
    if r >= 1.0 - TAU_BDRY:
        for p in boundary_spectrum(theta):
            if abs(z - p) <= TAU_BDRY:
                raise DomainError(f"z = {z} lies within {TAU_BDRY} of the boundary spectrum point {p}")


def eval_inner(theta: InnerFunction, z: complex) -> complex:
    """theta(z) for z in the closed disk away from the boundary spectrum."""
    z = complex(z)
    _check_disk_or_circle(theta, z)
    return complex(theta._values(z))


def eval_exterior(theta: InnerFunction, z: complex) -> complex:
    """Pseudocontinuation 1/conj(theta(1/conj(z))) for |z| > 1."""
    z = complex(z)
    if not abs(z) > 1.0:
        raise DomainError(f"eval_exterior needs |z| > 1, got {abs(z)}")
    w = 1.0 / z.conjugate()
    for f in theta.blaschke:
        if abs(w - f.zero) < TAU_ZERO:
            raise PoleError(f"pseudocontinuation has a pole at {z}")
    inner = complex(theta._values(w))
    if inner == 0:
        raise PoleError(f"pseudocontinuation has a pole at {z}")
    return 1.0 / inner.conjugate()


def eval_derivative(theta: InnerFunction, z: complex) -> complex:
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError("derivative is evaluated in the open disk only")
    return complex(theta._derivatives(z))


def reflected_conj(theta: InnerFunction, z: complex) -> complex:
    """conj(theta(1/conj(z))) for |z| > 1; finite even at pseudocontinuation poles."""
    z = complex(z)
    if not abs(z) > 1.0:
        raise DomainError("reflected_conj needs |z| > 1")
    return complex(theta._values(1.0 / z.conjugate())).conjugate()


def circle_samples(theta: InnerFunction, n: int, inset: float = 1e-9) -> np.ndarray:
    """theta at the n-th roots of unity.

    Grid points nearest each atom are evaluated at radius ``1 - inset`` instead,
    since the essential singularity makes the boundary value meaningless there.
    """
    k = np.arange(n)
    z = np.exp(2j * np.pi * k / n)
    if theta.atoms:
        z = z.copy()
        for p in boundary_spectrum(theta):
            pos = (cmath.phase(p) % (2 * math.pi)) * n / (2 * math.pi)
            for idx in {int(math.floor(pos)) % n, int(math.ceil(pos)) % n}:
                z[idx] = z[idx] * (1.0 - inset)
    return theta._values(z)
