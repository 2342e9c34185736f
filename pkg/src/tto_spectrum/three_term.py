"""Three-term symbols Phi = a*conj(z) + b + c*z.

With beta = a/c the roots of c z^2 + (b - lambda) z + a multiply to beta.  For
0 < |beta| < 1 the eigenvalues with both roots in the disk correspond to zeros
of

    F(z) = z theta(z) - (beta/z) theta(beta/z)

in the annulus |beta| < |z| < 1; F(beta/z) = -F(z), so zeros come in pairs
{z, beta/z}.  Zeros with z^2 = beta are the double-root case and are decided by
z theta'(z) + theta(z) = 0 instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .eigensolver import (
    TAU_EIG,
    build_criterion,
    construct_eigenfunction,
    default_truncation,
    default_tau_res,
)
from .errors import ContourTooClose, PreconditionError, TTOError
from .inner import InnerFunction
from .symbols import LaurentSymbol, roots_of_Q, spe_test

TRIVIAL_TOL = 1e-9
TAU_DBL = 1e-10
ATOM_INSET = 1e-7
MIN_CELL = 1e-6
F_FLOOR = 1e-12
MAX_PHASE_STEP = math.pi / 4


@dataclass(frozen=True)
class AnnulusProblem:
    a: complex
    b: complex
    c: complex
    theta: InnerFunction

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.a == 0 or self.c == 0:
            raise PreconditionError("a and c must be nonzero")

    @property
    def beta(self) -> complex:
        return self.a / self.c

    @property
    def inner_radius(self) -> float:
        return abs(self.beta)

    @property
    def symbol(self) -> LaurentSymbol:
        return LaurentSymbol.three_term(self.a, self.b, self.c)

    def lam(self, z):
        return self.b + self.c * z + self.a / z

    def F(self, z):
        z = np.asarray(z, dtype=complex)
        u = self.beta / z
        th = self.theta
        return z * th._values(z) - u * th._values(u)

    def dF(self, z):
        z = np.asarray(z, dtype=complex)
        u = self.beta / z
        th = self.theta
        return (th._values(z) + z * th._derivatives(z)
                + (self.beta / z ** 2) * (th._values(u) + u * th._derivatives(u)))

    def dlogF(self, z):
        return self.dF(z) / self.F(z)

    def reflected(self) -> "AnnulusProblem":
        """Problem for the adjoint symbol; its beta is 1/conj(beta)."""
        return AnnulusProblem(np.conj(self.c), np.conj(self.b), np.conj(self.a), self.theta)


@dataclass
class WertSolution:
    z1: complex
    z2: complex
    lam: complex
    trivial: bool
    multiplicity: int = 1
    refined: bool = True
    residual: float | None = None
    double_root_eigenvalue: bool | None = None
    residual_ok: bool = False

    def to_dict(self) -> dict:
        return {
            "z1": [self.z1.real, self.z1.imag],
            "z2": [self.z2.real, self.z2.imag],
            "lambda": [self.lam.real, self.lam.imag],
            "trivial": self.trivial,
            "multiplicity": self.multiplicity,
            "refined": self.refined,
            "residual": self.residual,
            "residual_ok": self.residual_ok,
            "double_root_eigenvalue": self.double_root_eigenvalue,
        }


# -- argument principle -------------------------------------------------------


def phase_change(func: Callable, path: Callable, t0: float = 0.0, t1: float = 1.0,
                 n0: int = 64, max_points: int = 4_000_000, dlog: Callable | None = None) -> float:
    """Continuous change of arg(func(path(t))) for t in [t0, t1].

    Samples are bisected until every step changes the phase by less than pi/4.
    With ``dlog`` (z -> func'(z)/func(z)) a step is also bisected when
    |dlog| * |dz| exceeds pi/4 at either end, which catches whole turns that
    the sampled phase alone cannot see.
    """
    t = np.linspace(t0, t1, n0 + 1)
    z = path(t)
    v = func(z)
    g = np.abs(dlog(z)) if dlog is not None else None
    while True:
        if np.any(np.abs(v) < F_FLOOR) or not np.all(np.isfinite(v)):
            raise ContourTooClose("integrand vanishes (or is singular) on the contour")
        d = np.angle(v[1:] / v[:-1])
        bad = np.abs(d) > MAX_PHASE_STEP
        if g is not None:
            bad |= np.maximum(g[1:], g[:-1]) * np.abs(np.diff(z)) > MAX_PHASE_STEP
        if not bad.any():
            return float(d.sum())
        if len(t) > max_points:
            raise ContourTooClose("phase refinement exceeded the sample budget")
        idx = np.nonzero(bad)[0]
        if np.min(t[idx + 1] - t[idx]) < 1e-15 * max(1.0, abs(t1 - t0)):
            raise ContourTooClose("phase jumps across an unresolvably short step")
        tm = 0.5 * (t[idx] + t[idx + 1])
        zm = path(tm)
        t = np.insert(t, idx + 1, tm)
        z = np.insert(z, idx + 1, zm)
        v = np.insert(v, idx + 1, func(zm))
        if g is not None:
            g = np.insert(g, idx + 1, np.abs(dlog(zm)))


def circle_winding(func: Callable, radius: float, offset: float = 0.1234,
                   dlog: Callable | None = None) -> float:
    """Phase change of func around |z| = radius, counterclockwise, in units of 2 pi."""
    path = lambda t: radius * np.exp(1j * (offset + t))
    return phase_change(func, path, 0.0, 2 * math.pi, n0=256, dlog=dlog) / (2 * math.pi)


def annulus_zero_count(func: Callable, r_in: float, r_out: float, dlog: Callable | None = None) -> int:
    """Zeros of an analytic ``func`` in r_in < |z| < r_out by the argument principle."""
    total = circle_winding(func, r_out, dlog=dlog) - circle_winding(func, r_in, dlog=dlog)
    count = int(round(total))
    if abs(total - count) > 0.1:
        raise ContourTooClose(f"non-integer winding {total}")
    return count


def _rect_phase(func, s0, s1, t0, t1, dlog=None) -> float:
    """Phase change around the image of the (log r, arg) rectangle under exp."""
    edges = [
        lambda u: np.exp(s0 + u * (s1 - s0) + 1j * t0),
        lambda u: np.exp(s1 + 1j * (t0 + u * (t1 - t0))),
        lambda u: np.exp(s1 - u * (s1 - s0) + 1j * t1),
        lambda u: np.exp(s0 + 1j * (t1 - u * (t1 - t0))),
    ]
    return sum(phase_change(func, e, 0.0, 1.0, n0=32, dlog=dlog) for e in edges)


def _rect_count(func, s0, s1, t0, t1, dlog=None) -> int:
    total = _rect_phase(func, s0, s1, t0, t1, dlog) / (2 * math.pi)
    count = int(round(total))
    if abs(total - count) > 0.1 or count < 0:
        raise ContourTooClose(f"cell winding {total} is not a nonnegative integer")
    return count


# -- zero finding ---------------------------------------------------------------


def outer_radius(prob: AnnulusProblem, inset: float) -> float:
    r = 1.0 - inset
    if prob.theta.atoms:
        r = min(r, 1.0 - ATOM_INSET)
    if not r * r > abs(prob.beta):
        # inner radius |beta|/r would not lie below r
        raise PreconditionError(f"contour inset {inset} leaves an empty annulus (need (1-inset)^2 > |beta|)")
    return r


def _newton(prob: AnnulusProblem, z0: complex, tol: float, max_iter: int = 60, mult: int = 1):
    z = complex(z0)
    for _ in range(max_iter):
        fz = complex(prob.F(z))
        dz = complex(prob.dF(z))
        if dz == 0 or not np.isfinite(dz):
            return z, False
        step = mult * fz / dz
        z -= step
        if not np.isfinite(z) or z == 0:
            return z, False
        if abs(step) < tol * max(1.0, abs(z)):
            return z, True
    return z, False


@dataclass
class _Zero:
    z: complex
    multiplicity: int
    refined: bool


def find_annulus_zeros(prob: AnnulusProblem, r_in: float, r_out: float, refine_tol: float = 1e-14,
                       sectors: int = 8) -> tuple[list, int]:
    """Isolate and refine the zeros of F in r_in < |z| < r_out.

    Returns (zeros, total argument-principle count of the annulus).
    """
    func = prob.F
    s_lo, s_hi = math.log(r_in), math.log(r_out)
    t_start = 0.1234
    width = 2 * math.pi / sectors
    stack = []
    total = 0
    for k in range(sectors):
        cell = (s_lo, s_hi, t_start + k * width, t_start + (k + 1) * width)
        n = _rect_count(func, *cell, dlog=prob.dlogF)
        total += n
        if n:
            stack.append((cell, n))

    zeros: list = []
    while stack:
        (s0, s1, t0, t1), n = stack.pop()
        diam = math.exp(s1) * math.hypot(s1 - s0, t1 - t0)
        centre = cmath.exp(0.5 * (s0 + s1) + 0.5j * (t0 + t1))
        if n > 1:
            cluster = _cluster(prob, centre, n, s0, s1, t0, t1, diam)
            if cluster is not None:
                zeros.append(cluster)
                continue
        if n == 1 or diam < MIN_CELL:
            z, ok = _newton(prob, centre, refine_tol)
            inside = ok and z != 0 and _in_cell(z, s0, s1, t0, t1, slack=0.05)
            if inside and n == 1:
                zeros.append(_Zero(z, 1, True))
                continue
            if diam < MIN_CELL:
                zeros.append(_Zero(z if inside else centre, n, bool(inside and abs(prob.F(z)) < 1e-10)))
                continue
        stack.extend(_split(func, s0, s1, t0, t1, n, prob.dlogF))

    # the same zero may be reached from two neighbouring cells only if it sits
    # on a shared edge, which the counting step rules out; dedupe defensively
    out: list = []
    for zr in sorted(zeros, key=lambda q: (q.z.real, q.z.imag)):
        if out and abs(out[-1].z - zr.z) < 1e-10 and zr.multiplicity == 1 and out[-1].multiplicity == 1:
            continue
        out.append(zr)
    return out, total


def _cluster(prob: AnnulusProblem, centre: complex, n: int, s0, s1, t0, t1, diam) -> _Zero | None:
    """Try to certify that all n zeros of a cell sit at one point (a multiple zero).

    Newton with multiplicity n gives the candidate; the argument principle on a
    small circle around it, kept inside the cell, must then count all n zeros.
    """
    z = complex(centre)
    best, best_val = z, abs(complex(prob.F(z)))
    for _ in range(40):
        fz, dz = complex(prob.F(z)), complex(prob.dF(z))
        if dz == 0 or not np.isfinite(dz) or fz == 0:
            break
        z = z - n * fz / dz
        if not np.isfinite(z) or z == 0:
            return None
        v = abs(complex(prob.F(z)))
        if v < best_val:
            best, best_val = z, v
    z = best
    if not _in_cell(z, s0, s1, t0, t1):
        return None
    s, t = math.log(abs(z)), cmath.phase(z)
    t = (t - t0) % (2 * math.pi) + t0
    margin = abs(z) * min(s - s0, s1 - s, t - t0, t1 - t)
    rho = 0.9 * min(margin, diam / 8)
    if rho < 1e-9:
        return None
    try:
        w = phase_change(prob.F, lambda u: z + rho * np.exp(2j * math.pi * u), 0.0, 1.0,
                         n0=64, dlog=prob.dlogF) / (2 * math.pi)
    except ContourTooClose:
        return None
    if abs(w - n) > 0.1:
        return None
    # zeros pair up under z -> beta/z; an odd cluster around a fixed point contains it
    for root in (cmath.sqrt(prob.beta), -cmath.sqrt(prob.beta)):
        if n % 2 == 1 and abs(z - root) < rho:
            return _Zero(root, n, True)
    return _Zero(z, n, best_val < 1e-10)


def _in_cell(z, s0, s1, t0, t1, slack=0.0) -> bool:
    s = math.log(abs(z))
    t = cmath.phase(z)
    ds, dt = (s1 - s0) * slack, (t1 - t0) * slack
    # bring t into [t0 - dt, t0 - dt + 2 pi)
    t = (t - (t0 - dt)) % (2 * math.pi) + (t0 - dt)
    return s0 - ds <= s <= s1 + ds and t <= t1 + dt


def _split(func, s0, s1, t0, t1, parent_count, dlog=None):
    for attempt in range(4):
        fs = 0.5137 + 0.071 * attempt
        ft = 0.4863 - 0.053 * attempt
        sm = s0 + fs * (s1 - s0)
        tm = t0 + ft * (t1 - t0)
        kids = [(s0, sm, t0, tm), (sm, s1, t0, tm), (s0, sm, tm, t1), (sm, s1, tm, t1)]
        try:
            counts = [_rect_count(func, *k, dlog=dlog) for k in kids]
        except ContourTooClose:
            continue
        if sum(counts) != parent_count:
            continue
        return [(k, n) for k, n in zip(kids, counts) if n]
    raise ContourTooClose("could not split a cell without a zero on its boundary after 3 nudges")


def _pair_solutions(prob: AnnulusProblem, zeros: list) -> list:
    beta = prob.beta
    rb = math.sqrt(abs(beta))
    sols: list = []
    used = [False] * len(zeros)
    for i, zr in enumerate(zeros):
        if used[i]:
            continue
        used[i] = True
        z = zr.z
        trivial = abs(z * z - beta) < TRIVIAL_TOL
        partner = beta / z
        if not trivial:
            # drop the partner zero from the list
            j = min((j for j in range(len(zeros)) if not used[j]),
                    key=lambda j: abs(zeros[j].z - partner), default=None)
            if j is not None and abs(zeros[j].z - partner) < 1e-7 * max(1.0, abs(partner)):
                used[j] = True
            # representative: the outer member of the pair
            if abs(z) < rb or (abs(abs(z) - rb) < 1e-12 and (z.real, z.imag) < (partner.real, partner.imag)):
                z, partner = partner, z
        sols.append(WertSolution(z, partner, complex(prob.lam(z)), trivial, zr.multiplicity, zr.refined))
    sols.sort(key=lambda s: (s.z1.real, s.z1.imag))
    return sols


def solve_wert(prob: AnnulusProblem, refine_tol: float = 1e-14, contour_inset: float = 1e-3) -> list:
    """Solutions of z theta(z) = (beta/z) theta(beta/z) in the (inset) annulus, one per pair."""
    if not 0 < abs(prob.beta) < 1:
        raise PreconditionError("the annulus path needs 0 < |beta| < 1")
    r_out = outer_radius(prob, contour_inset)
    r_in = abs(prob.beta) / r_out
    zeros, _ = find_annulus_zeros(prob, r_in, r_out, refine_tol)
    sols = _pair_solutions(prob, zeros)
    for s in sols:
        if s.trivial:
            s.double_root_eigenvalue = double_root_check(prob, s.z1)["is_eigenvalue"]
    return sols


def zero_multiplicity_total(sols: list) -> int:
    """Number of zeros of F represented by the solutions (pairs count twice)."""
    return sum(s.multiplicity * (1 if s.trivial else 2) for s in sols)


def exterior_wert(prob: AnnulusProblem, refine_tol: float = 1e-14, contour_inset: float = 1e-3) -> list:
    """Root pairs outside the closed disk (|beta| > 1) via w = 1/conj(z)."""
    if not abs(prob.beta) > 1:
        raise PreconditionError("the exterior path needs |beta| > 1")
    refl = prob.reflected()
    out = []
    for s in solve_wert(refl, refine_tol, contour_inset):
        z1 = 1.0 / np.conj(s.z1)
        z2 = 1.0 / np.conj(s.z2)
        out.append(WertSolution(complex(z1), complex(z2), complex(prob.lam(z1)), s.trivial,
                                s.multiplicity, s.refined, None, s.double_root_eigenvalue))
    out.sort(key=lambda s: (s.z1.real, s.z1.imag))
    return out


def double_root_check(prob: AnnulusProblem, z0: complex, tau_dbl: float = TAU_DBL) -> dict:
    """Double root z0 of Phi - lambda in the disk: eigenvalue iff z0 theta'(z0) + theta(z0) = 0."""
    z0 = complex(z0)
    if abs(z0 * z0 - prob.beta) > 1e-10 * max(1.0, abs(prob.beta)):
        raise PreconditionError(f"z0^2 = {z0 * z0} differs from beta = {prob.beta}")
    if not abs(z0) < 1:
        raise PreconditionError("double-root check applies to roots in the disk")
    th = complex(prob.theta._values(z0))
    dth = complex(prob.theta._derivatives(z0))
    value = z0 * dth + th
    return {
        "is_eigenvalue": abs(value) < tau_dbl * (1.0 + abs(dth)),
        "lambda": prob.b + 2 * prob.c * z0,
        "value": value,
    }


def psi_pole_count(prob: AnnulusProblem, contour_inset: float = 1e-3) -> int:
    """Poles of Psi = 1/F in the inset annulus (zeros of F), by the argument principle."""
    if not 0 < abs(prob.beta) < 1:
        raise PreconditionError("needs 0 < |beta| < 1")
    r_out = outer_radius(prob, contour_inset)
    return annulus_zero_count(prob.F, abs(prob.beta) / r_out, r_out, dlog=prob.dlogF)


def count_mixed_exclusion(prob: AnnulusProblem, lambda_samples, tau_eig: float = TAU_EIG) -> dict:
    """Check that no lambda whose roots straddle the circle passes the criterion."""
    if abs(abs(prob.beta) - 1.0) < 1e-12:
        raise PreconditionError("|beta| = 1")
    phi = prob.symbol
    checked = 0
    violations = []
    min_sigma = math.inf
    for lam in lambda_samples:
        try:
            cfg = roots_of_Q(phi, lam)
        except TTOError:
            continue
        if cfg.n_inside != 1:
            continue
        sys = build_criterion(prob.theta, phi, lam, tau_eig, config=cfg)
        checked += 1
        min_sigma = min(min_sigma, sys.relative_sigma)
        if sys.is_candidate:
            violations.append(complex(lam))
    return {"checked": checked, "violations": violations, "min_relative_sigma": min_sigma}


def straddling_lambdas(prob: AnnulusProblem, count: int, rng: np.random.Generator) -> list:
    """Random lambdas whose two roots lie on opposite sides of the circle."""
    beta = prob.beta
    out = []
    while len(out) < count:
        # pick z1 outside with beta/z1 inside, away from the circle
        lo = max(1.0, abs(beta)) * 1.01
        r = lo * (1.0 + 2.0 * rng.random())
        z1 = r * np.exp(2j * np.pi * rng.random())
        z2 = beta / z1
        if abs(z2) < 0.99:
            out.append(complex(prob.lam(z1)))
    return out


# -- full report ---------------------------------------------------------------


@dataclass
class ThreeTermReport:
    beta: complex
    solutions: list
    psi_pole_count: int | None
    excluded_mixed: int
    mixed_checked: int
    spe: dict | None
    eigenpairs: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        confirmed = self.confirmed_lambdas()
        d = {
            "beta": [self.beta.real, self.beta.imag],
            "solutions": [s.to_dict() for s in self.solutions],
            "psi_pole_count": self.psi_pole_count,
            "excluded_mixed": self.excluded_mixed,
            "mixed_checked": self.mixed_checked,
            "confirmed_eigenvalues": [[l.real, l.imag] for l in confirmed],
            "hypercyclicity_obstruction": bool(confirmed),
        }
        if confirmed:
            d["obstruction_note"] = (
                "A_Phi has an eigenvalue; its adjoint A_conj(Phi) then has one too "
                "(conjugate eigenvalue), and point spectrum of the adjoint rules out a dense orbit."
            )
        if self.spe is not None:
            d["spe"] = self.spe
        if self.notes:
            d["notes"] = list(self.notes)
        return d

    def confirmed_lambdas(self) -> list:
        out = []
        for s in self.solutions:
            if s.trivial:
                if s.double_root_eigenvalue:
                    out.append(s.lam)
            elif s.residual_ok:
                out.append(s.lam)
        return out


def analyze(prob: AnnulusProblem, contour_inset: float = 1e-3, K: int | None = None,
            tau_res: float | None = None, mixed_samples: int = 200, seed: int = 0,
            with_eigenfunctions: bool = True) -> ThreeTermReport:
    """Run every three-term check and collect the results into one report."""
    theta = prob.theta
    if K is None:
        K = default_truncation(theta)
    if tau_res is None:
        tau_res = default_tau_res(theta)
    beta = prob.beta
    notes = []
    if abs(abs(beta) - 1.0) < 1e-12:
        raise PreconditionError("|beta| = 1: off-circle root pairs never give eigenvalues")

    spe = None
    if abs(abs(prob.a) - abs(prob.c)) >= 1e-12:
        spe = spe_test(prob.a, prob.b, prob.c).to_dict()

    if abs(beta) < 1:
        sols = solve_wert(prob, contour_inset=contour_inset)
        count = psi_pole_count(prob, contour_inset)
        found = zero_multiplicity_total(sols)
        if found != count:
            notes.append(f"argument-principle count {count} differs from refined zeros {found}")
    else:
        sols = exterior_wert(prob, contour_inset=contour_inset)
        count = psi_pole_count(prob.reflected(), contour_inset)
        notes.append("psi_pole_count refers to the reflected annulus problem (|beta| > 1)")

    pairs = []
    for s in sols:
        if s.trivial or not with_eigenfunctions:
            continue
        try:
            sys = build_criterion(theta, prob.symbol, s.lam)
            pair = construct_eigenfunction(theta, prob.symbol, sys, K=K, tau_res=tau_res, check=False)
        except TTOError as exc:
            notes.append(f"lambda={s.lam}: {type(exc).__name__}: {exc}")
            continue
        s.residual = pair.residual
        s.residual_ok = pair.residual <= tau_res and pair.model_defect <= tau_res
        if s.residual_ok:
            pairs.append(pair)
    if not theta.is_finite_blaschke:
        notes.append(f"found {found if abs(beta) < 1 else count} zeros of F in the inset annulus; "
                     "the count is not claimed to be complete")

    rng = np.random.default_rng(seed)
    mixed = count_mixed_exclusion(prob, straddling_lambdas(prob, mixed_samples, rng)) if mixed_samples else \
        {"checked": 0, "violations": []}
    return ThreeTermReport(beta, sols, count, len(mixed["violations"]), mixed["checked"], spe, pairs, notes)
