"""Eigenvalue criterion for A_Phi on K_theta with a Laurent-polynomial symbol.

For a candidate lambda let z_j be the roots of Q = z^N (Phi - lambda).  The
unknowns are the coefficients of P1 (degree <= M-1) and P2 (degree <= N-1);
root z_j contributes the row

    inside  (|z_j| < 1):  z_j^N theta(z_j) P1(z_j) + P2(z_j)
    outside (|z_j| > 1):  z_j^N P1(z_j) + conj(theta(1/conj z_j)) P2(z_j)

and lambda is an eigenvalue exactly when this square system is singular.
"""

from __future__ import annotations

import logging
import os
from itertools import permutations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    CircleRoots,
    DegenerateRoots,
    NoConvergence,
    NotInModelSpace,
    PreconditionError,
    ResidualTooLarge,
    TTOError,
)
from .fourier import FourierSeries, apply_band_tto, apply_tto, fft_size, h2_defect
from .inner import InnerFunction, circle_samples, eval_derivative
from .symbols import TAU_CIRC, TAU_SEP_REL, LaurentSymbol, RootConfiguration, roots_of_Q

log = logging.getLogger(__name__)

TAU_EIG = 1e-8
TAU_SEED = 1e-4
TAU_RES = 1e-6
TAU_RES_ATOMIC = 1e-3
K_FINITE = 4096
K_ATOMIC = 65536
# grid points closer than this to an inside root use theta' for the difference quotient
QUOTIENT_SWITCH = 1e-6


def default_truncation(theta: InnerFunction) -> int:
    return K_FINITE if theta.is_finite_blaschke else K_ATOMIC


def default_tau_res(theta: InnerFunction) -> float:
    return TAU_RES if theta.is_finite_blaschke else TAU_RES_ATOMIC


@dataclass
class CriterionSystem:
    lam: complex
    config: RootConfiguration
    matrix: np.ndarray
    sigma_min: float
    norm: float
    kernel_vector: np.ndarray
    tau_eig: float = TAU_EIG

    @property
    def relative_sigma(self) -> float:
        return self.sigma_min / self.norm if self.norm > 0 else 0.0

    @property
    def is_candidate(self) -> bool:
        return self.sigma_min < self.tau_eig * self.norm


@dataclass
class Eigenpair:
    lam: complex
    p1: np.ndarray
    p2: np.ndarray
    f: FourierSeries
    residual: float
    model_defect: float = 0.0
    factorization_error: float = 0.0
    negative_energy: float = 0.0

    def to_dict(self, include_fourier: bool = True) -> dict:
        d = {
            "lambda": [self.lam.real, self.lam.imag],
            "residual": self.residual,
            "p1": [[x.real, x.imag] for x in self.p1],
            "p2": [[x.real, x.imag] for x in self.p2],
        }
        if include_fourier:
            d["fourier"] = [[x.real, x.imag] for x in self.f.coeffs]
        return d


def criterion_rows(theta: InnerFunction, phi: LaurentSymbol, roots: np.ndarray,
                   inside: np.ndarray) -> np.ndarray:
    """Raw (M+N)x(M+N) matrix; works on stacked root arrays of shape (..., M+N)."""
    M, N = phi.M, phi.N
    z = np.asarray(roots, dtype=complex)
    inside = np.asarray(inside, dtype=bool)
    zin = np.where(inside, z, 0.0)
    zrefl = np.where(inside, 0.0, 1.0 / np.conj(np.where(inside, 1.0, z)))
    th_in = theta._values(zin)
    th_out = np.conj(theta._values(zrefl))
    zn = z ** N
    w1 = np.where(inside, zn * th_in, zn)
    w2 = np.where(inside, 1.0 + 0j, th_out)
    pows1 = z[..., None] ** np.arange(M)
    pows2 = z[..., None] ** np.arange(N)
    return np.concatenate([w1[..., None] * pows1, w2[..., None] * pows2], axis=-1)


def _normalised(mat: np.ndarray) -> np.ndarray:
    rn = np.linalg.norm(mat, axis=-1, keepdims=True)
    return mat / np.where(rn > 0, rn, 1.0)


def build_criterion(theta: InnerFunction, phi: LaurentSymbol, lam: complex,
                    tau_eig: float = TAU_EIG, config: RootConfiguration | None = None) -> CriterionSystem:
    """Assemble the criterion system at ``lam``; raises DegenerateRoots/CircleRoots."""
    if config is None:
        config = roots_of_Q(phi, lam)
    mat = criterion_rows(theta, phi, config.roots, config.inside)
    # row scaling leaves the kernel unchanged and removes the imbalance between
    # roots of very different modulus
    nmat = _normalised(mat)
    _, s, vh = np.linalg.svd(nmat)
    return CriterionSystem(
        lam=complex(lam),
        config=config,
        matrix=mat,
        sigma_min=float(s[-1]),
        norm=float(s[0]),
        kernel_vector=np.conj(vh[-1]),
        tau_eig=tau_eig,
    )


# -- eigenfunctions ---------------------------------------------------------


def _eigenfunction_samples(theta, phi, config, p1, p2, zgrid, th):
    N = phi.N
    f = np.zeros(zgrid.shape, dtype=complex)
    for zj, inside, bj in zip(config.roots, config.inside, config.beta):
        if inside:
            weight = bj * zj ** N * np.polyval(p1[::-1], zj)
            if weight == 0:
                continue
            thj = complex(theta._values(zj))
            diff = zgrid - zj
            near = np.abs(diff) < QUOTIENT_SWITCH
            q = (th - thj) / np.where(near, 1.0, diff)
            if np.any(near):
                q = np.where(near, eval_derivative(theta, zj), q)
            f += weight * q
        else:
            weight = bj * np.polyval(p2[::-1], zj)
            if weight == 0:
                continue
            refl = complex(theta._values(1.0 / np.conj(zj))).conjugate()
            f += weight * (1.0 - th * refl) / (zgrid - zj)
    return f


def construct_eigenfunction(theta: InnerFunction, phi: LaurentSymbol, sys: CriterionSystem,
                            kernel_vector: np.ndarray | None = None, K: int | None = None,
                            tau_res: float | None = None, check: bool = True) -> Eigenpair:
    """Build f from the kernel of the criterion system and measure ||A_Phi f - lambda f||."""
    if K is None:
        K = default_truncation(theta)
    if tau_res is None:
        tau_res = default_tau_res(theta)
    v = sys.kernel_vector if kernel_vector is None else np.asarray(kernel_vector, dtype=complex)
    M, N = phi.M, phi.N
    p1, p2 = v[:M].copy(), v[M:].copy()
    L = fft_size(K, M, N)
    zgrid = np.exp(2j * np.pi * np.arange(L) / L)
    th = circle_samples(theta, L)
    samples = _eigenfunction_samples(theta, phi, sys.config, p1, p2, zgrid, th)

    f, neg = FourierSeries.from_samples(samples, K)
    nf = f.norm()
    if not nf > 0 or not np.isfinite(nf):
        raise ResidualTooLarge(f"eigenfunction formula produced a zero function at lambda={sys.lam}", np.inf)
    # fix scale and phase: unit norm, largest coefficient real positive
    k = int(np.argmax(np.abs(f.coeffs)))
    scale = np.conj(f.coeffs[k]) / abs(f.coeffs[k]) / nf
    f = f.scaled(scale)
    p1, p2 = p1 * scale, p2 * scale
    samples = samples * scale

    # Q f = z^N theta P1 + P2 on the grid
    qz = np.polyval(sys.config.q_coeffs, zgrid)
    rhs = zgrid ** N * th * np.polyval(p1[::-1], zgrid) + np.polyval(p2[::-1], zgrid)
    fact_err = float(np.sqrt(np.mean(np.abs(qz * samples - rhs) ** 2)))

    af = apply_tto(theta, phi, f, L, th)
    residual = float((af - f.scaled(sys.lam)).norm())
    defect = h2_defect(theta, f, L, th)
    pair = Eigenpair(sys.lam, p1, p2, f, residual, defect, fact_err, neg)
    if check:
        if residual > tau_res:
            raise ResidualTooLarge(f"residual {residual:.3g} > {tau_res:g} at lambda={sys.lam}", residual)
        if defect > tau_res:
            raise NotInModelSpace(f"||P+(conj(theta) f)|| = {defect:.3g} at lambda={sys.lam}", defect)
    return pair


# -- scanning -------------------------------------------------------------


@dataclass
class ScanResult:
    eigenpairs: list
    re: np.ndarray
    im: np.ndarray
    sigma: np.ndarray  # relative sigma_min on the grid, nan where excluded
    excluded: list  # lambdas where roots were on the circle or degenerate
    failures: list  # (seed, reason) for seeds that did not yield an eigenpair
    extra_points: list = field(default_factory=list)  # (lambda, relative sigma) from subdivision
    curve_cells: list = field(default_factory=list)  # (row, col) grid nodes whose cell meets Phi(T)

    @property
    def eigenvalues(self) -> list:
        return [p.lam for p in self.eigenpairs]


def _batch_roots(phi: LaurentSymbol, lams: np.ndarray) -> np.ndarray:
    deg = phi.M + phi.N
    lams = np.asarray(lams, dtype=complex).ravel()
    if not len(lams):
        return np.zeros((0, deg), dtype=complex)
    coeffs = np.tile(phi.q_coefficients(0.0), (len(lams), 1))
    coeffs[:, phi.M] -= lams  # constant term of phi sits at degree N
    comp = np.zeros((len(lams), deg, deg), dtype=complex)
    comp[:, 0, :] = -coeffs[:, 1:] / coeffs[:, :1]
    if deg > 1:
        comp[:, 1:, :-1] = np.eye(deg - 1)
    z = np.linalg.eigvals(comp)
    dco = coeffs[:, :-1] * np.arange(deg, 0, -1)
    for _ in range(2):
        pz = np.zeros_like(z)
        dz = np.zeros_like(z)
        for i in range(deg + 1):
            pz = pz * z + coeffs[:, i: i + 1]
        for i in range(deg):
            dz = dz * z + dco[:, i: i + 1]
        ok = dz != 0
        z = np.where(ok, z - pz / np.where(ok, dz, 1.0), z)
    return z


def sigma_grid(theta: InnerFunction, phi: LaurentSymbol, lams: np.ndarray,
               tau_circ: float = TAU_CIRC, tau_sep_rel: float = TAU_SEP_REL):
    """Relative sigma_min and inside-root counts for many lambdas at once.

    Returns (sigma, n_inside) with sigma = nan where the configuration is inadmissible.
    """
    lams = np.asarray(lams, dtype=complex).ravel()
    z = _batch_roots(phi, lams)
    absz = np.abs(z)
    bad = np.any(np.abs(absz - 1.0) < tau_circ, axis=1)
    if z.shape[1] > 1:
        gaps = np.abs(z[:, :, None] - z[:, None, :])
        idx = np.arange(z.shape[1])
        gaps[:, idx, idx] = np.inf
        sep = tau_sep_rel * np.maximum(1.0, absz.max(axis=1))
        bad |= gaps.min(axis=(1, 2)) < sep
    inside = absz < 1.0
    mats = _normalised(criterion_rows(theta, phi, z, inside))
    s = np.linalg.svd(mats, compute_uv=False)
    rel = s[:, -1] / s[:, 0]
    rel[bad] = np.nan
    return rel, inside.sum(axis=1)


def _match(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Reorder each row of ``new`` (shape (B, d)) to follow the labels in ``prev``."""
    B, d = new.shape
    if d <= 5:
        perms = np.array(list(permutations(range(d))))
        cand = new[:, perms]  # (B, P, d)
        cost = np.abs(cand - prev[:, None, :]).sum(axis=2)
        best = np.argmin(cost, axis=1)
        return cand[np.arange(B), best]
    out = np.empty_like(new)
    for b in range(B):
        _, cols = linear_sum_assignment(np.abs(prev[b][:, None] - new[b][None, :]))
        out[b] = new[b, cols]
    return out


def _tracked_det(theta, phi, lams, labels):
    """det(criterion)/Vandermonde for a batch of lambdas, roots ordered to follow ``labels``.

    The quotient is analytic in lambda and independent of how the roots are
    numbered, as long as the numbering is continued consistently.
    """
    z = _match(labels, _batch_roots(phi, lams))
    inside = np.abs(z) < 1.0
    det = np.linalg.det(criterion_rows(theta, phi, z, inside))
    vdm = np.ones(len(lams), dtype=complex)
    for i in range(z.shape[1]):
        for j in range(i + 1, z.shape[1]):
            vdm *= z[:, j] - z[:, i]
    return det / vdm, z, inside


def _flip_distance(phi: LaurentSymbol, z: np.ndarray) -> np.ndarray:
    """First-order distance in lambda to the nearest change of root classification."""
    dphi = np.zeros_like(z)
    for l, c in enumerate(phi.analytic[1:], start=1):
        dphi += l * c * z ** (l - 1)
    for k, a in enumerate(phi.antianalytic, start=1):
        dphi -= k * a * z ** (-k - 1)
    return np.min(np.abs(np.abs(z) - 1.0) * np.abs(dphi), axis=-1)


def refine_batch(theta: InnerFunction, phi: LaurentSymbol, seeds, max_iter: int = 60,
                 tol: float = 1e-13, max_step: float | None = None, backtracks: int = 30):
    """Newton on the labelled determinant for many seeds at once.

    Each seed stays inside its own classification region: a step that would move
    a root across the circle is halved, and after ``backtracks`` halvings the
    seed is abandoned.  Returns (lambdas, errors) with errors[i] None on success.
    """
    lam = np.asarray(seeds, dtype=complex).ravel().copy()
    B = len(lam)
    errors: list = [None] * B
    if B == 0:
        return lam, errors
    z0 = _batch_roots(phi, lam)
    side = np.abs(z0) < 1.0
    bad = np.any(np.abs(np.abs(z0) - 1.0) < TAU_CIRC, axis=1)
    for b in np.flatnonzero(bad):
        errors[b] = f"seed {lam[b]} has a root on the circle"
    scale = np.maximum(1.0, np.abs(lam))
    d0, z0, _ = _tracked_det(theta, phi, lam, z0)
    active = ~bad
    done = np.zeros(B, dtype=bool)

    def fail(mask, msg):
        for b in np.flatnonzero(mask):
            errors[b] = msg.format(lam=lam[b], seed=seeds[b])
        active[mask] = False

    for _ in range(max_iter):
        hit = active & (d0 == 0)
        done |= hit
        active &= ~hit
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        h = np.minimum(1e-6 * scale[idx], 1e-2 * _flip_distance(phi, z0[idx]))
        small = h < 1e-14 * scale[idx]
        sel = np.zeros(B, dtype=bool)
        sel[idx[small]] = True
        fail(sel, "NoConvergence: seed drifted onto the circle-root curve near lambda={lam}")
        idx, h = idx[~small], h[~small]
        if idx.size == 0:
            continue
        dp, _, inp = _tracked_det(theta, phi, lam[idx] + h, z0[idx])
        dm, _, inm = _tracked_det(theta, phi, lam[idx] - h, z0[idx])
        deriv = (dp - dm) / (2 * h)
        flipped = np.any(inp != side[idx], axis=1) | np.any(inm != side[idx], axis=1)
        flat = (deriv == 0) | ~np.isfinite(deriv)
        sel = np.zeros(B, dtype=bool)
        sel[idx[flipped]] = True
        fail(sel, "NoConvergence: root classification flipped near lambda={lam}")
        sel = np.zeros(B, dtype=bool)
        sel[idx[flat & ~flipped]] = True
        fail(sel, "NoConvergence: flat determinant at lambda={lam}")
        keep = ~(flipped | flat)
        idx, step = idx[keep], d0[idx[keep]] / deriv[keep]
        if max_step is not None:
            big = np.abs(step) > max_step
            step[big] *= max_step / np.abs(step[big])
        pending = np.arange(idx.size)
        for _ in range(backtracks):
            if pending.size == 0:
                break
            ii = idx[pending]
            d1, z1, in1 = _tracked_det(theta, phi, lam[ii] - step[pending], z0[ii])
            ok = np.all(in1 == side[ii], axis=1) & np.isfinite(d1)
            acc = pending[ok]
            lam[idx[acc]] -= step[acc]
            d0[idx[acc]] = d1[ok]
            z0[idx[acc]] = z1[ok]
            pending = pending[~ok]
            step[pending] *= 0.5
        sel = np.zeros(B, dtype=bool)
        sel[idx[pending]] = True
        fail(sel, "NoConvergence: root classification flipped near lambda={lam}")
        conv = np.ones(idx.size, dtype=bool)
        conv[pending] = False
        conv &= np.abs(step) < tol * scale[idx]
        done[idx[conv]] = True
        active[idx[conv]] = False
    fail(active, "NoConvergence: Newton did not converge from seed {seed}")
    return lam, errors


def refine_eigenvalue(theta: InnerFunction, phi: LaurentSymbol, seed: complex,
                      max_iter: int = 60, tol: float = 1e-13, max_step: float | None = None,
                      backtracks: int = 30) -> complex:
    """Single-seed form of :func:`refine_batch`; raises NoConvergence on failure."""
    roots_of_Q(phi, seed)  # admissibility of the seed itself
    lam, errors = refine_batch(theta, phi, [complex(seed)], max_iter, tol, max_step, backtracks)
    if errors[0] is not None:
        raise NoConvergence(errors[0].split(": ", 1)[-1])
    return complex(lam[0])


def shell_seeds(theta: InnerFunction, phi: LaurentSymbol, region: tuple,
                offsets=(0.3, 0.1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5),
                samples: int = 512) -> list:
    """Seeds along the curves Phi(rho T), rho = 1 +- offset.

    Regions where every root sits close to the circle are thin slivers along
    Phi(T) that a uniform grid can step over; on these curves one root has
    modulus exactly rho, so their sigma_min minima land inside the slivers.
    """
    re_min, re_max, im_min, im_max = region
    t = 2 * np.pi * (np.arange(samples) + 0.37) / samples
    seeds = []
    for off in offsets:
        for rho in (1.0 - off, 1.0 + off):
            z = rho * np.exp(1j * t)
            lam = phi.analytic_part(z) + sum(a * z ** (-k) for k, a in enumerate(phi.antianalytic, start=1))
            sig, _ = sigma_grid(theta, phi, lam)
            filled = np.where(np.isnan(sig), np.inf, sig)
            left, right = np.roll(filled, 1), np.roll(filled, -1)
            keep = np.isfinite(filled) & (filled <= left) & (filled <= right)
            for l in lam[keep]:
                if re_min <= l.real <= re_max and im_min <= l.imag <= im_max:
                    seeds.append(complex(l))
    return seeds


def symbol_curve_cells(phi: LaurentSymbol, re: np.ndarray, im: np.ndarray, samples: int | None = None) -> list:
    """Grid nodes whose cell is crossed by Phi(T), where some root of Q sits on the circle."""
    if samples is None:
        samples = 64 * len(re) * (phi.M + phi.N)
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    lam = phi.analytic_part(z) + sum(a * z ** (-k) for k, a in enumerate(phi.antianalytic, start=1))
    dre, dim_ = re[1] - re[0], im[1] - im[0]
    j = np.rint((lam.real - re[0]) / dre).astype(int)
    i = np.rint((lam.imag - im[0]) / dim_).astype(int)
    ok = (i >= 0) & (i < len(im)) & (j >= 0) & (j < len(re))
    return sorted(set(zip(i[ok].tolist(), j[ok].tolist())))


def _local_minima(sig: np.ndarray) -> list:
    ny, nx = sig.shape
    padded = np.full((ny + 2, nx + 2), np.inf)
    filled = np.where(np.isnan(sig), np.inf, sig)
    padded[1:-1, 1:-1] = filled
    out = []
    for i in range(ny):
        for j in range(nx):
            v = filled[i, j]
            if not np.isfinite(v):
                continue
            block = padded[i: i + 3, j: j + 3]
            if v <= block.min():
                out.append((i, j))
    return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TTO_THREADS", "1")))
    except ValueError:
        return 1


def scan_eigenvalues(theta: InnerFunction, phi: LaurentSymbol, region: tuple, grid: int = 64,
                     K: int | None = None, tau_eig: float = TAU_EIG, tau_res: float | None = None,
                     dedupe_tol: float = 1e-8) -> ScanResult:
    """Locate eigenvalues in the rectangle ``region = (re_min, re_max, im_min, im_max)``."""
    re_min, re_max, im_min, im_max = region
    if not (re_max > re_min and im_max > im_min):
        raise PreconditionError("empty region")
    if grid < 16:
        raise PreconditionError("grid must be at least 16x16")
    if K is None:
        K = default_truncation(theta)
    if tau_res is None:
        tau_res = default_tau_res(theta)

    re = np.linspace(re_min, re_max, grid)
    im = np.linspace(im_min, im_max, grid)
    lam_grid = re[None, :] + 1j * im[:, None]
    sig, nin = sigma_grid(theta, phi, lam_grid)
    sig = sig.reshape(grid, grid)
    nin = nin.reshape(grid, grid)
    excluded = [complex(l) for l in lam_grid[np.isnan(sig)]]

    seeds = [complex(lam_grid[i, j]) for i, j in _local_minima(sig)]

    # cells whose corners disagree on the inside count straddle the curve Phi(T);
    # subdivide them once so that minima hugging the curve are not lost
    extra = []
    dre, dim_ = re[1] - re[0], im[1] - im[0]
    for i in range(grid - 1):
        for j in range(grid - 1):
            corners = nin[i: i + 2, j: j + 2]
            if corners.min() == corners.max():
                continue
            sub_re = re[j] + dre * np.linspace(0, 1, 5)[1:-1]
            sub_im = im[i] + dim_ * np.linspace(0, 1, 5)[1:-1]
            pts = (sub_re[None, :] + 1j * sub_im[:, None]).ravel()
            s_sub, _ = sigma_grid(theta, phi, pts)
            corner_vals = sig[i: i + 2, j: j + 2]
            finite = corner_vals[np.isfinite(corner_vals)]
            floor = finite.min() if finite.size else np.inf
            for p, v in zip(pts, s_sub):
                extra.append((complex(p), float(v)))
            if np.any(np.isfinite(s_sub)):
                k = int(np.nanargmin(s_sub))
                if s_sub[k] <= floor:
                    seeds.append(complex(pts[k]))
                for p, v in zip(pts, s_sub):
                    if not np.isfinite(v):
                        excluded.append(complex(p))

    if phi.M >= 1:
        seeds.extend(shell_seeds(theta, phi, region))
    seeds = sorted(set(seeds), key=lambda l: (l.real, l.imag))
    span = max(re_max - re_min, im_max - im_min)

    seed_arr = np.array(seeds, dtype=complex)
    chunks = [c for c in np.array_split(np.arange(len(seeds)), _workers()) if c.size]

    def work(ix):
        return refine_batch(theta, phi, seed_arr[ix], max_step=0.25 * span)

    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    refined = []
    for ix, (lams, errs) in zip(chunks, parts):
        for k, i in enumerate(ix):
            lam, err = complex(lams[k]), errs[k]
            if err is None and not (re_min - 1e-9 <= lam.real <= re_max + 1e-9
                                    and im_min - 1e-9 <= lam.imag <= im_max + 1e-9):
                lam, err = None, f"converged outside region to {lam}"
            refined.append((seeds[i], None if err else lam, err))

    failures = []
    pairs: list = []
    for seed, lam, err in refined:
        if lam is None:
            failures.append((seed, err))
            continue
        if any(abs(lam - p.lam) < dedupe_tol * max(1.0, abs(lam)) for p in pairs):
            continue
        try:
            sys = build_criterion(theta, phi, lam, tau_eig)
            if not sys.is_candidate:
                failures.append((seed, f"sigma_min/norm = {sys.relative_sigma:.3g} at {lam}"))
                continue
            pair = construct_eigenfunction(theta, phi, sys, K=K, tau_res=tau_res)
        except TTOError as exc:
            failures.append((seed, f"{type(exc).__name__}: {exc}"))
            continue
        pairs.append(pair)
    pairs.sort(key=lambda p: (p.lam.real, p.lam.imag))
    log.debug("scan: %d seeds, %d eigenpairs, %d failures", len(seeds), len(pairs), len(failures))
    cells = symbol_curve_cells(phi, re, im)
    return ScanResult(pairs, re, im, sig, excluded, failures, extra, cells)


# -- Observation fixtures ---------------------------------------------------


@dataclass
class ObservationResult:
    eigenvalue: complex
    residual_analytic: float
    residual_antianalytic: float


def verify_observation(theta: InnerFunction, phi_analytic, lam: complex, K: int = 1024) -> ObservationResult:
    """Check A_phi(theta/(z-lam)) = phi(lam) theta/(z-lam) and A_conj(phi) k_lam = conj(phi(lam)) k_lam."""
    lam = complex(lam)
    c = np.asarray(phi_analytic, dtype=complex)
    if abs(complex(theta._values(lam))) > 1e-10:
        raise PreconditionError(f"theta({lam}) != 0")
    value = complex(np.polyval(c[::-1], lam))
    L = fft_size(K, len(c), len(c))
    th = circle_samples(theta, L)
    zgrid = np.exp(2j * np.pi * np.arange(L) / L)

    g, _ = FourierSeries.from_samples(th / (zgrid - lam), K)
    ag = apply_band_tto(theta, (), tuple(c), g, L, th)
    r1 = (ag - g.scaled(value)).norm() / g.norm()

    kernel = FourierSeries(np.conj(lam) ** np.arange(K))
    anti = tuple(np.conj(c[1:]))
    ak = apply_band_tto(theta, anti, (np.conj(c[0]),), kernel, L, th)
    r2 = (ak - kernel.scaled(np.conj(value))).norm() / kernel.norm()
    return ObservationResult(value, float(r1), float(r2))
