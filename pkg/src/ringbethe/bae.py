"""Bethe equations for the odd sector and a scan-and-polish root finder.

The two residuals are entire functions of (k1, k2). Their common real zeros
with ``0 < k1 < k2`` label the eigenstates. The root set is invariant under
k1 <-> k2, so both triangles of the scan square are searched and every root
is folded back into the ordered wedge.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ringbethe.core import RapidityPair, ScatteringLengths, SystemParams, scattering_lengths

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchWindow:
    k_max: float
    grid_n: int = 800
    newton_tol: float = 1e-12
    dedup_tol: float = 1e-6

    def __post_init__(self):
        if not self.k_max > 0:
            raise ValueError("k_max must be positive")
        if self.grid_n < 16:
            raise ValueError("grid_n must be at least 16")
        if not (self.newton_tol > 0 and self.dedup_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class ScanResult:
    """Roots plus the candidates that were dropped, with the reason."""

    roots: list[RapidityPair]
    dropped: list[dict] = field(default_factory=list)
    seeds: int = 0


def residual_bae1(k1, k2, lens: ScatteringLengths, L: float = 1.0):
    a, ab = lens.a, lens.a_b
    c1, s1 = np.cos(k1 * L / 2), np.sin(k1 * L / 2)
    c2, s2 = np.cos(k2 * L / 2), np.sin(k2 * L / 2)
    return (
        c1 * ((k2**2 * a * ab - 2) * s2 + k2 * (a + 2 * ab) * c2)
        + k1 * a * s1 * (k2 * ab * c2 - s2)
    )


def residual_bae2(k1, k2, lens: ScatteringLengths, L: float = 1.0):
    """Left-hand side minus right-hand side; vanishes identically on k1 = k2."""
    a = lens.a
    c1, s1 = np.cos(k1 * L / 2), np.sin(k1 * L / 2)
    c2, s2 = np.cos(k2 * L / 2), np.sin(k2 * L / 2)
    lhs = k1**2 * a * s1 * s2 + 2 * k1 * s2 * c1
    rhs = k2**2 * a * s1 * s2 + 2 * k2 * s1 * c2
    return lhs - rhs


def residuals(k, lens: ScatteringLengths, L: float = 1.0) -> np.ndarray:
    """Stack both residuals for points ``k[..., 2]``."""
    k = np.asarray(k, dtype=float)
    return np.stack(
        [residual_bae1(k[..., 0], k[..., 1], lens, L), residual_bae2(k[..., 0], k[..., 1], lens, L)],
        axis=-1,
    )


def _jacobian(k, lens, L):
    # central differences, h = 1e-6 max(1, |k|)
    k = np.atleast_2d(k)
    J = np.empty(k.shape[:-1] + (2, 2))
    for j in range(2):
        h = 1e-6 * np.maximum(1.0, np.abs(k[:, j]))
        kp, km = k.copy(), k.copy()
        kp[:, j] += h
        km[:, j] -= h
        J[:, :, j] = (residuals(kp, lens, L) - residuals(km, lens, L)) / (2 * h)[:, None]
    return J


def newton_polish(k0, lens: ScatteringLengths, L: float = 1.0, tol: float = 1e-12,
                  max_iter: int = 60, max_step: float | None = None):
    """Damped 2D Newton on a batch of starting points.

    Parameters
    ----------
    k0 : array_like, shape (n, 2)
    max_step : float, optional
        Cap on the Newton step length; defaults to ``2 pi / L``.

    Returns
    -------
    k : ndarray, shape (n, 2)
    converged : ndarray of bool
    """
    k = np.array(np.atleast_2d(k0), dtype=float)
    n = len(k)
    if max_step is None:
        max_step = 2 * np.pi / L
    f = residuals(k, lens, L)
    fn = np.abs(f).max(axis=1)
    active = np.ones(n, dtype=bool)
    stalled = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        active &= ~(fn < tol) & ~stalled
        if not active.any():
            break
        idx = np.flatnonzero(active)
        J = _jacobian(k[idx], lens, L)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.abs(det) > 1e-300
        step = np.zeros((len(idx), 2))
        fi = f[idx]
        step[ok, 0] = -(J[ok, 1, 1] * fi[ok, 0] - J[ok, 0, 1] * fi[ok, 1]) / det[ok]
        step[ok, 1] = -(-J[ok, 1, 0] * fi[ok, 0] + J[ok, 0, 0] * fi[ok, 1]) / det[ok]
        norm = np.hypot(step[:, 0], step[:, 1])
        step *= np.minimum(1.0, max_step / np.maximum(norm, 1e-300))[:, None]
        # backtracking on the max-norm of the residual
        lam = np.ones(len(idx))
        best_k = k[idx].copy()
        best_f = fi.copy()
        best_n = fn[idx].copy()
        pending = ok.copy()
        for _ in range(30):
            if not pending.any():
                break
            trial = k[idx] + lam[:, None] * step
            ft = residuals(trial, lens, L)
            nt = np.abs(ft).max(axis=1)
            accept = pending & (nt < best_n)
            best_k[accept] = trial[accept]
            best_f[accept] = ft[accept]
            best_n[accept] = nt[accept]
            pending &= ~accept
            lam[pending] *= 0.5
        moved = np.abs(best_k - k[idx]).max(axis=1)
        stalled[idx] = (~ok) | pending | (moved <= 4e-16 * np.abs(k[idx]).max(axis=1))
        k[idx], f[idx], fn[idx] = best_k, best_f, best_n
    return k, fn < tol


def spurious_filter(pair: RapidityPair, params: SystemParams) -> bool:
    """True when the closed-form state built from ``pair`` is not identically zero."""
    from ringbethe.wavefunction import EigenstateEvaluator, raw_norm_ratio

    ev = EigenstateEvaluator.from_pair(pair, params)
    return raw_norm_ratio(ev) > SPURIOUS_NORM_RATIO


SPURIOUS_NORM_RATIO = 1e-8


def residual_fields(params: SystemParams, window: SearchWindow):
    """Sample both residuals on the scan lattice (also used for contour output)."""
    lens = scattering_lengths(params)
    L = params.ring_length
    k = np.linspace(0.0, window.k_max, window.grid_n + 1)[1:]
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    return k, residual_bae1(K1, K2, lens, L), residual_bae2(K1, K2, lens, L)


def _sign_change(F):
    lo = np.minimum(np.minimum(F[:-1, :-1], F[1:, :-1]), np.minimum(F[:-1, 1:], F[1:, 1:]))
    hi = np.maximum(np.maximum(F[:-1, :-1], F[1:, :-1]), np.maximum(F[:-1, 1:], F[1:, 1:]))
    return (lo <= 0) & (hi >= 0)


def scan_roots(params: SystemParams, window: SearchWindow, allow_attractive: bool = False,
               return_diagnostics: bool = False):
    """Find every real root with ``0 < k1 < k2 <= k_max``.

    Cells of the scan lattice where both residuals change sign are polished
    by damped Newton from the cell centre. Converged points are folded into
    the ordered wedge, deduplicated, screened for identically-zero states
    and sorted by (energy, k1).
    """
    params.require_repulsive(allow_attractive)
    lens = scattering_lengths(params)
    L = params.ring_length
    k, R1, R2 = residual_fields(params, window)
    cells = _sign_change(R1) & _sign_change(R2)
    i, j = np.nonzero(cells)
    dk = k[1] - k[0]
    # skip cells that straddle the diagonal, where residual_2 vanishes identically
    off_diag = np.abs(i - j) >= 1
    i, j = i[off_diag], j[off_diag]
    seeds = np.column_stack([k[i] + dk / 2, k[j] + dk / 2])
    result = ScanResult(roots=[], seeds=len(seeds))
    if len(seeds) == 0:
        warnings.warn("no sign-change cells found; increase k_max or grid_n", stacklevel=2)
        return result if return_diagnostics else result.roots

    kk, conv = newton_polish(seeds, lens, L, tol=window.newton_tol, max_step=4 * dk)
    for seed in seeds[~conv]:
        result.dropped.append({"seed": seed.tolist(), "reason": "newton did not converge"})
    # fold into 0 < k1 < k2 and polish again there
    folded = np.sort(np.abs(kk[conv]), axis=1)
    folded, conv2 = newton_polish(folded, lens, L, tol=window.newton_tol, max_step=dk)
    folded = np.sort(np.abs(folded), axis=1)
    found: list[np.ndarray] = []
    for cand, ok in zip(folded, conv2):
        if not ok:
            result.dropped.append({"seed": cand.tolist(), "reason": "no convergence after folding"})
            continue
        k1, k2 = cand
        if k2 - k1 < window.dedup_tol or k1 < window.dedup_tol or k2 > window.k_max:
            continue
        if any(np.abs(cand - f).max() < window.dedup_tol for f in found):
            continue
        found.append(cand)

    roots = []
    for k1, k2 in found:
        r = residuals(np.array([k1, k2]), lens, L)
        pair = RapidityPair.from_rapidities(k1, k2, r[0], r[1])
        if not spurious_filter(pair, params):
            result.dropped.append({"seed": [k1, k2], "reason": "identically zero state"})
            continue
        roots.append(pair)
    roots.sort(key=lambda p: (p.energy, p.k1))
    result.roots = roots
    for d in result.dropped:
        log.debug("dropped candidate %s: %s", d["seed"], d["reason"])
    if not roots:
        warnings.warn("scan found no roots in the window", stacklevel=2)
    return result if return_diagnostics else roots
