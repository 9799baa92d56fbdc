"""Hard-core limit, barrier orbitals and the 1/xi expansion of the energy.

Two bosons with infinite contact repulsion map onto two free fermions. For an
even number of particles on a ring the fermionic orbitals obey
*anti-periodic* boundary conditions, phi(x + L) = -phi(x); with the barrier
at x = 0 they split into

* odd orbitals  sin(kappa x),            kappa L = (2n - 1) pi   (barrier-blind)
* even orbitals sin(kappa (L/2 - |x|)),  tan(kappa L / 2) = -kappa L / xi_b

The odd sector is built from pairs of orbitals with equal parity. The
closed-form expansion coefficients below reproduce the exact Bethe energies
for pairs of *even* orbitals; for the barrier-blind odd pairs (which include
the ground state) they do not apply.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ringbethe.bae import SearchWindow, newton_polish, residuals, scan_roots
from ringbethe.core import RapidityPair, SystemParams, scattering_lengths

UNTRUSTED_BARRIER = 0.1
MIN_EXPANSION_XI = 10.0


@dataclass(frozen=True)
class OrbitalSpectrum:
    kappas: np.ndarray
    parities: tuple
    boundary: str = "antiperiodic"
    bound_kappa: float | None = None

    def branch(self, parity: str) -> np.ndarray:
        return np.array([k for k, p in zip(self.kappas, self.parities) if p == parity])


def _even_antiperiodic(xi_b, n, L):
    # xi_b sin(kL/2) + kL cos(kL/2) = 0
    f = lambda k: xi_b * math.sin(k * L / 2) + k * L * math.cos(k * L / 2)  # noqa: E731
    if xi_b == 0:
        return (2 * n - 1) * math.pi / L
    if xi_b > 0:
        lo, hi = (2 * n - 1) * math.pi / L, 2 * n * math.pi / L
    else:
        if n == 1:
            if xi_b <= -2:
                return None
            lo, hi = 0.0, math.pi / L
        else:
            lo, hi = (2 * n - 2) * math.pi / L, (2 * n - 1) * math.pi / L
    eps = 1e-14 * hi
    if lo == 0.0:
        # f(k) ~ (1 + xi_b/2) k L near zero
        lo = 1e-9 / L
    return brentq(f, lo + eps, hi - eps, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _even_periodic(xi_b, n, L):
    # kL sin(kL/2) - xi_b cos(kL/2) = 0, roots in (2n pi, (2n + 1) pi) / L
    if xi_b == 0:
        return 2 * n * math.pi / L
    f = lambda k: k * L * math.sin(k * L / 2) - xi_b * math.cos(k * L / 2)  # noqa: E731
    lo, hi = 2 * n * math.pi / L, (2 * n + 1) * math.pi / L
    eps = 1e-14 * hi
    return brentq(f, lo + eps, hi - eps, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def orbital_wavenumbers(xi_b: float, count: int, L: float = 1.0,
                        boundary: str = "antiperiodic") -> OrbitalSpectrum:
    """Lowest ``count`` nonzero one-body wavenumbers with the barrier.

    Parameters
    ----------
    xi_b : float
        Barrier strength g_B L.
    count : int
        Number of orbitals returned, merged from both parity branches.
    boundary : {"antiperiodic", "periodic"}
        Anti-periodic orbitals are the ones that build the hard-core two-boson
        states. Periodic ones solve the plain one-body ring problem and are
        kept for comparison.

    Notes
    -----
    For ``xi_b < -2`` (anti-periodic) the lowest even orbital is bound; its
    decay constant q, with ``tanh(qL/2) = -qL/xi_b``, goes to ``bound_kappa``
    and the orbital is left out of ``kappas``.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    if boundary not in ("antiperiodic", "periodic"):
        raise ValueError(f"unknown boundary {boundary!r}")
    if boundary == "periodic" and xi_b < 0:
        raise ValueError("periodic orbitals are only provided for xi_b >= 0")
    entries = []
    bound = None
    for n in range(1, count + 2):
        if boundary == "antiperiodic":
            entries.append(((2 * n - 1) * math.pi / L, "odd"))
            k = _even_antiperiodic(xi_b, n, L)
            if k is None:
                f = lambda q: math.tanh(q * L / 2) + q * L / xi_b  # noqa: E731
                bound = brentq(f, 1e-12 / L, 2 * abs(xi_b) / L + 1.0, xtol=1e-15)
            else:
                entries.append((k, "even"))
        else:
            entries.append((2 * n * math.pi / L, "odd"))
            k = _even_periodic(xi_b, n - 1, L)
            if k > 0:
                entries.append((k, "even"))
    entries.sort(key=lambda e: (e[0], e[1]))
    entries = entries[:count]
    return OrbitalSpectrum(
        kappas=np.array([e[0] for e in entries]),
        parities=tuple(e[1] for e in entries),
        boundary=boundary,
        bound_kappa=bound,
    )


def tonks_levels(xi_b: float, count: int, L: float = 1.0) -> list[dict]:
    """Hard-core odd-sector energies from pairs of equal-parity orbitals, ascending."""
    orb = orbital_wavenumbers(xi_b, count, L)
    out = []
    for i, j in itertools.combinations(range(len(orb.kappas)), 2):
        if orb.parities[i] != orb.parities[j]:
            continue
        k1, k2 = orb.kappas[i], orb.kappas[j]
        out.append({
            "energy": 0.5 * (k1**2 + k2**2),
            "kappa1": float(k1),
            "kappa2": float(k2),
            "parity": orb.parities[i],
        })
    out.sort(key=lambda r: r["energy"])
    return out


@dataclass(frozen=True)
class ExpansionParams:
    eta1: float
    eta2: float
    xi: float
    xi_b: float

    def __post_init__(self):
        if self.eta1 == self.eta2:
            raise ValueError("the two orbitals must be distinct")

    @property
    def g_tilde(self) -> float:
        """Strength -hbar^4/(mu^2 g) of the odd-wave contact term, in L = 1 units."""
        return -4.0 / self.xi


@dataclass
class ExpansionResult:
    energy: float
    orders: tuple
    per_orbital: dict = field(default_factory=dict)


def _eps_terms(e1, e2, xi_b):
    """Coefficients of xi^0, xi^-1, xi^-2 in eps(e1, e2)."""
    den = e1**2 + xi_b * (2 + xi_b)
    t0 = 0.5 * e1**2
    t1 = -2 * e1**2 * (e1**2 + xi_b**2) / den
    num = (
        2 * e1**2 * (e1**2 + xi_b**2)
        * (
            e1**4 * (e2**2 + 3 * xi_b)
            + xi_b**2 * (2 + xi_b) * (3 * xi_b**2 + e2**2 * (2 + xi_b))
            + 2 * e1**2 * xi_b * (e2**2 * (2 + xi_b) + xi_b * (5 + 3 * xi_b))
        )
    )
    t2 = num / (xi_b * den**3)
    return t0, t1, t2


def expansion_coefficients(eta1: float, eta2: float, xi_b: float, L: float = 1.0):
    """Return (c0, c1, c2) with E ~ c0 + c1/xi + c2/xi^2."""
    if xi_b == 0:
        raise ValueError("expansion singular at zero barrier")
    a = _eps_terms(eta1, eta2, xi_b)
    b = _eps_terms(eta2, eta1, xi_b)
    return tuple((x + y) / L**2 for x, y in zip(a, b))


def expansion_energy(ep: ExpansionParams, L: float = 1.0) -> ExpansionResult:
    """Energy through second order in 1/xi for the orbital pair (eta1, eta2)."""
    if ep.xi_b == 0:
        raise ValueError("expansion singular at zero barrier")
    if ep.xi < MIN_EXPANSION_XI:
        warnings.warn(f"xi = {ep.xi} is small for a 1/xi expansion", stacklevel=2)
    if abs(ep.xi_b) < UNTRUSTED_BARRIER:
        warnings.warn(f"|xi_b| = {abs(ep.xi_b)} < {UNTRUSTED_BARRIER}: second order untrusted",
                      stacklevel=2)
    per = {}
    for name, (e1, e2) in (("eta1", (ep.eta1, ep.eta2)), ("eta2", (ep.eta2, ep.eta1))):
        t0, t1, t2 = _eps_terms(e1, e2, ep.xi_b)
        per[name] = (t0 / L**2, t1 / (ep.xi * L**2), t2 / (ep.xi**2 * L**2))
    orders = tuple(per["eta1"][i] + per["eta2"][i] for i in range(3))
    return ExpansionResult(energy=sum(orders), orders=orders, per_orbital=per)


# --- exact-energy continuation and coefficient fits -------------------------

def _root_at(params: SystemParams, guess, tol=1e-12):
    lens = scattering_lengths(params)
    L = params.ring_length
    k, ok = newton_polish(np.atleast_2d(guess), lens, L, tol=tol, max_step=0.5 / L)
    k = np.sort(np.abs(k[0]))
    return k, bool(ok[0])


def track_branch(params_base: SystemParams, start: RapidityPair, xi_targets,
                 spacing: float, du_max: float = 2e-4, tol: float = 1e-11) -> list[RapidityPair]:
    """Continue a root from ``params_base.xi`` to each target in 1/xi.

    Steps are halved when Newton fails or the energy departs from the
    secant prediction by more than half the level spacing.
    """
    L = params_base.ring_length
    xb = params_base.xi_b
    targets = sorted(set(float(x) for x in xi_targets), key=lambda x: abs(1 / x - 1 / params_base.xi))
    u = 1.0 / params_base.xi
    k = np.array([start.k1, start.k2])
    hist = [(u, k.copy())]
    out = {}
    for target in targets:
        ut = 1.0 / target
        while abs(ut - u) > 0:
            du = np.clip(ut - u, -du_max, du_max)
            while True:
                un = u + du
                if abs(ut - un) < 1e-15 * ut:
                    un = ut
                if len(hist) >= 2 and hist[-1][0] != hist[-2][0]:
                    (u0, k0), (u1, k1) = hist[-2], hist[-1]
                    guess = k1 + (k1 - k0) * (un - u1) / (u1 - u0)
                else:
                    guess = k
                kn, ok = _root_at(SystemParams(1.0 / un, xb, L), guess, tol)
                e_pred = 0.5 * guess @ guess
                if ok and abs(0.5 * kn @ kn - e_pred) <= 0.5 * spacing and kn[1] - kn[0] > 1e-9:
                    break
                du *= 0.5
                if abs(du) < 1e-14:
                    raise RuntimeError(f"branch discontinuity near xi = {1 / u:.6g}")
            u, k = un, kn
            hist.append((u, k.copy()))
        r = residuals(k, scattering_lengths(SystemParams(target, xb, L)), L)
        out[target] = RapidityPair.from_rapidities(k[0], k[1], r[0], r[1])
    return [out[float(x)] for x in xi_targets]


def match_orbital_pair(pair: RapidityPair, xi_b: float, L: float = 1.0) -> dict:
    """Equal-parity orbital pair closest to the rapidities of a strongly coupled root."""
    count = int(pair.k2 * L / math.pi) + 4
    orb = orbital_wavenumbers(xi_b, count, L)
    best = None
    for i, j in itertools.combinations(range(len(orb.kappas)), 2):
        if orb.parities[i] != orb.parities[j]:
            continue
        d = abs(pair.k1 - orb.kappas[i]) + abs(pair.k2 - orb.kappas[j])
        if best is None or d < best[0]:
            best = (d, orb.kappas[i], orb.kappas[j], orb.parities[i])
    _, k1, k2, parity = best
    return {"eta1": float(k1 * L), "eta2": float(k2 * L), "parity": parity,
            "tonks_energy": float(0.5 * (k1**2 + k2**2))}


@dataclass
class CoefficientFit:
    c0: float
    c1: float
    c2: float
    higher: list
    residual: float
    xi: list
    energies: list
    pairs: list
    orbitals: dict
    closed_form: tuple | None

    def to_dict(self) -> dict:
        return {
            "c0": self.c0, "c1": self.c1, "c2": self.c2,
            "higher": list(self.higher), "residual": self.residual,
            "xi": list(self.xi), "energies": list(self.energies),
            "pairs": [[p.k1, p.k2] for p in self.pairs],
            "orbitals": self.orbitals,
            "closed_form": list(self.closed_form) if self.closed_form is not None else None,
        }


def fit_coefficients(params_base: SystemParams, xi_samples, branch: int = 0,
                     start: RapidityPair | None = None, extra_orders: int = 1,
                     window: SearchWindow | None = None) -> CoefficientFit:
    """Least-squares fit of E(xi) = c0 + c1/xi + c2/xi^2 (+ nuisance terms).

    The root is taken at the largest sample (energy rank ``branch``, or the
    given ``start``) and continued adiabatically to the other samples.
    ``extra_orders`` adds 1/xi^3, ... columns that absorb the truncation
    remainder; they are returned in ``higher`` but carry no claim.
    """
    xs = np.array(sorted(float(x) for x in xi_samples))
    if len(xs) < 4:
        raise ValueError("need at least four samples")
    if xs.min() < 100:
        raise ValueError("all samples must have xi >= 100")
    L = params_base.ring_length
    xb = params_base.xi_b
    top = SystemParams(xs.max(), xb, L)
    window = window or SearchWindow(k_max=12 * math.pi / L, grid_n=600)
    roots = scan_roots(top, window)
    if start is None:
        if branch >= len(roots):
            raise ValueError(f"branch {branch} not in the scan window ({len(roots)} roots)")
        start = roots[branch]
    energies_top = np.array([r.energy for r in roots])
    others = np.abs(energies_top - start.energy)
    others = others[others > 1e-9 * start.energy]
    spacing = float(others.min()) if len(others) else start.energy

    pairs = track_branch(top, start, xs, spacing)
    E = np.array([p.energy for p in pairs])
    n_par = min(3 + extra_orders, len(xs))
    ref = xs.min()
    A = np.column_stack([(ref / xs) ** p for p in range(n_par)])
    sol, *_ = np.linalg.lstsq(A, E, rcond=None)
    coef = sol * ref ** np.arange(n_par)
    fitted = A @ sol
    orbitals = match_orbital_pair(start, xb, L)
    try:
        closed_form = expansion_coefficients(orbitals["eta1"], orbitals["eta2"], xb, L)
    except ValueError:
        closed_form = None
    return CoefficientFit(
        c0=float(coef[0]), c1=float(coef[1]), c2=float(coef[2]),
        higher=[float(c) for c in coef[3:]],
        residual=float(np.sqrt(np.mean((fitted - E) ** 2))),
        xi=[float(x) for x in xs], energies=[float(e) for e in E],
        pairs=pairs, orbitals=orbitals, closed_form=closed_form,
    )
