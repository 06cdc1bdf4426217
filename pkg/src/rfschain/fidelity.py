"""Fidelity and susceptibility kernels.

Four routes to the reduced fidelity susceptibility of a two-site
subsystem, plus the global (full-state) susceptibility:

- uhlmann_fd: finite-difference the Uhlmann fidelity of the pair
  density matrices at param +/- delta/2.
- spectra: finite-difference the RDM eigenvalues and apply the
  commuting-family quadratic form sum (dlambda)^2 / (4 lambda).
- correlator: closed form in the sigma-z pair correlator,
  chi = 3 (dc)^2 / [4 (1+c)(1-3c)], valid for c in (-1, 1/3).
- energy: the same closed form rewritten through the ground-state
  energy per spin and its first two parameter derivatives.

All susceptibilities use the symmetric step chi = -2 ln F / delta^2
with F evaluated between param - delta/2 and param + delta/2, which
cancels the odd-order Taylor terms.

Density matrices here commute along the sweep (the pair RDM is a
fixed function of one scalar), so the Uhlmann kernel picks a
commuting fast path automatically; the full matrix-square-root
evaluation stays as the fallback so the kernel never silently
assumes commutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    BasisMismatch,
    DegenerateGroundState,
    DimensionMismatch,
    DomainViolation,
    NegativeEigenvalue,
    NonPositiveFidelity,
    NotPSD,
    SectorChange,
    StepTooSmall,
)

DELTA_DEFAULT = 1e-4
DELTA_FLOOR = 1e-6
PSD_NOISE = 1e-12   # eigenvalue noise floor clamped to zero
PSD_FAIL = 1e-10    # anything below -PSD_FAIL is a genuine PSD failure
COMMUTE_TOL = 1e-10

ROUTE_UHLMANN_FD = "uhlmann_fd"
ROUTE_SPECTRA = "spectra"
ROUTE_CORRELATOR = "correlator"
ROUTE_ENERGY = "energy"


@dataclass(frozen=True)
class SusceptibilityRecord:
    """One susceptibility evaluation tagged with its route."""

    chi12: float
    chi23: float
    route: str
    delta: float | None = None
    chi_global: float | None = None


def pure_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Overlap magnitude |<u|v>| of two normalized real state vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise BasisMismatch(f"state shapes differ: {u.shape} vs {v.shape}")
    return min(abs(float(u @ v)), 1.0)


def _as_matrix(obj) -> np.ndarray:
    mat = getattr(obj, "matrix", obj)
    return np.asarray(mat, dtype=np.float64)


def _psd_eigh(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with negative noise clamped to zero."""
    vals, vecs = np.linalg.eigh(mat)
    if vals[0] < -PSD_FAIL:
        raise NotPSD(f"eigenvalue {vals[0]:.3e} below -{PSD_FAIL:g}")
    return np.clip(vals, 0.0, None), vecs


def uhlmann_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)) of two density matrices.

    When the inputs commute (max commutator entry below 1e-10) the
    product rho sigma is symmetric PSD and the fidelity reduces to the
    sum of square roots of its eigenvalues; otherwise the full
    matrix-square-root route is taken. Eigenvalue noise down to the
    PSD floor is clamped.
    """
    r = _as_matrix(rho)
    s = _as_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"density matrix shapes differ: {r.shape} vs {s.shape}")
    rs = r @ s
    if np.max(np.abs(rs - rs.T)) < COMMUTE_TOL:
        prod = 0.5 * (rs + rs.T)
    else:
        vals, vecs = _psd_eigh(r)
        sqrt_r = (vecs * np.sqrt(vals)) @ vecs.T
        prod = sqrt_r @ s @ sqrt_r
        prod = 0.5 * (prod + prod.T)
    vals, _ = _psd_eigh(prod)
    return min(float(np.sum(np.sqrt(vals))), 1.0)


def susceptibility_fd(pair_fidelity: Callable[[float, float], float],
                      delta: float = DELTA_DEFAULT) -> float:
    """Finite-difference susceptibility -2 ln F / delta^2.

    `pair_fidelity` receives the two symmetric offsets (-delta/2,
    +delta/2) relative to the working point and returns the fidelity
    between the states there.
    """
    if delta < DELTA_FLOOR:
        raise StepTooSmall(f"fidelity step {delta:g} below floor {DELTA_FLOOR:g}")
    f = float(pair_fidelity(-0.5 * delta, 0.5 * delta))
    if f <= 0.0:
        raise NonPositiveFidelity(f"fidelity {f!r} is not positive")
    return -2.0 * math.log(min(f, 1.0)) / (delta * delta)


def rfs_commuting_spectra(lam: np.ndarray, dlam: np.ndarray) -> float:
    """Susceptibility sum (dlambda)^2 / (4 lambda) for commuting families.

    Eigenvalues below the 1e-12 floor are dropped together with their
    derivatives; they carry no weight and no contribution.
    """
    lam = np.asarray(lam, dtype=np.float64)
    dlam = np.asarray(dlam, dtype=np.float64)
    if lam.shape != dlam.shape:
        raise DimensionMismatch(f"spectrum shapes differ: {lam.shape} vs {dlam.shape}")
    if abs(float(np.sum(lam)) - 1.0) > 1e-10:
        raise DomainViolation(f"spectrum sums to {np.sum(lam)!r}, not 1")
    if np.min(lam) < -1e-12:
        raise NegativeEigenvalue(f"spectrum entry {np.min(lam):.3e} is negative")
    keep = lam >= 1e-12
    if not np.any(keep):
        return 0.0
    return float(np.sum(dlam[keep] ** 2 / (4.0 * lam[keep])))


def rfs_correlator(c: float, dc: float) -> float:
    """Closed-form pair susceptibility 3 (dc)^2 / [4 (1+c)(1-3c)].

    The correlator must sit strictly inside (-1, 1/3); both endpoints
    are poles and outside them the form goes negative.
    """
    margin = 1e-9
    if not (-1.0 + margin < c < 1.0 / 3.0 - margin):
        raise DomainViolation(f"correlator {c!r} outside (-1, 1/3)")
    return 3.0 * dc * dc / (4.0 * (1.0 + c) * (1.0 - 3.0 * c))


def rfs_energy_dimer(e0: float, de0: float, d2e0: float,
                     alpha: float) -> tuple[float, float]:
    """Energy-route susceptibilities for the dimerized spin-1/2 chain.

    chi12 = 16 a^2 (d2e0)^2 / [(3+8e0-8a de0)(1-8e0+8a de0)]
    chi23 = 16 (d2e0)^2 / [(3+8de0)(1-8de0)]
    """
    den12a = 3.0 + 8.0 * e0 - 8.0 * alpha * de0
    den12b = 1.0 - 8.0 * e0 + 8.0 * alpha * de0
    den23a = 3.0 + 8.0 * de0
    den23b = 1.0 - 8.0 * de0
    for name, den in (("chi12", den12a), ("chi12", den12b),
                      ("chi23", den23a), ("chi23", den23b)):
        if den <= 0.0:
            raise DomainViolation(f"{name} denominator factor {den!r} is not positive")
    num = 16.0 * d2e0 * d2e0
    return alpha * alpha * num / (den12a * den12b), num / (den23a * den23b)


def rfs_mixed(x: float, dx: float, s: float) -> float:
    """Pair susceptibility (dx)^2 / [(S-2x)(S+1+2x)] for a (1/2, S) pair.

    x is the scalar correlator <S_i . S_j>; the denominators are the
    multiplet weights up to normalization and must stay positive.
    """
    den_a = s - 2.0 * x
    den_b = s + 1.0 + 2.0 * x
    if den_a <= 0.0 or den_b <= 0.0:
        raise DomainViolation(
            f"correlator x={x!r} leaves ({den_a!r}, {den_b!r}) non-positive")
    return dx * dx / (den_a * den_b)


def rfs_energy_mixed(e0: float, de0: float, d2e0: float, alpha: float,
                     s: float) -> tuple[float, float]:
    """Energy-route susceptibilities for the mixed (1/2, S) chain.

    chi12 = 4 a^2 (d2e0)^2 / [(S-4e0+4a de0)(S+1+4e0-4a de0)]
    chi23 = 4 (d2e0)^2 / [(S-4de0)(S+1+4de0)]

    At S = 1/2 this delegates to rfs_energy_dimer so the two forms
    agree bit for bit on shared inputs.
    """
    if s == 0.5:
        return rfs_energy_dimer(e0, de0, d2e0, alpha)
    den12a = s - 4.0 * e0 + 4.0 * alpha * de0
    den12b = s + 1.0 + 4.0 * e0 - 4.0 * alpha * de0
    den23a = s - 4.0 * de0
    den23b = s + 1.0 + 4.0 * de0
    for name, den in (("chi12", den12a), ("chi12", den12b),
                      ("chi23", den23a), ("chi23", den23b)):
        if den <= 0.0:
            raise DomainViolation(f"{name} denominator factor {den!r} is not positive")
    num = 4.0 * d2e0 * d2e0
    return alpha * alpha * num / (den12a * den12b), num / (den23a * den23b)


def global_susceptibility(spec, param: float, delta: float = DELTA_DEFAULT,
                          solver: str = "lanczos", seed: int = 0) -> float:
    """Full-state fidelity susceptibility at `param` from two sector solves.

    Solves the ground state at param +/- delta/2 in the model's ground
    sector and feeds the overlap into the finite-difference kernel. A
    near-zero sector gap means the overlap is ill-defined
    (DegenerateGroundState); an overlap collapsing far below 1 within
    the tiny delta window signals a level crossing into a different
    multiplet (SectorChange).
    """
    from .eig import solve_ground
    from .models import combine_parts, hamiltonian_parts, sector_basis

    if delta < DELTA_FLOOR:
        raise StepTooSmall(f"fidelity step {delta:g} below floor {DELTA_FLOOR:g}")
    basis = sector_basis(spec)
    parts = hamiltonian_parts(spec, basis)
    vectors = []
    for offset in (-0.5 * delta, 0.5 * delta):
        op = combine_parts(spec, basis, parts, param + offset)
        result = solve_ground(op, solver, seed=seed)
        if result.degenerate:
            raise DegenerateGroundState(
                f"sector gap {result.gap:.3e} at param {param + offset!r}")
        vectors.append(result.vector)
    fid = pure_fidelity(vectors[0], vectors[1])
    if fid < 0.5:
        raise SectorChange(
            f"ground-state overlap {fid:.3f} across delta={delta:g} window at param {param!r}")
    return susceptibility_fd(lambda lo, hi: fid, delta)
