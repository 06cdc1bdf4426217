"""Eigensolvers and energy derivatives.

The Lanczos solver keeps the full Krylov block and reorthogonalizes
every new direction against all of it. That costs memory and flops but
removes ghost eigenvalues entirely at the sector sizes this package
targets, and with a seeded start vector the whole iteration is
bit-reproducible. On breakdown (an exactly invariant subspace before
convergence) it restarts once from a reseeded vector; a second
breakdown is accepted as an exact invariant subspace.

Dense solves are the oracle path: full spectra for small sectors,
capped by dimension so a typo in a sweep cannot silently schedule a
multi-gigabyte diagonalization.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace

import numpy as np
import scipy.linalg as sla

from .errors import (DegenerateGroundState, DimensionCap, DimensionTooSmall,
                     NoConvergence, StepTooSmall)
from .models import LinearOperator, ModelSpec, combine_parts, hamiltonian_parts, sector_basis

DEGENERACY_TOL = 1e-10
FD_STEP_FLOOR = 1e-7
DENSE_CAP = 4096


@dataclass
class GroundStateResult:
    """Lowest eigenpair of a sector operator plus solver metadata."""

    energy: float
    energy_per_spin: float
    vector: np.ndarray
    sector: float
    gap: float
    iterations: int
    residual: float

    @property
    def degenerate(self) -> bool:
        return self.gap < DEGENERACY_TOL


@dataclass
class SpectrumResult:
    """Full sector spectrum, eigenvalues ascending, eigenvectors in columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sector: float


def _fix_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def lanczos_ground(op: LinearOperator, k: int = 2, tol: float = 1e-12,
                   seed: int = 0, max_iter: int = 500) -> GroundStateResult:
    """Lowest eigenpair by fully reorthogonalized Lanczos.

    `k` >= 2 Ritz values are tracked so the result carries a gap
    estimate. Converged means the residual of the lowest Ritz pair is
    at or below `tol` (absolute).
    """
    n = op.dim
    if n < k:
        raise DimensionTooSmall(f"sector dimension {n} < {k} requested Ritz pairs")

    def iterate(start_seed: int):
        rng = np.random.default_rng(start_seed)
        limit = min(max_iter, n)
        block = np.empty((limit, n))
        q = rng.standard_normal(n)
        q /= np.linalg.norm(q)
        block[0] = q
        alphas: list[float] = []
        betas: list[float] = []
        m = 0
        while m < limit:
            w = op.apply(block[m])
            alphas.append(float(block[m] @ w))
            # Full reorthogonalization, two passes of classical Gram-Schmidt.
            live = block[:m + 1]
            for _ in range(2):
                w -= live.T @ (live @ w)
            beta = float(np.linalg.norm(w))
            m += 1
            theta, y = _tridiag_eig(alphas, betas)
            residual = beta * abs(y[-1, 0])
            scale = max(1.0, float(np.max(np.abs(theta))))
            if (residual <= tol and m >= min(k, n)) or m == n:
                return True, alphas, betas, block, m, theta, y
            if beta <= 1e-13 * scale:
                return False, alphas, betas, block, m, theta, y
            betas.append(beta)
            block[m] = w / beta
        raise NoConvergence(f"no convergence within {max_iter} Lanczos iterations")

    done, alphas, betas, block, m, theta, y = iterate(seed)
    if not done:
        # Breakdown before convergence: restart once from a fresh seed.
        done, alphas, betas, block, m, theta, y = iterate(seed + 1)
    # A second breakdown means the Krylov space is exactly invariant.

    vec = _fix_sign(block[:m].T @ y[:, 0])
    vec /= np.linalg.norm(vec)
    energy = float(theta[0])
    true_res = float(np.linalg.norm(op.apply(vec) - energy * vec))
    gap = float(theta[1] - theta[0]) if len(theta) > 1 else 0.0
    nspins = op.basis.site_spec.n
    return GroundStateResult(energy, energy / nspins, vec, op.basis.total_sz,
                             gap, m, true_res)


def _tridiag_eig(alphas, betas):
    if len(alphas) == 1:
        return np.array(alphas), np.ones((1, 1))
    return sla.eigh_tridiagonal(np.asarray(alphas), np.asarray(betas))


def dense_spectrum(op: LinearOperator, cap: int = DENSE_CAP) -> SpectrumResult:
    """Full spectrum of a sector operator (refused above `cap`)."""
    if op.dim > cap:
        raise DimensionCap(f"sector dimension {op.dim} exceeds dense cap {cap}")
    h = op.matrix.toarray()
    vals, vecs = np.linalg.eigh(h)
    return SpectrumResult(vals, vecs, op.basis.total_sz)


def dense_ground(op: LinearOperator, cap: int = DENSE_CAP) -> GroundStateResult:
    """Lowest eigenpair via a direct dense solve (exact small-sector path)."""
    if op.dim > cap:
        raise DimensionCap(f"sector dimension {op.dim} exceeds dense cap {cap}")
    h = op.matrix.toarray()
    if op.dim == 1:
        e = float(h[0, 0])
        basis_n = op.basis.site_spec.n
        return GroundStateResult(e, e / basis_n, np.ones(1), op.basis.total_sz, 0.0, 0, 0.0)
    vals, vecs = sla.eigh(h, subset_by_index=(0, 1))
    vec = _fix_sign(vecs[:, 0].copy())
    energy = float(vals[0])
    res = float(np.linalg.norm(op.matrix @ vec - energy * vec))
    nspins = op.basis.site_spec.n
    return GroundStateResult(energy, energy / nspins, vec, op.basis.total_sz,
                             float(vals[1] - vals[0]), 0, res)


def solve_ground(op: LinearOperator, solver: str = "lanczos", *, tol: float = 1e-12,
                 seed: int = 0, max_iter: int = 500, cap: int = DENSE_CAP) -> GroundStateResult:
    """Dispatch between the Lanczos and dense ground-state paths."""
    if solver == "dense":
        return dense_ground(op, cap=cap)
    if solver == "lanczos":
        if op.dim < 2:
            return dense_ground(op, cap=cap)
        return lanczos_ground(op, tol=tol, seed=seed, max_iter=max_iter)
    raise ValueError(f"unknown solver {solver!r}")


def energy_derivatives_fd(spec: ModelSpec, h: float = 1e-4, solver: str = "lanczos",
                          seed: int = 0, cap: int = DENSE_CAP) -> tuple[float, float, float]:
    """(e0, de0/dparam, d2e0/dparam2) per spin by central differences.

    Three ground solves share the center point: e0 at param and the two
    offsets param +/- h. At the alpha = 0 boundary of the dimerized
    families the lower offset evaluates the coupling J2 = -h, which is
    the analytic continuation of the linear coupling dependence.
    """
    if h < FD_STEP_FLOOR:
        raise StepTooSmall(f"fd step {h} below floor {FD_STEP_FLOOR}")
    basis = sector_basis(spec)
    parts = hamiltonian_parts(spec, basis)

    def e_at(param: float) -> float:
        op = combine_parts(spec, basis, parts, param)
        return solve_ground(op, solver, seed=seed, cap=cap).energy_per_spin

    e0 = e_at(spec.param)
    ep = e_at(spec.param + h)
    em = e_at(spec.param - h)
    return e0, (ep - em) / (2.0 * h), (ep - 2.0 * e0 + em) / (h * h)


def curvature_perturbative(spec: ModelSpec, cap: int = DENSE_CAP) -> float:
    """d2e0/dparam2 from second-order perturbation theory.

    Needs the full sector spectrum:
        d2e0 = sum_{n != 0} 2 |<psi_n| dH |psi_0>|^2 / (N (E_0 - E_n)).
    The driving operator conserves total Sz, so the sector-resolved sum
    is complete.
    """
    basis = sector_basis(spec)
    from .models import driving_operator, hamiltonian  # local to avoid cycle at import

    spec_full = dense_spectrum(hamiltonian(spec, basis), cap=cap)
    vals, vecs = spec_full.eigenvalues, spec_full.eigenvectors
    if vals.shape[0] < 2 or vals[1] - vals[0] < DEGENERACY_TOL:
        raise DegenerateGroundState(
            f"sector gap {vals[1] - vals[0] if vals.shape[0] > 1 else 0.0:.3e} below {DEGENERACY_TOL}")
    h1psi0 = driving_operator(spec, basis).apply(vecs[:, 0])
    amps = vecs[:, 1:].T @ h1psi0
    denom = vals[0] - vals[1:]
    return float(np.sum(2.0 * amps * amps / denom) / spec.site_spec().n)


def spec_at(spec: ModelSpec, param: float) -> ModelSpec:
    """Copy of a model spec at a different parameter value."""
    return dc_replace(spec, param=param)
