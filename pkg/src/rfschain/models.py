"""Model families: Hamiltonians, driving operators, ground sectors.

Three periodic chains are supported, each controlled by one parameter:

  dimer   H = sum_cells J1 S(2k).S(2k+1) + J2 S(2k+1).S(2k+2),
          spin-1/2 everywhere, (J1, J2) = (1, alpha) by default.
  mixed   same bond layout with alternating spin-1/2 / spin-S sites,
          a ferrimagnet whose ground multiplet has total spin
          (N/2)(S - 1/2); work happens in its top-weight Sz sector.
  bb      H = sum_i cos(theta) S_i.S_{i+1} + sin(theta) (S_i.S_{i+1})^2,
          spin-1 ring driven by theta.

Every Hamiltonian is a fixed linear combination of two parameter-free
bond sums, so a sweep assembles the pair once per sector and rescales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SpecMismatch, UnsupportedSpin
from .hilbert import SectorBasis, SiteSpec, _bond_terms, enumerate_sector

DIMER = "dimer"
MIXED = "mixed"
BB = "bb"
FAMILIES = (DIMER, MIXED, BB)

# RFS routes are evaluated for alpha at or above this floor; the
# correlator c12 pushes into its -1 boundary as alpha -> 0.
ALPHA_MIN = 1e-3


@dataclass(frozen=True)
class ModelSpec:
    """One chain instance: family, size, control parameter, couplings.

    `param` is alpha for dimer/mixed and theta for bb. The explicit
    (j1, j2) pair exists so coupling-exchange symmetry is testable;
    j2=None means "track param". `spin_s` is the large spin of the
    mixed family and is ignored elsewhere.
    """

    family: str
    n: int
    param: float
    spin_s: float = 0.5
    j1: float = 1.0
    j2: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnsupportedSpin(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 2:
            raise SpecMismatch("chain needs at least 2 sites")
        if self.family in (DIMER, MIXED):
            if self.n % 2:
                raise SpecMismatch(f"{self.family} chain needs an even site count, got {self.n}")
            if self.param < 0:
                raise SpecMismatch(f"alpha must be nonnegative, got {self.param}")
        if self.family == MIXED:
            twice = 2.0 * self.spin_s
            if self.spin_s < 0.5 or abs(twice - round(twice)) > 1e-9:
                raise UnsupportedSpin(f"spin_s must be a half-integer >= 1/2, got {self.spin_s}")

    def couplings(self) -> tuple[float, float]:
        j2 = self.param if self.j2 is None else self.j2
        return float(self.j1), float(j2)

    def site_spec(self) -> SiteSpec:
        if self.family == DIMER:
            spins = (0.5,) * self.n
        elif self.family == MIXED:
            spins = tuple(0.5 if k % 2 == 0 else float(self.spin_s) for k in range(self.n))
        else:
            spins = (1.0,) * self.n
        return SiteSpec(spins)

    def intra_bonds(self) -> list[tuple[int, int]]:
        """Bonds inside a cell (the J1 bonds); the full ring for bb."""
        if self.family == BB:
            return [(k, (k + 1) % self.n) for k in range(self.n)]
        return [(2 * k, 2 * k + 1) for k in range(self.n // 2)]

    def inter_bonds(self) -> list[tuple[int, int]]:
        """Bonds between cells (the J2 bonds, periodic); empty for bb."""
        if self.family == BB:
            return []
        return [(2 * k + 1, (2 * k + 2) % self.n) for k in range(self.n // 2)]


def ground_sector(spec: ModelSpec) -> float:
    """Total Sz of the sector holding the ground state.

    The antiferromagnetic dimer and the spin-1 ring order into singlets
    (Sz = 0); the mixed ferrimagnet's ground multiplet has total spin
    (N/2)(S - 1/2) and is represented by its top-weight member.
    """
    if spec.family == MIXED:
        return (spec.n // 2) * (float(spec.spin_s) - 0.5)
    return 0.0


class LinearOperator:
    """Hermitian sector operator, applied through a cached sparse matrix."""

    def __init__(self, matrix: sp.csr_matrix, basis: SectorBasis):
        self.matrix = matrix
        self.basis = basis

    @property
    def dim(self) -> int:
        return self.basis.size

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    __call__ = apply


def _bond_matrix(basis: SectorBasis, i: int, j: int) -> sp.csr_matrix:
    """Sparse S_i . S_j on the sector."""
    n = basis.size
    diag, src, dst, val = _bond_terms(basis, i, j)
    rows = np.concatenate([np.arange(n, dtype=np.int64), dst, src])
    cols = np.concatenate([np.arange(n, dtype=np.int64), src, dst])
    data = np.concatenate([diag, val, val])
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def _exchange_sum(basis: SectorBasis, bonds) -> sp.csr_matrix:
    n = basis.size
    total = sp.csr_matrix((n, n))
    for i, j in bonds:
        total = total + _bond_matrix(basis, i, j)
    return total


def _biquadratic_sum(basis: SectorBasis, bonds) -> sp.csr_matrix:
    n = basis.size
    total = sp.csr_matrix((n, n))
    for i, j in bonds:
        m = _bond_matrix(basis, i, j)
        total = total + (m @ m).tocsr()
    return total


def _check_basis(spec: ModelSpec, basis: SectorBasis):
    if basis.site_spec.local_spins != spec.site_spec().local_spins:
        raise SpecMismatch(
            f"basis spins {basis.site_spec.local_spins} do not match model {spec.site_spec().local_spins}")


def hamiltonian_parts(spec: ModelSpec, basis: SectorBasis) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """The two parameter-free bond sums whose combination is H.

    dimer/mixed: (sum of intra-cell bonds, sum of inter-cell bonds),
    so H = j1*A + j2*B. bb: (bilinear ring sum, biquadratic ring sum),
    so H = cos(theta)*A + sin(theta)*B.
    """
    _check_basis(spec, basis)
    if spec.family == BB:
        bonds = spec.intra_bonds()
        return _exchange_sum(basis, bonds), _biquadratic_sum(basis, bonds)
    return _exchange_sum(basis, spec.intra_bonds()), _exchange_sum(basis, spec.inter_bonds())


def combine_parts(spec: ModelSpec, basis: SectorBasis, parts, param: float) -> LinearOperator:
    """H at an arbitrary parameter value from precomputed parts.

    For dimer/mixed the offset parameter feeds J2 directly (J2 may go
    slightly negative inside finite-difference stencils at the
    decoupled point; the operator stays well defined)."""
    a, b = parts
    if spec.family == BB:
        return LinearOperator((np.cos(param) * a + np.sin(param) * b).tocsr(), basis)
    j1 = spec.j1
    j2 = param if spec.j2 is None else spec.j2
    return LinearOperator((j1 * a + j2 * b).tocsr(), basis)


def hamiltonian(spec: ModelSpec, basis: SectorBasis) -> LinearOperator:
    """Assemble H for the spec's own parameter value."""
    return combine_parts(spec, basis, hamiltonian_parts(spec, basis), spec.param)


def driving_operator(spec: ModelSpec, basis: SectorBasis) -> LinearOperator:
    """dH/dparam: the inter-cell bond sum for dimer/mixed, and
    -sin(theta)*bilinear + cos(theta)*biquadratic for bb."""
    _check_basis(spec, basis)
    if spec.family == BB:
        a, b = hamiltonian_parts(spec, basis)
        t = spec.param
        return LinearOperator((-np.sin(t) * a + np.cos(t) * b).tocsr(), basis)
    return LinearOperator(_exchange_sum(basis, spec.inter_bonds()), basis)


def sector_basis(spec: ModelSpec) -> SectorBasis:
    """The ground-sector basis for a model spec."""
    return enumerate_sector(spec.site_spec(), ground_sector(spec))
