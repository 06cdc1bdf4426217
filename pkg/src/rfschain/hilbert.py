"""Sector bases and bond operators for chains with arbitrary local spins.

A product configuration stores one digit per site, d in {0, ..., 2S}.
The physical magnetization is m = S - d, so digit 0 is the top-weight
|m = +S> level and larger digits step the magnetization down. A
configuration's code is its mixed-radix integer with site 0 most
significant; the canonical basis ordering is ascending code, which is
also lexicographic in the digit string. Ordinal lookup is therefore a
bisection into the sorted code array.

Bond operators act without ever materializing a matrix: the Sz_i Sz_j
part is diagonal, and (S+_i S-_j + S-_i S+_j)/2 is a pair of mutually
transposed hopping maps whose ladder coefficients
sqrt(S(S+1) - m(m +/- 1)) are computed on the fly. Total Sz is
conserved, so the image of a sector vector stays in the sector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EmptySector, IndexOutOfRange, UnsupportedSpin

# Full-product enumeration is vectorized over all configurations; this
# guard keeps an absurd request from exhausting memory.
_ENUMERATION_GUARD = 1 << 26


def _checked_spin(value) -> float:
    s = float(value)
    twice = 2.0 * s
    if s <= 0.0 or abs(twice - round(twice)) > 1e-9:
        raise UnsupportedSpin(f"spin length must be a positive half-integer, got {value!r}")
    return round(twice) / 2.0


@dataclass(frozen=True)
class SiteSpec:
    """Chain layout: one spin length per site."""

    local_spins: tuple[float, ...]

    def __post_init__(self):
        if len(self.local_spins) < 2:
            raise IndexOutOfRange("a chain needs at least two sites")
        object.__setattr__(self, "local_spins", tuple(_checked_spin(s) for s in self.local_spins))

    @property
    def n(self) -> int:
        return len(self.local_spins)

    @cached_property
    def dims(self) -> np.ndarray:
        """Local dimensions 2S+1 per site."""
        return np.array([round(2 * s) + 1 for s in self.local_spins], dtype=np.int64)

    @cached_property
    def weights(self) -> np.ndarray:
        """Mixed-radix weights with site 0 most significant."""
        w = np.ones(self.n, dtype=np.int64)
        for k in range(self.n - 2, -1, -1):
            w[k] = w[k + 1] * self.dims[k + 1]
        return w

    @property
    def total_spin(self) -> float:
        return float(sum(self.local_spins))

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def check_site(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"site {i} outside chain of {self.n} sites")
        return i

    def check_pair(self, i: int, j: int) -> tuple[int, int]:
        i, j = self.check_site(i), self.check_site(j)
        if i == j:
            raise IndexOutOfRange(f"pair sites must differ, got ({i}, {j})")
        return i, j


class SectorBasis:
    """Ordered basis of product configurations with fixed total Sz.

    `digits` has one row per configuration (ascending code order) and
    one column per site; `codes` holds the matching mixed-radix codes.
    Both arrays are frozen after construction.
    """

    def __init__(self, site_spec: SiteSpec, total_sz: float, digits: np.ndarray, codes: np.ndarray):
        self.site_spec = site_spec
        self.total_sz = float(total_sz)
        self.digits = digits
        self.codes = codes
        digits.setflags(write=False)
        codes.setflags(write=False)

    def __len__(self) -> int:
        return self.codes.shape[0]

    @property
    def size(self) -> int:
        return self.codes.shape[0]

    @cached_property
    def index_map(self) -> dict[int, int]:
        """Configuration code -> ordinal, the exact inverse of the listing."""
        return {int(c): k for k, c in enumerate(self.codes)}

    def index_of_codes(self, codes: np.ndarray) -> np.ndarray:
        """Ordinals for an array of configuration codes (must be members)."""
        pos = np.searchsorted(self.codes, codes)
        if pos.size and (pos.max() >= self.size or np.any(self.codes[pos] != codes)):
            raise EmptySector("configuration code not present in this sector")
        return pos

    def magnetizations(self, site: int) -> np.ndarray:
        """m values of every configuration at one site."""
        site = self.site_spec.check_site(site)
        return self.site_spec.local_spins[site] - self.digits[:, site].astype(np.float64)


def enumerate_sector(site_spec: SiteSpec, total_sz: float) -> SectorBasis:
    """List all product configurations with the requested total Sz.

    Raises EmptySector when the magnetization is unreachable, including
    the parity-incompatible case (total Sz must differ from the maximal
    polarization by an integer).
    """
    total = site_spec.total_dim
    if total > _ENUMERATION_GUARD:
        raise MemoryError(f"full-product enumeration of {total} configurations refused")
    # Sum of digits is an integer fixed by the sector: sum(d) = sum(S) - Sz.
    target = site_spec.total_spin - float(total_sz)
    if abs(target - round(target)) > 1e-9:
        raise EmptySector(f"total_sz={total_sz} incompatible with spins {site_spec.local_spins}")
    target = int(round(target))
    max_sum = int(np.sum(site_spec.dims - 1))
    if target < 0 or target > max_sum:
        raise EmptySector(f"total_sz={total_sz} outside reachable range")

    codes_all = np.arange(total, dtype=np.int64)
    digits_all = np.empty((total, site_spec.n), dtype=np.int8)
    digit_sum = np.zeros(total, dtype=np.int64)
    for k in range(site_spec.n):
        col = (codes_all // site_spec.weights[k]) % site_spec.dims[k]
        digits_all[:, k] = col
        digit_sum += col
    keep = digit_sum == target
    codes = codes_all[keep]
    if codes.size == 0:
        raise EmptySector(f"no configuration reaches total_sz={total_sz}")
    return SectorBasis(site_spec, total_sz, np.ascontiguousarray(digits_all[keep]), codes)


def _bond_terms(basis: SectorBasis, i: int, j: int):
    """Action arrays for S_i . S_j on a sector basis.

    Returns (diag, src, dst, val): the diagonal Sz_i Sz_j weights, and
    the (S+_i S-_j)/2 hopping triplets. The reverse (S-_i S+_j)/2 term
    is the transpose of the same triplets, which keeps the assembled
    operator Hermitian to the last bit.
    """
    spec = basis.site_spec
    i, j = spec.check_pair(i, j)
    si, sj = spec.local_spins[i], spec.local_spins[j]
    di = basis.digits[:, i].astype(np.int64)
    dj = basis.digits[:, j].astype(np.int64)
    mi = si - di
    mj = sj - dj
    diag = mi * mj

    # S+_i S-_j: m_i up (digit down), m_j down (digit up).
    movable = (di > 0) & (dj < spec.dims[j] - 1)
    src = np.nonzero(movable)[0]
    ci = np.sqrt(si * (si + 1.0) - mi[src] * (mi[src] + 1.0))
    cj = np.sqrt(sj * (sj + 1.0) - mj[src] * (mj[src] - 1.0))
    val = 0.5 * ci * cj
    new_codes = basis.codes[src] - spec.weights[i] + spec.weights[j]
    dst = basis.index_of_codes(new_codes)
    return diag, src, dst, val


def apply_heisenberg_bond(v: np.ndarray, basis: SectorBasis, i: int, j: int,
                          coupling: float = 1.0) -> np.ndarray:
    """Apply coupling * (S_i . S_j) to a sector state vector."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (basis.size,):
        raise IndexOutOfRange(f"vector length {v.shape} does not match sector size {basis.size}")
    diag, src, dst, val = _bond_terms(basis, i, j)
    out = diag * v
    # Each hopping term is injective, so plain fancy indexing accumulates safely.
    out[dst] += val * v[src]
    out[src] += val * v[dst]
    out *= coupling
    return out


def apply_biquadratic_bond(v: np.ndarray, basis: SectorBasis, i: int, j: int,
                           coupling: float = 1.0) -> np.ndarray:
    """Apply coupling * (S_i . S_j)^2, implemented as two bond applications.

    Restricted to spin-1 pairs, where the biquadratic term is an
    independent coupling; for spin-1/2 it reduces to the bilinear one.
    """
    spec = basis.site_spec
    i, j = spec.check_pair(i, j)
    if spec.local_spins[i] != 1.0 or spec.local_spins[j] != 1.0:
        raise UnsupportedSpin(
            f"biquadratic bond needs spin-1 sites, got S={spec.local_spins[i]}, {spec.local_spins[j]}")
    w = apply_heisenberg_bond(v, basis, i, j, 1.0)
    return apply_heisenberg_bond(w, basis, i, j, coupling)
