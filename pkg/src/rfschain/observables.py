"""Two-site reduced density matrices and spin correlators.

The pair basis is |m_i m_j> with m descending at each site, i.e. digit
order: for spin-1/2 that is |uu>, |ud>, |du>, |dd>. Partial traces are
taken by direct summation over environment configurations; the full
chain density matrix is never formed.

For an SU(2)-singlet chain state the pair matrix collapses to two
numbers: u+/-=(1 +/- c)/4 on the aligned/anti-aligned diagonal and
w = c/2 on the spin-flip off-diagonal, where c = <sigma_i^z sigma_j^z>.
Its spectrum is {(1+c)/4 triple, (1-3c)/4}. A pair of one spin-1/2 and
one spin-S carries two multiplets instead, with total weights F and
1-F, F = (S - 2<S_i.S_j>)/(2S+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainViolation, NotPSD, UnsupportedSpin
from .hilbert import SectorBasis, apply_heisenberg_bond


# Reordering of the spin-1/2 pair basis from digit order
# (|uu>, |ud>, |du>, |dd>) to aligned-then-anti-aligned order
# (|uu>, |dd>, |ud>, |du>), which block-diagonalizes the singlet-form
# pair matrix into a diagonal aligned 2x2 and an anti-aligned 2x2
# holding the spin-flip element w.
ALIGNED_BLOCK_ORDER = (0, 3, 1, 2)


@dataclass
class TwoSiteDensityMatrix:
    """Pair density matrix with its spectral decomposition attached."""

    matrix: np.ndarray
    sites: tuple[int, int]
    site_spins: tuple[float, float]
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns matching eigenvalues

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_state(v: np.ndarray, basis: SectorBasis) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (basis.size,):
        raise DomainViolation(f"vector length {v.shape} does not match sector size {basis.size}")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-10:
        raise DomainViolation(f"state vector not normalized: |v| = {nrm!r}")
    return v


def two_site_rdm(v: np.ndarray, basis: SectorBasis, i: int, j: int) -> TwoSiteDensityMatrix:
    """Trace everything but sites (i, j) out of a pure sector state.

    Groups configurations by their environment code and accumulates
    rho = M M^T where M maps (pair level, environment) to amplitudes.
    """
    spec = basis.site_spec
    i, j = spec.check_pair(i, j)
    v = _check_state(v, basis)
    di = basis.digits[:, i].astype(np.int64)
    dj = basis.digits[:, j].astype(np.int64)
    env_codes = basis.codes - di * spec.weights[i] - dj * spec.weights[j]
    pair_idx = di * spec.dims[j] + dj
    _, env_ord = np.unique(env_codes, return_inverse=True)
    d_pair = int(spec.dims[i] * spec.dims[j])
    m = np.zeros((d_pair, int(env_ord.max()) + 1))
    m[pair_idx, env_ord] = v
    rho = m @ m.T
    vals, vecs = np.linalg.eigh(rho)
    order = np.argsort(vals)[::-1]
    return TwoSiteDensityMatrix(rho, (i, j),
                                (spec.local_spins[i], spec.local_spins[j]),
                                vals[order], vecs[:, order])


def correlator_zz(v: np.ndarray, basis: SectorBasis, i: int, j: int) -> float:
    """<sigma_i^z sigma_j^z> for a spin-1/2 pair (equals 4 <S_i^z S_j^z>)."""
    spec = basis.site_spec
    i, j = spec.check_pair(i, j)
    if spec.local_spins[i] != 0.5 or spec.local_spins[j] != 0.5:
        raise UnsupportedSpin("sigma-z correlator defined for spin-1/2 sites only")
    v = _check_state(v, basis)
    si = 1.0 - 2.0 * basis.digits[:, i].astype(np.float64)
    sj = 1.0 - 2.0 * basis.digits[:, j].astype(np.float64)
    return float(np.sum(v * v * si * sj))


def scalar_correlator(v: np.ndarray, basis: SectorBasis, i: int, j: int) -> float:
    """<S_i . S_j> on a sector state."""
    v = _check_state(v, basis)
    return float(v @ apply_heisenberg_bond(v, basis, i, j, 1.0))


def correlators_from_energy(e0: float, de0: float, alpha: float) -> tuple[float, float]:
    """Hellmann-Feynman route to the two sigma-z correlators.

    For the dimerized spin-1/2 chain: c12 = (8/3)(e0 - alpha de0) and
    c23 = (8/3) de0.
    """
    return (8.0 / 3.0) * (e0 - alpha * de0), (8.0 / 3.0) * de0


def su2_structure_check(rdm: TwoSiteDensityMatrix | np.ndarray) -> float:
    """Largest violation of the singlet-state pair structure.

    Checks the forbidden zero pattern, equality of the two aligned
    diagonal entries, and the triplet-degeneracy identity
    u+ = u- + w. Returns the max absolute deviation.
    """
    mat = rdm.matrix if isinstance(rdm, TwoSiteDensityMatrix) else np.asarray(rdm, dtype=np.float64)
    if mat.shape != (4, 4):
        raise UnsupportedSpin(f"structure check is for spin-1/2 pairs, got shape {mat.shape}")
    forbidden = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]
    dev = max(abs(mat[a, b]) for a, b in forbidden)
    dev = max(dev, float(np.max(np.abs(mat - mat.T))))
    dev = max(dev, abs(mat[0, 0] - mat[3, 3]))
    dev = max(dev, abs(mat[1, 1] - mat[2, 2]))
    u_plus = 0.5 * (mat[0, 0] + mat[3, 3])
    u_minus = 0.5 * (mat[1, 1] + mat[2, 2])
    w = 0.5 * (mat[1, 2] + mat[2, 1])
    dev = max(dev, abs(u_plus - (u_minus + w)))
    return float(dev)


def singlet_pair_spectrum(c: float) -> np.ndarray:
    """Pair spectrum {(1+c)/4 x3, (1-3c)/4} of a singlet-state RDM, descending."""
    lam = np.array([(1.0 + c) / 4.0] * 3 + [(1.0 - 3.0 * c) / 4.0])
    return np.sort(lam)[::-1]


@lru_cache(maxsize=32)
def _spin_matrices(twice_s: int):
    s = twice_s / 2.0
    m = s - np.arange(twice_s + 1, dtype=np.float64)  # descending, digit order
    sz = np.diag(m)
    # raising operator in digit order: |m+1><m| connects digit d -> d-1
    amp = np.sqrt(s * (s + 1.0) - m[1:] * (m[1:] + 1.0))
    sp_ = np.diag(amp, k=1)
    return sz, sp_, sp_.T


def pair_exchange_matrix(s_i: float, s_j: float) -> np.ndarray:
    """Dense S_i . S_j on the bare pair space (digit-ordered kron basis)."""
    zi, pi, mi = _spin_matrices(round(2 * s_i))
    zj, pj, mj = _spin_matrices(round(2 * s_j))
    return (np.kron(zi, zj) + 0.5 * (np.kron(pi, mj) + np.kron(mi, pj)))


def multiplet_projectors(s_i: float, s_j: float) -> dict[float, np.ndarray]:
    """Orthogonal projectors onto the total-spin multiplets of a pair.

    Built from the eigenspaces of S_i . S_j, whose eigenvalue
    [j(j+1) - s_i(s_i+1) - s_j(s_j+1)]/2 labels the total spin j.
    """
    ex = pair_exchange_matrix(s_i, s_j)
    vals, vecs = np.linalg.eigh(ex)
    base = s_i * (s_i + 1.0) + s_j * (s_j + 1.0)
    out: dict[float, np.ndarray] = {}
    for j2 in np.arange(abs(s_i - s_j), s_i + s_j + 0.5, 1.0):
        lam = 0.5 * (j2 * (j2 + 1.0) - base)
        cols = np.abs(vals - lam) < 1e-8
        block = vecs[:, cols]
        out[float(j2)] = block @ block.T
    return out


def multiplet_weights(rdm: TwoSiteDensityMatrix) -> dict[float, float]:
    """Total weight of each pair multiplet in an RDM (sums to 1)."""
    projs = multiplet_projectors(*rdm.site_spins)
    return {j: float(np.trace(p @ rdm.matrix)) for j, p in projs.items()}


def mixed_pair_rdm(x: float, s: float, spins: tuple[float, float] | None = None) -> np.ndarray:
    """Isotropic (1/2, S) pair density matrix from the scalar correlator.

    Weight F = (S - 2x)/(2S+1) spreads evenly over the 2S-dimensional
    lower multiplet and 1-F over the (2S+2)-dimensional upper one.
    `spins` fixes the site order (default (1/2, S)).
    """
    if spins is None:
        spins = (0.5, float(s))
    if sorted(spins) != [0.5, float(s)]:
        raise UnsupportedSpin(f"pair {spins} is not a (1/2, {s}) pair")
    f = (s - 2.0 * x) / (2.0 * s + 1.0)
    if not 0.0 <= f <= 1.0:
        raise DomainViolation(f"correlator x={x} gives multiplet weight F={f} outside [0, 1]")
    projs = multiplet_projectors(*spins)
    lower, upper = projs[s - 0.5], projs[s + 0.5]
    return (f / (2.0 * s)) * lower + ((1.0 - f) / (2.0 * s + 2.0)) * upper


def assert_density_matrix(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate trace one, symmetry, and positivity within noise."""
    mat = np.asarray(mat, dtype=np.float64)
    if abs(np.trace(mat) - 1.0) > tol:
        raise DomainViolation(f"trace {np.trace(mat)!r} != 1")
    if np.max(np.abs(mat - mat.T)) > tol:
        raise DomainViolation("density matrix not symmetric")
    vals = np.linalg.eigvalsh(mat)
    if vals[0] < -tol:
        raise NotPSD(f"negative eigenvalue {vals[0]:.3e}")
    return mat
