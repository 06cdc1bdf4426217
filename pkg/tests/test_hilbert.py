"""Sector enumeration and matrix-free bond application."""

import math

import numpy as np
import pytest

from rfschain.errors import EmptySector, IndexOutOfRange, UnsupportedSpin
from rfschain.hilbert import (
    SiteSpec,
    apply_biquadratic_bond,
    apply_heisenberg_bond,
    enumerate_sector,
)

SQRT2 = math.sqrt(2.0)

# Single-site spin matrices in digit order (m descending down the diagonal).
SPIN_HALF = {
    "z": np.array([[0.5, 0.0], [0.0, -0.5]]),
    "p": np.array([[0.0, 1.0], [0.0, 0.0]]),
}
SPIN_ONE = {
    "z": np.diag([1.0, 0.0, -1.0]),
    "p": np.array([[0.0, SQRT2, 0.0], [0.0, 0.0, SQRT2], [0.0, 0.0, 0.0]]),
}


def sector_count(spins, sz):
    """Independent digit-sum count via polynomial convolution."""
    target = round(sum(spins) - sz)
    poly = np.array([1.0])
    for s in spins:
        poly = np.convolve(poly, np.ones(round(2 * s) + 1))
    return int(poly[target]) if 0 <= target < len(poly) else 0


def dense_bond(spins, i, j):
    """Full-space S_i . S_j built by Kronecker products in digit order."""
    mats = {0.5: SPIN_HALF, 1.0: SPIN_ONE}
    ops = []
    for name in ("z", "p", "m"):
        factors = []
        for k, s in enumerate(spins):
            base = mats[s]
            if k == i:
                f = base["z"] if name == "z" else (base["p"] if name == "p" else base["p"].T)
            elif k == j:
                f = base["z"] if name == "z" else (base["p"].T if name == "p" else base["p"])
            else:
                f = np.eye(round(2 * s) + 1)
            factors.append(f)
        full = factors[0]
        for f in factors[1:]:
            full = np.kron(full, f)
        ops.append(full)
    return ops[0] + 0.5 * (ops[1] + ops[2])


def test_site_spec_validation():
    with pytest.raises(UnsupportedSpin):
        SiteSpec((0.5, 0.3))
    with pytest.raises(UnsupportedSpin):
        SiteSpec((0.5, 0.0))
    with pytest.raises(UnsupportedSpin):
        SiteSpec((0.5, -0.5))
    with pytest.raises(IndexOutOfRange):
        SiteSpec((0.5,))


def test_site_spec_layout():
    spec = SiteSpec((0.5, 1.0, 0.5))
    assert spec.n == 3
    assert list(spec.dims) == [2, 3, 2]
    # site 0 most significant: weight = product of dims to the right
    assert list(spec.weights) == [6, 2, 1]
    assert spec.total_dim == 12
    assert spec.total_spin == 2.0


def test_sector_dimensions_match_digit_sum_count():
    cases = [
        ((0.5,) * 12, 0.0, 924),
        ((0.5,) * 4, 0.0, 6),
        ((1.0,) * 8, 0.0, 1107),
        ((1.0,) * 6, 0.0, 141),
        ((0.5, 1.0) * 3, 1.5, 35),
        ((0.5, 1.0) * 2, 1.0, 8),
        ((0.5, 1.5) * 3, 3.0, 38),
    ]
    for spins, sz, expected in cases:
        assert sector_count(spins, sz) == expected
        basis = enumerate_sector(SiteSpec(spins), sz)
        assert basis.size == expected
    assert math.comb(12, 6) == 924


def test_enumeration_order_and_codes():
    basis = enumerate_sector(SiteSpec((0.5,) * 4), 0.0)
    # codes strictly ascending, and digits reconstruct them
    assert np.all(np.diff(basis.codes) > 0)
    weights = basis.site_spec.weights
    rebuilt = basis.digits.astype(np.int64) @ weights
    assert np.array_equal(rebuilt, basis.codes)
    # every row carries the requested magnetization
    total_m = sum(basis.magnetizations(k) for k in range(4))
    assert np.allclose(total_m, 0.0)


def test_index_lookup_roundtrip():
    basis = enumerate_sector(SiteSpec((0.5, 1.0, 0.5, 1.0)), 0.0)
    pos = basis.index_of_codes(basis.codes)
    assert np.array_equal(pos, np.arange(basis.size))
    assert basis.index_map[int(basis.codes[3])] == 3
    with pytest.raises(EmptySector):
        # a code with the wrong digit sum is not a member
        missing = np.array([int(basis.codes[0]) + 1])
        while missing[0] in basis.index_map:
            missing[0] += 1
        basis.index_of_codes(missing)


def test_empty_sector_errors():
    spec = SiteSpec((0.5, 0.5))
    with pytest.raises(EmptySector):
        enumerate_sector(spec, 0.3)
    with pytest.raises(EmptySector):
        enumerate_sector(spec, 2.0)
    with pytest.raises(EmptySector):
        # half-integer total Sz is unreachable for two spin-1/2 sites
        enumerate_sector(spec, 0.5)


def test_enumeration_guard():
    with pytest.raises(MemoryError):
        enumerate_sector(SiteSpec((0.5,) * 30), 0.0)


def test_two_site_heisenberg_block():
    """S1.S2 on the two-site Sz=0 sector is [[-1/4, 1/2], [1/2, -1/4]]."""
    basis = enumerate_sector(SiteSpec((0.5, 0.5)), 0.0)
    cols = [apply_heisenberg_bond(e, basis, 0, 1) for e in np.eye(2)]
    mat = np.column_stack(cols)
    assert np.allclose(mat, [[-0.25, 0.5], [0.5, -0.25]], atol=1e-15)
    vals = np.linalg.eigvalsh(mat)
    assert np.allclose(vals, [-0.75, 0.25], atol=1e-14)


@pytest.mark.parametrize("spins,sz", [
    ((0.5, 0.5, 0.5, 0.5), 0.0),
    ((0.5, 1.0, 0.5, 1.0), 1.0),
    ((1.0, 1.0, 1.0), 0.0),
])
def test_bond_matches_dense_kron(spins, sz):
    """Matrix-free bond application equals the projected Kronecker matrix."""
    basis = enumerate_sector(SiteSpec(spins), sz)
    n = len(spins)
    for (i, j) in [(0, 1), (1, 2), (n - 1, 0)]:
        full = dense_bond(spins, i, j)
        block = full[np.ix_(basis.codes, basis.codes)]
        got = np.column_stack(
            [apply_heisenberg_bond(e, basis, i, j) for e in np.eye(basis.size)])
        assert np.allclose(got, block, atol=1e-14)


def test_bond_hermiticity_property():
    rng = np.random.default_rng(11)
    for _ in range(20):
        layout = tuple(rng.choice([0.5, 1.0]) for _ in range(4))
        reachable = np.arange(-sum(layout), sum(layout) + 0.5)
        sz = float(rng.choice(reachable))
        try:
            basis = enumerate_sector(SiteSpec(layout), sz)
        except EmptySector:
            continue
        u = rng.standard_normal(basis.size)
        v = rng.standard_normal(basis.size)
        i, j = 0, int(rng.integers(1, 4))
        lhs = u @ apply_heisenberg_bond(v, basis, i, j)
        rhs = apply_heisenberg_bond(u, basis, i, j) @ v
        assert np.isclose(lhs, rhs, atol=1e-12)


def test_bond_coupling_scaling():
    basis = enumerate_sector(SiteSpec((0.5,) * 4), 1.0)
    v = np.linspace(0.1, 1.0, basis.size)
    one = apply_heisenberg_bond(v, basis, 0, 2, 1.0)
    scaled = apply_heisenberg_bond(v, basis, 0, 2, -2.5)
    assert np.allclose(scaled, -2.5 * one, atol=1e-14)


def test_biquadratic_matches_squared_dense():
    spins = (1.0, 1.0, 1.0)
    basis = enumerate_sector(SiteSpec(spins), 1.0)
    full = dense_bond(spins, 1, 2)
    block2 = (full @ full)[np.ix_(basis.codes, basis.codes)]
    got = np.column_stack(
        [apply_biquadratic_bond(e, basis, 1, 2) for e in np.eye(basis.size)])
    assert np.allclose(got, block2, atol=1e-13)


def test_biquadratic_requires_spin_one():
    basis = enumerate_sector(SiteSpec((0.5, 0.5)), 0.0)
    with pytest.raises(UnsupportedSpin):
        apply_biquadratic_bond(np.array([1.0, 0.0]), basis, 0, 1)


def test_pair_index_errors():
    basis = enumerate_sector(SiteSpec((0.5,) * 4), 0.0)
    v = np.zeros(basis.size)
    with pytest.raises(IndexOutOfRange):
        apply_heisenberg_bond(v, basis, 1, 1)
    with pytest.raises(IndexOutOfRange):
        apply_heisenberg_bond(v, basis, 0, 9)
    with pytest.raises(IndexOutOfRange):
        apply_heisenberg_bond(np.zeros(3), basis, 0, 1)
