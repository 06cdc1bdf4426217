"""End-to-end verification checks.

Each check exercises one published-result anchor or cross-route
identity at its stated tolerance and runtime budget, returning a
CheckResult with the measured numbers in the detail string. The
registry is shared by the `verify` CLI subcommand and the acceptance
test module so both report the same table.

Expensive sweeps (the finite-size peak study) are computed once per
run and shared by the checks that consume them; the check that
triggers the computation is the one whose runtime budget pays for it.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass

import numpy as np

from .analytic import (
    E00_UNIFORM,
    ThermoParams,
    alpha_from_eta,
    n4_energy,
    n4_rfs,
    thermo_energy,
    thermo_rfs,
)
from .eig import curvature_perturbative, energy_derivatives_fd, solve_ground
from .errors import SpinChainError
from .fidelity import rfs_commuting_spectra, rfs_correlator, rfs_energy_dimer, rfs_energy_mixed
from .models import BB, DIMER, MIXED, ModelSpec, combine_parts, hamiltonian_parts, sector_basis
from .observables import correlator_zz, scalar_correlator, singlet_pair_spectrum, su2_structure_check, two_site_rdm
from .sweep import find_pseudo_critical, record_value, run_sweep

FIG_GRID = np.round(np.arange(0.10, 1.6001, 0.02), 10)
FIG_SIZES = (6, 8, 10, 12)
GLOBAL_SIZES = (6, 8, 10)


@dataclass
class CheckResult:
    """Outcome of one acceptance check."""

    name: str
    passed: bool
    detail: str
    seconds: float


class _Context:
    """Caches shared between checks: solved states and the peak sweeps."""

    def __init__(self):
        self._sweeps: dict[int, list] = {}
        self._sector: dict[tuple, tuple] = {}
        self._ground: dict[tuple, object] = {}

    def peak_sweep(self, n: int) -> list:
        if n not in self._sweeps:
            routes = ("energy", "global") if n in GLOBAL_SIZES else ("energy",)
            self._sweeps[n] = run_sweep(ModelSpec(DIMER, n, 1.0), FIG_GRID,
                                        routes=routes)
        return self._sweeps[n]

    def _sector_parts(self, spec: ModelSpec):
        key = (spec.family, spec.n, spec.spin_s)
        if key not in self._sector:
            basis = sector_basis(spec)
            self._sector[key] = (basis, hamiltonian_parts(spec, basis))
        return self._sector[key]

    def ground(self, spec: ModelSpec, solver: str = "lanczos"):
        key = (spec.family, spec.n, spec.spin_s, spec.param, spec.j2, solver)
        if key not in self._ground:
            basis, parts = self._sector_parts(spec)
            op = combine_parts(spec, basis, parts, spec.param)
            self._ground[key] = (solve_ground(op, solver), basis)
        return self._ground[key]


def _rel(err: float, ref: float) -> float:
    return abs(err - ref) / max(abs(ref), 1e-300)


def check_n4_closed_form(ctx: _Context) -> tuple[bool, str]:
    """All four routes reproduce the four-site closed form over a dense grid."""
    t0 = time.perf_counter()
    grid = np.round(np.arange(0.05, 2.0001, 0.05), 10)
    routes = ("uhlmann", "spectra", "correlator", "energy")
    records = run_sweep(ModelSpec(DIMER, 4, 1.0), grid, routes=routes,
                        solver="dense")
    worst_fd = 0.0
    for rec in records:
        ref = n4_rfs(rec.param)
        for table in (rec.chi12, rec.chi23):
            for route in routes:
                val = table[route]
                if not math.isfinite(val):
                    return False, f"route {route} failed at param {rec.param}"
                worst_fd = max(worst_fd, _rel(val, ref))
    worst_exact = max(
        max(_rel(chi, n4_rfs(a)) for chi in rfs_energy_dimer(*n4_energy(a), a))
        for a in grid)
    peak = find_pseudo_critical(records, "chi23_energy")
    elapsed = time.perf_counter() - t0
    ok = (worst_fd <= 1e-4 and worst_exact <= 1e-8
          and abs(peak.param_star - 0.5) <= 5e-3
          and abs(peak.chi_star - 1.0 / 3.0) <= 1e-4
          and elapsed < 5.0)
    return ok, (f"fd-route rel err {worst_fd:.2e} (<=1e-4), exact-input rel err "
                f"{worst_exact:.2e} (<=1e-8), peak {peak.param_star:.4f}/"
                f"{peak.chi_star:.6f}, {elapsed:.1f}s (<5s)")


def check_energy_anchors(ctx: _Context) -> tuple[bool, str]:
    """Ground energies hit the exact four-site and decoupled-dimer values."""
    res4, _ = ctx.ground(ModelSpec(DIMER, 4, 1.0), solver="dense")
    err_n4 = abs(res4.energy_per_spin + 0.5)
    err_dimer = 0.0
    for n in (4, 6, 8, 10, 12):
        res, _ = ctx.ground(ModelSpec(DIMER, n, 1e-3))
        err_dimer = max(err_dimer, abs(res.energy_per_spin + 0.375))
    err_fd = 0.0
    for a in (0.0, 0.5, 1.0):
        got = energy_derivatives_fd(ModelSpec(DIMER, 4, a), solver="dense")
        want = n4_energy(a)
        err_fd = max(err_fd, max(abs(g - w) for g, w in zip(got, want)))
    ok = err_n4 <= 1e-10 and err_dimer <= 1e-3 and err_fd <= 1e-6
    return ok, (f"four-site energy err {err_n4:.2e} (<=1e-10), decoupled-limit "
                f"err {err_dimer:.2e} (<=1e-3), derivative err {err_fd:.2e} (<=1e-6)")


def check_feynman_hellmann(ctx: _Context) -> tuple[bool, str]:
    """Energy derivatives equal the bond correlators they generate."""
    t0 = time.perf_counter()
    worst = 0.0
    for n in (6, 8, 10, 12):
        for a in (0.3, 0.7, 1.0, 1.3):
            spec = ModelSpec(DIMER, n, a)
            e0, de0, _ = energy_derivatives_fd(spec)
            res, basis = ctx.ground(spec)
            x23 = scalar_correlator(res.vector, basis, 1, 2)
            c12 = correlator_zz(res.vector, basis, 0, 1)
            worst = max(worst, abs(de0 - 0.5 * x23),
                        abs((8.0 / 3.0) * (e0 - a * de0) - c12))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30.0
    return ok, f"max identity err {worst:.2e} (<=1e-6), {elapsed:.1f}s (<30s)"


def check_finite_size_peaks(ctx: _Context) -> tuple[bool, str]:
    """Peaks sharpen and drift toward the critical point as N grows."""
    t0 = time.perf_counter()
    peaks23, peaks12 = {}, {}
    for n in FIG_SIZES:
        records = ctx.peak_sweep(n)
        peaks23[n] = find_pseudo_critical(records, "chi23_energy")
        peaks12[n] = find_pseudo_critical(records, "chi12_energy")
    elapsed = time.perf_counter() - t0
    stars = [peaks23[n].param_star for n in FIG_SIZES]
    heights = [peaks23[n].chi_star for n in FIG_SIZES]
    step = float(FIG_GRID[1] - FIG_GRID[0])
    pair_dists = [abs(peaks12[n].param_star - peaks23[n].param_star)
                  for n in FIG_SIZES]
    ok = (all(b > a for a, b in zip(stars, stars[1:]))
          and all(0.5 < s < 1.0 for s in stars)
          and all(b > a for a, b in zip(heights, heights[1:]))
          and max(pair_dists) <= step + 1e-9
          and elapsed < 120.0)
    # The bond-peak coincidence clause is a known red: the two bond
    # susceptibilities genuinely maximize 0.028-0.051 apart on this
    # model (shrinking with N, route-independent), so the one-step
    # target of 0.02 is unattainable at these sizes.
    return ok, (f"peaks {', '.join(f'{s:.3f}' for s in stars)} (increasing, in "
                f"(0.5,1)), heights increasing, bond-peak distances "
                f"{', '.join(f'{d:.3f}' for d in pair_dists)} "
                f"(target <= {step:.2f} each), {elapsed:.0f}s (<120s)")


def check_route_consistency(ctx: _Context) -> tuple[bool, str]:
    """Random specs: all susceptibility routes agree pairwise."""
    rng = np.random.default_rng(20260816)
    routes = ("uhlmann", "spectra", "correlator", "energy")
    worst_spread = 0.0
    for _ in range(20):
        n = int(rng.choice((4, 6, 8, 10)))
        a = float(rng.uniform(0.2, 1.5))
        rec = run_sweep(ModelSpec(DIMER, n, a), [a], routes=routes)[0]
        for table in (rec.chi12, rec.chi23):
            if not all(math.isfinite(v) for v in table.values()):
                return False, f"route failure at N={n}, param={a:.4f}: {rec.flags}"
        worst_spread = max(worst_spread, rec.route_spread)
    worst_kernel = 0.0
    for _ in range(50):
        c = float(rng.uniform(-0.95, 0.30))
        dc = float(rng.uniform(-2.0, 2.0))
        lam = np.array([(1 + c) / 4.0] * 3 + [(1 - 3 * c) / 4.0])
        dlam = np.array([dc / 4.0] * 3 + [-3.0 * dc / 4.0])
        direct = rfs_correlator(c, dc)
        worst_kernel = max(worst_kernel,
                           abs(rfs_commuting_spectra(lam, dlam) - direct)
                           / max(1.0, abs(direct)))
    ok = worst_spread <= 1e-4 and worst_kernel <= 1e-9
    return ok, (f"max route spread {worst_spread:.2e} (<=1e-4), kernel identity "
                f"err {worst_kernel:.2e} (<=1e-9)")


def check_global_dominance(ctx: _Context) -> tuple[bool, str]:
    """The full-state susceptibility bounds both reduced ones everywhere."""
    min_slack = math.inf
    for n in GLOBAL_SIZES:
        for rec in ctx.peak_sweep(n):
            chi_g = rec.chi_global
            if chi_g is None or not math.isfinite(chi_g):
                return False, f"chi_global missing at N={n}, param={rec.param}"
            for column in ("chi12_energy", "chi23_energy"):
                min_slack = min(min_slack, chi_g - record_value(rec, column))
    ok = min_slack >= -1e-8
    return ok, f"min slack chi_global - chi_reduced = {min_slack:.3e} (>= -1e-8)"


def check_perturbative_curvature(ctx: _Context) -> tuple[bool, str]:
    """Sum-over-states curvature equals the finite-difference second derivative."""
    t0 = time.perf_counter()
    worst = 0.0
    for n in (4, 6, 8):
        for a in (0.5, 1.0):
            spec = ModelSpec(DIMER, n, a)
            pert = curvature_perturbative(spec)
            _, _, d2e0 = energy_derivatives_fd(spec, solver="dense")
            worst = max(worst, abs(pert - d2e0))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 60.0
    return ok, f"max |curvature - fd| {worst:.2e} (<=1e-6), {elapsed:.1f}s (<60s)"


def check_thermo_exponent(ctx: _Context) -> tuple[bool, str]:
    """The thermodynamic-limit susceptibility follows its power-law exponent."""
    params = ThermoParams()
    etas = np.geomspace(1e-4, 1e-3, 21)
    chi23 = np.array([thermo_rfs(alpha_from_eta(eta), params)[1] for eta in etas])
    slope = float(np.polyfit(np.log(etas), np.log(chi23), 1)[0])
    target = 2.0 * params.p - 4.0
    err_e00 = abs(thermo_energy(0.0, params) - E00_UNIFORM)
    ok = abs(slope - target) <= 0.01 and err_e00 <= 1e-12
    return ok, (f"log-log slope {slope:.4f} vs {target:.4f} "
                f"(|dev| {abs(slope - target):.4f} <= 0.01), uniform-limit energy "
                f"err {err_e00:.1e} (<=1e-12)")


def check_su2_rdm_structure(ctx: _Context) -> tuple[bool, str]:
    """Pair density matrices carry the exact singlet-state structure."""
    worst_dev = 0.0
    worst_spec = 0.0
    bounds_ok = True
    for n in FIG_SIZES:
        spec = ModelSpec(DIMER, n, 1.0)
        for a in FIG_GRID:
            res, basis = ctx.ground(dataclasses.replace(spec, param=float(a)))
            for pair in ((0, 1), (1, 2)):
                rdm = two_site_rdm(res.vector, basis, *pair)
                worst_dev = max(worst_dev, su2_structure_check(rdm))
                c = correlator_zz(res.vector, basis, *pair)
                bounds_ok = bounds_ok and -1.0 < c < 1.0 / 3.0
                worst_spec = max(worst_spec, float(np.max(np.abs(
                    rdm.eigenvalues - singlet_pair_spectrum(c)))))
    ok = worst_dev < 1e-10 and worst_spec < 1e-10 and bounds_ok
    return ok, (f"max structure deviation {worst_dev:.2e} (<1e-10), max spectrum "
                f"deviation {worst_spec:.2e} (<1e-10), correlator bounds "
                f"{'held' if bounds_ok else 'VIOLATED'}")


def check_mixed_spin_routes(ctx: _Context) -> tuple[bool, str]:
    """Mixed-chain energy route agrees with the Uhlmann route; S=1/2 reduces exactly."""
    worst = 0.0
    for a in (0.6, 1.0, 1.4):
        rec = run_sweep(ModelSpec(MIXED, 6, a, spin_s=1.0), [a],
                        routes=("uhlmann", "energy"))[0]
        for table in (rec.chi12, rec.chi23):
            if not all(math.isfinite(v) for v in table.values()):
                return False, f"route failure at param={a}: {rec.flags}"
            worst = max(worst, _rel(table["energy"], table["uhlmann"]))
    rng = np.random.default_rng(7)
    bitwise = True
    for _ in range(25):
        e0 = float(rng.uniform(-0.6, -0.3))
        de0 = float(rng.uniform(-0.3, 0.1))
        d2e0 = float(rng.uniform(-0.5, 0.0))
        a = float(rng.uniform(0.2, 1.5))
        try:
            bitwise = bitwise and (rfs_energy_mixed(e0, de0, d2e0, a, 0.5)
                                   == rfs_energy_dimer(e0, de0, d2e0, a))
        except SpinChainError:
            continue
    ok = worst <= 1e-4 and bitwise
    return ok, (f"max energy-vs-uhlmann rel err {worst:.2e} (<=1e-4), spin-1/2 "
                f"reduction bitwise {'exact' if bitwise else 'BROKEN'}")


def check_biquadratic_sweep(ctx: _Context) -> tuple[bool, str]:
    """Susceptibility rises by 3x near both biquadratic transition angles."""
    t0 = time.perf_counter()
    grid = np.round(np.arange(-0.9, 0.9001, 0.02), 10)
    records = run_sweep(ModelSpec(BB, 8, 0.0, spin_s=1.0), grid,
                        routes=("uhlmann",))
    elapsed = time.perf_counter() - t0
    by_param = {rec.param: rec for rec in records}
    chi0 = by_param[0.0].chi12["uhlmann"]
    if not math.isfinite(chi0) or chi0 <= 0.0:
        return False, f"reference value at angle 0 unusable: {chi0!r}"
    ratios = []
    for center in (-math.pi / 4.0, math.pi / 4.0):
        window = [rec.chi12["uhlmann"] for rec in records
                  if abs(rec.param - center) <= 0.05
                  and math.isfinite(rec.chi12["uhlmann"])]
        if not window:
            return False, f"no usable points within 0.05 of {center:.4f}"
        ratios.append(max(window) / chi0)
    flags_consistent = all(
        ("near-degenerate" in rec.flags) == (rec.gap < 1e-6)
        for rec in records)
    crashed = any(any(f.startswith("point-failed") for f in rec.flags)
                  for rec in records)
    finite = [(rec.param, rec.chi12["uhlmann"]) for rec in records
              if math.isfinite(rec.chi12["uhlmann"])]
    t_max, chi_max = max(finite, key=lambda pc: pc[1])
    ok = (min(ratios) >= 3.0 and flags_consistent and not crashed
          and elapsed < 300.0)
    # The 3x clause is a known red: at this size the susceptibility has
    # a single maximum near theta 0.36-0.38 (slow pseudo-critical drift
    # from the pi/4 transition) and sits below its theta=0 value inside
    # both target windows, so no window reaches the required factor.
    return ok, (f"window/center ratios {ratios[0]:.2f}, {ratios[1]:.2f} "
                f"(target >=3; curve max {chi_max:.2f} at theta={t_max:.2f}), "
                f"degeneracy flags {'consistent' if flags_consistent else 'WRONG'}, "
                f"{'no crashes' if not crashed else 'CRASHED'}, "
                f"{elapsed:.0f}s (<300s)")


CHECKS: tuple[tuple[str, object], ...] = (
    ("n4-closed-form", check_n4_closed_form),
    ("energy-anchors", check_energy_anchors),
    ("feynman-hellmann", check_feynman_hellmann),
    ("finite-size-peaks", check_finite_size_peaks),
    ("route-consistency", check_route_consistency),
    ("global-dominance", check_global_dominance),
    ("perturbative-curvature", check_perturbative_curvature),
    ("thermo-exponent", check_thermo_exponent),
    ("su2-rdm-structure", check_su2_rdm_structure),
    ("mixed-spin-routes", check_mixed_spin_routes),
    ("biquadratic-sweep", check_biquadratic_sweep),
)


def run_checks(names=None) -> list[CheckResult]:
    """Run the registered checks (all by default) and collect results."""
    wanted = set(names) if names is not None else None
    known = {name for name, _ in CHECKS}
    if wanted is not None and not wanted <= known:
        raise ValueError(f"unknown check names: {sorted(wanted - known)}")
    ctx = _Context()
    results = []
    for name, fn in CHECKS:
        if wanted is not None and name not in wanted:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn(ctx)
        except Exception as err:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(err).__name__}: {err}"
        results.append(CheckResult(name, passed, detail,
                                   time.perf_counter() - t0))
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status}  {r.name:<{width}}  {r.detail}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
