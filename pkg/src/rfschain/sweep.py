"""Parameter-sweep engine.

Walks a strictly increasing parameter grid for one model family,
assembling per-point energies, finite-difference derivatives, pair
correlators, and the requested susceptibility routes into immutable
records, then locates pseudo-critical points and builds finite-size
scaling tables.

Solver economy: each grid point needs at most five ground-state
solves (center, center +/- fd_step for the energy derivatives, and
center +/- delta/2 shared by every fidelity-difference route). The
Hamiltonian is assembled once per sweep as two parameter-free bond
sums; points only recombine them, so grid points are independent and
can fan out across a thread pool. Serial order is the byte-for-byte
reproducibility reference.

Per-point numerical failures (domain violations near poles, solver
breakdowns at level crossings) are recorded as flags on the record,
never aborts, unless every point fails.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .eig import solve_ground
from .errors import (
    DomainViolation,
    NoInteriorPeak,
    SectorChange,
    SpecMismatch,
    SpinChainError,
)
from .fidelity import (
    pure_fidelity,
    rfs_commuting_spectra,
    rfs_correlator,
    rfs_energy_dimer,
    rfs_energy_mixed,
    rfs_mixed,
    susceptibility_fd,
    uhlmann_fidelity,
)
from .models import ALPHA_MIN, BB, DIMER, MIXED, ModelSpec, combine_parts, hamiltonian_parts, sector_basis
from .observables import correlator_zz, mixed_pair_rdm, scalar_correlator, two_site_rdm
from .version import VERSION

ROUTE_ORDER = ("uhlmann", "spectra", "correlator", "energy")
GLOBAL_ROUTE = "global"
SUPPORTED_ROUTES = {
    DIMER: frozenset(ROUTE_ORDER) | {GLOBAL_ROUTE},
    MIXED: frozenset(ROUTE_ORDER) | {GLOBAL_ROUTE},
    BB: frozenset({"uhlmann", GLOBAL_ROUTE}),
}
NEAR_DEGENERATE_GAP = 1e-6
DOMAIN_EDGE_MARGIN = 1e-6
PAIR_INTRA = (0, 1)
PAIR_INTER = (1, 2)


@dataclass(frozen=True)
class SweepRecord:
    """One grid point of a sweep.

    c12/c23 hold the sigma-z pair correlators for the spin-1/2 chain
    and the scalar correlators <S_i . S_j> for the mixed and
    biquadratic families. chi12/chi23 map route name to value with
    NaN marking a flagged per-route failure. route_spread is the
    largest relative spread across the routes present at this point
    (NaN when fewer than two are available).
    """

    param: float
    e0: float
    de0: float
    d2e0: float
    c12: float
    c23: float
    chi12: dict[str, float]
    chi23: dict[str, float]
    chi_global: float | None
    gap: float
    flags: tuple[str, ...]
    route_spread: float


@dataclass(frozen=True)
class PeakEstimate:
    """Parabola-refined location and height of a sweep maximum."""

    param_star: float
    chi_star: float
    grid_resolution: float


@dataclass(frozen=True)
class ScalingRow:
    """One system size in a finite-size scaling table."""

    n: int
    param_star: float
    chi_star: float
    grid_resolution: float


def routes_for_family(family: str) -> frozenset[str]:
    """Route names available for a model family."""
    return SUPPORTED_ROUTES[family]


def _relative_spread(values) -> float:
    finite = [v for v in values if math.isfinite(v)]
    if len(finite) < 2:
        return math.nan
    scale = max(abs(v) for v in finite)
    if scale == 0.0:
        return 0.0
    return (max(finite) - min(finite)) / scale


class _Engine:
    """Shared per-sweep state: sector basis, bond sums, solver config."""

    def __init__(self, spec: ModelSpec, routes, delta: float, fd_step: float,
                 solver: str, seed: int):
        unsupported = set(routes) - SUPPORTED_ROUTES[spec.family]
        if unsupported:
            raise SpecMismatch(
                f"routes {sorted(unsupported)} not available for family {spec.family!r}")
        self.spec = spec
        self.routes = tuple(r for r in ROUTE_ORDER if r in routes)
        self.want_global = GLOBAL_ROUTE in routes
        self.delta = delta
        self.fd_step = fd_step
        self.solver = solver
        self.seed = seed
        self.basis = sector_basis(spec)
        self.parts = hamiltonian_parts(spec, self.basis)
        self.spin_s = spec.spin_s
        # reading correlators straight off sigma-z is a spin-1/2 shortcut
        self.use_sigma_z = spec.family == DIMER
        # on a 2-site chain the inter-cell bond wraps around to (1, 0)
        self.pair_intra = PAIR_INTRA
        self.pair_inter = (PAIR_INTER[0], PAIR_INTER[1] % spec.n)

    def solve(self, param: float):
        op = combine_parts(self.spec, self.basis, self.parts, param)
        return solve_ground(op, self.solver, seed=self.seed)

    def pair_correlators(self, vector: np.ndarray) -> tuple[float, float]:
        if self.use_sigma_z:
            return (correlator_zz(vector, self.basis, *self.pair_intra),
                    correlator_zz(vector, self.basis, *self.pair_inter))
        return (scalar_correlator(vector, self.basis, *self.pair_intra),
                scalar_correlator(vector, self.basis, *self.pair_inter))

    def _domain_edge(self, c12: float, c23: float) -> bool:
        m = DOMAIN_EDGE_MARGIN
        if self.spec.family == DIMER:
            return not all(-1.0 + m < c < 1.0 / 3.0 - m for c in (c12, c23))
        if self.spec.family == MIXED:
            s = self.spin_s
            return not all(s - 2.0 * x > m and s + 1.0 + 2.0 * x > m
                           for x in (c12, c23))
        return False

    def _pair_rdm_matrix(self, vector: np.ndarray, pair: tuple[int, int],
                         x: float) -> np.ndarray:
        """Density matrix the fidelity routes differentiate at this pair.

        The mixed family reconstructs the isotropic two-multiplet form
        from the scalar correlator; the other families take the exact
        partial trace of the sector state.
        """
        if self.spec.family == MIXED:
            spins = (self.basis.site_spec.local_spins[pair[0]],
                     self.basis.site_spec.local_spins[pair[1]])
            return mixed_pair_rdm(x, self.spin_s, spins=spins)
        return two_site_rdm(vector, self.basis, *pair).matrix

    def point(self, param: float, clipped: bool) -> SweepRecord:
        flags: list[str] = []
        if clipped:
            flags.append("clipped")
        chi12 = {r: math.nan for r in self.routes}
        chi23 = {r: math.nan for r in self.routes}
        try:
            center = self.solve(param)
            e_minus = self.solve(param - self.fd_step).energy_per_spin
            e_plus = self.solve(param + self.fd_step).energy_per_spin
        except SpinChainError as err:
            flags.append(f"point-failed:{type(err).__name__}")
            nan = math.nan
            return SweepRecord(param, nan, nan, nan, nan, nan, chi12, chi23,
                               nan if self.want_global else None,
                               nan, tuple(flags), nan)
        e0 = center.energy_per_spin
        de0 = (e_plus - e_minus) / (2.0 * self.fd_step)
        d2e0 = (e_plus - 2.0 * e0 + e_minus) / (self.fd_step * self.fd_step)
        c12, c23 = self.pair_correlators(center.vector)
        if center.gap < NEAR_DEGENERATE_GAP:
            flags.append("near-degenerate")
        if self._domain_edge(c12, c23):
            flags.append("domain-edge")

        def run_route(name, fn):
            try:
                return fn()
            except SpinChainError as err:
                flags.append(f"{name}-failed:{type(err).__name__}")
                return math.nan

        chi_global: float | None = None if not self.want_global else math.nan
        delta_pair_routes = [r for r in self.routes if r != "energy"]
        offs = None
        if delta_pair_routes or self.want_global:
            try:
                offs = (self.solve(param - 0.5 * self.delta),
                        self.solve(param + 0.5 * self.delta))
            except SpinChainError as err:
                for r in delta_pair_routes + ([GLOBAL_ROUTE] if self.want_global else []):
                    flags.append(f"{r}-failed:{type(err).__name__}")

        if self.want_global and offs is not None:
            fid = pure_fidelity(offs[0].vector, offs[1].vector)

            def global_route():
                if fid < 0.5:
                    raise SectorChange(
                        f"ground-state overlap {fid:.3f} across delta window")
                return susceptibility_fd(lambda lo, hi: fid, self.delta)
            chi_global = run_route(GLOBAL_ROUTE, global_route)

        if offs is not None and delta_pair_routes:
            cm = self.pair_correlators(offs[0].vector)
            cp = self.pair_correlators(offs[1].vector)
            for target, pair, c, idx in ((chi12, self.pair_intra, c12, 0),
                                         (chi23, self.pair_inter, c23, 1)):
                dc = (cp[idx] - cm[idx]) / self.delta
                rho_m = rho_p = None
                if "uhlmann" in self.routes or "spectra" in self.routes:
                    try:
                        rho_m = self._pair_rdm_matrix(offs[0].vector, pair, cm[idx])
                        rho_p = self._pair_rdm_matrix(offs[1].vector, pair, cp[idx])
                    except SpinChainError as err:
                        for r in ("uhlmann", "spectra"):
                            if r in self.routes:
                                flags.append(f"{r}-failed:{type(err).__name__}")
                have_rdms = rho_m is not None and rho_p is not None
                if "uhlmann" in self.routes and have_rdms:
                    target["uhlmann"] = run_route("uhlmann", lambda: susceptibility_fd(
                        lambda lo, hi: uhlmann_fidelity(rho_m, rho_p), self.delta))
                if "spectra" in self.routes and have_rdms:
                    def spectra_route():
                        rho_c = self._pair_rdm_matrix(center.vector, pair, c)
                        lam, vecs = np.linalg.eigh(rho_c)
                        lam = np.clip(lam, 0.0, None)
                        lam_m = np.einsum("ij,ij->j", vecs, rho_m @ vecs)
                        lam_p = np.einsum("ij,ij->j", vecs, rho_p @ vecs)
                        return rfs_commuting_spectra(lam / np.sum(lam),
                                                     (lam_p - lam_m) / self.delta)
                    target["spectra"] = run_route("spectra", spectra_route)
                if "correlator" in self.routes:
                    if self.use_sigma_z:
                        target["correlator"] = run_route(
                            "correlator", lambda: rfs_correlator(c, dc))
                    else:
                        target["correlator"] = run_route(
                            "correlator", lambda: rfs_mixed(c, dc, self.spin_s))

        if "energy" in self.routes:
            def energy_route():
                if self.spec.family == MIXED:
                    return rfs_energy_mixed(e0, de0, d2e0, param, self.spin_s)
                return rfs_energy_dimer(e0, de0, d2e0, param)
            pair_values = run_route("energy", energy_route)
            if isinstance(pair_values, tuple):
                chi12["energy"], chi23["energy"] = pair_values

        spread = max(_relative_spread(chi12.values()),
                     _relative_spread(chi23.values())) if self.routes else math.nan
        return SweepRecord(param, e0, de0, d2e0, c12, c23, chi12, chi23,
                           chi_global, center.gap, tuple(flags), spread)


def run_sweep(spec_template: ModelSpec, grid, routes=None, delta: float = 1e-4,
              fd_step: float = 1e-4, solver: str = "lanczos", seed: int = 0,
              threads: int = 1) -> list[SweepRecord]:
    """Evaluate one model family over a strictly increasing parameter grid.

    `routes` defaults to everything the family supports. Grid points
    below the family's lower parameter bound are clipped up to it
    (with a warning and a per-record flag); duplicates created by
    clipping are dropped so record params stay strictly increasing.
    Per-point failures become record flags; only a sweep in which
    every point fails raises.
    """
    if routes is None:
        routes = routes_for_family(spec_template.family)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainViolation("parameter grid must be a nonempty 1-d sequence")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainViolation("parameter grid must be strictly increasing")
    clipped_mask = np.zeros(grid.size, dtype=bool)
    if spec_template.family in (DIMER, MIXED):
        clipped_mask = grid < ALPHA_MIN
        if np.any(clipped_mask):
            warnings.warn(
                f"{int(np.sum(clipped_mask))} grid point(s) below {ALPHA_MIN:g} "
                f"clipped to the model domain", stacklevel=2)
            grid = np.clip(grid, ALPHA_MIN, None)
            keep = np.concatenate(([True], np.diff(grid) > 0.0))
            grid, clipped_mask = grid[keep], clipped_mask[keep]
    engine = _Engine(spec_template, routes, delta, fd_step, solver, seed)
    jobs = list(zip(grid.tolist(), clipped_mask.tolist()))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda job: engine.point(*job), jobs))
    else:
        records = [engine.point(*job) for job in jobs]
    if all(any(f.startswith("point-failed") for f in rec.flags) for rec in records):
        raise DomainViolation("every grid point failed; first flags: "
                              + ";".join(records[0].flags))
    return records


def record_value(record: SweepRecord, column: str) -> float:
    """Read one flat CSV-style column off a record."""
    if column in ("param", "e0", "de0", "d2e0", "c12", "c23", "gap"):
        return getattr(record, column)
    if column == "chi_global":
        return math.nan if record.chi_global is None else record.chi_global
    for prefix, table in (("chi12_", record.chi12), ("chi23_", record.chi23)):
        if column.startswith(prefix) and column[len(prefix):] in table:
            return table[column[len(prefix):]]
    raise DomainViolation(f"unknown sweep column {column!r}")


def find_pseudo_critical(records: list[SweepRecord], column: str) -> PeakEstimate:
    """Locate a column's maximum and refine it by a three-point parabola.

    Ties break toward the smaller parameter. An argmax on either end
    of the grid means no interior peak was bracketed.
    """
    if len(records) < 3:
        raise DomainViolation(f"need at least 3 records, got {len(records)}")
    params = np.array([r.param for r in records])
    values = np.array([record_value(r, column) for r in records])
    if not np.any(np.isfinite(values)):
        raise DomainViolation(f"column {column!r} has no finite values")
    idx = int(np.nanargmax(values))
    if idx == 0 or idx == len(records) - 1:
        raise NoInteriorPeak(
            f"maximum of {column} sits at grid endpoint param={float(params[idx]):g}")
    x0, x1, x2 = params[idx - 1:idx + 2]
    y0, y1, y2 = values[idx - 1:idx + 2]
    resolution = max(x1 - x0, x2 - x1)
    d1 = (y1 - y0) / (x1 - x0)
    curv = ((y2 - y1) / (x2 - x1) - d1) / (x2 - x0)
    if not np.isfinite(curv) or curv >= 0.0:
        return PeakEstimate(float(x1), float(y1), float(resolution))
    x_star = 0.5 * (x0 + x1) - 0.5 * d1 / curv
    x_star = float(min(max(x_star, x0), x2))
    chi_star = float(y0 + d1 * (x_star - x0) + curv * (x_star - x0) * (x_star - x1))
    return PeakEstimate(x_star, chi_star, float(resolution))


def scaling_table(spec_template: ModelSpec, sizes, grid, routes=None,
                  column: str | None = None, delta: float = 1e-4,
                  fd_step: float = 1e-4, solver: str = "lanczos", seed: int = 0,
                  threads: int = 1) -> tuple[list[ScalingRow], list[str]]:
    """Peak location/height against system size, with monotonicity flags.

    Returns the rows plus a list of trend violations (peaks are
    expected to move up and to the right with N); violations are
    reported, not raised.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise DomainViolation(f"sizes must be ascending, got {sizes}")
    if routes is None:
        routes = routes_for_family(spec_template.family)
    if column is None:
        first = next((r for r in ROUTE_ORDER if r in routes), None)
        if first is None:
            raise DomainViolation("no susceptibility route requested for scaling")
        column = f"chi23_{first}"
    rows = []
    for n in sizes:
        spec_n = dataclasses.replace(spec_template, n=n)
        records = run_sweep(spec_n, grid, routes, delta=delta, fd_step=fd_step,
                            solver=solver, seed=seed, threads=threads)
        peak = find_pseudo_critical(records, column)
        rows.append(ScalingRow(n, peak.param_star, peak.chi_star,
                               peak.grid_resolution))
    violations = []
    for prev, cur in zip(rows, rows[1:]):
        if cur.param_star <= prev.param_star:
            violations.append(
                f"param_star not increasing: N={prev.n} -> {cur.n} "
                f"({prev.param_star!r} -> {cur.param_star!r})")
        if cur.chi_star <= prev.chi_star:
            violations.append(
                f"chi_star not increasing: N={prev.n} -> {cur.n} "
                f"({prev.chi_star!r} -> {cur.chi_star!r})")
    return rows, violations


def csv_header(routes) -> list[str]:
    cols = ["param", "e0", "de0", "d2e0", "c12", "c23"]
    for route in ROUTE_ORDER:
        if route in routes:
            cols += [f"chi12_{route}", f"chi23_{route}"]
    cols += ["chi_global", "gap", "flags"]
    return cols


def _format_cell(value) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


def record_row(record: SweepRecord, routes) -> list:
    row = [record.param, record.e0, record.de0, record.d2e0,
           record.c12, record.c23]
    for route in ROUTE_ORDER:
        if route in routes:
            row += [record.chi12.get(route), record.chi23.get(route)]
    row += [record.chi_global, record.gap]
    return row


def write_csv(records: list[SweepRecord], routes, fh) -> None:
    """Delimited output: 17 significant digits, semicolon-joined flags."""
    fh.write(",".join(csv_header(routes)) + "\n")
    for rec in records:
        cells = [_format_cell(v) for v in record_row(rec, routes)]
        cells.append(";".join(rec.flags))
        fh.write(",".join(cells) + "\n")


def sweep_meta(spec: ModelSpec, routes, delta: float, fd_step: float,
               solver: str, seed: int, threads: int = 1,
               extra: dict | None = None) -> dict:
    """Reproducibility metadata block for JSON output."""
    meta = {
        "model": {
            "family": spec.family,
            "n": spec.n,
            "spin_s": spec.spin_s,
            "j1": spec.j1,
            "j2": spec.j2,
        },
        "routes": [r for r in ROUTE_ORDER + (GLOBAL_ROUTE,) if r in routes],
        "delta": delta,
        "fd_step": fd_step,
        "solver": solver,
        "seed": seed,
        "threads": threads,
        "version": VERSION,
    }
    if extra:
        meta.update(extra)
    return meta


def _jsonable(value):
    if value is None:
        return None
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(records: list[SweepRecord], routes, meta: dict, fh) -> None:
    """JSON output mirroring the CSV columns, with NaN mapped to null."""
    header = csv_header(routes)
    rows = []
    for rec in records:
        values = [_jsonable(v) for v in record_row(rec, routes)]
        entry = dict(zip(header[:-1], values))
        entry["flags"] = list(rec.flags)
        rows.append(entry)
    json.dump({"meta": meta, "records": rows}, fh, indent=2, allow_nan=False)
    fh.write("\n")
