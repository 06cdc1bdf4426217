"""Sweep engine: grids, records, flags, peaks, scaling, serialization."""

import io
import json
import math

import numpy as np
import pytest

from rfschain.errors import DomainViolation, NoInteriorPeak, SpecMismatch
from rfschain.models import ALPHA_MIN, BB, DIMER, MIXED, ModelSpec
from rfschain.sweep import (
    GLOBAL_ROUTE,
    ROUTE_ORDER,
    PeakEstimate,
    SweepRecord,
    csv_header,
    find_pseudo_critical,
    record_value,
    routes_for_family,
    run_sweep,
    scaling_table,
    sweep_meta,
    write_csv,
    write_json,
)

ALL_DIMER_ROUTES = ROUTE_ORDER + (GLOBAL_ROUTE,)


def synth_records(params, values):
    """Minimal records exposing one chi23_energy column."""
    return [
        SweepRecord(p, 0.0, 0.0, 0.0, 0.0, 0.0, {}, {"energy": v},
                    None, 1.0, (), math.nan)
        for p, v in zip(params, values)
    ]


def test_route_tables():
    assert routes_for_family(DIMER) == frozenset(ALL_DIMER_ROUTES)
    assert routes_for_family(MIXED) == frozenset(ALL_DIMER_ROUTES)
    assert routes_for_family(BB) == frozenset({"uhlmann", GLOBAL_ROUTE})


def test_unsupported_route_rejected():
    with pytest.raises(SpecMismatch):
        run_sweep(ModelSpec(BB, 4, 0.2), [0.1, 0.2, 0.3], routes=("correlator",))


def test_grid_validation():
    spec = ModelSpec(DIMER, 4, 0.5)
    with pytest.raises(DomainViolation):
        run_sweep(spec, [])
    with pytest.raises(DomainViolation):
        run_sweep(spec, [0.5, 0.4])
    with pytest.raises(DomainViolation):
        run_sweep(spec, [0.4, 0.4])
    with pytest.raises(DomainViolation):
        run_sweep(spec, [[0.4, 0.5]])


def test_healthy_dimer_sweep():
    spec = ModelSpec(DIMER, 6, 0.5)
    grid = np.linspace(0.3, 0.9, 7)
    records = run_sweep(spec, grid, solver="dense")
    assert [r.param for r in records] == list(grid)
    for rec in records:
        assert rec.flags == ()
        assert rec.e0 < 0.0 and rec.de0 < 0.0 and rec.d2e0 < 0.0
        assert -1.0 < rec.c12 < rec.c23 < 1.0 / 3.0
        assert rec.gap > 0.1
        # four pair routes agree closely; their spread is tracked
        for table in (rec.chi12, rec.chi23):
            vals = [table[r] for r in ROUTE_ORDER]
            assert all(np.isfinite(vals))
            assert max(vals) - min(vals) < 1e-4 * max(vals)
        assert rec.route_spread < 1e-4
        assert rec.chi_global is not None and rec.chi_global > 0.0
    # energies move monotonically with the coupling
    e0s = [r.e0 for r in records]
    assert all(b < a for a, b in zip(e0s, e0s[1:]))


def test_energy_only_sweep_has_single_route():
    records = run_sweep(ModelSpec(DIMER, 4, 0.5), [0.4, 0.5, 0.6],
                        routes=("energy",), solver="dense")
    for rec in records:
        assert set(rec.chi12) == {"energy"}
        assert rec.chi_global is None
        assert math.isnan(rec.route_spread)  # spread needs two routes


def test_empty_routes_record_shape():
    records = run_sweep(ModelSpec(DIMER, 4, 0.5), [0.4, 0.5, 0.6],
                        routes=(), solver="dense")
    for rec in records:
        assert rec.chi12 == {} and rec.chi23 == {}
        assert rec.chi_global is None
        assert math.isnan(rec.route_spread)


def test_clipping_warns_flags_and_dedupes():
    spec = ModelSpec(DIMER, 4, 0.5)
    with pytest.warns(UserWarning, match="clipped"):
        records = run_sweep(spec, [0.0002, 0.0008], routes=("energy",),
                            solver="dense")
    assert len(records) == 1  # both points collapse onto the domain edge
    assert records[0].param == ALPHA_MIN
    assert "clipped" in records[0].flags

    with pytest.warns(UserWarning, match="clipped"):
        records = run_sweep(spec, [0.0005, 0.5], routes=("energy",),
                            solver="dense")
    assert [r.param for r in records] == [ALPHA_MIN, 0.5]
    assert "clipped" in records[0].flags
    assert "clipped" not in records[1].flags


def test_two_site_chain_flags_domain_edges():
    """N=2 pins both correlators at exactly -1: the closed-form routes
    fail cleanly while the fidelity-difference routes return zero."""
    records = run_sweep(ModelSpec(DIMER, 2, 0.5), [0.4, 0.5, 0.6],
                        solver="dense")
    for rec in records:
        assert np.isclose(rec.c12, -1.0, atol=1e-14)
        assert np.isclose(rec.c23, -1.0, atol=1e-14)
        assert "domain-edge" in rec.flags
        assert "correlator-failed:DomainViolation" in rec.flags
        assert "energy-failed:DomainViolation" in rec.flags
        assert math.isnan(rec.chi12["correlator"])
        assert math.isnan(rec.chi12["energy"])
        assert rec.chi12["uhlmann"] < 1e-6
        assert rec.chi12["spectra"] < 1e-6
        assert np.isclose(rec.gap, 1.0 + rec.param, atol=1e-12)


def test_near_degenerate_flag():
    """Pinned zero couplings give a flat spectrum at every grid point."""
    spec = ModelSpec(DIMER, 4, 0.1, j1=0.0, j2=0.0)
    records = run_sweep(spec, [0.1, 0.2], routes=("energy",), solver="dense")
    for rec in records:
        assert "near-degenerate" in rec.flags
        assert rec.gap == 0.0


def test_all_points_failing_raises():
    # 16 spins exceed the default dense cap, so every point fails
    spec = ModelSpec(DIMER, 16, 0.5)
    with pytest.raises(DomainViolation, match="every grid point failed"):
        run_sweep(spec, [0.4, 0.5], routes=("energy",), solver="dense")


def test_threaded_sweep_is_byte_identical():
    spec = ModelSpec(DIMER, 6, 0.5)
    grid = np.linspace(0.4, 0.8, 4)
    serial = run_sweep(spec, grid, solver="lanczos", seed=0, threads=1)
    threaded = run_sweep(spec, grid, solver="lanczos", seed=0, threads=3)
    buf_a, buf_b = io.StringIO(), io.StringIO()
    write_csv(serial, ALL_DIMER_ROUTES, buf_a)
    write_csv(threaded, ALL_DIMER_ROUTES, buf_b)
    assert buf_a.getvalue() == buf_b.getvalue()


def test_repeat_run_deterministic():
    spec = ModelSpec(MIXED, 4, 0.6, spin_s=1.0)
    grid = [0.5, 0.6, 0.7]
    a = run_sweep(spec, grid, seed=1)
    b = run_sweep(spec, grid, seed=1)
    for ra, rb in zip(a, b):
        assert ra == rb


def test_record_value_columns():
    records = run_sweep(ModelSpec(DIMER, 4, 0.5), [0.4, 0.5, 0.6],
                        solver="dense")
    rec = records[1]
    assert record_value(rec, "param") == rec.param
    assert record_value(rec, "e0") == rec.e0
    assert record_value(rec, "c23") == rec.c23
    assert record_value(rec, "gap") == rec.gap
    assert record_value(rec, "chi12_uhlmann") == rec.chi12["uhlmann"]
    assert record_value(rec, "chi23_energy") == rec.chi23["energy"]
    assert record_value(rec, "chi_global") == rec.chi_global
    for bogus in ("chi12_bogus", "spread", "flags"):
        with pytest.raises(DomainViolation):
            record_value(rec, bogus)


def test_peak_refinement_exact_parabola():
    params = np.round(np.arange(0.3, 0.91, 0.1), 10)
    values = 1.0 - (params - 0.55) ** 2
    peak = find_pseudo_critical(synth_records(params, values), "chi23_energy")
    assert np.isclose(peak.param_star, 0.55, atol=1e-12)
    assert np.isclose(peak.chi_star, 1.0, atol=1e-12)
    assert np.isclose(peak.grid_resolution, 0.1, atol=1e-12)


def test_peak_tie_breaks_low_and_refines_between():
    peak = find_pseudo_critical(
        synth_records([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 1.0, 0.0]),
        "chi23_energy")
    assert np.isclose(peak.param_star, 1.5, atol=1e-12)
    assert peak.chi_star > 1.0  # parabola apex above the tied samples


def test_peak_guards():
    with pytest.raises(NoInteriorPeak):
        find_pseudo_critical(
            synth_records([0.0, 1.0, 2.0], [0.0, 0.5, 1.0]), "chi23_energy")
    with pytest.raises(DomainViolation):
        find_pseudo_critical(synth_records([0.0, 1.0], [0.0, 1.0]),
                             "chi23_energy")
    with pytest.raises(DomainViolation):
        find_pseudo_critical(
            synth_records([0.0, 1.0, 2.0], [math.nan] * 3), "chi23_energy")


def test_peak_nan_neighbor_falls_back_to_grid_point():
    peak = find_pseudo_critical(
        synth_records([0.0, 1.0, 2.0, 3.0, 4.0],
                      [math.nan, 1.0, 0.9, 0.8, math.nan]),
        "chi23_energy")
    assert peak == PeakEstimate(1.0, 1.0, 1.0)


def test_scaling_table_trends():
    spec = ModelSpec(DIMER, 4, 0.5)
    grid = np.linspace(0.3, 0.9, 13)
    rows, violations = scaling_table(spec, [4, 6], grid, routes=("energy",),
                                     solver="dense")
    assert violations == []
    assert [row.n for row in rows] == [4, 6]
    # 4-site peak sits at the symmetric point of the closed form
    assert np.isclose(rows[0].param_star, 0.5, atol=1e-9)
    assert np.isclose(rows[0].chi_star, 1.0 / 3.0, atol=1e-6)
    # larger chains peak later and higher
    assert rows[1].param_star > rows[0].param_star
    assert rows[1].chi_star > rows[0].chi_star
    assert rows[0].grid_resolution == pytest.approx(0.05)


def test_scaling_table_guards():
    spec = ModelSpec(DIMER, 4, 0.5)
    grid = np.linspace(0.3, 0.9, 7)
    with pytest.raises(DomainViolation):
        scaling_table(spec, [6, 4], grid)
    with pytest.raises(DomainViolation):
        scaling_table(spec, [4, 6], grid, routes=(GLOBAL_ROUTE,))


def test_global_peak_tracks_pair_peak_at_n12():
    """On the 12-spin chain the full-state and inter-bond maxima land on
    the same grid point and refine to within one 0.02 step."""
    grid = np.round(np.arange(0.90, 1.041, 0.02), 10)
    records = run_sweep(ModelSpec(DIMER, 12, 1.0), grid,
                        routes=("energy", GLOBAL_ROUTE), solver="lanczos")
    gvals = [record_value(r, "chi_global") for r in records]
    evals = [record_value(r, "chi23_energy") for r in records]
    assert int(np.nanargmax(gvals)) == int(np.nanargmax(evals))
    peak_g = find_pseudo_critical(records, "chi_global")
    peak_e = find_pseudo_critical(records, "chi23_energy")
    assert abs(peak_g.param_star - peak_e.param_star) <= 0.02


def test_csv_layout_and_roundtrip():
    routes = ("energy", GLOBAL_ROUTE)
    assert csv_header(routes) == [
        "param", "e0", "de0", "d2e0", "c12", "c23",
        "chi12_energy", "chi23_energy", "chi_global", "gap", "flags"]
    records = run_sweep(ModelSpec(DIMER, 4, 0.5), [0.4, 0.5, 0.6],
                        routes=routes, solver="dense")
    buf = io.StringIO()
    write_csv(records, routes, buf)
    lines = buf.getvalue().strip().split("\n")
    assert len(lines) == 4
    cells = lines[2].split(",")
    # 17 significant digits survive the float round trip exactly
    assert float(cells[0]) == records[1].param
    assert float(cells[1]) == records[1].e0
    assert float(cells[8]) == records[1].chi_global
    assert cells[10] == ""  # no flags on a healthy point


def test_csv_nan_none_and_flags():
    full = ROUTE_ORDER
    records = run_sweep(ModelSpec(DIMER, 2, 0.5), [0.4, 0.5, 0.6],
                        routes=full, solver="dense")
    buf = io.StringIO()
    write_csv(records, full, buf)
    header, row = buf.getvalue().strip().split("\n")[:2]
    cols = header.split(",")
    cells = row.split(",")
    assert cells[cols.index("chi12_correlator")] == "nan"
    assert cells[cols.index("chi12_energy")] == "nan"
    assert cells[cols.index("chi_global")] == ""  # global not requested
    flags = cells[cols.index("flags")].split(";")
    assert "domain-edge" in flags
    assert "energy-failed:DomainViolation" in flags


def test_json_output():
    routes = ALL_DIMER_ROUTES
    records = run_sweep(ModelSpec(DIMER, 2, 0.5), [0.4, 0.5, 0.6],
                        routes=routes, solver="dense")
    meta = sweep_meta(ModelSpec(DIMER, 2, 0.5), routes, 1e-4, 1e-4,
                      "dense", 0, threads=1, extra={"grid_steps": 3})
    buf = io.StringIO()
    write_json(records, routes, meta, buf)
    doc = json.loads(buf.getvalue())
    assert doc["meta"]["model"]["family"] == DIMER
    assert doc["meta"]["routes"] == list(ALL_DIMER_ROUTES)
    assert doc["meta"]["solver"] == "dense"
    assert doc["meta"]["grid_steps"] == 3
    assert "version" in doc["meta"]
    assert len(doc["records"]) == 3
    first = doc["records"][0]
    assert first["chi12_correlator"] is None  # NaN maps to null
    assert isinstance(first["flags"], list)
    assert "domain-edge" in first["flags"]
    assert first["param"] == 0.4


def test_sweep_meta_canonical_route_order():
    meta = sweep_meta(ModelSpec(DIMER, 6, 0.5),
                      {"global", "energy", "uhlmann"}, 1e-4, 1e-4,
                      "lanczos", 0)
    assert meta["routes"] == ["uhlmann", "energy", "global"]
