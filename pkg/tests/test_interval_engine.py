import io
import math
import numpy as np
import numpy.testing as npt
import pytest
import core.interval_engine as engine
from core.interval_engine import (
    build_grid,
    check_design,
    grid_nodes,
    interpolate_knots,
    interpolate_pair,
    known_ci,
    load_grid,
    plugin_ci,
    save_grid,
)
from core.kg_optimizer import assess_pair
from core.panel_core import (
    design_summary,
    estimate_variance_components,
    fixed_effects_interval,
    hausman_stat,
    rho_of_delta,
)
from core.spline_funcs import eval_even, eval_odd, is_standard, pair_vector
from models.optimizer import KGContext
from utils.consts import RHO_GRID
from utils.errors import GridFormatError, GridMismatch


@pytest.fixture
def panel(make_panel):
    return make_panel(N=60, T=4, gamma=2.0, delta=3.0)


@pytest.fixture
def grid(panel, toy_grid):
    return toy_grid(panel)


class TestGridNodes:
    def test_nodes_follow_rho_grid(self, make_design):
        ds = design_summary(make_design(N=50, T=4))
        nodes = grid_nodes(ds)
        assert nodes[0] == (0.0, math.inf)
        for (rho, delta), target in zip(nodes[1:], RHO_GRID[1:]):
            if delta > 0:
                assert rho == target
                npt.assert_allclose(rho_of_delta(ds.r, delta, ds.T), rho)

    def test_small_ratio_clamps_to_zero(self, design_with_ratio):
        ds = design_summary(design_with_ratio(1.0, T=4))
        nodes = grid_nodes(ds)
        clamped = [n for n in nodes if n[1] == 0.0]
        assert len(clamped) == 2
        for rho, _ in clamped:
            npt.assert_allclose(rho, -math.sqrt(1.0 / 1.25))

    def test_large_ratio_has_no_clamping(self, design_with_ratio):
        ds = design_summary(design_with_ratio(100.0, T=4))
        deltas = [d for _, d in grid_nodes(ds)[1:]]
        assert all(d > 0 for d in deltas)
        assert deltas == sorted(deltas, reverse=True)


class TestBuildGrid:
    def test_structure(self, design_with_ratio, monkeypatch):
        calls = []

        def fake_select(ctx):
            calls.append(ctx.rho)
            return assess_pair(ctx, engine.standard_pair(ctx.alpha, ctx.d), 0.5)

        monkeypatch.setattr(engine, "select_phi", fake_select)
        ds = design_summary(design_with_ratio(1.0))
        grid = build_grid(ds, alpha=0.05)
        assert len(grid.entries) == 11
        assert grid.entries[0].rho == 0.0 and math.isinf(grid.entries[0].delta)
        assert is_standard(grid.entries[0].pair)
        # the two clamped entries share rho(0) and are optimized once
        assert len(calls) == len(set(calls)) == 9
        assert grid.fingerprint() == ds.fingerprint()


class TestInterpolation:
    def test_node_is_bit_identical(self, grid):
        for entry in grid.entries:
            assert interpolate_pair(grid, entry.delta) is entry.pair
            odd, even = interpolate_knots(grid, [entry.delta])
            npt.assert_array_equal(np.concatenate([odd[0], even[0]]), pair_vector(entry.pair))

    def test_midpoint_in_rho(self, grid):
        e5, e6 = grid.entries[4], grid.entries[5]
        rho = 0.5 * (e5.rho + e6.rho)
        delta = grid.r * (rho**-2 - 1) - 1 / grid.T
        pair = interpolate_pair(grid, delta)
        expected = 0.5 * (pair_vector(e5.pair) + pair_vector(e6.pair))
        npt.assert_allclose(pair_vector(pair), expected, atol=1e-12)

    def test_between_bracketing_knots(self, grid):
        e3, e4 = grid.entries[2], grid.entries[3]
        odd, even = interpolate_knots(grid, [0.5 * (e3.delta + e4.delta)])
        knots = np.concatenate([odd[0], even[0]])
        lo = np.minimum(pair_vector(e3.pair), pair_vector(e4.pair))
        hi = np.maximum(pair_vector(e3.pair), pair_vector(e4.pair))
        assert np.all(knots >= lo - 1e-15) and np.all(knots <= hi + 1e-15)

    def test_large_delta_approaches_standard(self, grid):
        pair = interpolate_pair(grid, 1e12)
        npt.assert_allclose(pair_vector(pair), pair_vector(grid.entries[0].pair), atol=1e-5)

    def test_clamps_past_last_node(self, design_with_ratio, toy_grid):
        grid = toy_grid(design_with_ratio(100.0))
        last = grid.entries[-1]
        odd, even = interpolate_knots(grid, [0.0, 0.5 * last.delta])
        for k in range(2):
            npt.assert_array_equal(np.concatenate([odd[k], even[k]]), pair_vector(last.pair))

    def test_clamped_entries_share_a_pair(self, design_with_ratio, toy_grid):
        grid = toy_grid(design_with_ratio(1.0))
        assert grid.entries[-1].delta == grid.entries[-2].delta == 0.0
        assert interpolate_pair(grid, 0.0) == grid.entries[-1].pair

    def test_negative_delta(self, grid):
        with pytest.raises(ValueError):
            interpolate_knots(grid, [-1.0])


class TestIntervals:
    def test_reverts_for_large_h(self, panel, grid):
        fit = estimate_variance_components(panel)
        # a tiny sigma makes |h| huge
        sigma = 1e-4 * fit.sigma_eps_hat
        assert abs(hausman_stat(panel, sigma, 3.0)) >= 6.0
        result = known_ci(panel, sigma, 3.0, grid)
        assert result.reverted
        assert (result.lower, result.upper) == fixed_effects_interval(panel, sigma, 0.95)

    def test_standard_grid_gives_fixed_effects_interval(self, panel, standard_grid):
        grid = standard_grid(panel)
        for delta in (0.0, 2.0, 40.0):
            result = known_ci(panel, 1.0, delta, grid)
            npt.assert_allclose(
                (result.lower, result.upper), fixed_effects_interval(panel, 1.0, 0.95), rtol=1e-13
            )

    def test_interval_formula(self, panel, grid):
        result = known_ci(panel, 1.0, 3.0, grid)
        ds = design_summary(panel)
        se = 1.0 / math.sqrt(ds.ssw)
        center = 0.5 * (result.lower + result.upper)
        npt.assert_allclose(result.upper - result.lower, 2 * result.half_width * se, rtol=1e-12)
        fe_center = 0.5 * sum(fixed_effects_interval(panel, 1.0, 0.95))
        npt.assert_allclose(center, fe_center + se * result.center_shift, rtol=1e-12)
        assert not result.reverted

    def test_plugin_equals_known_at_estimates(self, panel, grid):
        fit = estimate_variance_components(panel)
        assert plugin_ci(panel, grid) == known_ci(panel, fit.sigma_eps_hat, fit.delta_hat, grid)

    def test_endpoints_are_continuous_in_h(self, panel, grid):
        ds = design_summary(panel)
        pair = interpolate_pair(grid, 3.0)
        h = np.arange(-7.0, 7.0, 1e-4)
        lower = eval_odd(pair, h) - eval_even(pair, h)
        upper = eval_odd(pair, h) + eval_even(pair, h)
        se = 1.0 / math.sqrt(ds.ssw)
        assert np.max(np.abs(np.diff(lower * se))) < 5e-4 * se
        assert np.max(np.abs(np.diff(upper * se))) < 5e-4 * se
        at_edge = np.abs(np.abs(h) - 6.0) < 5e-5
        npt.assert_allclose(eval_even(pair, h[at_edge]), pair.z, atol=1e-3)

    def test_mismatched_grid(self, panel, make_panel, toy_grid):
        other = toy_grid(make_panel(N=61))
        with pytest.raises(GridMismatch):
            known_ci(panel, 1.0, 3.0, other)
        with pytest.raises(GridMismatch):
            check_design(other, design_summary(panel))


class TestGridFile:
    def test_round_trip(self, grid):
        buffer = io.StringIO()
        save_grid(grid, buffer)
        text = buffer.getvalue()
        assert text.splitlines()[1] == "exoci-grid v1"
        loaded = load_grid(io.StringIO(text))
        assert loaded.fingerprint() == grid.fingerprint()
        assert (loaded.alpha, loaded.d) == (grid.alpha, grid.d)
        for ours, theirs in zip(loaded.entries, grid.entries):
            assert (ours.rho, ours.delta, ours.phi_star) == (theirs.rho, theirs.delta, theirs.phi_star)
            assert ours.pair == theirs.pair
            assert ours.result.min_cp == pytest.approx(theirs.result.min_cp, abs=1e-14)

    def test_file_path(self, grid, tmp_path):
        path = str(tmp_path / "panel.grid")
        save_grid(grid, path)
        assert load_grid(path).entries[3].pair == grid.entries[3].pair

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda t: t.replace("exoci-grid v1", "exoci-grid v2"),
            lambda t: t.replace("alpha ", "level "),
            lambda t: "\n".join(t.splitlines()[:-1]),
            lambda t: t.replace("odd:", "odd", 1),
            lambda t: t.replace("even: ", "even: -1 ", 1),
        ],
    )
    def test_malformed(self, grid, mutate):
        buffer = io.StringIO()
        save_grid(grid, buffer)
        with pytest.raises(GridFormatError):
            load_grid(io.StringIO(mutate(buffer.getvalue())))

    @pytest.mark.parametrize("change", [lambda body: body[:-3], lambda body: body + body[-3:]])
    def test_entry_count(self, grid, change):
        buffer = io.StringIO()
        save_grid(grid, buffer)
        lines = buffer.getvalue().splitlines()
        head, body = lines[:8], [line for line in lines[8:] if not line.startswith("#")]
        with pytest.raises(GridFormatError, match="expected 11 entries"):
            load_grid(io.StringIO("\n".join(head + change(body))))

    def test_unbalanced_entries_are_marked(self, grid):
        buffer = io.StringIO()
        save_grid(grid, buffer)
        text = buffer.getvalue()
        assert text.count("# gain - loss = ") == len(grid.unbalanced)
        loaded = load_grid(io.StringIO(text))
        assert [e.rho for e in loaded.unbalanced] == [e.rho for e in grid.unbalanced]
        assert loaded.entries[0].result.balanced

    def test_negative_even_knot(self, grid):
        buffer = io.StringIO()
        save_grid(grid, buffer)
        lines = buffer.getvalue().splitlines()
        index = next(i for i, line in enumerate(lines) if line.startswith("even:"))
        values = lines[index].split()
        values[1] = "-0.5"
        lines[index] = " ".join(values)
        with pytest.raises(GridFormatError):
            load_grid(io.StringIO("\n".join(lines)))


@pytest.mark.slow
def test_optimized_grid_keeps_coverage(make_design):
    design = make_design(N=300, T=4, seed=8)
    grid = build_grid(design_summary(design), threads=4)
    assert len(grid.entries) == 11
    for entry in grid.entries:
        assert 0.95 - 5e-4 <= entry.result.min_cp <= 0.95 + 1.5e-3
        ctx = KGContext(entry.rho)
        assert assess_pair(ctx, entry.pair, entry.phi_star).min_cp == pytest.approx(entry.result.min_cp)
