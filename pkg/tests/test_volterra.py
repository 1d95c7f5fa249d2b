"""Solver tests built around independent oracles.

The main instruments are manufactured solutions (pick x, integrate the kernel
analytically to get f, solve, compare) and forward/inverse roundtrips on
random data. The quadrature is first order, so convergence tests check the
observed order from grid refinement rather than absolute error.
"""

import math

import numpy as np
import pytest

from voltgrid import (
    BandPartition,
    DataError,
    Grid,
    KernelSpec,
    SolverError,
    estimate_order,
    forward_apply,
    kernel_from_config,
    segment_cells,
    solve_apf,
)
from voltgrid.volterra import read_node_series, write_node_series

from conftest import identity_kernel, two_band_kernel


class TestGrid:
    def test_nodes_pin_endpoints(self):
        grid = Grid(2.0, 8)
        nodes = grid.nodes()
        assert nodes[0] == 0.0
        assert nodes[-1] == 2.0
        assert len(nodes) == 9
        assert grid.step == 0.25

    def test_validation(self):
        with pytest.raises(DataError, match="at least 2"):
            Grid(1.0, 1)
        with pytest.raises(DataError, match="positive"):
            Grid(0.0, 4)


class TestBandPartition:
    def test_proportional_fractions_validated(self):
        with pytest.raises(DataError, match="in \\(0,1\\)"):
            BandPartition.proportional([0.0])
        with pytest.raises(DataError, match="increasing"):
            BandPartition.proportional([0.6, 0.4])

    def test_boundary_values_shape(self):
        part = BandPartition.proportional([0.25, 0.75])
        bm = part.boundary_values([1.0, 2.0])
        assert bm.shape == (4, 2)
        np.testing.assert_allclose(bm[:, 1], [0.0, 0.5, 1.5, 2.0])

    def test_validate_on_requires_origin(self):
        part = BandPartition.from_table([0.0, 1.0], [[0.1, 0.5]])
        with pytest.raises(DataError, match="origin"):
            part.validate_on(Grid(1.0, 4))

    def test_validate_on_requires_ordering(self):
        # second boundary dips below the first for t > 0.5
        part = BandPartition.from_table(
            [0.0, 0.5, 1.0],
            [[0.0, 0.2, 0.4], [0.0, 0.3, 0.1]],
        )
        with pytest.raises(DataError, match="out of order at node"):
            part.validate_on(Grid(1.0, 4))

    def test_table_boundaries_interpolate(self):
        part = BandPartition.from_table([0.0, 2.0], [[0.0, 1.0]])
        np.testing.assert_allclose(part.boundary_values([0.5, 1.0])[1], [0.25, 0.5])


class TestSegmentCells:
    def test_single_band_returns_grid_cells(self):
        grid = Grid(1.0, 10)
        cells = segment_cells(0.3, grid, BandPartition())
        assert [band for band, _ in cells] == [1, 1, 1]
        np.testing.assert_allclose(
            [edge for _, frag in cells for edge in frag],
            [0.0, 0.1, 0.1, 0.2, 0.2, 0.3],
        )

    def test_boundary_splits_fragment(self):
        grid = Grid(1.0, 10)
        cells = segment_cells(0.3, grid, BandPartition.proportional([0.5]))
        bands = [band for band, _ in cells]
        assert bands == [1, 1, 2, 2]
        # alpha_1(0.3) = 0.15 falls inside the second grid cell
        assert cells[1][1] == pytest.approx((0.1, 0.15))
        assert cells[2][1] == pytest.approx((0.15, 0.2))

    def test_fragments_tile_the_interval(self):
        grid = Grid(3.0, 17)
        part = BandPartition.proportional([0.2, 0.55, 0.9])
        for t in grid.nodes()[1:]:
            cells = segment_cells(float(t), grid, part)
            widths = [hi - lo for _, (lo, hi) in cells]
            assert all(w > 0 for w in widths)
            assert math.fsum(widths) == pytest.approx(t, rel=1e-14)
            edges = [edge for _, (lo, hi) in cells for edge in (lo, hi)]
            assert edges == sorted(edges)
            assert [band for band, _ in cells] == sorted(band for band, _ in cells)


class TestForwardApply:
    def test_constant_kernel_is_cumulative_sum(self):
        grid = Grid(1.0, 10)
        x = np.arange(1.0, 11.0)
        f = forward_apply(identity_kernel(), grid, x)
        np.testing.assert_allclose(f, np.concatenate([[0.0], np.cumsum(0.1 * x)]),
                                   rtol=0, atol=1e-14)

    def test_two_band_constant(self):
        # K1=1 on [0, t/2), K2=2 on [t/2, t), x==1 -> f(t) = t/2 + 2*(t/2)
        grid = Grid(1.0, 10)
        f = forward_apply(two_band_kernel(), grid, np.ones(10))
        np.testing.assert_allclose(f, 1.5 * grid.nodes(), rtol=0, atol=1e-14)

    def test_accepts_full_node_vector(self):
        grid = Grid(1.0, 10)
        x = np.linspace(1.0, 2.0, 10)
        with_ghost = np.concatenate([[99.0], x])  # node-0 value must be ignored
        np.testing.assert_array_equal(forward_apply(identity_kernel(), grid, x),
                                      forward_apply(identity_kernel(), grid, with_ghost))


class TestSolveLinear:
    def test_identity_problem_is_exact(self):
        grid = Grid(1.0, 100)
        result = solve_apf(identity_kernel(), grid, grid.nodes())
        np.testing.assert_allclose(result.x, 1.0, rtol=0, atol=1e-12)
        assert result.residual <= 1e-10

    def test_node_zero_is_extrapolated(self):
        grid = Grid(1.0, 10)
        result = solve_apf(identity_kernel(), grid, grid.nodes() ** 2)
        assert len(result.x) == 11
        assert result.x[0] == result.x[1]

    def test_roundtrip_random(self):
        rng = np.random.default_rng(7)
        grid = Grid(3.0, 128)
        for fractions in ((), (0.5,), (0.3, 0.7)):
            kernel = kernel_from_config({
                "n": len(fractions) + 1,
                "alphas": {"type": "proportional", "c": list(fractions)},
                "K": [{"type": "const", "value": 0.5 + 0.5 * (i + 1)}
                      for i in range(len(fractions) + 1)],
                "G": [{"type": "linear"}] * (len(fractions) + 1),
            })
            x = rng.normal(size=128)
            f = forward_apply(kernel, grid, x)
            back = solve_apf(kernel, grid, f)
            np.testing.assert_allclose(back.x[1:], x, rtol=0, atol=1e-10)

    def test_manufactured_sine_two_bands(self):
        # x(s) = sin s, alpha_1 = t/2, K1=1, K2=2:
        # f(t) = int_0^{t/2} sin + 2 int_{t/2}^t sin = 1 + cos(t/2) - 2 cos t
        kernel = two_band_kernel()
        f = lambda t: 1.0 + np.cos(t / 2.0) - 2.0 * np.cos(t)
        errs = []
        for n in (200, 400):
            grid = Grid(2.0, n)
            result = solve_apf(kernel, grid, f(grid.nodes()))
            errs.append(np.max(np.abs(result.x[1:] - np.sin(grid.nodes()[1:]))))
        assert errs[1] < errs[0]
        order = math.log2(errs[0] / errs[1])
        assert 0.8 <= order <= 1.2

    def test_exp_decay_kernel(self):
        # K(t,s) = e^{-(t-s)}, x==1: f(t) = 1 - e^{-t}
        kernel = kernel_from_config({
            "n": 1,
            "K": [{"type": "exp_decay", "value": 1.0, "rate": 1.0}],
            "G": [{"type": "linear"}],
        })
        errs = []
        for n in (100, 200):
            grid = Grid(1.0, n)
            f = 1.0 - np.exp(-grid.nodes())
            result = solve_apf(kernel, grid, f)
            errs.append(np.max(np.abs(result.x[1:] - 1.0)))
        assert 0.8 <= math.log2(errs[0] / errs[1]) <= 1.2

    def test_estimate_order_exact_solution(self):
        # power-of-two step keeps every quantity binary-exact, so the scheme
        # reproduces constant x with literally zero error on both grids
        order = estimate_order(identity_kernel(), lambda t: np.asarray(t, dtype=float),
                               lambda t: np.ones_like(t), 64.0, 64)
        assert order == math.inf


class TestSolveNonlinear:
    def test_cubic_response_converges(self):
        # G(s,x) = x + 0.1 x^3, x(s) = s: f(t) = t^2/2 + 0.025 t^4
        kernel = kernel_from_config({
            "n": 1,
            "K": [{"type": "const", "value": 1.0}],
            "G": [{"type": "cubic", "a": 1.0, "b": 0.1}],
        })
        errs = {}
        for n in (400, 800):
            grid = Grid(2.0, n)
            nodes = grid.nodes()
            result = solve_apf(kernel, grid, nodes ** 2 / 2.0 + 0.025 * nodes ** 4)
            errs[n] = np.max(np.abs(result.x[1:] - nodes[1:]))
        assert errs[400] <= 5e-2
        assert errs[800] <= 0.6 * errs[400]

    def test_newton_iteration_count_reported(self):
        kernel = kernel_from_config({
            "n": 1,
            "K": [{"type": "const", "value": 1.0}],
            "G": [{"type": "cubic", "a": 1.0, "b": 0.1}],
        })
        grid = Grid(2.0, 50)
        nodes = grid.nodes()
        result = solve_apf(kernel, grid, nodes ** 2 / 2.0 + 0.025 * nodes ** 4)
        iters = result.diagnostics["newton_iterations"]
        assert len(iters) == 50
        assert max(iters) <= 100

    def test_mixed_linear_and_cubic_bands(self):
        # band 1 linear, band 2 cubic; verify against a forward roundtrip
        kernel = kernel_from_config({
            "n": 2,
            "alphas": {"type": "proportional", "c": [0.4]},
            "K": [{"type": "const", "value": 1.0}, {"type": "const", "value": 0.8}],
            "G": [{"type": "linear"}, {"type": "cubic", "a": 1.0, "b": 0.2}],
        })
        grid = Grid(1.5, 96)
        x = 0.5 + 0.4 * np.sin(np.linspace(0.0, 6.0, 96))
        f = forward_apply(kernel, grid, x)
        back = solve_apf(kernel, grid, f)
        np.testing.assert_allclose(back.x[1:], x, rtol=0, atol=1e-9)

    def test_non_monotone_response_rejected(self):
        kernel = kernel_from_config({
            "n": 1,
            "K": [{"type": "const", "value": 1.0}],
            "G": [{"type": "cubic", "a": 1.0, "b": -2.0}],
        })
        grid = Grid(1.0, 10)
        with pytest.raises(DataError, match="monotone"):
            solve_apf(kernel, grid, grid.nodes())


class TestSolveErrors:
    def test_nonzero_f0_rejected(self):
        grid = Grid(1.0, 10)
        f = grid.nodes() + 1.0
        with pytest.raises(DataError, match="vanish at t=0"):
            solve_apf(identity_kernel(), grid, f)

    def test_kernel_floor_rejected(self):
        tiny = identity_kernel(1e-9)
        grid = Grid(1.0, 10)
        with pytest.raises(DataError, match="floor"):
            solve_apf(tiny, grid, np.zeros(11))

    def test_wrong_f_length(self):
        grid = Grid(1.0, 10)
        with pytest.raises(DataError, match="11"):
            solve_apf(identity_kernel(), grid, np.zeros(10))

    def test_partition_violation_is_data_error(self):
        kernel = KernelSpec(
            partition=BandPartition.from_table(
                [0.0, 1.0], [[0.0, 0.6], [0.0, 0.5]]),
            K=(lambda t, s: np.ones_like(s),) * 3,
            G=(None, None, None),
        )
        grid = Grid(1.0, 10)
        with pytest.raises(DataError, match="out of order"):
            solve_apf(kernel, grid, np.zeros(11))


class TestKernelConfig:
    def test_minimal_single_band(self):
        kernel = kernel_from_config({
            "n": 1, "K": [{"type": "const", "value": 0.92}], "G": [{"type": "linear"}],
        })
        assert kernel.n_bands == 1
        assert kernel.is_linear

    def test_lengths_must_match_n(self):
        with pytest.raises(DataError, match="K"):
            kernel_from_config({"n": 2,
                                "alphas": {"type": "proportional", "c": [0.5]},
                                "K": [{"type": "const", "value": 1.0}],
                                "G": [{"type": "linear"}] * 2})

    def test_multiband_requires_alphas(self):
        with pytest.raises(DataError, match="alphas"):
            kernel_from_config({"n": 2,
                                "K": [{"type": "const", "value": 1.0}] * 2,
                                "G": [{"type": "linear"}] * 2})

    def test_unknown_types_rejected(self):
        base = {"n": 1, "K": [{"type": "const", "value": 1.0}]}
        with pytest.raises(DataError, match="G"):
            kernel_from_config({**base, "G": [{"type": "sigmoid"}]})
        with pytest.raises(DataError, match="K"):
            kernel_from_config({"n": 1, "K": [{"type": "banana"}],
                                "G": [{"type": "linear"}]})

    def test_cubic_reduces_to_identity(self):
        kernel = kernel_from_config({
            "n": 1, "K": [{"type": "const", "value": 1.0}],
            "G": [{"type": "cubic", "a": 1.0, "b": 0.0}],
        })
        assert kernel.is_linear

    def test_table_alphas(self):
        kernel = kernel_from_config({
            "n": 2,
            "alphas": {"type": "table", "t": [0.0, 1.0], "alpha": [[0.0, 0.5]]},
            "K": [{"type": "const", "value": 1.0}] * 2,
            "G": [{"type": "linear"}] * 2,
        })
        grid = Grid(1.0, 16)
        x = np.linspace(0.5, 1.5, 16)
        f = forward_apply(kernel, grid, x)
        back = solve_apf(kernel, grid, f)
        np.testing.assert_allclose(back.x[1:], x, rtol=0, atol=1e-10)


class TestNodeSeriesIO:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "x.csv"
        t = np.linspace(0.0, 1.0, 11)
        values = np.sin(t)
        write_node_series(path, t, values)
        t2, v2 = read_node_series(path)
        np.testing.assert_allclose(t2, t, rtol=0, atol=1e-12)
        np.testing.assert_allclose(v2, values, rtol=0, atol=1e-12)
        header = path.read_text().splitlines()[0]
        assert header == "t,value"
