"""First-kind Volterra solver with a piecewise kernel.

The model equation is

    integral_0^t  K(t, s, x(s)) ds = f(t),        0 <= t <= T,  f(0) = 0,

where the kernel is given piecewise on n time-dependent bands: band i covers
``boundary_{i-1}(t) < s < boundary_i(t)`` with ``boundary_0 = 0`` and
``boundary_n(t) = t``, and contributes ``K_i(t, s) * G_i(s, x(s))``.

Discretization is a product right-rectangle rule on a uniform grid. Each grid
cell ``[t_{k-1}, t_k]`` is intersected with the bands at the current node
``t_j``; every fragment is integrated as

    width * K_i(t_j, b) * G_i(b, x_k),   b = fragment right endpoint,

with the unknown sampled at the parent cell's right node ``x_k``. All
fragments of the final grid cell carry the not-yet-known ``x_j`` (a band
boundary can cut that cell, so there may be several), which keeps the system
lower triangular with exactly one unknown per step: identity responses give a
forward substitution, anything else a scalar root-find per node. The rule is
first order; ``estimate_order`` measures that against manufactured solutions.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataError, SolverError
from .ioutil import fmt12

DEFAULT_KERNEL_FLOOR = 1e-6
DEFAULT_CELL_FLOOR = 1e-8
DEFAULT_RESIDUAL_TOL = 1e-8
NEWTON_RTOL = 1e-12
NEWTON_MAX_ITER = 100
BRACKET_EXPANSIONS = 60

_BLOCK = 1024


@dataclass(frozen=True)
class Grid:
    """Uniform nodes t_j = j*h, j = 0..n_cells, with h = horizon/n_cells."""

    horizon: float
    n_cells: int

    def __post_init__(self):
        if self.horizon <= 0:
            raise DataError(f"grid horizon must be positive, got {self.horizon}")
        if self.n_cells < 2:
            raise DataError(f"grid needs at least 2 cells, got {self.n_cells}")

    @property
    def step(self) -> float:
        return self.horizon / self.n_cells

    def nodes(self) -> np.ndarray:
        # linspace pins the endpoints, so nodes[-1] == horizon exactly
        return np.linspace(0.0, self.horizon, self.n_cells + 1)


class BandPartition:
    """Moving boundaries that split [0, t] into ordered bands.

    ``boundaries`` holds the n-1 interior curves as vectorized callables of t;
    the outer pair (0 and t itself) is implicit. For every grid node t > 0 the
    values must satisfy 0 < b_1(t) < ... < b_{n-1}(t) < t, and every boundary
    must pass through the origin.
    """

    def __init__(self, boundaries=()):
        self.boundaries = tuple(boundaries)

    @property
    def n_bands(self) -> int:
        return len(self.boundaries) + 1

    @classmethod
    def proportional(cls, fractions) -> "BandPartition":
        """Boundaries c_i * t with 0 < c_1 < ... < c_{n-1} < 1."""
        cs = [float(c) for c in fractions]
        if any(not 0.0 < c < 1.0 for c in cs):
            raise DataError(f"proportional fractions must lie in (0,1), got {cs}")
        if any(a >= b for a, b in zip(cs, cs[1:])):
            raise DataError(f"proportional fractions must be strictly increasing, got {cs}")
        return cls(tuple((lambda t, c=c: c * np.asarray(t, dtype=float)) for c in cs))

    @classmethod
    def from_table(cls, t_knots, boundary_rows) -> "BandPartition":
        """Boundaries tabulated at t_knots, linearly interpolated between."""
        knots = np.asarray(t_knots, dtype=float)
        if knots.ndim != 1 or len(knots) < 2 or np.any(np.diff(knots) <= 0):
            raise DataError("boundary table needs strictly increasing t knots")
        rows = [np.asarray(r, dtype=float) for r in boundary_rows]
        for r in rows:
            if r.shape != knots.shape:
                raise DataError("each boundary row must match the t knots in length")
        return cls(tuple(
            (lambda t, r=r: np.interp(np.asarray(t, dtype=float), knots, r))
            for r in rows
        ))

    def boundary_values(self, t) -> np.ndarray:
        """Stacked boundary positions at times t: shape (n_bands+1, len(t)).

        Row 0 is the zero curve, row n_bands is t itself.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        rows = [np.zeros_like(t)]
        for b in self.boundaries:
            rows.append(np.broadcast_to(np.asarray(b(t), dtype=float), t.shape).copy())
        rows.append(t.copy())
        return np.vstack(rows)

    def validate_on(self, grid: Grid) -> np.ndarray:
        """Check the ordering invariant on every node; return boundary matrix
        for nodes 1..N."""
        at_zero = self.boundary_values(np.zeros(1))
        scale = max(1.0, grid.horizon)
        if np.any(np.abs(at_zero) > 1e-12 * scale):
            raise DataError("every band boundary must pass through the origin")
        nodes = grid.nodes()
        bm = self.boundary_values(nodes[1:])
        gaps = np.diff(bm, axis=0)
        bad = np.argwhere(gaps <= 0.0)
        if bad.size:
            row, col = bad[0]
            raise DataError(
                f"band boundaries out of order at node {col + 1} "
                f"(t={fmt12(nodes[col + 1])}): boundary {row} does not stay "
                f"below boundary {row + 1}"
            )
        return bm


@dataclass(frozen=True)
class KernelSpec:
    """Piecewise kernel: per band an efficiency factor K_i(t, s) and a
    response G_i(s, x).

    A ``None`` response entry means the identity G(s, x) = x; when every band
    is the identity the solve reduces to a triangular linear system. Supplied
    callables must accept numpy arrays. ``response_prime`` may carry dG/dx
    callables for the nonlinear path; missing entries fall back to a central
    difference.
    """

    partition: BandPartition
    K: tuple
    G: tuple
    response_prime: tuple | None = None
    kernel_floor: float = DEFAULT_KERNEL_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "K", tuple(self.K))
        object.__setattr__(self, "G", tuple(self.G))
        n = self.partition.n_bands
        if len(self.K) != n:
            raise DataError(f"expected {n} efficiency factors, got {len(self.K)}")
        if len(self.G) != n:
            raise DataError(f"expected {n} response functions, got {len(self.G)}")
        prime = self.response_prime
        if prime is None:
            prime = (None,) * n
        prime = tuple(prime)
        if len(prime) != n:
            raise DataError(f"expected {n} response derivatives, got {len(prime)}")
        object.__setattr__(self, "response_prime", prime)
        if self.kernel_floor <= 0:
            raise DataError(f"kernel_floor must be positive, got {self.kernel_floor}")

    @property
    def n_bands(self) -> int:
        return self.partition.n_bands

    @property
    def g_linear(self) -> tuple:
        """Per-band flag: True where the response is the identity."""
        return tuple(g is None for g in self.G)

    @property
    def is_linear(self) -> bool:
        return all(g is None for g in self.G)


@dataclass(frozen=True)
class SolveResult:
    grid: Grid
    x: np.ndarray
    residual: float
    diagnostics: dict = field(default_factory=dict)


def _check_kernel_floor(kernel: KernelSpec, grid: Grid) -> np.ndarray:
    """|K_n(t,t)| must clear the floor on every node; returns K_n(t_j,t_j)."""
    nodes = grid.nodes()
    knn = np.asarray(kernel.K[-1](nodes, nodes), dtype=float)
    knn = np.broadcast_to(knn, nodes.shape)
    small = np.abs(knn) < kernel.kernel_floor
    if np.any(small):
        j = int(np.argmax(small))
        raise DataError(
            f"final-band efficiency factor is {fmt12(knn[j])} at t={fmt12(nodes[j])}, "
            f"below the floor {kernel.kernel_floor:g}; the marching solve would divide by it"
        )
    return knn


def segment_cells(t_j: float, grid: Grid, partition: BandPartition):
    """Cells of [0, t_j]: grid cells intersected with the bands at t_j.

    Returns an ordered list of ``(band_index, (a, b))`` with 1-based band
    indices; zero-width fragments (a boundary sitting exactly on a node) are
    dropped. Reference implementation for the vectorized weight assembly.
    """
    h = grid.step
    j = int(round(t_j / h))
    if j < 1 or j > grid.n_cells or abs(t_j - j * h) > 1e-9 * max(1.0, grid.horizon):
        raise DataError(f"t={t_j!r} is not a positive grid node (h={fmt12(h)})")
    nodes = grid.nodes()
    t_j = float(nodes[j])

    bounds = partition.boundary_values(np.array([t_j]))[:, 0]
    if np.any(np.diff(bounds) <= 0.0):
        raise DataError(f"band boundaries out of order at node {j} (t={fmt12(t_j)})")

    tol = 1e-13 * max(1.0, t_j)
    points = np.unique(np.concatenate([nodes[:j + 1], bounds]))
    points = points[(points > -tol) & (points < t_j + tol)]
    cells = []
    for a, b in zip(points, points[1:]):
        if b - a <= tol:
            continue
        mid = 0.5 * (a + b)
        band = int(np.searchsorted(bounds, mid, side="left"))
        cells.append((band, (float(a), float(b))))
    total = math.fsum(b - a for _, (a, b) in cells)
    if abs(total - t_j) > 1e-12 * max(1.0, t_j):
        raise SolverError(f"cell partition of [0, {fmt12(t_j)}] lost width {fmt12(t_j - total)}")
    return cells


def _node_values(x, n_cells: int) -> np.ndarray:
    """Accept values at nodes 1..N either bare (length N) or with a node-0
    companion (length N+1, first entry ignored)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError("node values must be one-dimensional")
    if len(x) == n_cells + 1:
        return x[1:]
    if len(x) == n_cells:
        return x
    raise DataError(f"expected {n_cells} or {n_cells + 1} node values, got {len(x)}")


def _band_coefficients(kernel, nodes, bm, rows, n_cols):
    """Per band: fragment quadrature coefficients for a block of rows.

    Row r stands for node r+1, column c for grid cell [nodes[c], nodes[c+1]]
    (unknown x_{c+1}). Yields (coef, right_edge) matrices of shape
    (len(rows), n_cols); coef is width * K_i(t_row, right_edge) and is zero
    wherever the band misses the cell.
    """
    t_row = nodes[rows.start + 1:rows.stop + 1][:, None]
    t_left = nodes[:n_cols][None, :]
    t_right = nodes[1:n_cols + 1][None, :]
    for i in range(kernel.n_bands):
        lo = bm[i, rows][:, None]
        hi = bm[i + 1, rows][:, None]
        right = np.minimum(t_right, hi)
        width = right - np.maximum(t_left, lo)
        np.clip(width, 0.0, None, out=width)
        # keep K evaluations inside the band even for empty fragments
        safe_right = np.maximum(right, lo)
        coef = width * np.asarray(kernel.K[i](t_row, safe_right), dtype=float)
        yield coef, safe_right


def _apply_response(g, s, x):
    return x if g is None else np.asarray(g(s, x), dtype=float)


def forward_apply(kernel: KernelSpec, grid: Grid, x) -> np.ndarray:
    """Direct problem: quadrature of the kernel against known node values.

    Exact oracle for the solver: ``solve_apf(forward_apply(x)) == x`` for
    identity responses, because both sides use the same cell decomposition.
    """
    n = grid.n_cells
    xs = _node_values(x, n)
    nodes = grid.nodes()
    bm = kernel.partition.validate_on(grid)
    f = np.zeros(n + 1)
    for a in range(0, n, _BLOCK):
        b = min(a + _BLOCK, n)
        rows = slice(a, b)
        acc = np.zeros(b - a)
        for g, (coef, right) in zip(kernel.G, _band_coefficients(kernel, nodes, bm, rows, b)):
            acc += (coef * _apply_response(g, right, xs[None, :b])).sum(axis=1)
        f[a + 1:b + 1] = acc
    return f


def _last_cell_profile(kernel, grid, bm):
    """Unknown-cell coefficients for every node.

    For node j the unknown x_j multiplies every fragment of the final grid
    cell [t_{j-1}, t_j] (a boundary may split it). Returns the per-band
    coefficient and evaluation-point arrays, shape (n_bands, N), plus the
    fragment widths for diagnostics.
    """
    nodes = grid.nodes()
    t_left = nodes[:-1]
    t_right = nodes[1:]
    n = grid.n_cells
    coefs = np.zeros((kernel.n_bands, n))
    rights = np.zeros((kernel.n_bands, n))
    widths = np.zeros((kernel.n_bands, n))
    for i in range(kernel.n_bands):
        lo = bm[i]
        hi = bm[i + 1]
        right = np.minimum(t_right, hi)
        width = np.clip(right - np.maximum(t_left, lo), 0.0, None)
        safe_right = np.maximum(right, lo)
        coefs[i] = width * np.asarray(kernel.K[i](t_right, safe_right), dtype=float)
        rights[i] = safe_right
        widths[i] = width
    return coefs, rights, widths


def _degenerate_threshold(kernel, knn):
    # reduces to "fragment width < cell_floor*h" when one band owns the cell
    return np.maximum(kernel.kernel_floor, np.abs(knn[1:]))


def _check_monotone_response(kernel, grid, cap: float) -> None:
    """Sampled finite-difference sign check of G_n over the solve bracket.

    The x samples are geometric so sign flips near zero are resolved even
    when the bracket is wide."""
    g = kernel.G[-1]
    if g is None:
        return
    nodes = grid.nodes()
    s_samples = nodes[:: max(1, len(nodes) // 33)]
    span = min(max(cap, 10.0), 1e9)
    half = np.geomspace(span * 1e-9, span, 33)
    xs = np.concatenate([-half[::-1], [0.0], half])
    vals = np.asarray(g(s_samples[:, None], xs[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (len(s_samples), len(xs)))
    diffs = np.diff(vals, axis=1)
    if not (np.all(diffs > 0.0) or np.all(diffs < 0.0)):
        raise DataError(
            "final-band response is not strictly monotone in x over "
            f"[-{fmt12(span)}, {fmt12(span)}]; the per-node root is not unique"
        )


def _solve_linear(kernel, grid, f, knn, cell_floor):
    n = grid.n_cells
    h = grid.step
    nodes = grid.nodes()
    bm = kernel.partition.validate_on(grid)
    thresh = cell_floor * h * _degenerate_threshold(kernel, knn)
    x = np.zeros(n)
    for a in range(0, n, _BLOCK):
        b = min(a + _BLOCK, n)
        rows = slice(a, b)
        blk = np.zeros((b - a, b))
        for coef, _ in _band_coefficients(kernel, nodes, bm, rows, b):
            blk += coef
        diag = np.diagonal(blk[:, a:b])
        tiny = np.abs(diag) < thresh[a:b]
        if np.any(tiny):
            j = a + int(np.argmax(tiny)) + 1
            raise SolverError(
                f"degenerate last cell at node {j}: unknown coefficient "
                f"{fmt12(diag[int(np.argmax(tiny))])} is below {fmt12(thresh[j - 1])}"
            )
        rhs = f[a + 1:b + 1] - blk[:, :a] @ x[:a]
        x[a:b] = solve_triangular(blk[:, a:b], rhs, lower=True, check_finite=False)
    return x


def _phi_factory(active):
    """Scalar residual pieces for one node's unknown: sum_i c_i*G_i(b_i, xi)."""
    def phi(xi: float) -> float:
        total = 0.0
        for c, bpt, g, _ in active:
            total += c * (xi if g is None else float(g(bpt, xi)))
        return total

    def dphi(xi: float) -> float:
        total = 0.0
        for c, bpt, g, dg in active:
            if g is None:
                total += c
            elif dg is not None:
                total += c * float(dg(bpt, xi))
            else:
                delta = 1e-6 * max(1.0, abs(xi))
                total += c * (float(g(bpt, xi + delta)) - float(g(bpt, xi - delta))) / (2 * delta)
        return total

    return phi, dphi


def _newton_step(active, rhs, x0, cap, node):
    """Safeguarded Newton on sum_i c_i*G_i(b_i, xi) = rhs with bisection
    fallback inside a sign-change bracket."""
    phi, dphi = _phi_factory(active)
    lo, hi = -cap, cap
    rlo = phi(lo) - rhs
    rhi = phi(hi) - rhs
    expansions = 0
    while rlo * rhi > 0.0:
        expansions += 1
        if expansions > BRACKET_EXPANSIONS:
            raise SolverError(f"cannot bracket the unknown at node {node}")
        cap *= 2.0
        lo, hi = -cap, cap
        rlo = phi(lo) - rhs
        rhi = phi(hi) - rhs

    xi = min(max(x0, lo), hi)
    r = phi(xi) - rhs
    for it in range(1, NEWTON_MAX_ITER + 1):
        if r == 0.0:
            return xi, it
        if (r > 0.0) == (rlo > 0.0):
            lo, rlo = xi, r
        else:
            hi, rhi = xi, r
        d = dphi(xi)
        if d != 0.0 and math.isfinite(d):
            nxt = xi - r / d
        else:
            nxt = 0.5 * (lo + hi)
        if not (min(lo, hi) < nxt < max(lo, hi)):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - xi) <= NEWTON_RTOL * max(1.0, abs(nxt)):
            return nxt, it
        xi = nxt
        r = phi(xi) - rhs
    raise SolverError(f"root-find failed to converge at node {node} after {NEWTON_MAX_ITER} iterations")


def _solve_marching(kernel, grid, f, knn, cell_floor, iterations):
    n = grid.n_cells
    h = grid.step
    nodes = grid.nodes()
    bm = kernel.partition.validate_on(grid)
    coefs, rights, _ = _last_cell_profile(kernel, grid, bm)
    scale = np.abs(coefs).sum(axis=0)
    thresh = cell_floor * h * _degenerate_threshold(kernel, knn)
    tiny = scale < thresh
    if np.any(tiny):
        j = int(np.argmax(tiny)) + 1
        raise SolverError(
            f"degenerate last cell at node {j}: unknown coefficient scale "
            f"{fmt12(scale[j - 1])} is below {fmt12(thresh[j - 1])}"
        )
    max_f = float(np.max(np.abs(f))) if len(f) else 0.0
    caps = np.maximum(10.0, 10.0 * max_f / scale)
    _check_monotone_response(kernel, grid, float(np.max(caps)))

    x = np.zeros(n)
    t_left = nodes[:-1]
    t_right = nodes[1:]
    for j in range(1, n + 1):
        known = 0.0
        active = []
        for i in range(kernel.n_bands):
            lo = bm[i, j - 1]
            hi = bm[i + 1, j - 1]
            if j > 1:
                right = np.minimum(t_right[:j - 1], hi)
                width = np.clip(right - np.maximum(t_left[:j - 1], lo), 0.0, None)
                live = width > 0.0
                if np.any(live):
                    c = width[live] * np.asarray(
                        kernel.K[i](nodes[j], right[live]), dtype=float)
                    known += float(np.dot(
                        c, _apply_response(kernel.G[i], right[live], x[:j - 1][live])))
            c_last = coefs[i, j - 1]
            if c_last != 0.0:
                active.append((float(c_last), float(rights[i, j - 1]),
                               kernel.G[i], kernel.response_prime[i]))
        rhs = f[j] - known
        if all(entry[2] is None for entry in active):
            denom = sum(entry[0] for entry in active)
            if abs(denom) < thresh[j - 1]:
                raise SolverError(
                    f"degenerate last cell at node {j}: unknown coefficient "
                    f"{fmt12(denom)} is below {fmt12(thresh[j - 1])}"
                )
            x[j - 1] = rhs / denom
        else:
            x0 = x[j - 2] if j > 1 else 0.0
            x[j - 1], iterations[j - 1] = _newton_step(
                active, rhs, x0, float(caps[j - 1]), j)
    return x


def solve_apf(kernel: KernelSpec, grid: Grid, f, *,
              cell_floor: float = DEFAULT_CELL_FLOOR,
              residual_tol: float = DEFAULT_RESIDUAL_TOL) -> SolveResult:
    """March the discretized equation and recover the power schedule x.

    ``f`` holds node values 0..N and must start at zero (shift it first; see
    the storage module's imbalance builder). The returned ``x`` also spans
    nodes 0..N, with x_0 copied from x_1: the quadrature never touches node 0,
    so the first entry is a plotting convenience, not a solved value.
    """
    n = grid.n_cells
    f = np.asarray(f, dtype=float)
    if f.shape != (n + 1,):
        raise DataError(f"expected {n + 1} right-hand-side node values, got {f.shape}")
    if not np.all(np.isfinite(f)):
        raise DataError("right-hand side contains non-finite values")
    f_scale = max(1.0, float(np.max(np.abs(f))))
    if abs(f[0]) > 1e-12 * f_scale:
        raise DataError(
            f"right-hand side must vanish at t=0 (got {fmt12(f[0])}); "
            "subtract the initial imbalance first"
        )

    knn = _check_kernel_floor(kernel, grid)
    iterations = np.zeros(n, dtype=int)
    if kernel.is_linear:
        x = _solve_linear(kernel, grid, f, knn, cell_floor)
    else:
        x = _solve_marching(kernel, grid, f, knn, cell_floor, iterations)

    residual = float(np.max(np.abs(forward_apply(kernel, grid, x) - f)))
    if kernel.is_linear and residual > residual_tol * f_scale:
        raise SolverError(
            f"triangular solve left residual {fmt12(residual)} above "
            f"{fmt12(residual_tol * f_scale)}"
        )

    bm = kernel.partition.validate_on(grid)
    _, _, last_widths = _last_cell_profile(kernel, grid, bm)
    x_full = np.concatenate([x[:1], x])
    return SolveResult(
        grid=grid,
        x=x_full,
        residual=residual,
        diagnostics={
            "last_cell_widths": last_widths,
            "newton_iterations": iterations,
        },
    )


def estimate_order(kernel: KernelSpec, f_analytic, x_analytic,
                   horizon: float, n_coarse: int) -> float:
    """Observed convergence order from one grid refinement.

    Solves with n_coarse and 2*n_coarse cells against an analytic pair and
    returns log2(err_coarse / err_fine); +inf when the fine error is zero
    (the scheme is exact for the supplied solution).
    """
    errs = []
    for n in (n_coarse, 2 * n_coarse):
        grid = Grid(horizon, n)
        nodes = grid.nodes()
        f = np.asarray(f_analytic(nodes), dtype=float)
        result = solve_apf(kernel, grid, f)
        exact = np.asarray(x_analytic(nodes[1:]), dtype=float)
        errs.append(float(np.max(np.abs(result.x[1:] - exact))))
    if errs[1] == 0.0:
        return math.inf
    return math.log2(errs[0] / errs[1])


# --- kernel configuration ---------------------------------------------------

def _build_efficiency(entry, idx):
    kind = entry.get("type")
    if kind == "const":
        try:
            value = float(entry["value"])
        except KeyError:
            raise DataError(f"K[{idx}]: const factor needs a 'value'") from None
        return lambda t, s: np.full(np.broadcast_shapes(np.shape(t), np.shape(s)), value)
    if kind == "exp_decay":
        try:
            value = float(entry["value"])
            rate = float(entry["rate"])
        except KeyError as exc:
            raise DataError(f"K[{idx}]: exp_decay factor needs {exc}") from None
        return lambda t, s: value * np.exp(-rate * (np.asarray(t) - np.asarray(s)))
    raise DataError(f"K[{idx}]: unknown efficiency type {kind!r} (try 'const' or 'exp_decay')")


def _build_response(entry, idx):
    """Returns (g, dg) with g=None meaning the identity."""
    kind = entry.get("type")
    if kind == "linear":
        return None, None
    if kind == "cubic":
        a = float(entry.get("a", 1.0))
        b = float(entry.get("b", 0.0))
        if b == 0.0 and a == 1.0:
            return None, None
        g = lambda s, x: a * np.asarray(x) + b * np.asarray(x) ** 3
        dg = lambda s, x: a + 3.0 * b * np.asarray(x) ** 2
        return g, dg
    raise DataError(f"G[{idx}]: unknown response type {kind!r} (try 'linear' or 'cubic')")


def kernel_from_config(config: dict) -> KernelSpec:
    """Build a KernelSpec from its JSON form.

    Schema::

        {"n": 2,
         "alphas": {"type": "proportional", "c": [0.5]}
                   | {"type": "table", "t": [...], "alpha": [[...], ...]},
         "K": [{"type": "const", "value": 0.92}, ...],
         "G": [{"type": "linear"} | {"type": "cubic", "a": 1.0, "b": 0.1}, ...],
         "kernel_floor": 1e-6}

    "alphas" may be omitted for a single band (n=1).
    """
    if not isinstance(config, dict):
        raise DataError("kernel config must be a JSON object")
    try:
        n = int(config["n"])
    except (KeyError, TypeError, ValueError):
        raise DataError("kernel config needs an integer band count 'n'") from None
    if n < 1:
        raise DataError(f"band count must be >= 1, got {n}")

    spec = config.get("alphas")
    if n == 1:
        if spec and (not isinstance(spec, dict) or spec.get("c") or spec.get("alpha")):
            raise DataError("a single-band kernel takes no interior boundaries")
        partition = BandPartition()
    else:
        if not isinstance(spec, dict):
            raise DataError("kernel config needs an 'alphas' object for n > 1")
        kind = spec.get("type")
        if kind == "proportional":
            cs = spec.get("c")
            if not isinstance(cs, list) or len(cs) != n - 1:
                raise DataError(f"'alphas.c' must list {n - 1} fractions")
            partition = BandPartition.proportional(cs)
        elif kind == "table":
            rows = spec.get("alpha")
            if not isinstance(rows, list) or len(rows) != n - 1:
                raise DataError(f"'alphas.alpha' must list {n - 1} boundary rows")
            partition = BandPartition.from_table(spec.get("t", []), rows)
        else:
            raise DataError(f"unknown boundary type {kind!r} (try 'proportional' or 'table')")

    k_entries = config.get("K")
    g_entries = config.get("G")
    if not isinstance(k_entries, list) or len(k_entries) != n:
        raise DataError(f"'K' must list {n} efficiency factors")
    if not isinstance(g_entries, list) or len(g_entries) != n:
        raise DataError(f"'G' must list {n} response functions")
    K = tuple(_build_efficiency(e, i) for i, e in enumerate(k_entries))
    pairs = [_build_response(e, i) for i, e in enumerate(g_entries)]
    return KernelSpec(
        partition=partition,
        K=K,
        G=tuple(p[0] for p in pairs),
        response_prime=tuple(p[1] for p in pairs),
        kernel_floor=float(config.get("kernel_floor", DEFAULT_KERNEL_FLOOR)),
    )


def load_kernel(path) -> KernelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid kernel JSON: {exc}") from None
    return kernel_from_config(config)


# --- node-series exchange ---------------------------------------------------

def write_node_series(path, t, values) -> None:
    """CSV with columns t,value; the exchange format for x/f node vectors."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape:
        raise DataError(f"t and value lengths differ: {t.shape} vs {values.shape}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value"])
        for ti, vi in zip(t, values):
            writer.writerow([fmt12(ti), fmt12(vi)])


def read_node_series(path):
    """Inverse of write_node_series; returns (t, values) arrays."""
    ts, vals = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DataError(f"{os.fspath(path)}: expected a t,value header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                ts.append(float(row[0]))
                vals.append(float(row[1]))
            except (IndexError, ValueError):
                raise DataError(f"{os.fspath(path)}: line {lineno}: bad row {row!r}") from None
    return np.asarray(ts), np.asarray(vals)
