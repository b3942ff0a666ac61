"""Structured triangulations of the unit square with P1 nodal unknowns."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform triangulation of D = (0,1)^2 with ``n`` subdivisions per side.

    Nodes are numbered lexicographically by (row, column): node i*(n+1)+j
    sits at (j*h, i*h) with h = 1/n.  Every grid cell is split along its
    bottom-left to top-right diagonal, so the meshes for n and 2n are
    nested and repeated runs produce identical connectivity.

    Homogeneous Dirichlet conditions are built in: ``interior_index`` maps
    node numbers to compacted interior unknown numbers (-1 on the
    boundary).  Displacement unknowns are interleaved, two per interior
    node.
    """

    n: int
    nodes: np.ndarray           # (num_nodes, 2) coordinates
    triangles: np.ndarray       # (num_triangles, 3) node indices, counterclockwise
    boundary_mask: np.ndarray   # (num_nodes,) bool
    interior_index: np.ndarray  # (num_nodes,) int, -1 on the boundary

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    @property
    def num_interior(self) -> int:
        return int((~self.boundary_mask).sum())

    @property
    def num_pressure_dofs(self) -> int:
        return self.num_interior

    @property
    def num_displacement_dofs(self) -> int:
        return 2 * self.num_interior

    def interior_displacement_dofs(self) -> np.ndarray:
        """Full-space displacement dof numbers (2*node+comp) kept after elimination."""
        k = self.interior_nodes
        return np.stack([2 * k, 2 * k + 1], axis=1).ravel()

    # nodal vector helpers (boundary values are identically zero)

    def restrict_scalar(self, full: np.ndarray) -> np.ndarray:
        return np.asarray(full)[self.interior_nodes]

    def extend_scalar(self, interior: np.ndarray) -> np.ndarray:
        full = np.zeros(self.num_nodes)
        full[self.interior_nodes] = interior
        return full

    def restrict_vector(self, full: np.ndarray) -> np.ndarray:
        return np.asarray(full)[self.interior_displacement_dofs()]

    def extend_vector(self, interior: np.ndarray) -> np.ndarray:
        full = np.zeros(2 * self.num_nodes)
        full[self.interior_displacement_dofs()] = interior
        return full

    def nodal_scalar(self, fn, t=None, interior=False) -> np.ndarray:
        """Interpolate a scalar function fn(x, y[, t]) at the mesh nodes."""
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        values = fn(x, y) if t is None else fn(x, y, t)
        values = np.broadcast_to(np.asarray(values, dtype=float), x.shape).copy()
        return self.restrict_scalar(values) if interior else values

    def nodal_vector(self, fn, t=None, interior=False) -> np.ndarray:
        """Interpolate a vector function fn(x, y[, t]) -> (v1, v2), interleaved."""
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        v1, v2 = fn(x, y) if t is None else fn(x, y, t)
        full = np.empty(2 * self.num_nodes)
        full[0::2] = np.broadcast_to(np.asarray(v1, dtype=float), x.shape)
        full[1::2] = np.broadcast_to(np.asarray(v2, dtype=float), x.shape)
        return self.restrict_vector(full) if interior else full


def build_structured_mesh(n: int) -> Mesh:
    """Build the uniform diagonal-split triangulation with mesh size h = 1/n."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"subdivision count must be a positive integer, got {n!r}")
    n = int(n)
    side = np.linspace(0.0, 1.0, n + 1)
    jj, ii = np.meshgrid(side, side)  # row i is the y level
    nodes = np.column_stack([jj.ravel(), ii.ravel()])

    cell_i, cell_j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v00 = (cell_i * (n + 1) + cell_j).ravel()
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    i_idx, j_idx = np.divmod(np.arange((n + 1) ** 2), n + 1)
    boundary = (i_idx == 0) | (i_idx == n) | (j_idx == 0) | (j_idx == n)
    interior_index = np.full((n + 1) ** 2, -1, dtype=np.int64)
    interior_index[~boundary] = np.arange((~boundary).sum())

    return Mesh(n=n, nodes=nodes, triangles=triangles,
                boundary_mask=boundary, interior_index=interior_index)


def prolong(coarse: Mesh, fine: Mesh, coarse_values: np.ndarray) -> np.ndarray:
    """Evaluate the P1 interpolant of a coarse nodal function at the fine nodes.

    Requires fine.n to be a multiple of coarse.n so that every coarse node
    coincides with a fine node (the interpolant is then exact there).
    ``coarse_values`` is a full nodal vector on the coarse mesh.
    """
    if fine.n % coarse.n != 0:
        raise ValueError(
            f"meshes are not nested: fine n={fine.n} is not a multiple of coarse n={coarse.n}")
    values = np.asarray(coarse_values, dtype=float)
    if values.shape != (coarse.num_nodes,):
        raise ValueError(
            f"expected coarse nodal vector of length {coarse.num_nodes}, got shape {values.shape}")

    cn = coarse.n
    x, y = fine.nodes[:, 0], fine.nodes[:, 1]
    cj = np.minimum((x * cn).astype(np.int64), cn - 1)
    ci = np.minimum((y * cn).astype(np.int64), cn - 1)
    s = x * cn - cj
    t = y * cn - ci

    base = ci * (cn + 1) + cj
    a = values[base]                # bottom-left
    d = values[base + 1]            # bottom-right
    c = values[base + cn + 1]       # top-left
    b = values[base + cn + 2]       # top-right

    in_lower = t <= s
    lower = a + s * (d - a) + t * (b - d)
    upper = a + s * (b - c) + t * (c - a)
    return np.where(in_lower, lower, upper)
