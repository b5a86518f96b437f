"""Reference bases and global dof maps for the three mixed spaces.

Displacement: continuous vector-valued tensor-product Lagrange elements of
order p on the box cells.  Flux: Raviart-Thomas elements of order p-1 in
nodal form; component a of an RT function has degree p in direction a and
degree p-1 in the others.  Pressure: discontinuous tensor-product Lagrange
elements of order p-1 at Gauss nodes (which makes the pressure mass matrix
exactly diagonal).

All cells are congruent axis-aligned boxes, so the map from the reference
cell has a constant diagonal Jacobian: scalar gradients scale per axis with
1/h_a, and RT functions are mapped so that their physical normal trace is
the unit-nodal tangential Lagrange polynomial on each face.  With that
normalisation the flux dof value is the normal component of the field at
the dof node, both adjacent cells see the same value (H(div) conformity),
and all global orientation signs are +1 relative to the canonical (+axis)
face normals.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ConfigurationError
from .mesh import FLOW_FLUX, MECH_DIRICHLET, Mesh
from .timebasis import LagrangeBasis, gauss_legendre


def tensor_gauss(dim: int, n1d: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product Gauss quadrature on the reference cell (0,1)^dim."""
    x, w = gauss_legendre(n1d)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    pts = np.stack([g.reshape(-1, order="F") for g in grids], axis=1)
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    wts = np.prod(np.stack([g.reshape(-1, order="F") for g in wgrids], axis=1), axis=1)
    return pts, wts


class ScalarBasis:
    """Tensor-product Lagrange basis on (0,1)^dim with one 1D node set."""

    def __init__(self, dim: int, nodes1d):
        self.dim = dim
        self.b1d = LagrangeBasis(nodes1d)
        self.n1d = self.b1d.size
        # lexicographic with axis 0 fastest
        self.multi = np.array(
            [m[::-1] for m in itertools.product(range(self.n1d), repeat=dim)]
        )
        self.nloc = self.multi.shape[0]
        self.node_points = self.b1d.nodes[self.multi]

    def values(self, xhat) -> np.ndarray:
        """Basis values at reference points; shape (npts, nloc)."""
        xhat = np.atleast_2d(xhat)
        per_axis = [self.b1d.values(xhat[:, a]) for a in range(self.dim)]
        out = np.ones((xhat.shape[0], self.nloc))
        for a in range(self.dim):
            out *= per_axis[a][:, self.multi[:, a]]
        return out

    def gradients(self, xhat) -> np.ndarray:
        """Reference gradients at reference points; shape (npts, nloc, dim)."""
        xhat = np.atleast_2d(xhat)
        vals = [self.b1d.values(xhat[:, a]) for a in range(self.dim)]
        ders = [self.b1d.derivs(xhat[:, a]) for a in range(self.dim)]
        out = np.ones((xhat.shape[0], self.nloc, self.dim))
        for a in range(self.dim):
            for b in range(self.dim):
                table = ders[a] if a == b else vals[a]
                out[:, :, b] *= table[:, self.multi[:, a]]
        return out


class RTBasis:
    """Nodal Raviart-Thomas basis of order k on the reference box.

    Local dofs are enumerated component-major: for each component a, the
    normal-direction node index runs over the k+2 points {0, ..., 1}
    (slowest) with the tangential Gauss-node multi-index fastest in
    ascending-axis lexicographic order.  Dofs with normal node 0 or k+1
    are face dofs; the rest are interior.
    """

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        self.normal_nodes = np.linspace(0.0, 1.0, order + 2)
        self.tangent_nodes = gauss_legendre(order + 1)[0]
        self.normal_basis = LagrangeBasis(self.normal_nodes)
        self.tangent_basis = LagrangeBasis(self.tangent_nodes)
        self.ndof_face = (order + 1) ** (dim - 1)

        layout = []  # (component, normal index, tangential multi-index)
        for comp in range(dim):
            tang_axes = [a for a in range(dim) if a != comp]
            tang_multis = list(
                itertools.product(*[range(order + 1)] * len(tang_axes))
            )
            # first tangential axis fastest
            tang_multis.sort(key=lambda t: tuple(reversed(t)))
            for m_n in range(order + 2):
                for tm in tang_multis:
                    layout.append((comp, m_n, tm))
        self.layout = layout
        self.nloc = len(layout)
        self.component = np.array([c for c, _, _ in layout])

    def tangent_flat(self, tang_multi) -> int:
        """Flat index of a tangential multi-index (first axis fastest)."""
        flat = 0
        for m in reversed(tang_multi):
            flat = flat * (self.order + 1) + m
        return flat

    def node_point(self, comp, m_n, tang_multi) -> np.ndarray:
        pt = np.empty(self.dim)
        pt[comp] = self.normal_nodes[m_n]
        tang_axes = [a for a in range(self.dim) if a != comp]
        for a, m in zip(tang_axes, tang_multi):
            pt[a] = self.tangent_nodes[m]
        return pt

    def values(self, xhat) -> np.ndarray:
        """Vector values at reference points; shape (npts, nloc, dim)."""
        xhat = np.atleast_2d(xhat)
        nv = [self.normal_basis.values(xhat[:, a]) for a in range(self.dim)]
        tv = [self.tangent_basis.values(xhat[:, a]) for a in range(self.dim)]
        out = np.zeros((xhat.shape[0], self.nloc, self.dim))
        for i, (comp, m_n, tm) in enumerate(self.layout):
            val = nv[comp][:, m_n].copy()
            tang_axes = [a for a in range(self.dim) if a != comp]
            for a, m in zip(tang_axes, tm):
                val *= tv[a][:, m]
            out[:, i, comp] = val
        return out

    def ref_divergence(self, xhat) -> np.ndarray:
        """Own-axis reference derivative of each dof; shape (npts, nloc).

        The physical divergence is this divided by the cell spacing along
        the dof's component axis.
        """
        xhat = np.atleast_2d(xhat)
        nd = [self.normal_basis.derivs(xhat[:, a]) for a in range(self.dim)]
        tv = [self.tangent_basis.values(xhat[:, a]) for a in range(self.dim)]
        out = np.zeros((xhat.shape[0], self.nloc))
        for i, (comp, m_n, tm) in enumerate(self.layout):
            val = nd[comp][:, m_n].copy()
            tang_axes = [a for a in range(self.dim) if a != comp]
            for a, m in zip(tang_axes, tm):
                val *= tv[a][:, m]
            out[:, i] = val
        return out


class DofMap:
    """Global dof layout for one space.

    ``cell_dofs[c]`` lists local-to-global indices; ``constrained`` marks
    dofs eliminated by boundary conditions (their values are supplied by
    the problem data, zero by default).  ``dof_points`` are the physical
    node locations used to evaluate constraint data; for flux dofs
    ``orientation`` records the global dof sign relative to the canonical
    face normal (always +1 on these structured meshes) and
    ``outward_sign`` the sign of the outward normal at constrained dofs.
    """

    def __init__(self, kind, order, ndofs, cell_dofs, basis, mesh):
        self.kind = kind
        self.order = order
        self.ndofs = ndofs
        self.cell_dofs = cell_dofs
        self.basis = basis
        self.mesh = mesh
        self.constrained = np.zeros(ndofs, dtype=bool)
        self.dof_points = np.zeros((ndofs, mesh.dim))
        self.dof_component = None
        self.orientation = None
        self.outward_sign = None

    @property
    def num_free(self) -> int:
        return int(self.ndofs - np.sum(self.constrained))

    def constraint_values(self, fn=None, t: float = 0.0) -> np.ndarray:
        """Full-length value vector holding boundary data at constrained dofs.

        ``fn(points, t)`` returns per-point data: vectors for displacement
        (the tagged component is selected per dof), scalars for flux (the
        outward normal component, mapped to the canonical dof sign).
        """
        values = np.zeros(self.ndofs)
        if fn is None:
            return values
        idx = np.nonzero(self.constrained)[0]
        if idx.size == 0:
            return values
        data = np.asarray(fn(self.dof_points[idx], t), dtype=float)
        if self.kind == "displacement":
            values[idx] = data[np.arange(idx.size), self.dof_component[idx]]
        elif self.kind == "flux":
            values[idx] = data * self.outward_sign[idx]
        else:
            values[idx] = data
        return values


def _require_tags(mesh: Mesh):
    if mesh.tags is None:
        raise ConfigurationError(
            "mesh has no boundary tags; call tag_boundaries first"
        )


def build_displacement_space(mesh: Mesh, p: int, tags: bool = True) -> DofMap:
    """Continuous vector-valued Q_p space with componentwise constraints.

    Scalar nodes form a tensor grid of p*n_a + 1 points per axis; vector
    dofs interleave components per node.  Dirichlet constraints are set
    componentwise on the tagged boundary faces.
    """
    if p not in (1, 2):
        raise ConfigurationError(f"displacement order must be 1 or 2, got {p}")
    d = mesh.dim
    basis = ScalarBasis(d, np.linspace(0.0, 1.0, p + 1))
    nodes_per_axis = p * mesh.divisions + 1
    n_scalar = int(np.prod(nodes_per_axis))
    strides = np.ones(d, dtype=np.int64)
    for a in range(1, d):
        strides[a] = strides[a - 1] * nodes_per_axis[a - 1]

    # cell -> scalar node grid indices
    cell_axis_idx = p * mesh.cell_multi  # (ncells, d) base node index
    local_multi = basis.multi  # (nloc_scalar, d)
    scalar_cell_dofs = (
        (cell_axis_idx[:, None, :] + local_multi[None, :, :]) @ strides
    )

    nloc = basis.nloc * d
    cell_dofs = np.empty((mesh.num_cells, nloc), dtype=np.int64)
    for c in range(d):
        cell_dofs[:, c::d] = scalar_cell_dofs * d + c

    dm = DofMap("displacement", p, n_scalar * d, cell_dofs, basis, mesh)
    dm.dof_component = np.tile(np.arange(d), n_scalar)

    # physical node coordinates
    axes = [np.arange(nodes_per_axis[a]) * (mesh.spacing[a] / p) for a in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    scalar_points = np.stack([g.reshape(-1, order="F") for g in grids], axis=1)
    dm.dof_points = np.repeat(scalar_points, d, axis=0)

    if tags and mesh.tags is not None:
        for f in mesh.boundary_faces():
            axis = mesh.face_axis[f]
            fixed_axis_idx = int(round(mesh.face_low[f, axis] / mesh.spacing[axis])) * p
            ranges = []
            for a in range(d):
                if a == axis:
                    ranges.append(np.array([fixed_axis_idx]))
                else:
                    base = int(round(mesh.face_low[f, a] / mesh.spacing[a])) * p
                    ranges.append(base + np.arange(p + 1))
            grids_f = np.meshgrid(*ranges, indexing="ij")
            nodes = np.stack([g.ravel() for g in grids_f], axis=1) @ strides
            for c in range(d):
                if mesh.tags.mech[f, c] == MECH_DIRICHLET:
                    dm.constrained[nodes * d + c] = True
    elif tags:
        _require_tags(mesh)
    return dm


def build_flux_space(mesh: Mesh, order: int, tags: bool = True) -> DofMap:
    """Raviart-Thomas space of the given order with normal-flux constraints.

    Face dofs are shared through the global face numbering; constrained
    dofs sit on the prescribed-flux boundary part.
    """
    if order not in (0, 1):
        raise ConfigurationError(f"flux order must be 0 or 1, got {order}")
    d = mesh.dim
    basis = RTBasis(d, order)
    ndof_face = basis.ndof_face
    n_face_dofs = mesh.num_faces * ndof_face
    n_int_per_cell = d * order * (order + 1) ** (d - 1)
    ndofs = n_face_dofs + mesh.num_cells * n_int_per_cell

    cell_dofs = np.empty((mesh.num_cells, basis.nloc), dtype=np.int64)
    interior_counter = {}
    for i, (comp, m_n, tm) in enumerate(basis.layout):
        tflat = basis.tangent_flat(tm)
        if m_n == 0:
            faces = mesh.cell_faces[:, comp, 0]
            cell_dofs[:, i] = faces * ndof_face + tflat
        elif m_n == order + 1:
            faces = mesh.cell_faces[:, comp, 1]
            cell_dofs[:, i] = faces * ndof_face + tflat
        else:
            key = (comp, m_n, tflat)
            local = interior_counter.setdefault(key, len(interior_counter))
            cell_dofs[:, i] = (
                n_face_dofs
                + np.arange(mesh.num_cells) * n_int_per_cell
                + local
            )

    dm = DofMap("flux", order, ndofs, cell_dofs, basis, mesh)
    dm.orientation = np.ones(ndofs)
    dm.outward_sign = np.zeros(ndofs)

    # dof node coordinates (face dofs may be visited twice; identical points)
    points = np.zeros((ndofs, d))
    axis_of = np.zeros(ndofs, dtype=np.int8)
    for i, (comp, m_n, tm) in enumerate(basis.layout):
        ref_pt = basis.node_point(comp, m_n, tm)
        phys = mesh.cell_low + ref_pt[None, :] * mesh.spacing[None, :]
        points[cell_dofs[:, i]] = phys
        axis_of[cell_dofs[:, i]] = comp
    dm.dof_points = points
    dm.dof_axis = axis_of

    if tags and mesh.tags is not None:
        for f in mesh.boundary_faces():
            if mesh.tags.flow[f] == FLOW_FLUX:
                idx = f * ndof_face + np.arange(ndof_face)
                dm.constrained[idx] = True
                dm.outward_sign[idx] = mesh.outward_sign(f)
    elif tags:
        _require_tags(mesh)
    return dm


def build_pressure_space(mesh: Mesh, order: int) -> DofMap:
    """Discontinuous Q_order pressure space, cell-local dofs at Gauss nodes."""
    if order not in (0, 1):
        raise ConfigurationError(f"pressure order must be 0 or 1, got {order}")
    d = mesh.dim
    basis = ScalarBasis(d, gauss_legendre(order + 1)[0])
    nloc = basis.nloc
    cell_dofs = (
        np.arange(mesh.num_cells)[:, None] * nloc + np.arange(nloc)[None, :]
    )
    dm = DofMap("pressure", order, mesh.num_cells * nloc, cell_dofs, basis, mesh)
    pts = np.empty((dm.ndofs, d))
    for i in range(nloc):
        pts[cell_dofs[:, i]] = (
            mesh.cell_low + basis.node_points[i][None, :] * mesh.spacing[None, :]
        )
    dm.dof_points = pts
    return dm


# -- discrete field evaluation ------------------------------------------


class _Field:
    def __init__(self, dofmap: DofMap, coeffs):
        self.dofmap = dofmap
        self.mesh = dofmap.mesh
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape != (dofmap.ndofs,):
            raise ValueError(
                f"coefficient vector has shape {self.coeffs.shape}, "
                f"expected ({dofmap.ndofs},)"
            )

    def default_points(self) -> np.ndarray:
        ref, _ = tensor_gauss(self.mesh.dim, self.dofmap.order + 2)
        pts = (
            self.mesh.cell_low[:, None, :]
            + ref[None, :, :] * self.mesh.spacing[None, None, :]
        )
        return pts.reshape(-1, self.mesh.dim)

    def _locate(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cells = self.mesh.locate(points)
        xhat = self.mesh.local_coords(points, cells)
        return points, cells, xhat


class PressureField(_Field):
    """Discontinuous pressure field evaluated from dof coefficients."""

    def value(self, points) -> np.ndarray:
        points, cells, xhat = self._locate(points)
        vals = self.dofmap.basis.values(xhat)  # (npts, nloc)
        local = self.coeffs[self.dofmap.cell_dofs[cells]]
        return np.einsum("pi,pi->p", vals, local)


class DisplacementField(_Field):
    """Continuous vector-valued displacement field."""

    def value(self, points) -> np.ndarray:
        points, cells, xhat = self._locate(points)
        d = self.mesh.dim
        svals = self.dofmap.basis.values(xhat)  # scalar basis (npts, nscal)
        local = self.coeffs[self.dofmap.cell_dofs[cells]]  # (npts, nscal*d)
        out = np.empty((points.shape[0], d))
        for c in range(d):
            out[:, c] = np.einsum("pi,pi->p", svals, local[:, c::d])
        return out

    def strain(self, points) -> np.ndarray:
        points, cells, xhat = self._locate(points)
        d = self.mesh.dim
        grads = self.dofmap.basis.gradients(xhat) / self.mesh.spacing[None, None, :]
        local = self.coeffs[self.dofmap.cell_dofs[cells]]
        grad_u = np.empty((points.shape[0], d, d))
        for c in range(d):
            grad_u[:, c, :] = np.einsum("pia,pi->pa", grads, local[:, c::d])
        return 0.5 * (grad_u + np.swapaxes(grad_u, -1, -2))

    def divergence(self, points) -> np.ndarray:
        return np.trace(self.strain(points), axis1=-2, axis2=-1)


class FluxField(_Field):
    """H(div)-conforming flux field."""

    def value(self, points) -> np.ndarray:
        points, cells, xhat = self._locate(points)
        vals = self.dofmap.basis.values(xhat)  # (npts, nloc, d)
        local = self.coeffs[self.dofmap.cell_dofs[cells]]
        return np.einsum("pid,pi->pd", vals, local)

    def divergence(self, points) -> np.ndarray:
        points, cells, xhat = self._locate(points)
        div_ref = self.dofmap.basis.ref_divergence(xhat)
        scale = 1.0 / self.mesh.spacing[self.dofmap.basis.component]
        local = self.coeffs[self.dofmap.cell_dofs[cells]]
        return np.einsum("pi,i,pi->p", div_ref, scale, local)
