"""Structured axis-aligned box meshes with face connectivity and tags.

Cells are congruent axis-aligned boxes on a tensor-product grid
(anisotropic spacing per axis is allowed, grading within an axis is not).
Every face carries one canonical normal pointing in the positive axis
direction; the owner cell sits on the negative side of the face.  This
fixes a global orientation for flux degrees of freedom.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

FLOW_PRESSURE = 0  # face on the pressure-Dirichlet boundary part
FLOW_FLUX = 1      # face on the prescribed-normal-flux boundary part

MECH_DIRICHLET = 0  # displacement component fixed on this face
MECH_TRACTION = 1   # displacement component traction-loaded / free

SIDE_NAMES_2D = ("x_min", "x_max", "y_min", "y_max")
SIDE_NAMES_3D = SIDE_NAMES_2D + ("z_min", "z_max")


def side_names(dim: int) -> tuple[str, ...]:
    return SIDE_NAMES_3D if dim == 3 else SIDE_NAMES_2D


class SideSpec:
    """Boundary classes for one box side: one flow tag, d mechanics tags."""

    def __init__(self, flow: str, mech):
        if flow not in ("pressure", "flux"):
            raise ConfigurationError(f"unknown flow boundary class {flow!r}")
        mech = tuple(mech)
        for m in mech:
            if m not in ("dirichlet", "traction"):
                raise ConfigurationError(f"unknown mechanics boundary class {m!r}")
        self.flow = flow
        self.mech = mech

    @staticmethod
    def roller(dim: int, normal_axis: int, flow: str = "flux") -> "SideSpec":
        """Normal displacement component fixed, tangential traction-free."""
        mech = ["traction"] * dim
        mech[normal_axis] = "dirichlet"
        return SideSpec(flow, mech)

    @staticmethod
    def fixed(dim: int, flow: str = "flux") -> "SideSpec":
        return SideSpec(flow, ["dirichlet"] * dim)

    @staticmethod
    def free(dim: int, flow: str = "pressure") -> "SideSpec":
        return SideSpec(flow, ["traction"] * dim)


class BoundaryTags:
    """Per-face boundary classes (interior faces carry -1).

    ``flow`` has one entry per face; ``mech`` one entry per face and
    displacement component.  On construction the partition properties are
    checked: every boundary face belongs to exactly one flow part and,
    per component, to exactly one mechanics part.
    """

    def __init__(self, flow: np.ndarray, mech: np.ndarray, boundary: np.ndarray):
        self.flow = flow
        self.mech = mech
        bad = boundary & ~np.isin(flow, (FLOW_PRESSURE, FLOW_FLUX))
        if np.any(bad):
            raise ConfigurationError("boundary face without flow class")
        bad = boundary[:, None] & ~np.isin(mech, (MECH_DIRICHLET, MECH_TRACTION))
        if np.any(bad):
            raise ConfigurationError("boundary face without mechanics class")

    def is_pressure(self, face):
        return self.flow[face] == FLOW_PRESSURE

    def is_flux(self, face):
        return self.flow[face] == FLOW_FLUX


class Mesh:
    """Tensor-product box mesh; immutable after construction.

    Cells, vertices and (per-axis) faces are numbered lexicographically
    with axis 0 fastest.  ``cell_faces[c, a, s]`` gives the face of cell
    ``c`` with normal along axis ``a`` on its low (s=0) or high (s=1)
    side.
    """

    def __init__(self, extents, divisions):
        extents = np.asarray(extents, dtype=float)
        divisions = np.asarray(divisions, dtype=int)
        if extents.ndim != 1 or extents.size not in (2, 3):
            raise ValueError("extents must have length 2 or 3")
        if divisions.shape != extents.shape:
            raise ValueError("divisions must match extents in length")
        if np.any(extents <= 0.0):
            raise ValueError(f"extents must be positive, got {extents}")
        if np.any(divisions < 1):
            raise ValueError(f"divisions must be >= 1, got {divisions}")
        self.dim = extents.size
        self.extents = extents
        self.divisions = divisions
        self.spacing = extents / divisions
        self.num_cells = int(np.prod(divisions))
        self.cell_volume = float(np.prod(self.spacing))
        self.cell_diameter = float(np.linalg.norm(self.spacing))
        self.h = self.cell_diameter

        self._build_cells()
        self._build_faces()
        self.tags: BoundaryTags | None = None

    # -- construction ---------------------------------------------------

    def _build_cells(self):
        d, n = self.dim, self.divisions
        grids = np.meshgrid(*[np.arange(n[a]) for a in range(d)], indexing="ij")
        multi = np.stack([g.reshape(-1, order="F") for g in grids], axis=1)
        self.cell_multi = multi
        self.cell_low = multi * self.spacing[None, :]

    def _build_faces(self):
        d, n = self.dim, self.divisions
        axis_counts = []
        for a in range(d):
            shape = n.copy()
            shape[a] += 1
            axis_counts.append(int(np.prod(shape)))
        self.face_offsets = np.concatenate(([0], np.cumsum(axis_counts)))
        self.num_faces = int(self.face_offsets[-1])

        axis = np.empty(self.num_faces, dtype=np.int8)
        owner = np.full(self.num_faces, -1, dtype=np.int64)
        neighbor = np.full(self.num_faces, -1, dtype=np.int64)
        low = np.empty((self.num_faces, d))
        side = np.full(self.num_faces, -1, dtype=np.int8)
        area = np.empty(self.num_faces)

        cell_strides = np.ones(d, dtype=np.int64)
        for a in range(1, d):
            cell_strides[a] = cell_strides[a - 1] * n[a - 1]

        for a in range(d):
            shape = n.copy()
            shape[a] += 1
            grids = np.meshgrid(*[np.arange(shape[b]) for b in range(d)], indexing="ij")
            multi = np.stack([g.reshape(-1, order="F") for g in grids], axis=1)
            idx = self.face_offsets[a] + np.arange(multi.shape[0])
            axis[idx] = a
            area[idx] = self.cell_volume / self.spacing[a]
            low[idx] = multi * self.spacing[None, :]

            pos = multi[:, a]
            minus = multi.copy()
            minus[:, a] -= 1  # cell on the negative side
            has_minus = pos > 0
            has_plus = pos < n[a]
            owner[idx[has_minus]] = minus[has_minus] @ cell_strides
            neighbor[idx[has_plus]] = multi[has_plus] @ cell_strides
            side[idx[pos == 0]] = 2 * a
            side[idx[pos == n[a]]] = 2 * a + 1

        self.face_axis = axis
        self.face_owner = owner
        self.face_neighbor = neighbor
        self.face_low = low
        self.face_area = area
        self.face_side = side
        self.boundary_mask = side >= 0
        self.num_interior_faces = int(np.sum(~self.boundary_mask))

        # cell -> face lookup
        cf = np.empty((self.num_cells, d, 2), dtype=np.int64)
        for a in range(d):
            shape = n.copy()
            shape[a] += 1
            face_strides = np.ones(d, dtype=np.int64)
            for b in range(1, d):
                face_strides[b] = face_strides[b - 1] * shape[b - 1]
            base = self.cell_multi @ face_strides
            cf[:, a, 0] = self.face_offsets[a] + base
            up = self.cell_multi.copy()
            up[:, a] += 1
            cf[:, a, 1] = self.face_offsets[a] + up @ face_strides
        self.cell_faces = cf

    # -- queries ---------------------------------------------------------

    def outward_sign(self, face: int) -> int:
        """+1 if the canonical (+axis) normal points out of the domain."""
        if not self.boundary_mask[face]:
            raise ValueError(f"face {face} is not a boundary face")
        return 1 if self.face_side[face] % 2 == 1 else -1

    def boundary_faces(self, side: int | None = None) -> np.ndarray:
        if side is None:
            return np.nonzero(self.boundary_mask)[0]
        return np.nonzero(self.face_side == side)[0]

    def locate(self, points) -> np.ndarray:
        """Cell indices containing the given points (clamped to the box)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        idx = np.floor(points / self.spacing[None, :]).astype(np.int64)
        idx = np.clip(idx, 0, self.divisions[None, :] - 1)
        strides = np.ones(self.dim, dtype=np.int64)
        for a in range(1, self.dim):
            strides[a] = strides[a - 1] * self.divisions[a - 1]
        return idx @ strides

    def local_coords(self, points, cells) -> np.ndarray:
        """Reference-cell coordinates of points inside the given cells."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return (points - self.cell_low[cells]) / self.spacing[None, :]

    def vertex_grid(self) -> list[np.ndarray]:
        return [
            np.linspace(0.0, self.extents[a], self.divisions[a] + 1)
            for a in range(self.dim)
        ]


def build_box_mesh(extents, divisions) -> Mesh:
    """Build a structured axis-aligned box mesh.

    ``extents`` are the box side lengths, ``divisions`` the number of
    cells per axis.  Cells tile the box exactly; the cell count is the
    product of the divisions and every face is connectivity-complete.
    """
    return Mesh(extents, divisions)


def tag_boundaries(mesh: Mesh, spec: dict) -> Mesh:
    """Attach boundary classes to a mesh from a per-side specification.

    ``spec`` maps side names (x_min, x_max, y_min, ... per dimension) to
    :class:`SideSpec`.  All sides must be covered for both physics; the
    result is a new mesh sharing geometry with tags attached.
    """
    names = side_names(mesh.dim)
    missing = [s for s in names if s not in spec]
    extra = [s for s in spec if s not in names]
    problems = []
    if missing:
        problems.append(f"boundary spec missing sides: {', '.join(missing)}")
    if extra:
        problems.append(f"boundary spec has unknown sides: {', '.join(extra)}")
    for name, side in spec.items():
        if name in names and len(side.mech) != mesh.dim:
            problems.append(
                f"side {name}: expected {mesh.dim} mechanics classes, "
                f"got {len(side.mech)}"
            )
    if problems:
        raise ConfigurationError(problems)

    flow = np.full(mesh.num_faces, -1, dtype=np.int8)
    mech = np.full((mesh.num_faces, mesh.dim), -1, dtype=np.int8)
    for sid, name in enumerate(names):
        faces = mesh.boundary_faces(sid)
        side = spec[name]
        flow[faces] = FLOW_PRESSURE if side.flow == "pressure" else FLOW_FLUX
        for c, m in enumerate(side.mech):
            mech[faces, c] = MECH_DIRICHLET if m == "dirichlet" else MECH_TRACTION

    tagged = Mesh(mesh.extents, mesh.divisions)
    tagged.tags = BoundaryTags(flow, mech, tagged.boundary_mask)
    return tagged
