import numpy as np
import pytest

from biot.errors import ConfigurationError
from biot.fespace import (
    DisplacementField,
    FluxField,
    PressureField,
    RTBasis,
    ScalarBasis,
    build_displacement_space,
    build_flux_space,
    build_pressure_space,
    tensor_gauss,
)
from biot.mesh import SideSpec, build_box_mesh, side_names, tag_boundaries
from biot.timebasis import gauss_legendre


def tagged_mesh(extents, divisions, flow="pressure", mech="traction"):
    dim = len(extents)
    spec = {n: SideSpec(flow, [mech] * dim) for n in side_names(dim)}
    return tag_boundaries(build_box_mesh(extents, divisions), spec)


class TestDofCounts:
    def test_displacement_counts(self):
        m = tagged_mesh((1.0, 1.0), (1, 1))
        assert build_displacement_space(m, 1).ndofs == 8
        m = tagged_mesh((1.0, 1.0), (2, 1))
        assert build_displacement_space(m, 1).ndofs == 12
        m = tagged_mesh((1.0, 1.0, 1.0), (1, 1, 1))
        assert build_displacement_space(m, 2).ndofs == 81

    def test_flux_counts(self):
        assert build_flux_space(tagged_mesh((1.0, 1.0), (1, 1)), 0).ndofs == 4
        assert build_flux_space(tagged_mesh((1.0, 1.0), (2, 1)), 0).ndofs == 7
        assert build_flux_space(tagged_mesh((1.0, 1.0, 1.0), (1, 1, 1)), 0).ndofs == 6
        # RT_1: 2D has 2 dofs per edge + 4 interior
        dm = build_flux_space(tagged_mesh((1.0, 1.0), (1, 1)), 1)
        assert dm.ndofs == 4 * 2 + 4
        dm3 = build_flux_space(tagged_mesh((1.0, 1.0, 1.0), (1, 1, 1)), 1)
        assert dm3.ndofs == 6 * 4 + 12

    def test_pressure_counts(self):
        m = tagged_mesh((0.5, 1.0, 0.5), (5, 10, 5))
        assert build_pressure_space(m, 0).ndofs == 250
        m = tagged_mesh((1.0, 1.0), (1, 1))
        assert build_pressure_space(m, 1).ndofs == 4
        m = tagged_mesh((1.0, 1.0), (2, 2))
        dm = build_pressure_space(m, 0)
        assert dm.ndofs == 4
        # cell-local: every dof appears in exactly one cell
        assert np.unique(dm.cell_dofs).size == dm.ndofs

    def test_unsupported_orders(self):
        m = tagged_mesh((1.0, 1.0), (1, 1))
        with pytest.raises(ConfigurationError):
            build_displacement_space(m, 3)
        with pytest.raises(ConfigurationError):
            build_flux_space(m, 2)
        with pytest.raises(ConfigurationError):
            build_pressure_space(m, 2)


class TestConstraints:
    def test_all_flux_sides_constrained(self):
        m = tagged_mesh((1.0, 1.0, 1.0), (1, 1, 1), flow="flux")
        dm = build_flux_space(m, 0)
        assert np.sum(dm.constrained) == 6

    def test_dirichlet_nodes_on_side(self):
        dim = 2
        spec = {n: SideSpec("flux", ["traction", "traction"]) for n in side_names(dim)}
        spec["x_min"] = SideSpec("flux", ["dirichlet", "traction"])
        m = tag_boundaries(build_box_mesh((1.0, 1.0), (2, 2)), spec)
        dm = build_displacement_space(m, 1)
        fixed = np.nonzero(dm.constrained)[0]
        # x-components of the 3 nodes on x=0
        assert fixed.size == 3
        assert np.all(dm.dof_component[fixed] == 0)
        assert np.allclose(dm.dof_points[fixed][:, 0], 0.0)

    def test_roller_walls(self):
        spec = {
            n: SideSpec.roller(2, {"x": 0, "y": 1}[n[0]], flow="flux")
            for n in side_names(2)
        }
        m = tag_boundaries(build_box_mesh((1.0, 1.0), (2, 2)), spec)
        dm = build_displacement_space(m, 1)
        for i in np.nonzero(dm.constrained)[0]:
            c = dm.dof_component[i]
            x = dm.dof_points[i]
            assert x[c] in (0.0, 1.0)

    def test_constraint_values_from_function(self):
        m = tagged_mesh((1.0, 2.0), (2, 2), mech="dirichlet")
        dm = build_displacement_space(m, 1)

        def u_d(points, t):
            return np.stack([points[:, 0] * t, points[:, 1] + t], axis=1)

        vals = dm.constraint_values(u_d, t=2.0)
        idx = np.nonzero(dm.constrained)[0]
        for i in idx:
            c = dm.dof_component[i]
            x = dm.dof_points[i]
            expected = x[0] * 2.0 if c == 0 else x[1] + 2.0
            assert vals[i] == pytest.approx(expected)
        assert np.all(vals[~dm.constrained] == 0.0)


class TestBases:
    @pytest.mark.parametrize("dim,p", [(2, 1), (2, 2), (3, 1), (3, 2)])
    def test_partition_of_unity(self, dim, p):
        basis = ScalarBasis(dim, np.linspace(0, 1, p + 1))
        pts, _ = tensor_gauss(dim, p + 1)
        assert np.allclose(basis.values(pts).sum(axis=1), 1.0, atol=1e-13)

    @pytest.mark.parametrize("dim,k", [(2, 0), (2, 1), (3, 0), (3, 1)])
    def test_rt_face_traces_are_nodal(self, dim, k):
        basis = RTBasis(dim, k)
        # at a face node, exactly the matching face dof has unit normal trace
        for i, (comp, m_n, tm) in enumerate(basis.layout):
            if m_n not in (0, k + 1):
                continue
            pt = basis.node_point(comp, m_n, tm)
            vals = basis.values(pt[None, :])[0]  # (nloc, dim)
            normal_comp = vals[:, comp]
            expected = np.zeros(basis.nloc)
            expected[i] = 1.0
            # other dofs of the same face must vanish at this node; dofs of
            # other faces of the same axis vanish since L_m(0 or 1)=delta
            same_axis = basis.component == comp
            assert np.allclose(normal_comp[same_axis], expected[same_axis], atol=1e-12)


class TestHdivConformity:
    @pytest.mark.parametrize(
        "dim,k,extents,divisions",
        [
            (2, 0, (1.0, 2.0), (3, 2)),
            (2, 1, (1.5, 1.0), (2, 2)),
            (3, 0, (1.0, 1.0, 2.0), (2, 2, 2)),
            (3, 1, (1.0, 2.0, 1.0), (2, 1, 2)),
        ],
    )
    def test_normal_continuity(self, dim, k, extents, divisions):
        m = tagged_mesh(extents, divisions)
        dm = build_flux_space(m, k)
        rng = np.random.default_rng(7)
        coeffs = rng.standard_normal(dm.ndofs)
        basis = dm.basis
        fq = gauss_legendre(k + 2)[0]
        interior = np.nonzero(~m.boundary_mask)[0]
        for f in interior:
            a = m.face_axis[f]
            own, nb = m.face_owner[f], m.face_neighbor[f]
            tang_axes = [b for b in range(dim) if b != a]
            grids = np.meshgrid(*([fq] * (dim - 1)), indexing="ij")
            tcoords = np.stack([g.ravel() for g in grids], axis=1)
            xhat_own = np.zeros((tcoords.shape[0], dim))
            xhat_nb = np.zeros_like(xhat_own)
            xhat_own[:, a] = 1.0  # face is on the owner's high side
            xhat_nb[:, a] = 0.0
            for t, b in enumerate(tang_axes):
                xhat_own[:, b] = tcoords[:, t]
                xhat_nb[:, b] = tcoords[:, t]
            v_own = np.einsum(
                "pid,i->pd", basis.values(xhat_own), coeffs[dm.cell_dofs[own]]
            )
            v_nb = np.einsum(
                "pid,i->pd", basis.values(xhat_nb), coeffs[dm.cell_dofs[nb]]
            )
            assert np.allclose(v_own[:, a], v_nb[:, a], atol=1e-12)


class TestFieldEvaluation:
    def test_flux_divergence_matches_finite_differences(self):
        m = tagged_mesh((1.0, 2.0), (2, 3))
        dm = build_flux_space(m, 1)
        rng = np.random.default_rng(3)
        field = FluxField(dm, rng.standard_normal(dm.ndofs))
        pts = np.array([[0.21, 0.43], [0.72, 1.57], [0.11, 1.01]])
        h = 1e-6
        fd = np.zeros(pts.shape[0])
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            fd += (field.value(pts + e)[:, a] - field.value(pts - e)[:, a]) / (2 * h)
        assert np.allclose(field.divergence(pts), fd, atol=5e-6)

    def test_displacement_strain_matches_finite_differences(self):
        m = tagged_mesh((1.0, 1.0), (2, 2))
        dm = build_displacement_space(m, 2)
        rng = np.random.default_rng(5)
        field = DisplacementField(dm, rng.standard_normal(dm.ndofs))
        pts = np.array([[0.3, 0.6], [0.61, 0.12]])
        h = 1e-6
        grad = np.zeros((2, 2, 2))
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            grad[:, :, a] = (field.value(pts + e) - field.value(pts - e)) / (2 * h)
        sym = 0.5 * (grad + np.swapaxes(grad, -1, -2))
        assert np.allclose(field.strain(pts), sym, atol=5e-6)

    def test_pressure_nodal_interpolation(self):
        m = tagged_mesh((1.0, 1.0), (2, 2))
        dm = build_pressure_space(m, 1)
        coeffs = 3.0 * dm.dof_points[:, 0] + dm.dof_points[:, 1]
        field = PressureField(dm, coeffs)
        pts = np.array([[0.2, 0.3], [0.9, 0.7]])
        assert np.allclose(field.value(pts), 3.0 * pts[:, 0] + pts[:, 1], atol=1e-12)

    def test_displacement_linear_reproduction(self):
        m = tagged_mesh((1.0, 1.0), (2, 2))
        dm = build_displacement_space(m, 1)
        # u = (x, -y) has strain diag(1, -1) and zero divergence
        coeffs = np.zeros(dm.ndofs)
        for i in range(dm.ndofs):
            c = dm.dof_component[i]
            coeffs[i] = dm.dof_points[i, 0] if c == 0 else -dm.dof_points[i, 1]
        field = DisplacementField(dm, coeffs)
        pts = np.array([[0.15, 0.85], [0.5, 0.5]])
        assert np.allclose(field.strain(pts), np.diag([1.0, -1.0]), atol=1e-13)
        assert np.allclose(field.divergence(pts), 0.0, atol=1e-13)
