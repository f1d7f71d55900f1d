"""Exact mapping-cone cohomology on the mesh registry."""

from fractions import Fraction

import pytest

from cgbv.discrete import (CochainComplex, Mesh, MESH_REGISTRY, betti,
                           dirichlet_betti, les_check, make_mesh,
                           mapping_cone, moebius_mesh)
from cgbv.errors import (ChainMapError, ComplexError, ConsistencyError,
                         SurjectivityError)

M_BETTI = {
    "interval": [1, 0],
    "circle": [1, 1],
    "disk": [1, 0, 0],
    "annulus": [1, 1, 0],
    "cylinder": [1, 1, 0],
}

CONE_BETTI = {
    "interval": [0, 1],
    "circle": [1, 1],
    "disk": [0, 0, 1],
    "annulus": [0, 1, 1],
    "cylinder": [0, 1, 1],
}


class TestCochainComplex:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ComplexError):
            CochainComplex([2, 2], [[[1, 0]]], "bad-shape")

    def test_differential_count_rejected(self):
        with pytest.raises(ComplexError):
            CochainComplex([2, 2], [], "missing-d")

    def test_non_complex_rejected_by_betti(self):
        # d compose d = identity on one generator
        c = CochainComplex([1, 1, 1], [[[1]], [[1]]], "not-a-complex")
        with pytest.raises(ComplexError):
            betti(c)

    def test_euler_from_dims(self):
        c = make_mesh("disk").complex()
        assert c.euler() == 5 - 8 + 4 == 1


class TestMeshRegistry:
    @pytest.mark.parametrize("name", sorted(MESH_REGISTRY))
    def test_constructs_and_is_a_complex(self, name):
        mesh = make_mesh(name)
        cm, cb, r = mesh.complexes()
        cm.check()
        cb.check()
        mapping_cone(cm, cb, r).check()

    def test_euler_characteristics(self):
        chis = {name: make_mesh(name).complex().euler()
                for name in MESH_REGISTRY}
        assert chis == {"interval": 1, "circle": 0, "disk": 1,
                        "annulus": 0, "cylinder": 0}

    def test_unknown_name_rejected(self):
        with pytest.raises(ComplexError):
            make_mesh("torus")

    def test_moebius_band_rejected(self):
        with pytest.raises(ConsistencyError):
            moebius_mesh()

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ComplexError):
            Mesh("dup", 2, [(0, 1), (0, 1)])

    def test_missing_triangle_edge_rejected(self):
        with pytest.raises(ComplexError):
            Mesh("hole", 3, [(0, 1), (1, 2)], [(0, 1, 2)])

    def test_overused_edge_rejected(self):
        edges = [(0, 1), (1, 2), (2, 0), (1, 3), (3, 0), (1, 4), (4, 0)]
        tris = [(0, 1, 2), (0, 1, 3), (0, 1, 4)]
        with pytest.raises(ComplexError):
            Mesh("fan", 5, edges, tris)

    def test_incoherent_orientation_rejected(self):
        # second triangle deliberately flipped
        rim = [(0, 1), (1, 2), (2, 3), (3, 0)]
        spokes = [(0, 4), (1, 4), (2, 4), (3, 4)]
        tris = [(0, 1, 4), (2, 1, 4), (2, 3, 4), (3, 0, 4)]
        with pytest.raises(ConsistencyError):
            Mesh("flipped", 5, rim + spokes, tris)


class TestBetti:
    @pytest.mark.parametrize("name", sorted(M_BETTI))
    def test_mesh_betti(self, name):
        assert betti(make_mesh(name).complex()) == M_BETTI[name]

    def test_boundary_betti(self):
        assert betti(make_mesh("interval").boundary_complex()) == [2]
        assert betti(make_mesh("disk").boundary_complex()) == [1, 1]
        assert betti(make_mesh("annulus").boundary_complex()) == [2, 2]
        assert betti(make_mesh("cylinder").boundary_complex()) == [2, 2]


class TestMappingCone:
    @pytest.mark.parametrize("name", sorted(CONE_BETTI))
    def test_cone_betti(self, name):
        cm, cb, r = make_mesh(name).complexes()
        assert betti(mapping_cone(cm, cb, r)) == CONE_BETTI[name]

    def test_empty_boundary_keeps_betti(self):
        cm, cb, r = make_mesh("circle").complexes()
        assert betti(mapping_cone(cm, cb, r)) == betti(cm)

    def test_cone_of_identity_is_acyclic(self):
        cm = make_mesh("circle").complex()
        ident = [
            [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
            for n in cm.dims
        ]
        cone = mapping_cone(cm, cm, ident)
        assert betti(cone) == [0] * len(cone.dims)

    def test_chain_map_violation_rejected(self):
        mesh = make_mesh("disk")
        cm, cb, r = mesh.complexes()
        r[1][0][0] = Fraction(-1)  # flip one edge restriction
        with pytest.raises(ChainMapError):
            mapping_cone(cm, cb, r)

    def test_wrong_arity_rejected(self):
        cm, cb, r = make_mesh("disk").complexes()
        with pytest.raises(ChainMapError):
            mapping_cone(cm, cb, r[:2])


class TestLesCheck:
    def test_disk_exact_everywhere(self):
        cm, cb, r = make_mesh("disk").complexes()
        report = les_check(cm, cb, r)
        assert report.all_exact
        assert report.failures() == []
        assert len(report.spots) >= 6

    @pytest.mark.parametrize("name", sorted(MESH_REGISTRY))
    def test_registry_exact_everywhere(self, name):
        cm, cb, r = make_mesh(name).complexes()
        assert les_check(cm, cb, r).all_exact

    def test_empty_boundary_gives_isomorphisms(self):
        cm, cb, r = make_mesh("circle").complexes()
        report = les_check(cm, cb, r)
        assert report.all_exact
        for spot in report.spots:
            if spot.label.startswith("H") and "(M)" in spot.label:
                assert spot.rank_in == spot.dim

    def test_annulus_connecting_rank(self):
        cm, cb, r = make_mesh("annulus").complexes()
        report = les_check(cm, cb, r)
        spot = next(s for s in report.spots if s.label == "H^1(cone)")
        assert spot.rank_in == 1


class TestDirichlet:
    @pytest.mark.parametrize("name", sorted(CONE_BETTI))
    def test_matches_cone(self, name):
        cm, cb, r = make_mesh(name).complexes()
        assert dirichlet_betti(cm, cb, r) == CONE_BETTI[name]

    def test_empty_boundary_equals_mesh_betti(self):
        cm, cb, r = make_mesh("circle").complexes()
        assert dirichlet_betti(cm, cb, r) == betti(cm)

    def test_non_surjective_restriction_rejected(self):
        cm, cb, _ = make_mesh("interval").complexes()
        bad = [[[1, 0, 0], [1, 0, 0]], []]
        with pytest.raises(SurjectivityError):
            dirichlet_betti(cm, cb, bad)


class TestDuality:
    @pytest.mark.parametrize("name", ["interval", "disk", "annulus",
                                      "cylinder"])
    def test_cone_betti_reverses_mesh_betti(self, name):
        """Relative degree k pairs with absolute degree n-k, exactly."""
        cm, cb, r = make_mesh(name).complexes()
        cone = betti(mapping_cone(cm, cb, r))
        assert cone == list(reversed(M_BETTI[name]))

    @pytest.mark.parametrize("name", sorted(MESH_REGISTRY))
    def test_euler_additivity(self, name):
        cm, cb, r = make_mesh(name).complexes()
        cone = mapping_cone(cm, cb, r)
        assert cone.euler() == cm.euler() - cb.euler()
