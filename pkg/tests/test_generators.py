"""Seeded instance generation: graph shape, noise calibration, resources."""

import math
import warnings

import numpy as np
import pytest

from hybridpath.generators import (GenSpec, farthest_pair, gen_euclidean,
                                   gen_lattice, generate)
from hybridpath.instance import dumps, validate
from hybridpath.labeling import SolverConfig, solve


def degree_counts(inst):
    deg = [0] * inst.n_nodes
    for e in inst.edges:
        deg[e.u] += 1
    return deg


@pytest.fixture(scope="module")
def grid_10x10():
    return gen_lattice(GenSpec(n_nodes=100, family="lattice", seed=3,
                               b_frac=0.7))


@pytest.fixture(scope="module")
def cube_5x5x5():
    return gen_lattice(GenSpec(n_nodes=125, family="lattice", dim=3, seed=3,
                               b_frac=0.7))


class TestLattice:
    def test_2d_degrees(self, grid_10x10):
        # out-degree: corners 2, edges 3, interior 4
        deg = sorted(degree_counts(grid_10x10))
        assert deg.count(2) == 4
        assert deg.count(3) == 4 * 8
        assert deg.count(4) == 64
        assert grid_10x10.n_nodes == 100
        assert len(grid_10x10.edges) == 2 * (2 * 10 * 9)

    def test_2d_endpoints_opposite_corners(self, grid_10x10):
        s = grid_10x10.nodes[grid_10x10.start]
        t = grid_10x10.nodes[grid_10x10.goal]
        assert math.dist(s, t) == pytest.approx(math.sqrt(2) * 9)

    def test_3d_interior_degree(self, cube_5x5x5):
        deg = degree_counts(cube_5x5x5)
        interior = [k for k, node in enumerate(cube_5x5x5.nodes)
                    if all(0 < c < 4 for c in node)]
        assert len(interior) == 27
        assert all(deg[k] == 12 for k in interior)

    def test_3d_no_vertical_moves(self, cube_5x5x5):
        for e in cube_5x5x5.edges:
            du = np.subtract(cube_5x5x5.nodes[e.v], cube_5x5x5.nodes[e.u])
            assert abs(du[0]) + abs(du[1]) == 1
            assert abs(du[2]) <= 1

    def test_descents_glide_ascents_pay(self, cube_5x5x5):
        inst = cube_5x5x5
        seen = 0
        for e in inst.edges:
            dz = inst.nodes[e.v][2] - inst.nodes[e.u][2]
            back = inst.edge_map[(e.v, e.u)]
            if dz < 0:
                assert e.gliding and e.c == 0
                assert not back.gliding and back.c > 0
                # recharge shrinks on the glide, grows on the climb
                assert e.z < back.z
                seen += 1
        assert seen > 0

    def test_level_edges_do_not_glide(self, cube_5x5x5):
        inst = cube_5x5x5
        for e in inst.edges:
            if inst.nodes[e.v][2] == inst.nodes[e.u][2]:
                assert not e.gliding and e.c > 0

    def test_bad_sizes(self):
        with pytest.raises(ValueError, match="perfect square"):
            gen_lattice(GenSpec(n_nodes=10, family="lattice"))
        with pytest.raises(ValueError, match="product"):
            gen_lattice(GenSpec(n_nodes=10, family="lattice", dims=(3, 4)))
        with pytest.raises(ValueError, match="at least 2"):
            gen_lattice(GenSpec(n_nodes=5, family="lattice", dims=(5, 1)))

    def test_rectangular_dims(self):
        inst = gen_lattice(GenSpec(n_nodes=12, family="lattice", dims=(4, 3),
                                   noise_target=0.0, b_frac=0.8))
        assert inst.n_nodes == 12
        assert len(inst.edges) == 2 * (3 * 3 + 4 * 2)


class TestEuclidean:
    def test_valid_and_feasible(self):
        inst = gen_euclidean(GenSpec(n_nodes=50, seed=5))
        assert validate(inst) == []
        assert solve(inst, SolverConfig()).status == "optimal"

    def test_endpoints_farthest(self):
        inst = gen_euclidean(GenSpec(n_nodes=50, seed=5))
        pts = np.array(inst.nodes)
        s, t = farthest_pair(pts)
        assert {inst.start, inst.goal} == {s, t}
        dmax = max(math.dist(a, b) for a in inst.nodes for b in inst.nodes)
        assert math.dist(pts[s], pts[t]) == pytest.approx(dmax)

    def test_edges_undirected_knn(self):
        inst = gen_euclidean(GenSpec(n_nodes=40, k_neighbors=3, seed=1))
        directed = {(e.u, e.v) for e in inst.edges}
        assert all((v, u) in directed for u, v in directed)
        deg = degree_counts(inst)
        assert min(deg) >= 3

    def test_2d_has_no_gliding(self):
        inst = gen_euclidean(GenSpec(n_nodes=30, seed=2))
        assert not any(e.gliding for e in inst.edges)
        assert all(e.c > 0 for e in inst.edges)


class TestNoise:
    def test_window_met_at_scale(self):
        inst = gen_euclidean(GenSpec(n_nodes=500, seed=9))
        meta = inst.meta
        assert meta["noise_window_met"] is True
        assert 0.29 <= meta["noise_fraction"] <= 0.35
        frac = sum(not e.gen_allowed for e in inst.edges) / len(inst.edges)
        assert frac == pytest.approx(meta["noise_fraction"])

    def test_noise_free(self):
        inst = gen_euclidean(GenSpec(n_nodes=30, seed=2, noise_target=0.0))
        assert all(e.gen_allowed for e in inst.edges)
        assert inst.meta["noise_fraction"] == 0.0
        assert inst.meta["zone_count"] == 0

    def test_restriction_is_zone_containment(self):
        # both directions of an undirected pair share the restriction
        inst = gen_euclidean(GenSpec(n_nodes=120, seed=4))
        for e in inst.edges:
            assert e.gen_allowed == inst.edge_map[(e.v, e.u)].gen_allowed


class TestCalibration:
    def test_resources_sized_from_relaxed_energy(self):
        spec = GenSpec(n_nodes=60, seed=8, b_frac=0.4, q_frac=1.1,
                       v_frac=0.02)
        inst = generate(spec)
        energy = inst.meta["sup_energy_units"]
        assert inst.b0 == inst.bmax == round(0.4 * energy)
        assert inst.bmin == 0
        assert inst.q0 == round(1.1 * energy)
        assert inst.v == round(0.02 * energy)

    def test_no_fuel_calibration(self):
        inst = generate(GenSpec(n_nodes=25, seed=6, q_frac=0.0, b_frac=1.3))
        assert inst.q0 == 0
        assert solve(inst).status == "optimal"

    def test_infeasible_fractions_raise(self):
        # battery below the relaxed minimum with no fuel can never fly
        with pytest.raises(RuntimeError, match="no feasible instance"):
            generate(GenSpec(n_nodes=25, seed=6, q_frac=0.0, b_frac=0.3))


class TestDeterminism:
    def test_same_spec_same_bytes(self):
        spec = GenSpec(n_nodes=80, seed=21)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = dumps(generate(spec))
            b = dumps(generate(spec))
        assert a == b

    def test_different_seed_differs(self):
        a = generate(GenSpec(n_nodes=80, seed=21))
        b = generate(GenSpec(n_nodes=80, seed=22))
        assert dumps(a) != dumps(b)

    def test_lattice_reruns_identical(self):
        spec = GenSpec(n_nodes=49, family="lattice", seed=2, b_frac=0.7)
        assert dumps(gen_lattice(spec)) == dumps(gen_lattice(spec))


class TestGenSpec:
    def test_round_trip(self):
        spec = GenSpec(n_nodes=64, family="lattice", dims=(8, 8), seed=13,
                       noise_target=0.25, v_frac=0.01)
        assert GenSpec.from_dict(spec.to_dict()) == spec

    def test_unknown_field_rejected(self):
        doc = GenSpec(n_nodes=10).to_dict()
        doc["warp_drive"] = 9
        with pytest.raises(ValueError, match="warp_drive"):
            GenSpec.from_dict(doc)

    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            GenSpec(n_nodes=1)
        with pytest.raises(ValueError):
            GenSpec(n_nodes=10, family="donut")
        with pytest.raises(ValueError):
            GenSpec(n_nodes=10, dim=4)
        with pytest.raises(ValueError):
            GenSpec(n_nodes=10, noise_target=1.0)
        with pytest.raises(ValueError):
            GenSpec(n_nodes=10, b_frac=-0.1)
        with pytest.raises(ValueError):
            GenSpec(n_nodes=10, quantization=0.0)

    def test_family_dispatch_guards(self):
        with pytest.raises(ValueError):
            gen_euclidean(GenSpec(n_nodes=9, family="lattice"))
        with pytest.raises(ValueError):
            gen_lattice(GenSpec(n_nodes=9))

    def test_meta_carries_spec_and_stats(self):
        inst = generate(GenSpec(n_nodes=30, seed=2))
        for key in ("n_nodes", "family", "seed", "noise_fraction",
                    "noise_window_met", "zone_count", "sup_energy_units",
                    "undirected_edges", "discarded_draws"):
            assert key in inst.meta


class TestFarthestPair:
    def test_simple(self):
        pts = np.array([[0.0, 0.0], [0.2, 0.1], [1.0, 1.0], [0.4, 0.4]])
        assert farthest_pair(pts) == (0, 2)

    def test_hull_shortcut_matches_bruteforce(self):
        rng = np.random.default_rng(0)
        pts = rng.random((500, 2))
        i, j = farthest_pair(pts)
        best = max(((a, b) for a in range(500) for b in range(a + 1, 500)),
                   key=lambda ab: math.dist(pts[ab[0]], pts[ab[1]]))
        assert math.dist(pts[i], pts[j]) == pytest.approx(
            math.dist(pts[best[0]], pts[best[1]]))
