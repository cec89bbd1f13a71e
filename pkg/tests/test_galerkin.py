import numpy as np
import pytest

from polygal import (BadDimension, BadLevel, ExteriorCoordinates,
                     GalerkinSequence, adjacent_rho, classify,
                     compile_cone, embed_coordinates, estimate_delta,
                     estimate_kappa, kappa_rho_bound, project_coords,
                     project_interior, spherical_grid_normals)

from conftest import random_point_hull, regular_normals


def test_planar_grids():
    g1 = spherical_grid_normals(2, 1)
    assert g1.count == 4
    angles = np.sort(g1.angles())
    assert angles == pytest.approx([0, np.pi / 2, np.pi, 3 * np.pi / 2])
    g2 = spherical_grid_normals(2, 2)
    assert g2.count == 8
    with pytest.raises(BadLevel):
        spherical_grid_normals(2, 0)
    with pytest.raises(BadDimension):
        spherical_grid_normals(4, 2)


def test_spherical_grid_level2():
    g = spherical_grid_normals(3, 2)
    assert np.allclose(np.linalg.norm(g.matrix, axis=1), 1.0, atol=1e-12)
    # Two poles plus three rings of eight.
    assert g.count == 26
    poles = [row for row in g.matrix if abs(abs(row[0]) - 1) < 1e-12]
    assert len(poles) == 2
    with pytest.raises(BadLevel):
        spherical_grid_normals(3, 1)


def test_grid_nesting_is_exact():
    for d, levels in ((2, (1, 2, 3)), (3, (2, 3))):
        systems = [spherical_grid_normals(d, k) for k in levels]
        seq = GalerkinSequence.from_systems(systems)
        for coarse, fine, mapping in zip(systems, systems[1:], seq.row_maps):
            assert np.array_equal(fine.matrix[mapping], coarse.matrix)


def test_sequence_rejects_non_nested():
    a = regular_normals(4, offset=0.0)
    b = regular_normals(8, offset=0.1)
    with pytest.raises(ValueError):
        GalerkinSequence.from_systems([a, b])


def test_delta_closed_forms(square_ns, hexagon_ns):
    assert estimate_delta(square_ns) == pytest.approx(2 * np.sin(np.pi / 8))
    assert estimate_delta(hexagon_ns) == pytest.approx(2 * np.sin(np.pi / 12))
    for n in (10, 24, 48):
        ns = regular_normals(n, offset=0.3)
        assert estimate_delta(ns) == pytest.approx(2 * np.sin(np.pi / (2 * n)),
                                                   abs=1e-12)


def test_delta_3d_upper_estimate():
    g = spherical_grid_normals(3, 2)
    est = estimate_delta(g, samples=10_000)
    # Probe-based estimate sits above the sampled sup and below 2.
    assert 0.0 < est < 2.0
    true_lower = np.sqrt(2 - 2 * np.cos(np.pi / 8))
    assert est >= true_lower - 1e-9


def test_kappa_values(hexagon_ns, square_ns):
    kappa_hex = estimate_kappa(hexagon_ns)
    assert kappa_hex == pytest.approx(1 / np.sqrt(3), abs=1e-6)
    rho = adjacent_rho(hexagon_ns)
    assert rho == pytest.approx(0.5, abs=1e-12)
    assert kappa_hex <= kappa_rho_bound(rho) + 1e-9
    assert kappa_rho_bound(rho) == pytest.approx(np.sqrt(2), abs=1e-12)
    kappa_sq = estimate_kappa(square_ns)
    assert 0.0 <= kappa_sq <= 1.0 + 1e-9


def test_monotone_constants_along_levels():
    deltas, kappas = [], []
    for k in (1, 2, 3):
        ns = spherical_grid_normals(2, k)
        deltas.append(estimate_delta(ns))
        kappas.append(estimate_kappa(ns))
    assert deltas == sorted(deltas, reverse=True)
    assert kappas == sorted(kappas, reverse=True)
    assert kappas[2] == pytest.approx(np.tan(np.pi / 16), abs=1e-6)


def test_embed_square_into_octagon():
    seq = GalerkinSequence.from_grid(2, [1, 2])
    embedded = embed_coordinates(np.ones(4), seq, 0, 1)
    fine_cone = compile_cone(seq.levels[1])
    cv = classify(embedded.b, fine_cone)
    assert cv.classification == "boundary"
    mapping = seq.row_map(0, 1)
    assert embedded.b[mapping] == pytest.approx(np.ones(4))
    new_rows = np.setdiff1d(np.arange(8), mapping)
    assert embedded.b[new_rows] == pytest.approx(np.full(4, np.sqrt(2)), abs=1e-9)


def test_embed_round_trip_and_rejections():
    seq = GalerkinSequence.from_grid(2, [1, 2])
    coarse_cone = compile_cone(seq.levels[0])
    embedded = embed_coordinates(np.ones(4), seq, 0, 1, coarse_cone=coarse_cone)
    mapping = seq.row_map(0, 1)
    assert embedded.b[mapping] == pytest.approx(np.ones(4))
    with pytest.raises(ValueError):
        embed_coordinates(np.ones(4), seq, 1, 0)
    with pytest.raises(ExteriorCoordinates):
        embed_coordinates(np.array([1.0, 1.0, -2.0, 1.0]), seq, 0, 1)
    # Non-minimal coordinates (slack first row of an octagon) are rejected
    # without a cone as well.
    seq2 = GalerkinSequence.from_grid(2, [2, 3])
    loose = np.array([3.0, 1, 1, 1, 1, 1, 1, 1])
    with pytest.raises(ExteriorCoordinates):
        embed_coordinates(loose, seq2, 0, 1)


def test_boundary_landing_random():
    seq = GalerkinSequence.from_grid(2, [2, 3])
    coarse_cone = compile_cone(seq.levels[0])
    fine_cone = compile_cone(seq.levels[1])
    fine_matrix = fine_cone.matrix()
    rng = np.random.default_rng(21)
    for _ in range(25):
        hull = random_point_hull(rng)
        b = project_interior(hull, coarse_cone, rng.uniform(0.1, 0.4)).coords.b
        embedded = embed_coordinates(b, seq, 0, 1, coarse_cone=coarse_cone)
        cv = classify(embedded.b, fine_cone)
        assert cv.classification == "boundary"
        assert (fine_matrix.T @ embedded.b).min() <= 1e-8


def test_finer_projections_nest():
    seq = GalerkinSequence.from_grid(2, [2, 3])
    coarse, fine = seq.levels
    fine_cone = compile_cone(fine)
    mapping = seq.row_map(0, 1)
    rng = np.random.default_rng(22)
    for _ in range(25):
        hull = random_point_hull(rng)
        b_coarse = project_coords(hull, coarse).coords.b
        fine_real = project_coords(hull, fine_cone,
                                   with_realization=True).realization
        support_on_coarse = (coarse.matrix @ fine_real.vertices.T).max(axis=1)
        assert (support_on_coarse <= b_coarse + 1e-9).all()
