import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from midsub.errors import InvalidParameter, NonManifoldError
from midsub.mesh import QuadMesh, cube, read_obj, square_grid, write_obj
from midsub.operators import apply_word
from midsub.ringnet import (
    build_grid_mesh,
    grid_position,
    is_reflection_symmetric,
    is_rotation_symmetric,
    is_symmetric,
    rings,
)


def test_primal_grid_mesh_vertices():
    g = build_grid_mesh(5, 1, 3, "primal")
    assert g.get(1, 0, 0) == pytest.approx(1 + 0j)
    c, s = math.cos(math.radians(72)), math.sin(math.radians(72))
    assert g.get(0, 1, 0) == pytest.approx(complex(c, s))


def test_dual_grid_mesh_is_four_point_average():
    g = build_grid_mesh(5, 1, 3, "primal")
    d = build_grid_mesh(5, 1, 2, "dual")
    avg = (g.get(0, 0, 0) + g.get(1, 0, 0) + g.get(0, 1, 0) + g.get(1, 1, 0)) / 4
    assert d.get(1, 1, 0) == pytest.approx(avg)


def test_valence_four_grid_is_regular():
    g = build_grid_mesh(4, 1, 2, "primal")
    mesh = g.mesh
    assert all(mesh.vertex_valence(v) == 4 for v in range(mesh.n_vertices) if mesh.is_interior_vertex(v))
    pts = {(round(x, 12), round(y, 12)) for x, y in g.positions}
    assert all(float(x).is_integer() and float(y).is_integer() for x, y in pts)


@pytest.mark.parametrize("m,f", [(2, 1), (5, 0), (5, 5)])
def test_grid_mesh_rejects_bad_parameters(m, f):
    with pytest.raises(InvalidParameter):
        build_grid_mesh(m, f, 2, "primal")


@given(st.integers(3, 12), st.data())
def test_grid_formula(m, data):
    f = data.draw(st.integers(1, m - 1))
    g = build_grid_mesh(m, f, 2, "primal")
    w = np.exp(2j * np.pi * f / m)
    for v, (i, j, l) in enumerate(g.labels.tolist()):
        want = i * w ** l + j * w ** (l + 1)
        got = complex(*g.positions[v])
        assert abs(got - want) <= 1e-12 * max(1, abs(want))
        assert abs(grid_position(i, j, l, m, f, "primal") - want) <= 1e-12 * max(1, abs(want))


def test_rings_around_vertex_and_face():
    g = build_grid_mesh(5, 1, 2, "primal")
    sizes = [len(r) for r in rings(g)]
    assert sizes[0] == 1 and sizes[1] == 10
    d = build_grid_mesh(5, 1, 1, "dual")
    assert [len(r) for r in rings(d, connectivity="edge")][:2] == [5, 10]


def test_rings_separate_inner_from_outer():
    g = build_grid_mesh(6, 1, 4, "primal")
    rs = rings(g)
    mesh = g.mesh
    for k in range(1, len(rs) - 1):
        inner = set().union(*rs[:k])
        outer = set().union(*rs[k + 1:])
        for v in inner:
            assert not (set(mesh.neighbors(v)) & outer)


@pytest.mark.parametrize("m,f", [(3, 1), (5, 2), (6, 1), (7, 3)])
@pytest.mark.parametrize("kind", ["primal", "dual"])
def test_grid_meshes_are_symmetric(m, f, kind):
    g = build_grid_mesh(m, f, 3, kind)
    assert is_rotation_symmetric(g, f)
    assert is_reflection_symmetric(g)


def test_perturbed_grid_is_not_symmetric():
    g = build_grid_mesh(5, 1, 3, "primal")
    pos = g.positions.copy()
    pos[g.vertex(1, 1, 0)] += (1.0, 0.0)
    bad = g.with_positions(pos)
    assert not is_rotation_symmetric(bad, 1)
    assert not is_reflection_symmetric(bad)


@given(st.floats(-math.pi, math.pi))
def test_rotation_symmetry_survives_global_rotation(theta):
    g = build_grid_mesh(5, 1, 2, "primal")
    c, s = math.cos(theta), math.sin(theta)
    rot = g.with_positions(g.positions @ np.array([[c, s], [-s, c]]))
    assert is_rotation_symmetric(rot, 1)


def test_subdivided_symmetric_net_stays_symmetric():
    from midsub.ringnet import subdivide_net

    g = build_grid_mesh(5, 1, 4, "primal")
    assert is_symmetric(subdivide_net(g, "VAV"))


def test_symmetry_needs_planar_positions():
    g = build_grid_mesh(5, 1, 2, "primal")
    flat = g.with_positions(np.zeros((len(g.positions), 3)))
    with pytest.raises(InvalidParameter):
        is_rotation_symmetric(flat)


def test_cube_obj(tmp_path):
    p = tmp_path / "cube.obj"
    write_obj(cube(), p)
    m = read_obj(p)
    assert m.n_vertices == 8 and m.n_faces == 6
    assert all(len(f) == 4 for f in m.faces)
    assert all(m.vertex_valence(v) == 3 for v in range(8))


def test_obj_round_trip(tmp_path):
    mesh = apply_word(square_grid(4, 4, dim=3), "AR")
    p = tmp_path / "grid.obj"
    write_obj(mesh, p)
    back = read_obj(p)
    assert back.faces == mesh.faces
    assert np.allclose(back.positions, mesh.positions, rtol=1e-8, atol=1e-9)


def test_dangling_edge_is_non_manifold(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nl 1 3\n")
    with pytest.raises(NonManifoldError):
        read_obj(p)


def test_edge_shared_by_three_faces():
    pos = np.zeros((6, 3))
    with pytest.raises(NonManifoldError) as exc:
        QuadMesh(pos, ((0, 1, 2), (1, 0, 3), (0, 1, 4)))
    assert exc.value.elements


def test_unsupported_records_warn(tmp_path, caplog):
    p = tmp_path / "n.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n")
    m = read_obj(p)
    assert m.n_faces == 1
    assert "vn" in caplog.text
