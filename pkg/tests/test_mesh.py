"""Mesh parsing, validation, and combinatorial helpers."""

import numpy as np
import pytest

import calabiflow as cf
from _util import MESH_NAMES, mesh, subdivide


EXPECTED_SIZES = {
    "tetrahedron": (4, 6, 4, 2),
    "octahedron": (6, 12, 8, 2),
    "icosahedron": (12, 30, 20, 2),
    "torus": (7, 21, 14, 0),
}


@pytest.mark.parametrize("name", MESH_NAMES)
def test_builtin_sizes(name):
    t = mesh(name)
    assert (t.n_vertices, t.n_edges, t.n_faces, t.chi) == EXPECTED_SIZES[name]
    assert t.chi == t.n_vertices - t.n_edges + t.n_faces


@pytest.mark.parametrize("name", MESH_NAMES)
def test_edge_table_consistency(name):
    t = mesh(name)
    # edges sorted ascending within a row and lexicographically across rows
    assert np.all(t.edges[:, 0] < t.edges[:, 1])
    keys = [tuple(e) for e in t.edges]
    assert keys == sorted(keys)
    assert t.edge_index == {k: i for i, k in enumerate(keys)}
    # every edge lies in exactly the two faces recorded for it
    for e, (a, b) in enumerate(keys):
        for f in t.edge_faces[e]:
            assert {a, b} <= set(int(v) for v in t.faces[f])
    # face_edges[f, m] joins the two corners other than m
    for f in range(t.n_faces):
        tri = [int(v) for v in t.faces[f]]
        for m in range(3):
            others = sorted(tri[:m] + tri[m + 1 :])
            assert keys[t.face_edges[f, m]] == tuple(others)


@pytest.mark.parametrize("name", MESH_NAMES)
def test_degrees(name):
    t = mesh(name)
    deg = np.zeros(t.n_vertices, dtype=int)
    for a, b in t.edges:
        deg[a] += 1
        deg[b] += 1
    assert np.array_equal(t.degrees, deg)
    # closed surface: every vertex has degree >= 3
    assert t.degrees.min() >= 3


def test_parse_comments_and_blank_lines():
    text = """
    # tetrahedron with comments
    4 4   # header
    0 1 2
    0 1 3  # a face

    0 2 3
    1 2 3
    """
    t = cf.parse_mesh(text)
    assert (t.n_vertices, t.n_faces) == (4, 4)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "empty"),
        ("4\n0 1 2\n", "expected 2 integers"),
        ("4 4\n0 1 2\n", "promises 4 faces"),
        ("4 1\n0 1 x\n", "not an integer"),
        ("0 1\n0 1 2\n", "must be positive"),
        ("4 2\n0 1 2\n0 1\n", "expected 3 integers"),
    ],
)
def test_syntax_errors(text, fragment):
    with pytest.raises(cf.MeshSyntaxError) as exc:
        cf.parse_mesh(text)
    assert fragment in str(exc.value)


@pytest.mark.parametrize(
    "n, faces, fragment",
    [
        (4, [(0, 1, 1), (0, 2, 3)], "repeats a vertex"),
        (4, [(0, 1, 2), (0, 2, 1), (0, 1, 3), (0, 3, 1)], "same vertex set"),
        (4, [(0, 1, 2), (0, 1, 3)], "expected exactly 2"),
        (5, [(0, 1, 2), (0, 1, 3)], "expected exactly 2"),
        (2, [(0, 1, 2)], "at least 3 vertices"),
        (4, [(0, 1, 2), (0, 1, 4)], "outside range"),
    ],
)
def test_validation_errors(n, faces, fragment):
    with pytest.raises(cf.MeshValidationError) as exc:
        cf.Triangulation(n, faces)
    assert fragment in str(exc.value)


def test_pinched_link_rejected():
    # Two tetrahedra glued at a single vertex: every edge lies in two faces
    # but the shared vertex's link is two disjoint cycles.
    faces = [
        (0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3),
        (3, 4, 5), (3, 4, 6), (3, 5, 6), (4, 5, 6),
    ]
    with pytest.raises(cf.MeshValidationError, match="link"):
        cf.Triangulation(7, faces)


def test_subdivision_preserves_topology():
    t = mesh("octahedron")
    s = subdivide(t)
    assert s.n_vertices == t.n_vertices + t.n_edges == 18
    assert s.n_faces == 4 * t.n_faces
    assert s.chi == t.chi
    s2 = subdivide(s)
    assert s2.n_vertices == 66
    assert s2.chi == 2
    tor2 = subdivide(mesh("torus"))
    assert tor2.chi == 0


def test_vertex_subset_canonical_form():
    t = mesh("tetrahedron")
    s = cf.VertexSubset.of(t, [2, 0, 2])
    assert s.members == (0, 2)
    assert len(s) == 2 and list(s) == [0, 2]
    with pytest.raises(ValueError):
        cf.VertexSubset.of(t, [])
    with pytest.raises(ValueError):
        cf.VertexSubset.of(t, [0, 1, 2, 3])
    with pytest.raises(ValueError):
        cf.VertexSubset.of(t, [4])


def test_subcomplex_euler_oracle():
    t = mesh("tetrahedron")
    # single vertex: a point
    assert cf.subcomplex_euler(t, [0]) == 1
    # an edge: two vertices, one edge
    assert cf.subcomplex_euler(t, [0, 1]) == 1
    # a face: full triangle
    assert cf.subcomplex_euler(t, [0, 1, 2]) == 1
    # everything: the sphere itself
    assert cf.subcomplex_euler(t, [0, 1, 2, 3]) == 2
    octa = mesh("octahedron")
    # two antipodal vertices of the octahedron span no edge
    pairs = {tuple(e) for e in octa.edges}
    v = 0
    opp = next(u for u in range(1, 6) if (v, u) not in pairs)
    assert cf.subcomplex_euler(octa, [v, opp]) == 2


def test_link_pairs_oracle():
    t = mesh("tetrahedron")
    lk = cf.link_pairs(t, [0])
    assert lk == [((1, 2), 0), ((1, 3), 0), ((2, 3), 0)]
    # link of a 2-subset: faces with exactly one vertex inside
    lk2 = cf.link_pairs(t, [0, 1])
    assert lk2 == [((2, 3), 0), ((2, 3), 1)]
    # link of everything is empty
    assert cf.link_pairs(t, [0, 1, 2, 3]) == []
