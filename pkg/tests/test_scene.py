import json
import math

import numpy as np
import pytest

from sceneqa import _kernels
from sceneqa.relations import Relation, relation_between
from sceneqa.scene import (
    DEFAULT_TAXONOMY,
    EGO_ID,
    SceneSchemaError,
    build_scene_graph,
    load_scene,
    load_scenes_file,
    normalize_yaw,
    scene_to_record,
)
from sceneqa.synthetic import random_scenes


def record(objects, velocity=(5.0, 0.0, 0.0), heading=0.0, scene_id="s1"):
    return {"scene_id": scene_id, "ego": {"velocity": list(velocity), "heading_yaw": heading},
            "objects": objects}


def car(oid, x, y, status="parked", category="car"):
    rec = {"id": oid, "category": category, "box": [x, y, 0.0, 4.0, 2.0, 1.5, 0.0]}
    if status is not None:
        rec["status"] = status
    return rec


def test_load_basic():
    scene = load_scene(record([car("a", 10, 0), car("b", 0, 10, "moving")]))
    assert [o.object_id for o in scene.objects] == ["a", "b"]
    assert scene.ego.position == (0.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "mutate,message",
    [
        (lambda r: r["objects"].append(car("a", 1, 1)), "duplicate id"),
        (lambda r: r["objects"][0].update(id=EGO_ID), "reserved"),
        (lambda r: r["objects"][0].update(category="tram"), "unknown category"),
        (lambda r: r["objects"][0].update(status="flying"), "unknown status"),
        (lambda r: r["objects"][0]["box"].__setitem__(3, 0.0), "degenerate box"),
        (lambda r: r["objects"][0]["box"].__setitem__(0, float("nan")), "non-finite"),
        (lambda r: r["objects"][0].pop("box"), "missing field 'box'"),
        (lambda r: r.pop("ego"), "missing field 'ego'"),
        (lambda r: r["ego"].update(velocity=[1, 2]), "list of 3"),
    ],
)
def test_load_errors(mutate, message):
    rec = record([car("a", 10, 0)])
    mutate(rec)
    with pytest.raises(SceneSchemaError, match=message):
        load_scene(rec)


def test_round_trip():
    for scene in random_scenes(1, 5):
        rec = scene_to_record(scene)
        again = load_scene(json.loads(json.dumps(rec)))
        assert again == scene


def test_load_file_array(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps([record([car("a", 1, 0)], scene_id="s1"), record([], scene_id="s2")]))
    assert [s.scene_id for s in load_scenes_file(p)] == ["s1", "s2"]
    p.write_text("{not json")
    with pytest.raises(SceneSchemaError, match="not valid JSON"):
        load_scenes_file(p)


def test_normalize_yaw():
    assert normalize_yaw(math.pi) == pytest.approx(-math.pi)
    assert normalize_yaw(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_graph_shape_and_edges():
    scene = load_scene(record([car("a", 10, 0), car("b", 0, 10), car("c", -10, -1)]))
    g = build_scene_graph(scene)
    assert len(g) == 4 and g.nodes[-1].object_id == EGO_ID and g.nodes[-1].status is None
    assert len(g.edges) == 4 * 3
    assert g.edges[("ego", "a")] is Relation.FRONT
    assert g.edges[("ego", "b")] is Relation.FRONT_LEFT
    assert g.edges[("a", "ego")] is Relation.BACK
    assert np.all(np.diag(g.relations) == -1)


def test_graph_complement_and_matches_pairwise():
    for scene in random_scenes(4, 10):
        g = build_scene_graph(scene)
        edges = g.edges
        for (a, b), r in edges.items():
            assert edges[(b, a)] is r.opposite()
        for i, x in enumerate(g.nodes):
            for j, y in enumerate(g.nodes):
                if i != j:
                    assert g.relations[i, j] == relation_between(x, y, scene.ego).index


def test_backends_agree_on_relation_matrix():
    backends = _kernels.available_backends()
    rng = np.random.default_rng(0)
    for _ in range(20):
        centers = rng.uniform(-50, 50, size=(rng.integers(1, 30), 2))
        phi = rng.uniform(-np.pi, np.pi)
        mats = [m.relation_matrix(centers, np.cos(phi), np.sin(phi)) for m in backends.values()]
        for m in mats[1:]:
            np.testing.assert_array_equal(m, mats[0])


def test_graph_rejects_coincident_centers():
    scene = load_scene(record([car("a", 0, 0)]))
    with pytest.raises(ValueError, match="degenerate pair"):
        build_scene_graph(scene)


def test_graph_record_serializes():
    g = build_scene_graph(load_scene(record([car("a", 10, 0)])))
    rec = json.loads(json.dumps(g.to_record()))
    assert rec["nodes"][-1] == {"id": "ego", "category": "me", "status": None}
    assert ["ego", "a", "front"] in rec["edges"]


def test_taxonomy_blacklist():
    bl = DEFAULT_TAXONOMY.default_blacklist()
    assert ("parked", "pedestrian") in bl and ("moving", "traffic cone") in bl
    assert ("parked", "car") not in bl
