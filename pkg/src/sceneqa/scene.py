"""Scene annotations, their ingestion, and scene-graph construction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .relations import Relation, forward_direction, relation_from_index

EGO_ID = "ego"
EGO_CATEGORY = "me"

# statuses an object of each category can carry; empty means "no status"
DEFAULT_STATUS_MAP: Dict[str, Tuple[str, ...]] = {
    "car": ("moving", "stopped", "parked"),
    "truck": ("moving", "stopped", "parked"),
    "bus": ("moving", "stopped", "parked"),
    "trailer": ("moving", "stopped", "parked"),
    "construction vehicle": ("moving", "stopped", "parked"),
    "pedestrian": ("moving", "standing", "sitting"),
    "motorcycle": ("with rider", "without rider"),
    "bicycle": ("with rider", "without rider"),
    "traffic cone": (),
    "barrier": (),
}


class SceneSchemaError(ValueError):
    """An annotation record does not match the scene schema."""


@dataclass(frozen=True)
class Taxonomy:
    categories: Tuple[str, ...]
    statuses: Tuple[str, ...]
    status_map: Mapping[str, Tuple[str, ...]] = field(default_factory=dict, compare=False)

    def valid_pairs(self) -> List[Tuple[str, str]]:
        return [(s, c) for c in self.categories for s in self.status_map.get(c, ())]

    def default_blacklist(self) -> frozenset:
        """Every (status, category) combination the status map does not allow."""
        valid = set(self.valid_pairs())
        return frozenset(
            (s, c) for c in self.categories for s in self.statuses if (s, c) not in valid
        )

    @classmethod
    def from_status_map(cls, status_map: Mapping[str, Sequence[str]]) -> "Taxonomy":
        statuses: List[str] = []
        for values in status_map.values():
            for s in values:
                if s not in statuses:
                    statuses.append(s)
        return cls(
            categories=tuple(status_map),
            statuses=tuple(statuses),
            status_map={c: tuple(v) for c, v in status_map.items()},
        )


DEFAULT_TAXONOMY = Taxonomy.from_status_map(DEFAULT_STATUS_MAP)


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle in radians into [-pi, pi)."""
    if -math.pi <= yaw < math.pi:
        return yaw
    wrapped = math.fmod(yaw + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    wrapped -= math.pi
    # fmod can land exactly on +pi after the shift
    return -math.pi if wrapped >= math.pi else wrapped


@dataclass(frozen=True)
class Box3D:
    """Oriented 3D box: center and sizes in meters, yaw in radians."""

    x: float
    y: float
    z: float
    x_size: float
    y_size: float
    z_size: float
    yaw: float

    def __post_init__(self):
        values = (self.x, self.y, self.z, self.x_size, self.y_size, self.z_size, self.yaw)
        if not all(math.isfinite(v) for v in values):
            raise SceneSchemaError(f"non-finite box coordinates {values}")
        if min(self.x_size, self.y_size, self.z_size) <= 0.0:
            raise SceneSchemaError(
                f"degenerate box: sizes {(self.x_size, self.y_size, self.z_size)} must be positive"
            )
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    def to_list(self) -> List[float]:
        return [self.x, self.y, self.z, self.x_size, self.y_size, self.z_size, self.yaw]

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class SceneObject:
    object_id: str
    category: str
    status: Optional[str]
    box: Box3D


@dataclass(frozen=True)
class EgoState:
    velocity: Tuple[float, float, float]
    heading_yaw: float
    position: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        values = tuple(self.velocity) + tuple(self.position) + (self.heading_yaw,)
        if not all(math.isfinite(v) for v in values):
            raise SceneSchemaError(f"non-finite ego state {values}")
        object.__setattr__(self, "heading_yaw", normalize_yaw(self.heading_yaw))

    def forward(self) -> Tuple[float, float]:
        return forward_direction(self.velocity, self.heading_yaw)


@dataclass(frozen=True)
class Scene:
    scene_id: str
    objects: Tuple[SceneObject, ...]
    ego: EgoState


# ---------------------------------------------------------------- ingestion


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneSchemaError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise SceneSchemaError(f"{where}: non-finite value {value!r}")
    return value


def _vector(value, n: int, where: str) -> Tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise SceneSchemaError(f"{where}: expected a list of {n} numbers, got {value!r}")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(value))


def _require(record: Mapping, key: str, where: str):
    if not isinstance(record, Mapping):
        raise SceneSchemaError(f"{where}: expected an object, got {type(record).__name__}")
    if key not in record:
        raise SceneSchemaError(f"{where}: missing field {key!r}")
    return record[key]


def load_scene(document: Mapping, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> Scene:
    """Validate one annotation record into a :class:`Scene`.

    Unknown categories or statuses are reported as errors rather than
    dropped, so a taxonomy mismatch cannot silently shrink a scene.
    """
    scene_id = _require(document, "scene_id", "scene")
    if not isinstance(scene_id, str) or not scene_id:
        raise SceneSchemaError(f"scene: scene_id must be a non-empty string, got {scene_id!r}")
    where = f"scene {scene_id}"

    ego_rec = _require(document, "ego", where)
    velocity = _vector(_require(ego_rec, "velocity", f"{where}.ego"), 3, f"{where}.ego.velocity")
    heading = _number(_require(ego_rec, "heading_yaw", f"{where}.ego"), f"{where}.ego.heading_yaw")
    position = (0.0, 0.0, 0.0)
    if "position" in ego_rec:
        position = _vector(ego_rec["position"], 3, f"{where}.ego.position")
    ego = EgoState(velocity=velocity, heading_yaw=heading, position=position)

    raw_objects = _require(document, "objects", where)
    if not isinstance(raw_objects, list):
        raise SceneSchemaError(f"{where}.objects: expected a list")

    seen = set()
    objects = []
    for i, rec in enumerate(raw_objects):
        owhere = f"{where}.objects[{i}]"
        oid = _require(rec, "id", owhere)
        if not isinstance(oid, str) or not oid:
            raise SceneSchemaError(f"{owhere}: id must be a non-empty string")
        if oid == EGO_ID:
            raise SceneSchemaError(f"{owhere}: id {EGO_ID!r} is reserved for the ego car")
        if oid in seen:
            raise SceneSchemaError(f"{owhere}: duplicate id {oid!r}")
        seen.add(oid)

        category = _require(rec, "category", owhere)
        if category not in taxonomy.categories:
            raise SceneSchemaError(f"{owhere}: unknown category {category!r}")
        status = rec.get("status")
        if status is not None and status not in taxonomy.statuses:
            raise SceneSchemaError(f"{owhere}: unknown status {status!r}")
        box = Box3D(*_vector(_require(rec, "box", owhere), 7, f"{owhere}.box"))
        objects.append(SceneObject(oid, category, status, box))

    return Scene(scene_id=scene_id, objects=tuple(objects), ego=ego)


def scene_to_record(scene: Scene) -> dict:
    ego = {"velocity": list(scene.ego.velocity), "heading_yaw": scene.ego.heading_yaw}
    if any(scene.ego.position):
        ego["position"] = list(scene.ego.position)
    objects = []
    for obj in scene.objects:
        rec = {"id": obj.object_id, "category": obj.category}
        if obj.status is not None:
            rec["status"] = obj.status
        rec["box"] = obj.box.to_list()
        objects.append(rec)
    return {"scene_id": scene.scene_id, "ego": ego, "objects": objects}


def load_scenes_file(path, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> List[Scene]:
    """Read a file holding one scene record or an array of them."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise SceneSchemaError(f"{path}: not valid JSON ({exc})") from None
    records = doc if isinstance(doc, list) else [doc]
    return [load_scene(rec, taxonomy) for rec in records]


def scene_files(directory) -> List[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.suffix == ".json" and p.is_file())


# ------------------------------------------------------------- scene graph


class SceneGraph:
    """Complete directed graph over a scene's objects plus the ego node.

    ``relations[i, j]`` is the index of the relation such that node ``j`` is
    to that side of node ``i`` (``-1`` on the diagonal). The ego node is last.
    """

    def __init__(self, scene_id: str, nodes: Sequence[SceneObject], relations: np.ndarray):
        self.scene_id = scene_id
        self.nodes: Tuple[SceneObject, ...] = tuple(nodes)
        self.relations = relations
        self.ego_index = len(self.nodes) - 1
        n = len(self.nodes)
        # neighbours[i][r] -> indices at relation r from i, in node order
        self.neighbours: List[List[Tuple[int, ...]]] = []
        for i in range(n):
            row = relations[i]
            self.neighbours.append(
                [tuple(int(j) for j in np.flatnonzero(row == r)) for r in range(len(Relation))]
            )

    def __len__(self):
        return len(self.nodes)

    @property
    def edges(self) -> Dict[Tuple[str, str], Relation]:
        out = {}
        for i, a in enumerate(self.nodes):
            for j, b in enumerate(self.nodes):
                if i != j:
                    out[(a.object_id, b.object_id)] = relation_from_index(int(self.relations[i, j]))
        return out

    def related(self, ref: int, relation: Relation) -> Tuple[int, ...]:
        return self.neighbours[ref][relation.index]

    def to_record(self) -> dict:
        nodes = [
            {"id": n.object_id, "category": n.category, "status": n.status} for n in self.nodes
        ]
        edges = [[a, b, r.value] for (a, b), r in self.edges.items()]
        return {"scene_id": self.scene_id, "nodes": nodes, "edges": edges}


def ego_node(ego: EgoState) -> SceneObject:
    # nominal ego footprint; only the center takes part in relations
    px, py, pz = ego.position
    return SceneObject(EGO_ID, EGO_CATEGORY, None, Box3D(px, py, pz, 4.08, 1.73, 1.56, ego.heading_yaw))


def build_scene_graph(scene: Scene) -> SceneGraph:
    """Build the complete relation graph of a scene, ego node included."""
    nodes = list(scene.objects) + [ego_node(scene.ego)]
    centers = np.array([[n.box.x, n.box.y] for n in nodes], dtype=np.float64).reshape(-1, 2)
    fx, fy = scene.ego.forward()
    relations = _kernels.relation_matrix(centers, fx, fy)
    return SceneGraph(scene.scene_id, nodes, relations)


def build_graphs(scenes: Iterable[Scene]) -> List[SceneGraph]:
    return [build_scene_graph(s) for s in scenes]
