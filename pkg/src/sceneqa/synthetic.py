"""Seeded random scenes for tests, benchmarks and demos."""

import math
import random

from .scene import DEFAULT_TAXONOMY, Box3D, EgoState, Scene, SceneObject

# rough (length, width, height) in meters per category
_SIZES = {
    "car": (4.6, 1.9, 1.7),
    "truck": (6.9, 2.5, 2.9),
    "bus": (11.0, 2.9, 3.5),
    "trailer": (12.0, 2.9, 3.9),
    "construction vehicle": (6.4, 2.8, 3.2),
    "pedestrian": (0.7, 0.7, 1.8),
    "motorcycle": (2.1, 0.8, 1.5),
    "bicycle": (1.7, 0.6, 1.3),
    "traffic cone": (0.4, 0.4, 1.0),
    "barrier": (2.5, 0.5, 1.0),
}


def random_scene(rng: random.Random, scene_id: str, n_objects: int, taxonomy=DEFAULT_TAXONOMY,
                 extent: float = 50.0, min_gap: float = 1.0) -> Scene:
    """A scene with ``n_objects`` objects scattered around a stationary-or-moving ego.

    Statuses are drawn from the statuses valid for each category, so the
    scene never contains combinations a default blacklist would forbid.
    Centers keep at least ``min_gap`` meters from each other and the ego.
    """
    speed = rng.choice([0.0, 0.0, rng.uniform(0.5, 15.0)])
    heading = rng.uniform(-math.pi, math.pi)
    course = heading + rng.uniform(-0.1, 0.1)
    ego = EgoState(
        velocity=(speed * math.cos(course), speed * math.sin(course), rng.uniform(-0.1, 0.1)),
        heading_yaw=heading,
    )
    # a few frequent categories make repeated (status, category) pairs likely
    weights = [4.0 if c in ("car", "pedestrian") else 1.0 for c in taxonomy.categories]
    centers = [(0.0, 0.0)]
    objects = []
    while len(objects) < n_objects:
        x = rng.uniform(-extent, extent)
        y = rng.uniform(-extent, extent)
        if any(math.hypot(x - cx, y - cy) < min_gap for cx, cy in centers):
            continue
        centers.append((x, y))
        category = rng.choices(taxonomy.categories, weights)[0]
        statuses = taxonomy.status_map.get(category, ())
        status = rng.choice(statuses) if statuses else None
        length, width, height = _SIZES.get(category, (1.0, 1.0, 1.0))
        box = Box3D(x, y, rng.uniform(-1.0, 1.0), length, width, height, rng.uniform(-math.pi, math.pi))
        objects.append(SceneObject(f"obj{len(objects):03d}", category, status, box))
    return Scene(scene_id=scene_id, objects=tuple(objects), ego=ego)


def random_scenes(seed: int, count: int, min_objects: int = 5, max_objects: int = 25):
    rng = random.Random(seed)
    return [
        random_scene(rng, f"scene-{seed}-{i:04d}", rng.randint(min_objects, max_objects))
        for i in range(count)
    ]
