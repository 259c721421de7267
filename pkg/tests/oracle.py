"""Brute-force reference semantics for every shipped template.

Written against the scene objects and ``relation_between`` directly, without
the scene graph, the program stack or the kernels, so agreement with the
executor is a meaningful check.
"""

import math

from sceneqa.relations import Relation, relation_between
from sceneqa.scene import ego_node


class Invalid(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class World:
    def __init__(self, scene):
        self.ego_state = scene.ego
        self.ego = ego_node(scene.ego)
        self.objects = list(scene.objects) + [self.ego]

    def match(self, status, category):
        out = []
        for o in self.objects:
            if status and o.status != status:
                continue
            if category == "me":
                if o is not self.ego:
                    continue
            elif category == "thing":
                if o is self.ego:
                    continue
            elif o.category != category:
                continue
            out.append(o)
        return out

    def the(self, status, category, among=None):
        pool = self.match(status, category)
        if among is not None:
            pool = [o for o in pool if any(o is a for a in among)]
        if not pool:
            raise Invalid("EmptyReference")
        if len(pool) > 1:
            raise Invalid("NonUniqueReference")
        return pool[0]

    def around(self, ref, relation):
        rel = Relation(relation)
        return [o for o in self.objects
                if o is not ref and relation_between(ref, o, self.ego_state) is rel]

    def same_status(self, ref):
        if ref.status is None:
            raise Invalid("UndefinedAnswer")
        return [o for o in self.objects if o is not ref and o.status == ref.status]

    def status(self, obj):
        if obj.status is None:
            raise Invalid("UndefinedAnswer")
        return obj.status


def _yn(flag):
    return "yes" if flag else "no"


def answer(scene, template_id, b):
    """Ground-truth answer of a template under binding ``b``; raises Invalid."""
    w = World(scene)
    g = b.get

    def the(a, o, among=None):
        return w.the(g(a, ""), g(o), among)

    def filt(pool, a, o):
        keep = w.match(g(a, ""), g(o))
        return [x for x in pool if any(x is k for k in keep)]

    def compare(x, y):
        if x is y:
            raise Invalid("TrivialDegenerate")
        return _yn(w.status(x) == w.status(y))

    t = template_id
    if t == "exist_h0":
        return _yn(w.match(g("A", ""), g("O")))
    if t == "count_h0":
        return str(len(w.match(g("A", ""), g("O"))))
    if t == "exist_h0_same_status":
        return _yn(filt(w.same_status(the("A", "O")), "A2", "O2"))
    if t == "count_h0_same_status":
        return str(len(w.same_status(the("A", "O"))))
    if t in ("exist_h1", "count_h1"):
        pool = filt(w.around(the("A", "O"), g("R")), "A2", "O2")
        return _yn(pool) if t.startswith("exist") else str(len(pool))
    if t in ("exist_h1_same_status", "count_h1_same_status"):
        mid = the("A2", "O2", w.around(the("A", "O"), g("R")))
        pool = filt(w.same_status(mid), "A3", "O3")
        return _yn(pool) if t.startswith("exist") else str(len(pool))
    if t == "query_object_h0":
        return the("A", "O").category
    if t == "query_status_h0":
        return w.status(the("A", "O"))
    if t in ("query_object_h1", "query_status_h1"):
        obj = the("A2", "O2", w.around(the("A", "O"), g("R")))
        return obj.category if "object" in t else w.status(obj)
    if t == "query_object_h1_both":
        first = w.around(the("A2", "O2"), g("R2"))
        second = w.around(the("A", "O"), g("R"))
        both = [o for o in first if any(o is s for s in second)]
        return the("A3", "O3", both).category
    if t == "comparison_h0":
        return compare(the("A", "O"), the("A2", "O2"))
    if t == "comparison_h1_left":
        x = the("A2", "O2", w.around(the("A", "O"), g("R")))
        return compare(x, the("A3", "O3"))
    if t == "comparison_h1_right":
        x = the("A", "O")
        return compare(x, the("A3", "O3", w.around(the("A2", "O2"), g("R"))))
    if t == "comparison_h1_both":
        x = the("A2", "O2", w.around(the("A", "O"), g("R")))
        y = the("A4", "O4", w.around(the("A3", "O3"), g("R2")))
        return compare(x, y)
    raise KeyError(f"no oracle for template {template_id}")


def octant_oracle(ref, target, forward):
    """Relation from the cross-product side of rays at 0, +-30, +-90, +-150 degrees."""
    d = (target[0] - ref[0], target[1] - ref[1])

    def ray(deg):
        a = math.atan2(forward[1], forward[0]) + math.radians(deg)
        return math.cos(a), math.sin(a)

    def left_of(deg):
        rx, ry = ray(deg)
        return rx * d[1] - ry * d[0] > 0

    ahead = forward[0] * d[0] + forward[1] * d[1] > 0
    if ahead and not left_of(30) and left_of(-30):
        return Relation.FRONT
    if left_of(30) and not left_of(90):
        return Relation.FRONT_LEFT
    if left_of(90) and not left_of(150):
        return Relation.BACK_LEFT
    if left_of(-90) and not left_of(-30):
        return Relation.FRONT_RIGHT
    if left_of(-150) and not left_of(-90):
        return Relation.BACK_RIGHT
    return Relation.BACK
