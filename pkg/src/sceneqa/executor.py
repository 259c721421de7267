"""Run template programs against a scene graph to obtain ground-truth answers."""

from __future__ import annotations

from typing import Mapping, Sequence, Tuple

from .relations import Relation
from .scene import SceneGraph
from .templates import ME, THING, Op


class ExecutionError(Exception):
    reason = "ExecutionError"


class EmptyReference(ExecutionError):
    """A definite reference ("the <A> <O>") matched nothing."""

    reason = "EmptyReference"


class NonUniqueReference(ExecutionError):
    """A definite reference matched more than one object."""

    reason = "NonUniqueReference"


class UndefinedAnswer(ExecutionError):
    """The question asks about the status of an object that has none."""

    reason = "UndefinedAnswer"


class TrivialDegenerate(ExecutionError):
    """The question compares an object with itself or relates it to itself."""

    reason = "TrivialDegenerate"


def _unique(objs: frozenset) -> int:
    if not objs:
        raise EmptyReference("reference matches no object")
    if len(objs) > 1:
        raise NonUniqueReference(f"reference matches {len(objs)} objects")
    (obj,) = objs
    return obj


def _status(graph: SceneGraph, obj: int) -> str:
    status = graph.nodes[obj].status
    if status is None:
        raise UndefinedAnswer(f"{graph.nodes[obj].object_id} has no status")
    return status


def _step(op: Op, value, stack: list, graph: SceneGraph) -> None:
    name = op.name
    nodes = graph.nodes
    if name == "scene":
        stack.append(frozenset(range(len(nodes))))
    elif name == "filter_status":
        objs = stack.pop()
        if value:
            objs = frozenset(i for i in objs if nodes[i].status == value)
        stack.append(objs)
    elif name == "filter_category":
        objs = stack.pop()
        ego = graph.ego_index
        if value == THING:
            objs = frozenset(i for i in objs if i != ego)
        elif value == ME:
            objs = objs & {ego}
        else:
            objs = frozenset(i for i in objs if nodes[i].category == value)
        stack.append(objs)
    elif name == "relate":
        ref = stack.pop()
        targets = frozenset(graph.related(ref, Relation.parse(value)))
        if targets == {ref}:
            raise TrivialDegenerate("relation target is the reference itself")
        stack.append(targets)
    elif name == "unique":
        stack.append(_unique(stack.pop()))
    elif name == "count":
        stack.append(len(stack.pop()))
    elif name == "exist":
        stack.append(bool(stack.pop()))
    elif name == "query_category":
        stack.append(nodes[stack.pop()].category)
    elif name == "query_status":
        stack.append(_status(graph, stack.pop()))
    elif name == "same_status_set":
        ref = stack.pop()
        status = _status(graph, ref)
        stack.append(frozenset(i for i, n in enumerate(nodes) if i != ref and n.status == status))
    elif name == "compare_status_equal":
        b = stack.pop()
        a = stack.pop()
        if a == b:
            raise TrivialDegenerate("comparing an object with itself")
        stack.append(_status(graph, a) == _status(graph, b))
    elif name == "intersect":
        b = stack.pop()
        a = stack.pop()
        stack.append(a & b)
    else:
        raise ValueError(f"unknown op {name}")


def run_prefix(
    program: Sequence[Op],
    binding: Mapping[str, str],
    graph: SceneGraph,
    start: int = 0,
    stack: Tuple = (),
) -> Tuple[int, Tuple]:
    """Execute ops from ``start`` until one needs an unbound slot.

    Returns the index of the first op not executed and the resulting stack.
    The input stack is not modified, so callers can branch on it.
    """
    work = list(stack)
    pc = start
    while pc < len(program):
        op = program[pc]
        if op.arg is not None and op.arg not in binding:
            break
        _step(op, binding[op.arg] if op.arg else None, work, graph)
        pc += 1
    return pc, tuple(work)


def format_answer(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def execute_program(program: Sequence[Op], binding: Mapping[str, str], graph: SceneGraph) -> str:
    """Answer of ``program`` under ``binding`` as a canonical string.

    Raises:
        EmptyReference, NonUniqueReference: a ``unique`` op saw the wrong
            number of objects.
        UndefinedAnswer: a status was needed from an object without one.
        TrivialDegenerate: an object would be compared with itself.
    """
    pc, stack = run_prefix(program, binding, graph)
    if pc != len(program):
        raise ValueError(f"incomplete binding: slot {program[pc].arg} is unbound")
    return format_answer(stack[-1])
