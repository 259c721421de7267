"""Question-template registry: parsing, validation, serialization, rendering.

A registry file is a sequence of blank-line separated records::

    id: count_h1
    qtype: count
    hop: 1
    answer: integer
    slots: A O R A2 O2
    program: scene filter_status(A) filter_category(O) unique relate(R) ...
    variant: How many <A2> <O2>s are to the <R> of the <A> <O>?

Programs run on a value stack: every op pops its inputs and pushes one
output, so a program is well typed when the stack simulation succeeds and
leaves exactly one value of the template's answer type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .relations import Relation

QTYPES = ("exist", "count", "query_object", "query_status", "comparison")
ANSWER_TYPES = {
    "exist": "boolean",
    "count": "integer",
    "query_object": "category",
    "query_status": "status",
    "comparison": "boolean",
}
SLOT_KINDS = {"A": "Attribute", "O": "Object", "R": "Relation"}

# unconstrained object value and the ego car, as they appear in bindings
THING = "thing"
ME = "me"

# op name -> (input types popped, in push order; output type; slot kind of the argument)
OPS: Dict[str, Tuple[Tuple[str, ...], str, Optional[str]]] = {
    "scene": ((), "set", None),
    "filter_status": (("set",), "set", "A"),
    "filter_category": (("set",), "set", "O"),
    "relate": (("object",), "set", "R"),
    "unique": (("set",), "object", None),
    "count": (("set",), "integer", None),
    "exist": (("set",), "boolean", None),
    "query_category": (("object",), "category", None),
    "query_status": (("object",), "status", None),
    "same_status_set": (("object",), "set", None),
    "compare_status_equal": (("object", "object"), "boolean", None),
    "intersect": (("set", "set"), "set", None),
}

_PLACEHOLDER = re.compile(r"<([A-Za-z]+)(\d*)>")
_OP_TOKEN = re.compile(r"^([a-z_]+)(?:\(([A-Z]\d*)\))?$")
_FIELDS = ("id", "qtype", "hop", "answer", "slots", "program", "variant")


class TemplateError(ValueError):
    """Malformed registry content; carries the offending line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True, order=True)
class Slot:
    kind: str
    index: int = 1

    @property
    def name(self) -> str:
        return self.kind if self.index == 1 else f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Slot":
        m = re.fullmatch(r"([AOR])(\d*)", text)
        if not m:
            raise TemplateError(f"bad slot name {text!r}")
        index = int(m.group(2)) if m.group(2) else 1
        if index < 1 or (m.group(2) and index == 1):
            # "A1" would alias "A"
            raise TemplateError(f"bad slot index in {text!r}")
        return cls(m.group(1), index)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Op:
    name: str
    arg: Optional[str] = None

    def __str__(self):
        return f"{self.name}({self.arg})" if self.arg else self.name


@dataclass(frozen=True)
class QuestionTemplate:
    template_id: str
    qtype: str
    hop: int
    answer_type: str
    slots: Tuple[Slot, ...]
    program: Tuple[Op, ...]
    variants: Tuple[str, ...]
    # derived from the program in __post_init__
    status_of: Mapping[str, str] = field(default_factory=dict, compare=False, repr=False)
    anchor_slots: frozenset = field(default_factory=frozenset, compare=False, repr=False)
    queried: Optional[Tuple[str, str]] = field(default=None, compare=False, repr=False)
    # status-slot pairs that, when both are bound, give the answer away
    implied_by: Tuple[Tuple[str, str], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        status_of = {}
        anchors = set()
        prog = self.program
        for i, op in enumerate(prog):
            if op.name == "filter_category" and i > 0 and prog[i - 1].name == "filter_status":
                status_of[op.arg] = prog[i - 1].arg
            if op.name == "relate" and i >= 2 and prog[i - 1].name == "unique":
                if prog[i - 2].name == "filter_category":
                    anchors.add(prog[i - 2].arg)
        queried = None
        if (
            len(prog) >= 4
            and prog[-1].name in ("query_category", "query_status")
            and prog[-2].name == "unique"
            and prog[-3].name == "filter_category"
            and prog[-4].name == "filter_status"
        ):
            queried = (prog[-4].arg, prog[-3].arg)
        # which op produced each stack value, to pair up compared objects
        unique_status = {}
        implied = []
        producers: List[int] = []
        for i, op in enumerate(prog):
            n_in = len(OPS[op.name][0])
            inputs = producers[len(producers) - n_in:] if n_in else []
            if n_in:
                del producers[-n_in:]
            if op.name == "unique" and i >= 2 and prog[i - 1].name == "filter_category":
                unique_status[i] = status_of.get(prog[i - 1].arg)
            elif op.name == "compare_status_equal":
                a, b = (unique_status.get(j) for j in inputs)
                if a and b:
                    implied.append((a, b))
            elif op.name == "same_status_set" and i + 1 < len(prog):
                nxt = prog[i + 1]
                a = unique_status.get(inputs[0])
                if a and nxt.name == "filter_status":
                    implied.append((a, nxt.arg))
            producers.append(i)
        object.__setattr__(self, "implied_by", tuple(implied))
        object.__setattr__(self, "status_of", status_of)
        object.__setattr__(self, "anchor_slots", frozenset(anchors))
        object.__setattr__(self, "queried", queried)

    @property
    def slot_names(self) -> List[str]:
        return [s.name for s in self.slots]

    @property
    def relate_count(self) -> int:
        return sum(op.name == "relate" for op in self.program)


# ------------------------------------------------------------------ parsing


def parse_program(text: str, line: Optional[int] = None) -> Tuple[Op, ...]:
    ops = []
    for token in text.split():
        m = _OP_TOKEN.match(token)
        if not m or m.group(1) not in OPS:
            raise TemplateError(f"unknown program op {token!r}", line)
        name, arg = m.group(1), m.group(2)
        want = OPS[name][2]
        if want is None and arg is not None:
            raise TemplateError(f"op {name} takes no argument", line)
        if want is not None:
            if arg is None:
                raise TemplateError(f"op {name} needs a {SLOT_KINDS[want]} slot", line)
            if Slot.parse(arg).kind != want:
                raise TemplateError(f"op {name} needs a {SLOT_KINDS[want]} slot, got {arg}", line)
        ops.append(Op(name, arg))
    if not ops:
        raise TemplateError("empty program", line)
    return tuple(ops)


def check_program(program: Sequence[Op], answer_type: str, line: Optional[int] = None) -> None:
    """Simulate the value stack; raise :class:`TemplateError` if ill typed."""
    stack: List[str] = []
    for op in program:
        inputs, output, _ = OPS[op.name]
        if len(stack) < len(inputs):
            raise TemplateError(f"ill-typed program: {op} needs {len(inputs)} input(s)", line)
        got = stack[len(stack) - len(inputs):] if inputs else []
        if tuple(got) != inputs:
            raise TemplateError(
                f"ill-typed program: {op} expects {list(inputs)}, stack has {got}", line
            )
        if inputs:
            del stack[-len(inputs):]
        stack.append(output)
    if stack != [answer_type]:
        raise TemplateError(
            f"ill-typed program: leaves {stack}, expected a single {answer_type}", line
        )


def variant_slots(text: str, line: Optional[int] = None) -> List[str]:
    names = []
    for m in _PLACEHOLDER.finditer(text):
        kind, digits = m.group(1), m.group(2)
        if kind not in SLOT_KINDS:
            raise TemplateError(f"unknown placeholder <{kind}{digits}>", line)
        name = Slot.parse(kind + digits).name
        if name not in names:
            names.append(name)
    return names


def _build_template(rec: Dict[str, object], line: int) -> QuestionTemplate:
    for key in ("id", "qtype", "hop", "answer", "slots", "program"):
        if key not in rec:
            raise TemplateError(f"template record is missing {key!r}", line)
    if not rec.get("variant"):
        raise TemplateError(f"template {rec['id']} has no variants", line)
    tid = rec["id"]
    qtype = rec["qtype"]
    if qtype not in QTYPES:
        raise TemplateError(f"{tid}: unknown qtype {qtype!r}", line)
    answer_type = rec["answer"]
    if answer_type != ANSWER_TYPES[qtype]:
        raise TemplateError(
            f"{tid}: answer type {answer_type!r} does not match qtype {qtype} ({ANSWER_TYPES[qtype]})",
            line,
        )
    try:
        hop = int(rec["hop"])
    except ValueError:
        raise TemplateError(f"{tid}: hop must be 0 or 1, got {rec['hop']!r}", line) from None
    if hop not in (0, 1):
        raise TemplateError(f"{tid}: hop must be 0 or 1, got {hop}", line)

    slots = tuple(Slot.parse(s) for s in rec["slots"].split())
    names = [s.name for s in slots]
    if len(set(names)) != len(names):
        raise TemplateError(f"{tid}: repeated slot in {names}", line)

    program = parse_program(rec["program"], line)
    check_program(program, answer_type, line)
    relates = sum(op.name == "relate" for op in program)
    if hop != min(relates, 1):
        raise TemplateError(f"{tid}: hop {hop} but program has {relates} relate op(s)", line)

    program_order: List[str] = []
    for op in program:
        if op.arg and op.arg not in program_order:
            program_order.append(op.arg)
    for n in program_order:
        if n not in names:
            raise TemplateError(f"{tid}: program uses undeclared slot {n}", line)
    for n in names:
        if n not in program_order:
            raise TemplateError(f"{tid}: dangling slot {n} is not used by the program", line)
    if program_order != names:
        raise TemplateError(f"{tid}: slots must be declared in program order {program_order}", line)

    for text, vline in rec["variant"]:
        used = variant_slots(text, vline)
        for n in used:
            if n not in names:
                raise TemplateError(f"{tid}: variant references undeclared slot <{n}>", vline)
        for n in names:
            if n not in used:
                raise TemplateError(f"{tid}: dangling slot {n} missing from variant", vline)
        if text.count("[") != text.count("]"):
            raise TemplateError(f"{tid}: unbalanced optional segment", vline)

    return QuestionTemplate(
        template_id=tid,
        qtype=qtype,
        hop=hop,
        answer_type=answer_type,
        slots=slots,
        program=program,
        variants=tuple(text for text, _ in rec["variant"]),
    )


def parse_registry(text: str) -> List[QuestionTemplate]:
    """Parse registry text into templates, validating every cross-reference."""
    templates: List[QuestionTemplate] = []
    seen = set()
    rec: Dict[str, object] = {}
    start = 0

    def flush():
        if not rec:
            return
        t = _build_template(rec, start)
        if t.template_id in seen:
            raise TemplateError(f"duplicate template_id {t.template_id!r}", start)
        seen.add(t.template_id)
        templates.append(t)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            flush()
            rec = {}
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in _FIELDS:
            raise TemplateError(f"expected 'field: value', got {raw!r}", lineno)
        value = value.strip()
        if not rec:
            start = lineno
            if key != "id":
                raise TemplateError("a template record must start with 'id:'", lineno)
        if key == "variant":
            rec.setdefault("variant", []).append((value, lineno))
        elif key in rec:
            raise TemplateError(f"field {key!r} given twice", lineno)
        else:
            rec[key] = value
    flush()
    return templates


def serialize_registry(templates: Sequence[QuestionTemplate]) -> str:
    blocks = []
    for t in templates:
        lines = [
            f"id: {t.template_id}",
            f"qtype: {t.qtype}",
            f"hop: {t.hop}",
            f"answer: {t.answer_type}",
            f"slots: {' '.join(t.slot_names)}",
            f"program: {' '.join(str(op) for op in t.program)}",
        ]
        lines += [f"variant: {v}" for v in t.variants]
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def default_registry_text() -> str:
    return resources.files("sceneqa").joinpath("data/templates.txt").read_text(encoding="utf-8")


def load_registry(path=None) -> List[QuestionTemplate]:
    if path is None:
        return parse_registry(default_registry_text())
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        return parse_registry(text)
    except TemplateError as exc:
        raise TemplateError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- rendering

PLURAL_EXCEPTIONS = {"bus": "buses", "person": "people", "child": "children"}


def pluralize(noun: str) -> str:
    head, _, last = noun.rpartition(" ")
    if last in PLURAL_EXCEPTIONS:
        plural = PLURAL_EXCEPTIONS[last]
    elif re.search(r"(s|x|z|ch|sh)$", last):
        plural = last + "es"
    elif re.search(r"[^aeiou]y$", last):
        plural = last[:-1] + "ies"
    else:
        plural = last + "s"
    return f"{head} {plural}" if head else plural


_FILL = re.compile(r"<([AOR]\d*)>(s?)")
_OPTIONAL = re.compile(r"\[([^\]]*)\]")
_THERE_IS_ME = re.compile(r"^There is an? me; (.*)$")
_DET_ME = re.compile(r"\b(the|The|a|A|an|An) me\b")
_AN = re.compile(r"\b([Aa]) (?=[aeiouAEIOU])")


def _slot_text(name: str, value: str, plural: bool) -> str:
    kind = name[0]
    if kind == "R":
        return Relation.parse(value).phrase
    if kind == "O" and plural and value != ME:
        return pluralize(value)
    return value + ("s" if plural and kind != "O" else "")


def render(
    template: QuestionTemplate,
    variant_index: int,
    binding: Mapping[str, str],
    keep_optional: bool = True,
) -> str:
    """Fill a template variant with a binding and tidy the result.

    Empty attribute values vanish without leaving double spaces; bracketed
    optional words are kept or dropped as a whole; phrases that would put a
    determiner in front of the ego car ("the me", "There is a me; ... it")
    are rewritten around "me".
    """
    if not 0 <= variant_index < len(template.variants):
        raise IndexError(f"{template.template_id} has no variant {variant_index}")
    missing = [n for n in template.slot_names if n not in binding]
    if missing:
        raise ValueError(f"incomplete binding for {template.template_id}: missing {missing}")

    text = template.variants[variant_index]
    text = _OPTIONAL.sub(r"\1" if keep_optional else "", text)
    text = _FILL.sub(lambda m: _slot_text(m.group(1), binding[m.group(1)], bool(m.group(2))), text)
    text = re.sub(r"\s+", " ", text).strip()
    text = re.sub(r"\s+([?;,.])", r"\1", text)

    m = _THERE_IS_ME.match(text)
    if m:
        rest = re.sub(r"\bits\b", "my", re.sub(r"\bit\b", "me", m.group(1)))
        text = rest[:1].upper() + rest[1:]
    text = _DET_ME.sub(lambda m: "Me" if m.group(1)[0].isupper() else "me", text)
    text = re.sub(r"\bme's\b", "my", text)
    text = _AN.sub(lambda m: m.group(1) + "n ", text)
    return text[:1].upper() + text[1:]
