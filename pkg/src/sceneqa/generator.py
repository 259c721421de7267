"""Template instantiation, filtering and balancing of question-answer pairs."""

from __future__ import annotations

import hashlib
import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .executor import ExecutionError, format_answer, run_prefix
from .relations import Relation
from .scene import DEFAULT_TAXONOMY, Scene, SceneGraph, Taxonomy, build_scene_graph
from .templates import ME, THING, QuestionTemplate, render

REJECTION_REASONS = (
    "BlacklistedCombo",
    "EmptyReference",
    "NonUniqueReference",
    "UndefinedAnswer",
    "TrivialDegenerate",
    "CountOverCap",
    "TooShort",
)


@dataclass(frozen=True)
class GenerationConfig:
    seed: int = 0
    max_pairs_per_scene: int = 64
    max_pairs_per_template: int = 32
    # DFS nodes explored per (scene, template) before giving up
    max_visits: int = 20000
    empty_attribute_prob: float = 0.3
    count_cap: int = 10
    min_words: int = 5
    blacklist: FrozenSet[Tuple[str, str]] = field(default_factory=DEFAULT_TAXONOMY.default_blacklist)
    balance_cap: float = 1.5
    # answers rarer than this are dropped before capping, if any answer reaches it
    balance_min_support: int = 10
    # optional per-qtype overrides of balance_cap
    answer_caps: Mapping[str, float] = field(default_factory=dict)
    # "qtype" or "template_id"
    balance_key: str = "qtype"
    train_ratio: float = 0.82
    reject_trivial: bool = True

    def fingerprint(self) -> dict:
        d = asdict(self)
        d["blacklist"] = sorted(map(list, self.blacklist))
        d["answer_caps"] = dict(sorted(self.answer_caps.items()))
        return d


@dataclass(frozen=True)
class QAPair:
    question_id: str
    scene_id: str
    template_id: str
    variant_index: int
    hop: int
    qtype: str
    question: str
    answer: str
    binding: Mapping[str, str]

    def to_record(self) -> dict:
        return {
            "question_id": self.question_id,
            "scene_id": self.scene_id,
            "question": self.question,
            "answer": self.answer,
            "template_id": self.template_id,
            "variant_index": self.variant_index,
            "hop": self.hop,
            "qtype": self.qtype,
            "binding": dict(self.binding),
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "QAPair":
        return cls(
            question_id=rec["question_id"],
            scene_id=rec["scene_id"],
            template_id=rec["template_id"],
            variant_index=int(rec.get("variant_index", 0)),
            hop=int(rec["hop"]),
            qtype=rec["qtype"],
            question=rec["question"],
            answer=rec["answer"],
            binding=dict(rec.get("binding", {})),
        )


@dataclass
class Candidate:
    template: QuestionTemplate
    binding: Mapping[str, str]
    answer: Optional[str] = None
    error: Optional[ExecutionError] = None
    question: Optional[str] = None


def _digest(*parts) -> bytes:
    return hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()


def derived_rng(*parts) -> random.Random:
    return random.Random(int.from_bytes(_digest(*parts)[:8], "big"))


def canonical_binding(binding: Mapping[str, str]) -> str:
    return json.dumps(dict(sorted(binding.items())), separators=(",", ":"))


def question_id(scene_id: str, template_id: str, variant_index: int, binding: Mapping[str, str]) -> str:
    return _digest(scene_id, template_id, variant_index, canonical_binding(binding)).hex()[:16]


def word_count(question: str) -> int:
    return len(question.lower().translate(str.maketrans("", "", "?.,;")).split())


def reject(candidate: Candidate, graph: SceneGraph, config: GenerationConfig) -> Optional[str]:
    """Name of the first rejection rule the candidate trips, or None."""
    t = candidate.template
    b = candidate.binding
    for obj_slot, status_slot in t.status_of.items():
        if (b.get(status_slot, ""), b.get(obj_slot)) in config.blacklist:
            return "BlacklistedCombo"
    if candidate.error is not None:
        return candidate.error.reason
    if config.reject_trivial and t.queried is not None:
        status_slot, obj_slot = t.queried
        # the asked-for property must not be given away by the question
        if t.qtype == "query_object" and b.get(obj_slot) != THING:
            return "TrivialDegenerate"
        if t.qtype == "query_status" and b.get(status_slot, "") != "":
            return "TrivialDegenerate"
    if config.reject_trivial:
        for x, y in t.implied_by:
            if b.get(x, "") and b.get(y, ""):
                return "TrivialDegenerate"
    if t.qtype == "count" and candidate.answer is not None and int(candidate.answer) > config.count_cap:
        return "CountOverCap"
    if candidate.question is not None and word_count(candidate.question) < config.min_words:
        return "TooShort"
    return None


def slot_domains(
    template: QuestionTemplate, taxonomy: Taxonomy, config: GenerationConfig, rng: random.Random
) -> Dict[str, List[str]]:
    """Ordered candidate values for every slot of ``template``.

    Values start in taxonomy order and are shuffled once per (scene,
    template); the empty attribute goes first with probability
    ``empty_attribute_prob`` and last otherwise.
    """
    queried_status, queried_obj = template.queried or (None, None)
    domains = {}
    for slot in template.slots:
        name = slot.name
        if slot.kind == "A":
            values = list(taxonomy.statuses)
            rng.shuffle(values)
            if rng.random() < config.empty_attribute_prob:
                values.insert(0, "")
            else:
                values.append("")
            if template.qtype == "query_status" and name == queried_status:
                values = [""]
        elif slot.kind == "O":
            values = list(taxonomy.categories) + [THING]
            if name in template.anchor_slots:
                values.append(ME)
            rng.shuffle(values)
            if template.qtype == "query_object" and name == queried_obj:
                values = [THING]
        else:
            values = [r.value for r in Relation]
            rng.shuffle(values)
        domains[name] = values
    return domains


@dataclass
class TemplateYield:
    visits: int = 0
    emitted: int = 0
    rejections: Counter = field(default_factory=Counter)


def instantiate(
    graph: SceneGraph,
    template: QuestionTemplate,
    config: GenerationConfig,
    rng: random.Random,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
    stats: Optional[TemplateYield] = None,
) -> List[QAPair]:
    """Depth-first search over slot values, emitting well-posed pairs.

    Slots are bound in declaration order (which is program order), and the
    program is executed as far as the bound slots allow at every node, so a
    failed definite reference prunes its whole subtree.
    """
    stats = stats if stats is not None else TemplateYield()
    domains = slot_domains(template, taxonomy, config, rng)
    names = template.slot_names
    program = template.program
    out: List[QAPair] = []
    binding: Dict[str, str] = {}

    def done() -> bool:
        return len(out) >= config.max_pairs_per_template or stats.visits >= config.max_visits

    def leaf(stack):
        cand = Candidate(template, dict(binding), answer=format_answer(stack[-1]))
        reason = reject(cand, graph, config)
        if reason is None:
            key = (graph.scene_id, template.template_id, canonical_binding(binding))
            variant = derived_rng(config.seed, *key).randrange(len(template.variants))
            cand.question = render(template, variant, binding)
            reason = reject(cand, graph, config)
        if reason is not None:
            stats.rejections[reason] += 1
            return
        out.append(
            QAPair(
                question_id=question_id(graph.scene_id, template.template_id, variant, binding),
                scene_id=graph.scene_id,
                template_id=template.template_id,
                variant_index=variant,
                hop=template.hop,
                qtype=template.qtype,
                question=cand.question,
                answer=cand.answer,
                binding=dict(binding),
            )
        )

    def dfs(depth: int, pc: int, stack: Tuple):
        if depth == len(names):
            leaf(stack)
            return
        name = names[depth]
        for value in domains[name]:
            if done():
                break
            if value == ME and binding.get(template.status_of.get(name, ""), ""):
                # the ego car carries no status
                continue
            stats.visits += 1
            binding[name] = value
            try:
                npc, nstack = run_prefix(program, binding, graph, pc, stack)
            except ExecutionError as exc:
                stats.rejections[exc.reason] += 1
                continue
            dfs(depth + 1, npc, nstack)
        binding.pop(name, None)

    dfs(0, 0, ())
    stats.emitted += len(out)
    return out


def generate_scene(
    graph: SceneGraph,
    registry: Sequence[QuestionTemplate],
    config: GenerationConfig,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> Tuple[List[QAPair], Dict[str, TemplateYield]]:
    pairs: List[QAPair] = []
    yields: Dict[str, TemplateYield] = {}
    for t in registry:
        stats = TemplateYield()
        rng = derived_rng(config.seed, graph.scene_id, t.template_id)
        pairs.extend(instantiate(graph, t, config, rng, taxonomy, stats))
        yields[t.template_id] = stats
    if len(pairs) > config.max_pairs_per_scene:
        rng = derived_rng(config.seed, graph.scene_id, "scene-cap")
        keep = sorted(rng.sample(range(len(pairs)), config.max_pairs_per_scene))
        pairs = [pairs[i] for i in keep]
    return pairs, yields


def balance(pairs: Sequence[QAPair], config: GenerationConfig) -> List[QAPair]:
    """Down-sample frequent answers within each balancing group.

    In every group (qtype by default) no answer may occur more than
    ``floor(cap * n_min)`` times, where ``n_min`` is the count of the group's
    rarest answer. Answers seen fewer than ``balance_min_support`` times are
    dropped first, unless that would empty the group. Survivors keep their
    input order.
    """
    groups: Dict[str, Dict[str, List[int]]] = defaultdict(lambda: defaultdict(list))
    for i, p in enumerate(pairs):
        groups[getattr(p, config.balance_key)][p.answer].append(i)
    keep = set()
    for gkey in sorted(groups):
        by_answer = groups[gkey]
        supported = {a: v for a, v in by_answer.items() if len(v) >= config.balance_min_support}
        if supported:
            by_answer = supported
        qtype = pairs[next(iter(by_answer.values()))[0]].qtype
        cap = config.answer_caps.get(qtype, config.balance_cap)
        limit = math.floor(cap * min(len(v) for v in by_answer.values()))
        for answer in sorted(by_answer):
            idx = by_answer[answer]
            if len(idx) > limit:
                idx = derived_rng(config.seed, "balance", gkey, answer).sample(idx, limit)
            keep.update(idx)
    return [p for i, p in enumerate(pairs) if i in keep]


def in_train_split(scene_id: str, train_ratio: float) -> bool:
    h = int.from_bytes(_digest("split", scene_id)[:8], "big")
    return h / 2.0**64 < train_ratio


@dataclass
class Dataset:
    train: List[QAPair]
    test: List[QAPair]
    report: dict


def _scene_job(args):
    scene, registry, config, taxonomy = args
    graph = build_scene_graph(scene)
    pairs, yields = generate_scene(graph, registry, config, taxonomy)
    return pairs, {k: (v.visits, v.emitted, dict(v.rejections)) for k, v in yields.items()}


def generate_dataset(
    scenes: Sequence[Scene],
    registry: Sequence[QuestionTemplate],
    config: GenerationConfig,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
    workers: int = 1,
) -> Dataset:
    """Generate, balance and split question-answer pairs for ``scenes``.

    Scenes are processed independently (in a process pool when
    ``workers > 1``) and merged in input order, so the result does not depend
    on the worker count.
    """
    jobs = [(s, list(registry), config, taxonomy) for s in scenes]
    if workers > 1 and len(jobs) > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_scene_job, jobs, chunksize=1)
    else:
        results = [_scene_job(j) for j in jobs]

    pairs: List[QAPair] = []
    per_template = {t.template_id: {"visits": 0, "emitted": 0, "kept": 0} for t in registry}
    rejections: Counter = Counter()
    for scene_pairs, yields in results:
        pairs.extend(scene_pairs)
        for tid, (visits, _, rej) in yields.items():
            per_template[tid]["visits"] += visits
            rejections.update(rej)
    for p in pairs:
        per_template[p.template_id]["emitted"] += 1

    balanced = balance(pairs, config)
    for p in balanced:
        per_template[p.template_id]["kept"] += 1
    train = [p for p in balanced if in_train_split(p.scene_id, config.train_ratio)]
    test = [p for p in balanced if not in_train_split(p.scene_id, config.train_ratio)]

    report = {
        "scenes": len(scenes),
        "emitted": len(pairs),
        "kept": len(balanced),
        "train": len(train),
        "test": len(test),
        "rejections": {r: rejections.get(r, 0) for r in REJECTION_REASONS},
        "templates": per_template,
    }
    return Dataset(train=train, test=test, report=report)
