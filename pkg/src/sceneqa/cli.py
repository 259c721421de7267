"""Command-line entry point: ``sceneqa <subcommand> [options]``.

Settings come from, in increasing priority: built-in defaults, a JSON
``--config`` file, ``SCENEQA_*`` environment variables, and flags.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .bev import BEVConfig, EmptyRegionError, circumscribed_rect, crop_pool, load_grid, project_box_to_bev
from .evaluator import EvaluationError, blind_baseline, evaluate, predictions_from_records
from .generator import GenerationConfig, generate_dataset
from .io import make_header, read_blacklist, read_jsonl, write_json, write_jsonl
from .scene import (
    DEFAULT_TAXONOMY,
    Box3D,
    SceneSchemaError,
    build_scene_graph,
    load_scenes_file,
    scene_files,
    scene_to_record,
)
from .stats import compute_stats
from .synthetic import random_scenes
from .templates import TemplateError, default_registry_text, parse_registry

log = logging.getLogger("sceneqa")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
ENV_PREFIX = "SCENEQA_"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# option name -> (type, default); flags, env vars and config keys share these names
SETTINGS = {
    "seed": (int, 0),
    "scenes": (str, None),
    "registry": (str, None),
    "blacklist": (str, None),
    "out": (str, None),
    "split": (float, 0.82),
    "workers": (int, 1),
    "strategy": (str, "mean"),
    "crop": (str, "rotated"),
    "k": (int, 4),
}


def resolve(args: argparse.Namespace) -> Dict[str, object]:
    """Merge defaults, config file, environment and flags."""
    cfg: Dict[str, object] = {name: default for name, (_, default) in SETTINGS.items()}
    file_cfg: Dict[str, object] = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError(f"config {args.config} must hold a JSON object")
    for name, (typ, _) in SETTINGS.items():
        if name in file_cfg:
            cfg[name] = file_cfg[name]
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is not None:
            try:
                cfg[name] = typ(env)
            except ValueError:
                raise UsageError(f"bad value for {ENV_PREFIX + name.upper()}: {env!r}") from None
        flag = getattr(args, name, None)
        if flag is not None:
            cfg[name] = flag
    cfg["generation"] = file_cfg.get("generation", {})
    cfg["bev"] = file_cfg.get("bev", {})
    if not 0.0 <= float(cfg["split"]) <= 1.0:
        raise UsageError(f"split must lie in [0, 1], got {cfg['split']}")
    if int(cfg["workers"]) < 1:
        raise UsageError("workers must be at least 1")
    return cfg


def _need(cfg, *names):
    for name in names:
        if not cfg.get(name):
            raise UsageError(f"--{name} is required")


def _existing(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} {path} does not exist")
    return p


def _generation_config(cfg) -> GenerationConfig:
    fields = {f.name for f in dataclasses.fields(GenerationConfig)}
    extra = dict(cfg["generation"])
    unknown = set(extra) - fields
    if unknown:
        raise UsageError(f"unknown generation settings: {sorted(unknown)}")
    if "blacklist" in extra:
        extra["blacklist"] = frozenset(tuple(p) for p in extra["blacklist"])
    if cfg["blacklist"]:
        try:
            extra["blacklist"] = read_blacklist(_existing(cfg["blacklist"], "blacklist"))
        except ValueError as exc:
            raise DataError(str(exc)) from None
    extra["seed"] = int(cfg["seed"])
    extra["train_ratio"] = float(cfg["split"])
    return GenerationConfig(**extra)


def _bev_config(cfg) -> BEVConfig:
    raw = dict(cfg["bev"])
    for key in ("voxel_size", "pc_range"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        return BEVConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad bev settings: {exc}") from None


def _load_scene_dir(directory: Path):
    scenes, errors = [], []
    for path in scene_files(directory):
        try:
            scenes.extend(load_scenes_file(path, DEFAULT_TAXONOMY))
        except SceneSchemaError as exc:
            errors.append(f"{path.name}: {exc}")
    return scenes, errors


# ---------------------------------------------------------------- commands


def _build_one(scene):
    try:
        return scene.scene_id, build_scene_graph(scene).to_record(), None
    except ValueError as exc:
        return scene.scene_id, None, str(exc)


def cmd_build_graphs(cfg) -> int:
    _need(cfg, "scenes", "out")
    scenes, errors = _load_scene_dir(_existing(cfg["scenes"], "scenes directory"))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    header = make_header(int(cfg["seed"]), {"command": "build-graphs"})
    workers = int(cfg["workers"])
    if workers > 1 and len(scenes) > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_build_one, scenes, chunksize=1)
    else:
        results = [_build_one(s) for s in scenes]
    written = 0
    for scene_id, record, err in results:
        if err:
            errors.append(f"{scene_id}: {err}")
            continue
        write_json(out / f"{scene_id}.graph.json", {"header": header, "graph": record})
        written += 1
    print(f"wrote {written} scene graph(s) to {out}")
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_DATA if errors else EXIT_OK


def cmd_generate(cfg) -> int:
    _need(cfg, "scenes", "out")
    gen = _generation_config(cfg)
    if cfg["registry"]:
        registry_text = _existing(cfg["registry"], "registry").read_text(encoding="utf-8")
    else:
        registry_text = default_registry_text()
    try:
        registry = parse_registry(registry_text)
    except TemplateError as exc:
        raise DataError(f"{cfg['registry'] or 'built-in registry'}: {exc}") from None

    scenes, errors = _load_scene_dir(_existing(cfg["scenes"], "scenes directory"))
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    if not scenes:
        raise DataError(f"no scenes found in {cfg['scenes']}")

    dataset = generate_dataset(scenes, registry, gen, DEFAULT_TAXONOMY, workers=int(cfg["workers"]))
    payload = {
        "command": "generate",
        "generation": gen.fingerprint(),
        "registry_sha256": hashlib.sha256(registry_text.encode("utf-8")).hexdigest(),
    }
    header = make_header(gen.seed, payload)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "train.jsonl", (p.to_record() for p in dataset.train), header)
    write_jsonl(out / "test.jsonl", (p.to_record() for p in dataset.test), header)
    write_json(out / "report.json", {"header": header, **dataset.report})
    r = dataset.report
    print(f"{r['scenes']} scenes: {r['emitted']} pairs generated, {r['kept']} kept after balancing "
          f"({r['train']} train / {r['test']} test)")
    return EXIT_OK


def cmd_stats(cfg, dataset: str) -> int:
    records = read_jsonl(_existing(dataset, "dataset"))
    k = int(cfg["k"])
    if k < 1:
        raise UsageError("--k must be at least 1")
    try:
        report = compute_stats(records, k)
    except ValueError as exc:
        raise DataError(f"{dataset}: {exc}") from None
    header = make_header(int(cfg["seed"]), {"command": "stats", "k": k})
    if cfg["out"]:
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "stats.json", {"header": header, **report.to_dict()})
        for name, table in report.tables().items():
            (out / f"{name}.csv").write_text(table, encoding="utf-8")
    lo, hi = min(report.lengths), max(report.lengths)
    print(f"{report.total} questions, {lo}-{hi} words")
    print(report.tables()["qtypes"], end="")
    return EXIT_OK


def cmd_evaluate(cfg, gt_path: str, preds_path: Optional[str], baseline_train: Optional[str]) -> int:
    gt = read_jsonl(_existing(gt_path, "ground truth"))
    if preds_path:
        preds = predictions_from_records(read_jsonl(_existing(preds_path, "predictions")))
        name = Path(preds_path).stem
    elif baseline_train:
        train = read_jsonl(_existing(baseline_train, "training set"))
        try:
            preds = blind_baseline(train).predictions(gt)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        name = "blind-baseline"
    else:
        raise UsageError("give --preds or --blind-baseline")
    report = evaluate(gt, preds)
    if report.missing:
        print(f"warning: {report.missing} question(s) without a prediction, counted wrong", file=sys.stderr)
    header = make_header(int(cfg["seed"]), {"command": "evaluate"})
    if cfg["out"]:
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "metrics.json", {"header": header, **report.to_dict()})
        (out / "metrics.csv").write_text(report.table(name), encoding="utf-8")
    print(report.table(name), end="")
    return EXIT_OK


def _read_boxes(path: Path) -> List[tuple]:
    doc = json.loads(path.read_text())
    entries = doc.get("objects") if isinstance(doc, dict) and "objects" in doc else (
        doc.get("boxes") if isinstance(doc, dict) else doc
    )
    if not isinstance(entries, list):
        raise DataError(f"{path}: expected a list of boxes")
    boxes = []
    for i, e in enumerate(entries):
        try:
            if isinstance(e, dict):
                boxes.append((str(e.get("id", i)), Box3D(*map(float, e["box"]))))
            else:
                boxes.append((str(i), Box3D(*map(float, e))))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: box {i}: {exc}") from None
    return boxes


def cmd_pool_demo(cfg, grid_path: str, boxes_path: str) -> int:
    _need(cfg, "out")
    strategy, crop = cfg["strategy"], cfg["crop"]
    if strategy not in ("mean", "max"):
        raise UsageError(f"--strategy must be mean or max, got {strategy!r}")
    if crop not in ("rotated", "circumscribed"):
        raise UsageError(f"--crop must be rotated or circumscribed, got {crop!r}")
    bev = _bev_config(cfg)
    try:
        grid = load_grid(_existing(grid_path, "grid"))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    boxes = _read_boxes(_existing(boxes_path, "boxes file"))
    rows, errors = [], []
    for box_id, box in boxes:
        rect = project_box_to_bev(box, bev)
        if crop == "circumscribed":
            rect = circumscribed_rect(rect)
        try:
            emb = crop_pool(grid, rect, strategy)
        except EmptyRegionError as exc:
            errors.append(f"box {box_id}: {exc}")
            continue
        rows.append({"id": box_id, "embedding": [float(v) for v in emb]})
    header = make_header(int(cfg["seed"]), {
        "command": "pool-demo", "strategy": strategy, "crop": crop, "bev": dataclasses.asdict(bev),
    })
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(out, rows, header)
    print(f"wrote {len(rows)} embedding(s) of dimension {grid.shape[2]} to {out}")
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_DATA if errors else EXIT_OK


def cmd_make_scenes(cfg, count: int, min_objects: int, max_objects: int) -> int:
    _need(cfg, "out")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    for scene in random_scenes(int(cfg["seed"]), count, min_objects, max_objects):
        write_json(out / f"{scene.scene_id}.json", scene_to_record(scene))
    print(f"wrote {count} synthetic scene(s) to {out}")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sceneqa", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON settings file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("build-graphs", parents=[common], help="annotations -> scene graphs")
    s.add_argument("--scenes")
    s.add_argument("--workers", type=int)

    s = sub.add_parser("generate", parents=[common], help="generate the QA dataset")
    s.add_argument("--scenes")
    s.add_argument("--registry")
    s.add_argument("--blacklist")
    s.add_argument("--split", type=float, help="fraction of scenes in the train split")
    s.add_argument("--workers", type=int)

    s = sub.add_parser("stats", parents=[common], help="dataset statistics")
    s.add_argument("--dataset", required=True)
    s.add_argument("--k", type=int, help="depth of the first-words distribution")

    s = sub.add_parser("evaluate", parents=[common], help="top-1 accuracy table")
    s.add_argument("--gt", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--preds")
    g.add_argument("--blind-baseline", metavar="TRAIN", help="score the question-only baseline")

    s = sub.add_parser("pool-demo", parents=[common], help="crop and pool BEV features per box")
    s.add_argument("--grid", required=True)
    s.add_argument("--boxes", required=True)
    s.add_argument("--strategy", choices=["mean", "max"])
    s.add_argument("--crop", choices=["rotated", "circumscribed"])

    s = sub.add_parser("make-scenes", parents=[common], help="write seeded synthetic scenes")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--min-objects", type=int, default=5)
    s.add_argument("--max-objects", type=int, default=25)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        if args.command == "build-graphs":
            return cmd_build_graphs(cfg)
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "stats":
            return cmd_stats(cfg, args.dataset)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.gt, args.preds, args.blind_baseline)
        if args.command == "pool-demo":
            return cmd_pool_demo(cfg, args.grid, args.boxes)
        if args.command == "make-scenes":
            return cmd_make_scenes(cfg, args.count, args.min_objects, args.max_objects)
    except UsageError as exc:
        print(f"sceneqa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, EvaluationError, SceneSchemaError, TemplateError, ValueError) as exc:
        print(f"sceneqa: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
