"""Command-line entry point: gen, synth, mask, eval.

Each command reads one TOML config and a workspace directory; artifacts use
fixed file names inside the workspace so the stages compose:

    gen    instructions.jsonl, golden.jsonl
    synth  d1.jsonl, d2_instructions.jsonl, synthesized.jsonl, dr.jsonl,
           failures.jsonl, synth_manifest.json
    mask   training.jsonl, mask_manifest.json
    eval   eval_report.json, eval_report.txt

Exit codes: 0 success, 1 usage or config problem, 2 runtime failure,
3 synthesis produced an empty kept set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .chat import ChatClient, RemoteUnavailable
from .config import AppConfig, apply_seed_override, load_config
from .environments import ConfigError, PlanNotFound, generate_corpus, golden_trajectory
from .masking import assemble_training_set, write_training_jsonl
from .evaluation import run_eval
from .model import (
    read_instructions,
    read_trajectories,
    write_instructions,
    write_trajectories,
)
from .policies import NoiseSchedule, NoisyPolicy, RemotePolicy, ScriptedPolicy
from .synthesis import filter_self_reflected, split_dataset, synthesize_many
from .teachers import OracleTeacher, RemoteTeacher

log = logging.getLogger("retrace")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_ZERO_YIELD = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise _UsageError(message)


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def _client(section) -> ChatClient:
    api_key = os.environ.get(section.api_key_env) if section.api_key_env else None
    return ChatClient(base_url=section.base_url, model=section.model, api_key=api_key)


def _build_policy(cfg: AppConfig):
    section = cfg.policy
    if section.kind == "scripted":
        return ScriptedPolicy()
    if section.kind == "noisy":
        schedule = NoiseSchedule(
            seed=section.seed, error_rate=section.error_rate, error_kind=section.error_kind
        )
        return NoisyPolicy(schedule)
    return RemotePolicy(_client(section), max_tokens=section.max_tokens)


def _build_teacher(cfg: AppConfig):
    section = cfg.teacher
    if section.kind == "none":
        return None
    if section.kind == "oracle":
        return OracleTeacher()
    return RemoteTeacher(_client(section), max_tokens=section.max_tokens)


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise ConfigError(f"missing input {path}; run 'retrace {producer}' first")
    return path


def cmd_gen(args, cfg: AppConfig, out: Path) -> int:
    if cfg.corpus.total == 0:
        raise ConfigError("empty corpus: set a positive count for at least one task kind")
    instructions = generate_corpus(
        cfg.corpus.seed, cfg.corpus.counts, cfg.corpus.max_steps, cfg.corpus.context_budget
    )
    golden = [golden_trajectory(i) for i in instructions]
    write_instructions(out / "instructions.jsonl", instructions)
    write_trajectories(out / "golden.jsonl", golden)
    log.info("gen: %d instructions with golden trajectories -> %s", len(instructions), out)
    return EXIT_OK


def cmd_synth(args, cfg: AppConfig, out: Path) -> int:
    instructions = read_instructions(_require(out / "instructions.jsonl", "gen"))
    env_configs = {i.id: i.env_config for i in instructions}
    golden = read_trajectories(_require(out / "golden.jsonl", "gen"), env_configs)

    d1, d2 = split_dataset(golden, cfg.synthesis.split_fraction, cfg.synthesis.split_seed)
    d2_instructions = sorted((t.instruction for t in d2), key=lambda i: i.id)
    policy = _build_policy(cfg)
    teacher = _build_teacher(cfg)

    parallelism = args.parallelism or cfg.synthesis.parallelism
    results = synthesize_many(
        d2_instructions, policy, teacher, one_shot=args.one_shot, parallelism=parallelism
    )
    completed = [r.trajectory for r in results if r.ok]
    kept = filter_self_reflected(completed, cfg.synthesis.error_caps)

    write_trajectories(out / "d1.jsonl", sorted(d1, key=lambda t: t.instruction.id))
    write_instructions(out / "d2_instructions.jsonl", d2_instructions)
    write_trajectories(out / "synthesized.jsonl", completed)
    write_trajectories(out / "dr.jsonl", kept)
    with open(out / "failures.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for r in results:
            if r.failure or r.incidents:
                record = {
                    "id": r.trajectory.instruction.id,
                    "failure": r.failure,
                    "incidents": list(r.incidents),
                }
                fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")

    manifest = {
        "seeds": {
            "corpus": cfg.corpus.seed,
            "split": cfg.synthesis.split_seed,
            "policy": cfg.policy.seed,
        },
        "policy": policy.describe(),
        "teacher": teacher.describe() if teacher is not None else "none",
        "one_shot": args.one_shot,
        "split_fraction": cfg.synthesis.split_fraction,
        "thresholds": {k.value: v for k, v in sorted(cfg.synthesis.error_caps.items())},
        "counts": {
            "golden": len(golden),
            "d1": len(d1),
            "d2": len(d2),
            "synthesized": len(completed),
            "kept": len(kept),
            "failed": sum(1 for r in results if not r.ok),
        },
    }
    _write_json(out / "synth_manifest.json", manifest)
    log.info(
        "synth: %d tasks -> %d completed, %d kept, %d failed",
        len(d2_instructions),
        len(completed),
        len(kept),
        manifest["counts"]["failed"],
    )
    if not kept:
        log.warning("synth: kept set is empty")
        return EXIT_ZERO_YIELD
    return EXIT_OK


def cmd_mask(args, cfg: AppConfig, out: Path) -> int:
    d1 = read_trajectories(_require(out / "d1.jsonl", "synth"))
    dr = read_trajectories(_require(out / "dr.jsonl", "synth"))
    mode = args.mode or cfg.masking.mode
    samples = assemble_training_set(
        d1, dr, dr_mode=mode, shuffle_seed=cfg.masking.shuffle_seed
    )
    write_training_jsonl(out / "training.jsonl", samples)
    masked_segments = sum(
        sum(1 for seg in s.segments if seg.role == "assistant" and not seg.learn)
        for s in samples
    )
    manifest = {
        "mode": mode,
        "shuffle_seed": cfg.masking.shuffle_seed,
        "base_model": cfg.masking.base_model,
        "counts": {
            "d1": len(d1),
            "dr": len(dr),
            "samples": len(samples),
            "masked_segments": masked_segments,
        },
        "training_recommendations": {
            "batch_size": 32,
            "learning_rate": 3e-5,
            "epochs": 4,
            "lr_schedule": "cosine",
        },
    }
    _write_json(out / "mask_manifest.json", manifest)
    log.info("mask: %d samples (%d masked segments) -> %s", len(samples), masked_segments, out)
    return EXIT_OK


def cmd_eval(args, cfg: AppConfig, out: Path) -> int:
    instructions = read_instructions(_require(out / "instructions.jsonl", "gen"))
    policy = _build_policy(cfg)
    parallelism = args.parallelism or cfg.eval.parallelism
    report = run_eval(policy, instructions, parallelism=parallelism, one_shot=args.one_shot)
    _write_json(out / "eval_report.json", report.to_dict())
    with open(out / "eval_report.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.render_table())
    log.info("eval: overall average reward %.4f", report.overall_average)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="retrace",
        description="Synthesize, filter, mask, and evaluate reflection-corrected agent trajectories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("gen", cmd_gen, "generate a task corpus with golden trajectories"),
        ("synth", cmd_synth, "split the corpus and synthesize judged trajectories"),
        ("mask", cmd_mask, "emit the masked training JSONL"),
        ("eval", cmd_eval, "run the evaluation harness"),
    ]
    for name, func, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="TOML config path")
        sp.add_argument("--out", default=None, help="workspace directory (default from config)")
        sp.add_argument(
            "--seed-override",
            dest="seed_override",
            type=int,
            default=None,
            help="replace every configured seed with this value",
        )
        if name in ("synth", "eval"):
            sp.add_argument("--parallelism", type=int, default=None)
            sp.add_argument("--one-shot", dest="one_shot", action="store_true")
        if name == "mask":
            sp.add_argument("--mode", choices=["full", "partial_mask"], default=None)
        sp.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        if args.seed_override is not None:
            cfg = apply_seed_override(cfg, args.seed_override)
        out = Path(args.out) if args.out else cfg.workspace
        out.mkdir(parents=True, exist_ok=True)
        if not hasattr(args, "one_shot"):
            args.one_shot = False
        if not hasattr(args, "parallelism"):
            args.parallelism = None
        return args.func(args, cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RemoteUnavailable, PlanNotFound, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
