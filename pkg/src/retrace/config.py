"""TOML run configuration.

Every seed the pipeline uses is declared here, so a config file plus the
input files fully determine every artifact. Secrets stay out of the file:
remote endpoints name an environment variable holding the API key.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .environments import ConfigError
from .masking import MODES, PARTIAL_MASK
from .model import TaskKind
from .policies import ErrorKind
from .synthesis import DEFAULT_ERROR_CAPS

POLICY_KINDS = ("scripted", "noisy", "remote")
TEACHER_KINDS = ("oracle", "remote", "none")


@dataclass(frozen=True)
class CorpusConfig:
    seed: int = 42
    counts: dict = field(default_factory=dict)  # TaskKind -> int
    max_steps: dict = field(default_factory=dict)  # TaskKind -> int overrides
    context_budget: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class PolicyCfg:
    kind: str = "scripted"
    seed: int = 7
    error_rate: float = 0.4
    error_kind: ErrorKind = ErrorKind.WRONG_LOCATION
    base_url: str = ""
    model: str = "base-agent"
    max_tokens: int = 512
    api_key_env: str = ""


@dataclass(frozen=True)
class TeacherCfg:
    kind: str = "oracle"
    base_url: str = ""
    model: str = "teacher"
    max_tokens: int = 512
    api_key_env: str = ""


@dataclass(frozen=True)
class SynthesisCfg:
    split_fraction: float = 0.5
    split_seed: int = 11
    error_caps: dict = field(default_factory=lambda: dict(DEFAULT_ERROR_CAPS))
    parallelism: int = 1


@dataclass(frozen=True)
class MaskingCfg:
    mode: str = PARTIAL_MASK
    shuffle_seed: int = 13
    base_model: str = "base-agent"


@dataclass(frozen=True)
class EvalCfg:
    parallelism: int = 1


@dataclass(frozen=True)
class AppConfig:
    workspace: Path
    corpus: CorpusConfig
    policy: PolicyCfg
    teacher: TeacherCfg
    synthesis: SynthesisCfg
    masking: MaskingCfg
    eval: EvalCfg


def _kind_map(section: dict, table_name: str) -> dict:
    out = {}
    for key, value in section.items():
        try:
            kind = TaskKind(key)
        except ValueError:
            raise ConfigError(f"[{table_name}]: unknown task kind {key!r}") from None
        if not isinstance(value, int) or value < 0:
            raise ConfigError(f"[{table_name}].{key}: expected a nonnegative integer")
        out[kind] = value
    return out


def load_config(path) -> AppConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None

    corpus_raw = dict(raw.get("corpus", {}))
    counts = {}
    for kind in TaskKind:
        if kind.value in corpus_raw:
            value = corpus_raw.pop(kind.value)
            if not isinstance(value, int) or value < 0:
                raise ConfigError(f"[corpus].{kind.value}: expected a nonnegative integer")
            counts[kind] = value
    corpus = CorpusConfig(
        seed=int(corpus_raw.get("seed", 42)),
        counts=counts,
        max_steps=_kind_map(corpus_raw.get("max_steps", {}), "corpus.max_steps"),
        context_budget=_kind_map(corpus_raw.get("context_budget", {}), "corpus.context_budget"),
    )

    pol_raw = raw.get("policy", {})
    try:
        error_kind = ErrorKind(pol_raw.get("error_kind", ErrorKind.WRONG_LOCATION.value))
    except ValueError:
        raise ConfigError(
            f"[policy].error_kind must be one of {[k.value for k in ErrorKind]}"
        ) from None
    policy = PolicyCfg(
        kind=pol_raw.get("kind", "scripted"),
        seed=int(pol_raw.get("seed", 7)),
        error_rate=float(pol_raw.get("error_rate", 0.4)),
        error_kind=error_kind,
        base_url=pol_raw.get("base_url", ""),
        model=pol_raw.get("model", "base-agent"),
        max_tokens=int(pol_raw.get("max_tokens", 512)),
        api_key_env=pol_raw.get("api_key_env", ""),
    )
    if policy.kind not in POLICY_KINDS:
        raise ConfigError(f"[policy].kind must be one of {POLICY_KINDS}, got {policy.kind!r}")
    if not 0.0 <= policy.error_rate <= 1.0:
        raise ConfigError(f"[policy].error_rate must be in [0, 1], got {policy.error_rate}")
    if policy.kind == "remote" and not policy.base_url:
        raise ConfigError("[policy].base_url is required for the remote policy")

    tea_raw = raw.get("teacher", {})
    teacher = TeacherCfg(
        kind=tea_raw.get("kind", "oracle"),
        base_url=tea_raw.get("base_url", ""),
        model=tea_raw.get("model", "teacher"),
        max_tokens=int(tea_raw.get("max_tokens", 512)),
        api_key_env=tea_raw.get("api_key_env", ""),
    )
    if teacher.kind not in TEACHER_KINDS:
        raise ConfigError(f"[teacher].kind must be one of {TEACHER_KINDS}, got {teacher.kind!r}")
    if teacher.kind == "remote" and not teacher.base_url:
        raise ConfigError("[teacher].base_url is required for the remote teacher")

    syn_raw = raw.get("synthesis", {})
    caps = dict(DEFAULT_ERROR_CAPS)
    for key, value in syn_raw.get("error_caps", {}).items():
        try:
            caps[TaskKind(key)] = int(value)
        except ValueError:
            raise ConfigError(f"[synthesis.error_caps]: unknown task kind {key!r}") from None
    synthesis = SynthesisCfg(
        split_fraction=float(syn_raw.get("split_fraction", 0.5)),
        split_seed=int(syn_raw.get("split_seed", 11)),
        error_caps=caps,
        parallelism=int(syn_raw.get("parallelism", 1)),
    )
    if not 0.0 < synthesis.split_fraction < 1.0:
        raise ConfigError(
            f"[synthesis].split_fraction must be in (0, 1), got {synthesis.split_fraction}"
        )
    if synthesis.parallelism < 1:
        raise ConfigError("[synthesis].parallelism must be >= 1")

    mask_raw = raw.get("masking", {})
    masking = MaskingCfg(
        mode=mask_raw.get("mode", PARTIAL_MASK),
        shuffle_seed=int(mask_raw.get("shuffle_seed", 13)),
        base_model=mask_raw.get("base_model", "base-agent"),
    )
    if masking.mode not in MODES:
        raise ConfigError(f"[masking].mode must be one of {MODES}, got {masking.mode!r}")

    eval_raw = raw.get("eval", {})
    eval_cfg = EvalCfg(parallelism=int(eval_raw.get("parallelism", 1)))
    if eval_cfg.parallelism < 1:
        raise ConfigError("[eval].parallelism must be >= 1")

    workspace = Path(raw.get("workspace", "runs/retrace"))
    return AppConfig(
        workspace=workspace,
        corpus=corpus,
        policy=policy,
        teacher=teacher,
        synthesis=synthesis,
        masking=masking,
        eval=eval_cfg,
    )


def apply_seed_override(cfg: AppConfig, seed: int) -> AppConfig:
    """Point every declared seed at one value; used by --seed-override."""
    return dataclasses.replace(
        cfg,
        corpus=dataclasses.replace(cfg.corpus, seed=seed),
        policy=dataclasses.replace(cfg.policy, seed=seed),
        synthesis=dataclasses.replace(cfg.synthesis, split_seed=seed),
        masking=dataclasses.replace(cfg.masking, shuffle_seed=seed),
    )
