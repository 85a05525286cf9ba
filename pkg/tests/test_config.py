"""TOML configuration loading and validation."""

from __future__ import annotations

from pathlib import Path

import pytest

from retrace.config import apply_seed_override, load_config
from retrace.environments import ConfigError
from retrace.model import TaskKind
from retrace.policies import ErrorKind
from retrace.synthesis import DEFAULT_ERROR_CAPS

_FULL = """
workspace = "runs/demo"

[corpus]
seed = 99
household = 10
shopping = 6

[corpus.max_steps]
household = 60
shopping = 30

[corpus.context_budget]
household = 100000

[policy]
kind = "noisy"
seed = 5
error_rate = 0.25
error_kind = "wrong_object"

[teacher]
kind = "oracle"

[synthesis]
split_fraction = 0.5
split_seed = 17
parallelism = 2

[synthesis.error_caps]
household = 3

[masking]
mode = "full"
shuffle_seed = 23
base_model = "base-agent-7b"

[eval]
parallelism = 4
"""


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoad:
    def test_full_file(self, tmp_path):
        cfg = load_config(_write(tmp_path, _FULL))
        assert cfg.workspace == Path("runs/demo")
        assert cfg.corpus.seed == 99
        assert cfg.corpus.counts == {TaskKind.HOUSEHOLD: 10, TaskKind.SHOPPING: 6}
        assert cfg.corpus.total == 16
        assert cfg.corpus.max_steps == {TaskKind.HOUSEHOLD: 60, TaskKind.SHOPPING: 30}
        assert cfg.corpus.context_budget == {TaskKind.HOUSEHOLD: 100000}
        assert cfg.policy.kind == "noisy"
        assert cfg.policy.error_rate == 0.25
        assert cfg.policy.error_kind is ErrorKind.WRONG_OBJECT
        assert cfg.teacher.kind == "oracle"
        assert cfg.synthesis.split_seed == 17
        assert cfg.synthesis.parallelism == 2
        assert cfg.synthesis.error_caps[TaskKind.HOUSEHOLD] == 3
        assert cfg.synthesis.error_caps[TaskKind.SHOPPING] == DEFAULT_ERROR_CAPS[TaskKind.SHOPPING]
        assert cfg.masking.mode == "full"
        assert cfg.masking.base_model == "base-agent-7b"
        assert cfg.eval.parallelism == 4

    def test_minimal_file_uses_defaults(self, tmp_path):
        cfg = load_config(_write(tmp_path, "[corpus]\nhousehold = 2\n"))
        assert cfg.workspace == Path("runs/retrace")
        assert cfg.corpus.seed == 42
        assert cfg.policy.kind == "scripted"
        assert cfg.policy.error_rate == 0.4
        assert cfg.policy.error_kind is ErrorKind.WRONG_LOCATION
        assert cfg.teacher.kind == "oracle"
        assert cfg.synthesis.split_fraction == 0.5
        assert cfg.synthesis.split_seed == 11
        assert cfg.synthesis.error_caps == dict(DEFAULT_ERROR_CAPS)
        assert cfg.masking.mode == "partial_mask"
        assert cfg.masking.shuffle_seed == 13

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_config(tmp_path / "absent.toml")
        assert "not found" in str(info.value)

    def test_invalid_toml(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_config(_write(tmp_path, "corpus = [unclosed"))
        assert "invalid TOML" in str(info.value)

    @pytest.mark.parametrize("text,fragment", [
        ("[corpus]\nwarehouse = 3\n[corpus.max_steps]\nwarehouse = 5\n", "unknown task kind"),
        ("[corpus]\nhousehold = -1\n", "nonnegative"),
        ('[policy]\nkind = "psychic"\n', "[policy].kind"),
        ('[policy]\nerror_rate = 1.5\n', "error_rate"),
        ('[policy]\nerror_kind = "wrong_universe"\n', "error_kind"),
        ('[policy]\nkind = "remote"\n', "base_url"),
        ('[teacher]\nkind = "vibes"\n', "[teacher].kind"),
        ('[teacher]\nkind = "remote"\n', "base_url"),
        ("[synthesis]\nsplit_fraction = 1.0\n", "split_fraction"),
        ("[synthesis]\nparallelism = 0\n", "parallelism"),
        ("[synthesis.error_caps]\nwarehouse = 2\n", "unknown task kind"),
        ('[masking]\nmode = "half"\n', "[masking].mode"),
        ("[eval]\nparallelism = 0\n", "parallelism"),
    ])
    def test_validation_errors(self, tmp_path, text, fragment):
        with pytest.raises(ConfigError) as info:
            load_config(_write(tmp_path, text))
        assert fragment in str(info.value)

    def test_unknown_corpus_keys_rejected(self, tmp_path):
        # a count for a kind outside the enum lands in the kind-map check
        with pytest.raises(ConfigError):
            load_config(_write(tmp_path, "[corpus.max_steps]\nwarehouse = 9\n"))


class TestSeedOverride:
    def test_overrides_every_declared_seed(self, tmp_path):
        cfg = load_config(_write(tmp_path, _FULL))
        out = apply_seed_override(cfg, 1234)
        assert out.corpus.seed == 1234
        assert out.policy.seed == 1234
        assert out.synthesis.split_seed == 1234
        assert out.masking.shuffle_seed == 1234
        # everything else untouched
        assert out.corpus.counts == cfg.corpus.counts
        assert out.policy.error_rate == cfg.policy.error_rate
        assert out.masking.base_model == cfg.masking.base_model

    def test_original_config_unchanged(self, tmp_path):
        cfg = load_config(_write(tmp_path, _FULL))
        apply_seed_override(cfg, 1)
        assert cfg.corpus.seed == 99
