import argparse
import logging
from copy import deepcopy
from dataclasses import asdict, dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional

import yaml

from ..common.clean import CleanRules, load_stopwords
from ..common.environment import TANGLISH_ENV
from ..common.errors import ConfigError
from ..common.utils import merge_dict, set_seed

LOGGER = logging.getLogger(__package__ + ".config")

MAX_SEQ_LEN_CEILING = 512

TRAIN_CORPUS_FILENAME = "train.tsv"
TEST_CORPUS_FILENAME = "test.tsv"
VOCAB_FILENAME = "vocab.txt"
STATS_FILENAME = "prepare-stats.json"
CHECKPOINT_FILENAME = "model.cmcx"
HISTORY_FILENAME = "history.json"
SCORES_FILENAME = "scores.json"
COMPARISON_FILENAME = "comparison.json"


class PoolerKind(Enum):
    ATTENTION = "attention"
    MEAN = "mean"


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int = 4
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    d_ff: int = 128
    max_seq_len: int = 128
    pooler_kind: PoolerKind = PoolerKind.ATTENTION
    n_classes: int = 2
    dropout_p: float = 0.5
    encoder_dropout: float = 0.1
    pool_include_cls: bool = True
    init_std: float = 0.02

    def __post_init__(self) -> None:
        if not isinstance(self.pooler_kind, PoolerKind):
            try:
                object.__setattr__(self, "pooler_kind", PoolerKind(self.pooler_kind))
            except ValueError:
                raise ConfigError(f"An invalid pooler kind was specified: {self.pooler_kind}.")
        for name in ("vocab_size", "d_model", "n_layers", "n_heads", "d_ff", "max_seq_len"):
            if getattr(self, name) < 1:
                raise ConfigError(f"The model setting {name} must be positive.")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads}).")
        if self.max_seq_len > MAX_SEQ_LEN_CEILING:
            raise ConfigError(f"max_seq_len must not exceed {MAX_SEQ_LEN_CEILING}.")
        if self.n_classes < 2:
            raise ConfigError("At least two classes are required.")
        for name in ("dropout_p", "encoder_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"The model setting {name} must lie in [0, 1).")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pooler_kind"] = self.pooler_kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 2e-5
    max_seq_len: int = 512
    batch_size: int = 8
    epochs: int = 5
    weight_decay: float = 0.01
    dropout: float = 0.5
    adam_eps: float = 1e-6
    beta1: float = 0.9
    beta2: float = 0.999
    seed: int = 111
    balance: bool = True
    balance_strategy: str = "oversample"
    warmup_steps: int = 0
    max_grad_norm: Optional[float] = None
    eval_batch_size: int = 32

    def __post_init__(self) -> None:
        for name in ("lr", "max_seq_len", "batch_size", "eval_batch_size"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"The training setting {name} must be positive.")
        for name in ("epochs", "weight_decay", "adam_eps", "warmup_steps"):
            if getattr(self, name) < 0:
                raise ConfigError(f"The training setting {name} must not be negative.")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1).")
        for name in ("beta1", "beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1).")
        if self.max_grad_norm is not None and self.max_grad_norm <= 0:
            raise ConfigError("max_grad_norm must be positive when set.")
        if self.balance_strategy not in ("oversample", "undersample"):
            raise ConfigError(f"An invalid balance strategy was specified: {self.balance_strategy}.")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


class ConfigField(NamedTuple):
    name: str
    type: type
    default: Any
    help: str
    is_list: bool = False


_DATA_FIELDS = [
    ConfigField("train_paths", str, [], "Training TSV files (train and dev), concatenated in order", is_list=True),
    ConfigField("test_path", str, None, "Test TSV file"),
    ConfigField("text_col", str, "text", "Name of the text column"),
    ConfigField("label_col", str, "category", "Name of the label column"),
    ConfigField("id_col", str, "id", "Name of the optional id column"),
    ConfigField("label_names", str, ["NOT", "HOF"], "Ordered label names", is_list=True),
    ConfigField("vocab_max_size", int, 8000, "Maximum vocabulary size, specials included"),
    ConfigField("vocab_min_freq", int, 2, "Minimum frequency of whole-word vocabulary entries"),
    ConfigField("output_dir", str, ".", "Directory for prepared corpora, vocab, checkpoint and reports"),
    ConfigField("stopwords_path", str, None, "Replacement stopword list, one word per line"),
]

_CLEAN_FIELDS = [
    ConfigField("remove_urls", bool, True, "Remove URLs"),
    ConfigField("remove_mentions", bool, True, "Remove @mentions"),
    ConfigField("remove_emoji", bool, True, "Remove emoji"),
    ConfigField("remove_punct", bool, True, "Remove punctuation"),
    ConfigField("remove_stopwords", bool, True, "Remove English stopwords"),
    ConfigField("lowercase_latin", bool, True, "Lowercase Latin-script letters"),
]

_MODEL_FIELDS = [
    ConfigField("d_model", int, 64, "Hidden size"),
    ConfigField("n_layers", int, 2, "Number of encoder layers"),
    ConfigField("n_heads", int, 4, "Number of attention heads"),
    ConfigField("d_ff", int, 128, "Feed-forward inner size"),
    ConfigField("max_seq_len", int, 128, "Maximum sequence length in tokens, CLS included"),
    ConfigField("pooler_kind", str, "attention", "Pooling head: attention or mean"),
    ConfigField("encoder_dropout", float, 0.1, "Dropout inside the encoder"),
    ConfigField("pool_include_cls", bool, True, "Let the pooler attend to the CLS position"),
    ConfigField("init_std", float, 0.02, "Standard deviation of the weight initialization"),
]

_TRAIN_FIELDS = [
    ConfigField("lr", float, 2e-5, "Initial learning rate"),
    ConfigField("batch_size", int, 8, "Training batch size"),
    ConfigField("epochs", int, 5, "Number of epochs"),
    ConfigField("weight_decay", float, 0.01, "Decoupled weight decay"),
    ConfigField("dropout", float, 0.5, "Dropout on the pooled vector"),
    ConfigField("adam_eps", float, 1e-6, "AdamW epsilon"),
    ConfigField("beta1", float, 0.9, "AdamW beta1"),
    ConfigField("beta2", float, 0.999, "AdamW beta2"),
    ConfigField("seed", int, 111, "Randomization seed"),
    ConfigField("balance", bool, True, "Balance the classes of the training corpus"),
    ConfigField("balance_strategy", str, "oversample", "oversample or undersample"),
    ConfigField("warmup_steps", int, 0, "Linear warmup steps"),
    ConfigField("max_grad_norm", float, None, "Global gradient norm clip (off when unset)"),
    ConfigField("eval_batch_size", int, 32, "Batch size for scoring"),
]

CONFIG_FIELDS: List[ConfigField] = _DATA_FIELDS + _CLEAN_FIELDS + _MODEL_FIELDS + _TRAIN_FIELDS
_FIELDS_BY_NAME = {f.name: f for f in CONFIG_FIELDS}


def default_config() -> dict:
    return {f.name: deepcopy(f.default) for f in CONFIG_FIELDS}


def _coerce(field: ConfigField, value: Any) -> Any:
    if value is None:
        return None
    try:
        if field.is_list:
            if isinstance(value, str):
                value = [value]
            return [field.type(v) for v in value]
        if field.type is bool:
            if isinstance(value, str):
                if value.lower() not in ("true", "false"):
                    raise ValueError(value)
                return value.lower() == "true"
            return bool(value)
        if field.type is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        return field.type(value)
    except (TypeError, ValueError):
        raise ConfigError(f"The config value {value!r} is not valid for {field.name}.")


class Config:
    def __init__(self, config: dict) -> None:
        unknown = sorted(set(config) - set(_FIELDS_BY_NAME))
        if len(unknown) > 0:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}.")
        config = merge_dict(default_config(), config)
        self.root = {name: _coerce(_FIELDS_BY_NAME[name], value) for name, value in config.items()}
        if len(self.label_names) < 2:
            raise ConfigError("At least two label names are required.")
        self.clean_rules = self._create_clean_rules()
        train_settings = {f.name: self.root[f.name] for f in _TRAIN_FIELDS}
        self.train_config = TrainConfig(max_seq_len=self.max_seq_len, **train_settings)
        # validates the model settings before any data is touched
        self.model_config(vocab_size=4)

    @property
    def output_dir(self) -> Path:
        return TANGLISH_ENV.resolve_path(self.root["output_dir"])

    @property
    def train_paths(self) -> List[Path]:
        return [TANGLISH_ENV.resolve_path(p) for p in self.root["train_paths"]]

    @property
    def test_path(self) -> Optional[Path]:
        if self.root["test_path"] is None:
            return None
        return TANGLISH_ENV.resolve_path(self.root["test_path"])

    @property
    def text_col(self) -> str:
        return self.root["text_col"]

    @property
    def label_col(self) -> str:
        return self.root["label_col"]

    @property
    def id_col(self) -> Optional[str]:
        return self.root["id_col"]

    @property
    def label_names(self) -> List[str]:
        return self.root["label_names"]

    @property
    def max_seq_len(self) -> int:
        return self.root["max_seq_len"]

    @property
    def vocab_path(self) -> Path:
        return self.output_dir / VOCAB_FILENAME

    @property
    def train_corpus_path(self) -> Path:
        return self.output_dir / TRAIN_CORPUS_FILENAME

    @property
    def test_corpus_path(self) -> Path:
        return self.output_dir / TEST_CORPUS_FILENAME

    @property
    def stats_path(self) -> Path:
        return self.output_dir / STATS_FILENAME

    @property
    def checkpoint_path(self) -> Path:
        return self.output_dir / CHECKPOINT_FILENAME

    @property
    def history_path(self) -> Path:
        return self.output_dir / HISTORY_FILENAME

    @property
    def scores_path(self) -> Path:
        return self.output_dir / SCORES_FILENAME

    @property
    def comparison_path(self) -> Path:
        return self.output_dir / COMPARISON_FILENAME

    def model_config(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(
            vocab_size=vocab_size,
            n_classes=len(self.label_names),
            dropout_p=self.root["dropout"],
            **{f.name: self.root[f.name] for f in _MODEL_FIELDS},
        )

    def set_seed(self) -> None:
        set_seed(self.train_config.seed)

    def to_dict(self) -> dict:
        return deepcopy(self.root)

    def with_overrides(self, overrides: dict) -> "Config":
        return Config(merge_dict(self.to_dict(), overrides))

    def _create_clean_rules(self) -> CleanRules:
        flags = {f.name: self.root[f.name] for f in _CLEAN_FIELDS}
        if self.root["stopwords_path"] is not None:
            stopwords = load_stopwords(TANGLISH_ENV.resolve_path(self.root["stopwords_path"]))
            return CleanRules(stopword_list=stopwords, **flags)
        return CleanRules(**flags)


def load_config(config_path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> Config:
    config: dict = {}
    if config_path is not None:
        if not config_path.is_file():
            raise FileNotFoundError(f"The config file {config_path} does not exist.")
        with config_path.open("r", encoding="utf-8") as file:
            loaded = yaml.safe_load(file)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"The config file {config_path} must hold a mapping of setting names to values.")
        config = loaded
        LOGGER.info(f"Loaded config from {config_path}")
    if overrides is not None:
        config = merge_dict(config, {k: v for k, v in overrides.items() if v is not None})
    return Config(config)


def model_config_for_training(model_cfg: ModelConfig, tcfg: TrainConfig) -> ModelConfig:
    """The classifier dropout and sequence cap of a run come from the training settings."""
    return replace(model_cfg, dropout_p=tcfg.dropout, max_seq_len=min(model_cfg.max_seq_len, tcfg.max_seq_len))


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def add_config_args(parser: argparse.ArgumentParser) -> None:
    """Adds --config plus one --kebab-case flag per config field. Flags left unset keep the file or default value."""
    parser.add_argument("--config", type=Path, default=None, help="YAML or JSON config file")
    for field in CONFIG_FIELDS:
        help_text = f"{field.help} (default: {field.default})"
        if field.type is bool:
            parser.add_argument(
                _flag(field.name), dest=field.name, default=None, action=argparse.BooleanOptionalAction, help=field.help
            )
        elif field.is_list:
            parser.add_argument(_flag(field.name), dest=field.name, default=None, nargs="+", help=help_text)
        else:
            parser.add_argument(_flag(field.name), dest=field.name, default=None, type=field.type, help=help_text)


def config_from_args(args: argparse.Namespace) -> Config:
    overrides = {field.name: getattr(args, field.name, None) for field in CONFIG_FIELDS}
    return load_config(args.config, overrides)
