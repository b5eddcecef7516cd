"""
Binary checkpoint files.

Layout, all integers little-endian:
    b"CMCX" | u32 version | u64 n + n bytes of UTF-8 JSON metadata | u64 n + n bytes of vocab text
    then one record per tensor: u16 n + n bytes of name | u8 rank | rank x u64 dims | float64 data

Model parameters are followed by the AdamW moments of a resumable checkpoint, named "adamw.m/<param>" and
"adamw.v/<param>". The metadata holds the configs, label names, cleaning rules, history and the tensor count.
"""
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..common.clean import CleanRules
from ..common.errors import CheckpointError
from .config import ModelConfig, TrainConfig
from .models.classifier import OffensiveClassifier
from .models.tensor_ops import ParamStore
from .optimizer import OptimizerState
from .tokenizer import Vocab

LOGGER = logging.getLogger(__package__ + ".checkpoint")

MAGIC = b"CMCX"
FORMAT_VERSION = 1
MOMENT1_PREFIX = "adamw.m/"
MOMENT2_PREFIX = "adamw.v/"

_METADATA_KEYS = {
    "model_config",
    "train_config",
    "label_names",
    "clean_rules",
    "history",
    "epochs_completed",
    "optimizer_step",
    "tensor_count",
}


@dataclass
class Checkpoint:
    model_config: ModelConfig
    train_config: TrainConfig
    label_names: List[str]
    vocab: Vocab
    params: ParamStore
    clean_rules: CleanRules = field(default_factory=CleanRules)
    history: List[dict] = field(default_factory=list)
    optimizer: Optional[OptimizerState] = None
    epochs_completed: int = 0
    version: int = FORMAT_VERSION

    def to_model(self) -> OffensiveClassifier:
        return OffensiveClassifier(self.model_config, self.params)

    def tensors(self) -> List[Tuple[str, np.ndarray]]:
        tensors = [(name, param.value) for name, param in self.params.items()]
        if self.optimizer is not None:
            tensors.extend((MOMENT1_PREFIX + name, m) for name, m in self.optimizer.m.items())
            tensors.extend((MOMENT2_PREFIX + name, v) for name, v in self.optimizer.v.items())
        return tensors

    def metadata(self) -> dict:
        return {
            "format_version": self.version,
            "model_config": self.model_config.to_dict(),
            "train_config": self.train_config.to_dict(),
            "label_names": list(self.label_names),
            "clean_rules": self.clean_rules.to_dict(),
            "history": self.history,
            "epochs_completed": self.epochs_completed,
            "optimizer_step": None if self.optimizer is None else self.optimizer.t,
            "tensor_count": len(self.tensors()),
        }


def _encode_tensor(name: str, value: np.ndarray) -> bytes:
    name_bytes = name.encode("utf-8")
    header = struct.pack("<H", len(name_bytes)) + name_bytes + struct.pack("<B", value.ndim)
    header += struct.pack(f"<{value.ndim}Q", *value.shape)
    return header + np.ascontiguousarray(value, dtype="<f8").tobytes()


def save_checkpoint(ckpt: Checkpoint, path: Path) -> None:
    meta = json.dumps(ckpt.metadata(), sort_keys=True, ensure_ascii=False).encode("utf-8")
    vocab = ckpt.vocab.to_text().encode("utf-8")
    with path.open("wb") as file:
        file.write(MAGIC)
        file.write(struct.pack("<I", ckpt.version))
        file.write(struct.pack("<Q", len(meta)))
        file.write(meta)
        file.write(struct.pack("<Q", len(vocab)))
        file.write(vocab)
        for name, value in ckpt.tensors():
            file.write(_encode_tensor(name, value))
    LOGGER.info(f"Saved checkpoint to {path}")


class _Reader:
    def __init__(self, data: bytes, path: Path) -> None:
        self.data = data
        self.path = path
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError(f"The checkpoint {self.path} is truncated while reading {what}.")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.data)


def _read_tensor(reader: _Reader) -> Tuple[str, np.ndarray]:
    (name_len,) = reader.unpack("<H", "a tensor name length")
    name = reader.take(name_len, "a tensor name").decode("utf-8")
    (rank,) = reader.unpack("<B", f"the rank of {name}")
    dims = reader.unpack(f"<{rank}Q", f"the shape of {name}")
    size = int(np.prod(dims, dtype=np.int64))
    data = reader.take(8 * size, f"the data of {name}")
    return name, np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(dims)


def load_checkpoint(path: Path) -> Checkpoint:
    if not path.is_file():
        raise FileNotFoundError(f"The checkpoint {path} does not exist.")
    reader = _Reader(path.read_bytes(), path)
    if reader.take(len(MAGIC), "the header") != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file.")
    (version,) = reader.unpack("<I", "the format version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"The checkpoint {path} has format version {version}, expected {FORMAT_VERSION}.")
    (meta_len,) = reader.unpack("<Q", "the metadata length")
    try:
        meta = json.loads(reader.take(meta_len, "the metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"The checkpoint {path} has corrupt metadata: {e}")
    missing = sorted(_METADATA_KEYS - set(meta)) if isinstance(meta, dict) else sorted(_METADATA_KEYS)
    if len(missing) > 0:
        raise CheckpointError(f"The checkpoint {path} metadata lacks {', '.join(missing)}.")
    (vocab_len,) = reader.unpack("<Q", "the vocab length")
    vocab = Vocab.from_lines(reader.take(vocab_len, "the vocab").decode("utf-8").splitlines())

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(meta["tensor_count"]):
        name, value = _read_tensor(reader)
        tensors[name] = value
    if not reader.exhausted:
        raise CheckpointError(f"The checkpoint {path} has unexpected trailing data.")

    model_config = ModelConfig.from_dict(meta["model_config"])
    params = ParamStore()
    for name, value in tensors.items():
        if not name.startswith((MOMENT1_PREFIX, MOMENT2_PREFIX)):
            params.add(name, value)

    optimizer: Optional[OptimizerState] = None
    if meta["optimizer_step"] is not None:
        optimizer = OptimizerState(
            {name[len(MOMENT1_PREFIX) :]: v for name, v in tensors.items() if name.startswith(MOMENT1_PREFIX)},
            {name[len(MOMENT2_PREFIX) :]: v for name, v in tensors.items() if name.startswith(MOMENT2_PREFIX)},
            meta["optimizer_step"],
        )

    return Checkpoint(
        model_config=model_config,
        train_config=TrainConfig.from_dict(meta["train_config"]),
        label_names=meta["label_names"],
        vocab=vocab,
        params=params,
        clean_rules=CleanRules.from_dict(meta["clean_rules"]),
        history=meta["history"],
        optimizer=optimizer,
        epochs_completed=meta["epochs_completed"],
        version=version,
    )
