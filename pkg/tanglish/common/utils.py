import logging
import os
import random
from pathlib import Path
from typing import Any, List, MutableSequence, TypeVar

import numpy as np

_MASK64 = (1 << 64) - 1

T = TypeVar("T")


def set_seed(seed: Any) -> None:
    os.environ["PYTHONHASHSEED"] = str(seed)
    np.random.seed(seed % (1 << 32))
    random.seed(seed)


def merge_dict(dict1: dict, dict2: dict) -> dict:
    for key, value in dict2.items():
        if isinstance(value, dict):
            dict1_value = dict1.get(key, {})
            if isinstance(dict1_value, dict):
                dict1[key] = merge_dict(dict1_value, value)
            else:
                dict1[key] = value
        else:
            dict1[key] = value
    return dict1


def init_file_logger(exp_folder: Path) -> None:
    logger = logging.getLogger()
    logger.setLevel(logging.INFO)
    # only one log.txt handler per process
    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            logger.removeHandler(handler)
            handler.close()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    fh = logging.FileHandler(exp_folder / "log.txt", encoding="utf-8")
    fh.setFormatter(formatter)
    logger.addHandler(fh)


class SplitMix64:
    """Seeded 64-bit generator used for every corpus sampling and shuffling decision.

    The stream is defined by the state increment 0x9E3779B97F4A7C15 and the two multiply/xor-shift
    mixing rounds, so a seed reproduces the same draws in any implementation.
    """

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Returns an integer in [0, n) by multiply-shift of the next 64-bit output."""
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: MutableSequence[T]) -> None:
        # Fisher-Yates, descending
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> List[int]:
        indices = list(range(n))
        self.shuffle(indices)
        return indices
