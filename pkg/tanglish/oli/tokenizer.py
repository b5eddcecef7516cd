import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import numpy as np

from ..common.corpus import load_corpus, write_corpus
from ..common.errors import DataError, VocabNotFoundError

LOGGER = logging.getLogger(__package__ + ".tokenizer")

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN)
PAD_ID, UNK_ID, CLS_ID, SEP_ID = range(4)

CONTINUATION_PREFIX = "##"


class Vocab:
    def __init__(self, tokens: Sequence[str], max_size: int = 0, min_freq: int = 1) -> None:
        self.id_to_token: List[str] = list(SPECIAL_TOKENS)
        self.id_to_token.extend(t for t in tokens if t not in SPECIAL_TOKENS)
        self.token_to_id: Dict[str, int] = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise DataError("The vocabulary contains duplicate tokens.")
        self.max_size = max_size if max_size > 0 else len(self.id_to_token)
        self.min_freq = min_freq

    @classmethod
    def load(cls, path: Path) -> "Vocab":
        if not path.is_file():
            raise VocabNotFoundError(f"vocab not found: {path}")
        return cls.from_lines(list(load_corpus(path)))

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "Vocab":
        if tuple(lines[:4]) != SPECIAL_TOKENS:
            raise DataError(f"The first four vocabulary entries must be {', '.join(SPECIAL_TOKENS)}.")
        return cls(lines[4:])

    def save(self, path: Path) -> None:
        write_corpus(path, self.id_to_token)

    def to_text(self) -> str:
        return "".join(token + "\n" for token in self.id_to_token)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def __getitem__(self, token: str) -> int:
        return self.token_to_id[token]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocab) and self.id_to_token == other.id_to_token


def build_vocab(corpus: Iterable[str], max_size: int, min_freq: int = 1) -> Vocab:
    """Builds a WordPiece-style vocabulary from cleaned text.

    Whole words seen at least min_freq times are candidates, as is every character seen, both in word-initial
    form ("c") and continuation form ("##c"), so no cleaned word can become UNK. Candidates are ranked by
    frequency, then lexicographically, and the list is cut to max_size entries including the four specials.
    """
    word_counts: Counter = Counter()
    for text in corpus:
        word_counts.update(text.split())

    char_counts: Counter = Counter()
    for word, count in word_counts.items():
        for ch in word:
            char_counts[ch] += count
            char_counts[CONTINUATION_PREFIX + ch] += count

    candidates: Dict[str, int] = {w: c for w, c in word_counts.items() if c >= min_freq}
    for token, count in char_counts.items():
        candidates[token] = max(candidates.get(token, 0), count)
    for special in SPECIAL_TOKENS:
        candidates.pop(special, None)

    ranked = sorted(candidates.items(), key=lambda item: (-item[1], item[0]))
    limit = max(max_size - len(SPECIAL_TOKENS), 0)
    vocab = Vocab([token for token, _ in ranked[:limit]], max_size=max_size, min_freq=min_freq)
    LOGGER.info(f"Built a vocabulary of {len(vocab)} entries from {len(word_counts)} distinct words")
    return vocab


def wordpiece(word: str, vocab: Vocab) -> List[int]:
    ids: List[int] = []
    start = 0
    while start < len(word):
        end = len(word)
        cur_id = None
        # longest match first
        while start < end:
            piece = word[start:end]
            if start > 0:
                piece = CONTINUATION_PREFIX + piece
            cur_id = vocab.token_to_id.get(piece)
            if cur_id is not None:
                break
            end -= 1
        if cur_id is None:
            return [UNK_ID]
        ids.append(cur_id)
        start = end
    return ids


def tokenize(text: str, vocab: Vocab, max_seq_len: int) -> List[int]:
    if max_seq_len < 2:
        raise DataError("The maximum sequence length must be at least 2.")
    ids = [CLS_ID]
    for word in text.split():
        if len(ids) >= max_seq_len:
            break
        ids.extend(wordpiece(word, vocab))
    return ids[:max_seq_len]


@dataclass(frozen=True)
class TokenBatch:
    ids: np.ndarray
    mask: np.ndarray

    @property
    def seq_len(self) -> int:
        return self.ids.shape[1]

    @property
    def batch_size(self) -> int:
        return self.ids.shape[0]


def encode_batch(texts: Sequence[str], vocab: Vocab, max_seq_len: int) -> TokenBatch:
    if len(texts) == 0:
        raise DataError("Cannot encode an empty batch.")
    rows = [tokenize(text, vocab, max_seq_len) for text in texts]
    seq_len = max(len(row) for row in rows)
    ids = np.full((len(rows), seq_len), PAD_ID, dtype=np.int64)
    mask = np.zeros((len(rows), seq_len), dtype=np.int64)
    for i, row in enumerate(rows):
        ids[i, : len(row)] = row
        mask[i, : len(row)] = 1
    return TokenBatch(ids, mask)
