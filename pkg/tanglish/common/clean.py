"""
Cleaning rules for code-mixed Tamil-English social-media comments.

The rules run in a fixed order: URLs, @mentions, emoji, punctuation, Latin lowercasing, English stopwords,
then whitespace collapsing. URL removal comes first so no URL fragment survives punctuation stripping.
Every rule is a pure function of its input, and clean_text is idempotent.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import FrozenSet, Iterable, Optional

import regex

from .environment import TANGLISH_ENV
from .errors import ConfigError

# A URL runs from the first of these to the end of its whitespace-delimited token.
_URL_PATTERN = regex.compile(r"(?i)://|www\.|http")
_EMOJI_PATTERN = regex.compile(
    "["
    "\U0001F300-\U0001F5FF"
    "\U0001F600-\U0001F64F"
    "\U0001F680-\U0001F6FF"
    "\U0001F900-\U0001F9FF"
    "\U0001FA70-\U0001FAFF"
    "\u2600-\u27bf"
    "\ufe0f"
    "\U0001F1E6-\U0001F1FF"
    "]"
)
_PUNCT_PATTERN = regex.compile(r"\p{P}")
_LATIN_PATTERN = regex.compile(r"\p{Latin}+")

DEFAULT_STOPWORDS_FILE = "en-stopwords.txt"


def load_stopwords(path: Optional[Path] = None) -> FrozenSet[str]:
    if path is None:
        path = TANGLISH_ENV.assets_dir / DEFAULT_STOPWORDS_FILE
    with path.open("r", encoding="utf-8-sig") as file:
        return frozenset(line.strip().lower() for line in file if line.strip() != "")


@lru_cache(maxsize=None)
def default_stopwords() -> FrozenSet[str]:
    return load_stopwords()


@dataclass(frozen=True)
class CleanRules:
    remove_urls: bool = True
    remove_mentions: bool = True
    remove_emoji: bool = True
    remove_punct: bool = True
    remove_stopwords: bool = True
    lowercase_latin: bool = True
    stopword_list: FrozenSet[str] = field(default_factory=default_stopwords)

    def __post_init__(self) -> None:
        if self.remove_stopwords and len(self.stopword_list) == 0:
            raise ConfigError("The stopword list must not be empty when stopword removal is enabled.")

    def to_dict(self) -> dict:
        return {
            "remove_urls": self.remove_urls,
            "remove_mentions": self.remove_mentions,
            "remove_emoji": self.remove_emoji,
            "remove_punct": self.remove_punct,
            "remove_stopwords": self.remove_stopwords,
            "lowercase_latin": self.lowercase_latin,
            "stopword_list": sorted(self.stopword_list),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CleanRules":
        d = dict(d)
        if "stopword_list" in d:
            d["stopword_list"] = frozenset(d["stopword_list"])
        return cls(**d)


def remove_urls(text: str) -> str:
    kept = []
    for token in text.split():
        match = _URL_PATTERN.search(token)
        kept.append(token if match is None else token[: match.start()])
    return " ".join(kept)


def remove_mentions(text: str) -> str:
    # "@" starts a mention that runs to the end of its whitespace-delimited token
    return " ".join(token.split("@", 1)[0] for token in text.split())


def remove_emoji(text: str) -> str:
    return _EMOJI_PATTERN.sub(" ", text)


def remove_punct(text: str) -> str:
    return _PUNCT_PATTERN.sub(" ", text)


def lowercase_latin(text: str) -> str:
    return _LATIN_PATTERN.sub(lambda m: m.group().lower(), text)


def remove_stopwords(text: str, stopwords: Iterable[str]) -> str:
    return " ".join(token for token in text.split() if token not in stopwords)


def clean_text(raw: str, rules: CleanRules) -> str:
    text = raw
    if rules.remove_urls:
        text = remove_urls(text)
    if rules.remove_mentions:
        text = remove_mentions(text)
    if rules.remove_emoji:
        text = remove_emoji(text)
    if rules.remove_punct:
        text = remove_punct(text)
    if rules.lowercase_latin:
        text = lowercase_latin(text)
    if rules.remove_stopwords:
        text = remove_stopwords(text, rules.stopword_list)
    return " ".join(text.split())
