"""Bundled public-domain prose used as the human-writing proxy.

The text is split into consecutive passages of ``passage_words`` words;
even-numbered passages form the language-model training slice and odd ones
the held-out pool that human-proxy essays are cut from, so the two never
share a passage.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[str, ...]
    held_out: tuple[str, ...]

    @property
    def held_out_words(self) -> list[str]:
        return " ".join(self.held_out).split()


@lru_cache(maxsize=1)
def load_paragraphs() -> tuple[tuple[str, tuple[str, ...]], ...]:
    """``(source title, paragraphs)`` for each bundled work."""
    raw = resources.files("procsec.data").joinpath("human_corpus.txt").read_text(encoding="utf-8")
    works: list[tuple[str, list[str]]] = []
    for line in raw.splitlines():
        if line.startswith("=== "):
            works.append((line[4:], []))
        elif line.strip():
            works[-1][1].append(line.strip())
    return tuple((title, tuple(pars)) for title, pars in works)


@lru_cache(maxsize=8)
def split_corpus(passage_words: int = 250) -> CorpusSplit:
    train, held = [], []
    k = 0
    for _, pars in load_paragraphs():
        words = " ".join(pars).split()
        for i in range(0, len(words), passage_words):
            chunk = " ".join(words[i:i + passage_words])
            (train if k % 2 == 0 else held).append(chunk)
            k += 1
    return CorpusSplit(tuple(train), tuple(held))
