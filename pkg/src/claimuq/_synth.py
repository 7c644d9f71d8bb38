"""Deterministic synthetic corpora for tests and conformance checks.

Not part of the public API. Texts are assembled from small four-language
vocabularies with punctuation sprinkled in, then cut into contiguous
sampled-token spans the way a subword tokenizer would. ``random.Random``
keeps streams stable across platforms and Python versions.

Run ``python3 -m claimuq._synth --count N --out corpus.jsonl`` to write a
corpus; the conformance harness for the language bindings does exactly
that.
"""
from __future__ import annotations

import argparse
import math
import random
from typing import Sequence

from .io import write_samples
from .model import CANDIDATES_PER_TOKEN, Sample, TokenRecord

_WORDS = {
    "EN": ["the", "capital", "of", "France", "is", "Paris", "founded", "in",
           "1253", "and", "it", "has", "many", "rivers", "No", "city",
           "larger", "than", "Berlin", "exists", "there", "people", "say"],
    "FR": ["la", "capitale", "de", "France", "est", "Paris", "et", "elle",
           "fondée", "en", "1253", "avec", "des", "rivières", "ville",
           "plus", "grande", "que", "Berlin", "n'existe", "pas"],
    "ES": ["la", "capital", "de", "Francia", "es", "París", "fundada", "en",
           "1253", "y", "tiene", "muchos", "ríos", "ciudad", "más",
           "grande", "que", "Berlín", "no", "existe"],
    "DE": ["die", "Hauptstadt", "von", "Frankreich", "ist", "Paris",
           "gegründet", "im", "Jahr", "1253", "und", "hat", "viele",
           "Flüsse", "keine", "Stadt", "größer", "als", "Berlin"],
}
_MODELS = ["alpha-8b", "alpha-3b", "beta-4b", "gamma-8b"]
_PUNCT_TAIL = [".", ".", ".", "!", "?"]
_MID_PUNCT = [",", ",", ";", ":"]


def make_text(rng: random.Random, language: str) -> str:
    words = _WORDS[language]
    parts: list[str] = []
    n_sentences = rng.randint(1, 3)
    for _ in range(n_sentences):
        n = rng.randint(2, 9)
        sent = []
        for i in range(n):
            w = rng.choice(words)
            sent.append(w)
            if i < n - 1 and rng.random() < 0.12:
                sent[-1] += rng.choice(_MID_PUNCT)
        parts.append(" ".join(sent) + rng.choice(_PUNCT_TAIL))
    return " ".join(parts)


def cut_token_spans(rng: random.Random, text: str) -> list[tuple[int, int]]:
    """Contiguous spans covering the text, 1 to 8 characters each."""
    spans = []
    pos = 0
    while pos < len(text):
        length = min(rng.randint(1, 8), len(text) - pos)
        spans.append((pos, pos + length))
        pos += length
    return spans


def _candidates(rng: random.Random) -> tuple[tuple[int, float], ...]:
    logits = sorted((rng.gauss(0.0, 3.0) for _ in range(CANDIDATES_PER_TOKEN)),
                    reverse=True)
    return tuple((rng.randrange(50_000), lg) for lg in logits)


def make_sample(
    rng: random.Random,
    sample_id: str,
    *,
    with_eos: bool = True,
    force_bad_rank: bool = False,
) -> Sample:
    language = rng.choice(sorted(_WORDS))
    text = make_text(rng, language)
    tokens = []
    for start, end in cut_token_spans(rng, text):
        # geometric-ish rank distribution keeps most tokens near the top
        rank = min(int(math.log(max(rng.random(), 1e-9)) / math.log(0.45)),
                   CANDIDATES_PER_TOKEN - 1)
        tokens.append(TokenRecord(
            surface=text[start:end],
            char_start=start,
            char_end=end,
            sampled_rank=rank,
            candidates=_candidates(rng),
        ))
    if force_bad_rank and tokens:
        i = rng.randrange(len(tokens))
        tokens[i] = TokenRecord(
            surface=tokens[i].surface,
            char_start=tokens[i].char_start,
            char_end=tokens[i].char_end,
            sampled_rank=CANDIDATES_PER_TOKEN,
            candidates=tokens[i].candidates,
        )
    if with_eos:
        tokens.append(TokenRecord(
            surface="",
            char_start=len(text),
            char_end=len(text),
            sampled_rank=0,
            candidates=_candidates(rng),
            is_eos=True,
        ))
    return Sample(
        id=sample_id,
        language=language,
        model=rng.choice(_MODELS),
        temperature=rng.choice([0.7, 1.0]),
        question=f"question {sample_id}",
        generation_text=text,
        tokens=tuple(tokens),
    )


def make_corpus(seed: int, count: int) -> list[Sample]:
    rng = random.Random(seed)
    return [make_sample(rng, f"s{i:05d}") for i in range(count)]


def make_labels(rng: random.Random, n_claims: int) -> tuple[int, ...]:
    return tuple(-1 if rng.random() < 0.3 else 1 for _ in range(n_claims))


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python3 -m claimuq._synth",
        description="write a deterministic synthetic sample corpus",
    )
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    write_samples(args.out, make_corpus(args.seed, args.count))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
