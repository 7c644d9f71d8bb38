"""Structural invariants and serialization round-trips for the data model."""
import math
import random

import pytest

from claimuq import (
    CANDIDATES_PER_TOKEN,
    ClaimPartition,
    Sample,
    SchemaError,
    TokenRecord,
    partition_digest,
    validate_sample,
)
from claimuq._synth import make_corpus, make_sample
from claimuq.model import sample_from_dict, sample_to_dict


def _flat_candidates():
    return tuple((i, 0.0) for i in range(CANDIDATES_PER_TOKEN))


def _tiny_sample(text="ab", *, with_eos=True, rank=0):
    tokens = [
        TokenRecord("a", 0, 1, rank, _flat_candidates()),
        TokenRecord("b", 1, 2, 0, _flat_candidates()),
    ]
    if with_eos:
        tokens.append(TokenRecord("", 2, 2, 0, _flat_candidates(), is_eos=True))
    return Sample(
        id="t1", language="EN", model="m", temperature=1.0,
        question="q", generation_text=text, tokens=tuple(tokens),
    )


class TestValidateSample:
    def test_well_formed_sample_has_no_violations(self):
        assert validate_sample(_tiny_sample()) == []

    def test_missing_eos_reported(self):
        codes = {v.code for v in validate_sample(_tiny_sample(with_eos=False))}
        assert codes == {"missing-eos"}

    def test_rank_out_of_range_reported(self):
        codes = {v.code for v in validate_sample(_tiny_sample(rank=24))}
        assert "rank-range" in codes
        codes = {v.code for v in validate_sample(_tiny_sample(rank=-1))}
        assert "rank-range" in codes

    def test_surface_mismatch_reported(self):
        sample = _tiny_sample()
        bad = list(sample.tokens)
        bad[0] = TokenRecord("x", 0, 1, 0, _flat_candidates())
        sample = Sample(**{**_as_kwargs(sample), "tokens": tuple(bad)})
        codes = {v.code for v in validate_sample(sample)}
        assert "surface-mismatch" in codes

    def test_gap_between_tokens_reported(self):
        sample = _tiny_sample("abc")
        codes = {v.code for v in validate_sample(sample)}
        assert "contiguity" in codes or "eos-offset" in codes

    def test_eos_not_last_reported(self):
        tokens = (
            TokenRecord("", 2, 2, 0, _flat_candidates(), is_eos=True),
            TokenRecord("ab", 0, 2, 0, _flat_candidates()),
        )
        sample = Sample(id="t", language="EN", model="m", temperature=1.0,
                        question="q", generation_text="ab", tokens=tokens)
        codes = {v.code for v in validate_sample(sample)}
        assert "eos-not-last" in codes

    def test_unsorted_candidates_reported(self):
        cands = list(_flat_candidates())
        cands[0] = (0, -1.0)  # now below candidate 1
        tokens = (
            TokenRecord("ab", 0, 2, 0, tuple(cands)),
            TokenRecord("", 2, 2, 0, _flat_candidates(), is_eos=True),
        )
        sample = Sample(id="t", language="EN", model="m", temperature=1.0,
                        question="q", generation_text="ab", tokens=tokens)
        assert "logit-order" in {v.code for v in validate_sample(sample)}

    def test_candidate_count_enforced(self):
        tokens = (
            TokenRecord("ab", 0, 2, 0, _flat_candidates()[:5]),
            TokenRecord("", 2, 2, 0, _flat_candidates(), is_eos=True),
        )
        sample = Sample(id="t", language="EN", model="m", temperature=1.0,
                        question="q", generation_text="ab", tokens=tokens)
        assert "candidate-count" in {v.code for v in validate_sample(sample)}

    def test_synthetic_corpus_is_valid(self):
        for sample in make_corpus(seed=11, count=40):
            assert validate_sample(sample) == []


def _as_kwargs(sample):
    return {
        "id": sample.id, "language": sample.language, "model": sample.model,
        "temperature": sample.temperature, "question": sample.question,
        "generation_text": sample.generation_text, "tokens": sample.tokens,
    }


class TestSerialization:
    def test_round_trip_is_exact(self):
        """parse(serialize(s)) == s, bit-for-bit on every float."""
        rng = random.Random(2)
        for i in range(30):
            sample = make_sample(rng, f"rt{i}")
            assert sample_from_dict(sample_to_dict(sample)) == sample

    def test_round_trip_handles_awkward_floats(self):
        cands = tuple(
            (i, v) for i, v in zip(
                range(CANDIDATES_PER_TOKEN),
                [1e308, 1.0 + 2**-52, 3.141592653589793] + [-1e-308] * 21,
            )
        )
        tokens = (
            TokenRecord("é", 0, 1, 0, cands),
            TokenRecord("", 1, 1, 0, cands, is_eos=True),
        )
        sample = Sample(id="f", language="FR", model="m", temperature=0.7,
                        question="¿q?", generation_text="é", tokens=tokens)
        assert sample_from_dict(sample_to_dict(sample)) == sample

    def test_format_tag_is_checked(self):
        row = sample_to_dict(_tiny_sample())
        row["format"] = "other/9"
        with pytest.raises(SchemaError):
            sample_from_dict(row)

    def test_missing_key_raises_schema_error(self):
        row = sample_to_dict(_tiny_sample())
        del row["generation_text"]
        with pytest.raises(SchemaError):
            sample_from_dict(row)

    def test_non_eos_surfaces_concatenate_to_text(self):
        rng = random.Random(9)
        for i in range(25):
            sample = make_sample(rng, f"c{i}")
            joined = "".join(t.surface for t in sample.tokens if not t.is_eos)
            assert joined == sample.generation_text


class TestPartitionDigest:
    def test_digest_is_stable_and_distinguishes(self):
        p1 = ClaimPartition(claims=((0, 1), (2,)), has_eos=True)
        p2 = ClaimPartition(claims=((0,), (1, 2)), has_eos=True)
        assert partition_digest(p1) == partition_digest(p1)
        assert partition_digest(p1) != partition_digest(p2)
        assert len(partition_digest(p1)) == 64

    def test_scored_claim_count_excludes_eos(self):
        p = ClaimPartition(claims=((0, 1), (2,)), has_eos=True)
        assert p.n_scored_claims == 1
        q = ClaimPartition(claims=((0, 1), (2,)), has_eos=False)
        assert q.n_scored_claims == 2


def test_temperature_survives_integer_json():
    row = sample_to_dict(_tiny_sample())
    row["temperature"] = 1  # json writers may drop the .0
    parsed = sample_from_dict(row)
    assert isinstance(parsed.temperature, float)
    assert parsed.temperature == 1.0 and not math.isnan(parsed.temperature)
