"""Unsupervised word segmentation for unsegmented scripts.

Adjacent-character pointwise mutual information (add-one smoothed, natural
log) drives a two-phase splitter: phase 1 repeatedly breaks the globally
weakest adjacent pair until no fragment exceeds two characters; phase 2
splits each remaining two-character fragment whose internal PMI falls at or
below a threshold k_cmi.  The threshold is calibrated on a sample so the
resulting 1-char:2-char word proportion lands closest to a target ratio
(7:3 unless overridden).  A hybrid mode re-splits the output of an external
tokenizer instead of raw sentences.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import DocumentCollection, split_sentences
from .errors import CalibrationError, EmptyCollectionError

DEFAULT_RATIO = (7, 3)


@dataclass(frozen=True)
class MiTable:
    """Adjacent-character statistics: unigram/bigram counts and totals."""

    unigrams: Mapping[str, int]
    bigrams: Mapping[str, int]
    total_unigrams: int
    total_bigrams: int

    @property
    def vocab_size(self) -> int:
        return len(self.unigrams)


@dataclass(frozen=True)
class RatioTarget:
    """Target proportion of 1-char to 2-char words, a:b."""

    a: float = DEFAULT_RATIO[0]
    b: float = DEFAULT_RATIO[1]

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise ValueError("ratio weights must be nonnegative and not both zero")

    @property
    def one_char_share(self) -> float:
        return self.a / (self.a + self.b)


def build_mi_table_from_sentences(sentences: Iterable[str]) -> MiTable:
    """Count characters and adjacent pairs; pairs never cross a sentence."""
    unigrams: Counter = Counter()
    bigrams: Counter = Counter()
    for sentence in sentences:
        unigrams.update(sentence)
        for i in range(len(sentence) - 1):
            bigrams[sentence[i : i + 2]] += 1
    return MiTable(dict(unigrams), dict(bigrams),
                   sum(unigrams.values()), sum(bigrams.values()))


def build_mi_table(corpus: DocumentCollection) -> MiTable:
    if len(corpus) == 0:
        raise EmptyCollectionError("cannot build character statistics from nothing")
    sentences = []
    for doc in corpus:
        sentences.extend(split_sentences(doc.title))
        sentences.extend(split_sentences(doc.body))
    return build_mi_table_from_sentences(sentences)


def pmi(table: MiTable, x: str, y: str) -> float:
    """Smoothed pointwise mutual information of the adjacent pair x,y."""
    v = table.vocab_size
    if v == 0:
        return 0.0
    p_pair = (table.bigrams.get(x + y, 0) + 1) / (table.total_bigrams + v * v)
    p_x = (table.unigrams.get(x, 0) + 1) / (table.total_unigrams + v)
    p_y = (table.unigrams.get(y, 0) + 1) / (table.total_unigrams + v)
    return math.log(p_pair / (p_x * p_y))


def segment_phase1(sentence: str, table: MiTable) -> list[str]:
    """Split the globally weakest adjacent pair (leftmost on ties) inside any
    fragment longer than two characters, until all fragments have length <= 2."""
    if not sentence:
        return []
    fragments = [sentence]
    while True:
        weakest = None  # (pmi, global_offset, fragment_idx, split_pos)
        offset = 0
        for idx, frag in enumerate(fragments):
            if len(frag) > 2:
                for k in range(1, len(frag)):
                    value = pmi(table, frag[k - 1], frag[k])
                    key = (value, offset + k)
                    if weakest is None or key < weakest[0]:
                        weakest = (key, idx, k)
            offset += len(frag)
        if weakest is None:
            return fragments
        _, idx, k = weakest
        frag = fragments[idx]
        fragments[idx : idx + 1] = [frag[:k], frag[k:]]


def segment(sentence: str, table: MiTable, k_cmi: float) -> list[str]:
    """Full segmentation: phase 1, then threshold-split 2-char fragments."""
    words = []
    for frag in segment_phase1(sentence, table):
        if len(frag) == 2 and pmi(table, frag[0], frag[1]) <= k_cmi:
            words.extend(frag)
        else:
            words.append(frag)
    return words


def hybrid_segment(sentence: str, tokenizer: Callable[[str], list[str]],
                   table: MiTable, k_cmi: float) -> list[str]:
    """Tokenize first, then re-split each token by the MI rules."""
    words = []
    for token in tokenizer(sentence):
        if len(token) <= 1:
            words.append(token)
        else:
            words.extend(segment(token, table, k_cmi))
    return words


def _sample_fragments(sample: Iterable[str], table: MiTable) -> tuple[int, list[float]]:
    """Phase-1 the sample; return (1-char word count, PMIs of 2-char fragments)."""
    ones = 0
    pair_pmis = []
    for sentence in sample:
        for frag in segment_phase1(sentence, table):
            if len(frag) == 1:
                ones += 1
            else:
                pair_pmis.append(pmi(table, frag[0], frag[1]))
    return ones, pair_pmis


def calibrate_kcmi(sample: Sequence[str], table: MiTable,
                   target: RatioTarget = RatioTarget()) -> float:
    """Pick the threshold whose induced 1-char:2-char proportion on the
    sample is closest to the target, by scanning every candidate split count.

    Candidate thresholds are "below the minimum PMI" (split nothing) and each
    distinct observed PMI (split everything at or below it); equally close
    candidates resolve to the smaller threshold.
    """
    ones_base, pair_pmis = _sample_fragments(sample, table)
    if not pair_pmis:
        raise CalibrationError("sample produced no two-character fragments")
    values = sorted(set(pair_pmis))
    counts = Counter(pair_pmis)
    candidates = [values[0] - 1.0] + values
    best = None  # (distance, threshold)
    split = 0
    for threshold in candidates:
        if threshold in counts:
            split += counts[threshold]
        ones = ones_base + 2 * split
        twos = len(pair_pmis) - split
        share = ones / (ones + twos)
        key = (abs(share - target.one_char_share), threshold)
        if best is None or key < best:
            best = key
    return best[1]
