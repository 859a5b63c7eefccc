"""Noisy-expert label aggregation for extended windows.

Three aggregators over a record x expert vote matrix: plain majority,
oracle-calibrated log-odds weighting, and a two-class latent-label EM
with one symmetric accuracy parameter per expert. Cheap lexicon labeling
functions (swear rate, second-person rate, adverb rate) provide built-in
expert columns, plus a sentiment polarity score for social features.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .textnorm import tokenize

FAKE, REAL, ABSTAIN = 1, -1, 0
VOTE_NAMES = {FAKE: "fake", REAL: "real", ABSTAIN: "abstain"}
VOTE_VALUES = {"fake": FAKE, "real": REAL, "abstain": ABSTAIN}

DEFAULT_SWEAR_THRESHOLD = 0.02
DEFAULT_PRONOUN_THRESHOLD = 0.08
DEFAULT_ADVERB_THRESHOLD = 0.12

_EM_TIE_EPS = 1e-6


class _Lexicons:
    def __init__(self, doc: dict):
        self.version = doc["version"]
        self.swear = frozenset(doc["swear"])
        self.second_person = frozenset(doc["second_person"])
        self.adverb_closed = frozenset(doc["adverb_closed"])
        self.sentiment = {k: float(v) for k, v in doc["sentiment"].items()}


_LEXICONS: _Lexicons | None = None


def lexicons() -> _Lexicons:
    global _LEXICONS
    if _LEXICONS is None:
        raw = resources.files("tadkit.data").joinpath("lexicons_v1.json").read_text("utf-8")
        _LEXICONS = _Lexicons(json.loads(raw))
    return _LEXICONS


def _is_adverb(token: str, lex: _Lexicons) -> bool:
    return (len(token) >= 4 and token.endswith("ly")) or token in lex.adverb_closed


@dataclass(frozen=True)
class LexiconFeatures:
    tokens: int
    swear_count: int
    pronoun_count: int
    adverb_count: int
    sentiment: float  # polarity in [-1, 1]


def lexicon_features(text: str) -> LexiconFeatures:
    """Token counts against the shipped lexicons plus sentiment polarity."""
    lex = lexicons()
    toks = [t.text for t in tokenize(text)]
    swear = sum(1 for t in toks if t in lex.swear)
    pron = sum(1 for t in toks if t in lex.second_person)
    adv = sum(1 for t in toks if _is_adverb(t, lex))
    valences = [lex.sentiment[t] for t in toks if t in lex.sentiment]
    if valences:
        sentiment = float(np.clip(sum(valences) / (5.0 * len(valences)), -1.0, 1.0))
    else:
        sentiment = 0.0
    return LexiconFeatures(len(toks), swear, pron, adv, sentiment)


@dataclass(frozen=True)
class LexiconVotes:
    swear: int
    pronoun: int
    adverb: int
    sentiment: float

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.swear, self.pronoun, self.adverb)


def lexicon_experts(
    text: str,
    swear_threshold: float = DEFAULT_SWEAR_THRESHOLD,
    pronoun_threshold: float = DEFAULT_PRONOUN_THRESHOLD,
    adverb_threshold: float = DEFAULT_ADVERB_THRESHOLD,
) -> LexiconVotes:
    """Three labeling-function votes from normalized token rates.

    Each function votes fake when its rate exceeds the threshold and
    abstains otherwise; empty text abstains everywhere with sentiment 0.
    """
    feats = lexicon_features(text)
    if feats.tokens == 0:
        return LexiconVotes(ABSTAIN, ABSTAIN, ABSTAIN, 0.0)

    def vote(count: int, threshold: float) -> int:
        return FAKE if count / feats.tokens > threshold else ABSTAIN

    return LexiconVotes(
        swear=vote(feats.swear_count, swear_threshold),
        pronoun=vote(feats.pronoun_count, pronoun_threshold),
        adverb=vote(feats.adverb_count, adverb_threshold),
        sentiment=feats.sentiment,
    )


# ---------------------------------------------------------------------------
# Vote matrix and aggregators
# ---------------------------------------------------------------------------


@dataclass
class ExpertLabelMatrix:
    record_ids: list[str]
    expert_ids: list[str]
    votes: np.ndarray  # (n, m) int8 in {FAKE, REAL, ABSTAIN}

    def __post_init__(self):
        self.votes = np.asarray(self.votes, dtype=np.int8)
        if self.votes.shape != (len(self.record_ids), len(self.expert_ids)):
            raise ValueError("votes shape does not match ids")

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str, str]]) -> "ExpertLabelMatrix":
        """Build from (record_id, expert_id, vote-name) triples."""
        records: list[str] = []
        experts: list[str] = []
        rec_idx: dict[str, int] = {}
        exp_idx: dict[str, int] = {}
        triples = []
        for rid, eid, vote in rows:
            if rid not in rec_idx:
                rec_idx[rid] = len(records)
                records.append(rid)
            if eid not in exp_idx:
                exp_idx[eid] = len(experts)
                experts.append(eid)
            triples.append((rec_idx[rid], exp_idx[eid], VOTE_VALUES[vote]))
        votes = np.zeros((len(records), len(experts)), dtype=np.int8)
        for i, j, v in triples:
            votes[i, j] = v
        return cls(records, experts, votes)

    def to_rows(self) -> list[tuple[str, str, str]]:
        out = []
        for i, rid in enumerate(self.record_ids):
            for j, eid in enumerate(self.expert_ids):
                out.append((rid, eid, VOTE_NAMES[int(self.votes[i, j])]))
        return out


@dataclass(frozen=True)
class ExpertWeight:
    expert_id: str
    accuracy_estimate: float
    support: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy_estimate <= 1.0:
            raise ValueError("accuracy estimate outside [0,1]")


@dataclass(frozen=True)
class AggregatedLabel:
    record_id: str
    label: str  # fake | real | unlabeled
    confidence: float
    method: str

    def to_json(self) -> dict:
        return {
            "record_id": self.record_id,
            "label": self.label,
            "confidence": self.confidence,
            "method": self.method,
        }


def _as_labels(
    matrix: ExpertLabelMatrix, score_sign: np.ndarray, confidence: np.ndarray, method: str
) -> list[AggregatedLabel]:
    out = []
    for i, rid in enumerate(matrix.record_ids):
        s = score_sign[i]
        label = "fake" if s > 0 else "real" if s < 0 else "unlabeled"
        conf = float(confidence[i]) if label != "unlabeled" else 0.0
        out.append(AggregatedLabel(rid, label, conf, method))
    return out


def majority_vote(matrix: ExpertLabelMatrix) -> list[AggregatedLabel]:
    """Most non-abstain votes wins; exact ties stay unlabeled."""
    fake = (matrix.votes == FAKE).sum(axis=1)
    real = (matrix.votes == REAL).sum(axis=1)
    active = fake + real
    sign = np.sign(fake - real)
    with np.errstate(invalid="ignore", divide="ignore"):
        conf = np.where(active > 0, np.maximum(fake, real) / np.maximum(active, 1), 0.0)
    return _as_labels(matrix, sign, conf, "majority")


def calibrate_weights(
    matrix: ExpertLabelMatrix, oracle_labels: dict[str, str]
) -> list[ExpertWeight]:
    """Laplace-smoothed accuracy of each expert against oracle labels."""
    truth = np.zeros(len(matrix.record_ids), dtype=np.int8)
    for i, rid in enumerate(matrix.record_ids):
        if rid in oracle_labels:
            truth[i] = VOTE_VALUES[oracle_labels[rid]]
    weights = []
    for j, eid in enumerate(matrix.expert_ids):
        col = matrix.votes[:, j]
        scored = (col != ABSTAIN) & (truth != ABSTAIN)
        n = int(scored.sum())
        matches = int((col[scored] == truth[scored]).sum())
        acc = (matches + 1) / (n + 2) if n > 0 else 0.5
        weights.append(ExpertWeight(eid, acc, n))
    return weights


def weighted_vote(
    matrix: ExpertLabelMatrix, weights: Sequence[ExpertWeight]
) -> list[AggregatedLabel]:
    """Log-odds vote combination; zero net score stays unlabeled."""
    by_id = {w.expert_id: w.accuracy_estimate for w in weights}
    w = np.array([by_id.get(eid, 0.5) for eid in matrix.expert_ids], dtype=np.float64)
    w = np.clip(w, 0.01, 0.99)
    log_odds = np.log(w / (1.0 - w))
    score = matrix.votes.astype(np.float64) @ log_odds
    conf = 2.0 / (1.0 + np.exp(-np.abs(score))) - 1.0
    return _as_labels(matrix, np.sign(score), conf, "weighted")


@dataclass
class EMResult:
    labels: list[AggregatedLabel]
    weights: list[ExpertWeight]
    posterior_fake: np.ndarray
    objective: list[float] = field(default_factory=list)  # MAP log-likelihood per iteration
    iterations: int = 0
    fell_back_to_majority: bool = False


def em_latent_labels(
    matrix: ExpertLabelMatrix,
    max_iters: int = 100,
    tol: float = 1e-6,
    seed: int = 0,
) -> EMResult:
    """Two-class latent-label EM (symmetric per-expert accuracy).

    E-step: posterior P(fake | votes) under current accuracies and class
    prior. M-step: Beta(2,2)/Dirichlet(2,2)-smoothed re-estimates, so the
    tracked objective is the MAP log-likelihood, non-decreasing by the EM
    guarantee. Initialization is the per-record majority fraction;
    abstains contribute nothing; fewer than two active experts falls back
    to majority voting. Deterministic (the seed is recorded only).
    """
    del seed  # EM is deterministic; signature kept uniform with the other aggregators
    votes = matrix.votes
    active_experts = np.flatnonzero((votes != ABSTAIN).any(axis=0))
    if len(active_experts) < 2:
        labels = majority_vote(matrix)
        weights = [ExpertWeight(eid, 0.5, 0) for eid in matrix.expert_ids]
        return EMResult(
            labels=[AggregatedLabel(l.record_id, l.label, l.confidence, "em") for l in labels],
            weights=weights,
            posterior_fake=np.full(len(matrix.record_ids), 0.5),
            fell_back_to_majority=True,
        )

    n, m = votes.shape
    is_fake_vote = votes == FAKE
    is_real_vote = votes == REAL
    has_vote = is_fake_vote | is_real_vote
    included = has_vote.any(axis=1)

    fake_n = is_fake_vote.sum(axis=1)
    active_n = has_vote.sum(axis=1)
    p = np.full(n, 0.5)
    nz = active_n > 0
    p[nz] = fake_n[nz] / active_n[nz]

    n_per_expert = has_vote[included].sum(axis=0)
    objective: list[float] = []
    iterations = 0
    for iterations in range(1, max_iters + 1):
        # M-step (MAP with +1/+2 smoothing)
        pi_ = (p[included].sum() + 1.0) / (included.sum() + 2.0)
        match = (is_fake_vote[included] * p[included, None]).sum(axis=0)
        match += (is_real_vote[included] * (1.0 - p[included, None])).sum(axis=0)
        acc = (match + 1.0) / (n_per_expert + 2.0)

        # E-step in log space
        la, l1a = np.log(acc), np.log1p(-acc)
        lf = np.log(pi_) + is_fake_vote @ la + is_real_vote @ l1a
        lr = np.log1p(-pi_) + is_fake_vote @ l1a + is_real_vote @ la
        hi = np.maximum(lf, lr)
        log_evidence = hi + np.log(np.exp(lf - hi) + np.exp(lr - hi))
        new_p = np.where(included, np.exp(lf - log_evidence), 0.5)

        map_ll = float(log_evidence[included].sum())
        map_ll += float(np.log(pi_) + np.log1p(-pi_))
        map_ll += float((la + l1a).sum())
        objective.append(map_ll)

        delta = float(np.max(np.abs(new_p - p))) if n else 0.0
        p = new_p
        if delta < tol:
            break

    weights = [
        ExpertWeight(eid, float(np.clip(acc[j], 0.0, 1.0)), int(n_per_expert[j]))
        for j, eid in enumerate(matrix.expert_ids)
    ]
    # a posterior this close to 0.5 is a tie; the band absorbs the float
    # noise the iteration accumulates (~1e-8 over 100 rounds), so exactly
    # symmetric vote sets come out unlabeled on both sides of a label flip
    tie = np.abs(p - 0.5) <= _EM_TIE_EPS
    sign = np.zeros(n)
    sign[included & ~tie & (p > 0.5)] = 1
    sign[included & ~tie & (p < 0.5)] = -1
    conf = np.maximum(p, 1.0 - p)
    labels = _as_labels(matrix, sign, conf, "em")
    return EMResult(
        labels=labels,
        weights=weights,
        posterior_fake=p,
        objective=objective,
        iterations=iterations,
    )


def aggregate(matrix: ExpertLabelMatrix, method: str, **kwargs) -> list[AggregatedLabel]:
    """Dispatch by method name: majority, weighted (needs oracle_labels), em."""
    if method == "majority":
        return majority_vote(matrix)
    if method == "weighted":
        oracle_labels = kwargs.get("oracle_labels") or {}
        return weighted_vote(matrix, calibrate_weights(matrix, oracle_labels))
    if method == "em":
        em_kwargs = {k: v for k, v in kwargs.items() if k in ("max_iters", "tol", "seed")}
        return em_latent_labels(matrix, **em_kwargs).labels
    raise ValueError(f"unknown aggregation method {method!r}")
