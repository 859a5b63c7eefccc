"""Knowledge-expiration experiments on synthetic drifting streams.

The stream generator realizes the two properties that break a fixed
classifier: never-seen-before novelty (fresh per-window token pools) and
short-lived abundance (those pools dominate a window, then rotate away).
Classifiers are nearest-centroid heads over frozen embeddings, optionally
concatenated with z-scored social counts and labeling-function counts.
Update schemes replay the stream with static, slow-refresh, fast-refresh,
or full-memory retraining policies.
"""

from __future__ import annotations

import hashlib
import json
import string
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Sequence

import numpy as np

from .embedding import EmbedderDescriptor, derive_window_embedder, embed_texts
from .errors import MissingClassError
from .hashing import mix
from .records import DocumentRecord
from .weaklabel import lexicon_features

CLASS_FAKE = "fake"
CLASS_REAL = "real"
CLASSES = (CLASS_FAKE, CLASS_REAL)

KIND_TEXT = "centroid"
KIND_SOCIAL = "centroid+social"
KIND_MULTI = "centroid+social+lf"
KINDS = (KIND_TEXT, KIND_SOCIAL, KIND_MULTI)


@dataclass(frozen=True)
class DriftStreamConfig:
    """Synthetic stream layout: what persists, what rotates, and how much
    of each window the rotating (novel) pools occupy."""

    windows: int = 10
    samples_per_window: int = 2000
    novel_fraction: float = 0.6  # share of each doc's tokens drawn from novel pools
    rotation_period: int = 1  # windows between full novel-pool replacement
    doc_tokens: int = 12
    token_length: int = 8
    # class-signal structure: "specific" pools are per-class, "shared" pools
    # are class-neutral; the *_specific_rate knobs set how often a draw from
    # each source is class-specific, i.e. where the class signal lives.
    persistent_specific_pool: int = 40
    persistent_shared_pool: int = 400
    persistent_specific_rate: float = 0.28
    novel_specific_pool: int = 40
    novel_shared_pool: int = 160
    novel_specific_rate: float = 1.0
    seed: int = 7

    def __post_init__(self):
        if not 0.0 <= self.novel_fraction <= 1.0:
            raise ValueError("novel_fraction must lie in [0,1]")
        if self.windows < 1 or self.rotation_period < 1:
            raise ValueError("windows and rotation_period must be >= 1")

    def persistent_signal_share(self) -> float:
        """Expected share of class-signal token draws that come from the
        persistent pools (the rest rides on rotating novel pools)."""
        p = (1.0 - self.novel_fraction) * self.persistent_specific_rate
        q = self.novel_fraction * self.novel_specific_rate
        return p / (p + q) if p + q > 0 else 0.0

    def config_hash(self) -> str:
        blob = json.dumps(self.__dict__, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def persistent_dominant_config(**overrides) -> DriftStreamConfig:
    """Default stream re-tuned so the persistent pools carry >= 70% of the
    class signal, spread thin enough that one window of training sits low
    on the learning curve while two windows sit visibly higher: the regime
    where replacing a model every window forfeits timeless signal."""
    params = dict(
        persistent_specific_pool=200,
        persistent_shared_pool=400,
        persistent_specific_rate=0.3,
        novel_specific_pool=40,
        novel_specific_rate=0.075,
    )
    params.update(overrides)
    return DriftStreamConfig(**params)


@dataclass
class DriftWindow:
    window_id: str
    records: list[DocumentRecord]
    labels: dict[str, str]  # record id -> fake/real ground truth


def _token_pool(rng: np.random.Generator, count: int, length: int, taken: set[str]) -> list[str]:
    letters = np.array(list(string.ascii_lowercase))
    pool = []
    while len(pool) < count:
        tok = "".join(letters[rng.integers(0, 26, size=length)])
        if tok not in taken:
            taken.add(tok)
            pool.append(tok)
    return pool


def generate_drift_stream(config: DriftStreamConfig) -> list[DriftWindow]:
    """Deterministic labeled stream: per window, each document mixes
    persistent-pool tokens with current-rotation novel-pool tokens, and
    social counts follow class-conditional distributions (heavier-tailed
    for the fake class)."""
    rng = np.random.default_rng(mix(config.seed, "drift-stream") & (2**63 - 1))
    taken: set[str] = set()
    pools = {
        (CLASS_FAKE, "persistent"): _token_pool(
            rng, config.persistent_specific_pool, config.token_length, taken
        ),
        (CLASS_REAL, "persistent"): _token_pool(
            rng, config.persistent_specific_pool, config.token_length, taken
        ),
    }
    shared_persistent = _token_pool(rng, config.persistent_shared_pool, config.token_length, taken)

    n_rotations = (config.windows + config.rotation_period - 1) // config.rotation_period
    novel_specific: dict[tuple[str, int], list[str]] = {}
    novel_shared: dict[int, list[str]] = {}
    for r in range(n_rotations):
        novel_specific[(CLASS_FAKE, r)] = _token_pool(
            rng, config.novel_specific_pool, config.token_length, taken
        )
        novel_specific[(CLASS_REAL, r)] = _token_pool(
            rng, config.novel_specific_pool, config.token_length, taken
        )
        novel_shared[r] = _token_pool(rng, config.novel_shared_pool, config.token_length, taken)

    base_month = datetime(2020, 1, 1, tzinfo=timezone.utc)
    windows = []
    for w in range(config.windows):
        rotation = w // config.rotation_period
        wid = f"sim-{w:02d}"
        half = config.samples_per_window // 2
        classes = [CLASS_FAKE] * half + [CLASS_REAL] * (config.samples_per_window - half)
        rng.shuffle(classes)

        records, labels = [], {}
        start = base_month + timedelta(days=31 * w)
        for i, cls in enumerate(classes):
            toks = []
            for _ in range(config.doc_tokens):
                novel = rng.random() < config.novel_fraction
                if novel:
                    specific = rng.random() < config.novel_specific_rate
                    pool = novel_specific[(cls, rotation)] if specific else novel_shared[rotation]
                else:
                    specific = rng.random() < config.persistent_specific_rate
                    pool = pools[(cls, "persistent")] if specific else shared_persistent
                toks.append(pool[rng.integers(0, len(pool))])
            if cls == CLASS_FAKE:
                likes = int(rng.lognormal(1.2, 1.0))
                shares = int(rng.lognormal(1.0, 1.2))
                retweets = int(rng.lognormal(0.8, 1.2))
            else:
                likes = int(rng.poisson(5))
                shares = int(rng.poisson(3))
                retweets = int(rng.poisson(2))
            rid = f"{wid}-{i:05d}"
            records.append(
                DocumentRecord(
                    id=rid,
                    timestamp=start + timedelta(seconds=i),
                    text=" ".join(toks),
                    likes=likes,
                    shares=shares,
                    retweets=retweets,
                )
            )
            labels[rid] = cls
        windows.append(DriftWindow(wid, records, labels))
    return windows


# ---------------------------------------------------------------------------
# Nearest-centroid classifiers over embedding (+social, +LF) features
# ---------------------------------------------------------------------------


@dataclass
class ClassifierState:
    kind: str
    embedder: EmbedderDescriptor
    centroids: dict[str, np.ndarray]
    aux_mean: np.ndarray | None  # z-score stats for the non-embedding block
    aux_std: np.ndarray | None
    trained_on: list[str] = field(default_factory=list)


def _aux_features(records: Sequence[DocumentRecord], kind: str) -> np.ndarray | None:
    if kind == KIND_TEXT:
        return None
    rows = []
    for rec in records:
        feats = lexicon_features(rec.text)
        row = [rec.likes, rec.shares, rec.retweets, feats.sentiment]
        if kind == KIND_MULTI:
            row += [feats.swear_count, feats.pronoun_count, feats.adverb_count]
        rows.append(row)
    return np.asarray(rows, dtype=np.float64)


def _features(
    records: Sequence[DocumentRecord],
    kind: str,
    embedder: EmbedderDescriptor,
    aux_mean: np.ndarray | None = None,
    aux_std: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    emb = embed_texts([r.text for r in records], embedder).astype(np.float64)
    aux = _aux_features(records, kind)
    if aux is None:
        return emb, None, None
    if aux_mean is None:
        aux_mean = aux.mean(axis=0)
        aux_std = aux.std(axis=0)
        aux_std = np.where(aux_std == 0.0, 1.0, aux_std)
    z = (aux - aux_mean) / aux_std
    return np.hstack([emb, z]), aux_mean, aux_std


def train_window_classifier(
    records: Sequence[DocumentRecord],
    labels: dict[str, str],
    kind: str,
    embedder: EmbedderDescriptor,
    trained_on: Sequence[str] = (),
) -> ClassifierState:
    """Per-class mean feature vectors; aux blocks are z-scored with
    statistics fitted on this training pool only."""
    if kind not in KINDS:
        raise ValueError(f"unknown classifier kind {kind!r}")
    feats, aux_mean, aux_std = _features(records, kind, embedder)
    y = np.array([labels[r.id] for r in records])
    centroids = {}
    for cls in CLASSES:
        members = feats[y == cls]
        if len(members) == 0:
            raise MissingClassError(f"class {cls!r} absent from training pool")
        centroids[cls] = members.mean(axis=0)
    return ClassifierState(
        kind=kind,
        embedder=embedder,
        centroids=centroids,
        aux_mean=aux_mean,
        aux_std=aux_std,
        trained_on=list(trained_on),
    )


def predict(state: ClassifierState, records: Sequence[DocumentRecord]) -> list[str]:
    """Nearest centroid under Euclidean distance; ties go to fake."""
    feats, _, _ = _features(records, state.kind, state.embedder, state.aux_mean, state.aux_std)
    d_fake = np.linalg.norm(feats - state.centroids[CLASS_FAKE], axis=1)
    d_real = np.linalg.norm(feats - state.centroids[CLASS_REAL], axis=1)
    return [CLASS_FAKE if df <= dr else CLASS_REAL for df, dr in zip(d_fake, d_real)]


def accuracy(state: ClassifierState, records: Sequence[DocumentRecord], labels: dict) -> float:
    preds = predict(state, records)
    hits = sum(1 for rec, pred in zip(records, preds) if labels[rec.id] == pred)
    return hits / len(records)


# ---------------------------------------------------------------------------
# Update schemes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UpdateScheme:
    kind: str  # static | slow | fast | ceiling
    refresh_every: int = 1
    memory: int | None = 1  # windows of training data; None = all seen
    warm_start: bool = True
    init_windows: int = 3  # static: train once on this many leading windows

    def __post_init__(self):
        if self.refresh_every < 1 or (self.memory is not None and self.memory < 1):
            raise ValueError("refresh_every and memory must be >= 1")

    @classmethod
    def static(cls, init_windows: int = 3) -> "UpdateScheme":
        return cls(kind="static", refresh_every=1, memory=None, warm_start=False,
                   init_windows=init_windows)

    @classmethod
    def slow(cls) -> "UpdateScheme":
        return cls(kind="slow", refresh_every=2, memory=2)

    @classmethod
    def fast(cls) -> "UpdateScheme":
        return cls(kind="fast", refresh_every=1, memory=1)

    @classmethod
    def ceiling(cls) -> "UpdateScheme":
        return cls(kind="ceiling", refresh_every=1, memory=None)


@dataclass
class EvalReport:
    scheme: str
    classifier_kind: str
    window_ids: list[str]
    accuracies: list[float]
    eval_counts: list[int]
    seed: int
    config_hash: str

    def to_rows(self) -> list[dict]:
        return [
            {
                "scheme": self.scheme,
                "window_index": i,
                "window_id": wid,
                "accuracy": acc,
                "n_eval": n,
                "seed": self.seed,
                "config_hash": self.config_hash,
            }
            for i, (wid, acc, n) in enumerate(
                zip(self.window_ids, self.accuracies, self.eval_counts)
            )
        ]

    def mean_accuracy(self, start: int = 0, end: int | None = None) -> float:
        return float(np.mean(self.accuracies[start:end]))


def _split_window(win: DriftWindow, seed: int) -> tuple[list[DocumentRecord], list[DocumentRecord]]:
    rng = np.random.default_rng(mix(seed, f"split-{win.window_id}") & (2**63 - 1))
    perm = rng.permutation(len(win.records))
    half = len(win.records) // 2
    train = [win.records[i] for i in perm[:half]]
    held = [win.records[i] for i in perm[half:]]
    return train, held


def apply_scheme(
    stream: Sequence[DriftWindow],
    scheme: UpdateScheme,
    kind: str = KIND_TEXT,
    seed: int = 0,
    embedder: EmbedderDescriptor | None = None,
    config_hash: str = "",
) -> EvalReport:
    """Replay the stream under one update policy and report per-window
    accuracy on each window's held-out half.

    Static trains once on the leading windows. Slow/fast retrain on the
    trailing ``memory`` windows every ``refresh_every`` windows, deriving
    the embedder from the prior window when warm-starting. Ceiling
    retrains every window on everything seen so far.
    """
    if len(stream) < 2:
        raise ValueError("need at least two windows")
    base = embedder or EmbedderDescriptor(seed=mix(seed, "embedder"))
    splits = {w.window_id: _split_window(w, seed) for w in stream}
    labels: dict[str, str] = {}
    for w in stream:
        labels.update(w.labels)

    def pool(indices: Sequence[int]) -> tuple[list[DocumentRecord], list[str]]:
        recs: list[DocumentRecord] = []
        ids = []
        for i in indices:
            recs.extend(splits[stream[i].window_id][0])
            ids.append(stream[i].window_id)
        return recs, ids

    desc = base
    lineage: dict[str, EmbedderDescriptor] = {}

    if scheme.kind == "static":
        init = min(scheme.init_windows, len(stream))
        recs, ids = pool(range(init))
        model = train_window_classifier(recs, labels, kind, desc, trained_on=ids)
        models = [model] * len(stream)
    else:
        memory = scheme.memory
        init = min(memory if memory is not None else 1, len(stream))
        recs, ids = pool(range(init))
        model = train_window_classifier(recs, labels, kind, desc, trained_on=ids)
        models = []
        for w in range(len(stream)):
            if w >= init:
                due = (w - init) % scheme.refresh_every == 0
                if due:
                    lo = 0 if memory is None else max(0, w - memory)
                    if scheme.warm_start:
                        desc = derive_window_embedder(
                            desc, stream[w - 1].window_id, lineage
                        )
                    recs, ids = pool(range(lo, w))
                    model = train_window_classifier(recs, labels, kind, desc, trained_on=ids)
            models.append(model)

    accuracies, counts, wids = [], [], []
    for w, win in enumerate(stream):
        held = splits[win.window_id][1]
        accuracies.append(accuracy(models[w], held, labels))
        counts.append(len(held))
        wids.append(win.window_id)
    return EvalReport(
        scheme=scheme.kind,
        classifier_kind=kind,
        window_ids=wids,
        accuracies=accuracies,
        eval_counts=counts,
        seed=seed,
        config_hash=config_hash,
    )


# ---------------------------------------------------------------------------
# Cross-corpus protocol
# ---------------------------------------------------------------------------


@dataclass
class Corpus:
    name: str
    train_records: list[DocumentRecord]
    train_labels: dict[str, str]
    test_records: list[DocumentRecord]
    test_labels: dict[str, str]


@dataclass
class CrossCorpusResult:
    names: list[str]
    matrix: np.ndarray  # [i, j] = accuracy of classifier_i on test_j
    same: dict[str, float]
    cross: dict[str, float | None]
    similar: dict[str, float | None]

    def to_csv_rows(self) -> list[dict]:
        rows = []
        for i, a in enumerate(self.names):
            for j, b in enumerate(self.names):
                rows.append({"train": a, "test": b, "accuracy": float(self.matrix[i, j])})
        return rows


def cross_corpus_eval(
    corpora: Sequence[Corpus],
    similarity_groups: dict[str, list[str]] | None = None,
    kind: str = KIND_TEXT,
    seed: int = 0,
) -> CrossCorpusResult:
    """Train per corpus, test on every corpus; summarize same-, cross-,
    and (when grouped) similar-dataset accuracy."""
    names = [c.name for c in corpora]
    usable = []
    for c in corpora:
        if not c.train_records or not c.test_records:
            continue  # skipped with a warning by the CLI
        usable.append(c)
    names = [c.name for c in usable]
    matrix = np.zeros((len(usable), len(usable)))
    for i, ci in enumerate(usable):
        desc = EmbedderDescriptor(seed=mix(seed, f"corpus-{ci.name}"))
        model = train_window_classifier(ci.train_records, ci.train_labels, kind, desc,
                                        trained_on=[ci.name])
        for j, cj in enumerate(usable):
            matrix[i, j] = accuracy(model, cj.test_records, cj.test_labels)

    same = {name: float(matrix[i, i]) for i, name in enumerate(names)}
    cross: dict[str, float | None] = {}
    similar: dict[str, float | None] = {}
    for i, name in enumerate(names):
        others = [matrix[i, j] for j in range(len(names)) if j != i]
        cross[name] = float(np.mean(others)) if others else None
        group = (similarity_groups or {}).get(name)
        if group:
            idx = [names.index(g) for g in group if g in names and g != name]
            similar[name] = float(np.mean([matrix[i, j] for j in idx])) if idx else None
        else:
            similar[name] = None
    return CrossCorpusResult(names=names, matrix=matrix, same=same, cross=cross, similar=similar)


def make_synthetic_corpus(
    name: str, seed: int, n_train: int = 1000, n_test: int = 500
) -> Corpus:
    """Stationary corpus with its own class-signal vocabulary; different
    seeds give (w.h.p.) disjoint vocabularies, mirroring unrelated
    fake-news datasets."""
    config = DriftStreamConfig(
        windows=2,
        samples_per_window=max(n_train, n_test) * 2,
        novel_fraction=0.0,
        persistent_specific_pool=30,
        persistent_shared_pool=60,
        persistent_specific_rate=0.5,
        seed=seed,
    )
    stream = generate_drift_stream(config)
    train = stream[0].records[:n_train]
    test = stream[1].records[:n_test]
    return Corpus(
        name=name,
        train_records=train,
        train_labels={r.id: stream[0].labels[r.id] for r in train},
        test_records=test,
        test_labels={r.id: stream[1].labels[r.id] for r in test},
    )
