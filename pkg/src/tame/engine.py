"""Lifelong learning engine.

Pretraining freezes one expert per initialization task and caches that
task's feature statistics in the expert's own feature space. Each lifelong
step then (1) picks an expert, by task similarity or uniformly at random
depending on the mode, (2) stores the task under that expert in the replay
buffer and trains the shared dense layer on current plus replayed rows,
optionally with an attention context over stored task features, and
(3) re-evaluates every task seen so far.

Randomness streams are keyed by structural position (expert index,
sequence, step, epoch), never by mode, so modes that perform the same work
consume identical randomness; the baselines' random expert assignment draws
from its own dedicated stream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data.task import Sequence, Task
from .errors import InputError, TameError
from .metrics import TaskRecord, auroc
from .nn import (
    ConvNetConfig,
    ConvNetParams,
    SdlConfig,
    SdlParams,
    SharedBottomParams,
    add_head,
    cnn_features,
    content_hash,
    freeze,
    head_probs,
    init_convnet,
    init_sdl,
    matched_trunk_config,
    sdl_forward,
    train_cnn,
    train_sdl,
    train_task_head,
)
from .replay import ReplayBuffer, ReplayEntry, attention_context, attention_weights
from .rng import rng_stream
from .similarity import FeatureStats, Metric, feature_stats, select_expert

log = logging.getLogger(__name__)


class Mode(str, Enum):
    TAME = "TAME"
    AE_TAME = "AE-TAME"
    BASELINE = "Baseline"
    AE_BASELINE = "AE-Baseline"
    SHARED_BOTTOM = "SharedBottom"

    @property
    def uses_attention(self) -> bool:
        return self in (Mode.AE_TAME, Mode.AE_BASELINE)

    @property
    def random_assignment(self) -> bool:
        return self in (Mode.BASELINE, Mode.AE_BASELINE)


@dataclass
class EngineConfig:
    mode: Mode = Mode.TAME
    metric: Metric = Metric.FID
    pretrain_epochs: int = 5
    lifelong_epochs: int = 3
    batch_size: int = 32
    learning_rate: float = 0.001
    buffer_capacity: int = 1000
    master_seed: int = 0
    image_size: int = 32
    feature_dim: int = 128
    channels: tuple[int, int, int] = (16, 32, 64)
    cnn_hidden: int = 136
    sdl_hidden: tuple[int, int, int, int] = (200, 192, 128, 64)

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)
        self.metric = Metric(self.metric)
        for name in ("pretrain_epochs", "lifelong_epochs", "batch_size", "image_size", "feature_dim"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive, got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise InputError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.buffer_capacity < 0:
            raise InputError(f"buffer_capacity must be >= 0, got {self.buffer_capacity}")

    def expert_config(self) -> ConvNetConfig:
        return ConvNetConfig(
            image_size=self.image_size,
            channels=self.channels,
            hidden=self.cnn_hidden,
            feature_dim=self.feature_dim,
        )

    def sdl_config(self) -> SdlConfig:
        input_dim = 3 * self.image_size * self.image_size + 2 * self.feature_dim
        return SdlConfig(input_dim=input_dim, hidden=self.sdl_hidden)


@dataclass
class ExpertPool:
    experts: list[ConvNetParams]
    sdl: SdlParams
    init_stats: list[FeatureStats]
    expert_hashes: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.experts)


def clone_sdl(sdl: SdlParams) -> SdlParams:
    return SdlParams(weights=[w.copy() for w in sdl.weights], biases=[b.copy() for b in sdl.biases])


def pretrain(init_tasks: list[Task], config: EngineConfig) -> ExpertPool:
    """Train one expert per initialization task, freeze it, and cache the
    statistics of its own task's training features."""
    if not init_tasks:
        raise InputError("pretraining needs at least one initialization task")
    experts: list[ConvNetParams] = []
    stats: list[FeatureStats] = []
    cfg = config.expert_config()
    for i, task in enumerate(init_tasks):
        rng = rng_stream(config.master_seed, "pretrain", i)
        params = init_convnet(cfg, rng)
        losses = train_cnn(
            params,
            task.train_images(),
            task.train_labels(),
            epochs=config.pretrain_epochs,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            rng=rng,
        )
        freeze(params)
        stats.append(feature_stats(cnn_features(params, task.train_images())))
        log.info("pretrained expert %d on %s: loss %.4f -> %.4f", i, task.task_id, losses[0], losses[-1])
        experts.append(params)
    sdl = init_sdl(config.sdl_config(), rng_stream(config.master_seed, "sdl-init"))
    return ExpertPool(
        experts=experts,
        sdl=sdl,
        init_stats=stats,
        expert_hashes=[content_hash(e) for e in experts],
    )


def assemble_rows(images: np.ndarray, features: np.ndarray, context: np.ndarray) -> np.ndarray:
    """One training row per sample: flattened image, its feature embedding,
    and the step's shared context vector."""
    flat = images.reshape(images.shape[0], -1)
    ctx = np.broadcast_to(context, (images.shape[0], context.shape[0]))
    return np.concatenate([flat, features, ctx], axis=1)


@dataclass
class StepOutcome:
    chosen_expert: int
    scores: list[float]
    context: np.ndarray
    epoch_losses: list[float]
    row_counts: dict[str, int]


def lifelong_step(
    sdl: SdlParams,
    experts: list[ConvNetParams],
    init_stats: list[FeatureStats],
    buffer: ReplayBuffer,
    task: Task,
    config: EngineConfig,
    *,
    train_rng: np.random.Generator,
    assign_rng: np.random.Generator | None = None,
) -> StepOutcome:
    """One lifelong task: expert choice, buffer update, SDL training."""
    if task.n == 0:
        raise InputError("lifelong step received an empty task")
    if config.mode is Mode.SHARED_BOTTOM:
        raise InputError("the shared-bottom mode runs through run_shared_bottom")
    if config.mode.random_assignment:
        if assign_rng is None:
            raise InputError(f"{config.mode.value} mode needs the dedicated assignment stream")
        chosen = int(assign_rng.integers(0, len(experts)))
        scores: list[float] = []
    else:
        chosen, scores = select_expert(task.train_images(), experts, init_stats, config.metric)

    train_images = task.train_images()
    features = cnn_features(experts[chosen], train_images)
    entry = ReplayEntry(
        task_id=task.task_id,
        images=train_images,
        labels=task.train_labels(),
        features=features,
    )
    stored = buffer.store_entry(chosen, entry)
    past = [e for e in buffer.retrieve(chosen) if e is not stored]

    context = np.zeros(config.feature_dim)
    if config.mode.uses_attention and past:
        keys = [e.mean_features() for e in past]
        alpha = attention_weights(features.mean(axis=0), keys, d_k=config.feature_dim)
        context = attention_context(alpha, keys)

    rows = [assemble_rows(train_images, features, context)]
    labels = [task.train_labels().astype(np.float64)]
    replay_count = 0
    for e in past:
        rows.append(assemble_rows(e.images, e.features, context))
        labels.append(e.labels.astype(np.float64))
        replay_count += e.n
    all_rows = rows[0] if len(rows) == 1 else np.concatenate(rows, axis=0)
    all_labels = labels[0] if len(labels) == 1 else np.concatenate(labels)

    epoch_losses = train_sdl(
        sdl,
        all_rows,
        all_labels,
        epochs=config.lifelong_epochs,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        rng=train_rng,
    )
    return StepOutcome(
        chosen_expert=chosen,
        scores=scores,
        context=context,
        epoch_losses=epoch_losses,
        row_counts={"current": int(train_images.shape[0]), "replay": replay_count},
    )


def evaluate_task(
    sdl: SdlParams,
    expert: ConvNetParams,
    task: Task,
    context: np.ndarray,
    eval_features: np.ndarray | None = None,
) -> tuple[float, float]:
    """(accuracy, AUROC) on the task's held-out split, using the expert that
    was assigned when the task was learned and the context vector computed
    at that time."""
    feats = eval_features if eval_features is not None else cnn_features(expert, task.eval_images())
    rows = assemble_rows(task.eval_images(), feats, context)
    probs = sdl_forward(sdl, rows)
    labels = task.eval_labels()
    accuracy = float(np.mean((probs > 0.5).astype(np.uint8) == labels))
    return accuracy, auroc(probs, labels)


def run_sequence(pool: ExpertPool, sequence: Sequence, config: EngineConfig) -> list[TaskRecord]:
    """Run the lifelong phase over one task sequence. The pool is not
    mutated: training happens on a copy of its shared dense layer, and the
    frozen experts are hash-checked afterwards."""
    sdl = clone_sdl(pool.sdl)
    buffer = ReplayBuffer(config.buffer_capacity)
    assign_rng = rng_stream(config.master_seed, "assign", sequence.sequence_id)
    seen: list[tuple[Task, int, np.ndarray]] = []
    feature_cache: dict[tuple[str, int], np.ndarray] = {}
    records: list[TaskRecord] = []
    for step, task in enumerate(sequence.tasks, start=1):
        outcome = lifelong_step(
            sdl,
            pool.experts,
            pool.init_stats,
            buffer,
            task,
            config,
            train_rng=rng_stream(config.master_seed, "step-train", sequence.sequence_id, step),
            assign_rng=assign_rng if config.mode.random_assignment else None,
        )
        seen.append((task, outcome.chosen_expert, outcome.context))
        accuracies: dict[str, float] = {}
        aurocs: dict[str, float] = {}
        for past_task, expert_idx, context in seen:
            key = (past_task.task_id, expert_idx)
            if key not in feature_cache:
                feature_cache[key] = cnn_features(pool.experts[expert_idx], past_task.eval_images())
            acc, roc = evaluate_task(sdl, pool.experts[expert_idx], past_task, context, feature_cache[key])
            accuracies[past_task.task_id] = acc
            aurocs[past_task.task_id] = roc
        records.append(
            TaskRecord(
                sequence_id=sequence.sequence_id,
                step=step,
                task_id=task.task_id,
                mode=config.mode.value,
                metric=config.metric.value,
                chosen_expert=outcome.chosen_expert,
                scores=outcome.scores,
                row_counts=outcome.row_counts,
                epoch_losses=outcome.epoch_losses,
                eval_accuracies=accuracies,
                eval_aurocs=aurocs,
                auroc=aurocs[task.task_id],
            )
        )
    after = [content_hash(e) for e in pool.experts]
    if after != pool.expert_hashes:
        raise TameError("frozen expert parameters changed during the lifelong phase")
    return records


def run_shared_bottom(sequence: Sequence, init_tasks: list[Task], config: EngineConfig) -> list[TaskRecord]:
    """Shared-bottom comparison: a single trainable trunk, parameter-matched
    to the full multi-expert system, with one fresh binary head per task.
    The trunk sees the same initialization tasks first, then keeps training
    on every lifelong task (so its features drift where the experts' can't).
    """
    seed = config.master_seed
    trunk_cfg = matched_trunk_config(config.expert_config(), config.sdl_config(), n_experts=len(init_tasks))
    trunk = init_convnet(trunk_cfg, rng_stream(seed, "shared-bottom-init"))
    for i, task in enumerate(init_tasks):
        train_cnn(
            trunk,
            task.train_images(),
            task.train_labels(),
            epochs=config.pretrain_epochs,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            rng=rng_stream(seed, "sb-pretrain", i),
        )
    sb = SharedBottomParams(trunk=trunk)
    records: list[TaskRecord] = []
    seen: list[Task] = []
    for step, task in enumerate(sequence.tasks, start=1):
        head = add_head(sb, rng_stream(seed, "sb-head", sequence.sequence_id, step))
        epoch_losses = train_task_head(
            sb,
            head,
            task.train_images(),
            task.train_labels(),
            epochs=config.lifelong_epochs,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            rng=rng_stream(seed, "step-train", sequence.sequence_id, step),
        )
        seen.append(task)
        accuracies: dict[str, float] = {}
        aurocs: dict[str, float] = {}
        for j, past_task in enumerate(seen):
            probs = head_probs(sb, j, past_task.eval_images())
            labels = past_task.eval_labels()
            accuracies[past_task.task_id] = float(np.mean((probs > 0.5).astype(np.uint8) == labels))
            aurocs[past_task.task_id] = auroc(probs, labels)
        records.append(
            TaskRecord(
                sequence_id=sequence.sequence_id,
                step=step,
                task_id=task.task_id,
                mode=Mode.SHARED_BOTTOM.value,
                metric="none",
                chosen_expert=-1,
                scores=[],
                row_counts={"current": int(task.train_idx.shape[0]), "replay": 0},
                epoch_losses=epoch_losses,
                eval_accuracies=accuracies,
                eval_aurocs=aurocs,
                auroc=aurocs[task.task_id],
            )
        )
    return records
