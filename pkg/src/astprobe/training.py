"""Probe training: shuffled mini-batches, Adam, LR decay, early stopping.

Schedule: after every epoch the validation loss is compared against the
best seen so far (strict less-than). On improvement the parameters are
snapshotted; otherwise the learning rate is multiplied by ``lr_decay``
and a no-improvement counter grows. Training stops once that counter
exceeds ``patience``, or at ``max_epochs``. The returned parameters are
those of the best validation epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adam import Adam
from .errors import EmptyDataset
from .losses import LossBreakdown, ProbeGrads, loss_and_grad
from .probe import ProbeParams, init_probe
from .tuples import TupleDCU


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    lr_decay: float = 0.1
    max_epochs: int = 20
    patience: int = 5
    lam: float = 5.0
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if min(self.lr, self.lr_decay, self.lam, self.batch_size) <= 0:
            raise ValueError("lr, lr_decay, lam, and batch_size must be positive")
        if self.max_epochs < 0 or self.patience < 0 or self.seed < 0:
            raise ValueError("max_epochs, patience, and seed must be >= 0")
        # max_epochs == 0 means "return the init unchanged", patience moot
        if self.max_epochs > 0 and self.patience > self.max_epochs:
            raise ValueError("patience must not exceed max_epochs")


@dataclass(frozen=True)
class Sample:
    """One training sequence: word-level hidden states plus gold tuple."""

    sample_id: str
    hidden: np.ndarray  # (n+1, m1) float32
    gold: TupleDCU
    tokens: tuple[str, ...] = ()


@dataclass
class EpochLog:
    epoch: int
    lr: float
    train: dict
    validation: dict
    improved: bool

    def as_record(self) -> dict:
        return {
            "epoch": self.epoch,
            "lr": self.lr,
            "train": self.train,
            "validation": self.validation,
            "improved": self.improved,
        }


@dataclass
class TrainResult:
    params: ProbeParams
    log: list[EpochLog] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = float("inf")

    def log_records(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "epochs": [entry.as_record() for entry in self.log],
        }


def _mean_breakdown(breakdowns: list[LossBreakdown]) -> dict:
    n = len(breakdowns)
    record = {
        "distance": sum(b.distance for b in breakdowns) / n,
        "c_label": sum(b.c_label for b in breakdowns) / n,
        "u_label": sum(b.u_label for b in breakdowns) / n,
        "orthogonality": sum(b.orthogonality for b in breakdowns) / n,
    }
    lam = breakdowns[0].lam
    record["total"] = (
        record["distance"]
        + record["c_label"]
        + record["u_label"]
        + lam * record["orthogonality"]
    )
    return record


def evaluate_loss(params: ProbeParams, samples: list[Sample], lam: float) -> dict:
    """Mean per-term loss over a split."""
    if not samples:
        raise EmptyDataset("cannot evaluate on an empty split")
    breakdowns = [
        loss_and_grad(params, s.hidden, s.gold, lam)[0] for s in samples
    ]
    return _mean_breakdown(breakdowns)


def train(
    train_samples: list[Sample],
    val_samples: list[Sample],
    config: TrainConfig,
    m1: int | None = None,
    n_c_labels: int | None = None,
    n_u_labels: int | None = None,
    m2: int = 128,
    init: ProbeParams | None = None,
) -> TrainResult:
    """Fit a probe on the training split, early-stopping on validation loss.

    Pass either ready-made ``init`` params or the dimensions to seed them.
    """
    if not train_samples or not val_samples:
        raise EmptyDataset("train and validation splits must both be nonempty")

    if init is None:
        if m1 is None:
            m1 = train_samples[0].hidden.shape[1]
        if n_c_labels is None or n_u_labels is None:
            raise ValueError("need n_c_labels and n_u_labels to initialize")
        init = init_probe(m1, m2, n_c_labels, n_u_labels, seed=config.seed)

    params = init.copy()
    result = TrainResult(params=init.copy())
    result.best_val_loss = float("inf")
    optimizer = Adam(lr=config.lr)
    rng = np.random.default_rng(config.seed)
    lr = config.lr
    stale_epochs = 0

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_samples))
        epoch_breakdowns: list[LossBreakdown] = []
        for start in range(0, len(order), config.batch_size):
            batch = [train_samples[i] for i in order[start : start + config.batch_size]]
            total_grads: ProbeGrads | None = None
            for sample in batch:
                breakdown, grads = loss_and_grad(
                    params, sample.hidden, sample.gold, config.lam
                )
                epoch_breakdowns.append(breakdown)
                if total_grads is None:
                    total_grads = grads
                else:
                    total_grads.add_(grads)
            assert total_grads is not None
            mean_grads = total_grads.scaled(1.0 / len(batch))
            optimizer.lr = lr
            optimizer.step(
                {"B": params.B, "C": params.C, "U": params.U},
                {"B": mean_grads.B, "C": mean_grads.C, "U": mean_grads.U},
            )

        val = evaluate_loss(params, val_samples, config.lam)
        improved = val["total"] < result.best_val_loss
        if improved:
            result.best_val_loss = val["total"]
            result.best_epoch = epoch
            result.params = params.copy()
            stale_epochs = 0
        else:
            lr *= config.lr_decay
            stale_epochs += 1
        result.log.append(
            EpochLog(
                epoch=epoch,
                lr=lr,
                train=_mean_breakdown(epoch_breakdowns),
                validation=val,
                improved=improved,
            )
        )
        if stale_epochs > config.patience:
            break

    return result
