"""Dataset splitting, the training loop, and evaluation metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from .model import CnnModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledImages:
    """A batch-ready image set: (N, C, H, W) tensor plus integer labels."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.images.ndim != 4 or self.images.shape[0] != self.labels.size:
            raise DataError(
                f"images {self.images.shape} do not match {self.labels.size} labels"
            )

    @property
    def size(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class SplitDataset:
    train: LabeledImages
    val: LabeledImages
    test: LabeledImages
    class_names: tuple[str, ...]
    seed: int


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    confusion_matrix: np.ndarray  # rows: true class, columns: predicted


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class TrainingReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_val_accuracy: float = 0.0
    best_epoch: int = -1


def split_7_1_2(
    images: np.ndarray, labels: list[str] | np.ndarray, seed: int
) -> SplitDataset:
    """Stratified 70/10/20 split with a seeded shuffle per class.

    Remainder samples (class size not divisible by 10) go to train, then
    val, then test, keeping each class within one sample of the ratio.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise DataError("cannot split an empty dataset")
    class_names = tuple(sorted(set(labels.tolist())))
    label_idx = np.array([class_names.index(lab) for lab in labels])
    rng = np.random.default_rng(seed)
    parts: dict[str, list[np.ndarray]] = {"train": [], "val": [], "test": []}
    for k, name in enumerate(class_names):
        idx = np.flatnonzero(label_idx == k)
        if idx.size == 0:
            raise DataError(f"class {name!r} has no samples")
        if idx.size < 10:
            log.warning("class %r has only %d samples; split will be skewed", name, idx.size)
        idx = rng.permutation(idx)
        n_train = (7 * idx.size) // 10
        n_val = idx.size // 10
        n_test = (2 * idx.size) // 10
        # at most two leftover samples; hand them out train -> val -> test
        rem = idx.size - n_train - n_val - n_test
        if rem >= 1:
            n_train += 1
        if rem >= 2:
            n_val += 1
        if rem >= 3:
            n_test += 1
        parts["train"].append(idx[:n_train])
        parts["val"].append(idx[n_train : n_train + n_val])
        parts["test"].append(idx[n_train + n_val :])

    def gather(name: str) -> LabeledImages:
        sel = np.concatenate(parts[name])
        return LabeledImages(images[sel], label_idx[sel])

    return SplitDataset(
        train=gather("train"),
        val=gather("val"),
        test=gather("test"),
        class_names=class_names,
        seed=seed,
    )


def evaluate(model: CnnModel, data: LabeledImages, batch_size: int = 64) -> Metrics:
    """Accuracy and a true-by-predicted confusion matrix over a test set."""
    if data.size == 0:
        raise DataError("cannot evaluate on an empty set")
    k = model.num_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    for start in range(0, data.size, batch_size):
        batch = data.images[start : start + batch_size]
        pred = model.predict(batch)
        true = data.labels[start : start + batch_size]
        np.add.at(confusion, (true, pred), 1)
    accuracy = float(np.trace(confusion)) / float(data.size)
    return Metrics(accuracy=accuracy, confusion_matrix=confusion)


def train(
    model: CnnModel,
    splits: SplitDataset,
    epochs: int,
    batch_size: int,
    lr: float,
    momentum: float,
    seed: int,
) -> TrainingReport:
    """Mini-batch SGD; keeps the parameters with the best validation accuracy.

    Fully deterministic for a fixed seed: shuffle order, batch boundaries and
    reduction order never vary between runs.
    """
    if splits.train.size == 0 or splits.val.size == 0:
        raise DataError("train and val splits must be non-empty")
    rng = np.random.default_rng(seed)
    report = TrainingReport()
    best_state = None
    for epoch in range(epochs):
        order = rng.permutation(splits.train.size)
        losses = []
        for start in range(0, order.size, batch_size):
            sel = order[start : start + batch_size]
            loss = model.backward_and_update(
                splits.train.images[sel], splits.train.labels[sel], lr=lr, momentum=momentum
            )
            losses.append(loss)
        val_acc = evaluate(model, splits.val).accuracy
        record = EpochRecord(
            epoch=epoch, train_loss=float(np.mean(losses)), val_accuracy=val_acc
        )
        report.epochs.append(record)
        log.info(
            "epoch %d/%d: train loss %.4f, val accuracy %.4f",
            epoch + 1, epochs, record.train_loss, val_acc,
        )
        if val_acc > report.best_val_accuracy or best_state is None:
            report.best_val_accuracy = val_acc
            report.best_epoch = epoch
            best_state = model.state()
    if best_state is not None:
        model.load_state(best_state)
    return report
