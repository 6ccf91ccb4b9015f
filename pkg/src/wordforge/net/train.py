"""SGD training loop with plateau learning-rate decay and incremental
class expansion for the dictionary head."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .losses import loss_for_head
from .network import Network

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    def __init__(self, message: str, train_log: "TrainLog"):
        super().__init__(message)
        self.train_log = train_log


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    lr_decay: float = 0.1
    patience: int = 3  # evaluations without val-loss improvement before decay
    val_fraction: float = 0.1
    seed: int = 0
    new_class_init_scale: float = 1e-2

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("invalid training configuration")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")


def required_batch_size(n_classes: int) -> int:
    """Dictionary training needs batches of at least a fifth of the classes."""
    return math.ceil(n_classes / 5)


def check_batch_size(head: str, n_classes: int, batch_size: int) -> None:
    if head == "dict" and batch_size < required_batch_size(n_classes):
        raise ValueError(
            f"batch size {batch_size} below required minimum "
            f"{required_batch_size(n_classes)} (a fifth of {n_classes} classes)"
        )


@dataclass
class EpochRecord:
    epoch: int
    stage_classes: int
    train_loss: float
    val_loss: float
    val_acc: float
    lr: float
    train_err: float = float("nan")  # kept in memory, not serialized

    def line(self) -> str:
        return (f"{self.epoch}\t{self.stage_classes}\t{self.train_loss:.6f}\t"
                f"{self.val_loss:.6f}\t{self.val_acc:.4f}\t{self.lr:.6g}")


@dataclass
class StageEvent:
    """Train-error measurements around one head expansion."""

    stage_classes: int
    pre_expansion_train_err: float
    post_expansion_train_err: float
    old_class_logits_preserved: bool
    recovery_epochs: int | None = None  # epochs until err < pre-expansion


@dataclass
class TrainLog:
    records: list[EpochRecord] = field(default_factory=list)
    stage_events: list[StageEvent] = field(default_factory=list)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("epoch\tstage-classes\ttrain-loss\tval-loss\tval-acc\tlr\n")
            for r in self.records:
                f.write(r.line() + "\n")


class SGD:
    """Momentum SGD; velocity buffers survive head expansion by copying
    the overlapping leading slice."""

    def __init__(self, params, lr: float, momentum: float = 0.9):
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self._velocity = {id(p): np.zeros_like(p.value) for p in self.params}

    def step(self) -> None:
        for p in self.params:
            v = self._velocity[id(p)]
            if v.shape != p.value.shape:
                nv = np.zeros_like(p.value)
                sl = tuple(slice(0, min(a, b)) for a, b in zip(v.shape, nv.shape))
                nv[sl] = v[sl]
                v = self._velocity[id(p)] = nv
            v *= self.momentum
            v -= self.lr * p.grad
            p.value += v


def _predictions(head: str, out: np.ndarray) -> np.ndarray:
    if head == "dict":
        return out.argmax(axis=1)
    if head == "charseq":
        return out.argmax(axis=2)
    return (out >= 0.5).astype(np.uint8)


def _accuracy(head: str, out: np.ndarray, targets: np.ndarray) -> float:
    pred = _predictions(head, out)
    if head == "dict":
        return float((pred == targets).mean())
    if head == "charseq":
        return float((pred == targets).all(axis=1).mean())
    return float((pred == targets).mean())  # bitwise accuracy


def _batched_eval(net: Network, X: np.ndarray, Y: np.ndarray, loss_fn, batch_size: int,
                  weights=None) -> tuple[float, float]:
    losses, accs, n = [], [], 0
    for start in range(0, len(X), batch_size):
        xb, yb = X[start : start + batch_size], Y[start : start + batch_size]
        out = net.forward(xb, train=False)
        loss, _ = loss_fn(out, yb) if weights is None else loss_fn(out, yb, weights)
        losses.append(loss * len(xb))
        accs.append(_accuracy(net.head, out, yb) * len(xb))
        n += len(xb)
    return sum(losses) / n, sum(accs) / n


def train_error(net: Network, X: np.ndarray, Y: np.ndarray, batch_size: int = 128) -> float:
    """Classification error rate of the current parameters (eval mode)."""
    wrong, n = 0, 0
    for start in range(0, len(X), batch_size):
        xb, yb = X[start : start + batch_size], Y[start : start + batch_size]
        out = net.forward(xb, train=False)
        pred = _predictions(net.head, out)
        if net.head == "charseq":
            wrong += int((~(pred == yb).all(axis=1)).sum())
        elif net.head == "dict":
            wrong += int((pred != yb).sum())
        else:
            wrong += int((pred != yb).any(axis=1).sum())
        n += len(xb)
    return wrong / n


def sgd_train(
    net: Network,
    X: np.ndarray,
    Y: np.ndarray,
    config: TrainConfig,
    gram_weights: np.ndarray | None = None,
    X_val: np.ndarray | None = None,
    Y_val: np.ndarray | None = None,
    train_log: TrainLog | None = None,
    stage_classes: int | None = None,
    optimizer: SGD | None = None,
) -> TrainLog:
    """Train with momentum SGD; learning rate multiplied by ``lr_decay``
    whenever validation loss fails to improve for ``patience`` evaluations.

    A 10% split is held out for validation unless an explicit validation
    set is supplied.  Raises TrainingDiverged on a non-finite loss.
    """
    check_batch_size(net.head, net.n_out, config.batch_size)
    loss_fn = loss_for_head(net.head)
    weights = gram_weights if net.head == "ngram" else None
    rng = np.random.default_rng(config.seed)
    log_ = train_log if train_log is not None else TrainLog()
    stage = stage_classes if stage_classes is not None else net.n_out

    if X_val is None and config.val_fraction > 0 and len(X) >= 2:
        n_val = max(1, int(round(len(X) * config.val_fraction)))
        perm = rng.permutation(len(X))
        val_idx, tr_idx = perm[:n_val], perm[n_val:]
        X_val, Y_val = X[val_idx], Y[val_idx]
        X, Y = X[tr_idx], Y[tr_idx]

    opt = optimizer if optimizer is not None else SGD(net.params(), config.learning_rate, config.momentum)
    best_val = float("inf")
    bad_evals = 0
    start_epoch = log_.records[-1].epoch + 1 if log_.records else 0

    for epoch in range(start_epoch, start_epoch + config.epochs):
        order = rng.permutation(len(X))
        total_loss, seen = 0.0, 0
        for start in range(0, len(X), config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = X[idx], Y[idx]
            try:
                out = net.forward(xb, train=True)
                if weights is None:
                    loss, grad = loss_fn(out, yb)
                else:
                    loss, grad = loss_fn(out, yb, weights)
            except FloatingPointError as e:
                raise TrainingDiverged(f"diverged at epoch {epoch}: {e}", log_) from None
            if not math.isfinite(loss):
                raise TrainingDiverged(f"loss diverged at epoch {epoch}", log_)
            net.zero_grads()
            net.backward(grad)
            opt.step()
            total_loss += loss * len(xb)
            seen += len(xb)
        train_loss = total_loss / max(seen, 1)

        if X_val is not None and len(X_val):
            val_loss, val_acc = _batched_eval(net, X_val, Y_val, loss_fn,
                                              config.batch_size, weights)
        else:
            val_loss, val_acc = float("nan"), float("nan")
        terr = train_error(net, X, Y)
        log_.records.append(EpochRecord(epoch, stage, train_loss, val_loss, val_acc,
                                        opt.lr, train_err=terr))
        log.debug("epoch %d: %s", epoch, log_.records[-1].line())

        if math.isfinite(val_loss):
            if val_loss < best_val - 1e-6:
                best_val = val_loss
                bad_evals = 0
            else:
                bad_evals += 1
                if bad_evals >= config.patience:
                    opt.lr *= config.lr_decay
                    bad_evals = 0
    return log_


def incremental_train(
    net: Network,
    X: np.ndarray,
    classes: np.ndarray,
    schedule: list[int],
    config: TrainConfig,
    epochs_per_stage: int | None = None,
) -> TrainLog:
    """Stage-wise dictionary training with a growing output layer.

    ``schedule`` lists class-count increments summing to the total number
    of classes; the network must start with ``schedule[0]`` outputs.  At
    each boundary the classification layer grows, existing rows are copied
    verbatim, and training resumes on the enlarged class set.
    """
    if net.head != "dict":
        raise ValueError("incremental training applies to the dict head")
    total = int(classes.max()) + 1
    if sum(schedule) != total:
        raise ValueError(f"schedule {schedule} does not sum to {total} classes")
    if net.n_out != schedule[0]:
        raise ValueError(f"network has {net.n_out} outputs, schedule starts at {schedule[0]}")
    stage_epochs = epochs_per_stage if epochs_per_stage is not None else config.epochs
    expand_rng = np.random.default_rng(config.seed + 0x5EED)

    log_ = TrainLog()
    opt = SGD(net.params(), config.learning_rate, config.momentum)
    cum = 0
    prev_X = None
    for i, inc in enumerate(schedule):
        cum += inc
        mask = classes < cum
        Xs, Ys = X[mask], classes[mask]
        cfg = replace(config, epochs=stage_epochs)
        check_batch_size("dict", cum, cfg.batch_size)
        if i > 0:
            pre_err = train_error(net, prev_X[0], prev_X[1])
            old_logits = _head_logits(net, prev_X[0][: min(64, len(prev_X[0]))])
            net.expand_dict_head(inc, init_scale=config.new_class_init_scale, rng=expand_rng)
            new_logits = _head_logits(net, prev_X[0][: min(64, len(prev_X[0]))])
            preserved = bool(np.array_equal(old_logits, new_logits[:, : old_logits.shape[1]]))
            post_err = train_error(net, Xs, Ys)
            event = StageEvent(stage_classes=cum, pre_expansion_train_err=pre_err,
                               post_expansion_train_err=post_err,
                               old_class_logits_preserved=preserved)
            log_.stage_events.append(event)
            n_before = len(log_.records)
            sgd_train(net, Xs, Ys, cfg, train_log=log_, stage_classes=cum, optimizer=opt)
            # recovered once the error is back at (or below) the pre-expansion
            # level; strict "below" is unattainable when stage training hit 0
            for k, rec in enumerate(log_.records[n_before:]):
                if rec.train_err <= pre_err:
                    event.recovery_epochs = k + 1
                    break
        else:
            sgd_train(net, Xs, Ys, cfg, train_log=log_, stage_classes=cum, optimizer=opt)
        prev_X = (Xs, Ys)
    return log_


def _head_logits(net: Network, X: np.ndarray) -> np.ndarray:
    """Pre-softmax activations of the classification layer (eval mode)."""
    x = np.asarray(X, dtype=net.dtype)
    for layer in net.layers:
        if layer is net._head_dense:
            return layer.forward(x, train=False)
        x = layer.forward(x, train=False)
    raise RuntimeError("head layer not reached")
