"""Head losses; each returns (mean batch loss, gradient w.r.t. head output).

Probabilities are clamped to [1e-12, 1-1e-12] so losses and gradients stay
finite at saturated outputs.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-12


def loss_dict(probs: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Multinomial NLL: -log p(target class), averaged over the batch."""
    B = probs.shape[0]
    idx = (np.arange(B), np.asarray(targets, dtype=np.int64))
    p = np.clip(probs[idx], EPS, 1.0 - EPS)
    loss = float(-np.log(p).mean())
    grad = np.zeros_like(probs)
    grad[idx] = -1.0 / (B * p)
    return loss, grad


def loss_charseq(probs: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Sum of per-slot NLL terms over the 23 slots, averaged over the batch."""
    B, S, C = probs.shape
    t = np.asarray(targets, dtype=np.int64)
    bi = np.arange(B)[:, None]
    si = np.arange(S)[None, :]
    p = np.clip(probs[bi, si, t], EPS, 1.0 - EPS)
    loss = float(-np.log(p).sum(axis=1).mean())
    grad = np.zeros_like(probs)
    grad[bi, si, t] = -1.0 / (B * p)
    return loss, grad


def loss_ngram(acts: np.ndarray, targets: np.ndarray,
               weights: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Per-gram binary cross-entropy, optionally inverse-frequency weighted,
    summed over grams and averaged over the batch."""
    B = acts.shape[0]
    a = np.clip(acts, EPS, 1.0 - EPS)
    t = np.asarray(targets, dtype=a.dtype)
    w = np.ones(acts.shape[1], dtype=a.dtype) if weights is None else np.asarray(weights, dtype=a.dtype)
    bce = -(t * np.log(a) + (1.0 - t) * np.log1p(-a))
    loss = float((bce * w).sum(axis=1).mean())
    grad = w * (-(t / a) + (1.0 - t) / (1.0 - a)) / B
    return loss, grad.astype(acts.dtype)


def loss_for_head(head: str):
    return {"dict": loss_dict, "charseq": loss_charseq, "ngram": loss_ngram}[head]
