"""Composite probe loss and its exact analytic gradients.

Total loss for one sequence:

    L = L_d + L_c + L_u + lambda * OR(B)

* L_d: pairwise hinge over gaps. For every unordered pair of gaps with
  different gold distances, ReLU(1 - sign(gold_i - gold_j) *
  (d_hat_i - d_hat_j)), averaged over those pairs. Tied gold pairs are
  excluded (their sign is 0, a constant with no gradient). The hinge
  subgradient at the kink is 0.
* L_c, L_u: softmax cross-entropy of the c / u logits against the gold
  ids, averaged within the sequence.
* OR(B) = ||B B^T - I||_F^2 keeps the rows of B orthonormal.

Each term is a mean (not a sum) so lambda and the learning rate behave
the same regardless of sequence length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSequence, LengthMismatch
from .probe import ProbeParams, project
from .tuples import TupleDCU


@dataclass(frozen=True)
class LossBreakdown:
    distance: float
    c_label: float
    u_label: float
    orthogonality: float
    lam: float

    @property
    def total(self) -> float:
        return self.distance + self.c_label + self.u_label + self.lam * self.orthogonality

    def as_record(self) -> dict:
        return {
            "distance": self.distance,
            "c_label": self.c_label,
            "u_label": self.u_label,
            "orthogonality": self.orthogonality,
            "total": self.total,
        }


@dataclass
class ProbeGrads:
    B: np.ndarray
    C: np.ndarray
    U: np.ndarray

    def scaled(self, factor: float) -> "ProbeGrads":
        return ProbeGrads(self.B * factor, self.C * factor, self.U * factor)

    def add_(self, other: "ProbeGrads") -> None:
        self.B += other.B
        self.C += other.C
        self.U += other.U


def _check_gold(hidden: np.ndarray, gold: TupleDCU) -> int:
    n_tokens = hidden.shape[0]
    if n_tokens < 2:
        raise DegenerateSequence(
            "single-token sequences carry no distances; they contribute only L_u"
        )
    if gold.n_tokens != n_tokens:
        raise LengthMismatch(
            f"gold tuple covers {gold.n_tokens} tokens, hidden states {n_tokens}"
        )
    return n_tokens - 1


def _softmax_ce(logits: np.ndarray, gold_ids: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient w.r.t. the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    denom = exp.sum(axis=1, keepdims=True)
    log_probs = shifted - np.log(denom)
    rows = np.arange(len(gold_ids))
    ce = float(-log_probs[rows, gold_ids].mean())
    grad = exp / denom
    grad[rows, gold_ids] -= 1.0
    grad /= len(gold_ids)
    return ce, grad


def _pair_hinge(d_hat: np.ndarray, gold_d: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean pairwise rank hinge and its gradient w.r.t. d_hat."""
    sign_gold = np.sign(gold_d[:, None] - gold_d[None, :]).astype(d_hat.dtype)
    upper = np.triu(np.ones_like(sign_gold, dtype=bool), k=1)
    valid = upper & (sign_gold != 0)
    n_pairs = int(valid.sum())
    if n_pairs == 0:
        return 0.0, np.zeros_like(d_hat)
    margins = 1.0 - sign_gold * (d_hat[:, None] - d_hat[None, :])
    active = valid & (margins > 0)
    loss = float(margins[active].sum() / n_pairs)
    contrib = np.where(active, sign_gold, 0.0) / n_pairs
    grad = -contrib.sum(axis=1) + contrib.sum(axis=0)
    return loss, grad.astype(d_hat.dtype)


def loss(
    params: ProbeParams, hidden: np.ndarray, gold: TupleDCU, lam: float
) -> LossBreakdown:
    breakdown, _ = loss_and_grad(params, hidden, gold, lam)
    return breakdown


def grad(
    params: ProbeParams, hidden: np.ndarray, gold: TupleDCU, lam: float
) -> ProbeGrads:
    _, grads = loss_and_grad(params, hidden, gold, lam)
    return grads


def loss_and_grad(
    params: ProbeParams, hidden: np.ndarray, gold: TupleDCU, lam: float
) -> tuple[LossBreakdown, ProbeGrads]:
    """One-pass loss and exact gradients w.r.t. B, C, U."""
    hidden = np.asarray(hidden)
    _check_gold(hidden, gold)

    coords = project(params, hidden)  # (n+1, m2)
    diffs = coords[:-1] - coords[1:]  # (n, m2)
    d_hat = np.sum(diffs * diffs, axis=1)
    c_logits = diffs @ params.C.T
    u_logits = coords @ params.U.T

    gold_d = np.asarray(gold.d)
    loss_d, g_dhat = _pair_hinge(d_hat, gold_d)
    loss_c, g_clogits = _softmax_ce(c_logits, np.asarray(gold.c))
    loss_u, g_ulogits = _softmax_ce(u_logits, np.asarray(gold.u))

    b64 = params.B.astype(np.float64)
    residual = b64 @ b64.T - np.eye(params.m2)
    loss_orth = float(np.sum(residual * residual))

    # back through d_hat and the c head into the gap differences
    g_diffs = 2.0 * diffs * g_dhat[:, None] + g_clogits @ params.C
    # scatter gap gradients onto token coordinates, plus the u head
    g_coords = g_ulogits @ params.U
    g_coords[:-1] += g_diffs
    g_coords[1:] -= g_diffs

    g_b = g_coords.T @ hidden
    g_b = g_b + (4.0 * lam) * ((residual @ b64).astype(g_b.dtype))
    g_c = g_clogits.T @ diffs
    g_u = g_ulogits.T @ coords

    breakdown = LossBreakdown(
        distance=loss_d,
        c_label=loss_c,
        u_label=loss_u,
        orthogonality=loss_orth,
        lam=float(lam),
    )
    return breakdown, ProbeGrads(B=g_b, C=g_c, U=g_u)
