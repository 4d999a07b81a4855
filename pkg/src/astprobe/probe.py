"""The syntactic-subspace probe: parameters, projection, and forward pass.

The probe is a matrix B (m2 x m1) whose rows span the subspace, plus two
prototype sets C and U expressed in subspace coordinates. For a token
sequence with hidden vectors H (rows h_0..h_n):

* subspace coordinates     S[i]      = B h_i
* predicted distance       d_hat[i]  = ||S[i] - S[i+1]||^2   (gap i)
* c logits for gap i       <S[i] - S[i+1], v>  for each v in C
* u logits for token i     <S[i], v>           for each v in U

Gap i sits between tokens i and i+1, matching d[i] and c[i] of the
tuple codec.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError


@dataclass
class ProbeParams:
    """Learnable probe parameters. B rows approximate an orthonormal basis."""

    B: np.ndarray  # (m2, m1)
    C: np.ndarray  # (n_c_labels, m2)
    U: np.ndarray  # (n_u_labels, m2)

    @property
    def m1(self) -> int:
        return self.B.shape[1]

    @property
    def m2(self) -> int:
        return self.B.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.B.size + self.C.size + self.U.size

    def copy(self) -> "ProbeParams":
        return replace(self, B=self.B.copy(), C=self.C.copy(), U=self.U.copy())

    def astype(self, dtype) -> "ProbeParams":
        return replace(
            self,
            B=self.B.astype(dtype),
            C=self.C.astype(dtype),
            U=self.U.astype(dtype),
        )

    def orthonormality_error(self) -> float:
        """||B B^T - I||_F^2 in float64."""
        b = self.B.astype(np.float64)
        gram = b @ b.T
        gram[np.diag_indices_from(gram)] -= 1.0
        return float(np.sum(gram * gram))


@dataclass(frozen=True)
class ProbeOutput:
    d_hat: np.ndarray  # (n,)
    c_logits: np.ndarray  # (n, |C|)
    u_logits: np.ndarray  # (n+1, |U|)


def init_probe(
    m1: int,
    m2: int,
    n_c_labels: int,
    n_u_labels: int,
    seed: int = 0,
    dtype=np.float32,
) -> ProbeParams:
    """Seeded random init. B gets exactly orthonormal rows via QR of a
    Gaussian draw; C and U are Gaussian with std 1/sqrt(m2)."""
    if not 1 <= m2 <= m1:
        raise DimensionError(f"need 1 <= m2 <= m1, got m2={m2}, m1={m1}")
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((m1, m2))
    q, r = np.linalg.qr(gauss)  # q: (m1, m2) with orthonormal columns
    # fix the sign ambiguity of QR so equal seeds give identical params
    q *= np.sign(np.diag(r))
    b = q.T
    scale = 1.0 / np.sqrt(m2)
    c = rng.standard_normal((n_c_labels, m2)) * scale
    u = rng.standard_normal((n_u_labels, m2)) * scale
    return ProbeParams(B=b.astype(dtype), C=c.astype(dtype), U=u.astype(dtype))


def project(params: ProbeParams, hidden: np.ndarray) -> np.ndarray:
    """Subspace coordinates B h_i, one row per token."""
    hidden = np.asarray(hidden)
    if hidden.ndim != 2 or hidden.shape[1] != params.m1:
        raise DimensionError(
            f"expected hidden vectors of shape (*, {params.m1}), got {hidden.shape}"
        )
    return hidden @ params.B.T


def forward(params: ProbeParams, hidden: np.ndarray) -> ProbeOutput:
    """Distances and label logits for one token sequence (n+1 >= 2 rows)."""
    coords = project(params, hidden)
    if coords.shape[0] < 1:
        raise DimensionError("need at least one token")
    diffs = coords[:-1] - coords[1:]
    d_hat = np.sum(diffs * diffs, axis=1)
    c_logits = diffs @ params.C.T
    u_logits = coords @ params.U.T
    return ProbeOutput(d_hat=d_hat, c_logits=c_logits, u_logits=u_logits)
