"""Two-layer graph convolutional Q-network with hand-written gradients.

Layer rule: ``H' = ReLU(A_hat @ H @ W)`` with the symmetric normalisation
``A_hat = D^-1/2 (A + I) D^-1/2`` (degrees count the self-loop). A linear
head maps the last hidden layer to one value per output column.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
import scipy.sparse as sp

CHECKPOINT_FORMAT = "urllc-sched-gcn"
CHECKPOINT_VERSION = 1
PARAM_NAMES = ("w1", "w2", "w_out", "b_out")


@dataclass
class GcnParams:
    w1: np.ndarray  # (L, H)
    w2: np.ndarray  # (H, H)
    w_out: np.ndarray  # (H, K)
    b_out: np.ndarray  # (K,)

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, f.name) for f in fields(self)]

    def copy(self) -> GcnParams:
        return GcnParams(*(a.copy() for a in self.arrays()))

    def map(self, fn) -> GcnParams:
        return GcnParams(*(fn(a) for a in self.arrays()))

    @classmethod
    def zeros_like(cls, other: GcnParams) -> GcnParams:
        return other.map(np.zeros_like)

    @property
    def n_features(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    @property
    def n_out(self) -> int:
        return self.w_out.shape[1]

    @property
    def dtype(self):
        return self.w1.dtype

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def with_flat(self, vec) -> GcnParams:
        out, k = [], 0
        for a in self.arrays():
            out.append(np.asarray(vec[k : k + a.size], dtype=a.dtype).reshape(a.shape))
            k += a.size
        return GcnParams(*out)

    def equals(self, other: GcnParams) -> bool:
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))

    def digest(self) -> str:
        h = hashlib.sha256()
        for a in self.arrays():
            h.update(str(a.shape).encode())
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()


def init_params(n_features: int, hidden: int = 128, n_out: int = 2, rng=None, dtype=np.float64) -> GcnParams:
    """Glorot-uniform weights, zero head bias."""
    rng = np.random.default_rng(rng)

    def glorot(fan_in, fan_out):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=(fan_in, fan_out)).astype(dtype)

    return GcnParams(
        w1=glorot(n_features, hidden),
        w2=glorot(hidden, hidden),
        w_out=glorot(hidden, n_out),
        b_out=np.zeros(n_out, dtype=dtype),
    )


class NormalizedAdjacency:
    """Sparse ``A_hat`` plus its per-node coefficient lists.

    Products use a dense copy once the fill ratio passes ``dense_above``;
    conflict graphs of co-located cells are often nearly complete.
    """

    def __init__(self, matrix: sp.csr_matrix, dense_above: float = 0.25):
        self.matrix = matrix.tocsr()
        self.n = self.matrix.shape[0]
        fill = self.matrix.nnz / max(1, self.n * self.n)
        self.operator = self.matrix.toarray() if fill > dense_above else self.matrix

    def coeffs(self, i: int) -> dict[int, float]:
        row = self.matrix.getrow(i)
        return dict(zip(row.indices.tolist(), row.data.tolist()))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def permuted(self, perm) -> NormalizedAdjacency:
        perm = np.asarray(perm)
        return NormalizedAdjacency(self.matrix[perm][:, perm])


def normalize_adjacency(graph) -> NormalizedAdjacency:
    a = graph.adjacency if hasattr(graph, "adjacency") else np.asarray(graph)
    a = sp.csr_matrix(a, dtype=float) + sp.identity(a.shape[0], format="csr")
    deg = np.asarray(a.sum(axis=1)).ravel()
    inv_sqrt = sp.diags(1.0 / np.sqrt(deg))
    return NormalizedAdjacency(inv_sqrt @ a @ inv_sqrt)


def _as_operator(adj):
    if isinstance(adj, NormalizedAdjacency):
        return adj.operator
    return adj


def propagate(adj, h: np.ndarray) -> np.ndarray:
    """``A_hat @ h`` for ``h`` of shape (N, F) or a batch (B, N, F) sharing one graph."""
    a = _as_operator(adj)
    if h.ndim == 2 or isinstance(a, np.ndarray):
        out = a @ h
    else:
        b, n, f = h.shape
        flat = np.ascontiguousarray(h.transpose(1, 0, 2)).reshape(n, b * f)
        out = (a @ flat).reshape(n, b, f).transpose(1, 0, 2)
    return np.asarray(out, dtype=h.dtype)


def forward(features, adj, params: GcnParams):
    """Q-values of shape (..., N, K) and a cache for :func:`backward`."""
    x = np.asarray(features, dtype=params.dtype)
    assert x.shape[-1] == params.n_features, f"feature width {x.shape[-1]} != {params.n_features}"
    ax = propagate(adj, x)
    z1 = ax @ params.w1
    h1 = np.maximum(z1, 0)
    ah1 = propagate(adj, h1)
    z2 = ah1 @ params.w2
    h2 = np.maximum(z2, 0)
    q = h2 @ params.w_out + params.b_out
    cache = {"adj": adj, "params": params, "ax": ax, "z1": z1, "ah1": ah1, "z2": z2, "h2": h2}
    return q, cache


def _sum_outer(a, b):
    # sum over batch and node axes of a^T b
    return a.reshape(-1, a.shape[-1]).T @ b.reshape(-1, b.shape[-1])


def backward(cache, grad_q) -> GcnParams:
    """Gradient of ``sum(grad_q * q)`` with respect to every parameter."""
    p = cache["params"]
    g = np.asarray(grad_q, dtype=p.dtype)
    if g.shape != cache["h2"].shape[:-1] + (p.n_out,):
        g = g.reshape(cache["h2"].shape[:-1] + (p.n_out,))
    d_wout = _sum_outer(cache["h2"], g)
    d_b = g.reshape(-1, p.n_out).sum(axis=0)
    dz2 = (g @ p.w_out.T) * (cache["z2"] > 0)
    d_w2 = _sum_outer(cache["ah1"], dz2)
    # A_hat is symmetric, so its transpose is itself
    dh1 = propagate(cache["adj"], dz2 @ p.w2.T)
    dz1 = dh1 * (cache["z1"] > 0)
    d_w1 = _sum_outer(cache["ax"], dz1)
    return GcnParams(d_w1, d_w2, d_wout, d_b)


def _rows(adj, nodes) -> np.ndarray:
    a = _as_operator(adj)
    if isinstance(a, np.ndarray):
        return a[nodes]
    return a[nodes].toarray()


def forward_at(features, adj, params: GcnParams, nodes):
    """Q-values at one node per batch element: (B, K) for ``features`` of shape (B, N, L).

    Matches ``forward(features, adj, params)[0][arange(B), nodes]`` while
    only evaluating the second layer at the requested rows.
    """
    x = np.asarray(features, dtype=params.dtype)
    assert x.ndim == 3 and x.shape[-1] == params.n_features
    nodes = np.asarray(nodes)
    ax = propagate(adj, x)
    z1 = ax @ params.w1
    h1 = np.maximum(z1, 0)
    a_sel = _rows(adj, nodes).astype(params.dtype)
    ah1 = np.einsum("bn,bnh->bh", a_sel, h1)
    z2 = ah1 @ params.w2
    h2 = np.maximum(z2, 0)
    q = h2 @ params.w_out + params.b_out
    cache = {"params": params, "ax": ax, "z1": z1, "a_sel": a_sel, "ah1": ah1, "z2": z2, "h2": h2}
    return q, cache


def backward_at(cache, grad_q) -> GcnParams:
    """Gradient of ``sum(grad_q * q)`` for the output of :func:`forward_at`."""
    p = cache["params"]
    g = np.asarray(grad_q, dtype=p.dtype)
    d_wout = cache["h2"].T @ g
    d_b = g.sum(axis=0)
    dz2 = (g @ p.w_out.T) * (cache["z2"] > 0)
    d_w2 = cache["ah1"].T @ dz2
    d_ah1 = dz2 @ p.w2.T
    dz1 = cache["a_sel"][:, :, None] * d_ah1[:, None, :] * (cache["z1"] > 0)
    d_w1 = _sum_outer(cache["ax"], dz1)
    return GcnParams(d_w1, d_w2, d_wout, d_b)


@dataclass
class AdamState:
    m: GcnParams
    v: GcnParams
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: GcnParams, **kw) -> AdamState:
        return cls(GcnParams.zeros_like(params), GcnParams.zeros_like(params), **kw)


def adam_step(params: GcnParams, grads: GcnParams, state: AdamState) -> tuple[GcnParams, AdamState]:
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_p, new_m, new_v = [], [], []
    for p, g, m, v in zip(params.arrays(), grads.arrays(), state.m.arrays(), state.v.arrays()):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        new_p.append((p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype))
        new_m.append(m)
        new_v.append(v)
    nxt = AdamState(GcnParams(*new_m), GcnParams(*new_v), t, state.lr, b1, b2, state.eps)
    return GcnParams(*new_p), nxt


# --- checkpoints -------------------------------------------------------------


def checkpoint_to_dict(params: GcnParams, seed=None, step: int = 0, meta=None) -> dict:
    arrays = {}
    for name, a in zip(PARAM_NAMES, params.arrays()):
        arrays[name] = {
            "shape": list(a.shape),
            "dtype": str(a.dtype),
            # float64 repr round-trips exactly; float32 widens losslessly
            "data": a.astype(np.float64).ravel().tolist(),
        }
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "seed": seed,
        "step": int(step),
        "params": arrays,
        "meta": meta or {},
    }


def checkpoint_from_dict(doc: dict) -> tuple[GcnParams, dict]:
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError("not a recognised GCN checkpoint")
    arrays = []
    for name in PARAM_NAMES:
        entry = doc["params"][name]
        a = np.array(entry["data"], dtype=np.float64).astype(entry["dtype"]).reshape(entry["shape"])
        arrays.append(a)
    info = {k: doc[k] for k in ("seed", "step", "meta")}
    return GcnParams(*arrays), info


def save_checkpoint(path, params, seed=None, step=0, meta=None) -> str:
    text = json.dumps(checkpoint_to_dict(params, seed, step, meta), sort_keys=True)
    Path(path).write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def load_checkpoint(path) -> tuple[GcnParams, dict]:
    return checkpoint_from_dict(json.loads(Path(path).read_text()))
