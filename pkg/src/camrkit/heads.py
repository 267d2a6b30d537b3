"""Trainable classifier heads in plain numpy with hand-written gradients.

``LinearTagHead`` scores every word with ``[h;1] W``; ``BiaffineHead`` scores
every ordered pair with ``[a;1] W_k [b;1]^T`` per class ``k``. Either head
may own a one-layer bidirectional LSTM that contextualizes the input vectors
first. Losses are (optionally class-weighted) mean cross-entropies over the
``N`` words or the ``N*N`` ordered pairs of one sentence.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

CHECKPOINT_VERSION = 1


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def log_softmax(s: np.ndarray) -> np.ndarray:
    m = s.max(axis=-1, keepdims=True)
    z = s - m
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class BiLSTM:
    """Single-layer bidirectional LSTM; gates packed as [input, forget, output, cell]."""

    def __init__(self, d_in: int, hidden: int, rng: Optional[np.random.Generator] = None):
        self.d_in = d_in
        self.hidden = hidden
        rng = rng if rng is not None else np.random.default_rng(0)
        scale = 1.0 / np.sqrt(d_in + hidden)
        self.params = {
            "lstm_fwd": rng.normal(0.0, scale, (4 * hidden, d_in + hidden + 1)),
            "lstm_bwd": rng.normal(0.0, scale, (4 * hidden, d_in + hidden + 1)),
        }
        for name in self.params:
            # forget-gate bias starts at 1
            self.params[name][hidden:2 * hidden, -1] = 1.0

    @property
    def d_out(self) -> int:
        return 2 * self.hidden

    def _run(self, W, X):
        H = self.hidden
        n = len(X)
        h = np.zeros(H)
        c = np.zeros(H)
        out = np.zeros((n, H))
        cache = []
        for t in range(n):
            xh = np.concatenate([X[t], h, [1.0]])
            z = W @ xh
            i, f, o = _sigmoid(z[:H]), _sigmoid(z[H:2 * H]), _sigmoid(z[2 * H:3 * H])
            g = np.tanh(z[3 * H:])
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = o * tc
            out[t] = h
            cache.append((xh, i, f, o, g, c_prev, tc))
        return out, cache

    def _back(self, W, dout, cache):
        H = self.hidden
        dW = np.zeros_like(W)
        dX = np.zeros((len(cache), self.d_in))
        dh_next = np.zeros(H)
        dc_next = np.zeros(H)
        for t in reversed(range(len(cache))):
            xh, i, f, o, g, c_prev, tc = cache[t]
            dh = dout[t] + dh_next
            do = dh * tc
            dc = dh * o * (1.0 - tc ** 2) + dc_next
            di, dg, df = dc * g, dc * i, dc * c_prev
            dc_next = dc * f
            dz = np.concatenate([di * i * (1 - i), df * f * (1 - f), do * o * (1 - o), dg * (1 - g ** 2)])
            dW += np.outer(dz, xh)
            dxh = W.T @ dz
            dX[t] = dxh[:self.d_in]
            dh_next = dxh[self.d_in:self.d_in + H]
        return dW, dX

    def forward(self, X: np.ndarray):
        fwd, cf = self._run(self.params["lstm_fwd"], X)
        bwd, cb = self._run(self.params["lstm_bwd"], X[::-1])
        return np.concatenate([fwd, bwd[::-1]], axis=1), (cf, cb)

    def backward(self, dH: np.ndarray, cache) -> Dict[str, np.ndarray]:
        cf, cb = cache
        H = self.hidden
        dWf, _ = self._back(self.params["lstm_fwd"], dH[:, :H], cf)
        dWb, _ = self._back(self.params["lstm_bwd"], dH[::-1, H:], cb)
        return {"lstm_fwd": dWf, "lstm_bwd": dWb}


class _Head:
    kind = ""

    def __init__(self, d: int, c: int, context_hidden: Optional[int], seed: int):
        self.d_in = d
        self.c = c
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.context = BiLSTM(d, context_hidden, rng) if context_hidden else None
        self.d = self.context.d_out if self.context else d
        self.params: Dict[str, np.ndarray] = {}
        self._rng = rng

    def all_params(self) -> Dict[str, np.ndarray]:
        out = dict(self.params)
        if self.context is not None:
            out.update(self.context.params)
        return out

    def set_param(self, name: str, value: np.ndarray) -> None:
        if name in self.params:
            self.params[name] = value
        else:
            self.context.params[name] = value

    def encode(self, X: np.ndarray):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d_in:
            raise ValueError(f"expected inputs of shape (n, {self.d_in}), got {X.shape}")
        if self.context is None or len(X) == 0:
            return X, None
        return self.context.forward(X)

    def _context_grads(self, dH, cache) -> Dict[str, np.ndarray]:
        if self.context is None or cache is None:
            if self.context is None:
                return {}
            return {k: np.zeros_like(v) for k, v in self.context.params.items()}
        return self.context.backward(dH, cache)

    # -- persistence ----------------------------------------------------------
    def to_dict(self, config: Optional[dict] = None) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "kind": self.kind,
            "d_in": self.d_in,
            "classes": self.c,
            "context_hidden": self.context.hidden if self.context else None,
            "seed": self.seed,
            "config": config or {},
            "shapes": {k: list(v.shape) for k, v in sorted(self.all_params().items())},
            "params": {k: v.ravel().tolist() for k, v in sorted(self.all_params().items())},
        }

    def save(self, path: Union[str, Path], config: Optional[dict] = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(config), sort_keys=True) + "\n", encoding="utf-8")


class LinearTagHead(_Head):
    """Per-word tag classifier ``[h;1] W`` with ``W`` of shape (d+1, c)."""

    kind = "linear"

    def __init__(self, d: int, c: int, context_hidden: Optional[int] = None, seed: int = 0):
        super().__init__(d, c, context_hidden, seed)
        self.params["W"] = self._rng.normal(0.0, 1.0 / np.sqrt(self.d + 1), (self.d + 1, c))

    def scores(self, X: np.ndarray) -> np.ndarray:
        H, _ = self.encode(X)
        return np.hstack([H, np.ones((len(H), 1))]) @ self.params["W"]

    def loss_and_grads(self, X, y, class_weights=None) -> Tuple[float, Dict[str, np.ndarray]]:
        y = np.asarray(y, dtype=np.int64)
        if len(y) and (y.min() < 0 or y.max() >= self.c):
            raise ValueError(f"tag label out of range 0..{self.c - 1}")
        H, cache = self.encode(X)
        if len(y) != len(H):
            raise ValueError("one gold tag per input vector expected")
        if len(y) == 0:
            return 0.0, {k: np.zeros_like(v) for k, v in self.all_params().items()}
        W = self.params["W"]
        Ha = np.hstack([H, np.ones((len(H), 1))])
        logp = log_softmax(Ha @ W)
        n = len(y)
        w = np.ones(n) if class_weights is None else np.asarray(class_weights, dtype=np.float64)[y]
        ce = -logp[np.arange(n), y]
        loss = float((w * ce).sum() / n)
        dS = np.exp(logp)
        dS[np.arange(n), y] -= 1.0
        dS *= (w / n)[:, None]
        grads = {"W": Ha.T @ dS}
        dH = (dS @ W.T)[:, :-1]
        grads.update(self._context_grads(dH, cache))
        return loss, grads

    def predict(self, X) -> np.ndarray:
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        return self.scores(X).argmax(axis=1)


class BiaffineHead(_Head):
    """Pair classifier ``score[k] = [a;1] W[:, k, :] [b;1]^T`` with ``W`` of shape (d+1, c, d+1)."""

    kind = "biaffine"

    def __init__(self, d: int, c: int, context_hidden: Optional[int] = None, seed: int = 0):
        super().__init__(d, c, context_hidden, seed)
        self.params["W"] = self._rng.normal(0.0, 1.0 / (self.d + 1), (self.d + 1, c, self.d + 1))

    def pair_scores(self, H: np.ndarray) -> np.ndarray:
        Ha = np.hstack([H, np.ones((len(H), 1))])
        return np.einsum("ip,pkq,jq->ijk", Ha, self.params["W"], Ha, optimize=True)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Scores of shape (n, n, c): [src, dst, class]."""
        H, _ = self.encode(X)
        return self.pair_scores(H)

    def loss_and_grads(self, X, y, class_weights=None) -> Tuple[float, Dict[str, np.ndarray]]:
        y = np.asarray(y, dtype=np.int64)
        if y.size and (y.min() < 0 or y.max() >= self.c):
            raise ValueError(f"relation label out of range 0..{self.c - 1}")
        H, cache = self.encode(X)
        n = len(H)
        if y.shape != (n, n):
            raise ValueError(f"gold matrix must be {n}x{n}, got {y.shape}")
        if n == 0:
            return 0.0, {k: np.zeros_like(v) for k, v in self.all_params().items()}
        W = self.params["W"]
        Ha = np.hstack([H, np.ones((n, 1))])
        S = np.einsum("ip,pkq,jq->ijk", Ha, W, Ha, optimize=True)
        logp = log_softmax(S)
        ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        w = np.ones((n, n)) if class_weights is None else np.asarray(class_weights, dtype=np.float64)[y]
        ce = -logp[ii, jj, y]
        loss = float((w * ce).sum() / (n * n))
        dS = np.exp(logp)
        dS[ii, jj, y] -= 1.0
        dS *= (w / (n * n))[:, :, None]
        grads = {"W": np.einsum("ip,ijk,jq->pkq", Ha, dS, Ha, optimize=True)}
        dHa = (np.einsum("ijk,pkq,jq->ip", dS, W, Ha, optimize=True)
               + np.einsum("ijk,pkq,ip->jq", dS, W, Ha, optimize=True))
        grads.update(self._context_grads(dHa[:, :-1], cache))
        return loss, grads

    def predict(self, X) -> np.ndarray:
        if len(X) == 0:
            return np.zeros((0, 0), dtype=np.int64)
        return self.scores(X).argmax(axis=2)


Head = Union[LinearTagHead, BiaffineHead]


def load_head(path_or_dict: Union[str, Path, dict]) -> Head:
    data = path_or_dict if isinstance(path_or_dict, dict) else json.loads(Path(path_or_dict).read_text(encoding="utf-8"))
    if data.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {data.get('version')}")
    cls = {"linear": LinearTagHead, "biaffine": BiaffineHead}[data["kind"]]
    head = cls(data["d_in"], data["classes"], data["context_hidden"], data["seed"])
    for name, shape in data["shapes"].items():
        head.set_param(name, np.asarray(data["params"][name], dtype=np.float64).reshape(shape))
    return head


def tag_forward(head: LinearTagHead, h: Sequence[float]) -> np.ndarray:
    """``[h;1] W`` for one (already contextualized) vector."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (head.d,):
        raise ValueError(f"expected a vector of size {head.d}, got shape {h.shape}")
    return np.append(h, 1.0) @ head.params["W"]


def biaffine_forward(head: BiaffineHead, a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    """``[a;1] W[:, k, :] [b;1]^T`` for every class ``k``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (head.d,) or b.shape != (head.d,):
        raise ValueError(f"expected vectors of size {head.d}")
    return np.einsum("p,pkq,q->k", np.append(a, 1.0), head.params["W"], np.append(b, 1.0))


def batch_loss(head: Head, inputs: Sequence[np.ndarray], gold: Sequence, class_weights=None) -> float:
    """Mean per-sentence loss over a batch."""
    if not len(inputs):
        return 0.0
    return float(np.mean([head.loss_and_grads(X, y, class_weights)[0] for X, y in zip(inputs, gold)]))


def batch_grads(head: Head, inputs, gold, class_weights=None) -> Tuple[float, Dict[str, np.ndarray]]:
    total = {k: np.zeros_like(v) for k, v in head.all_params().items()}
    loss = 0.0
    for X, y in zip(inputs, gold):
        l, g = head.loss_and_grads(X, y, class_weights)
        loss += l
        for k in total:
            total[k] += g[k]
    n = max(len(inputs), 1)
    return loss / n, {k: v / n for k, v in total.items()}


def grad_check(head: Head, example: Tuple[np.ndarray, np.ndarray], epsilon: float = 1e-4,
               class_weights=None, max_per_param: Optional[int] = None, seed: int = 0,
               floor: float = 1e-7) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``max_per_param`` samples that many entries of each parameter instead of
    checking them all. Relative error is ``|a-n| / max(|a|, |n|, floor)``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    X, y = example
    _, analytic = head.loss_and_grads(X, y, class_weights)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, value in sorted(head.all_params().items()):
        flat = value.reshape(-1)
        idx = np.arange(flat.size)
        if max_per_param is not None and flat.size > max_per_param:
            idx = rng.choice(flat.size, max_per_param, replace=False)
        ga = analytic[name].reshape(-1)
        for k in idx:
            old = flat[k]
            flat[k] = old + epsilon
            up = head.loss_and_grads(X, y, class_weights)[0]
            flat[k] = old - epsilon
            down = head.loss_and_grads(X, y, class_weights)[0]
            flat[k] = old
            num = (up - down) / (2 * epsilon)
            err = abs(ga[k] - num) / max(abs(ga[k]), abs(num), floor)
            worst = max(worst, err)
    return worst
