"""Builders for source block PMFs, distortion tensors, and feed-forward maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .prob import BlockSource, sequence_digits


@dataclass(frozen=True)
class SourceSpec:
    """A stationary source: i.i.d. with a given marginal, or a Markov chain.

    Use the ``iid``/``markov`` constructors rather than filling fields by hand.
    """

    kind: str
    alphabet_size: int
    marginal: np.ndarray | None = None
    transition: np.ndarray | None = None
    initial: np.ndarray | None = None

    @staticmethod
    def iid(bias) -> "SourceSpec":
        """i.i.d. source. ``bias`` is either P(X=1) for a binary source or a
        full marginal PMF."""
        b = np.atleast_1d(np.asarray(bias, dtype=float))
        pmf = np.array([1.0 - b[0], b[0]]) if b.size == 1 else b
        if np.any(pmf < 0) or abs(pmf.sum() - 1.0) > 1e-12:
            raise ValueError("invalid i.i.d. marginal")
        return SourceSpec(kind="iid", alphabet_size=pmf.size, marginal=pmf)

    @staticmethod
    def markov(transition, initial=None) -> "SourceSpec":
        """Markov source from a row-stochastic transition matrix.  ``initial``
        defaults to the stationary distribution."""
        P = np.asarray(transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("transition matrix must be square")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("transition matrix rows must be PMFs")
        pi = stationary_distribution(P) if initial is None else np.asarray(initial, dtype=float)
        if pi.shape != (P.shape[0],) or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("invalid initial distribution")
        return SourceSpec(kind="markov", alphabet_size=P.shape[0], transition=P, initial=pi)

    @staticmethod
    def binary_markov(p01: float, p10: float, initial=None) -> "SourceSpec":
        """Two-state chain with P(0->1) = p01 and P(1->0) = p10."""
        P = np.array([[1.0 - p01, p01], [p10, 1.0 - p10]])
        return SourceSpec.markov(P, initial)


def stationary_distribution(transition) -> np.ndarray:
    """Stationary distribution pi of a row-stochastic matrix, pi @ P = pi.

    Solved as a constrained linear system; raises if no distribution meets
    the 1e-12 residual (e.g. reducible or periodic chains with an ambiguous
    or unreachable fixed point).
    """
    P = np.asarray(transition, dtype=float)
    k = P.shape[0]
    A = np.vstack([P.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.any(pi < -1e-12) or np.max(np.abs(pi @ P - pi)) > 1e-12 or abs(pi.sum() - 1.0) > 1e-12:
        raise ValueError("failed to find a valid stationary distribution")
    return np.clip(pi, 0.0, None)


def block_pmf(spec: SourceSpec, n: int) -> BlockSource:
    """Block PMF p(x^n) of a source spec.

    i.i.d.: product of marginals.  Markov: p(x^n) = pi(x_1) * prod P(x_i|x_{i-1}).
    """
    if n < 1:
        raise ValueError("block length must be >= 1")
    A = spec.alphabet_size
    d = sequence_digits(A, n)
    if spec.kind == "iid":
        probs = spec.marginal[d].prod(axis=1)
    elif spec.kind == "markov":
        probs = spec.initial[d[:, 0]].copy()
        for i in range(1, n):
            probs *= spec.transition[d[:, i - 1], d[:, i]]
    else:
        raise ValueError(f"unknown source kind {spec.kind!r}")
    return BlockSource(n=n, src_alphabet_size=A, probs=probs)


@dataclass(frozen=True)
class DistortionSpec:
    """Per-letter distortion with a sliding window of ``m`` past source symbols.

    ``table`` has axes (x_{i-m}, ..., x_i, x̂_i); a single-letter measure is the
    m = 0 case.  Block distortion is the per-letter average (1/n) sum_i d_i.
    """

    m: int
    table: np.ndarray
    src_alphabet_size: int
    rec_alphabet_size: int

    @staticmethod
    def single_letter(matrix) -> "DistortionSpec":
        mat = np.asarray(matrix, dtype=float)
        return DistortionSpec(m=0, table=mat, src_alphabet_size=mat.shape[0],
                              rec_alphabet_size=mat.shape[1])

    @staticmethod
    def hamming(alphabet_size: int = 2) -> "DistortionSpec":
        k = alphabet_size
        return DistortionSpec.single_letter(1.0 - np.eye(k))

    @staticmethod
    def windowed(m: int, table) -> "DistortionSpec":
        t = np.asarray(table, dtype=float)
        if t.ndim != m + 2:
            raise ValueError("windowed table must have m+2 axes")
        return DistortionSpec(m=m, table=t, src_alphabet_size=t.shape[0],
                              rec_alphabet_size=t.shape[-1])

    @staticmethod
    def stock() -> "DistortionSpec":
        """Binary drop-warning distortion e(x_{i-1}, x_i, x̂_i).

        The advisory x̂_i = 1 flags a value drop (x_{i-1}, x_i) = (1, 0);
        distortion 1 for a missed drop or a false alarm, 0 otherwise.
        """
        e = np.zeros((2, 2, 2))
        for prev in range(2):
            for cur in range(2):
                drop = 1 if (prev == 1 and cur == 0) else 0
                e[prev, cur, 1 - drop] = 1.0
        return DistortionSpec(m=1, table=e, src_alphabet_size=2, rec_alphabet_size=2)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError("distortion values must be finite and >= 0")
        if t.shape != (self.src_alphabet_size,) * (self.m + 1) + (self.rec_alphabet_size,):
            raise ValueError("distortion table shape mismatch with alphabets")
        object.__setattr__(self, "table", t)


@dataclass(frozen=True)
class DistortionTensor:
    """Dense block distortion d(x^n, x̂^n), indexed like a ForwardChannel."""

    n: int
    src_alphabet_size: int
    rec_alphabet_size: int
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if v.shape != (self.src_alphabet_size**self.n, self.rec_alphabet_size**self.n):
            raise ValueError("distortion tensor must be |X|^n by |X̂|^n")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("distortion values must be finite and >= 0")
        object.__setattr__(self, "values", v)


def _boundary_table(table: np.ndarray, missing: int, A: int,
                    initial_context) -> np.ndarray:
    """Resolve a window that extends ``missing`` symbols before the block.

    With no initial context the missing axes are averaged uniformly
    (window truncation); a fixed symbol pins them; a distribution over the
    pre-block symbol averages under it.
    """
    t = table
    for _ in range(missing):
        if initial_context is None:
            t = t.mean(axis=0)
        elif np.ndim(initial_context) == 0:
            t = t[int(initial_context)]
        else:
            w = np.asarray(initial_context, dtype=float)
            if w.shape != (A,) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("initial context distribution must be a PMF over X")
            t = np.tensordot(w, t, axes=(0, 0))
    return t


def distortion_tensor(spec: DistortionSpec, n: int, initial_context=None) -> DistortionTensor:
    """Assemble the dense block tensor d(x^n, x̂^n) = (1/n) sum_i d_i.

    ``initial_context`` handles windows reaching before the block: a symbol
    fixes the missing history, a PMF averages over it, and None truncates
    (uniform average over the missing symbols).
    """
    A, B, m = spec.src_alphabet_size, spec.rec_alphabet_size, spec.m
    dx = sequence_digits(A, n)
    dh = sequence_digits(B, n)
    vals = np.zeros((A**n, B**n))
    for i in range(1, n + 1):
        missing = max(m - (i - 1), 0)
        t = _boundary_table(spec.table, missing, A, initial_context)
        win = [dx[:, j] for j in range(i - 1 - (m - missing), i)]  # x window, then x̂_i
        per_x = t[tuple(win)] if win else np.broadcast_to(t, (A**n, B))
        vals += per_x[:, dh[:, i - 1]]
    vals /= n
    return DistortionTensor(n=n, src_alphabet_size=A, rec_alphabet_size=B, values=vals)


@dataclass(frozen=True)
class FeedForwardMap:
    """Deterministic symbol map f: X -> Z applied to fed-forward source symbols."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.ndim != 1 or np.any(t < 0):
            raise ValueError("map table must be a 1-D array of symbol indices")
        object.__setattr__(self, "table", t)

    @property
    def domain_size(self) -> int:
        return self.table.size

    @property
    def codomain_size(self) -> int:
        return int(self.table.max()) + 1

    @staticmethod
    def identity(alphabet_size: int) -> "FeedForwardMap":
        return FeedForwardMap(np.arange(alphabet_size))

    @staticmethod
    def constant(alphabet_size: int) -> "FeedForwardMap":
        return FeedForwardMap(np.zeros(alphabet_size, dtype=np.int64))

    @staticmethod
    def parity(alphabet_size: int) -> "FeedForwardMap":
        return FeedForwardMap(np.arange(alphabet_size) % 2)


def apply_feedforward_map(ff_map: FeedForwardMap, x) -> np.ndarray:
    """Elementwise z_i = f(x_i)."""
    return ff_map.table[np.asarray(x, dtype=np.int64)]
