"""Exact deletion-channel likelihoods and exhaustive small-instance oracles.

The probability of receiving ``y`` (length ``m``) after sending ``x``
(length ``n``) is ``p(y|x) = N(x,y) * d^(n-m) * (1-d)^m`` where
``N(x,y)`` counts deletion masks mapping ``x`` to ``y`` — equivalently,
subsequence embeddings of ``y`` in ``x``.  ``N`` satisfies the dynamic
program ``f[i][j] = f[i-1][j] + [x_i = y_j] * f[i-1][j-1]`` with
``f[i][0] = 1``.

``embedding_count`` evaluates the DP with exact integer arithmetic for
``n <= 64`` and with row-scaled floating point (renormalization when the
row peak nears overflow, carrying a separate log2 scale) above, keeping
O(m) space.  Impossible outputs are reported as the distinguished value
``-inf``, not as errors: Monte Carlo never produces them but
adversarial inputs do.

``exact_block_information`` enumerates all inputs and masks for
``n <= 12`` and returns exact ``H(Y)``, ``H(Y|X)``, and ``I/n`` — the
ground-truth oracle against which the Monte Carlo estimators are gated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from delchan.channel import run_lengths
from delchan.sources import SourceSpec, as_bits

__all__ = [
    "IMPOSSIBLE",
    "BlockInformation",
    "LogLikelihood",
    "binomial_length_entropy",
    "embedding_count",
    "exact_block_information",
    "log2_binomial",
    "log_likelihood",
    "total_probability",
]

#: Distinguished value for outputs no deletion mask can produce.
IMPOSSIBLE = float("-inf")

_EXACT_MAX_N = 64
_SCALE_LIMIT = 1e300
_ORACLE_MAX_N = 12


@dataclass(frozen=True)
class LogLikelihood:
    """Log2 embedding count and log2 channel probability (bits, <= 0)."""

    log_embedding_count: float
    log_prob: float

    @property
    def impossible(self) -> bool:
        return self.log_prob == IMPOSSIBLE


class BlockInformation(NamedTuple):
    """Exact block-level entropies (bits) and per-bit information rate."""

    H_Y: float
    H_Y_given_X: float
    I_n_per_bit: float


def log2_binomial(n: int, k: int) -> float:
    """``log2 C(n, k)`` via lgamma (exactly 0 at the boundary cases)."""
    if k < 0 or k > n:
        raise ValueError(f"binomial coefficient C({n},{k}) out of range")
    if k == 0 or k == n:
        return 0.0
    return (
        math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    ) / math.log(2.0)


def _embedding_count_exact(xs: list[int], ys: list[int]) -> int:
    """Single-row integer DP; returns the exact embedding count."""
    n, m = len(xs), len(ys)
    row = [0] * (m + 1)
    row[0] = 1
    for i, xi in enumerate(xs, start=1):
        lo = max(1, m - (n - i))
        for j in range(min(i, m), lo - 1, -1):
            if xi == ys[j - 1]:
                row[j] += row[j - 1]
    return row[m]


def embedding_count(x, y, force_scaled: bool = False) -> float:
    """``log2 N(x, y)``: deletion masks of weight ``n - m`` mapping ``x`` to ``y``.

    Exact integer arithmetic when ``len(x) <= 64`` (unless
    ``force_scaled``); otherwise a row-scaled float64 DP whose relative
    error is ~``n * 2^-52``.  Returns ``-inf`` when no mask works.
    Raises ``ValueError`` when ``y`` is longer than ``x``.
    """
    x = as_bits(x)
    y = as_bits(y)
    n, m = x.size, y.size
    if m > n:
        raise ValueError(f"output longer than input ({m} > {n})")
    if m == 0:
        return 0.0
    if n <= _EXACT_MAX_N and not force_scaled:
        count = _embedding_count_exact(x.tolist(), y.tolist())
        return math.log2(count) if count else IMPOSSIBLE

    row = np.zeros(m + 1)
    row[0] = 1.0
    scale = 0.0
    yv = y.astype(np.float64)
    for xi in x.tolist():
        eq = yv == xi
        row[1:] = row[1:] + eq * row[:-1]
        peak = float(row.max())
        if peak > _SCALE_LIMIT:
            _, k = math.frexp(peak)
            row *= 2.0**-k
            scale += k
    top = float(row[m])
    return math.log2(top) + scale if top > 0.0 else IMPOSSIBLE


def log_likelihood(x, y, d: float) -> LogLikelihood:
    """Exact ``log2 p(y|x)`` for deletion probability ``d``.

    Impossible outputs yield the distinguished ``-inf`` fields, not an
    exception.  ``d = 0`` and ``d = 1`` are handled as the degenerate
    identity / erase-everything channels.
    """
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"deletion probability must be in [0, 1], got {d!r}")
    x = as_bits(x)
    y = as_bits(y)
    n, m = x.size, y.size
    if m > n:
        raise ValueError(f"output longer than input ({m} > {n})")
    if d == 0.0:
        possible = m == n and bool(np.array_equal(x, y))
        value = 0.0 if possible else IMPOSSIBLE
        return LogLikelihood(log_embedding_count=value, log_prob=value)
    if d == 1.0:
        value = 0.0 if m == 0 else IMPOSSIBLE
        return LogLikelihood(log_embedding_count=value, log_prob=value)
    log_n = embedding_count(x, y)
    if log_n == IMPOSSIBLE:
        return LogLikelihood(log_embedding_count=IMPOSSIBLE, log_prob=IMPOSSIBLE)
    log_prob = log_n + (n - m) * math.log2(d) + m * math.log2(1.0 - d)
    return LogLikelihood(log_embedding_count=log_n, log_prob=log_prob)


def binomial_length_entropy(n: int, d: float) -> float:
    """Entropy (bits) of the output length ``M ~ Binomial(n, 1 - d)``."""
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"deletion probability must be in [0, 1], got {d!r}")
    if d == 0.0 or d == 1.0 or n == 0:
        return 0.0
    terms = []
    for m in range(n + 1):
        lp = log2_binomial(n, m) + m * math.log2(1.0 - d) + (n - m) * math.log2(d)
        p = 2.0**lp
        if p > 0.0:
            terms.append(-p * lp)
    return math.fsum(terms)


# --------------------------------------------------------------------------
# batched DP over all outputs of one input (normalization self-check)
# --------------------------------------------------------------------------


def _embedding_counts_all_y(x: np.ndarray) -> list[np.ndarray]:
    """Embedding counts of every candidate output, grouped by length.

    Returns ``counts`` with ``counts[m][c]`` = N(x, y) for the length-m
    string ``y`` whose bits spell the integer ``c`` (MSB first).  Uses a
    float64 DP batched across outputs (exact: counts < 2^53 for
    ``n <= 12``).
    """
    n = x.size
    if n > _ORACLE_MAX_N:
        raise ValueError(
            f"all-output enumeration supports n <= {_ORACLE_MAX_N}, got {n}"
        )
    out: list[np.ndarray] = [np.ones(1)]  # m = 0: empty output, N = 1
    for m in range(1, n + 1):
        codes = np.arange(2**m, dtype=np.int64)
        # bit j (1-based) of each candidate y, MSB first
        ybits = (codes[:, None] >> (m - 1 - np.arange(m))) & 1
        rows = np.zeros((2**m, m + 1))
        rows[:, 0] = 1.0
        for xi in x.tolist():
            eq = ybits == xi
            rows[:, 1:] = rows[:, 1:] + eq * rows[:, :-1]
        out.append(rows[:, m].copy())
    return out


def total_probability(x, d: float) -> float:
    """``sum over all y of p(y|x)`` — exactly 1 for a correct DP.

    Enumerates every candidate output of every length (``n <= 12``) with
    a batched DP and sums ``N(x,y) d^(n-m) (1-d)^m``.  Exposed as the
    normalization self-check of the likelihood computation.
    """
    if not 0.0 < d < 1.0:
        raise ValueError("total_probability requires 0 < d < 1")
    x = as_bits(x)
    n = x.size
    counts = _embedding_counts_all_y(x)
    totals = []
    for m in range(n + 1):
        weight = d ** (n - m) * (1.0 - d) ** m
        totals.append(float(counts[m].sum()) * weight)
    return math.fsum(totals)


# --------------------------------------------------------------------------
# exhaustive small-instance information oracle
# --------------------------------------------------------------------------


def _input_probs(spec: SourceSpec, bits_matrix: np.ndarray) -> np.ndarray:
    """P(X^n = x) for every row of ``bits_matrix`` under ``spec``.

    Renewal sources use the run-boundary (Palm) start: probability is
    ``(1/2) * prod(p(l_i) over complete runs) * P(L >= l_last)`` with the
    final run censored at the horizon.
    """
    rows, n = bits_matrix.shape
    if spec.kind == "bernoulli_half":
        return np.full(rows, 2.0**-n)
    if spec.kind == "markov":
        flips = (bits_matrix[:, 1:] != bits_matrix[:, :-1]).sum(axis=1)
        return (
            0.5 * spec.p_same ** (n - 1 - flips) * (1.0 - spec.p_same) ** flips
        )
    dist = spec.dist
    assert dist is not None
    tail = np.concatenate(
        (np.cumsum(dist.probs[::-1])[::-1], [0.0])
    )  # tail[l-1] = P(L >= l); tail beyond support = 0
    probs = np.empty(rows)
    for r in range(rows):
        lens = run_lengths(bits_matrix[r])
        p = 0.5
        for l in lens[:-1].tolist():
            p *= dist.prob(int(l))
        last = int(lens[-1])
        p *= tail[last - 1] if last <= dist.L_max else 0.0
        probs[r] = p
    return probs


def exact_block_information(spec: SourceSpec, n: int, d: float) -> BlockInformation:
    """Exact ``H(Y)``, ``H(Y|X)``, and ``I/n`` by full enumeration (n <= 12).

    Enumerates all ``2^n`` inputs weighted by the source law (renewal
    sources: run-boundary start) and all ``2^n`` deletion masks.  Raises
    ``ValueError`` with guidance above the exhaustive limit.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > _ORACLE_MAX_N:
        raise ValueError(
            f"exact enumeration is limited to n <= {_ORACLE_MAX_N}; "
            "use the Monte Carlo estimators for larger n"
        )
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"deletion probability must be in [0, 1], got {d!r}")

    size = 2**n
    shifts = n - 1 - np.arange(n)
    codes = np.arange(size, dtype=np.int64)
    bits = ((codes[:, None] >> shifts) & 1).astype(np.uint8)

    p_x = _input_probs(spec, bits)
    total = math.fsum(p_x.tolist())
    if abs(total - 1.0) > 1e-9:
        raise AssertionError(f"input law sums to {total!r}")

    mask_bits = ((codes[:, None] >> shifts) & 1).astype(np.int64)
    weights_mask = d ** mask_bits.sum(axis=1) * (1.0 - d) ** (
        n - mask_bits.sum(axis=1)
    )

    # y-code of input x under mask: sum over surviving positions of
    # bit * 2^(number of survivors strictly to the right)
    keep = 1 - mask_bits
    suffix_keep = np.cumsum(keep[:, ::-1], axis=1)[:, ::-1] - keep
    place = keep * (2**suffix_keep)
    y_codes = np.rint(place.astype(np.float64) @ bits.T.astype(np.float64)).astype(
        np.int32
    )  # (mask, x) — exact: values < 2^12
    y_len = keep.sum(axis=1).astype(np.int32)
    offsets = (2**y_len) - 1  # sum_{j < L} 2^j distinct key blocks per length
    keys = y_codes + offsets[:, None]
    n_keys = 2 ** (n + 1) - 1

    # H(Y): accumulate p(y) mask-by-mask
    p_y = np.zeros(n_keys)
    for mk in range(size):
        w = weights_mask[mk]
        if w == 0.0:
            continue
        p_y += w * np.bincount(keys[mk], weights=p_x, minlength=n_keys)
    nz = p_y > 0.0
    H_Y = float(-np.sum(p_y[nz] * np.log2(p_y[nz])))

    # H(Y|X): per input column, the output law across masks
    h_terms = []
    for xi in range(size):
        if p_x[xi] == 0.0:
            continue
        q = np.bincount(keys[:, xi], weights=weights_mask, minlength=n_keys)
        qnz = q[q > 0.0]
        h_terms.append(p_x[xi] * float(-np.sum(qnz * np.log2(qnz))))
    H_Y_given_X = math.fsum(h_terms)

    return BlockInformation(
        H_Y=H_Y,
        H_Y_given_X=H_Y_given_X,
        I_n_per_bit=(H_Y - H_Y_given_X) / n,
    )
