"""Run-length distributions and stationary binary source sampling.

A *renewal* binary source alternates runs of 0s and 1s whose lengths are
i.i.d. from a run-length pmf ``p_L``.  This module constructs the pmfs
used throughout the toolkit —

* ``geometric_half``: ``p*(l) = 2^-l`` (the run law of the i.i.d.
  uniform source),
* ``dagger_distribution``: the first-order capacity-achieving
  perturbation ``2^-l * (1 + d*(l*ln(l) - c2*l/2))``,

— and samples finite paths of Bernoulli(1/2), symmetric first-order
Markov, and renewal sources, with either a run boundary at position 1
(Palm start, the default) or a size-biased stationary start.

Sequences are numpy ``uint8`` arrays of 0/1 values; ``as_bits`` accepts
strings like ``"0110"`` for convenience.  Sampling uses the
counter-based Philox generator so that per-replica streams can be
derived deterministically (see ``delchan.estimation``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from delchan.constants import DEFAULT_TOL, compute_constants

__all__ = [
    "DEFAULT_SEED",
    "RunLengthDistribution",
    "SourceSpec",
    "as_bits",
    "bits_to_str",
    "dagger_distribution",
    "dagger_mass",
    "geometric_half",
    "point_mass",
    "read_distribution",
    "sample_sequence",
    "write_distribution",
]

#: Fixed documented default seed (used by the CLI; never wall-clock).
DEFAULT_SEED = 0xDC0DE

#: Default truncation point for constructed distributions.  The
#: geometric-type laws used here leave < 2^-60 mass beyond 64.
DEFAULT_L_MAX = 64


# --------------------------------------------------------------------------
# bit-sequence helpers
# --------------------------------------------------------------------------


def as_bits(x: "str | Sequence[int] | np.ndarray") -> np.ndarray:
    """Coerce a bit string like ``"0110"`` or an int sequence to uint8 array."""
    if isinstance(x, np.ndarray):
        if x.dtype != np.uint8:
            x = x.astype(np.uint8)
        if x.size and not np.all(x <= 1):
            raise ValueError("bit array may contain only 0s and 1s")
        return x
    if isinstance(x, str):
        if x and set(x) - {"0", "1"}:
            raise ValueError(f"bit string may contain only '0'/'1', got {x!r}")
        return np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(list(x), dtype=np.uint8)
    if arr.size and not np.all(arr <= 1):
        raise ValueError("bit sequence may contain only 0s and 1s")
    return arr


def bits_to_str(bits: np.ndarray) -> str:
    """Render a uint8 bit array as a compact '0101' string."""
    return "".join("1" if b else "0" for b in np.asarray(bits).tolist())


def _rng_from(seed) -> np.random.Generator:
    """Build a Philox generator from an int seed, SeedSequence, or Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


# --------------------------------------------------------------------------
# run-length distributions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RunLengthDistribution:
    """Truncated pmf over run lengths ``l = 1..L_max``.

    ``probs[l-1]`` is ``P(L = l)``; probabilities are nonnegative and sum
    to 1 within 1e-12.  ``mean`` is ``sum(l * probs[l-1])``.
    ``discarded_mass`` records the pre-normalization mass beyond
    ``L_max`` for constructed laws (diagnostic metadata).
    """

    probs: np.ndarray
    L_max: int
    mean: float
    discarded_mass: float = 0.0

    @staticmethod
    def from_weights(
        weights: "Sequence[float] | np.ndarray",
        discarded_mass: float = 0.0,
    ) -> "RunLengthDistribution":
        """Normalize nonnegative weights over lengths 1..len(weights)."""
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D sequence")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            bad = int(np.flatnonzero((w < 0.0) | ~np.isfinite(w))[0]) + 1
            raise ValueError(f"invalid weight at run length l={bad}")
        total = math.fsum(w.tolist())
        if total <= 0.0:
            raise ValueError("weights sum to zero")
        probs = w / total
        probs.flags.writeable = False
        mean = math.fsum((l + 1) * p for l, p in enumerate(probs.tolist()))
        return RunLengthDistribution(
            probs=probs, L_max=w.size, mean=mean, discarded_mass=discarded_mass
        )

    def validate(self) -> None:
        if self.probs.shape != (self.L_max,):
            raise ValueError("probs length disagrees with L_max")
        if np.any(self.probs < 0.0):
            raise ValueError("negative probability")
        if abs(math.fsum(self.probs.tolist()) - 1.0) > 1e-12:
            raise ValueError("probabilities do not sum to 1 within 1e-12")

    @property
    def lengths(self) -> np.ndarray:
        """Support lengths ``1..L_max``."""
        return np.arange(1, self.L_max + 1)

    def prob(self, l: int) -> float:
        """``P(L = l)`` (0 outside the support)."""
        if 1 <= l <= self.L_max:
            return float(self.probs[l - 1])
        return 0.0


def geometric_half(L_max: int = DEFAULT_L_MAX) -> RunLengthDistribution:
    """Truncated, renormalized geometric law ``p*(l) = 2^-l``."""
    if L_max < 1:
        raise ValueError("L_max must be >= 1")
    weights = 0.5 ** np.arange(1, L_max + 1)
    return RunLengthDistribution.from_weights(weights, discarded_mass=2.0**-L_max)


def point_mass(l: int) -> RunLengthDistribution:
    """Degenerate law concentrated on run length ``l``."""
    if l < 1:
        raise ValueError("run length must be >= 1")
    weights = np.zeros(l)
    weights[-1] = 1.0
    return RunLengthDistribution.from_weights(weights)


def dagger_mass(
    l: int,
    d: float,
    c2: float | None = None,
    log_fn: Callable[[float], float] = math.log,
) -> float:
    """Pre-truncation mass ``2^-l * (1 + d*(l*log_fn(l) - c2*l/2))``.

    ``log_fn`` defaults to the natural log — the only base for which the
    perturbation sums to zero, making the full series a probability
    distribution.  It is exposed as a diagnostic override so tests can
    demonstrate that a base-2 variant fails normalization by Theta(d).
    """
    if c2 is None:
        c2 = compute_constants(DEFAULT_TOL).c2
    return 2.0**-l * (1.0 + d * (l * log_fn(l) - c2 * l / 2.0))


def dagger_distribution(
    d: float,
    L_max: int = DEFAULT_L_MAX,
    log_fn: Callable[[float], float] = math.log,
) -> RunLengthDistribution:
    """First-order capacity-achieving run-length law, truncated to ``L_max``.

    ``p(l) ∝ 2^-l * (1 + d*(l*ln(l) - c2*l/2))`` renormalized over
    ``1..L_max``.  Raises ``ValueError`` naming the first length whose
    pre-normalization mass is not positive (cannot happen for
    ``0 <= d <= 1``; guards against out-of-range parameters).
    """
    if d < 0.0:
        raise ValueError("d must be >= 0")
    if L_max < 1:
        raise ValueError("L_max must be >= 1")
    c2 = compute_constants(DEFAULT_TOL).c2
    weights = np.array(
        [dagger_mass(l, d, c2, log_fn) for l in range(1, L_max + 1)]
    )
    nonpos = np.flatnonzero(weights <= 0.0)
    if nonpos.size:
        l_bad = int(nonpos[0]) + 1
        raise ValueError(
            f"dagger mass is not positive at run length l={l_bad} (d={d!r})"
        )
    discarded = 1.0 - math.fsum(weights.tolist())
    return RunLengthDistribution.from_weights(weights, discarded_mass=discarded)


# --------------------------------------------------------------------------
# source specifications
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceSpec:
    """A stationary ergodic binary source the toolkit can realize.

    ``kind`` is one of ``"bernoulli_half"``, ``"markov"`` (symmetric
    first-order, with ``P(X_i = X_{i-1}) = p_same``), or ``"renewal"``
    (i.i.d. run lengths from ``dist``).
    """

    kind: str
    p_same: float | None = None
    dist: RunLengthDistribution | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind == "bernoulli_half":
            if self.p_same is not None or self.dist is not None:
                raise ValueError("bernoulli_half takes no parameters")
        elif self.kind == "markov":
            if self.p_same is None or not 0.0 < self.p_same < 1.0:
                raise ValueError("markov requires 0 < p_same < 1")
        elif self.kind == "renewal":
            if self.dist is None:
                raise ValueError("renewal requires a run-length distribution")
            self.dist.validate()
        else:
            raise ValueError(f"unknown source kind {self.kind!r}")

    @staticmethod
    def bernoulli_half() -> "SourceSpec":
        return SourceSpec(kind="bernoulli_half")

    @staticmethod
    def markov(p_same: float) -> "SourceSpec":
        return SourceSpec(kind="markov", p_same=p_same)

    @staticmethod
    def renewal(dist: RunLengthDistribution) -> "SourceSpec":
        return SourceSpec(kind="renewal", dist=dist)

    @staticmethod
    def dagger(d: float, L_max: int = DEFAULT_L_MAX) -> "SourceSpec":
        """Renewal source with the capacity-achieving run law for ``d``."""
        return SourceSpec.renewal(dagger_distribution(d, L_max))

    @property
    def is_renewal_like(self) -> bool:
        """True when the output-run entropy identity is exact (renewal laws)."""
        return self.kind in ("bernoulli_half", "renewal")


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


def _sample_run_lengths(
    rng: np.random.Generator, dist: RunLengthDistribution, count: int
) -> np.ndarray:
    return rng.choice(dist.lengths, size=count, p=dist.probs, replace=True)


def sample_sequence(
    spec: SourceSpec,
    n: int,
    seed,
    stationary_start: bool = False,
) -> np.ndarray:
    """Sample ``n`` bits of the source as a uint8 array.

    Deterministic function of ``(spec, n, seed, stationary_start)``.
    ``seed`` may be an int, a ``numpy.random.SeedSequence``, or an
    existing ``Generator`` (for derived parallel streams).

    Renewal sources alternate run values with i.i.d. lengths.  By
    default the sequence starts at a run boundary (Palm start).  With
    ``stationary_start`` the first run is drawn size-biased
    (``l*p(l)/mu``) and entered at a uniform offset, which realizes the
    stationary law of the doubly infinite process.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = _rng_from(seed)
    if n == 0:
        return np.zeros(0, dtype=np.uint8)

    if spec.kind == "bernoulli_half":
        return rng.integers(0, 2, size=n, dtype=np.uint8)

    if spec.kind == "markov":
        first = rng.integers(0, 2, dtype=np.uint8)
        if n == 1:
            return np.array([first], dtype=np.uint8)
        flips = (rng.random(n - 1) >= spec.p_same).astype(np.int64)
        bits = np.empty(n, dtype=np.uint8)
        bits[0] = first
        bits[1:] = (int(first) + np.cumsum(flips)) % 2
        return bits

    # renewal
    dist = spec.dist
    assert dist is not None
    value = int(rng.integers(0, 2))
    chunks: list[np.ndarray] = []
    total = 0

    if stationary_start:
        size_biased = dist.lengths * dist.probs
        size_biased = size_biased / size_biased.sum()
        l0 = int(rng.choice(dist.lengths, p=size_biased))
        # uniform offset inside the covering run: 1..l0 bits remain
        remaining = int(rng.integers(1, l0 + 1))
        chunks.append(np.full(min(remaining, n), value, dtype=np.uint8))
        total += chunks[-1].size
        value ^= 1

    # Draw run lengths in deterministic-size batches until n bits are covered.
    batch = max(16, int(n / dist.mean * 1.25) + 16)
    while total < n:
        lengths = _sample_run_lengths(rng, dist, batch)
        values = np.empty(batch, dtype=np.uint8)
        values[0::2] = value
        values[1::2] = value ^ 1
        chunk = np.repeat(values, lengths)
        value = int(values[-1]) ^ 1
        chunks.append(chunk)
        total += chunk.size

    return np.concatenate(chunks)[:n]


# --------------------------------------------------------------------------
# distribution file I/O
# --------------------------------------------------------------------------


def write_distribution(
    path, dist: RunLengthDistribution, comment: str | None = None
) -> None:
    """Write a run-length pmf as UTF-8 lines ``l<TAB>prob`` (l = 1..L_max).

    Trailing comment lines start with ``#``.  Floats are written with
    ``repr`` so reading the file back reproduces them bit-exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if comment is not None:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for l, p in zip(dist.lengths.tolist(), dist.probs.tolist()):
            fh.write(f"{l}\t{p!r}\n")


def read_distribution(path) -> RunLengthDistribution:
    """Read a run-length pmf written by :func:`write_distribution`.

    Lines are ``l<TAB>prob`` with lengths strictly increasing from 1
    (gaps are filled with zero probability); ``#`` lines and blank lines
    are ignored.  Raises ``ValueError`` naming the offending line number
    on malformed input.  Probabilities must be nonnegative and sum to 1
    within 1e-6 (the stored values are renormalized exactly).
    """
    entries: list[tuple[int, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}: line {lineno}: expected 'l<TAB>prob', got {raw!r}"
                )
            try:
                l = int(parts[0])
                p = float(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
            if p < 0.0 or not math.isfinite(p):
                raise ValueError(f"{path}: line {lineno}: invalid probability {p!r}")
            if entries and l <= entries[-1][0]:
                raise ValueError(
                    f"{path}: line {lineno}: lengths must be strictly increasing"
                )
            if not entries and l != 1:
                raise ValueError(f"{path}: line {lineno}: lengths must start at 1")
            if l < 1:
                raise ValueError(f"{path}: line {lineno}: run length must be >= 1")
            entries.append((l, p))
    if not entries:
        raise ValueError(f"{path}: no distribution entries found")
    L_max = entries[-1][0]
    weights = np.zeros(L_max)
    for l, p in entries:
        weights[l - 1] = p
    total = math.fsum(w for _, w in entries)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(
            f"{path}: probabilities sum to {total!r}, not 1 within 1e-6"
        )
    return RunLengthDistribution.from_weights(weights)
