"""Executable verification checks behind the ``verify`` CLI command.

Each ``check_*`` function runs one self-contained group of numerical
checks — published-value pins, oracle equivalences, formula/simulation
cross-checks — and returns machine-readable :class:`CheckResult` rows.
Suites group them for the command line:

* ``constants`` — series constants and the capacity table,
* ``formulas``  — closed-form identities and second-order pins,
* ``dp``        — embedding-count DP against brute-force enumeration,
* ``lemmas``    — empirical run-statistics properties,
* ``rates``     — Monte Carlo estimators against exact oracles.

Every check reports its measured value, target, and tolerance; nothing
is clamped or retried.  One pin is expected to fail: the published
rounding 0.904 for the combination ``A2 - A2' + c4`` is inconsistent
with the defining series, whose value is 0.790197 — the check reports
that discrepancy honestly rather than adjusting either side.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from delchan.analytics import (
    hatD_entropy_formula,
    hy_given_x_formula,
    k_entropy_formula,
    optimal_markov_param,
)
from delchan.channel import modified_mask, run_lengths, transmit
from delchan.constants import (
    DEFAULT_TOL,
    SeriesConstants,
    capacity_estimate,
    compute_constants,
)
from delchan.estimation import estimate_h_cond, estimate_rate
from delchan.likelihood import (
    binomial_length_entropy,
    embedding_count,
    exact_block_information,
    total_probability,
)
from delchan.runstats import (
    empirical_run_distribution,
    empirical_super_run_distribution,
)
from delchan.sources import (
    DEFAULT_SEED,
    SourceSpec,
    dagger_distribution,
    geometric_half,
    sample_sequence,
)

__all__ = [
    "CheckResult",
    "SuiteReport",
    "SUITES",
    "run_suite",
    "check_series_constants",
    "check_capacity_table",
    "check_markov_analytics",
    "check_dp_oracle",
    "check_small_block_oracle",
    "check_formula_pins",
    "check_formula_vs_simulation",
    "check_end_to_end_rate",
    "check_run_statistics",
    "check_determinism",
]

#: Published 8-decimal reference values for the series constants.
PUBLISHED_CONSTANTS = {
    "c2": 1.78628364,
    "A1": 1.15416377,
    "A2": 1.67814594,
    "c3": -0.88636960,
    "c4": 0.69001321,
    "c5": 0.60409609,
    "A2_prime": 1.57796256,
}

#: Published capacity table: d -> (best lower bound, printed estimate,
#: best upper bound), four decimals.
PUBLISHED_TABLE = {
    0.05: (0.7283, 0.7304, 0.8160),
    0.10: (0.5620, 0.5692, 0.6890),
    0.15: (0.4392, 0.4541, 0.5790),
    0.20: (0.3467, 0.3719, 0.4910),
    0.25: (0.2759, 0.3163, 0.4200),
    0.30: (0.2224, 0.2837, 0.3620),
    0.35: (0.1810, 0.2715, 0.3150),
    0.40: (0.1484, 0.2781, 0.2750),
    0.45: (0.1229, 0.3020, 0.2410),
    0.50: (0.1019, 0.3425, 0.2120),
}


@dataclass(frozen=True)
class CheckResult:
    """One verified quantity: measured value vs target within tol."""

    name: str
    passed: bool
    value: float
    target: float
    tol: float

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "target": self.target,
            "tol": self.tol,
        }


def _pin(name: str, value: float, target: float, tol: float) -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(abs(value - target) <= tol),
        value=float(value),
        target=float(target),
        tol=float(tol),
    )


def _flag(name: str, passed: bool, value: float = 0.0) -> CheckResult:
    """A yes/no check; ``value`` carries the measured magnitude."""
    return CheckResult(
        name=name, passed=bool(passed), value=float(value), target=0.0, tol=0.0
    )


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    checks: list[CheckResult]
    underpowered: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, *, indent: "int | None" = 2) -> str:
        return json.dumps(
            {
                "suite": self.suite,
                "passed": self.passed,
                "underpowered": self.underpowered,
                "notes": self.notes,
                "checks": [c.as_dict() for c in self.checks],
            },
            indent=indent,
        )


# --------------------------------------------------------------------------
# criterion checks
# --------------------------------------------------------------------------


def check_series_constants(tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Series constants vs published 8-decimal values; closed-form identity."""
    consts = compute_constants(tol)
    out = [
        _pin(f"constant {name}", getattr(consts, name), target, 1e-7)
        for name, target in PUBLISHED_CONSTANTS.items()
    ]
    identity = math.log2(2.0 * math.e) - consts.c2 / (2.0 * math.log(2.0))
    out.append(_pin("identity A1 = log2(2e) - c2/(2 ln 2)", consts.A1, identity, 1e-12))
    return out


def check_capacity_table(tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Capacity estimates vs the printed 4-decimal column + crossover."""
    consts = compute_constants(tol)
    out = []
    worst = 0.0
    for d, (_, printed, _) in PUBLISHED_TABLE.items():
        worst = max(worst, abs(capacity_estimate(d, consts) - printed))
    out.append(_pin("capacity table max |C_est - printed|", worst, 0.0, 5e-5))
    for d, (_, _, upper) in PUBLISHED_TABLE.items():
        est = capacity_estimate(d, consts)
        expect_above = d >= 0.40
        out.append(
            _flag(
                f"estimate {'exceeds' if expect_above else 'respects'} "
                f"upper bound at d={d:.2f}",
                (est > upper) == expect_above,
                est - upper,
            )
        )
    return out


def check_markov_analytics(tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Second-order Markov quantities vs their published roundings."""
    consts = compute_constants(tol)
    gap = consts.A2 - consts.A2_prime
    return [
        _pin("A2 - A2'", gap, 0.10018339, 1e-7),
        _pin("optimal Markov parameter at d=0.05",
             optimal_markov_param(0.05, consts), 0.530204804, 1e-8),
        # the published rounding 0.904 disagrees with the defining
        # series (A2 - A2' + c4 = 0.790197); reported as-is
        _pin("printed second-order gap A2 - A2' + c4",
             gap + consts.c4, 0.904, 0.005),
    ]


def check_formula_pins(tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Entropy formulas reduce to their series coefficients on p*."""
    consts = compute_constants(tol)
    p_star = geometric_half()
    s1 = math.fsum(
        p * l * math.log2(l)
        for l, p in zip(p_star.lengths.tolist(), p_star.probs.tolist())
        if l > 1
    )
    out = []
    for d in (1e-2, 1e-3):
        resid = hatD_entropy_formula(p_star, d) - (d / 2.0) * s1 - consts.c3 * d * d
        gate = 5.0 * d**3 * math.log2(1.0 / d)
        out.append(_pin(f"modified-deletion entropy residual at d={d:g}",
                        resid, 0.0, gate))
    d = 1e-3
    out.append(_pin("segmentation-count entropy coefficient at d=1e-3",
                    k_entropy_formula(p_star, d), consts.c4 * d * d, 1e-3 * d * d))
    return out


def _brute_embedding_count(x: np.ndarray, y: np.ndarray) -> int:
    n, m = x.size, y.size
    if m == 0:
        return 1
    count = 0
    for keep in itertools.combinations(range(n), m):
        if np.array_equal(x[list(keep)], y):
            count += 1
    return count


def check_dp_oracle(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    """Embedding-count DP vs brute-force enumeration + normalization."""
    out = []

    # exhaustive over every (x, y) pair up to n = 6
    pairs = 0
    worst = 0.0
    ok = True
    for n in range(1, 7):
        for xv in itertools.product((0, 1), repeat=n):
            x = np.array(xv, dtype=np.uint8)
            for m in range(0, n + 1):
                for yv in itertools.product((0, 1), repeat=m):
                    y = np.array(yv, dtype=np.uint8)
                    brute = _brute_embedding_count(x, y)
                    got = embedding_count(x, y)
                    pairs += 1
                    if brute == 0:
                        ok = ok and got == float("-inf")
                    else:
                        err = abs(got - math.log2(brute))
                        worst = max(worst, err)
                        ok = ok and err <= 1e-12
    out.append(_flag(f"exhaustive DP equivalence ({pairs} pairs, n <= 6)", ok, worst))

    # random pairs up to n = 12
    rng = np.random.Generator(np.random.Philox(seed))
    ok = True
    worst = 0.0
    for _ in range(10_000):
        n = int(rng.integers(1, 13))
        m = int(rng.integers(0, n + 1))
        x = rng.integers(0, 2, size=n, dtype=np.uint8)
        y = rng.integers(0, 2, size=m, dtype=np.uint8)
        brute = _brute_embedding_count(x, y)
        got = embedding_count(x, y)
        if brute == 0:
            ok = ok and got == float("-inf")
        else:
            err = abs(got - math.log2(brute))
            worst = max(worst, err)
            ok = ok and err <= 1e-12
    out.append(_flag("random-pair DP equivalence (10000 pairs, n <= 12)", ok, worst))

    # sum over all outputs of the likelihood is exactly 1
    worst = 0.0
    for n in range(4, 13):
        for d in (0.1, 0.5, 0.9):
            for _ in range(100):
                x = rng.integers(0, 2, size=n, dtype=np.uint8)
                worst = max(worst, abs(total_probability(x, d) - 1.0))
    out.append(_pin("likelihood normalization max |sum - 1| (n=4..12)",
                    worst, 0.0, 1e-12))
    return out


def check_small_block_oracle(
    samples: int = 100_000, out_bits: int = 1_000_000, seed: int = DEFAULT_SEED
) -> list[CheckResult]:
    """Monte Carlo estimators vs exhaustive enumeration at n = 10."""
    spec = SourceSpec.bernoulli_half()
    n, d = 10, 0.1
    info = exact_block_information(spec, n, d)
    cond_target = (info.H_Y_given_X - binomial_length_entropy(n, d)) / n

    mean, se = estimate_h_cond(spec, d, n, samples, seed)
    out = [_pin("small-block conditional entropy vs enumeration (4 sigma)",
                mean, cond_target, 4.0 * se)]

    r = estimate_rate(spec, d, n=n, samples=samples, out_bits=out_bits, seed=seed)
    out.append(_pin("small-block rate vs enumeration (4 sigma)",
                    r.rate, info.I_n_per_bit, 4.0 * r.std_err))
    return out


def check_formula_vs_simulation(
    samples: int = 500, seed: int = DEFAULT_SEED
) -> list[CheckResult]:
    """MC conditional entropy vs the closed-form prediction at d=0.02."""
    d, n = 0.02, 2000
    consts = compute_constants(DEFAULT_TOL)
    spec = SourceSpec.dagger(d)

    mean, se = estimate_h_cond(spec, d, n, samples, seed)

    # empirical run law of the same source, on a stream disjoint from
    # the replica streams (distinct entropy family, not a spawn child)
    x = sample_sequence(spec, 10**6, np.random.SeedSequence([seed, 1]))
    q_hat = empirical_run_distribution(x).pmf
    predicted = hy_given_x_formula(q_hat, d, consts) - consts.c4 * d * d

    return [_pin("conditional entropy vs second-order formula",
                 mean, predicted, max(4.0 * se, 5e-4))]


def check_end_to_end_rate(
    samples: int = 500, out_bits: int = 10**7, seed: int = DEFAULT_SEED
) -> list[CheckResult]:
    """Full rate estimate for the tuned run law at d=0.05 vs the series."""
    d = 0.05
    r = estimate_rate(
        SourceSpec.dagger(d), d, n=2000, samples=samples, out_bits=out_bits,
        seed=seed,
    )
    return [_pin("end-to-end rate at d=0.05 vs capacity estimate",
                 r.rate, 0.7304, 0.005)]


def check_run_statistics(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    """Empirical run laws, super-run mean, and the reversal-rate bound."""
    out = []
    root = np.random.SeedSequence(seed)
    s_bern, s_dag, s_mask = root.spawn(3)

    x = sample_sequence(SourceSpec.bernoulli_half(), 10**6, s_bern)
    stats = empirical_run_distribution(x)
    worst = max(
        abs(stats.pmf.prob(l) - 2.0**-l) for l in range(1, 9)
    )
    out.append(_pin("uniform-input run law max |p_hat(l) - 2^-l|, l <= 8",
                    worst, 0.0, 0.005))

    supers = empirical_super_run_distribution(x)
    out.append(_pin("super-run mean length", supers.mu_tilde_hat, 4.0, 0.05))

    q = dagger_distribution(0.1)
    xd = sample_sequence(SourceSpec.renewal(q), 10**6, s_dag)
    sd = empirical_run_distribution(xd)
    worst = max(abs(sd.pmf.prob(l) - q.prob(l)) for l in range(1, 9))
    out.append(_pin("tuned run law max |p_hat(l) - q(l)|, l <= 8",
                    worst, 0.0, 0.01))

    d = 0.15
    real = transmit(x, d, s_mask)
    _, z = modified_mask(x, real.mask)
    lengths = run_lengths(x).astype(np.float64)
    bound = 2.0 * d**3 * float(np.mean(lengths**3))
    z_rate = float(z.sum()) / x.size
    out.append(
        _flag(f"reversal rate below 2 d^3 E[L^3] = {bound:.3e}",
              z_rate <= bound, z_rate)
    )
    return out


def check_determinism(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    """RateEstimate JSON is bit-identical across thread counts 1, 2, 8."""
    docs = [
        estimate_rate(
            SourceSpec.dagger(0.1), 0.1, n=200, samples=100, out_bits=200_000,
            threads=t, seed=seed,
        ).to_json()
        for t in (1, 2, 8)
    ]
    return [_flag("rate JSON identical for thread counts {1, 2, 8}",
                  docs[0] == docs[1] == docs[2])]


# --------------------------------------------------------------------------
# suite composition
# --------------------------------------------------------------------------

SUITES = ("constants", "dp", "formulas", "lemmas", "rates")

#: Budgets below these thresholds mark the rates suite "underpowered".
FULL_RATES_SAMPLES = 500
FULL_RATES_OUT_BITS = 10**7


def run_suite(
    suite: str,
    *,
    samples: "int | None" = None,
    out_bits: "int | None" = None,
    seed: int = DEFAULT_SEED,
) -> SuiteReport:
    """Run one verification suite and return its report.

    ``samples`` and ``out_bits`` override the Monte Carlo budgets of the
    ``rates`` suite only; budgets below the full defaults mark the
    report ``underpowered`` (the stated tolerances assume the full
    budget, so an underpowered run is advisory rather than a failure).
    """
    if suite == "constants":
        return SuiteReport(suite, check_series_constants() + check_capacity_table())
    if suite == "dp":
        return SuiteReport(suite, check_dp_oracle(seed))
    if suite == "formulas":
        report = SuiteReport(
            suite,
            check_markov_analytics() + check_formula_pins(),
            notes=[
                "the printed gap value 0.904 is inconsistent with the "
                "defining series, which gives 0.790197; the pin is "
                "reported without adjustment"
            ],
        )
        return report
    if suite == "lemmas":
        return SuiteReport(suite, check_run_statistics(seed))
    if suite == "rates":
        samples = FULL_RATES_SAMPLES if samples is None else samples
        out_bits = FULL_RATES_OUT_BITS if out_bits is None else out_bits
        underpowered = samples < FULL_RATES_SAMPLES or out_bits < FULL_RATES_OUT_BITS
        checks = (
            check_small_block_oracle(
                samples=min(samples * 200, 200_000),
                out_bits=max(50_000, out_bits // 10),
                seed=seed,
            )
            + check_formula_vs_simulation(samples=samples, seed=seed)
            + check_end_to_end_rate(samples=samples, out_bits=out_bits, seed=seed)
            + check_determinism(seed)
        )
        notes = []
        if underpowered:
            notes.append(
                "budget below the full verification sizes; tolerances are "
                "not guaranteed at this sample count"
            )
        return SuiteReport(suite, checks, underpowered=underpowered, notes=notes)
    raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
