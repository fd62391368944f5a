"""Tests for the Monte Carlo rate estimators.

The load-bearing checks compare the estimators against the exact
small-block oracle: the replica statistic has expectation
``H(Y|X, M)/n`` exactly, and ``H(M)`` is a Binomial entropy independent
of the input law, so ``(H(Y|X) - H(M))/n`` from the exhaustive
enumeration is an exact target for any source kind.
"""

import json
import math
import warnings

import numpy as np
import pytest

from delchan.analytics import markov_rate_bound, optimal_markov_param
from delchan.estimation import (
    RateEstimate,
    estimate_h_cond,
    estimate_h_out_renewal,
    estimate_rate,
)
from delchan.likelihood import binomial_length_entropy, exact_block_information
from delchan.sources import SourceSpec, geometric_half, point_mass


def binary_entropy(p: float) -> float:
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def exact_h_cond_per_bit(spec: SourceSpec, n: int, d: float) -> float:
    """Exact ``H(Y|X, M)/n`` from the enumeration oracle.

    The output length M is Binomial(n, 1-d) independently of the input,
    so ``H(Y|X, M) = H(Y|X) - H(M)``.
    """
    info = exact_block_information(spec, n, d)
    return (info.H_Y_given_X - binomial_length_entropy(n, d)) / n


class TestEstimateHCond:
    def test_degenerate_d_is_analytic_zero(self):
        for d in (0.0, 1.0):
            assert estimate_h_cond(SourceSpec.bernoulli_half(), d, 20, 5, 1) == (
                0.0,
                0.0,
            )

    @pytest.mark.parametrize(
        "kwargs,msg",
        [
            (dict(d=0.1, n=20, samples=1), "at least 2 samples"),
            (dict(d=0.1, n=0, samples=10), "n must be"),
            (dict(d=-0.1, n=20, samples=10), "deletion probability"),
            (dict(d=1.5, n=20, samples=10), "deletion probability"),
            (dict(d=0.1, n=20, samples=10, threads=0), "threads"),
        ],
    )
    def test_validation(self, kwargs, msg):
        threads = kwargs.pop("threads", 1)
        with pytest.raises(ValueError, match=msg):
            estimate_h_cond(
                SourceSpec.bernoulli_half(),
                kwargs["d"],
                kwargs["n"],
                kwargs["samples"],
                7,
                threads=threads,
            )

    def test_matches_exact_oracle_bernoulli(self):
        target = exact_h_cond_per_bit(SourceSpec.bernoulli_half(), 8, 0.1)
        mean, se = estimate_h_cond(SourceSpec.bernoulli_half(), 0.1, 8, 20000, 123)
        assert se > 0.0
        assert abs(mean - target) <= 4.0 * se

    def test_matches_exact_oracle_markov(self):
        spec = SourceSpec.markov(0.7)
        target = exact_h_cond_per_bit(spec, 8, 0.2)
        mean, se = estimate_h_cond(spec, 0.2, 8, 20000, 321)
        assert abs(mean - target) <= 4.0 * se

    def test_matches_exact_oracle_renewal(self):
        spec = SourceSpec.renewal(geometric_half(16))
        target = exact_h_cond_per_bit(spec, 8, 0.15)
        mean, se = estimate_h_cond(spec, 0.15, 8, 20000, 777)
        assert abs(mean - target) <= 4.0 * se

    def test_long_block_bounded_by_binary_entropy(self):
        # the conditional entropy per bit never exceeds h(d)
        mean, _ = estimate_h_cond(SourceSpec.bernoulli_half(), 0.1, 2000, 50, 5)
        assert 0.0 <= mean <= binary_entropy(0.1)

    def test_thread_count_invariance(self):
        args = (SourceSpec.dagger(0.1), 0.1, 200, 64, 2718)
        assert estimate_h_cond(*args, threads=1) == estimate_h_cond(*args, threads=4)

    def test_seed_reproducible_and_sensitive(self):
        args = (SourceSpec.bernoulli_half(), 0.2, 100, 20)
        first = estimate_h_cond(*args, 42)
        assert first == estimate_h_cond(*args, 42)
        assert first != estimate_h_cond(*args, 43)

    def test_seed_sequence_accepted(self):
        args = (SourceSpec.bernoulli_half(), 0.2, 100, 20)
        assert estimate_h_cond(*args, 42) == estimate_h_cond(
            *args, np.random.SeedSequence(42)
        )

    def test_n_doubling_at_fixed_bit_budget(self):
        # fixed total bits: halving samples while doubling n moves the
        # estimate by less than twice the combined standard error (the
        # blocks must be long enough that O(1/n) edge effects sit well
        # inside the noise, hence n = 1000 rather than a toy size)
        spec = SourceSpec.bernoulli_half()
        m1, s1 = estimate_h_cond(spec, 0.1, 1000, 100, 42)
        m2, s2 = estimate_h_cond(spec, 0.1, 2000, 50, 42)
        assert abs(m1 - m2) <= 2.0 * math.hypot(s1, s2)


class TestEstimateHOutRenewal:
    def test_bernoulli_matches_iid_limit(self):
        # i.i.d. uniform input stays i.i.d. uniform after deletions
        h, se = estimate_h_out_renewal(SourceSpec.bernoulli_half(), 0.1, 200000, 7)
        assert 0.0 < se < 1e-3
        assert abs(h - 0.9) <= max(4.0 * se, 3e-4)

    def test_point_mass_no_deletions_zero_entropy(self):
        # deterministic run lengths at d=0: exactly one length observed
        h, se = estimate_h_out_renewal(
            SourceSpec.renewal(point_mass(3)), 0.0, 50000, 3
        )
        assert h == 0.0
        assert se == 0.0

    def test_geometric_no_deletions_unit_rate(self):
        h, se = estimate_h_out_renewal(
            SourceSpec.renewal(geometric_half()), 0.0, 200000, 11
        )
        assert abs(h - 1.0) <= max(4.0 * se, 1e-3)

    def test_miller_madow_adds_positive_correction(self):
        args = (SourceSpec.bernoulli_half(), 0.1, 100000, 19)
        plain, _ = estimate_h_out_renewal(*args)
        corrected, _ = estimate_h_out_renewal(*args, miller_madow=True)
        assert corrected > plain
        assert corrected - plain < 1e-3

    def test_markov_refused(self):
        with pytest.raises(ValueError, match="not a renewal"):
            estimate_h_out_renewal(SourceSpec.markov(0.6), 0.1, 1000, 1)

    def test_underpowered_budget_warns(self):
        with pytest.warns(UserWarning, match="underpowered"):
            estimate_h_out_renewal(SourceSpec.bernoulli_half(), 0.1, 3000, 2)

    def test_adequate_budget_does_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            estimate_h_out_renewal(SourceSpec.bernoulli_half(), 0.1, 200000, 7)

    def test_deterministic(self):
        args = (SourceSpec.renewal(geometric_half()), 0.2, 50000, 13)
        assert estimate_h_out_renewal(*args) == estimate_h_out_renewal(*args)

    def test_validation(self):
        with pytest.raises(ValueError, match="out_bits"):
            estimate_h_out_renewal(SourceSpec.bernoulli_half(), 0.1, 0, 1)
        with pytest.raises(ValueError, match="deletion probability"):
            estimate_h_out_renewal(SourceSpec.bernoulli_half(), 1.0, 1000, 1)


@pytest.fixture(scope="module")
def small_run():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return estimate_rate(
            SourceSpec.bernoulli_half(),
            0.1,
            n=50,
            samples=50,
            out_bits=20000,
            seed=99,
        )


class TestEstimateRate:
    def test_json_schema_and_key_order(self, small_run):
        doc = json.loads(small_run.to_json())
        assert list(doc) == [
            "rate",
            "h_out",
            "h_cond",
            "std_err",
            "n",
            "samples",
            "d",
            "seed",
            "mode",
        ]
        assert doc["rate"] == small_run.rate
        assert doc["n"] == 50 and doc["samples"] == 50
        assert doc["d"] == 0.1 and doc["seed"] == 99
        assert doc["mode"] == "exact-renewal"

    def test_rate_decomposition_and_invariants(self, small_run):
        r = small_run
        assert r.rate == r.h_out - r.h_cond
        assert r.std_err > 0.0
        assert 0.0 <= r.rate <= 1.0 + 3.0 * r.std_err

    def test_thread_count_determinism(self):
        docs = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for threads in (1, 2, 8):
                docs.append(
                    estimate_rate(
                        SourceSpec.dagger(0.1),
                        0.1,
                        n=64,
                        samples=40,
                        out_bits=20000,
                        threads=threads,
                        seed=4242,
                    ).to_json()
                )
        assert docs[0] == docs[1] == docs[2]

    def test_markov_labeled_upper_bound(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = estimate_rate(
                SourceSpec.markov(0.6), 0.1, n=50, samples=10, out_bits=30000, seed=5
            )
        assert r.mode == "upper-bound"
        assert json.loads(r.to_json())["mode"] == "upper-bound"

    def test_no_deletions_point_mass_rate_zero(self):
        r = estimate_rate(
            SourceSpec.renewal(point_mass(3)),
            0.0,
            n=60,
            samples=5,
            out_bits=50000,
            seed=3,
        )
        assert r.rate == 0.0 and r.h_out == 0.0 and r.h_cond == 0.0

    def test_no_deletions_bernoulli_unit_rate(self):
        r = estimate_rate(
            SourceSpec.bernoulli_half(),
            0.0,
            n=60,
            samples=5,
            out_bits=300000,
            seed=3,
        )
        assert r.h_cond == 0.0
        assert abs(r.rate - 1.0) <= max(4.0 * r.std_err, 1e-3)

    def test_small_block_matches_exact_information(self):
        # the exact oracle fixes both components at n = 10
        spec = SourceSpec.bernoulli_half()
        info = exact_block_information(spec, 10, 0.1)
        cond_target = exact_h_cond_per_bit(spec, 10, 0.1)

        mean, se = estimate_h_cond(spec, 0.1, 10, 20000, 808)
        assert abs(mean - cond_target) <= 4.0 * se

        r = estimate_rate(
            spec, 0.1, n=10, samples=20000, out_bits=200000, seed=808
        )
        assert abs(r.rate - info.I_n_per_bit) <= 4.0 * r.std_err

    @pytest.mark.parametrize("d", [0.05, 0.1])
    def test_tuned_run_law_beats_uniform_input(self, d):
        # the capacity-achieving run law must not lose to i.i.d. input
        common = dict(n=600, samples=400, out_bits=400000, seed=2024)
        uniform = estimate_rate(SourceSpec.bernoulli_half(), d, **common)
        tuned = estimate_rate(SourceSpec.dagger(d), d, **common)
        margin = 2.0 * math.hypot(uniform.std_err, tuned.std_err)
        assert tuned.rate >= uniform.rate - margin

    def test_markov_upper_bound_near_series_value(self):
        # dual route: simulated optimal-Markov rate vs the d^2 series
        d = 0.1
        spec = SourceSpec.markov(optimal_markov_param(d))
        r = estimate_rate(spec, d, n=600, samples=400, out_bits=400000, seed=31)
        assert r.mode == "upper-bound"
        assert abs(r.rate - markov_rate_bound(d)) <= 0.02

    def test_returns_rate_estimate_type(self, small_run):
        assert isinstance(small_run, RateEstimate)
