import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpdfg import AggregationKind, DfgEdge, RiskParams
from dpdfg.risk import (
    UNBOUNDED,
    delta_from_epsilon_freq,
    delta_from_epsilon_time,
    dfg_delta,
    edge_epsilon_time,
    empirical_prior,
    epsilon_freq,
    epsilon_from_delta,
    posterior_bound,
    worst_case_delta_time,
    worst_case_prior,
)

# Closed forms evaluated independently at 30-digit precision (mpmath), frozen:
EPS_FREQ_04 = 1.69459572077440722  # -ln((0.3/0.7)*(1/0.7-1))
EPS_FREQ_01 = 0.40134139092430232  # -ln((0.45/0.55)*(1/0.55-1))
EPS_TIME_AC = 0.11364987281589501  # -ln(0.5*(1/(0.4+1/3)-1))/15
EPS_DEGEN_AD = 0.24208510296777246  # -ln((0.3/0.7)*(1/0.7-1))/7

AC = DfgEdge("A", "C", (1.0, 6.0, 15.0))


def test_worst_case_prior_examples():
    assert worst_case_prior(0.4) == pytest.approx(0.3)
    assert worst_case_prior(0.2) == pytest.approx(0.4)
    assert worst_case_prior(0.999999) == pytest.approx(0.0, abs=1e-6)


def test_worst_case_prior_domain():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            worst_case_prior(bad)


def test_empirical_prior_window_counts():
    assert empirical_prior([1, 6, 15], 6, 0.1, 15) == pytest.approx(1 / 3)
    assert empirical_prior([1, 6, 15], 1, 0.1, 15) == pytest.approx(1 / 3)
    assert empirical_prior([1, 6, 15], 15, 0.1, 15) == pytest.approx(1 / 3)
    # window +-7.5 around 6 covers everything but 15 is 9 away
    assert empirical_prior([1, 6, 15], 6, 0.5, 15) == pytest.approx(2 / 3)


def test_empirical_prior_full_precision_covers_all():
    for t in (1.0, 6.0, 15.0):
        assert empirical_prior([1, 6, 15], t, 1.0, 15) == 1.0


def test_empirical_prior_degenerate_range():
    with pytest.raises(ValueError, match="degenerate"):
        empirical_prior([0.0, 0.0], 0.0, 0.1, 0.0)


def test_epsilon_from_delta_paper_values():
    assert epsilon_from_delta(1 / 3, 0.4, 15) == pytest.approx(0.114, abs=1e-3)
    assert epsilon_from_delta(1 / 3, 0.4, 15) == pytest.approx(EPS_TIME_AC, rel=1e-12)
    assert epsilon_from_delta(0.3, 0.4, 1) == pytest.approx(1.695, abs=1e-3)
    assert epsilon_from_delta(0.3, 0.4, 1) == pytest.approx(EPS_FREQ_04, rel=1e-12)


def test_epsilon_from_delta_unbounded_branch():
    assert epsilon_from_delta(0.5, 0.5, 1) == UNBOUNDED
    assert epsilon_from_delta(0.7, 0.4, 2) == UNBOUNDED


def test_epsilon_from_delta_domain():
    with pytest.raises(ValueError):
        epsilon_from_delta(0.0, 0.4, 1)
    with pytest.raises(ValueError):
        epsilon_from_delta(1.0, 0.4, 1)
    with pytest.raises(ValueError):
        epsilon_from_delta(0.3, 0.4, 0.0)


def test_edge_epsilon_time_clinic_ac():
    result = edge_epsilon_time(AC, RiskParams(0.4, 0.1))
    assert result.priors == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert result.per_occurrence == pytest.approx((EPS_TIME_AC,) * 3)
    assert result.epsilon == pytest.approx(0.114, abs=1e-3)
    assert not result.degenerate


def test_edge_epsilon_time_is_min_over_occurrences():
    edge = DfgEdge("C", "D", (0.2, 0.25, 0.4, 1.5, 2.6, 3.65, 4.7, 6.0))
    result = edge_epsilon_time(edge, RiskParams(0.4, 0.1))
    assert result.epsilon == min(result.per_occurrence)


def test_edge_epsilon_time_single_occurrence_falls_back():
    result = edge_epsilon_time(DfgEdge("A", "D", (7.0,)), RiskParams(0.4, 0.1))
    assert result.degenerate
    assert result.priors == (0.3,)
    assert result.epsilon == pytest.approx(EPS_DEGEN_AD, rel=1e-12)


def test_edge_epsilon_time_zero_range_falls_back():
    result = edge_epsilon_time(DfgEdge("X", "Y", (0.0, 0.0)), RiskParams(0.4, 0.1))
    assert result.degenerate
    # range treated as one time unit
    assert result.epsilon == pytest.approx(EPS_FREQ_04, rel=1e-12)


def test_edge_epsilon_time_vacuous_delta_unbounded():
    result = edge_epsilon_time(AC, RiskParams(0.99, 0.1))
    assert all(e == UNBOUNDED for e in result.per_occurrence)
    assert result.epsilon == UNBOUNDED


def test_epsilon_freq_examples():
    assert epsilon_freq(0.4) == pytest.approx(1.695, abs=1e-3)
    assert epsilon_freq(0.1) == pytest.approx(EPS_FREQ_01, rel=1e-12)


def test_delta_from_epsilon_time_examples():
    assert delta_from_epsilon_time(1 / 3, 0.667, 15) == pytest.approx(0.666, abs=1e-3)
    assert delta_from_epsilon_time(1.0, 3.0, 5.0) == 0.0
    assert delta_from_epsilon_time(0.4, 1e-12, 5.0) == pytest.approx(0.0, abs=1e-9)


def test_delta_from_epsilon_time_handles_unbounded():
    prior = 0.75
    assert delta_from_epsilon_time(prior, UNBOUNDED, 3.0) == pytest.approx(1 - prior)


def test_delta_from_epsilon_freq_examples():
    assert delta_from_epsilon_freq(3.329) == pytest.approx(0.682, abs=1e-3)
    assert delta_from_epsilon_freq(9.986) == pytest.approx(0.986, abs=1e-3)
    assert delta_from_epsilon_freq(1e-12) == pytest.approx(0.0, abs=1e-9)


def test_dfg_delta_is_max():
    # per-edge maxima of the published occurrence risks at a 0.3 error target
    per_edge = {
        ("--", "A"): 0.909,
        ("A", "B"): 0.799,
        ("A", "C"): 0.667,
        ("A", "D"): 0.342,
        ("B", "C"): 0.799,
        ("C", "D"): 0.875,
        ("D", "--"): 0.889,
        ("A", "--"): 0.499,
    }
    assert dfg_delta(per_edge) == pytest.approx(0.909)
    assert round(dfg_delta(per_edge), 1) == 0.9
    assert dfg_delta({"x": 0.25, "y": 0.25}) == 0.25
    with pytest.raises(ValueError):
        dfg_delta({})


def test_dfg_delta_frequency_table():
    frequencies = {"a": 11, "b": 5, "c": 3, "d": 1, "e": 5, "f": 8, "g": 9, "h": 2}
    deltas = {
        k: delta_from_epsilon_freq(math.log(20.0) / (0.3 * n)) for k, n in frequencies.items()
    }
    assert dfg_delta(deltas) == pytest.approx(0.986, abs=1e-3)


def test_posterior_bound_examples():
    eps = epsilon_freq(0.4)
    assert posterior_bound(0.3, eps, 1.0) == pytest.approx(0.7, abs=1e-3)
    assert posterior_bound(0.3, 1e-12, 1.0) == pytest.approx(0.3, abs=1e-9)


@given(
    prior=st.floats(0.01, 0.99),
    epsilon=st.floats(1e-3, 20.0),
    r=st.floats(1e-2, 100.0),
)
def test_posterior_minus_prior_is_advantage(prior, epsilon, r):
    lhs = posterior_bound(prior, epsilon, r) - prior
    rhs = delta_from_epsilon_time(prior, epsilon, r)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


@given(
    prior=st.floats(0.001, 0.999),
    frac=st.floats(0.001, 0.999),
    r=st.floats(1e-3, 1e3),
)
@settings(max_examples=300)
def test_round_trip_time_path(prior, frac, r):
    delta = frac * (1.0 - prior)
    eps = epsilon_from_delta(prior, delta, r)
    assert eps > 0
    assert delta_from_epsilon_time(prior, eps, r) == pytest.approx(delta, rel=1e-9)


@given(delta=st.floats(0.001, 0.999))
@settings(max_examples=300)
def test_round_trip_frequency_path(delta):
    assert delta_from_epsilon_freq(epsilon_freq(delta)) == pytest.approx(delta, rel=1e-9)


@given(prior=st.floats(0.05, 0.9), r=st.floats(0.1, 50.0))
def test_epsilon_strictly_increasing_in_delta(prior, r):
    deltas = [d for d in (0.05, 0.1, 0.2, 0.4, 0.6, 0.8) if d + prior < 1.0]
    eps = [epsilon_from_delta(prior, d, r) for d in deltas]
    assert all(a < b for a, b in zip(eps, eps[1:]))


# epsilon*r is kept below ~25 in the strictness/range properties: beyond
# that exp(-eps*r) drops under one ulp of the denominator and the advantage
# saturates at exactly 1-prior in float arithmetic.
@given(prior=st.floats(0.05, 0.95), r=st.floats(0.1, 4.0))
def test_delta_strictly_increasing_in_epsilon_and_range(prior, r):
    eps_grid = (0.01, 0.1, 1.0, 5.0)
    deltas = [delta_from_epsilon_time(prior, e, r) for e in eps_grid]
    assert all(a < b for a, b in zip(deltas, deltas[1:]))
    by_range = [delta_from_epsilon_time(prior, 0.5, rr) for rr in (0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(by_range, by_range[1:]))
    freq = [delta_from_epsilon_freq(e) for e in eps_grid]
    assert all(a < b for a, b in zip(freq, freq[1:]))


@given(
    prior=st.floats(0.001, 0.999),
    frac=st.floats(0.001, 0.999),
    r=st.floats(1e-2, 3.0),
    epsilon=st.floats(1e-3, 8.0),
)
def test_delta_ranges(prior, frac, r, epsilon):
    time_delta = delta_from_epsilon_time(prior, epsilon, r)
    assert 0.0 < time_delta < 1.0 - prior
    assert 0.0 < delta_from_epsilon_freq(epsilon) < 1.0


def test_worst_case_prior_minimizes_epsilon_fine_grid():
    for delta in (0.1, 0.4, 0.7):
        best = epsilon_from_delta(worst_case_prior(delta), delta, 1.0)
        grid = [k * 1e-3 for k in range(1, int((1.0 - delta) * 1000))]
        assert all(best <= epsilon_from_delta(p, delta, 1.0) + 1e-12 for p in grid)


def test_worst_case_delta_time_maximizes_over_priors():
    eps, r = 0.8, 5.0
    peak = worst_case_delta_time(eps, r)
    grid = [k * 1e-3 for k in range(1, 1000)]
    assert all(delta_from_epsilon_time(p, eps, r) <= peak + 1e-12 for p in grid)


def test_risk_params_validation():
    with pytest.raises(ValueError):
        RiskParams(0.0)
    with pytest.raises(ValueError):
        RiskParams(1.0)
    with pytest.raises(ValueError):
        RiskParams(0.4, precision=1.5)


def test_edge_epsilon_time_kind_range():
    eps_max = edge_epsilon_time(AC, RiskParams(0.4, 0.1), AggregationKind.MAX)
    eps_sum = edge_epsilon_time(AC, RiskParams(0.4, 0.1), AggregationKind.SUM)
    assert eps_max.epsilon == eps_sum.epsilon  # range is the max duration either way
