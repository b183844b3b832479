"""Stochastic thresholds, empirical confusion, closed-form population cells."""

from __future__ import annotations

import numpy as np
import pytest

from stochthresh import (
    Piece,
    RegressionFunctionSpec,
    ScoredSample,
    StochasticThreshold,
    classify_batch,
    classify_sample,
    empirical_confusion,
    estimate_margin_probability,
    population_confusion,
    population_confusion_parts,
)
from stochthresh.classify import as_sample_arrays
from stochthresh.errors import (
    DegenerateInputError,
    DomainError,
    ParameterDomainError,
)
from stochthresh.synth import exp1_problem, exp2_uci_problem


# ---------------------------------------------------------------------------
# classify_sample / classify_batch


def test_score_above_cut_is_positive():
    assert classify_sample(StochasticThreshold(0.5, 0.0), 0.6, 0.99) == 1


def test_zero_tie_probability_rejects_ties():
    assert classify_sample(StochasticThreshold(0.5, 0.0), 0.5, 0.0) == 0


def test_tie_accepted_when_draw_below_p():
    th = StochasticThreshold(0.3, 0.75)
    assert classify_sample(th, 0.3, 0.5) == 1
    # The draw comparison is strict, so draw == p rejects.
    assert classify_sample(th, 0.3, 0.75) == 0


def test_batch_agrees_with_scalar_rule(rng):
    th = StochasticThreshold(0.4, 0.3)
    scores = rng.integers(0, 5, size=200) / 4.0
    draws = rng.random(200)
    batch = classify_batch(th, scores, draws)
    for s, z, got in zip(scores, draws, batch):
        assert got == classify_sample(th, float(s), float(z))


def test_batch_missing_draws_means_zero_draw():
    th = StochasticThreshold(0.5, 1.0)
    out = classify_batch(th, [0.5, 0.4, 0.6])
    assert out.tolist() == [1, 0, 1]
    with pytest.raises(ParameterDomainError):
        classify_batch(th, [0.5, 0.4], [0.1])


def test_threshold_and_sample_validation():
    with pytest.raises(ParameterDomainError):
        StochasticThreshold(1.5, 0.0)
    with pytest.raises(ParameterDomainError):
        StochasticThreshold(0.5, -0.1)
    with pytest.raises(ParameterDomainError):
        ScoredSample(1.2, 1)
    with pytest.raises(ParameterDomainError):
        ScoredSample(0.5, 2)
    with pytest.raises(ParameterDomainError):
        ScoredSample(0.5, 1, draw=-0.5)
    with pytest.raises(ParameterDomainError):
        classify_sample(StochasticThreshold(0.5, 0.0), 1.5)


# ---------------------------------------------------------------------------
# as_sample_arrays


def test_sample_arrays_accepts_three_input_shapes():
    expected_scores = [0.2, 0.8]
    expected_labels = [0, 1]
    forms = (
        [ScoredSample(0.2, 0, 0.5), ScoredSample(0.8, 1, 0.25)],
        [(0.2, 0, 0.5), (0.8, 1, 0.25)],
        (np.array([0.2, 0.8]), np.array([0, 1]), np.array([0.5, 0.25])),
    )
    for form in forms:
        scores, labels, draws = as_sample_arrays(form)
        assert scores.tolist() == expected_scores
        assert labels.tolist() == expected_labels
        assert draws.tolist() == [0.5, 0.25]


def test_sample_arrays_validation():
    with pytest.raises(DegenerateInputError):
        as_sample_arrays([])
    with pytest.raises(ParameterDomainError):
        as_sample_arrays((np.array([0.1, 0.2]), np.array([0])))
    with pytest.raises(ParameterDomainError):
        as_sample_arrays([(0.1, 5)])
    with pytest.raises(ParameterDomainError):
        as_sample_arrays([(0.1, 0, 0.2, 0.9)])
    with pytest.raises(DegenerateInputError):
        as_sample_arrays((np.array([0.1]), np.array([0])), require_draws=True)


# ---------------------------------------------------------------------------
# empirical_confusion


def test_confusion_of_separating_threshold():
    c = empirical_confusion(StochasticThreshold(0.5, 0.0), [(0.9, 1, 0.0), (0.1, 0, 0.0)])
    assert (c.tn, c.fp, c.fn, c.tp) == (0.5, 0.0, 0.0, 0.5)


def test_confusion_of_classify_all_negative(rng):
    scores = rng.random(40)
    labels = rng.integers(0, 2, size=40)
    pos = labels.mean()
    c = empirical_confusion(StochasticThreshold(1.0, 0.0), (scores, labels, None))
    assert (c.tn, c.fn) == (1.0 - pos, pos)
    assert (c.fp, c.tp) == (0.0, 0.0)


def test_confusion_with_certain_tie_acceptance():
    c = empirical_confusion(StochasticThreshold(0.5, 1.0), [(0.5, 1, 0.3), (0.5, 0, 0.7)])
    assert (c.tp, c.fp) == (0.5, 0.5)
    assert (c.tn, c.fn) == (0.0, 0.0)


# ---------------------------------------------------------------------------
# RegressionFunctionSpec


def test_piece_and_spec_validation():
    with pytest.raises(ParameterDomainError):
        Piece(0.5, 0.5, 0.1, 0.2)
    with pytest.raises(ParameterDomainError):
        Piece(0.0, 1.0, -0.1, 0.5)
    with pytest.raises(ParameterDomainError):
        RegressionFunctionSpec()  # neither pieces nor atom
    with pytest.raises(ParameterDomainError):
        RegressionFunctionSpec(pieces=(Piece(0.0, 1.0, 0.5, 0.5),), atom=0.5)
    with pytest.raises(ParameterDomainError):
        RegressionFunctionSpec(pieces=(Piece(0.1, 1.0, 0.5, 0.5),))
    with pytest.raises(ParameterDomainError):
        RegressionFunctionSpec(
            pieces=(Piece(0.0, 0.4, 0.5, 0.5), Piece(0.5, 1.0, 0.5, 0.5))
        )
    with pytest.raises(ParameterDomainError):
        RegressionFunctionSpec(atom=1.5)


def test_evaluate_piecewise_and_atom():
    eta = exp1_problem().eta
    assert eta.evaluate(0.5) == 0.5
    assert eta.evaluate(0.1) == 0.0
    assert eta.evaluate(0.9) == 1.0
    assert eta.evaluate(1.0) == 1.0
    with pytest.raises(DomainError):
        eta.evaluate(1.5)

    atom = RegressionFunctionSpec(atom=0.7)
    assert atom.evaluate(0.0) == 0.7
    assert atom.knots() == (0.0,)
    with pytest.raises(DomainError):
        atom.evaluate(0.5)


def test_sup_and_shape_factor():
    eta = exp2_uci_problem(0.2).eta
    assert eta.r == 0.2
    assert eta.zeta(0.0) == pytest.approx(1.0)
    assert eta.zeta(1.0) == 0.0
    zero = RegressionFunctionSpec(pieces=(Piece(0.0, 1.0, 0.0, 0.0),))
    assert zero.r == 0.0
    with pytest.raises(DegenerateInputError):
        zero.zeta(0.5)


def test_plateau_values_are_exactly_preserved():
    eta = exp1_problem().eta
    xs = np.linspace(0.0, 1.0, 1001)
    vals = eta.evaluate(xs)
    assert set(np.unique(vals)) == {0.0, 0.5, 1.0}


# ---------------------------------------------------------------------------
# population confusion


def test_population_cells_of_three_plateau_function():
    eta = exp1_problem().eta
    for p in (0.0, 0.25, 0.5, 1.0):
        c = population_confusion(eta, StochasticThreshold(0.5, p))
        assert c.tp == pytest.approx(1 / 3 + p / 6, abs=1e-12)
        assert c.tn == pytest.approx(1 / 3 + (1 - p) / 6, abs=1e-12)
        assert c.fp == pytest.approx(p / 6, abs=1e-12)
        assert c.fn == pytest.approx((1 - p) / 6, abs=1e-12)
    c = population_confusion(eta, StochasticThreshold(0.5, 0.5))
    assert c.tp * c.tn == pytest.approx(25 / 144, abs=1e-12)


def test_population_cells_constant_function_all_negative():
    eta = RegressionFunctionSpec(pieces=(Piece(0.0, 1.0, 0.3, 0.3),))
    c = population_confusion(eta, StochasticThreshold(1.0, 0.0))
    assert c.tn == pytest.approx(0.7, abs=1e-12)
    assert c.fn == pytest.approx(0.3, abs=1e-12)


def test_population_cells_linear_ramp_crossing():
    # eta(x) = r(1-x) cut at r/2: the positive region is x < 1/2 and holds
    # mass 3r/8 (hand integration of the ramp).
    r = 0.5
    eta = exp2_uci_problem(r).eta
    c = population_confusion(eta, StochasticThreshold(r / 2, 0.0))
    assert c.tp == pytest.approx(3 * r / 8, abs=1e-12)
    # Quadrature cross-check on a grid that contains the crossing point.
    xs = np.linspace(0.0, 1.0, 10001)
    vals = r * (1.0 - xs)
    tp_quad = np.trapezoid(np.where(vals > r / 2, vals, 0.0), xs)
    assert c.tp == pytest.approx(tp_quad, abs=1e-4)


def test_population_cells_atom_cases():
    eta = RegressionFunctionSpec(atom=0.5)
    above = population_confusion(eta, StochasticThreshold(0.25, 0.0))
    assert (above.tp, above.fp) == (0.5, 0.5)
    below = population_confusion(eta, StochasticThreshold(0.75, 1.0))
    assert (below.fn, below.tn) == (0.5, 0.5)
    base, tie = population_confusion_parts(eta, 0.5)
    assert base == (0.5, 0.0, 0.5, 0.0)
    assert tie == (-0.5, 0.5, -0.5, 0.5)


def test_population_parts_reject_bad_threshold():
    with pytest.raises(ParameterDomainError):
        population_confusion_parts(exp1_problem().eta, 1.5)


# ---------------------------------------------------------------------------
# estimate_margin_probability


def test_margin_probability_small_cases():
    assert estimate_margin_probability([0.1, 0.5, 0.9], 0.5, 0.0) == pytest.approx(1 / 3)
    assert estimate_margin_probability([0.1, 0.5, 0.9], 0.5, 0.4) == 1.0


def test_margin_probability_uniform_scores(rng):
    scores = rng.random(100_000)
    assert estimate_margin_probability(scores, 0.5, 0.1) == pytest.approx(0.2, abs=0.01)


def test_margin_probability_validation():
    with pytest.raises(ParameterDomainError):
        estimate_margin_probability([0.5], 0.5, -0.1)
    with pytest.raises(DegenerateInputError):
        estimate_margin_probability([], 0.5, 0.1)
