import json
import math

import numpy as np
import pytest

import agg


def test_pennies_solve():
    game = agg.matching_pennies()
    result = agg.solve(game)
    for s in result["strategies"]:
        assert s == pytest.approx([0.5, 0.5], abs=1e-4)
    assert agg.verify_nash(game, result["strategies"])["max_regret"] <= 1e-6


def test_symmetric_rps():
    game = agg.rock_paper_scissors(3)
    result = agg.solve(game, symmetric=True)
    assert result["mode"] == "symmetric"
    assert result["strategies"][0] == pytest.approx([1 / 3] * 3, abs=1e-4)


def test_jacobians_agree():
    game = agg.random_game(agents=3, actions=4, max_in_degree=2, seed=3)
    rng = np.random.default_rng(0)
    profile = [list(rng.dirichlet(np.ones(len(s)))) for s in game.action_sets]
    brute = agg.brute_jacobian(game, profile)
    for method in ("naive", "projected", "partitioned"):
        J = agg.jacobian(game, profile, method=method)
        assert J["method"] == method
        np.testing.assert_allclose(J["values"], brute, atol=1e-10)


def test_symmetric_jacobian_block():
    game = agg.ice_cream(agents=3, locations=2, shared=True)
    sigma = [0.1, 0.2, 0.3, 0.4]
    sym = agg.jacobian_symmetric(game, sigma)["values"]
    full = agg.brute_jacobian(game, [sigma] * 3)
    np.testing.assert_allclose(full[0:4, 4:8], sym, atol=1e-10)


def test_json_round_trip():
    game = agg.ice_cream(agents=3, locations=4, chocolate=2)
    doc = agg.game_to_dict(game)
    assert doc["utility"]["kind"] == "linear"
    again = agg.game_from_json(doc)
    assert again.to_json() == game.to_json()
    assert agg.game_from_json(json.dumps(doc)).num_actions == 8


def test_errors_and_helpers():
    with pytest.raises(ValueError):
        agg.jacobian_symmetric(agg.ice_cream(agents=3, chocolate=1), [0.25] * 4)
    with pytest.raises(ValueError):
        agg.game_from_json("{}")
    assert agg.class_size([20, 20, 20]) == math.factorial(60) // math.factorial(20) ** 3
    assert agg.count_projected_distributions(5, 4) == 56
    np.testing.assert_allclose(agg.retract(np.array([0.5, 0.7]), [2]), [0.4, 0.6])
