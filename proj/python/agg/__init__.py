"""Action-graph game payoff Jacobians and equilibrium continuation."""

import json

from ._core import (
    CapExceeded,
    FormatError,
    Game,
    GameError,
    PathFailure,
    brute_jacobian,
    class_size,
    coordination,
    count_projected_distributions,
    encode_normal_form,
    expected_payoffs,
    ice_cream,
    jacobian,
    jacobian_symmetric,
    load_game,
    matching_pennies,
    project_to_simplex,
    random_game,
    retract,
    rock_paper_scissors,
    shared_coordination,
    solve,
    verify_nash,
)
from ._core import game_from_json as _game_from_json


def game_from_json(document):
    """Build a game from a JSON string or an already-parsed dict."""
    if not isinstance(document, str):
        document = json.dumps(document)
    return _game_from_json(document)


def game_to_dict(game):
    return json.loads(game.to_json())


__all__ = [name for name in dir() if not name.startswith("_")]
