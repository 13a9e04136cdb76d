"""Hand-built games shared by several test modules."""

from noregret_stackelberg import GameSpec


def ce2_two_actions():
    """Second coordination counterexample with a second optimizer action F.

    Under E the game is unchanged; under F the learners anti-coordinate and
    the optimizer's gains and losses are reversed.
    """
    # flat order (a1, a2, a3), a3 fastest: (T,L,E), (T,L,F), (T,R,E), ...
    learner = [1, 0, 0, 1, 0, 1, 1, 0]
    optimizer = [0, 1, 1, -1, -1, 1, 0, 0]
    return GameSpec.from_flat(
        [["T", "B"], ["L", "R"], ["E", "F"]],
        [learner, learner, optimizer],
    )
