"""Let the profile learner play against three adaptive-threshold opponents and watch it approach the best response."""

import numpy as np

from contjack.engine import run_tournament
from contjack.equilibrium import adaptive_lineup_reward, best_response_adaptive_thresholds
from contjack.kernels import EnvelopeFunction, bust_probability
from contjack.strategies import AdaptiveThreshold, ModelFreeStrategy


def main(rounds: int = 200_000, seed: int = 3) -> None:
    a = [0.55, 0.7, 0.85]
    learner = ModelFreeStrategy(m=128)
    result = run_tournament([AdaptiveThreshold(x) for x in a] + [learner], rounds, seed)
    target = adaptive_lineup_reward(a)
    print(f"opponents: adaptive thresholds {a}")
    print(f"first-seat best response {best_response_adaptive_thresholds(a):.4f}; exact lineup reward {target:.4f}")
    block = rounds // 10
    for i in range(10):
        chunk = result.rewards[i * block : (i + 1) * block, 3]
        print(f"rounds {i * block:>7}-{(i + 1) * block:<7} learner mean reward {chunk.mean():.4f}")
    # seat 1 of 4: the 0.85 player acts with two players still to come
    learned, visits = learner.model.values(2, 1), learner.model.visits(2, 1)
    truth = EnvelopeFunction.from_function(lambda t: bust_probability(max(t, 0.85)), learner.model.m).values
    seen = visits >= 100
    print(f"learned bust curve of the 0.85 player: {seen.sum()} buckets with >= 100 visits, "
          f"max error {np.max(np.abs(learned - truth)[seen]):.3f}")


if __name__ == "__main__":
    main()
