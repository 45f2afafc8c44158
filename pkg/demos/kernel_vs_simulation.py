"""Compare the analytic first-seat win probability with a vectorized Monte Carlo run."""

import numpy as np

from contjack.engine import simulate_fixed_seating
from contjack.kernels import payoff_pure


def main(rounds: int = 200_000, seed: int = 11) -> None:
    opponents = [0.6, 0.75, 0.82]
    print(f"opponents play fixed thresholds {opponents}; {rounds} rounds per row")
    print(f"{'A':>5} {'analytic':>9} {'simulated':>10} {'z':>6}")
    for A in (0.5, 0.6, 0.7, 0.75, 0.8, 0.9):
        deciders = [lambda t, A=A: np.full_like(t, A)] + [lambda t, k=k: np.full_like(t, k) for k in opponents]
        batch = simulate_fixed_seating(seed, deciders, rounds)
        wins = batch.win_rewards()[:, 0]
        exact = payoff_pure(A, opponents)
        z = (wins.mean() - exact) / (wins.std(ddof=1) / np.sqrt(rounds))
        print(f"{A:5.2f} {exact:9.5f} {wins.mean():10.5f} {z:6.2f}")


if __name__ == "__main__":
    main()
