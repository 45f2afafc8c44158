"""Run an epsilon-greedy bandit against equilibrium players and report the scale metric."""

from contjack.benchmarking import ExperimentSpec, run_experiment


def main(rounds: int = 100_000) -> None:
    spec = ExperimentSpec(
        [{"kind": "bandit", "n_arms": 32}, {"kind": "nash"}, {"kind": "nash"}, {"kind": "nash"}],
        rounds=rounds,
        seeds=[1, 2],
    )
    for run in run_experiment(spec).runs:
        print(f"seed {run.seed}, window {run.report.window}")
        for row in run.report.players:
            print(f"  player {row.player_id} {row.name:>8}: mean reward {row.mean_reward:.4f}, s = {row.s:.3f}")
    print("s = n * reward; 1.0 means a fair share at a 4-player table.")


if __name__ == "__main__":
    main()
