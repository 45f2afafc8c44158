"""Print the equilibrium, simple-upper and rational-upper threshold tables side by side."""

from contjack.equilibrium import nash_thresholds, rational_upper_bound, simple_threshold_upper_bound


def main(n_max: int = 14) -> None:
    alpha = nash_thresholds(n_max)
    beta = simple_threshold_upper_bound(n_max)
    gamma = rational_upper_bound(n_max)
    print(f"{'n':>3} {'alpha':>10} {'beta':>10} {'gamma':>10}")
    for n in range(1, n_max + 1):
        print(f"{n:>3} {alpha[n]:10.6f} {beta[n]:10.6f} {gamma[n]:10.6f}")
    print("\nalpha_n is where a player facing n opponents who all play alpha_n should stop.")
    print("gamma_n caps what any rational player ever uses, whatever the opponents do.")


if __name__ == "__main__":
    main()
