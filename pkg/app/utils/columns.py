class Columns:
    class Trials:
        ORDER = [
            "trial",
            "seed",
            "mechanism",
            "adversary",
            "k",
            "alpha",
            "delta",
            "n_items",
            "max_rel_error",
            "failed",
            "total_words",
            "rounds",
        ]

    class Sweep:
        ORDER = ["k", "alpha", "mechanism", "mean_total_words", "failure_fraction"]

    class Audit:
        ORDER = ["event", "count_D", "count_D_prime", "log_ratio", "ci", "verdict"]


class Paths:
    TRIALS_CSV = "trials.csv"
    RUN_SUMMARY = "summary.json"
    SWEEP_CSV = "sweep.csv"
    SWEEP_SUMMARY = "sweep_summary.json"
    AUDIT_REPORT = "audit.txt"
