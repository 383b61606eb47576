"""
Configuration for the Heegner point existence engine.

Static tunables shared by the library and the command line. Runtime overrides
(budgets, worker counts, verbosity) are layered on top by heegner_config.py.
"""

# p-adic brute-force oracle limits
ORACLE = {
    "max_prime": 5,
    "search_budget": 20_000_000,  # lifting-tree nodes per existence search
    "count_budget": 400_000,      # nodes per orbit count
    "count_max_level": 6,         # deepest prefix level used for orbit counting
    "precision_slack": 0,         # added to k = n + 2m + 2
    "max_m": 3,
    "max_n_division": 5,
    "max_n_matrix": 4,
}

# Largest conductor exponent admitted for a local representation at p
ADMISSIBLE_EXPONENTS = {
    2: 8,
    3: 5,
    "default": 2,
}

# Level / conductor escalation
ENGINE = {
    "division_scan_slack": 4,    # n' is scanned up to n + 2m + slack
    "abelian_m_scan": 16,        # extra conductor exponents tried in abelian mode
}

# Binary quadratic form enumeration
CLASS_NUMBER = {
    "max_fundamental_discriminant": 10**11,
    "max_conductor": 10**12,
}

# The CLI factors N itself up to this bound
FACTOR_LIMIT = 10**12

# Batch ingestion
BATCH = {
    "max_workers": 4,
    "rep_separator": ";",
    "required_columns": ("label", "N"),
}

# Process exit codes
EXIT_CODES = {
    "exists": 0,
    "input_error": 1,
    "not_exists": 2,
    "undetermined": 3,
}

# JSON wire format
SCHEMA_VERSION = "1"
