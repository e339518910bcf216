"""Resource budgets for enumeration oracles and elimination kernels.

The TORSIONLAB_BUDGET environment variable overrides the enumeration
budget globally; the per-call arguments override everything.
"""

import os

ENV_VAR = "TORSIONLAB_BUDGET"

DEFAULT_MAX_ENTRIES = 4_000_000
DEFAULT_ENUMERATION_BUDGET = 2_000_000


def enumeration_budget(override=None):
    """Budget for brute-force enumerations (supports, kernels, subsets)."""
    if override is not None:
        return int(override)
    env = os.environ.get(ENV_VAR)
    if env is not None and env.strip():
        return int(env)
    return DEFAULT_ENUMERATION_BUDGET


def entry_limit(override=None):
    """Largest sparse-entry count accepted by the elimination kernels."""
    if override is not None:
        return int(override)
    return DEFAULT_MAX_ENTRIES
