"""
Central catalog of the batch commands exposed by the CLI.

This is the single source of truth for command names and their help text.
When adding a new subcommand, add it to COMMAND_CATALOG here and register it
in cli.setup_registry; validate_catalog.py checks the two stay in sync.
"""

from typing import Dict, List


COMMAND_CATALOG: List[Dict[str, str]] = [
    # Simulation
    {
        "name": "simulate",
        "description": "Simulate a path from a model-spec file and write it as CSV (copula scale, plus margin scale when the spec has a margin).",
    },
    # Estimation
    {
        "name": "fit",
        "description": "Fit a kpacf-parameterized copula process (and margin) to a single-column CSV; writes the fit report, residuals and semi-empirical kpacf.",
    },
    # Diagnostics & experiments
    {
        "name": "experiment",
        "description": "Run the causal-filter convergence experiment for every copula family listed in the spec; one CSV of (k, value, ultimate) per family.",
    },
    {
        "name": "residual-qq",
        "description": "Write normal QQ-plot data (theoretical quantile, sorted residual) from a fit report.",
    },
    {
        "name": "kpacf",
        "description": "Print the table of Kendall partial autocorrelations implied by a spec.",
    },
    {
        "name": "compare",
        "description": "Print an AIC comparison table for several fit reports.",
    },
]


def get_catalog_help_text() -> str:
    """
    Returns a human-readable list of commands and descriptions for the CLI epilog.
    """
    lines = ["Available commands:"]
    for command in COMMAND_CATALOG:
        lines.append(f"  {command['name']}: {command['description']}")
    return "\n".join(lines)


def get_all_command_names() -> List[str]:
    """Return a list of all command names in the catalog."""
    return [c["name"] for c in COMMAND_CATALOG]


def get_command_description(command_name: str) -> str:
    """Get the description for a specific command by name."""
    for command in COMMAND_CATALOG:
        if command["name"] == command_name:
            return command["description"]
    return ""


def validate_command_name(command_name: str) -> bool:
    """Check if a command name exists in the catalog."""
    return command_name in get_all_command_names()
