"""Python access to the conecalc core.

The native module covers cone membership and duality, Riesz characteristics,
Riesz kernels and Dirichlet solves. ``run_cli`` shells out to the command-line
tool for everything else.
"""

import json
import os
import subprocess

from ._core import (
    Cone,
    ConsistencyError,
    DomainError,
    ParseError,
    UnsupportedPolarError,
    check_relation,
    eigenvalues,
    kernel_hessian,
    kernel_value,
    partial_sum,
    read_grid,
)
from ._core import solve_json as _solve_json

__all__ = [
    "Cone",
    "ConsistencyError",
    "DomainError",
    "ParseError",
    "UnsupportedPolarError",
    "check_relation",
    "eigenvalues",
    "kernel_hessian",
    "kernel_value",
    "partial_sum",
    "read_grid",
    "run_cli",
    "solve",
]


def solve(config, base="."):
    """Solve a problem given as a dict or JSON string. Returns (values, report)."""
    text = config if isinstance(config, str) else json.dumps(config)
    values, report = _solve_json(text, str(base))
    return values, json.loads(report)


def run_cli(*args, binary=None):
    """Run the conecalc binary and return (exit code, parsed stdout or None)."""
    exe = binary or os.environ.get("CONECALC_CLI", "conecalc")
    proc = subprocess.run([exe, *map(str, args)], capture_output=True, text=True)
    try:
        payload = json.loads(proc.stdout) if proc.stdout.strip() else None
    except json.JSONDecodeError:
        payload = None
    return proc.returncode, payload
