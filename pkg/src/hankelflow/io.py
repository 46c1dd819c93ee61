"""File formats: data vectors, JSON solutions, TSV tables.

Data vectors are one entry per line; complex entries use the "a+bi" form and
missing entries are the single character "?".  Solutions round-trip through
JSON exactly (floats are serialized with full precision; complex values as
[re, im] pairs).
"""

from __future__ import annotations

import json

import numpy as np

from .driver import Solution
from .exceptions import HankelFlowError


class ParseError(HankelFlowError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def parse_scalar(text: str, line: int | None = None) -> complex | float:
    """Parse one vector entry: real literal, "a+bi" complex, or "?" (NaN)."""
    token = text.strip().replace(" ", "")
    if not token:
        raise ParseError("empty entry", line)
    if token == "?":
        return float("nan")
    try:
        if token.endswith("i") or token.endswith("j"):
            return complex(token[:-1] + "j")
        return float(token)
    except ValueError as exc:
        raise ParseError(f"cannot parse {text.strip()!r} as a number", line) from exc


def read_vector(path) -> np.ndarray:
    """Read a data vector; missing entries come back as NaN."""
    entries = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            entries.append(parse_scalar(stripped, lineno))
    if not entries:
        raise ParseError(f"no entries found in {path}")
    if any(isinstance(e, complex) for e in entries):
        return np.array([complex(e) for e in entries], dtype=complex)
    return np.array(entries, dtype=float)


def format_scalar(value) -> str:
    if np.iscomplexobj(np.asarray(value)) or isinstance(value, complex):
        value = complex(value)
        sign = "+" if value.imag >= 0 else "-"
        return f"{value.real!r}{sign}{abs(value.imag)!r}i"
    return repr(float(value))


def write_vector(path, p) -> None:
    with open(path, "w") as fh:
        for entry in np.asarray(p):
            fh.write(format_scalar(entry) + "\n")


def _encode_array(arr: np.ndarray):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        return {"dtype": "complex", "values": [[float(x.real), float(x.imag)] for x in arr]}
    return {"dtype": "real", "values": [float(x) for x in arr]}


def _decode_array(obj) -> np.ndarray:
    if obj["dtype"] == "complex":
        return np.array([complex(re_, im) for re_, im in obj["values"]], dtype=complex)
    return np.array(obj["values"], dtype=float)


def solution_to_dict(solution: Solution) -> dict:
    return {
        "p_tilde": _encode_array(solution.p_tilde),
        "epsilon_star": solution.epsilon_star,
        "sigma_final": solution.sigma_final,
        "distance": solution.distance,
        "kernel_left": _encode_array(solution.kernel_left),
        "kernel_right": _encode_array(solution.kernel_right),
        "trace": [[float(e), float(s)] for e, s in solution.trace],
        "converged": solution.converged,
        "outer_iterations": solution.outer_iterations,
        "notes": list(solution.notes),
    }


def solution_from_dict(data: dict) -> Solution:
    return Solution(
        p_tilde=_decode_array(data["p_tilde"]),
        epsilon_star=float(data["epsilon_star"]),
        sigma_final=float(data["sigma_final"]),
        distance=float(data["distance"]),
        kernel_left=_decode_array(data["kernel_left"]),
        kernel_right=_decode_array(data["kernel_right"]),
        trace=[(float(e), float(s)) for e, s in data["trace"]],
        converged=bool(data["converged"]),
        outer_iterations=int(data["outer_iterations"]),
        notes=list(data["notes"]),
    )


def solutions_equal(a: Solution, b: Solution) -> bool:
    return (
        np.array_equal(a.p_tilde, b.p_tilde)
        and a.epsilon_star == b.epsilon_star
        and a.sigma_final == b.sigma_final
        and a.distance == b.distance
        and np.array_equal(a.kernel_left, b.kernel_left)
        and np.array_equal(a.kernel_right, b.kernel_right)
        and a.trace == b.trace
        and a.converged == b.converged
        and a.outer_iterations == b.outer_iterations
        and a.notes == b.notes
    )


def write_solution_json(path, solution: Solution) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_dict(solution), fh, indent=2)
        fh.write("\n")


def read_solution_json(path) -> Solution:
    with open(path) as fh:
        return solution_from_dict(json.load(fh))


def write_tsv(path, header, rows) -> None:
    """Plot-ready TSV table; floats are written with full precision."""
    with open(path, "w") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")
