"""
Problem instances, schedules and TSPLIB ingestion.

An ``Instance`` holds the k×k setup-time matrix s_vu of the single-machine
problem 1|s_vu|C_max.  Optimizing C_max is the same as finding a shortest
Hamiltonian path over that matrix, because C_max = s(π) + Σ p_v and the sum of
durations is a constant.  All optimization therefore works on

    s(π) = Σ_{i=1}^{k-1} setup[π_{i-1}][π_i]

Only the EXPLICIT / FULL_MATRIX flavour of TSPLIB is accepted; any other
edge-weight format is rejected with ``UnsupportedFormatError``.

Jobs are 0-based internally.  ``format_order`` / ``parse_order`` convert to and
from the 1-based notation used in reports and parent files.
"""

import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from app.scheduling.errors import (
    ContractViolation,
    InvalidWeightError,
    MalformedHeaderError,
    NegativeWeightError,
    TokenCountError,
    UnsupportedFormatError,
)

logger = logging.getLogger(__name__)

Cost = int | float

_INT_TOKEN = re.compile(r"[+-]?\d+")
_SUPPORTED_TYPES = frozenset(["ATSP", "TSP"])


# ── Domain types ──────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable problem instance; safe to share between concurrent runs."""

    name: str
    setup: np.ndarray
    durations: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        setup = np.array(self.setup, copy=True)
        if setup.ndim != 2 or setup.shape[0] != setup.shape[1]:
            raise ContractViolation(f"setup must be a square matrix, got {setup.shape}")
        k = setup.shape[0]
        if k < 2:
            raise ContractViolation(f"an instance needs at least 2 jobs, got {k}")
        if not np.issubdtype(setup.dtype, np.integer):
            setup = setup.astype(np.float64)
        off_diagonal = setup[~np.eye(k, dtype=bool)]
        if not np.all(np.isfinite(off_diagonal)):
            raise ContractViolation("setup times must be finite")
        if np.any(off_diagonal < 0):
            raise ContractViolation("setup times must be nonnegative")
        if self.durations is not None:
            if len(self.durations) != k:
                raise ContractViolation(
                    f"expected {k} durations, got {len(self.durations)}"
                )
            if any(not p > 0 for p in self.durations):
                raise ContractViolation("durations must be positive")
            object.__setattr__(self, "durations", tuple(self.durations))
        setup.setflags(write=False)
        object.__setattr__(self, "setup", setup)

    @property
    def k(self) -> int:
        return int(self.setup.shape[0])

    @property
    def is_integral(self) -> bool:
        return bool(np.issubdtype(self.setup.dtype, np.integer))

    @cached_property
    def rows(self) -> list[list[Cost]]:
        """The setup matrix as nested Python lists, for scalar-heavy loops."""
        return self.setup.tolist()


@dataclass(frozen=True)
class Schedule:
    """A job order together with its cached setup cost s(π)."""

    order: tuple[int, ...]
    cost: Cost

    @classmethod
    def of(cls, inst: Instance, order: Sequence[int]) -> "Schedule":
        order = tuple(int(v) for v in order)
        return cls(order=order, cost=evaluate_cost(inst, order))

    def verify(self, inst: Instance) -> bool:
        """Recompute the cost from scratch and compare with the cached one."""
        return evaluate_cost(inst, self.order) == self.cost


# ── Objective ─────────────────────────────────────────────────────────────────


def check_permutation(order: Sequence[int], k: int) -> None:
    if len(order) != k or set(order) != set(range(k)):
        raise ContractViolation(f"order is not a permutation of 0..{k - 1}")


def evaluate_cost(inst: Instance, order: Sequence[int]) -> Cost:
    """Path cost s(π): the sum of the k-1 consecutive setup entries."""
    check_permutation(order, inst.k)
    idx = np.asarray(order, dtype=np.intp)
    total = inst.setup[idx[:-1], idx[1:]].sum()
    return int(total) if inst.is_integral else float(total)


def makespan(inst: Instance, order: Sequence[int]) -> Cost:
    """C_max of the order: s(π) plus the total processing time."""
    if inst.durations is None:
        raise ContractViolation(f"instance {inst.name} has no job durations")
    return evaluate_cost(inst, order) + sum(inst.durations)


def format_order(order: Sequence[int]) -> str:
    """Render a 0-based order in the 1-based notation used by reports."""
    return " ".join(str(v + 1) for v in order)


def parse_order(tokens: Sequence[str], k: int) -> tuple[int, ...]:
    """Parse 1-based job numbers into a validated 0-based order."""
    try:
        order = tuple(int(t) - 1 for t in tokens)
    except ValueError as exc:
        raise ContractViolation(f"job numbers must be integers: {exc}") from exc
    check_permutation(order, k)
    return order


# ── TSPLIB reader / writer ────────────────────────────────────────────────────


def _split_header(line: str, lineno: int) -> tuple[str, str]:
    if ":" in line:
        key, value = line.split(":", 1)
        return key.strip().upper(), value.strip()
    parts = line.split(None, 1)
    key = parts[0].upper()
    if key.endswith("_SECTION") or key == "EOF":
        return key, parts[1].strip() if len(parts) > 1 else ""
    raise MalformedHeaderError(f"expected 'KEY : VALUE', got {line!r}", line=lineno)


def _is_section_end(token: str) -> bool:
    upper = token.upper()
    return upper == "EOF" or upper.endswith("_SECTION")


def parse_tsplib(raw: bytes | str | BinaryIO) -> Instance:
    """
    Parse a TSPLIB ATSP/TSP file with an EXPLICIT FULL_MATRIX edge section.

    Weight tokens may be split across lines arbitrarily.  The matrix is stored
    as int64 when every token is an integer, float64 otherwise.
    """
    if hasattr(raw, "read"):
        raw = raw.read()
    text = raw.decode("utf-8", errors="replace") if isinstance(raw, bytes) else raw
    lines = text.splitlines()

    header: dict[str, tuple[str, int]] = {}
    section_line: int | None = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        key, value = _split_header(line.strip(), lineno)
        if key == "EDGE_WEIGHT_SECTION":
            section_line = lineno
            break
        if key == "EOF" or key.endswith("_SECTION"):
            break
        header[key] = (value, lineno)

    if "DIMENSION" not in header:
        raise MalformedHeaderError("missing DIMENSION", field="DIMENSION")
    dim_value, dim_line = header["DIMENSION"]
    try:
        k = int(dim_value)
    except ValueError:
        raise MalformedHeaderError(
            f"DIMENSION is not an integer: {dim_value!r}", field="DIMENSION", line=dim_line
        ) from None
    if k < 2:
        raise MalformedHeaderError(
            f"DIMENSION must be at least 2, got {k}", field="DIMENSION", line=dim_line
        )

    if "TYPE" not in header:
        raise MalformedHeaderError("missing TYPE", field="TYPE")
    type_value, type_line = header["TYPE"]
    type_words = type_value.split()
    if not type_words or type_words[0].upper() not in _SUPPORTED_TYPES:
        raise MalformedHeaderError(
            f"TYPE must be ATSP or TSP, got {type_value!r}", field="TYPE", line=type_line
        )

    ewt_value, ewt_line = header.get("EDGE_WEIGHT_TYPE", ("", None))
    if ewt_value.upper() != "EXPLICIT":
        raise UnsupportedFormatError(
            f"only EXPLICIT edge weights are supported, got {ewt_value or 'none'!r}",
            field="EDGE_WEIGHT_TYPE",
            line=ewt_line,
        )
    ewf_value, ewf_line = header.get("EDGE_WEIGHT_FORMAT", ("", None))
    if ewf_value.upper() != "FULL_MATRIX":
        raise UnsupportedFormatError(
            f"only FULL_MATRIX is supported, got {ewf_value or 'none'!r}",
            field="EDGE_WEIGHT_FORMAT",
            line=ewf_line,
        )
    if section_line is None:
        raise MalformedHeaderError(
            "missing EDGE_WEIGHT_SECTION", field="EDGE_WEIGHT_SECTION"
        )

    tokens: list[tuple[str, int]] = []
    for lineno in range(section_line + 1, len(lines) + 1):
        words = lines[lineno - 1].split()
        if words and _is_section_end(words[0]):
            break
        tokens.extend((word, lineno) for word in words)

    expected = k * k
    if len(tokens) != expected:
        last_line = tokens[-1][1] if tokens else section_line
        raise TokenCountError(
            f"expected {expected} weights for DIMENSION {k}, found {len(tokens)}",
            field="EDGE_WEIGHT_SECTION",
            line=last_line,
        )

    integral = all(_INT_TOKEN.fullmatch(tok) for tok, _ in tokens)
    values: list[Cost] = []
    for pos, (tok, lineno) in enumerate(tokens):
        try:
            value: Cost = int(tok) if integral else float(tok)
        except ValueError:
            raise InvalidWeightError(
                f"weight {tok!r} is not a number", field="EDGE_WEIGHT_SECTION", line=lineno
            ) from None
        row, col = divmod(pos, k)
        if row != col:
            if not math.isfinite(value):
                raise InvalidWeightError(
                    f"weight {tok!r} at ({row + 1},{col + 1}) is not finite",
                    field="EDGE_WEIGHT_SECTION",
                    line=lineno,
                )
            if value < 0:
                raise NegativeWeightError(
                    f"negative weight {tok} at ({row + 1},{col + 1})",
                    field="EDGE_WEIGHT_SECTION",
                    line=lineno,
                )
        values.append(value)

    dtype = np.int64 if integral else np.float64
    setup = np.array(values, dtype=dtype).reshape(k, k)
    name = header.get("NAME", ("unnamed", None))[0] or "unnamed"
    inst = Instance(name=name, setup=setup)
    logger.info(
        "Parsed instance %s: k=%d (%s weights)",
        name,
        k,
        "integer" if integral else "float",
    )
    return inst


def load_instance(path: str | Path) -> Instance:
    """Read and parse a TSPLIB file from disk."""
    with open(path, "rb") as fh:
        return parse_tsplib(fh)


def to_tsplib(inst: Instance, comment: str | None = None) -> str:
    """Serialize an instance as an ATSP FULL_MATRIX TSPLIB document."""
    fmt = str if inst.is_integral else repr
    out = [f"NAME: {inst.name}", "TYPE: ATSP"]
    if comment:
        out.append(f"COMMENT: {comment}")
    out += [
        f"DIMENSION: {inst.k}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    out += [" ".join(fmt(v) for v in row) for row in inst.rows]
    out.append("EOF")
    return "\n".join(out) + "\n"

