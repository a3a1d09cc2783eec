"""Plain-text archival format for benchmark instances.

Layout: a header line ``gradcomp-instance v1 <kind>`` followed by named
blocks, each introduced by ``name rows cols`` and carrying that many rows of
whitespace-separated decimal floats printed with 17 significant digits, which
round-trips IEEE doubles exactly.  Scalars are 1x1 blocks.  Saving the loaded
instance reproduces the original bytes.
"""

from __future__ import annotations

import hashlib
from typing import Union

import numpy as np

from .lqr import LqrInstance
from .quadratic import QuadraticInstance

HEADER = "gradcomp-instance v1"

Instance = Union[QuadraticInstance, LqrInstance]


class ParseError(ValueError):
    """Malformed instance file; the message carries the offending line."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _block(name: str, matrix: np.ndarray) -> str:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = [f"{name} {matrix.shape[0]} {matrix.shape[1]}"]
    lines.extend(" ".join(_fmt(v) for v in row) for row in matrix)
    return "\n".join(lines)


def instance_text(inst: Instance) -> str:
    """Serialized form of an instance (also the fingerprint input)."""
    if isinstance(inst, QuadraticInstance):
        blocks = [
            _block("P", inst.p),
            _block("Q", inst.q),
            _block("c1", np.array([[inst.c1]])),
            _block("c2", np.array([[inst.c2]])),
            _block("c3", inst.c3[None, :]),
            _block("x_star", inst.x_star[None, :]),
        ]
        kind = "quad"
    elif isinstance(inst, LqrInstance):
        blocks = [
            _block("A", inst.a),
            _block("B", inst.b),
            _block("Q", inst.qc),
            _block("R", inst.rc),
            _block("ell", np.array([[inst.ell]])),
            _block("horizon", np.array([[float(inst.horizon)]])),
            _block("sampling_radius", np.array([[inst.sampling_radius]])),
            _block("initial_states", inst.initial_states),
            _block("K_hat_star", inst.k_hat_star),
        ]
        if inst.seed is not None:
            # Exact only for seeds below 2**53, which covers benchmark use.
            blocks.append(_block("seed", np.array([[float(inst.seed)]])))
        if inst.k_star_ref is not None:
            blocks.append(_block("K_star_ref", inst.k_star_ref))
        kind = "lqr"
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    return "\n".join([f"{HEADER} {kind}"] + blocks) + "\n"


def fingerprint(inst: Instance) -> str:
    return hashlib.sha256(instance_text(inst).encode()).hexdigest()


def save_instance(path: str, inst: Instance) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(instance_text(inst))


def _parse_blocks(lines: list[str]) -> dict[str, np.ndarray]:
    blocks: dict[str, np.ndarray] = {}
    i = 1
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        parts = lines[i].split()
        if len(parts) != 3:
            raise ParseError(f"expected 'name rows cols', got {lines[i]!r}", i + 1)
        name = parts[0]
        try:
            rows, cols = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"non-integer shape in {lines[i]!r}", i + 1) from None
        data = np.empty((rows, cols))
        for r in range(rows):
            row_idx = i + 1 + r
            if row_idx >= len(lines):
                raise ParseError(f"matrix {name!r} truncated: row {r + 1} of {rows} missing",
                                 row_idx + 1)
            entries = lines[row_idx].split()
            if len(entries) != cols:
                raise ParseError(
                    f"matrix {name!r} row {r + 1}: expected {cols} entries, got {len(entries)}",
                    row_idx + 1)
            try:
                data[r] = [float(v) for v in entries]
            except ValueError:
                raise ParseError(f"matrix {name!r} row {r + 1}: non-numeric entry",
                                 row_idx + 1) from None
        blocks[name] = data
        i += 1 + rows
    return blocks


def _require(blocks: dict[str, np.ndarray], name: str) -> np.ndarray:
    if name not in blocks:
        raise ParseError(f"missing matrix {name!r}", 1)
    return blocks[name]


def load_instance(path: str) -> Instance:
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    header = lines[0].split()
    if len(header) != 4 or " ".join(header[:3]) != HEADER:
        raise ParseError(f"bad header {lines[0]!r}", 1)
    kind = header[3]
    blocks = _parse_blocks(lines)
    if kind == "quad":
        p = _require(blocks, "P")
        return QuadraticInstance(
            n=p.shape[0],
            p=p,
            q=_require(blocks, "Q"),
            c1=float(_require(blocks, "c1")[0, 0]),
            c2=float(_require(blocks, "c2")[0, 0]),
            c3=_require(blocks, "c3")[0],
            x_star=_require(blocks, "x_star")[0],
        )
    if kind == "lqr":
        a = _require(blocks, "A")
        b = _require(blocks, "B")
        seed = blocks.get("seed")
        ref = blocks.get("K_star_ref")
        return LqrInstance(
            n=a.shape[0],
            p=b.shape[1],
            a=a,
            b=b,
            qc=_require(blocks, "Q"),
            rc=_require(blocks, "R"),
            ell=float(_require(blocks, "ell")[0, 0]),
            horizon=int(_require(blocks, "horizon")[0, 0]),
            sampling_radius=float(_require(blocks, "sampling_radius")[0, 0]),
            initial_states=_require(blocks, "initial_states"),
            k_hat_star=_require(blocks, "K_hat_star"),
            seed=None if seed is None else int(seed[0, 0]),
            k_star_ref=ref,
        )
    raise ParseError(f"unknown instance kind {kind!r}", 1)
