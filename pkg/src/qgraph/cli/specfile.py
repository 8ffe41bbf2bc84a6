"""JSON graph specification files.

Layout::

    {
      "format_version": "1",
      "blocks": [n1, n2, ...],
      "state": {"kind": "tracial"} | {"kind": "explicit", "weights": [[...], ...]},
      "adjacency": {"kind": "matrix", "matrix": [[[re, im], ...], ...]}
                 | {"kind": "complete"} | {"kind": "trivial"}
                 | {"kind": "rank_one", "T": [[[re, im], ...], ...]}
                 | {"kind": "classical", "matrix": [[0, 1], ...]}
                 | {"kind": "main_example", "n": 1}
    }

Complex numbers are ``[re, im]`` pairs (plain reals are accepted on input).
Unknown keys are rejected.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass

import numpy as np

from ..errors import ParseError, ValidationError
from ..qadj import (
    QuantumGraph,
    classical_graph,
    complete_graph,
    main_example,
    rank_one_graph,
    trivial_graph,
)
from ..qspace import QuantumSpace

FORMAT_VERSION = "1"
ADJACENCY_KINDS = ("matrix", "complete", "trivial", "rank_one", "classical", "main_example")

_TOP_KEYS = {"format_version", "blocks", "state", "adjacency"}
_STATE_KEYS = {"tracial": {"kind"}, "explicit": {"kind", "weights", "delta_sq"}}
_ADJ_KEYS = {
    "matrix": {"kind", "matrix"},
    "complete": {"kind"},
    "trivial": {"kind"},
    "rank_one": {"kind", "T"},
    "classical": {"kind", "matrix"},
    "main_example": {"kind", "n"},
}


@dataclass
class GraphSpec:
    """Parsed but not yet instantiated specification (canonical dict form)."""

    data: dict

    def build(self) -> QuantumGraph:
        return _build(self.data)

    def dumps(self) -> str:
        return canonical_json(self.data)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _fail(path, msg):
    raise ParseError(f"{path}: {msg}")


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        _fail(path, f"unknown keys {extra}")


def _complex(v, path):
    if isinstance(v, bool):
        _fail(path, "expected a number or [re, im]")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
            isinstance(u, (int, float)) and not isinstance(u, bool) for u in v):
        return complex(v[0], v[1])
    _fail(path, "expected a number or [re, im]")


def _complex_matrix(rows, shape, path):
    if not isinstance(rows, list) or len(rows) != shape[0]:
        _fail(path, f"expected {shape[0]} rows")
    out = np.zeros(shape, dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != shape[1]:
            _fail(f"{path}[{i}]", f"expected {shape[1]} entries")
        for j, v in enumerate(row):
            out[i, j] = _complex(v, f"{path}[{i}][{j}]")
    if not np.all(np.isfinite(out)):
        _fail(path, "entries must be finite")
    return out


def _encode_matrix(M) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def loads(text: str, source: str = "<input>") -> GraphSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return GraphSpec(normalise(data))


def load(path: str) -> GraphSpec:
    if path == "-":
        return loads(sys.stdin.read(), "<stdin>")
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read(), path)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None


def normalise(data) -> dict:
    """Check the structure and return the canonical form."""
    _check_keys(data, _TOP_KEYS, "$")
    version = data.get("format_version", FORMAT_VERSION)
    if str(version) != FORMAT_VERSION:
        _fail("$.format_version", f"unsupported version {version!r}")
    for key in ("blocks", "state", "adjacency"):
        if key not in data:
            _fail("$", f"missing key {key!r}")
    blocks = data["blocks"]
    if not isinstance(blocks, list) or not blocks or not all(
            isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in blocks):
        _fail("$.blocks", "expected a nonempty list of positive integers")

    state = data["state"]
    kind = state.get("kind") if isinstance(state, dict) else None
    if kind not in _STATE_KEYS:
        _fail("$.state.kind", f"expected one of {sorted(_STATE_KEYS)}")
    _check_keys(state, _STATE_KEYS[kind], "$.state")
    out_state = {"kind": kind}
    if kind == "explicit":
        w = state.get("weights")
        if not isinstance(w, list) or len(w) != len(blocks):
            _fail("$.state.weights", "expected one list per block")
        for a, (n, wa) in enumerate(zip(blocks, w)):
            if not isinstance(wa, list) or len(wa) != n or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in wa):
                _fail(f"$.state.weights[{a}]", f"expected {n} numbers")
        out_state["weights"] = [[float(v) for v in wa] for wa in w]
        if "delta_sq" in state:
            out_state["delta_sq"] = float(state["delta_sq"])

    adj = data["adjacency"]
    kind = adj.get("kind") if isinstance(adj, dict) else None
    if kind not in _ADJ_KEYS:
        _fail("$.adjacency.kind", f"expected one of {list(ADJACENCY_KINDS)}")
    _check_keys(adj, _ADJ_KEYS[kind], "$.adjacency")
    out_adj = {"kind": kind}
    dim = sum(n * n for n in blocks)
    N = sum(blocks)
    if kind == "matrix":
        out_adj["matrix"] = _encode_matrix(_complex_matrix(adj.get("matrix"), (dim, dim),
                                                           "$.adjacency.matrix"))
    elif kind == "rank_one":
        T = _complex_matrix(adj.get("T"), (N, N), "$.adjacency.T")
        out_adj["T"] = _encode_matrix(T)
    elif kind == "classical":
        M = adj.get("matrix")
        d = len(blocks)
        if not isinstance(M, list) or len(M) != d or not all(
                isinstance(r, list) and len(r) == d for r in M):
            _fail("$.adjacency.matrix", f"expected a {d}x{d} matrix")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for r in M for v in r):
            _fail("$.adjacency.matrix", "entries must be numbers")
        out_adj["matrix"] = [[v for v in r] for r in M]
    elif kind == "main_example":
        n = adj.get("n")
        if not isinstance(n, int) or isinstance(n, bool):
            _fail("$.adjacency.n", "expected an integer")
        out_adj["n"] = n
    return {"format_version": FORMAT_VERSION, "blocks": list(blocks),
            "state": out_state, "adjacency": out_adj}


def _space(data) -> QuantumSpace:
    st = data["state"]
    if st["kind"] == "tracial":
        return QuantumSpace.tracial(data["blocks"])
    return QuantumSpace.from_weights(data["blocks"], st["weights"], st.get("delta_sq"))


def _block_diagonal(space, T):
    starts = np.cumsum((0,) + space.sizes)
    mask = np.zeros(T.shape, dtype=bool)
    for a, n in enumerate(space.sizes):
        mask[starts[a]:starts[a] + n, starts[a]:starts[a] + n] = True
    if np.any(np.abs(T[~mask]) > 0):
        raise ValidationError("T must be block diagonal")
    return [T[starts[a]:starts[a] + n, starts[a]:starts[a] + n] for a, n in enumerate(space.sizes)]


def _build(data) -> QuantumGraph:
    adj = data["adjacency"]
    kind = adj["kind"]
    blocks = data["blocks"]
    if kind == "classical":
        if any(n != 1 for n in blocks) or data["state"]["kind"] != "tracial":
            raise ValidationError("classical graphs need 1x1 blocks with the tracial state")
        return classical_graph(np.array(adj["matrix"]))
    if kind == "main_example":
        n = adj["n"]
        if n < 1 or blocks != [n, n, n] or data["state"]["kind"] != "tracial":
            raise ValidationError("main_example needs blocks [n, n, n] with the tracial state")
        return main_example(n)
    space = _space(data)
    if kind == "complete":
        return complete_graph(space)
    if kind == "trivial":
        return trivial_graph(space)
    if kind == "rank_one":
        T = np.array([[complex(*z) for z in row] for row in adj["T"]])
        return rank_one_graph(space, _block_diagonal(space, T))
    A = np.array([[complex(*z) for z in row] for row in adj["matrix"]])
    return QuantumGraph(space, A, "matrix")


def example_spec(name: str, blocks=None, n: int = 1, matrix=None) -> GraphSpec:
    """Specification of a built-in family."""
    if name == "main_example":
        data = {"blocks": [n, n, n], "state": {"kind": "tracial"},
                "adjacency": {"kind": "main_example", "n": n}}
    elif name in ("complete", "trivial"):
        data = {"blocks": list(blocks or [2]), "state": {"kind": "tracial"},
                "adjacency": {"kind": name}}
    elif name == "rank_one":
        sizes = list(blocks or [2])
        space = QuantumSpace.tracial(sizes)
        N = sum(sizes)
        T = np.zeros((N, N), dtype=complex)
        start = 0
        for a, size in enumerate(sizes):
            # a multiple of e_11 with Tr(rho^-1 T^* T) = delta^2
            T[start, start] = np.sqrt(space.delta_sq * space.rho[a][0])
            start += size
        data = {"blocks": sizes, "state": {"kind": "tracial"},
                "adjacency": {"kind": "rank_one", "T": _encode_matrix(T)}}
    elif name == "classical":
        M = matrix if matrix is not None else [[0, 1], [1, 1]]
        data = {"blocks": [1] * len(M), "state": {"kind": "tracial"},
                "adjacency": {"kind": "classical", "matrix": M}}
    else:
        raise ValueError(f"unknown example {name!r}")
    return GraphSpec(normalise(data))


def spec_of_graph(G: QuantumGraph) -> GraphSpec:
    """Serialise any graph through its explicit adjacency matrix."""
    sp = G.space
    data = {"blocks": list(sp.sizes),
            "state": {"kind": "explicit", "weights": [[float(v) for v in r] for r in sp.rho],
                      "delta_sq": float(sp.delta_sq)},
            "adjacency": {"kind": "matrix", "matrix": _encode_matrix(G.matrix)}}
    return GraphSpec(normalise(data))
