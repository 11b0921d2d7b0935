"""JSON file formats: complex scalar = [re, im], matrix = row-major nested arrays.

Loading validates schema and structural invariants (shapes, finiteness,
invertibility, unitarity, idempotency); spectral axioms stay with `check`.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .algebra import AlgebraElement, AlgebraShape, Automorphism, Unitary
from .linalg import AntilinearOp, detect_sign
from .morita import AlgebraMatrix, IdempotentData
from .pert import Perturbation
from .triple import RealStructure, Representation, TwistedTriple


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v: Any) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        raise ValueError(f"complex scalar must be a [re, im] pair, got {v!r}")
    return complex(v[0], v[1])


def matrix_to_json(m: np.ndarray) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in m]


def matrix_from_json(v: Any, shape: tuple[int, int] | None = None) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ValueError("matrix must be a non-empty nested array")
    ncols = len(v[0])
    if any(len(r) != ncols for r in v):
        raise ValueError("matrix rows must have equal length")
    out = np.array([[complex_from_json(z) for z in row] for row in v])
    if shape is not None and out.shape != shape:
        raise ValueError(f"matrix of shape {out.shape} where {shape} expected")
    return out


def element_to_json(a: AlgebraElement) -> list:
    return [matrix_to_json(b) for b in a.blocks]


def element_from_json(shape: AlgebraShape, v: Any) -> AlgebraElement:
    if not isinstance(v, list) or len(v) != shape.num_blocks:
        raise ValueError(f"algebra element must be a list of {shape.num_blocks} block matrices")
    blocks = tuple(matrix_from_json(b, (n, n)) for n, b in zip(shape.block_dims, v))
    return AlgebraElement(shape, blocks)


def pert_to_json(p: Perturbation) -> list:
    return [[element_to_json(a), element_to_json(b)] for a, b in p.pairs]


def pert_from_json(shape: AlgebraShape, v: Any) -> Perturbation:
    if not isinstance(v, list):
        raise ValueError("perturbation file must be a JSON list of element pairs")
    pairs = []
    for item in v:
        if not isinstance(item, list) or len(item) != 2:
            raise ValueError("each perturbation entry must be a pair of algebra elements")
        pairs.append((element_from_json(shape, item[0]), element_from_json(shape, item[1])))
    return Perturbation(shape, tuple(pairs))


def triple_to_json(t: TwistedTriple) -> dict:
    unit_images = {}
    for k, n in enumerate(t.shape.block_dims):
        for i in range(n):
            for j in range(n):
                unit_images[f"{k},{i},{j}"] = matrix_to_json(t.rep.unit_images[k][i, j])
    doc = {
        "algebra": {"blocks": list(t.shape.block_dims)},
        "hilbert_dim": t.dim,
        "representation": {"unit_images": unit_images},
        "dirac": matrix_to_json(t.dirac),
        "automorphism": {
            "perm": list(t.sigma.perm),
            "conjugators": [matrix_to_json(s) for s in t.sigma.conjugators],
        },
    }
    if t.grading is not None:
        doc["grading"] = matrix_to_json(t.grading)
    if t.real is not None:
        doc["real_structure"] = {"matrix": matrix_to_json(t.real.j.mat)}
    return doc


def triple_from_json(doc: Any) -> TwistedTriple:
    if not isinstance(doc, dict):
        raise ValueError("triple file must be a JSON object")
    try:
        blocks = doc["algebra"]["blocks"]
        dim = int(doc["hilbert_dim"])
        unit_images = doc["representation"]["unit_images"]
        dirac_json = doc["dirac"]
        autom = doc["automorphism"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"triple file missing required field: {exc}") from exc
    shape = AlgebraShape(tuple(int(b) for b in blocks))
    images = []
    for k, n in enumerate(shape.block_dims):
        arr = np.zeros((n, n, dim, dim), dtype=complex)
        for i in range(n):
            for j in range(n):
                key = f"{k},{i},{j}"
                if key not in unit_images:
                    raise ValueError(f"representation is missing unit image '{key}'")
                arr[i, j] = matrix_from_json(unit_images[key], (dim, dim))
        images.append(arr)
    rep = Representation(shape, dim, tuple(images))
    dirac = matrix_from_json(dirac_json, (dim, dim))
    sigma = Automorphism(
        shape,
        tuple(int(p) for p in autom["perm"]),
        tuple(matrix_from_json(s, (n, n)) for n, s in zip(shape.block_dims, autom["conjugators"])),
    )
    grading = matrix_from_json(doc["grading"], (dim, dim)) if "grading" in doc else None
    real = None
    if "real_structure" in doc:
        jmat = matrix_from_json(doc["real_structure"]["matrix"], (dim, dim))
        j = AntilinearOp(jmat)
        eps, _ = detect_sign(j.squared(), np.eye(dim))
        epsp, _ = detect_sign(j.conjugate(dirac), dirac)
        epspp = None
        if grading is not None:
            epspp, _ = detect_sign(j.conjugate(grading), grading)
        real = RealStructure(j, epsilon=eps, epsilon_prime=epsp, epsilon_double_prime=epspp)
    return TwistedTriple(shape, rep, dirac, sigma, grading=grading, real=real)


def unitary_from_json(shape: AlgebraShape, v: Any) -> Unitary:
    return Unitary(element_from_json(shape, v))


def idempotent_to_json(e: IdempotentData) -> list:
    return [[element_to_json(x) for x in row] for row in e.matrix.entries]


def idempotent_from_json(shape: AlgebraShape, v: Any) -> IdempotentData:
    if not isinstance(v, list) or not v or any(not isinstance(r, list) or len(r) != len(v) for r in v):
        raise ValueError("idempotent file must be a square array of algebra elements")
    entries = tuple(tuple(element_from_json(shape, x) for x in row) for row in v)
    return IdempotentData(AlgebraMatrix(shape, entries))


def connection_from_json(t: TwistedTriple, e: IdempotentData, v: Any, side: str = "right"):
    """Connection file: n x n array of perturbation pair-lists, one per one-form entry."""
    from .morita import connection_with
    from .pert import eta, eta_opp, OppPerturbation

    n = e.n
    if not isinstance(v, list) or len(v) != n or any(not isinstance(r, list) or len(r) != n for r in v):
        raise ValueError("connection file must be an n x n array of one-form pair lists")
    ops = []
    for row in v:
        out_row = []
        for cell in row:
            pairs = pert_from_json(t.shape, cell)
            if side == "right":
                out_row.append(eta(t, pairs).op)
            else:
                out_row.append(eta_opp(t, OppPerturbation(t.shape, pairs.pairs)))
        ops.append(tuple(out_row))
    return connection_with(t, e, tuple(ops), side)


def load_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_triple(path: str) -> TwistedTriple:
    return triple_from_json(load_json(path))


def load_pert(path: str, shape: AlgebraShape) -> Perturbation:
    return pert_from_json(shape, load_json(path))


def load_unitary(path: str, shape: AlgebraShape) -> Unitary:
    return unitary_from_json(shape, load_json(path))


def load_idempotent(path: str, shape: AlgebraShape) -> IdempotentData:
    return idempotent_from_json(shape, load_json(path))
