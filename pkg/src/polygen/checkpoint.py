"""JSON checkpoints for model parameters and trained generators.

A checkpoint is a single JSON document::

    {"model": "model1" | "model2" | "explicit" | "orig" | "concat",
     "dims": {"d": ..., "o": ..., "k": ..., "omega": ..., "N": ...},
     "arrays": {name: {"shape": [...], "data": [flat numbers]}, ...}}

Array names follow the parameter naming of the models ("C", "beta",
"U1".."UN", "A1".., "S1".., "B1".., "b1"..).  Trained-generator documents
additionally carry the wiring flags ("global_transform", "b_identity",
"out_head") and, when present, the global-transform arrays "GW"/"Gc".
Numbers are serialized with shortest-round-trip decimal repr, so loading
reproduces the exact float64 values.
"""

from __future__ import annotations

import json

import numpy as np

from .models import ExplicitPolyParams, Model1Params, Model2Params
from .nets import Generator, GeneratorKind


def _encode_arrays(arrays: dict) -> dict:
    return {
        name: {"shape": list(np.asarray(a).shape), "data": [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]}
        for name, a in arrays.items()
    }


def _decode_array(entry) -> np.ndarray:
    if not isinstance(entry, dict) or "shape" not in entry or "data" not in entry:
        raise ValueError("malformed array entry in checkpoint")
    return np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])


def model1_to_dict(p: Model1Params) -> dict:
    arrays = {"C": p.c, "beta": p.beta}
    for i, u in enumerate(p.u, start=1):
        arrays[f"U{i}"] = u
    return {"model": "model1", "dims": p.dims, "arrays": _encode_arrays(arrays)}


def model2_to_dict(p: Model2Params) -> dict:
    arrays = {"C": p.c, "beta": p.beta}
    for i in range(p.order):
        arrays[f"A{i + 1}"] = p.a[i]
        arrays[f"S{i + 1}"] = p.s[i]
        arrays[f"B{i + 1}"] = p.bmat[i]
        arrays[f"b{i + 1}"] = p.bvec[i]
    return {"model": "model2", "dims": p.dims, "arrays": _encode_arrays(arrays)}


def explicit_to_dict(p: ExplicitPolyParams) -> dict:
    arrays = {"beta": p.beta}
    for i, w in enumerate(p.weights, start=1):
        arrays[f"W{i}"] = w
    if p.scalers is not None:
        for i, b in enumerate(p.scalers, start=1):
            arrays[f"b{i}"] = b
    dims = {"o": p.out_dim, "N": p.order}
    if p.weights:
        dims["d"] = p.latent_dim
    if p.scalers is not None:
        dims["omega"] = p.weights[0].shape[1]
    return {"model": "explicit", "dims": dims, "arrays": _encode_arrays(arrays)}


def params_to_dict(p) -> dict:
    if isinstance(p, Model1Params):
        return model1_to_dict(p)
    if isinstance(p, Model2Params):
        return model2_to_dict(p)
    if isinstance(p, ExplicitPolyParams):
        return explicit_to_dict(p)
    raise TypeError(f"cannot checkpoint {type(p).__name__}")


def params_from_dict(doc: dict):
    """Rebuild a parameter object from a checkpoint document."""
    kind = doc.get("model")
    arrays = {name: _decode_array(entry) for name, entry in doc.get("arrays", {}).items()}
    dims = doc.get("dims", {})
    n = int(dims.get("N", 0))
    if kind == "model1":
        return Model1Params(c=arrays["C"], beta=arrays["beta"], u=[arrays[f"U{i}"] for i in range(1, n + 1)])
    if kind == "model2":
        return Model2Params(
            c=arrays["C"],
            beta=arrays["beta"],
            a=[arrays[f"A{i}"] for i in range(1, n + 1)],
            s=[arrays[f"S{i}"] for i in range(1, n + 1)],
            bmat=[arrays[f"B{i}"] for i in range(1, n + 1)],
            bvec=[arrays[f"b{i}"] for i in range(1, n + 1)],
        )
    if kind == "explicit":
        scalers = [arrays[f"b{i}"] for i in range(1, n + 1)] if f"b{n}" in arrays and n else None
        return ExplicitPolyParams(beta=arrays["beta"], weights=[arrays[f"W{i}"] for i in range(1, n + 1)], scalers=scalers)
    raise ValueError(f"unknown model kind {kind!r} in checkpoint")


def generator_to_dict(gen: Generator) -> dict:
    kind = gen.kind
    doc = {
        "model": kind.variant,
        "dims": {"d": gen.latent_dim, "o": gen.out_dim, "k": kind.width, "omega": kind.omega, "N": kind.n_order},
        "global_transform": kind.global_transform,
        "b_identity": kind.b_identity,
        "out_head": kind.out_head,
        "arrays": _encode_arrays(gen.arrays),
    }
    return doc


def generator_from_dict(doc: dict) -> Generator:
    dims = doc.get("dims", {})
    try:
        kind = GeneratorKind(
            variant=doc["model"],
            n_order=int(dims["N"]),
            width=int(dims["k"]),
            omega=int(dims["omega"]),
            global_transform=doc.get("global_transform", "none"),
            b_identity=bool(doc.get("b_identity", False)),
            out_head=doc.get("out_head", "linear"),
        )
        gen = Generator(kind, latent_dim=int(dims["d"]), out_dim=int(dims["o"]), rng=np.random.default_rng(0))
        arrays = {name: _decode_array(entry) for name, entry in doc["arrays"].items()}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed generator checkpoint: {exc}") from None
    if set(arrays) != set(gen.arrays):
        missing = set(gen.arrays) - set(arrays)
        extra = set(arrays) - set(gen.arrays)
        raise ValueError(f"checkpoint arrays do not match architecture (missing {sorted(missing)}, unexpected {sorted(extra)})")
    for name, arr in arrays.items():
        gen.store.set_(name, arr)
    return gen


def checkpoint_kind(doc: dict) -> str:
    return doc.get("model", "")


def save(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load(path) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"checkpoint {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "model" not in doc or "arrays" not in doc:
        raise ValueError(f"checkpoint {path} is missing required fields")
    return doc


def load_generator(path) -> Generator:
    """Load any checkpoint as a runnable generator.

    Trained-generator documents restore their wiring; bare ``model1`` /
    ``model2`` parameter documents are wrapped without a global transform.
    """
    doc = load(path)
    kind = checkpoint_kind(doc)
    if kind in ("model1", "model2") and "global_transform" not in doc:
        params = params_from_dict(doc)
        dims = doc["dims"]
        gen_kind = GeneratorKind(
            variant=kind,
            n_order=int(dims["N"]),
            width=int(dims["k"]),
            omega=int(dims.get("omega", dims["k"])),
        )
        gen = Generator(gen_kind, latent_dim=int(dims["d"]), out_dim=int(dims["o"]), rng=np.random.default_rng(0))
        arrays = {"C": params.c, "beta": params.beta}
        if kind == "model1":
            for i, u in enumerate(params.u, start=1):
                arrays[f"U{i}"] = u
        else:
            for i in range(params.order):
                arrays[f"A{i + 1}"] = params.a[i]
                if i >= 1:
                    arrays[f"S{i + 1}"] = params.s[i]
                arrays[f"B{i + 1}"] = params.bmat[i]
                arrays[f"b{i + 1}"] = params.bvec[i]
        for name, arr in arrays.items():
            gen.store.set_(name, arr)
        return gen
    return generator_from_dict(doc)
