"""Single-file model container.

Layout: magic ``SWRN1``; a little-endian uint64 byte length and that many
bytes of UTF-8 JSON manifest; then, for every array listed in the manifest
in order, a uint64 byte length followed by little-endian float64 values.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .dictionary import Denoiser, Dictionary, PlaneLayout
from .errors import DataError
from .neuralnet import (
    ClassAvgPool, Conv2D, Dense, MaxPool2D, Network, ReLU, Softmax, TransposedConv2D,
)
from .preprocess import NormStats, Projector

MAGIC = b"SWRN1"
FORMAT_VERSION = 1


def _pack_component(kind, obj):
    """Returns ``(meta, arrays)`` for one fitted component."""
    if kind == "projector":
        return {}, {"A": obj.A, "mean": obj.mean, "explained_variance": obj.explained_variance,
                    "explained_variance_ratio": obj.explained_variance_ratio}
    if kind == "stats":
        return {"mode": obj.mode, "warnings": list(obj.warnings)}, {"mean": obj.mean, "scale": obj.scale}
    if kind == "dictionary":
        return {"class_ranges": [list(r) for r in obj.class_ranges]}, {"D": obj.D}
    if kind == "denoiser":
        return {"lam": obj.lam, "residual": obj.residual}, {"B": obj.B}
    if kind == "network":
        meta = obj.manifest()
        if obj.layout is not None:
            L = obj.layout
            meta["layout"] = [L.height, L.width, L.block_height, L.block_width, L.n_classes]
        arrays = {f"p{i}": p for i, p in enumerate(obj.parameters())}
        return meta, arrays
    raise ValueError(f"unknown component kind {kind!r}")


def _layer_from_spec(spec, layout):
    kind = spec["kind"]
    if kind == "conv2d":
        return Conv2D(spec["in_channels"], spec["out_channels"], tuple(spec["kernel"]))
    if kind == "transposed_conv2d":
        crop = tuple(spec["crop"]) if spec["crop"] else None
        return TransposedConv2D(spec["in_channels"], spec["out_channels"], tuple(spec["kernel"]),
                                spec["stride"], crop)
    if kind == "maxpool":
        return MaxPool2D(spec["pad_to_even"])
    if kind == "dense":
        return Dense(spec["in_features"], spec["out_features"])
    if kind == "relu":
        return ReLU()
    if kind == "class_avgpool":
        if layout is None:
            raise DataError("class pooling layer stored without a plane layout")
        return ClassAvgPool(layout.cell_classes(), spec["n_classes"])
    if kind == "softmax":
        return Softmax()
    raise DataError(f"unknown layer kind {kind!r} in model file")


def _unpack_component(kind, meta, arrays):
    if kind == "projector":
        return Projector(arrays["A"], arrays["mean"], arrays["explained_variance"],
                         arrays["explained_variance_ratio"])
    if kind == "stats":
        return NormStats(arrays["mean"], arrays["scale"], meta["mode"], tuple(meta["warnings"]))
    if kind == "dictionary":
        return Dictionary(arrays["D"], tuple(tuple(r) for r in meta["class_ranges"]))
    if kind == "denoiser":
        return Denoiser(arrays["B"], meta["lam"], meta["residual"])
    if kind == "network":
        layout = PlaneLayout(*meta["layout"]) if "layout" in meta else None
        layers = [_layer_from_spec(s, layout) for s in meta["layers"]]
        net = Network(meta["name"], layers, layout, meta["seed"], meta["notes"])
        params = list(net.parameters())
        if len(params) != len(arrays):
            raise DataError("network parameter count does not match the stored blobs")
        for i, p in enumerate(params):
            src = arrays[f"p{i}"]
            if src.shape != p.shape:
                raise DataError(f"parameter {i}: stored shape {src.shape}, expected {p.shape}")
            p[...] = src
        return net
    raise DataError(f"unknown component kind {kind!r} in model file")


def save_model(path, components, info=None):
    """Write ``components`` (kind -> fitted object) plus free-form ``info``."""
    entries, blobs = [], []
    for kind, obj in components.items():
        meta, arrays = _pack_component(kind, obj)
        names = []
        for name, arr in arrays.items():
            arr = np.ascontiguousarray(arr, dtype="<f8")
            names.append({"name": name, "shape": list(arr.shape)})
            blobs.append(arr)
        entries.append({"kind": kind, "meta": meta, "arrays": names})
    manifest = {"format_version": FORMAT_VERSION, "components": entries, "info": info or {}}
    text = json.dumps(manifest, sort_keys=True, indent=1).encode("utf-8")
    with open(os.fspath(path), "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(text)))
        fh.write(text)
        for arr in blobs:
            data = arr.tobytes()
            fh.write(struct.pack("<Q", len(data)))
            fh.write(data)


def _read_header(fh):
    if fh.read(5) != MAGIC:
        raise DataError("not a model file (bad magic bytes)")
    raw = fh.read(8)
    if len(raw) != 8:
        raise DataError("truncated model header")
    (n,) = struct.unpack("<Q", raw)
    text = fh.read(n)
    if len(text) != n:
        raise DataError("truncated model manifest")
    try:
        return json.loads(text.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"unreadable model manifest: {exc}") from None


def inspect_model(path):
    """The manifest only; parameter blobs are not read."""
    with open(os.fspath(path), "rb") as fh:
        return _read_header(fh)


def load_model(path):
    """Returns ``(components, manifest)``."""
    with open(os.fspath(path), "rb") as fh:
        manifest = _read_header(fh)
        components = {}
        for entry in manifest["components"]:
            arrays = {}
            for a in entry["arrays"]:
                raw = fh.read(8)
                if len(raw) != 8:
                    raise DataError(f"truncated blob header for {entry['kind']}.{a['name']}")
                (n,) = struct.unpack("<Q", raw)
                expected = 8 * int(np.prod(a["shape"], dtype=np.int64))
                if n != expected:
                    raise DataError(f"blob {entry['kind']}.{a['name']} has {n} bytes, expected {expected}")
                data = fh.read(n)
                if len(data) != n:
                    raise DataError(f"truncated blob {entry['kind']}.{a['name']}")
                arrays[a["name"]] = np.frombuffer(data, dtype="<f8").reshape(a["shape"]).astype(np.float64)
            components[entry["kind"]] = _unpack_component(entry["kind"], entry["meta"], arrays)
        if fh.read(1):
            raise DataError("trailing bytes after the last blob")
    return components, manifest
