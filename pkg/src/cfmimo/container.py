"""Simple binary container for instances and channel batches.

File layout (version 1):

  line 1: UTF-8 JSON header terminated by a newline, with keys
          {"format": "cfmimo-container", "version": 1, "kind": <str>,
           "meta": {...}, "arrays": [{"name", "dtype", "shape"}, ...]}
  body:   the arrays' raw bytes, concatenated in header order, each in
          C (row-major) order with little-endian dtypes; complex arrays
          are stored interleaved (re, im) as numpy '<c16'.

Round trips are bit-exact, which keeps experiment inputs reproducible.
"""

from __future__ import annotations

import json

import numpy as np

from .network import ChannelBatch, NetworkInstance

__all__ = [
    "save_arrays",
    "load_arrays",
    "save_instance",
    "load_instance",
    "save_batch",
    "load_batch",
]

FORMAT = "cfmimo-container"
VERSION = 1

_DTYPES = {"<f8": np.dtype("<f8"), "<c16": np.dtype("<c16"), "<i8": np.dtype("<i8")}


def _canonical(a: np.ndarray) -> tuple[np.ndarray, str]:
    if np.iscomplexobj(a):
        dt = "<c16"
    elif a.dtype.kind in "iub":
        dt = "<i8"
    else:
        dt = "<f8"
    return np.ascontiguousarray(a, dtype=_DTYPES[dt]), dt


def save_arrays(path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    entries = []
    blobs = []
    for name, a in arrays.items():
        a, dt = _canonical(a)
        entries.append({"name": name, "dtype": dt, "shape": list(a.shape)})
        blobs.append(a.tobytes())
    header = {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "meta": meta,
        "arrays": entries,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        f.write(b"\n")
        for blob in blobs:
            f.write(blob)


def load_arrays(path, expected_kind: str | None = None):
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("utf-8"))
        if header.get("format") != FORMAT:
            raise ValueError(f"{path}: not a {FORMAT} file")
        if header.get("version") != VERSION:
            raise ValueError(f"{path}: unsupported container version {header.get('version')}")
        if expected_kind is not None and header["kind"] != expected_kind:
            raise ValueError(
                f"{path}: container holds {header['kind']!r}, expected {expected_kind!r}"
            )
        arrays = {}
        for entry in header["arrays"]:
            dtype = _DTYPES[entry["dtype"]]
            shape = tuple(entry["shape"])
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            buf = f.read(count * dtype.itemsize)
            if len(buf) != count * dtype.itemsize:
                raise ValueError(f"{path}: truncated array {entry['name']!r}")
            arrays[entry["name"]] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
    return header["meta"], arrays


def save_instance(path, inst: NetworkInstance) -> None:
    save_arrays(
        path,
        "network-instance",
        {"scenario": inst.scenario, "n_antennas": inst.n_antennas},
        {
            "ap_positions": inst.ap_positions,
            "user_positions": inst.user_positions,
            "beta": inst.beta,
            "clusters": inst.clusters,
        },
    )


def load_instance(path) -> NetworkInstance:
    meta, a = load_arrays(path, "network-instance")
    return NetworkInstance(
        ap_positions=a["ap_positions"],
        user_positions=a["user_positions"],
        beta=a["beta"],
        clusters=a["clusters"],
        scenario=meta["scenario"],
        n_antennas=int(meta["n_antennas"]),
    )


def save_batch(path, batch: ChannelBatch) -> None:
    save_arrays(path, "channel-batch", {"seed": batch.seed}, {"h": batch.h})


def load_batch(path) -> ChannelBatch:
    meta, a = load_arrays(path, "channel-batch")
    return ChannelBatch(h=a["h"], seed=int(meta["seed"]))
