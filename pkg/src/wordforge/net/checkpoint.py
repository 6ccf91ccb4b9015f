"""Versioned binary model container.

Layout: magic, format version, a JSON descriptor (network spec plus
decode-time metadata such as the label list), then each named parameter
tensor as a shape header followed by little-endian float32 data.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .network import Network, NetworkSpec

MAGIC = b"WFNET\x00"
VERSION = 1


def save_checkpoint(path, net: Network, labels: list[str] | None = None,
                    grams: list[str] | None = None, meta: dict | None = None) -> None:
    descriptor = {
        "spec": net.spec.to_json(),
        "labels": labels,
        "grams": grams,
        "meta": meta or {},
    }
    blob = json.dumps(descriptor, sort_keys=True).encode("utf-8")
    items = net.state_items()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(struct.pack("<I", len(items)))
        for name, value in items:
            nb = name.encode("utf-8")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            f.write(struct.pack("<B", value.ndim))
            f.write(struct.pack(f"<{value.ndim}I", *value.shape))
            f.write(np.ascontiguousarray(value, dtype="<f4").tobytes())


def load_checkpoint(path) -> tuple[Network, dict]:
    """Rebuild the network and return it with the stored descriptor."""
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path}: not a model checkpoint")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        (blen,) = struct.unpack("<I", f.read(4))
        descriptor = json.loads(f.read(blen).decode("utf-8"))
        (count,) = struct.unpack("<I", f.read(4))
        items = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", f.read(2))
            name = f.read(nlen).decode("utf-8")
            (ndim,) = struct.unpack("<B", f.read(1))
            shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
            n = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(f.read(4 * n), dtype="<f4").reshape(shape)
            items[name] = data
    spec = NetworkSpec.from_json(descriptor["spec"])
    net = Network(spec, seed=0)
    net.load_state(items)
    return net, descriptor
