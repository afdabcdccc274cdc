#!/usr/bin/env python3
"""Convert VGG-19 convolution weights into an NSTWGT01 weight container.

Accepted inputs:
  * PyTorch state dicts (.pth/.pt) keyed either ``conv1_1.weight`` style or
    torchvision ``features.<n>.weight`` style.
  * NumPy archives (.npz) with the same key names.

Kernels must be laid out [out, in, ky, kx] for cross-correlation, which is
what PyTorch stores. Only conv1_1 .. conv5_4 are kept.
"""

import argparse
import json
import struct
import sys
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"NSTWGT01"

# (name, out_channels, pool_after)
VGG19 = [
    ("conv1_1", 64, False), ("conv1_2", 64, True),
    ("conv2_1", 128, False), ("conv2_2", 128, True),
    ("conv3_1", 256, False), ("conv3_2", 256, False), ("conv3_3", 256, False), ("conv3_4", 256, True),
    ("conv4_1", 512, False), ("conv4_2", 512, False), ("conv4_3", 512, False), ("conv4_4", 512, True),
    ("conv5_1", 512, False), ("conv5_2", 512, False), ("conv5_3", 512, False), ("conv5_4", 512, False),
]

# Index of each conv inside torchvision's vgg19().features.
TORCHVISION_INDEX = [0, 2, 5, 7, 10, 12, 14, 16, 19, 21, 23, 25, 28, 30, 32, 34]


def write_container(path, layers, architecture="vgg19", pooling="average", channel_order="BGR",
                    mean=(104.006, 116.669, 122.679)):
    """layers: iterable of (name, kernel[out, in, 3, 3], bias[out], pool_after)."""
    payload = bytearray()
    entries = []
    table = []
    for name, kernel, bias, pool_after in layers:
        kernel = np.ascontiguousarray(kernel, dtype="<f4")
        bias = np.ascontiguousarray(bias, dtype="<f4")
        if kernel.ndim != 4 or kernel.shape[2:] != (3, 3):
            raise ValueError(f"{name}: kernel shape {kernel.shape} is not [out, in, 3, 3]")
        if bias.shape != (kernel.shape[0],):
            raise ValueError(f"{name}: bias shape {bias.shape} does not match {kernel.shape[0]} outputs")
        if not (np.isfinite(kernel).all() and np.isfinite(bias).all()):
            raise ValueError(f"{name}: non-finite weights")
        table.append({"name": name, "in_channels": int(kernel.shape[1]), "out_channels": int(kernel.shape[0]),
                      "pool_after": bool(pool_after)})
        for kind, arr in (("kernel", kernel), ("bias", bias)):
            offset = len(payload)
            payload += arr.tobytes()
            entries.append({"name": name, "kind": kind, "shape": list(arr.shape), "dtype": "f32",
                            "byte_offset": offset, "byte_length": len(payload) - offset})
    manifest = {
        "architecture": architecture,
        "pooling": pooling,
        "input": {"channel_order": channel_order, "mean": list(mean)},
        "layers": table,
        "entries": entries,
    }
    text = json.dumps(manifest).encode("utf-8")
    with open(path, "wb") as out:
        out.write(MAGIC)
        out.write(struct.pack("<Q", len(text)))
        out.write(text)
        out.write(payload)
        out.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


def load_source(path):
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as data:
            return {k: np.asarray(data[k]) for k in data.files}
    import torch

    state = torch.load(path, map_location="cpu")
    if isinstance(state, dict) and "state_dict" in state:
        state = state["state_dict"]
    if hasattr(state, "state_dict"):
        state = state.state_dict()
    return {k: v.detach().cpu().numpy() for k, v in state.items()}


def find(tensors, name, position, suffix):
    for key in (f"{name}.{suffix}", f"features.{TORCHVISION_INDEX[position]}.{suffix}"):
        if key in tensors:
            return tensors[key]
    raise KeyError(f"{name}.{suffix} not found (also tried features.{TORCHVISION_INDEX[position]}.{suffix})")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("source", help="state dict (.pth/.pt) or .npz archive")
    parser.add_argument("output", help="container to write (.nstw)")
    parser.add_argument("--pooling", choices=["average", "max"], default="average")
    parser.add_argument("--channel-order", default="BGR", help="RGB component feeding each input channel")
    parser.add_argument("--mean", type=float, nargs=3, default=[104.006, 116.669, 122.679],
                        help="per input channel mean, in channel order")
    args = parser.parse_args(argv)

    tensors = load_source(args.source)
    layers = []
    in_channels = 3
    for position, (name, out_channels, pool_after) in enumerate(VGG19):
        kernel = find(tensors, name, position, "weight")
        bias = find(tensors, name, position, "bias")
        if kernel.shape != (out_channels, in_channels, 3, 3):
            sys.exit(f"{name}: kernel shape {tuple(kernel.shape)}, expected {(out_channels, in_channels, 3, 3)}")
        layers.append((name, kernel, bias, pool_after))
        in_channels = out_channels
    write_container(args.output, layers, pooling=args.pooling, channel_order=args.channel_order, mean=args.mean)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
