"""Exact ReLU network data model.

A network is a list of affine layers with componentwise max(0, ·) between
consecutive layers and no activation after the last one.  All parameters are
rationals; evaluation, composition and serialization are exact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactgeom import format_rational, parse_rational, vdot


@dataclass(frozen=True)
class AffineLayer:
    """x ↦ weights·x + bias with exact rational entries."""

    weights: tuple  # out_dim rows of in_dim rationals
    bias: tuple  # out_dim rationals

    def __post_init__(self):
        if len(self.weights) != len(self.bias):
            raise ValueError("weights row count must equal bias length")
        if len(self.weights) == 0:
            raise ValueError("empty layer")
        widths = {len(r) for r in self.weights}
        if len(widths) != 1:
            raise ValueError("ragged weight matrix")

    @property
    def out_dim(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return len(self.weights[0])

    def apply(self, x: Sequence) -> tuple:
        if len(x) != self.in_dim:
            raise ValueError("dimension mismatch in affine layer")
        return tuple(vdot(row, x) + b for row, b in zip(self.weights, self.bias))


@dataclass(frozen=True)
class ReluNetwork:
    layers: tuple

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer dimensions do not chain: {a.out_dim} -> {b.in_dim}"
                )

    @property
    def architecture(self) -> tuple:
        return (self.layers[0].in_dim,) + tuple(l.out_dim for l in self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def num_hidden_layers(self) -> int:
        return len(self.layers) - 1


@dataclass(frozen=True)
class NeuronId:
    """Neuron (index, layer), both 1-based; layer L+1 is the output layer."""

    layer: int
    index: int

    def validate(self, net: ReluNetwork):
        if not 1 <= self.layer <= len(net.layers):
            raise ValueError(f"layer {self.layer} out of range")
        if not 1 <= self.index <= net.layers[self.layer - 1].out_dim:
            raise ValueError(f"neuron index {self.index} out of range in layer {self.layer}")


def _relu(v: Sequence) -> tuple:
    return tuple(x if x > 0 else Fraction(0) for x in v)


def eval_network(net: ReluNetwork, x: Sequence) -> tuple:
    """Exact forward pass; returns the output vector (no final activation)."""
    v = tuple(Fraction(c) for c in x)
    for layer in net.layers[:-1]:
        v = _relu(layer.apply(v))
    return net.layers[-1].apply(v)


def eval_scalar(net: ReluNetwork, x: Sequence) -> Fraction:
    out = eval_network(net, x)
    if len(out) != 1:
        raise ValueError("network output is not scalar")
    return out[0]


def eval_preactivation(net: ReluNetwork, nid: NeuronId, x: Sequence) -> Fraction:
    """Value of neuron (index, layer) before its ReLU."""
    nid.validate(net)
    v = tuple(Fraction(c) for c in x)
    for layer in net.layers[: nid.layer - 1]:
        v = _relu(layer.apply(v))
    pre = net.layers[nid.layer - 1].apply(v)
    return pre[nid.index - 1]


def compose(outer: ReluNetwork, inner: ReluNetwork) -> ReluNetwork:
    """Network computing outer(inner(x)).

    Inner's final affine layer is fused with outer's first affine layer (matrix
    product plus bias propagation), so the composite exposes one flat list of
    neurons in evaluation order.
    """
    last = inner.layers[-1]
    first = outer.layers[0]
    if last.out_dim != first.in_dim:
        raise ValueError("inner output dimension does not match outer input")
    fused_w = tuple(
        tuple(vdot(frow, col) for col in zip(*last.weights))
        for frow in first.weights
    )
    fused_b = tuple(vdot(frow, last.bias) + fb for frow, fb in zip(first.weights, first.bias))
    fused = AffineLayer(fused_w, fused_b)
    return ReluNetwork(inner.layers[:-1] + (fused,) + outer.layers[1:])


def network_to_json(net: ReluNetwork) -> dict:
    return {
        "architecture": list(net.architecture),
        "layers": [
            {
                "weights": [[format_rational(v) for v in row] for row in l.weights],
                "bias": [format_rational(v) for v in l.bias],
            }
            for l in net.layers
        ],
    }


def network_from_json(obj: dict) -> ReluNetwork:
    if not isinstance(obj, dict) or "layers" not in obj:
        raise ValueError("malformed network file: missing layers")
    layers = []
    for i, layer in enumerate(obj["layers"]):
        try:
            weights = tuple(
                tuple(parse_rational(v) for v in row) for row in layer["weights"]
            )
            bias = tuple(parse_rational(v) for v in layer["bias"])
            layers.append(AffineLayer(weights, bias))
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"malformed layer {i}: {e}") from e
    try:
        net = ReluNetwork(tuple(layers))
    except ValueError as e:
        raise ValueError(f"layer shapes do not chain: {e}") from e
    if "architecture" in obj and tuple(obj["architecture"]) != net.architecture:
        raise ValueError(
            f"declared architecture {obj['architecture']} does not match layers "
            f"{list(net.architecture)}"
        )
    return net


def save_network(net: ReluNetwork, path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(network_to_json(net), f, indent=2, sort_keys=True)
        f.write("\n")


def load_network(path: str) -> ReluNetwork:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"malformed network file {path}: {e}") from e
    return network_from_json(obj)


def network_fingerprint(net: ReluNetwork) -> str:
    """Content hash of the canonical JSON serialization."""
    blob = json.dumps(network_to_json(net), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
