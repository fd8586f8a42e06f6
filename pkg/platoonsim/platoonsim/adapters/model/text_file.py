import os
import logging
from typing import List, Sequence, Tuple

import numpy as np

from platoonsim.core.ddpg import DdpgNetworks
from platoonsim.core.errors import ModelFormatError
from platoonsim.core.neuralnet import IDENTITY, RELU, TANH, DenseLayer, Mlp, adam_init
from platoonsim.core.ports import ModelStore

logger = logging.getLogger(__name__)

MAGIC = "hcfs-model v1"
BLOCKS = ("actor", "critic", "target-actor", "target-critic")


def _format_dims(dims: Sequence[int]) -> str:
    return ",".join(str(d) for d in dims)


def _activations(n_layers: int, output: str) -> List[str]:
    return [RELU] * (n_layers - 1) + [output]


class TextModelStore(ModelStore):
    """Plain-text network file: header, layer dimensions, then one line per layer per block."""

    def save(self, networks: DdpgNetworks, path: str) -> None:
        lines = [
            MAGIC,
            f"actor={_format_dims(networks.actor.dims)} critic={_format_dims(networks.critic.dims)}",
        ]
        for name, net in zip(BLOCKS, (networks.actor, networks.critic,
                                      networks.target_actor, networks.target_critic)):
            lines.append(name)
            for layer in net.layers:
                values = list(layer.weight.ravel()) + list(layer.bias)
                lines.append(" ".join(repr(float(x)) for x in values))

        out_dir = os.path.dirname(path)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        logger.info(f"Saved model to {path}")

    def load(self, path: str) -> DdpgNetworks:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
        nets = parse_model(lines, path)
        logger.info(f"Loaded model from {path} (actor {nets.actor.dims}, critic {nets.critic.dims})")
        return nets


def _parse_dims(line: str, path: str) -> Tuple[List[int], List[int]]:
    try:
        fields = dict(part.split("=", 1) for part in line.split())
        actor = [int(d) for d in fields["actor"].split(",")]
        critic = [int(d) for d in fields["critic"].split(",")]
    except (ValueError, KeyError):
        raise ModelFormatError(f"malformed layer dimension line {line!r}", 2, path) from None
    if len(actor) < 2 or len(critic) < 2 or min(actor + critic) < 1 or critic[0] != actor[0] + 1:
        raise ModelFormatError(f"inconsistent layer dimensions {line!r}", 2, path)
    return actor, critic


def _parse_block(lines: List[str], start: int, name: str, dims: List[int], output: str, path: str) -> Mlp:
    if start >= len(lines) or lines[start].strip() != name:
        raise ModelFormatError(f"expected block {name!r}", start + 1, path)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        line_no = start + 2 + i
        if line_no > len(lines):
            raise ModelFormatError(f"block {name!r} ends early", line_no, path)
        try:
            values = np.array([float(tok) for tok in lines[line_no - 1].split()])
        except ValueError:
            raise ModelFormatError("non-numeric weight", line_no, path) from None
        expected = fan_in * fan_out + fan_out
        if len(values) != expected or not np.all(np.isfinite(values)):
            raise ModelFormatError(f"expected {expected} finite values, got {len(values)}", line_no, path)
        weight = values[:fan_in * fan_out].reshape(fan_out, fan_in)
        layers.append(DenseLayer(weight, values[fan_in * fan_out:].copy(), _activations(len(dims) - 1, output)[i]))
    return Mlp(layers)


def parse_model(lines: List[str], path: str = "<model>") -> DdpgNetworks:
    if not lines or lines[0].strip() != MAGIC:
        raise ModelFormatError(f"missing {MAGIC!r} header", 1, path)
    if len(lines) < 2:
        raise ModelFormatError("missing layer dimension line", 2, path)
    actor_dims, critic_dims = _parse_dims(lines[1], path)

    nets = []
    cursor = 2
    for name in BLOCKS:
        dims, output = (actor_dims, TANH) if "actor" in name else (critic_dims, IDENTITY)
        nets.append(_parse_block(lines, cursor, name, dims, output, path))
        cursor += len(dims)
    actor, critic, target_actor, target_critic = nets
    return DdpgNetworks(actor, critic, target_actor, target_critic, adam_init(actor), adam_init(critic))
