"""JSON encoding of systems, states and channels.

Complex scalars are ``[re, im]`` pairs and matrices are row-major nested
lists. Python's float ``repr`` is the shortest round-trip decimal, so
``loads(dumps(x))`` reproduces every double exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..algebra import State, System
from ..channels import Channel, from_stochastic_matrix
from ..errors import InvalidArgument


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise InvalidArgument("matrix must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def system_to_json(a: System) -> dict:
    return {"blocks": list(a.block_dims)}


def system_from_json(data: dict) -> System:
    try:
        return System(tuple(data["blocks"]))
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"bad system JSON: {exc}") from exc


def state_to_json(omega: State) -> dict:
    return {
        "system": system_to_json(omega.system),
        "block_ops": [matrix_to_json(b) for b in omega.block_ops],
    }


def state_from_json(data: dict) -> State:
    try:
        system = system_from_json(data["system"])
        blocks = data["block_ops"]
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"bad state JSON: {exc}") from exc
    return State(system, [matrix_from_json(b) for b in blocks])


def channel_to_json(f: Channel) -> dict:
    return {
        "source": system_to_json(f.source),
        "target": system_to_json(f.target),
        "choi": [[matrix_to_json(c) for c in row] for row in f.choi],
    }


def channel_from_json(data: dict, *, check: bool = True) -> Channel:
    """Decode a channel; ``{"stochastic": [[...]]}`` is accepted for classical maps."""
    if "stochastic" in data:
        return from_stochastic_matrix(data["stochastic"])
    try:
        source = system_from_json(data["source"])
        target = system_from_json(data["target"])
        grid = [[matrix_from_json(c) for c in row] for row in data["choi"]]
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"bad channel JSON: {exc}") from exc
    return Channel(source, target, grid, check=check)


def dumps(obj, **kw) -> str:
    return json.dumps(obj, sort_keys=True, **kw)


def read_json(path) -> dict:
    with open(Path(path)) as fh:
        return json.load(fh)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj, indent=2) + "\n")
