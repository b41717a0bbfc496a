"""Run configurations and the line-delimited snapshot record format.

A snapshot file starts with one header line followed by one JSON object
per record; the streaming endpoint pushes byte-identical lines, so a
recorded file replays to exactly the states a live client saw.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import geometry as geo
from .flow import METHODS

SCHEMA = "flow-snapshot/1"


@dataclass
class RunConfig:
    genus: int = 2
    domain_lengths: tuple = (2.0, 2.0, 0.5)
    domain_twists: tuple = (-1.5, 2.0, 0.5)
    target_lengths: tuple = (2.0, 2.0, 1.5)
    target_twists: tuple = (-1.5, 2.0, 0.5)
    depth: int = 2
    steiner_per_side: int = 2
    method: str = "karcher-com"
    stepsize: float = None  # fixed method only; None = stiffness-stable step
    tolerance: float = 1e-8
    max_iterations: int = 500_000
    snapshot_stride: int = 50
    out: str = None
    port: int = None
    seed: int = 0

    def validate(self):
        if not isinstance(self.genus, int) or self.genus < 2:
            raise ValueError(f"genus must be an integer >= 2, got {self.genus!r}")
        n = 3 * self.genus - 3
        for name in ("domain_lengths", "domain_twists", "target_lengths", "target_twists"):
            vals = tuple(float(v) for v in getattr(self, name))
            setattr(self, name, vals)
            if len(vals) != n:
                raise ValueError(f"{name} needs {n} entries for genus {self.genus}")
        if any(v <= 0 for v in self.domain_lengths + self.target_lengths):
            raise ValueError("all Fenchel-Nielsen lengths must be positive")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.stepsize is not None and self.stepsize <= 0:
            raise ValueError("stepsize must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.depth < 0 or self.steiner_per_side < 0:
            raise ValueError("depth and steiner_per_side must be nonnegative")
        if self.max_iterations < 1 or self.snapshot_stride < 1:
            raise ValueError("max_iterations and snapshot_stride must be >= 1")
        return self

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)


def format_header(config, num_vertices):
    payload = {
        "schema": SCHEMA,
        "vertices": int(num_vertices),
        "config": config.to_dict(),
    }
    return json.dumps(payload, sort_keys=True)


def format_record(state, global_points):
    """One snapshot line: scalars plus disk coordinates of the images."""
    disk = geo.disk_coords(np.asarray(global_points, dtype=float))
    payload = {
        "iteration": int(state.iteration),
        "energy": float(state.energy),
        "tension_norm": float(state.tension_norm),
        "stepsize": float(state.last_stepsize),
        "method": state.method,
        "images": [[float(u), float(v)] for u, v in disk],
    }
    return json.dumps(payload, sort_keys=True)


def parse_snapshot_file(text):
    """(header dict, list of record dicts) from file contents."""
    lines = [ln for ln in text.strip().split("\n") if ln]
    header = json.loads(lines[0])
    if header.get("schema") != SCHEMA:
        raise ValueError(f"unknown snapshot schema {header.get('schema')!r}")
    return header, [json.loads(ln) for ln in lines[1:]]
