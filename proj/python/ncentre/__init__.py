"""Fixed-energy N-centre problem: discrete Maupertuis minimization.

Thin layer over the compiled ``_ncentre`` module. Potentials and configs are
plain dicts (the same JSON the command-line runner reads); paths are
``(n, 3)`` NumPy arrays.
"""

import json

import numpy as np

from . import _ncentre
from ._ncentre import NcentreError, min_total_angle, parabolic_angle_quadrature

__all__ = [
    "NcentreError",
    "evaluate",
    "jacobi_length",
    "lc_diagnostics",
    "maupertuis",
    "min_total_angle",
    "parabolic_angle_quadrature",
    "run_command",
    "solve",
    "spiral_path",
    "winding_vector",
]


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def evaluate(potential, points):
    return np.asarray(_ncentre.evaluate(_dump(potential), np.atleast_2d(points)))


def maupertuis(potential, nodes, h, delta=0.0):
    return json.loads(_ncentre.maupertuis(_dump(potential), nodes, h, delta))


def jacobi_length(potential, nodes, h):
    return _ncentre.jacobi_length(_dump(potential), nodes, h)


def winding_vector(potential, nodes):
    return _ncentre.winding_vector(_dump(potential), nodes)


def spiral_path(p1, p2, centre, angle, segments):
    return _ncentre.spiral_path(list(p1), list(p2), list(centre), angle, segments)


def lc_diagnostics(potential, nodes, h, centre):
    return json.loads(_ncentre.lc_diagnostics(_dump(potential), nodes, h, centre))


def solve(config, jobs=1):
    """Multi-start minimization; one dict per start with ``result`` and ``nodes``."""
    runs = _ncentre.solve(_dump(config), jobs)
    for run in runs:
        if "result" in run:
            run["result"] = json.loads(run["result"])
    return runs


def run_command(command, config, out, jobs=1):
    """Same as the ``ncentre`` executable; returns its exit code."""
    return _ncentre.run_command(command, _dump(config), str(out), jobs)
