"""First-eigenvalue maximization on symmetric surfaces."""

import json

import numpy as np

from . import _core
from ._core import EigenmaxError, Mesh, builtin, nodal_domain_count, set_max_jobs

__all__ = [
    "EigenmaxError",
    "Mesh",
    "builtin",
    "degeneration_dag",
    "descriptor_genus",
    "descriptor_mesh",
    "gl_descent",
    "gl_energy",
    "maximize",
    "nodal_domain_count",
    "run_command",
    "set_max_jobs",
    "spectrum",
    "structure_report",
    "validate_species",
]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def descriptor_mesh(descriptor, vertices):
    return _core.descriptor_mesh(_text(descriptor), vertices)


def descriptor_genus(descriptor):
    return _core.descriptor_genus(_text(descriptor))


def validate_species(species):
    return json.loads(_core.validate_species(_text(species)))


def degeneration_dag(descriptor, depth=1, all_cases=False):
    return json.loads(_core.degeneration_dag(_text(descriptor), depth, all_cases))


def spectrum(mesh, kind="laplace", count=10, bc="", seed=1):
    """Returns the spectrum record and the eigenvector matrix (one column per eigenvalue)."""
    record, vectors = _core.spectrum(mesh, kind, count, bc, seed)
    return json.loads(record), np.asarray(vectors)


def maximize(mesh, kind="laplace", tol=5e-3, max_iters=60, seed=1):
    return json.loads(_core.maximize(mesh, kind, tol, max_iters, seed))


def structure_report(mesh, kind="laplace", involution="", count=10, genus=-1):
    return json.loads(_core.structure_report(mesh, kind, involution, count, genus))


def gl_energy(mesh, u, eps, free_boundary=False):
    return _core.gl_energy(mesh, np.asarray(u, dtype=float), eps, free_boundary)


def gl_descent(mesh, u, eps, free_boundary=False, max_iters=200):
    """Returns (map, energy, residual, converged)."""
    return _core.gl_descent(mesh, np.asarray(u, dtype=float), eps, free_boundary, max_iters)


def run_command(command, source, **config):
    """Runs a CLI command in-process; returns (exit code, report)."""
    code, report = _core.run_command(command, _text(source), json.dumps(config))
    return code, json.loads(report)
