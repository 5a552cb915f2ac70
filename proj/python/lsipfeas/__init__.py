"""Feasibility solver for homogeneous linear semi-infinite systems.

Problems and certificates are plain dicts in the same JSON layout the
``lsip`` command line tool reads and writes.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    InvalidCertificate,
    InvalidInstance,
    InvalidQuery,
    LinalgError,
    LsipError,
    OracleContractViolation,
    UnresolvableWitness,
    certifying_cholesky,
    rescale_budget,
    step_alpha,
)

__all__ = [
    "ConfigError",
    "InvalidCertificate",
    "InvalidInstance",
    "InvalidQuery",
    "LinalgError",
    "LsipError",
    "OracleContractViolation",
    "UnresolvableWitness",
    "certifying_cholesky",
    "generate",
    "query",
    "rescale_budget",
    "solve",
    "solve_custom",
    "step_alpha",
    "verify",
]


def solve(problem, epsilon=1e-6, *, mu=None, max_rescalings=None, mode="auto", timing=False):
    """Run the solver and return the report dict."""
    return json.loads(
        _core.solve_json(json.dumps(problem), epsilon, mu, max_rescalings, mode, timing)
    )


def solve_custom(m, query_fn, *, resolve=None, epsilon=1e-6, mu=None, max_rescalings=None,
                 mode="auto", timing=False):
    """Solve a system given by a separation callback.

    ``query_fn(y)`` returns None when every constraint is strict at ``y`` and
    otherwise a pair ``(label, column)`` with ``column @ y <= 0``. ``label`` is
    a list of floats naming the index. ``resolve(label)``, when given, maps a
    label back to its column for certificate checks.
    """

    def wrapped(y):
        r = query_fn(list(y))
        if r is None:
            return None
        label, column = r
        return [float(v) for v in label], [float(v) for v in column]

    return json.loads(
        _core.solve_custom_json(m, wrapped, resolve, epsilon, mu, max_rescalings, mode, timing)
    )


def query(problem, y):
    """Oracle call: None when ``y`` is strictly feasible, else a dict with
    ``witness`` and ``column``."""
    r = _core.query_json(json.dumps(problem), [float(v) for v in y])
    return None if r is None else json.loads(r)


def verify(problem, certificate):
    """Check a certificate dict (or a solve report) against a problem."""
    return json.loads(_core.verify_json(json.dumps(problem), json.dumps(certificate)))


def generate(kind, m, n, seed=0, target="feasible_d", margin=0.1):
    """Planted instance: returns ``(problem, certificate)`` dicts."""
    problem, certificate = _core.generate_json(kind, m, n, seed, target, margin)
    return json.loads(problem), json.loads(certificate)
