"""Python front end to the detachment library.

Exact quantities come back as ``fractions.Fraction``; everything else is a
float, a dict or a list.
"""

from fractions import Fraction
import json

from . import _core
from ._core import (  # noqa: F401
    DomainError,
    SchemaError,
    critical_k,
    critical_limit,
    expected_detachment_states,
    experiment_names,
    ie_cdf,
    lonely_moments,
    mc_estimate,
    mc_samples,
    pi_detached,
    support_pmf,
    tau_cdf,
    tau_survival,
)


def pi_detached_exact(n, k):
    return Fraction(_core.pi_detached_exact(n, k))


def tau_cdf_exact(n, k):
    return Fraction(_core.tau_cdf_exact(n, k))


def joint_detached_exact(n, k, l):
    return Fraction(_core.joint_detached_exact(n, k, l))


def cond_detached_exact(n, k1, k2):
    return Fraction(_core.cond_detached_exact(n, k1, k2))


def expected_detachment_states_exact(n, k):
    return Fraction(_core.expected_detachment_states_exact(n, k))


def support_pmf_exact(n, k):
    return [Fraction(s) for s in _core.support_pmf_exact(n, k)]


def run_experiment(name, output_path="", **parameters):
    """Run a registered experiment; returns the JSON report as a dict."""
    return _core.run_experiment(name, json.dumps(parameters), output_path)


def cli(*args):
    """Run the command-line front end; returns (exit_code, stdout, stderr)."""
    return _core.cli([str(a) for a in args])
