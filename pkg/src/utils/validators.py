"""
Instance document validation
"""
import math
from typing import Any, Dict, List

import numpy as np

PROB_TOL = 1e-9


def _shape(value: Any) -> tuple:
    """Shape of a rectangular nested list, or () with -1 entries where ragged"""
    try:
        array = np.array(value, dtype=float)
    except (TypeError, ValueError):
        return (-1,)
    return array.shape


def _unit_range_errors(values: np.ndarray, name: str) -> List[str]:
    if not np.all(np.isfinite(values)):
        return [f"{name} contains NaN or infinite values"]
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        return [f"{name} must lie in [0, 1], got range [{values.min()}, {values.max()}]"]
    return []


def _probability_errors(table: np.ndarray, name: str) -> List[str]:
    if not np.all(np.isfinite(table)):
        return [f"{name} contains NaN or infinite values"]
    errors = []
    if np.any(table < 0):
        errors.append(f"{name} has negative probabilities")
    if not math.isclose(float(table.sum()), 1.0, abs_tol=PROB_TOL):
        errors.append(f"{name} sums to {float(table.sum())}, expected 1")
    return errors


def validate_instance_document(doc: Dict[str, Any]) -> Dict[str, Any]:
    """Validate an instance document's sizes, tables and distribution"""

    result = {
        'valid': True,
        'errors': [],
        'warnings': []
    }

    sizes = {}
    for key, minimum in (('n', 1), ('L', 2), ('A', 2), ('K', 1)):
        value = doc.get(key)
        if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
            result['errors'].append(f"'{key}' must be an integer >= {minimum}, got {value!r}")
        else:
            sizes[key] = value
    if len(sizes) < 4:
        result['valid'] = False
        return result
    n, L, A, K = sizes['n'], sizes['L'], sizes['A'], sizes['K']

    leader = doc.get('leader_utility')
    if leader is None:
        result['errors'].append("missing 'leader_utility'")
    elif _shape(leader) != (A ** n * L,):
        result['errors'].append(f"'leader_utility' must be a flat array of A^n·L = {A ** n * L} numbers")
    else:
        table = np.array(leader, dtype=float)
        result['errors'].extend(_unit_range_errors(table, "leader_utility"))
        if table.size and np.ptp(table) == 0:
            result['warnings'].append("leader utility is constant; every strategy is optimal")

    follower = doc.get('follower_utilities')
    if follower is None:
        result['errors'].append("missing 'follower_utilities'")
    elif _shape(follower) != (n, L, A, K):
        result['errors'].append(f"'follower_utilities' must have shape [n][L][A][K] = {[n, L, A, K]}, "
                                f"got {list(_shape(follower))}")
    else:
        result['errors'].extend(_unit_range_errors(np.array(follower, dtype=float), "follower_utilities"))

    distribution = doc.get('distribution')
    if not isinstance(distribution, dict):
        result['errors'].append("missing 'distribution' object")
    else:
        kind = distribution.get('kind')
        if kind == 'general':
            joint = distribution.get('joint')
            if joint is None or _shape(joint) != (K ** n,):
                result['errors'].append(f"general distribution needs 'joint' with K^n = {K ** n} entries")
            else:
                table = np.array(joint, dtype=float)
                result['errors'].extend(_probability_errors(table, "joint"))
                if np.all(np.isfinite(table)) and np.any(table == 0):
                    result['warnings'].append(f"{int(np.sum(table == 0))} type profiles have probability 0")
        elif kind == 'independent':
            marginals = distribution.get('marginals')
            if marginals is None or _shape(marginals) != (n, K):
                result['errors'].append(f"independent distribution needs 'marginals' of shape [n][K] = {[n, K]}")
            else:
                for i, marginal in enumerate(np.array(marginals, dtype=float)):
                    result['errors'].extend(_probability_errors(marginal, f"marginal {i}"))
        else:
            result['errors'].append(f"distribution kind must be 'general' or 'independent', got {kind!r}")

    ranks = doc.get('tie_preference')
    if ranks is not None and _shape(ranks) != (n, K, A):
        result['errors'].append(f"'tie_preference' must have shape [n][K][A] = {[n, K, A]}")

    result['valid'] = len(result['errors']) == 0
    return result
