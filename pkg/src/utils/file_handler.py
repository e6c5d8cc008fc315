"""
File handling for instances, experiment documents and result tables
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict, ValidationError

from src.core.config import PROFILE_CAP
from src.core.distributions import GeneralDistribution, IndependentDistribution, TypeDistribution
from src.core.errors import InstanceValidationError
from src.core.game import GameInstance
from src.utils.validators import validate_instance_document

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['run_id', 'round', 'region_index', 'expected_regret', 'cumulative_regret', 'realized_utility']
BENCH_COLUMNS = ['learner', 'round', 'mean_cumulative_regret', 'ci_low', 'ci_high', 'replications']


class DistributionDocument(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['general', 'independent']
    joint: Optional[List[float]] = None
    marginals: Optional[List[List[float]]] = None


class InstanceFile(BaseModel):
    """JSON instance: leader table row-major over joint actions (follower 0 first), ℓ fastest"""
    model_config = ConfigDict(extra='forbid')

    n: int
    L: int
    A: int
    K: int
    leader_utility: List[float]
    follower_utilities: List[List[List[List[float]]]]
    distribution: DistributionDocument
    tie_preference: Optional[List[List[List[int]]]] = None


def read_document(path: str) -> Dict[str, Any]:
    """Parse a JSON or YAML file into a dict"""
    if not os.path.exists(path):
        raise FileNotFoundError(f"File does not exist: {path}")
    with open(path, 'r', encoding='utf-8') as handle:
        text = handle.read()
    try:
        if Path(path).suffix.lower() == '.json':
            doc = json.loads(text)
        else:
            doc = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise InstanceValidationError(f"Error reading {path}: {e}")
    if not isinstance(doc, dict):
        raise InstanceValidationError(f"{path} must contain a JSON/YAML object")
    return doc


def instance_from_document(doc: Dict[str, Any], profile_cap: int = PROFILE_CAP) -> GameInstance:
    """Validate a parsed instance document and build the game"""
    try:
        parsed = InstanceFile.model_validate(doc)
    except ValidationError as e:
        raise InstanceValidationError(f"Instance document does not match the schema:\n{e}")

    result = validate_instance_document(parsed.model_dump())
    for warning in result['warnings']:
        logger.warning(f"Instance: {warning}")
    if not result['valid']:
        raise InstanceValidationError("Invalid instance:\n  " + "\n  ".join(result['errors']))

    spec = parsed.distribution
    distribution: TypeDistribution
    if spec.kind == 'general':
        distribution = GeneralDistribution(spec.joint, n=parsed.n, K=parsed.K, profile_cap=profile_cap)
    else:
        distribution = IndependentDistribution(spec.marginals)
    return GameInstance.from_tables(parsed.leader_utility, parsed.follower_utilities, distribution,
                                    tie_preference=parsed.tie_preference)


def load_instance(path: str, profile_cap: int = PROFILE_CAP) -> GameInstance:
    instance = instance_from_document(read_document(path), profile_cap=profile_cap)
    logger.info(f"Loaded instance from {path}: n={instance.n}, L={instance.L}, A={instance.A}, K={instance.K}")
    return instance


def instance_to_document(instance: GameInstance, profile_cap: int = PROFILE_CAP) -> Dict[str, Any]:
    view = instance.public_view()
    if not view.is_dense:
        raise ValueError("only instances with a dense leader table can be saved")
    dist = instance.distribution
    if isinstance(dist, IndependentDistribution):
        distribution = {'kind': 'independent', 'marginals': [m.tolist() for m in dist.marginals]}
    else:
        distribution = {'kind': 'general', 'joint': dist.joint(profile_cap).tolist()}
    doc: Dict[str, Any] = {
        'n': view.n,
        'L': view.L,
        'A': view.A,
        'K': view.K,
        'leader_utility': view.leader_table.ravel().tolist(),
        'follower_utilities': view.follower_utilities.tolist(),
        'distribution': distribution,
    }
    if view.tie_preference is not None:
        doc['tie_preference'] = view.tie_preference.tolist()
    return doc


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def save_instance(instance: GameInstance, path: str, profile_cap: int = PROFILE_CAP) -> str:
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(instance_to_document(instance, profile_cap), handle)
    logger.info(f"Saved instance to {path}")
    return path


def write_table(frame: pd.DataFrame, path: str) -> str:
    """Write a result table as CSV with a header and no index"""
    _ensure_parent(path)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_trace_file(path: str) -> pd.DataFrame:
    """Read a trace CSV and check rounds are contiguous per run"""
    frame = pd.read_csv(path)
    if list(frame.columns) != TRACE_COLUMNS:
        raise InstanceValidationError(f"trace file columns {list(frame.columns)} != {TRACE_COLUMNS}")
    for run_id, group in frame.groupby('run_id'):
        rounds = group['round'].to_numpy()
        if not np.array_equal(rounds, np.arange(1, len(rounds) + 1)):
            raise InstanceValidationError(f"run {run_id} does not have contiguous rounds 1..{len(rounds)}")
    return frame
