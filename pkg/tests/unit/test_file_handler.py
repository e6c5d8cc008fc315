import json

import numpy as np
import pandas as pd
import pytest

from src.core.errors import InstanceValidationError
from src.harness.generators import gen_multi_follower_hard, gen_class_c
from src.solvers.equilibrium import offline_optimal
from src.utils.file_handler import (
    TRACE_COLUMNS,
    instance_from_document,
    instance_to_document,
    load_instance,
    read_document,
    read_trace_file,
    save_instance,
    write_table,
)
from src.utils.validators import validate_instance_document


@pytest.fixture
def tiny_document():
    """One follower, two leader actions, two actions, one type"""
    return {
        'n': 1, 'L': 2, 'A': 2, 'K': 1,
        'leader_utility': [1.0, 0.0, 0.0, 1.0],
        'follower_utilities': [[[[1.0], [0.0]], [[0.0], [1.0]]]],
        'distribution': {'kind': 'general', 'joint': [1.0]},
    }


class TestValidator:
    def test_valid_document(self, tiny_document):
        """A well-formed document passes"""
        result = validate_instance_document(tiny_document)
        assert result['valid']
        assert result['errors'] == []

    def test_leader_length(self, tiny_document):
        """Leader table needs A^n·L numbers"""
        tiny_document['leader_utility'] = [0.5] * 3
        result = validate_instance_document(tiny_document)
        assert not result['valid']
        assert any('A^n·L' in e for e in result['errors'])

    def test_out_of_range(self, tiny_document):
        """Utilities must lie in [0, 1]"""
        tiny_document['follower_utilities'][0][0][0][0] = 2.0
        assert not validate_instance_document(tiny_document)['valid']

    def test_probabilities_sum_to_one(self, tiny_document):
        """Joint must sum to one"""
        tiny_document['distribution']['joint'] = [0.9]
        result = validate_instance_document(tiny_document)
        assert any('sums to' in e for e in result['errors'])

    def test_independent_shape(self, tiny_document):
        """Marginals need shape [n][K]"""
        tiny_document['distribution'] = {'kind': 'independent', 'marginals': [[0.5, 0.5]]}
        assert not validate_instance_document(tiny_document)['valid']

    def test_sizes(self, tiny_document):
        """L >= 2 and integer sizes"""
        tiny_document['L'] = 1
        result = validate_instance_document(tiny_document)
        assert not result['valid']
        assert result['errors'] == ["'L' must be an integer >= 2, got 1"]

    def test_constant_leader_warns(self, tiny_document):
        """Constant leader payoffs are legal but flagged"""
        tiny_document['leader_utility'] = [0.5] * 4
        result = validate_instance_document(tiny_document)
        assert result['valid']
        assert len(result['warnings']) == 1


class TestInstanceFiles:
    def test_document_round_trip(self, g1):
        """Saved and reloaded games share their optimum"""
        game = instance_from_document(instance_to_document(g1))
        assert offline_optimal(game.public_view(), game.distribution).value == pytest.approx(0.6)
        assert np.array_equal(game.public_view().tie_preference, g1.public_view().tie_preference)

    def test_save_and_load(self, tmp_path):
        """Independent distributions keep their marginals"""
        game = gen_multi_follower_hard(2, 2, gen_class_c(2, 0.2, '+'))
        path = save_instance(game, str(tmp_path / "nested" / "multi.json"))
        loaded = load_instance(path)
        assert np.allclose(loaded.distribution.marginal(1), game.distribution.marginal(1))
        assert np.array_equal(loaded.public_view().leader_table, game.public_view().leader_table)

    def test_unknown_keys_rejected(self, tiny_document):
        """Extra fields fail the schema"""
        tiny_document['comment'] = "hello"
        with pytest.raises(InstanceValidationError):
            instance_from_document(tiny_document)

    def test_invalid_document(self, tiny_document):
        """Validator errors surface as InstanceValidationError"""
        tiny_document['distribution']['joint'] = [0.5]
        with pytest.raises(InstanceValidationError):
            instance_from_document(tiny_document)

    def test_read_document_formats(self, tmp_path, tiny_document):
        """JSON and YAML both parse"""
        json_path = tmp_path / "game.json"
        json_path.write_text(json.dumps(tiny_document))
        yaml_path = tmp_path / "game.yaml"
        yaml_path.write_text("n: 1\nL: 2\n")
        assert read_document(str(json_path))['K'] == 1
        assert read_document(str(yaml_path)) == {'n': 1, 'L': 2}

    def test_read_document_errors(self, tmp_path):
        """Missing, malformed and non-object files"""
        with pytest.raises(FileNotFoundError):
            read_document(str(tmp_path / "missing.json"))
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        with pytest.raises(InstanceValidationError):
            read_document(str(broken))
        listing = tmp_path / "list.yaml"
        listing.write_text("- 1\n- 2\n")
        with pytest.raises(InstanceValidationError):
            read_document(str(listing))


class TestTraceFiles:
    def _frame(self, rounds):
        return pd.DataFrame({
            'run_id': 0,
            'round': rounds,
            'region_index': 0,
            'expected_regret': 0.1,
            'cumulative_regret': np.cumsum([0.1] * len(rounds)),
            'realized_utility': 1.0,
        }, columns=TRACE_COLUMNS)

    def test_round_trip(self, tmp_path):
        """Contiguous rounds read back unchanged"""
        path = write_table(self._frame([1, 2, 3]), str(tmp_path / "out" / "trace.csv"))
        frame = read_trace_file(path)
        assert list(frame.columns) == TRACE_COLUMNS
        assert len(frame) == 3

    def test_gap_in_rounds(self, tmp_path):
        """Missing rounds are rejected"""
        path = write_table(self._frame([1, 3]), str(tmp_path / "trace.csv"))
        with pytest.raises(InstanceValidationError):
            read_trace_file(path)

    def test_wrong_columns(self, tmp_path):
        """Header must match"""
        path = str(tmp_path / "trace.csv")
        pd.DataFrame({'round': [1]}).to_csv(path, index=False)
        with pytest.raises(InstanceValidationError):
            read_trace_file(path)
