import json

import numpy as np
import pytest

from rdtsp_bench.exceptions import InvalidShape
from rdtsp_bench.models import MetricInstance
from rdtsp_bench.serializers import InstanceSerializer


def test_start_only_instance_is_rejected():
    with pytest.raises(InvalidShape):
        MetricInstance(0, 0.5, [[0.0]])
    with pytest.raises(InvalidShape):
        InstanceSerializer().from_dict({'n': 0, 'gamma': 0.5, 'dist': [[0.0]]})


@pytest.mark.parametrize('data', [
    {'n': 'abc', 'gamma': 0.5, 'dist': [[0.0, 1.0], [1.0, 0.0]]},
    {'n': 1, 'gamma': 'half', 'dist': [[0.0, 1.0], [1.0, 0.0]]},
    {'n': None, 'gamma': 0.5, 'dist': [[0.0, 1.0], [1.0, 0.0]]},
    {'n': 1, 'gamma': 0.5, 'dist': [[0.0, 'far'], [1.0, 0.0]]},
    {'n': 1, 'gamma': 0.5, 'points': [[0.0, 0.0], [1.0]]},
])
def test_unreadable_fields_are_shape_errors(data):
    with pytest.raises(InvalidShape):
        InstanceSerializer().from_dict(data)


def test_flat_row_major_matrix_is_reshaped():
    serializer = InstanceSerializer()
    inst = serializer.from_dict({'n': 2, 'gamma': 0.5, 'dist': [0, 1, 3, 1, 0, 2, 3, 2, 0]})
    assert inst.dist.shape == (3, 3)
    assert inst.distance(0, 2) == 3.0
    assert inst.distance(1, 2) == 2.0
    written = json.loads(json.dumps(serializer.to_dict(inst)))
    assert written['dist'] == [[0.0, 1.0, 3.0], [1.0, 0.0, 2.0], [3.0, 2.0, 0.0]]
    assert np.array_equal(serializer.from_dict(written).dist, inst.dist)


def test_flat_matrix_of_the_wrong_size_is_rejected():
    with pytest.raises(InvalidShape):
        InstanceSerializer().from_dict({'n': 2, 'gamma': 0.5, 'dist': [0, 1, 1, 0]})
