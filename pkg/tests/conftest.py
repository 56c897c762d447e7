import numpy as np
import pytest

from rdtsp_bench.models import MetricInstance
from rdtsp_bench.services.evaluation import instance_from_points


def random_instance(n, gamma, seed, scale=10.0):
    """Instance euclidienne aléatoire : départ et récompenses uniformes dans [0, scale]^2."""
    rng = np.random.default_rng(seed)
    return instance_from_points(rng.uniform(0.0, scale, size=(n + 1, 2)), gamma)


class RecordingInstance:
    """
    Enveloppe d'instance qui n'expose que n, gamma, rewards et distance_row,
    et note chaque ligne lue. Tout accès à la matrice complète échoue.
    """

    def __init__(self, inst):
        self._inst = inst
        self.n = inst.n
        self.gamma = inst.gamma
        self.rows = []

    @property
    def rewards(self):
        return self._inst.rewards

    def distance_row(self, i):
        self.rows.append(int(i))
        return self._inst.distance_row(i)


@pytest.fixture
def make_instance():
    return random_instance


@pytest.fixture
def line_points():
    # départ en 0, récompenses en 1, -1.5 et 3 sur l'axe x
    return [(0.0, 0.0), (1.0, 0.0), (-1.5, 0.0), (3.0, 0.0)]


@pytest.fixture
def triangle_matrix():
    return MetricInstance(2, 0.5, [[0.0, 1.0, 3.0], [1.0, 0.0, 1.0], [3.0, 1.0, 0.0]])
