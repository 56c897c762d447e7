"""
Sérialisation JSON des instances, solutions et exécutions.

Les flottants sont écrits par json (repr Python), donc relus à l'identique.
"""

import numpy as np

from .exceptions import InvalidShape, RdtspError
from .models import MetricInstance, Tour
from .services.evaluation import instance_from_points


def to_builtin(value):
    """Convertit récursivement les scalaires et tableaux numpy en types JSON."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, frozenset, set)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_builtin(v) for v in items]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class InstanceSerializer:
    """
    Fichier d'instance : {n, gamma, points | dist, provenance}.

    Les instances euclidiennes sont écrites par leurs points (départ en
    premier), les autres par leur matrice complète.
    """

    class Meta:
        fields = ('n', 'gamma', 'points', 'dist', 'provenance')
        required = ('n', 'gamma')

    def to_dict(self, inst):
        data = {'n': inst.n, 'gamma': inst.gamma}
        if inst.coords is not None:
            data['points'] = to_builtin(inst.coords)
        else:
            data['dist'] = to_builtin(inst.dist)
        data['provenance'] = to_builtin(inst.provenance or {})
        return data

    def from_dict(self, data):
        """
        Raises:
            RdtspError: champ manquant
            InvalidShape: ni points ni dist, n ou gamma illisible, ou n incohérent
        """
        missing = [field for field in self.Meta.required if field not in data]
        if missing:
            raise RdtspError(f"Champs manquants dans l'instance : {', '.join(missing)}")
        try:
            n = int(data['n'])
            gamma = float(data['gamma'])
        except (TypeError, ValueError) as e:
            raise InvalidShape(f"n ou gamma illisible : {e}")
        provenance = dict(data.get('provenance') or {})
        if 'points' in data:
            inst = instance_from_points(self._array(data['points']), gamma, provenance)
            if inst.n != n:
                raise InvalidShape(f"n={n} mais {inst.n} récompenses dans les points")
            return inst
        if 'dist' in data:
            dist = self._array(data['dist'])
            # Matrice aplatie ligne par ligne
            if dist.ndim == 1 and dist.size == (n + 1) ** 2:
                dist = dist.reshape(n + 1, n + 1)
            return MetricInstance(n, gamma, dist, provenance=provenance)
        raise InvalidShape("L'instance doit contenir 'points' ou 'dist'")

    @staticmethod
    def _array(values):
        try:
            return np.asarray(values, dtype=float)
        except (TypeError, ValueError) as e:
            raise InvalidShape(f"Tableau numérique illisible : {e}")


class RunSerializer:
    """
    Sortie d'une ou plusieurs exécutions, politique ou solveur exact :
    {policy | solver, n, gamma, seed, runs: [{value, tour}], values, mean}.
    """

    class Meta:
        fields = ('policy', 'solver', 'n', 'gamma', 'seed', 'runs', 'values', 'mean')

    def to_dict(self, inst, results, policy=None, solver=None, seed=None, walks=False):
        """
        Args:
            inst: MetricInstance
            results: Liste de (Tour, valeur)
            policy: Nom court de la politique (ou None)
            solver: Nom du solveur exact (ou None)
            seed: Graine utilisée
            walks: Inclure la marche physique quand elle existe
        """
        runs = []
        for tour, value in results:
            run = {'value': float(value), 'tour': list(tour.order)}
            if walks and tour.walk is not None:
                run['walk'] = list(tour.walk)
            runs.append(run)
        values = [run['value'] for run in runs]
        data = {}
        if policy is not None:
            data['policy'] = policy
        if solver is not None:
            data['solver'] = solver
        data.update({
            'n': inst.n,
            'gamma': inst.gamma,
            'seed': seed,
            'runs': runs,
            'values': values,
            'mean': float(np.mean(values)) if values else None,
        })
        return data

    def tours(self, data):
        """Relit les tournées d'une sortie, dans l'ordre des exécutions."""
        try:
            return [
                (Tour(run['tour'], run.get('walk')), float(run['value']))
                for run in data['runs']
            ]
        except (KeyError, TypeError) as e:
            raise RdtspError(f"Sortie d'exécution mal formée : {e}")


class SolutionSerializer(RunSerializer):
    """Solution exacte dans le même format qu'une exécution de politique."""

    def to_dict(self, inst, solution, seed=None):
        return super().to_dict(inst, [(solution.tour, solution.value)],
                               solver=solution.solver, seed=seed)
