"""
Jobs du banc RD-TSP.

Ce fichier contient uniquement l'orchestration.
La logique métier est dans le dossier services/.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import get_settings
from .exceptions import BenchCellError, NoReference, TooLarge, UsageError
from .models import (
    BenchReport,
    BenchRow,
    ExactSolution,
    PolicyKind,
    RngStream,
    ScenarioSpec,
    StarFamily,
    Tour,
)
from .services import (
    ExactSolverService,
    PolicyService,
    evaluate_tour,
    generate_scenario,
)
from .services.adversarial import reference_from_provenance
from .services.utils import derive_seed

logger = logging.getLogger(__name__)


# ========== Banc de mesure ==========

def instance_seed(master_seed, scenario, n, map_index):
    return derive_seed(master_seed, scenario, n, map_index)


def run_seed(master_seed, scenario, n, map_index, policy, run):
    return derive_seed(master_seed, scenario, n, map_index, policy, run)


def run_cell(task):
    """
    Une cellule (scénario, n, carte) : génère l'instance puis exécute
    chaque politique. Fonction de module pour être envoyée aux processus.

    Args:
        task: dict (master_seed, scenario, n, map_index, policies, n_alg,
              travel, rng_algorithm, generator_version)

    Returns:
        dict: {'key': (scenario, n, map_index), 'results': {policy: (mean, std, runs)}}

    Raises:
        BenchCellError: toute erreur, avec la provenance de la cellule
    """
    scenario, n, map_index = task['scenario'], task['n'], task['map_index']
    cell = {'scenario': scenario, 'n': n, 'map_index': map_index, 'policy': None}
    try:
        seed = instance_seed(task['master_seed'], scenario, n, map_index)
        inst = generate_scenario(ScenarioSpec(scenario, n, seed), task['generator_version'])
        service = PolicyService(travel=task['travel'])
        results = {}
        for policy in task['policies']:
            cell['policy'] = policy
            kind = PolicyKind.parse(policy)
            runs = 1 if kind.deterministic else task['n_alg']
            values = []
            for run in range(runs):
                stream = RngStream(
                    run_seed(task['master_seed'], scenario, n, map_index, policy, run),
                    (),
                    task['rng_algorithm'],
                )
                _, value = service.run(kind, inst, stream)
                values.append(value)
            results[policy] = (float(np.mean(values)), float(np.std(values)), runs)
        return {'key': (scenario, n, map_index), 'results': results}
    except BenchCellError:
        raise
    except Exception as e:
        where = ', '.join(f"{k}={v}" for k, v in cell.items() if v is not None)
        raise BenchCellError(f"Échec de la cellule ({where}): {e}", cell) from e


class BenchJob:
    """
    Job du protocole expérimental : N_maps graphes par (scénario, n),
    N_alg exécutions par politique stochastique et par graphe.

    Le résultat ne dépend pas du nombre de workers : chaque cellule dérive
    ses graines de (graine maître, scénario, n, carte, politique, exécution)
    et l'agrégation se fait dans l'ordre des clés.
    """

    def __init__(self, logger=None, settings=None):
        self.logger = logger or logging.getLogger(__name__)
        self.settings = settings or get_settings()

    def tasks(self, cfg):
        travel = self.settings['rdfs_travel']
        for scenario in cfg.scenarios:
            for n in cfg.n_list:
                for map_index in cfg.map_indices:
                    yield {
                        'master_seed': cfg.master_seed,
                        'scenario': scenario.value,
                        'n': n,
                        'map_index': map_index,
                        'policies': [policy.value for policy in cfg.policies],
                        'n_alg': cfg.n_alg,
                        'travel': travel,
                        'rng_algorithm': self.settings['rng_algorithm'],
                        'generator_version': self.settings['generator_version'],
                    }

    def run(self, cfg):
        """
        Exécute le banc.

        Args:
            cfg: ExperimentConfig

        Returns:
            BenchReport
        """
        tasks = list(self.tasks(cfg))
        self.logger.info(
            f"Banc : {len(cfg.scenarios)} scénarios x {len(cfg.n_list)} tailles x "
            f"{cfg.n_maps} cartes, {cfg.workers} worker(s)"
        )
        stats = {'cells': 0, 'runs': 0, 'failures': 0}

        try:
            if cfg.workers == 1:
                outputs = [run_cell(task) for task in tasks]
            else:
                with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
                    outputs = list(executor.map(run_cell, tasks))
        except BenchCellError as e:
            stats['failures'] += 1
            self.logger.error(f"  {e}")
            raise

        per_cell = {output['key']: output['results'] for output in outputs}
        for results in per_cell.values():
            stats['cells'] += 1
            stats['runs'] += sum(runs for _, _, runs in results.values())

        rows = []
        for scenario in cfg.scenarios:
            for n in cfg.n_list:
                for policy in cfg.policies:
                    means, stds = [], []
                    for map_index in cfg.map_indices:
                        mean, std, _ = per_cell[(scenario.value, n, map_index)][policy.value]
                        means.append(mean)
                        stds.append(std)
                    rows.append(BenchRow(
                        scenario=scenario.value,
                        n=n,
                        policy=policy.value,
                        map_indices=tuple(cfg.map_indices),
                        map_means=tuple(means),
                        map_stds=tuple(stds),
                        n_alg=cfg.runs_for(policy),
                    ))

        self.logger.info(
            f"Banc terminé. Cellules: {stats['cells']} | Exécutions: {stats['runs']} | "
            f"Échecs: {stats['failures']}"
        )
        return BenchReport(
            rows=tuple(rows),
            master_seed=cfg.master_seed,
            n_maps=cfg.n_maps,
            n_alg=cfg.n_alg,
            rng_algorithm=self.settings['rng_algorithm'],
            generator_version=self.settings['generator_version'],
        )


def run_bench(cfg, settings=None):
    return BenchJob(settings=settings).run(cfg)


def merge_reports(first, second):
    """
    Concatène deux rapports aux cartes disjointes.

    Raises:
        UsageError: graines, n_alg ou lignes incompatibles, cartes communes
    """
    for field in ('master_seed', 'n_alg', 'rng_algorithm', 'generator_version'):
        if getattr(first, field) != getattr(second, field):
            raise UsageError(f"Rapports incompatibles : {field} diffère")
    others = {row.key: row for row in second.rows}
    if set(others) != {row.key for row in first.rows}:
        raise UsageError("Rapports incompatibles : cellules différentes")

    rows = []
    for row in first.rows:
        other = others[row.key]
        if set(row.map_indices) & set(other.map_indices):
            raise UsageError(f"Cartes communes pour {row.key}")
        merged = sorted(
            zip(row.map_indices + other.map_indices,
                row.map_means + other.map_means,
                row.map_stds + other.map_stds)
        )
        indices, means, stds = zip(*merged)
        rows.append(BenchRow(row.scenario, row.n, row.policy, indices, means, stds, row.n_alg))

    return BenchReport(
        rows=tuple(rows),
        master_seed=first.master_seed,
        n_maps=first.n_maps + second.n_maps,
        n_alg=first.n_alg,
        rng_algorithm=first.rng_algorithm,
        generator_version=first.generator_version,
    )


# ========== Comparaison aux bornes ==========

# relation, borne(n), politiques couvertes
BOUNDS = {
    StarFamily.GENERAL: ('>=', lambda n: 1.0 / n, (PolicyKind.NN,)),
    StarFamily.DETERMINISTIC_STAR: ('<=', lambda n: 24.0 / n, (PolicyKind.NN,)),
    StarFamily.CLIQUE_STAR: (
        '<=',
        lambda n: 8.0 / math.sqrt(n),
        (PolicyKind.R_NN, PolicyKind.NN_RDFS, PolicyKind.NN_RA),
    ),
}


def reference_value(inst, reference):
    """
    Valeur de référence : ExactSolution, Tour ou nombre.

    Raises:
        NoReference: aucune référence
    """
    if reference is None:
        raise NoReference("Aucune référence : solveur exact inapplicable et pas de tournée de référence")
    if isinstance(reference, ExactSolution):
        return reference.value
    if isinstance(reference, Tour):
        return evaluate_tour(inst, reference).value
    return float(reference)


def compare_ratios(inst, policies, reference, family=StarFamily.GENERAL, runs=1, seed=0,
                   travel='shortcut', algorithm='PCG64'):
    """
    Rapport valeur(politique) / référence pour chaque politique, avec la
    colonne de borne de la famille d'instance.

    Les politiques stochastiques sont moyennées sur `runs` exécutions seedées.

    Returns:
        list: dicts (policy, value, reference, ratio, bound, relation, holds) ;
              holds vaut None pour une politique que la borne ne couvre pas
    """
    ref = reference_value(inst, reference)
    if not ref > 0:
        raise NoReference(f"Référence non positive : {ref}")
    family = StarFamily(family)
    relation, bound_of, covered = BOUNDS[family]
    bound = bound_of(inst.n)
    service = PolicyService(travel=travel)
    stream = RngStream(seed, (), algorithm)

    rows = []
    for policy in policies:
        kind = PolicyKind.parse(policy)
        results = service.run_many(kind, inst, stream.child(list(PolicyKind).index(kind)), runs)
        value = float(np.mean([v for _, v in results]))
        ratio = value / ref
        holds = None
        if kind in covered:
            holds = ratio >= bound - 1e-12 if relation == '>=' else ratio <= bound + 1e-12
        rows.append({
            'policy': kind.value,
            'value': value,
            'reference': ref,
            'ratio': ratio,
            'bound': bound,
            'relation': relation,
            'holds': holds,
        })
    return rows


class CompareJob:
    """
    Job de comparaison : choisit la référence puis calcule les ratios.
    """

    def __init__(self, logger=None, settings=None):
        self.logger = logger or logging.getLogger(__name__)
        self.settings = settings or get_settings()

    def resolve_reference(self, inst):
        """
        Référence par ordre de préférence : tournée de référence de la
        provenance (étoiles adverses), puis solveur exact si n le permet.
        """
        tour = reference_from_provenance(inst)
        if tour is not None:
            self.logger.info("  Référence : tournée de la provenance")
            return tour
        try:
            return ExactSolverService(self.logger, self.settings).solve(inst)
        except TooLarge as e:
            raise NoReference(f"Aucune référence pour n={inst.n}: {e}") from e

    def run(self, inst, policies, runs=1, seed=0, reference=None, family=None):
        if reference is None:
            reference = self.resolve_reference(inst)
        if family is None:
            family = (inst.provenance or {}).get('family', StarFamily.GENERAL.value)
        rows = compare_ratios(
            inst, policies, reference, family, runs, seed,
            self.settings['rdfs_travel'], self.settings['rng_algorithm'],
        )
        stats = {
            'policies': len(rows),
            'within_bound': sum(1 for row in rows if row['holds']),
            'outside_bound': sum(1 for row in rows if row['holds'] is False),
        }
        self.logger.info(
            f"Comparaison terminée. Politiques: {stats['policies']} | "
            f"Dans la borne: {stats['within_bound']} | Hors borne: {stats['outside_bound']}"
        )
        return rows
