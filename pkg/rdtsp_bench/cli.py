"""
Ligne de commande : gen, solve, bench, compare, render.

Codes de sortie : 0 succès, 1 erreur d'usage, 2 erreur d'exécution.
Les résultats vont sur la sortie standard, les diagnostics sur la sortie
d'erreur.
"""

import argparse
import logging
import sys

from . import __version__, get_settings
from .exceptions import RdtspError, UsageError
from .instance_client import InstanceFileClient
from .jobs import BenchJob, CompareJob
from .models import MIXED_POLICIES, PolicyKind, RngStream, ScenarioKind, StarFamily
from .serializers import RunSerializer, SolutionSerializer
from .services import (
    AdversarialService,
    ExactSolverService,
    PolicyService,
    RenderService,
    ScenarioService,
    generate_path,
)
from .tables import RatioTable, report_to_csv, report_to_json

logger = logging.getLogger(__name__)

STAR_KINDS = ('star_det', 'star_clique')
POLICY_NAMES = [kind.value for kind in PolicyKind]
MIXED_POLICY_NAMES = [kind.value for kind in MIXED_POLICIES]


class ArgumentParser(argparse.ArgumentParser):
    """Les erreurs d'arguments deviennent des UsageError (code 1)."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ========== Sous-commandes ==========

def cmd_gen(args, settings):
    client = InstanceFileClient(settings=settings)
    if args.scenario in STAR_KINDS:
        service = AdversarialService(logger, settings)
        if args.scenario == 'star_det':
            star = service.build_deterministic(args.policy, args.n)
        else:
            star = service.build_clique(args.n, _require_seed(args))
        inst = star.instance
    elif args.x is not None:
        inst = generate_path(args.n, args.x, _require_seed(args),
                             generator_version=settings['generator_version'])
    else:
        inst = ScenarioService(logger, settings).build(args.scenario, args.n, _require_seed(args))
    client.write_instance(args.output, inst)
    logger.info(f"Instance n={inst.n} écrite dans {args.output}")
    return 0


def cmd_solve(args, settings):
    client = InstanceFileClient(settings=settings)
    inst = client.read_instance(args.instance)
    if args.solver:
        solution = ExactSolverService(logger, settings).solve(inst, args.solver)
        data = SolutionSerializer().to_dict(inst, solution, seed=args.seed)
    else:
        service = PolicyService(logger, args.travel or settings['rdfs_travel'])
        stream = RngStream(args.seed, (), settings['rng_algorithm'])
        results = service.run_many(args.policy, inst, stream, args.repeats)
        data = RunSerializer().to_dict(inst, results, policy=PolicyKind.parse(args.policy).value,
                                       seed=args.seed, walks=args.walks)
    client.write_json(args.output, data)
    return 0


def cmd_bench(args, settings):
    client = InstanceFileClient(settings=settings)
    overrides = {
        'master_seed': args.seed,
        'workers': args.workers,
        'map_start': args.map_start,
        'n_maps': args.n_maps,
    }
    cfg = client.read_config(args.config, **overrides)
    report = BenchJob(logger, settings).run(cfg)
    output_format = args.format or ('json' if str(args.output).endswith('.json') else 'csv')
    text = report_to_json(report) if output_format == 'json' else report_to_csv(report)
    client.write_text(args.output, text)
    return 0


def cmd_compare(args, settings):
    client = InstanceFileClient(settings=settings)
    inst = client.read_instance(args.instance)
    reference = None
    if args.reference:
        runs = client.read_runs(args.reference)
        if not runs:
            raise UsageError(f"Aucune tournée dans {args.reference}")
        reference = runs[0][0]
    rows = CompareJob(logger, settings).run(
        inst, args.policies, args.runs, args.seed, reference, args.family
    )
    family = args.family or (inst.provenance or {}).get('family', StarFamily.GENERAL.value)
    table = RatioTable(rows, family)
    if args.format == 'csv':
        text = table.to_csv()
    elif args.format == 'json':
        text = table.to_json()
    else:
        text = table.render()
    client.write_text(args.output, text)
    return 0


def _pick(results, pick):
    if pick == 'best':
        return max(results, key=lambda result: result[1])
    if pick == 'worst':
        return min(results, key=lambda result: result[1])
    return results[0]


def cmd_render(args, settings):
    client = InstanceFileClient(settings=settings)
    inst = client.read_instance(args.instance)
    if args.tour:
        results = client.read_runs(args.tour)
        if not results:
            raise UsageError(f"Aucune tournée dans {args.tour}")
    else:
        if args.seed is None and not PolicyKind.parse(args.policy).deterministic:
            raise UsageError("--seed est obligatoire pour une politique stochastique")
        service = PolicyService(logger, settings['rdfs_travel'])
        stream = RngStream(args.seed or 0, (), settings['rng_algorithm'])
        results = service.run_many(args.policy, inst, stream, args.repeats)
    tour, _ = _pick(results, args.pick)

    options = {
        'k': args.k or settings['render_k'],
        'canvas_size': args.canvas_size or settings['canvas_size'],
        'layout': args.layout,
        'title': args.title or '',
    }
    if args.prefix is not None:
        options['prefix'] = args.prefix
    try:
        svg = RenderService(logger).render(inst, tour, **options)
    except ValueError as e:
        raise UsageError(str(e)) from e
    client.write_text(args.output, svg)
    return 0


def _require_seed(args):
    if args.seed is None:
        raise UsageError("--seed est obligatoire")
    return args.seed


# ========== Parseur ==========

def build_parser():
    parser = ArgumentParser(prog='rdtsp', description="Banc de mesure du RD-TSP")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help="-v pour INFO, -vv pour DEBUG")
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help="Générer une instance")
    gen.add_argument('--scenario', required=True,
                     choices=[kind.value for kind in ScenarioKind] + list(STAR_KINDS))
    gen.add_argument('--n', type=int, required=True)
    gen.add_argument('--seed', type=int)
    gen.add_argument('--x', type=float, help="Longueur totale d'un chemin (scénario path)")
    gen.add_argument('--policy', default='nn', choices=POLICY_NAMES,
                     help="Politique déterministe visée par star_det")
    gen.add_argument('-o', '--output', default='-')
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser('solve', help="Exécuter une politique ou un solveur exact")
    solve.add_argument('--instance', required=True)
    method = solve.add_mutually_exclusive_group(required=True)
    method.add_argument('--policy', choices=POLICY_NAMES)
    method.add_argument('--solver', choices=ExactSolverService.SOLVERS)
    solve.add_argument('--seed', type=int, required=True)
    solve.add_argument('--repeats', type=int, default=1)
    solve.add_argument('--travel', choices=['shortcut', 'tree'])
    solve.add_argument('--walks', action='store_true', help="Inclure les marches physiques")
    solve.add_argument('-o', '--output', default='-')
    solve.set_defaults(func=cmd_solve)

    bench = sub.add_parser('bench', help="Lancer le banc de mesure")
    bench.add_argument('--config', required=True)
    bench.add_argument('--seed', type=int, help="Remplace master_seed du fichier")
    bench.add_argument('--workers', type=int)
    bench.add_argument('--map-start', type=int)
    bench.add_argument('--n-maps', type=int)
    bench.add_argument('--format', choices=['csv', 'json'])
    bench.add_argument('-o', '--output', default='-')
    bench.set_defaults(func=cmd_bench)

    compare = sub.add_parser('compare', help="Comparer les politiques à une référence")
    compare.add_argument('--instance', required=True)
    compare.add_argument('--policies', nargs='+', default=MIXED_POLICY_NAMES, choices=POLICY_NAMES)
    compare.add_argument('--runs', type=int, default=1)
    compare.add_argument('--seed', type=int, required=True)
    compare.add_argument('--reference', help="Sortie de solve dont la première tournée sert de référence")
    compare.add_argument('--family', choices=[family.value for family in StarFamily])
    compare.add_argument('--format', choices=['text', 'csv', 'json'], default='text')
    compare.add_argument('-o', '--output', default='-')
    compare.set_defaults(func=cmd_compare)

    render = sub.add_parser('render', help="Dessiner le début d'une tournée en SVG")
    render.add_argument('--instance', required=True)
    source = render.add_mutually_exclusive_group(required=True)
    source.add_argument('--tour', help="Sortie de solve")
    source.add_argument('--policy', choices=POLICY_NAMES)
    render.add_argument('--seed', type=int)
    render.add_argument('--repeats', type=int, default=1)
    render.add_argument('--pick', choices=['first', 'best', 'worst'], default='first')
    render.add_argument('--prefix', type=int)
    render.add_argument('--k', type=int)
    render.add_argument('--layout', choices=['star'])
    render.add_argument('--title')
    render.add_argument('--canvas-size', type=int)
    render.add_argument('-o', '--output', default='-')
    render.set_defaults(func=cmd_render)

    return parser


def _configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def dispatch(argv=None):
    """
    Point d'entrée de la ligne de commande.

    Returns:
        int: 0 succès, 1 erreur d'usage, 2 erreur d'exécution
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return 1
    except SystemExit as e:
        # --help et --version
        return 0 if not e.code else 1

    _configure_logging(args.verbose)
    settings = get_settings(workers=getattr(args, 'workers', None))
    for field in ('repeats', 'runs'):
        if getattr(args, field, 1) < 1:
            sys.stderr.write(f"--{field} doit être >= 1\n")
            return 1

    try:
        return args.func(args, settings)
    except UsageError as e:
        sys.stderr.write(f"erreur d'usage : {e}\n")
        return 1
    except (RdtspError, OSError) as e:
        logger.debug("Trace complète", exc_info=True)
        sys.stderr.write(f"erreur : {e}\n")
        return 2


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
