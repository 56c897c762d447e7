# Services du banc RD-TSP
from .adversarial import (
    AdversarialService,
    adversarial_star_clique,
    adversarial_star_deterministic,
    clique_first_tour,
)
from .evaluation import evaluate_prefix, evaluate_tour, evaluate_walk, instance_from_points, threshold_components
from .exact import (
    ExactSolverService,
    brute_force,
    dstar_dp,
    dstar_from_instance,
    held_karp,
    held_karp_tables,
    line_dp,
    line_from_instance,
)
from .generators import ScenarioService, generate_path, generate_scenario
from .policies import PolicyService, expected_value, observe, policy_branches, run_policy
from .rendering import RenderService, render_svg
from .utils import derive_seed, discount, gamma_of_x, x_of_gamma

__all__ = [
    'AdversarialService',
    'ExactSolverService',
    'PolicyService',
    'RenderService',
    'ScenarioService',
    'adversarial_star_clique',
    'adversarial_star_deterministic',
    'brute_force',
    'clique_first_tour',
    'derive_seed',
    'discount',
    'dstar_dp',
    'dstar_from_instance',
    'evaluate_prefix',
    'evaluate_tour',
    'evaluate_walk',
    'expected_value',
    'gamma_of_x',
    'generate_path',
    'generate_scenario',
    'held_karp',
    'held_karp_tables',
    'instance_from_points',
    'line_dp',
    'line_from_instance',
    'observe',
    'policy_branches',
    'render_svg',
    'run_policy',
    'threshold_components',
    'x_of_gamma',
]
