"""
Compute, verify, count, bench and info workflows over generated or loaded mechanisms
"""
import itertools
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import numpy as np
from src.config import Config
from src.models.generators import (
    Mechanism, gen_chain, gen_chain_all_constrained, gen_chain_md, gen_example_tree, gen_hand,
    gen_humanoid, gen_stem_branches, random_model
)
from src.models.index_sets import compute_index_sets
from src.models.kinematic_tree import (
    ConstraintSet, KinematicTree, attach_constraint, neutral_configuration, random_configuration, validate
)
from src.models.model_io import load_model_file
from src.tools.baseline import relative_error
from src.tools.bench import SuiteSpec, format_slopes, normalize_family, run_suite, suite_slopes
from src.tools.metering import count_all, format_table, normalize_algorithm
from src.tools.osim_recursive import ALGORITHMS
from src.tools.urdf_loader import load_urdf
from src.utils.errors import DelassusError, SpecError

logger = logging.getLogger(__name__)


def _int(text: str, what: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise SpecError(f'{what} must be an integer, got {text!r}') from e
    if value < 1:
        raise SpecError(f'{what} must be positive, got {value}')
    return value


def parse_generator(spec: str, seed: int = Config.DEFAULT_SEED) -> Mechanism:
    """
    Build a mechanism from a generator spec

    Args:
        spec: One of chain:N[:joint[:base]], stem:S:B[:L], chain-md:K,
            chain-all:N, example, humanoid[:FEET[:HANDS]], hand, random:N[:C]
        seed: Seed for random:N[:C]

    Returns:
        (tree, constraints); plain chains come without constraints
    """
    name, *args = spec.strip().split(':')
    name = name.lower().replace('_', '-')
    if name == 'chain' and 1 <= len(args) <= 3:
        joint = args[1] if len(args) > 1 else 'revolute'
        base = args[2] if len(args) > 2 else 'fixed'
        tree = gen_chain(_int(args[0], 'chain length'), joint, base)
        return tree, ConstraintSet.empty(tree)
    if name == 'stem' and len(args) in (2, 3):
        branch_len = _int(args[2], 'branch length') if len(args) == 3 else None
        return gen_stem_branches(_int(args[0], 'stem length'), _int(args[1], 'branches per side'), branch_len)
    if name == 'chain-md' and len(args) == 1:
        return gen_chain_md(_int(args[0], 'k'))
    if name == 'chain-all' and len(args) == 1:
        return gen_chain_all_constrained(_int(args[0], 'chain length'))
    if name == 'example' and not args:
        return gen_example_tree()
    if name == 'humanoid' and len(args) <= 2:
        return gen_humanoid(*(arg.lower() for arg in args))
    if name == 'hand' and not args:
        return gen_hand()
    if name == 'random' and len(args) in (1, 2):
        n_constraints = _int(args[1], 'constraint count') if len(args) == 2 else 3
        return random_model(np.random.default_rng(seed), _int(args[0], 'link count'), n_constraints)
    raise SpecError(f"unrecognised generator spec '{spec}'")


def parse_constraints(spec: str, tree: KinematicTree, cons: ConstraintSet) -> ConstraintSet:
    """
    Append constraints from a comma-separated LINK:KIND list

    LINK is a link number, 'tip' (the last link) or 'all'; KIND is 'weld' or
    'connect' with an optional point, as in connect@0.1;0;0.
    """
    for item in filter(None, (part.strip() for part in spec.split(','))):
        link_text, sep, kind_text = item.partition(':')
        if not sep:
            raise SpecError(f"constraint '{item}' must look like LINK:KIND")
        if link_text == 'tip':
            links = [tree.n_b]
        elif link_text == 'all':
            links = list(tree.links)
        else:
            try:
                links = [int(link_text)]
            except ValueError as e:
                raise SpecError(f"bad constraint link '{link_text}'") from e
        kind, _, point_text = kind_text.partition('@')
        point = None
        if point_text:
            try:
                point = [float(v) for v in point_text.split(';')]
            except ValueError as e:
                raise SpecError(f"bad contact point '{point_text}'") from e
            if len(point) != 3:
                raise SpecError(f"contact point '{point_text}' needs three coordinates")
        if kind not in ('weld', 'connect') or (kind == 'weld' and point is not None):
            raise SpecError(f"unsupported constraint kind '{kind_text}'")
        for link in links:
            cons = attach_constraint(cons, link, kind, point=point)
    return cons


def read_constraint_spec(spec: str) -> str:
    """
    Resolve an @path constraint spec to the file's entries

    The file holds LINK:KIND entries separated by commas or newlines; text
    after '#' is a comment. Any other spec is returned unchanged.

    Raises:
        SpecError: if the file cannot be read
    """
    if not spec.startswith('@'):
        return spec
    path = Path(spec[1:])
    try:
        text = path.read_text()
    except OSError as e:
        raise SpecError(f"cannot read constraint file '{path}': {e}") from e
    entries = (line.split('#', 1)[0].strip() for line in text.splitlines())
    return ','.join(entry for entry in entries if entry)


def load_mechanism(gen: Optional[str] = None, model: Optional[str] = None, base: str = 'fixed',
                   constrain: Optional[str] = None, seed: int = Config.DEFAULT_SEED) -> Mechanism:
    """Resolve exactly one model source and apply extra constraints (inline or @path)"""
    if (gen is None) == (model is None):
        raise SpecError('give exactly one of a generator spec or a model file')
    if gen is not None:
        tree, cons = parse_generator(gen, seed)
    elif Path(model).suffix.lower() == '.urdf':
        tree = load_urdf(model, base)
        cons = ConstraintSet.empty(tree)
    else:
        tree, cons = load_model_file(model)
    validate(tree)
    if constrain:
        cons = parse_constraints(read_constraint_spec(constrain), tree, cons)
    return tree, cons


def format_matrix(matrix: np.ndarray, digits: int = Config.MATRIX_DIGITS) -> str:
    """Row-major, space-separated, ``digits`` significant digits"""
    return '\n'.join(' '.join(f'{value:.{digits}g}' for value in row) for row in matrix)


def corrupted(matrix: np.ndarray) -> np.ndarray:
    """Perturbed copy used to exercise the verify failure path"""
    result = matrix.copy()
    if result.size:
        result[0, 0] += 1e-3 * (1.0 + abs(result[0, 0]))
    return result


class DelassusWorkflow:
    """
    Orchestrates the library for the command line and the demo script
    """

    def __init__(self, verbose: bool = False):
        """
        Initialize the workflow

        Args:
            verbose: Print step banners while running
        """
        self.verbose = verbose
        self.name = Config.APP_NAME

    def _step(self, message: str) -> None:
        if self.verbose:
            print(message)

    @staticmethod
    def _failure(result: Dict[str, Any], error: Exception) -> Dict[str, Any]:
        result['success'] = False
        result['error'] = str(error)
        result['exit_code'] = error.exit_code if isinstance(error, DelassusError) else 3
        if not isinstance(error, DelassusError):
            logger.exception('unexpected failure')
        return result

    def compute(self, mechanism: Mechanism, algorithm: str, configuration: str = 'neutral',
                seed: int = Config.DEFAULT_SEED, corrupt: Optional[str] = None) -> Dict[str, Any]:
        """
        Delassus matrix of one algorithm at the neutral or a seeded random configuration

        Returns:
            Result with 'matrix' on success
        """
        result = {'algorithm': algorithm, 'matrix': None, 'success': False, 'error': None, 'exit_code': 0}
        try:
            tree, cons = mechanism
            tag = normalize_algorithm(algorithm)
            self._step(f'Step 1: Building {configuration} configuration...')
            if configuration == 'random':
                q = random_configuration(tree, np.random.default_rng(seed))
            elif configuration == 'neutral':
                q = neutral_configuration(tree)
            else:
                raise SpecError(f"unknown configuration '{configuration}'")
            self._step(f'Step 2: Running {tag} (n_b={tree.n_b}, m={cons.m})...')
            matrix = ALGORITHMS[tag](tree, cons, q)
            result['matrix'] = corrupted(matrix) if corrupt and normalize_algorithm(corrupt) == tag else matrix
            result['algorithm'] = tag
            result['success'] = True
        except Exception as e:
            return self._failure(result, e)
        return result

    def verify(self, mechanism: Mechanism, samples: int = Config.VERIFY_SAMPLES,
               tolerance: float = Config.DEFAULT_TOLERANCE, seed: int = Config.DEFAULT_SEED,
               algorithms: Optional[Sequence[str]] = None, corrupt: Optional[str] = None) -> Dict[str, Any]:
        """
        Run every algorithm at seeded random configurations and compare pairwise

        Returns:
            Result with 'max_deviation' and 'worst_pair'; exit_code 1 when the
            deviation reaches the tolerance
        """
        result = {
            'samples': samples,
            'tolerance': tolerance,
            'max_deviation': 0.0,
            'worst_pair': None,
            'processing_steps': [],
            'success': False,
            'error': None,
            'exit_code': 0
        }
        try:
            if tolerance < 0.0:
                raise SpecError(f'tolerance must not be negative, got {tolerance}')
            if samples < 1:
                raise SpecError(f'samples must be positive, got {samples}')
            tree, cons = mechanism
            tags = [normalize_algorithm(a) for a in (algorithms or Config.ALGORITHMS)]
            corrupt_tag = normalize_algorithm(corrupt) if corrupt else None
            rng = np.random.default_rng(seed)
            for sample in range(samples):
                self._step(f'Step {sample + 1}: Comparing {len(tags)} algorithms at random configuration {sample}...')
                q = random_configuration(tree, rng)
                outputs = {tag: ALGORITHMS[tag](tree, cons, q) for tag in tags}
                if corrupt_tag in outputs:
                    outputs[corrupt_tag] = corrupted(outputs[corrupt_tag])
                worst = 0.0
                for a, b in itertools.combinations(tags, 2):
                    deviation = max(relative_error(outputs[a], outputs[b]), relative_error(outputs[b], outputs[a]))
                    worst = max(worst, deviation)
                    if result['worst_pair'] is None or deviation > result['max_deviation']:
                        result['max_deviation'] = deviation
                        result['worst_pair'] = (a, b)
                result['processing_steps'].append({'step': 'sample', 'sample': sample, 'max_deviation': worst})
            if result['worst_pair'] is None and len(tags) > 1:
                result['worst_pair'] = (tags[0], tags[1])
            if result['max_deviation'] < tolerance:
                result['success'] = True
            else:
                a, b = result['worst_pair'] or (tags[0], tags[0])
                result['error'] = (f'{a} and {b} differ by {result["max_deviation"]:.3e} '
                                   f'(tolerance {tolerance:.3e})')
                result['exit_code'] = 1
        except Exception as e:
            return self._failure(result, e)
        return result

    def count(self, mechanism: Mechanism, algorithms: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        """Operation counts of each algorithm on one mechanism"""
        result = {'reports': [], 'table': '', 'success': False, 'error': None, 'exit_code': 0}
        try:
            tree, cons = mechanism
            self._step(f'Step 1: Counting operations (n_b={tree.n_b}, n={tree.n}, m={cons.m})...')
            reports = count_all(tree, cons, algorithms or Config.ALGORITHMS)
            result['reports'] = reports
            result['table'] = format_table(reports)
            result['success'] = True
        except Exception as e:
            return self._failure(result, e)
        return result

    def bench(self, family: str, params: List[int], algorithms: Optional[Sequence[str]] = None,
              branches_per_side: Optional[int] = None, branch_len: int = Config.BRANCH_LENGTH,
              output_path: Optional[str] = None, tail: int = Config.SLOPE_TAIL,
              workers: int = Config.BENCH_WORKERS) -> Dict[str, Any]:
        """
        Run a benchmark suite and fit log-log slopes

        Returns:
            Result with the row 'frame', 'csv' text, 'slopes' and a 'summary' table
        """
        result = {
            'family': family,
            'frame': None,
            'csv': '',
            'slopes': {},
            'summary': '',
            'success': False,
            'error': None,
            'exit_code': 0
        }
        try:
            spec = SuiteSpec(
                family=normalize_family(family),
                params=tuple(params),
                algorithms=tuple(algorithms or ('pv_osim', 'efpa', 'pv_osimr')),
                branches_per_side=branches_per_side,
                branch_len=branch_len,
                output_path=output_path,
                workers=workers
            )
            self._step(f'Step 1: Running {spec.family} suite over {len(spec.params)} points...')
            frame = run_suite(spec)
            result['frame'] = frame
            result['csv'] = frame.to_csv(index=False)
            if len(spec.params) >= 2:
                self._step('Step 2: Fitting log-log slopes...')
                result['slopes'] = suite_slopes(frame, min(tail, len(spec.params)))
                result['summary'] = format_slopes(result['slopes'])
            result['success'] = True
        except Exception as e:
            return self._failure(result, e)
        return result

    def info(self, mechanism: Mechanism) -> Dict[str, Any]:
        """Model summary and index sets"""
        result = {'summary': {}, 'index_sets': {}, 'success': False, 'error': None, 'exit_code': 0}
        try:
            tree, cons = mechanism
            sets = compute_index_sets(tree, cons)
            result['summary'] = {
                'n_b': tree.n_b,
                'n': tree.n,
                'nq': tree.nq,
                'm': cons.m,
                'm_b': cons.m_b,
                'depth': tree.max_depth,
                'joints': tree.joint_histogram()
            }
            result['index_sets'] = {
                'es': {i: sorted(sets.es[i]) for i in range(1, len(sets.es))},
                'branching': list(sets.branching),
                'anc_branch': {i: sets.anc_branch[i] for i in range(1, len(sets.anc_branch))},
                'desc_branch': {i: d for i, d in sorted(sets.desc_branch.items()) if i > 0},
                'cca': sets.table().tolist()
            }
            result['success'] = True
        except Exception as e:
            return self._failure(result, e)
        return result


def format_info(result: Dict[str, Any]) -> str:
    """Plain-text rendering of an info result"""
    summary, sets = result['summary'], result['index_sets']
    joints = ', '.join(f'{kind}={count}' for kind, count in sorted(summary['joints'].items()))
    lines = [
        f"links n_b={summary['n_b']}  dofs n={summary['n']}  constraints m={summary['m']} "
        f"({summary['m_b']} end-effectors)  depth={summary['depth']}",
        f'joints: {joints}',
        f"branching: {sets['branching']}"
    ]
    for i, members in sets['es'].items():
        if members:
            lines.append(f"  {i}: ES={members} A={sets['anc_branch'][i]} D={sets['desc_branch'].get(i, '-')}")
    if sets['cca']:
        lines.append('cca:')
        lines.extend('  ' + ' '.join(str(c) for c in row) for row in sets['cca'])
    return '\n'.join(lines)
