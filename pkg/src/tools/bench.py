"""
Benchmark suites: operation counts over mechanism families, CSV output and log-log slope fits
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
import numpy as np
import pandas as pd
from scipy.stats import linregress
from src.config import Config
from src.models.generators import Mechanism, gen_chain_all_constrained, gen_chain_md, gen_stem_branches
from src.models.kinematic_tree import ConstraintSet, KinematicTree, validate
from src.tools.metering import count_all, normalize_algorithm
from src.utils.errors import DelassusError, InsufficientPoints, InvalidSuite, NonPositiveValue

logger = logging.getLogger(__name__)

FAMILY_ALIASES = {
    'stem': 'stem_branches',
    'stem_branches': 'stem_branches',
    'chain_md': 'chain_md',
    'md': 'chain_md',
    'chain_all': 'chain_all_constrained',
    'chain_all_constrained': 'chain_all_constrained',
    'custom': 'custom'
}

MechanismFactory = Callable[[int], Union[Mechanism, KinematicTree]]


def normalize_family(name: str) -> str:
    family = FAMILY_ALIASES.get(name.strip().lower().replace('-', '_'))
    if family is None:
        raise InvalidSuite(f"unknown benchmark family '{name}'; choose from {', '.join(Config.BENCH_FAMILIES)}")
    return family


@dataclass(frozen=True)
class SuiteSpec:
    """
    One benchmark suite: a mechanism family swept over integer parameters.

    ``params`` are stem lengths for stem_branches, k for chain_md and chain
    lengths for chain_all_constrained. Custom suites supply ``generator`` and,
    when it returns a bare tree, ``constraints``.
    """
    family: str
    params: Tuple[int, ...]
    algorithms: Tuple[str, ...]
    branches_per_side: Optional[int] = None
    branch_len: int = Config.BRANCH_LENGTH
    generator: Optional[MechanismFactory] = None
    constraints: Optional[Callable[[KinematicTree], ConstraintSet]] = None
    output_path: Optional[str] = None
    workers: int = Config.BENCH_WORKERS

    def validate(self) -> 'SuiteSpec':
        """
        Check parameters and algorithms

        Returns:
            Copy with normalized family and algorithm tags

        Raises:
            InvalidSuite: on an empty or non-increasing parameter list, an empty
                or unknown algorithm subset, or a missing family argument
        """
        family = normalize_family(self.family)
        if not self.params:
            raise InvalidSuite('parameter list is empty')
        if any(b <= a for a, b in zip(self.params, self.params[1:])):
            raise InvalidSuite(f'parameters must be strictly increasing: {list(self.params)}')
        if not self.algorithms:
            raise InvalidSuite('algorithm subset is empty')
        try:
            algorithms = tuple(normalize_algorithm(a) for a in self.algorithms)
        except DelassusError as e:
            raise InvalidSuite(str(e)) from e
        if family == 'stem_branches' and self.branches_per_side is None:
            raise InvalidSuite('stem_branches suites need branches_per_side')
        if family == 'custom' and self.generator is None:
            raise InvalidSuite('custom suites need a generator')
        if self.workers < 1:
            raise InvalidSuite(f'workers must be positive, got {self.workers}')
        return SuiteSpec(family, tuple(self.params), algorithms, self.branches_per_side, self.branch_len,
                         self.generator, self.constraints, self.output_path, self.workers)

    def build(self, param: int) -> Mechanism:
        if self.family == 'stem_branches':
            return gen_stem_branches(param, self.branches_per_side, self.branch_len)
        if self.family == 'chain_md':
            return gen_chain_md(param)
        if self.family == 'chain_all_constrained':
            return gen_chain_all_constrained(param)
        built = self.generator(param)
        if isinstance(built, KinematicTree):
            cons = self.constraints(built) if self.constraints else ConstraintSet.empty(built)
            return built, cons
        return built


def run_suite(spec: SuiteSpec) -> pd.DataFrame:
    """
    Count operations for every (parameter, algorithm) pair

    Rows are computed on a thread pool and collected in parameter order, then
    written to ``spec.output_path`` when it is set.

    Returns:
        DataFrame with the bench CSV columns
    """
    spec = spec.validate()

    def rows_for(param: int) -> List[Dict]:
        tree, cons = spec.build(param)
        validate(tree)
        reports = count_all(tree, cons, spec.algorithms)
        logger.info('%s param=%d: n_b=%d m=%d %s', spec.family, param, tree.n_b, cons.m,
                    ' '.join(f'{r.algorithm}={r.total}' for r in reports))
        return [r.to_csv_row(spec.family, param) for r in reports]

    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        per_param = list(pool.map(rows_for, spec.params))
    frame = pd.DataFrame([row for rows in per_param for row in rows], columns=Config.CSV_COLUMNS)

    if spec.output_path:
        path = Path(spec.output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
        logger.info('wrote %d rows to %s', len(frame), path)
    return frame


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    points_used: int


def fit_slope(points: Sequence[Tuple[float, float]], tail: Optional[int] = None) -> SlopeFit:
    """
    Least-squares line through (log x, log y) of the last ``tail`` points

    Raises:
        InsufficientPoints: with fewer than two points to fit
        NonPositiveValue: if any coordinate is not positive
    """
    tail = Config.SLOPE_TAIL if tail is None else tail
    if len(points) < 2:
        raise InsufficientPoints(f'need at least two points, got {len(points)}')
    if tail < 2:
        raise InsufficientPoints(f'tail must cover at least two points, got {tail}')
    coords = np.array(points, dtype=float).reshape(-1, 2)
    if np.any(coords <= 0.0):
        raise NonPositiveValue('log-log fit needs positive coordinates')
    used = coords[-tail:]
    x, y = used[:, 0], used[:, 1]
    if np.all(x == x[0]):
        raise InsufficientPoints('all x values are equal')
    fit = linregress(np.log(x), np.log(y))
    return SlopeFit(float(fit.slope), float(fit.intercept), float(min(1.0, fit.rvalue ** 2)), len(used))


def suite_slopes(frame: pd.DataFrame, tail: Optional[int] = None) -> Dict[str, SlopeFit]:
    """Per-algorithm slope of total operations against the suite parameter"""
    fits = {}
    for algorithm, rows in frame.groupby('algorithm', sort=False):
        rows = rows.sort_values('param')
        fits[algorithm] = fit_slope(list(zip(rows['param'], rows['total'])), tail)
    return fits


def format_slopes(fits: Dict[str, SlopeFit]) -> str:
    frame = pd.DataFrame([
        {'algorithm': name, 'slope': round(fit.slope, 3), 'r2': round(fit.r2, 4), 'points': fit.points_used}
        for name, fit in fits.items()
    ])
    return frame.to_string(index=False) if not frame.empty else '(no slopes)'


def parse_range(text: str) -> List[int]:
    """
    Expand '4..10', '4..10:2' and comma lists such as '4,6,8..12'

    Raises:
        InvalidSuite: on malformed or decreasing ranges
    """
    values: List[int] = []
    for part in text.split(','):
        part = part.strip()
        try:
            if '..' in part:
                bounds, _, step_text = part.partition(':')
                start_text, end_text = bounds.split('..', 1)
                start, end = int(start_text), int(end_text)
                step = int(step_text) if step_text else 1
                if end < start or step < 1:
                    raise InvalidSuite(f"range '{part}' is decreasing or has a non-positive step")
                values.extend(range(start, end + 1, step))
            else:
                values.append(int(part))
        except ValueError as e:
            raise InvalidSuite(f"cannot parse range '{part}'") from e
    return values
