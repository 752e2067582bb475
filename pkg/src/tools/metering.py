"""
Scalar operation counting for the Delassus algorithms
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional
import numpy as np
import pandas as pd
from src.config import Config
from src.models.arithmetic import Arithmetic, OpTally
from src.models.kinematic_tree import ConstraintSet, KinematicTree, neutral_configuration
from src.tools.osim_recursive import ALGORITHMS
from src.utils.errors import SpecError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OpCountReport:
    algorithm: str
    n_b: int
    n: int
    m: int
    d: int
    mul: int
    add_sub: int
    div: int
    sqrt: int
    total: int

    @classmethod
    def from_tally(cls, algorithm: str, tree: KinematicTree, cons: ConstraintSet, tally: OpTally) -> 'OpCountReport':
        return cls(
            algorithm=algorithm,
            n_b=tree.n_b,
            n=tree.n,
            m=cons.m,
            d=tree.max_depth,
            mul=tally.mul,
            add_sub=tally.add_sub,
            div=tally.div,
            sqrt=tally.sqrt,
            total=tally.total
        )

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_csv_row(self, family: str, param: int) -> Dict[str, Any]:
        """Row in the bench CSV schema"""
        row = {'family': family, 'param': param, **self.as_dict()}
        return {column: row[column] for column in Config.CSV_COLUMNS}


def normalize_algorithm(name: str) -> str:
    """Accept 'pv-osimr' as well as 'pv_osimr'"""
    tag = name.strip().lower().replace('-', '_')
    if tag not in ALGORITHMS:
        raise SpecError(f"unknown algorithm '{name}'; choose from {', '.join(ALGORITHMS)}")
    return tag


def count_ops(algorithm: str, tree: KinematicTree, cons: ConstraintSet,
              q: Optional[np.ndarray] = None) -> OpCountReport:
    """
    Run one algorithm with a private tally from link kinematics to assembly

    Args:
        algorithm: Algorithm tag
        tree: Validated kinematic tree
        cons: Constraint set
        q: Configuration; the neutral one if omitted (counts do not depend on it)

    Returns:
        OpCountReport
    """
    tag = normalize_algorithm(algorithm)
    q = neutral_configuration(tree) if q is None else q
    tally = OpTally()
    ALGORITHMS[tag](tree, cons, q, Arithmetic(tally))
    report = OpCountReport.from_tally(tag, tree, cons, tally)
    logger.debug('%s: total=%d (n_b=%d m=%d)', tag, report.total, tree.n_b, cons.m)
    return report


def count_all(tree: KinematicTree, cons: ConstraintSet, algorithms: Optional[Iterable[str]] = None,
              q: Optional[np.ndarray] = None) -> List[OpCountReport]:
    algorithms = list(algorithms) if algorithms is not None else Config.ALGORITHMS
    return [count_ops(name, tree, cons, q) for name in algorithms]


def reports_frame(reports: Iterable[OpCountReport]) -> pd.DataFrame:
    return pd.DataFrame([r.as_dict() for r in reports], columns=list(OpCountReport.__dataclass_fields__))


def format_table(reports: Iterable[OpCountReport]) -> str:
    """Human-readable table, one row per report"""
    frame = reports_frame(reports)
    if frame.empty:
        return '(no reports)'
    return frame.to_string(index=False)
