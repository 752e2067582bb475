"""
Meterable numpy arithmetic layer used by every dynamics kernel
"""
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple
import numpy as np
from scipy.linalg import solve_triangular

# Structural entry classes of constant model data
ZERO, UNIT, GENERAL = 0, 1, 2
STRUCTURAL_TOL = 1e-12


@dataclass
class OpTally:
    """Scalar floating-point operation counts for one invocation"""
    mul: int = 0
    add_sub: int = 0
    div: int = 0
    sqrt: int = 0

    @property
    def total(self) -> int:
        return self.mul + self.add_sub + self.div + self.sqrt

    def as_dict(self) -> Dict[str, int]:
        counts = asdict(self)
        counts['total'] = self.total
        return counts


def _dims(a: np.ndarray):
    if a.ndim == 1:
        return 1, a.shape[0]
    return a.shape


def structure(*samples: np.ndarray) -> np.ndarray:
    """
    Structural pattern of an entry-wise constant layout

    An entry is ZERO if it vanishes in every sample, UNIT if it is ±1 in every
    sample and GENERAL otherwise. Pass one array for constant model data, or
    several evaluations of the same expression at unrelated arguments.
    """
    stack = np.abs(np.stack([np.asarray(s, dtype=float) for s in samples]))
    pattern = np.full(stack.shape[1:], GENERAL, dtype=np.int8)
    pattern[np.all(np.abs(stack - 1.0) <= STRUCTURAL_TOL, axis=0)] = UNIT
    pattern[np.all(stack <= STRUCTURAL_TOL, axis=0)] = ZERO
    return pattern


def _left(pattern: Optional[np.ndarray], a: np.ndarray) -> np.ndarray:
    if pattern is None:
        pattern = np.full(a.shape, GENERAL, dtype=np.int8)
    return pattern.reshape(1, -1) if pattern.ndim == 1 else pattern


def _right(pattern: Optional[np.ndarray], b: np.ndarray) -> np.ndarray:
    if pattern is None:
        pattern = np.full(b.shape, GENERAL, dtype=np.int8)
    return pattern.reshape(-1, 1) if pattern.ndim == 1 else pattern


def product_counts(a_pattern: np.ndarray, b_pattern: np.ndarray) -> Tuple[int, int]:
    """
    (mul, add_sub) of a matrix product with structured operands

    A term with a ZERO factor is dropped, a term with a UNIT factor needs no
    multiply, and every output entry sums its surviving terms.
    """
    general = (a_pattern == GENERAL).astype(np.int64) @ (b_pattern == GENERAL).astype(np.int64)
    terms = (a_pattern != ZERO).astype(np.int64) @ (b_pattern != ZERO).astype(np.int64)
    return int(general.sum()), int(np.maximum(terms - 1, 0).sum())


# r × w components as (r index, w index) products: first added, second subtracted
_CROSS_TERMS = (((1, 2), (2, 1)), ((2, 0), (0, 2)), ((0, 1), (1, 0)))


class Arithmetic:
    """
    Thin wrapper over numpy whose operations optionally tally scalar work.

    Counts depend on operand shapes and on structural patterns of constant
    model data, never on runtime values, so two runs over the same model
    produce identical tallies. Negation, transposition, indexing and copies
    are free.
    """

    def __init__(self, tally: Optional[OpTally] = None):
        self.tally = tally

    @property
    def metered(self) -> bool:
        return self.tally is not None

    def charge(self, mul: int = 0, add_sub: int = 0, div: int = 0, sqrt: int = 0) -> None:
        """Add counts in bulk (scalar loops, closed-form kernels)"""
        if self.tally is None:
            return
        self.tally.mul += int(mul)
        self.tally.add_sub += int(add_sub)
        self.tally.div += int(div)
        self.tally.sqrt += int(sqrt)

    # Dense kernels

    def matmul(self, a: np.ndarray, b: np.ndarray, a_pattern: Optional[np.ndarray] = None,
               b_pattern: Optional[np.ndarray] = None) -> np.ndarray:
        """
        a @ b; an operand with a pattern is charged only for its structural nonzeros

        Args:
            a: Left operand (vector or matrix)
            b: Right operand (vector or matrix)
            a_pattern: Structural pattern of a (see ``structure``), dense if omitted
            b_pattern: Structural pattern of b, dense if omitted
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.tally is not None:
            if a_pattern is None and b_pattern is None:
                rows, inner = _dims(a)
                cols = 1 if b.ndim == 1 else b.shape[1]
                self.charge(mul=rows * inner * cols, add_sub=rows * max(inner - 1, 0) * cols)
            else:
                mul, add_sub = product_counts(_left(a_pattern, a), _right(b_pattern, b))
                self.charge(mul=mul, add_sub=add_sub)
        return a @ b

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        result = np.add(a, b)
        self.charge(add_sub=np.size(result))
        return result

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        result = np.subtract(a, b)
        self.charge(add_sub=np.size(result))
        return result

    def scale(self, a: np.ndarray, s: float) -> np.ndarray:
        result = np.multiply(a, s)
        self.charge(mul=np.size(result))
        return result

    def outer(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        result = np.outer(u, v)
        self.charge(mul=result.size)
        return result

    def dot(self, u: np.ndarray, v: np.ndarray) -> float:
        size = np.size(u)
        self.charge(mul=size, add_sub=max(size - 1, 0))
        return float(np.dot(u, v))

    def cross(self, r: np.ndarray, w: np.ndarray, r_pattern: Optional[np.ndarray] = None) -> np.ndarray:
        """r × w for a 3-vector r and a 3-vector or 3×k block w"""
        w = np.asarray(w, dtype=float)
        cols = 1 if w.ndim == 1 else w.shape[1]
        if r_pattern is None:
            self.charge(mul=6 * cols, add_sub=3 * cols)
        else:
            mul = sum(int(r_pattern[j] == GENERAL) for component in _CROSS_TERMS for j, _ in component)
            add_sub = sum(max(sum(int(r_pattern[j] != ZERO) for j, _ in component) - 1, 0)
                          for component in _CROSS_TERMS)
            self.charge(mul=mul * cols, add_sub=add_sub * cols)
        if w.ndim == 1:
            return np.cross(r, w)
        return np.cross(r, w, axisb=0, axisc=0)

    def identity_minus(self, a: np.ndarray) -> np.ndarray:
        result = np.eye(a.shape[0]) - a
        self.charge(add_sub=a.size)
        return result

    # Scalar kernels

    def recip(self, x):
        self.charge(div=np.size(x))
        return 1.0 / np.asarray(x, dtype=float)

    def sqrt(self, x):
        self.charge(sqrt=np.size(x))
        return np.sqrt(x)

    # Factorizations

    def cholesky(self, a: np.ndarray) -> np.ndarray:
        """
        Lower Cholesky factor of a symmetric positive-definite matrix

        Raises:
            numpy.linalg.LinAlgError: on a non-positive pivot
        """
        n = a.shape[0]
        factor = np.linalg.cholesky(a)
        work = (n ** 3 - n) // 6
        self.charge(mul=work, add_sub=work, div=n * (n - 1) // 2, sqrt=n)
        return factor

    def solve_lower(self, lower: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Forward substitution lower @ x = b"""
        n = lower.shape[0]
        cols = 1 if b.ndim == 1 else b.shape[1]
        work = cols * n * (n - 1) // 2
        self.charge(mul=work, add_sub=work, div=cols * n)
        return solve_triangular(lower, b, lower=True)

    def spd_inverse(self, a: np.ndarray) -> np.ndarray:
        """
        Inverse of a small SPD matrix: reciprocal for 1×1, Cholesky otherwise

        Raises:
            numpy.linalg.LinAlgError: if a is not positive definite
        """
        if a.shape == (1, 1):
            if not a[0, 0] > 0.0:
                raise np.linalg.LinAlgError('non-positive pivot')
            return self.recip(a)
        lower = self.cholesky(a)
        lower_inv = self.solve_lower(lower, np.eye(a.shape[0]))
        return self.matmul(lower_inv.T, lower_inv)
