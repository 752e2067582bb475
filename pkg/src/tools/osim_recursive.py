"""
Propagator-based Delassus algorithms in the local-frame formulation:
PV-OSIM (stacked constraint rows), EFPA (per end-effector propagators) and
PV-OSIMr (propagation between branching links only)
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
import numpy as np
from scipy.linalg import block_diag
from src.models.arithmetic import Arithmetic
from src.models.index_sets import IndexSets, compute_index_sets
from src.models.kinematic_tree import WORLD, ConstraintSet, KinematicTree
from src.models.spatial import PluckerTransform
from src.tools.baseline import link_transforms, ltl_delassus, naive_delassus
from src.utils.errors import ChainMismatch, NotAncestor, SingularD

logger = logging.getLogger(__name__)


@dataclass
class JointAbiData:
    """
    Articulated-body quantities of every link, each in its own frame.

    Lists are indexed by link with None at the world. Propagators and inverse
    inertias are formed on first use, charged to ``ops``, and cached.
    """
    tree: KinematicTree
    ops: Arithmetic
    transforms: List[Optional[PluckerTransform]]
    articulated: List[Optional[np.ndarray]]
    D: List[Optional[np.ndarray]]
    Dinv: List[Optional[np.ndarray]]
    U: List[Optional[np.ndarray]]
    UD: List[Optional[np.ndarray]]
    _projectors: Dict[int, np.ndarray] = field(default_factory=dict)
    _force_propagators: Dict[int, np.ndarray] = field(default_factory=dict)
    _motion_propagators: Dict[int, np.ndarray] = field(default_factory=dict)
    _inverse_inertias: Dict[int, np.ndarray] = field(default_factory=dict)

    def projector(self, i: int) -> np.ndarray:
        """I - U D⁻¹ Sᵀ: removes the force component that drives joint i"""
        if i not in self._projectors:
            S, S_pattern = self.tree.motion_subspace(i), self.tree.subspace_pattern(i)
            self._projectors[i] = self.ops.identity_minus(self.ops.matmul(self.UD[i], S.T, b_pattern=S_pattern.T))
        return self._projectors[i]

    def force_propagator(self, i: int) -> np.ndarray:
        """Xᵀ P: child-frame force to the parent frame"""
        if i not in self._force_propagators:
            self._force_propagators[i] = self.transforms[i].apply_transpose_force(self.projector(i), self.ops)
        return self._force_propagators[i]

    def motion_propagator(self, i: int) -> np.ndarray:
        """Pᵀ X: parent-frame acceleration to the child frame"""
        if i not in self._motion_propagators:
            S, S_pattern = self.tree.motion_subspace(i), self.tree.subspace_pattern(i)
            rows = self.ops.identity_minus(self.ops.matmul(S, self.UD[i].T, a_pattern=S_pattern))
            self._motion_propagators[i] = self.transforms[i].rows_to_parent(rows, self.ops)
        return self._motion_propagators[i]

    def inverse_inertia(self, i: int) -> np.ndarray:
        """S D⁻¹ Sᵀ: apparent inverse inertia across joint i"""
        if i not in self._inverse_inertias:
            S, S_pattern = self.tree.motion_subspace(i), self.tree.subspace_pattern(i)
            scaled = self.ops.matmul(S, self.Dinv[i], a_pattern=S_pattern)
            self._inverse_inertias[i] = self.ops.matmul(scaled, S.T, b_pattern=S_pattern.T)
        return self._inverse_inertias[i]


def abi_backward(tree: KinematicTree, q: np.ndarray, ops: Optional[Arithmetic] = None,
                 transforms: Optional[List[Optional[PluckerTransform]]] = None) -> JointAbiData:
    """
    Articulated-body inertia sweep from the leaves to the root

    Raises:
        SingularD: if a joint-space apparent inertia is not positive definite
    """
    ops = ops or Arithmetic()
    X = transforms or link_transforms(tree, q, ops)
    H = [None] + [tree.inertia_matrix(i).copy() for i in tree.links]
    D, Dinv, U, UD = ([None] * (tree.n_b + 1) for _ in range(4))
    for i in range(tree.n_b, 0, -1):
        S, S_pattern = tree.motion_subspace(i), tree.subspace_pattern(i)
        U[i] = ops.matmul(H[i], S, b_pattern=S_pattern)
        D[i] = ops.matmul(S.T, U[i], a_pattern=S_pattern.T)
        try:
            Dinv[i] = ops.spd_inverse(D[i])
        except np.linalg.LinAlgError as e:
            raise SingularD(f'apparent joint inertia of link {i} is not positive definite') from e
        UD[i] = ops.matmul(U[i], Dinv[i])
        parent = tree.parent[i]
        if parent != WORLD:
            reduced = ops.sub(H[i], ops.matmul(UD[i], U[i].T))
            H[parent] = ops.add(H[parent], X[i].congruence(reduced, ops))
    return JointAbiData(tree, ops, X, H, D, Dinv, U, UD)


def _rows_to_parent(abi: JointAbiData, i: int, R: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(R - v Uᵀ) X: rows acting on link-i motions re-expressed on parent motions"""
    ops = abi.ops
    return abi.transforms[i].rows_to_parent(ops.sub(R, ops.matmul(v, abi.U[i].T)), ops)


def _row_sweep(abi: JointAbiData, i: int, R: np.ndarray, B: np.ndarray) -> Tuple[Optional[np.ndarray], np.ndarray]:
    """
    Move a row block R and its accumulated inverse inertia B across joint i

    Returns:
        (R Pᵀ X or None at a root joint, B + R Ω Rᵀ)
    """
    ops = abi.ops
    u = ops.matmul(R, abi.tree.motion_subspace(i), b_pattern=abi.tree.subspace_pattern(i))
    v = ops.matmul(u, abi.Dinv[i])
    B = ops.add(B, ops.matmul(v, u.T))
    if abi.tree.parent[i] == WORLD:
        return None, B
    return _rows_to_parent(abi, i, R, v), B


def _empty_result(cons: ConstraintSet) -> np.ndarray:
    return np.zeros((cons.m, cons.m))


def pv_osim(tree: KinematicTree, cons: ConstraintSet, q: np.ndarray,
            ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Delassus matrix by propagating stacked constraint rows to the root

    Each link gathers the rows of every end-effector it supports together
    with their mutual inverse inertia and pushes both across its joint.
    """
    ops = ops or Arithmetic()
    logger.debug('pv_osim: n_b=%d m=%d end-effectors=%d', tree.n_b, cons.m, cons.m_b)
    if cons.m == 0:
        return _empty_result(cons)
    abi = abi_backward(tree, q, ops)

    pending: Dict[int, List[Tuple[List[int], np.ndarray, np.ndarray]]] = {i: [] for i in range(tree.n_b + 1)}
    for e in cons.effectors:
        pending[e.parent].append(([e.index], e.K, np.zeros((e.m, e.m))))

    for i in range(tree.n_b, 0, -1):
        if not pending[i]:
            continue
        ids = [e for entry in pending[i] for e in entry[0]]
        R = np.vstack([entry[1] for entry in pending[i]])
        B = block_diag(*[entry[2] for entry in pending[i]])
        R, B = _row_sweep(abi, i, R, B)
        pending[tree.parent[i]].append((ids, R, B))

    ids = [e for entry in pending[WORLD] for e in entry[0]]
    B = block_diag(*[entry[2] for entry in pending[WORLD]])
    rows = cons.row_slices()
    positions = np.concatenate([np.arange(rows[e].start, rows[e].stop) for e in ids])
    result = _empty_result(cons)
    result[np.ix_(positions, positions)] = B
    return result


def efpa(tree: KinematicTree, cons: ConstraintSet, q: np.ndarray,
         ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Delassus matrix from per end-effector constraint-space motion propagators

    A backward sweep carries each K_e to every ancestor, a forward sweep forms
    ^0Ω_i ^iK_eᵀ, and each block is assembled at the closest common ancestor.
    """
    ops = ops or Arithmetic()
    logger.debug('efpa: n_b=%d m=%d end-effectors=%d', tree.n_b, cons.m, cons.m_b)
    if cons.m == 0:
        return _empty_result(cons)
    sets = compute_index_sets(tree, cons)
    abi = abi_backward(tree, q, ops)

    cemp: Dict[Tuple[int, int], np.ndarray] = {(e.index, e.parent): e.K for e in cons.effectors}
    for i in range(tree.n_b, 0, -1):
        parent = tree.parent[i]
        if parent == WORLD:
            continue
        S, S_pattern = tree.motion_subspace(i), tree.subspace_pattern(i)
        for e in sorted(sets.es[i]):
            R = cemp[(e, i)]
            v = ops.matmul(ops.matmul(R, S, b_pattern=S_pattern), abi.Dinv[i])
            cemp[(e, parent)] = _rows_to_parent(abi, i, R, v)

    # T[(e, i)] = ^0Ω_i ^iK_eᵀ
    T: Dict[Tuple[int, int], np.ndarray] = {}
    for i in tree.links:
        if not sets.es[i]:
            continue
        parent = tree.parent[i]
        S, S_pattern = tree.motion_subspace(i), tree.subspace_pattern(i)
        omega = abi.inverse_inertia(i)
        for e in sorted(sets.es[i]):
            direct = ops.matmul(omega, cemp[(e, i)].T)
            if parent == WORLD:
                T[(e, i)] = direct
                continue
            Y = abi.transforms[i].apply_motion(T[(e, parent)], ops)
            joint_part = ops.matmul(abi.Dinv[i], ops.matmul(abi.U[i].T, Y))
            Y = ops.sub(Y, ops.matmul(S, joint_part, a_pattern=S_pattern))
            T[(e, i)] = ops.add(Y, direct)

    rows = cons.row_slices()
    result = _empty_result(cons)
    for a, e in enumerate(cons.effectors):
        for f in cons.effectors[a:]:
            c = e.parent if e.index == f.index else sets.cca[(e.index, f.index)]
            if c == WORLD:
                continue
            block = ops.matmul(cemp[(e.index, c)], T[(f.index, c)])
            result[rows[e.index], rows[f.index]] = block
            if e.index != f.index:
                result[rows[f.index], rows[e.index]] = block.T
    return result


@dataclass
class BranchingSweepData:
    """
    Working set of the branching-link algorithm.

    ``emp[k]`` maps motions of the parent of k to the closest branching
    descendant of k (rows of K_e at end-effectors); ``omega[k]`` is the inverse
    inertia seen there with the parent of k grounded. ``root_omega[i]`` is
    ^0Ω_i for branching i and ``cemp[(e, j)]`` is ^jK_e for branching ancestors j.
    """
    emp: Dict[int, np.ndarray]
    omega: Dict[int, np.ndarray]
    root_omega: Dict[int, np.ndarray]
    cemp: Dict[Tuple[int, int], np.ndarray]


VisitLog = List[Tuple[str, int]]


def branching_backward(abi: JointAbiData, cons: ConstraintSet, sets: IndexSets,
                       visit_log: Optional[VisitLog] = None) -> Tuple[Dict[int, np.ndarray], Dict[int, np.ndarray]]:
    """
    Backward sweep building propagators and inverse inertias from each
    supporting link down to its closest branching descendant

    Returns:
        (emp, omega) keyed by end-effector and supporting link
    """
    tree = abi.tree
    emp: Dict[int, np.ndarray] = {}
    omega: Dict[int, np.ndarray] = {}
    for e in cons.effectors:
        emp[e.index] = e.K
        omega[e.index] = np.zeros((e.m, e.m))

    for k in range(tree.n_b, 0, -1):
        if not sets.es[k]:
            continue
        if visit_log is not None:
            visit_log.append(('a', k))
        if sets.is_branching(k):
            if tree.parent[k] != WORLD:
                emp[k] = abi.motion_propagator(k)
            omega[k] = abi.inverse_inertia(k)
        else:
            child = next(c for c in sets.children[k] if sets.es[c] == sets.es[k])
            propagated, omega[k] = _row_sweep(abi, k, emp[child], omega[child])
            if propagated is not None:
                emp[k] = propagated
    return emp, omega


def branching_sweeps(tree: KinematicTree, cons: ConstraintSet, q: np.ndarray,
                     ops: Optional[Arithmetic] = None,
                     visit_log: Optional[VisitLog] = None,
                     sets: Optional[IndexSets] = None) -> BranchingSweepData:
    """Backward, forward and ancestral sweeps of the branching-link algorithm"""
    ops = ops or Arithmetic()
    sets = sets or compute_index_sets(tree, cons)
    abi = abi_backward(tree, q, ops)
    emp, omega = branching_backward(abi, cons, sets, visit_log)

    root_omega: Dict[int, np.ndarray] = {}
    for i in sets.branching:
        if i == WORLD:
            continue
        if visit_log is not None:
            visit_log.append(('b', i))
        top, ancestor = sets.top[i], sets.anc_branch[i]
        if ancestor == WORLD:
            root_omega[i] = omega[top]
        else:
            carried = ops.matmul(ops.matmul(emp[top], root_omega[ancestor]), emp[top].T)
            root_omega[i] = ops.add(omega[top], carried)

    cemp: Dict[Tuple[int, int], np.ndarray] = {}
    for e in cons.indices:
        j = sets.anc_branch[e]
        if j == WORLD:
            continue
        cemp[(e, j)] = emp[sets.top[e]]
        if visit_log is not None:
            visit_log.append(('c', j))
        while sets.anc_branch[j] != WORLD:
            cemp[(e, sets.anc_branch[j])] = ops.matmul(cemp[(e, j)], emp[sets.top[j]])
            j = sets.anc_branch[j]
            if visit_log is not None:
                visit_log.append(('c', j))
    return BranchingSweepData(emp, omega, root_omega, cemp)


def pv_osimr(tree: KinematicTree, cons: ConstraintSet, q: np.ndarray,
             ops: Optional[Arithmetic] = None, visit_log: Optional[VisitLog] = None) -> np.ndarray:
    """
    Delassus matrix with propagation restricted to branching links

    Args:
        tree: Validated kinematic tree
        cons: Constraint set
        q: Configuration
        ops: Arithmetic layer
        visit_log: Optional list receiving (phase, node) visits

    Returns:
        m×m Delassus matrix
    """
    ops = ops or Arithmetic()
    logger.debug('pv_osimr: n_b=%d m=%d end-effectors=%d', tree.n_b, cons.m, cons.m_b)
    if cons.m == 0:
        return _empty_result(cons)
    sets = compute_index_sets(tree, cons)
    sweep = branching_sweeps(tree, cons, q, ops, visit_log, sets)

    rows = cons.row_slices()
    result = _empty_result(cons)
    weighted: Dict[Tuple[int, int], np.ndarray] = {}
    for a, e in enumerate(cons.indices):
        result[rows[e], rows[e]] = sweep.root_omega[e]
        for f in cons.indices[a + 1:]:
            c = sets.cca[(e, f)]
            if c == WORLD:
                continue
            if visit_log is not None:
                visit_log.append(('d', c))
            if (e, c) not in weighted:
                weighted[(e, c)] = ops.matmul(sweep.cemp[(e, c)], sweep.root_omega[c])
            block = ops.matmul(weighted[(e, c)], sweep.cemp[(f, c)].T)
            result[rows[e], rows[f]] = block
            result[rows[f], rows[e]] = block.T
    return result


@dataclass(frozen=True)
class ExtendedPropagator:
    """Force propagator from link ``source`` to its ancestor ``target``"""
    matrix: np.ndarray
    source: int
    target: int


def extended_propagator(abi: JointAbiData, target: int, source: int) -> ExtendedPropagator:
    """
    Compose per-joint force propagators from source up to target

    Raises:
        NotAncestor: if target is neither source nor one of its ancestors
    """
    if target != source and not abi.tree.is_ancestor(target, source):
        raise NotAncestor(f'{target} is not an ancestor of {source}')
    matrix = np.eye(6)
    k = source
    while k != target:
        matrix = abi.force_propagator(k) @ matrix
        k = abi.tree.parent[k]
    return ExtendedPropagator(matrix, source, target)


def efp_compose(p1: ExtendedPropagator, p2: ExtendedPropagator) -> ExtendedPropagator:
    """
    Chain two propagators: p1 from i to k, then p2 from k to j

    Raises:
        ChainMismatch: if p1 does not end where p2 starts
    """
    if p1.target != p2.source:
        raise ChainMismatch(f'cannot chain {p1.source}->{p1.target} with {p2.source}->{p2.target}')
    return ExtendedPropagator(p2.matrix @ p1.matrix, p1.source, p2.target)


def path_inverse_inertia(tree: KinematicTree, abi: JointAbiData, j: int, i: int) -> np.ndarray:
    """
    Inverse inertia of link i with ancestor j grounded, by explicit summation
    over the joints strictly below j down to i (frame of i)

    Raises:
        NotAncestor: unless j is a proper ancestor of i (the world counts)
    """
    if not tree.is_ancestor(j, i):
        raise NotAncestor(f'{j} is not a proper ancestor of {i}')
    total = abi.inverse_inertia(i).copy()
    carry = np.eye(6)
    k = i
    while tree.parent[k] != j:
        carry = carry @ abi.motion_propagator(k)
        k = tree.parent[k]
        total += carry @ abi.inverse_inertia(k) @ carry.T
    return total


DelassusAlgorithm = Callable[..., np.ndarray]

ALGORITHMS: Dict[str, DelassusAlgorithm] = {
    'naive': naive_delassus,
    'ltl': ltl_delassus,
    'pv_osim': pv_osim,
    'efpa': efpa,
    'pv_osimr': pv_osimr
}
