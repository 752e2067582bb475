"""
Reference Delassus computations: kinematics, CRBA, constraint Jacobian,
dense Cholesky and sparse LTL factorization
"""
import logging
from dataclasses import dataclass
from typing import List, Optional
import numpy as np
from src.models.arithmetic import Arithmetic
from src.models.kinematic_tree import WORLD, ConstraintSet, KinematicTree, check_configuration
from src.models.spatial import PluckerTransform
from src.utils.errors import SingularJsim

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Jsim:
    """Joint-space inertia matrix with its per-DoF parent array (-1 at the root)"""
    M: np.ndarray
    dof_parent: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def chain(self, k: int) -> List[int]:
        """DoF k followed by its DoF ancestors"""
        result = []
        while k != -1:
            result.append(k)
            k = int(self.dof_parent[k])
        return result


def link_transforms(tree: KinematicTree, q: np.ndarray, ops: Optional[Arithmetic] = None) -> List[Optional[PluckerTransform]]:
    """
    Per-link parent-to-child transforms X_J(q_i) ∘ X_T(i), carrying the
    structural patterns of their link

    Returns:
        List indexed by link; entry 0 is None
    """
    ops = ops or Arithmetic()
    q = check_configuration(tree, q)
    transforms: List[Optional[PluckerTransform]] = [None]
    for i in tree.links:
        joint_motion = tree.joints[i].joint_transform(q[tree.q_index[i]], ops)
        transforms.append(joint_motion.compose(tree.placements[i], ops).with_pattern(*tree.transform_pattern(i)))
    return transforms


def forward_kinematics(tree: KinematicTree, q: np.ndarray, ops: Optional[Arithmetic] = None) -> List[PluckerTransform]:
    """
    World-to-link transforms for every link

    Returns:
        List indexed by link; entry 0 is the identity (world)
    """
    ops = ops or Arithmetic()
    local = link_transforms(tree, q, ops)
    world = [PluckerTransform.identity()]
    for i in tree.links:
        parent = tree.parent[i]
        world.append(local[i] if parent == WORLD else local[i].compose(world[parent], ops))
    return world


def dof_parent_array(tree: KinematicTree) -> np.ndarray:
    """Parent DoF of every DoF; multi-DoF joints chain their own DoFs"""
    dof_parent = np.full(tree.n, -1, dtype=int)
    for i in tree.links:
        dofs = tree.v_index[i]
        parent = tree.parent[i]
        first_parent = tree.v_index[parent].stop - 1 if parent != WORLD else -1
        for k in range(dofs.start, dofs.stop):
            dof_parent[k] = first_parent if k == dofs.start else k - 1
    return dof_parent


def crba_jsim(tree: KinematicTree, q: np.ndarray, ops: Optional[Arithmetic] = None,
              transforms: Optional[List[Optional[PluckerTransform]]] = None) -> Jsim:
    """
    Joint-space inertia matrix by composite-rigid-body accumulation

    Args:
        tree: Validated kinematic tree
        q: Configuration
        ops: Arithmetic layer
        transforms: Precomputed link transforms; computed here if omitted

    Returns:
        Jsim with structural zeros left untouched
    """
    ops = ops or Arithmetic()
    X = transforms or link_transforms(tree, q, ops)
    composite = [None] + [tree.inertia_matrix(i).copy() for i in tree.links]
    for i in range(tree.n_b, 0, -1):
        parent = tree.parent[i]
        if parent != WORLD:
            composite[parent] = ops.add(composite[parent], X[i].congruence(composite[i], ops))

    M = np.zeros((tree.n, tree.n))
    for i in tree.links:
        S = tree.motion_subspace(i)
        vi = tree.v_index[i]
        S_pattern = tree.subspace_pattern(i)
        F = ops.matmul(composite[i], S, b_pattern=S_pattern)
        M[vi, vi] = ops.matmul(S.T, F, a_pattern=S_pattern.T)
        j = i
        while tree.parent[j] != WORLD:
            F = X[j].apply_transpose_force(F, ops)
            j = tree.parent[j]
            vj = tree.v_index[j]
            block = ops.matmul(tree.motion_subspace(j).T, F, a_pattern=tree.subspace_pattern(j).T)
            M[vj, vi] = block
            M[vi, vj] = block.T
    return Jsim(M, dof_parent_array(tree))


def constraint_jacobian(tree: KinematicTree, cons: ConstraintSet, q: np.ndarray,
                        ops: Optional[Arithmetic] = None,
                        transforms: Optional[List[Optional[PluckerTransform]]] = None) -> np.ndarray:
    """
    Stacked m×n constraint Jacobian in end-effector order

    Row block e is K_e times the motion Jacobian of its parent link, both in
    the parent link frame. Columns outside the link's support are zero.
    """
    ops = ops or Arithmetic()
    X = transforms or link_transforms(tree, q, ops)
    J = np.zeros((cons.m, tree.n))
    rows = cons.row_slices()
    for e in cons.effectors:
        G = e.K
        link = e.parent
        while link != WORLD:
            J[rows[e.index], tree.v_index[link]] = ops.matmul(G, tree.motion_subspace(link),
                                                              b_pattern=tree.subspace_pattern(link))
            if tree.parent[link] != WORLD:
                G = X[link].rows_to_parent(G, ops)
            link = tree.parent[link]
    return J


def naive_delassus(tree: KinematicTree, cons: ConstraintSet, q: np.ndarray,
                   ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Λ⁻¹ = J M⁻¹ Jᵀ through a dense Cholesky factorization of the JSIM

    Raises:
        SingularJsim: if M is not positive definite
    """
    ops = ops or Arithmetic()
    logger.debug('naive: n_b=%d n=%d m=%d', tree.n_b, tree.n, cons.m)
    if cons.m == 0:
        return np.zeros((0, 0))
    X = link_transforms(tree, q, ops)
    jsim = crba_jsim(tree, q, ops, X)
    J = constraint_jacobian(tree, cons, q, ops, X)
    try:
        L = ops.cholesky(jsim.M)
    except np.linalg.LinAlgError as e:
        raise SingularJsim(f'JSIM is not positive definite: {e}') from e
    Z = ops.solve_lower(L, J.T)
    return ops.matmul(Z.T, Z)


def ltl_factor(jsim: Jsim, ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Sparse LᵀL factorization of the JSIM, leaves to root

    Only entries on the dof_parent chains are touched, so L inherits M's
    sparsity pattern exactly.

    Returns:
        Lower-triangular L with Lᵀ L = M

    Raises:
        SingularJsim: on a non-positive pivot
    """
    ops = ops or Arithmetic()
    H = jsim.M.copy()
    lam = jsim.dof_parent
    mul = add_sub = div = 0
    for k in range(jsim.n - 1, -1, -1):
        if not H[k, k] > 0.0:
            raise SingularJsim(f'non-positive pivot {H[k, k]} at DoF {k}')
        H[k, k] = np.sqrt(H[k, k])
        i = lam[k]
        while i != -1:
            H[k, i] /= H[k, k]
            div += 1
            i = lam[i]
        i = lam[k]
        while i != -1:
            j = i
            while j != -1:
                H[i, j] -= H[k, i] * H[k, j]
                mul += 1
                add_sub += 1
                j = lam[j]
            i = lam[i]
    ops.charge(mul=mul, add_sub=add_sub, div=div, sqrt=jsim.n)
    return np.tril(H)


def _common_link(tree: KinematicTree, a: int, b: int) -> int:
    while a != b:
        if tree.depth(a) >= tree.depth(b):
            a = tree.parent[a]
        else:
            b = tree.parent[b]
    return a


def ltl_delassus(tree: KinematicTree, cons: ConstraintSet, q: np.ndarray,
                 ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Λ⁻¹ = Y Yᵀ with Y = J L⁻¹ from the sparse LTL factor

    Each row of Y is solved only over its support chain and each block of
    Λ⁻¹ is formed only over the common support of its two end-effectors.
    """
    ops = ops or Arithmetic()
    logger.debug('ltl: n_b=%d n=%d m=%d', tree.n_b, tree.n, cons.m)
    if cons.m == 0:
        return np.zeros((0, 0))
    X = link_transforms(tree, q, ops)
    jsim = crba_jsim(tree, q, ops, X)
    J = constraint_jacobian(tree, cons, q, ops, X)
    L = ltl_factor(jsim, ops)
    lam = jsim.dof_parent

    Y = J.copy()
    rows = cons.row_slices()
    mul = add_sub = div = 0
    for e in cons.effectors:
        for r in range(rows[e.index].start, rows[e.index].stop):
            k = tree.v_index[e.parent].stop - 1
            while k != -1:
                Y[r, k] /= L[k, k]
                div += 1
                i = lam[k]
                while i != -1:
                    Y[r, i] -= Y[r, k] * L[k, i]
                    mul += 1
                    add_sub += 1
                    i = lam[i]
                k = lam[k]
    ops.charge(mul=mul, add_sub=add_sub, div=div)

    result = np.zeros((cons.m, cons.m))
    for a, e in enumerate(cons.effectors):
        for f in cons.effectors[a:]:
            common = _common_link(tree, e.parent, f.parent)
            if common == WORLD:
                continue
            support = jsim.chain(tree.v_index[common].stop - 1)
            block = ops.matmul(Y[rows[e.index]][:, support], Y[rows[f.index]][:, support].T)
            result[rows[e.index], rows[f.index]] = block
            result[rows[f.index], rows[e.index]] = block.T
    return result


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max-norm deviation scaled by the max-norm of the expected matrix"""
    if actual.size == 0 and expected.size == 0:
        return 0.0
    scale = max(float(np.max(np.abs(expected))), np.finfo(float).tiny)
    return float(np.max(np.abs(actual - expected))) / scale
