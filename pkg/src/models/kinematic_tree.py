"""
Kinematic tree data model: joints, links, end-effector constraints, configurations
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
from src.models.arithmetic import Arithmetic, structure
from src.models.spatial import (
    QUATERNION_TOL, PluckerTransform, SpatialInertia, quaternion_to_rotation, rotation_about, skew
)
from src.utils.errors import (
    BadAxis, BadLinkIndex, DimensionMismatch, InvalidGeometry, NonPositiveMass,
    NonTopologicalOrder, NonUnitQuaternion, RankDeficientK
)

logger = logging.getLogger(__name__)

WORLD = 0

# Seeds of the configurations used to read off structural patterns
GENERIC_SEEDS = (101, 202)

# kind -> (nq, nv)
JOINT_DOFS = {
    'revolute': (1, 1),
    'prismatic': (1, 1),
    'spherical': (4, 3),
    'free_flyer': (7, 6),
    'fixed': (0, 0)
}

AXES = {
    'x': np.array([1.0, 0.0, 0.0]),
    'y': np.array([0.0, 1.0, 0.0]),
    'z': np.array([0.0, 0.0, 1.0])
}


@dataclass(frozen=True)
class JointModel:
    """
    Joint connecting a link to its parent.

    Configuration layout: revolute/prismatic a scalar, spherical a unit
    quaternion (w, x, y, z), free flyer a quaternion followed by a position.
    """
    kind: str
    axis: Optional[np.ndarray] = None

    @classmethod
    def revolute(cls, axis) -> 'JointModel':
        return cls('revolute', np.asarray(axis, dtype=float))

    @classmethod
    def prismatic(cls, axis) -> 'JointModel':
        return cls('prismatic', np.asarray(axis, dtype=float))

    @classmethod
    def spherical(cls) -> 'JointModel':
        return cls('spherical')

    @classmethod
    def free_flyer(cls) -> 'JointModel':
        return cls('free_flyer')

    @classmethod
    def fixed(cls) -> 'JointModel':
        return cls('fixed')

    @property
    def nq(self) -> int:
        return JOINT_DOFS[self.kind][0]

    @property
    def nv(self) -> int:
        return JOINT_DOFS[self.kind][1]

    def motion_subspace(self) -> np.ndarray:
        """S (6×nv) in the child frame"""
        if self.kind == 'revolute':
            return np.concatenate([self.axis, np.zeros(3)]).reshape(6, 1)
        if self.kind == 'prismatic':
            return np.concatenate([np.zeros(3), self.axis]).reshape(6, 1)
        if self.kind == 'spherical':
            return np.vstack([np.eye(3), np.zeros((3, 3))])
        if self.kind == 'free_flyer':
            return np.eye(6)
        return np.zeros((6, 0))

    def joint_transform(self, q_joint: np.ndarray, ops: Optional[Arithmetic] = None) -> PluckerTransform:
        """Transform from the joint's predecessor frame to the child frame"""
        if self.kind == 'revolute':
            return PluckerTransform.from_rotation(rotation_about(self.axis, q_joint[0], ops).T)
        if self.kind == 'prismatic':
            displacement = self.axis * q_joint[0] if ops is None else ops.scale(self.axis, q_joint[0])
            return PluckerTransform.from_translation(displacement)
        if self.kind == 'spherical':
            return PluckerTransform.from_rotation(quaternion_to_rotation(q_joint, ops).T)
        if self.kind == 'free_flyer':
            rotation = quaternion_to_rotation(q_joint[:4], ops)
            return PluckerTransform(rotation.T, np.asarray(q_joint[4:7], dtype=float))
        return PluckerTransform.identity()

    def neutral(self) -> np.ndarray:
        if self.kind in ('spherical', 'free_flyer'):
            q = np.zeros(self.nq)
            q[0] = 1.0
            return q
        return np.zeros(self.nq)

    def random(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind in ('revolute', 'prismatic'):
            return rng.uniform(-np.pi, np.pi, size=1)
        if self.kind == 'spherical':
            quat = rng.normal(size=4)
            return quat / np.linalg.norm(quat)
        if self.kind == 'free_flyer':
            quat = rng.normal(size=4)
            return np.concatenate([quat / np.linalg.norm(quat), rng.uniform(-1.0, 1.0, size=3)])
        return np.zeros(0)

    def generic(self, seed: int) -> np.ndarray:
        """Configuration free of special values, for structural analysis"""
        return self.random(np.random.default_rng(seed))


class KinematicTree:
    """
    Immutable tree of links numbered 1..n_b from the root; index 0 is the world.

    Per-link arrays are padded at index 0 so that link i lives at position i.
    """

    def __init__(self, parent: Sequence[int], joints: Sequence[JointModel],
                 placements: Sequence[PluckerTransform], inertias: Sequence[SpatialInertia],
                 names: Optional[Sequence[str]] = None):
        n_b = len(parent)
        if not (len(joints) == len(placements) == len(inertias) == n_b):
            raise DimensionMismatch(
                f'per-link arrays disagree: {n_b} parents, {len(joints)} joints, '
                f'{len(placements)} placements, {len(inertias)} inertias'
            )
        self.n_b = n_b
        self.parent: Tuple[int, ...] = (-1,) + tuple(int(p) for p in parent)
        self.joints: Tuple[Optional[JointModel], ...] = (None,) + tuple(joints)
        self.placements: Tuple[Optional[PluckerTransform], ...] = (
            (None,) + tuple(X.structural() for X in placements)
        )
        self.inertias: Tuple[Optional[SpatialInertia], ...] = (None,) + tuple(inertias)
        self.names: Tuple[str, ...] = ('world',) + tuple(names or [f'link{i}' for i in range(1, n_b + 1)])

        children: List[List[int]] = [[] for _ in range(n_b + 1)]
        for i in range(1, n_b + 1):
            if 0 <= self.parent[i] <= n_b:
                children[self.parent[i]].append(i)
        self.children: Tuple[Tuple[int, ...], ...] = tuple(tuple(c) for c in children)

        q_index, v_index = [slice(0, 0)], [slice(0, 0)]
        nq = nv = 0
        for i in range(1, n_b + 1):
            q_index.append(slice(nq, nq + self.joints[i].nq))
            v_index.append(slice(nv, nv + self.joints[i].nv))
            nq += self.joints[i].nq
            nv += self.joints[i].nv
        self.q_index = tuple(q_index)
        self.v_index = tuple(v_index)
        self.nq = nq
        self.n = nv

        depth = [0] * (n_b + 1)
        for i in range(1, n_b + 1):
            p = self.parent[i]
            depth[i] = depth[p] + 1 if 0 <= p < i else 1
        self._depth = tuple(depth)
        self._inertia_matrices: Dict[int, np.ndarray] = {}
        self._transform_patterns: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self._subspace_patterns: Dict[int, np.ndarray] = {}

    @property
    def links(self) -> range:
        return range(1, self.n_b + 1)

    @property
    def max_depth(self) -> int:
        return max(self._depth[1:], default=0)

    def depth(self, i: int) -> int:
        return self._depth[i]

    def ancestors(self, i: int) -> List[int]:
        """Proper ancestors of link i, nearest first, excluding the world"""
        result = []
        j = self.parent[i]
        while j > WORLD:
            result.append(j)
            j = self.parent[j]
        return result

    def support(self, i: int) -> List[int]:
        """Link i followed by its ancestors"""
        return [i] + self.ancestors(i) if i > WORLD else []

    def is_ancestor(self, j: int, i: int) -> bool:
        """True if j is a proper ancestor of i (the world is everyone's ancestor)"""
        return j == WORLD and i > WORLD or j in self.ancestors(i)

    def motion_subspace(self, i: int) -> np.ndarray:
        return self.joints[i].motion_subspace()

    def subspace_pattern(self, i: int) -> np.ndarray:
        """Structural zeros and units of S_i"""
        if i not in self._subspace_patterns:
            self._subspace_patterns[i] = structure(self.motion_subspace(i))
        return self._subspace_patterns[i]

    def transform_pattern(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Structural (rotation, translation) patterns of X_J(q_i) ∘ X_T(i)

        Read off two unrelated joint configurations, so they depend on the
        joint kind, axis and placement only.
        """
        if i not in self._transform_patterns:
            joint, placement = self.joints[i], self.placements[i]
            samples = [joint.joint_transform(joint.generic(seed)).compose(placement) for seed in GENERIC_SEEDS]
            self._transform_patterns[i] = (structure(*(X.rotation for X in samples)),
                                           structure(*(X.translation for X in samples)))
        return self._transform_patterns[i]

    def inertia_matrix(self, i: int) -> np.ndarray:
        """Constant 6×6 link inertia; model data, never metered"""
        if i not in self._inertia_matrices:
            self._inertia_matrices[i] = self.inertias[i].matrix()
        return self._inertia_matrices[i]

    def joint_histogram(self) -> Dict[str, int]:
        histogram: Dict[str, int] = {}
        for i in self.links:
            histogram[self.joints[i].kind] = histogram.get(self.joints[i].kind, 0) + 1
        return histogram

    def __repr__(self) -> str:
        return f'KinematicTree(n_b={self.n_b}, n={self.n}, depth={self.max_depth})'


class TreeBuilder:
    """Accumulates links in topological order and produces a KinematicTree"""

    def __init__(self):
        self.parent: List[int] = []
        self.joints: List[JointModel] = []
        self.placements: List[PluckerTransform] = []
        self.inertias: List[SpatialInertia] = []
        self.names: List[str] = []

    def add_link(self, parent: int, joint: JointModel, placement: Optional[PluckerTransform] = None,
                 inertia: Optional[SpatialInertia] = None, name: Optional[str] = None) -> int:
        """
        Append a link

        Args:
            parent: Index of the parent link (0 for the world)
            joint: Joint connecting the new link to its parent
            placement: Parent frame to joint frame; identity if omitted
            inertia: Link inertia; a unit rod if omitted
            name: Link name

        Returns:
            Index of the new link
        """
        from src.config import Config
        self.parent.append(parent)
        self.joints.append(joint)
        self.placements.append(placement or PluckerTransform.identity())
        self.inertias.append(inertia or SpatialInertia.rod(Config.LINK_MASS, Config.LINK_LENGTH, Config.LINK_WIDTH))
        index = len(self.parent)
        self.names.append(name or f'link{index}')
        return index

    def build(self) -> KinematicTree:
        return KinematicTree(self.parent, self.joints, self.placements, self.inertias, self.names)


def validate(tree: KinematicTree) -> None:
    """
    Check topological ordering, masses and joint axes

    Raises:
        NonTopologicalOrder, NonPositiveMass, BadAxis, InvalidGeometry: first violation found
    """
    if tree.n_b > 0 and tree.parent[1] != WORLD:
        raise NonTopologicalOrder(f'link 1 must be attached to the world, got parent {tree.parent[1]}')
    for i in tree.links:
        if not 0 <= tree.parent[i] < i:
            raise NonTopologicalOrder(f'link {i} has parent {tree.parent[i]}; parents must precede children')
    for i in tree.links:
        if not tree.inertias[i].mass > 0.0:
            raise NonPositiveMass(f'link {i} ({tree.names[i]}) has mass {tree.inertias[i].mass}')
    for i in tree.links:
        joint = tree.joints[i]
        if joint.kind in ('revolute', 'prismatic'):
            if joint.axis is None or abs(np.linalg.norm(joint.axis) - 1.0) > 1e-12:
                raise BadAxis(f'link {i} joint axis {joint.axis} is not a unit vector')
        if joint.kind == 'fixed':
            raise InvalidGeometry(f'link {i} has a fixed joint; merge fixed joints before use')


@dataclass(frozen=True)
class EndEffector:
    """Fictitious zero-inertia link rigidly attached to its parent link"""
    index: int
    parent: int
    K: np.ndarray
    kind: str
    point: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return self.K.shape[0]


@dataclass(frozen=True)
class ConstraintSet:
    """End-effectors n_b+1, n_b+2, ... with constraint matrices in parent-link frames"""
    n_b: int
    effectors: Tuple[EndEffector, ...] = field(default_factory=tuple)

    @classmethod
    def empty(cls, tree: KinematicTree) -> 'ConstraintSet':
        return cls(tree.n_b)

    @property
    def m_b(self) -> int:
        return len(self.effectors)

    @property
    def m(self) -> int:
        return sum(e.m for e in self.effectors)

    @property
    def indices(self) -> List[int]:
        return [e.index for e in self.effectors]

    def effector(self, index: int) -> EndEffector:
        return self.effectors[index - self.n_b - 1]

    def row_slices(self) -> Dict[int, slice]:
        """Row range of each end-effector in the stacked m×m Delassus matrix"""
        slices, start = {}, 0
        for e in self.effectors:
            slices[e.index] = slice(start, start + e.m)
            start += e.m
        return slices

    def on_link(self, link: int) -> List[EndEffector]:
        return [e for e in self.effectors if e.parent == link]


def constraint_matrix(kind: str, point=None, K=None) -> np.ndarray:
    """
    Constraint matrix for a weld (6D), connect (3D point) or custom constraint

    The connect rows select the linear acceleration of the point, [-[p]x, I3].
    """
    if kind == 'weld':
        return np.eye(6)
    if kind == 'connect':
        p = np.zeros(3) if point is None else np.asarray(point, dtype=float)
        return np.hstack([-skew(p), np.eye(3)])
    if kind == 'custom':
        if K is None:
            raise DimensionMismatch('custom constraint requires a K matrix')
        return np.atleast_2d(np.asarray(K, dtype=float))
    raise InvalidGeometry(f'unknown constraint kind: {kind}')


def attach_constraint(cons: ConstraintSet, link: int, kind: str, K=None, point=None) -> ConstraintSet:
    """
    Append a fictitious end-effector on a link

    Args:
        cons: Existing constraint set
        link: Constrained link, 1..n_b
        kind: 'weld', 'connect' or 'custom'
        K: Constraint matrix for 'custom'
        point: Contact point in the link frame for 'connect'

    Returns:
        New constraint set with the end-effector appended
    """
    if not 1 <= link <= cons.n_b:
        raise BadLinkIndex(f'cannot constrain link {link}; valid links are 1..{cons.n_b}')
    matrix = constraint_matrix(kind, point=point, K=K)
    if matrix.shape[1] != 6:
        raise DimensionMismatch(f'constraint matrix must have 6 columns, got {matrix.shape[1]}')
    if np.linalg.matrix_rank(matrix) < matrix.shape[0]:
        raise RankDeficientK(f'constraint matrix with {matrix.shape[0]} rows has rank {np.linalg.matrix_rank(matrix)}')
    effector = EndEffector(cons.n_b + cons.m_b + 1, link, matrix, kind,
                           None if point is None else np.asarray(point, dtype=float))
    logger.debug('attached %s end-effector %d on link %d (m_e=%d)', kind, effector.index, link, effector.m)
    return replace(cons, effectors=cons.effectors + (effector,))


def neutral_configuration(tree: KinematicTree) -> np.ndarray:
    return np.concatenate([tree.joints[i].neutral() for i in tree.links]) if tree.n_b else np.zeros(0)


def random_configuration(tree: KinematicTree, rng: np.random.Generator) -> np.ndarray:
    return np.concatenate([tree.joints[i].random(rng) for i in tree.links]) if tree.n_b else np.zeros(0)


def check_configuration(tree: KinematicTree, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (tree.nq,):
        raise DimensionMismatch(f'configuration has shape {q.shape}, tree expects ({tree.nq},)')
    for i in tree.links:
        if tree.joints[i].kind in ('spherical', 'free_flyer'):
            norm = float(np.linalg.norm(q[tree.q_index[i]][:4]))
            if abs(norm - 1.0) > QUATERNION_TOL:
                raise NonUnitQuaternion(f'link {i}: quaternion norm is {norm:.12g}, expected 1')
    return q
