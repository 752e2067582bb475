"""
6-D spatial algebra: motion/force vectors, Plücker transforms, spatial inertias.

Convention: angular components first, linear second. A PluckerTransform with
rotation E and translation r is the motion transform from frame A to frame B,
where E maps A-coordinates to B-coordinates and r is B's origin expressed in A:

    X v  = [E w;  E (v - r x w)]
    X* f = [E (n - r x f);  E f]
    X^T f = [E^T n + r x (E^T f);  E^T f]     (force from B back to A)
"""
from dataclasses import dataclass, field, replace
from typing import Optional
import numpy as np
from src.models.arithmetic import Arithmetic, structure
from src.utils.errors import NonPositiveMass, NonUnitQuaternion

QUATERNION_TOL = 1e-9

_PLAIN = Arithmetic()


def _ops(ops: Optional[Arithmetic]) -> Arithmetic:
    return _PLAIN if ops is None else ops


def skew(v: np.ndarray) -> np.ndarray:
    """Matrix [v]x with [v]x w = v x w"""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0]
    ])


def rotation_about(axis: np.ndarray, angle: float, ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Active rotation matrix about a unit axis (Rodrigues)

    Args:
        axis: Unit 3-vector
        angle: Rotation angle in radians
        ops: Arithmetic layer; trigonometric evaluations are not counted

    Returns:
        3×3 rotation matrix R with R v rotating v by angle about axis
    """
    ops = _ops(ops)
    c, s = np.cos(angle), np.sin(angle)
    one_minus_c = ops.sub(1.0, c)
    rotation = ops.add(ops.scale(np.eye(3), c), ops.scale(skew(axis), s))
    return ops.add(rotation, ops.scale(ops.outer(axis, axis), one_minus_c))


def quaternion_to_rotation(quat: np.ndarray, ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Rotation matrix of a unit quaternion (w, x, y, z)

    Raises:
        NonUnitQuaternion: if the norm differs from 1 by more than 1e-9
    """
    norm = float(np.linalg.norm(quat))
    if abs(norm - 1.0) > QUATERNION_TOL:
        raise NonUnitQuaternion(f'quaternion norm is {norm:.12g}, expected 1')
    w, x, y, z = quat
    # 9 products, 6 doubled cross terms; diagonal and off-diagonal sums
    _ops(ops).charge(mul=18, add_sub=15)
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)]
    ])


def rpy_to_rotation(rpy) -> np.ndarray:
    """URDF fixed-axis roll/pitch/yaw: R = Rz(yaw) Ry(pitch) Rx(roll)"""
    roll, pitch, yaw = rpy
    rx = rotation_about(np.array([1.0, 0.0, 0.0]), roll)
    ry = rotation_about(np.array([0.0, 1.0, 0.0]), pitch)
    rz = rotation_about(np.array([0.0, 0.0, 1.0]), yaw)
    return rz @ ry @ rx


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    quat = rng.normal(size=4)
    return quaternion_to_rotation(quat / np.linalg.norm(quat))


@dataclass(frozen=True)
class SpatialMotion:
    angular: np.ndarray
    linear: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.angular, self.linear])

    @classmethod
    def from_vector(cls, v) -> 'SpatialMotion':
        v = np.asarray(v, dtype=float)
        return cls(v[:3].copy(), v[3:].copy())


@dataclass(frozen=True)
class SpatialForce:
    moment: np.ndarray
    force: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.moment, self.force])

    @classmethod
    def from_vector(cls, f) -> 'SpatialForce':
        f = np.asarray(f, dtype=float)
        return cls(f[:3].copy(), f[3:].copy())

    def pairing(self, v: SpatialMotion) -> float:
        """Power <f, v>"""
        return float(self.moment @ v.angular + self.force @ v.linear)


@dataclass(frozen=True)
class PluckerTransform:
    """
    Motion transform (E, r).

    Optional patterns mark structural zeros and units of E and r (see
    ``structure``); metered actions charge only for structural nonzeros.
    """
    rotation: np.ndarray
    translation: np.ndarray
    rotation_pattern: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    translation_pattern: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @classmethod
    def identity(cls) -> 'PluckerTransform':
        return cls(np.eye(3), np.zeros(3), structure(np.eye(3)), structure(np.zeros(3)))

    @classmethod
    def from_rotation(cls, rotation: np.ndarray) -> 'PluckerTransform':
        return cls(np.asarray(rotation, dtype=float), np.zeros(3), translation_pattern=structure(np.zeros(3)))

    @classmethod
    def from_translation(cls, translation) -> 'PluckerTransform':
        return cls(np.eye(3), np.asarray(translation, dtype=float), rotation_pattern=structure(np.eye(3)))

    def structural(self) -> 'PluckerTransform':
        """Copy whose patterns are read off its own entries; for constant model data"""
        return self.with_pattern(structure(self.rotation), structure(self.translation))

    def with_pattern(self, rotation_pattern: Optional[np.ndarray],
                     translation_pattern: Optional[np.ndarray]) -> 'PluckerTransform':
        return replace(self, rotation_pattern=rotation_pattern, translation_pattern=translation_pattern)

    @property
    def _transposed_pattern(self) -> Optional[np.ndarray]:
        return None if self.rotation_pattern is None else self.rotation_pattern.T

    @property
    def _translates(self) -> bool:
        return self.translation_pattern is None or bool(self.translation_pattern.any())

    def compose(self, inner: 'PluckerTransform', ops: Optional[Arithmetic] = None) -> 'PluckerTransform':
        """self ∘ inner: apply inner first, then self"""
        ops = _ops(ops)
        rotation = ops.matmul(self.rotation, inner.rotation, self.rotation_pattern, inner.rotation_pattern)
        shift = ops.matmul(inner.rotation.T, self.translation, inner._transposed_pattern, self.translation_pattern)
        return PluckerTransform(rotation, ops.add(inner.translation, shift))

    def inverse(self, ops: Optional[Arithmetic] = None) -> 'PluckerTransform':
        ops = _ops(ops)
        shift = ops.matmul(self.rotation, self.translation, self.rotation_pattern, self.translation_pattern)
        return PluckerTransform(self.rotation.T.copy(), -shift)

    def to_matrix(self) -> np.ndarray:
        """Dense 6×6 motion transform"""
        E, rx = self.rotation, skew(self.translation)
        return np.block([[E, np.zeros((3, 3))], [-E @ rx, E]])

    def force_matrix(self) -> np.ndarray:
        """Dense 6×6 force transform X* = X^-T"""
        E, rx = self.rotation, skew(self.translation)
        return np.block([[E, -E @ rx], [np.zeros((3, 3)), E]])

    # Metered block actions; blocks are 6-vectors or 6×k matrices

    def apply_motion(self, v: np.ndarray, ops: Optional[Arithmetic] = None) -> np.ndarray:
        ops = _ops(ops)
        w, lin = v[:3], v[3:]
        top = ops.matmul(self.rotation, w, self.rotation_pattern)
        if self._translates:
            lin = ops.sub(lin, ops.cross(self.translation, w, self.translation_pattern))
        bottom = ops.matmul(self.rotation, lin, self.rotation_pattern)
        return np.concatenate([top, bottom])

    def apply_force(self, f: np.ndarray, ops: Optional[Arithmetic] = None) -> np.ndarray:
        ops = _ops(ops)
        n, lin = f[:3], f[3:]
        if self._translates:
            n = ops.sub(n, ops.cross(self.translation, lin, self.translation_pattern))
        top = ops.matmul(self.rotation, n, self.rotation_pattern)
        bottom = ops.matmul(self.rotation, lin, self.rotation_pattern)
        return np.concatenate([top, bottom])

    def apply_transpose_force(self, f: np.ndarray, ops: Optional[Arithmetic] = None) -> np.ndarray:
        ops = _ops(ops)
        n, lin = f[:3], f[3:]
        lin_a = ops.matmul(self.rotation.T, lin, self._transposed_pattern)
        top = ops.matmul(self.rotation.T, n, self._transposed_pattern)
        if self._translates:
            top = ops.add(top, ops.cross(self.translation, lin_a, self.translation_pattern))
        return np.concatenate([top, lin_a])

    def rows_to_parent(self, rows: np.ndarray, ops: Optional[Arithmetic] = None) -> np.ndarray:
        """R X for an r×6 row block R acting on child-frame motions"""
        return self.apply_transpose_force(rows.T, ops).T

    def congruence(self, inertia: np.ndarray, ops: Optional[Arithmetic] = None) -> np.ndarray:
        """X^T H X: an inertia in frame B re-expressed in frame A"""
        half = self.apply_transpose_force(inertia, ops)
        return self.apply_transpose_force(half.T, ops).T


@dataclass(frozen=True)
class SpatialInertia:
    mass: float
    com: np.ndarray
    rot_inertia: np.ndarray

    @classmethod
    def rod(cls, mass: float, length: float, width: float) -> 'SpatialInertia':
        """Uniform box of length along x, square cross-section, origin at one end"""
        transverse = mass * (length ** 2 + width ** 2) / 12.0
        axial = mass * (2.0 * width ** 2) / 12.0
        return cls(mass, np.array([length / 2.0, 0.0, 0.0]), np.diag([axial, transverse, transverse]))

    def matrix(self) -> np.ndarray:
        """6×6 spatial inertia about the frame origin"""
        cx = skew(self.com)
        m = self.mass
        return np.block([
            [self.rot_inertia + m * cx @ cx.T, m * cx],
            [m * cx.T, m * np.eye(3)]
        ])

    def transformed(self, X: PluckerTransform) -> 'SpatialInertia':
        """Same body expressed in frame B, where X maps frame A (self) to B"""
        com = X.rotation @ (self.com - X.translation)
        rot = X.rotation @ self.rot_inertia @ X.rotation.T
        return SpatialInertia(self.mass, com, rot)

    def __add__(self, other: 'SpatialInertia') -> 'SpatialInertia':
        """
        Rigid union of two bodies described in the same frame

        Raises:
            NonPositiveMass: if the combined mass is not positive
        """
        mass = self.mass + other.mass
        if not mass > 0.0:
            raise NonPositiveMass(f'combined mass {mass} is not positive')
        com = (self.mass * self.com + other.mass * other.com) / mass

        def shifted(body: 'SpatialInertia') -> np.ndarray:
            offset = skew(body.com - com)
            return body.rot_inertia + body.mass * offset @ offset.T

        return SpatialInertia(mass, com, shifted(self) + shifted(other))


def transform_motion(X: PluckerTransform, v: SpatialMotion, ops: Optional[Arithmetic] = None) -> SpatialMotion:
    return SpatialMotion.from_vector(X.apply_motion(v.vector, ops))


def transform_force(X: PluckerTransform, f: SpatialForce, ops: Optional[Arithmetic] = None) -> SpatialForce:
    return SpatialForce.from_vector(X.apply_force(f.vector, ops))


def transform_inertia(X: PluckerTransform, inertia: np.ndarray, ops: Optional[Arithmetic] = None) -> np.ndarray:
    """
    Re-express a 6×6 inertia from frame A in frame B: X* H X^-1

    Kinetic energy v^T H v is preserved when v is mapped to X v.
    """
    return X.inverse(ops).congruence(inertia, ops)
