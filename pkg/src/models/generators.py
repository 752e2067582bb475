"""
Synthetic mechanisms for the benchmark families and tests
"""
import logging
from typing import Optional, Tuple, Union
import numpy as np
from src.config import Config
from src.models.kinematic_tree import (
    AXES, ConstraintSet, JointModel, KinematicTree, TreeBuilder, attach_constraint
)
from src.models.spatial import PluckerTransform, SpatialInertia, random_rotation, rotation_about
from src.utils.errors import InvalidGeometry

logger = logging.getLogger(__name__)

AXIS_CYCLE = ('z', 'y', 'x')

Mechanism = Tuple[KinematicTree, ConstraintSet]


def _default_inertia() -> SpatialInertia:
    return SpatialInertia.rod(Config.LINK_MASS, Config.LINK_LENGTH, Config.LINK_WIDTH)


def _cycled_joint(kind: str, position: int) -> JointModel:
    axis = AXES[AXIS_CYCLE[position % len(AXIS_CYCLE)]]
    if kind == 'revolute':
        return JointModel.revolute(axis)
    if kind == 'prismatic':
        return JointModel.prismatic(axis)
    if kind == 'spherical':
        return JointModel.spherical()
    if kind in ('free', 'free_flyer'):
        return JointModel.free_flyer()
    raise InvalidGeometry(f'unsupported chain joint: {kind}')


def _along_x() -> PluckerTransform:
    return PluckerTransform.from_translation([Config.LINK_LENGTH, 0.0, 0.0])


def gen_chain(n: int, joint: Union[str, JointModel] = 'revolute', base: str = 'fixed') -> KinematicTree:
    """
    Serial chain of unit rods laid out along x

    Args:
        n: Number of links
        joint: Joint kind (revolute axes cycle z, y, x) or an explicit JointModel
        base: 'fixed' or 'floating'; a floating chain starts with a free-flyer

    Returns:
        KinematicTree with parent array [0, 1, ..., n-1]
    """
    if n < 1:
        raise InvalidGeometry(f'chain needs at least one link, got {n}')
    if base not in ('fixed', 'floating'):
        raise InvalidGeometry(f'unknown base type: {base}')
    builder = TreeBuilder()
    for i in range(1, n + 1):
        if i == 1 and base == 'floating':
            model = JointModel.free_flyer()
        elif isinstance(joint, JointModel):
            model = joint
        else:
            model = _cycled_joint(joint, i - 1)
        placement = PluckerTransform.identity() if i == 1 else _along_x()
        builder.add_link(i - 1, model, placement, _default_inertia())
    return builder.build()


def _welded(tree: KinematicTree, links) -> ConstraintSet:
    cons = ConstraintSet.empty(tree)
    for link in links:
        cons = attach_constraint(cons, link, 'weld')
    return cons


def gen_stem_branches(stem_len: int, branches_per_side: int,
                      branch_len: Optional[int] = None) -> Mechanism:
    """
    Floating stem with 2·branches_per_side welded side branches

    Branch b attaches at stem link 1 + floor(b·(S-1)/(2B-1)), alternating
    between the +y and -y sides. Stem links come first, then each branch's
    links in order.
    """
    branch_len = Config.BRANCH_LENGTH if branch_len is None else branch_len
    if branches_per_side < 1:
        raise InvalidGeometry(f'need at least one branch per side, got {branches_per_side}')
    if stem_len < branches_per_side:
        raise InvalidGeometry(
            f'stem of {stem_len} links is too short for {branches_per_side} branches per side'
        )
    if branch_len < 1:
        raise InvalidGeometry(f'branch length must be positive, got {branch_len}')

    builder = TreeBuilder()
    builder.add_link(0, JointModel.free_flyer(), PluckerTransform.identity(), _default_inertia(), 'stem1')
    for s in range(2, stem_len + 1):
        builder.add_link(s - 1, _cycled_joint('revolute', s - 1), _along_x(), _default_inertia(), f'stem{s}')

    n_branches = 2 * branches_per_side
    tips = []
    for b in range(n_branches):
        attach = 1 + (b * (stem_len - 1)) // (n_branches - 1)
        side = 1.0 if b % 2 == 0 else -1.0
        # Branch frame x axis points sideways
        turn = rotation_about(AXES['z'], side * np.pi / 2.0)
        placement = PluckerTransform(turn.T, np.array([Config.LINK_LENGTH / 2.0, 0.0, 0.0]))
        link = builder.add_link(attach, _cycled_joint('revolute', 0), placement, _default_inertia(), f'branch{b}_1')
        for j in range(2, branch_len + 1):
            link = builder.add_link(link, _cycled_joint('revolute', j - 1), _along_x(),
                                    _default_inertia(), f'branch{b}_{j}')
        tips.append(link)

    tree = builder.build()
    logger.debug('stem mechanism: stem=%d branches=%d n_b=%d', stem_len, n_branches, tree.n_b)
    return tree, _welded(tree, tips)


def gen_chain_md(k: int) -> Mechanism:
    """Fixed-base chain of k² links welded at links k, 2k, ..., k²"""
    if k < 1:
        raise InvalidGeometry(f'k must be positive, got {k}')
    tree = gen_chain(k * k)
    return tree, _welded(tree, range(k, k * k + 1, k))


def gen_chain_all_constrained(n: int) -> Mechanism:
    """Fixed-base chain with a weld on every link"""
    tree = gen_chain(n)
    return tree, _welded(tree, tree.links)


def gen_example_tree() -> Mechanism:
    """
    Six-link example tree: 1-2-3-4-5 with link 6 branching off link 2.

    End-effectors 7, 8 and 9 sit on links 6, 3 and 5.
    """
    builder = TreeBuilder()
    builder.add_link(0, JointModel.free_flyer(), name='base')
    for i in range(2, 6):
        builder.add_link(i - 1, _cycled_joint('revolute', i - 1), _along_x())
    turn = rotation_about(AXES['z'], np.pi / 2.0)
    builder.add_link(2, JointModel.revolute(AXES['y']), PluckerTransform(turn.T, np.array([0.5, 0.0, 0.0])))
    tree = builder.build()
    return tree, _welded(tree, (6, 3, 5))


# (name, axis) tables for the humanoid limbs
_ARM = [('shoulder_yaw', 'z'), ('shoulder_pitch', 'y'), ('shoulder_roll', 'x'), ('elbow', 'y'),
        ('wrist_yaw', 'z'), ('wrist_pitch', 'y'), ('wrist_roll', 'x')]
_LEG = [('hip_yaw', 'z'), ('hip_roll', 'x'), ('hip_pitch', 'y'), ('knee', 'y'),
        ('ankle_pitch', 'y'), ('ankle_roll', 'x')]
_FOOT_CORNERS = [(sx * 0.10, sy * 0.05, -0.05) for sx in (1.0, -1.0) for sy in (1.0, -1.0)]
FINGER_SEGMENT = 0.03


def _segment(builder: TreeBuilder, parent: int, joints, offset, segment_length: float,
             mass: float, prefix: str) -> int:
    link = parent
    for position, (name, axis) in enumerate(joints):
        placement = PluckerTransform.from_translation(offset if position == 0 else [segment_length, 0.0, 0.0])
        inertia = SpatialInertia.rod(mass, segment_length, 0.2 * segment_length)
        link = builder.add_link(link, JointModel.revolute(AXES[axis]), placement, inertia, f'{prefix}_{name}')
    return link


FOOT_CONTACTS = ('connect4', 'weld6', 'none')
HAND_CONTACTS = ('none', 'weld6', 'fingertips')


def _finger(builder: TreeBuilder, wrist: int, joints, offset, prefix: str) -> int:
    return _segment(builder, wrist, joints, offset, FINGER_SEGMENT, 0.05, prefix)


def gen_humanoid(feet: str = 'connect4', hands: str = 'none') -> Mechanism:
    """
    Floating-base humanoid: torso, head, two 7-DoF arms with three-finger
    hands, two 6-DoF legs.

    Args:
        feet: 'connect4' (four point contacts per foot), 'weld6' (one weld
            per foot) or 'none'
        hands: 'none', 'weld6' (one weld per wrist) or 'fingertips' (a point
            contact on every fingertip)

    Returns:
        (tree, constraints)
    """
    if feet not in FOOT_CONTACTS:
        raise InvalidGeometry(f'unknown foot contact {feet!r}; expected one of {FOOT_CONTACTS}')
    if hands not in HAND_CONTACTS:
        raise InvalidGeometry(f'unknown hand contact {hands!r}; expected one of {HAND_CONTACTS}')
    builder = TreeBuilder()
    pelvis = builder.add_link(0, JointModel.free_flyer(), PluckerTransform.identity(),
                              SpatialInertia(8.0, np.zeros(3), np.diag([0.1, 0.08, 0.12])), 'pelvis')
    chest = _segment(builder, pelvis, [('torso_yaw', 'z'), ('torso_pitch', 'y'), ('torso_roll', 'x')],
                     [0.0, 0.0, 0.1], 0.15, 5.0, 'torso')
    _segment(builder, chest, [('neck_yaw', 'z'), ('neck_pitch', 'y')], [0.0, 0.0, 0.25], 0.1, 1.5, 'head')

    wrists, fingertips = [], []
    for side, sign in (('left', 1.0), ('right', -1.0)):
        wrist = _segment(builder, chest, _ARM, [0.0, sign * 0.2, 0.2], 0.25, 1.2, f'{side}_arm')
        wrists.append(wrist)
        for finger in range(3):
            fingertips.append(_finger(builder, wrist, [('base', 'y'), ('middle', 'y'), ('tip', 'y')],
                                      [0.08, sign * (finger - 1) * 0.02, 0.0], f'{side}_finger{finger}'))

    feet_links = []
    for side, sign in (('left', 1.0), ('right', -1.0)):
        feet_links.append(_segment(builder, pelvis, _LEG, [0.0, sign * 0.1, -0.1], 0.4, 3.0, f'{side}_leg'))

    tree = builder.build()
    cons = ConstraintSet.empty(tree)
    for foot in feet_links:
        if feet == 'connect4':
            for corner in _FOOT_CORNERS:
                cons = attach_constraint(cons, foot, 'connect', point=corner)
        elif feet == 'weld6':
            cons = attach_constraint(cons, foot, 'weld')
    if hands == 'weld6':
        for wrist in wrists:
            cons = attach_constraint(cons, wrist, 'weld')
    elif hands == 'fingertips':
        for tip in fingertips:
            cons = attach_constraint(cons, tip, 'connect', point=[FINGER_SEGMENT, 0.0, 0.0])
    logger.debug('humanoid(feet=%s, hands=%s): n_b=%d n=%d m=%d', feet, hands, tree.n_b, tree.n, cons.m)
    return tree, cons


# (finger, joint axes) of the dexterous hand: thumb and little finger carry an extra joint
_HAND_FINGERS = [('thumb', 'zyxyy'), ('first', 'zyyy'), ('middle', 'zyyy'), ('ring', 'zyyy'), ('little', 'xzyyy')]


def gen_hand() -> Mechanism:
    """
    Fixed-base 24-DoF dexterous hand: a two-joint wrist and five fingers,
    each fingertip held by a point contact
    """
    builder = TreeBuilder()
    wrist = _segment(builder, 0, [('wrist_yaw', 'y'), ('wrist_pitch', 'x')], [0.0, 0.0, 0.0], 0.05, 0.3, 'wrist')
    tips = []
    for position, (name, axes) in enumerate(_HAND_FINGERS):
        joints = [(f'joint{k}', axis) for k, axis in enumerate(axes)]
        offset = [0.09, 0.02 * (position - 2), 0.0] if name != 'thumb' else [0.03, 0.04, 0.0]
        tips.append(_finger(builder, wrist, joints, offset, name))

    tree = builder.build()
    cons = ConstraintSet.empty(tree)
    for tip in tips:
        cons = attach_constraint(cons, tip, 'connect', point=[FINGER_SEGMENT, 0.0, 0.0])
    logger.debug('hand: n_b=%d n=%d m=%d', tree.n_b, tree.n, cons.m)
    return tree, cons


def _random_inertia(rng: np.random.Generator) -> SpatialInertia:
    spread = rng.normal(scale=0.3, size=(3, 3))
    return SpatialInertia(
        float(rng.uniform(0.5, 2.0)),
        rng.uniform(-0.2, 0.2, size=3),
        spread @ spread.T + 0.05 * np.eye(3)
    )


def _random_axis(rng: np.random.Generator) -> np.ndarray:
    axis = rng.normal(size=3)
    return axis / np.linalg.norm(axis)


def random_model(rng: np.random.Generator, n_links: int, n_constraints: int) -> Mechanism:
    """
    Random tree with mixed joints, placements and inertias

    The base is a free-flyer or a revolute joint with equal probability;
    other joints are revolute, prismatic or spherical. Constraints mix welds
    and connects at random points.
    """
    if n_links < 1:
        raise InvalidGeometry(f'random model needs at least one link, got {n_links}')
    builder = TreeBuilder()
    for i in range(1, n_links + 1):
        parent = 0 if i == 1 else int(rng.integers(1, i))
        if i == 1:
            joint = JointModel.free_flyer() if rng.random() < 0.5 else JointModel.revolute(_random_axis(rng))
        else:
            kind = rng.choice(['revolute', 'prismatic', 'spherical'], p=[0.5, 0.25, 0.25])
            if kind == 'revolute':
                joint = JointModel.revolute(_random_axis(rng))
            elif kind == 'prismatic':
                joint = JointModel.prismatic(_random_axis(rng))
            else:
                joint = JointModel.spherical()
        placement = PluckerTransform(random_rotation(rng), rng.uniform(-0.5, 0.5, size=3))
        builder.add_link(parent, joint, placement, _random_inertia(rng))

    tree = builder.build()
    cons = ConstraintSet.empty(tree)
    for _ in range(n_constraints):
        link = int(rng.integers(1, n_links + 1))
        if rng.random() < 0.5:
            cons = attach_constraint(cons, link, 'weld')
        else:
            cons = attach_constraint(cons, link, 'connect', point=rng.uniform(-0.3, 0.3, size=3))
    return tree, cons
