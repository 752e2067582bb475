"""
URDF ingestion: kinematic and inertial subset, fixed joints merged into their parents
"""
import logging
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple
import numpy as np
from src.models.kinematic_tree import JointModel, KinematicTree, TreeBuilder
from src.models.spatial import PluckerTransform, SpatialInertia, rpy_to_rotation
from src.utils.errors import (
    CyclicJointGraph, MalformedXml, MultipleRoots, NonPositiveMass, UnsupportedJointType
)

logger = logging.getLogger(__name__)

SUPPORTED_JOINTS = ('revolute', 'continuous', 'prismatic', 'fixed', 'floating')
IGNORED_LINK_TAGS = ('visual', 'collision')
IGNORED_JOINT_TAGS = ('limit', 'dynamics', 'mimic', 'calibration', 'safety_controller')


@dataclass(frozen=True)
class UrdfLink:
    name: str
    mass: float = 0.0
    com: np.ndarray = field(default_factory=lambda: np.zeros(3))
    inertia: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def spatial_inertia(self) -> SpatialInertia:
        return SpatialInertia(self.mass, self.com, self.inertia)


@dataclass(frozen=True)
class UrdfJoint:
    name: str
    type: str
    parent: str
    child: str
    xyz: np.ndarray
    rpy: np.ndarray
    axis: np.ndarray

    def origin(self) -> PluckerTransform:
        """Parent link frame to joint frame"""
        return PluckerTransform(rpy_to_rotation(self.rpy).T, self.xyz)


@dataclass(frozen=True)
class UrdfDocument:
    name: str
    links: Dict[str, UrdfLink]
    joints: Tuple[UrdfJoint, ...]
    root: str
    warnings: Tuple[str, ...] = ()

    @property
    def fixed_joints(self) -> List[UrdfJoint]:
        return [j for j in self.joints if j.type == 'fixed']

    @property
    def total_mass(self) -> float:
        return sum(link.mass for link in self.links.values())


def _vector(elem, attribute: str, default: str) -> np.ndarray:
    text = default if elem is None else elem.get(attribute, default)
    try:
        values = [float(v) for v in text.split()]
    except ValueError as e:
        raise MalformedXml(f'bad numeric attribute {attribute}="{text}"') from e
    if len(values) != 3:
        raise MalformedXml(f'attribute {attribute}="{text}" must have three components')
    return np.array(values)


def _scalar(elem, attribute: str, context: str) -> float:
    text = elem.get(attribute, '0')
    try:
        return float(text)
    except ValueError as e:
        raise MalformedXml(f'{context}: bad numeric attribute {attribute}="{text}"') from e


def _parse_link(link_elem, warnings: List[str]) -> UrdfLink:
    name = link_elem.get('name')
    if not name:
        raise MalformedXml('link element without a name attribute')
    for tag in IGNORED_LINK_TAGS:
        if link_elem.find(tag) is not None:
            warnings.append(f'link {name}: ignored <{tag}>')

    inertial_elem = link_elem.find('inertial')
    if inertial_elem is None:
        return UrdfLink(name)

    mass_elem = inertial_elem.find('mass')
    mass = _scalar(mass_elem, 'value', f'link {name}') if mass_elem is not None else 0.0
    inertia = np.zeros((3, 3))
    inertia_elem = inertial_elem.find('inertia')
    if inertia_elem is not None:
        ixx, ixy, ixz, iyy, iyz, izz = (_scalar(inertia_elem, key, f'link {name}')
                                        for key in ('ixx', 'ixy', 'ixz', 'iyy', 'iyz', 'izz'))
        inertia = np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
    origin_elem = inertial_elem.find('origin')
    com = _vector(origin_elem, 'xyz', '0 0 0')
    # Inertia tensor is given in the inertial frame
    rotation = rpy_to_rotation(_vector(origin_elem, 'rpy', '0 0 0'))
    return UrdfLink(name, mass, com, rotation @ inertia @ rotation.T)


def _parse_joint(joint_elem, warnings: List[str]) -> UrdfJoint:
    name = joint_elem.get('name', '')
    joint_type = joint_elem.get('type')
    if joint_type not in SUPPORTED_JOINTS:
        raise UnsupportedJointType(f'joint {name}: type {joint_type!r} is not supported')
    parent_elem, child_elem = joint_elem.find('parent'), joint_elem.find('child')
    if parent_elem is None or child_elem is None or not parent_elem.get('link') or not child_elem.get('link'):
        raise MalformedXml(f'joint {name}: missing parent or child link')
    for tag in IGNORED_JOINT_TAGS:
        if joint_elem.find(tag) is not None:
            warnings.append(f'joint {name}: ignored <{tag}>')

    origin_elem = joint_elem.find('origin')
    axis = _vector(joint_elem.find('axis'), 'xyz', '1 0 0')
    if joint_type in ('revolute', 'continuous', 'prismatic'):
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            raise MalformedXml(f'joint {name}: zero axis')
        axis = axis / norm
    return UrdfJoint(
        name=name,
        type=joint_type,
        parent=parent_elem.get('link'),
        child=child_elem.get('link'),
        xyz=_vector(origin_elem, 'xyz', '0 0 0'),
        rpy=_vector(origin_elem, 'rpy', '0 0 0'),
        axis=axis
    )


def parse_urdf(text: str) -> UrdfDocument:
    """
    Parse the kinematic and inertial subset of a URDF document

    Args:
        text: URDF XML string

    Returns:
        UrdfDocument with its list of ignored-element warnings

    Raises:
        MalformedXml, MultipleRoots, CyclicJointGraph, UnsupportedJointType
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise MalformedXml(f'invalid XML: {e}') from e
    if root.tag != 'robot':
        raise MalformedXml(f'expected <robot> root element, got <{root.tag}>')

    warnings: List[str] = []
    links: Dict[str, UrdfLink] = {}
    for link_elem in root.findall('link'):
        link = _parse_link(link_elem, warnings)
        if link.name in links:
            raise MalformedXml(f'duplicate link {link.name}')
        links[link.name] = link
    joints = [_parse_joint(joint_elem, warnings) for joint_elem in root.findall('joint')]
    for tag in ('transmission', 'gazebo'):
        for _ in root.findall(tag):
            warnings.append(f'ignored <{tag}>')
    if not links:
        raise MalformedXml('document has no links')

    parents: Dict[str, str] = {}
    for joint in joints:
        for end in (joint.parent, joint.child):
            if end not in links:
                raise MalformedXml(f'joint {joint.name} references unknown link {end}')
        if joint.child in parents:
            raise CyclicJointGraph(f'link {joint.child} has more than one parent joint')
        parents[joint.child] = joint.parent

    roots = [name for name in links if name not in parents]
    if not roots:
        raise CyclicJointGraph('every link has a parent joint')
    if len(roots) > 1:
        raise MultipleRoots(f'document has {len(roots)} root links: {", ".join(roots)}')

    reachable = {roots[0]}
    frontier = deque([roots[0]])
    while frontier:
        name = frontier.popleft()
        for joint in joints:
            if joint.parent == name and joint.child not in reachable:
                reachable.add(joint.child)
                frontier.append(joint.child)
    if len(reachable) != len(links):
        raise CyclicJointGraph(f'links {sorted(set(links) - reachable)} form a closed loop')

    for message in warnings:
        logger.warning('URDF: %s', message)
    return UrdfDocument(root.get('name', ''), links, tuple(joints), roots[0], tuple(warnings))


def _accumulate(host: SpatialInertia, body: SpatialInertia) -> SpatialInertia:
    if body.mass == 0.0:
        return host
    if host.mass == 0.0:
        return body
    return host + body


def to_tree(doc: UrdfDocument, base: str = 'fixed') -> KinematicTree:
    """
    Build a kinematic tree, merging fixed joints and numbering links breadth-first

    Args:
        doc: Parsed URDF document
        base: 'fixed' welds the root link to the world; 'floating' adds a free-flyer as joint 1

    Returns:
        KinematicTree

    Raises:
        NonPositiveMass: if a moving link has no mass after merging
    """
    builder = TreeBuilder()
    inertias: Dict[int, SpatialInertia] = {}
    # URDF link -> (tree link it is rigidly attached to, transform from that link's frame)
    host: Dict[str, Tuple[int, PluckerTransform]] = {}

    if base == 'floating':
        root_index = builder.add_link(0, JointModel.free_flyer(), name=doc.root)
        inertias[root_index] = doc.links[doc.root].spatial_inertia()
        host[doc.root] = (root_index, PluckerTransform.identity())
    else:
        host[doc.root] = (0, PluckerTransform.identity())

    frontier = deque([doc.root])
    while frontier:
        name = frontier.popleft()
        for joint in doc.joints:
            if joint.parent != name:
                continue
            parent_index, offset = host[name]
            placement = joint.origin().compose(offset)
            child = doc.links[joint.child]
            if joint.type == 'fixed':
                host[child.name] = (parent_index, placement)
                if parent_index > 0:
                    merged = child.spatial_inertia().transformed(placement.inverse())
                    inertias[parent_index] = _accumulate(inertias[parent_index], merged)
                logger.debug('merged fixed joint %s into link %d', joint.name, parent_index)
            else:
                if joint.type in ('revolute', 'continuous'):
                    model = JointModel.revolute(joint.axis)
                elif joint.type == 'prismatic':
                    model = JointModel.prismatic(joint.axis)
                else:
                    model = JointModel.free_flyer()
                index = builder.add_link(parent_index, model, placement, name=child.name)
                inertias[index] = child.spatial_inertia()
                host[child.name] = (index, PluckerTransform.identity())
            frontier.append(child.name)

    for index, inertia in inertias.items():
        if not inertia.mass > 0.0:
            raise NonPositiveMass(f'link {builder.names[index - 1]} has no mass after merging fixed joints')
    builder.inertias = [inertias[i] for i in range(1, len(builder.parent) + 1)]
    tree = builder.build()
    logger.info('URDF %s: %d links, %d DoF after merging %d fixed joints',
                doc.name, tree.n_b, tree.n, len(doc.fixed_joints))
    return tree


def load_urdf(path, base: str = 'fixed') -> KinematicTree:
    return to_tree(parse_urdf(Path(path).read_text(encoding='utf-8')), base)
