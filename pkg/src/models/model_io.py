"""
JSON model format for kinematic trees and their constraints
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple
import numpy as np
from src.models.kinematic_tree import (
    ConstraintSet, JointModel, KinematicTree, attach_constraint
)
from src.models.spatial import PluckerTransform, SpatialInertia
from src.utils.errors import DimensionMismatch, ModelError

logger = logging.getLogger(__name__)

MODEL_FORMAT = 'delassus-model'
MODEL_VERSION = 1


def _joint_dict(joint: JointModel) -> Dict[str, Any]:
    return {'type': joint.kind, 'axis': None if joint.axis is None else joint.axis.tolist()}


def model_to_dict(tree: KinematicTree, cons: ConstraintSet) -> Dict[str, Any]:
    links = []
    for i in tree.links:
        placement, inertia = tree.placements[i], tree.inertias[i]
        links.append({
            'name': tree.names[i],
            'parent': tree.parent[i],
            'joint': _joint_dict(tree.joints[i]),
            'placement': {
                'rotation': placement.rotation.tolist(),
                'translation': placement.translation.tolist()
            },
            'inertia': {
                'mass': inertia.mass,
                'com': inertia.com.tolist(),
                'rot_inertia': inertia.rot_inertia.tolist()
            }
        })
    constraints = []
    for e in cons.effectors:
        entry = {'link': e.parent, 'kind': e.kind, 'K': e.K.tolist()}
        if e.point is not None:
            entry['point'] = e.point.tolist()
        constraints.append(entry)
    return {'format': MODEL_FORMAT, 'version': MODEL_VERSION, 'links': links, 'constraints': constraints}


def dump_model(tree: KinematicTree, cons: ConstraintSet) -> str:
    """Serialize a tree and its constraints; floats keep their exact repr"""
    return json.dumps(model_to_dict(tree, cons), indent=2)


def _joint_from_dict(data: Dict[str, Any]) -> JointModel:
    kind = data.get('type')
    axis = data.get('axis')
    if kind in ('revolute', 'prismatic'):
        if axis is None or len(axis) != 3:
            raise DimensionMismatch(f'{kind} joint needs a 3-vector axis')
        return JointModel(kind, np.asarray(axis, dtype=float))
    if kind in ('spherical', 'free_flyer', 'fixed'):
        return JointModel(kind)
    raise ModelError(f'unknown joint type in model file: {kind}')


def model_from_dict(data: Dict[str, Any]) -> Tuple[KinematicTree, ConstraintSet]:
    if data.get('format') != MODEL_FORMAT:
        raise ModelError(f"not a {MODEL_FORMAT} document (format={data.get('format')!r})")
    if data.get('version') != MODEL_VERSION:
        raise ModelError(f"unsupported model version: {data.get('version')}")
    try:
        links = data['links']
        parent = [int(link['parent']) for link in links]
        joints = [_joint_from_dict(link['joint']) for link in links]
        placements = [
            PluckerTransform(np.asarray(link['placement']['rotation'], dtype=float),
                             np.asarray(link['placement']['translation'], dtype=float))
            for link in links
        ]
        inertias = [
            SpatialInertia(float(link['inertia']['mass']),
                           np.asarray(link['inertia']['com'], dtype=float),
                           np.asarray(link['inertia']['rot_inertia'], dtype=float))
            for link in links
        ]
        names = [link.get('name', f'link{i + 1}') for i, link in enumerate(links)]
    except (KeyError, TypeError) as e:
        raise ModelError(f'incomplete link entry in model file: {e}') from e

    tree = KinematicTree(parent, joints, placements, inertias, names)
    cons = ConstraintSet.empty(tree)
    for entry in data.get('constraints', []):
        kind = entry.get('kind', 'custom')
        if kind == 'weld':
            cons = attach_constraint(cons, int(entry['link']), 'weld')
        elif kind == 'connect':
            cons = attach_constraint(cons, int(entry['link']), 'connect', point=entry.get('point'))
        else:
            cons = attach_constraint(cons, int(entry['link']), 'custom', K=entry['K'])
    return tree, cons


def load_model(text: str) -> Tuple[KinematicTree, ConstraintSet]:
    """
    Parse a JSON model document

    Raises:
        ModelError: if the document is not a valid model
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f'model file is not valid JSON: {e}') from e
    tree, cons = model_from_dict(data)
    logger.debug('loaded model: n_b=%d m=%d', tree.n_b, cons.m)
    return tree, cons


def save_model_file(path, tree: KinematicTree, cons: ConstraintSet) -> None:
    Path(path).write_text(dump_model(tree, cons), encoding='utf-8')


def load_model_file(path) -> Tuple[KinematicTree, ConstraintSet]:
    return load_model(Path(path).read_text(encoding='utf-8'))
