"""
Test cases for URDF ingestion
"""
import os
import unittest
import numpy as np
from numpy.testing import assert_allclose
from src.models.kinematic_tree import validate
from src.tools.urdf_loader import load_urdf, parse_urdf, to_tree
from src.utils.errors import (
    CyclicJointGraph, MalformedXml, MultipleRoots, NonPositiveMass, UnsupportedJointType
)

SAMPLE_URDF = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'sample_robot.urdf')


def link(name, mass=1.0):
    return (f'<link name="{name}"><inertial><origin xyz="0.1 0 0"/><mass value="{mass}"/>'
            f'<inertia ixx="0.01" iyy="0.01" izz="0.01"/></inertial></link>')


def joint(name, parent, child, kind='revolute', xyz='0 0 0'):
    return (f'<joint name="{name}" type="{kind}"><parent link="{parent}"/><child link="{child}"/>'
            f'<origin xyz="{xyz}"/><axis xyz="0 0 1"/></joint>')


def robot(*parts):
    return '<robot name="r">' + ''.join(parts) + '</robot>'


class TestParseUrdf(unittest.TestCase):
    """Test cases for parse_urdf"""

    def test_sample_document(self):
        """The sample arm parses with its ignored elements reported"""
        with open(SAMPLE_URDF, encoding='utf-8') as handle:
            doc = parse_urdf(handle.read())
        self.assertEqual(doc.name, 'sample_arm')
        self.assertEqual(doc.root, 'base_link')
        self.assertEqual(len(doc.links), 6)
        self.assertEqual(len(doc.fixed_joints), 1)
        self.assertAlmostEqual(doc.total_mass, 10.1)
        self.assertEqual(len(doc.warnings), 2)

    def test_malformed_xml(self):
        """Broken XML raises MalformedXml"""
        with self.assertRaises(MalformedXml):
            parse_urdf('<robot><link name="a"></robot>')

    def test_non_numeric_inertial(self):
        """Masses and inertia entries must be numbers"""
        with self.assertRaises(MalformedXml):
            parse_urdf(robot(link('a', mass='heavy')))
        bad_inertia = ('<link name="a"><inertial><mass value="1"/>'
                       '<inertia ixx="0.01" iyy="small" izz="0.01"/></inertial></link>')
        with self.assertRaises(MalformedXml):
            parse_urdf(robot(bad_inertia))

    def test_unsupported_joint(self):
        """Planar joints are not supported"""
        with self.assertRaises(UnsupportedJointType):
            parse_urdf(robot(link('a'), link('b'), joint('j', 'a', 'b', kind='planar')))

    def test_cycle(self):
        """A closed joint loop is rejected"""
        text = robot(link('a'), link('b'), link('c'),
                     joint('j1', 'a', 'b'), joint('j2', 'b', 'c'), joint('j3', 'c', 'b'))
        with self.assertRaises(CyclicJointGraph):
            parse_urdf(text)

    def test_loop_without_root(self):
        """Links that all have parents form a cycle"""
        with self.assertRaises(CyclicJointGraph):
            parse_urdf(robot(link('a'), link('b'), joint('j1', 'a', 'b'), joint('j2', 'b', 'a')))

    def test_multiple_roots(self):
        """Two disconnected roots are rejected"""
        with self.assertRaises(MultipleRoots):
            parse_urdf(robot(link('a'), link('b')))

    def test_unknown_link(self):
        """Joints must reference declared links"""
        with self.assertRaises(MalformedXml):
            parse_urdf(robot(link('a'), joint('j', 'a', 'ghost')))


class TestToTree(unittest.TestCase):
    """Test cases for to_tree"""

    def test_sample_fixed_base(self):
        """Fixed joints merge and the root link becomes the world"""
        tree = load_urdf(SAMPLE_URDF)
        validate(tree)
        self.assertEqual(tree.n_b, 4)
        self.assertEqual(tree.names[1:], ('shoulder', 'upper_arm', 'forearm', 'wrist'))
        self.assertEqual(tree.joint_histogram(), {'revolute': 3, 'prismatic': 1})
        self.assertAlmostEqual(tree.inertias[4].mass, 0.6)
        # Merged centre of mass: 0.4 kg at 0.03 and 0.2 kg at 0.11 along x
        assert_allclose(tree.inertias[4].com, [(0.4 * 0.03 + 0.2 * 0.11) / 0.6, 0.0, 0.0], atol=1e-12)

    def test_sample_floating_base(self):
        """A floating base adds a free-flyer carrying the root link"""
        tree = load_urdf(SAMPLE_URDF, base='floating')
        self.assertEqual(tree.n_b, 5)
        self.assertEqual(tree.n, 10)
        self.assertEqual(tree.joints[1].kind, 'free_flyer')
        self.assertAlmostEqual(tree.inertias[1].mass, 5.0)

    def test_fixed_chain_offsets_accumulate(self):
        """A joint below a fixed joint is placed through the merged offset"""
        text = robot(link('a'), link('b'), link('c'), link('d'),
                     joint('j1', 'a', 'b', xyz='1 0 0'),
                     joint('j2', 'b', 'c', kind='fixed', xyz='0 2 0'),
                     joint('j3', 'c', 'd', xyz='0 0 3'))
        tree = to_tree(parse_urdf(text))
        self.assertEqual(tree.n_b, 2)
        self.assertEqual(tree.parent[2], 1)
        assert_allclose(tree.placements[2].translation, [0.0, 2.0, 3.0])
        self.assertAlmostEqual(tree.inertias[1].mass, 2.0)

    def test_massless_moving_link(self):
        """A moving link without mass is rejected"""
        text = robot(link('a'), '<link name="b"/>', joint('j', 'a', 'b'))
        with self.assertRaises(NonPositiveMass):
            to_tree(parse_urdf(text))

    def test_rotated_origin(self):
        """Joint rpy rotates the child frame"""
        tree = load_urdf(SAMPLE_URDF)
        rotation = tree.placements[4].rotation
        assert_allclose(rotation @ np.array([0.0, 1.0, 0.0]), [1.0, 0.0, 0.0], atol=1e-12)


if __name__ == '__main__':
    unittest.main()
