"""
Test cases for kinematic trees, constraints, index sets, generators and the model format
"""
import os
import tempfile
import unittest
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from src.models.generators import (
    gen_chain, gen_chain_all_constrained, gen_chain_md, gen_example_tree, gen_hand, gen_humanoid,
    gen_stem_branches, random_model
)
from src.models.arithmetic import GENERAL, UNIT, ZERO
from src.models.index_sets import compute_index_sets
from src.models.kinematic_tree import (
    AXES, ConstraintSet, JointModel, KinematicTree, TreeBuilder, attach_constraint, check_configuration,
    neutral_configuration, random_configuration, validate
)
from src.models.model_io import dump_model, load_model, load_model_file, save_model_file
from src.models.spatial import PluckerTransform, SpatialInertia
from src.utils.errors import (
    BadAxis, BadLinkIndex, DimensionMismatch, InvalidGeometry, ModelError, NonPositiveMass,
    NonTopologicalOrder, NonUnitQuaternion, NotAncestor, RankDeficientK
)


def rod():
    return SpatialInertia.rod(1.0, 1.0, 0.1)


class TestKinematicTree(unittest.TestCase):
    """Test cases for KinematicTree and validate"""

    def test_chain_layout(self):
        """A revolute chain has one DoF per link and cycles z, y, x axes"""
        tree = gen_chain(5)
        self.assertEqual(tree.n_b, 5)
        self.assertEqual(tree.n, 5)
        self.assertEqual(tree.parent[1:], (0, 1, 2, 3, 4))
        self.assertEqual(tree.max_depth, 5)
        assert_array_equal(tree.joints[1].axis, AXES['z'])
        assert_array_equal(tree.joints[2].axis, AXES['y'])
        assert_array_equal(tree.joints[3].axis, AXES['x'])
        validate(tree)

    def test_floating_chain(self):
        """A floating chain starts with a 7/6 free-flyer"""
        tree = gen_chain(3, base='floating')
        self.assertEqual((tree.nq, tree.n), (9, 8))
        self.assertEqual(tree.joint_histogram(), {'free_flyer': 1, 'revolute': 2})

    def test_ancestors_and_support(self):
        """Ancestry queries follow the parent array"""
        tree, _ = gen_example_tree()
        self.assertEqual(tree.ancestors(6), [2, 1])
        self.assertEqual(tree.support(5), [5, 4, 3, 2, 1])
        self.assertTrue(tree.is_ancestor(0, 6))
        self.assertTrue(tree.is_ancestor(2, 6))
        self.assertFalse(tree.is_ancestor(3, 6))
        self.assertFalse(tree.is_ancestor(6, 6))

    def test_non_topological_order(self):
        """A parent after its child is rejected"""
        tree = KinematicTree([0, 3, 1], [JointModel.revolute(AXES['z'])] * 3,
                             [PluckerTransform.identity()] * 3, [rod()] * 3)
        with self.assertRaises(NonTopologicalOrder):
            validate(tree)

    def test_root_must_hang_from_world(self):
        """Link 1 must attach to the world"""
        tree = KinematicTree([1], [JointModel.revolute(AXES['z'])], [PluckerTransform.identity()], [rod()])
        with self.assertRaises(NonTopologicalOrder):
            validate(tree)

    def test_non_positive_mass(self):
        """Massless links are rejected"""
        builder = TreeBuilder()
        builder.add_link(0, JointModel.revolute(AXES['z']), inertia=SpatialInertia(0.0, np.zeros(3), np.eye(3)))
        with self.assertRaises(NonPositiveMass):
            validate(builder.build())

    def test_bad_axis(self):
        """Joint axes must be unit vectors"""
        builder = TreeBuilder()
        builder.add_link(0, JointModel.revolute([0.0, 0.0, 2.0]))
        with self.assertRaises(BadAxis):
            validate(builder.build())

    def test_fixed_joint_rejected(self):
        """Fixed joints must be merged before use"""
        builder = TreeBuilder()
        builder.add_link(0, JointModel.fixed())
        with self.assertRaises(InvalidGeometry):
            validate(builder.build())

    def test_array_length_mismatch(self):
        """Per-link arrays must have equal lengths"""
        with self.assertRaises(DimensionMismatch):
            KinematicTree([0, 1], [JointModel.revolute(AXES['z'])], [PluckerTransform.identity()] * 2, [rod()] * 2)

    def test_configurations(self):
        """Neutral and random configurations have nq entries and unit quaternions"""
        tree = gen_chain(3, joint='spherical', base='floating')
        q0 = neutral_configuration(tree)
        self.assertEqual(q0.shape, (tree.nq,))
        q = random_configuration(tree, np.random.default_rng(0))
        self.assertAlmostEqual(np.linalg.norm(q[0:4]), 1.0)
        self.assertAlmostEqual(np.linalg.norm(q[7:11]), 1.0)
        with self.assertRaises(DimensionMismatch):
            check_configuration(tree, np.zeros(tree.nq + 1))

    def test_non_unit_quaternion_rejected(self):
        """Spherical and free-flyer quaternions must have unit norm"""
        tree = gen_chain(2, base='floating')
        q = neutral_configuration(tree)
        q[:4] = [1.0, 1.0, 0.0, 0.0]
        with self.assertRaises(NonUnitQuaternion):
            check_configuration(tree, q)
        q[:4] = [1.0 + 1e-12, 0.0, 0.0, 0.0]
        check_configuration(tree, q)
        spherical = gen_chain(2, joint='spherical')
        q = neutral_configuration(spherical)
        q[4:8] = 0.5
        check_configuration(spherical, q)
        q[4] = 0.0
        with self.assertRaises(ModelError):
            check_configuration(spherical, q)

    def test_transform_patterns(self):
        """Structural patterns follow the joint axis and placement, not q"""
        tree = gen_chain(3)
        rotation, translation = tree.transform_pattern(1)
        assert_array_equal(rotation, [[GENERAL, GENERAL, ZERO], [GENERAL, GENERAL, ZERO], [ZERO, ZERO, UNIT]])
        assert_array_equal(translation, [ZERO, ZERO, ZERO])
        rotation, translation = tree.transform_pattern(3)
        assert_array_equal(rotation, [[UNIT, ZERO, ZERO], [ZERO, GENERAL, GENERAL], [ZERO, GENERAL, GENERAL]])
        assert_array_equal(translation, [UNIT, ZERO, ZERO])
        assert_array_equal(tree.subspace_pattern(2), [[ZERO], [UNIT], [ZERO], [ZERO], [ZERO], [ZERO]])
        floating = gen_chain(2, base='floating')
        self.assertTrue(np.all(floating.transform_pattern(1)[0] == GENERAL))
        self.assertTrue(np.all(floating.transform_pattern(1)[1] == GENERAL))


class TestConstraints(unittest.TestCase):
    """Test cases for end-effectors"""

    def setUp(self):
        self.tree = gen_chain(4)
        self.cons = ConstraintSet.empty(self.tree)

    def test_weld_and_connect(self):
        """Welds are 6D, connects 3D, numbered after the links"""
        cons = attach_constraint(self.cons, 4, 'weld')
        cons = attach_constraint(cons, 2, 'connect', point=[0.1, 0.0, 0.0])
        self.assertEqual(cons.indices, [5, 6])
        self.assertEqual(cons.m, 9)
        self.assertEqual(cons.row_slices(), {5: slice(0, 6), 6: slice(6, 9)})
        assert_allclose(cons.effector(6).K[:, 3:], np.eye(3))
        self.assertEqual([e.index for e in cons.on_link(2)], [6])

    def test_bad_link(self):
        """Constraints must sit on an existing link"""
        with self.assertRaises(BadLinkIndex):
            attach_constraint(self.cons, 0, 'weld')
        with self.assertRaises(BadLinkIndex):
            attach_constraint(self.cons, 5, 'weld')

    def test_custom_matrix_checks(self):
        """Custom matrices need six columns and full row rank"""
        with self.assertRaises(DimensionMismatch):
            attach_constraint(self.cons, 1, 'custom', K=np.ones((2, 5)))
        with self.assertRaises(RankDeficientK):
            attach_constraint(self.cons, 1, 'custom', K=np.ones((2, 6)))
        cons = attach_constraint(self.cons, 1, 'custom', K=np.eye(6)[:2])
        self.assertEqual(cons.m, 2)


class TestIndexSets(unittest.TestCase):
    """Test cases for support sets, cca and branching links"""

    def setUp(self):
        self.tree, self.cons = gen_example_tree()
        self.sets = compute_index_sets(self.tree, self.cons)

    def test_example_tree_support_sets(self):
        """Support sets of the six-link example"""
        self.assertEqual(self.sets.es[5], {9})
        self.assertEqual(self.sets.es[3], {8, 9})
        self.assertEqual(self.sets.es[2], {7, 8, 9})
        self.assertEqual(self.sets.es[1], {7, 8, 9})
        self.assertEqual(self.sets.es[6], {7})

    def test_example_tree_cca(self):
        """Closest common ancestors of the end-effectors"""
        self.assertEqual(self.sets.cca[(8, 9)], 3)
        self.assertEqual(self.sets.cca[(7, 9)], 2)
        self.assertEqual(self.sets.cca[(9, 7)], 2)
        assert_array_equal(self.sets.table(), [[7, 2, 2], [2, 8, 3], [2, 3, 9]])

    def test_example_tree_branching(self):
        """Branching set, closest branching descendants and ancestors"""
        self.assertEqual(self.sets.branching, (0, 2, 3, 7, 8, 9))
        self.assertEqual([self.sets.desc_branch[i] for i in range(1, 10)], [2, 2, 3, 9, 9, 7, 7, 8, 9])
        self.assertEqual(list(self.sets.anc_branch[1:]), [0, 0, 2, 3, 3, 2, 2, 3, 3])

    def test_path(self):
        """Paths run top first and require a proper ancestor"""
        self.assertEqual(self.sets.path(2, 9), [3, 4, 5, 9])
        with self.assertRaises(NotAncestor):
            self.sets.path(6, 9)
        with self.assertRaises(NotAncestor):
            self.sets.path(9, 9)

    def test_random_trees_against_brute_force(self):
        """ES, cca and the branching rule match a direct computation on 100 random trees"""
        rng = np.random.default_rng(42)
        for _ in range(100):
            tree, cons = random_model(rng, int(rng.integers(2, 15)), int(rng.integers(1, 5)))
            sets = compute_index_sets(tree, cons)
            for i in tree.links:
                expected = {e.index for e in cons.effectors if e.parent == i or tree.is_ancestor(i, e.parent)}
                self.assertEqual(sets.es[i], expected)
            for e in cons.effectors:
                for f in cons.effectors:
                    if e.index == f.index:
                        continue
                    common = set(tree.support(e.parent)) & set(tree.support(f.parent))
                    deepest = max(common, key=tree.depth) if common else 0
                    self.assertEqual(sets.cca[(e.index, f.index)], deepest)
            for i in tree.links:
                child_sets = [sets.es[c] for c in sets.children[i]]
                rule = bool(sets.es[i]) and all(s != sets.es[i] for s in child_sets)
                self.assertEqual(sets.is_branching(i), rule)

    def test_closest_branching_links_against_brute_force(self):
        """𝒜 and 𝒟 match a direct search and internal branching links are bounded by m_b - 1"""
        rng = np.random.default_rng(43)
        for case in range(100):
            tree, cons = random_model(rng, int(rng.integers(2, 13)), int(rng.integers(1, 6)))
            sets = compute_index_sets(tree, cons)
            branching = set(sets.branching)

            def chain(k):
                nodes = [k]
                while nodes[-1] != 0:
                    nodes.append(sets.parent[nodes[-1]])
                return nodes

            nodes = list(tree.links) + list(cons.indices)
            with self.subTest(case=case):
                internal = branching - {0} - set(cons.indices)
                self.assertLessEqual(len(internal), cons.m_b - 1)
                self.assertTrue({0, *cons.indices} <= branching)
                for i in nodes:
                    nearest = next(k for k in chain(i)[1:] if k in branching)
                    self.assertEqual(sets.anc_branch[i], nearest)
                    if not sets.es[i]:
                        continue
                    below = [k for k in nodes if i in chain(k) and sets.es[k] == sets.es[i]]
                    deepest = max(below, key=lambda k: len(chain(k)))
                    self.assertEqual(sets.desc_branch[i], deepest)
                    if i in branching:
                        self.assertEqual(sets.desc_branch[i], i)
                    else:
                        self.assertIn(i, chain(sets.desc_branch[i]))
                        self.assertIn(sets.anc_branch[sets.desc_branch[i]], chain(i)[1:])

    def test_chain_with_tip_weld(self):
        """A singly constrained chain has no branching links besides the root and tip"""
        tree = gen_chain(6)
        cons = attach_constraint(ConstraintSet.empty(tree), 6, 'weld')
        sets = compute_index_sets(tree, cons)
        self.assertEqual(sets.branching, (0, 7))
        self.assertEqual(sets.supporting, tuple(range(1, 7)))
        self.assertTrue(sets.is_effector(7))
        self.assertFalse(sets.is_effector(6))


class TestGenerators(unittest.TestCase):
    """Test cases for the benchmark mechanism families"""

    def test_stem_branches(self):
        """Stem and branches have the documented sizes and attachment points"""
        tree, cons = gen_stem_branches(10, 2, branch_len=3)
        self.assertEqual(tree.n_b, 10 + 4 * 3)
        self.assertEqual(tree.joints[1].kind, 'free_flyer')
        self.assertEqual(cons.m_b, 4)
        self.assertEqual(cons.m, 24)
        first_links = [11, 14, 17, 20]
        self.assertEqual([tree.parent[i] for i in first_links], [1, 4, 7, 10])
        validate(tree)

    def test_stem_branches_rejects_bad_sizes(self):
        """Too few branches or too short a stem is an error"""
        with self.assertRaises(InvalidGeometry):
            gen_stem_branches(5, 0)
        with self.assertRaises(InvalidGeometry):
            gen_stem_branches(2, 3)

    def test_chain_md(self):
        """k² links with a weld every k links"""
        tree, cons = gen_chain_md(4)
        self.assertEqual(tree.n_b, 16)
        self.assertEqual([e.parent for e in cons.effectors], [4, 8, 12, 16])

    def test_chain_all_constrained(self):
        """Every link carries a weld"""
        tree, cons = gen_chain_all_constrained(5)
        self.assertEqual([e.parent for e in cons.effectors], [1, 2, 3, 4, 5])
        self.assertEqual(cons.m, 30)

    def test_humanoid(self):
        """Floating humanoid with 12D feet"""
        tree, cons = gen_humanoid()
        self.assertEqual(tree.n_b, 50)
        self.assertEqual(tree.n, 55)
        self.assertEqual(cons.m, 24)
        self.assertEqual(len({e.parent for e in cons.effectors}), 2)
        validate(tree)

    def test_humanoid_contact_variants(self):
        """Feet and hands take welds, point contacts or nothing"""
        _, cons = gen_humanoid(feet='weld6')
        self.assertEqual((cons.m_b, cons.m), (2, 12))
        tree, cons = gen_humanoid(feet='weld6', hands='weld6')
        self.assertEqual((cons.m_b, cons.m), (4, 24))
        self.assertEqual([tree.names[e.parent] for e in cons.effectors[2:]], ['left_arm_wrist_roll', 'right_arm_wrist_roll'])
        _, cons = gen_humanoid(feet='none', hands='fingertips')
        self.assertEqual((cons.m_b, cons.m), (6, 18))
        with self.assertRaises(InvalidGeometry):
            gen_humanoid(feet='skates')
        with self.assertRaises(InvalidGeometry):
            gen_humanoid(hands='gloves')

    def test_hand(self):
        """Fixed-base 24-DoF hand with five fingertip contacts"""
        tree, cons = gen_hand()
        self.assertEqual(tree.n, 24)
        self.assertEqual(tree.joints[1].kind, 'revolute')
        self.assertEqual((cons.m_b, cons.m), (5, 15))
        self.assertEqual(len(tree.children[2]), 5)
        validate(tree)

    def test_random_model_is_seeded(self):
        """The same seed gives the same model"""
        a = dump_model(*random_model(np.random.default_rng(5), 8, 3))
        b = dump_model(*random_model(np.random.default_rng(5), 8, 3))
        self.assertEqual(a, b)


class TestModelFormat(unittest.TestCase):
    """Test cases for the JSON model format"""

    def test_round_trip(self):
        """Dump then load reproduces the model exactly"""
        tree, cons = random_model(np.random.default_rng(9), 6, 3)
        text = dump_model(tree, cons)
        tree2, cons2 = load_model(text)
        self.assertEqual(dump_model(tree2, cons2), text)
        self.assertEqual(tree2.parent, tree.parent)
        assert_array_equal(cons2.effectors[0].K, cons.effectors[0].K)

    def test_file_round_trip(self):
        """Model files load back"""
        tree, cons = gen_example_tree()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'example.json')
            save_model_file(path, tree, cons)
            tree2, cons2 = load_model_file(path)
        self.assertEqual(tree2.n_b, 6)
        self.assertEqual(cons2.m, 18)

    def test_rejects_bad_documents(self):
        """Invalid JSON, wrong format tags and missing fields raise ModelError"""
        with self.assertRaises(ModelError):
            load_model('{not json')
        with self.assertRaises(ModelError):
            load_model('{"format": "other", "version": 1, "links": []}')
        with self.assertRaises(ModelError):
            load_model('{"format": "delassus-model", "version": 1, "links": [{"parent": 0}]}')


if __name__ == '__main__':
    unittest.main()
