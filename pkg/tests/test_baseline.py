"""
Test cases for kinematics, the joint-space inertia matrix and the reference Delassus algorithms
"""
import unittest
import numpy as np
from numpy.testing import assert_allclose
from src.models.generators import gen_chain, gen_example_tree, random_model
from src.models.kinematic_tree import (
    AXES, ConstraintSet, JointModel, TreeBuilder, attach_constraint, neutral_configuration,
    random_configuration
)
from src.models.spatial import SpatialInertia
from src.tools.baseline import (
    constraint_jacobian, crba_jsim, forward_kinematics, link_transforms, ltl_delassus, ltl_factor,
    naive_delassus, relative_error
)
from src.utils.errors import SingularJsim


def degenerate_link():
    """One revolute link whose inertia about the joint axis is zero"""
    builder = TreeBuilder()
    builder.add_link(0, JointModel.revolute(AXES['z']), inertia=SpatialInertia(1.0, np.zeros(3), np.zeros((3, 3))))
    tree = builder.build()
    return tree, attach_constraint(ConstraintSet.empty(tree), 1, 'weld')


class TestKinematics(unittest.TestCase):
    """Test cases for link and world transforms"""

    def test_neutral_chain_positions(self):
        """Neutral unit-rod chain links sit one unit apart along x"""
        tree = gen_chain(4)
        world = forward_kinematics(tree, neutral_configuration(tree))
        for i in tree.links:
            assert_allclose(world[i].translation, [i - 1.0, 0.0, 0.0], atol=1e-12)
            assert_allclose(world[i].rotation, np.eye(3), atol=1e-12)

    def test_link_transforms_padding(self):
        """Entry 0 is the world placeholder"""
        tree = gen_chain(2)
        transforms = link_transforms(tree, neutral_configuration(tree))
        self.assertIsNone(transforms[0])
        self.assertEqual(len(transforms), 3)


class TestJsim(unittest.TestCase):
    """Test cases for CRBA and the LTL factorization"""

    def setUp(self):
        self.rng = np.random.default_rng(21)

    def test_jsim_symmetric_positive_definite(self):
        """M is symmetric positive definite on random models"""
        for _ in range(10):
            tree, _ = random_model(self.rng, 8, 0)
            M = crba_jsim(tree, random_configuration(tree, self.rng)).M
            assert_allclose(M, M.T, atol=1e-12)
            self.assertGreater(np.linalg.eigvalsh(M).min(), 0.0)

    def test_kinetic_energy_matches_jacobians(self):
        """qdotᵀ M qdot equals the sum of link kinetic energies"""
        tree, _ = random_model(self.rng, 6, 0)
        q = random_configuration(tree, self.rng)
        qdot = self.rng.normal(size=tree.n)
        X = link_transforms(tree, q)
        velocity = [np.zeros(6)]
        energy = 0.0
        for i in tree.links:
            inherited = np.zeros(6) if tree.parent[i] == 0 else X[i].apply_motion(velocity[tree.parent[i]])
            velocity.append(inherited + tree.motion_subspace(i) @ qdot[tree.v_index[i]])
            energy += velocity[i] @ tree.inertia_matrix(i) @ velocity[i]
        M = crba_jsim(tree, q).M
        self.assertAlmostEqual(qdot @ M @ qdot, energy, places=9)

    def test_ltl_factor(self):
        """LᵀL = M and L keeps M's structural zeros"""
        tree, _ = gen_example_tree()
        jsim = crba_jsim(tree, random_configuration(tree, self.rng))
        L = ltl_factor(jsim)
        assert_allclose(L.T @ L, jsim.M, atol=1e-10)
        for k in range(jsim.n):
            chain = set(jsim.chain(k))
            for i in range(k):
                if i not in chain:
                    self.assertEqual(L[k, i], 0.0)
                    self.assertEqual(jsim.M[k, i], 0.0)

    def test_dof_chain(self):
        """DoF ancestry follows links, multi-DoF joints chain internally"""
        tree, _ = gen_example_tree()
        jsim = crba_jsim(tree, neutral_configuration(tree))
        # Link 6 hangs from link 2, whose only DoF is 6
        self.assertEqual(jsim.chain(tree.v_index[6].start), [10, 6, 5, 4, 3, 2, 1, 0])


class TestDelassus(unittest.TestCase):
    """Test cases for the dense and sparse reference algorithms"""

    def setUp(self):
        self.rng = np.random.default_rng(5)

    def test_free_body(self):
        """A welded free body has Delassus equal to its inverse inertia"""
        tree = gen_chain(1, base='floating')
        cons = attach_constraint(ConstraintSet.empty(tree), 1, 'weld')
        expected = np.linalg.inv(tree.inertia_matrix(1))
        q = random_configuration(tree, self.rng)
        assert_allclose(naive_delassus(tree, cons, q), expected, atol=1e-10)
        assert_allclose(ltl_delassus(tree, cons, q), expected, atol=1e-10)

    def test_naive_matches_dense_formula(self):
        """naive equals J M⁻¹ Jᵀ"""
        tree, cons = random_model(self.rng, 7, 3)
        q = random_configuration(tree, self.rng)
        J = constraint_jacobian(tree, cons, q)
        M = crba_jsim(tree, q).M
        assert_allclose(naive_delassus(tree, cons, q), J @ np.linalg.solve(M, J.T), atol=1e-9)

    def test_ltl_matches_naive(self):
        """The sparse factorization gives the same matrix"""
        for _ in range(10):
            tree, cons = random_model(self.rng, int(self.rng.integers(3, 15)), int(self.rng.integers(1, 5)))
            q = random_configuration(tree, self.rng)
            expected = naive_delassus(tree, cons, q)
            self.assertLess(relative_error(ltl_delassus(tree, cons, q), expected), 1e-8)

    def test_floating_base_frame_invariance(self):
        """The base pose does not change the Delassus matrix"""
        tree = gen_chain(5, base='floating')
        cons = attach_constraint(attach_constraint(ConstraintSet.empty(tree), 5, 'weld'), 3, 'connect',
                                 point=[0.2, 0.1, 0.0])
        q = random_configuration(tree, self.rng)
        moved = q.copy()
        moved[:7] = random_configuration(tree, self.rng)[:7]
        assert_allclose(naive_delassus(tree, cons, moved), naive_delassus(tree, cons, q), atol=1e-10)

    def test_no_constraints(self):
        """Without constraints the result is 0×0"""
        tree = gen_chain(3)
        q = neutral_configuration(tree)
        self.assertEqual(naive_delassus(tree, ConstraintSet.empty(tree), q).shape, (0, 0))
        self.assertEqual(ltl_delassus(tree, ConstraintSet.empty(tree), q).shape, (0, 0))

    def test_singular_jsim(self):
        """A zero joint-space inertia is a numerical failure"""
        tree, cons = degenerate_link()
        q = neutral_configuration(tree)
        with self.assertRaises(SingularJsim):
            naive_delassus(tree, cons, q)
        with self.assertRaises(SingularJsim):
            ltl_delassus(tree, cons, q)

    def test_relative_error(self):
        """Relative error is scaled by the reference magnitude"""
        self.assertEqual(relative_error(np.zeros((0, 0)), np.zeros((0, 0))), 0.0)
        self.assertAlmostEqual(relative_error(np.array([[2.0, 0.0]]), np.array([[4.0, 0.0]])), 0.5)


if __name__ == '__main__':
    unittest.main()
