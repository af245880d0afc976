import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .exceptions import DimensionError
from .problem import OcpProblem


class ProblemValidatorTests(SimpleTestCase):

    def test_valid_problem(self):
        try:
            OcpProblem(H=np.eye(2), g=np.zeros(2), G=np.ones((3, 2)), h=np.zeros(3))
        except ValidationError:
            self.fail("OcpProblem raised ValidationError for consistent data")

    def test_dimension_mismatches(self):
        """Test each inconsistent shape raises a dimension error"""
        cases = [
            dict(H=np.eye(3), g=np.zeros(2), G=np.ones((1, 2)), h=[0.0]),
            dict(H=np.eye(2), g=np.zeros(2), G=np.ones((1, 3)), h=[0.0]),
            dict(H=np.eye(2), g=np.zeros(2), G=np.ones((2, 2)), h=[0.0]),
            dict(H=np.eye(2), g=np.zeros(2), G=np.ones((1, 2)), h=[0.0], lb=np.zeros(3)),
        ]
        for kwargs in cases:
            with self.assertRaises(DimensionError):
                OcpProblem(**kwargs)

    def test_rejects_asymmetric_cost(self):
        with self.assertRaises(ValidationError):
            OcpProblem(H=[[1.0, 2.0], [0.0, 1.0]], g=np.zeros(2), G=np.zeros((0, 2)), h=[])

    def test_rejects_indefinite_cost(self):
        with self.assertRaises(ValidationError):
            OcpProblem(H=np.diag([1.0, -1.0]), g=np.zeros(2), G=np.zeros((0, 2)), h=[])

    def test_accepts_semidefinite_cost(self):
        problem = OcpProblem(H=np.diag([1.0, 0.0]), g=np.zeros(2), G=np.zeros((0, 2)), h=[])
        self.assertEqual(problem.n, 2)
        self.assertEqual(problem.m, 0)

    def test_rejects_crossed_box(self):
        with self.assertRaises(ValidationError):
            OcpProblem(H=np.eye(1), g=[0.0], G=np.zeros((0, 1)), h=[], lb=[1.0], ub=[0.0])
