import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from .admm import AdmmSettings, AdmmSolver, solve
from .problem import OcpProblem, QpStatus, kkt_residuals


def interior_point_reference(H, g, G, h, iterations=200):
    """
    Primal-dual path-following method for min 1/2 x'Hx + g'x, Gx <= h.
    Independent of the ADMM code; used as the reference answer.
    """
    n, m = H.shape[0], G.shape[0]
    x = np.zeros(n)
    s = np.maximum(h - G @ x, 1.0)
    lam = np.ones(m)
    for _ in range(iterations):
        r_dual = H @ x + g + G.T @ lam
        r_prim = G @ x + s - h
        mu = s @ lam / m
        if max(np.abs(r_dual).max(), np.abs(r_prim).max()) < 1e-10 and mu < 1e-12:
            break

        def direction(sigma_mu, corrector):
            w = lam / s
            rhs_c = -s * lam + sigma_mu - corrector
            K = H + G.T @ (w[:, None] * G)
            rhs = -r_dual - G.T @ (rhs_c / s + w * r_prim)
            dx = np.linalg.solve(K, rhs)
            ds = -r_prim - G @ dx
            dlam = (rhs_c - lam * ds) / s
            return dx, ds, dlam

        def step(v, dv):
            negative = dv < 0
            if not np.any(negative):
                return 1.0
            return min(1.0, float(np.min(-v[negative] / dv[negative])))

        dx_a, ds_a, dlam_a = direction(0.0, 0.0)
        alpha_a = min(step(s, ds_a), step(lam, dlam_a))
        mu_aff = (s + alpha_a * ds_a) @ (lam + alpha_a * dlam_a) / m
        sigma = (mu_aff / mu) ** 3
        dx, ds, dlam = direction(sigma * mu, ds_a * dlam_a)
        alpha = min(0.99 * min(step(s, ds), step(lam, dlam)), 1.0)
        x = x + alpha * dx
        s = s + alpha * ds
        lam = lam + alpha * dlam
    return x


def random_problem(rng, n, m):
    M = rng.standard_normal((n, n))
    H = M.T @ M + np.eye(n)
    g = rng.standard_normal(n) * 5.0
    G = rng.standard_normal((m, n))
    x0 = rng.standard_normal(n)
    h = G @ x0 + rng.uniform(0.1, 1.0, m)
    return OcpProblem(H=H, g=g, G=G, h=h), x0


class SmallProblemTests(SimpleTestCase):

    def test_halfplane(self):
        """Test min x1^2 + x2^2 s.t. x1 + x2 >= 2"""
        problem = OcpProblem(H=2 * np.eye(2), g=np.zeros(2), G=[[-1.0, -1.0]], h=[-2.0])
        result = solve(problem)
        self.assertEqual(result.status, QpStatus.OPTIMAL)
        np.testing.assert_allclose(result.x, [1.0, 1.0], atol=1e-6)
        self.assertAlmostEqual(result.objective, 2.0, places=5)
        self.assertAlmostEqual(result.lam[0], 2.0, places=5)
        self.assertLessEqual(result.kkt_residual, 1e-6)

    def test_unconstrained(self):
        """Test min (x - 3)^2 without constraints"""
        problem = OcpProblem(H=[[2.0]], g=[-6.0], G=np.zeros((0, 1)), h=[])
        result = solve(problem)
        self.assertEqual(result.status, QpStatus.OPTIMAL)
        self.assertAlmostEqual(result.x[0], 3.0, places=6)

    def test_box_bounds(self):
        """Test an active upper box bound reports its multiplier"""
        problem = OcpProblem(H=[[2.0]], g=[-6.0], G=np.zeros((0, 1)), h=[], lb=[0.0], ub=[1.0])
        result = solve(problem)
        self.assertEqual(result.status, QpStatus.OPTIMAL)
        self.assertAlmostEqual(result.x[0], 1.0, places=6)
        self.assertAlmostEqual(result.lam_ub[0], 4.0, places=5)
        self.assertAlmostEqual(result.lam_lb[0], 0.0, places=6)

    def test_linear_slack_variable(self):
        """Test a heavily penalised slack stays at zero when the hard constraint can hold"""
        H = np.diag([2.0, 0.0])
        g = np.array([0.0, 1e6])
        G = np.array([[-1.0, -1.0]])
        h = np.array([-1.0])
        problem = OcpProblem(H=H, g=g, G=G, h=h, lb=[-np.inf, 0.0])
        result = solve(problem)
        self.assertEqual(result.status, QpStatus.OPTIMAL)
        np.testing.assert_allclose(result.x, [1.0, 0.0], atol=1e-6)

    def test_infeasible(self):
        """Test contradictory constraints are reported infeasible"""
        problem = OcpProblem(H=[[1.0]], g=[0.0], G=[[1.0], [-1.0]], h=[-1.0, -1.0])
        result = solve(problem)
        self.assertEqual(result.status, QpStatus.INFEASIBLE)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        problem, _ = random_problem(rng, 8, 20)
        first = solve(problem)
        second = solve(problem)
        np.testing.assert_array_equal(first.x, second.x)

    def test_warm_start_reuses_answer(self):
        """Test a repeated solve on the same instance starts from the previous answer"""
        rng = np.random.default_rng(9)
        problem, _ = random_problem(rng, 10, 30)
        solver = AdmmSolver()
        cold = solver.solve(problem)
        warm = solver.solve(problem)
        self.assertEqual(warm.status, QpStatus.OPTIMAL)
        self.assertLessEqual(warm.iterations, cold.iterations)
        np.testing.assert_allclose(warm.x, cold.x, atol=1e-6)

    def test_failure_dumps_matrices(self):
        """Test a non-optimal solve writes the problem data when a dump directory is set"""
        rng = np.random.default_rng(2)
        problem, _ = random_problem(rng, 6, 12)
        with tempfile.TemporaryDirectory() as tmp:
            settings = AdmmSettings(max_iter=1, polish=False, dump_dir=tmp)
            result = AdmmSolver(settings).solve(problem)
            self.assertEqual(result.status, QpStatus.MAX_ITER)
            dumps = list(Path(tmp).iterdir())
            self.assertEqual(len(dumps), 1)
            H = np.loadtxt(dumps[0] / 'H.txt')
            np.testing.assert_allclose(H, problem.H)
            self.assertTrue((dumps[0] / 'h.txt').exists())


class RandomProblemTests(SimpleTestCase):

    def test_matches_interior_point_reference(self):
        """Test 500 random strictly convex QPs against the interior-point reference"""
        rng = np.random.default_rng(2024)
        for trial in range(500):
            n = int(rng.integers(2, 26))
            m = int(rng.integers(1, 61))
            problem, _ = random_problem(rng, n, m)
            result = solve(problem)
            reference = interior_point_reference(problem.H, problem.g, problem.G, problem.h)
            self.assertEqual(result.status, QpStatus.OPTIMAL, msg=f"trial {trial}")
            self.assertLessEqual(result.kkt_residual, 1e-6, msg=f"trial {trial}")
            self.assertLessEqual(np.abs(result.x - reference).max(), 1e-5, msg=f"trial {trial}")

    def test_objective_below_feasible_points(self):
        """Test the optimum is no worse than sampled feasible points"""
        rng = np.random.default_rng(77)
        for _ in range(40):
            problem, x0 = random_problem(rng, 6, 15)
            result = solve(problem)
            candidates = [x0] + [x0 + 0.05 * rng.standard_normal(6) for _ in range(20)]
            for point in candidates:
                if np.all(problem.G @ point <= problem.h):
                    self.assertLessEqual(result.objective, problem.objective(point) + 1e-9)

    def test_kkt_residual_definition(self):
        problem = OcpProblem(H=2 * np.eye(2), g=np.zeros(2), G=[[-1.0, -1.0]], h=[-2.0])
        primal, dual, comp = kkt_residuals(problem, np.array([1.0, 1.0]), np.array([2.0]),
                                           np.zeros(2), np.zeros(2))
        self.assertEqual((primal, dual, comp), (0.0, 0.0, 0.0))
        primal, _, _ = kkt_residuals(problem, np.zeros(2), np.zeros(1), np.zeros(2), np.zeros(2))
        self.assertEqual(primal, 2.0)
