from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .scenario import MPC_C, ScenarioConfig
from .validators import validate_choice, validate_cycle_samples, validate_scale, validate_tick


class SimValidatorTests(SimpleTestCase):

    def test_validate_tick(self):
        validate_tick(0.1)
        for value in [0.0, -0.1, None, float('inf')]:
            with self.assertRaises(ValidationError):
                validate_tick(value)

    def test_validate_scale(self):
        validate_scale(0.6)
        for value in [0.0, -1.0, None]:
            with self.assertRaises(ValidationError):
                validate_scale(value)

    def test_validate_cycle_samples(self):
        """Test cycles must start at zero, move forward and stay non-negative"""
        validate_cycle_samples([0.0, 1.0, 2.0], [0.0, 3.0, 0.0])
        invalid = [
            ([], []),
            ([0.0, 1.0], [0.0]),
            ([0.5, 1.0], [0.0, 1.0]),
            ([0.0, 0.0], [0.0, 1.0]),
            ([0.0, 1.0], [0.0, -0.1]),
            ([0.0, float('nan')], [0.0, 1.0]),
        ]
        for t, v in invalid:
            with self.subTest(t=t, v=v), self.assertRaises(ValidationError):
                validate_cycle_samples(t, v)

    def test_validate_choice(self):
        validate_choice('controller', 'wie', ('wie', 'idm'))
        with self.assertRaises(ValidationError) as raised:
            validate_choice('controller', 'acc', ('wie', 'idm'))
        self.assertIn('controller', raised.exception.message_dict)


class ScenarioConfigTests(SimpleTestCase):

    def test_defaults(self):
        """Test the default ring experiment"""
        scenario = ScenarioConfig()
        self.assertEqual(scenario.n_vehicles, 74)
        self.assertEqual(scenario.ego_id, 37)
        self.assertTrue(scenario.discard_first_lap)
        self.assertFalse(scenario.is_cycle)
        self.assertEqual(scenario.label, 'WIE')

    def test_names_are_case_insensitive(self):
        scenario = ScenarioConfig(kind='UDDS', controller='MPC-C', n_vehicles=2, n_cav_string=0, ego_index=1)
        self.assertEqual(scenario.kind, 'udds')
        self.assertEqual(scenario.controller, MPC_C)
        self.assertTrue(scenario.is_cycle)
        self.assertFalse(scenario.discard_first_lap)

    def test_invalid_scenarios(self):
        """Test out-of-range sizes and unknown names"""
        invalid = [
            dict(laps=0),
            dict(n_vehicles=1, ego_index=0, n_cav_string=0),
            dict(ego_index=74),
            dict(n_cav_string=73),
            dict(n_cav_string=-1),
            dict(tick=0.0),
            dict(seed=-1),
            dict(kind='highway'),
            dict(controller='acc'),
        ]
        for values in invalid:
            with self.subTest(**values), self.assertRaises(ValidationError):
                ScenarioConfig(**values)

    def test_with_overrides_revalidates(self):
        scenario = ScenarioConfig().with_overrides(laps=2, seed=4)
        self.assertEqual((scenario.laps, scenario.seed), (2, 4))
        with self.assertRaises(ValidationError):
            ScenarioConfig().with_overrides(laps=0)
