from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .exceptions import CollisionError
from .params import IdmParams, Wie99Params
from .validators import validate_gap


class DriverValidatorTests(SimpleTestCase):

    def test_default_parameter_sets_valid(self):
        try:
            Wie99Params()
            IdmParams()
        except ValidationError:
            self.fail("Default driver parameters raised ValidationError")

    def test_wie99_invalid(self):
        """Test out-of-range Wiedemann parameters"""
        invalid = [
            {'cc0': 0.0},
            {'cc1': -1.0},
            {'cc8': 1.0, 'cc9': 1.5},
            {'cc9': 0.0},
            {'driver_random': 1.5},
            {'driver_random': -0.1},
        ]
        for overrides in invalid:
            with self.assertRaises(ValidationError, msg=str(overrides)):
                Wie99Params(**overrides)

    def test_idm_invalid(self):
        for overrides in [{'a0': 0.0}, {'b0': -1.0}, {'T': 0.0}, {'s0': 0.0},
                          {'v0': 0.0}, {'delta': 0.5}]:
            with self.assertRaises(ValidationError, msg=str(overrides)):
                IdmParams(**overrides)

    def test_validate_gap(self):
        validate_gap(0.1)
        with self.assertRaises(CollisionError):
            validate_gap(0.0)
        with self.assertRaises(ValidationError):
            validate_gap(float('inf'))

    def test_collision_error_is_validation_error(self):
        error = CollisionError(-0.5)
        self.assertIsInstance(error, ValidationError)
        self.assertEqual(error.gap, -0.5)
        self.assertEqual(error.code, 'collision')
