from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .params import MpcParams
from .validators import validate_preview_length


class MpcValidatorTests(SimpleTestCase):

    def test_default_profiles_valid(self):
        try:
            MpcParams.profile('mpc-u')
            MpcParams.profile('mpc-c')
        except ValidationError:
            self.fail("MpcParams raised ValidationError for a shipped profile")

    def test_horizon_and_step(self):
        """Test an empty horizon or a non-positive step is rejected"""
        with self.assertRaises(ValidationError):
            MpcParams(N=0)
        with self.assertRaises(ValidationError):
            MpcParams(dt_h=0.0)

    def test_input_floor_must_brake(self):
        with self.assertRaises(ValidationError):
            MpcParams(u_min=0.5)

    def test_slack_penalties_positive(self):
        with self.assertRaises(ValidationError):
            MpcParams(rho=(1e6, 0.0, 5e5, 1e6))

    def test_confidence_ordering(self):
        """Test confidence levels outside 0.5 <= lo <= hi < 1 are rejected"""
        for lo, hi in [(0.4, 0.9), (0.9, 0.8), (0.5, 1.0)]:
            with self.assertRaises(ValidationError):
                MpcParams(alpha_lo=lo, alpha_hi=hi)

    def test_preview_length(self):
        validate_preview_length('s_r', [0.0] * 17, 17)
        with self.assertRaises(ValidationError) as ctx:
            validate_preview_length('s_r', [0.0] * 16, 17)
        self.assertIn('s_r', ctx.exception.message_dict)
