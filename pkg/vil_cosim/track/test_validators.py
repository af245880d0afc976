from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .geometry import SpeedZone
from .validators import (
    validate_comfortable_decel,
    validate_speed_pair,
    validate_speed_zones,
)


class TrackValidatorTests(SimpleTestCase):

    def test_validate_comfortable_decel(self):
        """Test only negative decelerations pass"""
        validate_comfortable_decel(-2.0)
        for value in [0.0, 0.5, float('nan')]:
            with self.assertRaises(ValidationError):
                validate_comfortable_decel(value)

    def test_validate_speed_zones_valid(self):
        zones = [SpeedZone(0.0, 10.0, 5.0), SpeedZone(10.0, 30.0, 3.0)]
        try:
            validate_speed_zones(zones)
        except ValidationError:
            self.fail("validate_speed_zones raised ValidationError for a valid tiling")

    def test_validate_speed_zones_gap(self):
        """Test zones leaving a hole are rejected"""
        zones = [SpeedZone(0.0, 10.0, 5.0), SpeedZone(11.0, 30.0, 3.0)]
        with self.assertRaises(ValidationError):
            validate_speed_zones(zones)

    def test_validate_speed_zones_invalid(self):
        """Test empty, offset, inverted and zero-limit zones"""
        invalid = [
            [],
            [SpeedZone(1.0, 10.0, 5.0)],
            [SpeedZone(0.0, 0.0, 5.0)],
            [SpeedZone(0.0, 10.0, 0.0)],
        ]
        for zones in invalid:
            with self.assertRaises(ValidationError):
                validate_speed_zones(zones)

    def test_validate_speed_pair(self):
        validate_speed_pair(5.0, 5.0)
        with self.assertRaises(ValidationError):
            validate_speed_pair(4.0, 5.0)
