import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "scenario",
                    models.CharField(
                        choices=[("microsim", "MICROSIM"), ("us06", "US06"), ("udds", "UDDS")],
                        max_length=16,
                    ),
                ),
                (
                    "controller",
                    models.CharField(
                        choices=[("wie", "WIE"), ("idm", "IDM"), ("mpc-u", "MPC-U"), ("mpc-c", "MPC-C")],
                        max_length=8,
                    ),
                ),
                ("seed", models.PositiveIntegerField(default=0)),
                (
                    "mode",
                    models.CharField(
                        choices=[("loopback", "Loopback"), ("networked", "Networked")],
                        default="loopback",
                        max_length=16,
                    ),
                ),
                (
                    "laps",
                    models.PositiveIntegerField(
                        validators=[django.core.validators.MinValueValidator(1)]
                    ),
                ),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("pending", "Pending"),
                            ("running", "Running"),
                            ("completed", "Completed"),
                            ("failed", "Failed"),
                        ],
                        default="pending",
                        max_length=16,
                    ),
                ),
                ("out_dir", models.CharField(blank=True, max_length=500)),
                ("started_at", models.DateTimeField(blank=True, null=True)),
                ("finished_at", models.DateTimeField(blank=True, null=True)),
                (
                    "travel_time",
                    models.FloatField(blank=True, help_text="Seconds over the kept laps", null=True),
                ),
                (
                    "avg_headway",
                    models.FloatField(blank=True, help_text="Mean time gap in seconds", null=True),
                ),
                (
                    "mean_gap",
                    models.FloatField(blank=True, help_text="Metres, bumper to bumper", null=True),
                ),
                ("max_gap", models.FloatField(blank=True, null=True)),
                (
                    "net_energy",
                    models.FloatField(blank=True, help_text="Tractive energy proxy in joules", null=True),
                ),
                ("fuel_litres", models.FloatField(blank=True, null=True)),
                ("accel_sq_integral", models.FloatField(blank=True, null=True)),
                ("upstream_energy", models.FloatField(blank=True, null=True)),
                ("error", models.TextField(blank=True)),
            ],
            options={
                "ordering": ["-started_at", "-id"],
                "indexes": [
                    models.Index(fields=["scenario", "controller"], name="run_scenario_controller_idx"),
                    models.Index(fields=["status"], name="run_status_idx"),
                ],
            },
        ),
        migrations.CreateModel(
            name="LapRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("lap", models.PositiveIntegerField()),
                ("discarded", models.BooleanField(default=False)),
                ("travel_time", models.FloatField()),
                ("avg_headway", models.FloatField(blank=True, null=True)),
                ("mean_gap", models.FloatField()),
                ("max_gap", models.FloatField()),
                ("energy", models.FloatField()),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="lap_records",
                        to="experiments.experimentrun",
                    ),
                ),
            ],
            options={
                "ordering": ["run", "lap"],
                "constraints": [
                    models.UniqueConstraint(fields=("run", "lap"), name="unique_lap_per_run"),
                ],
            },
        ),
    ]
