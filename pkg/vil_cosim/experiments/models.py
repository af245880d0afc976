from django.core.validators import MinValueValidator
from django.db import models
from django.utils import timezone

from sim.runner import LOOPBACK, NETWORKED
from sim.scenario import CONTROLLER_LABELS, SCENARIOS

from .compare import SUMMARY_FIELDS, RunSummary


class ExperimentRun(models.Model):
    PENDING = 'pending'
    RUNNING = 'running'
    COMPLETED = 'completed'
    FAILED = 'failed'
    STATUS_CHOICES = [
        (PENDING, 'Pending'),
        (RUNNING, 'Running'),
        (COMPLETED, 'Completed'),
        (FAILED, 'Failed'),
    ]
    SCENARIO_CHOICES = [(kind, kind.upper()) for kind in SCENARIOS]
    CONTROLLER_CHOICES = list(CONTROLLER_LABELS.items())
    MODE_CHOICES = [(LOOPBACK, 'Loopback'), (NETWORKED, 'Networked')]

    scenario = models.CharField(max_length=16, choices=SCENARIO_CHOICES)
    controller = models.CharField(max_length=8, choices=CONTROLLER_CHOICES)
    seed = models.PositiveIntegerField(default=0)
    mode = models.CharField(max_length=16, choices=MODE_CHOICES, default=LOOPBACK)
    laps = models.PositiveIntegerField(validators=[MinValueValidator(1)])
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default=PENDING)
    out_dir = models.CharField(max_length=500, blank=True)
    started_at = models.DateTimeField(null=True, blank=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    travel_time = models.FloatField(null=True, blank=True, help_text="Seconds over the kept laps")
    avg_headway = models.FloatField(null=True, blank=True, help_text="Mean time gap in seconds")
    mean_gap = models.FloatField(null=True, blank=True, help_text="Metres, bumper to bumper")
    max_gap = models.FloatField(null=True, blank=True)
    net_energy = models.FloatField(null=True, blank=True, help_text="Tractive energy proxy in joules")
    fuel_litres = models.FloatField(null=True, blank=True)
    accel_sq_integral = models.FloatField(null=True, blank=True)
    upstream_energy = models.FloatField(null=True, blank=True)
    error = models.TextField(blank=True)

    class Meta:
        ordering = ['-started_at', '-id']
        indexes = [
            models.Index(fields=['scenario', 'controller'], name='run_scenario_controller_idx'),
            models.Index(fields=['status'], name='run_status_idx'),
        ]

    def start(self):
        self.status = self.RUNNING
        self.started_at = timezone.now()
        self.save()

    def complete(self, report):
        """Store a MetricsReport and its laps."""
        for name in SUMMARY_FIELDS:
            setattr(self, name, getattr(report, name))
        self.status = self.COMPLETED
        self.finished_at = timezone.now()
        self.save()
        self.lap_records.all().delete()
        LapRecord.objects.bulk_create([
            LapRecord(run=self, lap=lap.lap, discarded=lap.discarded, travel_time=lap.travel_time,
                      avg_headway=lap.avg_headway, mean_gap=lap.mean_gap, max_gap=lap.max_gap,
                      energy=lap.energy)
            for lap in report.laps
        ])

    def summary(self):
        return RunSummary(scenario=self.scenario, controller=self.get_controller_display(),
                          **{name: getattr(self, name) for name in SUMMARY_FIELDS})

    def fail(self, error):
        self.status = self.FAILED
        self.error = str(error)
        self.finished_at = timezone.now()
        self.save()

    def __str__(self):
        return f"{self.scenario}/{self.get_controller_display()} seed {self.seed} ({self.status})"


class LapRecord(models.Model):
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='lap_records')
    lap = models.PositiveIntegerField()
    discarded = models.BooleanField(default=False)
    travel_time = models.FloatField()
    avg_headway = models.FloatField(null=True, blank=True)
    mean_gap = models.FloatField()
    max_gap = models.FloatField()
    energy = models.FloatField()

    class Meta:
        ordering = ['run', 'lap']
        constraints = [
            models.UniqueConstraint(fields=['run', 'lap'], name='unique_lap_per_run'),
        ]

    def __str__(self):
        return f"lap {self.lap} of run {self.run_id}"
