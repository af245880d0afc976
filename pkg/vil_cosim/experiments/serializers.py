from rest_framework import serializers

from .models import ExperimentRun, LapRecord


class LapRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = LapRecord
        fields = ['lap', 'discarded', 'travel_time', 'avg_headway', 'mean_gap', 'max_gap', 'energy']


class ExperimentRunSerializer(serializers.ModelSerializer):
    controller_label = serializers.CharField(source='get_controller_display', read_only=True)

    class Meta:
        model = ExperimentRun
        fields = [
            'id', 'scenario', 'controller', 'controller_label', 'seed', 'mode', 'laps', 'status',
            'started_at', 'finished_at', 'travel_time', 'avg_headway', 'mean_gap', 'max_gap',
            'net_energy', 'accel_sq_integral', 'upstream_energy',
        ]
        read_only_fields = fields


class ExperimentRunDetailSerializer(ExperimentRunSerializer):
    lap_records = LapRecordSerializer(many=True, read_only=True)

    class Meta(ExperimentRunSerializer.Meta):
        fields = ExperimentRunSerializer.Meta.fields + ['out_dir', 'error', 'lap_records']
        read_only_fields = fields
