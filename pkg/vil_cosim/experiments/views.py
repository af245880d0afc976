from django.core.exceptions import ValidationError as DjangoValidationError
from drf_yasg import openapi
from drf_yasg.utils import swagger_auto_schema
from rest_framework import generics
from rest_framework.exceptions import ValidationError as DRFValidationError
from rest_framework.response import Response
from rest_framework.views import APIView

from .compare import compare
from .filters import ExperimentRunFilter
from .models import ExperimentRun
from .serializers import ExperimentRunDetailSerializer, ExperimentRunSerializer


class ExperimentRunListView(generics.ListAPIView):
    serializer_class = ExperimentRunSerializer
    filterset_class = ExperimentRunFilter
    queryset = ExperimentRun.objects.all()

    @swagger_auto_schema(operation_description="List experiment runs, filterable by scenario, controller, status and seed")
    def get(self, request, *args, **kwargs):
        return super().get(request, *args, **kwargs)


class ExperimentRunDetailView(generics.RetrieveAPIView):
    serializer_class = ExperimentRunDetailSerializer
    queryset = ExperimentRun.objects.prefetch_related('lap_records')


class ComparisonView(APIView):
    """Latest completed run of each controller in a scenario, compared against WIE."""

    @swagger_auto_schema(
        manual_parameters=[
            openapi.Parameter(
                'scenario',
                openapi.IN_QUERY,
                description="Scenario to compare (microsim, us06 or udds)",
                type=openapi.TYPE_STRING,
                required=True
            ),
            openapi.Parameter(
                'seed',
                openapi.IN_QUERY,
                description="Only runs with this seed",
                type=openapi.TYPE_INTEGER,
                required=False
            ),
        ],
        operation_description="Comparison table with percentage changes against the WIE baseline"
    )
    def get(self, request):
        scenario = request.query_params.get('scenario')
        if not scenario:
            raise DRFValidationError({'scenario': 'This query parameter is required.'})
        runs = ExperimentRun.objects.filter(scenario=scenario.lower(), status=ExperimentRun.COMPLETED)
        seed = request.query_params.get('seed')
        if seed:
            if not seed.isdigit():
                raise DRFValidationError({'seed': 'Seed must be a non-negative integer.'})
            runs = runs.filter(seed=int(seed))

        latest = {}
        for run in runs.order_by('-finished_at', '-id'):
            latest.setdefault(run.controller, run)
        try:
            table = compare(run.summary() for run in latest.values())
        except DjangoValidationError as e:
            if hasattr(e, 'message_dict'):
                raise DRFValidationError(e.message_dict)
            raise DRFValidationError({'detail': e.messages})
        data = table.to_dict()
        data['runs'] = {run.get_controller_display(): run.pk for run in latest.values()}
        return Response(data)
