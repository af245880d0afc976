import django_filters

from .models import ExperimentRun


class ExperimentRunFilter(django_filters.FilterSet):
    scenario = django_filters.ChoiceFilter(choices=ExperimentRun.SCENARIO_CHOICES)
    controller = django_filters.ChoiceFilter(choices=ExperimentRun.CONTROLLER_CHOICES)
    status = django_filters.ChoiceFilter(choices=ExperimentRun.STATUS_CHOICES)
    seed = django_filters.NumberFilter()

    class Meta:
        model = ExperimentRun
        fields = ['scenario', 'controller', 'status', 'seed', 'mode']
