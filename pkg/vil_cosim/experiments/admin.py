from django.contrib import admin

from .models import ExperimentRun, LapRecord


class LapRecordInline(admin.TabularInline):
    model = LapRecord
    extra = 0


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'scenario', 'controller', 'seed', 'mode', 'status', 'travel_time', 'avg_headway')
    list_filter = ('scenario', 'controller', 'status', 'mode')
    inlines = [LapRecordInline]


@admin.register(LapRecord)
class LapRecordAdmin(admin.ModelAdmin):
    list_display = ('id', 'run', 'lap', 'discarded', 'travel_time', 'mean_gap')
