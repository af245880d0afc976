from django.urls import path

from .views import ComparisonView, ExperimentRunDetailView, ExperimentRunListView

urlpatterns = [
    path('', ExperimentRunListView.as_view(), name='run-list'),
    path('compare/', ComparisonView.as_view(), name='run-compare'),
    path('<int:pk>/', ExperimentRunDetailView.as_view(), name='run-detail'),
]
