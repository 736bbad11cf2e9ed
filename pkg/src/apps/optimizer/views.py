from django_filters.rest_framework import DjangoFilterBackend
from rest_framework import filters, viewsets

from .models import OptimizationRun
from .serializers import OptimizationRunDetailSerializer, OptimizationRunSerializer


class OptimizationRunViewSet(viewsets.ReadOnlyModelViewSet):
    """Archived optimizer runs; the detail view carries the Pareto front."""
    queryset = OptimizationRun.objects.all()
    filter_backends = [DjangoFilterBackend, filters.OrderingFilter]
    filterset_fields = ['scenario_name', 'mode', 'seed', 'gravity']
    ordering_fields = ['created_at', 'evaluations']

    def get_serializer_class(self):
        if self.action == 'retrieve':
            return OptimizationRunDetailSerializer
        return OptimizationRunSerializer

    def get_queryset(self):
        queryset = super().get_queryset()
        if self.action == 'retrieve':
            queryset = queryset.prefetch_related('front')
        return queryset
