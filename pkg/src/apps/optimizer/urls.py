from django.urls import include, path
from rest_framework.routers import DefaultRouter

from .views import OptimizationRunViewSet

router = DefaultRouter()
router.register(r'runs', OptimizationRunViewSet, basename='run')

urlpatterns = [
    path('', include(router.urls)),
]
