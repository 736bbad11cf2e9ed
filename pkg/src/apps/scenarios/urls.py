from django.urls import path

from .views import EvaluateDesignView

urlpatterns = [
    path('evaluate/', EvaluateDesignView.as_view(), name='evaluate-design'),
]
