from django.core.exceptions import ValidationError
from rest_framework import status
from rest_framework.response import Response
from rest_framework.views import APIView

from apps.arrangement.serializers import design_from_data
from apps.robot.kinematics import DimensionMismatch

from .config import ConfigError, validate_document
from .reports import evaluation_report
from .serializers import EvaluateRequestSerializer


class EvaluateDesignView(APIView):
    """POST {"config": <scenario>, "design": <design>} -> evaluation report."""

    def post(self, request):
        serializer = EvaluateRequestSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)

        try:
            config = validate_document(request.data['config'])
            design = design_from_data(config.robot, serializer.validated_data['design'])
            config.check_design(design)
        except ConfigError as exc:
            return Response({'config': [str(exc)]}, status=status.HTTP_400_BAD_REQUEST)
        except (ValidationError, DimensionMismatch) as exc:
            messages = exc.messages if isinstance(exc, ValidationError) else [str(exc)]
            return Response({'design': messages}, status=status.HTTP_400_BAD_REQUEST)

        return Response(evaluation_report(config, design))
