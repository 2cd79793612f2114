"""
API views for the harmonic application.

Experiment runs are created through a ModelViewSet that validates the configuration and
dispatches the Celery task; companion pairs are computed on request; the latest
invariant suite record is served read-only.
"""

import logging

from rest_framework import mixins, status, viewsets
from rest_framework.decorators import action
from rest_framework.exceptions import APIException, NotFound
from rest_framework.permissions import AllowAny, IsAuthenticatedOrReadOnly
from rest_framework.response import Response
from rest_framework.views import APIView

from .exceptions import DegeneracyError, HarmonicError
from .models import ExperimentRun, InvariantSuiteRecord
from .serializers import (CompanionQuerySerializer, ExperimentRowsSerializer,
                          ExperimentRunSerializer, InvariantSuiteRecordSerializer)
from .tasks import run_experiment_task
from .testfn import build_companion

logger = logging.getLogger(__name__)


class ComputationFailed(APIException):
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_detail = 'The computation could not be carried out for these parameters.'
    default_code = 'computation_failed'


class ExperimentRunViewSet(mixins.CreateModelMixin, mixins.ListModelMixin,
                           mixins.RetrieveModelMixin, viewsets.GenericViewSet):
    """
    Experiment runs.
    Endpoint: /experiments/ (list, create), /experiments/<id>/ and /experiments/<id>/rows/
    """
    serializer_class = ExperimentRunSerializer
    permission_classes = [IsAuthenticatedOrReadOnly]
    queryset = ExperimentRun.objects.select_related('owner').order_by('-created_at')

    def perform_create(self, serializer):
        """Stores the pending run and hands it to the experiments queue."""
        run = serializer.save()
        logger.info("Experiment run %s (%s) queued by %s", run.pk, run.kind,
                    self.request.user)
        run_experiment_task.delay(run.pk)

    @action(detail=True, methods=['get'])
    def rows(self, request, pk=None):
        return Response(ExperimentRowsSerializer(self.get_object()).data)


class CompanionView(APIView):
    """
    The Calderón companion of a test symbol as MultiplierPair export JSON.
    Query: ?phi=<kind>&mode=<continuous|discrete>&alpha=<a>&N=<N>
    """
    permission_classes = [AllowAny]

    def get(self, request, *args, **kwargs):
        query = CompanionQuerySerializer(data=request.query_params)
        query.is_valid(raise_exception=True)
        data = query.validated_data
        try:
            pair = build_companion(data['symbol'], data['mode'], N=data['N'])
        except DegeneracyError as exc:
            raise ComputationFailed(str(exc)) from exc
        except HarmonicError as exc:
            logger.error("Companion construction failed for %s", data['symbol'].label,
                         exc_info=True)
            raise ComputationFailed(str(exc)) from exc
        export = pair.export()
        export['valid'] = pair.valid
        export['tolerance'] = pair.tolerance
        return Response(export, status=status.HTTP_200_OK)


class LatestInvariantSuiteView(APIView):
    """
    The most recent invariant suite record.
    """
    permission_classes = [AllowAny]

    def get(self, request, *args, **kwargs):
        try:
            record = InvariantSuiteRecord.objects.latest()
        except InvariantSuiteRecord.DoesNotExist as exc:
            raise NotFound("No invariant suite has been recorded yet.") from exc
        return Response(InvariantSuiteRecordSerializer(record).data)
