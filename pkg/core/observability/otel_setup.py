"""
Bandit-MIPS OpenTelemetry Setup

Production observability:
- Traces for index builds, elimination rounds and experiment runs
- Logs with key=value fields through the stdlib logging tree
"""
from __future__ import annotations
from contextlib import contextmanager
from typing import Iterator, Optional
import logging
import os

_TRACER = None

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(level: str | int = "INFO") -> None:
    """Route library loggers to stderr with one line per event."""
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def setup_otel(
    service_name: str = "bandit-mips",
    endpoint: Optional[str] = None,
):
    """Initialize OpenTelemetry with OTLP exporter."""
    global _TRACER
    try:
        from opentelemetry import trace
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import BatchSpanProcessor
        from opentelemetry.sdk.resources import Resource

        resource = Resource.create({"service.name": service_name})
        provider = TracerProvider(resource=resource)

        otlp_endpoint = endpoint or os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT")
        if otlp_endpoint:
            from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
            exporter = OTLPSpanExporter(endpoint=otlp_endpoint)
            provider.add_span_processor(BatchSpanProcessor(exporter))

        trace.set_tracer_provider(provider)
        _TRACER = trace.get_tracer(service_name)
        return _TRACER

    except ImportError:
        # Graceful degradation if OTEL not installed
        return None


def get_tracer():
    """Tracer installed by setup_otel, or None."""
    return _TRACER


@contextmanager
def traced_span(tracer, name: str, **attributes) -> Iterator[object]:
    """Span around a block; a no-op without a tracer."""
    if tracer is None:
        yield None
        return
    attrs = {k: v for k, v in attributes.items() if isinstance(v, (str, bool, int, float))}
    with tracer.start_as_current_span(name, attributes=attrs) as span:
        yield span
