from .otel_setup import configure_logging, get_tracer, setup_otel, traced_span

__all__ = ["configure_logging", "get_tracer", "setup_otel", "traced_span"]
