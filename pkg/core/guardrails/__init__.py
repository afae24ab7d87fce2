from .invariants import InvariantResult, InvariantViolation, enforce

__all__ = ["InvariantResult", "InvariantViolation", "enforce"]
