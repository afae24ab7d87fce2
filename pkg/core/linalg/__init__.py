from .ridge import RidgeState

__all__ = ["RidgeState"]
