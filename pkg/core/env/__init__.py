from .simulator import (
    Environment,
    InstanceHeader,
    InstanceKind,
    RegretTrace,
    StepRecord,
    load_instance,
    make_instance,
    pull,
    save_instance,
)

__all__ = [
    "Environment",
    "InstanceHeader",
    "InstanceKind",
    "RegretTrace",
    "StepRecord",
    "load_instance",
    "make_instance",
    "pull",
    "save_instance",
]
