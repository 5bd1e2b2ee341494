"""Quantum-resource dispatch: a TCP job server/client pair and a
discrete-event scheduler simulator for monolithic-vs-split hybrid jobs."""

from .client import DispatchClient, DispatchError
from .protocol import (
    DEFAULT_ADDRESS_ENV,
    observable_from_json,
    observable_to_json,
    parse_address,
)
from .sched import (
    JobBlock,
    Schedule,
    ScheduleError,
    load_workload,
    make_workload,
    schedule,
    schedule_to_csv,
    split_job,
    verify_schedule,
)
from .server import DispatchServer, serve

__all__ = [
    "DEFAULT_ADDRESS_ENV",
    "DispatchClient",
    "DispatchError",
    "DispatchServer",
    "JobBlock",
    "Schedule",
    "ScheduleError",
    "load_workload",
    "make_workload",
    "observable_from_json",
    "observable_to_json",
    "parse_address",
    "schedule",
    "schedule_to_csv",
    "serve",
    "split_job",
    "verify_schedule",
]
