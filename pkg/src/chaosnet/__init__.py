"""Chaotic asynchronous Boolean iterations, their neural-network counterparts,
and how well feedforward networks learn them."""

from .dynamics import (
    BoolConfig,
    BooleanMap,
    Strategy,
    SystemPoint,
    apply_map,
    builtin_map,
    f_step,
    gf_step,
    iterate_async,
)
from .graph import ChaosCertificate, build_graph, certify_chaos, steer

__version__ = "0.1.0"
