import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mgsched.model import Trace, reference_params

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def s0():
    gen, ext, _ = reference_params("S0")
    return gen, ext


@pytest.fixture
def p1():
    return reference_params("P1")


def const_trace(a, h, p, T, slot_len=1.0):
    return Trace(a=np.full(T, a), h=np.full(T, h), p=np.full(T, p), slot_len=slot_len)
