import os

# keep BLAS single-threaded: the desk-scale runs are budgeted for one thread
# and determinism is easier to reason about without threaded reductions
for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import numpy as np
import pytest

from schemalearn import parse_schema


@pytest.fixture
def cyclegan_schema():
    return parse_schema(
        "object A\nobject B\n"
        "gen f : A -> B\ngen g : B -> A\n"
        "eq f;g = id(A)\neq g;f = id(B)\n"
    )


@pytest.fixture
def gan_schema():
    return parse_schema("object LS\nobject IS\ngen h : LS -> IS\n")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
