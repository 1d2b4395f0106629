import pytest
from hypothesis import HealthCheck, settings

from ncflat.algebra import PRESETS, preset
from ncflat.exactlin import QQ, Mat

settings.register_profile(
    "ncflat",
    deadline=None,
    derandomize=True,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ncflat")

PRESET_NAMES = sorted(PRESETS)
# presets whose checks are cheap enough to run on every case
SMALL = ["field", "dual_numbers", "group_C2", "prod_KK", "trunc_poly_3", "upper_tri_2"]


@pytest.fixture(params=PRESET_NAMES)
def algebra(request):
    return preset(request.param)


def col(*xs):
    return Mat.column(QQ, list(xs))


def elem(A, coeffs):
    """Element of A from basis names, e.g. elem(A, {"E11": 1, "E22": -1})."""
    v = [0] * A.dim
    for k, c in coeffs.items():
        v[A.names.index(k)] = c
    return Mat.column(A.field, v)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
