"""Full acceptance gate suite at production scale.

Each criterion prints a single pass/fail line and asserts independently.
The context (cached solves) is shared across gates, so the whole file
runs in a few minutes on one core.
"""

import pytest

from rsgrowth.verify import GATES, VerifyContext

_ctx = VerifyContext()
_cache = {}


def _run(idx):
    if idx not in _cache:
        _cache[idx] = GATES[idx](_ctx)
    return _cache[idx]


_IDS = [
    "01-contraction",
    "02-fixed-point-and-bound",
    "03-shape",
    "04-sandwich",
    "05-suboptimality",
    "06-euler-residual",
    "07-envelope",
    "08-risk-neutral-limit",
    "09-risk-ordering",
    "10-measure-properties",
    "11-association-subadditivity",
    "12-lyapunov-drift",
    "13-stationarity",
    "14-reproducibility",
]


@pytest.mark.parametrize("idx", range(len(GATES)), ids=_IDS)
def test_criterion(idx):
    res = _run(idx)
    print(f"criterion {res.number:2d} "
          f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
    assert res.passed, f"criterion {res.number} ({res.name}): {res.detail}"
