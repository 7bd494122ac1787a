"""Cross-backend agreement: numba kernels versus the numpy fallback.

The backend is fixed at import time by ``NORMLENS_NO_NUMBA``, so the
fallback results are produced in a subprocess with that flag set and
compared against the in-process values.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from normlens import GaussianTokenModel, elb_bruteforce, tally_signs
from normlens._backend import active_backend

_PROBE = r"""
import json
from normlens import GaussianTokenModel, elb_bruteforce, tally_signs
from normlens._backend import active_backend

model = GaussianTokenModel.shared(1.5, 1.0, 48)
tally = tally_signs(model, 40000, seed=17)
out = {
    "backend": active_backend(),
    "tally": [tally.n_flip, tally.n_raw_nonpositive, tally.n_norm_positive],
    "scan": [
        elb_bruteforce(k, length, dim, 101)
        for (k, length, dim) in [(0.0, 3, 4), (1.0, 4, 16), (-1.0, 4, 4), (0.5, 2, 1)]
    ],
}
print(json.dumps(out))
"""


def _run_probe(no_numba: bool) -> dict:
    env = dict(os.environ)
    env["NORMLENS_NO_NUMBA"] = "1" if no_numba else "0"
    proc = subprocess.run(
        [sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(proc.stdout)


def test_numpy_fallback_matches_numba():
    if active_backend() != "numba":
        pytest.skip("numba backend unavailable; nothing to compare against")
    model = GaussianTokenModel.shared(1.5, 1.0, 48)
    tally = tally_signs(model, 40_000, seed=17)
    scans = [
        elb_bruteforce(k, length, dim, 101)
        for (k, length, dim) in [(0.0, 3, 4), (1.0, 4, 16), (-1.0, 4, 4), (0.5, 2, 1)]
    ]
    probe = _run_probe(no_numba=True)
    assert probe["backend"] == "numpy"
    assert probe["tally"] == [tally.n_flip, tally.n_raw_nonpositive, tally.n_norm_positive]
    np.testing.assert_allclose(probe["scan"], scans, rtol=0, atol=1e-12)


def test_flag_selects_backend():
    assert _run_probe(no_numba=True)["backend"] == "numpy"
