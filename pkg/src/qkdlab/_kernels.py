"""Per-pulse inner loops, compiled with numba when available.

Each kernel exists twice: a numba ``@njit`` loop and a vectorised numpy
version. They consume the same pre-drawn uniforms, so both paths return
identical arrays for identical inputs. Set ``QKDLAB_DISABLE_NUMBA=1`` to
force the numpy path (numba is also skipped when it is not installed).
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("QKDLAB_DISABLE_NUMBA", "").strip() not in ("1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"

# pns_actions codes
FORWARD_VACUUM = 0
FORWARD_INTACT = 1
BLOCKED = 2
SPLIT_FORWARD = 3

# interferometer codes (same values as ee.InterferometerOutcome)
OUT_SS = 0
OUT_LL = 1
OUT_BRIGHT = 2
OUT_DARK = 3

# sift codes
SIFT_LOST = 0
SIFT_MISMATCH = 1
SIFT_MATCH = 2


def pns_actions_numpy(counts, u, p_block_single, p_block_multi):
    out = np.full(counts.shape, FORWARD_VACUUM, dtype=np.int8)
    single = counts == 1
    multi = counts >= 2
    out[single] = np.where(u[single] < p_block_single, BLOCKED, FORWARD_INTACT)
    out[multi] = np.where(u[multi] < p_block_multi, BLOCKED, SPLIT_FORWARD)
    return out


def interferometer_numpy(coherence, collapsed, u_path, u_port):
    bright_p = np.where(collapsed, 0.5, 0.5 * (1.0 + coherence))
    middle = np.where(u_port < bright_p, OUT_BRIGHT, OUT_DARK)
    out = np.where(u_path < 0.25, OUT_SS, np.where(u_path < 0.5, OUT_LL, middle))
    return out.astype(np.int8)


def sift_numpy(alice_pol, bob_basis, detected):
    """Basis comparison for Bob's polarisation measurements.

    Returns (code, bob_bit); bob_bit is -1 where no sifted bit exists.
    """
    match = detected & ((alice_pol >> 1) == bob_basis)
    code = np.where(~detected, SIFT_LOST, np.where(match, SIFT_MATCH, SIFT_MISMATCH)).astype(np.int8)
    bit = np.where(match, alice_pol & 1, -1).astype(np.int8)
    return code, bit


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def pns_actions_numba(counts, u, p_block_single, p_block_multi):
        n = counts.shape[0]
        out = np.empty(n, dtype=np.int8)
        for i in range(n):
            c = counts[i]
            if c == 0:
                out[i] = FORWARD_VACUUM
            elif c == 1:
                out[i] = BLOCKED if u[i] < p_block_single else FORWARD_INTACT
            else:
                out[i] = BLOCKED if u[i] < p_block_multi else SPLIT_FORWARD
        return out

    @numba.njit(cache=True)
    def interferometer_numba(coherence, collapsed, u_path, u_port):
        n = coherence.shape[0]
        out = np.empty(n, dtype=np.int8)
        for i in range(n):
            if u_path[i] < 0.25:
                out[i] = OUT_SS
            elif u_path[i] < 0.5:
                out[i] = OUT_LL
            else:
                bright_p = 0.5 if collapsed[i] else 0.5 * (1.0 + coherence[i])
                out[i] = OUT_BRIGHT if u_port[i] < bright_p else OUT_DARK
        return out

    @numba.njit(cache=True)
    def sift_numba(alice_pol, bob_basis, detected):
        n = alice_pol.shape[0]
        code = np.empty(n, dtype=np.int8)
        bit = np.empty(n, dtype=np.int8)
        for i in range(n):
            if not detected[i]:
                code[i] = SIFT_LOST
                bit[i] = -1
            elif (alice_pol[i] >> 1) == bob_basis[i]:
                code[i] = SIFT_MATCH
                bit[i] = alice_pol[i] & 1
            else:
                code[i] = SIFT_MISMATCH
                bit[i] = -1
        return code, bit

else:  # pragma: no cover
    pns_actions_numba = pns_actions_numpy
    interferometer_numba = interferometer_numpy
    sift_numba = sift_numpy


if USE_NUMBA:
    pns_actions = pns_actions_numba
    interferometer = interferometer_numba
    sift = sift_numba
else:
    pns_actions = pns_actions_numpy
    interferometer = interferometer_numpy
    sift = sift_numpy
