"""Counter-based random bits for edge states.

Every edge state is a pure function of ``(seed, stream, edge)``: the 64-bit
key of a stream is hashed together with a canonical code of the edge
(lower-left site and orientation) through the SplitMix64 finaliser. Nothing
is stateful, so any subset of edges can be sampled in any order (full
windows, lazy explorations, sub-windows) and always agrees bit-for-bit.
"""

import numba as nb
import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SEED_SALT = np.uint64(0x243F6A8885A308D3)
_COORD_MASK = np.uint64(0xFFFFFFFF)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True, nogil=True)
def stream_key(seed, stream):
    """Key of the configuration identified by ``(seed, stream)``."""
    k = mix64(np.uint64(seed) ^ _SEED_SALT)
    return mix64(k + np.uint64(stream) * _GAMMA)


@nb.njit(cache=True, nogil=True)
def substream(stream, index):
    """Stream number of the ``index``-th child of ``stream``."""
    return mix64(np.uint64(stream) + (np.uint64(index) + np.uint64(1)) * _GAMMA)


@nb.njit(cache=True, nogil=True)
def _zigzag(c):
    # c is a signed coordinate; |c| < 2**31
    if c >= 0:
        return np.uint64(2 * c)
    return np.uint64(-2 * c - 1)


@nb.njit(cache=True, nogil=True)
def edge_code(x, y, vertical):
    return ((_zigzag(x) & _COORD_MASK) << np.uint64(33)) | (
        (_zigzag(y) & _COORD_MASK) << np.uint64(1)
    ) | np.uint64(vertical)


@nb.njit(cache=True, nogil=True)
def edge_uniform(key, x, y, vertical):
    h = mix64(np.uint64(key) ^ mix64(edge_code(x, y, vertical) * _GAMMA))
    return (h >> np.uint64(11)) * _INV53


@nb.njit(cache=True, nogil=True)
def edge_open(key, x, y, vertical, p):
    return edge_uniform(key, x, y, vertical) < p


def as_u64(value):
    """Reduce a Python int (possibly negative or > 2**64) to ``np.uint64``."""
    return np.uint64(int(value) % (1 << 64))
