"""Random-stream construction and seed derivation.

All randomness flows from numpy's Philox4x64-10 counter-based bit
generator, which has a fixed, platform-independent output stream. Child
seeds derive from a master seed by hashing, never by drawing from the
parent stream, so any subset of realizations can be reproduced in
isolation and in any order:

    child = SHA-256("ugsim" || master || index_0 || index_1 || ...)[:16 bytes]

with all integers encoded as 8-byte little-endian values. The 128-bit
digest prefix becomes the Philox key.
"""

from __future__ import annotations

import hashlib

import numpy as np

GENERATOR_NAME = "numpy.random.Philox (Philox4x64-10)"

# Fixed per-round draw layout of the two-player engine, in order:
#   u0  role draw (consumed by every scheme, used only by the random one)
#   u1  proposer explore-vs-greedy draw
#   u2  proposer action pick / tie-break draw
#   u3  responder explore-vs-greedy draw
#   u4  responder action pick / tie-break draw
DRAWS_PER_ROUND = 5

# Per edge and step of the lattice engine: explore and pick draws for the
# proposer endpoint, then the same pair for the responder endpoint.
DRAWS_PER_EDGE_STEP = 4


def derive_seed(master: int, *path: int) -> int:
    """128-bit child seed for a (grid point, realization, ...) path.

    Practically injective over (master, path); the acceptance tests
    collision-check it over the experiment grids they run.
    """
    h = hashlib.sha256(b"ugsim")
    h.update(int(master).to_bytes(8, "little", signed=False))
    for part in path:
        h.update(int(part).to_bytes(8, "little", signed=False))
    return int.from_bytes(h.digest()[:16], "little")


def make_generator(seed: int) -> np.random.Generator:
    """Philox generator keyed directly by ``seed`` (up to 128 bits)."""
    return np.random.Generator(np.random.Philox(key=seed))
