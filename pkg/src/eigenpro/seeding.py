"""Seed derivation.

Every random stream in the package comes from a top-level integer seed and a
role tag, via ``numpy.random.Generator(PCG64(SeedSequence([seed, crc32(role)])))``.
Re-seeding one role (say ``"batches"``) leaves all other roles untouched.
"""

import zlib

import numpy as np

ROLES = ("eigensolver", "batches", "features", "centers", "synthetic", "trials", "subsample")


def role_key(role: str) -> int:
    return zlib.crc32(role.encode("utf-8"))


def derive_rng(seed, role: str) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    seq = np.random.SeedSequence([int(seed), role_key(role)])
    return np.random.Generator(np.random.PCG64(seq))
