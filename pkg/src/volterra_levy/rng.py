"""Counter-based random streams for reproducible Monte Carlo.

Every replica gets its own Philox stream.  The Philox key is derived from the
run seed and the replica id, so a replica's draws never depend on how many
other replicas exist, on their order, or on how work is split over workers.
"""

import numpy as np

_TAGS = {"noise": 0, "drift": 1, "probe": 2, "bootstrap": 3}


def stream(seed, replica=0, tag="noise"):
    """Return a ``numpy.random.Generator`` keyed by ``(seed, replica, tag)``.

    Parameters
    ----------
    seed : int
        Run seed (unsigned 64 bit).
    replica : int
        Replica id.  Distinct ids give statistically independent streams.
    tag : str or int
        Purpose of the stream, so that e.g. the drift synthesized for a run
        does not share draws with the driving noise.
    """
    tag_id = _TAGS[tag] if isinstance(tag, str) else int(tag)
    if seed < 0 or replica < 0:
        raise ValueError("seed and replica must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replica), tag_id))
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def replica_streams(seed, replicas, tag="noise"):
    """Streams for replica ids ``0..replicas-1``."""
    return [stream(seed, r, tag) for r in range(replicas)]
