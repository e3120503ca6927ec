"""Ground-truth replay policy used as the evaluation upper bound."""
from __future__ import annotations

import numpy as np

from ..core import SENTINEL, pad_chunk


class OracleReplay:
    """Emits the ground-truth chunk that follows the executed action state.

    The replay position is tracked per episode so that repeated points (a
    click presses and releases at the same pixel) are disambiguated: the
    executed state is searched for from the previous window start onward.
    """

    single_shot = False

    def __init__(self, H: int = 20):
        self.H = H
        self._start: dict[str, int] = {}

    def reset(self):
        self._start.clear()

    def _next_start(self, ep, ref, state) -> int:
        if np.array_equal(state, SENTINEL):
            return 0
        last = self._start.get(ep.id, 0)
        for lo in (last, 0):
            hits = np.flatnonzero(np.all(ref[lo:, :2] == state, axis=1))
            if len(hits):
                return lo + int(hits[0]) + 1
        d = np.sqrt(((ref[:, :2] - state) ** 2).sum(-1))
        return int(np.argmin(d)) + 1

    def sample(self, episodes, obs, states_px, rngs=None) -> np.ndarray:
        out = np.empty((len(episodes), self.H, 3))
        for i, ep in enumerate(episodes):
            ref = ep.reference_points()
            s = min(self._next_start(ep, ref, np.asarray(states_px[i], dtype=float)), len(ref) - 1)
            self._start[ep.id] = s
            out[i] = pad_chunk(ref[s:s + self.H], self.H)
        return out
