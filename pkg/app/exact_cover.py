"""Exact cover with optional items over bitmask options.

An option is an int whose set bits are the items it covers. A solution is a set
of pairwise disjoint options covering every required item; optional items may
stay uncovered. Branching follows Algorithm X: always split on the uncovered
required item with the fewest available options.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from app.errors import worker_threads

logger = logging.getLogger(__name__)

Solution = tuple[int, ...]


class ExactCover:
    def __init__(self, options: Sequence[int], required: int):
        self.options = tuple(options)
        self.required = required
        self.by_item: dict[int, list[int]] = {}
        for idx, mask in enumerate(self.options):
            if mask == 0:
                raise ValueError(f"option {idx} covers no item")
            bits = mask
            while bits:
                low = bits & -bits
                self.by_item.setdefault(low.bit_length() - 1, []).append(idx)
                bits ^= low

    def _pick_item(self, covered: int) -> tuple[int, list[int]] | None:
        """Most constrained uncovered required item, or None once all are covered."""
        best: tuple[int, list[int]] | None = None
        pending = self.required & ~covered
        while pending:
            low = pending & -pending
            item = low.bit_length() - 1
            pending ^= low
            avail = [o for o in self.by_item.get(item, ()) if not self.options[o] & covered]
            if best is None or len(avail) < len(best[1]):
                best = (item, avail)
                if not avail:
                    break
        return best

    def _optional_subsets(self, covered: int, chosen: list[int], out: list[Solution]):
        free = [o for o, mask in enumerate(self.options) if not mask & covered]

        def extend(start: int, cov: int, picked: list[int]):
            out.append(tuple(sorted(chosen + picked)))
            for pos in range(start, len(free)):
                o = free[pos]
                if not self.options[o] & cov:
                    picked.append(o)
                    extend(pos + 1, cov | self.options[o], picked)
                    picked.pop()

        extend(0, covered, [])

    def _search(self, covered: int, chosen: list[int], out: list[Solution]):
        pick = self._pick_item(covered)
        if pick is None:
            self._optional_subsets(covered, chosen, out)
            return
        _, avail = pick
        for o in avail:
            chosen.append(o)
            self._search(covered | self.options[o], chosen, out)
            chosen.pop()

    def _branch(self, option: int) -> list[Solution]:
        out: list[Solution] = []
        self._search(self.options[option], [option], out)
        return out

    def solve(self, threads: int | None = None) -> list[Solution]:
        """All solutions as sorted tuples of option indices, in a fixed order.

        With more than one thread the top-level branches run on a pool and are
        joined in branch order, so the result never depends on ``threads``.
        """
        threads = worker_threads(threads)
        logger.debug("exact cover: %d options, threads=%d", len(self.options), threads)
        pick = self._pick_item(0)
        if pick is None or threads == 1:
            out: list[Solution] = []
            self._search(0, [], out)
            return out
        _, avail = pick
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(self._branch, o) for o in avail]
            return [solution for future in futures for solution in future.result()]


def exact_cover(options: Sequence[int], required: int, threads: int | None = None) -> list[Solution]:
    return ExactCover(options, required).solve(threads)


def bit_index(keys: Sequence) -> dict:
    """Map each key to its bit position."""
    return {key: pos for pos, key in enumerate(keys)}


def mask_of(bits: dict, keys) -> int:
    mask = 0
    for key in keys:
        mask |= 1 << bits[key]
    return mask
