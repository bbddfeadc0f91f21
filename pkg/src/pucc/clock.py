"""Budget clocks.

:class:`WallClock` measures real seconds. :class:`WorkClock` measures
virtual seconds derived from counted work, so a run bounded by it is
bit-reproducible under a fixed seed.
"""

import time


class WallClock:
    def __init__(self):
        self._start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self._start

    def charge(self, evaluations: int, n: int) -> None:
        pass


class WorkClock:
    """Virtual time from a cost model of one local minimization.

    A call costs ``CALL`` units plus, per energy evaluation, ``EVAL`` units
    and one unit per pair or container term. ``RATE`` converts units to
    seconds and was fitted to a single core; the model tracks wall time to
    within a factor of about two across ``n = 5 .. 30``.
    """

    CALL = 4000
    EVAL = 200
    RATE = 1.7e8

    def __init__(self, rate: float = RATE):
        self.rate = rate
        self.work = 0

    def elapsed(self) -> float:
        return self.work / self.rate

    def charge(self, evaluations: int, n: int) -> None:
        self.work += self.CALL + evaluations * (self.EVAL + n * (n + 1) // 2)
