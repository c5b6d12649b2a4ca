"""Event-driven simulation of the attachment / failure protocol.

Every node fails at rate ``phi``; every node below its desired degree starts
an attachment at rate ``alpha``.  Events are drawn from the superposition of
these Poisson clocks (one exponential waiting time at the total rate, then a
channel chosen in proportion to its rate and a node uniformly inside it).

The state lives in flat numpy arrays so the event loop can run under numba:
node ``v``'s neighbours are ``neighbours[offsets[v] : offsets[v] + degree[v]]``,
and nodes below their desired degree are kept in a swap-remove set
(``deficient[:n_deficient]`` with back-pointers in ``position``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .model import DegreeHistogram, RateConfig, validate_rates
from .netgen import OverlayGraph

# slots of the int64 counter vector
N_DEFICIENT = 0
FAILURES = 1
ATTACHMENTS = 2
REJECTIONS = 3
STAMP = 4
EVENTS = 5
N_COUNTERS = 6


@njit(cache=True, nogil=True)
def _seed(seed):
    np.random.seed(seed)


@njit(cache=True, nogil=True)
def _touch(v, t, window_start, degree, last_change, occupancy):
    # credit v's current degree with the time it held it inside the window
    lo = last_change[v]
    if lo < window_start:
        lo = window_start
    if t > lo:
        occupancy[degree[v]] += t - lo
    last_change[v] = t


@njit(cache=True, nogil=True)
def _mark_deficient(v, deficient, position, counters):
    if position[v] < 0:
        k = counters[N_DEFICIENT]
        deficient[k] = v
        position[v] = k
        counters[N_DEFICIENT] = k + 1


@njit(cache=True, nogil=True)
def _unmark_deficient(v, deficient, position, counters):
    k = position[v]
    if k >= 0:
        last = counters[N_DEFICIENT] - 1
        moved = deficient[last]
        deficient[k] = moved
        position[moved] = k
        position[v] = -1
        counters[N_DEFICIENT] = last


@njit(cache=True, nogil=True)
def _fail(v, t, window_start, desired, degree, offsets, neighbours, deficient, position,
          counters, last_change, occupancy):
    counters[FAILURES] += 1
    base_v = offsets[v]
    for idx in range(degree[v]):
        u = neighbours[base_v + idx]
        base_u = offsets[u]
        du = degree[u]
        for k in range(du):
            if neighbours[base_u + k] == v:
                neighbours[base_u + k] = neighbours[base_u + du - 1]
                break
        _touch(u, t, window_start, degree, last_change, occupancy)
        degree[u] = du - 1
        _mark_deficient(u, deficient, position, counters)
    _touch(v, t, window_start, degree, last_change, occupancy)
    degree[v] = 0
    if desired[v] > 0:
        _mark_deficient(v, deficient, position, counters)


@njit(cache=True, nogil=True)
def _attach(v, t, window_start, desired, degree, offsets, neighbours, deficient, position,
            counters, last_change, occupancy, mark):
    """One attachment attempt by deficient node ``v``; returns the new partner or -1."""
    counters[STAMP] += 1
    stamp = counters[STAMP]
    mark[v] = stamp
    n_def = counters[N_DEFICIENT]
    blocked = 1  # v itself
    base_v = offsets[v]
    for idx in range(degree[v]):
        u = neighbours[base_v + idx]
        mark[u] = stamp
        if position[u] >= 0:
            blocked += 1
    eligible = n_def - blocked
    if eligible <= 0:
        counters[REJECTIONS] += 1
        return -1
    if 4 * eligible >= n_def:
        while True:
            u = deficient[np.random.randint(0, n_def)]
            if mark[u] != stamp:
                break
    else:
        target = np.random.randint(0, eligible)
        u = -1
        for k in range(n_def):
            w = deficient[k]
            if mark[w] != stamp:
                if target == 0:
                    u = w
                    break
                target -= 1
    _touch(v, t, window_start, degree, last_change, occupancy)
    _touch(u, t, window_start, degree, last_change, occupancy)
    neighbours[base_v + degree[v]] = u
    degree[v] += 1
    neighbours[offsets[u] + degree[u]] = v
    degree[u] += 1
    if degree[v] >= desired[v]:
        _unmark_deficient(v, deficient, position, counters)
    if degree[u] >= desired[u]:
        _unmark_deficient(u, deficient, position, counters)
    counters[ATTACHMENTS] += 1
    return u


@njit(cache=True, nogil=True)
def _check(desired, degree, offsets, neighbours, deficient, position, counters):
    """0 when all invariants hold, otherwise a positive code naming the first violation."""
    n = degree.size
    n_def = 0
    for v in range(n):
        if degree[v] > desired[v] or degree[v] > offsets[v + 1] - offsets[v]:
            return 1
        if (degree[v] < desired[v]) != (position[v] >= 0):
            return 2
        if position[v] >= 0:
            n_def += 1
            if deficient[position[v]] != v:
                return 3
        base = offsets[v]
        for a in range(degree[v]):
            u = neighbours[base + a]
            if u == v:
                return 4
            for b in range(a + 1, degree[v]):
                if neighbours[base + b] == u:
                    return 5
            found = False
            for c in range(degree[u]):
                if neighbours[offsets[u] + c] == v:
                    found = True
                    break
            if not found:
                return 6
    if n_def != counters[N_DEFICIENT]:
        return 7
    return 0


@njit(cache=True, nogil=True)
def _run(t0, t_end, window_start, alpha, phi, desired, degree, offsets, neighbours, deficient,
         position, counters, last_change, occupancy, mark, debug):
    n = degree.size
    fail_rate = n * phi
    t = t0
    while True:
        attach_rate = counters[N_DEFICIENT] * alpha
        total = fail_rate + attach_rate
        if total <= 0.0:
            break
        dt = np.random.exponential(1.0 / total)
        if t + dt >= t_end:
            break
        t += dt
        counters[EVENTS] += 1
        if np.random.random() * total < fail_rate:
            v = np.random.randint(0, n)
            _fail(v, t, window_start, desired, degree, offsets, neighbours, deficient, position,
                  counters, last_change, occupancy)
        else:
            v = deficient[np.random.randint(0, counters[N_DEFICIENT])]
            _attach(v, t, window_start, desired, degree, offsets, neighbours, deficient, position,
                    counters, last_change, occupancy, mark)
        if debug:
            code = _check(desired, degree, offsets, neighbours, deficient, position, counters)
            if code != 0:
                return -code
    for v in range(n):
        _touch(v, t_end, window_start, degree, last_change, occupancy)
    return 0


INVARIANT_MESSAGES = {
    1: "degree exceeds desired degree or adjacency capacity",
    2: "deficient-set membership disagrees with degree",
    3: "deficient-set back-pointer is stale",
    4: "self-loop",
    5: "duplicate edge",
    6: "asymmetric edge",
    7: "deficient-set size counter is wrong",
}


class InvariantViolation(AssertionError):
    pass


@dataclass
class SimConfig:
    rates: RateConfig
    graph: OverlayGraph
    t_end: float = 1e4
    seed: int = 0
    window_fraction: float = 0.5  # time-averaged histogram covers [t_end * (1 - f), t_end]

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if not 0.0 < self.window_fraction <= 1.0:
            raise ValueError(f"window_fraction must lie in (0, 1], got {self.window_fraction!r}")
        validate_rates(self.rates, "simulation")


@dataclass
class SimState:
    desired: np.ndarray
    degree: np.ndarray
    offsets: np.ndarray
    neighbours: np.ndarray
    deficient: np.ndarray
    position: np.ndarray
    counters: np.ndarray
    last_change: np.ndarray
    occupancy: np.ndarray
    mark: np.ndarray
    clock: float = 0.0
    window_start: float = 0.0
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_graph(cls, graph: OverlayGraph, window_start: float = 0.0) -> "SimState":
        n = graph.n_nodes
        desired = np.asarray(graph.desired, dtype=np.int64).copy()
        capacity = np.minimum(desired, max(n - 1, 0))
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(capacity, out=offsets[1:])
        neighbours = np.full(int(offsets[-1]), -1, dtype=np.int64)
        degree = np.zeros(n, dtype=np.int64)
        for v, nb in enumerate(graph.adjacency):
            row = sorted(nb)
            if len(row) > capacity[v]:
                raise InvariantViolation(f"node {v} starts above its desired degree")
            neighbours[offsets[v] : offsets[v] + len(row)] = row
            degree[v] = len(row)
        deficient = np.zeros(n, dtype=np.int64)
        position = np.full(n, -1, dtype=np.int64)
        counters = np.zeros(N_COUNTERS, dtype=np.int64)
        for v in np.flatnonzero(degree < desired):
            _mark_deficient(int(v), deficient, position, counters)
        max_degree = int(capacity.max()) if n else 0
        return cls(
            desired=desired,
            degree=degree,
            offsets=offsets,
            neighbours=neighbours,
            deficient=deficient,
            position=position,
            counters=counters,
            last_change=np.zeros(n),
            occupancy=np.zeros(max_degree + 1),
            mark=np.zeros(n, dtype=np.int64),
            window_start=window_start,
        )

    @property
    def n_nodes(self) -> int:
        return self.degree.size

    @property
    def failures(self) -> int:
        return int(self.counters[FAILURES])

    @property
    def attachments(self) -> int:
        return int(self.counters[ATTACHMENTS])

    @property
    def rejections(self) -> int:
        return int(self.counters[REJECTIONS])

    @property
    def events(self) -> int:
        return int(self.counters[EVENTS])

    def neighbours_of(self, v: int) -> np.ndarray:
        start = self.offsets[v]
        return self.neighbours[start : start + self.degree[v]]

    def graph(self) -> OverlayGraph:
        adjacency = [set(self.neighbours_of(v).tolist()) for v in range(self.n_nodes)]
        return OverlayGraph(self.desired.copy(), adjacency)

    def check_invariants(self) -> None:
        code = _check(self.desired, self.degree, self.offsets, self.neighbours, self.deficient,
                      self.position, self.counters)
        if code:
            raise InvariantViolation(INVARIANT_MESSAGES[code])

    def time_averaged_histogram(self) -> DegreeHistogram:
        """Fraction of node-time spent at each degree over the measurement window."""
        weight = self.occupancy.sum()
        if weight <= 0:
            raise ValueError("measurement window has not elapsed yet")
        return DegreeHistogram(self.occupancy / weight, "empirical", self.n_nodes,
                               {"window": (self.window_start, self.clock)})

    def fingerprint(self) -> tuple:
        """Hashable summary of counters and adjacency for determinism checks."""
        adjacency = tuple(tuple(sorted(self.neighbours_of(v).tolist())) for v in range(self.n_nodes))
        return tuple(self.counters.tolist()), adjacency, self.clock


def fail_node(state: SimState, v: int) -> SimState:
    """Crash ``v``: drop every incident link; ``v`` stays with its desired degree."""
    if not 0 <= v < state.n_nodes:
        raise IndexError(f"node {v} out of range")
    _fail(v, state.clock, state.window_start, state.desired, state.degree, state.offsets,
          state.neighbours, state.deficient, state.position, state.counters, state.last_change,
          state.occupancy)
    return state


def attempt_attachment(state: SimState, v: int) -> int:
    """Let deficient ``v`` link to a uniformly chosen eligible peer.

    Eligible peers are non-neighbours below their own desired degree.
    Returns the new neighbour, or -1 when nobody is eligible (counted as a
    rejection).
    """
    if not 0 <= v < state.n_nodes:
        raise IndexError(f"node {v} out of range")
    if state.degree[v] >= state.desired[v]:
        raise ValueError(f"node {v} is already at its desired degree")
    return int(_attach(v, state.clock, state.window_start, state.desired, state.degree,
                       state.offsets, state.neighbours, state.deficient, state.position,
                       state.counters, state.last_change, state.occupancy, state.mark))


def seed_event_stream(seed: int) -> None:
    """Seed the generator used by the compiled event kernels (per thread)."""
    _seed(int(seed) % 2**32)


def kernel_seed(seed: int) -> int:
    return int(np.random.SeedSequence([int(seed), 1]).generate_state(1)[0])


def run(config: SimConfig, debug: bool = False) -> SimState:
    """Advance the protocol from ``config.graph`` until ``t_end``.

    Deterministic given ``config.seed``.  With ``debug=True`` every invariant
    is re-checked after every event (slow; meant for tests).
    """
    window_start = config.t_end * (1.0 - config.window_fraction)
    state = SimState.from_graph(config.graph, window_start)
    state.seed = config.seed
    if debug:
        state.check_invariants()
    seed_event_stream(kernel_seed(config.seed))
    code = _run(0.0, float(config.t_end), window_start, float(config.rates.alpha),
                float(config.rates.phi), state.desired, state.degree, state.offsets,
                state.neighbours, state.deficient, state.position, state.counters,
                state.last_change, state.occupancy, state.mark, debug)
    if code < 0:
        raise InvariantViolation(INVARIANT_MESSAGES[-code])
    state.clock = float(config.t_end)
    return state


def snapshot_degrees(state: SimState) -> DegreeHistogram:
    """Empirical degree pmf at the current clock."""
    counts = np.bincount(state.degree, minlength=1)
    return DegreeHistogram.from_counts(counts, "empirical", clock=state.clock)
