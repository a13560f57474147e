"""Parameters, ordered state space, and admissible control policies.

The system is a cluster with two server groups and a finite buffer.  Group 1
holds ``m1`` always-on servers, group 2 holds ``m2`` servers that can be
woken ("setup") or put back to sleep, and the buffer holds up to ``m3``
waiting jobs.  A system state is the triple ``(n1, n2, n3)`` of job counts
in group 1, group 2 and the buffer.

States are organized into levels by group-2 occupancy:

* level 0: ``(0,0,0) .. (m1,0,0)`` - group 2 idle, group 1 filling up;
* level 1: ``(m1,0,1) .. (m1,0,m3)`` - jobs queueing, group 2 still asleep;
* level ``k`` for ``2 <= k <= m2+1``: ``n2 = k-1`` jobs in group 2 with
  ``n2 + n3 <= m3``;
* level ``m2+2``: group 2 full and the combined backlog above ``m3``.

This ordering is load-bearing: every matrix in the package is laid out
block-by-level, within a level by the order constructed here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields, replace

from .errors import PolicySpaceTooLarge, StateNotFoundError, ValidationError

#: Default ceiling on exhaustive policy enumeration.
DEFAULT_ENUMERATION_CAP = 10_000_000

#: JSON spelling of each parameter field ("lambda" is a Python keyword).
_JSON_NAMES = {"lam": "lambda"}


@dataclass(frozen=True)
class ModelParams:
    """All rates, sizes, power levels and prices of the cluster model.

    Attributes
    ----------
    lam:
        Poisson arrival rate of jobs (spelled ``lambda`` in JSON configs).
    mu1, mu2:
        Per-server service rates in groups 1 and 2; ``mu1 >= mu2``.
    m1, m2, m3:
        Group sizes and buffer capacity; ``m3 >= m2``.
    P1W, P2W, P2S:
        Power draw of a working group-1 server, a working group-2 server,
        and a sleeping group-2 server (``0 < P2S < P2W``).
    C1:
        Price per unit of power per unit time.
    C2_1, C2_2, C2_3:
        Holding cost per job per unit time in group 1, group 2, the buffer.
    C3_1:
        Cost of waking one sleeping server.
    C3_2:
        Cost of moving one in-service job back to the buffer when its
        server is put to sleep.
    C4:
        Cost of transferring a group-2 job to a freed group-1 server.
    C5:
        Opportunity cost of one lost job.
    R:
        Revenue per served job (the service price).
    """

    lam: float
    mu1: float
    mu2: float
    m1: int
    m2: int
    m3: int
    P1W: float
    P2W: float
    P2S: float
    C1: float
    C2_1: float
    C2_2: float
    C2_3: float
    C3_1: float
    C3_2: float
    C4: float
    C5: float
    R: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValidationError("lambda must be positive (arrivals drive the chain)")
        if not self.mu2 > 0:
            raise ValidationError("mu2 must be positive")
        if self.mu1 < self.mu2:
            raise ValidationError("mu1 >= mu2 is required (group 1 is the fast group)")
        for name in ("m1", "m2", "m3"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
        if self.m1 < 1:
            raise ValidationError("m1 >= 1 is required")
        if self.m2 < 1:
            raise ValidationError("m2 >= 1 is required")
        if self.m3 < self.m2:
            raise ValidationError(
                f"m3 >= m2 is required (buffer must cover group 2), got m3={self.m3} < m2={self.m2}"
            )
        if not (0 < self.P2S < self.P2W):
            raise ValidationError("0 < P2S < P2W is required")
        if self.P1W < 0:
            raise ValidationError("P1W must be nonnegative")
        if self.C2_1 > self.C2_2:
            raise ValidationError("C2_1 <= C2_2 is required (group 1 is the cheap group)")
        for name in ("C1", "C2_1", "C2_2", "C2_3", "C3_1", "C3_2", "C4", "C5", "R"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")

    def with_price(self, R: float) -> "ModelParams":
        """Copy of the parameters with a different service price."""
        return replace(self, R=R)

    def to_dict(self) -> dict:
        """Field dict using the JSON spelling (``lambda`` instead of ``lam``)."""
        out = {}
        for f in fields(self):
            out[_JSON_NAMES.get(f.name, f.name)] = getattr(self, f.name)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        """Build parameters from a JSON-style dict; unknown keys are rejected."""
        json_to_attr = {_JSON_NAMES.get(f.name, f.name): f.name for f in fields(cls)}
        unknown = sorted(set(data) - set(json_to_attr))
        if unknown:
            raise ValidationError(f"unknown parameter keys: {', '.join(unknown)}")
        missing = sorted(set(json_to_attr) - set(data))
        if missing:
            raise ValidationError(f"missing parameter keys: {', '.join(missing)}")
        kwargs = {}
        for key, value in data.items():
            attr = json_to_attr[key]
            kwargs[attr] = int(value) if attr in ("m1", "m2", "m3") else float(value)
        return cls(**kwargs)


@dataclass(frozen=True)
class State:
    """One system state ``(n1, n2, n3)`` with its level index."""

    n1: int
    n2: int
    n3: int
    level: int

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)


def state_level(m1: int, m2: int, m3: int, n1: int, n2: int, n3: int) -> int:
    """Level of a valid state triple."""
    if n2 == 0 and n3 == 0:
        return 0
    if n2 == 0:
        return 1
    if n2 == m2 and n3 > m3 - m2:
        return m2 + 2
    return n2 + 1


def state_count(m1: int, m2: int, m3: int) -> int:
    """Closed-form number of states; integral for every integer m2."""
    return m1 + (3 * m2 - m2 * m2) // 2 + m2 * m3 + m3 + 1


@dataclass(frozen=True)
class StateSpace:
    """All states in level order with O(1) index lookup both ways."""

    m1: int
    m2: int
    m3: int
    states: tuple[State, ...]
    level_offsets: tuple[int, ...]  # start of each level; last entry = total size
    _index: dict = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def n_levels(self) -> int:
        return self.m2 + 3

    def index(self, state) -> int:
        """Position of a state (triple or State) in the global order."""
        triple = state.triple if isinstance(state, State) else tuple(state)
        try:
            return self._index[triple]
        except KeyError:
            raise StateNotFoundError(f"state {triple} is not in the state space") from None

    def state_at(self, i: int) -> State:
        return self.states[i]

    def contains(self, triple) -> bool:
        return tuple(triple) in self._index

    def level_slice(self, level: int) -> slice:
        return slice(self.level_offsets[level], self.level_offsets[level + 1])

    def level_dim(self, level: int) -> int:
        return self.level_offsets[level + 1] - self.level_offsets[level]


def build_state_space(params: ModelParams) -> StateSpace:
    """Enumerate all states level by level.

    The total count always equals :func:`state_count`.
    """
    m1, m2, m3 = params.m1, params.m2, params.m3
    states: list[State] = []
    offsets = [0]
    for n1 in range(m1 + 1):
        states.append(State(n1, 0, 0, 0))
    offsets.append(len(states))
    for n3 in range(1, m3 + 1):
        states.append(State(m1, 0, n3, 1))
    offsets.append(len(states))
    for n2 in range(1, m2 + 1):
        for n3 in range(0, m3 - n2 + 1):
            states.append(State(m1, n2, n3, n2 + 1))
        offsets.append(len(states))
    for n3 in range(m3 - m2 + 1, m3 + 1):
        states.append(State(m1, m2, n3, m2 + 2))
    offsets.append(len(states))

    index = {s.triple: i for i, s in enumerate(states)}
    space = StateSpace(m1, m2, m3, tuple(states), tuple(offsets), index)
    assert space.size == state_count(m1, m2, m3)
    return space


def state_index(space: StateSpace, state) -> int:
    """Index of ``state`` in ``space`` (functional spelling of ``space.index``)."""
    return space.index(state)


@dataclass(frozen=True)
class Policy:
    """An asynchronous control policy: a setup vector and a sleep map.

    ``setup[n3-1]`` is the number of group-2 servers to wake when the
    system sits at ``(m1, 0, n3)``; admissible values are ``0..m2``.
    ``sleep[n2-1][n3]`` is the number of group-2 servers to hold asleep at
    ``(m1, n2, n3)``; admissible values are ``m2-n2..m2`` (servers without
    jobs always sleep).  The two sub-policies never act at the same instant.
    """

    setup: tuple[int, ...]
    sleep: tuple[tuple[int, ...], ...]

    def setup_at(self, n3: int) -> int:
        return self.setup[n3 - 1]

    def sleep_at(self, n2: int, n3: int) -> int:
        return self.sleep[n2 - 1][n3]

    def entries(self) -> tuple[int, ...]:
        """Flat entry tuple (setup first, then sleep rows); the lexicographic key."""
        return self.setup + tuple(itertools.chain.from_iterable(self.sleep))

    def replace_setup(self, n3: int, value: int) -> "Policy":
        new = list(self.setup)
        new[n3 - 1] = value
        return Policy(tuple(new), self.sleep)

    def replace_sleep(self, n2: int, n3: int, value: int) -> "Policy":
        rows = [list(row) for row in self.sleep]
        rows[n2 - 1][n3] = value
        return Policy(self.setup, tuple(tuple(row) for row in rows))

    def max_wake(self) -> int:
        """Largest number of servers any setup entry can actually wake.

        Entry ``w`` at buffer occupancy ``n3`` wakes ``min(w, n3)`` servers,
        so this is ``max_n3 min(setup[n3], n3)``.  Levels above this value
        plus one are unreachable; the chain is irreducible on the full
        state space exactly when it equals ``m2``.
        """
        return max(
            (min(w, n3) for n3, w in enumerate(self.setup, start=1)), default=0
        )


def validate_policy(params: ModelParams, policy: Policy) -> None:
    """Raise ValidationError naming the first offending entry, if any."""
    m2, m3 = params.m2, params.m3
    if len(policy.setup) != m3:
        raise ValidationError(
            f"setup vector must have length m3={m3}, got {len(policy.setup)}"
        )
    for n3, w in enumerate(policy.setup, start=1):
        if not 0 <= w <= m2:
            raise ValidationError(
                f"setup entry at n3={n3} is {w}, admissible range is 0..{m2}"
            )
    if len(policy.sleep) != m2:
        raise ValidationError(
            f"sleep map must have {m2} rows (n2=1..{m2}), got {len(policy.sleep)}"
        )
    for n2, row in enumerate(policy.sleep, start=1):
        width = m3 - n2 + 1
        if len(row) != width:
            raise ValidationError(
                f"sleep row n2={n2} must have {width} entries (n3=0..{m3 - n2}),"
                f" got {len(row)}"
            )
        for n3, s in enumerate(row):
            if not m2 - n2 <= s <= m2:
                raise ValidationError(
                    f"sleep entry at (n2={n2}, n3={n3}) is {s},"
                    f" admissible range is {m2 - n2}..{m2}"
                )


def policy_entry_coords(params: ModelParams) -> list[tuple]:
    """Decision coordinates in entry order: ('setup', n3) then ('sleep', n2, n3)."""
    coords: list[tuple] = [("setup", n3) for n3 in range(1, params.m3 + 1)]
    for n2 in range(1, params.m2 + 1):
        coords.extend(("sleep", n2, n3) for n3 in range(0, params.m3 - n2 + 1))
    return coords


def admissible_values(params: ModelParams, coord: tuple) -> range:
    """Admissible entry range for one decision coordinate."""
    if coord[0] == "setup":
        return range(0, params.m2 + 1)
    _, n2, _ = coord
    return range(params.m2 - n2, params.m2 + 1)


def policy_space_size(params: ModelParams) -> int:
    """Number of admissible policies (exact, arbitrary precision)."""
    m2, m3 = params.m2, params.m3
    size = (m2 + 1) ** m3
    for n2 in range(1, m2 + 1):
        size *= (n2 + 1) ** (m3 - n2 + 1)
    return size


def enumerate_policies(params: ModelParams, cap: int = DEFAULT_ENUMERATION_CAP):
    """Yield every admissible policy once, in lexicographic entry order.

    The first policy emitted has every entry at its admissible minimum.
    Raises PolicySpaceTooLarge (carrying the computed size) if the space
    exceeds ``cap``.
    """
    size = policy_space_size(params)
    if size > cap:
        raise PolicySpaceTooLarge(size, cap)
    m2, m3 = params.m2, params.m3
    ranges = [range(0, m2 + 1)] * m3
    row_widths = []
    for n2 in range(1, m2 + 1):
        width = m3 - n2 + 1
        row_widths.append(width)
        ranges.extend([range(m2 - n2, m2 + 1)] * width)
    for combo in itertools.product(*ranges):
        setup = combo[:m3]
        sleep = []
        pos = m3
        for width in row_widths:
            sleep.append(combo[pos : pos + width])
            pos += width
        yield Policy(setup, tuple(sleep))


def min_policy(params: ModelParams) -> Policy:
    """Policy with every entry at its admissible minimum."""
    return next(enumerate_policies(params, cap=max(1, policy_space_size(params))))


def random_policy(params: ModelParams, rng, full_activation: bool = False) -> Policy:
    """Uniform random admissible policy.

    With ``full_activation=True`` the draw is conditioned on
    ``policy.max_wake() == m2`` so that every level of the state space is
    reachable and the chain is irreducible.
    """
    m2, m3 = params.m2, params.m3
    while True:
        setup = tuple(int(rng.integers(0, m2 + 1)) for _ in range(m3))
        sleep = tuple(
            tuple(int(rng.integers(m2 - n2, m2 + 1)) for _ in range(m3 - n2 + 1))
            for n2 in range(1, m2 + 1)
        )
        policy = Policy(setup, sleep)
        if not full_activation or policy.max_wake() == m2:
            return policy
