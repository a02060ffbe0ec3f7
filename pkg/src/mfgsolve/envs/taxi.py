"""Grid-world taxi fleet game with congestion, pickups, and deliveries.

The composite agent state (position, destination, carrying flag, board of
waiting passengers) spans ~2^27 configurations on the default map, so nothing
tabular is ever materialized: transitions are sampled lazily from
``TaxiState`` values, and the population enters only through the per-tile
occupancy (the chance of being stuck in a jam on a tile grows with the share
of taxis on it).  A bijective integer encoding is provided for replay-buffer
storage.

Map format: newline-separated rows over the alphabet {S, H, 1, 2} with
exactly one start tile S, impassable walls H, and region tiles 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

DEFAULT_MAP = """\
111
111
111
HSH
222
222
222"""

ACTIONS = ("W", "U", "D", "L", "R")
_MOVES = {1: (-1, 0), 2: (1, 0), 3: (0, -1), 4: (0, 1)}  # U, D, L, R
JAM_CAP = 0.7
JAM_SLOPE = 10.0
SPAWN_PROB = 0.8
REGION_REWARDS = {1: 1.0, 2: 1.2}


@dataclass(frozen=True, slots=True)
class TaxiState:
    """One taxi: position, destination (0,0 while empty), carrying flag, and
    the board bitmask of region tiles holding a waiting passenger."""

    x: int
    y: int
    dest_x: int
    dest_y: int
    passenger: bool
    board: int


class TaxiMap:
    """Parsed grid: passable tiles, regions, and coordinate/index mappings."""

    def __init__(self, text: str):
        rows = [line for line in text.strip("\n").splitlines()]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ConfigError("taxi map rows must be nonempty and equally long")
        self.num_rows = len(rows)
        self.num_cols = len(rows[0])
        self.grid = rows
        starts = []
        self.region_of: dict[tuple[int, int], int] = {}
        passable = []
        for x, row in enumerate(rows):
            for y, ch in enumerate(row):
                if ch == "S":
                    starts.append((x, y))
                    passable.append((x, y))
                elif ch == "H":
                    continue
                elif ch in ("1", "2"):
                    self.region_of[(x, y)] = int(ch)
                    passable.append((x, y))
                else:
                    raise ConfigError(f"unknown taxi map tile {ch!r} at {(x, y)}")
        if len(starts) != 1:
            raise ConfigError(f"taxi map needs exactly one start tile, got {len(starts)}")
        self.start = starts[0]
        self.passable = tuple(passable)
        self.tile_index = {pos: i for i, pos in enumerate(self.passable)}
        self.region_tiles = {
            r: tuple(p for p in self.passable if self.region_of.get(p) == r)
            for r in (1, 2)
        }
        for r, tiles in self.region_tiles.items():
            if not tiles:
                raise ConfigError(f"taxi map has no tiles in region {r}")
        # Board bits are assigned to region tiles only, in passable order.
        self.board_tiles = tuple(p for p in self.passable if p in self.region_of)
        self.board_bit = {pos: i for i, pos in enumerate(self.board_tiles)}

    def is_passable(self, x: int, y: int) -> bool:
        return (x, y) in self.tile_index

    def board_matrix(self, board: int) -> np.ndarray:
        mat = np.zeros((self.num_rows, self.num_cols), dtype=bool)
        for pos, bit in self.board_bit.items():
            if board >> bit & 1:
                mat[pos] = True
        return mat


class TaxiEnvironment:
    """Sampling interface consumed by the particle simulator and DQN loop.

    The mean-field argument ``mu_t`` is the occupancy distribution over
    passable tiles (length ``mf_size``), which is all the dynamics read.
    """

    def __init__(self, map_text: str = DEFAULT_MAP, horizon: int = 100):
        self.name = "taxi"
        self.map = TaxiMap(map_text)
        self.horizon = horizon
        self.num_actions = len(ACTIONS)
        self.action_labels = ACTIONS
        self.mf_size = len(self.map.passable)
        m = self.map
        self._num_board_states = 1 << len(m.board_tiles)
        # Destination slot 0 = empty taxi; slots 1.. enumerate board tiles.
        self._dest_slots = len(m.board_tiles) + 1
        self.num_states = (
            self._num_board_states * self._dest_slots * len(m.passable)
        )
        self.obs_dim = (
            len(m.passable) + self._dest_slots + 1 + len(m.board_tiles) + 1
        )

    # -- state bookkeeping ------------------------------------------------

    def initial_state(self) -> TaxiState:
        sx, sy = self.map.start
        return TaxiState(sx, sy, 0, 0, False, 0)

    def mf_index(self, state: TaxiState) -> int:
        return self.map.tile_index[(state.x, state.y)]

    def encode(self, state: TaxiState) -> int:
        m = self.map
        pos = m.tile_index[(state.x, state.y)]
        dest = 1 + m.board_bit[(state.dest_x, state.dest_y)] if state.passenger else 0
        return (state.board * self._dest_slots + dest) * len(m.passable) + pos

    def decode(self, code: int) -> TaxiState:
        m = self.map
        code, pos = divmod(code, len(m.passable))
        board, dest = divmod(code, self._dest_slots)
        x, y = m.passable[pos]
        if dest == 0:
            return TaxiState(x, y, 0, 0, False, board)
        dx, dy = m.board_tiles[dest - 1]
        return TaxiState(x, y, dx, dy, True, board)

    def observe(self, t: int, state: TaxiState) -> np.ndarray:
        """Feature vector: one-hot position and destination slot, carrying
        flag, raw board bits, and the current time appended."""
        m = self.map
        obs = np.zeros(self.obs_dim)
        obs[m.tile_index[(state.x, state.y)]] = 1.0
        base = len(m.passable)
        dest = 1 + m.board_bit[(state.dest_x, state.dest_y)] if state.passenger else 0
        obs[base + dest] = 1.0
        base += self._dest_slots
        obs[base] = float(state.passenger)
        base += 1
        for pos, bit in m.board_bit.items():
            if state.board >> bit & 1:
                obs[base + bit] = 1.0
        obs[-1] = float(t)
        return obs

    # -- dynamics ----------------------------------------------------------

    def jam_probability(self, tile_occupancy: float) -> float:
        return min(JAM_CAP, JAM_SLOPE * tile_occupancy)

    def reward_of(self, state: TaxiState, action: int) -> float:
        """Deterministic event reward: pickup or delivery via W, else 0."""
        if ACTIONS[action] != "W":
            return 0.0
        here = (state.x, state.y)
        if state.passenger and here == (state.dest_x, state.dest_y):
            return REGION_REWARDS[self.map.region_of[here]]
        bit = self.map.board_bit.get(here)
        if not state.passenger and bit is not None and state.board >> bit & 1:
            return REGION_REWARDS[self.map.region_of[here]]
        return 0.0

    def sample_step(
        self,
        rng: np.random.Generator,
        t: int,
        state: TaxiState,
        action: int,
        mu_t: np.ndarray,
    ) -> tuple[TaxiState, float]:
        """One transition: resolve the action, then spawn new passengers.

        W picks up / delivers (at most one event per step); movement is
        blocked by walls and the start tile and fails entirely with the jam
        probability of the current tile.  Spawning adds, per region with
        probability 0.8, one passenger on a uniformly random region tile
        that has none waiting.
        """
        m = self.map
        reward = self.reward_of(state, action)
        x, y = state.x, state.y
        dest_x, dest_y, passenger, board = (
            state.dest_x,
            state.dest_y,
            state.passenger,
            state.board,
        )
        if ACTIONS[action] == "W":
            here = (x, y)
            if passenger and here == (dest_x, dest_y):
                passenger, dest_x, dest_y = False, 0, 0
            else:
                bit = m.board_bit.get(here)
                if not passenger and bit is not None and board >> bit & 1:
                    board &= ~(1 << bit)
                    region = m.region_of[here]
                    dest_x, dest_y = m.region_tiles[region][
                        rng.integers(len(m.region_tiles[region]))
                    ]
                    passenger = True
        else:
            jam = self.jam_probability(float(mu_t[m.tile_index[(x, y)]]))
            if rng.random() >= jam:
                dx, dy = _MOVES[action]
                nx, ny = x + dx, y + dy
                if m.is_passable(nx, ny) and (nx, ny) != m.start:
                    x, y = nx, ny
        for region in (1, 2):
            if rng.random() < SPAWN_PROB:
                empty = [
                    pos
                    for pos in m.region_tiles[region]
                    if not board >> m.board_bit[pos] & 1
                ]
                if empty:
                    px, py = empty[rng.integers(len(empty))]
                    board |= 1 << m.board_bit[(px, py)]
        return TaxiState(x, y, dest_x, dest_y, passenger, board), reward


def make_taxi(map_text: str | None = None, horizon: int = 100) -> TaxiEnvironment:
    """Build the taxi game on the given map (default: the 7x3 two-region grid)."""
    return TaxiEnvironment(map_text or DEFAULT_MAP, horizon=horizon)
