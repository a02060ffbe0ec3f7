import numpy as np
import pytest

from mfgsolve.envs.taxi import TaxiState, make_taxi
from mfgsolve.errors import ConfigError


@pytest.fixture(scope="module")
def taxi():
    return make_taxi()


def zero_occupancy(taxi):
    return np.zeros(taxi.mf_size)


class TestMapParsing:
    def test_default_map(self, taxi):
        assert taxi.map.start == (3, 1)
        assert len(taxi.map.passable) == 19
        assert len(taxi.map.region_tiles[1]) == 9
        assert len(taxi.map.region_tiles[2]) == 9

    def test_missing_start(self):
        with pytest.raises(ConfigError):
            make_taxi("11\n22")

    def test_unknown_tile(self):
        with pytest.raises(ConfigError):
            make_taxi("1S\n2X")

    def test_two_starts(self):
        with pytest.raises(ConfigError):
            make_taxi("SS\n12")


class TestJam:
    def test_linear_region(self, taxi):
        assert taxi.jam_probability(0.05) == pytest.approx(0.5)

    def test_cap(self, taxi):
        assert taxi.jam_probability(0.2) == pytest.approx(0.7)


class TestMovement:
    def test_wait_never_moves(self, taxi):
        rng = np.random.default_rng(0)
        state = taxi.initial_state()
        for _ in range(20):
            nxt, _ = taxi.sample_step(rng, 0, state, 0, zero_occupancy(taxi))
            assert (nxt.x, nxt.y) == (state.x, state.y)
            state = nxt

    def test_wall_blocks(self, taxi):
        rng = np.random.default_rng(1)
        start = taxi.initial_state()
        nxt, _ = taxi.sample_step(rng, 0, start, 3, zero_occupancy(taxi))  # L into H
        assert (nxt.x, nxt.y) == (start.x, start.y)

    def test_cannot_reenter_start(self, taxi):
        rng = np.random.default_rng(2)
        above = TaxiState(2, 1, 0, 0, False, 0)
        nxt, _ = taxi.sample_step(rng, 0, above, 2, zero_occupancy(taxi))  # D toward S
        assert (nxt.x, nxt.y) == (2, 1)

    def test_free_move_without_jam(self, taxi):
        rng = np.random.default_rng(3)
        start = taxi.initial_state()
        nxt, _ = taxi.sample_step(rng, 0, start, 1, zero_occupancy(taxi))  # U
        assert (nxt.x, nxt.y) == (2, 1)

    def test_full_jam_blocks_motion(self, taxi):
        rng = np.random.default_rng(4)
        occ = zero_occupancy(taxi)
        occ[taxi.map.tile_index[(3, 1)]] = 0.07  # jam probabilitycapped at 0.7
        moved = 0
        for _ in range(400):
            nxt, _ = taxi.sample_step(rng, 0, taxi.initial_state(), 1, occ)
            moved += (nxt.x, nxt.y) != (3, 1)
        assert 0.2 < moved / 400 < 0.4  # ~30% move through a 0.7 jam


class TestPassengers:
    def test_pickup_grants_region_reward_and_destination(self, taxi):
        rng = np.random.default_rng(5)
        tile = (0, 0)  # region 1
        bit = taxi.map.board_bit[tile]
        state = TaxiState(0, 0, 0, 0, False, 1 << bit)
        assert taxi.reward_of(state, 0) == pytest.approx(1.0)
        nxt, reward = taxi.sample_step(rng, 0, state, 0, zero_occupancy(taxi))
        assert reward == pytest.approx(1.0)
        assert nxt.passenger
        assert not nxt.board >> bit & 1
        assert taxi.map.region_of[(nxt.dest_x, nxt.dest_y)] == 1

    def test_delivery_in_region_two(self, taxi):
        rng = np.random.default_rng(6)
        state = TaxiState(5, 2, 5, 2, True, 0)
        assert taxi.reward_of(state, 0) == pytest.approx(1.2)
        nxt, reward = taxi.sample_step(rng, 0, state, 0, zero_occupancy(taxi))
        assert reward == pytest.approx(1.2)
        assert not nxt.passenger
        assert (nxt.dest_x, nxt.dest_y) == (0, 0)

    def test_movement_earns_nothing(self, taxi):
        state = TaxiState(0, 0, 0, 0, False, 0)
        for action in range(1, 5):
            assert taxi.reward_of(state, action) == 0.0

    def test_spawn_rate(self, taxi):
        rng = np.random.default_rng(7)
        spawned = 0
        trials = 500
        for _ in range(trials):
            nxt, _ = taxi.sample_step(
                rng, 0, taxi.initial_state(), 0, zero_occupancy(taxi)
            )
            region1_bits = [
                taxi.map.board_bit[p] for p in taxi.map.region_tiles[1]
            ]
            spawned += any(nxt.board >> b & 1 for b in region1_bits)
        assert 0.72 < spawned / trials < 0.88  # spawn probability 0.8 per region

    def test_initial_board_empty(self, taxi):
        s = taxi.initial_state()
        assert s.board == 0 and not s.passenger


class TestEncoding:
    def test_roundtrip_on_random_walk(self, taxi):
        rng = np.random.default_rng(8)
        state = taxi.initial_state()
        occ = np.full(taxi.mf_size, 1.0 / taxi.mf_size)
        seen = set()
        for _ in range(3000):
            code = taxi.encode(state)
            assert 0 <= code < taxi.num_states
            assert taxi.decode(code) == state
            seen.add(code)
            state, _ = taxi.sample_step(rng, 0, state, int(rng.integers(5)), occ)
        assert len(seen) > 50  # the walk reaches a nontrivial set of states

    def test_observation_layout(self, taxi):
        obs = taxi.observe(7, taxi.initial_state())
        assert obs.shape == (taxi.obs_dim,)
        assert obs[-1] == 7.0
        assert obs.sum() == pytest.approx(7.0 + 2.0)  # pos one-hot + dest slot + time
