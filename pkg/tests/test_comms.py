"""Neighbor selection, map codecs, channel noise, and message assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapswarm import DownsampleCodec, IdentityCodec, make_message, select_neighbors
from mapswarm.comms import inject_noise, make_codec, virtual_position
from mapswarm.grid import binarize
from test_agent import make_state


class TestVirtualPosition:
    def test_quadrant_corner_examples(self):
        # The stand-in sits at the corner of the diagonally opposite quadrant.
        np.testing.assert_array_equal(
            virtual_position(np.array([100.0, 100.0]), 512), [511.0, 511.0]
        )
        np.testing.assert_array_equal(
            virtual_position(np.array([400.0, 100.0]), 512), [0.0, 511.0]
        )
        np.testing.assert_array_equal(
            virtual_position(np.array([100.0, 400.0]), 512), [511.0, 0.0]
        )
        np.testing.assert_array_equal(
            virtual_position(np.array([400.0, 400.0]), 512), [0.0, 0.0]
        )

    def test_exact_center_counts_as_low_side(self):
        np.testing.assert_array_equal(
            virtual_position(np.array([256.0, 256.0]), 512), [511.0, 511.0]
        )


def place_agents(positions, size=512):
    agents = []
    for i, pos in enumerate(positions):
        s = make_state(pos, size=64)
        s.agent_id = i
        agents.append(s)
    return agents


class TestSelectNeighbors:
    def test_no_one_in_range_all_virtual(self):
        agents = place_agents([(256.0, 256.0), (500.0, 500.0)])
        roster = select_neighbors(agents[0], agents, count=3, radius=30.0, size=512)
        assert len(roster) == 3
        assert all(r.virtual for r in roster)
        np.testing.assert_array_equal(roster[0].position, [511.0, 511.0])
        # Virtual records stand still and aim at the selecting agent.
        np.testing.assert_array_equal(roster[0].velocity, [0.0, 0.0])
        np.testing.assert_array_equal(roster[0].target, agents[0].position)

    def test_two_real_one_virtual(self):
        agents = place_agents(
            [(256.0, 256.0), (260.0, 256.0), (256.0, 266.0), (400.0, 400.0)]
        )
        roster = select_neighbors(agents[0], agents, count=3, radius=30.0, size=512)
        assert [r.agent_id for r in roster] == [1, 2, None]
        assert [r.virtual for r in roster] == [False, False, True]

    def test_more_in_range_than_slots_keeps_nearest(self):
        agents = place_agents(
            [(256.0, 256.0), (258.0, 256.0), (261.0, 256.0), (256.0, 265.0),
             (256.0, 270.0), (270.0, 256.0)]
        )
        roster = select_neighbors(agents[0], agents, count=3, radius=30.0, size=512)
        assert [r.agent_id for r in roster] == [1, 2, 3]

    def test_excludes_self_and_out_of_range(self):
        agents = place_agents([(256.0, 256.0), (256.0, 287.0)])  # 31 px apart
        roster = select_neighbors(agents[0], agents, count=3, radius=30.0, size=512)
        assert all(r.virtual for r in roster)

    def test_in_range_boundary_inclusive(self):
        agents = place_agents([(256.0, 256.0), (256.0, 286.0)])  # exactly 30 px
        roster = select_neighbors(agents[0], agents, count=3, radius=30.0, size=512)
        assert roster[0].agent_id == 1

    def test_distance_ties_resolve_to_lower_id(self):
        agents = place_agents([(256.0, 256.0), (266.0, 256.0), (246.0, 256.0)])
        roster = select_neighbors(agents[0], agents, count=1, radius=30.0, size=512)
        assert roster[0].agent_id == 1

    @given(
        st.lists(
            st.tuples(st.floats(1, 510), st.floats(1, 510)),
            min_size=1, max_size=8,
        ),
        st.integers(1, 5),
    )
    @settings(max_examples=60, deadline=None)
    def test_roster_always_has_exactly_m_entries(self, positions, count):
        agents = place_agents([(256.0, 256.0)] + positions)
        roster = select_neighbors(agents[0], agents, count=count, radius=30.0, size=512)
        assert len(roster) == count
        real = [r for r in roster if not r.virtual]
        # Real entries are sorted by distance and all within range.
        dists = [float(np.hypot(*(r.position - agents[0].position))) for r in real]
        assert dists == sorted(dists)
        assert all(d <= 30.0 for d in dists)

    def test_matches_brute_force_sort(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 10))
            pts = rng.uniform(0, 511, size=(n, 2))
            agents = place_agents([tuple(p) for p in pts])
            roster = select_neighbors(agents[0], agents, count=3, radius=100.0, size=512)
            want = sorted(
                (
                    (float(np.hypot(*(a.position - agents[0].position))), a.agent_id)
                    for a in agents[1:]
                    if float(np.hypot(*(a.position - agents[0].position))) <= 100.0
                ),
            )[:3]
            got_real = [r.agent_id for r in roster if not r.virtual]
            assert got_real == [aid for _, aid in want]


class TestCodecs:
    def test_identity_roundtrip_exact(self, rng):
        codec = IdentityCodec(size=32)
        grid = (rng.random((32, 32)) < 0.3).astype(np.uint8)
        latent = codec.encode(grid)
        np.testing.assert_array_equal(codec.decode(latent), grid.astype(np.float32))

    def test_downsample_latent_is_block_means(self):
        codec = DownsampleCodec(size=8, factor=2)
        grid = np.zeros((8, 8), dtype=np.uint8)
        grid[0, 0] = 1  # one set cell in the first 2x2 block
        latent = codec.encode(grid)
        assert latent.shape == (16,)  # flat vector of 4x4 block means
        assert latent[0] == pytest.approx(0.25)
        assert np.all(latent[1:] == 0.0)

    def test_checkerboard_blocks_decode_to_half_then_binarize_to_one(self):
        # A 2x2-block downsample of a checkerboard averages every block to
        # 0.5; decoding spreads 0.5 everywhere and binarization (ties up)
        # turns the whole map into obstacle.
        size = 8
        yy, xx = np.mgrid[0:size, 0:size]
        checker = ((yy + xx) % 2).astype(np.uint8)
        codec = DownsampleCodec(size=size, factor=2)
        decoded = codec.decode(codec.encode(checker))
        np.testing.assert_allclose(decoded, 0.5)
        assert binarize(decoded).all()

    def test_decode_upsamples_nearest_neighbor(self):
        codec = DownsampleCodec(size=4, factor=2)
        grid = np.zeros((4, 4), dtype=np.uint8)
        grid[:2, :2] = 1
        decoded = codec.decode(codec.encode(grid))
        np.testing.assert_allclose(decoded[:2, :2], 1.0)
        np.testing.assert_allclose(decoded[2:, 2:], 0.0)

    def test_feature_scale_roundtrip_without_noise(self, rng):
        # Compressing the latent range and expanding it back is lossless
        # as long as the channel adds nothing.
        grid = (rng.random((32, 32)) < 0.3).astype(np.uint8)
        plain = DownsampleCodec(size=32, factor=4)
        scaled = DownsampleCodec(size=32, factor=4, feature_scale=1 / 32)
        np.testing.assert_allclose(
            scaled.decode(scaled.encode(grid)),
            plain.decode(plain.encode(grid)),
            atol=1e-5,
        )

    def test_feature_scale_amplifies_channel_noise(self):
        # The same absolute channel disturbance moves decoded values 32x
        # farther when the latent range was compressed by 1/32.
        grid = np.zeros((32, 32), dtype=np.uint8)
        plain = DownsampleCodec(size=32, factor=4)
        scaled = DownsampleCodec(size=32, factor=4, feature_scale=1 / 32)
        bump = np.float32(0.004)
        d_plain = plain.decode(plain.encode(grid) + bump).max()
        d_scaled = scaled.decode(scaled.encode(grid) + bump).max()
        assert d_scaled == pytest.approx(32 * d_plain, rel=1e-4)

    def test_feature_scale_validation(self):
        with pytest.raises(ValueError):
            DownsampleCodec(size=32, factor=4, feature_scale=0.0)
        with pytest.raises(ValueError):
            DownsampleCodec(size=32, factor=4, feature_scale=1.5)

    def test_factor_must_divide_size(self):
        with pytest.raises(ValueError):
            DownsampleCodec(size=10, factor=4)

    def test_make_codec_dispatch(self):
        assert isinstance(make_codec("identity", 32), IdentityCodec)
        codec = make_codec("downsample", 32, factor=2, feature_scale=0.5)
        assert isinstance(codec, DownsampleCodec)
        assert codec.factor == 2 and codec.feature_scale == 0.5
        with pytest.raises(ValueError):
            make_codec("wavelet", 32)


class TestChannelNoise:
    def test_sigma_zero_is_identity(self, rng):
        latent = rng.random((16, 16)).astype(np.float32)
        np.testing.assert_array_equal(inject_noise(latent, 0.0, rng), latent)

    def test_noise_variance_matches_sigma(self):
        # sigma = 0.004 -> variance 1.6e-5, checked within 10% over 1e5 draws.
        rng = np.random.default_rng(42)
        latent = np.zeros(100_000, dtype=np.float32)
        noisy = inject_noise(latent, 0.004, rng)
        assert float(noisy.var()) == pytest.approx(1.6e-5, rel=0.10)
        assert abs(float(noisy.mean())) < 1e-4

    def test_elementwise_independent_draws(self):
        rng = np.random.default_rng(0)
        noisy = inject_noise(np.zeros(1000, dtype=np.float32), 0.1, rng)
        assert len(np.unique(noisy)) > 990


class TestMakeMessage:
    def test_carries_self_maps_and_pose(self, rng):
        state = make_state((10.0, 20.0), velocity=(1.0, -1.0), size=32)
        state.target = np.array([30.0, 5.0])
        state.obstacles_self[4, 4] = 1
        state.explored_self[4, 4] = 1
        state.explored_self[5, 5] = 1
        # Fused maps differ from self maps; the message must carry the
        # self-sensed ones.
        state.obstacles_fused[10, 10] = 1
        state.explored_fused[10, 10] = 1
        msg = make_message(state, IdentityCodec(size=32))
        np.testing.assert_array_equal(msg.position, [10.0, 20.0])
        np.testing.assert_array_equal(msg.velocity, [1.0, -1.0])
        np.testing.assert_array_equal(msg.target, [30.0, 5.0])
        decoded_obs = binarize(msg_decode(msg.obstacle_latent, 32))
        assert decoded_obs[4, 4] == 1 and decoded_obs[10, 10] == 0
        decoded_exp = binarize(msg_decode(msg.explored_latent, 32))
        assert decoded_exp[5, 5] == 1 and decoded_exp[10, 10] == 0

    def test_pose_snapshot_not_aliased(self):
        state = make_state((10.0, 20.0), size=32)
        msg = make_message(state, IdentityCodec(size=32))
        state.position[0] = 99.0
        assert msg.position[0] == 10.0


def msg_decode(latent: np.ndarray, size: int) -> np.ndarray:
    return IdentityCodec(size=size).decode(latent)
