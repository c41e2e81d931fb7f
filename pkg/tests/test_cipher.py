import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cipher_audit import cipher

import oracles

# Output of the built-in matrix on a fixed block, frozen from the
# straight-line GF(2) oracle in oracles.py.
DIFFUSE_TEST_BLOCK = bytes((17 * i + 3) % 256 for i in range(16))
DIFFUSE_TEST_EXPECTED = bytes.fromhex("6eaab93097d2c4e67dd31ff588214c5b")


def random_key(rng: np.random.Generator, m: int, rounds: int) -> cipher.CipherKey:
    return cipher.key_from_stream(rng, m, rounds)


# ---------------------------------------------------------------------------
# diffusion matrix
# ---------------------------------------------------------------------------

class TestDiffusionMatrix:
    def test_full_rank(self):
        assert cipher.gf2_rank(cipher.build_diffusion_matrix()) == 16

    def test_inverse_is_identity(self):
        matrix = cipher.build_diffusion_matrix()
        inverse = cipher.gf2_inverse(matrix)
        product = oracles.gf2_matmul(matrix.tolist(), inverse.tolist())
        assert product == np.eye(16, dtype=int).tolist()

    def test_deterministic(self):
        first = cipher.build_diffusion_matrix()
        again = cipher.generate_diffusion_matrix(cipher.DIFFUSION_SEED)
        assert np.array_equal(first, again)

    def test_static_binary_entries(self):
        matrix = cipher.build_diffusion_matrix()
        assert matrix.shape == (16, 16)
        assert set(np.unique(matrix)) <= {0, 1}

    def test_matrix_lines_format(self):
        lines = cipher.matrix_lines()
        assert len(lines) == 16
        assert all(len(line) == 16 and set(line) <= {"0", "1"} for line in lines)

    def test_gf2_inverse_rejects_singular(self):
        singular = np.zeros((4, 4), dtype=np.uint8)
        with pytest.raises(ValueError):
            cipher.gf2_inverse(singular)


# ---------------------------------------------------------------------------
# diffuse
# ---------------------------------------------------------------------------

class TestDiffuse:
    def test_zero_block_fixed(self):
        out = cipher.diffuse(bytes(16), cipher.build_diffusion_matrix())
        assert bytes(out) == bytes(16)

    def test_identity_matrix(self):
        block = bytes(range(16))
        out = cipher.diffuse(block, np.eye(16, dtype=np.uint8))
        assert bytes(out) == block

    def test_against_straight_line_oracle(self):
        matrix = cipher.build_diffusion_matrix()
        out = cipher.diffuse(DIFFUSE_TEST_BLOCK, matrix)
        assert bytes(out) == DIFFUSE_TEST_EXPECTED
        assert oracles.gf2_matvec_bytes(matrix, DIFFUSE_TEST_BLOCK) == DIFFUSE_TEST_EXPECTED

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError, match="16 bytes"):
            cipher.diffuse(bytes(15), cipher.build_diffusion_matrix())

    @given(st.binary(min_size=16, max_size=16), st.binary(min_size=16, max_size=16))
    @settings(max_examples=50)
    def test_linearity(self, u, v):
        matrix = cipher.build_diffusion_matrix()
        xored = bytes(a ^ b for a, b in zip(u, v))
        direct = cipher.diffuse(xored, matrix)
        split = cipher.diffuse(u, matrix) ^ cipher.diffuse(v, matrix)
        assert np.array_equal(direct, split)

    def test_bulk_matches_per_block(self):
        rng = np.random.default_rng(11)
        image = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        matrix = cipher.build_diffusion_matrix()
        bulk = cipher._diffuse_image(image, matrix).reshape(-1, 16)
        for i, block in enumerate(image.reshape(-1, 16)):
            assert np.array_equal(bulk[i], cipher.diffuse(block, matrix))


# ---------------------------------------------------------------------------
# cat map
# ---------------------------------------------------------------------------

class TestCatMap:
    def test_identity_parameters(self):
        key = cipher.CipherKey(0, 0, 0, 0, rounds=1)
        for x, y in ((0, 0), (1, 2), (3, 3)):
            assert cipher.cat_map_point(x, y, key, 4) == (x, y)

    def test_direct_evaluation_example(self):
        key = cipher.CipherKey(1, 1, 0, 0, rounds=1)
        assert cipher.cat_map_point(1, 0, key, 4) == (1, 1)

    def test_out_of_range_rejected(self):
        key = cipher.CipherKey(1, 1, 0, 0, rounds=1)
        with pytest.raises(ValueError):
            cipher.cat_map_point(4, 0, key, 4)

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
    @settings(max_examples=30)
    def test_bijective_on_8x8(self, a, b, rx, ry):
        key = cipher.CipherKey(a, b, rx, ry, rounds=1)
        table = oracles.cat_map_table(a, b, rx, ry, 8)
        assert set(table.values()) == {(x, y) for x in range(8) for y in range(8)}
        for (x, y), target in table.items():
            assert cipher.cat_map_point(x, y, key, 8) == target

    def test_grids_match_pointwise(self):
        key = cipher.CipherKey(5, 9, 2, 7, rounds=1)
        xp, yp = cipher._cat_map_grids(*key.params(), 16)
        for x in range(16):
            for y in range(16):
                assert (xp[x, y], yp[x, y]) == cipher.cat_map_point(x, y, key, 16)


# ---------------------------------------------------------------------------
# bit planes and permutation layer
# ---------------------------------------------------------------------------

class TestBitPermutation:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25)
    def test_bitplane_roundtrip(self, seed):
        rng = np.random.default_rng(seed)
        image = rng.integers(0, 256, (8, 8), dtype=np.uint8)
        planes = cipher.to_bitplanes(image)
        assert planes.shape == (8, 8, 8)
        assert np.array_equal(cipher.from_bitplanes(planes), image)

    def test_plane_k_holds_bit_k(self):
        image = np.full((4, 4), 0b10110010, dtype=np.uint8)
        planes = cipher.to_bitplanes(image)
        for k in range(8):
            assert np.all(planes[k] == ((0b10110010 >> k) & 1))

    def test_identity_parameters_leave_planes(self):
        key = cipher.CipherKey(0, 0, 0, 0, rounds=1)
        rng = np.random.default_rng(3)
        planes = cipher.to_bitplanes(rng.integers(0, 256, (8, 8), dtype=np.uint8))
        assert np.array_equal(cipher.permute_bits(planes, key), planes)

    def test_single_bit_follows_cat_map(self):
        key = cipher.CipherKey(1, 1, 0, 0, rounds=1)
        planes = np.zeros((8, 4, 4), dtype=np.uint8)
        planes[0, 1, 0] = 1
        out = cipher.permute_bits(planes, key)
        assert out[0, 1, 1] == 1
        assert out.sum() == 1

    @given(st.integers(0, 2**32 - 1), st.sampled_from([4, 8, 16]))
    @settings(max_examples=25)
    def test_permute_roundtrip(self, seed, m):
        rng = np.random.default_rng(seed)
        key = random_key(rng, m, 1)
        planes = cipher.to_bitplanes(rng.integers(0, 256, (m, m), dtype=np.uint8))
        permuted = cipher.permute_bits(planes, key)
        assert np.array_equal(cipher.inverse_permute_bits(permuted, key), planes)

    def test_byte_route_equals_plane_route(self):
        rng = np.random.default_rng(9)
        for m in (8, 16):
            key = random_key(rng, m, 1)
            image = rng.integers(0, 256, (m, m), dtype=np.uint8)
            via_planes = cipher.from_bitplanes(cipher.permute_bits(cipher.to_bitplanes(image), key))
            assert np.array_equal(cipher._cat_map_bytes(image, key), via_planes)

    def test_scramble_roundtrip_and_permutation(self):
        rng = np.random.default_rng(5)
        image = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        scrambled = cipher.scramble_bytes(image)
        assert np.array_equal(cipher.scramble_bytes(scrambled, inverse=True), image)
        assert np.array_equal(np.sort(scrambled.reshape(-1)), np.sort(image.reshape(-1)))

    def test_rotation_roundtrip_preserves_bit_count(self):
        rng = np.random.default_rng(6)
        image = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        rotated = cipher.rotate_bits(image)
        assert np.array_equal(cipher.rotate_bits(rotated, inverse=True), image)
        assert np.bitwise_count(rotated).sum() == np.bitwise_count(image).sum()


# ---------------------------------------------------------------------------
# keys
# ---------------------------------------------------------------------------

class TestKeys:
    @pytest.mark.parametrize(
        "m, q", [(4, 2), (16, 4), (64, 6), (196, 8), (256, 8), (300, 9), (512, 9)]
    )
    def test_param_bits(self, m, q):
        assert cipher.param_bits(m) == q
        assert cipher.key_bits(m) == 4 * q

    def test_hex_roundtrip(self):
        key = cipher.CipherKey(a=0x2A, b=0x01, rx=0xFF, ry=0x80, rounds=6)
        text = cipher.key_to_hex(key, 256)
        assert len(text) == 8  # 32 bits
        assert cipher.key_from_hex(text, 256, 6) == key

    def test_serialized_length_is_4q_bits(self):
        for m in (4, 16, 64, 256, 512):
            key = cipher.derive_trial_key(2, 1, m, 1)
            assert len(cipher.key_to_hex(key, m)) * 4 == cipher.key_bits(m)

    def test_wrong_hex_length_rejected(self):
        with pytest.raises(ValueError, match="hex digits"):
            cipher.key_from_hex("abcd", 256, 6)

    def test_oversized_parameter_rejected(self):
        key = cipher.CipherKey(a=256, b=0, rx=0, ry=0, rounds=1)
        with pytest.raises(ValueError, match="does not fit"):
            cipher.key_to_hex(key, 256)

    def test_invalid_rounds_rejected(self):
        with pytest.raises(ValueError):
            cipher.CipherKey(1, 1, 1, 1, rounds=0)

    def test_derive_trial_key_deterministic(self):
        first = cipher.derive_trial_key(42, 7, 256, 6)
        again = cipher.derive_trial_key(42, 7, 256, 6)
        assert first == again
        assert cipher.derive_trial_key(42, 8, 256, 6) != first

    def test_derived_parameters_in_range(self):
        for w in range(1000):
            key = cipher.derive_trial_key(3, w, 256, 6)
            assert all(0 <= p <= 255 for p in key.params())

    def test_derived_parameters_uniform(self):
        # chi-square of each parameter over 1e5 draws, 256 bins, M=256
        draws = np.array(
            [cipher.derive_trial_key(0, w, 256, 6).params() for w in range(100_000)]
        )
        expected = draws.shape[0] / 256
        for column in range(4):
            counts = np.bincount(draws[:, column], minlength=256)
            chi2 = float(((counts - expected) ** 2 / expected).sum())
            assert chi2 <= 293.0

    def test_stream_matches_derive(self):
        rng = cipher.trial_stream(9, 4, 64, 2)
        assert cipher.key_from_stream(rng, 64, 2) == cipher.derive_trial_key(9, 4, 64, 2)


# ---------------------------------------------------------------------------
# encrypt / decrypt
# ---------------------------------------------------------------------------

class TestCipherRoundtrip:
    @given(st.integers(0, 2**32 - 1), st.sampled_from([4, 8, 16, 32]), st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_roundtrip(self, seed, m, rounds):
        rng = np.random.default_rng(seed)
        image = rng.integers(0, 256, (m, m), dtype=np.uint8)
        key = random_key(rng, m, rounds)
        assert np.array_equal(cipher.decrypt(cipher.encrypt(image, key), key), image)

    def test_zero_image_is_fixed_point(self):
        zero = np.zeros((4, 4), dtype=np.uint8)
        for w in range(5):
            key = cipher.derive_trial_key(1, w, 4, 1)
            assert np.array_equal(cipher.encrypt(zero, key), zero)
            assert np.array_equal(cipher.decrypt(zero, key), zero)

    def test_single_round_matches_hand_sequenced_trace(self):
        m = 16
        key = cipher.CipherKey(a=3, b=7, rx=5, ry=11, rounds=1)
        image = np.zeros((m, m), dtype=np.uint8)
        image[2, 9] = 1
        sx, sy = cipher._scramble_grids(m)
        pairs = [[(int(sx[x, y]), int(sy[x, y])) for y in range(m)] for x in range(m)]
        expected = oracles.encrypt_one_round_trace(
            image.tolist(), key, cipher.build_diffusion_matrix().tolist(),
            pairs, cipher._rotation_grid(m).tolist(),
        )
        assert np.array_equal(cipher.encrypt(image, key), expected)

    def test_encryption_is_linear_over_gf2(self):
        rng = np.random.default_rng(8)
        key = random_key(rng, 16, 3)
        u = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        v = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        assert np.array_equal(
            cipher.encrypt(u ^ v, key), cipher.encrypt(u, key) ^ cipher.encrypt(v, key)
        )

    def test_input_not_mutated(self):
        rng = np.random.default_rng(10)
        image = rng.integers(0, 256, (8, 8), dtype=np.uint8)
        copy = image.copy()
        key = random_key(rng, 8, 2)
        cipher.encrypt(image, key)
        assert np.array_equal(image, copy)

    @pytest.mark.parametrize("shape", [(5, 5), (8, 12), (2, 2)])
    def test_bad_dimensions_rejected(self, shape):
        key = cipher.CipherKey(1, 1, 1, 1, rounds=1)
        with pytest.raises(cipher.DimensionError):
            cipher.encrypt(np.zeros(shape, dtype=np.uint8), key)

    def test_wrong_dtype_rejected(self):
        key = cipher.CipherKey(1, 1, 1, 1, rounds=1)
        with pytest.raises(cipher.DimensionError):
            cipher.encrypt(np.zeros((8, 8), dtype=np.int32), key)
