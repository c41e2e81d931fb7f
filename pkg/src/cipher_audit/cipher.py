"""Round cipher under audit: static binary diffusion + key-dependent bit permutation.

One round encrypts an M x M grayscale image (M a multiple of 4) in two layers:

1. Diffusion: the flattened bytes are cut into consecutive 16-byte blocks and
   each block is multiplied by a fixed invertible binary matrix over GF(2)
   (output byte j = XOR of the input bytes selected by matrix row j).

2. Bit permutation: every bit moves to a new position, in three stages that
   are each bijections of the 8*M*M bit positions:
     a. the key-dependent affine cat map relocates every grid cell (x, y); it
        acts identically on all 8 bit-planes, i.e. it permutes whole bytes;
     b. a static seeded position scramble relocates bytes again, breaking the
        algebraic structure of the affine map (without it, keys with even
        parameters confine differences to row/column cosets and the avalanche
        effect is never reached);
     c. a static seeded bit rotation inside each byte moves bits between
        planes (the per-plane cat map alone never moves a bit out of its
        plane, capping a one-bit avalanche at 12.5% of the image).

Only stage (a) is keyed; the cipher is a key-selected linear map over GF(2),
so the all-zero image is a fixed point for every key.  The experiments module
quantifies the consequences.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

BLOCK_BYTES = 16

# Seeds of the built-in static components (key-independent, fixed for life).
DIFFUSION_SEED = 0xD1FF5EED
SCRAMBLE_SEED = 0x5C2A3B1E
ROTATION_SEED = 0xB17F1E1D


class DimensionError(ValueError):
    """Image dimensions that the cipher does not support."""


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

def validate_image(image: np.ndarray) -> int:
    """Check an image array and return its side length M.

    Valid images are square 2-D uint8 arrays with M >= 4 and M % 4 == 0, so
    that M*M is divisible by the 16-byte diffusion block.
    """
    if not isinstance(image, np.ndarray) or image.ndim != 2:
        raise DimensionError("image must be a 2-D array of bytes")
    m, n = image.shape
    if m != n:
        raise DimensionError(f"image must be square, got {m}x{n}")
    if m < 4 or m % 4 != 0:
        raise DimensionError(f"side length must be a multiple of 4 and >= 4, got {m}")
    if image.dtype != np.uint8:
        raise DimensionError(f"image dtype must be uint8, got {image.dtype}")
    return m


# ---------------------------------------------------------------------------
# keys
# ---------------------------------------------------------------------------

def param_bits(m: int) -> int:
    """Bit width q = ceil(log2(M)) of one cat-map parameter."""
    if m < 2:
        raise ValueError(f"side length must be >= 2, got {m}")
    return (m - 1).bit_length()


def key_bits(m: int) -> int:
    """Total permutation-key length in bits: 4*q."""
    return 4 * param_bits(m)


@dataclass(frozen=True)
class CipherKey:
    """Cat-map parameters (a, b, rx, ry) plus the round count.

    Each parameter is a q-bit unsigned integer, q = ceil(log2(M)); the cat
    map reduces it modulo M when applied.
    """

    a: int
    b: int
    rx: int
    ry: int
    rounds: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "rx", "ry"):
            if getattr(self, name) < 0:
                raise ValueError(f"key parameter {name} must be non-negative")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")

    def params(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.rx, self.ry)


def key_to_hex(key: CipherKey, m: int) -> str:
    """Serialize a || b || rx || ry big-endian, each padded to q bits.

    4*q bits is always a whole number of hex digits (exactly q of them).
    """
    q = param_bits(m)
    packed = 0
    for value in key.params():
        if value >> q:
            raise ValueError(f"key parameter {value} does not fit in {q} bits (M={m})")
        packed = (packed << q) | value
    return format(packed, f"0{q}x")


def key_from_hex(text: str, m: int, rounds: int) -> CipherKey:
    """Parse the hex serialization produced by :func:`key_to_hex`."""
    q = param_bits(m)
    if len(text) != q:
        raise ValueError(
            f"key must be exactly {q} hex digits ({4 * q} bits) for M={m}, "
            f"got {len(text)} digits"
        )
    packed = int(text, 16)
    mask = (1 << q) - 1
    ry = packed & mask
    rx = (packed >> q) & mask
    b = (packed >> (2 * q)) & mask
    a = (packed >> (3 * q)) & mask
    return CipherKey(a=a, b=b, rx=rx, ry=ry, rounds=rounds)


def trial_stream(master_seed: int, trial_index: int, m: int, rounds: int) -> np.random.Generator:
    """Deterministic per-trial random stream, independent of execution order.

    Keys and every other per-trial draw (pixel positions, bit flips) come
    from this one stream, so experiment results are replayable from
    (master_seed, trial_index, M, rounds) alone regardless of worker count
    or scheduling.
    """
    if trial_index < 0:
        raise ValueError("trial_index must be >= 0")
    return np.random.default_rng((master_seed, trial_index, m, rounds))


def key_from_stream(rng: np.random.Generator, m: int, rounds: int) -> CipherKey:
    """Draw the four q-bit parameters from an already-seeded stream."""
    q = param_bits(m)
    a, b, rx, ry = (int(v) for v in rng.integers(0, 1 << q, size=4))
    return CipherKey(a=a, b=b, rx=rx, ry=ry, rounds=rounds)


def derive_trial_key(master_seed: int, trial_index: int, m: int, rounds: int) -> CipherKey:
    """Expand (master_seed, trial_index) into a uniform random key for size M."""
    return key_from_stream(trial_stream(master_seed, trial_index, m, rounds), m, rounds)


# ---------------------------------------------------------------------------
# GF(2) linear algebra
# ---------------------------------------------------------------------------

def gf2_rank(matrix: np.ndarray) -> int:
    """Rank of a 0/1 matrix over GF(2) by Gaussian elimination."""
    work = (np.asarray(matrix, dtype=np.uint8) & 1).copy()
    rows, cols = work.shape
    rank = 0
    for col in range(cols):
        pivots = np.nonzero(work[rank:, col])[0]
        if pivots.size == 0:
            continue
        pivot = rank + int(pivots[0])
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        hits = np.nonzero(work[:, col])[0]
        hits = hits[hits != rank]
        work[hits] ^= work[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_inverse(matrix: np.ndarray) -> np.ndarray:
    """Inverse of a square 0/1 matrix over GF(2).

    Raises ValueError if the matrix is singular.
    """
    a = (np.asarray(matrix, dtype=np.uint8) & 1).copy()
    n, m = a.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {n}x{m}")
    aug = np.hstack([a, np.eye(n, dtype=np.uint8)])
    for col in range(n):
        pivots = np.nonzero(aug[col:, col])[0]
        if pivots.size == 0:
            raise ValueError("matrix is singular over GF(2)")
        pivot = col + int(pivots[0])
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        hits = np.nonzero(aug[:, col])[0]
        hits = hits[hits != col]
        aug[hits] ^= aug[col]
    return aug[:, n:].copy()


# ---------------------------------------------------------------------------
# static diffusion matrix
# ---------------------------------------------------------------------------

def generate_diffusion_matrix(seed: int) -> np.ndarray:
    """Build the complement-of-permutation diffusion matrix from a seed.

    The matrix is A = J xor P, where J is all-ones and P is a seeded random
    16x16 permutation matrix: output byte j is the XOR of every input byte
    except one.  A is invertible by construction (A^-1 = J xor P^T), and
    every column of A and of A^-1 has weight 15 -- the densest a 16x16
    binary matrix can be in both directions at once.  Maximal two-way
    density is what lets a single flipped bit reach half the image within
    six rounds even at 512x512, in the decryption direction as well.
    """
    perm = np.random.default_rng(seed).permutation(BLOCK_BYTES)
    matrix = np.ones((BLOCK_BYTES, BLOCK_BYTES), dtype=np.uint8)
    matrix[perm, np.arange(BLOCK_BYTES)] ^= 1
    if gf2_rank(matrix) != BLOCK_BYTES:  # structurally impossible
        raise AssertionError("diffusion matrix construction lost full rank")
    return matrix


@functools.lru_cache(maxsize=1)
def build_diffusion_matrix() -> np.ndarray:
    """The single static diffusion matrix (identical for every key and round)."""
    return generate_diffusion_matrix(DIFFUSION_SEED)


@functools.lru_cache(maxsize=1)
def _diffusion_inverse() -> np.ndarray:
    return gf2_inverse(build_diffusion_matrix())


def matrix_lines(matrix: np.ndarray | None = None) -> list[str]:
    """Render a binary matrix as 16 lines of 16 '0'/'1' characters."""
    if matrix is None:
        matrix = build_diffusion_matrix()
    return ["".join("1" if bit else "0" for bit in row) for row in matrix]


# ---------------------------------------------------------------------------
# diffusion layer
# ---------------------------------------------------------------------------

def diffuse(block: np.ndarray | bytes, matrix: np.ndarray) -> np.ndarray:
    """Multiply one 16-byte block by a binary matrix over GF(2).

    Output byte j is the XOR of all input bytes i with matrix[j][i] == 1.
    """
    if isinstance(block, (bytes, bytearray)):
        data = np.frombuffer(bytes(block), dtype=np.uint8)
    else:
        data = np.asarray(block, dtype=np.uint8)
    if data.shape != (BLOCK_BYTES,):
        raise ValueError(f"block must be exactly {BLOCK_BYTES} bytes, got {data.size}")
    return _diffuse_rows(data[np.newaxis, :], matrix)[0]


def _diffuse_rows(blocks: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Apply the binary matrix to every row of an (n, 16) byte array."""
    out = np.zeros_like(blocks)
    for j in range(BLOCK_BYTES):
        cols = np.nonzero(matrix[j])[0]
        if cols.size:
            out[:, j] = np.bitwise_xor.reduce(blocks[:, cols], axis=1)
    return out


def _diffuse_image(image: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Diffuse an image's bytes row-major in consecutive 16-byte blocks."""
    m = image.shape[0]
    blocks = image.reshape(-1, BLOCK_BYTES)
    return _diffuse_rows(blocks, matrix).reshape(m, m)


# ---------------------------------------------------------------------------
# bit-permutation layer
# ---------------------------------------------------------------------------

def cat_map_point(x: int, y: int, key: CipherKey, m: int) -> tuple[int, int]:
    """Affine cat map on the M x M grid.

    x' = (x + a*y + rx) mod M,  y' = (b*x + (a*b + 1)*y + ry) mod M.
    The linear part has determinant 1 mod M, so the map is a bijection for
    every parameter choice.
    """
    if not (0 <= x < m and 0 <= y < m):
        raise ValueError(f"coordinates ({x}, {y}) outside [0, {m})")
    a, b, rx, ry = key.params()
    xp = (x + a * y + rx) % m
    yp = (b * x + (a * b + 1) * y + ry) % m
    return xp, yp


@functools.lru_cache(maxsize=4)
def _cat_map_grids(a: int, b: int, rx: int, ry: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Destination coordinates of every grid cell under the cat map."""
    x, y = np.indices((m, m), dtype=np.int64)
    xp = ((x + a * y + rx) % m).astype(np.intp)
    yp = ((b * x + (a * b + 1) * y + ry) % m).astype(np.intp)
    return xp, yp


def to_bitplanes(image: np.ndarray) -> np.ndarray:
    """Split an image into 8 bit-planes; plane k holds bit k (k=0 is LSB)."""
    shifts = np.arange(8, dtype=np.uint8)[:, np.newaxis, np.newaxis]
    return (image[np.newaxis, :, :] >> shifts) & 1


def from_bitplanes(planes: np.ndarray) -> np.ndarray:
    """Reassemble bit-planes into an image (inverse of :func:`to_bitplanes`)."""
    shifts = np.arange(8, dtype=np.uint8)[:, np.newaxis, np.newaxis]
    return np.bitwise_or.reduce(planes << shifts, axis=0).astype(np.uint8)


def permute_bits(planes: np.ndarray, key: CipherKey) -> np.ndarray:
    """Move the bit at (x, y) of every plane to cat_map_point(x, y)."""
    m = planes.shape[1]
    xp, yp = _cat_map_grids(*key.params(), m)
    out = np.empty_like(planes)
    out[:, xp, yp] = planes
    return out


def inverse_permute_bits(planes: np.ndarray, key: CipherKey) -> np.ndarray:
    """Undo :func:`permute_bits`."""
    m = planes.shape[1]
    xp, yp = _cat_map_grids(*key.params(), m)
    return planes[:, xp, yp]


def _cat_map_bytes(image: np.ndarray, key: CipherKey, inverse: bool = False) -> np.ndarray:
    """Cat-map permutation applied to whole bytes.

    The map is the same for all 8 planes, so it is equivalent to (and much
    faster than) decomposing into planes, calling permute_bits and
    reassembling; the test suite asserts the equivalence.
    """
    xp, yp = _cat_map_grids(*key.params(), image.shape[0])
    if inverse:
        return image[xp, yp]
    out = np.empty_like(image)
    out[xp, yp] = image
    return out


@functools.lru_cache(maxsize=8)
def _scramble_grids(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Static seeded permutation of the M x M grid positions."""
    flat = np.random.default_rng((SCRAMBLE_SEED, m)).permutation(m * m)
    sx, sy = np.divmod(flat.reshape(m, m).astype(np.intp), m)
    return sx, sy


def scramble_bytes(image: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Static key-independent position scramble (part of the permutation layer).

    The affine cat map alone preserves arithmetic structure: for keys with
    even parameters, differences stay confined to row/column cosets and a
    one-bit change can never reach half the image.  Composing each round's
    cat map with this fixed pseudorandom relocation removes every such
    invariant while keeping the layer an unkeyed, deterministic bijection.
    """
    sx, sy = _scramble_grids(image.shape[0])
    if inverse:
        out = np.empty_like(image)
        out[sx, sy] = image
        return out
    return image[sx, sy]


@functools.lru_cache(maxsize=8)
def _rotation_grid(m: int) -> np.ndarray:
    return np.random.default_rng((ROTATION_SEED, m)).integers(0, 8, size=(m, m)).astype(np.uint16)


def rotate_bits(image: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Static per-position left bit-rotation (the cross-plane permutation stage).

    Byte-wise XOR diffusion and the per-plane cat map both keep every bit in
    its own plane; this rotation is what moves bits between planes so a
    single flipped bit can eventually influence all 8*M*M positions.
    """
    shift = _rotation_grid(image.shape[0])
    if inverse:
        shift = (8 - shift) % 8
    wide = image.astype(np.uint16)
    return (((wide << shift) | (wide >> (8 - shift))) & 0xFF).astype(np.uint8)


# ---------------------------------------------------------------------------
# full cipher
# ---------------------------------------------------------------------------

def encrypt(image: np.ndarray, key: CipherKey) -> np.ndarray:
    """Run key.rounds rounds of diffusion followed by the bit permutation."""
    validate_image(image)
    matrix = build_diffusion_matrix()
    out = image
    for _ in range(key.rounds):
        out = _diffuse_image(out, matrix)
        out = _cat_map_bytes(out, key)
        out = scramble_bytes(out)
        out = rotate_bits(out)
    return out.copy() if out is image else out


def decrypt(cipher: np.ndarray, key: CipherKey) -> np.ndarray:
    """Exact inverse of :func:`encrypt` under the same key."""
    validate_image(cipher)
    inverse = _diffusion_inverse()
    out = cipher
    for _ in range(key.rounds):
        out = rotate_bits(out, inverse=True)
        out = scramble_bytes(out, inverse=True)
        out = _cat_map_bytes(out, key, inverse=True)
        out = _diffuse_image(out, inverse)
    return out.copy() if out is cipher else out
