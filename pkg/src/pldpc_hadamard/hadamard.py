"""Order-r Hadamard codebook machinery.

The 2**(r+1) codewords are the columns of +H and -H (Sylvester order),
bit-mapped by +1 -> 0 and -1 -> 1.  For even r every codeword carries an
embedded single-parity-check word of length d = r + 2 at the fixed
positions {0, 1, 2, 4, ..., 2**(r-1), 2**r - 1}; those positions carry the
a-priori LLRs from the graph, the remaining 2**r - d positions carry the
degree-1 parity-bit channel observations.

The symbol-MAP APP computation runs a fast Hadamard transform (FHT), a
halving, and a dual transform (DFHT) whose butterflies combine running
(+1-sum, -1-sum) pairs with the Jacobian max* operator.  Both floating-
point and bit-accurate fixed-point pipelines are provided.
"""

from dataclasses import dataclass

import numpy as np

from .quantize import (
    QuantProfile,
    align_op,
    convert,
    correction_table,
    fixed_add,
    fixed_shift_right,
    fixed_sub,
    max_star_fixed,
    saturate,
)

__all__ = [
    "hadamard_matrix",
    "spc_positions",
    "HadamardContext",
    "HadamardLLRFrame",
    "hadamard_encode",
    "encode_parity_bits",
    "fht",
    "max_star",
    "dfht",
    "symbol_map_decode",
    "FixedKernel",
]


def hadamard_matrix(r: int) -> np.ndarray:
    """Dense 2**r x 2**r sign matrix built by the Sylvester recursion.

    Test oracle only; the decoding path never materialises it.
    """
    if r < 0:
        raise ValueError("order must be non-negative")
    H = np.array([[1]], dtype=np.int64)
    for _ in range(r):
        H = np.block([[H, H], [H, -H]])
    return H


def spc_positions(r: int) -> tuple:
    """Indices of the embedded parity-check bits: {0} | {2**t} | {2**r - 1}."""
    if r < 2 or r % 2 != 0:
        raise ValueError("only even orders >= 2 carry the embedded parity check")
    return tuple(sorted({0} | {1 << t for t in range(r)} | {(1 << r) - 1}))


class HadamardContext:
    """Precomputed index structure for one Hadamard order (even r >= 2)."""

    def __init__(self, r: int):
        self.r = r
        self.q = 1 << r
        self.d = r + 2
        self.spc = spc_positions(r)
        spc_set = set(self.spc)
        self.parity = tuple(i for i in range(self.q) if i not in spc_set)
        self.spc_idx = np.array(self.spc, dtype=np.int64)
        self.parity_idx = np.array(self.parity, dtype=np.int64)
        # bit of codeword +h_j at position i is parity of popcount(i & j)
        j = np.arange(self.q, dtype=np.int64)
        pc = np.bitwise_count(self.parity_idx[:, None] & j[None, :])
        self._parity_gen = (pc & 1).astype(np.uint8)  # (q-d, q)

    @property
    def pipeline_latency(self) -> int:
        """Stage-cycles one frame spends in the sub-decoder: r + r + 1."""
        return 2 * self.r + 1

    def __repr__(self):
        return f"HadamardContext(r={self.r})"


@dataclass
class HadamardLLRFrame:
    """One sub-decoder input: channel LLRs on the parity positions and
    a-priori LLRs on the embedded-check positions (disjoint supports)."""

    l_ch: np.ndarray
    l_apr: np.ndarray

    def validate(self, ctx: HadamardContext) -> None:
        l_ch = np.asarray(self.l_ch, dtype=np.float64)
        l_apr = np.asarray(self.l_apr, dtype=np.float64)
        if l_ch.shape[-1] != ctx.q or l_apr.shape[-1] != ctx.q:
            raise ValueError(f"frame vectors must have length {ctx.q}")
        if np.any(l_ch[..., ctx.spc_idx] != 0):
            raise ValueError("channel vector must be zero on the parity-check positions")
        if np.any(l_apr[..., ctx.parity_idx] != 0):
            raise ValueError("a-priori vector must be zero outside the parity-check positions")


def encode_parity_bits(ctx: HadamardContext, spc_bits: np.ndarray) -> np.ndarray:
    """Vectorised encoder: (..., d) even-parity bits -> (..., q - d) parity bits.

    The sign of the codeword comes from the bit at position 0 and the
    column index from the bits at the powers of two; the bit at position
    2**r - 1 is then forced, which is why the input parity must be even.
    """
    bits = np.asarray(spc_bits)
    if bits.shape[-1] != ctx.d:
        raise ValueError(f"expected {ctx.d} input bits")
    if np.any(bits.sum(axis=-1) % 2 != 0):
        raise ValueError("input bits must have even parity; no codeword matches otherwise")
    sign = bits[..., 0].astype(np.int64)
    col = np.zeros(bits.shape[:-1], dtype=np.int64)
    for t in range(ctx.r):
        col |= (bits[..., 1 + t].astype(np.int64) ^ sign) << t
    out = ctx._parity_gen[:, col]  # (q-d, ...)
    out = np.moveaxis(out, 0, -1) ^ sign[..., None].astype(np.uint8)
    return out.astype(np.uint8)


def hadamard_encode(ctx: HadamardContext, info_bits) -> np.ndarray:
    """Encode d = r + 2 even-parity bits into the 2**r - d parity bits."""
    bits = np.asarray(info_bits, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("expected a single bit vector")
    return encode_parity_bits(ctx, bits)


def _fwht_inplace(x: np.ndarray) -> np.ndarray:
    q = x.shape[-1]
    h = 1
    while h < q:
        y = x.reshape(x.shape[:-1] + (q // (2 * h), 2, h))
        top = y[..., 0, :].copy()
        bot = y[..., 1, :]
        y[..., 0, :] = top + bot
        y[..., 1, :] = top - bot
        h *= 2
    return x


def fht(ctx: HadamardContext, x) -> np.ndarray:
    """Fast Hadamard transform: out[j] = <+h_j, x> via r butterfly stages.

    Fed with the summed channel + a-priori LLRs this yields twice the
    codeword log-weights 2 ln gamma(+h_j).
    """
    x = np.array(x, dtype=np.float64)
    if x.shape[-1] != ctx.q:
        raise ValueError(f"input length must be {ctx.q}")
    return _fwht_inplace(x)


def max_star(a, b):
    """Jacobian logarithm ln(e^a + e^b) = max(a,b) + ln(1 + e^-|a-b|)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.maximum(a, b) + np.log1p(np.exp(-np.abs(a - b)))


def _max_star_into(a, b):
    # correction computed in place; exp/log1p dominate the decode runtime
    d = np.subtract(a, b)
    np.abs(d, out=d)
    np.negative(d, out=d)
    np.exp(d, out=d)
    np.log1p(d, out=d)
    m = np.maximum(a, b)
    m += d
    return m


def _dfht_pairs(A: np.ndarray, B: np.ndarray):
    """r stages of max* butterflies on running (+1-sum, -1-sum) pairs.

    At stage h the block [k, k+h) holds sums over sub-codebooks built from
    position-wise sums and [k+h, k+2h) over differences; merging keeps the
    first-half positions straight and cross-couples the second half, which
    is where a -1 in the recursion flips the roles of the two sums.
    """
    q = A.shape[-1]
    h = 1
    while h < q:
        sh = A.shape[:-1] + (q // (2 * h), 2, h)
        Ar = A.reshape(sh)
        Br = B.reshape(sh)
        a0 = Ar[..., 0, :].copy()
        a1 = Ar[..., 1, :].copy()
        b0 = Br[..., 0, :].copy()
        b1 = Br[..., 1, :].copy()
        Ar[..., 0, :] = _max_star_into(a0, a1)
        Br[..., 0, :] = _max_star_into(b0, b1)
        Ar[..., 1, :] = _max_star_into(a0, b1)
        Br[..., 1, :] = _max_star_into(b0, a1)
        h *= 2
    return A, B


def dfht(ctx: HadamardContext, ln_gamma_plus, ln_gamma_minus):
    """Dual FHT, reduced to the r + 2 parity-check positions.

    Inputs are the 2q codeword log-weights; outputs are, per embedded-check
    position i, the log-sum of weights over codewords with +1 there and the
    log-sum over codewords with -1 there.
    """
    A = np.array(ln_gamma_plus, dtype=np.float64)
    B = np.array(ln_gamma_minus, dtype=np.float64)
    if A.shape[-1] != ctx.q or B.shape[-1] != ctx.q:
        raise ValueError(f"expected {ctx.q} log-weights per sign")
    A, B = _dfht_pairs(A, B)
    return A[..., ctx.spc_idx], B[..., ctx.spc_idx]


def _app_batch(ctx: HadamardContext, apr_spc: np.ndarray, ch_parity: np.ndarray) -> np.ndarray:
    """Batched APP pipeline: assemble, FHT, halve, DFHT, subtract."""
    x = np.zeros(apr_spc.shape[:-1] + (ctx.q,), dtype=np.float64)
    x[..., ctx.spc_idx] = apr_spc
    if ctx.q > ctx.d:
        x[..., ctx.parity_idx] = ch_parity
    gp = _fwht_inplace(x) * 0.5
    A, B = _dfht_pairs(gp.copy(), -gp)
    return (A - B)[..., ctx.spc_idx]


def symbol_map_decode(ctx: HadamardContext, frame: HadamardLLRFrame) -> np.ndarray:
    """APP LLRs at the r + 2 embedded-check positions for one frame."""
    frame.validate(ctx)
    l_ch = np.asarray(frame.l_ch, dtype=np.float64)
    l_apr = np.asarray(frame.l_apr, dtype=np.float64)
    apr = l_apr[..., ctx.spc_idx]
    ch = l_ch[..., ctx.parity_idx]
    return _app_batch(ctx, apr, ch)


class FixedKernel:
    """Bit-accurate fixed-point symbol-MAP pipeline.

    Every butterfly stage rounds half away from zero and saturates at its
    category's format; the halving after the FHT is an arithmetic right
    shift.  Given identical raw inputs the outputs are identical regardless
    of batching.
    """

    def __init__(self, ctx: HadamardContext, profile: QuantProfile, lut_span: float = None):
        self.ctx = ctx
        self.profile = profile
        self.lut_span = lut_span
        self.table = correction_table(profile.dfht_internal, lut_span)

    def max_star(self, a, b):
        """Fixed-point Jacobian: compare, table-lookup correction, add."""
        return max_star_fixed(a, b, self.profile.dfht_internal, self.table)

    def fht_raw(self, x_raw: np.ndarray) -> np.ndarray:
        """FHT on raw values in the fht_output format, saturating per stage."""
        fmt = self.profile.fht_output
        x = saturate(np.asarray(x_raw, dtype=np.int64), fmt)
        q = x.shape[-1]
        h = 1
        while h < q:
            y = x.reshape(x.shape[:-1] + (q // (2 * h), 2, h))
            top = y[..., 0, :].copy()
            bot = y[..., 1, :]
            y[..., 0, :] = fixed_add(top, bot, fmt)
            y[..., 1, :] = fixed_sub(top, bot, fmt)
            h *= 2
        return x

    def dfht_raw(self, gp_raw: np.ndarray, gm_raw: np.ndarray):
        """DFHT on raw codeword log-weights in the dfht_input format."""
        mid = self.profile.dfht_internal
        A = convert(gp_raw, self.profile.dfht_input, mid)
        B = convert(gm_raw, self.profile.dfht_input, mid)
        q = A.shape[-1]
        h = 1
        while h < q:
            sh = A.shape[:-1] + (q // (2 * h), 2, h)
            Ar = A.reshape(sh)
            Br = B.reshape(sh)
            a0 = Ar[..., 0, :].copy()
            a1 = Ar[..., 1, :].copy()
            b0 = Br[..., 0, :].copy()
            b1 = Br[..., 1, :].copy()
            Ar[..., 0, :] = self.max_star(a0, a1)
            Br[..., 0, :] = self.max_star(b0, b1)
            Ar[..., 1, :] = self.max_star(a0, b1)
            Br[..., 1, :] = self.max_star(b0, a1)
            h *= 2
        return A, B

    def app_batch_raw(self, apr_spc_raw: np.ndarray, ch_parity_raw: np.ndarray) -> np.ndarray:
        """(..., d) a-priori raw (fht_output fmt) + (..., q-d) channel raw
        (d1h_channel fmt) -> (..., d) APP raw in the dfht_output format."""
        ctx = self.ctx
        p = self.profile
        x = np.zeros(apr_spc_raw.shape[:-1] + (ctx.q,), dtype=np.int64)
        x[..., ctx.spc_idx] = apr_spc_raw
        if ctx.q > ctx.d:
            x[..., ctx.parity_idx] = convert(ch_parity_raw, p.d1h_channel, p.fht_output)
        s = self.fht_raw(x)
        gp = fixed_shift_right(s, 1)
        gp = convert(gp, p.fht_output, p.dfht_input)
        gm = saturate(-gp, p.dfht_input)
        A, B = self.dfht_raw(gp, gm)
        app = align_op(A, p.dfht_internal, B, p.dfht_internal, p.dfht_output, "sub")
        return app[..., ctx.spc_idx]

    def decode_frame_raw(self, frame_raw_ch: np.ndarray, frame_raw_apr: np.ndarray) -> np.ndarray:
        """Single-frame convenience wrapper over app_batch_raw."""
        apr = np.asarray(frame_raw_apr, dtype=np.int64)[..., self.ctx.spc_idx]
        ch = np.asarray(frame_raw_ch, dtype=np.int64)[..., self.ctx.parity_idx]
        return self.app_batch_raw(apr, ch)
