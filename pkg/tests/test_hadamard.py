import numpy as np
import pytest

from pldpc_hadamard.hadamard import (
    FixedKernel,
    HadamardContext,
    HadamardLLRFrame,
    dfht,
    encode_parity_bits,
    fht,
    hadamard_encode,
    hadamard_matrix,
    max_star,
    spc_positions,
    symbol_map_decode,
)
from pldpc_hadamard.quantize import get_profile, quantize


def logsumexp(v):
    v = np.asarray(v, dtype=np.float64)
    m = v.max()
    return m + np.log(np.sum(np.exp(v - m)))


def brute_force_app(r, llr):
    """Straight-line reference: log partition sums over all 2**(r+1)
    codeword columns of the dense sign matrix."""
    q = 1 << r
    H = hadamard_matrix(r)
    gp = (H.T @ llr) / 2.0  # ln gamma(+h_j); minus-sign codewords negate it
    out = np.empty(q)
    for i in range(q):
        plus = np.where(H[i] == 1, gp, -gp)
        minus = np.where(H[i] == 1, -gp, gp)
        out[i] = logsumexp(plus) - logsumexp(minus)
    return out


def dyadic(rng, size, frac=10, span=40.0):
    scale = 1 << frac
    return rng.integers(-int(span * scale), int(span * scale), size=size) / scale


# ---------------------------------------------------------------------------
# dense matrix oracle

def test_matrix_small_orders():
    assert np.array_equal(hadamard_matrix(0), [[1]])
    assert np.array_equal(hadamard_matrix(1), [[1, 1], [1, -1]])


def test_matrix_rows_r4():
    H = hadamard_matrix(4)
    assert np.array_equal(H[0], np.ones(16))
    assert np.array_equal(H[1], [1, -1] * 8)
    # bottom row follows the popcount parity of the column index
    pattern = [(-1) ** bin(j).count("1") for j in range(16)]
    assert np.array_equal(H[15], pattern)


def test_matrix_orthogonality():
    for r in range(1, 7):
        q = 1 << r
        H = hadamard_matrix(r)
        assert np.array_equal(H @ H.T, q * np.eye(q, dtype=np.int64))


def test_matrix_matches_scipy():
    from scipy.linalg import hadamard as scipy_hadamard

    for r in (2, 4, 5):
        assert np.array_equal(hadamard_matrix(r), scipy_hadamard(1 << r))


# ---------------------------------------------------------------------------
# embedded parity-check structure

def test_spc_positions_values():
    assert spc_positions(4) == (0, 1, 2, 4, 8, 15)
    assert spc_positions(2) == (0, 1, 2, 3)
    for bad in (1, 3, 5, 0):
        with pytest.raises(ValueError):
            spc_positions(bad)


def test_spc_xor_property_full_codebook():
    for r in (2, 4, 6):
        H = hadamard_matrix(r)
        bits = ((1 - np.concatenate([H, -H], axis=1)) // 2).astype(np.uint8)
        pos = list(spc_positions(r))
        assert not np.any(bits[pos, :].sum(axis=0) % 2)
        assert len(pos) == r + 2


def test_encode_all_zero():
    ctx = HadamardContext(4)
    assert np.array_equal(hadamard_encode(ctx, np.zeros(6, dtype=np.uint8)),
                          np.zeros(10, dtype=np.uint8))


def test_encode_known_column():
    # info bits read off column +h_3 at the check positions
    ctx = HadamardContext(4)
    info = np.array([0, 1, 1, 0, 0, 0], dtype=np.uint8)
    expected = np.array([0, 1, 1, 0, 1, 1, 0, 0, 1, 1], dtype=np.uint8)
    assert np.array_equal(hadamard_encode(ctx, info), expected)
    # and the oracle agrees: read the same column from the dense matrix
    col = ((1 - hadamard_matrix(4)[:, 3]) // 2).astype(np.uint8)
    assert np.array_equal(col[ctx.spc_idx], info)
    assert np.array_equal(col[ctx.parity_idx], expected)


def test_encode_exhaustive_against_codebook_search():
    ctx = HadamardContext(4)
    H = hadamard_matrix(4)
    codebook = ((1 - np.concatenate([H, -H], axis=1)) // 2).astype(np.uint8).T
    for pattern in range(64):
        info = np.array([(pattern >> t) & 1 for t in range(6)], dtype=np.uint8)
        if info.sum() % 2:
            with pytest.raises(ValueError, match="even parity"):
                hadamard_encode(ctx, info)
            continue
        parity = hadamard_encode(ctx, info)
        full = np.zeros(16, dtype=np.uint8)
        full[ctx.spc_idx] = info
        full[ctx.parity_idx] = parity
        assert ((codebook == full).all(axis=1)).sum() == 1


def test_encode_r2_has_no_parity_bits():
    ctx = HadamardContext(2)
    out = hadamard_encode(ctx, np.array([1, 1, 1, 1], dtype=np.uint8))
    assert out.shape == (0,)


def test_encode_batched():
    ctx = HadamardContext(4)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=(50, 6)).astype(np.uint8)
    bits[:, -1] = bits[:, :-1].sum(axis=1) % 2
    batch = encode_parity_bits(ctx, bits)
    for t in range(50):
        assert np.array_equal(batch[t], hadamard_encode(ctx, bits[t]))


# ---------------------------------------------------------------------------
# transforms

def test_fht_basics():
    ctx = HadamardContext(4)
    assert np.array_equal(fht(ctx, np.zeros(16)), np.zeros(16))
    impulse = np.zeros(16)
    impulse[0] = 3.0
    assert np.array_equal(fht(ctx, impulse), np.full(16, 3.0))
    with pytest.raises(ValueError):
        fht(ctx, np.zeros(8))


def test_fht_matches_dense_exactly_on_dyadic_grid():
    rng = np.random.default_rng(7)
    for r in (2, 4, 6):
        ctx = HadamardContext(r)
        H = hadamard_matrix(r)
        for _ in range(20):
            x = dyadic(rng, ctx.q)
            assert np.array_equal(fht(ctx, x), H @ x)


def test_fht_self_inverse():
    rng = np.random.default_rng(8)
    ctx = HadamardContext(4)
    x = dyadic(rng, 16)
    assert np.array_equal(fht(ctx, fht(ctx, x)), 16 * x)


def test_max_star_values():
    assert max_star(0.0, 0.0) == pytest.approx(np.log(2.0), abs=1e-15)
    assert max_star(10.0, -10.0) == pytest.approx(10.0 + np.log1p(np.exp(-20.0)), abs=1e-15)
    rng = np.random.default_rng(9)
    a = rng.normal(size=200)
    b = rng.normal(size=200)
    assert np.allclose(max_star(a, b), np.logaddexp(a, b), atol=1e-12)
    assert np.allclose(max_star(a, b), max_star(b, a), atol=0)


def test_dfht_equal_inputs():
    ctx = HadamardContext(4)
    c = 1.7
    A, B = dfht(ctx, np.full(16, c), np.full(16, c))
    assert np.allclose(A, c + 4 * np.log(2), atol=1e-12)
    assert np.allclose(B, c + 4 * np.log(2), atol=1e-12)


def test_dfht_against_partition_sums():
    rng = np.random.default_rng(10)
    for r in (2, 4):
        ctx = HadamardContext(r)
        H = hadamard_matrix(r)
        for _ in range(100):
            llr = rng.normal(0, 4, size=ctx.q)
            gp = (H.T @ llr) / 2.0
            A, B = dfht(ctx, gp, -gp)
            for slot, i in enumerate(ctx.spc):
                plus = np.where(H[i] == 1, gp, -gp)
                minus = np.where(H[i] == 1, -gp, gp)
                assert abs(A[slot] - logsumexp(plus)) <= 1e-9
                assert abs(B[slot] - logsumexp(minus)) <= 1e-9


def test_dfht_dominant_input():
    # one codeword 40+ above everything else: the sums it enters approach
    # its weight, the others collapse to a log-sum of the small terms
    ctx = HadamardContext(4)
    gp = np.full(16, -30.0)
    gm = np.full(16, -30.0)
    gp[0] = 10.0  # +h_0, the all-ones codeword
    A, B = dfht(ctx, gp, gm)
    assert np.allclose(A, 10.0, atol=1e-10)
    assert np.allclose(B, -30.0 + np.log(16.0), atol=1e-10)


def test_dfht_swap_equivariance():
    rng = np.random.default_rng(11)
    ctx = HadamardContext(4)
    gp = rng.normal(size=16)
    gm = rng.normal(size=16)
    A1, B1 = dfht(ctx, gp, gm)
    A2, B2 = dfht(ctx, gm, gp)
    assert np.array_equal(A1, B2)
    assert np.array_equal(B1, A2)


# ---------------------------------------------------------------------------
# symbol-MAP

def make_frame(ctx, rng, scale=4.0):
    l_ch = np.zeros(ctx.q)
    l_apr = np.zeros(ctx.q)
    l_ch[ctx.parity_idx] = rng.normal(0, scale, size=ctx.q - ctx.d)
    l_apr[ctx.spc_idx] = rng.normal(0, scale, size=ctx.d)
    return HadamardLLRFrame(l_ch=l_ch, l_apr=l_apr)


def test_symbol_map_zero_frame():
    ctx = HadamardContext(4)
    frame = HadamardLLRFrame(np.zeros(16), np.zeros(16))
    assert np.array_equal(symbol_map_decode(ctx, frame), np.zeros(6))


def test_symbol_map_strong_priors():
    ctx = HadamardContext(4)
    l_apr = np.zeros(16)
    l_apr[ctx.spc_idx] = 20.0
    out = symbol_map_decode(ctx, HadamardLLRFrame(np.zeros(16), l_apr))
    ref = brute_force_app(4, l_apr)[ctx.spc_idx]
    assert np.all(out > 10.0)
    assert np.max(np.abs(out - ref)) <= 1e-9


def test_symbol_map_random_frames_vs_oracle():
    rng = np.random.default_rng(12)
    for r in (2, 4):
        ctx = HadamardContext(r)
        for _ in range(100):
            frame = make_frame(ctx, rng)
            out = symbol_map_decode(ctx, frame)
            ref = brute_force_app(r, frame.l_ch + frame.l_apr)[ctx.spc_idx]
            assert np.max(np.abs(out - ref)) <= 1e-9


def test_symbol_map_frozen_regression():
    # frozen from the brute-force partition-sum oracle
    ctx = HadamardContext(4)
    apr = np.array([-1.5, 2.0, 3.25, -7.25, -2.75, 1.25])
    ch = np.array([7.25, 3.5, -1.75, -2.0, -8.5, -5.0, -9.0, 6.5, -3.0, -9.5])
    l_ch = np.zeros(16)
    l_apr = np.zeros(16)
    l_apr[ctx.spc_idx] = apr
    l_ch[ctx.parity_idx] = ch
    expected = np.array([
        3.2098535351746555, 4.3826120411059595, 4.3000526220140625,
        -2.802295272195348, -3.2581865933193583, 2.7289580298301566,
    ])
    out = symbol_map_decode(ctx, HadamardLLRFrame(l_ch, l_apr))
    assert np.max(np.abs(out - expected)) <= 1e-12


def test_symbol_map_support_validation():
    ctx = HadamardContext(4)
    bad_ch = np.zeros(16)
    bad_ch[0] = 1.0  # position 0 is a check position
    with pytest.raises(ValueError, match="zero on the parity-check"):
        symbol_map_decode(ctx, HadamardLLRFrame(bad_ch, np.zeros(16)))
    bad_apr = np.zeros(16)
    bad_apr[3] = 1.0
    with pytest.raises(ValueError, match="zero outside"):
        symbol_map_decode(ctx, HadamardLLRFrame(np.zeros(16), bad_apr))


def test_pipeline_latency():
    for r in (2, 4, 6):
        assert HadamardContext(r).pipeline_latency == 2 * r + 1


# ---------------------------------------------------------------------------
# fixed-point kernel

def test_fixed_kernel_frozen_regression():
    # canonical butterfly order pinned: S1 formats, frozen raw output
    ctx = HadamardContext(4)
    kernel = FixedKernel(ctx, get_profile("S1"))
    apr_raw = np.array([-6, 8, 13, -29, -11, 5], dtype=np.int64)
    ch_raw = np.array([29, 14, -7, -8, -34, -20, -36, 26, -12, -38], dtype=np.int64)
    out = kernel.app_batch_raw(apr_raw, ch_raw)
    assert np.array_equal(out, [13, 17, 16, -11, -13, 11])


def test_fixed_kernel_batch_determinism():
    ctx = HadamardContext(4)
    kernel = FixedKernel(ctx, get_profile("S1"))
    rng = np.random.default_rng(13)
    apr = quantize(rng.normal(0, 8, size=(40, 6)), get_profile("S1").fht_output)
    ch = quantize(rng.normal(0, 8, size=(40, 10)), get_profile("S1").d1h_channel)
    batch = kernel.app_batch_raw(apr, ch)
    for t in range(40):
        single = kernel.app_batch_raw(apr[t], ch[t])
        assert np.array_equal(batch[t], single)
    # and duplicated rows give duplicated outputs
    dup = kernel.app_batch_raw(np.repeat(apr[:1], 5, axis=0), np.repeat(ch[:1], 5, axis=0))
    assert np.array_equal(dup, np.repeat(batch[:1], 5, axis=0))


def test_fixed_kernel_wide_profile_tracks_float():
    ctx = HadamardContext(4)
    wide = get_profile("wide")
    kernel = FixedKernel(ctx, wide)
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(50):
        apr = rng.normal(0, 5, size=6)
        ch = rng.normal(0, 5, size=10)
        raw = kernel.app_batch_raw(quantize(apr, wide.fht_output),
                                   quantize(ch, wide.d1h_channel))
        full = np.zeros(16)
        full[ctx.spc_idx] = apr
        full[ctx.parity_idx] = ch
        ref = brute_force_app(4, full)[ctx.spc_idx]
        worst = max(worst, np.max(np.abs(raw / wide.dfht_output.scale - ref)))
    assert worst < 0.01
