"""Built-in oracle suite behind the ``selftest`` CLI subcommand.

Each check prints one PASS/FAIL line; the suite is a fast cross-section
of the full test suite meant for installation smoke-testing.
"""

import numpy as np

from .construction import DEFAULT_BASE, BaseMatrix, build_code, code_rate
from .decoder import LayeredDecoder
from .encoder import FrameEncoder
from .hadamard import (
    HadamardContext,
    hadamard_matrix,
    spc_positions,
)
from .quantize import (
    QFormat,
    correction_table,
    get_profile,
    max_star_fixed,
    quantize,
)
from .timing import (
    ArchConfig,
    apply_interleave,
    classify_case,
    codeword_latency_and_throughput,
    d1h_address,
    hex_address,
    layer_latency,
    pvn_address,
    simulate_schedule,
)

__all__ = ["run_selftest"]


def _logsumexp(v):
    m = np.max(v)
    return m + np.log(np.sum(np.exp(v - m)))


def _brute_force_app(r, llr):
    """Independent symbol-MAP reference: direct partition sums over the
    2**(r+1) codeword columns of the dense sign matrix."""
    q = 1 << r
    H = hadamard_matrix(r)
    gp = (H.T @ llr) / 2.0
    out = np.empty(q)
    for i in range(q):
        plus = np.where(H[i] == 1, gp, -gp)
        out[i] = _logsumexp(plus) - _logsumexp(-plus)
    return out


def run_selftest(verbose_print=print) -> int:
    """Run all checks; returns the number of failures."""
    failures = 0

    def check(name, ok):
        nonlocal failures
        verbose_print(f"{'PASS' if ok else 'FAIL'}: {name}")
        if not ok:
            failures += 1

    # rate
    rate = code_rate(7, 11, 4)
    check(f"code rate (7, 11, 4) = {rate} = {float(rate):.4f}",
          rate.numerator == 4 and rate.denominator == 81
          and f"{float(rate):.4f}" == "0.0494")

    # embedded parity-check property over the full codebook
    ok = True
    for r in (2, 4, 6):
        H = hadamard_matrix(r)
        bits = ((1 - np.concatenate([H, -H], axis=1)) // 2).astype(np.uint8)
        pos = list(spc_positions(r))
        ok &= not np.any(bits[pos, :].sum(axis=0) % 2)
    check("embedded parity check holds for every codeword, r in {2,4,6}", ok)

    # transform against dense inner products; inputs on a dyadic grid so
    # every partial sum is exact and summation order cannot matter
    rng = np.random.default_rng(11)
    ctx = HadamardContext(4)
    x = rng.integers(-2**12, 2**12, size=16) / 1024.0
    from .hadamard import fht
    check("fast transform equals dense inner products (r=4)",
          np.array_equal(fht(ctx, x), hadamard_matrix(4) @ x))

    # symbol-MAP vs brute force
    from .hadamard import _app_batch
    worst = 0.0
    for r in (2, 4):
        c = HadamardContext(r)
        for _ in range(50):
            llr = rng.normal(0, 3, size=c.q)
            apr = llr[c.spc_idx]
            ch = llr[c.parity_idx]
            full = np.zeros(c.q)
            full[c.spc_idx] = apr
            full[c.parity_idx] = ch
            got = _app_batch(c, apr, ch)
            ref = _brute_force_app(r, full)[c.spc_idx]
            worst = max(worst, float(np.max(np.abs(got - ref))))
    check(f"symbol-MAP matches 2^(r+1)-codeword brute force (max err {worst:.2e})",
          worst <= 1e-9)

    # address maps
    ok = pvn_address(1, 2, 4, 16) == 9 and hex_address(6, 0, 6, 4) == (4, 0) \
        and d1h_address(1, 3, 4) == 7
    seen = {pvn_address(g, l, 4, 16) for g in range(4) for l in range(4)}
    ok &= seen == set(range(16))
    check("RAM address maps (worked values and bijection)", ok)

    # lane shifter reproduces every rotation
    ok = True
    for p in range(16):
        data = np.arange(16)
        out = apply_interleave(data, p, 4, 4)
        ok &= np.array_equal(out, (np.arange(16) + p) % 16)
    shifted = apply_interleave(np.arange(16), 9, 4, 4)
    ok &= np.array_equal(shifted.reshape(4, 4)[:, 3], [12, 0, 4, 8])
    ok &= np.array_equal(shifted.reshape(4, 4)[:, 0], [9, 13, 1, 5])
    check("cyclic lane shifter realises all CPM rotations (z2=16)", ok)

    # latency closed forms and the published deployment numbers
    ok = layer_latency(4, 4) == 24 and layer_latency(4, 1) == 15 \
        and layer_latency(4, 8) == 48
    code = build_code(DEFAULT_BASE, 32, 512, seed=1)
    expect = {(128, 20): (0.896e-3, 1.48e9), (64, 20): (1.72e-3, 0.77e9),
              (128, 150): (6.72e-3, 0.20e9), (64, 150): (12.92e-3, 0.10e9)}
    for (nh, iters), (lat_e, tput_e) in expect.items():
        lat, tput = codeword_latency_and_throughput(
            code, ArchConfig(n_sub=nh, iterations=iters))
        # latency agrees to 3 significant figures, throughput to 2
        ok &= f"{lat:.3g}" == f"{lat_e:.3g}" and f"{tput:.2g}" == f"{tput_e:.2g}"
    check("layer latencies and published latency/throughput table", ok)

    # schedule replay equals the closed forms, no port conflicts
    ok = True
    for r in (2, 4, 6, 8):
        base = [[1] * (r + 2)]
        for G in (1, 2, 4, 8):
            small = build_code(BaseMatrix.from_array(base), 1, 4 * G, seed=0)
            rep = simulate_schedule(small, ArchConfig(n_sub=4), layer=0)
            ok &= rep.total_cycles == layer_latency(r, G) and not rep.conflicts
            ok &= rep.case == classify_case(r, G)
    check("schedule replay matches closed forms with zero conflicts", ok)

    # fixed-point Jacobian correction within one LSB of the float value
    fmt = QFormat(7, 2)
    table = correction_table(fmt)
    grid = np.round(np.arange(0, 8, 1 / fmt.scale) * fmt.scale).astype(np.int64)
    worst = 0
    for draw in grid:
        got = max_star_fixed(np.int64(draw), np.int64(0), fmt, table)
        want = quantize(np.log1p(np.exp(-draw / fmt.scale)) + draw / fmt.scale, fmt)
        worst = max(worst, abs(int(got) - int(want)))
    check(f"fixed-point max* within 1 LSB of float (worst {worst} LSB)", worst <= 1)

    # quantizer saturation and profile deltas
    s1, s2, s3 = get_profile("S1"), get_profile("S2"), get_profile("S3")
    ok = quantize(1000.0, QFormat(7, 2)) == 511 and QFormat(7, 2).max_value == 127.75
    ok &= all(
        s2.format_for(c).int_bits == s1.format_for(c).int_bits + 1
        for c in ("pvn_app", "hcn_extrinsic", "d1h_channel")
    ) and s2.channel == s1.channel
    ok &= all(
        s3.format_for(c).frac_bits == 3 and s3.format_for(c).int_bits == 7
        for c in ("fht_output", "dfht_input", "dfht_internal")
    ) and s3.dfht_output == s2.dfht_output
    check("quantizer saturation and S1->S2->S3 structural deltas", ok)

    # end-to-end: noiseless round trip on a small lift
    small = build_code(DEFAULT_BASE, 3, 4, seed=1)
    enc = FrameEncoder(small)
    dec = LayeredDecoder(small)
    rng = np.random.default_rng(5)
    info = rng.integers(0, 2, size=enc.k, dtype=np.uint8)
    pvn, d1h = enc.encode(info)
    res = dec.decode((1.0 - 2.0 * pvn) * 30.0, (1.0 - 2.0 * d1h) * 30.0, 2)
    check("noiseless encode -> decode round trip recovers the frame",
          np.array_equal(res.hard_bits, pvn))

    verbose_print(f"{'OK' if failures == 0 else 'FAILED'}: "
                  f"{failures} failure(s)")
    return failures
