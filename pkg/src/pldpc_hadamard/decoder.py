"""Layered decoding over the lifted graph.

One layer holds z2 check nodes touching disjoint variable nodes, so the
z2 symbol-MAP updates of a layer commute and are evaluated as one batch:

    extrinsic-in  = app - stored_check_extrinsic      (per edge)
    app_at_check  = symbol-MAP over the Hadamard codebook
    stored_check_extrinsic = app_at_check - extrinsic-in
    app           = app_at_check

The degree-1 parity bits contribute channel LLRs to every update but never
receive messages back.  The same driver runs the floating-point and the
bit-accurate fixed-point arithmetic.
"""

from dataclasses import dataclass, field

import numpy as np

from .construction import LiftedCode
from .hadamard import FixedKernel, HadamardContext, _app_batch
from .quantize import QuantProfile, align_op, convert, quantize

__all__ = ["DecoderState", "DecodeResult", "LayeredDecoder"]


@dataclass
class DecoderState:
    """Mutable per-codeword decoder memory (leading axis = batch).

    ``app`` holds the running a-posteriori LLRs per variable node, ``ex``
    the stored check-to-variable extrinsics per edge (check, edge slot),
    and the two ``ch_*`` arrays the channel LLRs, which are never written
    after initialisation.
    """

    app: np.ndarray       # (B, N)
    ex: np.ndarray        # (B, M, d)
    ch_pvn: np.ndarray    # (B, N)
    ch_d1h: np.ndarray    # (B, M, 2**r - d)
    quantized: bool = False

    def copy(self) -> "DecoderState":
        return DecoderState(
            self.app.copy(), self.ex.copy(), self.ch_pvn.copy(),
            self.ch_d1h.copy(), self.quantized,
        )


@dataclass
class DecodeResult:
    hard_bits: np.ndarray
    iterations_run: int
    parity_violations: list = field(default_factory=list)


class LayeredDecoder:
    """Layered symbol-MAP decoder for one lifted code.

    ``profile=None`` selects float64 arithmetic; passing a QuantProfile
    selects the saturating fixed-point pipeline.  A decoder instance is
    safe to share across threads only between decodes; run one state per
    frame (or one batched state) at a time.
    """

    def __init__(self, code: LiftedCode, profile: QuantProfile = None):
        self.code = code
        self.ctx = HadamardContext(code.r)
        self.profile = profile
        self.kernel = FixedKernel(self.ctx, profile) if profile is not None else None
        self.pvn_idx = code.pvn_index_tensor()  # (layers, z2, d)

    # -- state ------------------------------------------------------------
    def _as_batch(self, llr_pvn, llr_d1h):
        llr_pvn = np.asarray(llr_pvn, dtype=np.float64)
        llr_d1h = np.asarray(llr_d1h, dtype=np.float64)
        single = llr_pvn.ndim == 1
        if single:
            llr_pvn = llr_pvn[None]
            llr_d1h = llr_d1h[None]
        want_d1h = (self.code.M, self.code.d1h_per_hcn)
        if llr_pvn.shape[1:] != (self.code.N,) or llr_d1h.shape[1:] != want_d1h:
            raise ValueError(
                f"expected channel shapes (N={self.code.N},) and {want_d1h}, "
                f"got {llr_pvn.shape[1:]} and {llr_d1h.shape[1:]}"
            )
        return llr_pvn, llr_d1h, single

    def init_state(self, llr_pvn, llr_d1h) -> DecoderState:
        """Fresh state: app copies the channel LLRs, all extrinsics zero."""
        llr_pvn, llr_d1h, _ = self._as_batch(llr_pvn, llr_d1h)
        B = llr_pvn.shape[0]
        if self.profile is None:
            return DecoderState(
                app=llr_pvn.copy(),
                ex=np.zeros((B, self.code.M, self.code.d)),
                ch_pvn=llr_pvn.copy(),
                ch_d1h=llr_d1h.copy(),
            )
        p = self.profile
        ch = quantize(llr_pvn, p.channel)
        return DecoderState(
            app=convert(ch, p.channel, p.pvn_app),
            ex=np.zeros((B, self.code.M, self.code.d), dtype=np.int64),
            ch_pvn=ch,
            ch_d1h=quantize(llr_d1h, p.d1h_channel),
            quantized=True,
        )

    # -- per-check / per-layer updates -------------------------------------
    def _update(self, state: DecoderState, k: int, rows) -> None:
        """Process the given local check indices of layer k (batched)."""
        z2 = self.code.z2
        idx = self.pvn_idx[k][rows]                      # (n_rows, d)
        alphas = k * z2 + np.asarray(rows)
        ch = state.ch_d1h[:, alphas]                     # (B, n_rows, q-d)
        if self.profile is None:
            apr = state.app[:, idx] - state.ex[:, alphas]
            app_h = _app_batch(self.ctx, apr, ch)
            state.ex[:, alphas] = app_h - apr
            state.app[:, idx] = app_h
        else:
            p = self.profile
            a = convert(state.app[:, idx], p.pvn_app, p.fht_output)
            e = convert(state.ex[:, alphas], p.hcn_extrinsic, p.fht_output)
            apr = align_op(a, p.fht_output, e, p.fht_output, p.fht_output, "sub")
            app_h = self.kernel.app_batch_raw(apr, ch)
            state.ex[:, alphas] = align_op(
                app_h, p.dfht_output, apr, p.fht_output, p.hcn_extrinsic, "sub"
            )
            state.app[:, idx] = convert(app_h, p.dfht_output, p.pvn_app)

    def process_hcn(self, state: DecoderState, alpha: int) -> None:
        """Update a single check node in place."""
        if not (0 <= alpha < self.code.M):
            raise ValueError(f"check node {alpha} out of range")
        k, i = divmod(alpha, self.code.z2)
        self._update(state, k, np.array([i]))

    def process_layer(self, state: DecoderState, k: int) -> None:
        """Update all z2 check nodes of layer k; order inside the layer is
        immaterial because the layer's variable nodes are disjoint."""
        if not (0 <= k < self.code.num_layers):
            raise ValueError(f"layer {k} out of range")
        self._update(state, k, np.arange(self.code.z2))

    # -- full decode --------------------------------------------------------
    def hard_decision(self, state: DecoderState) -> np.ndarray:
        """Sign decision; an LLR of exactly zero decodes to bit 0."""
        return (state.app < 0).astype(np.uint8)

    def count_parity_violations(self, bits: np.ndarray) -> np.ndarray:
        """Per-frame number of check nodes whose d bits have odd parity."""
        flat = self.pvn_idx.reshape(-1, self.code.d)
        return ((bits[:, flat].sum(axis=-1) % 2) != 0).sum(axis=-1)

    def decode(self, llr_pvn, llr_d1h, iterations: int,
               early_stop: bool = False, track_parity: bool = False) -> DecodeResult:
        """Run the layered schedule for exactly ``iterations`` passes.

        ``early_stop`` breaks out once all check parities are satisfied;
        it is off by default so runs are schedule-exact and reproducible.
        """
        if iterations < 1:
            raise ValueError("need at least one iteration")
        llr_pvn_b, llr_d1h_b, single = self._as_batch(llr_pvn, llr_d1h)
        state = self.init_state(llr_pvn_b, llr_d1h_b)
        violations = []
        it_run = 0
        for it in range(iterations):
            for k in range(self.code.num_layers):
                self.process_layer(state, k)
            it_run = it + 1
            if early_stop or track_parity:
                v = self.count_parity_violations(self.hard_decision(state))
                if track_parity:
                    violations.append(v.copy())
                if early_stop and not v.any():
                    break
        bits = self.hard_decision(state)
        if single:
            bits = bits[0]
        return DecodeResult(hard_bits=bits, iterations_run=it_run,
                            parity_violations=violations)
