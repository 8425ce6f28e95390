"""Monte Carlo BER/FER evaluation with seeded, order-independent streams.

Every frame derives its random stream from (master seed, point index,
frame index), so results are bit-identical no matter how frames are
batched or spread across worker processes.  Error counters are integers
and aggregate in frame order; stopping decisions are taken after whole
batches, which keeps parallel and sequential runs byte-identical.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .channel import ChannelConfig, modulate_and_transmit
from .construction import LiftedCode
from .decoder import LayeredDecoder
from .encoder import FrameEncoder
from .quantize import QuantProfile

__all__ = ["TrialResult", "CampaignConfig", "run_campaign", "format_campaign_csv"]


@dataclass
class TrialResult:
    """Error statistics for one Eb/N0 point."""

    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    elapsed_s: float
    seed: int

    def ber(self, info_bits_per_frame: int) -> float:
        return self.bit_errors / (self.frames * info_bits_per_frame)

    def fer(self) -> float:
        return self.frame_errors / self.frames


@dataclass
class CampaignConfig:
    """Sweep description; ``quant=None`` runs the floating-point decoder.

    ``codewords`` picks the transmitted data: "random" encodes fresh
    information bits per frame, "zero" sends the all-zero codeword (valid
    by linearity; the decoder is sign-symmetric so the statistics match).
    "auto" resolves to random for float and zero for fixed point.
    """

    ebn0_db: list
    iterations: int = 20
    max_frames: int = 1000
    target_frame_errors: int = 100
    seed: int = 0
    quant: QuantProfile = None
    quant_label: str = "float"
    codewords: str = "auto"
    batch_size: int = 128
    workers: int = 1

    def resolved_codewords(self) -> str:
        if self.codewords != "auto":
            return self.codewords
        return "zero" if self.quant is not None else "random"


# worker-process state, populated by the pool initializer (fork-safe)
_WS = {}


def _init_worker(code, quant, iterations, mode, seed):
    _WS["decoder"] = LayeredDecoder(code, profile=quant)
    _WS["encoder"] = FrameEncoder(code) if mode == "random" else None
    _WS["iterations"] = iterations
    _WS["mode"] = mode
    _WS["seed"] = seed


def _frame_rng(seed, point_idx, frame_idx):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(point_idx, frame_idx))
    )


def _eval_batch(task):
    """Decode frames [start, start+count) of one point; returns integer
    (bit_errors, frame_errors, frames)."""
    point_idx, ebn0_db, start, count = task
    dec: LayeredDecoder = _WS["decoder"]
    enc: FrameEncoder = _WS["encoder"]
    code = dec.code
    cfg = ChannelConfig(ebn0_db=ebn0_db, rate=float(code.rate))
    if enc is not None:
        info_positions = enc.info_positions
        k = enc.k
    else:
        info_positions = np.arange(code.N - code.M)
        k = code.N - code.M

    llr_pvn = np.empty((count, code.N))
    llr_d1h = np.empty((count, code.M, code.d1h_per_hcn))
    info = np.zeros((count, k), dtype=np.uint8)
    for t in range(count):
        rng = _frame_rng(_WS["seed"], point_idx, start + t)
        if enc is not None:
            info[t] = rng.integers(0, 2, size=k, dtype=np.uint8)
            pvn_bits, d1h_bits = enc.encode(info[t])
        else:
            pvn_bits = np.zeros(code.N, dtype=np.uint8)
            d1h_bits = np.zeros((code.M, code.d1h_per_hcn), dtype=np.uint8)
        llr_pvn[t], llr_d1h[t] = modulate_and_transmit(pvn_bits, d1h_bits, cfg, rng)

    result = dec.decode(llr_pvn, llr_d1h, _WS["iterations"])
    errs = (result.hard_bits[:, info_positions] != info).sum(axis=1)
    return int(errs.sum()), int((errs > 0).sum()), count


def _point_tasks(point_idx, ebn0_db, max_frames, batch_size):
    start = 0
    while start < max_frames:
        count = min(batch_size, max_frames - start)
        yield (point_idx, ebn0_db, start, count)
        start += count


def run_campaign(code: LiftedCode, config: CampaignConfig, csv_path=None):
    """Sweep the configured Eb/N0 points and return one TrialResult each.

    A point stops after ``target_frame_errors`` frame errors (checked on
    batch boundaries) or ``max_frames`` frames.  When ``csv_path`` is given
    the results are also written as CSV.
    """
    mode = config.resolved_codewords()
    if mode not in ("random", "zero"):
        raise ValueError(f"unknown codeword mode {config.codewords!r}")
    if config.batch_size < 1 or config.workers < 1:
        raise ValueError("batch_size and workers must be positive")

    results = []
    init_args = (code, config.quant, config.iterations, mode, config.seed)
    for point_idx, ebn0_db in enumerate(config.ebn0_db):
        t0 = time.time()
        bit_errors = frame_errors = frames = 0
        tasks = _point_tasks(point_idx, float(ebn0_db), config.max_frames,
                             config.batch_size)
        if config.workers == 1:
            _init_worker(*init_args)
            outputs = map(_eval_batch, tasks)
            for be, fe, fr in outputs:
                bit_errors += be
                frame_errors += fe
                frames += fr
                if config.target_frame_errors and frame_errors >= config.target_frame_errors:
                    break
        else:
            pool = ProcessPoolExecutor(
                max_workers=config.workers, mp_context=get_context("fork"),
                initializer=_init_worker, initargs=init_args,
            )
            try:
                for be, fe, fr in pool.map(_eval_batch, tasks):
                    bit_errors += be
                    frame_errors += fe
                    frames += fr
                    if config.target_frame_errors and frame_errors >= config.target_frame_errors:
                        break
            finally:
                pool.shutdown(wait=True, cancel_futures=True)
        if frames:
            results.append(TrialResult(
                ebn0_db=float(ebn0_db), frames=frames, bit_errors=bit_errors,
                frame_errors=frame_errors, elapsed_s=time.time() - t0,
                seed=config.seed,
            ))
    if csv_path is not None:
        with open(csv_path, "w") as fh:
            fh.write(format_campaign_csv(code, config, results))
    return results


def format_campaign_csv(code: LiftedCode, config: CampaignConfig, results) -> str:
    """Stable CSV text (no timing fields, so reruns are byte-identical)."""
    k = code.N - code.M
    lines = ["EbN0_dB,frames,bit_errors,frame_errors,BER,FER,iters,quant_setting"]
    for res in results:
        lines.append(
            f"{res.ebn0_db:g},{res.frames},{res.bit_errors},{res.frame_errors},"
            f"{res.ber(k):.6e},{res.fer():.6e},{config.iterations},{config.quant_label}"
        )
    return "\n".join(lines) + "\n"
