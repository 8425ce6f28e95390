"""Cycle-accurate model of the layered-decoder hardware.

Four dual-port RAM banks back the decoder: variable-node channel LLRs
(PVN-CH), running a-posteriori LLRs (PVN-APP), stored check extrinsics
(H-EX) and the degree-1 parity-bit channel words (D1H-CH).  Each bank is
split across N_h identical RAMs so one address read yields N_h lanes; a
layer's z2 check nodes are served in G = z2 / N_h sequential groups.

Loading one group takes d/2 cycles (two value sets per cycle through the
two ports), a sub-decoder pipeline occupies 2r + 1 cycles, and write-back
mirrors the read pattern.  Whether loading finishes before the first
sub-decoder output decides the pipeline regime:

  regime "I"  (loading-bound output): results stream straight to memory;
              layer takes (r/2 + 1) G + 5r/2 + 2 cycles.
  regime "II" (load still running):   results pass through an output FIFO
              and write-back starts after loading; layer takes (r + 2) G.

A fixed per-layer RAM operation delay (default 2 cycles) is charged on
top when converting to codeword latency and throughput.
"""

from dataclasses import dataclass
import numpy as np

from .construction import LiftedCode
from .quantize import QuantProfile

__all__ = [
    "ArchConfig",
    "RamBankModel",
    "ScheduleReport",
    "pvn_address",
    "hex_address",
    "d1h_address",
    "shift_amount",
    "apply_interleave",
    "classify_case",
    "layer_latency",
    "codeword_latency_and_throughput",
    "ram_banks",
    "simulate_schedule",
    "timing_rows",
    "format_timing_csv",
    "format_trace_csv",
]

BANKS = ("pvn_ch", "pvn_app", "h_ex", "d1h_ch")


@dataclass(frozen=True)
class ArchConfig:
    """Deployment parameters: sub-decoder count, clock, iterations, and the
    fixed RAM operation delay in cycles.  RAMs are dual-port (two address
    accesses per RAM per cycle)."""

    n_sub: int
    clock_hz: float = 130e6
    iterations: int = 20
    ram_delay: int = 2
    ports: int = 2

    def groups(self, z2: int) -> int:
        if self.n_sub < 1 or self.n_sub > z2 or z2 % self.n_sub != 0:
            raise ValueError(
                f"n_sub={self.n_sub} must divide z2={z2} and lie in [1, z2]"
            )
        return z2 // self.n_sub


@dataclass(frozen=True)
class RamBankModel:
    kind: str
    count: int
    depth: int
    width: int


def ram_banks(code: LiftedCode, arch: ArchConfig, profile: QuantProfile) -> list:
    """Geometry of the four banks for one code/arch/bit-width combination."""
    G = arch.groups(code.z2)
    n, m, z1 = code.n, code.m, code.z1
    return [
        RamBankModel("pvn_ch", arch.n_sub, n * z1 * G, profile.w_ch_pvn),
        RamBankModel("pvn_app", arch.n_sub, n * z1 * G, profile.w_app_pvn),
        RamBankModel("h_ex", arch.n_sub, m * code.d * z1 * G, profile.w_ex_h),
        # doubled so the next codeword can stream in while decoding
        RamBankModel("d1h_ch", arch.n_sub, 2 * m * z1 * G, profile.w_ch_d1h(code.r)),
    ]


# ---------------------------------------------------------------------------
# address maps (each is a bijection between (depth, ram) pairs and indices)

def pvn_address(g: int, l: int, G: int, z2: int) -> int:
    """Variable-node index stored at depth g of RAM l."""
    if G < 1 or z2 % G != 0:
        raise ValueError("G must divide z2")
    n_sub = z2 // G
    if not 0 <= l < n_sub:
        raise ValueError(f"RAM index {l} out of [0, {n_sub})")
    if g < 0:
        raise ValueError("negative depth index")
    return (g // G) * z2 + l * G + (g % G)


def hex_address(q: int, l: int, d: int, n_sub: int):
    """(check node, edge slot) stored at depth q of RAM l."""
    if q < 0 or l < 0 or l >= n_sub:
        raise ValueError("index out of range")
    return (q // d) * n_sub + l, q % d


def d1h_address(w: int, l: int, n_sub: int) -> int:
    """Check node whose parity-bit channel word sits at depth w of RAM l."""
    if w < 0 or l < 0 or l >= n_sub:
        raise ValueError("index out of range")
    return w * n_sub + l


def shift_amount(p: int, address: int, G: int, n_sub: int) -> int:
    """Left-cyclic lane shift applied to one read word.

    For CPM offset p split as p = q_u * G + r_e, words whose depth residue
    is below r_e shift by q_u + 1, the rest by q_u; over a full set of G
    reads this realises the offset-p rotation.
    """
    if not 0 <= p < G * n_sub:
        raise ValueError(f"CPM offset {p} out of [0, {G * n_sub})")
    q_u, r_e = divmod(p, G)
    return (q_u + 1) % n_sub if (address % G) < r_e else q_u


def apply_interleave(values, p: int, G: int, n_sub: int) -> np.ndarray:
    """Route one z2-value set through the lane shifter.

    The set is laid out as lanes x depth (lane l holds indices
    [l G, (l+1) G)); each depth word is read, left-shifted per
    ``shift_amount`` and lands on processing slot (depth - p mod G) mod G.
    The composite effect is out[t] = values[(t + p) mod z2].
    """
    z2 = G * n_sub
    values = np.asarray(values)
    if values.shape != (z2,):
        raise ValueError(f"expected one set of {z2} values")
    grid = values.reshape(n_sub, G)
    out = np.empty_like(grid)
    r_e = p % G
    for a in range(G):
        word = grid[:, a]
        s = shift_amount(p, a, G, n_sub)
        out[:, (a - r_e) % G] = np.roll(word, -s)
    return out.reshape(z2)


# ---------------------------------------------------------------------------
# latency / throughput closed forms

def classify_case(r: int, G: int) -> str:
    """Pipeline regime: "I" when group loading finishes no later than the
    first sub-decoder output, "II" otherwise."""
    d = r + 2
    return "I" if d * G // 2 <= d // 2 + 2 * r + 1 else "II"


def layer_latency(r: int, G: int, case: str = None) -> int:
    """Cycles to fully update one layer (excluding the fixed RAM delay)."""
    if r < 2 or r % 2 != 0:
        raise ValueError("Hadamard order must be even and >= 2")
    if G < 1:
        raise ValueError("need at least one group")
    actual = classify_case(r, G)
    if case is not None and case != actual:
        raise ValueError(f"(r={r}, G={G}) is regime {actual}, not {case}")
    if actual == "I":
        return (r // 2 + 1) * G + 5 * r // 2 + 2
    return (r + 2) * G


def codeword_latency_and_throughput(code: LiftedCode, arch: ArchConfig):
    """(seconds per codeword, coded bits per second).

    Latency = I * layers * (layer cycles + RAM delay) / f_clk and the
    throughput divides the full codeword length (variable bits plus all
    degree-1 parity bits) by it.
    """
    G = arch.groups(code.z2)
    cycles = layer_latency(code.r, G) + arch.ram_delay
    latency = arch.iterations * code.num_layers * cycles / arch.clock_hz
    throughput = code.codeword_length / latency
    return latency, throughput


# ---------------------------------------------------------------------------
# event-driven schedule replay

@dataclass
class ScheduleReport:
    """Per-cycle replay of one layer's schedule.

    ``events`` maps cycle -> list of (bank, op, depth_address) for one
    representative RAM; every RAM of a bank sees the same pattern because
    reads share one address and the lane shifter permutes data, not
    addresses.  ``conflicts`` lists any (cycle, bank, count) where a RAM
    would need more than its two ports and must stay empty.
    """

    layer: int
    case: str
    groups: int
    total_cycles: int
    group_load_done: list
    group_output_done: list
    writeback_start: int
    writeback_end: int
    events: dict
    subdecoder_busy: dict
    fifo_occupancy: list
    fifo_peak: int
    conflicts: list
    latency_s: float
    throughput_bps: float

    def accesses(self, cycle: int, bank: str) -> int:
        return sum(1 for b, _, _ in self.events.get(cycle, ()) if b == bank)

    @property
    def loading_cycles(self) -> int:
        """Cycle at which the last group finishes loading (d G / 2)."""
        return self.group_load_done[-1]

    @property
    def first_output_cycle(self) -> int:
        """Cycle of the first completed sub-decoder group (d/2 + 2r + 1)."""
        return self.group_output_done[0]


def simulate_schedule(code: LiftedCode, arch: ArchConfig, layer: int = 0,
                      first_iteration: bool = False) -> ScheduleReport:
    """Replay the read / decode / write pipeline of one layer cycle by cycle.

    The replay places every RAM access at a concrete depth address, checks
    the dual-port budget and the bank depths, and must land exactly on the
    closed-form layer latency.
    """
    if not (0 <= layer < code.num_layers):
        raise ValueError(f"layer {layer} out of range")
    G = arch.groups(code.z2)
    r, d = code.r, code.d
    half = d // 2
    t_loading = half * G
    t_first = half + 2 * r + 1
    case = classify_case(r, G)
    total = layer_latency(r, G, case)

    cols = code.layers_cols[layer]
    pvn_depth = code.n * code.z1 * G
    hex_depth = code.m * d * code.z1 * G
    d1h_depth = 2 * code.m * code.z1 * G
    src_bank = "pvn_ch" if first_iteration else "pvn_app"

    events = {}

    def put(cycle, bank, op, addr, depth):
        if not 0 <= addr < depth:
            raise AssertionError(f"{bank} address {addr} outside depth {depth}")
        events.setdefault(cycle, []).append((bank, op, addr))

    def group_addresses(g, j):
        """Depth addresses touched while loading value pair j of group g."""
        out = []
        for bc, p in (cols[2 * j], cols[2 * j + 1]):
            out.append(bc * G + ((g + p) % G))
        return out

    # reads: G groups, d/2 cycles each, two value sets per cycle and bank
    for g in range(G):
        for j in range(half):
            cycle = g * half + j + 1
            for addr in group_addresses(g, j):
                put(cycle, src_bank, "read", addr, pvn_depth)
            qbase = (layer * G + g) * d + 2 * j
            put(cycle, "h_ex", "read", qbase, hex_depth)
            put(cycle, "h_ex", "read", qbase + 1, hex_depth)
        # one parity-word read as the group's last values arrive
        put((g + 1) * half, "d1h_ch", "read", layer * G + g, d1h_depth)

    # sub-decoder occupancy: group g pipelines for 2r + 1 cycles
    busy = {}
    for g in range(G):
        start = (g + 1) * half + 1
        for c in range(start, start + 2 * r + 1):
            busy.setdefault(c, []).append(g)
    load_done = [(g + 1) * half for g in range(G)]
    output_done = [(g + 1) * half + 2 * r + 1 for g in range(G)]

    # output stream: one write unit per cycle once the first group is done
    out_cycles = list(range(t_first + 1, t_first + t_loading + 1))
    if case == "I":
        wb_cycles = out_cycles
    else:
        wb_cycles = list(range(t_loading + 1, 2 * t_loading + 1))
    for t, cycle in enumerate(wb_cycles):
        g, j = divmod(t, half)
        for addr in group_addresses(g, j):
            put(cycle, "pvn_app", "write", addr, pvn_depth)
        qbase = (layer * G + g) * d + 2 * j
        put(cycle, "h_ex", "write", qbase, hex_depth)
        put(cycle, "h_ex", "write", qbase + 1, hex_depth)

    # FIFO occupancy in write units (one unit = one cycle of output data)
    fifo = []
    occ = 0
    for c in range(1, total + 1):
        if case == "II":
            if c in out_cycles:
                occ += 1
            if c in wb_cycles:
                occ -= 1
        fifo.append(occ)
    fifo_peak = max(fifo) if fifo else 0

    conflicts = []
    for cycle, evs in sorted(events.items()):
        for bank in BANKS:
            cnt = sum(1 for b, _, _ in evs if b == bank)
            if cnt > arch.ports:
                conflicts.append((cycle, bank, cnt))

    last_event = max(max(events), max(busy))
    if last_event != total or wb_cycles[-1] != total:
        raise AssertionError(
            f"schedule replay ended at cycle {max(last_event, wb_cycles[-1])}, "
            f"closed form says {total}"
        )

    latency, throughput = codeword_latency_and_throughput(code, arch)
    return ScheduleReport(
        layer=layer,
        case=case,
        groups=G,
        total_cycles=total,
        group_load_done=load_done,
        group_output_done=output_done,
        writeback_start=wb_cycles[0],
        writeback_end=wb_cycles[-1],
        events=events,
        subdecoder_busy=busy,
        fifo_occupancy=fifo,
        fifo_peak=fifo_peak,
        conflicts=conflicts,
        latency_s=latency,
        throughput_bps=throughput,
    )


# ---------------------------------------------------------------------------
# report formatting

def timing_rows(code: LiftedCode, archs) -> list:
    """One row per deployment: sub-decoder count, groups, regime, cycles
    per layer, and codeword latency / throughput."""
    rows = []
    for arch in archs:
        G = arch.groups(code.z2)
        case = classify_case(code.r, G)
        cycles = layer_latency(code.r, G, case)
        latency, throughput = codeword_latency_and_throughput(code, arch)
        rows.append({
            "nh": arch.n_sub,
            "groups": G,
            "case": case,
            "cycles_per_layer": cycles,
            "latency_s": latency,
            "throughput_bps": throughput,
        })
    return rows


def format_timing_csv(rows) -> str:
    lines = ["nh,groups,case,cycles_per_layer,latency_s,throughput_bps"]
    for row in rows:
        lines.append(
            f"{row['nh']},{row['groups']},{row['case']},{row['cycles_per_layer']},"
            f"{row['latency_s']:.6e},{row['throughput_bps']:.6e}"
        )
    return "\n".join(lines) + "\n"


def format_trace_csv(report: ScheduleReport) -> str:
    """Per-cycle dump: accesses per bank, sub-decoder groups in flight and
    FIFO fill, for diffing against timing-diagram milestones."""
    lines = ["cycle,bank,op,address"]
    for cycle in sorted(report.events):
        for bank, op, addr in report.events[cycle]:
            lines.append(f"{cycle},{bank},{op},{addr}")
    lines.append("")
    lines.append("cycle,groups_in_subdecoder,fifo_units")
    for c in range(1, report.total_cycles + 1):
        groups = "|".join(str(g) for g in report.subdecoder_busy.get(c, []))
        lines.append(f"{c},{groups},{report.fifo_occupancy[c - 1]}")
    return "\n".join(lines) + "\n"
