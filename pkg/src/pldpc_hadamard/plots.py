"""Figure rendering for the report paths (written next to the CSV output)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["ber_fer_figure", "timing_figure", "schedule_figure"]


def ber_fer_figure(results, info_bits_per_frame, path, label=""):
    """Semilog BER/FER curves over Eb/N0."""
    ebn0 = [r.ebn0_db for r in results]
    ber = [max(r.ber(info_bits_per_frame), 1e-12) for r in results]
    fer = [max(r.fer(), 1e-12) for r in results]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.semilogy(ebn0, ber, "o-", label=f"BER {label}".strip())
    ax.semilogy(ebn0, fer, "s--", label=f"FER {label}".strip())
    ax.set_xlabel(r"$E_b/N_0$ (dB)")
    ax.set_ylabel("error rate")
    ax.grid(True, which="both", linestyle=":", linewidth=0.5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def timing_figure(rows, path):
    """Latency and throughput against the sub-decoder count."""
    nh = [row["nh"] for row in rows]
    lat = [row["latency_s"] * 1e3 for row in rows]
    tput = [row["throughput_bps"] / 1e9 for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(nh, lat, "o-")
    ax1.set_xlabel(r"$N_h$ (sub-decoders)")
    ax1.set_ylabel("codeword latency (ms)")
    ax1.set_xscale("log", base=2)
    ax1.grid(True, linestyle=":", linewidth=0.5)
    ax2.plot(nh, tput, "s-", color="tab:orange")
    ax2.set_xlabel(r"$N_h$ (sub-decoders)")
    ax2.set_ylabel("coded throughput (Gbps)")
    ax2.set_xscale("log", base=2)
    ax2.grid(True, linestyle=":", linewidth=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def schedule_figure(report, path):
    """One-layer pipeline view: per-group load / decode / write windows,
    RAM port usage and FIFO fill."""
    G = report.groups
    total = report.total_cycles
    half = (report.group_load_done[0])  # d/2 cycles per group load
    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(9, 5.5), sharex=True,
        gridspec_kw={"height_ratios": [2.2, 1.0]},
    )
    for g in range(G):
        load_start = g * half + 1
        ax1.broken_barh([(load_start - 0.5, half)], (g - 0.35, 0.7),
                        facecolors="tab:blue")
        proc_start = report.group_load_done[g] + 1
        ax1.broken_barh([(proc_start - 0.5, report.group_output_done[g] - proc_start + 1)],
                        (g - 0.35, 0.7), facecolors="tab:green", alpha=0.7)
    ax1.broken_barh(
        [(report.writeback_start - 0.5, report.writeback_end - report.writeback_start + 1)],
        (G - 0.35 + 0.6, 0.7), facecolors="tab:red", alpha=0.8,
    )
    ax1.set_yticks(list(range(G)) + [G + 0.25])
    ax1.set_yticklabels([f"group {g}" for g in range(G)] + ["write-back"])
    ax1.set_title(
        f"layer schedule: regime {report.case}, {total} cycles "
        f"(load=blue, decode=green, write=red)"
    )
    ax1.grid(True, axis="x", linestyle=":", linewidth=0.5)

    cycles = np.arange(1, total + 1)
    for bank in ("pvn_app", "h_ex", "d1h_ch", "pvn_ch"):
        acc = [report.accesses(c, bank) for c in cycles]
        if any(acc):
            ax2.step(cycles, acc, where="mid", label=bank)
    ax2.step(cycles, report.fifo_occupancy, where="mid", label="FIFO fill",
             color="black", linestyle="--")
    ax2.set_xlabel("clock cycle")
    ax2.set_ylabel("port accesses / units")
    ax2.legend(loc="upper right", fontsize=8, ncol=2)
    ax2.grid(True, linestyle=":", linewidth=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
