"""Signed fixed-point arithmetic and per-signal bit-width profiles.

All fixed-point values are carried as raw integers (numpy int64) scaled by
2**frac_bits.  Rounding is half-away-from-zero and saturation is symmetric,
so negating a representable value always yields a representable value.
"""

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QFormat",
    "QuantProfile",
    "CATEGORIES",
    "quantize",
    "dequantize",
    "saturate",
    "fixed_add",
    "fixed_sub",
    "fixed_shift_right",
    "convert",
    "align_op",
    "correction_table",
    "max_star_fixed",
    "profile_s1",
    "profile_s2",
    "profile_s3",
    "profile_wide",
    "get_profile",
    "load_profile",
    "save_profile",
]


@dataclass(frozen=True)
class QFormat:
    """Fixed-point format "1 sign + y int + z frac" with symmetric range.

    A value x is stored as round(x * 2**frac_bits) clipped to +-max_raw,
    where max_raw = 2**(int_bits + frac_bits) - 1.  The total storage
    width is 1 + int_bits + frac_bits.
    """

    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 0 or self.frac_bits < 0:
            raise ValueError("bit counts must be non-negative")
        if self.int_bits + self.frac_bits == 0:
            raise ValueError("format needs at least one magnitude bit")

    @property
    def width(self) -> int:
        return 1 + self.int_bits + self.frac_bits

    @property
    def max_raw(self) -> int:
        return (1 << (self.int_bits + self.frac_bits)) - 1

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def max_value(self) -> float:
        return self.max_raw / self.scale

    @classmethod
    def parse(cls, text: str) -> "QFormat":
        """Parse a "1+y+z" width string."""
        parts = text.strip().split("+")
        if len(parts) != 3 or parts[0].strip() != "1":
            raise ValueError(f"bad format string {text!r}, expected '1+y+z'")
        return cls(int(parts[1]), int(parts[2]))

    def __str__(self) -> str:
        return f"1+{self.int_bits}+{self.frac_bits}"


def saturate(raw, fmt: QFormat):
    """Clip raw integer values to the symmetric range of *fmt*."""
    m = fmt.max_raw
    return np.clip(np.asarray(raw, dtype=np.int64), -m, m)


def quantize(x, fmt: QFormat):
    """Real -> raw fixed point (round half away from zero, saturate)."""
    x = np.asarray(x, dtype=np.float64)
    mag = np.floor(np.abs(x) * fmt.scale + 0.5)
    raw = np.where(x < 0, -mag, mag)
    return saturate(raw, fmt)


def dequantize(raw, fmt: QFormat):
    return np.asarray(raw, dtype=np.float64) / fmt.scale


def fixed_add(a, b, fmt: QFormat):
    """Saturating addition of two raw values already in *fmt*."""
    return saturate(np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64), fmt)


def fixed_sub(a, b, fmt: QFormat):
    return saturate(np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64), fmt)


def fixed_shift_right(a, k: int = 1):
    """Arithmetic right shift; drops the least significant bits."""
    return np.asarray(a, dtype=np.int64) >> k


def _shift_down_round(raw, k: int):
    # half-away-from-zero rounding of raw / 2**k
    if k == 0:
        return raw
    mag = (np.abs(raw) + (1 << (k - 1))) >> k
    return np.where(raw < 0, -mag, mag)


def convert(raw, src: QFormat, dst: QFormat):
    """Re-scale raw values from *src* to *dst* and saturate.

    Increasing the fractional width is exact; decreasing rounds half away
    from zero, matching the quantizer.
    """
    raw = np.asarray(raw, dtype=np.int64)
    diff = dst.frac_bits - src.frac_bits
    if diff >= 0:
        raw = raw << diff
    else:
        raw = _shift_down_round(raw, -diff)
    return saturate(raw, dst)


def align_op(a, fmt_a: QFormat, b, fmt_b: QFormat, out: QFormat, op: str):
    """Exact add/sub of values in two formats, then round/saturate to *out*.

    Operands are aligned to the wider fractional width, combined in exact
    integer arithmetic, and reduced to the output format in one rounding
    step (the model of a hardware adder followed by a width-limited bus).
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    f = max(fmt_a.frac_bits, fmt_b.frac_bits)
    a = a << (f - fmt_a.frac_bits)
    b = b << (f - fmt_b.frac_bits)
    r = a + b if op == "add" else a - b
    r = _shift_down_round(r, f - out.frac_bits) if f > out.frac_bits else r << (out.frac_bits - f)
    return saturate(r, out)


def correction_table(fmt: QFormat, x_max: float = None) -> np.ndarray:
    """Tabulated ln(1 + exp(-x)) for the fixed-point Jacobian correction.

    The table is indexed by the raw difference |a - b| in *fmt* units, one
    entry per LSB on [0, x_max); beyond x_max the correction is treated as
    zero.  The default span is 4.0 for coarse formats, where the dropped
    tail (< 0.02) is below a 2-fraction-bit LSB, and widens automatically
    so the dropped tail stays under half an LSB for finer formats.
    """
    if x_max is None:
        x_max = max(4.0, (fmt.frac_bits + 1) * np.log(2.0))
    n = max(1, int(np.ceil(x_max * fmt.scale)))
    xs = np.arange(n, dtype=np.float64) / fmt.scale
    return quantize(np.log1p(np.exp(-xs)), fmt).astype(np.int64)


def max_star_fixed(a, b, fmt: QFormat, table: np.ndarray):
    """max(a, b) plus table lookup on |a - b|, saturated to *fmt*."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    m = np.maximum(a, b)
    diff = np.abs(a - b)
    corr = np.where(diff < table.shape[0], table[np.minimum(diff, table.shape[0] - 1)], 0)
    return saturate(m + corr, fmt)


# ---------------------------------------------------------------------------
# bit-width profiles

CATEGORIES = (
    "channel",
    "pvn_app",
    "hcn_extrinsic",
    "d1h_channel",
    "fht_output",
    "dfht_input",
    "dfht_internal",
    "dfht_output",
)

# categories that widen when the stored-LLR integer range is grown by one bit
_STORED_LLR_CATEGORIES = ("pvn_app", "hcn_extrinsic", "d1h_channel")


@dataclass(frozen=True)
class QuantProfile:
    """Per-signal-category fixed-point formats for the whole decoder.

    The memory model reads its word widths from here: the P-VN channel RAM
    word is ``channel.width`` bits, the APP and extrinsic RAM words are
    ``pvn_app.width`` and ``hcn_extrinsic.width`` bits, and one D1H channel
    word packs all 2**r - r - 2 observations of a check node at the
    channel width.
    """

    name: str
    channel: QFormat
    pvn_app: QFormat
    hcn_extrinsic: QFormat
    d1h_channel: QFormat
    fht_output: QFormat
    dfht_input: QFormat
    dfht_internal: QFormat
    dfht_output: QFormat

    def format_for(self, category: str) -> QFormat:
        if category not in CATEGORIES:
            raise KeyError(f"unknown signal category {category!r}")
        return getattr(self, category)

    @property
    def w_ch_pvn(self) -> int:
        return self.channel.width

    @property
    def w_app_pvn(self) -> int:
        return self.pvn_app.width

    @property
    def w_ex_h(self) -> int:
        return self.hcn_extrinsic.width

    def w_ch_d1h(self, r: int) -> int:
        return self.channel.width * ((1 << r) - r - 2)

    def replace(self, name: str, **formats) -> "QuantProfile":
        fields = {c: getattr(self, c) for c in CATEGORIES}
        fields.update(formats)
        return QuantProfile(name=name, **fields)


def profile_s1() -> QuantProfile:
    """Baseline bit widths.

    Channel observations are narrow, stored LLRs one step wider, and the
    transform datapath wider still.  These defaults are a reconstruction:
    only the deltas between S1, S2 and S3 are pinned by tests.
    """
    return QuantProfile(
        name="S1",
        channel=QFormat(4, 2),
        pvn_app=QFormat(6, 2),
        hcn_extrinsic=QFormat(6, 2),
        d1h_channel=QFormat(6, 2),
        fht_output=QFormat(7, 2),
        dfht_input=QFormat(7, 2),
        dfht_internal=QFormat(7, 2),
        dfht_output=QFormat(7, 2),
    )


def profile_s2() -> QuantProfile:
    """S1 with one extra integer bit on every stored LLR category.

    Channel observations keep their width; the transform datapath is
    untouched.
    """
    base = profile_s1()
    wider = {
        c: QFormat(base.format_for(c).int_bits + 1, base.format_for(c).frac_bits)
        for c in _STORED_LLR_CATEGORIES
    }
    return base.replace("S2", **wider)


def profile_s3() -> QuantProfile:
    """S2 with one extra fraction bit on the FHT output, DFHT input and
    DFHT internal stages ("1+7+2" -> "1+7+3")."""
    base = profile_s2()
    finer = {
        c: QFormat(base.format_for(c).int_bits, base.format_for(c).frac_bits + 1)
        for c in ("fht_output", "dfht_input", "dfht_internal")
    }
    return base.replace("S3", **finer)


def profile_wide() -> QuantProfile:
    """Very wide formats ("1+15+10" everywhere); near-float behaviour."""
    f = QFormat(15, 10)
    return QuantProfile("wide", *([f] * 8))


_BUILTIN = {
    "S1": profile_s1,
    "S2": profile_s2,
    "S3": profile_s3,
    "wide": profile_wide,
}


def get_profile(name: str) -> QuantProfile:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown built-in profile {name!r}; use one of {sorted(_BUILTIN)}") from None


def load_profile(path) -> QuantProfile:
    """Read a profile from a JSON file mapping category -> "1+y+z"."""
    with open(path) as fh:
        data = json.load(fh)
    missing = [c for c in CATEGORIES if c not in data]
    if missing:
        raise ValueError(f"profile file is missing categories: {missing}")
    formats = {c: QFormat.parse(data[c]) for c in CATEGORIES}
    return QuantProfile(name=data.get("name", str(path)), **formats)


def save_profile(profile: QuantProfile, path) -> None:
    data = {"name": profile.name}
    data.update({c: str(profile.format_for(c)) for c in CATEGORIES})
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
