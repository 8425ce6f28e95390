"""Double-lifted quasi-cyclic code construction.

A base matrix with constant even row weight d is lifted twice: the first
lift replaces each multiplicity-B(i,j) entry by B(i,j) distinct z1 x z1
circulant permutations (removing parallel edges), the second replaces each
surviving 1 by a z2 x z2 circulant permutation (CPM) with an offset in
[0, z2).  A CPM with offset p is the identity cyclically shifted right by
p columns, so row i has its 1 in column (i + p) mod z2.

Each block row of the twice-lifted matrix is one decoding layer holding
z2 Hadamard check nodes and exactly d CPMs; because stage 1 leaves at most
one edge per block position, the d CPMs of a layer sit in distinct block
columns and the layer's d*z2 variable nodes are all distinct.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "BaseMatrix",
    "Stage1Lift",
    "LiftedCode",
    "LayerView",
    "DEFAULT_BASE",
    "lift_stage1",
    "lift_stage2",
    "build_code",
    "code_rate",
    "layer_view",
    "load_code",
    "save_code",
]


@dataclass(frozen=True)
class BaseMatrix:
    """Small protograph matrix; entries are parallel-edge multiplicities."""

    rows: tuple

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise ValueError("base matrix must be non-empty")
        widths = {len(r) for r in self.rows}
        if len(widths) != 1:
            raise ValueError("ragged base matrix")
        if any(v < 0 for r in self.rows for v in r):
            raise ValueError("multiplicities must be non-negative")
        sums = {sum(r) for r in self.rows}
        if len(sums) != 1:
            raise ValueError(f"row weights differ: {sorted(sums)}")
        d = sums.pop()
        if d % 2 != 0 or d < 4:
            raise ValueError(f"row weight must be even and >= 4, got {d}")

    @classmethod
    def from_array(cls, a) -> "BaseMatrix":
        return cls(tuple(tuple(int(v) for v in row) for row in a))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    @property
    def d(self) -> int:
        return sum(self.rows[0])

    @property
    def r(self) -> int:
        return self.d - 2

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)


# Rate-0.0494 base matrix (7 x 11, row weight 6) used as the default code.
DEFAULT_BASE = BaseMatrix.from_array([
    [1, 0, 0, 0, 0, 0, 1, 0, 3, 0, 1],
    [0, 1, 2, 0, 0, 0, 0, 0, 0, 2, 1],
    [2, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1],
    [0, 1, 0, 3, 0, 0, 0, 0, 0, 2, 0],
    [2, 0, 0, 0, 0, 0, 0, 1, 0, 3, 0],
    [3, 0, 0, 2, 0, 0, 1, 0, 0, 0, 0],
    [1, 0, 0, 1, 1, 0, 0, 0, 1, 2, 0],
])


@dataclass(frozen=True)
class Stage1Lift:
    """First lift: per base cell, the distinct circulant offsets used."""

    base: BaseMatrix
    z1: int
    offsets: tuple  # offsets[i][j] = sorted tuple of circulant offsets

    def cells(self):
        """Yield (block_row, block_col) of every 1 in the lifted binary
        matrix, row-major.  A circulant offset o maps row a to column
        (a + o) mod z1 within its block."""
        m, n, z1 = self.base.m, self.base.n, self.z1
        for i in range(m):
            for a in range(z1):
                cols = []
                for j in range(n):
                    for o in self.offsets[i][j]:
                        cols.append(j * z1 + (a + o) % z1)
                for bc in sorted(cols):
                    yield i * z1 + a, bc

    def block_matrix(self) -> np.ndarray:
        out = np.zeros((self.base.m * self.z1, self.base.n * self.z1), dtype=np.uint8)
        for br, bc in self.cells():
            out[br, bc] = 1
        return out


def lift_stage1(base: BaseMatrix, z1: int, seed=None, offsets=None) -> Stage1Lift:
    """Replace each base entry by that many distinct circulant permutations.

    Offsets are drawn without replacement from a seeded generator unless an
    explicit assignment ``offsets[(i, j)] = [o, ...]`` is given.
    """
    maxmul = max(v for row in base.rows for v in row)
    if z1 < maxmul:
        raise ValueError(f"z1={z1} is smaller than the largest multiplicity {maxmul}")
    if offsets is not None:
        table = []
        for i in range(base.m):
            row = []
            for j in range(base.n):
                got = tuple(sorted(int(o) for o in offsets.get((i, j), ())))
                want = base.rows[i][j]
                if len(got) != want:
                    raise ValueError(f"cell ({i},{j}) needs {want} offsets, got {len(got)}")
                if len(set(got)) != len(got):
                    raise ValueError(f"duplicate offsets at cell ({i},{j})")
                if any(o < 0 or o >= z1 for o in got):
                    raise ValueError(f"offset out of [0, z1) at cell ({i},{j})")
                row.append(got)
            table.append(tuple(row))
        return Stage1Lift(base, z1, tuple(table))
    rng = np.random.default_rng(seed)
    table = []
    for i in range(base.m):
        row = []
        for j in range(base.n):
            k = base.rows[i][j]
            picks = rng.choice(z1, size=k, replace=False) if k else np.empty(0, dtype=np.int64)
            row.append(tuple(sorted(int(o) for o in picks)))
        table.append(tuple(row))
    return Stage1Lift(base, z1, tuple(table))


class LiftedCode:
    """Twice-lifted quasi-cyclic code descriptor.

    Immutable after construction; one instance can back any number of
    concurrent decoders.  ``edges`` is the sorted tuple of
    (block_row, block_col, cpm_offset) triples of the second lift, which
    fully determines the adjacency, so equal edge tuples mean bit-identical
    codes.
    """

    def __init__(self, m, n, z1, z2, r, edges, base=None):
        self.m = int(m)
        self.n = int(n)
        self.z1 = int(z1)
        self.z2 = int(z2)
        self.r = int(r)
        self.d = self.r + 2
        if self.r % 2 != 0 or self.r < 2:
            raise ValueError("Hadamard order must be even and >= 2")
        if self.z1 < 1 or self.z2 < 1:
            raise ValueError("lifting factors must be positive")
        self.edges = tuple(sorted((int(a), int(b), int(p)) for a, b, p in edges))
        self.base = base
        self._validate()
        self.layers_cols = self._layer_table()
        self._hcn_of_pvn = None

    # -- invariants -------------------------------------------------------
    def _validate(self):
        seen = set()
        per_row = [0] * (self.m * self.z1)
        col_w = [0] * (self.n * self.z1)
        for br, bc, p in self.edges:
            if not (0 <= br < self.m * self.z1 and 0 <= bc < self.n * self.z1):
                raise ValueError(f"block position ({br},{bc}) out of range")
            if not (0 <= p < self.z2):
                raise ValueError(f"CPM offset {p} out of [0, z2={self.z2})")
            if (br, bc) in seen:
                raise ValueError(f"parallel edge at block position ({br},{bc})")
            seen.add((br, bc))
            per_row[br] += 1
            col_w[bc] += 1
        bad = [k for k, w in enumerate(per_row) if w != self.d]
        if bad:
            raise ValueError(f"layers {bad[:4]}... must contain exactly {self.d} CPMs")
        # column weights must replicate the base column weights
        for j in range(self.n):
            ws = set(col_w[j * self.z1:(j + 1) * self.z1])
            if len(ws) != 1:
                raise ValueError(f"uneven column weight inside base column {j}")

    def _layer_table(self):
        table = [[] for _ in range(self.m * self.z1)]
        for br, bc, p in self.edges:
            table[br].append((bc, p))
        out = []
        for k, cols in enumerate(table):
            cols.sort()
            if len({bc for bc, _ in cols}) != self.d:
                raise ValueError(f"layer {k} reuses a block column")
            out.append(tuple(cols))
        return tuple(out)

    # -- derived sizes ----------------------------------------------------
    @property
    def num_layers(self) -> int:
        return self.m * self.z1

    @property
    def M(self) -> int:
        return self.m * self.z1 * self.z2

    @property
    def N(self) -> int:
        return self.n * self.z1 * self.z2

    @property
    def d1h_per_hcn(self) -> int:
        return (1 << self.r) - self.d

    @property
    def codeword_length(self) -> int:
        return self.N + self.M * self.d1h_per_hcn

    @property
    def rate(self) -> Fraction:
        return code_rate(self.m, self.n, self.r)

    # -- connectivity -----------------------------------------------------
    def pvn_neighbors(self, alpha: int) -> np.ndarray:
        """The d variable nodes of check node alpha, in block-column order."""
        if not (0 <= alpha < self.M):
            raise ValueError(f"check node {alpha} out of range")
        k, i = divmod(alpha, self.z2)
        return np.array(
            [bc * self.z2 + (i + p) % self.z2 for bc, p in self.layers_cols[k]],
            dtype=np.int64,
        )

    def hcn_neighbors(self, beta: int):
        """Check nodes touching variable node beta (derived dual view)."""
        if self._hcn_of_pvn is None:
            dual = [[] for _ in range(self.N)]
            for k in range(self.num_layers):
                for bc, p in self.layers_cols[k]:
                    for i in range(self.z2):
                        dual[bc * self.z2 + (i + p) % self.z2].append(k * self.z2 + i)
            self._hcn_of_pvn = tuple(tuple(x) for x in dual)
        return self._hcn_of_pvn[beta]

    def pvn_index_tensor(self) -> np.ndarray:
        """(layers, z2, d) table of variable-node indices per check node."""
        shape = (self.num_layers, self.z2, self.d)
        idx = np.empty(shape, dtype=np.int64)
        i = np.arange(self.z2)
        for k, cols in enumerate(self.layers_cols):
            for dd, (bc, p) in enumerate(cols):
                idx[k, :, dd] = bc * self.z2 + (i + p) % self.z2
        return idx

    def expand_dense(self) -> np.ndarray:
        """Dense (M, N) binary adjacency; intended for small codes/tests."""
        H = np.zeros((self.M, self.N), dtype=np.uint8)
        i = np.arange(self.z2)
        for br, bc, p in self.edges:
            H[br * self.z2 + i, bc * self.z2 + (i + p) % self.z2] = 1
        return H

    def __eq__(self, other):
        return (
            isinstance(other, LiftedCode)
            and (self.m, self.n, self.z1, self.z2, self.r) ==
                (other.m, other.n, other.z1, other.z2, other.r)
            and self.edges == other.edges
        )

    def __repr__(self):
        return (f"LiftedCode(m={self.m}, n={self.n}, z1={self.z1}, z2={self.z2}, "
                f"r={self.r}, N={self.N}, M={self.M})")


def lift_stage2(stage1: Stage1Lift, z2: int, seed=None, shifts=None) -> LiftedCode:
    """Assign a CPM offset to every stage-1 edge.

    ``shifts`` may map (block_row, block_col) -> offset to reproduce an
    externally published code; otherwise offsets are seeded-random.
    """
    cells = list(stage1.cells())
    if shifts is not None:
        edges = []
        for br, bc in cells:
            if (br, bc) not in shifts:
                raise ValueError(f"missing CPM offset for block position ({br},{bc})")
            edges.append((br, bc, int(shifts[(br, bc)])))
    else:
        rng = np.random.default_rng(seed)
        edges = [(br, bc, int(rng.integers(0, z2))) for br, bc in cells]
    return LiftedCode(
        stage1.base.m, stage1.base.n, stage1.z1, z2, stage1.base.r,
        edges, base=stage1.base,
    )


def build_code(base: BaseMatrix, z1: int, z2: int, seed=0) -> LiftedCode:
    """Double lift with a single seed driving both stages."""
    ss = np.random.SeedSequence(seed)
    s1, s2 = ss.spawn(2)
    stage1 = lift_stage1(base, z1, seed=s1)
    return lift_stage2(stage1, z2, seed=s2)


def code_rate(m: int, n: int, r: int) -> Fraction:
    """Overall rate (n - m) / (m (2**r - r - 2) + n)."""
    if n < m:
        raise ValueError("need at least as many variable-node columns as rows")
    if r < 2 or r % 2 != 0:
        raise ValueError("Hadamard order must be even and >= 2")
    return Fraction(n - m, m * ((1 << r) - r - 2) + n)


@dataclass(frozen=True)
class LayerView:
    """Resolved connectivity of one layer: z2 check nodes, their d*z2
    variable nodes and the attached degree-1 parity counts."""

    k: int
    hcns: range
    cols: tuple            # d (block_col, cpm_offset) pairs, ascending
    pvn: np.ndarray        # (z2, d) variable-node indices per check node

    @property
    def num_hcns(self) -> int:
        return len(self.hcns)

    @property
    def num_pvns(self) -> int:
        return self.pvn.size

    def num_d1h(self, r: int) -> int:
        return ((1 << r) - (r + 2)) * len(self.hcns)

    def pvn_of(self, alpha: int) -> np.ndarray:
        return self.pvn[alpha - self.hcns.start]


def layer_view(code: LiftedCode, k: int) -> LayerView:
    if not (0 <= k < code.num_layers):
        raise ValueError(f"layer {k} out of [0, {code.num_layers})")
    cols = code.layers_cols[k]
    i = np.arange(code.z2)
    pvn = np.empty((code.z2, code.d), dtype=np.int64)
    for dd, (bc, p) in enumerate(cols):
        pvn[:, dd] = bc * code.z2 + (i + p) % code.z2
    view = LayerView(k=k, hcns=range(k * code.z2, (k + 1) * code.z2), cols=cols, pvn=pvn)
    # per-layer disjointness: every variable node appears at most once
    flat = pvn.ravel()
    if np.unique(flat).size != flat.size:
        raise AssertionError(f"layer {k} touches a variable node twice")
    return view


# ---------------------------------------------------------------------------
# code-description files: header "m n z1 z2 r", then "blockrow blockcol shift"

def save_code(code: LiftedCode, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{code.m} {code.n} {code.z1} {code.z2} {code.r}\n")
        for br, bc, p in code.edges:
            fh.write(f"{br} {bc} {p}\n")


def load_code(path) -> LiftedCode:
    """Parse and fully validate a code-description file."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty code-description file")
    head = lines[0].split()
    if len(head) != 5:
        raise ValueError("header must be 'm n z1 z2 r'")
    m, n, z1, z2, r = (int(v) for v in head)
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"bad edge line {ln!r}, expected 'blockrow blockcol shift'")
        edges.append(tuple(int(v) for v in parts))
    code = LiftedCode(m, n, z1, z2, r, edges)
    code.base = _reconstruct_base(code)
    return code


def _reconstruct_base(code: LiftedCode) -> BaseMatrix:
    counts = np.zeros((code.m, code.n), dtype=np.int64)
    for br, bc, _ in code.edges:
        counts[br // code.z1, bc // code.z1] += 1
    if np.any(counts % code.z1 != 0):
        raise ValueError("edge counts are not a z1-lift of any base matrix")
    return BaseMatrix.from_array(counts // code.z1)
