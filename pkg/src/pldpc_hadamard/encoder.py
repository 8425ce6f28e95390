"""Systematic encoding for the lifted code.

The variable-node bits form the null space of the binary adjacency matrix
(every check node needs even parity over its d neighbours so that a
Hadamard codeword exists).  Setup runs one GF(2) elimination to reduced
row-echelon form; the non-pivot columns become the information positions.
Each check node's d bits are then extended with its 2**r - d Hadamard
parity bits, which ride along as degree-1 nodes.
"""

import numpy as np

from .construction import LiftedCode
from .hadamard import HadamardContext, encode_parity_bits

__all__ = ["RankDeficiencyError", "gf2_rref", "FrameEncoder"]


class RankDeficiencyError(ValueError):
    """The adjacency matrix does not have full row rank over GF(2)."""

    def __init__(self, rank, rows):
        super().__init__(
            f"adjacency matrix has GF(2) rank {rank} < {rows} rows; "
            "this lift cannot be encoded with N - M information bits "
            "(try another construction seed or an explicit assignment)"
        )
        self.rank = rank
        self.rows = rows


def gf2_rref(mat: np.ndarray):
    """Reduced row-echelon form over GF(2); returns (rref, pivot_columns)."""
    A = np.array(mat, dtype=np.uint8, copy=True)
    rows, cols = A.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        nz = np.nonzero(A[row:, col])[0]
        if nz.size == 0:
            continue
        pr = row + int(nz[0])
        if pr != row:
            A[[row, pr]] = A[[pr, row]]
        sel = A[:, col].astype(bool)
        sel[row] = False
        A[sel] ^= A[row]
        pivots.append(col)
        row += 1
    return A, pivots


class FrameEncoder:
    """Maps information bits to full codewords of one lifted code.

    Setup cost is one dense GF(2) elimination of the expanded adjacency,
    so this is meant for desk-scale codes.  Encoding itself is a binary
    matrix product and is batch-friendly.
    """

    def __init__(self, code: LiftedCode):
        self.code = code
        self.ctx = HadamardContext(code.r)
        H = code.expand_dense()
        R, pivots = gf2_rref(H)
        if len(pivots) < code.M:
            raise RankDeficiencyError(len(pivots), code.M)
        self.parity_positions = np.array(pivots, dtype=np.int64)
        self.info_positions = np.array(
            sorted(set(range(code.N)) - set(pivots)), dtype=np.int64
        )
        # pivot bit = parity of the matching info bits: x[pivots] = P @ info
        self._P = R[: len(pivots)][:, self.info_positions]
        self._pvn_idx = code.pvn_index_tensor().reshape(-1, code.d)

    @property
    def k(self) -> int:
        """Number of information bits."""
        return self.code.N - self.code.M

    def encode(self, info_bits):
        """info bits (k,) or (B, k) -> (pvn_bits, d1h_bits).

        ``pvn_bits`` has shape (..., N); ``d1h_bits`` has shape
        (..., M, 2**r - d) with one parity group per check node.
        """
        info = np.asarray(info_bits, dtype=np.uint8)
        single = info.ndim == 1
        if single:
            info = info[None]
        if info.shape[1] != self.k:
            raise ValueError(f"expected {self.k} information bits, got {info.shape[1]}")
        B = info.shape[0]
        x = np.zeros((B, self.code.N), dtype=np.uint8)
        x[:, self.info_positions] = info
        x[:, self.parity_positions] = (info @ self._P.T) % 2
        spc = x[:, self._pvn_idx]                       # (B, M, d)
        d1h = encode_parity_bits(self.ctx, spc)         # (B, M, q-d)
        if single:
            return x[0], d1h[0]
        return x, d1h

    def full_codeword(self, info_bits) -> np.ndarray:
        """Concatenated transmit order: N variable bits, then the parity
        groups of check nodes 0..M-1."""
        pvn, d1h = self.encode(info_bits)
        return np.concatenate([pvn, d1h.reshape(d1h.shape[:-2] + (-1,))], axis=-1)
