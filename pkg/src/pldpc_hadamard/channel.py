"""BPSK over AWGN with LLR output."""

from dataclasses import dataclass

import numpy as np

__all__ = ["ChannelConfig", "modulate_and_transmit"]


@dataclass(frozen=True)
class ChannelConfig:
    """Eb/N0 operating point for a given code rate (unit-energy BPSK)."""

    ebn0_db: float
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("code rate must be positive")

    @property
    def noise_variance(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))


def modulate_and_transmit(pvn_bits, d1h_bits, config: ChannelConfig, rng):
    """Map bits to +-1, add white Gaussian noise, return channel LLRs.

    Bit b maps to 1 - 2b; the LLR of a received sample y is 2y / sigma^2.
    Output shapes mirror the inputs: (..., N) for the variable nodes and
    (..., M, 2**r - d) for the degree-1 parity bits.
    """
    sigma2 = config.noise_variance
    sigma = np.sqrt(sigma2)
    x_pvn = 1.0 - 2.0 * np.asarray(pvn_bits, dtype=np.float64)
    x_d1h = 1.0 - 2.0 * np.asarray(d1h_bits, dtype=np.float64)
    y_pvn = x_pvn + rng.normal(0.0, sigma, size=x_pvn.shape)
    y_d1h = x_d1h + rng.normal(0.0, sigma, size=x_d1h.shape)
    return 2.0 * y_pvn / sigma2, 2.0 * y_d1h / sigma2
