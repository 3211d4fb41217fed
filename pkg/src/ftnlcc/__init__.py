"""Low-complexity nearest-neighbor detection of faster-than-Nyquist BPSK."""

__version__ = "0.1.0"
