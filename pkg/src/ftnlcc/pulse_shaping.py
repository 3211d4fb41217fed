"""Root-raised-cosine pulses and the discrete ISI taps of the FTN equivalent model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ModelValidityError(ValueError):
    """Raised when tau is too large for the orthonormal-basis equivalent model."""


@dataclass(frozen=True)
class RrcParams:
    rolloff: float = 0.35
    symbol_period: float = 1.0
    span: int = 40

    def __post_init__(self):
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError(f"rolloff must lie in [0, 1], got {self.rolloff}")
        if self.symbol_period <= 0:
            raise ValueError(f"symbol_period must be positive, got {self.symbol_period}")
        if self.span < 1:
            raise ValueError(f"span must be >= 1, got {self.span}")


@dataclass(frozen=True)
class TapSet:
    """ISI coefficients h_n for n = -L..L, with h_0 stored at ``center_index``."""

    taps: np.ndarray
    tau: float = 1.0

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float).ravel()
        if taps.size % 2 != 1:
            raise ValueError(f"tap count must be odd, got {taps.size}")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def center_index(self) -> int:
        return self.taps.size // 2

    @property
    def half_width(self) -> int:
        return self.taps.size // 2

    def __len__(self) -> int:
        return self.taps.size

    def tap(self, n: int) -> float:
        """Return h_n, zero outside the stored support."""
        idx = self.center_index + n
        if 0 <= idx < self.taps.size:
            return float(self.taps[idx])
        return 0.0

    def energy(self) -> float:
        return float(np.dot(self.taps, self.taps))


def rrc_pulse(params: RrcParams, t):
    """Unit-energy root-raised-cosine pulse evaluated at ``t`` (scalar or array).

    The removable singularities at t = 0 and |t| = T/(4 beta) are replaced by
    their closed-form limits.
    """
    beta = params.rolloff
    T = params.symbol_period
    t = np.asarray(t, dtype=float)
    x = t / T
    scale = 1.0 / np.sqrt(T)

    out = np.empty_like(x)
    at_zero = np.isclose(x, 0.0, rtol=0.0, atol=1e-12)
    if beta > 0:
        at_edge = np.isclose(np.abs(x), 1.0 / (4.0 * beta), rtol=0.0, atol=1e-12)
    else:
        at_edge = np.zeros_like(at_zero)
    regular = ~(at_zero | at_edge)

    xr = x[regular]
    num = np.sin(np.pi * xr * (1 - beta)) + 4 * beta * xr * np.cos(np.pi * xr * (1 + beta))
    den = np.pi * xr * (1 - (4 * beta * xr) ** 2)
    out[regular] = scale * num / den
    out[at_zero] = scale * (1 - beta + 4 * beta / np.pi)
    if beta > 0:
        arg = np.pi / (4 * beta)
        out[at_edge] = scale * (beta / np.sqrt(2)) * (
            (1 + 2 / np.pi) * np.sin(arg) + (1 - 2 / np.pi) * np.cos(arg)
        )
    if out.ndim == 0:
        return float(out)
    return out


def max_tau(rolloff: float) -> float:
    return 1.0 / (1.0 + rolloff)


def sample_taps(params: RrcParams, tau: float, span: int | None = None) -> TapSet:
    """Sample the pulse at tau*T spacing: h_n = sqrt(tau T) h(n tau T), |n| <= span."""
    if span is None:
        span = params.span
    if span < 1:
        raise ValueError(f"span must be >= 1, got {span}")
    if not 0 < tau <= 1:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    if tau >= max_tau(params.rolloff):
        raise ModelValidityError(
            f"tau={tau} violates tau < 1/(1+rolloff) = {max_tau(params.rolloff):.6f}"
        )
    T = params.symbol_period
    n = np.arange(-span, span + 1)
    taps = np.sqrt(tau * T) * rrc_pulse(params, n * tau * T)
    # enforce exact even symmetry against rounding in the closed form
    taps = 0.5 * (taps + taps[::-1])
    return TapSet(taps, tau=tau)


def truncate_taps(full: TapSet, nt: int) -> TapSet:
    """Keep the ``nt`` centered taps (the dominant block). No renormalization."""
    if nt < 1 or nt % 2 != 1:
        raise ValueError(f"nt must be a positive odd integer, got {nt}")
    if nt > len(full):
        raise ValueError(f"nt={nt} exceeds tap count {len(full)}")
    c = full.center_index
    h = (nt - 1) // 2
    return TapSet(full.taps[c - h : c + h + 1], tau=full.tau)


TOY_TAPS = TapSet(np.array([0.3, 0.8, 0.3]))
