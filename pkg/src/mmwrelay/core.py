"""Domain types and per-realization performance formulas.

The downlink is two-hop: the BS precodes K unicast symbols with F
(N_t x K), the relay applies G (N_r x N_r) to its received signal and
forwards, and single-antenna user k applies a scalar receiver V_k. All
formulas below are pure functions of the precoders, one channel
realization, and the scenario config; rates are reported in bit/s/Hz
while the weighted-MSE bookkeeping stays in nats so that the minimum
augmented WMSE equals 1 minus the per-user rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import DimensionError, DomainError

LN2 = math.log(2.0)


def _frozen_complex(value, name, ndim):
    arr = np.array(value, dtype=np.complex128)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise DimensionError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    h_sr : (N_r, N_t) BS-to-relay matrix.
    h_users : (K, N_r), row k is the relay-to-user-k row vector h_k.
    user_geometry : (K, 2) columns [distance_m, angle_deg], BS-relative.
    """

    h_sr: np.ndarray
    h_users: np.ndarray
    user_geometry: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h_sr", _frozen_complex(self.h_sr, "h_sr", 2))
        object.__setattr__(self, "h_users", _frozen_complex(self.h_users, "h_users", 2))
        geo = np.array(self.user_geometry, dtype=np.float64)
        if geo.ndim != 2 or geo.shape[1] != 2:
            raise DimensionError(f"user_geometry must have shape (K, 2), got {geo.shape}")
        geo.setflags(write=False)
        object.__setattr__(self, "user_geometry", geo)
        if self.h_users.shape[1] != self.h_sr.shape[0]:
            raise DimensionError(
                f"h_users has {self.h_users.shape[1]} antennas but h_sr has "
                f"{self.h_sr.shape[0]} relay antennas"
            )
        if geo.shape[0] != self.h_users.shape[0]:
            raise DimensionError("user_geometry rows must match h_users rows")

    @property
    def n_relay(self) -> int:
        return self.h_sr.shape[0]

    @property
    def n_tx(self) -> int:
        return self.h_sr.shape[1]

    @property
    def n_users(self) -> int:
        return self.h_users.shape[0]


@dataclass(frozen=True)
class Precoders:
    """Transmit precoder F (N_t x K, columns f_k) and relay precoder G (N_r x N_r).

    Admissible precoders satisfy the long-term budgets
    rho_s * tr(F F^H) <= P_bs and
    rho_r * [rho_s * ||G H_sr F||_F^2 + sigma2_r * ||G||_F^2] <= P_re;
    use :func:`bs_power_slack` / :func:`relay_power_slack` to check, since the
    relay constraint needs the channel realization.
    """

    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _frozen_complex(self.f, "f", 2))
        object.__setattr__(self, "g", _frozen_complex(self.g, "g", 2))
        if self.g.shape[0] != self.g.shape[1]:
            raise DimensionError(f"g must be square, got shape {self.g.shape}")

    @property
    def n_tx(self) -> int:
        return self.f.shape[0]

    @property
    def n_users(self) -> int:
        return self.f.shape[1]

    @property
    def n_relay(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class ReceiverState:
    """Per-user scalar receivers V_k, WMSE weights v_k, and power multipliers."""

    v_rx: np.ndarray
    w: np.ndarray
    beta1: float = 0.0
    beta2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v_rx", _frozen_complex(self.v_rx, "v_rx", 1))
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 1 or w.shape != self.v_rx.shape:
            raise DimensionError("w must be 1-D and match v_rx in length")
        if not np.all(w > 0):
            raise DomainError("all WMSE weights must be strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        if self.beta1 < 0 or self.beta2 < 0:
            raise DomainError("Lagrange multipliers must be non-negative")


@dataclass(frozen=True)
class RateReport:
    """Per-user and aggregate performance of one precoder pair."""

    per_user_rate: tuple  # bit/s/Hz
    sum_rate: float
    mmse: tuple
    objective_trace: tuple  # total augmented WMSE per iteration, nats
    iterations_used: int
    bs_slack: float
    relay_slack: float

    @property
    def feasibility_residuals(self):
        return (self.bs_slack, self.relay_slack)


def _check_compatible(pre: Precoders, ch: ChannelSet) -> None:
    if pre.f.shape != (ch.n_tx, ch.n_users):
        raise DimensionError(
            f"f has shape {pre.f.shape}, expected ({ch.n_tx}, {ch.n_users})"
        )
    if pre.g.shape != (ch.n_relay, ch.n_relay):
        raise DimensionError(
            f"g has shape {pre.g.shape}, expected ({ch.n_relay}, {ch.n_relay})"
        )


def _check_user(k: int, n_users: int) -> None:
    if not 0 <= k < n_users:
        raise DimensionError(f"user index {k} out of range for K={n_users}")


def coupling_matrix(pre: Precoders, ch: ChannelSet) -> np.ndarray:
    """(K, K) matrix with entry [k, i] = h_k G H_sr f_i."""
    _check_compatible(pre, ch)
    return (ch.h_users @ pre.g @ ch.h_sr) @ pre.f


def effective_noise_variance(k: int, pre: Precoders, ch: ChannelSet,
                             cfg: SystemConfig) -> float:
    """Effective noise seen by user k: multiuser interference plus forwarded
    relay noise plus receiver noise. Always >= sigma2_user."""
    _check_compatible(pre, ch)
    _check_user(k, ch.n_users)
    c_row = (ch.h_users[k] @ pre.g @ ch.h_sr) @ pre.f
    g_row = ch.h_users[k] @ pre.g
    q = cfg.rho_s * cfg.rho_r
    interference = float(np.sum(np.abs(c_row) ** 2) - np.abs(c_row[k]) ** 2)
    relay_noise = cfg.rho_r * cfg.sigma2_relay * float(np.sum(np.abs(g_row) ** 2))
    return q * interference + relay_noise + cfg.sigma2_user


def mse(k: int, v: complex, pre: Precoders, ch: ChannelSet,
        cfg: SystemConfig) -> float:
    """Mean-square error E|s_k - V_k y_k|^2 for an arbitrary scalar receiver v."""
    _check_compatible(pre, ch)
    _check_user(k, ch.n_users)
    c_row = (ch.h_users[k] @ pre.g @ ch.h_sr) @ pre.f
    g_row = ch.h_users[k] @ pre.g
    q = cfg.rho_s * cfg.rho_r
    total = (q * float(np.sum(np.abs(c_row) ** 2))
             + cfg.rho_r * cfg.sigma2_relay * float(np.sum(np.abs(g_row) ** 2))
             + cfg.sigma2_user)
    return float(total * abs(v) ** 2 - 2.0 * math.sqrt(q) * (v * c_row[k]).real + 1.0)


def mmse_receiver(k: int, pre: Precoders, ch: ChannelSet,
                  cfg: SystemConfig) -> complex:
    """MSE-minimizing scalar receiver for user k."""
    _check_compatible(pre, ch)
    _check_user(k, ch.n_users)
    c_kk = (ch.h_users[k] @ pre.g @ ch.h_sr) @ pre.f[:, k]
    q = cfg.rho_s * cfg.rho_r
    sigma2_k = effective_noise_variance(k, pre, ch, cfg)
    return complex(math.sqrt(q) * np.conj(c_kk) / (q * abs(c_kk) ** 2 + sigma2_k))


def mmse_value(k: int, pre: Precoders, ch: ChannelSet, cfg: SystemConfig) -> float:
    """Minimum MSE for user k; lies in (0, 1]."""
    _check_compatible(pre, ch)
    _check_user(k, ch.n_users)
    c_kk = (ch.h_users[k] @ pre.g @ ch.h_sr) @ pre.f[:, k]
    q = cfg.rho_s * cfg.rho_r
    sigma2_k = effective_noise_variance(k, pre, ch, cfg)
    return float(1.0 / (1.0 + q * abs(c_kk) ** 2 / sigma2_k))


def user_rate_nats(k: int, pre: Precoders, ch: ChannelSet, cfg: SystemConfig) -> float:
    """Achievable rate of user k in nats; equals -ln(mmse_value)."""
    _check_compatible(pre, ch)
    _check_user(k, ch.n_users)
    c_kk = (ch.h_users[k] @ pre.g @ ch.h_sr) @ pre.f[:, k]
    q = cfg.rho_s * cfg.rho_r
    sigma2_k = effective_noise_variance(k, pre, ch, cfg)
    return math.log1p(q * abs(c_kk) ** 2 / sigma2_k)


def user_rate(k: int, pre: Precoders, ch: ChannelSet, cfg: SystemConfig) -> float:
    """Achievable rate of user k in bit/s/Hz."""
    return user_rate_nats(k, pre, ch, cfg) / LN2


def sum_rate(pre: Precoders, ch: ChannelSet, cfg: SystemConfig) -> float:
    """Sum of the per-user rates, bit/s/Hz."""
    return float(sum(user_rate(k, pre, ch, cfg) for k in range(ch.n_users)))


def augmented_wmse(weight: float, eps: float) -> float:
    """Augmented weighted MSE xi = weight * eps - ln(weight), in nats."""
    if weight <= 0:
        raise DomainError(f"weight must be > 0, got {weight}")
    return float(weight * eps - math.log(weight))


def optimal_weight(eps_min: float) -> float:
    """Weight minimizing the augmented WMSE for a given (minimum) MSE."""
    if eps_min <= 0:
        raise DomainError(f"eps_min must be > 0, got {eps_min}")
    return 1.0 / eps_min


def bs_power_used(pre: Precoders, cfg: SystemConfig) -> float:
    """Short-term BS transmit power rho_s * tr(F F^H), mW."""
    return cfg.rho_s * float(np.sum(np.abs(pre.f) ** 2))


def relay_power_used(pre: Precoders, ch: ChannelSet, cfg: SystemConfig) -> float:
    """Relay transmit power including forwarded noise, mW."""
    _check_compatible(pre, ch)
    signal = cfg.rho_s * float(np.sum(np.abs(pre.g @ ch.h_sr @ pre.f) ** 2))
    noise = cfg.sigma2_relay * float(np.sum(np.abs(pre.g) ** 2))
    return cfg.rho_r * (signal + noise)


def bs_power_slack(pre: Precoders, cfg: SystemConfig) -> float:
    """Relative slack (P_bs - used) / P_bs; negative means violation."""
    return (cfg.p_bs_mw - bs_power_used(pre, cfg)) / cfg.p_bs_mw


def relay_power_slack(pre: Precoders, ch: ChannelSet, cfg: SystemConfig) -> float:
    """Relative slack (P_re - used) / P_re; negative means violation."""
    return (cfg.p_re_mw - relay_power_used(pre, ch, cfg)) / cfg.p_re_mw


def optimal_receiver_state(pre: Precoders, ch: ChannelSet, cfg: SystemConfig,
                           beta1: float = 0.0, beta2: float = 0.0) -> ReceiverState:
    """MMSE receivers and the matching optimal WMSE weights for all users."""
    v_rx = np.array([mmse_receiver(k, pre, ch, cfg) for k in range(ch.n_users)])
    w = np.array([optimal_weight(mmse_value(k, pre, ch, cfg))
                  for k in range(ch.n_users)])
    return ReceiverState(v_rx=v_rx, w=w, beta1=beta1, beta2=beta2)


def rate_report(pre: Precoders, ch: ChannelSet, cfg: SystemConfig,
                objective_trace=(), iterations_used: int = 0) -> RateReport:
    """Evaluate a precoder pair into a RateReport."""
    mmse_vals = tuple(mmse_value(k, pre, ch, cfg) for k in range(ch.n_users))
    rates = tuple(-math.log2(e) for e in mmse_vals)
    return RateReport(
        per_user_rate=rates,
        sum_rate=float(sum(rates)),
        mmse=mmse_vals,
        objective_trace=tuple(objective_trace),
        iterations_used=iterations_used,
        bs_slack=bs_power_slack(pre, cfg),
        relay_slack=relay_power_slack(pre, ch, cfg),
    )
