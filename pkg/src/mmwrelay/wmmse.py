"""Alternating closed-form optimizer for the sum-rate precoding problem.

Each iteration updates, in order: the per-user MMSE receivers, the WMSE
weights, the relay-power multiplier beta2, the relay precoder G, the
BS-power multiplier beta1, and the transmit precoder F. Both precoder
updates are closed forms obtained from the first-order stationarity
conditions of the power-penalized weighted-MSE objective; the multipliers
make the power budgets tight at a fixed point. The loop stops when two
successive totals of the augmented weighted MSE differ by at most the
configured tolerance.

Matrix inversions are Hermitian positive-definite solves (Cholesky) with
a conditioning guard; explicit inverses are never formed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import SystemConfig
from .core import (ChannelSet, Precoders, RateReport, ReceiverState,
                   rate_report)
from .errors import DivergenceError, SingularMatrixError

COND_LIMIT = 1e12
LN2 = math.log(2.0)


def _solve_hpd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b for Hermitian positive-definite a, guarding conditioning."""
    eigs = np.linalg.eigvalsh(a)
    if eigs[0] <= 0.0 or eigs[-1] > COND_LIMIT * eigs[0]:
        raise SingularMatrixError(
            f"matrix is singular or ill-conditioned (eig range [{eigs[0]:.3e}, {eigs[-1]:.3e}])"
        )
    factor = scipy.linalg.cho_factor(a, check_finite=False)
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


@dataclass
class IterationTrace:
    """Per-iteration record of the alternating optimization."""

    xi_nats: list = field(default_factory=list)
    sum_rate_bps_hz: list = field(default_factory=list)
    bs_slack: list = field(default_factory=list)
    relay_slack: list = field(default_factory=list)
    beta1: list = field(default_factory=list)
    beta2: list = field(default_factory=list)
    init_sum_rate: float = 0.0

    def __len__(self):
        return len(self.xi_nats)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "xi_total_nats", "sum_rate_bps_hz",
                             "bs_slack", "relay_slack", "beta1", "beta2"])
            for n in range(len(self.xi_nats)):
                writer.writerow([n + 1, repr(self.xi_nats[n]),
                                 repr(self.sum_rate_bps_hz[n]),
                                 repr(self.bs_slack[n]), repr(self.relay_slack[n]),
                                 repr(self.beta1[n]), repr(self.beta2[n])])


@dataclass(frozen=True)
class KktResiduals:
    """Relative residuals of the three stationarity identities."""

    receiver: float
    transmit: float
    relay: float

    @property
    def worst(self) -> float:
        return max(self.receiver, self.transmit, self.relay)


@dataclass(frozen=True)
class WmmseResult:
    precoders: Precoders
    receivers: ReceiverState
    trace: IterationTrace
    report: RateReport


# ---------------------------------------------------------------------------
# vectorized kernels shared by the loop and the public per-op entry points

def _receiver_stats(f, g, ch, cfg):
    """MMSE receivers, optimal weights, and per-user minimum MSE for (f, g)."""
    t = ch.h_users @ g @ ch.h_sr            # (K, N_t), row k = h_k G H_sr
    c = t @ f                               # (K, K), c[k, i] = h_k G H_sr f_i
    g_rows = ch.h_users @ g                 # (K, N_r)
    q = cfg.rho_s * cfg.rho_r
    sig = np.abs(np.diag(c)) ** 2
    total = np.sum(np.abs(c) ** 2, axis=1)
    noise = (q * (total - sig)
             + cfg.rho_r * cfg.sigma2_relay * np.sum(np.abs(g_rows) ** 2, axis=1)
             + cfg.sigma2_user)
    v_rx = math.sqrt(q) * np.conj(np.diag(c)) / (q * sig + noise)
    eps_min = 1.0 / (1.0 + q * sig / noise)
    return v_rx, 1.0 / eps_min, eps_min


def _wmse_total(f, g, v_rx, w, ch, cfg) -> float:
    """Total augmented weighted MSE (nats) for fixed receivers/weights."""
    t = ch.h_users @ g @ ch.h_sr
    c = t @ f
    g_rows = ch.h_users @ g
    q = cfg.rho_s * cfg.rho_r
    total = (q * np.sum(np.abs(c) ** 2, axis=1)
             + cfg.rho_r * cfg.sigma2_relay * np.sum(np.abs(g_rows) ** 2, axis=1)
             + cfg.sigma2_user)
    eps = (total * np.abs(v_rx) ** 2
           - 2.0 * math.sqrt(q) * (v_rx * np.diag(c)).real + 1.0)
    return float(np.sum(w * eps - np.log(w)))


def _bs_slack_raw(f, cfg) -> float:
    return (cfg.p_bs_mw - cfg.rho_s * float(np.sum(np.abs(f) ** 2))) / cfg.p_bs_mw


def _relay_slack_raw(f, g, ch, cfg) -> float:
    used = cfg.rho_r * (cfg.rho_s * float(np.sum(np.abs(g @ ch.h_sr @ f) ** 2))
                        + cfg.sigma2_relay * float(np.sum(np.abs(g) ** 2)))
    return (cfg.p_re_mw - used) / cfg.p_re_mw


def _beta2(v_rx, w, cfg) -> float:
    return float(cfg.rho_r * cfg.sigma2_user / cfg.p_re_mw
                 * np.sum(w * np.abs(v_rx) ** 2))


def _beta1(v_rx, w, g, beta2, ch, cfg) -> float:
    g_rows = ch.h_users @ g
    weighted = cfg.rho_r * float(np.sum(w * np.abs(v_rx) ** 2
                                        * np.sum(np.abs(g_rows) ** 2, axis=1)))
    g_energy = float(np.sum(np.abs(g) ** 2))
    return cfg.rho_s * cfg.sigma2_relay / cfg.p_bs_mw * (weighted + beta2 * g_energy)


def _update_g(f, v_rx, w, beta2, ch, cfg) -> np.ndarray:
    q = cfg.rho_s * cfg.rho_r
    wv2 = w * np.abs(v_rx) ** 2
    hu = ch.h_users
    left = (cfg.rho_r * (hu.conj().T * wv2) @ hu
            + beta2 * np.eye(ch.n_relay))
    hf = ch.h_sr @ f                        # (N_r, K)
    mid = (hu.conj().T * (w * np.conj(v_rx))) @ hf.conj().T
    right = cfg.rho_s * hf @ hf.conj().T + cfg.sigma2_relay * np.eye(ch.n_relay)
    y = _solve_hpd(left, mid)
    return math.sqrt(q) * _solve_hpd(right, y.conj().T).conj().T


def _update_f(g, v_rx, w, beta1, beta2, ch, cfg) -> np.ndarray:
    q = cfg.rho_s * cfg.rho_r
    wv2 = w * np.abs(v_rx) ** 2
    t = ch.h_users @ g @ ch.h_sr            # (K, N_t)
    gh = g @ ch.h_sr                        # (N_r, N_t)
    gram = (beta1 * np.eye(ch.n_tx)
            + beta2 * cfg.rho_s * gh.conj().T @ gh
            + q * (t.conj().T * wv2) @ t)
    rhs = t.conj().T                        # column k = H_sr^H G^H h_k^H
    return math.sqrt(q) * _solve_hpd(gram, rhs) * (w * np.conj(v_rx))


# ---------------------------------------------------------------------------
# public operations

def compute_beta2(state: ReceiverState, cfg: SystemConfig) -> float:
    """Relay-power multiplier: rho_r sigma2_d / P_re * sum_i v_i |V_i|^2."""
    return _beta2(state.v_rx, state.w, cfg)


def compute_beta1(state: ReceiverState, pre: Precoders, ch: ChannelSet,
                  cfg: SystemConfig) -> float:
    """BS-power multiplier; uses beta2 stored on the state."""
    return _beta1(state.v_rx, state.w, pre.g, state.beta2, ch, cfg)


def update_relay_precoder(state: ReceiverState, f: np.ndarray, ch: ChannelSet,
                          cfg: SystemConfig) -> np.ndarray:
    """Closed-form relay precoder for fixed receivers, weights, and F."""
    return _update_g(np.asarray(f, dtype=complex), state.v_rx, state.w,
                     state.beta2, ch, cfg)


def update_transmit_precoder(state: ReceiverState, g: np.ndarray, ch: ChannelSet,
                             cfg: SystemConfig) -> np.ndarray:
    """Closed-form transmit precoder for fixed receivers, weights, and G."""
    return _update_f(np.asarray(g, dtype=complex), state.v_rx, state.w,
                     state.beta1, state.beta2, ch, cfg)


def kkt_residuals(pre: Precoders, state: ReceiverState, ch: ChannelSet,
                  cfg: SystemConfig) -> KktResiduals:
    """Relative residuals of the receiver, transmit, and relay stationarity
    equations at the given point; all small at a converged fixed point."""
    f, g = pre.f, pre.g
    v_rx, w = state.v_rx, state.w
    q = cfg.rho_s * cfg.rho_r
    hu = ch.h_users
    t = hu @ g @ ch.h_sr
    c = t @ f
    g_rows = hu @ g

    def rel(lhs, rhs):
        scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs))
        if scale == 0.0:
            return 0.0
        return float(np.linalg.norm(lhs - rhs) / scale)

    # receiver stationarity, per user: sqrt(q) c_kk^* = (q sum_i |c_ki|^2
    #   + rho_r sigma_r^2 ||h_k G||^2 + sigma_d^2) V_k
    total = (q * np.sum(np.abs(c) ** 2, axis=1)
             + cfg.rho_r * cfg.sigma2_relay * np.sum(np.abs(g_rows) ** 2, axis=1)
             + cfg.sigma2_user)
    res_rx = max(rel(math.sqrt(q) * np.conj(c[k, k]), total[k] * v_rx[k])
                 for k in range(ch.n_users))

    # transmit stationarity, per user
    wv2 = w * np.abs(v_rx) ** 2
    gh = g @ ch.h_sr
    gram = (state.beta1 * np.eye(ch.n_tx)
            + state.beta2 * cfg.rho_s * gh.conj().T @ gh
            + q * (t.conj().T * wv2) @ t)
    lhs_f = math.sqrt(q) * t.conj().T * (w * np.conj(v_rx))
    res_f = max(rel(lhs_f[:, k], gram @ f[:, k]) for k in range(ch.n_users))

    # relay stationarity, Frobenius
    hf = ch.h_sr @ f
    lhs_g = math.sqrt(q) * (hu.conj().T * (w * np.conj(v_rx))) @ hf.conj().T
    left = cfg.rho_r * (hu.conj().T * wv2) @ hu + state.beta2 * np.eye(ch.n_relay)
    right = cfg.rho_s * hf @ hf.conj().T + cfg.sigma2_relay * np.eye(ch.n_relay)
    res_g = rel(lhs_g, left @ g @ right)

    return KktResiduals(receiver=res_rx, transmit=res_f, relay=res_g)


def init_precoders(rng: np.random.Generator | None, ch: ChannelSet,
                   cfg: SystemConfig) -> Precoders:
    """Feasible starting point with both power budgets met with equality.

    F is the per-user matched filter through an identity relay (or a seeded
    complex-Gaussian draw when algorithm.init == "random"); G is a scaled
    identity.
    """
    if cfg.algorithm.init == "random":
        if rng is None:
            raise ValueError("random initialization requires an rng")
        f = (rng.standard_normal((cfg.n_tx, cfg.n_users))
             + 1j * rng.standard_normal((cfg.n_tx, cfg.n_users)))
        f *= math.sqrt(cfg.p_bs_mw / (cfg.rho_s * np.sum(np.abs(f) ** 2)))
    else:
        directions = (ch.h_users @ ch.h_sr).conj().T   # (N_t, K)
        f = np.zeros((cfg.n_tx, cfg.n_users), dtype=complex)
        per_user = math.sqrt(cfg.p_bs_mw / (cfg.rho_s * cfg.n_users))
        for k in range(cfg.n_users):
            norm = np.linalg.norm(directions[:, k])
            if norm > 0:
                f[:, k] = per_user * directions[:, k] / norm
            else:
                f[k % cfg.n_tx, k] = per_user
    hf = ch.h_sr @ f
    denom = cfg.rho_r * (cfg.rho_s * float(np.sum(np.abs(hf) ** 2))
                         + cfg.sigma2_relay * cfg.n_relay)
    g = math.sqrt(cfg.p_re_mw / denom) * np.eye(cfg.n_relay, dtype=complex)
    return Precoders(f=f, g=g)


def run_wmmse(ch: ChannelSet, cfg: SystemConfig,
              rng: np.random.Generator | None = None) -> WmmseResult:
    """Run the alternating optimization to convergence and report rates from
    an exactly feasible precoder pair."""
    pre0 = init_precoders(rng, ch, cfg)
    f, g = np.array(pre0.f), np.array(pre0.g)
    trace = IterationTrace()
    trace.init_sum_rate = rate_report(pre0, ch, cfg).sum_rate

    beta1 = beta2 = 0.0
    prev_xi = None
    for _ in range(cfg.algorithm.max_iterations):
        v_rx, w, _ = _receiver_stats(f, g, ch, cfg)
        beta2 = _beta2(v_rx, w, cfg)
        g = _update_g(f, v_rx, w, beta2, ch, cfg)
        beta1 = _beta1(v_rx, w, g, beta2, ch, cfg)
        f = _update_f(g, v_rx, w, beta1, beta2, ch, cfg)
        xi = _wmse_total(f, g, v_rx, w, ch, cfg)

        trace.xi_nats.append(xi)
        if not (math.isfinite(xi) and np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise DivergenceError("objective became non-finite", trace=trace)

        _, _, eps_now = _receiver_stats(f, g, ch, cfg)
        trace.sum_rate_bps_hz.append(float(-np.sum(np.log(eps_now)) / LN2))
        trace.bs_slack.append(_bs_slack_raw(f, cfg))
        trace.relay_slack.append(_relay_slack_raw(f, g, ch, cfg))
        trace.beta1.append(beta1)
        trace.beta2.append(beta2)

        if prev_xi is not None and abs(xi - prev_xi) <= cfg.algorithm.tolerance:
            break
        prev_xi = xi

    # Enforce exact feasibility: the multipliers target tight constraints but
    # finite convergence can leave tiny slack/violation.
    f = f * math.sqrt(cfg.p_bs_mw / (cfg.rho_s * float(np.sum(np.abs(f) ** 2))))
    used = cfg.rho_r * (cfg.rho_s * float(np.sum(np.abs(g @ ch.h_sr @ f) ** 2))
                        + cfg.sigma2_relay * float(np.sum(np.abs(g) ** 2)))
    g = g * math.sqrt(cfg.p_re_mw / used)
    final = Precoders(f=f, g=g)

    v_rx, w, _ = _receiver_stats(f, g, ch, cfg)
    state = ReceiverState(v_rx=v_rx, w=w, beta1=beta1, beta2=beta2)
    report = rate_report(final, ch, cfg, objective_trace=trace.xi_nats,
                         iterations_used=len(trace))
    return WmmseResult(precoders=final, receivers=state, trace=trace, report=report)
