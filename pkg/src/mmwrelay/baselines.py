"""Reference precoders: zero-forcing and regularized zero-forcing.

Both baselines fix the relay to pure amplify-and-forward (a scaled
identity meeting the relay power budget with equality) and precode
against the composite K x N_t channel whose row k is h_k G0 H_sr. A
final rescaling pass keeps both budgets tight after the transmit
precoder replaces the provisional one used to size G0.
"""

from __future__ import annotations

import math

import numpy as np

from .config import SystemConfig
from .core import (ChannelSet, Precoders, RateReport, rate_report)
from .errors import DimensionError, DomainError
from .wmmse import init_precoders

# Singular values below PINV_RTOL * sigma_max are treated as zero; in the
# overloaded regime this leaves near-zero zero-forcing rates rather than
# amplifying numerical noise.
PINV_RTOL = 1e-10


def af_relay_precoder(ch: ChannelSet, f: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Scaled-identity relay precoder meeting the relay budget with equality."""
    f = np.asarray(f, dtype=complex)
    hf = ch.h_sr @ f
    denom = cfg.rho_r * (cfg.rho_s * float(np.sum(np.abs(hf) ** 2))
                         + cfg.sigma2_relay * ch.n_relay)
    if denom <= 0.0:
        raise DomainError("relay input power and noise are both zero; cannot scale")
    return math.sqrt(cfg.p_re_mw / denom) * np.eye(ch.n_relay, dtype=complex)


def effective_channel(ch: ChannelSet, g0: np.ndarray) -> np.ndarray:
    """Composite K x N_t channel through a fixed relay precoder."""
    heff = ch.h_users @ np.asarray(g0, dtype=complex) @ ch.h_sr
    if not np.all(np.isfinite(heff)):
        raise DimensionError("effective channel contains non-finite entries")
    return heff


def _scale_to_bs_budget(f: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    power = cfg.rho_s * float(np.sum(np.abs(f) ** 2))
    if power <= 0.0:
        raise DomainError("precoder has zero power; cannot scale to the BS budget")
    return f * math.sqrt(cfg.p_bs_mw / power)


def zf_precoder(heff: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Channel-inverting precoder, scaled to the BS budget."""
    heff = np.asarray(heff, dtype=complex)
    if heff.shape[0] > heff.shape[1]:
        raise DimensionError("zero forcing requires K <= N_t")
    f = np.linalg.pinv(heff, rcond=PINV_RTOL)
    return _scale_to_bs_budget(f, cfg)


def rzf_precoder(heff: np.ndarray, cfg: SystemConfig,
                 reg: float | None = None) -> np.ndarray:
    """Diagonally loaded channel inverse, scaled to the BS budget.

    reg defaults to K * sigma2_user / P_bs; reg = 0 recovers zero forcing on
    well-conditioned channels.
    """
    heff = np.asarray(heff, dtype=complex)
    if heff.shape[0] > heff.shape[1]:
        raise DimensionError("regularized zero forcing requires K <= N_t")
    if reg is None:
        reg = heff.shape[0] * cfg.sigma2_user / cfg.p_bs_mw
    if reg < 0:
        raise DomainError(f"regularization must be >= 0, got {reg}")
    k = heff.shape[0]
    gram = heff @ heff.conj().T + reg * np.eye(k)
    f = heff.conj().T @ np.linalg.solve(gram, np.eye(k, dtype=complex))
    return _scale_to_bs_budget(f, cfg)


def run_baseline(kind: str, ch: ChannelSet, cfg: SystemConfig,
                 reg: float | None = None):
    """Build feasible (F, G0) for the requested baseline and evaluate rates.

    kind is "zf" or "rzf". Returns (Precoders, RateReport).
    """
    kind = kind.lower()
    if kind not in ("zf", "rzf"):
        raise DomainError(f"unknown baseline kind {kind!r}")
    provisional = init_precoders(None, ch, cfg)
    g0 = af_relay_precoder(ch, provisional.f, cfg)
    heff = effective_channel(ch, g0)
    if kind == "zf":
        f = zf_precoder(heff, cfg)
    else:
        f = rzf_precoder(heff, cfg, reg=reg)
    g0 = af_relay_precoder(ch, f, cfg)
    pre = Precoders(f=f, g=g0)
    return pre, rate_report(pre, ch, cfg)
