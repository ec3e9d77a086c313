"""Relay-aided multiuser mmWave downlink precoding simulator.

Library layout:

- :mod:`mmwrelay.config`: scenario parameters and validation.
- :mod:`mmwrelay.core`: domain types and per-realization rate/MSE formulas.
- :mod:`mmwrelay.channel`: clustered channel generation and link budget.
- :mod:`mmwrelay.wmmse`: the alternating closed-form sum-rate optimizer.
- :mod:`mmwrelay.baselines`: ZF/RZF over the composite relay channel.
- :mod:`mmwrelay.harness`: seeded Monte Carlo sweeps with CSV/JSON output.
- :mod:`mmwrelay.cli`: command-line front end.
"""

__version__ = "0.1.0"

from .config import (AlgorithmParams, ChannelStats, Geometry, LinkBudgetParams,
                     SystemConfig, default_config)
from .core import (ChannelSet, Precoders, RateReport, ReceiverState,
                   augmented_wmse, effective_noise_variance, mmse_receiver,
                   mmse_value, mse, optimal_weight, rate_report, sum_rate,
                   user_rate)
from .channel import (sample_bs_relay_channel, sample_channel_set,
                      sample_relay_user_channel, steering_vector)
from .wmmse import WmmseResult, init_precoders, kkt_residuals, run_wmmse
from .baselines import run_baseline, rzf_precoder, zf_precoder
from .harness import (SweepResult, SweepSpec, convergence_trace, run_sweep,
                      run_trial, sweep_power, sweep_relay_location)

__all__ = [
    "AlgorithmParams", "ChannelStats", "Geometry", "LinkBudgetParams",
    "SystemConfig", "default_config",
    "ChannelSet", "Precoders", "RateReport", "ReceiverState",
    "augmented_wmse", "effective_noise_variance", "mmse_receiver",
    "mmse_value", "mse", "optimal_weight", "rate_report", "sum_rate",
    "user_rate",
    "sample_bs_relay_channel", "sample_channel_set",
    "sample_relay_user_channel", "steering_vector",
    "WmmseResult", "init_precoders", "kkt_residuals", "run_wmmse",
    "run_baseline", "rzf_precoder", "zf_precoder",
    "SweepResult", "SweepSpec", "convergence_trace", "run_sweep",
    "run_trial", "sweep_power", "sweep_relay_location",
]
