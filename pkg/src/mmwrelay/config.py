"""Scenario configuration for the relay-aided mmWave downlink simulator.

All user-facing powers are configured in dBm and converted to linear
milliwatts internally; every formula elsewhere in the package works on
linear quantities. Defaults reproduce the standard urban-micro setup at
28 GHz (100 MHz bandwidth, 9 dB noise figure, 8 dBi antenna gains,
4 clusters x 5 rays, 40deg/10deg angular spreads) at desk scale
(8 antennas / 8 users).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, is_dataclass

from .errors import ConfigError


def dbm_to_mw(value_dbm: float) -> float:
    """Convert a dBm level to linear milliwatts."""
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw: float) -> float:
    """Convert linear milliwatts to dBm. Requires value_mw > 0."""
    if value_mw <= 0.0:
        raise ConfigError(f"cannot express non-positive power {value_mw} mW in dBm")
    return 10.0 * math.log10(value_mw)


@dataclass(frozen=True)
class Geometry:
    """User/relay placement ranges. Angles are measured from the BS boresight."""

    theta_min_deg: float = -60.0
    theta_max_deg: float = 60.0
    d_min_m: float = 50.0
    d_max_m: float = 150.0
    relay_distance_m: float = 50.0


@dataclass(frozen=True)
class ChannelStats:
    """Clustered channel statistics for the BS-relay and relay-user hops."""

    n_clusters_bs_relay: int = 4
    n_rays_bs_relay: int = 5
    n_clusters_relay_user: int = 4
    n_rays_relay_user: int = 5
    cluster_spread_deg: float = 40.0
    ray_spread_deg: float = 10.0
    carrier_ghz: float = 28.0
    spacing_ratio: float = 0.5  # element spacing over wavelength


@dataclass(frozen=True)
class LinkBudgetParams:
    """Antenna gains and receiver noise budget."""

    bs_gain_dbi: float = 8.0
    relay_gain_dbi: float = 8.0
    noise_figure_db: float = 9.0
    bandwidth_hz: float = 100e6
    thermal_noise_dbm_hz: float = -174.0

    def noise_power_dbm(self) -> float:
        """Receiver noise floor: thermal density + 10 log10(BW) + NF."""
        return (self.thermal_noise_dbm_hz
                + 10.0 * math.log10(self.bandwidth_hz)
                + self.noise_figure_db)

    def noise_power_mw(self) -> float:
        return dbm_to_mw(self.noise_power_dbm())


@dataclass(frozen=True)
class AlgorithmParams:
    """Stopping rule and initialization mode for the alternating optimizer."""

    tolerance: float = 1e-3
    max_iterations: int = 200
    init: str = "matched"  # "matched" or "random"


@dataclass(frozen=True)
class SystemConfig:
    """Full scenario description.

    ``sigma2_relay`` / ``sigma2_user`` are linear noise variances in mW; when
    left as None they resolve to the link-budget noise floor.
    """

    n_tx: int = 8
    n_relay: int = 8
    n_users: int = 8
    rho_s: float = 1.0
    rho_r: float = 1.0
    p_bs_dbm: float = 20.0
    p_re_dbm: float = 20.0
    sigma2_relay: float | None = None
    sigma2_user: float | None = None
    geometry: Geometry = field(default_factory=Geometry)
    channel_stats: ChannelStats = field(default_factory=ChannelStats)
    link_budget: LinkBudgetParams = field(default_factory=LinkBudgetParams)
    algorithm: AlgorithmParams = field(default_factory=AlgorithmParams)

    def __post_init__(self):
        if self.sigma2_relay is None:
            object.__setattr__(self, "sigma2_relay", self.link_budget.noise_power_mw())
        if self.sigma2_user is None:
            object.__setattr__(self, "sigma2_user", self.link_budget.noise_power_mw())
        self._validate()

    @property
    def p_bs_mw(self) -> float:
        return dbm_to_mw(self.p_bs_dbm)

    @property
    def p_re_mw(self) -> float:
        return dbm_to_mw(self.p_re_dbm)

    def _validate(self) -> None:
        for name in ("n_tx", "n_relay", "n_users"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.n_users > min(self.n_tx, self.n_relay):
            raise ConfigError(
                "n_users must satisfy K <= min(n_tx, n_relay): "
                f"got K={self.n_users} > min({self.n_tx}, {self.n_relay})"
            )
        if self.rho_s <= 0 or self.rho_r <= 0:
            raise ConfigError("rho_s and rho_r must be strictly positive")
        if self.sigma2_relay <= 0 or self.sigma2_user <= 0:
            raise ConfigError("noise variances must be strictly positive")
        geo = self.geometry
        if geo.d_min_m > geo.d_max_m:
            raise ConfigError(f"d_min_m={geo.d_min_m} exceeds d_max_m={geo.d_max_m}")
        if geo.d_min_m < 1.0:
            raise ConfigError("d_min_m must be >= 1 m (path-loss model validity)")
        if geo.relay_distance_m < 1.0:
            raise ConfigError("relay_distance_m must be >= 1 m (path-loss model validity)")
        if geo.theta_min_deg > geo.theta_max_deg:
            raise ConfigError(
                f"theta_min_deg={geo.theta_min_deg} exceeds theta_max_deg={geo.theta_max_deg}"
            )
        cs = self.channel_stats
        for name in ("n_clusters_bs_relay", "n_rays_bs_relay",
                     "n_clusters_relay_user", "n_rays_relay_user"):
            if getattr(cs, name) < 1:
                raise ConfigError(f"channel_stats.{name} must be >= 1")
        if cs.cluster_spread_deg < 0 or cs.ray_spread_deg < 0:
            raise ConfigError("angular spreads must be non-negative")
        if cs.carrier_ghz <= 0:
            raise ConfigError("carrier_ghz must be positive")
        if cs.spacing_ratio <= 0:
            raise ConfigError("spacing_ratio must be positive")
        lb = self.link_budget
        if lb.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be positive")
        alg = self.algorithm
        if alg.tolerance <= 0:
            raise ConfigError("algorithm.tolerance must be > 0")
        if alg.max_iterations < 1:
            raise ConfigError("algorithm.max_iterations must be >= 1")
        if alg.init not in ("matched", "random"):
            raise ConfigError(f"algorithm.init must be 'matched' or 'random', got {alg.init!r}")


def default_config() -> SystemConfig:
    """Desk-scale default scenario (8x8, 8 users, 20 dBm budgets)."""
    return SystemConfig()


def _build_dataclass(cls, mapping, path):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path or 'config'} must be a mapping, got {type(mapping).__name__}")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in mapping.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {path + key}")
        ftype = known[key]
        nested = _NESTED_SECTIONS.get((cls, key))
        if nested is not None:
            kwargs[key] = _build_dataclass(nested, value, path + key + ".")
        else:
            kwargs[key] = value
    return cls(**kwargs)


_NESTED_SECTIONS = {
    (SystemConfig, "geometry"): Geometry,
    (SystemConfig, "channel_stats"): ChannelStats,
    (SystemConfig, "link_budget"): LinkBudgetParams,
    (SystemConfig, "algorithm"): AlgorithmParams,
}


def config_from_dict(mapping: dict | None) -> SystemConfig:
    """Build a SystemConfig from a nested mapping, rejecting unknown keys."""
    if mapping is None:
        return default_config()
    return _build_dataclass(SystemConfig, mapping, "")
