"""Clustered mmWave channel generation: geometry, steering vectors, path loss.

Angle conventions: user and relay positions are given as (distance,
angle) polar pairs measured from the BS boresight. A uniform linear
array described by the cos-form steering vector resolves directions by
cos(angle), so boresight directions are mapped to broadside (90 deg)
before building steering vectors; without this shift, positions at
+theta and -theta would produce identical array signatures.

All sampling takes an explicit numpy Generator and is bit-reproducible
for a fixed draw order: user placement, then the BS-relay draw, then one
draw per user in index order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .core import ChannelSet
from .errors import DomainError

# Minimum LoS distance accepted by the urban-micro path-loss model. Relay-user
# distances are floored here because a user may be drawn arbitrarily close to
# the relay position.
MIN_PATH_DISTANCE_M = 1.0


def steering_vector(n: int, angle_deg: float, spacing_ratio: float = 0.5) -> np.ndarray:
    """Unit-norm ULA array response; element m is
    exp(-j 2 pi spacing (m-1) cos(angle)) / sqrt(n)."""
    if n < 1:
        raise DomainError(f"antenna count must be >= 1, got {n}")
    phase = -2.0 * np.pi * spacing_ratio * np.arange(n) * np.cos(np.deg2rad(angle_deg))
    return np.exp(1j * phase) / np.sqrt(n)


def path_loss_db(distance_m: float, fc_ghz: float) -> float:
    """3GPP urban-micro LoS path loss: 32.4 + 21 log10(d) + 20 log10(fc)."""
    if distance_m < MIN_PATH_DISTANCE_M:
        raise DomainError(f"path-loss model requires distance >= 1 m, got {distance_m}")
    return 32.4 + 21.0 * math.log10(distance_m) + 20.0 * math.log10(fc_ghz)


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float,
                    thermal_dbm_hz: float = -174.0) -> float:
    """Receiver noise floor in dBm over the given bandwidth."""
    if bandwidth_hz <= 0:
        raise DomainError("bandwidth must be positive")
    return thermal_dbm_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


@dataclass(frozen=True)
class LinkBudget:
    """Per-hop amplitude budget: gains minus path loss, as a linear scale."""

    path_loss_db: float
    tx_gain_dbi: float
    rx_gain_dbi: float

    @property
    def amplitude_scale(self) -> float:
        return 10.0 ** ((self.tx_gain_dbi + self.rx_gain_dbi - self.path_loss_db) / 20.0)


@dataclass(frozen=True)
class ClusterDraw:
    """Random angular structure of one clustered-channel draw.

    Centers are geometric angles (degrees); each of the n_clusters
    clusters carries n_rays rays offset within +-ray_spread/2 of its
    center with unit-variance complex Gaussian gains. aoa_* fields are
    None for the single-sided relay-user draws.
    """

    aod_centers: np.ndarray
    aod_offsets: np.ndarray
    gains: np.ndarray
    aoa_centers: np.ndarray | None = None
    aoa_offsets: np.ndarray | None = None

    @property
    def aod_angles(self) -> np.ndarray:
        return (self.aod_centers[:, None] + self.aod_offsets).ravel()

    @property
    def aoa_angles(self) -> np.ndarray:
        return (self.aoa_centers[:, None] + self.aoa_offsets).ravel()


def place_users(rng: np.random.Generator, cfg: SystemConfig) -> np.ndarray:
    """(K, 2) array of [distance_m, angle_deg] pairs, uniform over the
    configured ranges, BS-relative."""
    geo = cfg.geometry
    dist = rng.uniform(geo.d_min_m, geo.d_max_m, size=cfg.n_users)
    ang = rng.uniform(geo.theta_min_deg, geo.theta_max_deg, size=cfg.n_users)
    return np.column_stack([dist, ang])


def relay_view(user_geometry: np.ndarray, relay_distance_m: float):
    """Convert BS-relative user positions to relay-relative (distance, angle).

    The relay sits on the BS boresight at relay_distance_m. Distances are
    floored at the path-loss validity limit.
    """
    geo = np.asarray(user_geometry, dtype=np.float64)
    x = geo[:, 0] * np.cos(np.deg2rad(geo[:, 1])) - relay_distance_m
    y = geo[:, 0] * np.sin(np.deg2rad(geo[:, 1]))
    dist = np.maximum(np.hypot(x, y), MIN_PATH_DISTANCE_M)
    ang = np.rad2deg(np.arctan2(y, x))
    return dist, ang


def _array_angle(position_angle_deg):
    # Boresight (0 deg position) maps to broadside (90 deg array angle).
    return 90.0 - np.asarray(position_angle_deg, dtype=np.float64)


def _draw_angles(rng, center_deg, n_clusters, n_rays, cluster_spread, ray_spread):
    centers = center_deg + rng.uniform(-cluster_spread / 2.0, cluster_spread / 2.0,
                                       size=n_clusters)
    offsets = rng.uniform(-ray_spread / 2.0, ray_spread / 2.0,
                          size=(n_clusters, n_rays))
    return centers, offsets


def _draw_gains(rng, n_clusters, n_rays):
    shape = (n_clusters, n_rays)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_bs_relay_clusters(rng: np.random.Generator, cfg: SystemConfig) -> ClusterDraw:
    """Two-sided cluster draw for the BS-relay hop, boresight-centered."""
    cs = cfg.channel_stats
    aod_centers, aod_offsets = _draw_angles(
        rng, 0.0, cs.n_clusters_bs_relay, cs.n_rays_bs_relay,
        cs.cluster_spread_deg, cs.ray_spread_deg)
    aoa_centers, aoa_offsets = _draw_angles(
        rng, 0.0, cs.n_clusters_bs_relay, cs.n_rays_bs_relay,
        cs.cluster_spread_deg, cs.ray_spread_deg)
    gains = _draw_gains(rng, cs.n_clusters_bs_relay, cs.n_rays_bs_relay)
    return ClusterDraw(aod_centers=aod_centers, aod_offsets=aod_offsets,
                       gains=gains, aoa_centers=aoa_centers, aoa_offsets=aoa_offsets)


def draw_relay_user_clusters(rng: np.random.Generator, cfg: SystemConfig,
                             center_angle_deg: float) -> ClusterDraw:
    """Single-sided cluster draw for one relay-user hop, centered on the
    user's angular position as seen from the relay."""
    cs = cfg.channel_stats
    centers, offsets = _draw_angles(
        rng, center_angle_deg, cs.n_clusters_relay_user, cs.n_rays_relay_user,
        cs.cluster_spread_deg, cs.ray_spread_deg)
    gains = _draw_gains(rng, cs.n_clusters_relay_user, cs.n_rays_relay_user)
    return ClusterDraw(aod_centers=centers, aod_offsets=offsets, gains=gains)


def bs_relay_channel_from_draw(draw: ClusterDraw, cfg: SystemConfig) -> np.ndarray:
    """Assemble H_sr (N_r x N_t) from a cluster draw and the link budget."""
    cs = cfg.channel_stats
    budget = LinkBudget(
        path_loss_db=path_loss_db(cfg.geometry.relay_distance_m, cs.carrier_ghz),
        tx_gain_dbi=cfg.link_budget.bs_gain_dbi,
        rx_gain_dbi=cfg.link_budget.relay_gain_dbi,
    )
    n_paths = draw.gains.size
    prefactor = math.sqrt(cfg.n_tx * cfg.n_relay / n_paths) * budget.amplitude_scale
    a_rx = np.stack([steering_vector(cfg.n_relay, a, cs.spacing_ratio)
                     for a in _array_angle(draw.aoa_angles)], axis=1)
    a_tx = np.stack([steering_vector(cfg.n_tx, a, cs.spacing_ratio)
                     for a in _array_angle(draw.aod_angles)], axis=1)
    return prefactor * (a_rx * draw.gains.ravel()) @ a_tx.conj().T


def relay_user_channel_from_draw(draw: ClusterDraw, cfg: SystemConfig,
                                 distance_m: float) -> np.ndarray:
    """Assemble one relay-user row vector h_k (length N_r)."""
    cs = cfg.channel_stats
    budget = LinkBudget(
        path_loss_db=path_loss_db(distance_m, cs.carrier_ghz),
        tx_gain_dbi=cfg.link_budget.relay_gain_dbi,
        rx_gain_dbi=0.0,  # single-antenna users carry no gain
    )
    n_paths = draw.gains.size
    prefactor = math.sqrt(cfg.n_relay / n_paths) * budget.amplitude_scale
    a_tx = np.stack([steering_vector(cfg.n_relay, a, cs.spacing_ratio)
                     for a in _array_angle(draw.aod_angles)], axis=1)
    # sum_j alpha_j a_j^H, laid out as a length-N_r row
    return prefactor * (a_tx.conj() @ draw.gains.ravel())


def sample_bs_relay_channel(rng: np.random.Generator, cfg: SystemConfig) -> np.ndarray:
    """Random BS-relay channel H_sr for the configured relay placement."""
    return bs_relay_channel_from_draw(draw_bs_relay_clusters(rng, cfg), cfg)


def sample_relay_user_channel(rng: np.random.Generator, cfg: SystemConfig,
                              distance_m: float,
                              center_angle_deg: float = 0.0) -> np.ndarray:
    """Random relay-user row vector h_k at the given relay-relative position."""
    if distance_m < MIN_PATH_DISTANCE_M:
        raise DomainError(f"relay-user distance must be >= 1 m, got {distance_m}")
    draw = draw_relay_user_clusters(rng, cfg, center_angle_deg)
    return relay_user_channel_from_draw(draw, cfg, distance_m)


def sample_channel_set(rng: np.random.Generator, cfg: SystemConfig) -> ChannelSet:
    """One full realization: user placement, H_sr, and all K user rows."""
    geometry = place_users(rng, cfg)
    rel_dist, rel_ang = relay_view(geometry, cfg.geometry.relay_distance_m)
    h_sr = sample_bs_relay_channel(rng, cfg)
    rows = [sample_relay_user_channel(rng, cfg, rel_dist[k], rel_ang[k])
            for k in range(cfg.n_users)]
    return ChannelSet(h_sr=h_sr, h_users=np.stack(rows), user_geometry=geometry)


def channel_to_json(ch: ChannelSet) -> str:
    """Self-describing JSON encoding with separate real/imag arrays."""
    payload = {
        "h_sr": {"re": ch.h_sr.real.tolist(), "im": ch.h_sr.imag.tolist()},
        "h_users": {"re": ch.h_users.real.tolist(), "im": ch.h_users.imag.tolist()},
        "user_geometry": ch.user_geometry.tolist(),
    }
    return json.dumps(payload, indent=2)


def channel_from_json(text: str) -> ChannelSet:
    payload = json.loads(text)

    def decode(entry):
        return np.array(entry["re"], dtype=float) + 1j * np.array(entry["im"], dtype=float)

    return ChannelSet(
        h_sr=decode(payload["h_sr"]),
        h_users=decode(payload["h_users"]),
        user_geometry=np.array(payload["user_geometry"], dtype=float),
    )
