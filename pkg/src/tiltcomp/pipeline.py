"""Fusion of an ~100 Hz IMU stream with an ~5 Hz total-station stream.

The two streams are decoupled: IMU samples drive gyro bias calibration and
then the attitude filter, while incoming observations wait in a bounded FIFO
ring buffer. :meth:`Pipeline.drain` pairs each buffered observation with the
most recent attitude estimate at or before the observation time (plus an
optional tolerance for live clocks) and emits tilt-corrected records.

Both streams must carry timestamps from one shared clock. The pipeline is a
single state machine: all push/drain calls must be externally serialized.
Offline replay is strictly single-threaded and, with ``pairing_tolerance_s``
zero, bit-deterministic for a given push ordering.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .attitude import (
    Attitude,
    FilterConfig,
    FilterState,
    ImuSample,
    filter_step,
    set_yaw,
    wrap_angle,
)
from .geodesy import HelmertParams, RtsObservation, apply_helmert, polar_to_cartesian
from .kinematics import LeverArms, poi_position

__all__ = ["FusedRecord", "PipelineConfig", "Pipeline"]


@dataclass(frozen=True)
class FusedRecord:
    """One fused output: prism and tilt-corrected POI positions in the
    navigation frame at an observation timestamp, plus the attitude estimate,
    blend weight, and IMU timestamp that produced it."""

    timestamp: float
    prism_nav: np.ndarray
    poi_nav: np.ndarray
    attitude_used: Attitude
    alpha_used: float
    imu_timestamp_used: float

    def __post_init__(self):
        object.__setattr__(self, "prism_nav", np.asarray(self.prism_nav, dtype=float))
        object.__setattr__(self, "poi_nav", np.asarray(self.poi_nav, dtype=float))


@dataclass(frozen=True)
class PipelineConfig:
    """Fusion settings.

    pairing_tolerance_s: how far past an observation's (latency-corrected)
        timestamp an attitude estimate may lie and still be paired with it.
        Zero gives the strict replay rule (attitude at or before the
        observation); the nonzero default absorbs clock jitter in live use.
    rts_latency_s: constant age of observation timestamps relative to the IMU
        clock, subtracted before pairing. Zero when both streams are stamped
        on one clock.
    hold_yaw: freeze yaw at its initial (or last externally set) value instead
        of following the drifting gyro integral. On by default: without a
        heading reference, integrated yaw corrupts the lever-arm rotation.
    """

    filter_config: FilterConfig = field(default_factory=FilterConfig)
    lever_arms: LeverArms = field(default_factory=LeverArms)
    helmert: HelmertParams = field(default_factory=HelmertParams)
    rts_buffer_capacity: int = 32
    pairing_tolerance_s: float = 0.25
    rts_latency_s: float = 0.0
    hold_yaw: bool = True

    def __post_init__(self):
        if self.rts_buffer_capacity < 1:
            raise ValueError(
                f"rts_buffer_capacity must be >= 1, got {self.rts_buffer_capacity}"
            )
        if not (math.isfinite(self.pairing_tolerance_s) and self.pairing_tolerance_s >= 0.0):
            raise ValueError(
                f"pairing_tolerance_s must be >= 0, got {self.pairing_tolerance_s}"
            )
        if not (math.isfinite(self.rts_latency_s) and self.rts_latency_s >= 0.0):
            raise ValueError(f"rts_latency_s must be >= 0, got {self.rts_latency_s}")


class Pipeline:
    """Stream fusion state machine.

    Life cycle: the first ``bias_calibration_count`` IMU samples must come
    from an idle period; they are averaged into the gyro bias, and the last of
    them seeds the attitude filter. Every later IMU sample advances the
    filter. Observations may arrive at any time; they are buffered (oldest
    dropped past capacity) until :meth:`drain` can pair them.

    Records are emitted in observation order. A buffered observation earlier
    than the first attitude estimate blocks the queue until the ring buffer
    evicts it; feed the pipeline its idle segment first to avoid the churn.
    """

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config if config is not None else PipelineConfig()
        self._calib_gyro_sum = np.zeros(3)
        self._calib_count = 0
        self._last_imu_timestamp: float | None = None
        self._state: FilterState | None = None
        self._held_yaw = 0.0
        self._att_times: list[float] = []
        self._att_entries: list[tuple[Attitude, float]] = []
        self._buffer: deque[RtsObservation] = deque()
        self._dropped = 0

    @property
    def calibrated(self) -> bool:
        """True once the gyro bias is fixed and the filter is running."""
        return self._state is not None

    @property
    def gyro_bias(self) -> np.ndarray | None:
        """Calibrated gyro bias [rad/s], or None during the calibration phase."""
        return None if self._state is None else self._state.gyro_bias.copy()

    @property
    def latest_attitude(self) -> tuple[float, Attitude] | None:
        """Most recent (imu_timestamp, attitude) estimate, or None before seeding."""
        if not self._att_times:
            return None
        return self._att_times[-1], self._att_entries[-1][0]

    @property
    def rts_buffered(self) -> int:
        return len(self._buffer)

    @property
    def rts_dropped(self) -> int:
        """Observations evicted by ring-buffer overflow since construction."""
        return self._dropped

    def _check_imu(self, sample: ImuSample) -> None:
        if not (
            math.isfinite(sample.timestamp)
            and np.all(np.isfinite(sample.accel))
            and np.all(np.isfinite(sample.gyro))
        ):
            raise ValueError(f"non-finite IMU sample at t={sample.timestamp!r}")
        if self._last_imu_timestamp is not None and sample.timestamp < self._last_imu_timestamp:
            raise ValueError(
                f"non-monotone IMU timestamp: {sample.timestamp} < {self._last_imu_timestamp}"
            )

    def push_imu(self, sample: ImuSample) -> None:
        """Feed one IMU sample: calibrates until the count is reached, then filters."""
        cfg = self.config.filter_config
        if self._state is None:
            self._check_imu(sample)
            self._last_imu_timestamp = sample.timestamp
            self._calib_gyro_sum = self._calib_gyro_sum + sample.gyro
            self._calib_count += 1
            if self._calib_count < cfg.bias_calibration_count:
                return
            bias = self._calib_gyro_sum / self._calib_count
            seed = FilterState(attitude=Attitude(yaw=self._held_yaw), gyro_bias=bias)
            self._state = filter_step(seed, sample, cfg)
        else:
            state = filter_step(self._state, sample, cfg)
            if self.config.hold_yaw:
                state = set_yaw(state, self._held_yaw)
            self._state = state
            self._last_imu_timestamp = sample.timestamp
        self._att_times.append(sample.timestamp)
        self._att_entries.append((self._state.attitude, self._state.last_alpha))

    def push_rts(self, obs: RtsObservation) -> None:
        """Buffer one observation; past capacity the oldest is dropped and counted."""
        if len(self._buffer) >= self.config.rts_buffer_capacity:
            self._buffer.popleft()
            self._dropped += 1
        self._buffer.append(obs)

    def set_yaw(self, yaw: float) -> None:
        """Reset the heading used for lever-arm rotation (and the held value)."""
        if not math.isfinite(yaw):
            raise ValueError(f"yaw must be finite, got {yaw}")
        self._held_yaw = wrap_angle(yaw)
        if self._state is not None:
            self._state = set_yaw(self._state, self._held_yaw)

    def drain(self) -> list[FusedRecord]:
        """Pair and emit all buffered observations that have an eligible attitude.

        Eligible means the attitude's IMU timestamp is at or before the
        observation timestamp minus ``rts_latency_s`` plus
        ``pairing_tolerance_s``; the latest such estimate is used. Processing
        stops at the first observation with no eligible attitude, which stays
        buffered together with everything behind it. Returns an empty list
        during the calibration phase.
        """
        if self._state is None:
            return []
        records = []
        cfg = self.config
        while self._buffer:
            obs = self._buffer[0]
            cutoff = obs.timestamp - cfg.rts_latency_s + cfg.pairing_tolerance_s
            idx = bisect_right(self._att_times, cutoff) - 1
            if idx < 0:
                break
            self._buffer.popleft()
            attitude, alpha = self._att_entries[idx]
            prism_rts = polar_to_cartesian(obs)
            prism_nav = apply_helmert(cfg.helmert, prism_rts)
            poi_nav = poi_position(prism_nav, attitude, cfg.lever_arms)
            records.append(
                FusedRecord(
                    timestamp=obs.timestamp,
                    prism_nav=prism_nav,
                    poi_nav=poi_nav,
                    attitude_used=attitude,
                    alpha_used=alpha,
                    imu_timestamp_used=self._att_times[idx],
                )
            )
        return records
