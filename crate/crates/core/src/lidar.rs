//! LiDAR-side fog simulation.
//!
//! Each return is split into a hard component (the original target echo,
//! attenuated twice along the round trip) and a soft component (power
//! backscattered by fog droplets along the beam). The sensor reports the
//! stronger of the two: when backscatter wins, the point relocates toward
//! the sensor at the range of peak fog reflection, becoming a phantom point.
//!
//! The soft response at an apparent range r integrates the laser pulse over
//! the window of scatterer positions that contribute at r, weighted by a
//! sin^2 pulse shape and clipped to the interval between the sensor's blind
//! zone and the hard target. The model is deterministic.

use crate::error::{FogError, Result};
use crate::scalar::{real, Real};
use crate::types::{FogParams, Point, PointCloud};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 2.997_924_58e8;

/// Receiver calibration constant mapping the backscatter-to-reflectivity
/// power ratio into the sensor's normalized [0, 1] intensity scale. Without
/// it the raw ratio `beta_lidar / beta0` sits around 10^3 for any fog-level
/// visibility, which would saturate every return and relocate the entire
/// cloud regardless of density.
pub const RECEIVER_GAIN: f64 = 1e-6;

/// Discretization and sensor-floor settings for the LiDAR simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarSimConfig<T> {
    /// Blind-zone radius, meters. Points inside pass through unmodified.
    pub r_min: T,
    /// Sample spacing for the soft-response sweep and the pulse integral,
    /// meters.
    pub range_step: T,
    /// Returns with final intensity below this are dropped; 0 disables.
    pub noise_floor: T,
    /// Reserved for stochastic extensions; the current model is
    /// deterministic and never draws from it.
    pub rng_seed: u64,
}

impl<T: Real> Default for LidarSimConfig<T> {
    fn default() -> Self {
        Self {
            r_min: real(1.5),
            range_step: real(0.1),
            noise_floor: T::zero(),
            rng_seed: 0,
        }
    }
}

impl<T: Real> LidarSimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min.is_finite() && self.r_min > T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "r_min",
                reason: "must be finite and > 0".into(),
            });
        }
        if !(self.range_step.is_finite() && self.range_step > T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "range_step",
                reason: "must be finite and > 0".into(),
            });
        }
        if !(self.noise_floor.is_finite() && self.noise_floor >= T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "noise_floor",
                reason: "must be finite and >= 0".into(),
            });
        }
        Ok(())
    }
}

/// Sampled soft-return intensity along the beam, with its peak.
///
/// An empty profile (no samples) signals a target inside the blind zone;
/// such points pass through the simulation unmodified. `peak_range` and
/// `peak_value` are zero in that case. Ties in the peak resolve to the
/// closest range.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftResponseProfile<T> {
    pub ranges: Vec<T>,
    pub responses: Vec<T>,
    pub peak_range: T,
    pub peak_value: T,
}

impl<T: Real> SoftResponseProfile<T> {
    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

/// Two-way fog attenuation of a hard target: `i * exp(-2 * alpha * range)`.
pub fn attenuate_hard<T: Real>(intensity: T, range: T, alpha: T) -> Result<T> {
    if !(intensity >= T::zero() && intensity <= T::one()) {
        return Err(FogError::InvalidParameter {
            name: "intensity",
            reason: "must be in [0, 1]".into(),
        });
    }
    if !(range.is_finite() && range > T::zero()) {
        return Err(FogError::InvalidParameter {
            name: "range",
            reason: "must be finite and > 0".into(),
        });
    }
    if !(alpha.is_finite() && alpha >= T::zero()) {
        return Err(FogError::InvalidParameter {
            name: "alpha",
            reason: "must be finite and >= 0".into(),
        });
    }
    Ok(intensity * (-(T::one() + T::one()) * alpha * range).exp())
}

/// Precomputed pulse geometry shared across all points of one cloud.
struct SoftResponseModel<T> {
    alpha: T,
    /// `beta_lidar * RECEIVER_GAIN / beta0`.
    coupling: T,
    r_min: T,
    range_step: T,
    /// Half of the pulse footprint in range, `c * tau_h / 4`.
    half_extent: T,
    /// Cell width of the pulse integral; tiles the footprint exactly.
    cell_width: T,
    /// Pulse shape sampled at cell midpoints.
    pulse_table: Vec<T>,
    /// Full-footprint integral of the sampled pulse.
    norm: T,
}

impl<T: Real> SoftResponseModel<T> {
    fn new(params: &FogParams<T>, cfg: &LidarSimConfig<T>) -> Result<Self> {
        cfg.validate()?;
        for (name, v) in [("alpha", params.alpha), ("beta_lidar", params.beta_lidar)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(FogError::InvalidParameter {
                    name,
                    reason: "must be finite and >= 0".into(),
                });
            }
        }
        if !(params.beta0.is_finite() && params.beta0 > T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "beta0",
                reason: "must be finite and > 0".into(),
            });
        }
        if !(params.tau_h.is_finite() && params.tau_h > T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "tau_h",
                reason: "must be finite and > 0".into(),
            });
        }

        // Spatial extent of the pulse: half-power width tau_h maps to
        // c * tau_h / 2 of range along the beam.
        let extent = real::<T>(SPEED_OF_LIGHT_M_S) * params.tau_h / real(2.0);
        let half_extent = extent / real(2.0);
        let n_cells = (extent / cfg.range_step)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let cell_width = extent / T::from_usize(n_cells).unwrap();
        let mut pulse_table = Vec::with_capacity(n_cells);
        let mut norm = T::zero();
        for j in 0..n_cells {
            let mid = -half_extent + (T::from_usize(j).unwrap() + real(0.5)) * cell_width;
            let p = pulse_shape(mid, extent);
            pulse_table.push(p);
            norm += p * cell_width;
        }
        Ok(Self {
            alpha: params.alpha,
            coupling: params.beta_lidar * real::<T>(RECEIVER_GAIN) / params.beta0,
            r_min: cfg.r_min,
            range_step: cfg.range_step,
            half_extent,
            cell_width,
            pulse_table,
            norm,
        })
    }

    /// Fraction of the pulse footprint centered at `r` whose backscatter
    /// window falls inside `[r_min, range]`. Composite midpoint rule; the
    /// two partially covered edge cells are evaluated at the midpoint of
    /// their covered segment.
    fn overlap_weight(&self, r: T, range: T) -> T {
        let lo = (self.r_min - r).max(-self.half_extent);
        let hi = (range - r).min(self.half_extent);
        if hi <= lo {
            return T::zero();
        }
        if lo == -self.half_extent && hi == self.half_extent {
            return T::one();
        }
        let extent = self.half_extent + self.half_extent;
        let mut acc = T::zero();
        for (j, &p) in self.pulse_table.iter().enumerate() {
            let a = -self.half_extent + T::from_usize(j).unwrap() * self.cell_width;
            let b = a + self.cell_width;
            let ca = a.max(lo);
            let cb = b.min(hi);
            if cb <= ca {
                continue;
            }
            if ca == a && cb == b {
                acc += p * self.cell_width;
            } else {
                let mid = (ca + cb) / (T::one() + T::one());
                acc += pulse_shape(mid, extent) * (cb - ca);
            }
        }
        acc / self.norm
    }

    /// Sweeps the apparent range from `r_min` to `range`, feeding each
    /// `(r, soft intensity)` sample to `sink`.
    fn scan(&self, intensity: T, range: T, mut sink: impl FnMut(T, T)) {
        let two = T::one() + T::one();
        let base = intensity * self.coupling * range * range;
        let mut k = 0usize;
        loop {
            let r = self.r_min + T::from_usize(k).unwrap() * self.range_step;
            if r > range {
                break;
            }
            let w = self.overlap_weight(r, range);
            let value = if w > T::zero() {
                base / (r * r) * (-two * self.alpha * r).exp() * w
            } else {
                T::zero()
            };
            sink(r, value);
            k += 1;
        }
    }

    /// Peak of the soft response, or `None` for targets inside the blind
    /// zone.
    fn peak(&self, intensity: T, range: T) -> Option<(T, T)> {
        if range <= self.r_min {
            return None;
        }
        let mut best: Option<(T, T)> = None;
        self.scan(intensity, range, |r, v| match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((r, v)),
        });
        best
    }
}

/// Raised-cosine (sin^2) pulse over a footprint of length `extent`,
/// centered on zero.
fn pulse_shape<T: Real>(v: T, extent: T) -> T {
    let c = (real::<T>(std::f64::consts::PI) * v / extent).cos();
    c * c
}

/// Samples the fog backscatter response for a target of the given intensity
/// at the given range.
///
/// Each sample is
/// `i * (beta_lidar * G / beta0) * (R^2 / r^2) * exp(-2 alpha r) * W(r)`
/// with `W` the pulse-overlap weight and `G` the receiver gain. A target at
/// or inside `r_min` yields an empty profile.
pub fn soft_response<T: Real>(
    intensity: T,
    range: T,
    params: &FogParams<T>,
    cfg: &LidarSimConfig<T>,
) -> Result<SoftResponseProfile<T>> {
    if !(intensity >= T::zero() && intensity <= T::one()) {
        return Err(FogError::InvalidParameter {
            name: "intensity",
            reason: "must be in [0, 1]".into(),
        });
    }
    if !(range.is_finite() && range > T::zero()) {
        return Err(FogError::InvalidParameter {
            name: "range",
            reason: "must be finite and > 0".into(),
        });
    }
    let model = SoftResponseModel::new(params, cfg)?;
    if range <= cfg.r_min {
        return Ok(SoftResponseProfile {
            ranges: Vec::new(),
            responses: Vec::new(),
            peak_range: T::zero(),
            peak_value: T::zero(),
        });
    }
    let mut ranges = Vec::new();
    let mut responses = Vec::new();
    model.scan(intensity, range, |r, v| {
        ranges.push(r);
        responses.push(v);
    });
    let mut peak_range = ranges[0];
    let mut peak_value = responses[0];
    for (&r, &v) in ranges.iter().zip(&responses) {
        if v > peak_value {
            peak_value = v;
            peak_range = r;
        }
    }
    Ok(SoftResponseProfile {
        ranges,
        responses,
        peak_range,
        peak_value,
    })
}

/// How the simulation handled each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointOutcome {
    /// Inside the blind zone; copied through unmodified.
    Passthrough,
    /// Hard return won; position kept, intensity attenuated.
    KeptAttenuated,
    /// Backscatter won; moved to the peak-reflection range.
    Relocated,
    /// Final intensity fell below the noise floor.
    Dropped,
}

/// Aggregate counters for one simulated cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarFogStats<T> {
    pub total: usize,
    pub passthrough: usize,
    pub kept_attenuated: usize,
    pub relocated: usize,
    pub dropped: usize,
    pub mean_intensity_before: T,
    pub mean_intensity_after: T,
}

/// Applies fog to a whole cloud, deriving the coefficients from the
/// visibility. Point order is preserved.
pub fn simulate_lidar_fog<T: Real>(
    cloud: &PointCloud<T>,
    mor: T,
    cfg: &LidarSimConfig<T>,
) -> Result<(PointCloud<T>, LidarFogStats<T>)> {
    let params = FogParams::from_mor(mor)?;
    simulate_lidar_fog_with(cloud, &params, cfg)
}

/// Applies fog to a whole cloud with explicit coefficients.
///
/// Per point: the attenuated hard return competes with the soft-response
/// peak. The stronger one decides position and intensity; relocated points
/// stay on their original ray. Relocated intensities are capped at full
/// scale, modeling receiver saturation. Points whose final intensity drops
/// below the noise floor disappear.
pub fn simulate_lidar_fog_with<T: Real>(
    cloud: &PointCloud<T>,
    params: &FogParams<T>,
    cfg: &LidarSimConfig<T>,
) -> Result<(PointCloud<T>, LidarFogStats<T>)> {
    let model = SoftResponseModel::new(params, cfg)?;
    let two = T::one() + T::one();

    let mut out = Vec::with_capacity(cloud.len());
    let mut stats = LidarFogStats {
        total: cloud.len(),
        passthrough: 0,
        kept_attenuated: 0,
        relocated: 0,
        dropped: 0,
        mean_intensity_before: T::zero(),
        mean_intensity_after: T::zero(),
    };
    let mut sum_before = T::zero();
    let mut sum_after = T::zero();

    for p in cloud.points() {
        sum_before += p.intensity;
        let range = p.range();
        if range <= cfg.r_min {
            stats.passthrough += 1;
            sum_after += p.intensity;
            out.push(*p);
            continue;
        }
        let hard = p.intensity * (-two * params.alpha * range).exp();
        let (candidate, outcome) = match model.peak(p.intensity, range) {
            Some((peak_range, peak_value)) if peak_value > hard => {
                let scale = peak_range / range;
                let point = Point::new(
                    p.x * scale,
                    p.y * scale,
                    p.z * scale,
                    peak_value.min(T::one()),
                );
                (point, PointOutcome::Relocated)
            }
            _ => (
                Point::new(p.x, p.y, p.z, hard),
                PointOutcome::KeptAttenuated,
            ),
        };
        if cfg.noise_floor > T::zero() && candidate.intensity < cfg.noise_floor {
            stats.dropped += 1;
            continue;
        }
        match outcome {
            PointOutcome::Relocated => stats.relocated += 1,
            _ => stats.kept_attenuated += 1,
        }
        sum_after += candidate.intensity;
        out.push(candidate);
    }

    if stats.total > 0 {
        stats.mean_intensity_before = sum_before / T::from_usize(stats.total).unwrap();
    }
    if !out.is_empty() {
        stats.mean_intensity_after = sum_after / T::from_usize(out.len()).unwrap();
    }
    let cloud = PointCloud::new(out)?;
    Ok((cloud, stats))
}
