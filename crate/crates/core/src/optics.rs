//! Camera-side fog synthesis: transmission maps and optical blending.
//!
//! The foggy image is a per-pixel convex combination of the clear image and
//! the atmospheric light, weighted by the transmission `t = exp(-beta * d)`.
//! Fog is assumed homogeneous: one scalar attenuation coefficient per frame.

use crate::airlight::{estimate_airlight_raw, clip_airlight, AirlightConfig};
use crate::error::{FogError, Result};
use crate::scalar::Real;
use crate::types::{AtmosphericLight, DepthMap, FogParams, RgbImage};

/// Per-pixel fraction of scene radiance surviving the fog, in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> TransmissionMap<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn at(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }
}

/// Computes `t(x) = exp(-beta_cam * d(x))` for every pixel.
///
/// Finite positive depths and a non-negative coefficient guarantee the
/// result lies in (0, 1]; `beta_cam = 0` yields exactly 1 everywhere.
pub fn compute_transmission<T: Real>(depth: &DepthMap<T>, beta_cam: T) -> Result<TransmissionMap<T>> {
    if !(beta_cam.is_finite() && beta_cam >= T::zero()) {
        return Err(FogError::InvalidParameter {
            name: "beta_cam",
            reason: format!(
                "must be finite and >= 0, got {}",
                beta_cam.to_f64().unwrap_or(f64::NAN)
            ),
        });
    }
    let data = depth.data().iter().map(|&d| (-beta_cam * d).exp()).collect();
    Ok(TransmissionMap {
        width: depth.width(),
        height: depth.height(),
        data,
    })
}

/// Blends the clear image toward the atmospheric light:
/// `I = J * t + A * (1 - t)` per pixel and channel.
///
/// The convex combination cannot leave [0, 1]; the output is still clamped
/// so downstream quantization never sees rounding spill.
pub fn apply_fog<T: Real>(
    image: &RgbImage<T>,
    transmission: &TransmissionMap<T>,
    airlight: &AtmosphericLight<T>,
) -> Result<RgbImage<T>> {
    if image.width() != transmission.width() || image.height() != transmission.height() {
        return Err(FogError::DimensionMismatch {
            expected_width: image.width(),
            expected_height: image.height(),
            actual_width: transmission.width(),
            actual_height: transmission.height(),
        });
    }
    for (name, v) in [("r", airlight.r), ("g", airlight.g), ("b", airlight.b)] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(FogError::InvalidParameter {
                name: "airlight",
                reason: format!("channel {name} outside [0, 1]"),
            });
        }
    }

    let a = [airlight.r, airlight.g, airlight.b];
    let src = image.data();
    let mut out = Vec::with_capacity(src.len());
    for (px, &t) in transmission.data().iter().enumerate() {
        let base = px * 3;
        let one_minus_t = T::one() - t;
        for c in 0..3 {
            let v = src[base + c] * t + a[c] * one_minus_t;
            out.push(v.max(T::zero()).min(T::one()));
        }
    }
    RgbImage::new(image.width(), image.height(), out)
}

/// Result of the camera fog branch.
#[derive(Debug, Clone)]
pub struct CameraFogOutput<T> {
    pub image: RgbImage<T>,
    /// The atmospheric light actually blended in.
    pub airlight: AtmosphericLight<T>,
    /// True when airlight estimation had no candidates beyond the depth
    /// threshold and fell back to the unfiltered image.
    pub airlight_fallback: bool,
}

/// Full camera branch: airlight estimation (unless overridden), transmission
/// from depth, and optical blending.
///
/// `image` and `depth` must already be aligned to the same dimensions.
pub fn simulate_camera_fog<T: Real>(
    image: &RgbImage<T>,
    depth: &DepthMap<T>,
    mor: T,
    cfg: &AirlightConfig<T>,
    airlight_override: Option<AtmosphericLight<T>>,
) -> Result<CameraFogOutput<T>> {
    if image.width() != depth.width() || image.height() != depth.height() {
        return Err(FogError::DimensionMismatch {
            expected_width: image.width(),
            expected_height: image.height(),
            actual_width: depth.width(),
            actual_height: depth.height(),
        });
    }
    let params = FogParams::from_mor(mor)?;
    let (airlight, fallback) = match airlight_override {
        Some(light) => (light, false),
        None => {
            let raw = estimate_airlight_raw(image, depth, cfg)?;
            (clip_airlight(raw.r, raw.g, raw.b, cfg)?, raw.fallback)
        }
    };
    let transmission = compute_transmission(depth, params.beta_cam)?;
    let foggy = apply_fog(image, &transmission, &airlight)?;
    Ok(CameraFogOutput {
        image: foggy,
        airlight,
        airlight_fallback: fallback,
    })
}
