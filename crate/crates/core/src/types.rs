//! Shared domain types and unit conventions.
//!
//! Units are meters for all distances and normalized [0, 1] values for image
//! channels and point intensities. All types validate their invariants on
//! construction and are immutable afterwards, so they can be shared freely
//! across worker threads.

use crate::error::{FogError, Result};
use crate::scalar::{real, Real};

/// An RGB image with row-major `H x W x 3` channel data in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> RgbImage<T> {
    /// Builds an image from row-major interleaved RGB data.
    ///
    /// Every channel value must be finite and in [0, 1].
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(FogError::BufferLength {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        for (index, &v) in data.iter().enumerate() {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(FogError::InvalidChannel {
                    index,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y) -> [r, g, b]` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [T; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Interleaved RGB samples, row-major.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// A dense metric depth map, row-major `H x W`, in meters.
///
/// Depths are strictly positive and finite but otherwise unbounded: sky
/// regions routinely carry values like 10,000 m and must pass through
/// unclamped.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> DepthMap<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        let expected = width * height;
        if data.len() != expected {
            return Err(FogError::BufferLength {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        for (i, &d) in data.iter().enumerate() {
            if !(d.is_finite() && d > T::zero()) {
                return Err(FogError::InvalidDepth {
                    x: i % width,
                    y: i / width,
                    value: d.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

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

    /// Nearest-neighbor resampling. Chosen over interpolation so no depth is
    /// invented across occlusion boundaries.
    pub fn resample_nearest(&self, width: usize, height: usize) -> Self {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            let sy = nearest_index(y, height, self.height);
            for x in 0..width {
                let sx = nearest_index(x, width, self.width);
                data.push(self.data[sy * self.width + sx]);
            }
        }
        Self {
            width,
            height,
            data,
        }
    }
}

fn nearest_index(dst: usize, dst_len: usize, src_len: usize) -> usize {
    // Center-aligned mapping; exact when the scale factor is integral.
    let pos = (dst as f64 + 0.5) * src_len as f64 / dst_len as f64;
    (pos.floor() as usize).min(src_len - 1)
}

/// Checks an image/depth pair for alignment, resampling the depth map to the
/// image resolution when the dimensions differ.
///
/// Aspect ratios that disagree by more than 1% indicate mismatched sources
/// and are rejected instead of resampled. Depth data is already validated at
/// construction (strictly positive, finite), so only geometry is checked
/// here. The operation is idempotent.
pub fn validate_pair<T: Real>(
    image: RgbImage<T>,
    depth: DepthMap<T>,
) -> Result<(RgbImage<T>, DepthMap<T>)> {
    if image.width() == depth.width() && image.height() == depth.height() {
        return Ok((image, depth));
    }
    let image_ar = image.width() as f64 / image.height() as f64;
    let depth_ar = depth.width() as f64 / depth.height() as f64;
    if ((image_ar - depth_ar) / image_ar).abs() > 0.01 {
        return Err(FogError::AspectRatioMismatch {
            image_width: image.width(),
            image_height: image.height(),
            depth_width: depth.width(),
            depth_height: depth.height(),
        });
    }
    let resampled = depth.resample_nearest(image.width(), image.height());
    Ok((image, resampled))
}

/// One LiDAR return: sensor-frame coordinates in meters plus normalized
/// intensity. The sensor origin is at (0, 0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub intensity: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T, z: T, intensity: T) -> Self {
        Self { x, y, z, intensity }
    }

    /// Euclidean range from the sensor origin.
    pub fn range(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// An ordered collection of LiDAR points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Point<T>>,
}

impl<T: Real> PointCloud<T> {
    /// Validates that every point has finite coordinates, a strictly positive
    /// range, and intensity in [0, 1].
    pub fn new(points: Vec<Point<T>>) -> Result<Self> {
        for (index, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(FogError::InvalidPoint {
                    index,
                    reason: "non-finite coordinates".into(),
                });
            }
            if !(p.intensity >= T::zero() && p.intensity <= T::one()) {
                return Err(FogError::InvalidPoint {
                    index,
                    reason: format!(
                        "intensity {} outside [0, 1]",
                        p.intensity.to_f64().unwrap_or(f64::NAN)
                    ),
                });
            }
            if !(p.range() > T::zero()) {
                return Err(FogError::InvalidPoint {
                    index,
                    reason: "zero range".into(),
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Visibility threshold below which the atmosphere counts as fog.
pub const FOG_MOR_LIMIT_M: f64 = 1000.0;

/// Numerator of the visibility-to-extinction relation: transmission reaches
/// 0.05 at the visibility distance, and -ln(0.05) is approximated as 3.
pub const MOR_EXTINCTION_NUMERATOR: f64 = 3.0;

/// Numerator of the fog backscatter coefficient in m^-1 sr^-1 per (1/MOR).
pub const BACKSCATTER_NUMERATOR: f64 = 0.046;

/// Default differential reflectivity of a hard target, in sr^-1.
pub const DEFAULT_BETA0: f64 = 1e-6 / std::f64::consts::PI;

/// Default half-power pulse width of the laser, in seconds.
pub const DEFAULT_TAU_H_S: f64 = 20e-9;

/// All per-frame fog coefficients, derived from a single visibility value.
///
/// The camera and LiDAR branches share the same meteorological optical range
/// so the two modalities stay synchronized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FogParams<T> {
    /// Meteorological optical range (visibility), meters.
    pub mor: T,
    /// Camera attenuation coefficient, m^-1. Always `3 / mor`.
    pub beta_cam: T,
    /// LiDAR extinction coefficient, m^-1. Always `3 / mor`.
    pub alpha: T,
    /// LiDAR backscatter coefficient, m^-1 sr^-1. Always `0.046 / mor`.
    pub beta_lidar: T,
    /// Differential reflectivity of hard targets, sr^-1.
    pub beta0: T,
    /// Half-power pulse width, seconds.
    pub tau_h: T,
}

impl<T: Real> FogParams<T> {
    /// Derives every coefficient from the visibility with the default sensor
    /// constants.
    pub fn from_mor(mor: T) -> Result<Self> {
        Self::from_mor_with(mor, real(DEFAULT_BETA0), real(DEFAULT_TAU_H_S))
    }

    /// Same as [`FogParams::from_mor`] but with explicit sensor constants.
    pub fn from_mor_with(mor: T, beta0: T, tau_h: T) -> Result<Self> {
        if !(mor.is_finite() && mor > T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "mor",
                reason: format!("must be finite and > 0, got {}", mor.to_f64().unwrap_or(f64::NAN)),
            });
        }
        if !(beta0.is_finite() && beta0 > T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "beta0",
                reason: "must be finite and > 0".into(),
            });
        }
        if !(tau_h.is_finite() && tau_h > T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "tau_h",
                reason: "must be finite and > 0".into(),
            });
        }
        Ok(Self {
            mor,
            beta_cam: real::<T>(MOR_EXTINCTION_NUMERATOR) / mor,
            alpha: real::<T>(MOR_EXTINCTION_NUMERATOR) / mor,
            beta_lidar: real::<T>(BACKSCATTER_NUMERATOR) / mor,
            beta0,
            tau_h,
        })
    }

    /// Whether the visibility is inside the meteorological fog regime
    /// (MOR below 1 km).
    pub fn is_fog(&self) -> bool {
        self.mor <= real(FOG_MOR_LIMIT_M)
    }
}

/// Derives fog coefficients from a visibility value. Free-function form of
/// [`FogParams::from_mor`].
pub fn mor_to_fog_params<T: Real>(mor: T) -> Result<FogParams<T>> {
    FogParams::from_mor(mor)
}

/// The ambient glow added by scattered light; determines fog brightness and
/// tint.
///
/// Estimated values are color-neutral by construction (`r == g == b`) with
/// luminance clipped to the configured daytime range; override values may
/// carry arbitrary channels in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericLight<T> {
    pub r: T,
    pub g: T,
    pub b: T,
    /// BT.709 relative luminance of (r, g, b).
    pub luminance: T,
}

impl<T: Real> AtmosphericLight<T> {
    /// A neutral gray light: all channels and the luminance equal `value`.
    pub fn neutral(value: T) -> Result<Self> {
        if !(value >= T::zero() && value <= T::one()) {
            return Err(FogError::InvalidParameter {
                name: "value",
                reason: "must be in [0, 1]".into(),
            });
        }
        Ok(Self {
            r: value,
            g: value,
            b: value,
            luminance: value,
        })
    }

    pub fn is_neutral(&self) -> bool {
        self.r == self.g && self.g == self.b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fog_params_at_visibility_limit() {
        // At the 1 km fog threshold the attenuation coefficient bottoms out
        // at 3e-3.
        let p = mor_to_fog_params(1000.0f64).unwrap();
        assert_eq!(p.beta_cam, 0.003);
        assert_eq!(p.alpha, 0.003);
        assert!(p.is_fog());
        assert!(!mor_to_fog_params(1000.1f64).unwrap().is_fog());
    }

    #[test]
    fn fog_params_at_150m() {
        let p = mor_to_fog_params(150.0f64).unwrap();
        assert_eq!(p.alpha, 0.02);
        assert_eq!(p.beta_cam, 0.02);
        assert_eq!(p.beta_lidar, 0.046 / 150.0);
        assert!((p.beta_lidar - 3.0667e-4).abs() < 1e-8);
        assert_eq!(p.beta0, 1e-6 / std::f64::consts::PI);
        assert_eq!(p.tau_h, 2e-8);
    }

    #[test]
    fn sensor_constants_independent_of_mor() {
        let a = mor_to_fog_params(150.0f64).unwrap();
        let b = mor_to_fog_params(37.5f64).unwrap();
        assert_eq!(a.beta0, b.beta0);
        assert_eq!(a.tau_h, b.tau_h);
        assert!((a.beta0 - 3.1831e-7).abs() < 1e-11);
    }

    #[test]
    fn fog_params_rejects_bad_mor() {
        assert!(mor_to_fog_params(0.0f64).is_err());
        assert!(mor_to_fog_params(-5.0f64).is_err());
        assert!(mor_to_fog_params(f64::NAN).is_err());
        assert!(mor_to_fog_params(f64::INFINITY).is_err());
    }

    #[test]
    fn fog_params_generic_over_f32() {
        let p = mor_to_fog_params(150.0f32).unwrap();
        assert!((p.alpha - 0.02f32).abs() < 1e-9);
    }

    #[test]
    fn validate_pair_identity() {
        let img = RgbImage::from_fn(8, 6, |_, _| [0.5f64, 0.5, 0.5]).unwrap();
        let depth = DepthMap::from_fn(8, 6, |_, _| 10.0f64).unwrap();
        let (i2, d2) = validate_pair(img.clone(), depth.clone()).unwrap();
        assert_eq!(i2, img);
        assert_eq!(d2, depth);
    }

    #[test]
    fn validate_pair_upsamples_matching_aspect() {
        let img = RgbImage::from_fn(8, 6, |_, _| [0.5f64, 0.5, 0.5]).unwrap();
        // Half-resolution depth with distinct quadrant values.
        let depth = DepthMap::from_fn(4, 3, |x, y| (1 + x + 10 * y) as f64).unwrap();
        let (_, d2) = validate_pair(img, depth.clone()).unwrap();
        assert_eq!(d2.width(), 8);
        assert_eq!(d2.height(), 6);
        // Each source texel expands into a 2x2 block.
        for y in 0..6 {
            for x in 0..8 {
                assert_eq!(d2.at(x, y), depth.at(x / 2, y / 2));
            }
        }
    }

    #[test]
    fn validate_pair_rejects_aspect_mismatch() {
        let img = RgbImage::from_fn(192, 128, |_, _| [0.5f64, 0.5, 0.5]).unwrap();
        let depth = DepthMap::from_fn(100, 128, |_, _| 10.0f64).unwrap();
        let err = validate_pair(img, depth).unwrap_err();
        assert!(matches!(err, FogError::AspectRatioMismatch { .. }));
    }

    #[test]
    fn depth_map_rejects_bad_samples() {
        let err = DepthMap::new(2, 1, vec![1.0f64, f64::NAN]).unwrap_err();
        match err {
            FogError::InvalidDepth { x, y, .. } => {
                assert_eq!((x, y), (1, 0));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(DepthMap::new(1, 1, vec![0.0f64]).is_err());
        assert!(DepthMap::new(1, 1, vec![-3.0f64]).is_err());
        // Very large sky depths are legal.
        assert!(DepthMap::new(1, 1, vec![10_000.0f64]).is_ok());
    }

    #[test]
    fn image_rejects_out_of_range_channels() {
        assert!(RgbImage::new(1, 1, vec![0.0f64, 0.5, 1.1]).is_err());
        assert!(RgbImage::new(1, 1, vec![0.0f64, -0.1, 0.5]).is_err());
        assert!(RgbImage::new(1, 1, vec![0.0f64, f64::NAN, 0.5]).is_err());
        assert!(RgbImage::new(1, 1, vec![0.0f64, 0.5]).is_err());
    }

    #[test]
    fn point_cloud_invariants() {
        let ok = PointCloud::new(vec![Point::new(1.0f64, 2.0, 0.5, 0.7)]);
        assert!(ok.is_ok());
        assert!(PointCloud::new(vec![Point::new(0.0f64, 0.0, 0.0, 0.5)]).is_err());
        assert!(PointCloud::new(vec![Point::new(1.0f64, 0.0, 0.0, 1.5)]).is_err());
        assert!(PointCloud::new(vec![Point::new(f64::INFINITY, 0.0, 0.0, 0.5)]).is_err());
        assert!(PointCloud::new(Vec::<Point<f64>>::new()).unwrap().is_empty());
    }
}
