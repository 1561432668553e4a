//! Color-neutral atmospheric light estimation.
//!
//! The raw estimate comes from a dark channel prior restricted to pixels
//! beyond a depth threshold, so the pick reflects the sky's ambient
//! illumination rather than bright foreground objects. Real fog scatters all
//! visible wavelengths about equally, so the final light is forced neutral:
//! the raw estimate's BT.709 luminance is clipped to an empirically grounded
//! daytime range and broadcast to all three channels.

use crate::error::{FogError, Result};
use crate::scalar::{real, Real};
use crate::stats::{build_report, CorpusReport};
use crate::types::{AtmosphericLight, DepthMap, RgbImage};

/// BT.709 relative luminance coefficients for R, G, B.
pub const BT709_COEFFS: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Tuning knobs for the airlight estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirlightConfig<T> {
    /// Pixels deeper than this take part in candidate selection, meters.
    pub depth_threshold: T,
    /// Side of the square min-filter window for the dark channel; odd.
    pub dark_channel_patch: usize,
    /// Fraction of candidates, by dark channel value, kept for the final
    /// brightest-pixel pick.
    pub candidate_fraction: T,
    /// Lower luminance clip bound.
    pub lum_low: T,
    /// Upper luminance clip bound.
    pub lum_high: T,
}

impl<T: Real> Default for AirlightConfig<T> {
    fn default() -> Self {
        Self {
            depth_threshold: real(1000.0),
            dark_channel_patch: 15,
            candidate_fraction: real(0.001),
            lum_low: real(0.6374),
            lum_high: real(0.8555),
        }
    }
}

impl<T: Real> AirlightConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lum_low > T::zero() && self.lum_low <= self.lum_high && self.lum_high <= T::one())
        {
            return Err(FogError::InvalidParameter {
                name: "lum_low/lum_high",
                reason: "need 0 < lum_low <= lum_high <= 1".into(),
            });
        }
        if self.dark_channel_patch == 0 || self.dark_channel_patch % 2 == 0 {
            return Err(FogError::InvalidParameter {
                name: "dark_channel_patch",
                reason: "must be odd and >= 1".into(),
            });
        }
        if !(self.candidate_fraction > T::zero() && self.candidate_fraction <= T::one()) {
            return Err(FogError::InvalidParameter {
                name: "candidate_fraction",
                reason: "must be in (0, 1]".into(),
            });
        }
        if !(self.depth_threshold.is_finite() && self.depth_threshold >= T::zero()) {
            return Err(FogError::InvalidParameter {
                name: "depth_threshold",
                reason: "must be finite and >= 0".into(),
            });
        }
        Ok(())
    }
}

/// BT.709 relative luminance: `0.2126 R + 0.7152 G + 0.0722 B`.
pub fn bt709_luminance<T: Real>(r: T, g: T, b: T) -> Result<T> {
    for v in [r, g, b] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(FogError::InvalidParameter {
                name: "channel",
                reason: format!("value {} outside [0, 1]", v.to_f64().unwrap_or(f64::NAN)),
            });
        }
    }
    Ok(real::<T>(BT709_COEFFS[0]) * r + real::<T>(BT709_COEFFS[1]) * g + real::<T>(BT709_COEFFS[2]) * b)
}

/// Raw (pre-clipping) airlight estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawAirlight<T> {
    pub r: T,
    pub g: T,
    pub b: T,
    /// Set when no pixel lay beyond the depth threshold and the estimator
    /// fell back to the unfiltered image.
    pub fallback: bool,
}

/// Sliding-window minimum over one axis (van Herk/Gil-Werman style deque),
/// window `2 * radius + 1` clamped at the borders.
fn min_filter_line<T: Real>(src: &[T], radius: usize, out: &mut Vec<T>) {
    out.clear();
    let n = src.len();
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for i in 0..n + radius {
        if i < n {
            while let Some(&back) = deque.back() {
                if src[back] >= src[i] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(i);
        }
        if i >= radius {
            let center = i - radius;
            while let Some(&front) = deque.front() {
                if front + radius < center {
                    deque.pop_front();
                } else {
                    break;
                }
            }
            out.push(src[*deque.front().expect("window never empty")]);
        }
    }
}

/// Dark channel: per-pixel channel minimum, min-filtered over a square patch.
fn dark_channel<T: Real>(image: &RgbImage<T>, patch: usize) -> Vec<T> {
    let (w, h) = (image.width(), image.height());
    let radius = patch / 2;
    let data = image.data();
    let mut min_rgb = Vec::with_capacity(w * h);
    for px in 0..w * h {
        let base = px * 3;
        min_rgb.push(data[base].min(data[base + 1]).min(data[base + 2]));
    }

    // Separable min filter: rows, then columns.
    let mut rows = vec![T::zero(); w * h];
    let mut line = Vec::with_capacity(w.max(h));
    for y in 0..h {
        min_filter_line(&min_rgb[y * w..(y + 1) * w], radius, &mut line);
        rows[y * w..(y + 1) * w].copy_from_slice(&line);
    }
    let mut out = vec![T::zero(); w * h];
    let mut column = Vec::with_capacity(h);
    for x in 0..w {
        column.clear();
        column.extend((0..h).map(|y| rows[y * w + x]));
        min_filter_line(&column, radius, &mut line);
        for (y, &v) in line.iter().enumerate() {
            out[y * w + x] = v;
        }
    }
    out
}

fn raw_estimate_masked<T: Real>(
    image: &RgbImage<T>,
    candidates: Vec<usize>,
    fallback: bool,
    cfg: &AirlightConfig<T>,
) -> RawAirlight<T> {
    let dark = dark_channel(image, cfg.dark_channel_patch);
    let m = candidates.len();
    debug_assert!(m > 0);
    let keep = (cfg.candidate_fraction.to_f64().unwrap() * m as f64).ceil() as usize;
    let keep = keep.clamp(1, m);

    // Top `keep` candidates by dark channel value; ties break toward the
    // earlier pixel in row-major order so the result is deterministic.
    let mut ranked: Vec<usize> = candidates;
    let by_dark_desc = |&a: &usize, &b: &usize| {
        dark[b].partial_cmp(&dark[a]).unwrap().then(a.cmp(&b))
    };
    if keep < ranked.len() {
        ranked.select_nth_unstable_by(keep - 1, by_dark_desc);
        ranked.truncate(keep);
    }

    // Brightest pixel (by channel sum) within the kept set.
    let data = image.data();
    let mut best_idx = usize::MAX;
    let mut best_sum = -T::one();
    for &idx in &ranked {
        let base = idx * 3;
        let sum = data[base] + data[base + 1] + data[base + 2];
        if sum > best_sum || (sum == best_sum && idx < best_idx) {
            best_sum = sum;
            best_idx = idx;
        }
    }
    let base = best_idx * 3;
    RawAirlight {
        r: data[base],
        g: data[base + 1],
        b: data[base + 2],
        fallback,
    }
}

/// Depth-filtered dark channel prior pick of the raw atmospheric light.
///
/// Candidates are pixels deeper than `cfg.depth_threshold`; among the top
/// `candidate_fraction` of them by dark channel value, the brightest pixel
/// (largest channel sum) wins. When no pixel passes the depth filter the
/// whole image becomes the candidate set and the `fallback` flag is raised.
pub fn estimate_airlight_raw<T: Real>(
    image: &RgbImage<T>,
    depth: &DepthMap<T>,
    cfg: &AirlightConfig<T>,
) -> Result<RawAirlight<T>> {
    cfg.validate()?;
    if image.width() != depth.width() || image.height() != depth.height() {
        return Err(FogError::DimensionMismatch {
            expected_width: image.width(),
            expected_height: image.height(),
            actual_width: depth.width(),
            actual_height: depth.height(),
        });
    }
    if image.width() * image.height() == 0 {
        return Err(FogError::EmptyInput("image"));
    }
    let candidates: Vec<usize> = depth
        .data()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > cfg.depth_threshold)
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        let all: Vec<usize> = (0..image.width() * image.height()).collect();
        Ok(raw_estimate_masked(image, all, true, cfg))
    } else {
        Ok(raw_estimate_masked(image, candidates, false, cfg))
    }
}

/// Clips the luminance of a raw estimate into `[lum_low, lum_high]` and
/// broadcasts it to all three channels, yielding a neutral light.
pub fn clip_airlight<T: Real>(r: T, g: T, b: T, cfg: &AirlightConfig<T>) -> Result<AtmosphericLight<T>> {
    cfg.validate()?;
    let lum = bt709_luminance(r, g, b)?;
    let clipped = lum.max(cfg.lum_low).min(cfg.lum_high);
    Ok(AtmosphericLight {
        r: clipped,
        g: clipped,
        b: clipped,
        luminance: clipped,
    })
}

/// Full estimation: depth-filtered raw pick, luminance clip, neutral
/// broadcast.
pub fn estimate_airlight<T: Real>(
    image: &RgbImage<T>,
    depth: &DepthMap<T>,
    cfg: &AirlightConfig<T>,
) -> Result<AtmosphericLight<T>> {
    let raw = estimate_airlight_raw(image, depth, cfg)?;
    clip_airlight(raw.r, raw.g, raw.b, cfg)
}

/// Raw airlight estimates over a corpus, aggregated into channel means and
/// luminance statistics.
///
/// Images with a depth map use the depth-filtered estimator; images without
/// one are estimated over the full frame, matching how real foggy corpora
/// without dense depth have to be analyzed.
pub fn corpus_airlight_stats<T: Real>(
    items: &[(RgbImage<T>, Option<DepthMap<T>>)],
    cfg: &AirlightConfig<T>,
) -> Result<CorpusReport<T>> {
    cfg.validate()?;
    if items.is_empty() {
        return Err(FogError::EmptyInput("corpus"));
    }
    let mut estimates = Vec::with_capacity(items.len());
    for (image, depth) in items {
        let raw = match depth {
            Some(depth) => estimate_airlight_raw(image, depth, cfg)?,
            None => {
                if image.width() * image.height() == 0 {
                    return Err(FogError::EmptyInput("image"));
                }
                let all: Vec<usize> = (0..image.width() * image.height()).collect();
                raw_estimate_masked(image, all, false, cfg)
            }
        };
        estimates.push((raw.r, raw.g, raw.b));
    }
    build_report(&estimates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luminance_is_bt709() {
        assert_eq!(bt709_luminance(1.0f64, 1.0, 1.0).unwrap(), 0.2126 + 0.7152 + 0.0722);
        // Empirical neutral-fog rows used to derive the clip bounds.
        let low = bt709_luminance(0.6370f64, 0.6374, 0.6384).unwrap();
        assert!((low - 0.6374).abs() < 5e-4);
        let high = bt709_luminance(0.8537f64, 0.8531, 0.8848).unwrap();
        assert!((high - 0.8555).abs() < 5e-4);
    }

    #[test]
    fn luminance_rejects_out_of_range() {
        assert!(bt709_luminance(1.2f64, 0.0, 0.0).is_err());
        assert!(bt709_luminance(0.5f64, -0.1, 0.0).is_err());
        assert!(bt709_luminance(0.5f64, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn gray_luminance_equals_value() {
        for v in [0.0f64, 0.25, 0.5, 0.9, 1.0] {
            let lum = bt709_luminance(v, v, v).unwrap();
            assert!((lum - v).abs() < 1e-12);
        }
    }

    #[test]
    fn clip_cases() {
        let cfg = AirlightConfig::default();
        // Blue-cast raw pick: luminance 0.32206 clips up to the lower bound.
        let a = clip_airlight(0.2f64, 0.3, 0.9, &cfg).unwrap();
        assert_eq!(a.r, 0.6374);
        assert!(a.is_neutral());
        assert_eq!(a.luminance, 0.6374);

        let b = clip_airlight(1.0f64, 1.0, 1.0, &cfg).unwrap();
        assert_eq!(b.r, 0.8555);

        let c = clip_airlight(0.7f64, 0.7, 0.7, &cfg).unwrap();
        assert!((c.r - 0.7).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = AirlightConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        cfg.dark_channel_patch = 4;
        assert!(cfg.validate().is_err());
        cfg.dark_channel_patch = 15;
        cfg.candidate_fraction = 0.0;
        assert!(cfg.validate().is_err());
        cfg.candidate_fraction = 0.001;
        cfg.lum_low = 0.9;
        cfg.lum_high = 0.8;
        assert!(cfg.validate().is_err());
    }

    /// Scene with a bright gray sky region at 5 km over a darker foreground.
    fn sky_scene() -> (RgbImage<f64>, DepthMap<f64>) {
        let image = RgbImage::from_fn(32, 32, |_, y| {
            if y < 10 {
                [0.9, 0.9, 0.9]
            } else {
                [0.2, 0.25, 0.3]
            }
        })
        .unwrap();
        let depth = DepthMap::from_fn(32, 32, |_, y| if y < 10 { 5000.0 } else { 60.0 }).unwrap();
        (image, depth)
    }

    #[test]
    fn uniform_sky_is_selected() {
        let (image, depth) = sky_scene();
        let raw = estimate_airlight_raw(&image, &depth, &AirlightConfig::default()).unwrap();
        assert_eq!((raw.r, raw.g, raw.b), (0.9, 0.9, 0.9));
        assert!(!raw.fallback);
    }

    #[test]
    fn all_near_depths_fall_back_with_warning() {
        let (image, _) = sky_scene();
        let depth = DepthMap::from_fn(32, 32, |_, _| 500.0).unwrap();
        let raw = estimate_airlight_raw(&image, &depth, &AirlightConfig::default()).unwrap();
        assert!(raw.fallback);
        // Unfiltered prior picks from the brightest region anyway.
        assert_eq!((raw.r, raw.g, raw.b), (0.9, 0.9, 0.9));
    }

    #[test]
    fn estimate_is_neutral_and_in_range() {
        let (image, depth) = sky_scene();
        let a = estimate_airlight(&image, &depth, &AirlightConfig::default()).unwrap();
        assert!(a.is_neutral());
        assert!(a.luminance >= 0.6374 && a.luminance <= 0.8555);
        // Raw luminance 0.9 exceeds the daytime ceiling and clips down.
        assert_eq!(a.luminance, 0.8555);
    }

    #[test]
    fn corpus_stats_single_image() {
        let (image, depth) = sky_scene();
        let report = corpus_airlight_stats(&[(image, Some(depth))], &AirlightConfig::default())
            .unwrap();
        assert_eq!(report.n_images, 1);
        assert_eq!(report.mean_r, 0.9);
        assert_eq!(report.mean_g, 0.9);
        assert_eq!(report.mean_b, 0.9);
        assert!(report.channel_spread.abs() < 1e-15);
    }

    #[test]
    fn corpus_stats_rejects_empty() {
        let items: Vec<(RgbImage<f64>, Option<DepthMap<f64>>)> = Vec::new();
        assert!(corpus_airlight_stats(&items, &AirlightConfig::default()).is_err());
    }

    #[test]
    fn corpus_without_depth_uses_full_frame() {
        let (image, _) = sky_scene();
        let report =
            corpus_airlight_stats(&[(image, None)], &AirlightConfig::default()).unwrap();
        assert_eq!(report.mean_r, 0.9);
    }
}
