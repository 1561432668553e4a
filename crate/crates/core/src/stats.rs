//! Corpus-level aggregation of per-image airlight estimates.

use crate::airlight::bt709_luminance;
use crate::error::{FogError, Result};
use crate::scalar::Real;

/// Aggregated airlight statistics over an image corpus.
///
/// `channel_spread` is the largest pairwise difference between the channel
/// means; spectrally neutral fog keeps it near zero. The derived clip bounds
/// are the extreme per-image luminances, reported for reference only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusReport<T> {
    pub n_images: usize,
    pub mean_r: T,
    pub mean_g: T,
    pub mean_b: T,
    pub mean_luminance: T,
    pub channel_spread: T,
    pub derived_clip_low: T,
    pub derived_clip_high: T,
}

/// Folds per-image raw estimates into a [`CorpusReport`].
///
/// Means are arithmetic per channel; the mean luminance is the BT.709
/// luminance of the mean vector. Order of the estimates does not matter.
pub fn build_report<T: Real>(estimates: &[(T, T, T)]) -> Result<CorpusReport<T>> {
    if estimates.is_empty() {
        return Err(FogError::EmptyInput("estimates"));
    }
    let n = T::from_usize(estimates.len()).expect("corpus size representable");
    let mut sum = [T::zero(); 3];
    let mut lum_low = T::infinity();
    let mut lum_high = T::neg_infinity();
    for &(r, g, b) in estimates {
        sum[0] += r;
        sum[1] += g;
        sum[2] += b;
        let lum = bt709_luminance(r, g, b)?;
        lum_low = lum_low.min(lum);
        lum_high = lum_high.max(lum);
    }
    let mean_r = sum[0] / n;
    let mean_g = sum[1] / n;
    let mean_b = sum[2] / n;
    // Means of [0, 1] samples stay in [0, 1] up to rounding; clamp before
    // the luminance range check.
    let mean_luminance = bt709_luminance(
        mean_r.max(T::zero()).min(T::one()),
        mean_g.max(T::zero()).min(T::one()),
        mean_b.max(T::zero()).min(T::one()),
    )?;
    let spread = (mean_r - mean_g)
        .abs()
        .max((mean_g - mean_b).abs())
        .max((mean_r - mean_b).abs());
    Ok(CorpusReport {
        n_images: estimates.len(),
        mean_r,
        mean_g,
        mean_b,
        mean_luminance,
        channel_spread: spread,
        derived_clip_low: lum_low,
        derived_clip_high: lum_high,
    })
}

impl<T: Real> CorpusReport<T> {
    /// Human-readable rendering with fixed 6-decimal formatting.
    pub fn to_text(&self) -> String {
        format!(
            "n_images        {}\n\
             mean_r          {:.6}\n\
             mean_g          {:.6}\n\
             mean_b          {:.6}\n\
             mean_luminance  {:.6}\n\
             channel_spread  {:.6}\n\
             derived_clip_low  {:.6}\n\
             derived_clip_high {:.6}\n",
            self.n_images,
            self.mean_r,
            self.mean_g,
            self.mean_b,
            self.mean_luminance,
            self.channel_spread,
            self.derived_clip_low,
            self.derived_clip_high,
        )
    }
}
