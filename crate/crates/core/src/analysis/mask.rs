use serde::{Deserialize, Serialize};

use super::BinnedSpectrum;
use crate::error::{Error, Result};

/// One flat segment of an emission mask, in absolute frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSegment {
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    /// Largest power allowed within one resolution bandwidth.
    pub limit_dbm: f64,
    pub rbw_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Piecewise-constant emission mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub label: String,
    pub segments: Vec<MaskSegment>,
}

impl MaskSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let mask: MaskSpec = serde_json::from_str(text)?;
        mask.validate()?;
        Ok(mask)
    }

    /// Segments must be finite, sorted and non-overlapping, with `rbw > 0`.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            let finite = [s.f_start_hz, s.f_stop_hz, s.limit_dbm, s.rbw_hz]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidMask(format!(
                    "segment {i} has a non-finite field"
                )));
            }
            if s.f_start_hz >= s.f_stop_hz {
                return Err(Error::InvalidMask(format!("segment {i} has start >= stop")));
            }
            if s.rbw_hz <= 0.0 {
                return Err(Error::InvalidMask(format!("segment {i} has rbw <= 0")));
            }
            if i > 0 && self.segments[i - 1].f_stop_hz > s.f_start_hz {
                return Err(Error::InvalidMask(format!(
                    "segment {i} overlaps or precedes segment {}",
                    i - 1
                )));
            }
        }
        Ok(())
    }

    /// Same mask with every limit lowered by `db`.
    pub fn tightened(&self, db: f64) -> Self {
        let mut out = self.clone();
        out.label = format!("{} (tightened by {db} dB)", self.label);
        for s in &mut out.segments {
            s.limit_dbm -= db;
        }
        out
    }
}

/// Outcome for one mask segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub limit_dbm: f64,
    pub rbw_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub bins_evaluated: usize,
    /// `limit - level` at the worst bin; absent when no bin falls in the segment.
    pub worst_margin_db: Option<f64>,
    pub worst_freq_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskReport {
    pub label: String,
    pub pass: bool,
    pub segments: Vec<SegmentReport>,
}

/// Compare binned power, shifted to carrier `f0`, against the mask.
///
/// When a segment's resolution bandwidth is an integer multiple `r` of the bin
/// width, the level at each bin is the power of the `r` bins around it.
pub fn mask_check(binned: &BinnedSpectrum, mask: &MaskSpec, f0: f64) -> Result<MaskReport> {
    mask.validate()?;
    let mw = binned.bin_power_mw();
    let mut segments = Vec::with_capacity(mask.segments.len());
    for seg in &mask.segments {
        let ratio = seg.rbw_hz / binned.delta_f;
        let r = ratio.round();
        if r < 1.0 || (ratio - r).abs() > 1e-9 * ratio {
            return Err(Error::RbwMismatch {
                rbw_hz: seg.rbw_hz,
                bin_hz: binned.delta_f,
            });
        }
        let r = r as usize;
        let mut worst: Option<(f64, f64)> = None;
        let mut count = 0;
        for (i, &c) in binned.bin_centers.iter().enumerate() {
            let f = f0 + c;
            if f < seg.f_start_hz || f > seg.f_stop_hz {
                continue;
            }
            let lo = i.saturating_sub(r / 2);
            let hi = (lo + r).min(mw.len());
            let level = 10.0 * mw[lo..hi].iter().sum::<f64>().max(1e-300).log10();
            let margin = seg.limit_dbm - level;
            count += 1;
            if worst.is_none_or(|(m, _)| margin < m) {
                worst = Some((margin, f));
            }
        }
        segments.push(SegmentReport {
            f_start_hz: seg.f_start_hz,
            f_stop_hz: seg.f_stop_hz,
            limit_dbm: seg.limit_dbm,
            rbw_hz: seg.rbw_hz,
            label: seg.label.clone(),
            bins_evaluated: count,
            worst_margin_db: worst.map(|w| w.0),
            worst_freq_hz: worst.map(|w| w.1),
        });
    }
    let pass = segments
        .iter()
        .all(|s| s.worst_margin_db.is_none_or(|m| m >= 0.0));
    Ok(MaskReport {
        label: mask.label.clone(),
        pass,
        segments,
    })
}
