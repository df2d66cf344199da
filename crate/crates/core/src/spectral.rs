//! Power spectral density per window and band-power sequences.
//!
//! Every analysis window yields one integrated power value per channel and
//! per band; the resulting matrix is the point cloud the rest of the
//! pipeline operates on.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recording::Recording;

/// The five canonical EEG bands, ordered by frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandName {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl BandName {
    pub const ALL: [BandName; 5] = [
        BandName::Delta,
        BandName::Theta,
        BandName::Alpha,
        BandName::Beta,
        BandName::Gamma,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BandName::Delta => "delta",
            BandName::Theta => "theta",
            BandName::Alpha => "alpha",
            BandName::Beta => "beta",
            BandName::Gamma => "gamma",
        }
    }

    pub fn parse(s: &str) -> Result<BandName> {
        match s.to_ascii_lowercase().as_str() {
            "delta" => Ok(BandName::Delta),
            "theta" => Ok(BandName::Theta),
            "alpha" => Ok(BandName::Alpha),
            "beta" => Ok(BandName::Beta),
            "gamma" => Ok(BandName::Gamma),
            other => Err(Error::UnknownBandName(other.to_string())),
        }
    }
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A half-open frequency interval `[lo_hz, hi_hz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: BandName,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub fn new(name: BandName, lo_hz: f64, hi_hz: f64) -> Result<Band> {
        if !(lo_hz > 0.0 && lo_hz < hi_hz && lo_hz.is_finite() && hi_hz.is_finite()) {
            return Err(Error::InvalidBand(format!(
                "need 0 < lo < hi, got [{lo_hz}, {hi_hz})"
            )));
        }
        Ok(Band { name, lo_hz, hi_hz })
    }

    /// Canonical band edges: delta [1,4), theta [4,8), alpha [8,13),
    /// beta [13,30), gamma [30,50).
    pub fn canonical(name: BandName) -> Band {
        let (lo_hz, hi_hz) = match name {
            BandName::Delta => (1.0, 4.0),
            BandName::Theta => (4.0, 8.0),
            BandName::Alpha => (8.0, 13.0),
            BandName::Beta => (13.0, 30.0),
            BandName::Gamma => (30.0, 50.0),
        };
        Band { name, lo_hz, hi_hz }
    }

    pub fn all_canonical() -> Vec<Band> {
        BandName::ALL.iter().map(|&n| Band::canonical(n)).collect()
    }

    pub fn center_hz(&self) -> f64 {
        0.5 * (self.lo_hz + self.hi_hz)
    }
}

/// One-sided power spectral density over uniformly spaced frequencies.
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    pub freqs_hz: Vec<f64>,
    /// Power per Hz; same length as `freqs_hz`.
    pub density: Vec<f64>,
}

impl PsdEstimate {
    pub fn freq_step_hz(&self) -> f64 {
        if self.freqs_hz.len() < 2 {
            0.0
        } else {
            self.freqs_hz[1] - self.freqs_hz[0]
        }
    }

    /// Rectangle-rule integral over the whole axis: `sum(density) * df`.
    /// Approximates the windowed-signal variance (Parseval).
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.freq_step_hz()
    }
}

/// Per-window, per-channel band power with per-window majority labels.
#[derive(Debug, Clone)]
pub struct BandPowerSequence {
    pub band: Band,
    /// `n_windows x n_channels`, all entries >= 0.
    pub values: Array2<f64>,
    pub window_start_sample: Vec<usize>,
    pub channel_names: Vec<String>,
    /// One `(track name, per-window majority label)` entry per label track.
    pub window_labels: Vec<(String, Vec<i64>)>,
}

impl BandPowerSequence {
    pub fn n_windows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn labels_for(&self, track: &str) -> Result<&[i64]> {
        self.window_labels
            .iter()
            .find(|(name, _)| name == track)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::LabelTrackNotFound(track.to_string()))
    }
}

/// Periodic Hann taper of length `len`.
fn hann_window(len: usize) -> Vec<f64> {
    let n = len as f64;
    (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n).cos())
        .collect()
}

/// Mean-removed, Hann-tapered modified periodogram of the first `window_len`
/// samples, one-sided with density scaling so that `sum(density) * df`
/// approximates the windowed-signal variance.
pub fn windowed_psd(samples: &[f64], sample_rate_hz: f64, window_len: usize) -> Result<PsdEstimate> {
    if window_len < 8 {
        return Err(Error::WindowTooShort(window_len));
    }
    if window_len > samples.len() {
        return Err(Error::WindowTooLong {
            window: window_len,
            len: samples.len(),
        });
    }
    let taper = hann_window(window_len);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(window_len);
    psd_one_window(&samples[..window_len], sample_rate_hz, &taper, fft.as_ref())
}

fn psd_one_window(
    segment: &[f64],
    sample_rate_hz: f64,
    taper: &[f64],
    fft: &dyn rustfft::Fft<f64>,
) -> Result<PsdEstimate> {
    let len = segment.len();
    let mean = segment.iter().sum::<f64>() / len as f64;
    let mut buf: Vec<Complex<f64>> = segment
        .iter()
        .zip(taper)
        .map(|(&x, &w)| Complex::new((x - mean) * w, 0.0))
        .collect();
    fft.process(&mut buf);

    let win_power: f64 = taper.iter().map(|w| w * w).sum();
    let scale = 1.0 / (sample_rate_hz * win_power);
    let n_out = len / 2 + 1;
    let df = sample_rate_hz / len as f64;
    let mut density = Vec::with_capacity(n_out);
    let mut freqs = Vec::with_capacity(n_out);
    for (k, freq_density) in buf.iter().take(n_out).enumerate() {
        let mut p = freq_density.norm_sqr() * scale;
        // One-sided spectrum: interior bins carry both halves.
        let nyquist_bin = len % 2 == 0 && k == len / 2;
        if k != 0 && !nyquist_bin {
            p *= 2.0;
        }
        density.push(p);
        freqs.push(k as f64 * df);
    }
    Ok(PsdEstimate {
        freqs_hz: freqs,
        density,
    })
}

/// Trapezoidal integral of the density over bins with `lo_hz <= f < hi_hz`.
pub fn band_power(psd: &PsdEstimate, band: &Band) -> Result<f64> {
    let selected: Vec<usize> = psd
        .freqs_hz
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= band.lo_hz && f < band.hi_hz)
        .map(|(i, _)| i)
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyBand {
            band: band.name.as_str().to_string(),
            lo_hz: band.lo_hz,
            hi_hz: band.hi_hz,
        });
    }
    let mut acc = 0.0;
    for pair in selected.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        acc += 0.5
            * (psd.density[i] + psd.density[j])
            * (psd.freqs_hz[j] - psd.freqs_hz[i]);
    }
    Ok(acc)
}

/// Majority label over a slice, ties broken toward the smaller label value.
pub(crate) fn majority_label(labels: &[i64]) -> i64 {
    debug_assert!(!labels.is_empty());
    let mut counts: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    // BTreeMap iterates in ascending key order, so `>` keeps the smaller
    // label on ties.
    let mut best = (i64::MIN, 0usize);
    for (&label, &count) in &counts {
        if count > best.1 {
            best = (label, count);
        }
    }
    best.0
}

/// Window start positions `0, hop, 2*hop, ...` while a full window fits.
fn window_starts(n_samples: usize, window_len: usize, hop: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut s = 0;
    while s + window_len <= n_samples {
        starts.push(s);
        s += hop;
    }
    starts
}

/// Band power over sliding windows for one band. One row per window, one
/// column per channel; per-window labels are the majority over the window.
pub fn power_sequence(
    rec: &Recording,
    band: &Band,
    window_len: usize,
    overlap_fraction: f64,
) -> Result<BandPowerSequence> {
    let mut seqs = power_sequences(rec, std::slice::from_ref(band), window_len, overlap_fraction)?;
    Ok(seqs.remove(0))
}

/// Multi-band variant sharing one PSD pass per window; each returned entry
/// is identical to a separate `power_sequence` call for that band.
pub fn power_sequences(
    rec: &Recording,
    bands: &[Band],
    window_len: usize,
    overlap_fraction: f64,
) -> Result<Vec<BandPowerSequence>> {
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::InvalidArgument(format!(
            "overlap fraction must be in [0, 1), got {overlap_fraction}"
        )));
    }
    if window_len < 8 {
        return Err(Error::WindowTooShort(window_len));
    }
    let hop = ((window_len as f64) * (1.0 - overlap_fraction)).round() as usize;
    if hop == 0 {
        return Err(Error::InvalidArgument(format!(
            "overlap fraction {overlap_fraction} leaves an empty hop"
        )));
    }
    let n = rec.n_samples();
    if n < window_len {
        return Err(Error::RecordingTooShort {
            len: n,
            window: window_len,
        });
    }
    let starts = window_starts(n, window_len, hop);
    let n_windows = starts.len();
    let n_channels = rec.channels.len();

    let taper = Arc::new(hann_window(window_len));
    let fft = FftPlanner::new().plan_fft_forward(window_len);
    let rate = rec.sample_rate_hz;

    // One row of band powers per (window, channel), all bands at once.
    let cells: Vec<Result<Vec<f64>>> = starts
        .par_iter()
        .flat_map_iter(|&start| {
            let taper = Arc::clone(&taper);
            let fft = Arc::clone(&fft);
            rec.channels.iter().map(move |ch| {
                let seg = &ch.samples[start..start + window_len];
                let psd = psd_one_window(seg, rate, &taper, fft.as_ref())?;
                bands.iter().map(|b| band_power(&psd, b)).collect()
            })
        })
        .collect();

    let mut values: Vec<Array2<f64>> = bands
        .iter()
        .map(|_| Array2::zeros((n_windows, n_channels)))
        .collect();
    for (flat, cell) in cells.into_iter().enumerate() {
        let cell = cell?;
        let (w, c) = (flat / n_channels, flat % n_channels);
        for (bi, v) in cell.into_iter().enumerate() {
            values[bi][(w, c)] = v;
        }
    }

    let window_labels: Vec<(String, Vec<i64>)> = rec
        .label_tracks
        .iter()
        .map(|track| {
            let per_window = starts
                .iter()
                .map(|&s| majority_label(&track.values[s..s + window_len]))
                .collect();
            (track.name.clone(), per_window)
        })
        .collect();

    let channel_names: Vec<String> = rec.channels.iter().map(|c| c.name.clone()).collect();
    Ok(values
        .into_iter()
        .zip(bands)
        .map(|(vals, band)| BandPowerSequence {
            band: *band,
            values: vals,
            window_start_sample: starts.clone(),
            channel_names: channel_names.clone(),
            window_labels: window_labels.clone(),
        })
        .collect())
}
