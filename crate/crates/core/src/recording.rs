//! Multichannel recordings: data model, manifest + CSV I/O, synthetic
//! generation, and low-pass decimation.
//!
//! A recording is a set of equally long channels plus integer label tracks
//! (one value per sample per track). On disk it is a JSON manifest pointing
//! at a wide CSV; floats are written in shortest round-trip form so a
//! write/load cycle is bit-exact.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Band;

pub const MANIFEST_VERSION: u64 = 1;

/// One named channel of samples (microvolts).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries {
    pub name: String,
    pub samples: Vec<f64>,
}

/// One named track of per-sample integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTrack {
    pub name: String,
    pub values: Vec<i64>,
}

/// A multichannel sampled signal with per-sample label tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub name: String,
    pub sample_rate_hz: f64,
    pub channels: Vec<ChannelSeries>,
    pub label_tracks: Vec<LabelTrack>,
}

impl Recording {
    /// Validates the invariants: at least one sample, equal lengths across
    /// channels and tracks, positive rate, unique channel names, finite
    /// samples.
    pub fn new(
        name: String,
        sample_rate_hz: f64,
        channels: Vec<ChannelSeries>,
        label_tracks: Vec<LabelTrack>,
    ) -> Result<Recording> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::InvalidRecording(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if channels.is_empty() {
            return Err(Error::InvalidRecording("no channels".into()));
        }
        let n = channels[0].samples.len();
        if n == 0 {
            return Err(Error::InvalidRecording("zero samples".into()));
        }
        for ch in &channels {
            if ch.samples.len() != n {
                return Err(Error::InvalidRecording(format!(
                    "channel {:?} has {} samples, expected {n}",
                    ch.name,
                    ch.samples.len()
                )));
            }
            if let Some(bad) = ch.samples.iter().find(|s| !s.is_finite()) {
                return Err(Error::InvalidRecording(format!(
                    "channel {:?} contains a non-finite sample {bad}",
                    ch.name
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for ch in &channels {
            if !seen.insert(ch.name.as_str()) {
                return Err(Error::InvalidRecording(format!(
                    "duplicate channel name {:?}",
                    ch.name
                )));
            }
        }
        for track in &label_tracks {
            if track.values.len() != n {
                return Err(Error::InvalidRecording(format!(
                    "label track {:?} has {} values, expected {n}",
                    track.name,
                    track.values.len()
                )));
            }
        }
        Ok(Recording {
            name,
            sample_rate_hz,
            channels,
            label_tracks,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].samples.len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn label_track(&self, name: &str) -> Result<&LabelTrack> {
        self.label_tracks
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::LabelTrackNotFound(name.to_string()))
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate_hz
    }
}

/// One synthetic state: a band-centered sinusoid on a subset of channels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthState {
    pub label: i64,
    pub band: Band,
    pub boosted_channels: Vec<usize>,
    pub oscillation_amplitude: f64,
    pub segment_length_s: f64,
}

/// Specification for a synthetic recording with labeled states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_channels: usize,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub states: Vec<SynthState>,
    pub noise_std: f64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::EmptyStateList);
        }
        if self.n_channels == 0 {
            return Err(Error::InvalidSynthSpec("n_channels must be > 0".into()));
        }
        if !(self.duration_s > 0.0) || !(self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidSynthSpec(
                "duration and sample rate must be positive".into(),
            ));
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return Err(Error::InvalidSynthSpec("noise_std must be >= 0".into()));
        }
        let mut labels = BTreeSet::new();
        for st in &self.states {
            if !labels.insert(st.label) {
                return Err(Error::InvalidSynthSpec(format!(
                    "duplicate state label {}",
                    st.label
                )));
            }
            if st.segment_length_s <= 0.0 {
                return Err(Error::InvalidSynthSpec(
                    "segment_length_s must be positive".into(),
                ));
            }
            if let Some(&bad) = st.boosted_channels.iter().find(|&&c| c >= self.n_channels) {
                return Err(Error::InvalidSynthSpec(format!(
                    "boosted channel {bad} out of range for {} channels",
                    self.n_channels
                )));
            }
        }
        Ok(())
    }
}

/// Generates a recording by cycling through the spec's states. Boosted
/// channels carry a sinusoid at the state's band center plus noise;
/// everything else is noise only. The "condition" label track records the
/// active state's label per sample. Deterministic in `seed`.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<Recording> {
    spec.validate()?;
    let n = (spec.duration_s * spec.sample_rate_hz).round() as usize;
    if n == 0 {
        return Err(Error::InvalidSynthSpec("duration rounds to zero samples".into()));
    }

    // Which state is active at each sample, cycling through segments.
    let seg_lens: Vec<usize> = spec
        .states
        .iter()
        .map(|s| ((s.segment_length_s * spec.sample_rate_hz).round() as usize).max(1))
        .collect();
    let cycle: usize = seg_lens.iter().sum();
    let mut state_of_sample = Vec::with_capacity(n);
    for t in 0..n {
        let mut offset = t % cycle;
        let mut idx = 0;
        for (i, &len) in seg_lens.iter().enumerate() {
            if offset < len {
                idx = i;
                break;
            }
            offset -= len;
        }
        state_of_sample.push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if spec.noise_std > 0.0 {
        Some(Normal::new(0.0, spec.noise_std).expect("validated std"))
    } else {
        None
    };

    let mut channels = Vec::with_capacity(spec.n_channels);
    for c in 0..spec.n_channels {
        // (angular frequency, amplitude) when this channel is boosted.
        let tone: Vec<Option<(f64, f64)>> = spec
            .states
            .iter()
            .map(|st| {
                st.boosted_channels.contains(&c).then(|| {
                    let w = 2.0 * std::f64::consts::PI * st.band.center_hz()
                        / spec.sample_rate_hz;
                    (w, st.oscillation_amplitude)
                })
            })
            .collect();
        let mut samples = Vec::with_capacity(n);
        for (t, &si) in state_of_sample.iter().enumerate() {
            let mut v = match tone[si] {
                Some((w, amp)) => amp * (w * t as f64).sin(),
                None => 0.0,
            };
            if let Some(dist) = &noise {
                v += rng.sample(dist);
            }
            samples.push(v);
        }
        channels.push(ChannelSeries {
            name: format!("ch{c:02}"),
            samples,
        });
    }

    let labels = state_of_sample
        .iter()
        .map(|&si| spec.states[si].label)
        .collect();
    Recording::new(
        "synthetic".into(),
        spec.sample_rate_hz,
        channels,
        vec![LabelTrack {
            name: "condition".into(),
            values: labels,
        }],
    )
}

/// Number of FIR taps; odd so the group delay is an exact integer.
const FIR_TAPS: usize = 201;

/// Hamming-windowed sinc low-pass taps, normalized to unit DC gain.
fn lowpass_fir(cutoff_hz: f64, sample_rate_hz: f64) -> Vec<f64> {
    let fc = cutoff_hz / sample_rate_hz; // cycles per sample
    let m = (FIR_TAPS - 1) as f64;
    let mut taps: Vec<f64> = (0..FIR_TAPS)
        .map(|i| {
            let k = i as f64 - m / 2.0;
            let sinc = if k == 0.0 {
                2.0 * fc
            } else {
                (2.0 * std::f64::consts::PI * fc * k).sin() / (std::f64::consts::PI * k)
            };
            let hamming =
                0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / m).cos();
            sinc * hamming
        })
        .collect();
    let gain: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= gain;
    }
    taps
}

/// Zero-padded convolution with the group delay compensated, so output
/// sample `t` is time-aligned with input sample `t`.
fn filter_aligned(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let half = taps.len() / 2;
    let n = x.len();
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            for (j, &h) in taps.iter().enumerate() {
                let idx = t as isize + half as isize - j as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += h * x[idx as usize];
                }
            }
            acc
        })
        .collect()
}

/// Low-pass filter every channel, then keep every k-th sample
/// (`k = sample_rate / target_rate`, which must be an integer). Label
/// tracks are decimated by subsampling. Output length is `ceil(n / k)`.
pub fn lowpass_downsample(
    rec: &Recording,
    cutoff_hz: f64,
    target_rate_hz: f64,
) -> Result<Recording> {
    if !(target_rate_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target rate must be positive, got {target_rate_hz}"
        )));
    }
    let ratio = rec.sample_rate_hz / target_rate_hz;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 {
        return Err(Error::NonIntegerDecimation {
            rate_hz: rec.sample_rate_hz,
            target_hz: target_rate_hz,
        });
    }
    let k = k as usize;
    let nyquist = target_rate_hz / 2.0;
    if cutoff_hz > nyquist {
        return Err(Error::CutoffAboveNyquist {
            cutoff_hz,
            nyquist_hz: nyquist,
        });
    }
    if !(cutoff_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff must be positive, got {cutoff_hz}"
        )));
    }

    let taps = lowpass_fir(cutoff_hz, rec.sample_rate_hz);
    let channels: Vec<ChannelSeries> = rec
        .channels
        .par_iter()
        .map(|ch| {
            let filtered = filter_aligned(&ch.samples, &taps);
            let samples = filtered.iter().step_by(k).copied().collect();
            ChannelSeries {
                name: ch.name.clone(),
                samples,
            }
        })
        .collect();
    let label_tracks = rec
        .label_tracks
        .iter()
        .map(|t| LabelTrack {
            name: t.name.clone(),
            values: t.values.iter().step_by(k).copied().collect(),
        })
        .collect();
    Recording::new(rec.name.clone(), target_rate_hz, channels, label_tracks)
}

/// JSON manifest pointing at the wide data CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u64,
    pub name: String,
    pub sample_rate_hz: f64,
    pub data_csv: String,
    pub channel_columns: Vec<String>,
    pub label_columns: Vec<String>,
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

/// Loads a recording from its JSON manifest. `data_csv` resolves relative
/// to the manifest's directory.
pub fn load_recording(manifest_path: &Path) -> Result<Recording> {
    let text = read_to_string(manifest_path)?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::UnknownSchemaVersion(manifest.version));
    }
    let csv_path = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&manifest.data_csv);
    let text = read_to_string(&csv_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Json {
            path: csv_path.clone(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();

    let channel_idx: Vec<usize> = manifest
        .channel_columns
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::ChannelNotFound(name.clone()))
        })
        .collect::<Result<_>>()?;
    let label_idx: Vec<usize> = manifest
        .label_columns
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::LabelTrackNotFound(name.clone()))
        })
        .collect::<Result<_>>()?;

    let mut channels: Vec<ChannelSeries> = manifest
        .channel_columns
        .iter()
        .map(|name| ChannelSeries {
            name: name.clone(),
            samples: Vec::new(),
        })
        .collect();
    let mut tracks: Vec<LabelTrack> = manifest
        .label_columns
        .iter()
        .map(|name| LabelTrack {
            name: name.clone(),
            values: Vec::new(),
        })
        .collect();

    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Json {
            path: csv_path.clone(),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::RaggedColumns {
                path: csv_path.clone(),
                row: row + 2, // 1-based, counting the header
                got: record.len(),
                expected: headers.len(),
            });
        }
        for (slot, &col) in channels.iter_mut().zip(&channel_idx) {
            let raw = &record[col];
            let v: f64 = raw.parse().map_err(|_| Error::NonNumericSample {
                path: csv_path.clone(),
                row: row + 2,
                column: headers[col].clone(),
                value: raw.to_string(),
            })?;
            slot.samples.push(v);
        }
        for (slot, &col) in tracks.iter_mut().zip(&label_idx) {
            let raw = &record[col];
            let v: i64 = raw.parse().map_err(|_| Error::NonNumericSample {
                path: csv_path.clone(),
                row: row + 2,
                column: headers[col].clone(),
                value: raw.to_string(),
            })?;
            slot.values.push(v);
        }
    }
    Recording::new(manifest.name, manifest.sample_rate_hz, channels, tracks)
}

/// Writes `<stem>_data.csv` next to the manifest and the manifest itself.
/// Floats use Rust's shortest round-trip formatting, so `load_recording`
/// recovers the samples bit-for-bit.
pub fn write_recording(rec: &Recording, manifest_path: &Path) -> Result<PathBuf> {
    let stem = manifest_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "recording".into());
    let csv_name = format!("{stem}_data.csv");
    let csv_path = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&csv_name);

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = rec.channels.iter().map(|c| c.name.clone()).collect();
    header.extend(rec.label_tracks.iter().map(|t| t.name.clone()));
    writer.write_record(&header).map_err(|e| Error::Json {
        path: csv_path.clone(),
        message: e.to_string(),
    })?;
    for i in 0..rec.n_samples() {
        let mut row: Vec<String> = rec
            .channels
            .iter()
            .map(|c| format!("{}", c.samples[i]))
            .collect();
        row.extend(rec.label_tracks.iter().map(|t| t.values[i].to_string()));
        writer.write_record(&row).map_err(|e| Error::Json {
            path: csv_path.clone(),
            message: e.to_string(),
        })?;
    }
    let bytes = writer.into_inner().expect("in-memory writer");
    std::fs::write(&csv_path, bytes).map_err(|e| Error::Io {
        path: csv_path.clone(),
        source: e,
    })?;

    let manifest = Manifest {
        version: MANIFEST_VERSION,
        name: rec.name.clone(),
        sample_rate_hz: rec.sample_rate_hz,
        data_csv: csv_name,
        channel_columns: rec.channels.iter().map(|c| c.name.clone()).collect(),
        label_columns: rec.label_tracks.iter().map(|t| t.name.clone()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(manifest_path, json).map_err(|e| Error::Io {
        path: manifest_path.to_path_buf(),
        source: e,
    })?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Band, BandName};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use tempfile::tempdir;

    fn gamma_state(label: i64, boosted: Vec<usize>, amp: f64, seg_s: f64) -> SynthState {
        SynthState {
            label,
            band: Band::canonical(BandName::Gamma),
            boosted_channels: boosted,
            oscillation_amplitude: amp,
            segment_length_s: seg_s,
        }
    }

    #[test]
    fn load_small_csv_round_trip() {
        let dir = tempdir().unwrap();
        let manifest = dir.path().join("rec.json");
        std::fs::write(
            dir.path().join("rec_data.csv"),
            "a,b,c,cond\n\
             0.5,1.0,-2.25,1\n1,2,3,1\n2,3,4,1\n3,4,5,1\n4,5,6,2\n\
             5,6,7,2\n6,7,8,2\n7,8,9,2\n8,9,10,2\n9,10,11,2\n",
        )
        .unwrap();
        std::fs::write(
            &manifest,
            r#"{"version":1,"name":"tiny","sample_rate_hz":100.0,
                "data_csv":"rec_data.csv",
                "channel_columns":["a","b","c"],"label_columns":["cond"]}"#,
        )
        .unwrap();
        let rec = load_recording(&manifest).unwrap();
        assert_eq!(rec.n_channels(), 3);
        assert_eq!(rec.n_samples(), 10);
        assert_eq!(rec.channels[2].samples[0], -2.25);
        assert_eq!(rec.label_tracks[0].values[4], 2);
    }

    #[test]
    fn missing_manifest_is_distinct_error() {
        let err = load_recording(Path::new("/nonexistent/m.json")).unwrap_err();
        assert!(matches!(err, Error::FileNotFound(_)));
    }

    #[test]
    fn absent_label_column_is_reported() {
        let dir = tempdir().unwrap();
        let manifest = dir.path().join("rec.json");
        std::fs::write(dir.path().join("rec_data.csv"), "a\n1.0\n").unwrap();
        std::fs::write(
            &manifest,
            r#"{"version":1,"name":"x","sample_rate_hz":10.0,"data_csv":"rec_data.csv",
                "channel_columns":["a"],"label_columns":["missing"]}"#,
        )
        .unwrap();
        let err = load_recording(&manifest).unwrap_err();
        assert!(matches!(err, Error::LabelTrackNotFound(name) if name == "missing"));
    }

    #[test]
    fn unknown_schema_version_rejected() {
        let dir = tempdir().unwrap();
        let manifest = dir.path().join("rec.json");
        std::fs::write(
            &manifest,
            r#"{"version":2,"name":"x","sample_rate_hz":10.0,"data_csv":"d.csv",
                "channel_columns":["a"],"label_columns":[]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_recording(&manifest).unwrap_err(),
            Error::UnknownSchemaVersion(2)
        ));
    }

    #[test]
    fn ragged_and_non_numeric_rows_are_distinct_errors() {
        let dir = tempdir().unwrap();
        let manifest = dir.path().join("rec.json");
        std::fs::write(
            &manifest,
            r#"{"version":1,"name":"x","sample_rate_hz":10.0,"data_csv":"d.csv",
                "channel_columns":["a","b"],"label_columns":[]}"#,
        )
        .unwrap();
        std::fs::write(dir.path().join("d.csv"), "a,b\n1.0,2.0\n3.0\n").unwrap();
        assert!(matches!(
            load_recording(&manifest).unwrap_err(),
            Error::RaggedColumns { row: 3, .. }
        ));
        std::fs::write(dir.path().join("d.csv"), "a,b\n1.0,oops\n").unwrap();
        assert!(matches!(
            load_recording(&manifest).unwrap_err(),
            Error::NonNumericSample { .. }
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn write_then_load_is_bit_exact(
            seed in 0u64..1000,
            n_channels in 1usize..4,
            n in 1usize..60,
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let channels: Vec<ChannelSeries> = (0..n_channels).map(|c| ChannelSeries {
                name: format!("ch{c:02}"),
                samples: (0..n).map(|_| rng.random_range(-1e6..1e6_f64)).collect(),
            }).collect();
            let tracks = vec![LabelTrack {
                name: "condition".into(),
                values: (0..n).map(|_| rng.random_range(-3i64..9)).collect(),
            }];
            let rec = Recording::new("prop".into(), 250.0, channels, tracks).unwrap();

            let dir = tempdir().unwrap();
            let manifest = dir.path().join("prop.json");
            write_recording(&rec, &manifest).unwrap();
            let loaded = load_recording(&manifest).unwrap();

            prop_assert_eq!(loaded.n_samples(), rec.n_samples());
            for (a, b) in rec.channels.iter().zip(&loaded.channels) {
                prop_assert_eq!(&a.name, &b.name);
                for (x, y) in a.samples.iter().zip(&b.samples) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
            prop_assert_eq!(&rec.label_tracks, &loaded.label_tracks);
        }
    }

    #[test]
    fn zero_noise_synthesis_is_a_pure_band_center_tone() {
        let spec = SynthSpec {
            n_channels: 2,
            duration_s: 1.0,
            sample_rate_hz: 200.0,
            states: vec![gamma_state(1, vec![0], 1.0, 1.0)],
            noise_std: 0.0,
        };
        let rec = generate_synthetic(&spec, 42).unwrap();
        // Gamma center is (30 + 50) / 2 = 40 Hz.
        for (t, &v) in rec.channels[0].samples.iter().enumerate() {
            let expect = (2.0 * std::f64::consts::PI * 40.0 * t as f64 / 200.0).sin();
            assert_relative_eq!(v, expect, epsilon = 1e-12);
        }
        assert!(rec.channels[1].samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn synthesis_is_deterministic_in_seed() {
        let spec = SynthSpec {
            n_channels: 3,
            duration_s: 2.0,
            sample_rate_hz: 100.0,
            states: vec![
                gamma_state(1, vec![0], 2.0, 0.5),
                gamma_state(2, vec![1, 2], 2.0, 0.5),
            ],
            noise_std: 0.3,
        };
        let a = generate_synthetic(&spec, 7).unwrap();
        let b = generate_synthetic(&spec, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&spec, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn two_state_labels_cover_their_segments() {
        let spec = SynthSpec {
            n_channels: 1,
            duration_s: 3.0,
            sample_rate_hz: 100.0,
            states: vec![
                gamma_state(1, vec![], 0.0, 0.5),
                gamma_state(2, vec![], 0.0, 1.0),
            ],
            noise_std: 0.0,
        };
        let rec = generate_synthetic(&spec, 0).unwrap();
        let labels = &rec.label_tracks[0].values;
        // Cycle: 50 samples of label 1 then 100 of label 2, over 300 samples.
        let ones = labels.iter().filter(|&&l| l == 1).count();
        let twos = labels.iter().filter(|&&l| l == 2).count();
        assert_eq!(ones, 100);
        assert_eq!(twos, 200);
        assert_eq!(labels[0..50], vec![1; 50][..]);
        assert_eq!(labels[50..150], vec![2; 100][..]);
    }

    #[test]
    fn empty_state_list_is_an_error() {
        let spec = SynthSpec {
            n_channels: 1,
            duration_s: 1.0,
            sample_rate_hz: 100.0,
            states: vec![],
            noise_std: 0.0,
        };
        assert!(matches!(
            generate_synthetic(&spec, 0),
            Err(Error::EmptyStateList)
        ));
    }

    #[test]
    fn dc_passes_through_filter_and_decimation() {
        let rec = Recording::new(
            "dc".into(),
            2000.0,
            vec![ChannelSeries {
                name: "a".into(),
                samples: vec![5.0; 4000],
            }],
            vec![],
        )
        .unwrap();
        let out = lowpass_downsample(&rec, 50.0, 100.0).unwrap();
        assert_eq!(out.sample_rate_hz, 100.0);
        assert_eq!(out.n_samples(), 200); // ceil(4000 / 20)
        // Away from the edges (half filter length = 100 input samples = 5
        // output samples) the constant passes through within 1e-6.
        for &v in &out.channels[0].samples[6..194] {
            assert_relative_eq!(v, 5.0, epsilon = 1e-6);
        }
    }

    /// Naive single-bin DFT magnitude, used as an amplitude oracle.
    fn dft_amplitude(x: &[f64], cycles: usize) -> f64 {
        let n = x.len() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &v) in x.iter().enumerate() {
            let phase = 2.0 * std::f64::consts::PI * cycles as f64 * t as f64 / n;
            re += v * phase.cos();
            im -= v * phase.sin();
        }
        2.0 * (re * re + im * im).sqrt() / n
    }

    #[test]
    fn passband_tone_amplitude_preserved_within_one_percent() {
        let n = 20_000; // 10 s at 2000 Hz
        let samples: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * 10.0 * t as f64 / 2000.0).sin())
            .collect();
        let rec = Recording::new(
            "tone".into(),
            2000.0,
            vec![ChannelSeries {
                name: "a".into(),
                samples,
            }],
            vec![],
        )
        .unwrap();
        let out = lowpass_downsample(&rec, 50.0, 100.0).unwrap();
        // Drop 50 output samples per edge, keep 900 = 9 s = 90 whole cycles.
        let mid = &out.channels[0].samples[50..950];
        let amp = dft_amplitude(mid, 90);
        assert_relative_eq!(amp, 1.0, max_relative = 0.01);
    }

    #[test]
    fn stopband_tone_attenuated_by_40_db() {
        let n = 20_000;
        let samples: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * 80.0 * t as f64 / 2000.0).sin())
            .collect();
        let rec = Recording::new(
            "tone".into(),
            2000.0,
            vec![ChannelSeries {
                name: "a".into(),
                samples,
            }],
            vec![],
        )
        .unwrap();
        let out = lowpass_downsample(&rec, 50.0, 100.0).unwrap();
        let mid = &out.channels[0].samples[50..950];
        let rms_out = (mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt();
        let rms_in = 1.0 / 2.0_f64.sqrt();
        let db = 20.0 * (rms_out / rms_in).log10();
        assert!(db <= -40.0, "attenuation only {db:.1} dB");
    }

    #[test]
    fn output_length_is_ceil_n_over_k() {
        for n in [4000usize, 4001, 4019] {
            let rec = Recording::new(
                "len".into(),
                2000.0,
                vec![ChannelSeries {
                    name: "a".into(),
                    samples: vec![1.0; n],
                }],
                vec![LabelTrack {
                    name: "condition".into(),
                    values: vec![0; n],
                }],
            )
            .unwrap();
            let out = lowpass_downsample(&rec, 50.0, 100.0).unwrap();
            assert_eq!(out.n_samples(), n.div_ceil(20));
            assert_eq!(out.label_tracks[0].values.len(), n.div_ceil(20));
        }
    }

    #[test]
    fn fir_dc_gain_is_normalized() {
        let taps = lowpass_fir(50.0, 2000.0);
        let gain: f64 = taps.iter().sum();
        assert!((gain - 1.0).abs() <= 1e-3);
        assert_eq!(taps.len() % 2, 1);
    }

    #[test]
    fn decimation_preconditions_are_enforced() {
        let rec = Recording::new(
            "x".into(),
            2000.0,
            vec![ChannelSeries {
                name: "a".into(),
                samples: vec![0.0; 100],
            }],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            lowpass_downsample(&rec, 50.0, 300.0),
            Err(Error::NonIntegerDecimation { .. })
        ));
        assert!(matches!(
            lowpass_downsample(&rec, 80.0, 100.0),
            Err(Error::CutoffAboveNyquist { .. })
        ));
    }

    #[test]
    fn duplicate_channel_names_rejected() {
        let err = Recording::new(
            "x".into(),
            100.0,
            vec![
                ChannelSeries {
                    name: "a".into(),
                    samples: vec![0.0],
                },
                ChannelSeries {
                    name: "a".into(),
                    samples: vec![0.0],
                },
            ],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidRecording(_)));
    }
}
