//! Seedable stand-in for measured fluorescence spectra.
//!
//! A spectrum is a sum of Gaussian emission bands whose amplitudes and
//! centers are perturbed linearly by the oil's chemical labels, blurred by a
//! box-shaped instrument response and finally multiplied by `1 + sigma * z`
//! Gaussian noise. All randomness for one spectrum is keyed by
//! `(seed, oil_id, excitation, repetition)`, so datasets can be regenerated
//! in any order.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, Excitation, OilRecord, ParameterId, Spectrum, WavelengthGrid};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeakSpec {
    pub center_nm: f64,
    /// Gaussian sigma in nm.
    pub width_nm: f64,
    pub base_amplitude: f64,
    pub excitations: Vec<Excitation>,
}

impl PeakSpec {
    pub fn new(center_nm: f64, width_nm: f64, base_amplitude: f64, excitations: &[Excitation]) -> Self {
        Self {
            center_nm,
            width_nm,
            base_amplitude,
            excitations: excitations.to_vec(),
        }
    }
}

/// Linear dependence of one peak on one label:
/// `amplitude *= 1 + amplitude_gain * (v - reference)` and
/// `center += shift_gain * (v - reference)`.
///
/// A missing label counts as `v = reference`, i.e. no effect.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterCoupling {
    pub parameter: ParameterId,
    pub target: usize,
    pub amplitude_gain: f64,
    pub shift_gain: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorConfig {
    pub seed: u64,
    pub peaks: Vec<PeakSpec>,
    /// Relative (multiplicative) noise scale.
    pub noise_sigma: f64,
    /// Instrument response width in pixels.
    pub resolution_px: usize,
    pub couplings: Vec<ParameterCoupling>,
    /// Counts corresponding to unit peak amplitude.
    pub intensity_scale: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        use Excitation::{Nm365, Nm395};
        use ParameterId::*;
        let c = |parameter, target, amplitude_gain, shift_gain, reference| ParameterCoupling {
            parameter,
            target,
            amplitude_gain,
            shift_gain,
            reference,
        };
        Self {
            seed: 7,
            peaks: vec![
                PeakSpec::new(678.0, 12.0, 1.0, &[Nm365, Nm395]),
                PeakSpec::new(722.0, 20.0, 0.35, &[Nm365, Nm395]),
                PeakSpec::new(525.0, 30.0, 0.08, &[Nm365]),
            ],
            noise_sigma: 0.01,
            resolution_px: 30,
            couplings: vec![
                c(Acidity, 0, -0.30, 2.0, 0.3),
                c(Peroxide, 1, 0.03, 0.0, 8.0),
                c(K270, 0, 0.0, 40.0, 0.13),
                c(K232, 1, 0.0, -10.0, 1.6),
                c(EthylEsters, 2, 0.02, 0.0, 15.0),
                c(EthylEsters, 1, -0.004, 0.0, 15.0),
            ],
            intensity_scale: 10_000.0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.peaks.is_empty() {
            return bad("at least one peak is required".into());
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.resolution_px < 1 {
            return bad("resolution_px must be >= 1".into());
        }
        if !(self.intensity_scale > 0.0) || !self.intensity_scale.is_finite() {
            return bad("intensity_scale must be > 0".into());
        }
        for (i, p) in self.peaks.iter().enumerate() {
            if !(p.width_nm > 0.0) || !p.center_nm.is_finite() {
                return bad(format!("peak {i}: width must be > 0 and center finite"));
            }
            if !(p.base_amplitude >= 0.0) {
                return bad(format!("peak {i}: base amplitude must be >= 0"));
            }
        }
        for (i, c) in self.couplings.iter().enumerate() {
            if c.target >= self.peaks.len() {
                return bad(format!("coupling {i}: target peak {} does not exist", c.target));
            }
            if !c.amplitude_gain.is_finite() || !c.shift_gain.is_finite() || !c.reference.is_finite() {
                return bad(format!("coupling {i}: gains must be finite"));
            }
        }
        Ok(())
    }
}

/// Peak after label coupling: `(center_nm, width_nm, amplitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePeak {
    pub center_nm: f64,
    pub width_nm: f64,
    pub amplitude: f64,
}

/// Peaks visible at `excitation`, after applying the label couplings.
/// Peaks absent at this excitation are reported with zero amplitude so
/// indices line up with `config.peaks`.
pub fn effective_peaks(record: &OilRecord, excitation: Excitation, config: &GeneratorConfig) -> Vec<EffectivePeak> {
    config
        .peaks
        .iter()
        .enumerate()
        .map(|(i, peak)| {
            let mut gain = 1.0;
            let mut center = peak.center_nm;
            for c in config.couplings.iter().filter(|c| c.target == i) {
                let delta = record.get(c.parameter).map_or(0.0, |v| v - c.reference);
                gain += c.amplitude_gain * delta;
                center += c.shift_gain * delta;
            }
            let visible = peak.excitations.contains(&excitation);
            EffectivePeak {
                center_nm: center,
                width_nm: peak.width_nm,
                amplitude: if visible {
                    peak.base_amplitude * gain.max(0.0)
                } else {
                    0.0
                },
            }
        })
        .collect()
}

/// Noise-free emission before the instrument response, in counts.
pub fn emission_profile(peaks: &[EffectivePeak], grid: &WavelengthGrid, scale: f64) -> Vec<f64> {
    grid.values()
        .iter()
        .map(|&wl| {
            peaks
                .iter()
                .filter(|p| p.amplitude > 0.0)
                .map(|p| {
                    let d = (wl - p.center_nm) / p.width_nm;
                    p.amplitude * libm::exp(-0.5 * d * d)
                })
                .sum::<f64>()
                * scale
        })
        .collect()
}

/// Box instrument response of `width` pixels with unit total weight.
///
/// Each input pixel is spread evenly over the part of its window that lies on
/// the detector, so the total intensity is preserved exactly up to rounding.
pub fn instrument_response(signal: &[f64], width: usize) -> Vec<f64> {
    let n = signal.len();
    if width <= 1 || n == 0 {
        return signal.to_vec();
    }
    let left = (width - 1) / 2;
    let right = width - 1 - left;
    let mut out = vec![0.0; n];
    for (i, &x) in signal.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let lo = i.saturating_sub(left);
        let hi = (i + right).min(n - 1);
        let share = x / (hi - lo + 1) as f64;
        for o in &mut out[lo..=hi] {
            *o += share;
        }
    }
    out
}

fn spectrum_key(seed: u64, oil_id: &str, excitation: Excitation, repetition: u32) -> u64 {
    seed::derive(
        seed,
        &[
            b"spectrum",
            oil_id.as_bytes(),
            &excitation.nm().to_le_bytes(),
            &repetition.to_le_bytes(),
        ],
    )
}

pub fn generate_spectrum(
    record: &OilRecord,
    excitation_nm: u32,
    repetition: u32,
    config: &GeneratorConfig,
    grid: &WavelengthGrid,
) -> Result<Spectrum> {
    let excitation = Excitation::from_nm(excitation_nm)?;
    config.validate()?;
    if !record.has_any_parameter() {
        return Err(Error::InsufficientData(format!(
            "oil `{}` has no chemical labels",
            record.oil_id
        )));
    }

    let peaks = effective_peaks(record, excitation, config);
    let clean = emission_profile(&peaks, grid, config.intensity_scale);
    let mut intensities = instrument_response(&clean, config.resolution_px);

    if config.noise_sigma > 0.0 {
        let mut rng = seed::rng(spectrum_key(config.seed, &record.oil_id, excitation, repetition));
        for v in &mut intensities {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v *= 1.0 + config.noise_sigma * z;
        }
    }
    for v in &mut intensities {
        if *v < 0.0 {
            *v = 0.0;
        }
    }

    Ok(Spectrum {
        oil_id: record.oil_id.clone(),
        excitation,
        repetition,
        intensities,
        normalized: false,
    })
}

/// `repetitions` spectra per record at one excitation.
pub fn generate_dataset(
    records: &[OilRecord],
    excitation_nm: u32,
    repetitions: u32,
    config: &GeneratorConfig,
    grid: &WavelengthGrid,
) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut spectra = Vec::with_capacity(records.len() * repetitions as usize);
    for record in records {
        for rep in 1..=repetitions {
            spectra.push(generate_spectrum(record, excitation_nm, rep, config, grid)?);
        }
    }
    Dataset::new(grid.clone(), spectra, records.to_vec(), repetitions)
}

/// Default detector axis: 1024 pixels across 450-800 nm.
pub fn default_grid() -> WavelengthGrid {
    WavelengthGrid::linear(450.0, 800.0, 1024).expect("static grid is valid")
}
