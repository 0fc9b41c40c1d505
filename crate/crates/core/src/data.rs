//! Spectra, oil labels and dataset bookkeeping.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// The five chemical quality parameters, in the order they are checked when
/// grading an oil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ParameterId {
    Acidity,
    Peroxide,
    K270,
    K232,
    EthylEsters,
}

impl ParameterId {
    pub const ALL: [ParameterId; 5] = [
        ParameterId::Acidity,
        ParameterId::Peroxide,
        ParameterId::K270,
        ParameterId::K232,
        ParameterId::EthylEsters,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column / key name used in files and on the command line.
    pub fn key(self) -> &'static str {
        match self {
            ParameterId::Acidity => "acidity",
            ParameterId::Peroxide => "peroxide",
            ParameterId::K270 => "k270",
            ParameterId::K232 => "k232",
            ParameterId::EthylEsters => "ethyl_esters",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ParameterId::Acidity => "Acidity (%)",
            ParameterId::Peroxide => "Peroxide value (mEq O2/kg)",
            ParameterId::K270 => "K270",
            ParameterId::K232 => "K232",
            ParameterId::EthylEsters => "Ethyl esters (mg/kg)",
        }
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ParameterId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let p = match lower.as_str() {
            "acidity" => ParameterId::Acidity,
            "peroxide" | "peroxide_value" => ParameterId::Peroxide,
            "k270" => ParameterId::K270,
            "k232" => ParameterId::K232,
            "ethyl_esters" | "ethyl-esters" | "ee" => ParameterId::EthylEsters,
            _ => return Err(Error::InvalidConfig(format!("unknown parameter `{s}`"))),
        };
        Ok(p)
    }
}

/// Regulatory quality grade. Ordered from worst to best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Quality {
    #[cfg_attr(feature = "serde", serde(rename = "LOO"))]
    Loo,
    #[cfg_attr(feature = "serde", serde(rename = "VOO"))]
    Voo,
    #[cfg_attr(feature = "serde", serde(rename = "EVOO"))]
    Evoo,
}

impl Quality {
    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Evoo => "EVOO",
            Quality::Voo => "VOO",
            Quality::Loo => "LOO",
        }
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "EVOO" => Ok(Quality::Evoo),
            "VOO" => Ok(Quality::Voo),
            "LOO" => Ok(Quality::Loo),
            other => Err(Error::InvalidConfig(format!("unknown quality grade `{other}`"))),
        }
    }
}

/// LED excitation wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Excitation {
    Nm365,
    Nm395,
}

impl Excitation {
    pub fn from_nm(nm: u32) -> Result<Self> {
        match nm {
            365 => Ok(Excitation::Nm365),
            395 => Ok(Excitation::Nm395),
            other => Err(Error::UnsupportedExcitation(other)),
        }
    }

    pub fn nm(self) -> u32 {
        match self {
            Excitation::Nm365 => 365,
            Excitation::Nm395 => 395,
        }
    }
}

/// Strictly increasing wavelength axis in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthGrid {
    values: Vec<f64>,
}

impl WavelengthGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 pixels, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite wavelength".into()));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "not strictly increasing at pixel {}",
                i + 1
            )));
        }
        Ok(Self { values })
    }

    /// Evenly spaced grid from `start` to `end` inclusive.
    pub fn linear(start: f64, end: f64, pixels: usize) -> Result<Self> {
        if pixels < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 pixels, got {pixels}")));
        }
        let step = (end - start) / (pixels - 1) as f64;
        Self::new((0..pixels).map(|i| start + step * i as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One fluorescence measurement. The wavelength axis is held by the owning
/// [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub oil_id: String,
    pub excitation: Excitation,
    pub repetition: u32,
    pub intensities: Vec<f64>,
    pub normalized: bool,
}

/// Laboratory (or predicted) chemical labels of one oil.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OilRecord {
    pub oil_id: String,
    pub acidity: Option<f64>,
    pub peroxide: Option<f64>,
    pub k270: Option<f64>,
    pub k232: Option<f64>,
    pub ethyl_esters: Option<f64>,
    pub quality: Option<Quality>,
}

impl OilRecord {
    pub fn new(oil_id: impl Into<String>) -> Self {
        Self {
            oil_id: oil_id.into(),
            ..Self::default()
        }
    }

    pub fn get(&self, p: ParameterId) -> Option<f64> {
        match p {
            ParameterId::Acidity => self.acidity,
            ParameterId::Peroxide => self.peroxide,
            ParameterId::K270 => self.k270,
            ParameterId::K232 => self.k232,
            ParameterId::EthylEsters => self.ethyl_esters,
        }
    }

    pub fn set(&mut self, p: ParameterId, value: Option<f64>) {
        let slot = match p {
            ParameterId::Acidity => &mut self.acidity,
            ParameterId::Peroxide => &mut self.peroxide,
            ParameterId::K270 => &mut self.k270,
            ParameterId::K232 => &mut self.k232,
            ParameterId::EthylEsters => &mut self.ethyl_esters,
        };
        *slot = value;
    }

    pub fn with(mut self, p: ParameterId, value: f64) -> Self {
        self.set(p, Some(value));
        self
    }

    pub fn has_any_parameter(&self) -> bool {
        ParameterId::ALL.iter().any(|&p| self.get(p).is_some())
    }

    pub fn validate(&self) -> Result<()> {
        if self.oil_id.is_empty() {
            return Err(Error::InvalidRecord {
                oil: String::new(),
                reason: "empty oil id".into(),
            });
        }
        for p in ParameterId::ALL {
            if let Some(v) = self.get(p) {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidRecord {
                        oil: self.oil_id.clone(),
                        reason: format!("{p} must be finite and nonnegative, got {v}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Checks per-record validity and id uniqueness.
pub fn validate_records(records: &[OilRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in records {
        r.validate()?;
        if !seen.insert(r.oil_id.as_str()) {
            return Err(Error::DuplicateOil(r.oil_id.clone()));
        }
    }
    Ok(())
}

/// A single-excitation collection of spectra with their oil labels.
///
/// Every oil has exactly `repetitions` spectra, numbered `1..=repetitions`,
/// and every record has spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    grid: WavelengthGrid,
    spectra: Vec<Spectrum>,
    records: Vec<OilRecord>,
    repetitions: u32,
}

impl Dataset {
    pub fn new(
        grid: WavelengthGrid,
        spectra: Vec<Spectrum>,
        records: Vec<OilRecord>,
        repetitions: u32,
    ) -> Result<Self> {
        if records.is_empty() || spectra.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if repetitions == 0 {
            return Err(Error::InvalidDataset("repetitions must be at least 1".into()));
        }
        validate_records(&records)?;

        let excitation = spectra[0].excitation;
        let mut reps: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
        for s in &spectra {
            if s.intensities.len() != grid.len() {
                return Err(Error::Dimension {
                    expected: grid.len(),
                    actual: s.intensities.len(),
                });
            }
            if s.excitation != excitation {
                return Err(Error::InvalidDataset(
                    "spectra from different excitation wavelengths cannot be mixed".into(),
                ));
            }
            if s.repetition == 0 || s.repetition > repetitions {
                return Err(Error::InvalidDataset(format!(
                    "oil `{}`: repetition {} outside 1..={repetitions}",
                    s.oil_id, s.repetition
                )));
            }
            if !reps.entry(&s.oil_id).or_default().insert(s.repetition) {
                return Err(Error::InvalidDataset(format!(
                    "oil `{}`: repetition {} appears twice",
                    s.oil_id, s.repetition
                )));
            }
        }
        for (oil, set) in &reps {
            if !records.iter().any(|r| r.oil_id == *oil) {
                return Err(Error::InvalidDataset(format!(
                    "spectra for `{oil}` have no matching label record"
                )));
            }
            if set.len() != repetitions as usize {
                return Err(Error::InvalidDataset(format!(
                    "oil `{oil}` has {} spectra, expected {repetitions}",
                    set.len()
                )));
            }
        }
        if let Some(r) = records.iter().find(|r| !reps.contains_key(r.oil_id.as_str())) {
            return Err(Error::InvalidDataset(format!("record `{}` has no spectra", r.oil_id)));
        }

        Ok(Self {
            grid,
            spectra,
            records,
            repetitions,
        })
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    pub fn records(&self) -> &[OilRecord] {
        &self.records
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions
    }

    pub fn excitation(&self) -> Excitation {
        self.spectra[0].excitation
    }

    pub fn pixels(&self) -> usize {
        self.grid.len()
    }

    /// Number of spectra, `N = R * N_oil`.
    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn n_oils(&self) -> usize {
        self.records.len()
    }

    /// Oil ids in sorted order.
    pub fn oil_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.records.iter().map(|r| r.oil_id.as_str()).collect();
        ids.sort_unstable();
        ids
    }

    pub fn record(&self, oil_id: &str) -> Option<&OilRecord> {
        self.records.iter().find(|r| r.oil_id == oil_id)
    }

    /// Spectra of one oil, ordered by repetition.
    pub fn spectra_for(&self, oil_id: &str) -> Vec<&Spectrum> {
        let mut v: Vec<&Spectrum> = self.spectra.iter().filter(|s| s.oil_id == oil_id).collect();
        v.sort_by_key(|s| s.repetition);
        v
    }

    pub fn is_normalized(&self) -> bool {
        self.spectra.iter().all(|s| s.normalized)
    }

    /// Returns a copy with every spectrum normalized.
    pub fn normalized(&self) -> Result<Self> {
        let spectra = self
            .spectra
            .iter()
            .map(|s| if s.normalized { Ok(s.clone()) } else { normalize(s) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spectra,
            ..self.clone()
        })
    }

    /// Subtracts one dark frame from every spectrum.
    pub fn subtract_dark(&self, dark: &[f64]) -> Result<Self> {
        if self.is_normalized() {
            return Err(Error::AlreadyNormalized);
        }
        let spectra = self
            .spectra
            .iter()
            .map(|s| {
                Ok(Spectrum {
                    intensities: subtract_dark(&s.intensities, dark)?,
                    ..s.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spectra,
            ..self.clone()
        })
    }
}

/// Elementwise `raw - dark`.
pub fn subtract_dark(raw: &[f64], dark: &[f64]) -> Result<Vec<f64>> {
    if raw.len() != dark.len() {
        return Err(Error::Dimension {
            expected: raw.len(),
            actual: dark.len(),
        });
    }
    Ok(raw.iter().zip(dark).map(|(r, d)| r - d).collect())
}

/// Affine map to zero mean and unit population standard deviation.
///
/// Two-pass, followed by one refinement pass on the standardized values so
/// a large offset relative to the spread does not leave a residual mean.
pub fn normalize_values(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut out = values.to_vec();
    for _ in 0..2 {
        let (mean, std) = mean_and_population_sd(&out);
        if !(std > 0.0) || !std.is_finite() {
            return Err(Error::DegenerateSpectrum);
        }
        out.iter_mut().for_each(|v| *v = (*v - mean) / std);
    }
    Ok(out)
}

fn mean_and_population_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

pub fn normalize(spectrum: &Spectrum) -> Result<Spectrum> {
    if spectrum.normalized {
        return Err(Error::AlreadyNormalized);
    }
    Ok(Spectrum {
        intensities: normalize_values(&spectrum.intensities)?,
        normalized: true,
        ..spectrum.clone()
    })
}

/// Keeps the oils whose label for `p` is present, with all their spectra.
pub fn filter_for_parameter(dataset: &Dataset, p: ParameterId) -> Result<Dataset> {
    let records: Vec<OilRecord> = dataset.records.iter().filter(|r| r.get(p).is_some()).cloned().collect();
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let keep: BTreeSet<&str> = records.iter().map(|r| r.oil_id.as_str()).collect();
    let spectra = dataset
        .spectra
        .iter()
        .filter(|s| keep.contains(s.oil_id.as_str()))
        .cloned()
        .collect();
    Dataset::new(dataset.grid.clone(), spectra, records, dataset.repetitions)
}

/// Oil count per parameter, for bookkeeping reports.
pub fn oils_per_parameter(records: &[OilRecord]) -> [(ParameterId, usize); 5] {
    ParameterId::ALL.map(|p| (p, records.iter().filter(|r| r.get(p).is_some()).count()))
}

impl fmt::Display for OilRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.oil_id)?;
        for p in ParameterId::ALL {
            match self.get(p) {
                Some(v) => write!(f, " {}={}", p, v)?,
                None => write!(f, " {}=-", p)?,
            }
        }
        if let Some(q) = self.quality {
            write!(f, " [{}]", q)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn spectrum(oil: &str, rep: u32, values: Vec<f64>) -> Spectrum {
        Spectrum {
            oil_id: oil.into(),
            excitation: Excitation::Nm395,
            repetition: rep,
            intensities: values,
            normalized: false,
        }
    }

    fn small_dataset() -> Dataset {
        let grid = WavelengthGrid::linear(600.0, 700.0, 3).unwrap();
        let records = vec![
            OilRecord::new("A").with(ParameterId::Acidity, 0.2),
            OilRecord::new("B")
                .with(ParameterId::Acidity, 0.3)
                .with(ParameterId::Peroxide, 5.0),
        ];
        let spectra = vec![
            spectrum("A", 1, vec![1.0, 2.0, 3.0]),
            spectrum("A", 2, vec![1.0, 2.5, 3.0]),
            spectrum("B", 1, vec![3.0, 2.0, 1.0]),
            spectrum("B", 2, vec![3.0, 2.5, 1.0]),
        ];
        Dataset::new(grid, spectra, records, 2).unwrap()
    }

    #[test]
    fn dark_subtraction() {
        assert_eq!(
            subtract_dark(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]).unwrap(),
            vec![4.0, 3.0, 2.0]
        );
        let x = [0.5, -1.25, 8.0];
        assert_eq!(subtract_dark(&x, &x).unwrap(), vec![0.0; 3]);
        assert_eq!(subtract_dark(&x, &[0.0; 3]).unwrap(), x.to_vec());
        assert!(matches!(subtract_dark(&x, &[0.0; 2]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn normalize_three_points() {
        // mean 2, population std sqrt(2/3)
        let out = normalize_values(&[1.0, 2.0, 3.0]).unwrap();
        let s = libm::sqrt(1.5);
        assert!((out[0] + s).abs() < 1e-15);
        assert!(out[1].abs() < 1e-15);
        assert!((out[2] - s).abs() < 1e-15);
        assert!((out[2] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn normalize_fixed_point_and_errors() {
        let z = normalize_values(&[1.0, 2.0, 3.0]).unwrap();
        let again = normalize_values(&z).unwrap();
        for (a, b) in z.iter().zip(&again) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(normalize_values(&[4.0, 4.0, 4.0]), Err(Error::DegenerateSpectrum));
        let s = normalize(&spectrum("A", 1, vec![1.0, 2.0])).unwrap();
        assert!(s.normalized);
        assert_eq!(normalize(&s), Err(Error::AlreadyNormalized));
    }

    #[test]
    fn grid_validation() {
        assert!(WavelengthGrid::new(vec![1.0]).is_err());
        assert!(WavelengthGrid::new(vec![1.0, 1.0]).is_err());
        assert!(WavelengthGrid::new(vec![2.0, 1.0]).is_err());
        let g = WavelengthGrid::linear(450.0, 800.0, 1024).unwrap();
        assert_eq!(g.len(), 1024);
        assert_eq!(g.values()[0], 450.0);
        assert!((g.values()[1023] - 800.0).abs() < 1e-9);
    }

    #[test]
    fn dataset_invariants_are_enforced() {
        let ds = small_dataset();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.n_oils(), 2);

        let grid = ds.grid().clone();
        let recs = ds.records().to_vec();
        // missing repetition
        let err = Dataset::new(grid.clone(), ds.spectra()[..3].to_vec(), recs.clone(), 2);
        assert!(matches!(err, Err(Error::InvalidDataset(_))));
        // orphan spectrum
        let mut sp = ds.spectra().to_vec();
        sp[0].oil_id = "Z".into();
        assert!(Dataset::new(grid.clone(), sp, recs.clone(), 2).is_err());
        // duplicate record
        let mut dup = recs.clone();
        dup[1].oil_id = "A".into();
        assert_eq!(
            Dataset::new(grid.clone(), ds.spectra().to_vec(), dup, 2),
            Err(Error::DuplicateOil("A".into()))
        );
        // mixed excitation
        let mut sp = ds.spectra().to_vec();
        sp[0].excitation = Excitation::Nm365;
        assert!(Dataset::new(grid, sp, recs, 2).is_err());
    }

    #[test]
    fn negative_label_rejected() {
        let r = OilRecord::new("X").with(ParameterId::K232, -1.0);
        assert!(r.validate().is_err());
    }

    #[test]
    fn filtering_drops_unlabelled_oils() {
        let ds = small_dataset();
        let f = filter_for_parameter(&ds, ParameterId::Peroxide).unwrap();
        assert_eq!(f.oil_ids(), vec!["B"]);
        assert_eq!(f.len(), 2);
        assert_eq!(filter_for_parameter(&ds, ParameterId::K270), Err(Error::EmptyDataset));
        let again = filter_for_parameter(&f, ParameterId::Peroxide).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in ParameterId::ALL {
            assert_eq!(p.key().parse::<ParameterId>().unwrap(), p);
        }
        assert!("ph".parse::<ParameterId>().is_err());
    }

    proptest! {
        #[test]
        fn normalized_moments(values in prop::collection::vec(-1e4f64..1e4, 2..300)) {
            prop_assume!(values.iter().any(|&v| v != values[0]));
            let out = normalize_values(&values).unwrap();
            let n = out.len() as f64;
            let mean = out.iter().sum::<f64>() / n;
            let var = out.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((libm::sqrt(var) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn normalize_ignores_affine_rescaling(
            values in prop::collection::vec(-100f64..100.0, 3..200),
            a in 0.01f64..100.0,
            b in -1e3f64..1e3,
        ) {
            prop_assume!(values.iter().any(|&v| (v - values[0]).abs() > 1e-3));
            let base = normalize_values(&values).unwrap();
            let moved: Vec<f64> = values.iter().map(|v| a * v + b).collect();
            let out = normalize_values(&moved).unwrap();
            for (x, y) in base.iter().zip(&out) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }
    }
}
