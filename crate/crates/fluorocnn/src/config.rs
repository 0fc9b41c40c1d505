//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Keys not listed below are rejected so typos do not pass silently.
//!
//! Generator:
//!
//! ```text
//! seed = 7
//! noise_sigma = 0.01
//! resolution_px = 30
//! intensity_scale = 10000
//! peak.0.center_nm = 678
//! peak.0.width_nm = 12
//! peak.0.amplitude = 1.0
//! peak.0.excitations = 365,395
//! coupling.0.parameter = acidity
//! coupling.0.target = 0
//! coupling.0.amplitude_gain = -0.3
//! coupling.0.shift_gain = 2
//! coupling.0.reference = 0.3
//! ```
//!
//! Any `peak.*` key replaces the whole default peak list, and any
//! `coupling.*` key the whole coupling list; indices must be contiguous from 0.
//!
//! Thresholds: `evoo.<parameter>` and `voo.<parameter>` with a number or
//! `none`, plus `missing_caps_at_voo = true|false`.
//!
//! Hyperparameters: the [`HyperParams`] field names.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use fluorocnn_core::synth::{ParameterCoupling, PeakSpec};
use fluorocnn_core::{Excitation, GeneratorConfig, HyperParams, ParameterId, ThresholdSet};

use crate::error::{Error, Result};
use crate::io::read_to_string;

#[derive(Debug, Clone)]
pub struct KeyValues {
    source: String,
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, i + 1, format!("expected `key = value`, got `{line}`")))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(source, i + 1, "empty key"));
            }
            if entries.insert(key.clone(), (v.trim().to_string(), i + 1)).is_some() {
                return Err(Error::parse(source, i + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            source: source.display().to_string(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, path)
    }

    fn err(&self, line: usize, reason: String) -> Error {
        Error::parse(Path::new(&self.source), line, reason)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(line, format!("{key}: cannot parse `{v}`"))),
        }
    }

    fn take_into<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    fn take_limit(&mut self, key: &str, slot: &mut Option<f64>) -> Result<()> {
        match self.entries.remove(key) {
            None => Ok(()),
            Some((v, _)) if v.eq_ignore_ascii_case("none") || v == "-" => {
                *slot = None;
                Ok(())
            }
            Some((v, line)) => {
                *slot = Some(
                    v.parse()
                        .map_err(|_| self.err(line, format!("{key}: cannot parse `{v}`")))?,
                );
                Ok(())
            }
        }
    }

    fn indices(&self, prefix: &str) -> Result<usize> {
        let mut seen = std::collections::BTreeSet::new();
        for (key, (_, line)) in &self.entries {
            if let Some(rest) = key.strip_prefix(prefix) {
                let idx = rest.split('.').next().unwrap_or("");
                let n: usize = idx
                    .parse()
                    .map_err(|_| self.err(*line, format!("bad index in `{key}`")))?;
                seen.insert(n);
            }
        }
        match seen.iter().next_back() {
            None => Ok(0),
            Some(&max) if max + 1 == seen.len() => Ok(seen.len()),
            Some(_) => Err(Error::Input(format!(
                "{}: `{prefix}N` indices must be contiguous from 0",
                self.source
            ))),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.take(key)?
            .ok_or_else(|| Error::Input(format!("{}: missing `{key}`", self.source)))
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((k, (_, line))) => Err(self.err(*line, format!("unknown key `{k}`"))),
        }
    }
}

fn parse_excitations(s: &str) -> Option<Vec<Excitation>> {
    s.split(',')
        .map(|t| t.trim().parse().ok().and_then(|nm| Excitation::from_nm(nm).ok()))
        .collect()
}

pub fn generator_from(mut kv: KeyValues) -> Result<GeneratorConfig> {
    let mut cfg = GeneratorConfig::default();
    kv.take_into("seed", &mut cfg.seed)?;
    kv.take_into("noise_sigma", &mut cfg.noise_sigma)?;
    kv.take_into("resolution_px", &mut cfg.resolution_px)?;
    kv.take_into("intensity_scale", &mut cfg.intensity_scale)?;

    let n_peaks = kv.indices("peak.")?;
    if n_peaks > 0 {
        cfg.peaks.clear();
        for i in 0..n_peaks {
            let p = format!("peak.{i}.");
            let center = kv.require(&format!("{p}center_nm"))?;
            let width = kv.require(&format!("{p}width_nm"))?;
            let amp = kv.require(&format!("{p}amplitude"))?;
            let exc = match kv.take::<String>(&format!("{p}excitations"))? {
                None => vec![Excitation::Nm365, Excitation::Nm395],
                Some(s) => parse_excitations(&s)
                    .ok_or_else(|| Error::Input(format!("{p}excitations: expected 365 and/or 395, got `{s}`")))?,
            };
            cfg.peaks.push(PeakSpec::new(center, width, amp, &exc));
        }
    }
    let n_couplings = kv.indices("coupling.")?;
    if n_couplings > 0 {
        cfg.couplings.clear();
        for i in 0..n_couplings {
            let p = format!("coupling.{i}.");
            let parameter: String = kv.require(&format!("{p}parameter"))?;
            let parameter: ParameterId = parameter
                .parse()
                .map_err(|_| Error::Input(format!("{p}parameter: unknown parameter `{parameter}`")))?;
            cfg.couplings.push(ParameterCoupling {
                parameter,
                target: kv.require(&format!("{p}target"))?,
                amplitude_gain: kv.take(&format!("{p}amplitude_gain"))?.unwrap_or(0.0),
                shift_gain: kv.take(&format!("{p}shift_gain"))?.unwrap_or(0.0),
                reference: kv.take(&format!("{p}reference"))?.unwrap_or(0.0),
            });
        }
    }
    kv.finish()?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn format_generator(cfg: &GeneratorConfig) -> String {
    let mut out = format!(
        "seed = {}\nnoise_sigma = {}\nresolution_px = {}\nintensity_scale = {}\n",
        cfg.seed, cfg.noise_sigma, cfg.resolution_px, cfg.intensity_scale
    );
    for (i, p) in cfg.peaks.iter().enumerate() {
        let exc: Vec<String> = p.excitations.iter().map(|e| e.nm().to_string()).collect();
        out.push_str(&format!(
            "\npeak.{i}.center_nm = {}\npeak.{i}.width_nm = {}\npeak.{i}.amplitude = {}\npeak.{i}.excitations = {}\n",
            p.center_nm,
            p.width_nm,
            p.base_amplitude,
            exc.join(",")
        ));
    }
    for (i, c) in cfg.couplings.iter().enumerate() {
        out.push_str(&format!(
            "\ncoupling.{i}.parameter = {}\ncoupling.{i}.target = {}\ncoupling.{i}.amplitude_gain = {}\ncoupling.{i}.shift_gain = {}\ncoupling.{i}.reference = {}\n",
            c.parameter.key(),
            c.target,
            c.amplitude_gain,
            c.shift_gain,
            c.reference
        ));
    }
    out
}

pub fn thresholds_from(mut kv: KeyValues) -> Result<ThresholdSet> {
    let mut t = ThresholdSet::default();
    for p in ParameterId::ALL {
        kv.take_limit(&format!("evoo.{}", p.key()), &mut t.evoo[p.index()])?;
        kv.take_limit(&format!("voo.{}", p.key()), &mut t.voo[p.index()])?;
    }
    kv.take_into("missing_caps_at_voo", &mut t.missing_caps_at_voo)?;
    kv.finish()?;
    t.validate()?;
    Ok(t)
}

pub fn format_thresholds(t: &ThresholdSet) -> String {
    let lim = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
    let mut out = String::new();
    for (grade, limits) in [("evoo", &t.evoo), ("voo", &t.voo)] {
        for p in ParameterId::ALL {
            out.push_str(&format!("{grade}.{} = {}\n", p.key(), lim(limits[p.index()])));
        }
        out.push('\n');
    }
    out.push_str(&format!("missing_caps_at_voo = {}\n", t.missing_caps_at_voo));
    out
}

/// Overlays the keys of `kv` on `base`.
pub fn hyperparams_from(mut kv: KeyValues, base: HyperParams) -> Result<HyperParams> {
    let mut hp = base;
    kv.take_into("filters1", &mut hp.filters1)?;
    kv.take_into("ksize1", &mut hp.ksize1)?;
    kv.take_into("pool", &mut hp.pool)?;
    kv.take_into("filters2", &mut hp.filters2)?;
    kv.take_into("ksize2", &mut hp.ksize2)?;
    kv.take_into("dense1", &mut hp.dense1)?;
    kv.take_into("dense2", &mut hp.dense2)?;
    kv.take_into("dropout", &mut hp.dropout)?;
    kv.take_into("dropout_placement", &mut hp.dropout_placement)?;
    kv.take_into("epochs", &mut hp.epochs)?;
    kv.take_into("batch", &mut hp.batch)?;
    kv.take_into("learning_rate", &mut hp.learning_rate)?;
    kv.finish()?;
    hp.validate()?;
    Ok(hp)
}

pub fn format_hyperparams(hp: &HyperParams) -> String {
    format!(
        "filters1 = {}\nksize1 = {}\npool = {}\nfilters2 = {}\nksize2 = {}\ndense1 = {}\ndense2 = {}\ndropout = {}\ndropout_placement = {}\nepochs = {}\nbatch = {}\nlearning_rate = {}\n",
        hp.filters1,
        hp.ksize1,
        hp.pool,
        hp.filters2,
        hp.ksize2,
        hp.dense1,
        hp.dense2,
        hp.dropout,
        hp.dropout_placement.as_str(),
        hp.epochs,
        hp.batch,
        hp.learning_rate
    )
}

pub fn load_generator(path: &Path) -> Result<GeneratorConfig> {
    generator_from(KeyValues::load(path)?)
}

pub fn load_thresholds(path: &Path) -> Result<ThresholdSet> {
    thresholds_from(KeyValues::load(path)?)
}

pub fn load_hyperparams(path: &Path) -> Result<HyperParams> {
    hyperparams_from(KeyValues::load(path)?, HyperParams::default())
}
