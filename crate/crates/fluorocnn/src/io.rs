//! CSV and plain-text file formats.
//!
//! Labels: `oil_id,acidity,peroxide,k270,k232,ethyl_esters,quality`, with
//! `-` or an empty cell for a missing value. Spectra:
//! `oil_id,excitation_nm,repetition,i_0,...,i_{P-1}`, with the wavelength
//! grid in a companion file holding one value per line. Floats are written
//! in shortest round-trip form, so files reload bit-exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fluorocnn_core::{Dataset, Excitation, OilRecord, ParameterId, Quality, Spectrum, WavelengthGrid};

use crate::error::{Error, Result};

pub const LABELS_HEADER: [&str; 7] = [
    "oil_id",
    "acidity",
    "peroxide",
    "k270",
    "k232",
    "ethyl_esters",
    "quality",
];

pub const SPECTRA_FILE: &str = "spectra.csv";
pub const GRID_FILE: &str = "grid.txt";
pub const DARK_FILE: &str = "dark.txt";
pub const LABELS_FILE: &str = "labels.csv";

const BUNDLED_LABELS: &str = include_str!("../data/labels.csv");

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn missing(cell: &str) -> bool {
    cell.is_empty() || cell == "-"
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

/// Parses a labels table. `source` is only used in error messages.
///
/// Parameter columns may be any subset of the five; `quality` is optional.
/// This lets the same reader accept prediction tables.
pub fn parse_labels(text: &str, source: &Path) -> Result<Vec<OilRecord>> {
    let mut rdr = reader(text);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let id_col = col("oil_id").ok_or_else(|| Error::parse(source, 1, "missing `oil_id` column"))?;
    let param_cols: Vec<(ParameterId, usize)> = ParameterId::ALL
        .iter()
        .filter_map(|&p| col(p.key()).map(|c| (p, c)))
        .collect();
    let quality_col = col("quality");

    let mut records: Vec<OilRecord> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::parse(source, 0, e.to_string()))?;
        let line = line_of(&row);
        if row.iter().all(str::is_empty) {
            continue;
        }
        let cell = |c: usize| row.get(c).unwrap_or("");
        let id = cell(id_col);
        if id.is_empty() {
            return Err(Error::parse(source, line, "empty oil_id"));
        }
        let mut rec = OilRecord::new(id);
        for &(p, c) in &param_cols {
            let raw = cell(c);
            if !missing(raw) {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| Error::parse(source, line, format!("{}: `{raw}` is not a number", p.key())))?;
                rec.set(p, Some(v));
            }
        }
        if let Some(c) = quality_col {
            let raw = cell(c);
            if !missing(raw) {
                let q: Quality = raw
                    .parse()
                    .map_err(|_| Error::parse(source, line, format!("unknown quality `{raw}`")))?;
                rec.quality = Some(q);
            }
        }
        if records.iter().any(|r| r.oil_id == rec.oil_id) {
            return Err(Error::parse(source, line, format!("duplicate oil_id `{id}`")));
        }
        rec.validate().map_err(|e| Error::parse(source, line, e.to_string()))?;
        records.push(rec);
    }
    Ok(records)
}

pub fn load_labels(path: &Path) -> Result<Vec<OilRecord>> {
    parse_labels(&read_to_string(path)?, path)
}

/// The 22 laboratory-characterized oils shipped with the crate.
pub fn bundled_labels() -> Vec<OilRecord> {
    parse_labels(BUNDLED_LABELS, Path::new("<bundled labels.csv>")).expect("bundled labels are valid")
}

pub fn bundled_labels_csv() -> &'static str {
    BUNDLED_LABELS
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn format_labels(records: &[OilRecord]) -> String {
    let mut out = LABELS_HEADER.join(",");
    out.push('\n');
    for r in records {
        let mut cells = vec![r.oil_id.clone()];
        cells.extend(ParameterId::ALL.iter().map(|&p| opt(r.get(p))));
        cells.push(r.quality.map_or("-", Quality::as_str).to_string());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn format_grid(grid: &WavelengthGrid) -> String {
    grid.values().iter().map(|v| format!("{v}\n")).collect()
}

fn parse_column(text: &str, source: &Path) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| Error::parse(source, i + 1, format!("`{}` is not a number", l.trim())))
        })
        .collect()
}

pub fn load_grid(path: &Path) -> Result<WavelengthGrid> {
    let values = parse_column(&read_to_string(path)?, path)?;
    WavelengthGrid::new(values).map_err(|e| Error::format(path, e.to_string()))
}

pub fn load_dark(path: &Path) -> Result<Vec<f64>> {
    parse_column(&read_to_string(path)?, path)
}

pub fn format_spectra(spectra: &[Spectrum]) -> String {
    let pixels = spectra.first().map_or(0, |s| s.intensities.len());
    let mut out = String::from("oil_id,excitation_nm,repetition");
    for i in 0..pixels {
        out.push_str(&format!(",i_{i}"));
    }
    out.push('\n');
    for s in spectra {
        out.push_str(&format!("{},{},{}", s.oil_id, s.excitation.nm(), s.repetition));
        for v in &s.intensities {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_spectra(text: &str, source: &Path) -> Result<Vec<Spectrum>> {
    let mut rdr = reader(text);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    if header.len() < 4 || &header[0] != "oil_id" || &header[1] != "excitation_nm" || &header[2] != "repetition" {
        return Err(Error::parse(
            source,
            1,
            "header must be `oil_id,excitation_nm,repetition,i_0,...`",
        ));
    }
    let pixels = header.len() - 3;
    let mut spectra = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::parse(source, 0, e.to_string()))?;
        let line = line_of(&row);
        if row.len() != header.len() {
            return Err(Error::parse(
                source,
                line,
                format!("expected {} columns, found {}", header.len(), row.len()),
            ));
        }
        let nm: u32 = row[1]
            .parse()
            .map_err(|_| Error::parse(source, line, format!("bad excitation `{}`", &row[1])))?;
        let excitation = Excitation::from_nm(nm).map_err(|e| Error::parse(source, line, e.to_string()))?;
        let repetition: u32 = row[2]
            .parse()
            .map_err(|_| Error::parse(source, line, format!("bad repetition `{}`", &row[2])))?;
        let mut intensities = Vec::with_capacity(pixels);
        for cell in row.iter().skip(3) {
            intensities.push(
                cell.parse::<f64>()
                    .map_err(|_| Error::parse(source, line, format!("`{cell}` is not a number")))?,
            );
        }
        spectra.push(Spectrum {
            oil_id: row[0].to_string(),
            excitation,
            repetition,
            intensities,
            normalized: false,
        });
    }
    Ok(spectra)
}

/// Files making up a dataset directory.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    write_string(&dir.join(SPECTRA_FILE), &format_spectra(dataset.spectra()))?;
    write_string(&dir.join(GRID_FILE), &format_grid(dataset.grid()))?;
    write_string(&dir.join(LABELS_FILE), &format_labels(dataset.records()))
}

/// Loads `spectra.csv`, `grid.txt` and labels from `dir`, subtracting
/// `dark.txt` when present. `labels` overrides the directory's label file.
pub fn load_dataset(dir: &Path, labels: Option<&Path>) -> Result<Dataset> {
    let spectra_path = dir.join(SPECTRA_FILE);
    let spectra = parse_spectra(&read_to_string(&spectra_path)?, &spectra_path)?;
    let grid = load_grid(&dir.join(GRID_FILE))?;
    let labels_path = labels.map_or_else(|| dir.join(LABELS_FILE), Path::to_path_buf);
    let all_records = load_labels(&labels_path)?;
    let present: std::collections::BTreeSet<&str> = spectra.iter().map(|s| s.oil_id.as_str()).collect();
    let records: Vec<OilRecord> = all_records
        .into_iter()
        .filter(|r| present.contains(r.oil_id.as_str()))
        .collect();
    let repetitions = spectra.iter().map(|s| s.repetition).max().unwrap_or(0);
    let dataset =
        Dataset::new(grid, spectra, records, repetitions).map_err(|e| Error::format(&spectra_path, e.to_string()))?;
    let dark_path = dir.join(DARK_FILE);
    if dark_path.exists() {
        let dark = load_dark(&dark_path)?;
        return dataset
            .subtract_dark(&dark)
            .map_err(|e| Error::format(&dark_path, e.to_string()));
    }
    Ok(dataset)
}

/// Per-oil laboratory errors: `oil_id,exp_error`.
pub fn load_exp_errors(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = read_to_string(path)?;
    let mut rdr = reader(&text);
    let header = rdr.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
    let id = header.iter().position(|h| h == "oil_id");
    let err = header.iter().position(|h| h == "exp_error");
    let (Some(id), Some(err)) = (id, err) else {
        return Err(Error::parse(path, 1, "header must contain `oil_id` and `exp_error`"));
    };
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = line_of(&row);
        let raw = row.get(err).unwrap_or("");
        if missing(raw) {
            continue;
        }
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::parse(path, line, format!("`{raw}` is not a number")))?;
        out.insert(row.get(id).unwrap_or("").to_string(), v);
    }
    Ok(out)
}
