//! Parameter sweeps over `(η, T, s)` and the data behind each figure.
//!
//! Rows are computed in parallel and written in grid order, with values
//! rounded to 12 significant digits, so output files are reproducible byte
//! for byte.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{classical_lower_analytic, classical_upper_bound, local_classical_lower};
use crate::channel::{omega_spectrum, ChannelConfig};
use crate::entanglement::{
    env_ppt_eigenvalue, env_separability_scan, mean_reduced_entropy, SeedState,
};
use crate::error::{Error, Result};
use crate::optimize::{
    maximize_classical, maximize_ent_assisted, maximize_ent_assisted_local, maximize_quantum,
    maximize_quantum_local, OptResult,
};

/// Quantity computed at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// Numerically maximized Holevo information, global scenario.
    ClassicalLower,
    /// Closed-form lower bound (with its validity flag).
    ClassicalAnalytic,
    ClassicalUpper,
    ClassicalLocal,
    Quantum,
    QuantumLocal,
    EntAssisted,
    EntAssistedLocal,
    /// Mean single-use entropy of the numerically optimal seed.
    SeedEntropy,
    /// Mean single-use entropy of the closed-form optimal seed.
    SeedEntropyAnalytic,
    /// Smallest PPT symplectic eigenvalue of the two-use environment.
    Separability,
}

impl Quantity {
    pub const ALL: [Quantity; 11] = [
        Quantity::ClassicalLower,
        Quantity::ClassicalAnalytic,
        Quantity::ClassicalUpper,
        Quantity::ClassicalLocal,
        Quantity::Quantum,
        Quantity::QuantumLocal,
        Quantity::EntAssisted,
        Quantity::EntAssistedLocal,
        Quantity::SeedEntropy,
        Quantity::SeedEntropyAnalytic,
        Quantity::Separability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::ClassicalLower => "classical-lower",
            Quantity::ClassicalAnalytic => "classical-analytic",
            Quantity::ClassicalUpper => "classical-upper",
            Quantity::ClassicalLocal => "classical-local",
            Quantity::Quantum => "quantum",
            Quantity::QuantumLocal => "quantum-local",
            Quantity::EntAssisted => "ent-assisted",
            Quantity::EntAssistedLocal => "ent-assisted-local",
            Quantity::SeedEntropy => "seed-entropy",
            Quantity::SeedEntropyAnalytic => "seed-entropy-analytic",
            Quantity::Separability => "separability",
        }
    }

    /// Local-scenario counterpart, if there is one.
    pub fn local(self) -> Option<Quantity> {
        match self {
            Quantity::ClassicalLower | Quantity::ClassicalLocal => Some(Quantity::ClassicalLocal),
            Quantity::Quantum | Quantity::QuantumLocal => Some(Quantity::QuantumLocal),
            Quantity::EntAssisted | Quantity::EntAssistedLocal => Some(Quantity::EntAssistedLocal),
            _ => None,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidScan(format!("unknown quantity '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidScan(format!("unknown output format '{other}'"))),
        }
    }
}

/// A sweep: every quantity at every `(η, T, s)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub n: usize,
    pub nbar: f64,
    pub eta: Vec<f64>,
    pub temp: Vec<f64>,
    pub s: Vec<f64>,
    pub quantities: Vec<Quantity>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub jobs: usize,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.eta.is_empty() || self.temp.is_empty() || self.s.is_empty() {
            return Err(Error::InvalidScan("eta, T and s grids must be non-empty".into()));
        }
        if self.quantities.is_empty() {
            return Err(Error::InvalidScan("no quantity requested".into()));
        }
        for &eta in &self.eta {
            for &temp in &self.temp {
                for &s in &self.s {
                    ChannelConfig::new(self.n, eta, s, temp, self.nbar)?;
                }
            }
        }
        if self.quantities.contains(&Quantity::Separability) && self.n != 2 {
            return Err(Error::InvalidScan(format!(
                "separability is defined for n = 2, got n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Number of rows the scan produces.
    pub fn len(&self) -> usize {
        self.quantities.len() * self.eta.len() * self.temp.len() * self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub eta: f64,
    pub s: f64,
    #[serde(rename = "T")]
    pub temp: f64,
    #[serde(rename = "N")]
    pub nbar: f64,
    pub quantity: Quantity,
    pub value_bits: f64,
    pub analytic_valid: Option<bool>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<Row>,
}

/// Formats like C's `%.12g`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Value after rounding to the output precision.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        format_sig(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

impl Dataset {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "eta",
            "s",
            "T",
            "N",
            "quantity",
            "value_bits",
            "analytic_valid",
            "converged",
        ])?;
        for r in &self.rows {
            let valid = r.analytic_valid.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                r.n.to_string(),
                format_sig(r.eta),
                format_sig(r.s),
                format_sig(r.temp),
                format_sig(r.nbar),
                r.quantity.name().to_string(),
                format_sig(r.value_bits),
                valid,
                r.converged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let rounded: Vec<Row> = self
            .rows
            .iter()
            .map(|r| Row {
                eta: round_sig(r.eta),
                s: round_sig(r.s),
                temp: round_sig(r.temp),
                nbar: round_sig(r.nbar),
                value_bits: round_sig(r.value_bits),
                ..r.clone()
            })
            .collect();
        let mut out = out;
        serde_json::to_writer_pretty(&mut out, &rounded)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    pub fn write_file(&self, format: OutputFormat, path: &Path) -> Result<()> {
        let mut file = BufWriter::new(File::create(path)?);
        self.write(format, &mut file)?;
        file.flush()?;
        Ok(())
    }

    /// Parses a CSV produced by [`Dataset::write_csv`].
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for record in reader.records() {
            let rec = record?;
            let field = |i: usize| rec.get(i).unwrap_or_default();
            let num = |i: usize| -> Result<f64> {
                field(i)
                    .parse()
                    .map_err(|_| Error::InvalidScan(format!("bad number '{}'", field(i))))
            };
            let flag = |i: usize| -> Result<Option<bool>> {
                match field(i) {
                    "" => Ok(None),
                    "true" => Ok(Some(true)),
                    "false" => Ok(Some(false)),
                    other => Err(Error::InvalidScan(format!("bad flag '{other}'"))),
                }
            };
            rows.push(Row {
                n: field(0)
                    .parse()
                    .map_err(|_| Error::InvalidScan(format!("bad n '{}'", field(0))))?,
                eta: num(1)?,
                s: num(2)?,
                temp: num(3)?,
                nbar: num(4)?,
                quantity: field(5).parse()?,
                value_bits: num(6)?,
                analytic_valid: flag(7)?,
                converged: flag(8)?.unwrap_or(false),
            });
        }
        Ok(Self { rows })
    }
}

fn from_opt(result: Result<OptResult>) -> (f64, bool) {
    match result {
        Ok(r) => (r.value, r.converged),
        Err(_) => (f64::NAN, false),
    }
}

/// Evaluates one quantity at one channel configuration.
pub fn evaluate(cfg: &ChannelConfig, quantity: Quantity) -> Row {
    let (value_bits, analytic_valid, converged) = match quantity {
        Quantity::ClassicalLower => {
            let (v, c) = from_opt(maximize_classical(cfg));
            (v, Some(classical_lower_analytic(cfg).valid), c)
        }
        Quantity::ClassicalAnalytic => {
            let b = classical_lower_analytic(cfg);
            (b.value, Some(b.valid), true)
        }
        Quantity::ClassicalUpper => {
            let b = classical_upper_bound(cfg);
            (b.value, Some(b.valid), true)
        }
        Quantity::ClassicalLocal => match local_classical_lower(cfg) {
            Ok(v) => (v, None, true),
            Err(_) => (f64::NAN, None, false),
        },
        Quantity::Quantum => {
            let (v, c) = from_opt(maximize_quantum(cfg));
            (v, None, c)
        }
        Quantity::QuantumLocal => {
            let (v, c) = from_opt(maximize_quantum_local(cfg));
            (v, None, c)
        }
        Quantity::EntAssisted => {
            let (v, c) = from_opt(maximize_ent_assisted(cfg));
            (v, None, c)
        }
        Quantity::EntAssistedLocal => {
            let (v, c) = from_opt(maximize_ent_assisted_local(cfg));
            (v, None, c)
        }
        Quantity::SeedEntropy => {
            let valid = Some(classical_lower_analytic(cfg).valid);
            match maximize_classical(cfg).and_then(|r| {
                let entropy = mean_reduced_entropy(&SeedState::from_params(&r.params)?)?;
                Ok((entropy, r.converged))
            }) {
                Ok((v, c)) => (v, valid, c),
                Err(_) => (f64::NAN, valid, false),
            }
        }
        Quantity::SeedEntropyAnalytic => {
            let b = classical_lower_analytic(cfg);
            let seed = SeedState::new(
                b.per_mode.iter().map(|p| p.t).collect(),
                b.per_mode.iter().map(|p| p.r).collect(),
                omega_spectrum(cfg.n),
            );
            match seed.and_then(|s| mean_reduced_entropy(&s)) {
                Ok(v) => (v, Some(b.valid), true),
                Err(_) => (f64::NAN, Some(b.valid), false),
            }
        }
        Quantity::Separability => match env_ppt_eigenvalue(cfg.s, cfg.temp) {
            Ok(v) => (v, None, true),
            Err(_) => (f64::NAN, None, false),
        },
    };
    Row {
        n: cfg.n,
        eta: cfg.eta,
        s: cfg.s,
        temp: cfg.temp,
        nbar: cfg.nbar,
        quantity,
        value_bits,
        analytic_valid,
        converged,
    }
}

/// Runs the scan; rows are ordered by quantity, then η, then T, then s.
pub fn run_scan(spec: &ScanSpec) -> Result<Dataset> {
    run_scan_with_progress(spec, |_, _| {})
}

/// As [`run_scan`], calling `progress(done, total)` as rows complete.
pub fn run_scan_with_progress(
    spec: &ScanSpec,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<Dataset> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.len());
    for &q in &spec.quantities {
        for &eta in &spec.eta {
            for &temp in &spec.temp {
                for &s in &spec.s {
                    points.push((ChannelConfig::new(spec.n, eta, s, temp, spec.nbar)?, q));
                }
            }
        }
    }
    let total = points.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|(cfg, q)| {
                let row = evaluate(cfg, *q);
                let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(k, total);
                row
            })
            .collect()
    });
    Ok(Dataset { rows })
}

/// Figure identifiers with pre-baked scans.
pub const FIGURES: [&str; 8] = ["2a", "2b", "3a", "3b", "4a", "4b", "5", "6"];

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize + 1;
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// The scan behind a figure: `n = 10` (or 2 for figure 6), `N = 8`,
/// `|s| ∈ [0, 3]`.
pub fn figure_spec(id: &str) -> Result<ScanSpec> {
    use Quantity::*;
    let s = steps(0.0, 3.0, 0.1);
    let spec = |n: usize, eta: Vec<f64>, temp: Vec<f64>, quantities: Vec<Quantity>| ScanSpec {
        n,
        nbar: 8.0,
        eta,
        temp,
        s: s.clone(),
        quantities,
        format: OutputFormat::Csv,
        out: None,
        jobs: 0,
    };
    let classical = vec![ClassicalLower, ClassicalAnalytic, ClassicalLocal];
    let quantum = vec![Quantum, QuantumLocal];
    let assisted = vec![EntAssisted, EntAssistedLocal];
    Ok(match id {
        "2a" => spec(10, steps(0.1, 0.9, 0.2), vec![0.0], classical),
        "2b" => spec(10, vec![0.9], steps(0.0, 5.0, 1.0), classical),
        "3a" => spec(10, steps(0.6, 0.9, 0.1), vec![0.0], quantum),
        "3b" => spec(10, vec![0.9], steps(0.0, 1.5, 0.5), quantum),
        "4a" => spec(10, steps(0.1, 0.9, 0.2), vec![0.0], assisted),
        "4b" => spec(10, vec![0.9], steps(0.0, 6.0, 1.0), assisted),
        "5" => spec(10, vec![0.9], vec![0.0], vec![SeedEntropy, SeedEntropyAnalytic]),
        "6" => spec(
            2,
            vec![0.9],
            steps(0.0, 3.0, 0.1),
            vec![ClassicalLower, SeedEntropy, Quantum, EntAssisted, Separability],
        ),
        other => return Err(Error::UnknownFigure(other.to_string())),
    })
}

/// Writes the data of figure `id` into `dir` and returns the written paths.
/// Figure 6 also gets the separability boundary curve.
pub fn emit_figure_data(
    id: &str,
    dir: &Path,
    format: OutputFormat,
    jobs: usize,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<Vec<PathBuf>> {
    let mut spec = figure_spec(id)?;
    spec.jobs = jobs;
    std::fs::create_dir_all(dir)?;
    let data = run_scan_with_progress(&spec, progress)?;
    let path = dir.join(format!("fig{id}.{}", format.extension()));
    data.write_file(format, &path)?;
    let mut written = vec![path];
    if id == "6" {
        let scan = env_separability_scan(&spec.s, &spec.temp)?;
        let path = dir.join(format!("fig6_boundary.{}", format.extension()));
        let mut file = BufWriter::new(File::create(&path)?);
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(&mut file);
                w.write_record(["s", "T_boundary", "T_closed_form"])?;
                for b in &scan.boundary {
                    w.write_record([
                        format_sig(b.s),
                        format_sig(b.temp),
                        format_sig(b.closed_form),
                    ])?;
                }
                w.flush()?;
            }
            OutputFormat::Json => {
                let rows: Vec<_> = scan
                    .boundary
                    .iter()
                    .map(|b| {
                        serde_json::json!({
                            "s": round_sig(b.s),
                            "T_boundary": round_sig(b.temp),
                            "T_closed_form": round_sig(b.closed_form),
                        })
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut file, &rows)?;
                writeln!(file)?;
            }
        }
        file.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(4.386538332596275), "4.3865383326");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(-2.5e-9), "-2.5e-09");
        assert_eq!(format_sig(1.234e15), "1.234e+15");
        assert_eq!(format_sig(123456.0), "123456");
        assert_eq!(format_sig(f64::NAN), "nan");
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!("classical".parse::<Quantity>().is_err());
        assert_eq!(Quantity::Quantum.local(), Some(Quantity::QuantumLocal));
        assert_eq!(Quantity::Separability.local(), None);
    }

    #[test]
    fn empty_grids_rejected() {
        let spec = ScanSpec {
            n: 4,
            nbar: 1.0,
            eta: vec![0.5],
            temp: vec![],
            s: vec![0.0],
            quantities: vec![Quantity::ClassicalUpper],
            format: OutputFormat::Csv,
            out: None,
            jobs: 1,
        };
        assert!(run_scan(&spec).is_err());
    }

    #[test]
    fn figure_specs_follow_captions() {
        let f = figure_spec("3a").unwrap();
        assert_eq!(f.eta.len(), 4);
        assert!((f.eta[3] - 0.9).abs() < 1e-12);
        assert_eq!(figure_spec("4b").unwrap().temp, steps(0.0, 6.0, 1.0));
        assert_eq!(figure_spec("5").unwrap().n, 10);
        assert!(matches!(figure_spec("7"), Err(Error::UnknownFigure(_))));
        for id in FIGURES {
            figure_spec(id).unwrap().validate().unwrap();
        }
    }
}
