//! Figure-reproduction harness behind the `qchannel` binary.
//!
//! Figure commands emit one table (CSV or JSON). Settings are resolved in three layers:
//! per-command defaults, then an optional `key=value` config file, then explicit flags.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::detection::{self, Measurement, MeasurementKind};
use crate::ensembles::{self, build_nn12_code, build_simplex_code, Code, StateEmbedding};
use crate::error::{Error, Result};
use crate::fastcode;
use crate::information;
use crate::linalg::Matrix;
use crate::synth;

const SIG_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits, trailing zeros removed; scientific notation
/// outside `1e-5 ≤ |x| < 1e12`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qchannel",
    version,
    about = "Superadditive classical capacity of binary pure-state channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-letter gain over C1 for [[n, n-1, 2]] codes (n = 2 is the repetition pair).
    Fig2(GridArgs),
    /// Crossing overlap κ⋆ per block length, with the (2/n)^(2/3) guide.
    Fig3(GridArgs),
    /// Holevo bound, I_9/9 and C1.
    Fig4(GridArgs),
    /// Code and threshold error probabilities for [[n, n-1, 2]].
    Fig5(GridArgs),
    /// Simplex [[7,3,4]] against [[7,6,2]] information per letter.
    Fig6(GridArgs),
    /// Simplex [[7,3,4]] against [[7,6,2]] error probabilities.
    Fig7(GridArgs),
    /// Simplex [[7,3,4]] against [[3,2,2]] information per letter.
    Fig8(GridArgs),
    /// Information and error per code over a κ grid for any code family.
    Sweep(GridArgs),
    /// Synthesize the decoder unitary and its rotation schedule.
    Synth(SynthArgs),
    /// Bayes-cost reduction from the square-root measurement.
    Optimize(OptimizeArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub kappa_min: Option<f64>,
    #[arg(long)]
    pub kappa_max: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Block lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Simplex orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<usize>>,
    /// `nn12`, `simplex`, or a path to a code file.
    #[arg(long)]
    pub code: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File of `key=value` lines; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SynthArgs {
    /// `nn12`, `simplex`, or a path to a code file.
    #[arg(long, default_value = "nn12")]
    pub code: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    #[arg(long)]
    pub kappa: f64,
    /// Directory receiving unitary.txt, schedule.csv and report.txt.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct OptimizeArgs {
    /// States file: first line `M d`, then M lines of d coordinates.
    #[arg(long, conflicts_with = "kappa")]
    pub states: Option<PathBuf>,
    /// Use the binary letters with this overlap.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Priors, comma separated (default uniform).
    #[arg(long, value_delimiter = ',')]
    pub priors: Option<Vec<f64>>,
    #[arg(long, default_value_t = detection::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = detection::DEFAULT_MAX_SWEEPS)]
    pub max_sweeps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CodeFamily {
    Nn12,
    Simplex,
    File(PathBuf),
}

impl CodeFamily {
    fn parse(s: &str) -> Self {
        match s {
            "nn12" => CodeFamily::Nn12,
            "simplex" => CodeFamily::Simplex,
            path => CodeFamily::File(PathBuf::from(path)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_steps: usize,
    pub n_list: Vec<usize>,
    pub r_list: Vec<usize>,
    pub code_family: CodeFamily,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kappa_min: 0.01,
            kappa_max: 0.99,
            kappa_steps: 99,
            n_list: Vec::new(),
            r_list: Vec::new(),
            code_family: CodeFamily::Nn12,
            output_path: None,
            format: Format::Csv,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("{key}: bad entry {s:?}")))
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("{key}: bad value {value:?}")))
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.kappa_min >= 0.0
            && self.kappa_min < self.kappa_max
            && self.kappa_max < 1.0
            && self.kappa_steps >= 2;
        if !ok {
            return Err(Error::InvalidInput(format!(
                "grid needs 0 <= kappa_min < kappa_max < 1 and steps >= 2 (got {}, {}, {})",
                self.kappa_min, self.kappa_max, self.kappa_steps
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let span = self.kappa_max - self.kappa_min;
        let last = (self.kappa_steps - 1) as f64;
        (0..self.kappa_steps)
            .map(|k| self.kappa_min + span * k as f64 / last)
            .collect()
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kappa_min" => self.kappa_min = parse_value(key, value)?,
                "kappa_max" => self.kappa_max = parse_value(key, value)?,
                "steps" | "kappa_steps" => self.kappa_steps = parse_value(key, value)?,
                "n" | "n_list" => self.n_list = parse_list(key, value)?,
                "r" | "r_list" => self.r_list = parse_list(key, value)?,
                "code" => self.code_family = CodeFamily::parse(value),
                "out" => self.output_path = Some(PathBuf::from(value)),
                "format" => {
                    self.format = Format::from_str(value, true)
                        .map_err(|_| Error::Parse(format!("format: unknown value {value:?}")))?
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key {key:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, args: &GridArgs) {
        if let Some(v) = args.kappa_min {
            self.kappa_min = v;
        }
        if let Some(v) = args.kappa_max {
            self.kappa_max = v;
        }
        if let Some(v) = args.steps {
            self.kappa_steps = v;
        }
        if let Some(v) = &args.n {
            self.n_list = v.clone();
        }
        if let Some(v) = &args.r {
            self.r_list = v.clone();
        }
        if let Some(v) = &args.code {
            self.code_family = CodeFamily::parse(v);
        }
        if let Some(v) = args.format {
            self.format = v;
        }
        if let Some(v) = &args.out {
            self.output_path = Some(v.clone());
        }
    }

    /// Defaults, then the config file named in `args`, then the flags themselves.
    pub fn resolve(mut self, args: &GridArgs) -> Result<Self> {
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            self.apply_config_text(&text)?;
        }
        self.apply_flags(args);
        self.validate()?;
        Ok(self)
    }
}

/// A numeric table; `None` cells are written empty (CSV) or `null` (JSON).
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(format_number).unwrap_or_default())
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty table".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let row = line
                .split(',')
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        parse_value("cell", c).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Parse(format!(
                    "row {line:?} has {} cells",
                    row.len()
                )));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Some(x) => {
                            let rounded: f64 = format_number(*x).parse().unwrap_or(*x);
                            serde_json::Number::from_f64(rounded)
                                .map_or(serde_json::Value::Null, serde_json::Value::Number)
                        }
                        None => serde_json::Value::Null,
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Evaluates `row(κ)` on the grid in parallel; rows come back in grid order.
fn grid_table(
    columns: Vec<String>,
    grid: &[f64],
    row: impl Fn(f64) -> Result<Vec<f64>> + Sync,
) -> Result<Table> {
    let rows = grid
        .par_iter()
        .map(|&k| {
            let mut r = vec![Some(k)];
            r.extend(row(k)?.into_iter().map(Some));
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

fn or_default(list: &[usize], default: &[usize]) -> Vec<usize> {
    if list.is_empty() {
        default.to_vec()
    } else {
        list.to_vec()
    }
}

pub fn fig2_table(cfg: &SweepConfig) -> Result<Table> {
    let ns = or_default(&cfg.n_list, &(2..=13).collect::<Vec<_>>());
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidInput(format!("fig2 needs n >= 2, got {n}")));
    }
    let mut columns = vec!["kappa".to_string()];
    columns.extend(ns.iter().map(|n| format!("gain_n{n}")));
    grid_table(columns, &cfg.grid(), |k| {
        ns.iter()
            .map(|&n| {
                if n == 2 {
                    fastcode::repetition_pair_gain(k)
                } else {
                    fastcode::nn12_gain(n, k)
                }
            })
            .collect()
    })
}

pub fn fig3_table(cfg: &SweepConfig) -> Result<Table> {
    let ns = or_default(&cfg.n_list, &(2..=13).collect::<Vec<_>>());
    let rows = ns
        .par_iter()
        .map(|&n| {
            let star = match fastcode::find_kappa_star(n, 1e-6) {
                Ok(k) => Some(k),
                Err(Error::NoRoot { .. }) => None,
                Err(e) => return Err(e),
            };
            let guide = (2.0 / n as f64).powf(2.0 / 3.0);
            Ok(vec![Some(n as f64), star, Some(guide)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["n".into(), "kappa_star".into(), "guide".into()],
        rows,
    })
}

fn information_columns(
    cfg: &SweepConfig,
    default_n: &[usize],
    default_r: &[usize],
) -> Result<Table> {
    let ns = or_default(&cfg.n_list, default_n);
    let rs = or_default(&cfg.r_list, default_r);
    let mut columns = vec!["kappa".to_string(), "holevo".to_string()];
    columns.extend(rs.iter().map(|r| format!("simplex_r{r}")));
    columns.extend(ns.iter().map(|n| format!("nn12_n{n}")));
    columns.push("c1".into());
    grid_table(columns, &cfg.grid(), |k| {
        let mut row = vec![information::holevo_binary(k)];
        for &r in &rs {
            row.push(fastcode::simplex_profile(r, k)?.per_letter());
        }
        for &n in &ns {
            row.push(fastcode::nn12_mutual_information(n, k)? / n as f64);
        }
        row.push(information::c1_binary(k));
        Ok(row)
    })
}

pub fn fig4_table(cfg: &SweepConfig) -> Result<Table> {
    information_columns(cfg, &[9], &[])
}

pub fn fig6_table(cfg: &SweepConfig) -> Result<Table> {
    information_columns(cfg, &[7], &[3])
}

pub fn fig8_table(cfg: &SweepConfig) -> Result<Table> {
    information_columns(cfg, &[3], &[3])
}

fn error_columns(cfg: &SweepConfig, default_n: &[usize], default_r: &[usize]) -> Result<Table> {
    let ns = or_default(&cfg.n_list, default_n);
    let rs = or_default(&cfg.r_list, default_r);
    let mut columns = vec!["kappa".to_string(), "p".to_string()];
    columns.extend(rs.iter().map(|r| format!("simplex_error_r{r}")));
    for n in &ns {
        columns.push(format!("code_error_n{n}"));
        columns.push(format!("threshold_error_n{n}"));
    }
    grid_table(columns, &cfg.grid(), |k| {
        let mut row = vec![information::letter_error(k)];
        for &r in &rs {
            row.push(fastcode::simplex_profile(r, k)?.error_probability);
        }
        for &n in &ns {
            row.push(fastcode::nn12_error_probability(n, k)?);
            row.push(information::threshold_quantities(k, n).1);
        }
        Ok(row)
    })
}

pub fn fig5_table(cfg: &SweepConfig) -> Result<Table> {
    error_columns(cfg, &[3, 5, 7, 9, 11, 13], &[])
}

pub fn fig7_table(cfg: &SweepConfig) -> Result<Table> {
    error_columns(cfg, &[7], &[3])
}

fn read_code(path: &Path) -> Result<Code> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Code::parse_text(&text)
}

/// Per code: information per letter and error probability of the square-root channel.
/// Code files go through the explicit Gram matrix; the families use the closed forms.
pub fn sweep_table(cfg: &SweepConfig) -> Result<Table> {
    let mut columns = vec!["kappa".to_string(), "c1".to_string(), "holevo".to_string()];
    match &cfg.code_family {
        CodeFamily::Nn12 => {
            let ns = or_default(&cfg.n_list, &[3]);
            for n in &ns {
                columns.push(format!("info_per_letter_n{n}"));
                columns.push(format!("error_n{n}"));
            }
            grid_table(columns, &cfg.grid(), |k| {
                let mut row = vec![information::c1_binary(k), information::holevo_binary(k)];
                for &n in &ns {
                    row.push(fastcode::nn12_mutual_information(n, k)? / n as f64);
                    row.push(fastcode::nn12_error_probability(n, k)?);
                }
                Ok(row)
            })
        }
        CodeFamily::Simplex => {
            let rs = or_default(&cfg.r_list, &[2]);
            for r in &rs {
                columns.push(format!("info_per_letter_r{r}"));
                columns.push(format!("error_r{r}"));
            }
            grid_table(columns, &cfg.grid(), |k| {
                let mut row = vec![information::c1_binary(k), information::holevo_binary(k)];
                for &r in &rs {
                    let s = fastcode::simplex_profile(r, k)?;
                    row.push(s.per_letter());
                    row.push(s.error_probability);
                }
                Ok(row)
            })
        }
        CodeFamily::File(path) => {
            let code = read_code(path)?;
            columns.push("info_per_letter".into());
            columns.push("error".into());
            grid_table(columns, &cfg.grid(), |k| {
                let g = ensembles::gram(&code, k, true);
                let (_, ch) = detection::square_root_measurement(&g)?;
                let info = information::block_mutual_information(code.priors(), &ch, code.n())?;
                let success: f64 = (0..code.len())
                    .map(|i| code.priors()[i] * ch.get(i, i))
                    .sum();
                Ok(vec![
                    information::c1_binary(k),
                    information::holevo_binary(k),
                    info.per_letter,
                    1.0 - success,
                ])
            })
        }
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn select_code(family: &str, n: usize, r: usize) -> Result<Code> {
    match CodeFamily::parse(family) {
        CodeFamily::Nn12 => {
            synth::check_block_length(n)?;
            build_nn12_code(n)
        }
        CodeFamily::Simplex => {
            synth::check_block_length((1usize << r.min(16)) - 1)?;
            build_simplex_code(r)
        }
        CodeFamily::File(path) => read_code(&path),
    }
}

/// Everything `synth` writes, kept separate from the file output for testing.
#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub unitary: synth::SynthesizedUnitary,
    pub schedule: synth::RotationSchedule,
    pub report: String,
}

pub fn run_synth(code: &Code, kappa: f64) -> Result<SynthOutput> {
    synth::check_block_length(code.n())?;
    let states = ensembles::codeword_states(code, kappa)?;
    let srm = detection::square_root_measurement_for(&states, Some(code.priors()))?;
    let report = detection::check_optimality(&srm, &states, code.priors(), detection::DEFAULT_TOL)?;
    let (measurement, report) = if report.is_optimal {
        (srm, report)
    } else {
        let out = detection::bayes_cost_reduction(
            &states,
            code.priors(),
            &srm,
            detection::DEFAULT_TOL,
            detection::DEFAULT_MAX_SWEEPS,
        )?;
        (out.measurement, out.report)
    };
    let unitary = synth::synthesize_unitary(code, kappa, &measurement, None)?;
    let schedule = synth::reck_decompose(unitary.unitary())?;
    let kind = match measurement.kind() {
        MeasurementKind::SquareRoot => "square-root",
        _ => "optimized",
    };
    let mut text = String::new();
    let _ = writeln!(text, "n = {}", code.n());
    let _ = writeln!(text, "codewords = {}", code.len());
    let _ = writeln!(text, "kappa = {}", format_number(kappa));
    let _ = writeln!(text, "measurement = {kind}");
    let _ = writeln!(
        text,
        "certified_error = {}",
        format_number(report.error_probability)
    );
    let _ = writeln!(
        text,
        "unitary_error = {}",
        format_number(unitary.error_probability())
    );
    let _ = writeln!(
        text,
        "error_difference = {}",
        format_number((report.error_probability - unitary.error_probability()).abs())
    );
    let _ = writeln!(
        text,
        "orthogonality_residual = {}",
        format_number(unitary.orthogonality_residual())
    );
    let _ = writeln!(
        text,
        "reconstruction_residual = {}",
        format_number(schedule.to_matrix().max_abs_diff(unitary.unitary()))
    );
    let _ = writeln!(text, "rotations = {}", schedule.rotations.len());
    let _ = writeln!(text, "reflect_last = {}", schedule.reflect_last);
    Ok(SynthOutput {
        unitary,
        schedule,
        report: text,
    })
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let code = select_code(&args.code, args.n, args.r)?;
    let out = run_synth(&code, args.kappa)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let write = |name: &str, text: &str| {
        let path = args.out.join(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    write("unitary.txt", &out.unitary.to_text())?;
    write("schedule.csv", &out.schedule.to_csv())?;
    write("report.txt", &out.report)?;
    emit(&out.report, None)
}

/// `M d` on the first line, then `M` rows of `d` numbers; each row is normalized.
pub fn parse_states(text: &str) -> Result<StateEmbedding> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty states file".into()))?;
    let dims = parse_list::<usize>(
        "header",
        &header.split_whitespace().collect::<Vec<_>>().join(","),
    )?;
    let [m, d] = dims[..] else {
        return Err(Error::Parse(format!("header {header:?} should be `M d`")));
    };
    let mut rows = Vec::with_capacity(m);
    for line in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|s| parse_value("coordinate", s))
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::Parse(format!(
                "state row has {} entries, expected {d}",
                row.len()
            )));
        }
        let nrm = crate::linalg::norm(&row);
        if nrm == 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        rows.push(row.iter().map(|x| x / nrm).collect::<Vec<_>>());
    }
    if rows.len() != m {
        return Err(Error::Parse(format!(
            "expected {m} states, found {}",
            rows.len()
        )));
    }
    StateEmbedding::from_vectors(Matrix::from_rows(&rows)?)
}

pub fn run_optimize(
    states: &StateEmbedding,
    priors: &[f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<String> {
    let init: Measurement = detection::square_root_measurement_for(states, Some(priors))?;
    let initial = detection::check_optimality(&init, states, priors, tol)?;
    let out = match detection::bayes_cost_reduction(states, priors, &init, tol, max_sweeps) {
        Ok(out) => out,
        Err(Error::Unconverged { best, .. }) => *best,
        Err(e) => return Err(e),
    };
    let r = &out.report;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "initial_error = {}",
        format_number(initial.error_probability)
    );
    let _ = writeln!(text, "initial_optimal = {}", initial.is_optimal);
    let _ = writeln!(text, "final_error = {}", format_number(r.error_probability));
    let _ = writeln!(
        text,
        "improvement = {}",
        format_number(initial.error_probability - r.error_probability)
    );
    let _ = writeln!(text, "sweeps = {}", out.sweeps);
    let _ = writeln!(
        text,
        "cond_i_residual = {}",
        format_number(r.cond_i_residual)
    );
    let _ = writeln!(
        text,
        "cond_ii_min_eig = {}",
        format_number(r.cond_ii_min_eig)
    );
    let _ = writeln!(
        text,
        "upsilon_positive_definite = {}",
        r.upsilon_positive_definite
    );
    let _ = writeln!(text, "is_optimal = {}", r.is_optimal);
    Ok(text)
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let states = match (&args.states, args.kappa) {
        (Some(path), _) => {
            parse_states(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?
        }
        (None, Some(kappa)) => {
            let letters = ensembles::embed_binary_letters(kappa)?;
            StateEmbedding::from_vectors(Matrix::from_rows(&letters)?)?
        }
        (None, None) => return Err(Error::InvalidInput("give --states or --kappa".into())),
    };
    let priors = args
        .priors
        .clone()
        .unwrap_or_else(|| vec![1.0 / states.len() as f64; states.len()]);
    let text = run_optimize(&states, &priors, args.tol, args.max_sweeps)?;
    emit(&text, None)
}

pub fn run(cli: Cli) -> Result<()> {
    let (args, build): (&GridArgs, fn(&SweepConfig) -> Result<Table>) = match &cli.command {
        Command::Fig2(a) => (a, fig2_table),
        Command::Fig3(a) => (a, fig3_table),
        Command::Fig4(a) => (a, fig4_table),
        Command::Fig5(a) => (a, fig5_table),
        Command::Fig6(a) => (a, fig6_table),
        Command::Fig7(a) => (a, fig7_table),
        Command::Fig8(a) => (a, fig8_table),
        Command::Sweep(a) => (a, sweep_table),
        Command::Synth(a) => return cmd_synth(a),
        Command::Optimize(a) => return cmd_optimize(a),
    };
    let cfg = SweepConfig::default().resolve(args)?;
    let table = build(&cfg)?;
    emit(&table.render(cfg.format), cfg.output_path.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(-0.078869), "-0.078869");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(123456.789), "123456.789");
        assert_eq!(format_number(1.5e-9), "1.5e-9");
        assert_eq!(format_number(2.0e15), "2e15");
        assert_eq!(format_number(0.99999999999999), "1");
    }

    #[test]
    fn grid_and_validation() {
        let cfg = SweepConfig::default();
        let g = cfg.grid();
        assert_eq!(g.len(), 99);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[98] - 0.99).abs() < 1e-15);
        for bad in [
            (0.5, 0.4, 10),
            (-0.1, 0.5, 10),
            (0.1, 1.0, 10),
            (0.1, 0.5, 1),
        ] {
            let cfg = SweepConfig {
                kappa_min: bad.0,
                kappa_max: bad.1,
                kappa_steps: bad.2,
                ..Default::default()
            };
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn config_then_flags() {
        let mut cfg = SweepConfig::default();
        cfg.apply_config_text(
            "# grid\nkappa_min = 0.2\nsteps=5\nn=3,5\nformat=json\ncode=simplex\n",
        )
        .unwrap();
        assert_eq!(
            (cfg.kappa_min, cfg.kappa_steps, cfg.format),
            (0.2, 5, Format::Json)
        );
        assert_eq!(cfg.n_list, vec![3, 5]);
        assert_eq!(cfg.code_family, CodeFamily::Simplex);
        let args = GridArgs {
            steps: Some(7),
            ..Default::default()
        };
        cfg.apply_flags(&args);
        assert_eq!(cfg.kappa_steps, 7);
        assert!(cfg.apply_config_text("bogus=1").is_err());
        assert!(cfg.apply_config_text("steps=x").is_err());
        assert!(cfg.apply_config_text("no equals sign").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = Table {
            columns: vec!["a".into(), "b".into()],
            rows: vec![vec![Some(0.25), None], vec![Some(-1.5e-7), Some(3.0)]],
        };
        assert_eq!(Table::from_csv(&t.to_csv()).unwrap(), t);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert!(v["rows"][0][1].is_null());
        assert_eq!(v["rows"][1][1], 3.0);
    }

    #[test]
    fn zero_kappa_rows() {
        let cfg = SweepConfig {
            kappa_min: 0.0,
            kappa_max: 0.5,
            kappa_steps: 2,
            ..Default::default()
        };
        let t = fig5_table(&cfg).unwrap();
        assert!(t.rows[0][1..].iter().all(|c| c.unwrap().abs() < 1e-15));
        let t = fig2_table(&cfg).unwrap();
        for (name, n) in t.columns.iter().zip(0..).skip(1) {
            let bits: usize = name.trim_start_matches("gain_n").parse().unwrap();
            let want = if bits == 2 {
                -0.5
            } else {
                (bits as f64 - 1.0) / bits as f64 - 1.0
            };
            assert!((t.rows[0][n].unwrap() - want).abs() < 1e-12, "{name}");
        }
        let t = fig6_table(&cfg).unwrap();
        let row = &t.rows[0];
        assert_eq!(row[1], Some(1.0));
        assert_eq!(row[row.len() - 1], Some(1.0));
    }

    #[test]
    fn fig3_marks_missing_roots() {
        let cfg = SweepConfig {
            n_list: vec![2, 3],
            ..Default::default()
        };
        let t = fig3_table(&cfg).unwrap();
        assert_eq!(t.rows[0][1], None);
        assert!(t.rows[1][1].is_some());
        assert!(t.to_csv().contains("\n2,,"));
    }

    #[test]
    fn states_file() {
        let s = parse_states("2 2\n1 0\n3 4\n").unwrap();
        assert!((s.state(1)[1] - 0.8).abs() < 1e-15);
        assert!(parse_states("2 2\n1 0\n").is_err());
        assert!(parse_states("1 2\n1 0 0\n").is_err());
    }

    #[test]
    fn optimize_binary() {
        let letters = ensembles::embed_binary_letters(0.5).unwrap();
        let states = StateEmbedding::from_vectors(Matrix::from_rows(&letters).unwrap()).unwrap();
        let text = run_optimize(&states, &[0.5, 0.5], 1e-10, 100).unwrap();
        assert!(text.contains("initial_optimal = true"));
        assert!(text.contains("final_error = 0.0669872981078"));
        let text = run_optimize(&states, &[0.9, 0.1], 1e-10, 100).unwrap();
        assert!(text.contains("is_optimal = true"));
        let want = detection::binary_helstrom_error(0.5, 0.9);
        assert!(text.contains(&format!("final_error = {}", format_number(want))));
    }
}
