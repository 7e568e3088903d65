//! Command-line front end: flag parsing, sweep execution and CSV/JSON
//! output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::channel::ChannelModel;
use crate::framing::{FecScheme, FrameConfig};
use crate::sim::{self, BerPolicy, DecoderKind, MetricsRow, Scheme, SimConfig};

pub const CSV_HEADER: &str = "scheme,snr_db,ber,se,avg_rounds,abandon_rate,frames,seed";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("{0}")]
    Range(String),
    #[error("simulation failed: {0}")]
    Sim(#[from] sim::SimError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => EXIT_OK,
            CliError::Usage(_) | CliError::Range(_) => EXIT_USAGE,
            CliError::Sim(_) | CliError::Io { .. } => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Type1,
    Cc,
    #[value(name = "n-cc")]
    NCc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Threshold,
    Bitlevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Awgn,
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FecArg {
    None,
    Rep3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    /// `None` writes to standard output.
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Link-level simulator for non-orthogonal HARQ with chase combining.
#[derive(Debug, Parser)]
#[command(name = "nharq-sim", version)]
struct Args {
    #[arg(long, value_enum, default_value = "n-cc")]
    scheme: SchemeArg,
    /// SNR grid in dB as `start:stop:step`, or a single value.
    #[arg(long, default_value = "4:14:1", allow_hyphen_values = true)]
    snr: String,
    /// Power fraction of the old packet in a superposed round.
    #[arg(long, default_value_t = 0.2)]
    alpha2: f64,
    #[arg(long, default_value_t = 3)]
    max_rounds: u32,
    /// Counted messages per SNR point.
    #[arg(long, default_value_t = 1757)]
    frames: u64,
    #[arg(long, value_enum, default_value = "threshold")]
    decoder: DecoderArg,
    #[arg(long, value_enum, default_value = "awgn")]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value = "none")]
    fec: FecArg,
    /// Code rate used for the decoder threshold and the SE normalization.
    #[arg(long)]
    rate_override: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Decode the old packet with a constant amplitude over its window.
    #[arg(long = "eq7-constant-amplitude")]
    constant_old_amplitude: bool,
    /// Score BER over delivered frames only.
    #[arg(long)]
    ber_exclude_abandoned: bool,
}

/// Expands `start:stop:step` (stop included when it lands on the grid) or
/// a single value.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Range(format!("--snr expects start:stop:step or a single value, got `{text}`"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    if parts.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    match parts[..] {
        [single] => Ok(vec![single]),
        [start, stop, step] => {
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(CliError::Range(format!(
                    "--snr needs step > 0 and stop >= start, got `{text}`"
                )));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<(SimConfig, OutputSpec), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    if !(args.alpha2 > 0.0 && args.alpha2 < 0.5) {
        return Err(CliError::Range(format!(
            "--alpha2 {} out of range: must lie in (0, 0.5) so the old packet never out-powers the new one",
            args.alpha2
        )));
    }
    let cfg = SimConfig {
        scheme: match args.scheme {
            SchemeArg::Type1 => Scheme::Type1,
            SchemeArg::Cc => Scheme::HarqCc,
            SchemeArg::NCc => Scheme::NharqCc,
        },
        snr_db_grid: parse_snr_grid(&args.snr)?,
        alpha2: args.alpha2,
        max_rounds: args.max_rounds,
        frames: args.frames,
        decoder: match args.decoder {
            DecoderArg::Threshold => DecoderKind::Threshold,
            DecoderArg::Bitlevel => DecoderKind::BitLevel,
        },
        channel: match args.channel {
            ChannelArg::Awgn => ChannelModel::awgn(),
            ChannelArg::Rayleigh => ChannelModel::rayleigh(),
        },
        frame_cfg: FrameConfig {
            fec: match args.fec {
                FecArg::None => FecScheme::Identity,
                FecArg::Rep3 => FecScheme::Repetition3,
            },
            ..FrameConfig::default()
        },
        seed: args.seed,
        code_rate_override: args.rate_override,
        constant_old_amplitude: args.constant_old_amplitude,
        ber_policy: if args.ber_exclude_abandoned {
            BerPolicy::ExcludeAbandoned
        } else {
            BerPolicy::CountAbandoned
        },
    };
    cfg.validate().map_err(|e| CliError::Range(e.to_string()))?;
    let out = OutputSpec {
        path: (args.out != "-").then(|| PathBuf::from(&args.out)),
        format: args.format,
    };
    Ok((cfg, out))
}

/// Formats like C's `%.10g`.
pub fn format_sig10(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row_fields(row: &MetricsRow) -> [(&'static str, String); 8] {
    [
        ("scheme", row.scheme.to_string()),
        ("snr_db", format_sig10(row.snr_db)),
        ("ber", format_sig10(row.ber)),
        ("se", format_sig10(row.se)),
        ("avg_rounds", format_sig10(row.avg_rounds)),
        ("abandon_rate", format_sig10(row.abandon_rate)),
        ("frames", row.frames.to_string()),
        ("seed", row.seed.to_string()),
    ]
}

pub fn render_csv(rows: &[MetricsRow]) -> String {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for row in rows {
        let fields: Vec<String> = row_fields(row).into_iter().map(|(_, v)| v).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    text
}

/// Same keys and the same rounded values as the CSV.
pub fn render_json(rows: &[MetricsRow]) -> String {
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (key, text) in row_fields(row) {
                let value = match key {
                    "scheme" => Value::String(text),
                    "frames" | "seed" => Value::Number(text.parse::<u64>().expect("integer").into()),
                    _ => text
                        .parse::<f64>()
                        .ok()
                        .and_then(Number::from_f64)
                        .map_or(Value::Null, Value::Number),
                };
                obj.insert(key.to_string(), value);
            }
            Value::Object(obj)
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&array).expect("metrics serialize");
    text.push('\n');
    text
}

pub fn render(rows: &[MetricsRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows),
    }
}

pub fn emit(rows: &[MetricsRow], spec: &OutputSpec) -> Result<(), CliError> {
    let text = render(rows, spec.format);
    match &spec.path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
        Some(path) => File::create(path)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            }),
    }
}

/// Parses `argv`, runs the sweep and writes the rows; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_args(argv).and_then(|(cfg, out)| {
        let rows = sim::sweep(&cfg)?;
        emit(&rows, &out)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e @ CliError::Usage(_)) => {
            if let CliError::Usage(inner) = &e {
                let _ = inner.print();
            }
            e.exit_code()
        }
        Err(e) => {
            eprintln!("nharq-sim: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> MetricsRow {
        MetricsRow {
            scheme: Scheme::NharqCc,
            snr_db: 7.0,
            ber: 0.012345678912345,
            se: 1.0 / 3.0,
            avg_rounds: 1.25,
            abandon_rate: 0.0,
            frames: 1757,
            seed: 7,
        }
    }

    #[test]
    fn documented_example_parses() {
        let argv = "nharq-sim --scheme n-cc --alpha2 0.2 --snr 4:14:1 --frames 1757 --seed 7";
        let (cfg, out) = parse_args(argv.split(' ')).unwrap();
        assert_eq!(cfg.scheme, Scheme::NharqCc);
        assert_eq!(cfg.snr_db_grid.len(), 11);
        assert_eq!(cfg.seed, 7);
        assert_eq!(out.path, None);
    }

    #[test]
    fn defaults_without_flags() {
        let (cfg, out) = parse_args(["nharq-sim"]).unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(out.format, OutputFormat::Csv);
    }

    #[test]
    fn alpha2_above_half_is_a_range_error() {
        let err = parse_args(["nharq-sim", "--alpha2", "0.6"]).unwrap_err();
        assert!(matches!(err, CliError::Range(_)));
        assert!(err.to_string().contains("out-powers"));
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let err = parse_args(["nharq-sim", "--bogus"]).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn snr_grid_forms() {
        assert_eq!(parse_snr_grid("4:14:1").unwrap().len(), 11);
        assert_eq!(parse_snr_grid("0:1:0.3").unwrap().len(), 4);
        assert_eq!(parse_snr_grid("0:0.9:0.3").unwrap().len(), 4);
        assert_eq!(parse_snr_grid("-30").unwrap(), vec![-30.0]);
        assert_eq!(parse_snr_grid("-4:-2:1").unwrap(), vec![-4.0, -3.0, -2.0]);
        assert!(parse_snr_grid("4:2:1").is_err());
        assert!(parse_snr_grid("4:14:0").is_err());
        assert!(parse_snr_grid("a:b").is_err());
    }

    #[test]
    fn sig10_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.3333333333"),
            (200.0 / 280.0, "0.7142857143"),
            (1e-5, "1e-05"),
            (1.5e-7, "1.5e-07"),
            (123456789012.0, "1.23456789e+11"),
            (0.0001234, "0.0001234"),
            (9999999999.5, "1e+10"),
            (-2.5, "-2.5"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig10(x), want, "{x}");
        }
    }

    #[test]
    fn one_row_is_two_csv_lines() {
        let text = render_csv(&[row()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, [CSV_HEADER, "n-cc,7,0.01234567891,0.3333333333,1.25,0,1757,7"]);
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(render_csv(&[]), format!("{CSV_HEADER}\n"));
        assert_eq!(render_json(&[]).trim(), "[]");
    }

    #[test]
    fn csv_and_json_agree_field_for_field() {
        let rows = [row()];
        let csv = render_csv(&rows);
        let json: Vec<Value> = serde_json::from_str(&render_json(&rows)).unwrap();
        let values: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let obj = json[0].as_object().unwrap();
        for (key, text) in CSV_HEADER.split(',').zip(values) {
            match &obj[key] {
                Value::String(s) => assert_eq!(s, text),
                Value::Number(n) => assert_eq!(n.as_f64().unwrap(), text.parse::<f64>().unwrap(), "{key}"),
                other => panic!("{key}: {other:?}"),
            }
        }
    }
}
