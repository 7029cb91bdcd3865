//! Run configuration: flags merged over an optional flat `key=value` file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thermoline_core::detector::{DetectorConfig, Geometry};
use thermoline_core::juttner::EnsembleParams;
use thermoline_core::monte_carlo::{BinSpec, SimulationSpec, WeightMode, DEFAULT_CHUNK_SIZE};
use thermoline_core::special_functions::MAX_ORDER;
use thermoline_core::spectrum::{linear_grid, SpectralKind};

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

const SPECTRUM_KEYS: &[&str] = &[
    "alpha",
    "kind",
    "x_min",
    "x_max",
    "points",
    "out",
    "log_density",
    "omega0",
    "intensity0",
];
const SAMPLE_KEYS: &[&str] = &["alpha", "n", "seed", "out"];
const SIMULATE_KEYS: &[&str] = &[
    "alpha",
    "mode",
    "n",
    "bins",
    "x_min",
    "x_max",
    "seed",
    "out",
    "omega0",
    "intensity0",
];
const SCAN_KEYS: &[&str] = &[
    "alpha", "xd", "gamma_d", "exponent", "v_min", "v_max", "v_points", "geometry", "out",
];
const MOMENTS_KEYS: &[&str] = &["alpha", "kind", "exponent"];
const TABLE_KEYS: &[&str] = &["order", "x", "scaled", "out"];
const VERIFY_KEYS: &[&str] = &["fast"];

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed `key=value` file. Keys are case-sensitive; `-` and `_` are
/// interchangeable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, Entry>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {line}: expected key=value, got '{content}'"
                ))
            })?;
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {line}: empty key")));
            }
            let entry = Entry {
                value: value.trim().to_string(),
                line,
            };
            if let Some(prev) = entries.insert(key.clone(), entry) {
                return Err(CliError::Usage(format!(
                    "config key '{key}' is set twice (lines {} and {line})",
                    prev.line
                )));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rejects keys that are unknown, or known but meaningless for `command`.
    fn check_keys(&self, command: &str, allowed: &[&str]) -> CliResult<()> {
        let all = [
            SPECTRUM_KEYS,
            SAMPLE_KEYS,
            SIMULATE_KEYS,
            SCAN_KEYS,
            MOMENTS_KEYS,
            TABLE_KEYS,
            VERIFY_KEYS,
        ];
        for (key, entry) in &self.entries {
            if allowed.contains(&key.as_str()) {
                continue;
            }
            return Err(if all.iter().any(|keys| keys.contains(&key.as_str())) {
                CliError::Usage(format!(
                    "config key '{key}' (line {}) does not apply to the {command} subcommand",
                    entry.line
                ))
            } else {
                CliError::Usage(format!("unknown config key '{key}' (line {})", entry.line))
            });
        }
        Ok(())
    }

    fn get<T>(&self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err| {
                CliError::Usage(format!(
                    "config key '{key}' (line {}): cannot parse '{}': {err}",
                    e.line, e.value
                ))
            }),
        }
    }

    fn flag(&self, key: &str, flag: bool) -> CliResult<bool> {
        if flag {
            return Ok(true);
        }
        match self.entries.get(key) {
            None => Ok(false),
            Some(e) => match e.value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(CliError::Usage(format!(
                    "config key '{key}' (line {}): expected true or false, got '{other}'",
                    e.line
                ))),
            },
        }
    }

    fn list(&self, key: &str, flag: &[f64]) -> CliResult<Vec<f64>> {
        if !flag.is_empty() {
            return Ok(flag.to_vec());
        }
        match self.entries.get(key) {
            None => Ok(Vec::new()),
            Some(e) => e
                .value
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|err| {
                        CliError::Usage(format!(
                            "config key '{key}' (line {}): cannot parse '{}': {err}",
                            e.line,
                            s.trim()
                        ))
                    })
                })
                .collect(),
        }
    }
}

fn parse_choice<T>(key: &str, value: Option<String>, default: T) -> CliResult<T>
where
    T: FromStr<Err = thermoline_core::Error>,
{
    match value {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|e: thermoline_core::Error| CliError::Usage(format!("{key}: {e}"))),
    }
}

fn required<T>(key: &str, value: Option<T>) -> CliResult<T> {
    value.ok_or_else(|| {
        CliError::Usage(format!(
            "missing required value '{key}' (pass --{} or set {key}= in the config file)",
            key.replace('_', "-")
        ))
    })
}

fn positive(key: &str, value: f64) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!(
            "{key} must be > 0 and finite (got {value})"
        )))
    }
}

fn at_least(key: &str, value: usize, min: usize) -> CliResult<usize> {
    if value >= min {
        Ok(value)
    } else {
        Err(CliError::Usage(format!(
            "{key} must be >= {min} (got {value})"
        )))
    }
}

fn alpha(file: &ConfigFile, flag: Option<f64>) -> CliResult<f64> {
    positive("alpha", required("alpha", file.get("alpha", flag)?)?)
}

/// Column rescaling into physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitScale {
    pub omega0: f64,
    pub intensity0: f64,
}

impl UnitScale {
    fn resolve(file: &ConfigFile, units: &crate::args::Units) -> CliResult<Self> {
        Ok(UnitScale {
            omega0: positive("omega0", file.get("omega0", units.omega0)?.unwrap_or(1.0))?,
            intensity0: positive(
                "intensity0",
                file.get("intensity0", units.intensity0)?.unwrap_or(1.0),
            )?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRun {
    pub params: EnsembleParams,
    pub kind: SpectralKind,
    pub grid: Vec<f64>,
    pub log_density: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRun {
    pub spec: SimulationSpec,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRun {
    pub alpha: f64,
    pub detector: DetectorConfig,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsRun {
    pub alpha: f64,
    pub kind: SpectralKind,
    pub exponent: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRun {
    pub order: u32,
    pub xs: Vec<f64>,
    pub scaled: bool,
    pub out: Option<PathBuf>,
}

/// Fully validated configuration of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Spectrum(SpectrumRun),
    Sample(SampleRun),
    Simulate(SimulateRun),
    Scan(ScanRun),
    Moments(MomentsRun),
    Table(TableRun),
    Verify { fast: bool },
}

/// Read the config file named on the command line, if any, and merge.
pub fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let file = match &cli.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    resolve(&cli.command, &file)
}

/// Merge `command`'s flags over `file` and validate.
pub fn resolve(command: &Command, file: &ConfigFile) -> CliResult<RunConfig> {
    match command {
        Command::Spectrum(a) => {
            file.check_keys("spectrum", SPECTRUM_KEYS)?;
            let alpha = alpha(file, a.alpha)?;
            let units = UnitScale::resolve(file, &a.units)?;
            let kind = parse_choice(
                "kind",
                file.get("kind", a.kind.clone())?,
                SpectralKind::Intensity,
            )?;
            let x_min = positive("x_min", file.get("x_min", a.x_min)?.unwrap_or(0.5))?;
            let x_max = positive("x_max", file.get("x_max", a.x_max)?.unwrap_or(2.5))?;
            let points = at_least("points", file.get("points", a.points)?.unwrap_or(500), 2)?;
            if !(x_min < x_max) {
                return Err(CliError::Usage(format!(
                    "x_min must be < x_max (got {x_min} and {x_max})"
                )));
            }
            Ok(RunConfig::Spectrum(SpectrumRun {
                params: EnsembleParams::new(alpha, units.omega0, units.intensity0)?,
                kind,
                grid: linear_grid(x_min, x_max, points)?,
                log_density: file.flag("log_density", a.log_density)?,
                out: file.get("out", a.out.clone())?,
            }))
        }
        Command::Sample(a) => {
            file.check_keys("sample", SAMPLE_KEYS)?;
            Ok(RunConfig::Sample(SampleRun {
                alpha: alpha(file, a.alpha)?,
                n: at_least("n", file.get("n", a.n)?.unwrap_or(10_000), 1)?,
                seed: file.get("seed", a.seed)?.unwrap_or(DEFAULT_SEED),
                out: file.get("out", a.out.clone())?,
            }))
        }
        Command::Simulate(a) => {
            file.check_keys("simulate", SIMULATE_KEYS)?;
            let alpha = alpha(file, a.alpha)?;
            let units = UnitScale::resolve(file, &a.units)?;
            let mode = parse_choice(
                "mode",
                file.get("mode", a.mode.clone())?,
                WeightMode::Intensity,
            )?;
            let bins = at_least("bins", file.get("bins", a.bins)?.unwrap_or(100), 1)?;
            let cover = BinSpec::covering(alpha, bins)?;
            let lo = file.get("x_min", a.x_min)?.unwrap_or(cover.lo);
            let hi = file.get("x_max", a.x_max)?.unwrap_or(cover.hi);
            if !(lo > 0.0 && lo < 1.0 && hi > 1.0 && hi.is_finite()) {
                return Err(CliError::Usage(format!(
                    "histogram range needs 0 < x_min < 1 < x_max (got {lo} and {hi})"
                )));
            }
            Ok(RunConfig::Simulate(SimulateRun {
                spec: SimulationSpec {
                    params: EnsembleParams::new(alpha, units.omega0, units.intensity0)?,
                    mode,
                    n_samples: at_least("n", file.get("n", a.n)?.unwrap_or(1_000_000), 1)?,
                    histogram: BinSpec { lo, hi, bins },
                    seed: file.get("seed", a.seed)?.unwrap_or(DEFAULT_SEED),
                    chunk_size: DEFAULT_CHUNK_SIZE,
                },
                out: file.get("out", a.out.clone())?,
            }))
        }
        Command::Scan(a) => {
            file.check_keys("scan", SCAN_KEYS)?;
            let alpha = alpha(file, a.alpha)?;
            let xd = positive("xd", file.get("xd", a.xd)?.unwrap_or(1.0))?;
            let gamma_d = positive("gamma_d", file.get("gamma_d", a.gamma_d)?.unwrap_or(1e-4))?;
            let v_min = file.get("v_min", a.v_min)?.unwrap_or(-0.6);
            let v_max = file.get("v_max", a.v_max)?.unwrap_or(0.6);
            let v_points = at_least(
                "v_points",
                file.get("v_points", a.v_points)?.unwrap_or(601),
                2,
            )?;
            if !(-1.0 < v_min && v_min < v_max && v_max < 1.0) {
                return Err(CliError::Usage(format!(
                    "drive range needs -1 < v_min < v_max < 1 (got {v_min} and {v_max})"
                )));
            }
            let geometry = parse_choice(
                "geometry",
                file.get("geometry", a.geometry.clone())?,
                Geometry::Detector,
            )?;
            let exponent = file.get("exponent", a.exponent)?.unwrap_or(4);
            let detector = DetectorConfig::new(xd, gamma_d, linear_grid(v_min, v_max, v_points)?)?
                .with_exponent(exponent)
                .with_geometry(geometry);
            Ok(RunConfig::Scan(ScanRun {
                alpha,
                detector,
                out: file.get("out", a.out.clone())?,
            }))
        }
        Command::Moments(a) => {
            file.check_keys("moments", MOMENTS_KEYS)?;
            Ok(RunConfig::Moments(MomentsRun {
                alpha: alpha(file, a.alpha)?,
                kind: parse_choice(
                    "kind",
                    file.get("kind", a.kind.clone())?,
                    SpectralKind::Intensity,
                )?,
                exponent: file.get("exponent", a.exponent)?.unwrap_or(0),
            }))
        }
        Command::Table(a) => {
            file.check_keys("table", TABLE_KEYS)?;
            let order = required("order", file.get("order", a.order)?)?;
            if order > MAX_ORDER {
                return Err(CliError::Usage(format!(
                    "order must be <= {MAX_ORDER} (got {order})"
                )));
            }
            let xs = file.list("x", &a.x)?;
            if xs.is_empty() {
                return Err(CliError::Usage(
                    "missing required value 'x' (pass --x or set x= in the config file)".into(),
                ));
            }
            for &x in &xs {
                positive("x", x)?;
            }
            Ok(RunConfig::Table(TableRun {
                order,
                xs,
                scaled: file.flag("scaled", a.scaled)?,
                out: file.get("out", a.out.clone())?,
            }))
        }
        Command::Verify(a) => {
            file.check_keys("verify", VERIFY_KEYS)?;
            Ok(RunConfig::Verify {
                fast: file.flag("fast", a.fast)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{SpectrumArgs, TableArgs};

    fn spectrum(alpha: Option<f64>) -> Command {
        Command::Spectrum(SpectrumArgs {
            alpha,
            ..Default::default()
        })
    }

    #[test]
    fn parses_comments_blank_lines_and_dashes() {
        let f = ConfigFile::parse("# header\n\nalpha = 10 # hot\nx-min=0.7\n").unwrap();
        let RunConfig::Spectrum(run) = resolve(&spectrum(None), &f).unwrap() else {
            panic!("wrong subcommand");
        };
        assert_eq!(run.params.alpha, 10.0);
        assert_eq!(run.grid[0], 0.7);
        assert_eq!(run.grid.len(), 500);
        assert_eq!(*run.grid.last().unwrap(), 2.5);
    }

    #[test]
    fn flags_override_file() {
        let f = ConfigFile::parse("alpha=10\n").unwrap();
        let RunConfig::Spectrum(run) = resolve(&spectrum(Some(20.0)), &f).unwrap() else {
            panic!("wrong subcommand");
        };
        assert_eq!(run.params.alpha, 20.0);
    }

    #[test]
    fn empty_file_takes_defaults() {
        let f = ConfigFile::parse("").unwrap();
        assert!(f.is_empty());
        let RunConfig::Spectrum(run) = resolve(&spectrum(Some(3.0)), &f).unwrap() else {
            panic!("wrong subcommand");
        };
        assert_eq!(run.kind, SpectralKind::Intensity);
        assert_eq!((run.params.omega0, run.params.intensity0), (1.0, 1.0));
        assert!(!run.log_density && run.out.is_none());
    }

    #[test]
    fn rejects_negative_alpha_with_bound() {
        let f = ConfigFile::parse("alpha=-1\n").unwrap();
        let msg = resolve(&spectrum(None), &f).unwrap_err().to_string();
        assert!(msg.contains("alpha") && msg.contains("> 0"), "{msg}");
    }

    #[test]
    fn unknown_and_misplaced_keys_are_named() {
        let f = ConfigFile::parse("alpha=1\ncolour=blue\n").unwrap();
        let msg = resolve(&spectrum(None), &f).unwrap_err().to_string();
        assert!(msg.contains("'colour'") && msg.contains("line 2"), "{msg}");
        let f = ConfigFile::parse("alpha=1\nbins=20\n").unwrap();
        let msg = resolve(&spectrum(None), &f).unwrap_err().to_string();
        assert!(msg.contains("'bins'") && msg.contains("spectrum"), "{msg}");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(ConfigFile::parse("alpha 10\n").is_err());
        assert!(ConfigFile::parse("=10\n").is_err());
        assert!(ConfigFile::parse("alpha=1\nalpha=2\n").is_err());
        let f = ConfigFile::parse("alpha=ten\n").unwrap();
        let msg = resolve(&spectrum(None), &f).unwrap_err().to_string();
        assert!(msg.contains("alpha") && msg.contains("ten"), "{msg}");
    }

    #[test]
    fn missing_alpha_is_reported() {
        let msg = resolve(&spectrum(None), &ConfigFile::default())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("alpha") && msg.contains("--alpha"), "{msg}");
    }

    #[test]
    fn table_list_from_file() {
        let f = ConfigFile::parse("order=2\nx=0.5, 1,4\nscaled=yes\n").unwrap();
        let cmd = Command::Table(TableArgs::default());
        let RunConfig::Table(run) = resolve(&cmd, &f).unwrap() else {
            panic!("wrong subcommand");
        };
        assert_eq!(run.xs, vec![0.5, 1.0, 4.0]);
        assert!(run.scaled);
        let f = ConfigFile::parse("order=9\nx=1\n").unwrap();
        assert!(resolve(&cmd, &f).is_err());
    }
}
