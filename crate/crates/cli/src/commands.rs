use std::io::Write;
use std::path::Path;

use thermoline_core::detector::doppler_scan;
use thermoline_core::juttner::sample_emission_chunked;
use thermoline_core::monte_carlo::{simulate_spectrum, DEFAULT_CHUNK_SIZE};
use thermoline_core::special_functions::{bessel_k, bessel_k_scaled};
use thermoline_core::spectrum::{
    line_center, spectral_moment, spectral_moment_quadrature, spectral_variance,
    spectral_variance_quadrature, tabulate, SpectralKind,
};

use crate::config::{
    MomentsRun, RunConfig, SampleRun, ScanRun, SimulateRun, SpectrumRun, TableRun,
};
use crate::error::{CliError, CliResult, EXIT_FAILURE, EXIT_OK};
use crate::render::{histogram_csv, real, samples_csv, scan_csv, spectrum_csv, table_csv};
use crate::verify;

/// Write `text` to `path`, or to standard output when `path` is `None`.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn spectrum_artifact(run: &SpectrumRun) -> CliResult<String> {
    let s = tabulate(run.params, run.kind, &run.grid)?;
    Ok(spectrum_csv(&s, run.log_density))
}

fn spectrum(run: &SpectrumRun) -> CliResult<()> {
    emit(run.out.as_deref(), &spectrum_artifact(run)?)
}

fn sample(run: &SampleRun) -> CliResult<()> {
    let s = sample_emission_chunked(run.alpha, run.n, run.seed, DEFAULT_CHUNK_SIZE)?;
    emit(run.out.as_deref(), &samples_csv(&s))
}

fn simulate(run: &SimulateRun) -> CliResult<()> {
    let r = simulate_spectrum(&run.spec)?;
    let p = run.spec.params;
    emit(
        run.out.as_deref(),
        &histogram_csv(&r, run.spec.mode, p.omega0, p.intensity0),
    )?;
    eprintln!(
        "mean x = {} +/- {}; effective sample size {:.1}",
        real(r.mean_x),
        real(r.mean_x_error),
        r.effective_sample_size
    );
    Ok(())
}

fn scan(run: &ScanRun) -> CliResult<()> {
    let c = doppler_scan(run.alpha, &run.detector)?;
    emit(run.out.as_deref(), &scan_csv(&c))?;
    eprintln!(
        "centroid v/c = {}; centroid frequency ratio = {}",
        real(c.centroid_velocity),
        real(c.centroid_frequency_ratio)
    );
    Ok(())
}

fn moments(run: &MomentsRun) -> CliResult<()> {
    let (a, k, p) = (run.alpha, run.kind, run.exponent);
    let mut lines = vec![
        format!("alpha = {}", real(a)),
        format!("kind = {}", k.name()),
        format!("weight_exponent = {p}"),
        format!("mean = {}", real(spectral_moment(a, k, p, 1)?)),
        format!(
            "mean_quadrature = {}",
            real(spectral_moment_quadrature(a, k, p, 1)?)
        ),
        format!("variance = {}", real(spectral_variance(a, k, p)?)),
        format!(
            "variance_quadrature = {}",
            real(spectral_variance_quadrature(a, k, p)?)
        ),
    ];
    if k == SpectralKind::Intensity {
        lines.push(format!("line_center = {}", real(line_center(a)?)));
    }
    emit(None, &(lines.join("\n") + "\n"))
}

fn table(run: &TableRun) -> CliResult<()> {
    let values = run
        .xs
        .iter()
        .map(|&x| {
            if run.scaled {
                bessel_k_scaled(run.order, x)
            } else {
                bessel_k(run.order, x)
            }
        })
        .collect::<thermoline_core::Result<Vec<_>>>()?;
    emit(
        run.out.as_deref(),
        &table_csv(run.order, &run.xs, &values, run.scaled),
    )
}

/// Execute a validated configuration and return the process exit code.
pub fn run(config: &RunConfig) -> CliResult<i32> {
    match config {
        RunConfig::Spectrum(r) => spectrum(r)?,
        RunConfig::Sample(r) => sample(r)?,
        RunConfig::Simulate(r) => simulate(r)?,
        RunConfig::Scan(r) => scan(r)?,
        RunConfig::Moments(r) => moments(r)?,
        RunConfig::Table(r) => table(r)?,
        RunConfig::Verify { fast } => {
            let checks = verify::run_all(*fast, None, |c| println!("{c}"));
            let failed = checks.iter().filter(|c| !c.ok()).count();
            println!(
                "{} of {} checks passed{}",
                checks.iter().filter(|c| c.passed == Some(true)).count(),
                checks.len(),
                if failed > 0 {
                    format!(", {failed} failed")
                } else {
                    String::new()
                }
            );
            return Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE });
        }
    }
    Ok(EXIT_OK)
}
