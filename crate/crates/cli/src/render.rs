//! CSV emission. Every real is written with 17 significant digits so the
//! text round-trips to the same `f64`.

use std::fmt::Write;

use thermoline_core::detector::ScanCurve;
use thermoline_core::juttner::EmissionSample;
use thermoline_core::monte_carlo::{SimulationResult, WeightMode};
use thermoline_core::spectrum::{SpectralDensity, SpectralKind};

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&real(*v));
    }
    out.push('\n');
}

/// `x,density[,log_density]`, rescaled by the ensemble's units.
pub fn spectrum_csv(s: &SpectralDensity, log_density: bool) -> String {
    let omega0 = s.params.omega0;
    let scale = match s.kind {
        SpectralKind::Intensity => s.params.intensity0 / omega0,
        SpectralKind::Counting => 1.0 / omega0,
    };
    let ln_scale = scale.ln();
    let mut out = String::from(if log_density {
        "x,density,log_density\n"
    } else {
        "x,density\n"
    });
    for p in &s.points {
        if log_density {
            row(
                &mut out,
                &[p.x * omega0, p.density * scale, p.ln_density + ln_scale],
            );
        } else {
            row(&mut out, &[p.x * omega0, p.density * scale]);
        }
    }
    out
}

/// `x_lo,x_hi,weight,weight_err`: summed event weight per bin divided by the
/// number of events, with its standard error.
pub fn histogram_csv(
    r: &SimulationResult,
    mode: WeightMode,
    omega0: f64,
    intensity0: f64,
) -> String {
    let h = &r.histogram;
    let n = r.n_samples as f64;
    let w_scale = match mode {
        WeightMode::Intensity => intensity0,
        WeightMode::Counting | WeightMode::Unweighted => 1.0,
    };
    let mut out = String::from("x_lo,x_hi,weight,weight_err\n");
    let edges = h.edges();
    for i in 0..h.bins() {
        let mean = h.weighted_counts()[i] / n;
        let var = ((h.sum_sq_weights()[i] / n - mean * mean) / n).max(0.0);
        row(
            &mut out,
            &[
                edges[i] * omega0,
                edges[i + 1] * omega0,
                mean * w_scale,
                var.sqrt() * w_scale,
            ],
        );
    }
    out
}

/// `v_over_c,count_rate`.
pub fn scan_csv(c: &ScanCurve) -> String {
    let mut out = String::from("v_over_c,count_rate\n");
    for (v, r) in c.drive_velocities.iter().zip(&c.count_rate) {
        row(&mut out, &[*v, *r]);
    }
    out
}

/// `beta,cos_theta`.
pub fn samples_csv(s: &[EmissionSample]) -> String {
    let mut out = String::with_capacity(48 * (s.len() + 1));
    out.push_str("beta,cos_theta\n");
    for e in s {
        row(&mut out, &[e.beta, e.cos_theta]);
    }
    out
}

/// `x,k_n` or `x,k_n_scaled`.
pub fn table_csv(order: u32, xs: &[f64], values: &[f64], scaled: bool) -> String {
    let mut out = String::new();
    let suffix = if scaled { "_scaled" } else { "" };
    let _ = writeln!(out, "x,k_{order}{suffix}");
    for (x, v) in xs.iter().zip(values) {
        row(&mut out, &[*x, *v]);
    }
    out
}

/// Parse a CSV produced by this module: header names and numeric rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty CSV")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| format!("row {}: '{s}': {e}", i + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != header.len() {
            return Err(format!(
                "row {} has {} columns, header has {}",
                i + 1,
                row.len(),
                header.len()
            ));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            1e-300,
            5e-324,
            1.7976931348623157e308,
            -2.5,
            0.0,
        ] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(parse_csv("a,b\n1,2\n3\n").is_err());
        let (h, rows) = parse_csv("a,b\n1,2\n").unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(rows, vec![vec![1.0, 2.0]]);
    }
}
