//! Cavity reflection and spin-induced damping.
//!
//! The one-port reflection coefficient is
//! `S11 = (i(w_p - w_0) - (g2 - g1)) / (i(w_p - w_0) - (g2 + g1))`
//! with `g1` the antenna-resonator and `g2` the resonator-reservoir
//! coupling rates. The spin-induced change in cavity damping, normalized
//! as `theta = gamma_s / g2`, follows
//! `theta = kappa / (1 + Delta^2 T2^2) * (1 + r P_zSO / P_zST) / (1 + r)`
//! with `r = T_1O^-1 / T_1T^-1`; inverting it recovers the optically
//! pumped polarization from a measured damping change.
//!
//! Reflection-curve fitting works on |S11|, which only determines the
//! pair {g1 + g2, |g1 - g2|}: with magnitude-only data the assignment of
//! g1 and g2 is ambiguous (reported over-coupled, `g1 >= g2`, and
//! flagged); complex data resolves it through the sign of S11 on
//! resonance.

use std::f64::consts::TAU;
use std::io::BufRead;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::simplex::{minimize, SimplexOptions};

/// Cavity mode frequency and coupling rates, rad/s.
#[derive(Debug, Clone, Copy)]
pub struct CavityParams {
    pub omega_0: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
}

impl CavityParams {
    /// Quality factor as omega_0 / (gamma_1 + gamma_2).
    pub fn q_rate_sum(&self) -> f64 {
        self.omega_0 / (self.gamma_1 + self.gamma_2)
    }

    /// Quality factor as omega_0 / (2 (gamma_1 + gamma_2)), the
    /// half-width-referenced convention.
    pub fn q_half_width(&self) -> f64 {
        self.omega_0 / (2.0 * (self.gamma_1 + self.gamma_2))
    }
}

/// Spin-ensemble coupling parameters entering the damping ratio.
#[derive(Debug, Clone, Copy)]
pub struct SpinCouplingParams {
    /// Cooperativity, dimensionless.
    pub kappa: f64,
    /// Cavity-spin detuning, rad/s.
    pub delta: f64,
    /// Transverse relaxation time, s.
    pub t2: f64,
    /// Pump-to-thermal rate ratio T_1O^-1 / T_1T^-1.
    pub rate_ratio: f64,
    /// Thermal-equilibrium polarization.
    pub p_z_st: f64,
    /// Optically pumped steady-state polarization.
    pub p_z_so: f64,
}

/// One-port reflection coefficient.
pub fn s11(omega_p: f64, c: &CavityParams) -> Complex64 {
    let detuning = Complex64::new(0.0, omega_p - c.omega_0);
    (detuning - (c.gamma_2 - c.gamma_1)) / (detuning - (c.gamma_2 + c.gamma_1))
}

/// Normalized spin-induced damping change.
pub fn vartheta(s: &SpinCouplingParams) -> f64 {
    let lorentz = 1.0 + s.delta * s.delta * s.t2 * s.t2;
    s.kappa / lorentz * (1.0 + s.rate_ratio * s.p_z_so / s.p_z_st) / (1.0 + s.rate_ratio)
}

/// Exact inversion of [`vartheta`] for P_zSO. Requires a nonzero rate
/// ratio (a pure-thermal measurement carries no pump information).
pub fn extract_polarization(
    vartheta_measured: f64,
    kappa: f64,
    delta: f64,
    t2: f64,
    rate_ratio: f64,
    p_z_st: f64,
) -> Result<f64> {
    if rate_ratio == 0.0 {
        return Err(Error::NotInvertible);
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cooperativity must be positive, got {kappa}"
        )));
    }
    if p_z_st == 0.0 {
        return Err(Error::InvalidArgument(
            "thermal polarization reference must be nonzero for inversion".into(),
        ));
    }
    let lorentz = 1.0 + delta * delta * t2 * t2;
    Ok(p_z_st * (vartheta_measured * lorentz * (1.0 + rate_ratio) / kappa - 1.0) / rate_ratio)
}

/// Reflection-sweep data: angular frequency plus complex S11 or |S11|.
#[derive(Debug, Clone)]
pub enum ReflectionData {
    Complex(Vec<(f64, Complex64)>),
    Magnitude(Vec<(f64, f64)>),
}

impl ReflectionData {
    fn magnitudes(&self) -> Vec<(f64, f64)> {
        match self {
            ReflectionData::Complex(v) => v.iter().map(|&(w, z)| (w, z.norm())).collect(),
            ReflectionData::Magnitude(v) => v.clone(),
        }
    }
}

/// Fitted cavity parameters.
#[derive(Debug, Clone, Copy)]
pub struct CavityFit {
    pub params: CavityParams,
    /// rms of the |S11| residuals.
    pub rms: f64,
    /// Magnitude-only input: the g1/g2 assignment is a convention
    /// (over-coupled), not a measurement.
    pub coupling_ambiguous: bool,
}

/// Least-squares fit of (omega_0, gamma_1, gamma_2) to a reflection
/// sweep. Needs at least 5 points spanning more than 4 (gamma_1 +
/// gamma_2); initialization places omega_0 at the |S11| minimum and takes
/// the widths from the half-power span.
pub fn fit_s11_curve(data: &ReflectionData) -> Result<CavityFit> {
    let mags = data.magnitudes();
    if mags.len() < 5 {
        return Err(Error::TooFewPoints {
            got: mags.len(),
            need: 5,
        });
    }
    let mut sorted = mags.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let (mut omega_min, mut mag_min) = sorted[0];
    for &(w, m) in &sorted {
        if m < mag_min {
            (omega_min, mag_min) = (w, m);
        }
    }
    // the model asymptotes to |S11| = 1, so the half-power threshold is
    // absolute; its crossings sit exactly at omega_0 +/- (g1+g2)
    let depth = mag_min.min(1.0);
    let threshold_sq = (1.0 + depth * depth) / 2.0;
    let below: Vec<f64> = sorted
        .iter()
        .filter(|&&(_, m)| m * m <= threshold_sq)
        .map(|&(w, _)| w)
        .collect();
    let width = match (below.first(), below.last()) {
        (Some(&lo), Some(&hi)) if hi > lo => hi - lo,
        _ => sorted[sorted.len() - 1].0 - sorted[0].0,
    };
    let gamma_sum0 = width / 2.0;
    let gamma_diff0 = depth * gamma_sum0;

    let span = sorted[sorted.len() - 1].0 - sorted[0].0;
    if span <= 4.0 * gamma_sum0 {
        return Err(Error::SpanTooNarrow {
            span,
            required: 4.0 * gamma_sum0,
        });
    }

    let residual_rms = |x: &[f64]| -> f64 {
        let c = CavityParams {
            omega_0: x[0],
            gamma_1: x[1].abs(),
            gamma_2: x[2].abs(),
        };
        let sum: f64 = mags
            .iter()
            .map(|&(w, m)| {
                let r = s11(w, &c).norm() - m;
                r * r
            })
            .sum();
        (sum / mags.len() as f64).sqrt()
    };

    let x0 = [
        omega_min,
        (gamma_sum0 + gamma_diff0) / 2.0,
        (gamma_sum0 - gamma_diff0) / 2.0,
    ];
    let step = [gamma_sum0 / 10.0; 3];
    let opts = SimplexOptions {
        max_iterations: 4000,
        f_tol: 0.0,
        x_tol: 1e-9,
    };
    let first = minimize(residual_rms, &x0, &step, &opts);
    let small_step = [gamma_sum0 / 1000.0; 3];
    let refined = minimize(residual_rms, &first.x, &small_step, &opts);

    // |S11| cannot order the couplings; adopt g1 >= g2 and let complex
    // data overrule through the on-resonance sign
    let (mut gamma_1, mut gamma_2) = (refined.x[1].abs(), refined.x[2].abs());
    if gamma_1 < gamma_2 {
        std::mem::swap(&mut gamma_1, &mut gamma_2);
    }
    let mut ambiguous = true;
    if let ReflectionData::Complex(samples) = data {
        let on_resonance = samples
            .iter()
            .min_by(|a, b| {
                (a.0 - refined.x[0])
                    .abs()
                    .partial_cmp(&(b.0 - refined.x[0]).abs())
                    .unwrap()
            })
            .expect("non-empty");
        // sign(Re S11(w0)) = sign(g2 - g1)
        if on_resonance.1.re > 0.0 {
            std::mem::swap(&mut gamma_1, &mut gamma_2);
        }
        ambiguous = false;
    }

    Ok(CavityFit {
        params: CavityParams {
            omega_0: refined.x[0],
            gamma_1,
            gamma_2,
        },
        rms: refined.fx,
        coupling_ambiguous: ambiguous,
    })
}

/// Read a reflection sweep CSV: header `f_hz,re_s11,im_s11` (complex) or
/// `f_hz,abs_s11` (magnitude). Frequencies are ordinary Hz.
pub fn read_reflection_csv(input: &mut impl BufRead) -> Result<ReflectionData> {
    let mut text = String::new();
    let mut line_no = 0usize;
    let mut complex_rows: Vec<(f64, Complex64)> = Vec::new();
    let mut magnitude_rows: Vec<(f64, f64)> = Vec::new();
    let mut is_complex = false;
    loop {
        text.clear();
        if input
            .read_line(&mut text)
            .map_err(|e| Error::InvalidArgument(format!("read error: {e}")))?
            == 0
        {
            break;
        }
        line_no += 1;
        let row = text.trim_end_matches(['\n', '\r']);
        if line_no == 1 {
            is_complex = match row {
                "f_hz,re_s11,im_s11" => true,
                "f_hz,abs_s11" => false,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "line 1: expected header `f_hz,re_s11,im_s11` or `f_hz,abs_s11`, got `{row}`"
                    )))
                }
            };
            continue;
        }
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let expected = if is_complex { 3 } else { 2 };
        if fields.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "line {line_no}: expected {expected} fields, got {}",
                fields.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("line {line_no}: bad number `{s}`")))
        };
        let omega = TAU * parse_f(fields[0])?;
        if is_complex {
            complex_rows.push((
                omega,
                Complex64::new(parse_f(fields[1])?, parse_f(fields[2])?),
            ));
        } else {
            magnitude_rows.push((omega, parse_f(fields[1])?));
        }
    }
    Ok(if is_complex {
        ReflectionData::Complex(complex_rows)
    } else {
        ReflectionData::Magnitude(magnitude_rows)
    })
}
