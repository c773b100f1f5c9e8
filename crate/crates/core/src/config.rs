//! Run configuration: flat `key = value` text with `#` comments and
//! dotted section prefixes (for example `nv.D_ghz = 2.88`).
//!
//! Parsing is strict: unknown keys, malformed lines and out-of-range
//! values fail with the offending line number. All frequencies in the
//! file are ordinary frequencies (Hz/MHz/GHz according to the key
//! suffix); conversion to angular frequency happens in the accessors.
//! Defaults reproduce the reference parameter set used throughout the
//! crate.

use std::f64::consts::TAU;
use std::fmt;

use crate::hamiltonians::{C13Params, FieldConfig, NvParams, P1Params};
use crate::linalg::Vec3;
use crate::spectra::{DefectParams, SweepGrid};
use crate::{cavity::CavityParams, dynamics::RateParams};

/// Parse failure with the source line number.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Physical constants block (CODATA values by default).
#[derive(Debug, Clone, Copy)]
pub struct ConstantsBlock {
    pub hbar: f64,
    pub kb: f64,
    pub h: f64,
    pub c: f64,
    pub mu0: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NvBlock {
    pub d_ghz: f64,
    pub e_mhz: f64,
    pub gamma_e_ghz_per_t: f64,
    pub strain_azimuth_deg: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct C13Block {
    pub a_par_mhz: f64,
    pub a_perp_mhz: f64,
    pub n_c: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct P1Block {
    pub gamma_n_mhz_per_t: f64,
    pub q_mhz: f64,
    pub a_par_mhz: f64,
    pub a_perp_mhz: f64,
    pub n_p: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct OrientationBlock {
    pub b_mt: f64,
    pub theta_ma_deg: f64,
    pub phi_ma_deg: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepBlock {
    pub b_start_mt: f64,
    pub b_stop_mt: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct MapBlock {
    pub linewidth_mhz: f64,
    pub f_start_ghz: f64,
    pub f_stop_ghz: f64,
    pub n_f: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FitBlock {
    pub initial_theta_deg: f64,
    pub initial_phi_deg: f64,
    pub max_iterations: usize,
}

/// OISP target polarization: an explicit value, or sign selected by the
/// working field relative to the aligned level-anticrossing field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PzONv {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct RatesBlock {
    pub ti_p1_hz: f64,
    pub tt_p1_hz: f64,
    pub td_p1_hz: f64,
    pub ti_nv_hz: f64,
    pub t1t_nv_hz: f64,
    pub to_nv_hz: f64,
    pub f_p1_ghz: f64,
    pub f_nv_ghz: f64,
    pub temperature_k: f64,
    pub pz_o_nv: PzONv,
    pub t1o_start_hz: f64,
    pub t1o_stop_hz: f64,
    pub sweep_points: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct CavityBlock {
    pub f0_ghz: f64,
    pub gamma1_mhz: f64,
    pub gamma2_mhz: f64,
    pub span_mhz: f64,
    pub n_points: usize,
    pub kappa: f64,
    pub delta_hz: f64,
    pub t2_s: f64,
    pub pz_st: f64,
}

/// Full run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub constants: ConstantsBlock,
    pub nv: NvBlock,
    pub c13: C13Block,
    pub p1: P1Block,
    pub orientation: OrientationBlock,
    pub sweep: SweepBlock,
    pub map: MapBlock,
    pub fit: FitBlock,
    pub rates: RatesBlock,
    pub cavity: CavityBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            constants: ConstantsBlock {
                hbar: crate::constants::HBAR,
                kb: crate::constants::KB,
                h: crate::constants::H,
                c: crate::constants::C,
                mu0: crate::constants::MU0,
            },
            nv: NvBlock {
                d_ghz: 2.88,
                e_mhz: 10.0,
                gamma_e_ghz_per_t: 28.03,
                strain_azimuth_deg: 0.0,
            },
            c13: C13Block {
                a_par_mhz: 199.7,
                a_perp_mhz: 120.3,
                n_c: [2.0 * std::f64::consts::SQRT_2 / 3.0, 0.0, -1.0 / 3.0],
            },
            p1: P1Block {
                gamma_n_mhz_per_t: 3.0766,
                q_mhz: -3.97,
                a_par_mhz: 114.0,
                a_perp_mhz: 81.3,
                n_p: [0.0, 0.0, 1.0],
            },
            orientation: OrientationBlock {
                b_mt: 50.0,
                theta_ma_deg: -4.0,
                phi_ma_deg: 95.0,
            },
            sweep: SweepBlock {
                b_start_mt: 0.0,
                b_stop_mt: 150.0,
                n_points: 1000,
            },
            map: MapBlock {
                linewidth_mhz: 10.0,
                f_start_ghz: 0.0,
                f_stop_ghz: 5.0,
                n_f: 500,
            },
            fit: FitBlock {
                initial_theta_deg: 0.0,
                initial_phi_deg: 90.0,
                max_iterations: 2000,
            },
            rates: RatesBlock {
                ti_p1_hz: 40.0,
                tt_p1_hz: 8.0,
                td_p1_hz: 0.0,
                ti_nv_hz: 5.0,
                t1t_nv_hz: 25.0,
                to_nv_hz: 0.0,
                f_p1_ghz: 1.464,
                f_nv_ghz: 1.464,
                temperature_k: 3.6,
                pz_o_nv: PzONv::Auto,
                t1o_start_hz: 0.0,
                t1o_stop_hz: 500.0,
                sweep_points: 101,
            },
            cavity: CavityBlock {
                f0_ghz: 1.464,
                gamma1_mhz: 1.15,
                gamma2_mhz: 0.62,
                span_mhz: 15.0,
                n_points: 401,
                kappa: 0.1,
                delta_hz: 0.0,
                t2_s: 1e-5,
                pz_st: -9.7e-3,
            },
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

impl RunConfig {
    /// Parse config text over the defaults. Later assignments override
    /// earlier ones; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let value = value.trim();
            cfg.assign(key, value, line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn assign(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let number = |value: &str| -> Result<f64, ConfigError> {
            value
                .parse::<f64>()
                .map_err(|_| err(line, format!("`{value}` is not a number")))
        };
        let count = |value: &str| -> Result<usize, ConfigError> {
            value
                .parse::<usize>()
                .map_err(|_| err(line, format!("`{value}` is not a positive integer")))
        };
        let non_negative = |value: &str| -> Result<f64, ConfigError> {
            let x = number(value)?;
            if x < 0.0 {
                return Err(err(line, format!("`{key}` must be non-negative, got {x}")));
            }
            Ok(x)
        };
        let positive = |value: &str| -> Result<f64, ConfigError> {
            let x = number(value)?;
            if x <= 0.0 {
                return Err(err(line, format!("`{key}` must be positive, got {x}")));
            }
            Ok(x)
        };

        match key {
            "constants.hbar" => self.constants.hbar = positive(value)?,
            "constants.kb" => self.constants.kb = positive(value)?,
            "constants.h" => self.constants.h = positive(value)?,
            "constants.c" => self.constants.c = positive(value)?,
            "constants.mu0" => self.constants.mu0 = positive(value)?,

            "nv.D_ghz" => self.nv.d_ghz = positive(value)?,
            "nv.E_mhz" => self.nv.e_mhz = non_negative(value)?,
            "nv.gamma_e_ghz_per_t" => self.nv.gamma_e_ghz_per_t = positive(value)?,
            "nv.strain_azimuth_deg" => self.nv.strain_azimuth_deg = number(value)?,

            "c13.A_par_mhz" => self.c13.a_par_mhz = number(value)?,
            "c13.A_perp_mhz" => self.c13.a_perp_mhz = number(value)?,
            "c13.n_c_x" => self.c13.n_c[0] = number(value)?,
            "c13.n_c_y" => self.c13.n_c[1] = number(value)?,
            "c13.n_c_z" => self.c13.n_c[2] = number(value)?,

            "p1.gamma_n_mhz_per_t" => self.p1.gamma_n_mhz_per_t = number(value)?,
            "p1.Q_mhz" => self.p1.q_mhz = number(value)?,
            "p1.A_par_mhz" => self.p1.a_par_mhz = number(value)?,
            "p1.A_perp_mhz" => self.p1.a_perp_mhz = number(value)?,
            "p1.n_p_x" => self.p1.n_p[0] = number(value)?,
            "p1.n_p_y" => self.p1.n_p[1] = number(value)?,
            "p1.n_p_z" => self.p1.n_p[2] = number(value)?,

            "orientation.b_mt" => self.orientation.b_mt = non_negative(value)?,
            "orientation.theta_ma_deg" => self.orientation.theta_ma_deg = number(value)?,
            "orientation.phi_ma_deg" => self.orientation.phi_ma_deg = number(value)?,

            "sweep.b_start_mt" => self.sweep.b_start_mt = non_negative(value)?,
            "sweep.b_stop_mt" => self.sweep.b_stop_mt = non_negative(value)?,
            "sweep.n_points" => self.sweep.n_points = count(value)?,

            "map.linewidth_mhz" => self.map.linewidth_mhz = positive(value)?,
            "map.f_start_ghz" => self.map.f_start_ghz = non_negative(value)?,
            "map.f_stop_ghz" => self.map.f_stop_ghz = non_negative(value)?,
            "map.n_f" => self.map.n_f = count(value)?,

            "fit.initial_theta_deg" => self.fit.initial_theta_deg = number(value)?,
            "fit.initial_phi_deg" => self.fit.initial_phi_deg = number(value)?,
            "fit.max_iterations" => self.fit.max_iterations = count(value)?,

            "rates.TI_P1_hz" => self.rates.ti_p1_hz = non_negative(value)?,
            "rates.TT_P1_hz" => self.rates.tt_p1_hz = non_negative(value)?,
            "rates.Td_P1_hz" => self.rates.td_p1_hz = non_negative(value)?,
            "rates.TI_NV_hz" => self.rates.ti_nv_hz = non_negative(value)?,
            "rates.T1T_NV_hz" => self.rates.t1t_nv_hz = non_negative(value)?,
            "rates.TO_NV_hz" => self.rates.to_nv_hz = non_negative(value)?,
            "rates.f_P1_ghz" => self.rates.f_p1_ghz = positive(value)?,
            "rates.f_NV_ghz" => self.rates.f_nv_ghz = positive(value)?,
            "rates.temperature_k" => self.rates.temperature_k = positive(value)?,
            "rates.Pz_O_NV" => {
                self.rates.pz_o_nv = if value == "auto" {
                    PzONv::Auto
                } else {
                    let x = number(value)?;
                    if x.abs() > 1.0 {
                        return Err(err(line, format!("`{key}` must lie in [-1, 1], got {x}")));
                    }
                    PzONv::Value(x)
                }
            }
            "rates.T1O_start_hz" => self.rates.t1o_start_hz = non_negative(value)?,
            "rates.T1O_stop_hz" => self.rates.t1o_stop_hz = non_negative(value)?,
            "rates.sweep_points" => self.rates.sweep_points = count(value)?,

            "cavity.f0_ghz" => self.cavity.f0_ghz = positive(value)?,
            "cavity.gamma1_mhz" => self.cavity.gamma1_mhz = positive(value)?,
            "cavity.gamma2_mhz" => self.cavity.gamma2_mhz = positive(value)?,
            "cavity.span_mhz" => self.cavity.span_mhz = positive(value)?,
            "cavity.n_points" => self.cavity.n_points = count(value)?,
            "cavity.kappa" => self.cavity.kappa = non_negative(value)?,
            "cavity.delta_hz" => self.cavity.delta_hz = number(value)?,
            "cavity.T2_s" => self.cavity.t2_s = positive(value)?,
            "cavity.Pz_ST" => {
                let x = number(value)?;
                if x.abs() > 1.0 {
                    return Err(err(line, format!("`{key}` must lie in [-1, 1], got {x}")));
                }
                self.cavity.pz_st = x;
            }

            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let unit = |v: [f64; 3], name: &str| -> Result<(), ConfigError> {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm == 0.0 {
                return Err(err(0, format!("`{name}` must be a nonzero vector")));
            }
            Ok(())
        };
        unit(self.c13.n_c, "c13.n_c")?;
        unit(self.p1.n_p, "p1.n_p")?;
        if self.sweep.b_start_mt >= self.sweep.b_stop_mt || self.sweep.n_points < 2 {
            return Err(err(
                0,
                "sweep block must satisfy b_start < b_stop and n_points >= 2",
            ));
        }
        if self.map.f_start_ghz >= self.map.f_stop_ghz || self.map.n_f < 2 {
            return Err(err(
                0,
                "map block must satisfy f_start < f_stop and n_f >= 2",
            ));
        }
        if self.rates.sweep_points < 2 || self.cavity.n_points < 2 {
            return Err(err(0, "sweep point counts must be at least 2"));
        }
        Ok(())
    }

    pub fn nv_params(&self) -> NvParams {
        NvParams {
            d: TAU * self.nv.d_ghz * 1e9,
            e: TAU * self.nv.e_mhz * 1e6,
            gamma_e: TAU * self.nv.gamma_e_ghz_per_t * 1e9,
            strain_azimuth: self.nv.strain_azimuth_deg.to_radians(),
        }
    }

    pub fn c13_params(&self) -> C13Params {
        let n = Vec3::new(self.c13.n_c[0], self.c13.n_c[1], self.c13.n_c[2]).normalized();
        C13Params {
            a_par: TAU * self.c13.a_par_mhz * 1e6,
            a_perp: TAU * self.c13.a_perp_mhz * 1e6,
            n_c: n,
        }
    }

    pub fn p1_params(&self) -> P1Params {
        let n = Vec3::new(self.p1.n_p[0], self.p1.n_p[1], self.p1.n_p[2]).normalized();
        P1Params {
            gamma_e: TAU * self.nv.gamma_e_ghz_per_t * 1e9,
            gamma_n: TAU * self.p1.gamma_n_mhz_per_t * 1e6,
            q: TAU * self.p1.q_mhz * 1e6,
            a_par: TAU * self.p1.a_par_mhz * 1e6,
            a_perp: TAU * self.p1.a_perp_mhz * 1e6,
            n_p: n,
        }
    }

    pub fn defect_params(&self) -> DefectParams {
        DefectParams {
            nv: self.nv_params(),
            c13: self.c13_params(),
            p1: self.p1_params(),
        }
    }

    pub fn field_config(&self) -> FieldConfig {
        FieldConfig::new(
            self.orientation.b_mt * 1e-3,
            self.orientation.theta_ma_deg,
            self.orientation.phi_ma_deg,
        )
    }

    pub fn sweep_grid(&self) -> crate::error::Result<SweepGrid> {
        SweepGrid::new(
            self.sweep.b_start_mt * 1e-3,
            self.sweep.b_stop_mt * 1e-3,
            self.sweep.n_points,
        )
    }

    /// Frequency axis of the synthetic map, Hz.
    pub fn map_f_grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.map.f_start_ghz * 1e9, self.map.f_stop_ghz * 1e9);
        let n = self.map.n_f;
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    /// Aligned-field level-anticrossing estimate D / gamma_e, tesla.
    pub fn gslac_estimate_tesla(&self) -> f64 {
        self.nv.d_ghz / self.nv.gamma_e_ghz_per_t
    }

    /// OISP target polarization at the given working field.
    pub fn resolved_pz_o_nv(&self, b_tesla: f64) -> f64 {
        match self.rates.pz_o_nv {
            PzONv::Value(v) => v,
            PzONv::Auto => {
                if b_tesla < self.gslac_estimate_tesla() {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Rate parameters at the configured working field.
    pub fn rate_params(&self) -> RateParams {
        let omega_p1 = TAU * self.rates.f_p1_ghz * 1e9;
        RateParams {
            t_d_p1_inv: self.rates.td_p1_hz,
            t_i_p1_inv: self.rates.ti_p1_hz,
            t_t_p1_inv: self.rates.tt_p1_hz,
            t_i_nv_inv: self.rates.ti_nv_hz,
            t_1t_nv_inv: self.rates.t1t_nv_hz,
            t_o_nv_inv: self.rates.to_nv_hz,
            omega_p1,
            omega_nv: TAU * self.rates.f_nv_ghz * 1e9,
            omega_t: 2.0 * self.constants.kb * self.rates.temperature_k / self.constants.hbar,
            omega_1: 0.0,
            omega_p: omega_p1,
            t2_p1: 1e-5,
            p_z_o_nv: self.resolved_pz_o_nv(self.orientation.b_mt * 1e-3),
        }
    }

    pub fn cavity_params(&self) -> CavityParams {
        CavityParams {
            omega_0: TAU * self.cavity.f0_ghz * 1e9,
            gamma_1: TAU * self.cavity.gamma1_mhz * 1e6,
            gamma_2: TAU * self.cavity.gamma2_mhz * 1e6,
        }
    }
}
