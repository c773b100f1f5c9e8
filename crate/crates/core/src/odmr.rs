//! Synthetic ODMR maps from transition lines.
//!
//! The forward model is a strength-weighted Lorentzian per line,
//! `L(d) = 1 / (1 + (2 d / w)^2)`, summed over lines and clamped to
//! [0, 1]. Line frequency and strength at a field value come from linear
//! interpolation of the line's sampled points; fields outside a line's
//! sampled range contribute nothing.

use std::io::Write;

use crate::error::{Error, Result};
use crate::spectra::TransitionLine;

/// Lock-in style signal on a (frequency, field) grid, normalized to [0, 1].
#[derive(Debug, Clone)]
pub struct OdmrMap {
    pub f_axis: Vec<f64>,
    pub b_axis: Vec<f64>,
    /// Row-major, rows = field values ascending, columns = frequency.
    pub signal: Vec<f64>,
}

impl OdmrMap {
    pub fn value(&self, b_index: usize, f_index: usize) -> f64 {
        self.signal[b_index * self.f_axis.len() + f_index]
    }

    /// CSV matrix: first row is the frequency axis (empty corner cell),
    /// first column the field axis.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        for f in &self.f_axis {
            write!(out, ",{f}")?;
        }
        writeln!(out)?;
        for (i, b) in self.b_axis.iter().enumerate() {
            write!(out, "{b}")?;
            for j in 0..self.f_axis.len() {
                write!(out, ",{}", self.value(i, j))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Binary 8-bit PGM (P5), rows = field ascending, value = round(255 s).
    pub fn write_pgm(&self, out: &mut impl Write) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.f_axis.len(), self.b_axis.len())?;
        let bytes: Vec<u8> = self
            .signal
            .iter()
            .map(|&s| (255.0 * s).round() as u8)
            .collect();
        out.write_all(&bytes)
    }
}

/// Interpolated (frequency, strength) of a line at field `b`, if `b` lies
/// within the line's sampled range.
fn line_at(line: &TransitionLine, b: f64) -> Option<(f64, f64)> {
    let pts = &line.points;
    if pts.is_empty() || b < pts[0].b_tesla || b > pts[pts.len() - 1].b_tesla {
        return None;
    }
    let k = match pts.binary_search_by(|p| p.b_tesla.partial_cmp(&b).unwrap()) {
        Ok(exact) => return Some((pts[exact].f_hz, pts[exact].strength)),
        Err(0) => return Some((pts[0].f_hz, pts[0].strength)),
        Err(k) => k - 1,
    };
    let (lo, hi) = (&pts[k], &pts[k + 1]);
    let t = (b - lo.b_tesla) / (hi.b_tesla - lo.b_tesla);
    Some((
        lo.f_hz + t * (hi.f_hz - lo.f_hz),
        lo.strength + t * (hi.strength - lo.strength),
    ))
}

/// Render the map. An empty line list gives an all-zero map.
pub fn synthesize_map(
    lines: &[TransitionLine],
    f_grid: &[f64],
    b_grid: &[f64],
    linewidth_hz: f64,
) -> Result<OdmrMap> {
    if !(linewidth_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "linewidth must be positive, got {linewidth_hz}"
        )));
    }
    let (nf, nb) = (f_grid.len(), b_grid.len());
    let mut signal = vec![0.0f64; nb * nf];
    for line in lines {
        for (i, &b) in b_grid.iter().enumerate() {
            let Some((f_line, strength)) = line_at(line, b) else {
                continue;
            };
            if strength == 0.0 {
                continue;
            }
            let row = &mut signal[i * nf..(i + 1) * nf];
            for (j, &f) in f_grid.iter().enumerate() {
                let x = 2.0 * (f - f_line) / linewidth_hz;
                row[j] += strength / (1.0 + x * x);
            }
        }
    }
    for s in signal.iter_mut() {
        *s = s.clamp(0.0, 1.0);
    }
    Ok(OdmrMap {
        f_axis: f_grid.to_vec(),
        b_axis: b_grid.to_vec(),
        signal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{Family, LinePoint};

    fn flat_line(f_hz: f64, strength: f64) -> TransitionLine {
        TransitionLine {
            family: Family::NvZeroToMinus,
            axis: 0,
            points: vec![
                LinePoint {
                    b_tesla: 0.0,
                    f_hz,
                    strength,
                },
                LinePoint {
                    b_tesla: 0.1,
                    f_hz,
                    strength,
                },
            ],
        }
    }

    #[test]
    fn on_line_pixel_equals_strength() {
        let lines = [flat_line(2.0e9, 0.25)];
        let map = synthesize_map(&lines, &[2.0e9], &[0.05], 10e6).unwrap();
        assert!((map.value(0, 0) - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn half_linewidth_detuning_halves_signal() {
        let w = 10e6;
        let lines = [flat_line(2.0e9, 1.0)];
        let map = synthesize_map(&lines, &[2.0e9 + w / 2.0], &[0.05], w).unwrap();
        assert!((map.value(0, 0) - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn overlapping_lines_clamp_to_one() {
        let lines = [flat_line(2.0e9, 1.0), flat_line(2.0e9, 1.0)];
        let map = synthesize_map(&lines, &[2.0e9], &[0.05], 10e6).unwrap();
        assert_eq!(map.value(0, 0), 1.0);
    }

    #[test]
    fn empty_lines_give_zero_map() {
        let map = synthesize_map(&[], &[1.0e9, 2.0e9], &[0.0, 0.1], 10e6).unwrap();
        assert!(map.signal.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn out_of_range_field_contributes_nothing() {
        let lines = [flat_line(2.0e9, 1.0)];
        let map = synthesize_map(&lines, &[2.0e9], &[0.2], 10e6).unwrap();
        assert_eq!(map.value(0, 0), 0.0);
    }

    #[test]
    fn reordering_lines_leaves_map_unchanged() {
        let a = flat_line(1.9e9, 0.3);
        let b = flat_line(2.1e9, 0.6);
        let f_grid: Vec<f64> = (0..101).map(|k| 1.8e9 + 4e6 * k as f64).collect();
        let m1 = synthesize_map(&[a.clone(), b.clone()], &f_grid, &[0.05], 10e6).unwrap();
        let m2 = synthesize_map(&[b, a], &f_grid, &[0.05], 10e6).unwrap();
        for (x, y) in m1.signal.iter().zip(&m2.signal) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn halving_linewidth_halves_fwhm() {
        let f_grid: Vec<f64> = (0..4001).map(|k| 1.9e9 + 0.05e6 * k as f64).collect();
        let fwhm = |w: f64| {
            let map = synthesize_map(&[flat_line(2.0e9, 1.0)], &f_grid, &[0.05], w).unwrap();
            let above: Vec<usize> = (0..f_grid.len())
                .filter(|&j| map.value(0, j) >= 0.5)
                .collect();
            f_grid[*above.last().unwrap()] - f_grid[above[0]]
        };
        let (w1, w2) = (fwhm(20e6), fwhm(10e6));
        let step = 0.05e6;
        assert!((w1 - 2.0 * w2).abs() <= 2.0 * step, "{w1} vs 2x{w2}");
    }

    #[test]
    fn pgm_header_and_rounding() {
        let lines = [flat_line(2.0e9, 0.5)];
        let map = synthesize_map(&lines, &[2.0e9, 2.02e9], &[0.0, 0.05], 10e6).unwrap();
        let mut bytes = Vec::new();
        map.write_pgm(&mut bytes).unwrap();
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        let pixels = &bytes[bytes.len() - 4..];
        assert_eq!(pixels[0], (255.0 * map.value(0, 0)).round() as u8);
    }

    #[test]
    fn csv_layout() {
        let map = synthesize_map(&[], &[1.0e9, 2.0e9], &[0.0, 0.1], 10e6).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], ",1000000000,2000000000");
        assert_eq!(rows[1], "0,0,0");
        assert_eq!(rows[2], "0.1,0,0");
    }

    #[test]
    fn rejects_zero_linewidth() {
        assert!(synthesize_map(&[], &[1.0], &[1.0], 0.0).is_err());
    }
}
