//! Transition-line families over magnetic-field sweeps.
//!
//! Eigenlevels are followed across the sweep by adiabatic continuation:
//! branch k at the next grid point is the eigenpair with the largest
//! eigenvector overlap, assigned as a permutation. Index order is not
//! stable through level (anti)crossings, overlap tracking is.
//!
//! NV branches are labeled from the zero-field limit (0, -1, +1 with the
//! -1 branch the one that closes at the ground-state level anticrossing).
//! P1 branches are numbered 1..6 by ascending energy at the high-field
//! end of the sweep and carried backward; the nine emitted P1 families
//! are the electronic-like pairs (6,1), (5,2), (4,3), the nuclear-like
//! pairs (6,5), (5,4), (3,2), (2,1) and the mixed pairs (6,3), (5,3).

use std::f64::consts::TAU;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hamiltonians::{
    defect_axes, field_in_defect_frame, nv_c13_hamiltonian, nv_hamiltonian, p1_hamiltonian,
    C13Params, FieldConfig, NvParams, P1Params,
};
use crate::linalg::{eigh, inner, kron, spin_operators, ComplexMatrix, Vec3};

/// Minimum eigenvector overlap for an unambiguous branch assignment.
const OVERLAP_THRESHOLD: f64 = 0.5;

/// Uniform magnetic-field grid in tesla.
#[derive(Debug, Clone, Copy)]
pub struct SweepGrid {
    pub b_start: f64,
    pub b_stop: f64,
    pub n_points: usize,
}

impl SweepGrid {
    pub fn new(b_start: f64, b_stop: f64, n_points: usize) -> Result<Self> {
        if !(b_start < b_stop) || n_points < 2 {
            return Err(Error::InvalidGrid);
        }
        Ok(Self {
            b_start,
            b_stop,
            n_points,
        })
    }

    /// 0 to 150 mT in 1000 points.
    pub fn default_sweep() -> Self {
        Self {
            b_start: 0.0,
            b_stop: 0.15,
            n_points: 1000,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.b_stop - self.b_start) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| self.b_start + step * i as f64)
            .collect()
    }
}

/// Transition-line family labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    NvZeroToPlus,
    NvZeroToMinus,
    NvPlusToMinus,
    /// Electronic-like P1 pair, state numbers (upper, lower).
    P1Electronic(u8, u8),
    /// Nuclear-like P1 pair.
    P1Nuclear(u8, u8),
    /// Mixed P1 pair.
    P1Mixed(u8, u8),
    /// Carbon-13 hyperfine branch; index enumerates state pairs (i, j),
    /// 1 <= i < j <= 6, in lexicographic order.
    C13Branch(u8),
    Unidentified,
}

impl Family {
    pub fn is_nv(&self) -> bool {
        matches!(
            self,
            Family::NvZeroToPlus | Family::NvZeroToMinus | Family::NvPlusToMinus
        )
    }

    pub fn is_p1(&self) -> bool {
        matches!(
            self,
            Family::P1Electronic(..) | Family::P1Nuclear(..) | Family::P1Mixed(..)
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::NvZeroToPlus => write!(f, "NV_0_to_plus1"),
            Family::NvZeroToMinus => write!(f, "NV_0_to_minus1"),
            Family::NvPlusToMinus => write!(f, "NV_plus1_to_minus1"),
            Family::P1Electronic(a, b) => write!(f, "P1_electronic_{a}_{b}"),
            Family::P1Nuclear(a, b) => write!(f, "P1_nuclear_{a}_{b}"),
            Family::P1Mixed(a, b) => write!(f, "P1_mixed_{a}_{b}"),
            Family::C13Branch(k) => write!(f, "C13_branch_{k}"),
            Family::Unidentified => write!(f, "UNIDENTIFIED"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_pair = |rest: &str| -> Option<(u8, u8)> {
            let mut it = rest.split('_');
            let a = it.next()?.parse().ok()?;
            let b = it.next()?.parse().ok()?;
            if it.next().is_some() {
                return None;
            }
            Some((a, b))
        };
        let fam = match s {
            "NV_0_to_plus1" => Some(Family::NvZeroToPlus),
            "NV_0_to_minus1" => Some(Family::NvZeroToMinus),
            "NV_plus1_to_minus1" => Some(Family::NvPlusToMinus),
            "UNIDENTIFIED" => Some(Family::Unidentified),
            _ => {
                if let Some(rest) = s.strip_prefix("P1_electronic_") {
                    parse_pair(rest).map(|(a, b)| Family::P1Electronic(a, b))
                } else if let Some(rest) = s.strip_prefix("P1_nuclear_") {
                    parse_pair(rest).map(|(a, b)| Family::P1Nuclear(a, b))
                } else if let Some(rest) = s.strip_prefix("P1_mixed_") {
                    parse_pair(rest).map(|(a, b)| Family::P1Mixed(a, b))
                } else if let Some(rest) = s.strip_prefix("C13_branch_") {
                    rest.parse().ok().map(Family::C13Branch)
                } else {
                    None
                }
            }
        };
        fam.ok_or_else(|| Error::InvalidArgument(format!("unknown family `{s}`")))
    }
}

/// One sampled point of a transition line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePoint {
    pub b_tesla: f64,
    pub f_hz: f64,
    pub strength: f64,
}

/// A labeled transition line over the sweep.
#[derive(Debug, Clone)]
pub struct TransitionLine {
    pub family: Family,
    /// Defect axis index, 0..3.
    pub axis: usize,
    /// Points ordered by field.
    pub points: Vec<LinePoint>,
}

/// Simulated defect system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Nv,
    NvC13,
    P1,
}

/// Parameter bundle for all three systems.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefectParams {
    pub nv: NvParams,
    pub c13: C13Params,
    pub p1: P1Params,
}

/// Eigenlevel branches followed over a sweep.
#[derive(Debug, Clone)]
pub struct LevelTrack {
    pub b_values: Vec<f64>,
    /// energies[branch][point], rad/s.
    pub energies: Vec<Vec<f64>>,
    /// Per grid point, eigenvectors as columns in branch order.
    pub states: Vec<ComplexMatrix>,
}

/// Follow eigenlevels of `builder(B)` across the grid by maximal
/// eigenvector overlap. Branch order is the ascending eigenvalue order at
/// the first grid point.
pub fn track_levels(
    builder: impl Fn(f64) -> Result<ComplexMatrix>,
    grid: &SweepGrid,
) -> Result<LevelTrack> {
    let b_values = grid.values();
    let first = eigh(&builder(b_values[0])?)?;
    let dim = first.values.len();

    let mut energies: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut v = Vec::with_capacity(b_values.len());
            v.push(first.values[k]);
            v
        })
        .collect();
    let mut states = Vec::with_capacity(b_values.len());
    states.push(first.vectors.clone());
    let mut prev = first.vectors;

    for (step, &b) in b_values.iter().enumerate().skip(1) {
        let next = eigh(&builder(b)?)?;

        // all (branch, candidate) overlaps, best first; greedy matching
        let mut overlaps = Vec::with_capacity(dim * dim);
        for k in 0..dim {
            let vk = prev.column(k);
            for j in 0..dim {
                overlaps.push((inner(&vk, &next.vectors.column(j)).norm(), k, j));
            }
        }
        overlaps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut assignment = vec![usize::MAX; dim];
        let mut taken = vec![false; dim];
        let mut assigned = 0;
        let mut min_overlap = f64::INFINITY;
        for &(ov, k, j) in &overlaps {
            if assignment[k] != usize::MAX || taken[j] {
                continue;
            }
            assignment[k] = j;
            taken[j] = true;
            min_overlap = min_overlap.min(ov);
            assigned += 1;
            if assigned == dim {
                break;
            }
        }
        if min_overlap < OVERLAP_THRESHOLD {
            return Err(Error::AmbiguousTracking {
                step,
                overlap: min_overlap,
            });
        }

        let permuted = ComplexMatrix::from_fn(dim, |i, k| next.vectors[(i, assignment[k])]);
        for k in 0..dim {
            energies[k].push(next.values[assignment[k]]);
        }
        states.push(permuted.clone());
        prev = permuted;
    }

    Ok(LevelTrack {
        b_values,
        energies,
        states,
    })
}

/// Drive matrix element squared, |⟨i|drive|j⟩|^2, for columns i and j of
/// `vectors`. Symmetric in (i, j).
pub fn transition_strength(
    vectors: &ComplexMatrix,
    i: usize,
    j: usize,
    drive: &ComplexMatrix,
) -> f64 {
    let vi = vectors.column(i);
    let vj = vectors.column(j);
    inner(&vi, &drive.apply(&vj)).norm_sqr()
}

/// Transverse drive operator (electronic Sx) for the system, matching the
/// Hamiltonian basis.
pub fn drive_operator(system: System) -> ComplexMatrix {
    match system {
        System::Nv => spin_operators(1.0).expect("spin 1").0,
        System::NvC13 => kron(
            &spin_operators(1.0).expect("spin 1").0,
            &ComplexMatrix::identity(2),
        ),
        System::P1 => kron(
            &spin_operators(0.5).expect("spin 1/2").0,
            &ComplexMatrix::identity(3),
        ),
    }
}

fn hamiltonian_builder<'a>(
    system: System,
    params: &'a DefectParams,
    cfg: &'a FieldConfig,
    axis: &'a Vec3,
) -> impl Fn(f64) -> Result<ComplexMatrix> + 'a {
    move |b: f64| {
        let b_defect = field_in_defect_frame(&cfg.with_b(b), axis)?;
        match system {
            System::Nv => Ok(nv_hamiltonian(&params.nv, &b_defect)),
            System::NvC13 => nv_c13_hamiltonian(&params.nv, &params.c13, &b_defect),
            System::P1 => p1_hamiltonian(&params.p1, &b_defect),
        }
    }
}

/// State numbers 1..dim by ascending energy at the high-field end;
/// returns branch index per state number (1-based).
fn number_branches_high_field(track: &LevelTrack) -> Vec<usize> {
    let last = track.b_values.len() - 1;
    let dim = track.energies.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        track.energies[a][last]
            .partial_cmp(&track.energies[b][last])
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

fn line_from_pair(
    track: &LevelTrack,
    drive: &ComplexMatrix,
    family: Family,
    axis: usize,
    branch_a: usize,
    branch_b: usize,
) -> TransitionLine {
    let points = track
        .b_values
        .iter()
        .enumerate()
        .map(|(i, &b)| LinePoint {
            b_tesla: b,
            f_hz: (track.energies[branch_a][i] - track.energies[branch_b][i]).abs() / TAU,
            strength: transition_strength(&track.states[i], branch_a, branch_b, drive),
        })
        .collect();
    TransitionLine {
        family,
        axis,
        points,
    }
}

/// The nine P1 families of Fig-style state numbering (upper, lower).
fn p1_families() -> [(Family, (usize, usize)); 9] {
    [
        (Family::P1Electronic(6, 1), (6, 1)),
        (Family::P1Electronic(5, 2), (5, 2)),
        (Family::P1Electronic(4, 3), (4, 3)),
        (Family::P1Nuclear(6, 5), (6, 5)),
        (Family::P1Nuclear(5, 4), (5, 4)),
        (Family::P1Nuclear(3, 2), (3, 2)),
        (Family::P1Nuclear(2, 1), (2, 1)),
        (Family::P1Mixed(6, 3), (6, 3)),
        (Family::P1Mixed(5, 3), (5, 3)),
    ]
}

/// State-number pair for a C13 branch index (inverse of the enumeration).
pub fn c13_pair_for_index(index: u8) -> Option<(u8, u8)> {
    let mut k = 0;
    for i in 1..=6u8 {
        for j in (i + 1)..=6 {
            if k == index {
                return Some((i, j));
            }
            k += 1;
        }
    }
    None
}

/// Resonance-line families for every defect axis over the sweep.
///
/// NV and NV+C13 emit per axis the families listed on [`Family`]; C13
/// emits all 15 level pairs (filter downstream as needed).
pub fn lines_over_sweep(
    system: System,
    params: &DefectParams,
    cfg: &FieldConfig,
    grid: &SweepGrid,
) -> Result<Vec<TransitionLine>> {
    let drive = drive_operator(system);
    let mut lines = Vec::new();
    for (axis_index, axis) in defect_axes().iter().enumerate() {
        let track = track_levels(hamiltonian_builder(system, params, cfg, axis), grid)?;
        match system {
            System::Nv => {
                // zero-field labels: branch 0 -> |0>, 1 -> |-1>, 2 -> |+1>
                for (family, (a, b)) in [
                    (Family::NvZeroToPlus, (2, 0)),
                    (Family::NvZeroToMinus, (1, 0)),
                    (Family::NvPlusToMinus, (2, 1)),
                ] {
                    lines.push(line_from_pair(&track, &drive, family, axis_index, a, b));
                }
            }
            System::NvC13 => {
                let number = number_branches_high_field(&track);
                let mut index = 0u8;
                for i in 1..=6usize {
                    for j in (i + 1)..=6 {
                        lines.push(line_from_pair(
                            &track,
                            &drive,
                            Family::C13Branch(index),
                            axis_index,
                            number[j - 1],
                            number[i - 1],
                        ));
                        index += 1;
                    }
                }
            }
            System::P1 => {
                let number = number_branches_high_field(&track);
                for (family, (upper, lower)) in p1_families() {
                    lines.push(line_from_pair(
                        &track,
                        &drive,
                        family,
                        axis_index,
                        number[upper - 1],
                        number[lower - 1],
                    ));
                }
            }
        }
    }
    Ok(lines)
}

/// Location and size of the minimum gap between the two lowest NV levels.
#[derive(Debug, Clone, Copy)]
pub struct GslacPoint {
    pub b_tesla: f64,
    pub gap_hz: f64,
}

/// Locate the ground-state level anticrossing: the field minimizing the
/// gap between the two lowest NV branches, by golden-section search to
/// 1e-6 T over [0, 2 D / gamma_e].
///
/// The defect axis must lie within 20 degrees of the field direction.
pub fn gslac_field(p: &NvParams, axis: &Vec3, cfg: &FieldConfig) -> Result<GslacPoint> {
    let cos_angle = axis.normalized().dot(&cfg.n_ma()).clamp(-1.0, 1.0);
    let angle_deg = cos_angle.acos().to_degrees();
    if angle_deg >= 20.0 {
        return Err(Error::AxisMisaligned { angle_deg });
    }

    let gap = |b: f64| -> Result<f64> {
        let b_defect = field_in_defect_frame(&cfg.with_b(b), axis)?;
        let vals = eigh(&nv_hamiltonian(p, &b_defect))?.values;
        Ok(vals[1] - vals[0])
    };

    let (mut lo, mut hi) = (0.0, 2.0 * p.d / p.gamma_e);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = gap(x1)?;
    let mut f2 = gap(x2)?;
    while hi - lo > 1e-6 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = gap(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = gap(x2)?;
        }
    }
    let b_min = 0.5 * (lo + hi);
    let span = 2.0 * p.d / p.gamma_e;
    if b_min < 2e-6 || b_min > span - 2e-6 {
        return Err(Error::NoMinimumInRange { lo: 0.0, hi: span });
    }
    Ok(GslacPoint {
        b_tesla: b_min,
        gap_hz: gap(b_min)? / TAU,
    })
}

/// Empirical companion line F_f(B) = F_s - F_NV(B) / 3 built from the
/// NV -1 -> 0 line of the near-parallel axis. Strengths are carried over
/// from the source line; frequencies are clamped at zero.
pub fn unidentified_line(f_s_hz: f64, nv_minus1_line: &TransitionLine) -> TransitionLine {
    TransitionLine {
        family: Family::Unidentified,
        axis: nv_minus1_line.axis,
        points: nv_minus1_line
            .points
            .iter()
            .map(|p| LinePoint {
                b_tesla: p.b_tesla,
                f_hz: (f_s_hz - p.f_hz / 3.0).max(0.0),
                strength: p.strength,
            })
            .collect(),
    }
}

/// Write lines as CSV: `family,axis,B_tesla,f_hz,strength`, one row per
/// sampled point.
pub fn write_lines_csv(lines: &[TransitionLine], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "family,axis,B_tesla,f_hz,strength")?;
    for line in lines {
        for p in &line.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                line.family, line.axis, p.b_tesla, p.f_hz, p.strength
            )?;
        }
    }
    Ok(())
}

/// Read lines back from the CSV written by [`write_lines_csv`]. Rows are
/// grouped by (family, axis) in order of first appearance; points keep
/// file order.
pub fn read_lines_csv(input: &mut impl BufRead) -> Result<Vec<TransitionLine>> {
    let mut lines: Vec<TransitionLine> = Vec::new();
    let mut text = String::new();
    let mut line_no = 0usize;
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
            if row != "family,axis,B_tesla,f_hz,strength" {
                return Err(Error::InvalidArgument(format!(
                    "line 1: expected header `family,axis,B_tesla,f_hz,strength`, got `{row}`"
                )));
            }
            continue;
        }
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::InvalidArgument(format!(
                "line {line_no}: expected 5 fields, got {}",
                fields.len()
            )));
        }
        let family = Family::from_str(fields[0])
            .map_err(|e| Error::InvalidArgument(format!("line {line_no}: {e}")))?;
        let axis: usize = fields[1]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("line {line_no}: bad axis")))?;
        let parse_f = |s: &str, name: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("line {line_no}: bad {name}")))
        };
        let point = LinePoint {
            b_tesla: parse_f(fields[2], "B_tesla")?,
            f_hz: parse_f(fields[3], "f_hz")?,
            strength: parse_f(fields[4], "strength")?,
        };
        match lines
            .iter_mut()
            .find(|l| l.family == family && l.axis == axis)
        {
            Some(line) => line.points.push(point),
            None => lines.push(TransitionLine {
                family,
                axis,
                points: vec![point],
            }),
        }
    }
    Ok(lines)
}
