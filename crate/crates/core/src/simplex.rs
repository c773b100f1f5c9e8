//! Derivative-free Nelder-Mead simplex minimization.
//!
//! Deterministic: vertices are ordered by objective value with ties broken
//! by vertex index, so results do not depend on evaluation scheduling.

/// Stopping rules; the search ends when either spread criterion is met or
/// the iteration budget runs out.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Absolute objective spread across the simplex.
    pub f_tol: f64,
    /// Per-dimension coordinate spread, in units of the initial step.
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            f_tol: 1e-12,
            x_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

/// Minimize `f` starting from `x0`, with one simplex vertex offset by
/// `step[i]` along each coordinate.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let dim = x0.len();
    assert_eq!(step.len(), dim, "one step per coordinate");

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let f_spread = values[worst] - values[best];
        let x_spread = (0..dim)
            .map(|i| {
                let lo = simplex.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
                let hi = simplex.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
                (hi - lo) / step[i].abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0f64, f64::max);
        if f_spread <= opts.f_tol || x_spread <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|i| {
                order[..dim].iter().map(|&v| simplex[v][i]).sum::<f64>() / dim as f64
            })
            .collect();
        let lerp = |from: &[f64], towards: &[f64], t: f64| -> Vec<f64> {
            from.iter()
                .zip(towards)
                .map(|(a, b)| a + t * (b - a))
                .collect()
        };

        let reflected = lerp(&centroid, &simplex[worst], -ALPHA);
        let f_reflected = f(&reflected);

        if f_reflected < values[best] {
            let expanded = lerp(&centroid, &simplex[worst], -ALPHA * GAMMA);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }

        let contracted = if f_reflected < values[worst] {
            lerp(&centroid, &reflected, RHO)
        } else {
            lerp(&centroid, &simplex[worst], RHO)
        };
        let f_contracted = f(&contracted);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }

        for &v in &order[1..] {
            simplex[v] = lerp(&simplex[best].clone(), &simplex[v], SIGMA);
            values[v] = f(&simplex[v]);
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)))
        .unwrap();
    SimplexResult {
        x: simplex[best].clone(),
        fx: values[best],
        iterations,
        converged,
    }
}
