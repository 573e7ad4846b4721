//! Safeguarded one-dimensional maximisation.
//!
//! A coarse grid locates sign changes of the slope from positive to negative;
//! each bracket is then refined by Newton steps on the slope, falling back to
//! bisection whenever a step leaves the bracket or the curvature is not
//! negative. The best refined local maximum is returned.

use serde::{Deserialize, Serialize};

/// Criterion to maximise, with its first two derivatives.
pub trait ScalarObjective {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
    fn curvature(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub grid_points: usize,
    /// Convergence requires `|slope| <= tolerance` at the returned point.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 32,
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    pub slope: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Grid point with the largest criterion value.
    pub grid_winner: f64,
}

/// Grid of `points` values from `lo` to `hi`, geometric when `lo > 0`.
pub fn search_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let last = (points - 1) as f64;
    let mut grid: Vec<f64> = if lo > 0.0 {
        let ratio = (hi / lo).ln();
        (0..points)
            .map(|k| lo * (ratio * k as f64 / last).exp())
            .collect()
    } else {
        (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / last)
            .collect()
    };
    grid[0] = lo;
    grid[points - 1] = hi;
    grid
}

/// Maximises `obj` over the open interval `(lo, hi)`.
pub fn maximize<O: ScalarObjective + ?Sized>(
    obj: &O,
    lo: f64,
    hi: f64,
    opts: &SearchOptions,
) -> Maximum {
    let grid = search_grid(lo, hi, opts.grid_points);
    let values: Vec<f64> = grid.iter().map(|&x| obj.value(x)).collect();
    let slopes: Vec<f64> = grid.iter().map(|&x| obj.slope(x)).collect();

    let winner_idx = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i);
    let grid_winner = winner_idx.map_or(f64::NAN, |i| grid[i]);

    let mut best: Option<Maximum> = None;
    for k in 0..grid.len() - 1 {
        let (s0, s1) = (slopes[k], slopes[k + 1]);
        // Infinite slopes still bracket a sign change; NaN marks an invalid point.
        if s0.is_nan() || s1.is_nan() || !(s0 > 0.0 && s1 <= 0.0) {
            continue;
        }
        let candidate = if s1 == 0.0 {
            Maximum {
                argmax: grid[k + 1],
                value: values[k + 1],
                slope: 0.0,
                iterations: 0,
                converged: true,
                grid_winner,
            }
        } else {
            refine(obj, grid[k], grid[k + 1], opts, grid_winner)
        };
        best = Some(match best {
            None => candidate,
            Some(b) => pick(b, candidate),
        });
    }

    best.unwrap_or_else(|| {
        let (argmax, value) = winner_idx.map_or((f64::NAN, f64::NAN), |i| (grid[i], values[i]));
        Maximum {
            argmax,
            value,
            slope: if argmax.is_finite() {
                obj.slope(argmax)
            } else {
                f64::NAN
            },
            iterations: 0,
            converged: false,
            grid_winner,
        }
    })
}

fn pick(a: Maximum, b: Maximum) -> Maximum {
    match (a.converged, b.converged) {
        (true, false) => a,
        (false, true) => b,
        _ => {
            if b.value > a.value {
                b
            } else {
                a
            }
        }
    }
}

/// Newton-bisection on the slope inside `[a, b]` with `slope(a) > 0 > slope(b)`.
fn refine<O: ScalarObjective + ?Sized>(
    obj: &O,
    a: f64,
    b: f64,
    opts: &SearchOptions,
    grid_winner: f64,
) -> Maximum {
    let (mut lo, mut hi) = (a, b);
    let mut x = 0.5 * (lo + hi);
    let mut s = obj.slope(x);
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        if s == 0.0 {
            break;
        }
        if s > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let c = obj.curvature(x);
        let newton = if c < 0.0 && c.is_finite() {
            x - s / c
        } else {
            f64::NAN
        };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        s = obj.slope(x);
        if s.is_nan() {
            break;
        }
        if step <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }

    Maximum {
        argmax: x,
        value: obj.value(x),
        slope: s,
        iterations,
        converged: s.is_finite() && s.abs() <= opts.tolerance,
        grid_winner,
    }
}
