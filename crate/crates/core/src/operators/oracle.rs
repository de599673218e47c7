//! Dense-grid brute force for small dimensions.
//!
//! Independent of the sampling search: no randomness, no pattern moves.
//! Points are taken on the `+1` faces of the cube `[-1, 1]^k` (the objective
//! is assumed even and scale invariant, so these faces see every ray), then
//! the best cells are refined by successively finer local grids.

/// Largest dimension the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub value: f64,
    pub point: Vec<f64>,
    pub evaluations: usize,
}

/// Grid resolution per free axis, chosen so that a full face scan stays
/// near `target` evaluations.
fn resolution(dim: usize, target: usize) -> usize {
    if dim <= 1 {
        return 1;
    }
    let free = (dim - 1) as f64;
    let per_face = target as f64 / dim as f64;
    (per_face.powf(1.0 / free).floor() as usize).clamp(3, 4001)
}

fn visit_grid(
    free: usize,
    centers: &[f64],
    half_width: f64,
    points: usize,
    mut visit: impl FnMut(&[f64]),
) {
    let mut idx = vec![0usize; free];
    let mut coords = vec![0.0; free];
    let step = if points > 1 {
        2.0 * half_width / (points - 1) as f64
    } else {
        0.0
    };
    loop {
        for a in 0..free {
            let v = centers[a] - half_width + step * idx[a] as f64;
            coords[a] = v.clamp(-1.0, 1.0);
        }
        visit(&coords);
        let mut a = 0;
        loop {
            if a == free {
                return;
            }
            idx[a] += 1;
            if idx[a] < points {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn embed(face: usize, free_coords: &[f64], out: &mut [f64]) {
    let mut j = 0;
    for (i, o) in out.iter_mut().enumerate() {
        if i == face {
            *o = 1.0;
        } else {
            *o = free_coords[j];
            j += 1;
        }
    }
}

/// Maximizes an even, scale-invariant `f` on `R^dim`; `target` bounds the
/// size of the initial scan.
pub fn grid_maximize<F>(dim: usize, f: F, target: usize) -> GridOutcome
where
    F: Fn(&[f64]) -> f64,
{
    assert!(
        (1..=ORACLE_MAX_DIM).contains(&dim),
        "grid oracle needs 1..=6 dims"
    );
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut evaluations = 0;
    let mut x = vec![0.0; dim];
    if dim == 1 {
        x[0] = 1.0;
        return GridOutcome {
            value: eval(&x),
            point: x,
            evaluations: 1,
        };
    }
    let free = dim - 1;
    let m = resolution(dim, target);
    const KEEP: usize = 8;
    // (value, face, free coordinates), best first
    let mut top: Vec<(f64, usize, Vec<f64>)> = Vec::with_capacity(KEEP + 1);
    let consider = |v: f64, face: usize, c: &[f64], top: &mut Vec<(f64, usize, Vec<f64>)>| {
        if top.len() < KEEP || v > top[top.len() - 1].0 {
            let pos = top.iter().position(|t| v > t.0).unwrap_or(top.len());
            top.insert(pos, (v, face, c.to_vec()));
            top.truncate(KEEP);
        }
    };
    for face in 0..dim {
        visit_grid(free, &vec![0.0; free], 1.0, m, |c| {
            embed(face, c, &mut x);
            let v = eval(&x);
            evaluations += 1;
            consider(v, face, c, &mut top);
        });
    }

    let mut best = top[0].clone();
    for (v0, face, c0) in top {
        let (mut v, mut c) = (v0, c0);
        let mut half = 2.0 / (m - 1) as f64;
        let local = 3;
        while half > 1e-9 {
            let center = c.clone();
            let mut moved = false;
            visit_grid(free, &center, half, local, |cand| {
                embed(face, cand, &mut x);
                let val = eval(&x);
                evaluations += 1;
                if val > v {
                    v = val;
                    c.copy_from_slice(cand);
                    moved = true;
                }
            });
            if !moved {
                half *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, face, c);
        }
    }
    embed(best.1, &best.2, &mut x);
    GridOutcome {
        value: best.0,
        point: x,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rayleigh_max() {
        let f = |x: &[f64]| {
            let num = x[0] * x[0] + 3.0 * x[1] * x[1] + 2.0 * x[2] * x[2] + x[0] * x[1];
            num / x.iter().map(|v| v * v).sum::<f64>()
        };
        // eigenvalues of [[1, .5, 0], [.5, 3, 0], [0, 0, 2]]
        let top = 2.0 + (1.0f64 + 0.25).sqrt();
        let out = grid_maximize(3, f, 20_000);
        assert!((out.value - top).abs() < 1e-8, "{} vs {top}", out.value);
    }

    #[test]
    fn one_dimensional() {
        let out = grid_maximize(1, |x: &[f64]| x[0].abs(), 10);
        assert_eq!(out.value, 1.0);
    }
}
