//! Off-grid evaluation by barycentric trigonometric interpolation.
//!
//! For even nx on a periodic grid the interpolant through the samples has the
//! closed form
//!
//!   p(x) = sin(A)/nx * sum_j (-1)^j u_j cot(pi (x - x_j) / (2L)),
//!
//! with A = nx pi (x + L) / (2L). It reproduces the spectral representation
//! exactly at the nodes and is spectrally accurate between them, which the
//! characteristics residuals require.

use crate::model::{Field, Grid};

/// Evaluates the trigonometric interpolant of `f` at an arbitrary point.
/// The point is folded into the periodic cell first.
pub fn eval_trig(grid: &Grid, f: &Field, x: f64) -> f64 {
    let l = grid.half_length;
    let nx = grid.nx;
    debug_assert_eq!(f.len(), nx);

    // Fold into [-L, L).
    let two_l = 2.0 * l;
    let x = x - two_l * ((x + l) / two_l).floor();

    let half_pi_over_l = std::f64::consts::PI / (2.0 * l);
    // Snap to a node when the cot would blow up.
    let pos = (x + l) / grid.dx();
    let nearest = pos.round() as usize % nx;
    if (pos - pos.round()).abs() < 1e-10 {
        return f[nearest];
    }

    let a = nx as f64 * half_pi_over_l * (x + l);
    let sin_a = a.sin();
    let mut acc = 0.0;
    let mut sign = 1.0;
    for j in 0..nx {
        let theta = half_pi_over_l * (x - grid.node(j));
        acc += sign * f[j] * theta.cos() / theta.sin();
        sign = -sign;
    }
    sin_a * acc / nx as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Grid;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_nodes_and_band_limited_functions() {
        let grid = Grid::new(9.0, 64).unwrap();
        let l = grid.half_length;
        let f = grid.sample(|x| (3.0 * PI * x / l).sin() + 0.5 * (PI * x / l).cos());
        // At the nodes.
        for j in [0, 5, 31, 63] {
            assert!((eval_trig(&grid, &f, grid.node(j)) - f[j]).abs() < 1e-13);
        }
        // Between nodes a band-limited function is reproduced exactly.
        for x in [-8.37, -1.234, 0.001, 4.56, 8.99] {
            let want = (3.0 * PI * x / l).sin() + 0.5 * (PI * x / l).cos();
            let got = eval_trig(&grid, &f, x);
            assert!((got - want).abs() < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn periodic_folding() {
        let grid = Grid::new(5.0, 32).unwrap();
        let f = grid.sample(|x| (PI * x / 5.0).cos());
        let a = eval_trig(&grid, &f, 1.3);
        let b = eval_trig(&grid, &f, 1.3 + 10.0);
        let c = eval_trig(&grid, &f, 1.3 - 30.0);
        assert!((a - b).abs() < 1e-12);
        assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn smooth_function_interpolates_to_spectral_accuracy() {
        let grid = Grid::new(10.0, 256).unwrap();
        let f = grid.sample(|x| (-x * x / 2.0).exp());
        for x in [-3.33, -0.77, 0.123, 2.5, 6.17] {
            let want = (-x * x / 2.0_f64).exp();
            assert!((eval_trig(&grid, &f, x) - want).abs() < 1e-12);
        }
    }
}
