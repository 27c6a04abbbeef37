//! Lagrangian characteristics q(t, x) and their spatial gradient.
//!
//! Particles follow q' = u^N(t, q) + k from q(0, x) = x. The gradient is
//! advanced by its own ODE, q_x' = N u^{N-1}(t, q) u_x(t, q) q_x, whose
//! closed-form solution is the exponential of the accumulated integrand, so
//! q_x stays positive while the solution is smooth. Both ODEs consume the
//! same RK4 stage fields as the field solver, so no temporal interpolation
//! enters the coupled residuals.

use crate::dynamics::{RkStages, StepObserver};
use crate::error::{GchError, Result};
use crate::interp::eval_trig;
use crate::model::{Field, ModelParams, State};
use crate::spectral::SpectralWorkspace;

/// Particle labels, current positions, and positive gradients.
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub labels: Vec<f64>,
    /// Unfolded positions (monotone in the label when labels are sorted).
    pub q: Vec<f64>,
    pub qx: Vec<f64>,
    pub t: f64,
}

impl FlowMap {
    /// q(0, x) = x, q_x(0, x) = 1.
    pub fn new(labels: Vec<f64>) -> Self {
        let q = labels.clone();
        let qx = vec![1.0; labels.len()];
        FlowMap {
            labels,
            q,
            qx,
            t: 0.0,
        }
    }

    /// n uniformly spaced labels over [-L, L).
    pub fn uniform(l: f64, n: usize) -> Self {
        let dx = 2.0 * l / n as f64;
        Self::new((0..n).map(|i| -l + i as f64 * dx).collect())
    }
}

fn speed(ws: &SpectralWorkspace, p: &ModelParams, u: &Field, q: f64) -> f64 {
    eval_trig(&ws.grid, u, q).powi(p.n as i32) + p.k
}

fn stretch_rate(ws: &SpectralWorkspace, p: &ModelParams, u: &Field, ux: &Field, q: f64) -> f64 {
    let n = p.n as i32;
    let uq = eval_trig(&ws.grid, u, q);
    let uxq = eval_trig(&ws.grid, ux, q);
    n as f64 * uq.powi(n - 1) * uxq
}

/// One RK4 step of the coupled (q, q_x) system over the stored stage fields.
/// Fails with a distinct error when any gradient leaves the positive cone.
pub fn advance_flow(
    fm: &FlowMap,
    ws: &SpectralWorkspace,
    p: &ModelParams,
    stages: &RkStages,
) -> Result<FlowMap> {
    let dt = stages.dt;
    let mut q_next = Vec::with_capacity(fm.q.len());
    let mut qx_next = Vec::with_capacity(fm.q.len());

    for (i, (&q0, &qx0)) in fm.q.iter().zip(&fm.qx).enumerate() {
        let f1 = speed(ws, p, &stages.u[0], q0);
        let g1 = stretch_rate(ws, p, &stages.u[0], &stages.ux[0], q0) * qx0;

        let qa = q0 + 0.5 * dt * f1;
        let qxa = qx0 + 0.5 * dt * g1;
        let f2 = speed(ws, p, &stages.u[1], qa);
        let g2 = stretch_rate(ws, p, &stages.u[1], &stages.ux[1], qa) * qxa;

        let qb = q0 + 0.5 * dt * f2;
        let qxb = qx0 + 0.5 * dt * g2;
        let f3 = speed(ws, p, &stages.u[2], qb);
        let g3 = stretch_rate(ws, p, &stages.u[2], &stages.ux[2], qb) * qxb;

        let qc = q0 + dt * f3;
        let qxc = qx0 + dt * g3;
        let f4 = speed(ws, p, &stages.u[3], qc);
        let g4 = stretch_rate(ws, p, &stages.u[3], &stages.ux[3], qc) * qxc;

        let q1 = q0 + dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
        let qx1 = qx0 + dt / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
        if qx1 <= 0.0 || qx1.is_nan() {
            return Err(GchError::NonPositiveFlowGradient {
                label: fm.labels[i],
                qx: qx1,
                t: stages.t + dt,
            });
        }
        q_next.push(q1);
        qx_next.push(qx1);
    }
    Ok(FlowMap {
        labels: fm.labels.clone(),
        q: q_next,
        qx: qx_next,
        t: stages.t + dt,
    })
}

/// max_i |y(t, q_i) q_x^{beta/N} - y_0(x_i) e^{-lambda t}| / (max|y_0| + 1).
/// `y0_at_labels` are the initial momentum values at the particle labels.
pub fn lagrangian_invariant_residual(
    fm: &FlowMap,
    ws: &SpectralWorkspace,
    p: &ModelParams,
    s: &State,
    y0_at_labels: &[f64],
) -> f64 {
    debug_assert_eq!(fm.q.len(), y0_at_labels.len());
    let y = ws.momentum(&s.u);
    let decay = (-p.lambda * (s.t)).exp();
    let exponent = p.stretch_exponent();
    let scale = y0_at_labels.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + 1.0;
    let mut worst = 0.0_f64;
    for ((&q, &qx), &y0) in fm.q.iter().zip(&fm.qx).zip(y0_at_labels) {
        let lhs = eval_trig(&ws.grid, &y, q) * qx.powf(exponent);
        worst = worst.max((lhs - y0 * decay).abs());
    }
    worst / scale
}

/// Observer that advances a flow map alongside the field solver.
pub struct FlowTracker<'a> {
    ws: &'a SpectralWorkspace,
    params: ModelParams,
    pub flow: FlowMap,
}

impl<'a> FlowTracker<'a> {
    pub fn new(ws: &'a SpectralWorkspace, params: ModelParams, flow: FlowMap) -> Self {
        FlowTracker { ws, params, flow }
    }
}

impl StepObserver for FlowTracker<'_> {
    fn after_step(&mut self, stages: &RkStages, _state: &State) -> Result<()> {
        self.flow = advance_flow(&self.flow, self.ws, &self.params, stages)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Solver, StepControl};
    use crate::model::Grid;

    fn constant_stages(c: f64, nx: usize, t: f64, dt: f64) -> RkStages {
        let u = Field::constant(c, nx);
        let z = Field::zeros(nx);
        RkStages {
            u: [u.clone(), u.clone(), u.clone(), u],
            ux: [z.clone(), z.clone(), z.clone(), z],
            t,
            dt,
        }
    }

    #[test]
    fn pure_dispersion_translates_labels() {
        // u = 0, k = 1.5: q(t, x) = x + 1.5 t, q_x = 1.
        let grid = Grid::new(10.0, 64).unwrap();
        let ws = SpectralWorkspace::new(grid, 1);
        let p = ModelParams::new(1, 2.0, 1.5, 0.0).unwrap();
        let mut fm = FlowMap::new(vec![-3.0, 0.0, 2.5]);
        let dt = 0.1;
        for step in 0..10 {
            let stages = constant_stages(0.0, 64, step as f64 * dt, dt);
            fm = advance_flow(&fm, &ws, &p, &stages).unwrap();
        }
        for (i, &x) in fm.labels.iter().enumerate() {
            assert!((fm.q[i] - (x + 1.5)).abs() < 1e-12);
            assert!((fm.qx[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_state_moves_at_speed_c_pow_n() {
        // u = c, k = 0, N = 3: q = x + c^3 t, q_x = 1.
        let grid = Grid::new(10.0, 64).unwrap();
        let ws = SpectralWorkspace::new(grid, 3);
        let p = ModelParams::new(3, 4.0, 0.0, 0.0).unwrap();
        let c = 1.2_f64;
        let mut fm = FlowMap::new(vec![0.5]);
        let dt = 0.05;
        for step in 0..20 {
            let stages = constant_stages(c, 64, step as f64 * dt, dt);
            fm = advance_flow(&fm, &ws, &p, &stages).unwrap();
        }
        assert!((fm.q[0] - (0.5 + c.powi(3))).abs() < 1e-12);
        assert!((fm.qx[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_ode_matches_accumulated_exponential() {
        // Cross-check the q_x ODE against exp of the trapezoid-accumulated
        // integrand N u^{N-1} u_x along the trajectory. The trapezoid route
        // is O(dt^2), so the step is refined until it resolves below the
        // target.
        let grid = Grid::new(10.0, 256).unwrap();
        let params = ModelParams::new(2, 3.0, 0.2, 0.1).unwrap();
        let solver = Solver::new(SpectralWorkspace::new(grid, 2), params);
        let st = solver.prepare_state(0.0, solver.ws.grid.sample(|x| 0.8 * (-x * x).exp()));
        let ctrl = StepControl {
            cfl: 0.03,
            ..Default::default()
        };

        let mut fm = FlowMap::new(vec![-1.0, 0.3, 1.7]);
        let mut accum = [0.0_f64; 3];
        let mut prev_rate: Vec<f64> =
            fm.q.iter()
                .map(|&q| {
                    let ux = solver.ws.derivative(&st.u, 1);
                    stretch_rate(&solver.ws, &params, &st.u, &ux, q)
                })
                .collect();

        let mut s = st;
        while s.t < 0.3 {
            let dt = solver.cfl_dt(&s, &ctrl).min(0.3 - s.t);
            let (s_next, stages) = solver.step_rk4(&s, dt);
            fm = advance_flow(&fm, &solver.ws, &params, &stages).unwrap();
            let ux_next = solver.ws.derivative(&s_next.u, 1);
            for ((acc, prev), &q) in accum.iter_mut().zip(&mut prev_rate).zip(&fm.q) {
                let rate = stretch_rate(&solver.ws, &params, &s_next.u, &ux_next, q);
                *acc += 0.5 * dt * (*prev + rate);
                *prev = rate;
            }
            s = s_next;
        }
        for (i, (&qx, acc)) in fm.qx.iter().zip(&accum).enumerate() {
            let rel = (qx - acc.exp()).abs() / acc.exp();
            assert!(rel < 1e-6, "particle {i}: qx {qx} vs exp {}", acc.exp());
        }
    }

    #[test]
    fn invariant_residual_zero_at_t0_and_for_uniform_states() {
        let grid = Grid::new(8.0, 128).unwrap();
        let params = ModelParams::new(1, 2.0, 0.0, 0.4).unwrap();
        let ws = SpectralWorkspace::new(grid, 1);
        let u0 = ws.grid.sample(|x| (-x * x).exp());
        let y0 = ws.momentum(&u0);
        let fm = FlowMap::new(vec![-2.0, 0.0, 1.0]);
        let y0_at: Vec<f64> = fm
            .labels
            .iter()
            .map(|&x| eval_trig(&grid, &y0, x))
            .collect();
        let s = State::new(0.0, u0);
        assert!(lagrangian_invariant_residual(&fm, &ws, &params, &s, &y0_at) < 1e-12);

        // Uniform solution: y = c e^{-lambda t}, q_x = 1.
        let c = 0.9;
        let s = State::new(1.3, Field::constant(c * (-0.4_f64 * 1.3).exp(), 128));
        let fm = FlowMap {
            labels: vec![0.0, 2.0],
            q: vec![0.5, 2.5],
            qx: vec![1.0, 1.0],
            t: 1.3,
        };
        let res = lagrangian_invariant_residual(&fm, &ws, &params, &s, &[c, c]);
        assert!(res < 1e-12, "uniform residual {res}");
    }

    #[test]
    fn gradient_collapse_is_flagged() {
        // Stage-varying synthetic fields can push the RK4 combination for
        // q_x below zero; the advance must flag it instead of powering a
        // negative base later.
        let grid = Grid::new(10.0, 64).unwrap();
        let ws = SpectralWorkspace::new(grid, 1);
        let p = ModelParams::new(1, 2.0, 0.0, 0.0).unwrap();
        let zero = Field::zeros(64);
        // Last stage only: u_x(0) = -12 while u(0) = 0 keeps the particle put.
        let amp = 12.0 * 10.0 / std::f64::consts::PI;
        let u4 = grid.sample(|x| -amp * (std::f64::consts::PI * x / 10.0).sin());
        let ux4 = ws.derivative(&u4, 1);
        let stages = RkStages {
            u: [zero.clone(), zero.clone(), zero.clone(), u4],
            ux: [zero.clone(), zero.clone(), zero, ux4],
            t: 0.0,
            dt: 1.0,
        };
        let fm = FlowMap::new(vec![0.0]);
        match advance_flow(&fm, &ws, &p, &stages) {
            Err(GchError::NonPositiveFlowGradient { .. }) => {}
            other => panic!("expected gradient collapse, got {other:?}"),
        }
    }
}
