//! Right-hand sides, time stepping, and the blow-up detector.
//!
//! The evolution runs on the nonlocal velocity form
//!
//!   u_t + (u^N + k) u_x = -d_x (1 - d_xx)^{-1} h - (1 - d_xx)^{-1} g,
//!
//! with the sources
//!
//!   h = beta/(N+1) u^{N+1} + (3N - beta)/2 u^{N-1} u_x^2 - lambda u_x,
//!   g = (N-1)(beta - N)/2 u^{N-2} u_x^3 + lambda u.
//!
//! The local momentum form
//!
//!   y_t = -(u^N + k) y_x - (beta/N) y (u^N)_x - lambda y,   y = u - u_xx,
//!
//! is kept as a cross-validation route only: applying the momentum map to the
//! nonlocal RHS must reproduce it to rounding on dealiased states.

use num_complex::Complex64;

use crate::error::{GchError, Result};
use crate::model::{Field, ModelParams, State};
use crate::spectral::SpectralWorkspace;

/// Split right-hand side of the nonlocal form.
#[derive(Debug, Clone)]
pub struct RhsTerms {
    /// -(u^N + k) u_x, dealiased.
    pub transport: Field,
    pub h: Field,
    pub g: Field,
    /// -d_x G*h - G*g.
    pub nonlocal: Field,
    /// transport + nonlocal.
    pub total: Field,
}

/// Step-size and detector knobs.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub blowup_slope_factor: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl: 0.3,
            dt_max: 0.05,
            dt_min: 1e-10,
            blowup_slope_factor: 1e4,
        }
    }
}

impl StepControl {
    pub fn validated(self) -> Result<Self> {
        if self.cfl <= 0.0 || self.cfl > 1.0 || self.cfl.is_nan() {
            return Err(GchError::InvalidParams("cfl must be in (0, 1]".into()));
        }
        if self.dt_min <= 0.0 || self.dt_min >= self.dt_max || self.dt_min.is_nan() {
            return Err(GchError::InvalidParams("need 0 < dt_min < dt_max".into()));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EvolveStatus {
    ReachedFinalTime,
    BlowupDetected,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BlowupTrigger {
    SlopeGrowth,
    AmplitudeGrowth,
    NonFinite,
}

/// Sup norms at the moment the detector fired.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct BlowupDiagnostics {
    pub t: f64,
    pub sup_u: f64,
    pub sup_ux: f64,
    pub trigger: BlowupTrigger,
}

#[derive(Debug)]
pub struct EvolveOutcome {
    pub status: EvolveStatus,
    pub final_state: State,
    pub steps: u64,
    pub blowup: Option<BlowupDiagnostics>,
}

/// The four RK stage snapshots of one accepted step, for observers that must
/// integrate along the same stage times (the characteristics flow).
pub struct RkStages {
    /// Stage fields at t, t + dt/2, t + dt/2, t + dt.
    pub u: [Field; 4],
    pub ux: [Field; 4],
    pub t: f64,
    pub dt: f64,
}

/// Observer hooks driven by [`Solver::evolve`].
pub trait StepObserver {
    /// Called after every accepted step with the stage snapshots.
    fn after_step(&mut self, _stages: &RkStages, _state: &State) -> Result<()> {
        Ok(())
    }
    /// Called at the initial state, at every crossing of the sampling
    /// interval, and at the final state. `dt` is the step just taken
    /// (0 for the endpoints emitted outside the loop).
    fn at_sample(&mut self, _state: &State, _dt: f64) -> Result<()> {
        Ok(())
    }
}

/// No-op observer.
pub struct NoObserver;

impl StepObserver for NoObserver {}

/// Adapter running a closure at each sample.
pub struct SampleFn<F: FnMut(&State, f64) -> Result<()>>(pub F);

impl<F: FnMut(&State, f64) -> Result<()>> StepObserver for SampleFn<F> {
    fn at_sample(&mut self, state: &State, dt: f64) -> Result<()> {
        (self.0)(state, dt)
    }
}

/// h = beta/(N+1) u^{N+1} + (3N - beta)/2 u^{N-1} u_x^2 - lambda u_x,
/// evaluated pointwise and dealiased. For N = 1 the u^{N-1} factor is 1.
pub fn source_h(ws: &SpectralWorkspace, p: &ModelParams, u: &Field, ux: &Field) -> Field {
    ws.dealias(&source_h_raw(p, u, ux))
}

fn source_h_raw(p: &ModelParams, u: &Field, ux: &Field) -> Field {
    let n = p.n as i32;
    let ca = p.h_power_coeff();
    let cb = p.h_slope_coeff();
    let lam = p.lambda;
    let vals = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&uj, &uxj)| {
            let u_nm1 = uj.powi(n - 1);
            ca * u_nm1 * uj * uj + cb * u_nm1 * uxj * uxj - lam * uxj
        })
        .collect();
    Field::new(vals)
}

/// g = (N-1)(beta - N)/2 u^{N-2} u_x^3 + lambda u, dealiased. The cubic term
/// is skipped before forming u^{N-2} whenever its coefficient vanishes
/// (N = 1 or beta = N), which keeps N = 1 clear of u^{-1}.
pub fn source_g(ws: &SpectralWorkspace, p: &ModelParams, u: &Field, ux: &Field) -> Field {
    ws.dealias(&source_g_raw(p, u, ux))
}

fn source_g_raw(p: &ModelParams, u: &Field, ux: &Field) -> Field {
    let cc = p.g_cubic_coeff();
    let lam = p.lambda;
    if cc == 0.0 {
        return u.scaled(lam);
    }
    let n = p.n as i32;
    let vals = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&uj, &uxj)| cc * uj.powi(n - 2) * uxj.powi(3) + lam * uj)
        .collect();
    Field::new(vals)
}

/// The solver couples one workspace with one parameter set.
pub struct Solver {
    pub ws: SpectralWorkspace,
    pub params: ModelParams,
}

impl Solver {
    pub fn new(ws: SpectralWorkspace, params: ModelParams) -> Self {
        debug_assert_eq!(ws.n_order(), params.n);
        Solver { ws, params }
    }

    /// Dealiases initial data so every later product stays inside the mask.
    pub fn prepare_state(&self, t: f64, u: Field) -> State {
        State::new(t, self.ws.dealias(&u))
    }

    /// One RHS evaluation in spectral-friendly order. Returns (du/dt, u_x).
    fn rhs_stage(&self, u: &Field) -> (Field, Field) {
        let ws = &self.ws;
        let p = &self.params;
        let nx = ws.grid.nx;
        let xi = ws.wavenumbers();
        let helm = ws.helmholtz_table();

        let spec_u = ws.forward(u);
        let mut spec_ux = spec_u.clone();
        for (j, c) in spec_ux.iter_mut().enumerate() {
            *c *= Complex64::new(0.0, xi[j]);
            if j == nx / 2 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let ux = ws.inverse(spec_ux);

        let n = p.n as i32;
        let k = p.k;
        let transport = Field::new(
            u.values()
                .iter()
                .zip(ux.values())
                .map(|(&uj, &uxj)| -(uj.powi(n) + k) * uxj)
                .collect(),
        );
        let h = source_h_raw(p, u, &ux);
        let g = source_g_raw(p, u, &ux);

        let mut spec_t = ws.forward(&transport);
        let mut spec_h = ws.forward(&h);
        let mut spec_g = ws.forward(&g);
        ws.mask_spec(&mut spec_t);
        ws.mask_spec(&mut spec_h);
        ws.mask_spec(&mut spec_g);

        for j in 0..nx {
            let dxg = Complex64::new(0.0, xi[j] * helm[j]);
            spec_t[j] -= dxg * spec_h[j] + helm[j] * spec_g[j];
        }
        (ws.inverse(spec_t), ux)
    }

    /// Full term split of the nonlocal form, for diagnostics and tests.
    pub fn rhs_nonlocal(&self, s: &State) -> Result<RhsTerms> {
        let ws = &self.ws;
        let ux = ws.derivative(&s.u, 1);
        let n = self.params.n as i32;
        let k = self.params.k;
        let transport = ws.dealias(&Field::new(
            s.u.values()
                .iter()
                .zip(ux.values())
                .map(|(&uj, &uxj)| -(uj.powi(n) + k) * uxj)
                .collect(),
        ));
        let h = source_h(ws, &self.params, &s.u, &ux);
        let g = source_g(ws, &self.params, &s.u, &ux);
        let nonlocal = ws
            .derivative(&ws.helmholtz_solve(&h), 1)
            .scaled(-1.0)
            .sub(&ws.helmholtz_solve(&g));
        let total = transport.add(&nonlocal);
        if !total.is_finite() {
            return Err(GchError::NonFinite);
        }
        Ok(RhsTerms {
            transport,
            h,
            g,
            nonlocal,
            total,
        })
    }

    /// Momentum-form time derivative y_t, dealiased.
    pub fn rhs_local_y(&self, s: &State) -> Result<Field> {
        let ws = &self.ws;
        let p = &self.params;
        let y = ws.momentum(&s.u);
        let yx = ws.derivative(&y, 1);
        let un = s.u.powi(p.n as i32);
        let unx = ws.derivative(&un, 1);
        let bn = p.stretch_exponent();
        let k = p.k;
        let lam = p.lambda;
        let vals = (0..s.u.len())
            .map(|j| -(un[j] + k) * yx[j] - bn * y[j] * unx[j] - lam * y[j])
            .collect();
        let out = ws.dealias(&Field::new(vals));
        if !out.is_finite() {
            return Err(GchError::NonFinite);
        }
        Ok(out)
    }

    /// dt = min(dt_max, cfl dx / max_j(|u_j|^N + |k| + eps)); the wave speed
    /// is the characteristic speed u^N + k.
    pub fn cfl_dt(&self, s: &State, ctrl: &StepControl) -> f64 {
        let n = self.params.n as i32;
        let k_abs = self.params.k.abs();
        let speed =
            s.u.values()
                .iter()
                .fold(0.0_f64, |m, &v| m.max(v.abs().powi(n) + k_abs + 1e-14));
        (ctrl.cfl * self.ws.grid.dx() / speed).min(ctrl.dt_max)
    }

    /// Classical RK4 step on the nonlocal form; the final combination is
    /// dealiased. Also returns the stage snapshots for coupled observers.
    pub fn step_rk4(&self, s: &State, dt: f64) -> (State, RkStages) {
        let (k1, ux1) = self.rhs_stage(&s.u);
        let u2 = s.u.axpy(0.5 * dt, &k1);
        let (k2, ux2) = self.rhs_stage(&u2);
        let u3 = s.u.axpy(0.5 * dt, &k2);
        let (k3, ux3) = self.rhs_stage(&u3);
        let u4 = s.u.axpy(dt, &k3);
        let (k4, ux4) = self.rhs_stage(&u4);

        let mut combo = Vec::with_capacity(s.u.len());
        for j in 0..s.u.len() {
            combo.push(s.u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        }
        let u_next = self.ws.dealias(&Field::new(combo));
        let stages = RkStages {
            u: [s.u.clone(), u2, u3, u4],
            ux: [ux1, ux2, ux3, ux4],
            t: s.t,
            dt,
        };
        (State::new(s.t + dt, u_next), stages)
    }

    /// Steps from s0 to t_end with CFL-limited dt, running the blow-up
    /// detector after every step and the sampling hook whenever at least
    /// `sample_interval` has elapsed since the last sample (plus the
    /// initial and final states).
    ///
    /// Detector: fires when the sup norm of u_x (or of u) exceeds
    /// blowup_slope_factor * max(1, initial sup), or when non-finite values
    /// appear. A dt collapse below dt_min without those triggers is reported
    /// separately as StepUnderflow.
    pub fn evolve(
        &self,
        s0: State,
        t_end: f64,
        ctrl: &StepControl,
        sample_interval: f64,
        observer: &mut dyn StepObserver,
    ) -> Result<EvolveOutcome> {
        assert!(t_end > s0.t, "t_end must exceed the initial time");
        let ws = &self.ws;
        let sup_u0 = s0.u.max_abs();
        let sup_ux0 = ws.derivative(&s0.u, 1).max_abs();
        let u_bound = ctrl.blowup_slope_factor * sup_u0.max(1.0);
        let ux_bound = ctrl.blowup_slope_factor * sup_ux0.max(1.0);

        let mut s = s0;
        let mut steps: u64 = 0;
        let mut last_sample_t = s.t;
        observer.at_sample(&s, 0.0)?;

        let eps_end = 1e-12 * t_end.abs().max(1.0);
        while s.t < t_end - eps_end {
            // Underflow is judged on the CFL-chosen step, not on the
            // end-of-run clamp, which can legitimately be tiny.
            let dt_cfl = self.cfl_dt(&s, ctrl);
            if dt_cfl < ctrl.dt_min {
                return Ok(EvolveOutcome {
                    status: EvolveStatus::StepUnderflow,
                    final_state: s,
                    steps,
                    blowup: None,
                });
            }
            let dt = dt_cfl.min(t_end - s.t);
            let (s_next, stages) = self.step_rk4(&s, dt);
            steps += 1;

            if !s_next.u.is_finite() {
                let diag = BlowupDiagnostics {
                    t: s_next.t,
                    sup_u: s.u.max_abs(),
                    sup_ux: stages.ux[0].max_abs(),
                    trigger: BlowupTrigger::NonFinite,
                };
                return Ok(EvolveOutcome {
                    status: EvolveStatus::BlowupDetected,
                    final_state: s,
                    steps,
                    blowup: Some(diag),
                });
            }

            observer.after_step(&stages, &s_next)?;
            s = s_next;

            let sup_u = s.u.max_abs();
            let sup_ux = ws.derivative(&s.u, 1).max_abs();
            if sup_ux > ux_bound || sup_u > u_bound {
                let trigger = if sup_ux > ux_bound {
                    BlowupTrigger::SlopeGrowth
                } else {
                    BlowupTrigger::AmplitudeGrowth
                };
                let diag = BlowupDiagnostics {
                    t: s.t,
                    sup_u,
                    sup_ux,
                    trigger,
                };
                observer.at_sample(&s, dt)?;
                return Ok(EvolveOutcome {
                    status: EvolveStatus::BlowupDetected,
                    final_state: s,
                    steps,
                    blowup: Some(diag),
                });
            }

            if s.t - last_sample_t >= sample_interval - eps_end {
                observer.at_sample(&s, dt)?;
                last_sample_t = s.t;
            }
        }
        // Final state, unless the sampling just emitted it.
        if s.t - last_sample_t > eps_end {
            observer.at_sample(&s, 0.0)?;
        }
        Ok(EvolveOutcome {
            status: EvolveStatus::ReachedFinalTime,
            final_state: s,
            steps,
            blowup: None,
        })
    }

    /// |d/dt int y^2 - [(1 - 2 beta/N) int y^2 (u^N)_x - 2 lambda int y^2]|
    /// normalized by int y^2 + 1, with d/dt evaluated through the
    /// momentum-form RHS as 2 int y y_t.
    pub fn energy_balance_residual(&self, s: &State) -> Result<f64> {
        let ws = &self.ws;
        let p = &self.params;
        let dx = ws.grid.dx();
        let y = ws.momentum(&s.u);
        let yt = self.rhs_local_y(s)?;
        let lhs: f64 = 2.0
            * dx
            * y.values()
                .iter()
                .zip(yt.values())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let un = s.u.powi(p.n as i32);
        let unx = ws.derivative(&un, 1);
        let y2_int: f64 = dx * y.values().iter().map(|v| v * v).sum::<f64>();
        let coupling: f64 = dx
            * y.values()
                .iter()
                .zip(unx.values())
                .map(|(a, b)| a * a * b)
                .sum::<f64>();
        let rhs = (1.0 - 2.0 * p.stretch_exponent()) * coupling - 2.0 * p.lambda * y2_int;
        Ok((lhs - rhs).abs() / (y2_int + 1.0))
    }
}
