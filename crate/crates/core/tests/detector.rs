//! Blow-up detector semantics on a genuine wave-breaking run.

use gchlab_core::dynamics::{BlowupTrigger, EvolveStatus, NoObserver, Solver, StepControl};
use gchlab_core::{Field, Grid, ModelParams, SpectralWorkspace, State};

fn breaking_solver(nx: usize) -> (Solver, State) {
    let grid = Grid::new(15.0, nx).unwrap();
    let params = ModelParams::new(1, 2.0, 0.0, 0.0).unwrap();
    let solver = Solver::new(SpectralWorkspace::new(grid, params.n), params);
    let u0 = solver.ws.grid.sample(|x| -5.0 * x * (-x * x).exp());
    let s0 = solver.prepare_state(0.0, u0);
    (solver, s0)
}

#[test]
fn detector_fires_during_wave_breaking_at_moderate_threshold() {
    // Odd data with a steep negative slope at the origin breaks in finite
    // time; the slope grows well past 3x its initial size before the grid
    // saturates, so a factor-3 detector must fire.
    let (solver, s0) = breaking_solver(1024);
    let ctrl = StepControl {
        blowup_slope_factor: 3.0,
        ..Default::default()
    };
    let out = solver.evolve(s0, 5.0, &ctrl, 1.0, &mut NoObserver).unwrap();
    assert_eq!(out.status, EvolveStatus::BlowupDetected);
    let diag = out.blowup.expect("diagnostics recorded");
    assert_eq!(diag.trigger, BlowupTrigger::SlopeGrowth);
    assert!(diag.sup_ux > 3.0 * 5.0, "sup u_x = {}", diag.sup_ux);
    assert!(
        diag.t < 1.0,
        "breaking should trigger early, got t = {}",
        diag.t
    );
}

#[test]
fn detector_stays_silent_on_a_smooth_decaying_run() {
    let grid = Grid::new(10.0, 256).unwrap();
    let params = ModelParams::new(1, 2.0, 0.2, 0.5).unwrap();
    let solver = Solver::new(SpectralWorkspace::new(grid, params.n), params);
    let s0 = solver.prepare_state(0.0, solver.ws.grid.sample(|x| 0.3 * (-x * x).exp()));
    let ctrl = StepControl {
        blowup_slope_factor: 3.0,
        ..Default::default()
    };
    let out = solver.evolve(s0, 2.0, &ctrl, 0.5, &mut NoObserver).unwrap();
    assert_eq!(out.status, EvolveStatus::ReachedFinalTime);
    assert!(out.blowup.is_none());
}

#[test]
fn non_finite_values_carry_detector_diagnostics() {
    // Data sized so the wave speed |u|^3 ~ 1e300 stays finite (no CFL
    // collapse) while the stage products overflow: the outcome must be a
    // detector hit with a finite diagnostic record, never a bare crash.
    let grid = Grid::new(10.0, 64).unwrap();
    let params = ModelParams::new(3, 3.0, 0.0, 0.0).unwrap();
    let solver = Solver::new(SpectralWorkspace::new(grid, params.n), params);
    let s0 = solver.prepare_state(0.0, solver.ws.grid.sample(|x| 1e100 * (-x * x).exp()));
    let ctrl = StepControl {
        dt_min: 1e-320,
        ..Default::default()
    };
    let out = solver.evolve(s0, 1.0, &ctrl, 0.5, &mut NoObserver).unwrap();
    assert_eq!(out.status, EvolveStatus::BlowupDetected);
    let diag = out.blowup.expect("diagnostics recorded");
    assert_eq!(diag.trigger, BlowupTrigger::NonFinite);
    assert!(diag.sup_u.is_finite() && diag.sup_ux.is_finite());
}

#[test]
fn step_underflow_is_reported_distinctly() {
    // A dt floor above the CFL-admissible step is not a blow-up; it must be
    // reported as StepUnderflow without detector diagnostics.
    let grid = Grid::new(10.0, 256).unwrap();
    let params = ModelParams::new(1, 2.0, 0.0, 0.0).unwrap();
    let solver = Solver::new(SpectralWorkspace::new(grid, params.n), params);
    let s0 = State::new(0.0, Field::constant(2.0, 256));
    let ctrl = StepControl {
        cfl: 0.3,
        dt_max: 0.05,
        dt_min: 0.04,
        blowup_slope_factor: 1e4,
    };
    // Speed 2 gives cfl dt = 0.3 * 0.078 / 2 = 0.0117 < dt_min.
    let out = solver.evolve(s0, 1.0, &ctrl, 0.5, &mut NoObserver).unwrap();
    assert_eq!(out.status, EvolveStatus::StepUnderflow);
    assert!(out.blowup.is_none());
}
