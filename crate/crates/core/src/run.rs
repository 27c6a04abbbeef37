//! Run orchestration: wires the solver, monitors, characteristics, and file
//! outputs together for one configured trajectory, and drives parameter
//! sweeps over config axes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::characteristics::{advance_flow, lagrangian_invariant_residual, FlowMap};
use crate::config::{MonitorKind, RunConfig};
use crate::diagnostics::{
    classify_global, decay_envelope, decay_envelope_check, f_positivity, h1_decay_residual,
    slope_dominance_check, tail_amplitudes, tail_monotonicity_check, GlobalVerdicts, TailConfig,
    TailMonotonicity, TailReport,
};
use crate::dynamics::{BlowupDiagnostics, EvolveStatus, RkStages, Solver, StepObserver};
use crate::error::{GchError, Result};
use crate::initial::InitialDatum;
use crate::interp::eval_trig;
use crate::model::{Field, State};
use crate::output::{fmt_f64, fmt_opt, CsvWriter};
use crate::spectral::SpectralWorkspace;

/// One monitor's worst value over the run, or the reason it never applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorSummary {
    Value(f64),
    Inapplicable(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalNorms {
    pub l2_u: f64,
    pub h1_u: f64,
    pub linf_u: f64,
    pub linf_ux: f64,
    pub l2_y: f64,
}

/// Extra tail aggregates beyond the per-sample columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailSummary {
    pub e_plus_min: f64,
    pub e_plus_max: f64,
    pub e_minus_min: f64,
    pub e_minus_max: f64,
    pub monotonicity: TailMonotonicity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub status: EvolveStatus,
    pub steps: u64,
    pub wall_ms: u128,
    pub final_time: f64,
    pub final_norms: FinalNorms,
    /// Worst value per configured monitor (max for residuals/violations,
    /// min for margins and signed amplitudes).
    pub monitor_worst: BTreeMap<String, MonitorSummary>,
    pub verdicts: GlobalVerdicts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup: Option<BlowupDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tails: Option<TailSummary>,
}

pub struct RunArtifacts {
    pub summary: RunSummary,
    pub out_dir: PathBuf,
    pub tail_reports: Vec<TailReport>,
    /// Column names of timeseries.csv, in order.
    pub columns: Vec<String>,
    /// One record per sample, matching the monitor columns.
    pub reports: Vec<MonitorReport>,
}

/// Whether the aggregate for a column is its maximum or minimum.
#[derive(Clone, Copy, PartialEq)]
enum Agg {
    Max,
    Min,
}

struct MonitorColumn {
    name: &'static str,
    agg: Agg,
}

fn columns_for(kind: MonitorKind) -> &'static [MonitorColumn] {
    match kind {
        MonitorKind::H1Decay => &[MonitorColumn {
            name: "h1_decay_residual",
            agg: Agg::Max,
        }],
        MonitorKind::EnergyBalance => &[MonitorColumn {
            name: "energy_balance_residual",
            agg: Agg::Max,
        }],
        MonitorKind::LagrangianInvariant => &[MonitorColumn {
            name: "lagrangian_residual",
            agg: Agg::Max,
        }],
        MonitorKind::MomentumLpDecay => &[MonitorColumn {
            name: "lp_decay_residual",
            agg: Agg::Max,
        }],
        MonitorKind::MomentumL2Decay => &[MonitorColumn {
            name: "l2_decay_residual",
            agg: Agg::Max,
        }],
        MonitorKind::SignPreservation => &[MonitorColumn {
            name: "sign_violation",
            agg: Agg::Max,
        }],
        MonitorKind::SlopeDominance => &[MonitorColumn {
            name: "slope_violation",
            agg: Agg::Max,
        }],
        MonitorKind::DecayEnvelope => &[MonitorColumn {
            name: "envelope_margin_rel",
            agg: Agg::Min,
        }],
        MonitorKind::Tails => &[
            MonitorColumn {
                name: "e_plus",
                agg: Agg::Min,
            },
            MonitorColumn {
                name: "e_minus",
                agg: Agg::Max,
            },
            MonitorColumn {
                name: "right_shape_error",
                agg: Agg::Max,
            },
            MonitorColumn {
                name: "left_shape_error",
                agg: Agg::Max,
            },
            MonitorColumn {
                name: "right_coeff_rel_err",
                agg: Agg::Max,
            },
            MonitorColumn {
                name: "left_coeff_rel_err",
                agg: Agg::Max,
            },
        ],
        MonitorKind::FPositivity => &[MonitorColumn {
            name: "f_value",
            agg: Agg::Min,
        }],
    }
}

/// Headline column used for the one-entry-per-monitor summary.
fn headline_column(kind: MonitorKind) -> &'static str {
    match kind {
        MonitorKind::Tails => "right_shape_error",
        other => columns_for(other)[0].name,
    }
}

/// Time-stamped record of the norms and every configured monitor value at
/// one sample (None marks an inapplicable monitor).
#[derive(Debug, Clone)]
pub struct MonitorReport {
    pub t: f64,
    pub dt: f64,
    /// l2_u, h1_u, linf_u, linf_ux, l2_y.
    pub norms: [f64; 5],
    pub values: Vec<Option<f64>>,
}

struct MonitorRig<'a> {
    solver: &'a Solver,
    cfg: &'a RunConfig,
    out_dir: &'a Path,
    u0: Field,
    y0: Field,
    y0_l2: f64,
    y0_lp: f64,
    lp_exponent: f64,
    y0_sign: Option<f64>,
    flow: Option<FlowMap>,
    y0_at_labels: Vec<f64>,
    support_flow: Option<FlowMap>,
    initial_support: Option<(f64, f64)>,
    rows: Vec<MonitorReport>,
    tail_reports: Vec<TailReport>,
    inapplicable: BTreeMap<&'static str, String>,
    sample_idx: u32,
    snapshot_idx: u32,
}

impl<'a> MonitorRig<'a> {
    fn new(solver: &'a Solver, cfg: &'a RunConfig, out_dir: &'a Path, s0: &State) -> Result<Self> {
        let ws = &solver.ws;
        let p = &solver.params;
        let u0 = s0.u.clone();
        let y0 = ws.momentum(&u0);
        let lp_exponent = p.n as f64 / p.beta;
        let y0_lp = if lp_exponent > 0.0 && p.beta != 0.0 {
            ws.lp_norm(&y0, lp_exponent)
        } else {
            f64::NAN
        };
        let deadband = 1e-6 * y0.max_abs();
        let y0_sign = if y0.min() >= -deadband {
            Some(1.0)
        } else if y0.max() <= deadband {
            Some(-1.0)
        } else {
            None
        };

        let wants_flow = cfg.monitors.contains(&MonitorKind::LagrangianInvariant);
        let flow = wants_flow.then(|| FlowMap::uniform(ws.grid.half_length, cfg.flow_particles));
        let y0_at_labels = flow
            .as_ref()
            .map(|fm| {
                fm.labels
                    .iter()
                    .map(|&x| eval_trig(&ws.grid, &y0, x))
                    .collect()
            })
            .unwrap_or_default();

        let initial_support = match &cfg.initial {
            InitialDatum::Bump { a, b, .. } => Some((*a, *b)),
            _ => None,
        };
        let support_flow =
            (cfg.monitors.contains(&MonitorKind::Tails) && initial_support.is_some()).then(|| {
                let (a, b) = initial_support.unwrap();
                FlowMap::new(vec![a, b])
            });

        Ok(MonitorRig {
            y0_l2: ws.lp_norm(&y0, 2.0),
            solver,
            cfg,
            out_dir,
            u0,
            y0,
            y0_lp,
            lp_exponent,
            y0_sign,
            flow,
            y0_at_labels,
            support_flow,
            initial_support,
            rows: Vec::new(),
            tail_reports: Vec::new(),
            inapplicable: BTreeMap::new(),
            sample_idx: 0,
            snapshot_idx: 0,
        })
    }

    fn note_inapplicable(&mut self, col: &'static str, err: &GchError) {
        self.inapplicable
            .entry(col)
            .or_insert_with(|| err.to_string());
    }

    fn eval_monitor(&mut self, kind: MonitorKind, state: &State, out: &mut Vec<Option<f64>>) {
        let ws = &self.solver.ws;
        let p = &self.solver.params;
        match kind {
            MonitorKind::H1Decay => match h1_decay_residual(ws, p, state, &self.u0) {
                Ok(v) => out.push(Some(v)),
                Err(e) => {
                    self.note_inapplicable("h1_decay_residual", &e);
                    out.push(None);
                }
            },
            MonitorKind::EnergyBalance => match self.solver.energy_balance_residual(state) {
                Ok(v) => out.push(Some(v)),
                Err(e) => {
                    self.note_inapplicable("energy_balance_residual", &e);
                    out.push(None);
                }
            },
            MonitorKind::LagrangianInvariant => match &self.flow {
                Some(fm) => out.push(Some(lagrangian_invariant_residual(
                    fm,
                    ws,
                    p,
                    state,
                    &self.y0_at_labels,
                ))),
                None => out.push(None),
            },
            MonitorKind::MomentumLpDecay => {
                if self.y0_lp.is_finite() && self.y0_lp > 0.0 {
                    let y = ws.momentum(&state.u);
                    let lp = ws.lp_norm(&y, self.lp_exponent);
                    let want = (-p.lambda * state.t).exp() * self.y0_lp;
                    out.push(Some((lp - want).abs() / self.y0_lp));
                } else {
                    self.note_inapplicable(
                        "lp_decay_residual",
                        &GchError::Inapplicable("zero or undefined initial L^{N/beta}".into()),
                    );
                    out.push(None);
                }
            }
            MonitorKind::MomentumL2Decay => {
                if p.n as f64 == 2.0 * p.beta && self.y0_l2 > 0.0 {
                    let y = ws.momentum(&state.u);
                    let l2 = ws.lp_norm(&y, 2.0);
                    let want = (-p.lambda * state.t).exp() * self.y0_l2;
                    out.push(Some((l2 - want).abs() / self.y0_l2));
                } else {
                    self.note_inapplicable(
                        "l2_decay_residual",
                        &GchError::Inapplicable(
                            "exact L2 momentum decay requires N = 2 beta".into(),
                        ),
                    );
                    out.push(None);
                }
            }
            MonitorKind::SignPreservation => match self.y0_sign {
                Some(sign) => {
                    let y = ws.momentum(&state.u);
                    let scale = self.y0.max_abs().max(1e-300);
                    let worst = y.values().iter().fold(0.0_f64, |m, &v| m.max(-(sign * v)));
                    out.push(Some(worst.max(0.0) / scale));
                }
                None => {
                    self.note_inapplicable(
                        "sign_violation",
                        &GchError::Inapplicable("initial momentum changes sign".into()),
                    );
                    out.push(None);
                }
            },
            MonitorKind::SlopeDominance => match slope_dominance_check(ws, state) {
                Ok(v) => out.push(Some(v)),
                Err(e) => {
                    self.note_inapplicable("slope_violation", &e);
                    out.push(None);
                }
            },
            MonitorKind::DecayEnvelope => {
                match (
                    decay_envelope_check(ws, p, state, &self.y0),
                    decay_envelope(p, self.y0_l2, state.t),
                ) {
                    (Ok(margin), Ok(env)) => out.push(Some(margin / env)),
                    (Err(e), _) | (_, Err(e)) => {
                        self.note_inapplicable("envelope_margin_rel", &e);
                        out.push(None);
                    }
                }
            }
            MonitorKind::Tails => {
                let report = match (&self.support_flow, self.initial_support) {
                    (Some(fm), Some(_)) => {
                        tail_amplitudes(ws, p, state, (fm.q[0], fm.q[1]), &TailConfig::default())
                    }
                    _ => Err(GchError::Inapplicable(
                        "tail monitor requires compactly supported bump initial data".into(),
                    )),
                };
                match report {
                    Ok(rep) => {
                        out.push(Some(rep.e_plus));
                        out.push(Some(rep.e_minus));
                        out.push(rep.right_shape_error);
                        out.push(rep.left_shape_error);
                        let half = rep.e_plus / 2.0;
                        out.push(rep.right_coeff.map(|c| ((c - half) / half).abs()));
                        let halfm = rep.e_minus / 2.0;
                        out.push(rep.left_coeff.map(|c| ((c - halfm) / halfm).abs()));
                        self.tail_reports.push(rep);
                    }
                    Err(e) => {
                        self.note_inapplicable("e_plus", &e);
                        for _ in 0..6 {
                            out.push(None);
                        }
                    }
                }
            }
            MonitorKind::FPositivity => match f_positivity(ws, p, state) {
                Ok(v) => out.push(Some(v)),
                Err(e) => {
                    self.note_inapplicable("f_value", &e);
                    out.push(None);
                }
            },
        }
    }

    fn write_snapshot(&mut self, state: &State) -> Result<()> {
        let ws = &self.solver.ws;
        let dir = self.out_dir.join("snapshots");
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(format!("u_{:04}.csv", self.snapshot_idx));
        self.snapshot_idx += 1;
        let ux = ws.derivative(&state.u, 1);
        let y = ws.momentum(&state.u);
        let mut csv = CsvWriter::create(path, &["x", "u", "u_x", "y"])?;
        for j in 0..ws.grid.nx {
            csv.row(&[
                fmt_f64(ws.grid.node(j)),
                fmt_f64(state.u[j]),
                fmt_f64(ux[j]),
                fmt_f64(y[j]),
            ])?;
        }
        csv.finish()
    }
}

impl StepObserver for MonitorRig<'_> {
    fn after_step(&mut self, stages: &RkStages, _state: &State) -> Result<()> {
        let ws = &self.solver.ws;
        let p = self.solver.params;
        if let Some(fm) = &self.flow {
            self.flow = Some(advance_flow(fm, ws, &p, stages)?);
        }
        if let Some(fm) = &self.support_flow {
            self.support_flow = Some(advance_flow(fm, ws, &p, stages)?);
        }
        Ok(())
    }

    fn at_sample(&mut self, state: &State, dt: f64) -> Result<()> {
        let ws = &self.solver.ws;
        let ux = ws.derivative(&state.u, 1);
        let y = ws.momentum(&state.u);
        let norms = [
            ws.sobolev_norm(&state.u, 0.0),
            ws.sobolev_norm(&state.u, 1.0),
            state.u.max_abs(),
            ux.max_abs(),
            ws.lp_norm(&y, 2.0),
        ];
        let mut values = Vec::new();
        for &kind in &self.cfg.monitors {
            self.eval_monitor(kind, state, &mut values);
        }
        self.rows.push(MonitorReport {
            t: state.t,
            dt,
            norms,
            values,
        });

        let stride = self.cfg.output.snapshot_stride;
        let take = if stride == 0 {
            self.sample_idx == 0
        } else {
            self.sample_idx.is_multiple_of(stride)
        };
        if take {
            self.write_snapshot(state)?;
        }
        self.sample_idx += 1;
        Ok(())
    }
}

/// Runs one configured trajectory and writes timeseries.csv,
/// snapshots/u_XXXX.csv, and summary.json into `out_dir`.
pub fn simulate(cfg: &RunConfig, out_dir: impl AsRef<Path>) -> Result<RunArtifacts> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    cfg.validate()?;

    let params = cfg.model_params()?;
    let grid = cfg.grid()?;
    let ctrl = cfg.step_control()?;
    let ws = SpectralWorkspace::new(grid, params.n);
    let solver = Solver::new(ws, params);
    let u0 = cfg.initial.sample(&solver.ws)?;
    let s0 = solver.prepare_state(0.0, u0);
    if !s0.u.is_finite() {
        return Err(GchError::NonFinite);
    }

    let start = Instant::now();
    let mut rig = MonitorRig::new(&solver, cfg, out_dir, &s0)?;
    let verdicts = classify_global(&solver.ws, &params, &rig.y0);
    let outcome = solver.evolve(s0, cfg.time.t_end, &ctrl, cfg.sample_interval(), &mut rig)?;
    let wall_ms = start.elapsed().as_millis();

    // Final snapshot unless the stride already captured it.
    rig.write_snapshot(&outcome.final_state)?;

    // timeseries.csv
    let mut columns: Vec<String> = vec![
        "t".into(),
        "dt".into(),
        "l2_u".into(),
        "h1_u".into(),
        "linf_u".into(),
        "linf_ux".into(),
        "l2_y".into(),
    ];
    for &kind in &cfg.monitors {
        for col in columns_for(kind) {
            columns.push(col.name.into());
        }
    }
    let mut csv = CsvWriter::create(
        out_dir.join("timeseries.csv"),
        &columns.iter().map(String::as_str).collect::<Vec<_>>(),
    )?;
    for row in &rig.rows {
        let mut cells = vec![fmt_f64(row.t), fmt_f64(row.dt)];
        cells.extend(row.norms.iter().map(|&v| fmt_f64(v)));
        cells.extend(row.values.iter().map(|&v| fmt_opt(v)));
        csv.row(&cells)?;
    }
    csv.finish()?;

    // Aggregate monitor columns.
    let mut monitor_worst = BTreeMap::new();
    for &kind in &cfg.monitors {
        let head = headline_column(kind);
        let mut col_idx = 0;
        let mut agg_value: Option<f64> = None;
        let mut agg_dir = Agg::Max;
        for (i, col) in columns_for(kind).iter().enumerate() {
            if col.name == head {
                col_idx = i;
                agg_dir = col.agg;
            }
        }
        // Offset of this monitor's first column inside `values`.
        let mut offset = 0;
        for &k in &cfg.monitors {
            if k == kind {
                break;
            }
            offset += columns_for(k).len();
        }
        for row in &rig.rows {
            if let Some(v) = row.values[offset + col_idx] {
                agg_value = Some(match (agg_value, agg_dir) {
                    (None, _) => v,
                    (Some(a), Agg::Max) => a.max(v),
                    (Some(a), Agg::Min) => a.min(v),
                });
            }
        }
        let summary = match agg_value {
            Some(v) => MonitorSummary::Value(v),
            None => {
                // The recorded reason may sit under any of the monitor's
                // columns; take the first one found.
                let reason = columns_for(kind)
                    .iter()
                    .find_map(|c| rig.inapplicable.get(c.name).cloned())
                    .unwrap_or_else(|| "no applicable samples".into());
                MonitorSummary::Inapplicable(reason)
            }
        };
        monitor_worst.insert(kind.name().to_string(), summary);
    }

    let tails = (!rig.tail_reports.is_empty()).then(|| {
        let eps: Vec<f64> = rig.tail_reports.iter().map(|r| r.e_plus).collect();
        let ems: Vec<f64> = rig.tail_reports.iter().map(|r| r.e_minus).collect();
        TailSummary {
            e_plus_min: eps.iter().cloned().fold(f64::INFINITY, f64::min),
            e_plus_max: eps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            e_minus_min: ems.iter().cloned().fold(f64::INFINITY, f64::min),
            e_minus_max: ems.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            monotonicity: tail_monotonicity_check(&rig.tail_reports, &params),
        }
    });

    let ws = &solver.ws;
    let fs = &outcome.final_state;
    let ux = ws.derivative(&fs.u, 1);
    let y = ws.momentum(&fs.u);
    let summary = RunSummary {
        config: cfg.clone(),
        status: outcome.status,
        steps: outcome.steps,
        wall_ms,
        final_time: fs.t,
        final_norms: FinalNorms {
            l2_u: ws.sobolev_norm(&fs.u, 0.0),
            h1_u: ws.sobolev_norm(&fs.u, 1.0),
            linf_u: fs.u.max_abs(),
            linf_ux: ux.max_abs(),
            l2_y: ws.lp_norm(&y, 2.0),
        },
        monitor_worst,
        verdicts,
        blowup: outcome.blowup,
        tails,
    };

    let json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(out_dir.join("summary.json"), json)?;

    Ok(RunArtifacts {
        summary,
        out_dir: out_dir.to_path_buf(),
        tail_reports: rig.tail_reports,
        columns,
        reports: rig.rows,
    })
}

/// One axis of a sweep: a dotted config path and its values.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub axis_values: Vec<f64>,
    pub outcome: String,
    pub threshold: Option<f64>,
    pub below_threshold: Option<bool>,
    pub out_dir: PathBuf,
}

/// Applies `value` at a dotted path inside the config JSON.
fn set_path(cfg_json: &mut serde_json::Value, path: &str, value: f64) -> Result<()> {
    let mut node = cfg_json;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            GchError::Config(format!("axis path '{path}' does not address an object"))
        })?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), serde_json::json!(value));
            return Ok(());
        }
        node = obj
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::json!({}));
    }
    Err(GchError::Config(format!("empty axis path '{path}'")))
}

/// Runs the cartesian grid of axis values concurrently (capped by
/// GCHLAB_THREADS) and writes classification.csv into `out_dir`.
pub fn sweep(
    template: &RunConfig,
    axes: &[SweepAxis],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<SweepCell>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let base = serde_json::to_value(template)?;

    let mut cells: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        let mut next = Vec::new();
        for prefix in &cells {
            for &v in &axis.values {
                let mut row = prefix.clone();
                row.push(v);
                next.push(row);
            }
        }
        cells = next;
    }

    let threads = std::env::var("GCHLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });

    let jobs: Vec<(usize, Vec<f64>)> = cells.into_iter().enumerate().collect();
    let results = std::sync::Mutex::new(Vec::<(usize, SweepCell)>::new());
    let next_job = std::sync::atomic::AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..threads.min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next_job.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let (idx, values) = &jobs[i];
                let cell_dir = out_dir.join(format!("cell_{idx:04}"));
                let mut cfg_json = base.clone();
                let mut err: Option<String> = None;
                for (axis, &v) in axes.iter().zip(values.iter()) {
                    if let Err(e) = set_path(&mut cfg_json, &axis.path, v) {
                        err = Some(e.to_string());
                    }
                }
                let cell = match err {
                    Some(msg) => SweepCell {
                        axis_values: values.clone(),
                        outcome: format!("error: {msg}"),
                        threshold: None,
                        below_threshold: None,
                        out_dir: cell_dir,
                    },
                    None => {
                        match serde_json::from_value::<RunConfig>(cfg_json)
                            .map_err(|e| GchError::Config(e.to_string()))
                            .and_then(|cfg| {
                                cfg.validate()?;
                                simulate(&cfg, &cell_dir).map(|a| (cfg, a))
                            }) {
                            Ok((cfg, art)) => {
                                let p = cfg.model_params().expect("validated");
                                let threshold =
                                    crate::diagnostics::small_momentum_threshold(&p).ok();
                                let ws =
                                    SpectralWorkspace::new(cfg.grid().expect("validated"), p.n);
                                let below = threshold.map(|th| {
                                    let u0 = cfg
                                        .initial
                                        .sample(&ws)
                                        .map(|u| ws.dealias(&u))
                                        .expect("validated");
                                    let y0 = ws.momentum(&u0);
                                    ws.lp_norm(&y0, 2.0) <= th
                                });
                                SweepCell {
                                    axis_values: values.clone(),
                                    outcome: format!("{:?}", art.summary.status),
                                    threshold,
                                    below_threshold: below,
                                    out_dir: art.out_dir,
                                }
                            }
                            Err(e) => SweepCell {
                                axis_values: values.clone(),
                                outcome: format!("error: {e}"),
                                threshold: None,
                                below_threshold: None,
                                out_dir: cell_dir,
                            },
                        }
                    }
                };
                results.lock().unwrap().push((*idx, cell));
            });
        }
    });

    let mut tagged: Vec<(usize, SweepCell)> = results.into_inner().unwrap();
    tagged.sort_by_key(|(i, _)| *i);
    let cells: Vec<SweepCell> = tagged.into_iter().map(|(_, c)| c).collect();

    let mut header: Vec<String> = axes.iter().map(|a| a.path.clone()).collect();
    header.extend(
        ["outcome", "threshold_3_1", "below_threshold", "cell_dir"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut csv = CsvWriter::create(
        out_dir.join("classification.csv"),
        &header.iter().map(String::as_str).collect::<Vec<_>>(),
    )?;
    for cell in &cells {
        let mut row: Vec<String> = cell.axis_values.iter().map(|&v| fmt_f64(v)).collect();
        row.push(cell.outcome.clone());
        row.push(cell.threshold.map(fmt_f64).unwrap_or_default());
        row.push(
            cell.below_threshold
                .map(|b| b.to_string())
                .unwrap_or_default(),
        );
        row.push(cell.out_dir.display().to_string());
        csv.row(&row)?;
    }
    csv.finish()?;
    Ok(cells)
}
