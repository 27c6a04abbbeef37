//! Closed-form reference solutions for regression baselines.

use std::path::Path;

use crate::error::{GchError, Result};
use crate::model::Grid;
use crate::output::{fmt_f64, CsvWriter};

/// Peaked traveling waves of the two integrable reductions and the spatially
/// uniform decaying solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactKind {
    /// u(t, x) = c e^{-|x - center - c t|}
    ChPeakon { c: f64, center: f64 },
    /// u(t, x) = sqrt(c) e^{-|x - center - c t|}
    NovikovPeakon { c: f64, center: f64 },
    /// u(t, x) = c e^{-lambda t}
    UniformDecay { c: f64, lambda: f64 },
}

impl ExactKind {
    pub fn parse(kind: &str, params: &serde_json::Value) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params.get(key).and_then(|v| v.as_f64()).ok_or_else(|| {
                GchError::Config(format!("exact kind '{kind}' needs numeric '{key}'"))
            })
        };
        match kind {
            "ch_peakon" => Ok(ExactKind::ChPeakon {
                c: get("c")?,
                center: params.get("center").and_then(|v| v.as_f64()).unwrap_or(0.0),
            }),
            "novikov_peakon" => {
                let c = get("c")?;
                if c < 0.0 {
                    return Err(GchError::Config("novikov_peakon requires c >= 0".into()));
                }
                Ok(ExactKind::NovikovPeakon {
                    c,
                    center: params.get("center").and_then(|v| v.as_f64()).unwrap_or(0.0),
                })
            }
            "uniform_decay" => Ok(ExactKind::UniformDecay {
                c: get("c")?,
                lambda: get("lambda")?,
            }),
            other => Err(GchError::UnknownKind(other.into())),
        }
    }

    /// Sample at time t and position x on a periodic domain of half-length l
    /// (the peakon crest is folded to its nearest periodic image).
    pub fn eval(&self, l: f64, t: f64, x: f64) -> f64 {
        let folded = |pos: f64| {
            let d = x - pos;
            d - 2.0 * l * (d / (2.0 * l)).round()
        };
        match *self {
            ExactKind::ChPeakon { c, center } => c * (-folded(center + c * t).abs()).exp(),
            ExactKind::NovikovPeakon { c, center } => {
                c.sqrt() * (-folded(center + c * t).abs()).exp()
            }
            ExactKind::UniformDecay { c, lambda } => c * (-lambda * t).exp(),
        }
    }
}

/// Writes u_%04d.csv (columns x, u) for each requested time.
pub fn emit(kind: &ExactKind, grid: &Grid, times: &[f64], out_dir: impl AsRef<Path>) -> Result<()> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let l = grid.half_length;
    for (i, &t) in times.iter().enumerate() {
        let mut csv = CsvWriter::create(out_dir.join(format!("u_{i:04}.csv")), &["x", "u"])?;
        for j in 0..grid.nx {
            let x = grid.node(j);
            csv.row(&[fmt_f64(x), fmt_f64(kind.eval(l, t, x))])?;
        }
        csv.finish()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_profiles() {
        let k = ExactKind::ChPeakon {
            c: 1.0,
            center: 0.0,
        };
        assert!((k.eval(30.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((k.eval(30.0, 0.0, 2.0) - (-2.0_f64).exp()).abs() < 1e-15);

        // Novikov peakon with c = 4 at t = 1 peaks at x = 4 with height 2.
        let k = ExactKind::NovikovPeakon {
            c: 4.0,
            center: 0.0,
        };
        assert!((k.eval(30.0, 1.0, 4.0) - 2.0).abs() < 1e-15);

        // Uniform decay: c e^{-lambda t}.
        let k = ExactKind::UniformDecay {
            c: 2.0,
            lambda: 0.5,
        };
        assert!((k.eval(30.0, 2.0, -7.3) - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn parse_kinds() {
        let p = serde_json::json!({"c": 1.5, "center": 2.0});
        assert!(matches!(
            ExactKind::parse("ch_peakon", &p).unwrap(),
            ExactKind::ChPeakon { .. }
        ));
        assert!(ExactKind::parse("warp_drive", &p).is_err());
        assert!(ExactKind::parse("uniform_decay", &serde_json::json!({"c": 1.0})).is_err());
    }
}
