//! Initial-datum library.
//!
//! `FromMomentum` builds u0 = (1 - d_xx)^{-1} y0 from a prescribed momentum
//! profile, which gives exact control over the sign and the L^2 size of y0
//! for the global-existence experiments.

use serde::{Deserialize, Serialize};

use crate::error::{GchError, Result};
use crate::model::Field;
use crate::spectral::SpectralWorkspace;

fn default_mollify_eps() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    /// Spatially constant data; decays exactly like value * e^{-lambda t}.
    Uniform {
        value: f64,
    },
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// -amplitude * s * exp(-s^2) with s = (x - center)/width; odd data
    /// with a steep negative slope at the center, the wave-breaking seed.
    GaussianDerivative {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// C-infinity bump amplitude * exp(1 - 1/(1 - s^2)) with
    /// s = (2x - a - b)/(b - a), identically zero outside [a, b].
    Bump {
        amplitude: f64,
        a: f64,
        b: f64,
    },
    /// c e^{-sqrt((x - center)^2 + eps^2)}; eps = 0 is the exact peaked
    /// profile.
    Peakon {
        c: f64,
        center: f64,
        #[serde(default = "default_mollify_eps")]
        mollify_eps: f64,
    },
    /// sqrt(c) e^{-sqrt((x - center)^2 + eps^2)}.
    NovikovPeakon {
        c: f64,
        center: f64,
        #[serde(default = "default_mollify_eps")]
        mollify_eps: f64,
    },
    Sine {
        amplitude: f64,
        mode: u32,
    },
    /// u0 = (1 - d_xx)^{-1} y0, optionally rescaling y0 to a target L2 norm
    /// first.
    FromMomentum {
        y0: Box<InitialDatum>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale_to_l2: Option<f64>,
    },
}

/// The bump profile on its reference interval.
pub fn bump_profile(x: f64, a: f64, b: f64) -> f64 {
    let s = (2.0 * x - a - b) / (b - a);
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

impl InitialDatum {
    pub fn validate(&self, half_length: f64) -> Result<()> {
        match self {
            InitialDatum::Bump { a, b, .. } => {
                if a >= b {
                    return Err(GchError::Config("bump requires a < b".into()));
                }
                if *a <= -half_length || *b >= half_length {
                    return Err(GchError::Config(format!(
                        "bump support [{a}, {b}] must lie inside (-{half_length}, {half_length})"
                    )));
                }
                Ok(())
            }
            InitialDatum::Peakon { mollify_eps, .. } => {
                if *mollify_eps < 0.0 {
                    return Err(GchError::Config("mollify_eps must be >= 0".into()));
                }
                Ok(())
            }
            InitialDatum::NovikovPeakon { c, mollify_eps, .. } => {
                if *c < 0.0 {
                    return Err(GchError::Config("novikov_peakon requires c >= 0".into()));
                }
                if *mollify_eps < 0.0 {
                    return Err(GchError::Config("mollify_eps must be >= 0".into()));
                }
                Ok(())
            }
            InitialDatum::Sine { mode, .. } => {
                if *mode == 0 {
                    return Err(GchError::Config("sine mode must be >= 1".into()));
                }
                Ok(())
            }
            InitialDatum::Uniform { value } => {
                if !value.is_finite() {
                    return Err(GchError::Config("uniform value must be finite".into()));
                }
                Ok(())
            }
            InitialDatum::FromMomentum { y0, scale_to_l2 } => {
                if let Some(t) = scale_to_l2 {
                    if *t <= 0.0 || t.is_nan() {
                        return Err(GchError::Config("scale_to_l2 must be > 0".into()));
                    }
                }
                y0.validate(half_length)
            }
            InitialDatum::Gaussian { width, .. }
            | InitialDatum::GaussianDerivative { width, .. } => {
                if *width <= 0.0 || width.is_nan() {
                    return Err(GchError::Config("gaussian width must be > 0".into()));
                }
                Ok(())
            }
        }
    }

    /// Samples the datum on the workspace grid.
    pub fn sample(&self, ws: &SpectralWorkspace) -> Result<Field> {
        self.validate(ws.grid.half_length)?;
        let grid = &ws.grid;
        Ok(match self {
            InitialDatum::Uniform { value } => Field::constant(*value, grid.nx),
            InitialDatum::Gaussian {
                amplitude,
                center,
                width,
            } => grid.sample(|x| amplitude * (-((x - center) / width).powi(2)).exp()),
            InitialDatum::GaussianDerivative {
                amplitude,
                center,
                width,
            } => grid.sample(|x| {
                let s = (x - center) / width;
                -amplitude * s * (-s * s).exp()
            }),
            InitialDatum::Bump { amplitude, a, b } => {
                grid.sample(|x| amplitude * bump_profile(x, *a, *b))
            }
            InitialDatum::Peakon {
                c,
                center,
                mollify_eps,
            } => grid.sample(|x| {
                let d = x - center;
                c * (-(d * d + mollify_eps * mollify_eps).sqrt()).exp()
            }),
            InitialDatum::NovikovPeakon {
                c,
                center,
                mollify_eps,
            } => grid.sample(|x| {
                let d = x - center;
                c.sqrt() * (-(d * d + mollify_eps * mollify_eps).sqrt()).exp()
            }),
            InitialDatum::Sine { amplitude, mode } => {
                let l = grid.half_length;
                let m = *mode as f64;
                grid.sample(|x| amplitude * (std::f64::consts::PI * m * x / l).sin())
            }
            InitialDatum::FromMomentum { y0, scale_to_l2 } => {
                let mut y = y0.sample(ws)?;
                if let Some(target) = scale_to_l2 {
                    let norm = ws.lp_norm(&y, 2.0);
                    if norm == 0.0 {
                        return Err(GchError::Config(
                            "cannot rescale a zero momentum profile".into(),
                        ));
                    }
                    y = y.scaled(target / norm);
                }
                ws.helmholtz_solve(&y)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Grid;

    fn ws(l: f64, nx: usize) -> SpectralWorkspace {
        SpectralWorkspace::new(Grid::new(l, nx).unwrap(), 1)
    }

    #[test]
    fn bump_is_exactly_zero_outside_support() {
        let w = ws(10.0, 256);
        let datum = InitialDatum::Bump {
            amplitude: 2.0,
            a: -1.5,
            b: 2.5,
        };
        let u = datum.sample(&w).unwrap();
        for j in 0..256 {
            let x = w.grid.node(j);
            if !(-1.5..=2.5).contains(&x) {
                assert_eq!(u[j], 0.0, "nonzero at x = {x}");
            }
        }
        // Peak value equals the amplitude at the midpoint.
        let mid = (0..256).min_by(|&i, &j| {
            let a = (w.grid.node(i) - 0.5_f64).abs();
            let b = (w.grid.node(j) - 0.5_f64).abs();
            a.partial_cmp(&b).unwrap()
        });
        assert!((u[mid.unwrap()] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn from_momentum_roundtrips_through_the_momentum_map() {
        let w = ws(12.0, 512);
        let datum = InitialDatum::FromMomentum {
            y0: Box::new(InitialDatum::Gaussian {
                amplitude: 1.3,
                center: 0.5,
                width: 1.0,
            }),
            scale_to_l2: Some(0.75),
        };
        let u0 = datum.sample(&w).unwrap();
        let y = w.momentum(&u0);
        assert!((w.lp_norm(&y, 2.0) - 0.75).abs() < 1e-12);
        let want = InitialDatum::Gaussian {
            amplitude: 1.3,
            center: 0.5,
            width: 1.0,
        }
        .sample(&w)
        .unwrap();
        let want = want.scaled(0.75 / w.lp_norm(&want, 2.0));
        for j in 0..512 {
            assert!((y[j] - want[j]).abs() < 1e-12 * want.max_abs());
        }
    }

    #[test]
    fn peakon_profiles() {
        let w = ws(15.0, 256);
        let sharp = InitialDatum::Peakon {
            c: 1.0,
            center: 0.0,
            mollify_eps: 0.0,
        };
        let u = sharp.sample(&w).unwrap();
        let j0 = 128; // x = 0
        assert!((u[j0] - 1.0).abs() < 1e-14);
        let x = w.grid.node(140);
        assert!((u[140] - (-x.abs()).exp()).abs() < 1e-14);

        let nov = InitialDatum::NovikovPeakon {
            c: 4.0,
            center: 0.0,
            mollify_eps: 0.0,
        };
        let v = nov.sample(&w).unwrap();
        assert!((v[j0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let w = ws(10.0, 64);
        assert!(InitialDatum::Bump {
            amplitude: 1.0,
            a: -12.0,
            b: 0.0
        }
        .sample(&w)
        .is_err());
        assert!(InitialDatum::Sine {
            amplitude: 1.0,
            mode: 0
        }
        .sample(&w)
        .is_err());
        assert!(InitialDatum::NovikovPeakon {
            c: -1.0,
            center: 0.0,
            mollify_eps: 0.0
        }
        .sample(&w)
        .is_err());
    }

    #[test]
    fn serde_names_are_stable() {
        let json = r#"{"kind":"from_momentum","y0":{"kind":"bump","amplitude":1.0,"a":-2.0,"b":2.0},"scale_to_l2":1.5}"#;
        let datum: InitialDatum = serde_json::from_str(json).unwrap();
        match &datum {
            InitialDatum::FromMomentum { scale_to_l2, .. } => {
                assert_eq!(*scale_to_l2, Some(1.5))
            }
            other => panic!("unexpected parse {other:?}"),
        }
        // Unknown keys are rejected.
        let bad = r#"{"kind":"gaussian","amplitude":1.0,"center":0.0,"width":1.0,"sigma":2.0}"#;
        assert!(serde_json::from_str::<InitialDatum>(bad).is_err());
    }
}
