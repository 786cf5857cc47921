//! Run configuration: JSON on disk, checked by serde and then semantically.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub equation: EquationConfig,
    /// Nonlinearity for `equation = custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<CustomPhi>,
    #[serde(default)]
    pub operator: OperatorConfig,
    pub domain: DomainConfig,
    pub time: TimeConfig,
    pub truncation: TruncationConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default = "default_norms")]
    pub norms: Vec<(f64, f64)>,
    #[serde(default)]
    pub spatial_norm: SpatialNormConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_norms() -> Vec<(f64, f64)> {
    vec![(2.0, 0.0), (32.0, 3.0)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum EquationConfig {
    /// `a + b e^u`.
    FujitaGelfand {
        #[serde(default = "two")]
        a: f64,
        #[serde(default = "minus_two")]
        b: f64,
    },
    /// `u - u^2`.
    FisherKpp,
    /// `u - u^3`.
    AllenCahn,
    /// `a u - b u^n`.
    NewellWhiteheadSegel {
        a: f64,
        b: f64,
        n: usize,
    },
    /// `ln(1 + u)`.
    Log1pHeat,
    /// `cos u + cosh u`.
    CosCoshHeat,
    Custom,
}

fn two() -> f64 {
    2.0
}

fn minus_two() -> f64 {
    -2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomPhi {
    /// `sum_n coeffs[n] u^n`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `a + b e^u`.
    Exp {
        a: f64,
        b: f64,
    },
    Log1p,
    CosCosh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(default = "one")]
    pub diffusion: f64,
    #[serde(default)]
    pub reaction: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            diffusion: 1.0,
            reaction: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConfig {
    Periodic,
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub bc: BoundaryConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "one_usize")]
    pub save_every: usize,
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    /// Number of Gaussian modes `K`.
    pub modes: usize,
    /// Maximal total order `N`.
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `u_0 = -2 ln(1 + e^{-x})`, every other coefficient equal to `value`.
    #[serde(rename = "paper_31")]
    FrontProfile {
        #[serde(default = "one")]
        value: f64,
    },
    /// Gaussian bump in the mean; `fluctuation` fills the first-order
    /// coefficients with the same profile.
    GaussianBump {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        fluctuation: f64,
    },
    /// Spatially constant mean and first-order coefficients.
    Constant {
        #[serde(default)]
        mean: f64,
        #[serde(default)]
        fluctuation: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingConfig {
    #[default]
    Zero,
    /// `f_0(t, x) = amplitude * sin(frequency * t)`.
    Deterministic { amplitude: f64, frequency: f64 },
    /// `f = amplitude * sum_k xi_k(t) H_{e_k}`: additive white noise in
    /// time, constant in space.
    WhiteNoiseModes {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialNormConfig {
    #[default]
    Max,
    L2,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let t = &self.time;
        if !(t.dt > 0.0) || !t.dt.is_finite() {
            return bad(format!("time.dt must be positive, got {}", t.dt));
        }
        if !(t.t_final.is_finite()) || t.dt > t.t_final {
            return bad(format!(
                "need 0 < dt <= t_final, got dt = {}, t_final = {}",
                t.dt, t.t_final
            ));
        }
        if t.save_every == 0 {
            return bad("time.save_every must be at least 1".into());
        }
        let d = &self.domain;
        if d.n_x < 8 {
            return bad(format!("domain.n_x must be at least 8, got {}", d.n_x));
        }
        if !(d.x_max > d.x_min) || !d.x_min.is_finite() || !d.x_max.is_finite() {
            return bad("domain needs finite x_min < x_max".into());
        }
        if !(self.operator.diffusion >= 0.0) || !self.operator.reaction.is_finite() {
            return bad("operator.diffusion must be >= 0 and reaction finite".into());
        }
        if self.truncation.modes == 0 {
            return bad("truncation.modes must be at least 1".into());
        }
        for &(r, p) in &self.norms {
            if !(r >= 2.0) || !(p >= 0.0) || !r.is_finite() || !p.is_finite() {
                return bad(format!(
                    "norm pair (r, p) = ({r}, {p}) needs r >= 2 and p >= 0"
                ));
            }
        }
        match (&self.equation, &self.phi) {
            (EquationConfig::Custom, None) => {
                return bad("equation custom needs a phi block".into())
            }
            (EquationConfig::Custom, Some(CustomPhi::Polynomial { coeffs }))
                if coeffs.is_empty() =>
            {
                return bad("custom polynomial needs at least one coefficient".into())
            }
            (EquationConfig::Custom, _) => {}
            (_, Some(_)) => return bad("phi is only allowed with equation custom".into()),
            _ => {}
        }
        if let EquationConfig::NewellWhiteheadSegel { n, .. } = self.equation {
            if n < 2 {
                return bad(format!("newell_whitehead_segel needs n >= 2, got {n}"));
            }
        }
        if let InitialConfig::GaussianBump { width, .. } = self.initial {
            if !(width > 0.0) {
                return bad("gaussian_bump width must be positive".into());
            }
        }
        Ok(())
    }

    /// The configuration without its output location, as embedded in the
    /// run metadata.
    pub fn resolved(&self) -> RunConfig {
        RunConfig {
            output: None,
            ..self.clone()
        }
    }
}
