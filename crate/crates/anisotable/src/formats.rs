//! JSON model, domain and scheme specifications.

use anisotable_core::cone::ConeDomain;
use anisotable_core::model::{ModelParams, SphericalDensity, StableModel};
use anisotable_core::point::Point;
use anisotable_core::sampler::{SchemePolicy, SmallJumpMode, DEFAULT_STEPS};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub alpha: f64,
    pub dim: usize,
    pub density: DensitySpec,
    pub theta_low: f64,
    pub theta_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Constant {
        value: f64,
    },
    Hemisphere {
        axis: Vec<f64>,
        plus_weight: f64,
        minus_weight: f64,
    },
    Tabulated {
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
    },
}

pub fn point(xs: &[f64], what: &str) -> AppResult<Point> {
    Point::from_slice(xs).ok_or_else(|| AppError::Config(format!("{what}: need 1 to 3 coordinates")))
}

impl ModelSpec {
    pub fn build(&self) -> AppResult<StableModel> {
        let density = match &self.density {
            DensitySpec::Constant { value } => {
                SphericalDensity::constant(*value, self.theta_low, self.theta_high)
            }
            DensitySpec::Hemisphere {
                axis,
                plus_weight,
                minus_weight,
            } => SphericalDensity::hemisphere(
                point(axis, "density.axis")?,
                *plus_weight,
                *minus_weight,
                self.theta_low,
                self.theta_high,
            ),
            DensitySpec::Tabulated { points, values } => SphericalDensity::tabulated(
                points
                    .iter()
                    .map(|p| point(p, "density.points"))
                    .collect::<AppResult<_>>()?,
                values.clone(),
                self.theta_low,
                self.theta_high,
            ),
        };
        Ok(StableModel::validate(ModelParams {
            alpha: self.alpha,
            dim: self.dim,
            density,
        })?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Halfspace,
    Cone,
    ComplementHyperplane,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_angle: Option<f64>,
    /// Ambient dimension, only needed for `full` without an axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> AppResult<ConeDomain> {
        let axis = || -> AppResult<Point> {
            let a = self
                .axis
                .as_ref()
                .ok_or_else(|| AppError::Config("domain.axis is required".into()))?;
            let p = point(a, "domain.axis")?;
            if p.dim() != dim {
                return Err(AppError::Config(format!(
                    "domain.axis has {} coordinates, model has dimension {dim}",
                    p.dim()
                )));
            }
            Ok(p)
        };
        let domain = match self.kind {
            DomainKind::Full => ConeDomain::full(self.dim.unwrap_or(dim)),
            DomainKind::Halfspace => ConeDomain::half_space(axis()?)?,
            DomainKind::ComplementHyperplane => ConeDomain::complement_hyperplane(axis()?)?,
            DomainKind::Cone => {
                let psi = self
                    .half_angle
                    .ok_or_else(|| AppError::Config("domain.half_angle is required for a cone".into()))?;
                ConeDomain::circular_cone(axis()?, psi)?
            }
        };
        if domain.dim() != dim {
            return Err(AppError::Config("domain and model dimensions differ".into()));
        }
        Ok(domain)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Drop,
    Gaussian,
}

impl From<ModeSpec> for SmallJumpMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Drop => SmallJumpMode::Drop,
            ModeSpec::Gaussian => SmallJumpMode::GaussianSurrogate,
        }
    }
}

/// Either `steps` per horizon or a fixed `eps`/`delta` pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_jump_mode: Option<ModeSpec>,
}

impl SchemeSpec {
    pub fn policy(&self) -> AppResult<SchemePolicy> {
        let mode = self.small_jump_mode.map(SmallJumpMode::from);
        match (self.steps, self.eps, self.delta) {
            (steps, None, None) => Ok(SchemePolicy::PerHorizon {
                steps: steps.unwrap_or(DEFAULT_STEPS),
                mode,
            }),
            (None, Some(eps), Some(delta)) => Ok(SchemePolicy::Fixed { eps, delta, mode }),
            _ => Err(AppError::Config(
                "scheme: give either steps, or both eps and delta".into(),
            )),
        }
    }
}
