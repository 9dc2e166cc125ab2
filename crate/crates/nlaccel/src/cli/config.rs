//! JSON experiment configuration and the built-in presets.
//!
//! Configs are strict: unknown fields anywhere in the document are
//! rejected, so typos fail loudly instead of silently running defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::accel::{AccelConfig, DenominatorEps, StabilizerPolicy, WindowSelection};
use crate::error::{Error, Result};
use crate::solvers::imat::SparsifyingTransform;
use crate::solvers::{MnlHook, RefreshMode};

fn default_trials() -> usize {
    1
}

/// One experiment: a method, its randomness, and an optional acceleration
/// arm that is run alongside the plain one.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub method: MethodConfig,
    #[serde(default)]
    pub mnl: Option<MnlParams>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: {e}", path.as_ref().display()))
        })
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodConfig {
    Im1d(Im1dConfig),
    Im2d(Im2dConfig),
    Chebyshev2d(Chebyshev2dConfig),
    Imat1d(Imat1dConfig),
    Imati2d(Imati2dConfig),
    Sl0(Sl0ExpConfig),
    Admm(AdmmExpConfig),
    Irls(IrlsExpConfig),
}

impl MethodConfig {
    /// Whether iterates are images rather than 1-D signals.
    pub fn is_two_dimensional(&self) -> bool {
        matches!(
            self,
            MethodConfig::Im2d(_) | MethodConfig::Chebyshev2d(_) | MethodConfig::Imati2d(_)
        )
    }
}

fn default_len() -> usize {
    500
}

fn default_osr() -> usize {
    8
}

fn default_iterations() -> usize {
    20
}

fn default_relaxation() -> f64 {
    1.0
}

fn default_dim() -> usize {
    256
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Im1dConfig {
    #[serde(default = "default_len")]
    pub len: usize,
    /// Oversampling ratio of the band-limited test signal.
    #[serde(default = "default_osr")]
    pub oversampling: usize,
    pub loss_rate: f64,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Im2dConfig {
    #[serde(default = "default_dim")]
    pub rows: usize,
    #[serde(default = "default_dim")]
    pub cols: usize,
    /// Per-axis oversampling of an optional low-pass stage in the
    /// distortion. Without it the degradation is sampling alone, and the
    /// run starts from zero because the observation is already a fixed
    /// point of the update.
    #[serde(default)]
    pub oversampling: Option<usize>,
    pub loss_rate: f64,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// PGM image to recover; omitted means a procedurally generated one.
    #[serde(default)]
    pub image: Option<PathBuf>,
}

fn default_lambda1() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Chebyshev2dConfig {
    #[serde(default = "default_dim")]
    pub rows: usize,
    #[serde(default = "default_dim")]
    pub cols: usize,
    pub spectrum_min: f64,
    pub spectrum_max: f64,
    #[serde(default = "default_lambda1")]
    pub lambda1: f64,
    pub loss_rate: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub image: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformParam {
    Dft,
    Dct,
}

impl From<TransformParam> for SparsifyingTransform {
    fn from(t: TransformParam) -> Self {
        match t {
            TransformParam::Dft => SparsifyingTransform::Dft,
            TransformParam::Dct => SparsifyingTransform::Dct,
        }
    }
}

fn default_transform_dft() -> TransformParam {
    TransformParam::Dft
}

fn default_transform_dct() -> TransformParam {
    TransformParam::Dct
}

fn default_p_nz() -> f64 {
    0.05
}

fn default_t0() -> f64 {
    100.0
}

fn default_decay() -> f64 {
    0.5
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Imat1dConfig {
    #[serde(default = "default_len")]
    pub len: usize,
    /// Fraction of transform coefficients on the support of the test
    /// signal.
    #[serde(default = "default_p_nz")]
    pub p_nz: f64,
    pub loss_rate: f64,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_t0")]
    pub threshold_initial: f64,
    #[serde(default = "default_decay")]
    pub threshold_decay: f64,
    #[serde(default = "default_transform_dft")]
    pub transform: TransformParam,
}

fn default_smoothing() -> f64 {
    2.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Imati2dConfig {
    #[serde(default = "default_dim")]
    pub rows: usize,
    #[serde(default = "default_dim")]
    pub cols: usize,
    /// Standard deviation of the Gaussian blur in the degradation.
    #[serde(default = "default_smoothing")]
    pub smoothing_sigma: f64,
    pub loss_rate: f64,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_t0")]
    pub threshold_initial: f64,
    #[serde(default = "default_decay")]
    pub threshold_decay: f64,
    #[serde(default = "default_transform_dct")]
    pub transform: TransformParam,
    #[serde(default)]
    pub image: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Sl0StageParam {
    #[default]
    Inner,
    Outer,
}

fn default_sl0_len() -> usize {
    1000
}

fn default_mu0() -> f64 {
    2.0
}

fn default_outer() -> usize {
    8
}

fn default_inner() -> usize {
    3
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Sl0ExpConfig {
    #[serde(default = "default_sl0_len")]
    pub len: usize,
    pub loss_rate: f64,
    #[serde(default = "default_p_nz")]
    pub p_nz: f64,
    #[serde(default)]
    pub sigma_off: f64,
    #[serde(default = "default_mu0")]
    pub mu0: f64,
    #[serde(default = "default_decay")]
    pub sigma_decay: f64,
    #[serde(default = "default_outer")]
    pub outer_iterations: usize,
    #[serde(default = "default_inner")]
    pub inner_iterations: usize,
    /// Which loop the acceleration arm wraps.
    #[serde(default)]
    pub stage: Sl0StageParam,
}

fn default_admm_n() -> usize {
    300
}

fn default_admm_m() -> usize {
    150
}

fn default_lambda_scale() -> f64 {
    0.1
}

fn default_rho() -> f64 {
    1.0
}

fn default_alpha_relax() -> f64 {
    1.0
}

fn default_admm_iterations() -> usize {
    60
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmExpConfig {
    #[serde(default = "default_admm_n")]
    pub n: usize,
    #[serde(default = "default_admm_m")]
    pub m: usize,
    #[serde(default = "default_p_nz")]
    pub p_nz: f64,
    /// Penalty weight as a fraction of `max|A'b|`.
    #[serde(default = "default_lambda_scale")]
    pub lambda_scale: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_alpha_relax")]
    pub alpha_relax: f64,
    #[serde(default = "default_admm_iterations")]
    pub iterations: usize,
    /// Group-lasso block length; omitted means the elementwise penalty.
    #[serde(default)]
    pub block_len: Option<usize>,
}

fn default_irls_n() -> usize {
    50
}

fn default_irls_m() -> usize {
    20
}

fn default_irls_p() -> f64 {
    0.5
}

fn default_irls_iterations() -> usize {
    30
}

fn default_eps_initial() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IrlsExpConfig {
    #[serde(default = "default_irls_n")]
    pub n: usize,
    #[serde(default = "default_irls_m")]
    pub m: usize,
    #[serde(default = "default_p_nz")]
    pub p_nz: f64,
    #[serde(default = "default_irls_p")]
    pub p: f64,
    #[serde(default = "default_irls_iterations")]
    pub iterations: usize,
    #[serde(default = "default_eps_initial")]
    pub epsilon_initial: f64,
}

/// Acceleration settings for the second experiment arm.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MnlParams {
    /// Pick the extrapolation window once per iterate vector instead of per
    /// element.
    #[serde(default)]
    pub whole_vector: bool,
    #[serde(default)]
    pub stabilizer: Option<StabilizerParam>,
    /// Absolute denominator guard; omitted means relative to the iterate's
    /// dynamic range.
    #[serde(default)]
    pub eps_abs: Option<f64>,
    /// Overrides whether extrapolated values feed back into the iteration;
    /// by default fixed-point methods feed back and the optimization
    /// methods only report.
    #[serde(default)]
    pub feedback: Option<bool>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StabilizerParam {
    /// Clamp into `[lo, hi]`; missing bounds come from the observed
    /// samples.
    Clip {
        #[serde(default)]
        lo: Option<f64>,
        #[serde(default)]
        hi: Option<f64>,
    },
    /// Replace out-of-range values by the newest raw iterate.
    Substitute {
        #[serde(default)]
        lo: Option<f64>,
        #[serde(default)]
        hi: Option<f64>,
    },
    /// Median filter of the given odd window.
    Median { window: usize },
}

impl MnlParams {
    /// Builds the acceleration config, deriving missing stabilizer bounds
    /// from `observed_bounds` (the min and max of the non-missing observed
    /// samples).
    pub fn accel_config(&self, observed_bounds: Option<(f64, f64)>) -> Result<AccelConfig> {
        let derive = |side: Option<f64>, pick: fn((f64, f64)) -> f64| -> Result<f64> {
            match side {
                Some(v) => Ok(v),
                None => observed_bounds.map(pick).ok_or_else(|| {
                    Error::Config(
                        "stabilizer bounds omitted but no observed samples to derive them from"
                            .into(),
                    )
                }),
            }
        };
        let policy = match &self.stabilizer {
            None => StabilizerPolicy::none(),
            Some(StabilizerParam::Clip { lo, hi }) => {
                StabilizerPolicy::clip(derive(*lo, |b| b.0)?, derive(*hi, |b| b.1)?)?
            }
            Some(StabilizerParam::Substitute { lo, hi }) => {
                StabilizerPolicy::substitute(derive(*lo, |b| b.0)?, derive(*hi, |b| b.1)?)?
            }
            Some(StabilizerParam::Median { window }) => StabilizerPolicy::median(*window)?,
        };
        Ok(AccelConfig {
            eps: match self.eps_abs {
                Some(e) => DenominatorEps::Absolute(e),
                None => DenominatorEps::default(),
            },
            selection: if self.whole_vector {
                WindowSelection::WholeVector
            } else {
                WindowSelection::PerElement
            },
            policy,
        })
    }

    /// Assembles the run hook, with `default_refresh` as the method's
    /// conventional mode.
    pub fn hook(
        &self,
        default_refresh: RefreshMode,
        observed_bounds: Option<(f64, f64)>,
    ) -> Result<MnlHook> {
        let refresh = match self.feedback {
            Some(true) => RefreshMode::Feedback,
            Some(false) => RefreshMode::ReportOnly,
            None => default_refresh,
        };
        Ok(MnlHook {
            accel: self.accel_config(observed_bounds)?,
            refresh,
        })
    }
}

pub const PRESET_NAMES: [&str; 8] = [
    "fig2", "fig3", "fig6", "fig8", "fig10", "fig11", "fig12", "fig16",
];

fn substitution() -> Option<MnlParams> {
    Some(MnlParams {
        stabilizer: Some(StabilizerParam::Substitute { lo: None, hi: None }),
        ..MnlParams::default()
    })
}

fn clipping() -> Option<MnlParams> {
    Some(MnlParams {
        stabilizer: Some(StabilizerParam::Clip { lo: None, hi: None }),
        ..MnlParams::default()
    })
}

/// The configurations behind each named preset.
pub fn preset(name: &str) -> Option<Vec<ExperimentConfig>> {
    let one = |cfg: ExperimentConfig| Some(vec![cfg]);
    match name {
        "fig2" => one(ExperimentConfig {
            name: "fig2".into(),
            seed: 2,
            trials: 100,
            method: MethodConfig::Im1d(Im1dConfig {
                len: 500,
                oversampling: 8,
                loss_rate: 1.0 / 3.0,
                relaxation: 2.2,
                iterations: 20,
            }),
            mnl: substitution(),
        }),
        "fig3" => one(ExperimentConfig {
            name: "fig3".into(),
            seed: 3,
            trials: 100,
            method: MethodConfig::Im1d(Im1dConfig {
                len: 500,
                oversampling: 4,
                loss_rate: 0.5,
                relaxation: 2.0,
                iterations: 20,
            }),
            mnl: Some(MnlParams {
                stabilizer: Some(StabilizerParam::Median { window: 3 }),
                ..MnlParams::default()
            }),
        }),
        "fig6" => one(ExperimentConfig {
            name: "fig6".into(),
            seed: 6,
            trials: 1,
            method: MethodConfig::Im2d(Im2dConfig {
                rows: 256,
                cols: 256,
                oversampling: Some(4),
                loss_rate: 2.0 / 3.0,
                relaxation: 3.5,
                iterations: 20,
                image: None,
            }),
            mnl: clipping(),
        }),
        "fig8" => one(ExperimentConfig {
            name: "fig8".into(),
            seed: 8,
            trials: 1,
            method: MethodConfig::Chebyshev2d(Chebyshev2dConfig {
                rows: 256,
                cols: 256,
                spectrum_min: 0.25,
                spectrum_max: 0.6,
                lambda1: 1.0,
                loss_rate: 0.5,
                iterations: 20,
                image: None,
            }),
            mnl: clipping(),
        }),
        "fig10" => Some(
            [(30u32, 0.3), (50, 0.5)]
                .into_iter()
                .map(|(tag, lr)| ExperimentConfig {
                    name: format!("fig10-loss{tag}"),
                    seed: 10,
                    trials: 50,
                    method: MethodConfig::Sl0(Sl0ExpConfig {
                        len: 1000,
                        loss_rate: lr,
                        p_nz: 0.05,
                        sigma_off: 0.0,
                        mu0: 2.0,
                        sigma_decay: 0.5,
                        outer_iterations: 8,
                        inner_iterations: 3,
                        stage: Sl0StageParam::Inner,
                    }),
                    mnl: Some(MnlParams::default()),
                })
                .collect(),
        ),
        "fig11" => Some(
            [(5u32, 0.5), (7, 0.7)]
                .into_iter()
                .map(|(tag, sdf)| ExperimentConfig {
                    name: format!("fig11-decay0{tag}"),
                    seed: 11,
                    trials: 50,
                    method: MethodConfig::Sl0(Sl0ExpConfig {
                        len: 1000,
                        loss_rate: 0.3,
                        p_nz: 0.1,
                        sigma_off: 0.0,
                        mu0: 2.0,
                        sigma_decay: sdf,
                        outer_iterations: 8,
                        inner_iterations: 3,
                        stage: Sl0StageParam::Inner,
                    }),
                    mnl: Some(MnlParams::default()),
                })
                .collect(),
        ),
        "fig12" => Some(vec![
            ExperimentConfig {
                name: "fig12-lasso".into(),
                seed: 12,
                trials: 20,
                method: MethodConfig::Admm(AdmmExpConfig {
                    n: 300,
                    m: 150,
                    p_nz: 0.05,
                    lambda_scale: 0.1,
                    rho: 0.8,
                    alpha_relax: 0.3,
                    iterations: 60,
                    block_len: None,
                }),
                mnl: Some(MnlParams::default()),
            },
            ExperimentConfig {
                name: "fig12-group".into(),
                seed: 12,
                trials: 20,
                method: MethodConfig::Admm(AdmmExpConfig {
                    n: 300,
                    m: 150,
                    p_nz: 0.05,
                    lambda_scale: 0.1,
                    rho: 0.5,
                    alpha_relax: 0.3,
                    iterations: 60,
                    block_len: Some(10),
                }),
                mnl: Some(MnlParams::default()),
            },
        ]),
        "fig16" => one(ExperimentConfig {
            name: "fig16".into(),
            seed: 16,
            trials: 1,
            method: MethodConfig::Imati2d(Imati2dConfig {
                rows: 256,
                cols: 256,
                smoothing_sigma: 2.0,
                loss_rate: 0.3,
                relaxation: 3.5,
                iterations: 20,
                threshold_initial: 1000.0,
                threshold_decay: 1.0,
                transform: TransformParam::Dct,
                image: None,
            }),
            mnl: clipping(),
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configs_round_trip_through_json() {
        let cfg = preset("fig2").unwrap().remove(0);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.name, "fig2");
        assert_eq!(back.trials, 100);
        match back.method {
            MethodConfig::Im1d(m) => {
                assert_eq!(m.oversampling, 8);
                assert!((m.relaxation - 2.2).abs() < 1e-12);
            }
            other => panic!("wrong method {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected_at_any_depth() {
        let doc = r#"{
            "name": "x", "seed": 1,
            "method": { "im1d": { "loss_rate": 0.3, "typo_field": 1 } }
        }"#;
        assert!(serde_json::from_str::<ExperimentConfig>(doc).is_err());
        let doc = r#"{
            "name": "x", "seed": 1, "surplus": true,
            "method": { "im1d": { "loss_rate": 0.3 } }
        }"#;
        assert!(serde_json::from_str::<ExperimentConfig>(doc).is_err());
    }

    #[test]
    fn defaults_fill_in_missing_fields() {
        let doc = r#"{
            "name": "tiny", "seed": 5,
            "method": { "im1d": { "loss_rate": 0.25 } },
            "mnl": { "stabilizer": { "substitute": {} } }
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(doc).unwrap();
        assert_eq!(cfg.trials, 1);
        match cfg.method {
            MethodConfig::Im1d(m) => {
                assert_eq!(m.len, 500);
                assert_eq!(m.iterations, 20);
            }
            _ => unreachable!(),
        }
        let mnl = cfg.mnl.unwrap();
        let accel = mnl.accel_config(Some((-1.5, 2.5))).unwrap();
        assert!(!accel.policy.is_empty());
        assert!(mnl.accel_config(None).is_err());
    }

    #[test]
    fn every_preset_is_well_formed() {
        for name in PRESET_NAMES {
            let configs = preset(name).unwrap_or_else(|| panic!("missing preset {name}"));
            assert!(!configs.is_empty());
            for cfg in configs {
                assert!(cfg.trials >= 1, "{name}");
                let text = serde_json::to_string(&cfg).unwrap();
                let _: ExperimentConfig = serde_json::from_str(&text).unwrap();
            }
        }
        assert!(preset("fig99").is_none());
    }
}
