//! Experiment runners: trial orchestration, arm comparison and curve
//! aggregation.
//!
//! Every trial derives its randomness from `(seed, trial * 8 + purpose)`,
//! so results are identical whether trials run on one thread or many; the
//! collected output is ordered by trial index either way.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::cli::config::{
    AdmmExpConfig, Chebyshev2dConfig, ExperimentConfig, Im1dConfig, Im2dConfig, Imat1dConfig,
    Imati2dConfig, IrlsExpConfig, MethodConfig, MnlParams, Sl0ExpConfig, Sl0StageParam,
};
use crate::error::{Error, Result};
use crate::metrics::{psnr_db, snr_db, QualityReport};
use crate::operators::fourier::{dct_inverse_ortho, real_fourier_basis};
use crate::operators::{
    GaussianSmoother, LinearDistortion, LowPassDftFilter, PseudoInverseProjector, SamplingMask,
};
use crate::signal::{Shape, Signal};
use crate::signals::{
    gen_gaussian_matrix, gen_lp_signal, gen_mask, gen_sparse_signal, gen_texture_image, load_pgm,
    RandomStream, SparseSpec, SparsityDomain,
};
use crate::solvers::admm::{run_admm, AdmmConfig, AdmmOperator, Penalty};
use crate::solvers::chebyshev::{iterate_chebyshev, ChebyshevConfig};
use crate::solvers::im::{iterate_im, ImConfig};
use crate::solvers::imat::{iterate_imat, ImatConfig};
use crate::solvers::irls::{run_irls, EpsilonSchedule, IrlsConfig};
use crate::solvers::sl0::{run_sl0, Sl0Acceleration, Sl0Config};
use crate::solvers::{RefreshMode, SolverRun};

pub const STREAMS_PER_TRIAL: u64 = 8;
pub const STREAM_SIGNAL: u64 = 0;
pub const STREAM_MASK: u64 = 1;
pub const STREAM_MATRIX: u64 = 2;
pub const STREAM_TEXTURE: u64 = 3;

/// The randomness source for one purpose within one trial.
pub fn trial_stream(seed: u64, trial: usize, purpose: u64) -> RandomStream {
    RandomStream::new(seed, trial as u64 * STREAMS_PER_TRIAL + purpose)
}

/// Worker count: an explicit request, else `NLACCEL_THREADS`, else 1.
pub fn thread_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| {
            std::env::var("NLACCEL_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

/// Maps trial indices through `f`, in parallel when `threads > 1`. The
/// output is indexed by trial, so the schedule cannot change the result.
pub fn run_trials<T: Send>(
    trials: usize,
    threads: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one"));
    }
    if threads <= 1 {
        (0..trials).map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| (0..trials).into_par_iter().map(f).collect())
    }
}

/// Per-trial curves of one arm plus their mean.
///
/// Curves cut short by a divergence flag contribute their last value to the
/// remaining positions of the mean.
#[derive(Clone, Debug)]
pub struct TrialSeries {
    pub per_trial: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

impl TrialSeries {
    fn new(per_trial: Vec<Vec<f64>>) -> Result<Self> {
        if per_trial.iter().any(Vec::is_empty) {
            return Err(Error::invalid("series", "trial curves must be non-empty"));
        }
        let len = per_trial.iter().map(Vec::len).max().unwrap_or(0);
        let mut mean = vec![0.0; len];
        for series in &per_trial {
            let last = *series.last().expect("checked non-empty");
            for (i, m) in mean.iter_mut().enumerate() {
                *m += series.get(i).copied().unwrap_or(last);
            }
        }
        for m in mean.iter_mut() {
            *m /= per_trial.len() as f64;
        }
        Ok(TrialSeries { per_trial, mean })
    }

    pub fn finals(&self) -> Vec<f64> {
        self.per_trial
            .iter()
            .map(|s| *s.last().expect("non-empty"))
            .collect()
    }
}

/// Quality-versus-iteration curves for the plain arm and, when configured,
/// the accelerated arm.
#[derive(Clone, Debug)]
pub struct CurveSet {
    /// Column-name stem: `snr_db`, `psnr_db` or `rel_err`.
    pub metric: &'static str,
    pub plain: TrialSeries,
    pub accelerated: Option<TrialSeries>,
}

/// Pictures from the first trial of a 2-D experiment.
#[derive(Clone, Debug)]
pub struct ImageArtifacts {
    pub truth: Signal,
    pub observed: Signal,
    pub plain_final: Signal,
    pub accelerated_final: Option<Signal>,
    /// Set when no input image was supplied and a procedural texture stood
    /// in for it.
    pub used_procedural: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub curves: CurveSet,
    pub images: Option<ImageArtifacts>,
}

fn snr_curve(truth: &Signal, run: &SolverRun) -> Result<Vec<f64>> {
    run.trace.iter().map(|s| snr_db(truth, s)).collect()
}

fn psnr_curve(truth: &Signal, run: &SolverRun) -> Result<Vec<f64>> {
    run.trace.iter().map(|s| psnr_db(truth, s, 255.0)).collect()
}

fn rel_err_curve(truth: &Signal, run: &SolverRun) -> Result<Vec<f64>> {
    let norm = truth.l2_norm();
    if norm == 0.0 {
        return Err(Error::Numerical("reference is identically zero".into()));
    }
    run.trace
        .iter()
        .map(|s| truth.l2_distance(s).map(|d| d / norm))
        .collect()
}

/// Min and max of the observed samples, restricted to kept positions when a
/// mask is involved; the default source for stabilizer bounds.
pub fn kept_bounds(observed: &Signal, mask: Option<&SamplingMask>) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &v) in observed.data().iter().enumerate() {
        if let Some(m) = mask {
            if !m.keep_flags()[i] {
                continue;
            }
        }
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (hi >= lo).then_some((lo, hi))
}

struct TrialOutcome {
    plain: Vec<f64>,
    accelerated: Option<Vec<f64>>,
    images: Option<ImageArtifacts>,
}

fn collect_curves(metric: &'static str, outcomes: Vec<TrialOutcome>) -> Result<ExperimentOutput> {
    let images = outcomes.first().and_then(|o| o.images.clone());
    let has_accel = outcomes.first().map(|o| o.accelerated.is_some()).unwrap_or(false);
    let mut plain = Vec::with_capacity(outcomes.len());
    let mut accel = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        plain.push(o.plain);
        if let Some(a) = o.accelerated {
            accel.push(a);
        }
    }
    let accelerated = if has_accel {
        Some(TrialSeries::new(accel)?)
    } else {
        None
    };
    Ok(ExperimentOutput {
        curves: CurveSet {
            metric,
            plain: TrialSeries::new(plain)?,
            accelerated,
        },
        images,
    })
}

/// Band-limited 1-D recovery by relaxed fixed-point iteration.
pub fn run_im1d(
    cfg: &Im1dConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
) -> Result<ExperimentOutput> {
    let outcomes = run_trials(trials, threads, |t| {
        let truth = gen_lp_signal(cfg.len, cfg.oversampling, &trial_stream(seed, t, STREAM_SIGNAL))?;
        let mask = gen_mask(
            Shape::OneD(cfg.len),
            cfg.loss_rate,
            &trial_stream(seed, t, STREAM_MASK),
        )?;
        let band = cfg.len / (2 * cfg.oversampling);
        let lowpass = LowPassDftFilter::new_1d(cfg.len, band)?;
        let g = LinearDistortion::compose(
            LinearDistortion::LowPass(lowpass),
            LinearDistortion::Mask(mask.clone()),
        );
        let observed = g.apply(&truth)?;
        let im_cfg = ImConfig {
            relaxation: cfg.relaxation,
            iterations: cfg.iterations,
        };
        let plain_run = iterate_im(&g, &observed, &observed, &im_cfg, Some(&truth), None)?;
        let accelerated = match mnl {
            Some(params) => {
                let hook = params.hook(
                    RefreshMode::Feedback,
                    kept_bounds(&observed, Some(&mask)),
                )?;
                let run = iterate_im(&g, &observed, &observed, &im_cfg, Some(&truth), Some(&hook))?;
                Some(snr_curve(&truth, &run)?)
            }
            None => None,
        };
        Ok(TrialOutcome {
            plain: snr_curve(&truth, &plain_run)?,
            accelerated,
            images: None,
        })
    })?;
    collect_curves("snr_db", outcomes)
}

enum ImageSource<'a> {
    Loaded(&'a Signal),
    Procedural { rows: usize, cols: usize },
}

impl ImageSource<'_> {
    fn get(&self, seed: u64, trial: usize) -> Result<(Signal, bool)> {
        match self {
            ImageSource::Loaded(img) => Ok(((*img).clone(), false)),
            ImageSource::Procedural { rows, cols } => Ok((
                gen_texture_image(*rows, *cols, &trial_stream(seed, trial, STREAM_TEXTURE))?,
                true,
            )),
        }
    }
}

fn load_image_source<'a>(
    configured: Option<&std::path::Path>,
    overridden: Option<&std::path::Path>,
    rows: usize,
    cols: usize,
    storage: &'a mut Option<Signal>,
) -> Result<ImageSource<'a>> {
    let path = overridden.or(configured);
    match path {
        Some(p) => {
            *storage = Some(load_pgm(p)?);
            Ok(ImageSource::Loaded(storage.as_ref().expect("just stored")))
        }
        None => Ok(ImageSource::Procedural { rows, cols }),
    }
}

fn image_trial(
    truth: Signal,
    used_procedural: bool,
    observed: Signal,
    mask: &SamplingMask,
    want_images: bool,
    mnl: Option<&MnlParams>,
    runner: impl Fn(&Signal, Option<&crate::solvers::MnlHook>) -> Result<SolverRun>,
) -> Result<TrialOutcome> {
    let plain_run = runner(&observed, None)?;
    let mut accel_run = None;
    let accelerated = match mnl {
        Some(params) => {
            let hook = params.hook(RefreshMode::Feedback, kept_bounds(&observed, Some(mask)))?;
            let run = runner(&observed, Some(&hook))?;
            let curve = psnr_curve(&truth, &run)?;
            accel_run = Some(run);
            Some(curve)
        }
        None => None,
    };
    let plain = psnr_curve(&truth, &plain_run)?;
    let images = want_images.then(|| ImageArtifacts {
        accelerated_final: accel_run.as_ref().map(|r| r.final_iterate().clone()),
        plain_final: plain_run.final_iterate().clone(),
        truth,
        observed,
        used_procedural,
    });
    Ok(TrialOutcome {
        plain,
        accelerated,
        images,
    })
}

/// 2-D recovery by relaxed fixed-point iteration, optionally through a
/// low-pass stage.
pub fn run_im2d(
    cfg: &Im2dConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
    image_override: Option<&std::path::Path>,
) -> Result<ExperimentOutput> {
    let mut storage = None;
    let source = load_image_source(
        cfg.image.as_deref(),
        image_override,
        cfg.rows,
        cfg.cols,
        &mut storage,
    )?;
    let outcomes = run_trials(trials, threads, |t| {
        let (truth, procedural) = source.get(seed, t)?;
        let shape = truth.shape();
        let (rows, cols) = match shape {
            Shape::TwoD { rows, cols } => (rows, cols),
            _ => unreachable!("images are 2-D"),
        };
        let mask = gen_mask(shape, cfg.loss_rate, &trial_stream(seed, t, STREAM_MASK))?;
        let g = match cfg.oversampling {
            Some(osr) => {
                if osr == 0 {
                    return Err(Error::invalid("oversampling", "must be at least 1"));
                }
                let lp = LowPassDftFilter::new_2d(rows, cols, rows / (2 * osr), cols / (2 * osr))?;
                LinearDistortion::compose(
                    LinearDistortion::LowPass(lp),
                    LinearDistortion::Mask(mask.clone()),
                )
            }
            None => LinearDistortion::Mask(mask.clone()),
        };
        let observed = g.apply(&truth)?;
        let init = match cfg.oversampling {
            Some(_) => observed.clone(),
            None => Signal::zeros(shape),
        };
        let im_cfg = ImConfig {
            relaxation: cfg.relaxation,
            iterations: cfg.iterations,
        };
        image_trial(
            truth.clone(),
            procedural,
            observed.clone(),
            &mask,
            t == 0,
            mnl,
            |obs, hook| iterate_im(&g, obs, &init, &im_cfg, Some(&truth), hook),
        )
    })?;
    collect_curves("psnr_db", outcomes)
}

/// 2-D recovery by the Chebyshev-weighted iteration.
pub fn run_chebyshev2d(
    cfg: &Chebyshev2dConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
    image_override: Option<&std::path::Path>,
) -> Result<ExperimentOutput> {
    let mut storage = None;
    let source = load_image_source(
        cfg.image.as_deref(),
        image_override,
        cfg.rows,
        cfg.cols,
        &mut storage,
    )?;
    let outcomes = run_trials(trials, threads, |t| {
        let (truth, procedural) = source.get(seed, t)?;
        let mask = gen_mask(truth.shape(), cfg.loss_rate, &trial_stream(seed, t, STREAM_MASK))?;
        let g = LinearDistortion::Mask(mask.clone());
        let observed = g.apply(&truth)?;
        let ch_cfg = ChebyshevConfig {
            spectrum_min: cfg.spectrum_min,
            spectrum_max: cfg.spectrum_max,
            lambda1: cfg.lambda1,
            iterations: cfg.iterations,
        };
        image_trial(
            truth.clone(),
            procedural,
            observed.clone(),
            &mask,
            t == 0,
            mnl,
            |obs, hook| iterate_chebyshev(&g, obs, obs, &ch_cfg, Some(&truth), hook),
        )
    })?;
    collect_curves("psnr_db", outcomes)
}

fn sparse_transform_signal(cfg: &Imat1dConfig, seed: u64, trial: usize) -> Result<Signal> {
    let spec = SparseSpec {
        len: cfg.len,
        p_nz: cfg.p_nz,
        sigma_off: 0.0,
        domain: SparsityDomain::Identity,
    };
    let coeffs = gen_sparse_signal(&spec, &trial_stream(seed, trial, STREAM_SIGNAL))?.coeffs;
    match cfg.transform {
        crate::cli::config::TransformParam::Dft => {
            let basis = real_fourier_basis(cfg.len);
            let time = basis * DVector::from_column_slice(&coeffs);
            Ok(Signal::new_1d(time.as_slice().to_vec()))
        }
        crate::cli::config::TransformParam::Dct => {
            let mut time = coeffs;
            dct_inverse_ortho(&mut time);
            Ok(Signal::new_1d(time))
        }
    }
}

/// 1-D recovery with hard thresholding in a sparsifying transform.
pub fn run_imat1d(
    cfg: &Imat1dConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
) -> Result<ExperimentOutput> {
    let outcomes = run_trials(trials, threads, |t| {
        let truth = sparse_transform_signal(cfg, seed, t)?;
        let mask = gen_mask(
            Shape::OneD(cfg.len),
            cfg.loss_rate,
            &trial_stream(seed, t, STREAM_MASK),
        )?;
        let g = LinearDistortion::Mask(mask.clone());
        let observed = g.apply(&truth)?;
        let imat_cfg = ImatConfig {
            relaxation: cfg.relaxation,
            iterations: cfg.iterations,
            threshold_initial: cfg.threshold_initial,
            threshold_decay: cfg.threshold_decay,
            transform: cfg.transform.into(),
        };
        let plain_run = iterate_imat(&g, &observed, &observed, &imat_cfg, Some(&truth), None)?;
        let accelerated = match mnl {
            Some(params) => {
                let hook = params.hook(
                    RefreshMode::Feedback,
                    kept_bounds(&observed, Some(&mask)),
                )?;
                let run =
                    iterate_imat(&g, &observed, &observed, &imat_cfg, Some(&truth), Some(&hook))?;
                Some(snr_curve(&truth, &run)?)
            }
            None => None,
        };
        Ok(TrialOutcome {
            plain: snr_curve(&truth, &plain_run)?,
            accelerated,
            images: None,
        })
    })?;
    collect_curves("snr_db", outcomes)
}

/// 2-D recovery with thresholding when the degradation also blurs.
pub fn run_imati2d(
    cfg: &Imati2dConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
    image_override: Option<&std::path::Path>,
) -> Result<ExperimentOutput> {
    let mut storage = None;
    let source = load_image_source(
        cfg.image.as_deref(),
        image_override,
        cfg.rows,
        cfg.cols,
        &mut storage,
    )?;
    let smoother = GaussianSmoother::new(cfg.smoothing_sigma)?;
    let outcomes = run_trials(trials, threads, |t| {
        let (truth, procedural) = source.get(seed, t)?;
        let mask = gen_mask(truth.shape(), cfg.loss_rate, &trial_stream(seed, t, STREAM_MASK))?;
        let g = LinearDistortion::compose(
            LinearDistortion::Smooth(smoother.clone()),
            LinearDistortion::Mask(mask.clone()),
        );
        let observed = g.apply(&truth)?;
        let imat_cfg = ImatConfig {
            relaxation: cfg.relaxation,
            iterations: cfg.iterations,
            threshold_initial: cfg.threshold_initial,
            threshold_decay: cfg.threshold_decay,
            transform: cfg.transform.into(),
        };
        image_trial(
            truth.clone(),
            procedural,
            observed.clone(),
            &mask,
            t == 0,
            mnl,
            |obs, hook| iterate_imat(&g, obs, obs, &imat_cfg, Some(&truth), hook),
        )
    })?;
    collect_curves("psnr_db", outcomes)
}

/// Sparse recovery from kept samples of a Fourier-sparse signal.
pub fn run_sl0_exp(
    cfg: &Sl0ExpConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
) -> Result<ExperimentOutput> {
    let basis = real_fourier_basis(cfg.len);
    let outcomes = run_trials(trials, threads, |t| {
        let spec = SparseSpec {
            len: cfg.len,
            p_nz: cfg.p_nz,
            sigma_off: cfg.sigma_off,
            domain: SparsityDomain::Identity,
        };
        let coeffs = gen_sparse_signal(&spec, &trial_stream(seed, t, STREAM_SIGNAL))?.coeffs;
        let s_true = DVector::from_vec(coeffs);
        if s_true.amax() == 0.0 {
            return Err(Error::Numerical(format!(
                "trial {t} drew an empty support; use another seed"
            )));
        }
        let mask = gen_mask(
            Shape::OneD(cfg.len),
            cfg.loss_rate,
            &trial_stream(seed, t, STREAM_MASK),
        )?;
        let kept = mask.kept_indices();
        if kept.len() < 4 {
            return Err(Error::invalid("loss_rate", "almost nothing was kept"));
        }
        let a = DMatrix::from_fn(kept.len(), cfg.len, |r, c| basis[(kept[r], c)]);
        let projector = PseudoInverseProjector::from_orthonormal_rows(a)?;
        let b = projector.matrix() * &s_true;

        let base = Sl0Config {
            outer_iterations: cfg.outer_iterations,
            inner_iterations: cfg.inner_iterations,
            mu0: cfg.mu0,
            sigma0: None,
            sigma_decay: cfg.sigma_decay,
            acceleration: Sl0Acceleration::Off,
        };
        let truth_sig = Signal::new_1d(s_true.as_slice().to_vec());
        let outer_snrs = |run: &crate::solvers::sl0::Sl0Run| -> Result<Vec<f64>> {
            run.outer_trace
                .iter()
                .map(|s| snr_db(&truth_sig, &Signal::new_1d(s.as_slice().to_vec())))
                .collect()
        };
        let plain = run_sl0(&projector, &b, &base)?;
        let accelerated = match mnl {
            Some(params) => {
                let accel = params.accel_config(None)?;
                let accel_cfg = Sl0Config {
                    acceleration: match cfg.stage {
                        Sl0StageParam::Inner => Sl0Acceleration::Inner(accel),
                        Sl0StageParam::Outer => Sl0Acceleration::Outer(accel),
                    },
                    ..base.clone()
                };
                Some(outer_snrs(&run_sl0(&projector, &b, &accel_cfg)?)?)
            }
            None => None,
        };
        Ok(TrialOutcome {
            plain: outer_snrs(&plain)?,
            accelerated,
            images: None,
        })
    })?;
    collect_curves("snr_db", outcomes)
}

/// One sparse regression problem: a Gaussian matrix, a sparse truth and its
/// noiseless observations.
pub fn sparse_regression_problem(
    n: usize,
    m: usize,
    p_nz: f64,
    seed: u64,
    trial: usize,
) -> Result<(DMatrix<f64>, DVector<f64>, DVector<f64>)> {
    let spec = SparseSpec {
        len: n,
        p_nz,
        sigma_off: 0.0,
        domain: SparsityDomain::Identity,
    };
    let coeffs = gen_sparse_signal(&spec, &trial_stream(seed, trial, STREAM_SIGNAL))?.coeffs;
    let x_true = DVector::from_vec(coeffs);
    if x_true.amax() == 0.0 {
        return Err(Error::Numerical(format!(
            "trial {trial} drew an empty support; use another seed"
        )));
    }
    let a = gen_gaussian_matrix(m, n, &trial_stream(seed, trial, STREAM_MATRIX))?;
    let b = &a * &x_true;
    Ok((a, x_true, b))
}

/// Sparse regression through the split-penalty solver.
pub fn run_admm_exp(
    cfg: &AdmmExpConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
) -> Result<ExperimentOutput> {
    let outcomes = run_trials(trials, threads, |t| {
        let (a, x_true, b) = sparse_regression_problem(cfg.n, cfg.m, cfg.p_nz, seed, t)?;
        let lambda_reg = cfg.lambda_scale * (a.transpose() * &b).amax();
        let op = AdmmOperator::new(a, cfg.rho)?;
        let admm_cfg = AdmmConfig {
            rho: cfg.rho,
            lambda_reg,
            alpha_relax: cfg.alpha_relax,
            iterations: cfg.iterations,
            penalty: match cfg.block_len {
                Some(len) => Penalty::GroupLasso { block_len: len },
                None => Penalty::Lasso,
            },
        };
        let truth_sig = Signal::new_1d(x_true.as_slice().to_vec());
        let plain_run = run_admm(&op, &b, &admm_cfg, Some(&truth_sig), None)?;
        let accelerated = match mnl {
            Some(params) => {
                let hook = params.hook(RefreshMode::ReportOnly, None)?;
                let run = run_admm(&op, &b, &admm_cfg, Some(&truth_sig), Some(&hook))?;
                Some(rel_err_curve(&truth_sig, &run)?)
            }
            None => None,
        };
        Ok(TrialOutcome {
            plain: rel_err_curve(&truth_sig, &plain_run)?,
            accelerated,
            images: None,
        })
    })?;
    collect_curves("rel_err", outcomes)
}

/// Sparse regression through the reweighted least-squares solver.
pub fn run_irls_exp(
    cfg: &IrlsExpConfig,
    mnl: Option<&MnlParams>,
    seed: u64,
    trials: usize,
    threads: usize,
) -> Result<ExperimentOutput> {
    let outcomes = run_trials(trials, threads, |t| {
        let (a, x_true, b) = sparse_regression_problem(cfg.n, cfg.m, cfg.p_nz, seed, t)?;
        let irls_cfg = IrlsConfig {
            p: cfg.p,
            iterations: cfg.iterations,
            epsilon: EpsilonSchedule::AdaptiveHalving {
                initial: cfg.epsilon_initial,
            },
        };
        let truth_sig = Signal::new_1d(x_true.as_slice().to_vec());
        let plain_run = run_irls(&a, &b, &irls_cfg, Some(&truth_sig), None)?;
        let accelerated = match mnl {
            Some(params) => {
                let hook = params.hook(RefreshMode::ReportOnly, None)?;
                let run = run_irls(&a, &b, &irls_cfg, Some(&truth_sig), Some(&hook))?;
                Some(rel_err_curve(&truth_sig, &run.run)?)
            }
            None => None,
        };
        Ok(TrialOutcome {
            plain: rel_err_curve(&truth_sig, &plain_run.run)?,
            accelerated,
            images: None,
        })
    })?;
    collect_curves("rel_err", outcomes)
}

/// Runs whatever the config describes.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    threads: usize,
    image_override: Option<&std::path::Path>,
) -> Result<ExperimentOutput> {
    let mnl = cfg.mnl.as_ref();
    match &cfg.method {
        MethodConfig::Im1d(m) => run_im1d(m, mnl, cfg.seed, cfg.trials, threads),
        MethodConfig::Im2d(m) => {
            run_im2d(m, mnl, cfg.seed, cfg.trials, threads, image_override)
        }
        MethodConfig::Chebyshev2d(m) => {
            run_chebyshev2d(m, mnl, cfg.seed, cfg.trials, threads, image_override)
        }
        MethodConfig::Imat1d(m) => run_imat1d(m, mnl, cfg.seed, cfg.trials, threads),
        MethodConfig::Imati2d(m) => {
            run_imati2d(m, mnl, cfg.seed, cfg.trials, threads, image_override)
        }
        MethodConfig::Sl0(m) => run_sl0_exp(m, mnl, cfg.seed, cfg.trials, threads),
        MethodConfig::Admm(m) => run_admm_exp(m, mnl, cfg.seed, cfg.trials, threads),
        MethodConfig::Irls(m) => run_irls_exp(m, mnl, cfg.seed, cfg.trials, threads),
    }
}

/// Mean curve per iteration, one column per arm.
pub fn curves_report(set: &CurveSet) -> Result<QualityReport> {
    let mut columns = vec!["iteration".to_string(), format!("plain_{}", set.metric)];
    if set.accelerated.is_some() {
        columns.push(format!("mnl_{}", set.metric));
    }
    let mut report = QualityReport::new(columns)?;
    let len = set
        .accelerated
        .as_ref()
        .map(|a| a.mean.len())
        .unwrap_or(0)
        .max(set.plain.mean.len());
    let clamped = |mean: &[f64], k: usize| mean[k.min(mean.len() - 1)];
    for k in 0..len {
        let mut row = vec![k as f64, clamped(&set.plain.mean, k)];
        if let Some(a) = &set.accelerated {
            row.push(clamped(&a.mean, k));
        }
        report.push_row(row)?;
    }
    Ok(report)
}

/// Final metric of every trial, one row per trial.
pub fn sweep_report(
    cfg: &ExperimentConfig,
    threads: usize,
    image_override: Option<&std::path::Path>,
) -> Result<QualityReport> {
    let out = run_experiment(cfg, threads, image_override)?;
    let set = &out.curves;
    let mut columns = vec![
        "trial".to_string(),
        format!("final_plain_{}", set.metric),
    ];
    if set.accelerated.is_some() {
        columns.push(format!("final_mnl_{}", set.metric));
    }
    let mut report = QualityReport::new(columns)?;
    let plain_finals = set.plain.finals();
    let accel_finals = set.accelerated.as_ref().map(TrialSeries::finals);
    for (t, &p) in plain_finals.iter().enumerate() {
        let mut row = vec![t as f64, p];
        if let Some(a) = &accel_finals {
            row.push(a[t]);
        }
        report.push_row(row)?;
    }
    Ok(report)
}
