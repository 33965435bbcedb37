use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::formal_equivalence;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{
    FalpvDims, FalpvModel, PsiEvaluator, PsiRealization, ScaledArgs, TruncatedSeries, Word,
};
use crate::realization::{
    check_stability, hankel_realize, is_minimal, minimality_report, minimize_lft,
    representation_to_lft, stabilize_scale, MinimalityReport, StabilityCertificate,
};
use crate::transform::{
    assemble, coefficient_factors, fast_path_factor, lift_kron, AssembledLft, SigmaPsiLft,
};

/// Where psi comes from.
#[derive(Debug, Clone)]
pub enum PsiSource {
    Realization(PsiRealization),
    /// Taylor coefficients of psi (an `n_psi x 1` series) and a Hankel order bound.
    Taylor { series: TruncatedSeries, order: usize },
}

/// A minimal, certified-stable realization of psi, possibly for rescaled arguments.
#[derive(Debug, Clone)]
pub struct RealizedPsi {
    /// Realizes `p ↦ psi(scale · p)`.
    pub psi: PsiRealization,
    pub scale: f64,
    pub certificate: StabilityCertificate,
    /// Total state dimension before minimization.
    pub raw_dim: usize,
}

/// Realize, minimize and certify psi. A realization that cannot be certified
/// is rescaled once; if that still fails, psi is reported as not recognizable.
pub fn realize_psi(source: &PsiSource) -> Result<RealizedPsi> {
    let raw = match source {
        PsiSource::Realization(psi) => psi.lft().clone(),
        PsiSource::Taylor { series, order } => {
            if series.shape().1 != 1 {
                return Err(Error::shape("psi series columns", 1, series.shape().1));
            }
            if !series.get(&Word::empty())?.iter().all(|v| *v == 0.0) {
                return Err(Error::Precondition(
                    "psi(0) must vanish; move constant terms into the X_0 coefficients".into(),
                ));
            }
            let rep = hankel_realize(series, *order)?;
            representation_to_lft(&rep)?
        }
    };
    let raw_dim = raw.dim();
    let psi = PsiRealization::from_lft(minimize_lft(&raw)?.lft)?;
    if let Some(certificate) = check_stability(psi.lft()) {
        return Ok(RealizedPsi {
            psi,
            scale: 1.0,
            certificate,
            raw_dim,
        });
    }
    let (scaled, scale) = stabilize_scale(&psi)?;
    match check_stability(scaled.lft()) {
        Some(certificate) => Ok(RealizedPsi {
            psi: scaled,
            scale,
            certificate,
            raw_dim,
        }),
        None => Err(Error::Recognizability(
            "no structured stability certificate even after rescaling".into(),
        )),
    }
}

#[derive(Debug, Clone)]
pub struct TransformOptions {
    /// Opt-in Kronecker shortcut for `n_psi = 1`, cross-checked against the
    /// minimized lift.
    pub fast_path: bool,
    /// Word length for the post-hoc series check; `None` uses `min(5, dim sum)`.
    pub check_depth: Option<usize>,
    /// Number of random scheduling points for the pointwise check.
    pub check_points: usize,
    pub seed: u64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            fast_path: false,
            check_depth: None,
            check_points: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum FastPathStatus {
    NotRequested,
    Applied,
    Rejected(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformReport {
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub n_p: usize,
    pub n_psi: usize,
    pub psi_source: &'static str,
    pub psi_raw_dim: usize,
    pub psi_blocks: Vec<usize>,
    pub psi_scale: f64,
    pub psi_margin: f64,
    pub lifted_blocks: Vec<usize>,
    pub lifted_reachable: bool,
    pub sigma_psi_blocks: Vec<usize>,
    pub sigma_psi_minimal: bool,
    pub sigma_psi_margin: Option<f64>,
    pub assembled_blocks: Vec<usize>,
    pub assembled_minimality: MinimalityReport,
    pub fast_path: FastPathStatus,
    pub series_check_depth: usize,
    pub series_check_error: f64,
    pub point_check_count: usize,
    pub point_check_seed: u64,
    pub point_check_error: f64,
}

#[derive(Debug, Clone)]
pub struct Transformed {
    pub assembled: AssembledLft,
    pub sigma_psi: SigmaPsiLft,
    pub psi: RealizedPsi,
    pub report: TransformReport,
}

/// Full pipeline: realize psi, lift, minimize, partition and assemble.
///
/// The pointwise check compares `𝓗 Δ (I - 𝓕Δ)^{-1} 𝓖` with
/// `Σ_l K_l psi_l(p)` where psi comes from the source itself (the given
/// realization, or the truncated Taylor sum).
pub fn transform(falpv: &FalpvModel, source: &PsiSource, opts: &TransformOptions) -> Result<Transformed> {
    match source {
        PsiSource::Realization(psi) => transform_with_reference(falpv, source, opts, psi),
        PsiSource::Taylor { series, .. } => transform_with_reference(falpv, source, opts, series),
    }
}

/// As [`transform`], with an explicit psi evaluator for the pointwise check.
pub fn transform_with_reference(
    falpv: &FalpvModel,
    source: &PsiSource,
    opts: &TransformOptions,
    reference: &dyn PsiEvaluator,
) -> Result<Transformed> {
    let dims = falpv.dims();
    check_source_dims(dims, source)?;
    if reference.n_p() != dims.n_p || reference.n_psi() != dims.n_psi {
        return Err(Error::shape(
            "reference psi",
            format!("{} -> {}", dims.n_p, dims.n_psi),
            format!("{} -> {}", reference.n_p(), reference.n_psi()),
        ));
    }
    let realized = realize_psi(source)?;
    let psi = &realized.psi;

    let lifted = lift_kron(falpv, psi)?;
    let lifted_report = minimality_report(&lifted);
    let lifted_reachable = lifted_report.reachable == lifted_report.block_dims;
    let minimized = SigmaPsiLft::new(minimize_lft(&lifted)?.lft, dims.n_x, dims.n_u)?;

    let (sigma_psi, fast_path) = if opts.fast_path {
        match try_fast_path(falpv, psi, &minimized) {
            Ok(sp) => (sp, FastPathStatus::Applied),
            Err(e) => (minimized, FastPathStatus::Rejected(e.to_string())),
        }
    } else {
        (minimized, FastPathStatus::NotRequested)
    };
    let sigma_psi_minimal = is_minimal(sigma_psi.lft());
    let sigma_psi_margin = check_stability(sigma_psi.lft()).map(|c| c.margin);

    let mut assembled = assemble(falpv, &sigma_psi)?;
    assembled = AssembledLft::new(assembled.into_lft(), dims, realized.scale)?;
    let assembled_minimality = minimality_report(assembled.lft());

    let series_check_depth = opts
        .check_depth
        .unwrap_or_else(|| 5.min(lifted.dim() + sigma_psi.lft().dim()));
    let series_check_error = series_check(falpv, psi, &sigma_psi, series_check_depth)?;

    let unscaled = ScaledArgs {
        inner: reference,
        lambda: realized.scale,
    };
    let point_check_error = point_check(falpv, &sigma_psi, &unscaled, opts.check_points, opts.seed)?;

    let report = TransformReport {
        n_x: dims.n_x,
        n_u: dims.n_u,
        n_y: dims.n_y,
        n_p: dims.n_p,
        n_psi: dims.n_psi,
        psi_source: match source {
            PsiSource::Realization(_) => "realization",
            PsiSource::Taylor { .. } => "taylor",
        },
        psi_raw_dim: realized.raw_dim,
        psi_blocks: psi.blocks().dims().to_vec(),
        psi_scale: realized.scale,
        psi_margin: realized.certificate.margin,
        lifted_blocks: lifted.blocks().dims().to_vec(),
        lifted_reachable,
        sigma_psi_blocks: sigma_psi.blocks().dims().to_vec(),
        sigma_psi_minimal,
        sigma_psi_margin,
        assembled_blocks: assembled.lft().blocks().dims().to_vec(),
        assembled_minimality,
        fast_path,
        series_check_depth,
        series_check_error,
        point_check_count: opts.check_points,
        point_check_seed: opts.seed,
        point_check_error,
    };
    Ok(Transformed {
        assembled,
        sigma_psi,
        psi: realized,
        report,
    })
}

fn check_source_dims(dims: FalpvDims, source: &PsiSource) -> Result<()> {
    let (n_p, n_psi) = match source {
        PsiSource::Realization(psi) => (psi.n_p(), psi.n_psi()),
        PsiSource::Taylor { series, .. } => (series.alphabet(), series.shape().0),
    };
    if n_p != dims.n_p || n_psi != dims.n_psi {
        return Err(Error::shape(
            "psi source",
            format!("{} -> {}", dims.n_p, dims.n_psi),
            format!("{n_p} -> {n_psi}"),
        ));
    }
    Ok(())
}

fn try_fast_path(falpv: &FalpvModel, psi: &PsiRealization, reference: &SigmaPsiLft) -> Result<SigmaPsiLft> {
    let (l, r) = coefficient_factors(falpv)?;
    let fast = fast_path_factor(falpv, psi, &l, &r)?;
    let check = formal_equivalence(fast.lft(), reference.lft(), None)?;
    if let Some(word) = check.counterexample {
        return Err(Error::InvalidFactor(format!(
            "shortcut disagrees with the minimized lift at word {word}"
        )));
    }
    Ok(fast)
}

/// Largest deviation between the formal map of `sp` and `S̃` up to `depth`.
fn series_check(
    falpv: &FalpvModel,
    psi: &PsiRealization,
    sp: &SigmaPsiLft,
    depth: usize,
) -> Result<f64> {
    let taylor = psi.taylor(depth)?;
    let mut worst: f64 = 0.0;
    for w in Word::all_up_to(falpv.dims().n_p, depth).into_iter().skip(1) {
        let diff = sp.lft().formal_io_map(&w)? - super::tilde_series(falpv, &taylor, &w)?;
        worst = worst.max(linalg::max_abs(&diff));
    }
    Ok(worst)
}

fn point_check(
    falpv: &FalpvModel,
    sp: &SigmaPsiLft,
    reference: &dyn PsiEvaluator,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let dims = falpv.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let p: Vec<f64> = (0..dims.n_p).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let vals = reference.eval(&p)?;
        let mut expect = nalgebra::DMatrix::zeros(dims.n_x + dims.n_y, dims.n_x + dims.n_u);
        for (l, v) in vals.iter().enumerate() {
            expect += falpv.coefficient_block(l + 1) * *v;
        }
        worst = worst.max(linalg::max_abs(&(sp.eval(&p)? - expect)));
    }
    Ok(worst)
}
