use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lpvlft::analysis::{
    find_structured_isomorphism, formal_equivalence, similarity_residual, simulate_falpv,
    simulate_lft_loop, trajectory_deviation, Trajectory,
};
use lpvlft::format::{
    ClosedForm, LftFile, ModelFile, PsiRealizationFile, PsiTaylorFile,
};
use lpvlft::model::{FalpvModel, LftModel, PsiEvaluator, PsiRealization, Word};
use lpvlft::realization::{check_stability as find_certificate, is_minimal, minimize_lft};
use lpvlft::transform::{
    realize_psi as realize, transform_with_reference, AssembledLft, FastPathStatus, PsiSource,
    TransformOptions,
};
use lpvlft::{Error, Result};

use crate::report::{dims, matrix, matrix_value, num, sci, Report};
use crate::Output;

/// Relative tolerance of the trajectory comparison in `verify`.
const VERIFY_TOL: f64 = 1e-9;
/// Pointwise check deviations above this are flagged in `transform`.
const POINT_WARN: f64 = 1e-6;

fn wrong_kind(path: &Path, expected: &str, found: &ModelFile) -> Error {
    Error::Parse(format!(
        "{}: expected a {expected} file, found kind '{}'",
        path.display(),
        found.kind()
    ))
}

fn load_falpv(path: &Path) -> Result<FalpvModel> {
    match ModelFile::load(path)? {
        ModelFile::Falpv(f) => f.to_model(),
        other => Err(wrong_kind(path, "falpv", &other)),
    }
}

fn load_lft(path: &Path) -> Result<LftFile> {
    match ModelFile::load(path)? {
        ModelFile::Lft(f) => Ok(f),
        ModelFile::PsiRealization(f) => Ok(LftFile::from_model(f.to_model()?.lft(), f.description.clone())),
        other => Err(wrong_kind(path, "lft", &other)),
    }
}

fn load_assembled(path: &Path) -> Result<AssembledLft> {
    let file = load_lft(path)?;
    if file.assembled.is_none() {
        return Err(Error::Precondition(format!(
            "{} has no 'assembled' section; only LFTs produced by transform can be simulated",
            path.display()
        )));
    }
    file.to_assembled()
}

struct LoadedPsi {
    source: PsiSource,
    closed_form: Option<ClosedForm>,
}

fn default_order(depth: usize) -> usize {
    depth.saturating_sub(1) / 2
}

fn taylor_source(f: &PsiTaylorFile, order: Option<usize>) -> Result<PsiSource> {
    Ok(PsiSource::Taylor {
        series: f.to_series()?,
        order: order.or(f.order).unwrap_or_else(|| default_order(f.depth)),
    })
}

fn load_psi(path: &Path, order: Option<usize>) -> Result<LoadedPsi> {
    match ModelFile::load(path)? {
        ModelFile::PsiRealization(f) => Ok(LoadedPsi {
            source: PsiSource::Realization(f.to_model()?),
            closed_form: f.closed_form_evaluator()?,
        }),
        ModelFile::PsiTaylor(f) => Ok(LoadedPsi {
            source: taylor_source(&f, order)?,
            closed_form: f.closed_form_evaluator()?,
        }),
        other => Err(wrong_kind(path, "psi-realization or psi-taylor", &other)),
    }
}

/// psi recovered from a realization of `p ↦ psi(λ p)`.
struct Unscaled {
    psi: PsiRealization,
    scale: f64,
}

impl PsiEvaluator for Unscaled {
    fn n_p(&self) -> usize {
        self.psi.n_p()
    }
    fn n_psi(&self) -> usize {
        self.psi.n_psi()
    }
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        let q: Vec<f64> = p.iter().map(|v| v / self.scale).collect();
        self.psi.eval(&q)
    }
}

/// The best available pointwise evaluator of psi: a closed form, the given
/// realization, or the realization computed from Taylor data.
fn psi_evaluator(loaded: LoadedPsi, report: &mut Report) -> Result<Box<dyn PsiEvaluator>> {
    if let Some(cf) = loaded.closed_form {
        report.field("psi_evaluator", "closed form", "closed-form");
        return Ok(Box::new(cf));
    }
    match loaded.source {
        PsiSource::Realization(psi) => {
            report.field("psi_evaluator", "given realization", "realization");
            Ok(Box::new(psi))
        }
        source @ PsiSource::Taylor { .. } => {
            report.field("psi_evaluator", "realization of the Taylor data", "taylor-realization");
            let r = realize(&source)?;
            Ok(Box::new(Unscaled {
                psi: r.psi,
                scale: r.scale,
            }))
        }
    }
}

fn save(path: Option<&Path>, file: ModelFile) -> Result<()> {
    match path {
        Some(p) => file.save(p),
        None => Ok(()),
    }
}

fn emit(report: &Report, path: Option<&Path>) -> Result<()> {
    report.emit(path).map_err(Error::from)
}

fn usize_list(v: &[usize]) -> Value {
    Value::from(v.to_vec())
}

pub fn realize_psi(path: &Path, order: Option<usize>, output: &Output) -> Result<bool> {
    let file = match ModelFile::load(path)? {
        ModelFile::PsiTaylor(f) => f,
        other => return Err(wrong_kind(path, "psi-taylor", &other)),
    };
    let source = taylor_source(&file, order)?;
    let PsiSource::Taylor { series, order } = &source else {
        unreachable!()
    };
    let mut report = Report::new("realize-psi");
    report.field("n_p", file.n_p, file.n_p);
    report.field("n_psi", file.n_psi, file.n_psi);
    report.field("depth", file.depth, file.depth);
    report.field("order_bound", order, *order);
    if series.is_zero() {
        report.warn("all Taylor coefficients vanish; the realization is empty");
    }
    let realized = realize(&source)?;
    let psi = &realized.psi;
    report.field("raw_dim", realized.raw_dim, realized.raw_dim);
    report.field("block_dims", dims(psi.blocks().dims()), usize_list(psi.blocks().dims()));
    report.field("total_dim", psi.blocks().total(), psi.blocks().total());
    report.field("stability_margin", sci(realized.certificate.margin), num(realized.certificate.margin));
    report.field("scale", realized.scale, realized.scale);
    if realized.scale != 1.0 {
        report.warn(format!(
            "realization rescaled: the file realizes psi(lambda p) with lambda = {}",
            realized.scale
        ));
    }
    let reference = series.scaled(realized.scale);
    let taylor = psi.taylor(series.depth())?;
    let mut worst: f64 = 0.0;
    for w in Word::all_up_to(series.alphabet(), series.depth()) {
        let diff = taylor.get(&w)? - reference.get(&w)?;
        worst = worst.max(diff.abs().max());
    }
    report.field("series_match_error", sci(worst), worst);

    let mut out = PsiRealizationFile::from_model(psi, file.description.clone());
    if realized.scale == 1.0 {
        out.closed_form = file.closed_form.clone();
    }
    save(output.out.as_deref(), ModelFile::PsiRealization(out))?;
    emit(&report, output.report.as_deref())?;
    Ok(true)
}

pub fn transform(
    falpv_path: &Path,
    psi_path: &Path,
    fast_path: bool,
    depth: Option<usize>,
    seed: u64,
    order: Option<usize>,
    output: &Output,
) -> Result<bool> {
    let falpv = load_falpv(falpv_path)?;
    let loaded = load_psi(psi_path, order)?;
    let opts = TransformOptions {
        fast_path,
        check_depth: depth,
        seed,
        ..TransformOptions::default()
    };
    let mut report = Report::new("transform");
    let result = match &loaded.closed_form {
        Some(cf) => {
            report.field("point_check_reference", "closed form", "closed-form");
            transform_with_reference(&falpv, &loaded.source, &opts, cf)?
        }
        None => {
            let label = match &loaded.source {
                PsiSource::Realization(_) => "realization",
                PsiSource::Taylor { .. } => "truncated-taylor",
            };
            report.field("point_check_reference", label.replace('-', " "), label);
            match &loaded.source {
                PsiSource::Realization(psi) => transform_with_reference(&falpv, &loaded.source, &opts, psi)?,
                PsiSource::Taylor { series, .. } => {
                    transform_with_reference(&falpv, &loaded.source, &opts, series)?
                }
            }
        }
    };
    let r = &result.report;
    report.field(
        "falpv_dims",
        format!("n_x={} n_u={} n_y={} n_p={} n_psi={}", r.n_x, r.n_u, r.n_y, r.n_p, r.n_psi),
        json!({"n_x": r.n_x, "n_u": r.n_u, "n_y": r.n_y, "n_p": r.n_p, "n_psi": r.n_psi}),
    );
    report.field("psi_source", r.psi_source, r.psi_source);
    report.field("psi_raw_dim", r.psi_raw_dim, r.psi_raw_dim);
    report.field("psi_blocks", dims(&r.psi_blocks), usize_list(&r.psi_blocks));
    report.field("psi_scale", r.psi_scale, r.psi_scale);
    report.field("psi_margin", sci(r.psi_margin), num(r.psi_margin));
    report.field("lifted_blocks", dims(&r.lifted_blocks), usize_list(&r.lifted_blocks));
    report.field("lifted_reachable", r.lifted_reachable, r.lifted_reachable);
    report.field("sigma_psi_blocks", dims(&r.sigma_psi_blocks), usize_list(&r.sigma_psi_blocks));
    report.field("sigma_psi_minimal", r.sigma_psi_minimal, r.sigma_psi_minimal);
    match r.sigma_psi_margin {
        Some(m) => report.field("sigma_psi_stable", format!("yes (margin {})", sci(m)), num(m)),
        None => report.field("sigma_psi_stable", "no certificate found", Value::Null),
    }
    report.field("assembled_blocks", dims(&r.assembled_blocks), usize_list(&r.assembled_blocks));
    let m = &r.assembled_minimality;
    report.field(
        "assembled_minimal",
        format!(
            "{} (reachable {}, observable {})",
            m.is_minimal(),
            dims(&m.reachable),
            dims(&m.observable)
        ),
        json!({"minimal": m.is_minimal(), "reachable": m.reachable, "observable": m.observable}),
    );
    let (fp_text, fp_json) = match &r.fast_path {
        FastPathStatus::NotRequested => ("not requested".to_string(), json!("not-requested")),
        FastPathStatus::Applied => ("applied".to_string(), json!("applied")),
        FastPathStatus::Rejected(why) => {
            report.warn(format!("fast path rejected: {why}"));
            (format!("rejected: {why}"), json!({"rejected": why}))
        }
    };
    report.field("fast_path", fp_text, fp_json);
    report.field(
        "series_check",
        format!("depth {}, max error {}", r.series_check_depth, sci(r.series_check_error)),
        json!({"depth": r.series_check_depth, "max_error": r.series_check_error}),
    );
    report.field(
        "point_check",
        format!(
            "{} points, seed {}, max error {}",
            r.point_check_count,
            r.point_check_seed,
            sci(r.point_check_error)
        ),
        json!({"points": r.point_check_count, "seed": r.point_check_seed, "max_error": r.point_check_error}),
    );
    if r.psi_scale != 1.0 {
        report.warn(format!(
            "psi was rescaled; the LFT is driven by p / {}",
            r.psi_scale
        ));
    }
    if r.point_check_error > POINT_WARN {
        report.warn("pointwise check deviates; a truncated Taylor reference only approximates psi");
    }
    let description = format!(
        "assembled LFT of {}",
        falpv_path.file_name().map_or("FALPV model".into(), |n| n.to_string_lossy().into_owned())
    );
    save(
        output.out.as_deref(),
        ModelFile::Lft(LftFile::from_assembled(&result.assembled, Some(description))),
    )?;
    emit(&report, output.report.as_deref())?;
    Ok(true)
}

pub struct VerifyOptions {
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    pub depth: Option<usize>,
    pub order: Option<usize>,
}

fn random_signals(rng: &mut ChaCha8Rng, horizon: usize, n_u: usize, n_p: usize) -> (Vec<DVector<f64>>, Vec<Vec<f64>>) {
    let u = (0..horizon)
        .map(|_| DVector::from_fn(n_u, |_, _| rng.random_range(-1.0..=1.0)))
        .collect();
    let p = (0..horizon)
        .map(|_| (0..n_p).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    (u, p)
}

fn output_scale(t: &Trajectory) -> f64 {
    t.y.iter().flat_map(|v| v.iter()).fold(1.0, |m, v| m.max(v.abs()))
}

pub fn verify(
    falpv_path: &Path,
    lft_path: &Path,
    psi_path: &Path,
    opts: VerifyOptions,
    report_path: Option<&Path>,
) -> Result<bool> {
    let falpv = load_falpv(falpv_path)?;
    let assembled = load_assembled(lft_path)?;
    let dims_f = falpv.dims();
    if assembled.dims() != dims_f {
        return Err(Error::shape(
            "FALPV dimensions recorded in the LFT file",
            format!("{dims_f:?}"),
            format!("{:?}", assembled.dims()),
        ));
    }
    let loaded = load_psi(psi_path, opts.order)?;
    let source = loaded.source.clone();
    let mut report = Report::new("verify");
    let psi = psi_evaluator(loaded, &mut report)?;
    if psi.n_p() != dims_f.n_p || psi.n_psi() != dims_f.n_psi {
        return Err(Error::shape(
            "psi",
            format!("{} -> {}", dims_f.n_p, dims_f.n_psi),
            format!("{} -> {}", psi.n_p(), psi.n_psi()),
        ));
    }

    report.field("horizon", opts.horizon, opts.horizon);
    report.field("trials", opts.trials, opts.trials);
    report.field("seed", opts.seed, opts.seed);
    if opts.horizon == 0 || opts.trials == 0 {
        report.warn("empty simulation (horizon or trials is 0); the trajectory check is trivial");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut worst_y, mut worst_x, mut worst_rel) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..opts.trials {
        let (u, p) = random_signals(&mut rng, opts.horizon, dims_f.n_u, dims_f.n_p);
        let reference = simulate_falpv(&falpv, psi.as_ref(), &u, &p, opts.horizon)?;
        let lft_run = simulate_lft_loop(&assembled, &u, &p, opts.horizon)?;
        let (dy, dx) = trajectory_deviation(&reference, &lft_run.trajectory);
        worst_y = worst_y.max(dy);
        worst_x = worst_x.max(dx);
        worst_rel = worst_rel.max(dy / output_scale(&reference));
    }
    let trajectory_ok = worst_rel <= VERIFY_TOL;
    report.field("max_output_error", sci(worst_y), worst_y);
    report.field("max_state_error", sci(worst_x), worst_x);
    report.field(
        "relative_output_error",
        format!("{} (tolerance {})", sci(worst_rel), sci(VERIFY_TOL)),
        worst_rel,
    );

    let recomputed = lpvlft::transform::transform(&falpv, &source, &TransformOptions::default())?;
    let scale_given = assembled.scheduling_scale();
    let scale_ref = recomputed.assembled.scheduling_scale();
    let formal_ok = if (scale_given - scale_ref).abs() > 1e-12 * scale_ref {
        report.warn(format!(
            "scheduling scales differ ({scale_given} vs {scale_ref}); formal map check skipped"
        ));
        report.field("formal_check", "skipped", Value::Null);
        true
    } else {
        let eq = formal_equivalence(assembled.lft(), recomputed.assembled.lft(), opts.depth)?;
        match &eq.counterexample {
            None => report.field(
                "formal_check",
                format!("equivalent ({} comparisons)", eq.checked),
                json!({"equivalent": true, "checked": eq.checked}),
            ),
            Some(w) => report.field(
                "formal_check",
                format!("first failing word {w}, deviation {}", sci(eq.deviation)),
                json!({"equivalent": false, "word": w.to_string(), "deviation": eq.deviation}),
            ),
        }
        eq.equivalent()
    };
    let ok = trajectory_ok && formal_ok;
    report.verdict(ok, if ok { "pass" } else { "FAIL" });
    emit(&report, report_path)?;
    Ok(ok)
}

pub fn compare(first: &Path, second: &Path, depth: Option<usize>, report_path: Option<&Path>) -> Result<bool> {
    let f1 = load_lft(first)?;
    let f2 = load_lft(second)?;
    let (m1, m2) = (f1.to_model()?, f2.to_model()?);
    let mut report = Report::new("compare");
    report.field("first_blocks", dims(m1.blocks().dims()), usize_list(m1.blocks().dims()));
    report.field("second_blocks", dims(m2.blocks().dims()), usize_list(m2.blocks().dims()));
    if let (Some(a), Some(b)) = (f1.assembled, f2.assembled) {
        if a.scheduling_scale != b.scheduling_scale {
            report.warn("the LFTs are driven by differently scaled scheduling signals");
        }
    }
    let eq = formal_equivalence(&m1, &m2, depth)?;
    report.field("comparisons", eq.checked, eq.checked);
    match &eq.counterexample {
        None => report.field("equivalent", "yes", true),
        Some(w) => {
            report.field("equivalent", "no", false);
            report.field("separating_word", w, w.to_string());
            report.field("deviation", sci(eq.deviation), eq.deviation);
        }
    }
    if eq.equivalent() {
        if is_minimal(&m1) && is_minimal(&m2) {
            match find_structured_isomorphism(&m1, &m2)? {
                Some(t) => {
                    let residual = similarity_residual(&m1, &m2, &t);
                    report.field("isomorphism", format!("found (residual {})", sci(residual)), residual);
                    for (i, ti) in t.iter().enumerate() {
                        report.block(&format!("T_{}", i + 1), &matrix(ti));
                    }
                    report.data("similarity", Value::from(t.iter().map(matrix_value).collect::<Vec<_>>()));
                }
                None => {
                    report.warn("both models are minimal and equivalent but no isomorphism was found");
                    report.field("isomorphism", "not found", Value::Null);
                }
            }
        } else {
            report.field("isomorphism", "not attempted (a model is not minimal)", Value::Null);
        }
    }
    report.verdict(eq.equivalent(), if eq.equivalent() { "equivalent" } else { "NOT equivalent" });
    emit(&report, report_path)?;
    Ok(eq.equivalent())
}

fn vectors_value(v: &[DVector<f64>]) -> Value {
    Value::from(v.iter().map(|x| x.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn row_text(v: &DVector<f64>) -> String {
    v.iter().map(|x| format!("{x:>14.6e}")).collect::<Vec<_>>().join(" ")
}

pub fn simulate(
    model: &Path,
    signals: &Path,
    psi_path: Option<&Path>,
    horizon: Option<usize>,
    order: Option<usize>,
    output: &Output,
) -> Result<bool> {
    let (u, p) = match ModelFile::load(signals)? {
        ModelFile::Signals(f) => f.to_signals()?,
        other => return Err(wrong_kind(signals, "signals", &other)),
    };
    let horizon = horizon.unwrap_or(u.len());
    let mut report = Report::new("simulate");
    report.field("horizon", horizon, horizon);
    if horizon == 0 {
        report.warn("horizon is 0; nothing to simulate");
    }
    let (traj, z) = match ModelFile::load(model)? {
        ModelFile::Falpv(f) => {
            let falpv = f.to_model()?;
            let psi_path = psi_path
                .ok_or_else(|| Error::Precondition("simulating an FALPV model needs --psi".into()))?;
            let psi = psi_evaluator(load_psi(psi_path, order)?, &mut report)?;
            report.field("model", "falpv", "falpv");
            (simulate_falpv(&falpv, psi.as_ref(), &u, &p, horizon)?, None)
        }
        ModelFile::Lft(f) => {
            if f.assembled.is_none() {
                return Err(Error::Precondition(format!(
                    "{} has no 'assembled' section; only LFTs produced by transform can be simulated",
                    model.display()
                )));
            }
            let assembled = f.to_assembled()?;
            report.field("model", "assembled lft", "lft");
            let run = simulate_lft_loop(&assembled, &u, &p, horizon)?;
            (run.trajectory, Some(run.z))
        }
        other => return Err(wrong_kind(model, "falpv or lft", &other)),
    };
    let body: Vec<String> = traj
        .y
        .iter()
        .enumerate()
        .map(|(t, y)| format!("{t:>5} {}", row_text(y)))
        .collect();
    report.block("y(t)", &body.join("\n"));
    report.data("y", vectors_value(&traj.y));
    if output.out.is_some() || output.report.is_some() {
        let mut file = json!({
            "kind": "trajectory",
            "horizon": horizon,
            "y": vectors_value(&traj.y),
            "x": vectors_value(&traj.x),
        });
        if let Some(z) = &z {
            file["z"] = vectors_value(z);
        }
        if let Some(path) = output.out.as_deref() {
            std::fs::write(path, lpvlft::format::to_pretty_json(&file))?;
        }
    }
    emit(&report, output.report.as_deref())?;
    Ok(true)
}

pub fn minimize(model: &Path, output: &Output) -> Result<bool> {
    let mut report = Report::new("minimize");
    match ModelFile::load(model)? {
        ModelFile::PsiRealization(f) => {
            let psi = f.to_model()?;
            let min = PsiRealization::from_lft(minimize_lft(psi.lft())?.lft)?;
            report.field("blocks_before", dims(psi.blocks().dims()), usize_list(psi.blocks().dims()));
            report.field("blocks_after", dims(min.blocks().dims()), usize_list(min.blocks().dims()));
            let mut out = PsiRealizationFile::from_model(&min, f.description.clone());
            out.closed_form = f.closed_form.clone();
            save(output.out.as_deref(), ModelFile::PsiRealization(out))?;
        }
        ModelFile::Lft(f) => {
            let lft = f.to_model()?;
            let min = minimize_lft(&lft)?.lft;
            report.field("blocks_before", dims(lft.blocks().dims()), usize_list(lft.blocks().dims()));
            report.field("blocks_after", dims(min.blocks().dims()), usize_list(min.blocks().dims()));
            let mut out = LftFile::from_model(&min, f.description.clone());
            if let Some(info) = f.assembled {
                out.assembled = Some(info);
                if out.to_assembled().is_err() {
                    report.warn("the state block was reduced; the assembled section is dropped");
                    out.assembled = None;
                }
            }
            save(output.out.as_deref(), ModelFile::Lft(out))?;
        }
        other => return Err(wrong_kind(model, "lft or psi-realization", &other)),
    }
    emit(&report, output.report.as_deref())?;
    Ok(true)
}

fn load_any_lft(path: &Path) -> Result<LftModel> {
    load_lft(path)?.to_model()
}

pub fn check_stability(model: &Path, report_path: Option<&Path>) -> Result<bool> {
    let lft = load_any_lft(model)?;
    let mut report = Report::new("check-stability");
    report.field("blocks", dims(lft.blocks().dims()), usize_list(lft.blocks().dims()));
    let found = match find_certificate(&lft) {
        Some(cert) => {
            let verified = cert.verify(lft.a());
            report.field("certificate", "found", true);
            report.field("margin", sci(cert.margin), num(cert.margin));
            report.field("independently_verified", verified, verified);
            for (i, b) in cert.blocks.iter().enumerate() {
                report.block(&format!("P_{}", i + 1), &matrix(b));
            }
            report.data("p_blocks", Value::from(cert.blocks.iter().map(matrix_value).collect::<Vec<_>>()));
            verified
        }
        None => {
            report.field("certificate", "none found", false);
            false
        }
    };
    report.verdict(found, if found { "structurally stable" } else { "no certificate" });
    emit(&report, report_path)?;
    Ok(found)
}
