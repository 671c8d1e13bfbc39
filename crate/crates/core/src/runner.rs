//! Experiment orchestration: dispatches a parsed configuration to the
//! library modules, collects per-seed results and aggregates, and writes all
//! artifacts atomically (temp file then rename, so interrupted runs leave no
//! partial outputs).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, TargetConfig};
use crate::domains::{sample_domain, DomainTag, LabeledDataset};
use crate::error::{Error, Result};
use crate::gan::{generate_all_classes, histories_to_csv};
use crate::loss::{BinaryCrossEntropy, Loss, MeanSquaredError, SoftmaxCrossEntropy};
use crate::nn::{gradient_check, Activation, LayerSpec, Network};
use crate::oracles::{
    estimate_density, jsd, jsd_centroid, random_density, total_variation,
    value_at_optimal_discriminators, verify_centroid_optimality, virtual_criterion,
};
use crate::pipeline::{agnosticism_test, run_adaptation};
use crate::plot::{emit_scatter_svg, PlotStyle};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tensor::Tensor2;

/// Tolerance on the closed-form-versus-grid-integral identity check.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Random mass-function triples per seed in the identity check.
pub const IDENTITY_TRIPLES: usize = 100;

/// Writes via a sibling temp file and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stat {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

fn stat_of(values: &[f64]) -> Stat {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Stat {
        median,
        min: sorted[0],
        max: sorted[n - 1],
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub kind: String,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudo_labeler: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<serde_json::Value>,
    pub aggregate: BTreeMap<String, Stat>,
}

#[derive(Debug)]
pub struct RunOutputs {
    pub report: RunReport,
    pub files: Vec<PathBuf>,
    /// `Some(detail)` when a verification-style experiment failed its gate.
    pub verification_failure: Option<String>,
}

/// Runs the configured experiment and writes every artifact under
/// `cfg.output_dir`. A verification failure still writes the full report;
/// callers map it to a nonzero exit.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutputs> {
    cfg.validate()?;
    let mut ctx = RunContext {
        cfg,
        files: Vec::new(),
        notes: Vec::new(),
        pseudo_labeler: None,
        failure: None,
    };
    let per_seed_and_aggregate = match cfg.kind {
        ExperimentKind::GanTrain => run_gan_train(&mut ctx)?,
        ExperimentKind::OracleCentroid => run_oracle_centroid(&mut ctx)?,
        ExperimentKind::VerifyIdentity => run_verify_identity(&mut ctx)?,
        ExperimentKind::Adaptation => run_adaptation_kind(&mut ctx)?,
        ExperimentKind::Agnosticism => run_agnosticism(&mut ctx)?,
        ExperimentKind::Gradcheck => run_gradcheck(&mut ctx)?,
    };

    let report = RunReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: cfg.kind.as_str().to_string(),
        config_digest: cfg.digest(),
        pseudo_labeler: ctx.pseudo_labeler.clone(),
        notes: ctx.notes.clone(),
        seeds: cfg.seeds.clone(),
        per_seed: per_seed_and_aggregate.0,
        aggregate: per_seed_and_aggregate.1,
    };

    let mut files = ctx.files;
    let canon_path = cfg.output_dir.join("config_canonical.txt");
    write_atomic(&canon_path, cfg.canonical_text().as_bytes())?;
    files.push(canon_path);
    let report_path = cfg.output_dir.join("report.json");
    write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    files.push(report_path);

    Ok(RunOutputs {
        report,
        files,
        verification_failure: ctx.failure,
    })
}

struct RunContext<'a> {
    cfg: &'a ExperimentConfig,
    files: Vec<PathBuf>,
    notes: Vec<String>,
    pseudo_labeler: Option<String>,
    failure: Option<String>,
}

impl RunContext<'_> {
    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.cfg.output_dir.join(name);
        write_atomic(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn emit_scatter(&mut self, name: &str, datasets: &[&LabeledDataset]) -> Result<()> {
        if datasets.iter().all(|d| d.dim() == 2) {
            let path = self.cfg.output_dir.join(name);
            emit_scatter_svg(datasets, &[], &path)?;
            self.files.push(path);
        }
        Ok(())
    }

    fn fail(&mut self, detail: String) {
        if self.failure.is_none() {
            self.failure = Some(detail);
        }
    }

    fn sample_pair(&self, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        let target = self.cfg.resolved_target()?;
        let src = sample_domain(&self.cfg.source.spec, self.cfg.source.n_per_class, derive_seed(seed, 10))?;
        let mut tgt = sample_domain(&target.spec, target.n_per_class, derive_seed(seed, 11))?;
        tgt.domain_tag = DomainTag::Target;
        Ok((src, tgt))
    }
}

type SeedResults = (Vec<serde_json::Value>, BTreeMap<String, Stat>);

fn aggregate(metrics: &[(&str, Vec<f64>)]) -> BTreeMap<String, Stat> {
    metrics
        .iter()
        .map(|(name, values)| (name.to_string(), stat_of(values)))
        .collect()
}

// ---------------------------------------------------------------------------
// gan_train
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct GanClassResult {
    class: usize,
    final_loss_g: f64,
    final_loss_ds: f64,
    final_loss_dt: f64,
    final_v_estimate: f64,
    tv_vs_centroid: f64,
}

#[derive(Serialize)]
struct GanSeedResult {
    seed: u64,
    classes: Vec<GanClassResult>,
}

fn run_gan_train(ctx: &mut RunContext<'_>) -> Result<SeedResults> {
    let cfg = ctx.cfg;
    let grid = cfg.grid_spec()?;
    let mut per_seed = Vec::new();
    let mut final_vs = Vec::new();
    let mut tvs = Vec::new();
    for &seed in &cfg.seeds {
        let (src, tgt) = ctx.sample_pair(seed)?;
        let generated = generate_all_classes(&src, &tgt, &cfg.gan, cfg.fake_per_class(), derive_seed(seed, 12))?;

        let mut classes = Vec::new();
        for model in &generated.models {
            let class = model.class_label;
            let ps = estimate_density(&src.class_subset(class)?.points, &grid)?;
            let pt = estimate_density(&tgt.class_subset(class)?.points, &grid)?;
            let oracle = jsd_centroid(&ps, &pt, &cfg.centroid)?;
            let pm = estimate_density(&generated.data.class_subset(class)?.points, &grid)?;
            let tv = total_variation(&pm, &oracle.centroid)?;
            let last = model.history.last().ok_or_else(|| {
                Error::EmptyInput("gan_train needs epochs >= 1 for a history".into())
            })?;
            classes.push(GanClassResult {
                class,
                final_loss_g: last.loss_g,
                final_loss_ds: last.loss_ds,
                final_loss_dt: last.loss_dt,
                final_v_estimate: last.v_estimate,
                tv_vs_centroid: tv,
            });
        }
        final_vs.push(
            classes.iter().map(|c| c.final_v_estimate).sum::<f64>() / classes.len() as f64,
        );
        tvs.push(classes.iter().map(|c| c.tv_vs_centroid).sum::<f64>() / classes.len() as f64);

        ctx.emit(
            &format!("history_seed{seed}.csv"),
            histories_to_csv(&generated.models).as_bytes(),
        )?;
        ctx.emit(
            &format!("generated_seed{seed}.csv"),
            generated.data.to_csv().as_bytes(),
        )?;
        ctx.emit_scatter(&format!("scatter_seed{seed}.svg"), &[&src, &tgt, &generated.data])?;
        per_seed.push(serde_json::to_value(GanSeedResult { seed, classes })?);
    }
    Ok((
        per_seed,
        aggregate(&[("final_v_estimate", final_vs), ("tv_vs_centroid", tvs)]),
    ))
}

// ---------------------------------------------------------------------------
// oracle_centroid
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CentroidSeedResult {
    seed: u64,
    centroid_objective: f64,
    sweep_alpha: f64,
    jsd_source_target: f64,
    descent_steps_taken: usize,
    trace_monotone: bool,
}

fn run_oracle_centroid(ctx: &mut RunContext<'_>) -> Result<SeedResults> {
    let cfg = ctx.cfg;
    let grid = cfg.grid_spec()?;
    let mut per_seed = Vec::new();
    let mut objectives = Vec::new();
    let mut jsds = Vec::new();
    for &seed in &cfg.seeds {
        let (src, tgt) = ctx.sample_pair(seed)?;
        let ps = estimate_density(&src.points, &grid)?;
        let pt = estimate_density(&tgt.points, &grid)?;
        let sol = jsd_centroid(&ps, &pt, &cfg.centroid)?;
        let monotone = sol.trace.windows(2).all(|w| w[1] <= w[0]);
        if !monotone {
            ctx.fail(format!("seed {seed}: descent trace not monotone"));
        }
        objectives.push(sol.objective);
        let j = jsd(&ps, &pt)?;
        jsds.push(j);
        ctx.emit(&format!("ps_seed{seed}.csv"), ps.to_csv().as_bytes())?;
        ctx.emit(&format!("pt_seed{seed}.csv"), pt.to_csv().as_bytes())?;
        ctx.emit(
            &format!("centroid_seed{seed}.csv"),
            sol.centroid.to_csv().as_bytes(),
        )?;
        per_seed.push(serde_json::to_value(CentroidSeedResult {
            seed,
            centroid_objective: sol.objective,
            sweep_alpha: sol.sweep_alpha,
            jsd_source_target: j,
            descent_steps_taken: sol.trace.len().saturating_sub(1),
            trace_monotone: monotone,
        })?);
    }
    Ok((
        per_seed,
        aggregate(&[
            ("centroid_objective", objectives),
            ("jsd_source_target", jsds),
        ]),
    ))
}

// ---------------------------------------------------------------------------
// verify_identity
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifySeedResult {
    seed: u64,
    max_identity_residual: f64,
    centroid_objective: f64,
    probes_checked: usize,
    max_violation: f64,
    trace_monotone: bool,
}

fn run_verify_identity(ctx: &mut RunContext<'_>) -> Result<SeedResults> {
    let cfg = ctx.cfg;
    let grid = cfg.grid_spec()?;
    let mut per_seed = Vec::new();
    let mut residuals = Vec::new();
    let mut violations = Vec::new();
    for &seed in &cfg.seeds {
        let mut rng = rng_from_seed(derive_seed(seed, 13));
        let mut max_residual = 0.0f64;
        for _ in 0..IDENTITY_TRIPLES {
            let ps = random_density(&grid, &mut rng)?;
            let pt = random_density(&grid, &mut rng)?;
            let pm = random_density(&grid, &mut rng)?;
            let lhs = value_at_optimal_discriminators(&ps, &pt, &pm)?;
            let rhs = virtual_criterion(&ps, &pt, &pm)?;
            max_residual = max_residual.max((lhs - rhs).abs());
        }
        if max_residual >= IDENTITY_TOLERANCE {
            ctx.fail(format!(
                "seed {seed}: identity residual {max_residual:.3e} >= {IDENTITY_TOLERANCE:.1e}"
            ));
        }
        residuals.push(max_residual);

        let (src, tgt) = ctx.sample_pair(seed)?;
        let ps = estimate_density(&src.points, &grid)?;
        let pt = estimate_density(&tgt.points, &grid)?;
        match verify_centroid_optimality(&ps, &pt, &cfg.centroid, derive_seed(seed, 14)) {
            Ok(v) => {
                violations.push(v.max_violation);
                ctx.emit(
                    &format!("centroid_seed{seed}.csv"),
                    v.centroid.to_csv().as_bytes(),
                )?;
                per_seed.push(serde_json::to_value(VerifySeedResult {
                    seed,
                    max_identity_residual: max_residual,
                    centroid_objective: v.centroid_objective,
                    probes_checked: v.probes_checked,
                    max_violation: v.max_violation,
                    trace_monotone: v.trace_monotone,
                })?);
            }
            Err(Error::VerificationFailed(detail)) => {
                ctx.fail(format!("seed {seed}: {detail}"));
                per_seed.push(serde_json::json!({
                    "seed": seed,
                    "max_identity_residual": max_residual,
                    "verification_error": detail,
                }));
                violations.push(f64::INFINITY);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((
        per_seed,
        aggregate(&[
            ("max_identity_residual", residuals),
            ("centroid_max_violation", violations),
        ]),
    ))
}

// ---------------------------------------------------------------------------
// adaptation
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AdaptationSeedResult {
    seed: u64,
    source_only_acc: f64,
    middlegan_acc: f64,
    coverage: f64,
    pseudo_label_only: bool,
}

fn run_adaptation_kind(ctx: &mut RunContext<'_>) -> Result<SeedResults> {
    let cfg = ctx.cfg;
    ctx.pseudo_labeler = Some(cfg.pseudo_label.describe());
    let mut per_seed = Vec::new();
    let (mut src_accs, mut mid_accs, mut coverages) = (Vec::new(), Vec::new(), Vec::new());
    for &seed in &cfg.seeds {
        let (src, tgt) = ctx.sample_pair(seed)?;
        let out = run_adaptation(
            &src,
            &tgt,
            &cfg.gan,
            &cfg.pseudo_label,
            &cfg.classifier,
            cfg.fake_per_class(),
            derive_seed(seed, 12),
        )?;
        src_accs.push(out.source_only_acc);
        mid_accs.push(out.middlegan_acc);
        coverages.push(out.coverage);
        if let Some(fake) = &out.fake_data {
            ctx.emit(&format!("fake_seed{seed}.csv"), fake.to_csv().as_bytes())?;
            ctx.emit(
                &format!("history_seed{seed}.csv"),
                histories_to_csv(&out.per_class_models).as_bytes(),
            )?;
            ctx.emit_scatter(&format!("scatter_seed{seed}.svg"), &[&src, &tgt, fake])?;
        }
        per_seed.push(serde_json::to_value(AdaptationSeedResult {
            seed,
            source_only_acc: out.source_only_acc,
            middlegan_acc: out.middlegan_acc,
            coverage: out.coverage,
            pseudo_label_only: out.pseudo_label_only,
        })?);
    }
    Ok((
        per_seed,
        aggregate(&[
            ("source_only_acc", src_accs),
            ("middlegan_acc", mid_accs),
            ("coverage", coverages),
        ]),
    ))
}

// ---------------------------------------------------------------------------
// agnosticism
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AgnosticismAccuracies {
    source_acc_plain: f64,
    target_acc_plain: f64,
    source_acc_transformed: f64,
    target_acc_transformed: f64,
    max_delta: f64,
}

#[derive(Serialize)]
struct AgnosticismSeedResult {
    seed: u64,
    agnosticism: AgnosticismAccuracies,
}

fn run_agnosticism(ctx: &mut RunContext<'_>) -> Result<SeedResults> {
    let cfg = ctx.cfg;
    let rotation = match &cfg.target {
        TargetConfig::FromSource {
            rotation_degrees,
            shift,
        } if shift.is_empty() => *rotation_degrees,
        _ => {
            return Err(Error::config(
                "agnosticism needs [target] defined as from_source_rotation so the \
                 fake transform matches the domain shift",
            ))
        }
    };
    ctx.notes.push(
        "agnosticism diagnostic trains per-class generators on true target labels".to_string(),
    );
    let target = cfg.resolved_target()?;
    let mut per_seed = Vec::new();
    let mut deltas = Vec::new();
    let (mut sp, mut tp, mut st, mut tt) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &seed in &cfg.seeds {
        let (src_train, tgt_train) = ctx.sample_pair(seed)?;
        let src_test = sample_domain(
            &cfg.source.spec,
            cfg.source.n_test_per_class,
            derive_seed(seed, 20),
        )?;
        let mut tgt_test = sample_domain(&target.spec, target.n_test_per_class, derive_seed(seed, 21))?;
        tgt_test.domain_tag = DomainTag::Target;

        let generated = generate_all_classes(
            &src_train,
            &tgt_train,
            &cfg.gan,
            cfg.fake_per_class(),
            derive_seed(seed, 22),
        )?;
        let report = agnosticism_test(
            &generated.data,
            &src_train,
            &src_test,
            &tgt_train,
            &tgt_test,
            rotation,
            &cfg.classifier,
            derive_seed(seed, 23),
        )?;
        deltas.push(report.max_delta);
        sp.push(report.source_acc_plain);
        tp.push(report.target_acc_plain);
        st.push(report.source_acc_transformed);
        tt.push(report.target_acc_transformed);
        ctx.emit(
            &format!("fake_seed{seed}.csv"),
            generated.data.to_csv().as_bytes(),
        )?;
        ctx.emit_scatter(
            &format!("scatter_seed{seed}.svg"),
            &[&src_train, &tgt_train, &generated.data],
        )?;
        per_seed.push(serde_json::to_value(AgnosticismSeedResult {
            seed,
            agnosticism: AgnosticismAccuracies {
                source_acc_plain: report.source_acc_plain,
                target_acc_plain: report.target_acc_plain,
                source_acc_transformed: report.source_acc_transformed,
                target_acc_transformed: report.target_acc_transformed,
                max_delta: report.max_delta,
            },
        })?);
    }
    Ok((
        per_seed,
        aggregate(&[
            ("max_delta", deltas),
            ("source_acc_plain", sp),
            ("target_acc_plain", tp),
            ("source_acc_transformed", st),
            ("target_acc_transformed", tt),
        ]),
    ))
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ArchResult {
    architecture: String,
    max_rel_error: f64,
}

#[derive(Serialize)]
struct GradcheckSeedResult {
    seed: u64,
    max_rel_error: f64,
    architectures: Vec<ArchResult>,
}

/// Draws one random architecture plus a probe batch whose pre-activations
/// stay clear of the rectifier kink (finite differences are invalid there).
fn draw_architecture(
    seed: u64,
    fd_step: f64,
) -> Result<(Network, Tensor2, Box<dyn Loss>, String)> {
    for attempt in 0..50u64 {
        let mut rng = rng_from_seed(derive_seed(seed, 100 + attempt));
        use rand::Rng;
        let depth = rng.random_range(1..=3usize);
        let input_dim = rng.random_range(2..=5usize);
        let rows = rng.random_range(3..=6usize);
        let acts = [
            Activation::leaky(),
            Activation::Tanh,
            Activation::Sigmoid,
            Activation::Identity,
        ];
        let mut dims = vec![input_dim];
        for _ in 0..depth {
            dims.push(rng.random_range(2..=10usize));
        }
        let loss_pick = rng.random_range(0..3usize);
        let output_dim = *dims.last().unwrap();
        let mut specs: Vec<LayerSpec> = Vec::new();
        for k in 0..dims.len() - 1 {
            let act = if k + 2 == dims.len() {
                match loss_pick {
                    1 => Activation::Sigmoid,
                    2 => Activation::Identity,
                    _ => acts[rng.random_range(0..acts.len())],
                }
            } else {
                acts[rng.random_range(0..acts.len())]
            };
            specs.push(LayerSpec::new(dims[k], dims[k + 1], act));
        }
        let net = Network::new(&specs, &mut rng)?;
        let batch = Tensor2::from_vec(
            rows,
            input_dim,
            (0..rows * input_dim)
                .map(|_| rng.random_range(-1.5..1.5))
                .collect(),
        )?;
        let loss: Box<dyn Loss> = match loss_pick {
            1 => BinaryCrossEntropy {
                targets: Tensor2::from_vec(
                    rows,
                    output_dim,
                    (0..rows * output_dim)
                        .map(|_| f64::from(rng.random_range(0..2u32)))
                        .collect(),
                )?,
            }
            .into_box(),
            2 => SoftmaxCrossEntropy {
                labels: (0..rows).map(|_| rng.random_range(0..output_dim)).collect(),
            }
            .into_box(),
            _ => MeanSquaredError {
                target: Tensor2::from_vec(
                    rows,
                    output_dim,
                    (0..rows * output_dim)
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect(),
                )?,
            }
            .into_box(),
        };
        let pass = net.forward(&batch)?;
        if pass.min_abs_pre_activation() > 10.0 * fd_step {
            let desc = format!(
                "dims {dims:?}, loss {}",
                ["mse", "bce", "softmax_ce"][loss_pick]
            );
            return Ok((net, batch, loss, desc));
        }
    }
    Err(Error::config(
        "could not draw a kink-safe architecture in 50 attempts",
    ))
}

trait IntoBoxedLoss {
    fn into_box(self) -> Box<dyn Loss>;
}

impl<T: Loss + 'static> IntoBoxedLoss for T {
    fn into_box(self) -> Box<dyn Loss> {
        Box::new(self)
    }
}

fn run_gradcheck(ctx: &mut RunContext<'_>) -> Result<SeedResults> {
    let cfg = ctx.cfg;
    let mut per_seed = Vec::new();
    let mut maxima = Vec::new();
    for &seed in &cfg.seeds {
        let mut archs = Vec::new();
        let mut seed_max = 0.0f64;
        for a in 0..cfg.gradcheck.architectures {
            let (net, batch, loss, desc) =
                draw_architecture(derive_seed(seed, a as u64), cfg.gradcheck.fd_step)?;
            let err = gradient_check(&net, loss.as_ref(), &batch, cfg.gradcheck.fd_step)?;
            seed_max = seed_max.max(err);
            if err >= cfg.gradcheck.tolerance {
                ctx.fail(format!(
                    "seed {seed} architecture {a} ({desc}): gradient error {err:.3e} >= {:.1e}",
                    cfg.gradcheck.tolerance
                ));
            }
            archs.push(ArchResult {
                architecture: desc,
                max_rel_error: err,
            });
        }
        maxima.push(seed_max);
        per_seed.push(serde_json::to_value(GradcheckSeedResult {
            seed,
            max_rel_error: seed_max,
            architectures: archs,
        })?);
    }
    Ok((per_seed, aggregate(&[("max_rel_error", maxima)])))
}

// ---------------------------------------------------------------------------

/// Renders dataset CSV files into one scatter SVG; the `plot` subcommand.
pub fn plot_files(inputs: &[PathBuf], out: &Path) -> Result<PathBuf> {
    let mut datasets = Vec::new();
    for path in inputs {
        datasets.extend(crate::domains::read_datasets_csv(path)?);
    }
    let refs: Vec<&LabeledDataset> = datasets.iter().collect();
    let styles: Vec<PlotStyle> = refs
        .iter()
        .map(|d| PlotStyle::for_tag(d.domain_tag))
        .collect();
    let path = out.join("scatter.svg");
    emit_scatter_svg(&refs, &styles, &path)?;
    Ok(path)
}
