//! The three-player minimax trainer: one generator against a source
//! discriminator and a target discriminator, trained per class.
//!
//! Each epoch performs one update of the source discriminator on real-source
//! versus generated batches, one update of the target discriminator on
//! real-target versus generated batches, and one generator update against
//! both discriminators with the summed loss. The per-epoch value objective is
//! logged in its original saturating form regardless of which generator loss
//! variant trains the model, so the log stays comparable with the density
//! oracles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domains::{DomainTag, LabeledDataset, NoiseSpec};
use crate::error::{Error, Result};
use crate::loss::{clamp_prob, BinaryCrossEntropy, Loss, PROB_EPS};
use crate::nn::{adam_step, Activation, AdamState, LayerSpec, Network};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tensor::Tensor2;

/// Adam momentum coefficient for all three adversarial networks.
pub const GAN_BETA1: f64 = 0.5;
pub const GAN_BETA2: f64 = 0.999;

/// Margin applied to the data range when sizing the generator's output map.
const OUTPUT_RANGE_MARGIN: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorLossVariant {
    /// Generator minimizes `log(1 - D(G(z)))`, the form the value objective
    /// is stated in.
    Saturating,
    /// Generator maximizes `log D(G(z))`; the standard trainability trick.
    NonSaturating,
}

impl GeneratorLossVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorLossVariant::Saturating => "saturating",
            GeneratorLossVariant::NonSaturating => "non_saturating",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "saturating" => Some(GeneratorLossVariant::Saturating),
            "non_saturating" => Some(GeneratorLossVariant::NonSaturating),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub noise: NoiseSpec,
    pub lr_generator: f64,
    pub lr_disc_source: f64,
    pub lr_disc_target: f64,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub loss_variant: GeneratorLossVariant,
    /// One-sided smoothing: real labels become `1 - label_smoothing`.
    pub label_smoothing: f64,
}

impl Default for GanTrainConfig {
    fn default() -> Self {
        GanTrainConfig {
            epochs: 3000,
            batch_size: 64,
            noise: NoiseSpec { dimension: 2 },
            lr_generator: 2e-4,
            lr_disc_source: 2e-4,
            lr_disc_target: 2e-4,
            generator_hidden: vec![32, 32],
            discriminator_hidden: vec![32, 32],
            loss_variant: GeneratorLossVariant::Saturating,
            label_smoothing: 0.0,
        }
    }
}

impl GanTrainConfig {
    /// Full config invariants, enforced when parsing experiment files.
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::config(format!(
                "epochs = {} violates epochs >= 1",
                self.epochs
            )));
        }
        self.validate_for_training()
    }

    /// Invariants needed to run; `epochs = 0` is tolerated here and yields an
    /// untrained model with empty history.
    pub fn validate_for_training(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::config(format!(
                "batch_size = {} violates batch_size >= 2",
                self.batch_size
            )));
        }
        if self.noise.dimension < 1 {
            return Err(Error::config("noise dimension must be >= 1"));
        }
        if !(0.0..=0.2).contains(&self.label_smoothing) {
            return Err(Error::config(format!(
                "label_smoothing = {} violates 0 <= label_smoothing <= 0.2",
                self.label_smoothing
            )));
        }
        // lr_generator 0 freezes the generator, a legitimate study setup
        if !(self.lr_generator >= 0.0) || !self.lr_generator.is_finite() {
            return Err(Error::config(format!(
                "lr_generator = {} violates lr_generator >= 0",
                self.lr_generator
            )));
        }
        for (name, lr) in [
            ("lr_disc_source", self.lr_disc_source),
            ("lr_disc_target", self.lr_disc_target),
        ] {
            if !(lr > 0.0) || !lr.is_finite() {
                return Err(Error::config(format!("{name} = {lr} violates {name} > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub loss_g: f64,
    pub loss_ds: f64,
    pub loss_dt: f64,
    pub v_estimate: f64,
}

/// Discriminator probabilities on the final epoch's minibatch, kept so the
/// logged value estimate can be re-derived exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueProbes {
    pub ds_real: Vec<f64>,
    pub dt_real: Vec<f64>,
    pub ds_fake: Vec<f64>,
    pub dt_fake: Vec<f64>,
}

/// One generator plus two discriminators bound to a single class label.
#[derive(Debug, Clone)]
pub struct MiddleGanModel {
    pub generator: Network,
    pub disc_source: Network,
    pub disc_target: Network,
    pub class_label: usize,
    pub noise: NoiseSpec,
    /// Affine map from the generator's tanh output to data coordinates:
    /// `x_j = center_j + half_j * tanh_j`.
    pub output_center: Vec<f64>,
    pub output_half: Vec<f64>,
    pub history: Vec<EpochRecord>,
    pub final_probes: Option<ValueProbes>,
}

impl MiddleGanModel {
    pub fn data_dim(&self) -> usize {
        self.output_center.len()
    }

    /// Maps generator noise through the network and the output affine map.
    pub fn generator_output(&self, noise: &Tensor2) -> Result<Tensor2> {
        let raw = self.generator.output(noise)?;
        Ok(self.scale_output(&raw))
    }

    fn scale_output(&self, tanh_out: &Tensor2) -> Tensor2 {
        let mut out = tanh_out.clone();
        let cols = out.cols();
        for r in 0..out.rows() {
            for c in 0..cols {
                let v = self.output_center[c] + self.output_half[c] * out.get(r, c);
                out.set(r, c, v);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Value objective
// ---------------------------------------------------------------------------

/// Monte-Carlo estimate of the two-discriminator value objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueEstimate {
    pub value: f64,
    /// Number of probabilities that had to be clamped away from 0 or 1.
    pub clamped: usize,
}

/// `mean log Ds(real_s) + mean log(1 - Ds(fake)) + mean log Dt(real_t) +
/// mean log(1 - Dt(fake))`, with clamping into `[1e-7, 1 - 1e-7]`.
pub fn value_objective_estimate(
    ds_real: &[f64],
    dt_real: &[f64],
    ds_fake: &[f64],
    dt_fake: &[f64],
) -> Result<ValueEstimate> {
    let mut clamped = 0usize;
    let mut mean_log = |vals: &[f64], one_minus: bool| -> Result<f64> {
        if vals.is_empty() {
            return Err(Error::EmptyInput(
                "value_objective_estimate needs nonempty probabilities".into(),
            ));
        }
        let mut acc = 0.0;
        for &p in vals {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::ShapeMismatch {
                    context: "value_objective_estimate".into(),
                    expected: "probabilities in [0, 1]".into(),
                    actual: format!("{p}"),
                });
            }
            let c = clamp_prob(p);
            if c != p {
                clamped += 1;
            }
            acc += if one_minus { (1.0 - c).ln() } else { c.ln() };
        }
        Ok(acc / vals.len() as f64)
    };
    let value = mean_log(ds_real, false)?
        + mean_log(ds_fake, true)?
        + mean_log(dt_real, false)?
        + mean_log(dt_fake, true)?;
    Ok(ValueEstimate { value, clamped })
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Generator loss that minimizes `mean log(1 - p)`.
struct SaturatingGeneratorLoss;

impl Loss for SaturatingGeneratorLoss {
    fn value(&self, output: &Tensor2) -> f64 {
        let n = output.data().len() as f64;
        output
            .data()
            .iter()
            .map(|&p| (1.0 - clamp_prob(p)).ln())
            .sum::<f64>()
            / n
    }

    fn output_gradient(&self, output: &Tensor2) -> Tensor2 {
        let n = output.data().len() as f64;
        output.map(|p| {
            if p <= PROB_EPS || p >= 1.0 - PROB_EPS {
                0.0
            } else {
                -1.0 / (1.0 - p) / n
            }
        })
    }
}

fn single_class_of(data: &LabeledDataset, which: &str) -> Result<usize> {
    let first = data.labels[0];
    if data.labels.iter().any(|&l| l != first) {
        return Err(Error::config(format!(
            "{which} dataset holds more than one class"
        )));
    }
    Ok(first)
}

fn draw_rows(points: &Tensor2, batch: usize, rng: &mut ChaCha8Rng) -> Tensor2 {
    let mut data = Vec::with_capacity(batch * points.cols());
    for _ in 0..batch {
        let r = rng.random_range(0..points.rows());
        data.extend_from_slice(points.row(r));
    }
    Tensor2::from_vec(batch, points.cols(), data).expect("consistent by construction")
}

fn column(t: &Tensor2) -> Vec<f64> {
    debug_assert_eq!(t.cols(), 1);
    t.data().to_vec()
}

fn disc_specs(data_dim: usize, hidden: &[usize]) -> Vec<LayerSpec> {
    let mut dims = vec![data_dim];
    dims.extend_from_slice(hidden);
    dims.push(1);
    specs_from_dims(&dims, Activation::Sigmoid)
}

fn gen_specs(noise_dim: usize, hidden: &[usize], data_dim: usize) -> Vec<LayerSpec> {
    let mut dims = vec![noise_dim];
    dims.extend_from_slice(hidden);
    dims.push(data_dim);
    specs_from_dims(&dims, Activation::Tanh)
}

fn specs_from_dims(dims: &[usize], final_act: Activation) -> Vec<LayerSpec> {
    (0..dims.len() - 1)
        .map(|k| {
            let act = if k + 2 == dims.len() {
                final_act
            } else {
                Activation::leaky()
            };
            LayerSpec::new(dims[k], dims[k + 1], act)
        })
        .collect()
}

/// One discriminator update on a real batch versus a fixed fake batch.
/// Returns the loss value.
fn discriminator_step(
    disc: &mut Network,
    state: &mut AdamState,
    real: &Tensor2,
    fake: &Tensor2,
    label_smoothing: f64,
) -> Result<f64> {
    let input = Tensor2::vstack(&[real, fake])?;
    let mut targets = Tensor2::zeros(input.rows(), 1);
    for r in 0..real.rows() {
        targets.set(r, 0, 1.0 - label_smoothing);
    }
    let loss = BinaryCrossEntropy { targets };
    let pass = disc.forward(&input)?;
    let value = loss.value(&pass.output);
    let grads = disc.backward(&pass, &loss.output_gradient(&pass.output))?;
    adam_step(disc, &grads, state)?;
    Ok(value)
}

/// Trains one generator and two discriminators on a single shared class.
pub fn train_middlegan(
    source_cls: &LabeledDataset,
    target_cls: &LabeledDataset,
    cfg: &GanTrainConfig,
    seed: u64,
) -> Result<MiddleGanModel> {
    cfg.validate_for_training()?;
    let class_s = single_class_of(source_cls, "source")?;
    let class_t = single_class_of(target_cls, "target")?;
    if class_s != class_t {
        return Err(Error::ClassMismatch {
            left: class_s,
            right: class_t,
        });
    }
    if source_cls.dim() != target_cls.dim() {
        return Err(Error::ShapeMismatch {
            context: "train_middlegan".into(),
            expected: format!("{}-dimensional target", source_cls.dim()),
            actual: format!("{}-dimensional", target_cls.dim()),
        });
    }
    let dim = source_cls.dim();

    // Output affine map sized from the union of both datasets.
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for data in [source_cls, target_cls] {
        for r in 0..data.len() {
            for (d, &x) in data.points.row(r).iter().enumerate() {
                lo[d] = lo[d].min(x);
                hi[d] = hi[d].max(x);
            }
        }
    }
    let output_center: Vec<f64> = lo.iter().zip(&hi).map(|(&a, &b)| (a + b) / 2.0).collect();
    let output_half: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(&a, &b)| (((b - a) / 2.0) * OUTPUT_RANGE_MARGIN).max(1e-6))
        .collect();

    let mut rng = rng_from_seed(seed);
    let generator = Network::new(
        &gen_specs(cfg.noise.dimension, &cfg.generator_hidden, dim),
        &mut rng,
    )?;
    let disc_source = Network::new(&disc_specs(dim, &cfg.discriminator_hidden), &mut rng)?;
    let disc_target = Network::new(&disc_specs(dim, &cfg.discriminator_hidden), &mut rng)?;
    let mut adam_g = AdamState::new(&generator, cfg.lr_generator, GAN_BETA1, GAN_BETA2);
    let mut adam_ds = AdamState::new(&disc_source, cfg.lr_disc_source, GAN_BETA1, GAN_BETA2);
    let mut adam_dt = AdamState::new(&disc_target, cfg.lr_disc_target, GAN_BETA1, GAN_BETA2);

    let mut model = MiddleGanModel {
        generator,
        disc_source,
        disc_target,
        class_label: class_s,
        noise: cfg.noise,
        output_center,
        output_half,
        history: Vec::with_capacity(cfg.epochs),
        final_probes: None,
    };

    for epoch in 0..cfg.epochs {
        let xs = draw_rows(&source_cls.points, cfg.batch_size, &mut rng);
        let xt = draw_rows(&target_cls.points, cfg.batch_size, &mut rng);
        let z = cfg.noise.sample(cfg.batch_size, &mut rng);

        let pass_g = model.generator.forward(&z)?;
        let fake = model.scale_output(&pass_g.output);

        let loss_ds = discriminator_step(
            &mut model.disc_source,
            &mut adam_ds,
            &xs,
            &fake,
            cfg.label_smoothing,
        )?;
        let loss_dt = discriminator_step(
            &mut model.disc_target,
            &mut adam_dt,
            &xt,
            &fake,
            cfg.label_smoothing,
        )?;

        // Generator step against both (freshly updated) discriminators.
        let pass_ds = model.disc_source.forward(&fake)?;
        let pass_dt = model.disc_target.forward(&fake)?;
        let (loss_g, up_s, up_t) = match cfg.loss_variant {
            GeneratorLossVariant::NonSaturating => {
                let all_real = BinaryCrossEntropy {
                    targets: Tensor2::from_vec(cfg.batch_size, 1, vec![1.0; cfg.batch_size])?,
                };
                (
                    all_real.value(&pass_ds.output) + all_real.value(&pass_dt.output),
                    all_real.output_gradient(&pass_ds.output),
                    all_real.output_gradient(&pass_dt.output),
                )
            }
            GeneratorLossVariant::Saturating => {
                let sat = SaturatingGeneratorLoss;
                (
                    sat.value(&pass_ds.output) + sat.value(&pass_dt.output),
                    sat.output_gradient(&pass_ds.output),
                    sat.output_gradient(&pass_dt.output),
                )
            }
        };
        let mut upstream_fake = model.disc_source.backward(&pass_ds, &up_s)?.input;
        upstream_fake.add_assign(&model.disc_target.backward(&pass_dt, &up_t)?.input)?;
        // through the output affine map: d fake / d tanh = half
        for r in 0..upstream_fake.rows() {
            for c in 0..dim {
                let v = upstream_fake.get(r, c) * model.output_half[c];
                upstream_fake.set(r, c, v);
            }
        }
        let g_grads = model.generator.backward(&pass_g, &upstream_fake)?;
        adam_step(&mut model.generator, &g_grads, &mut adam_g)?;

        // Log the value objective on this epoch's minibatch with the updated
        // parameters.
        let fake_now = model.generator_output(&z)?;
        let probes = ValueProbes {
            ds_real: column(&model.disc_source.output(&xs)?),
            dt_real: column(&model.disc_target.output(&xt)?),
            ds_fake: column(&model.disc_source.output(&fake_now)?),
            dt_fake: column(&model.disc_target.output(&fake_now)?),
        };
        let v_estimate = value_objective_estimate(
            &probes.ds_real,
            &probes.dt_real,
            &probes.ds_fake,
            &probes.dt_fake,
        )?
        .value;

        let record = EpochRecord {
            loss_g,
            loss_ds,
            loss_dt,
            v_estimate,
        };
        for (what, v) in [
            ("loss_g", loss_g),
            ("loss_ds", loss_ds),
            ("loss_dt", loss_dt),
            ("v_estimate", v_estimate),
        ] {
            if !v.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    what: what.into(),
                });
            }
        }
        model.history.push(record);
        if epoch + 1 == cfg.epochs {
            model.final_probes = Some(probes);
        }
    }
    Ok(model)
}

/// Draws `n` generated samples carrying the model's class label.
pub fn generate(model: &MiddleGanModel, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::EmptyInput("generate needs n >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let z = model.noise.sample(n, &mut rng);
    let points = model.generator_output(&z)?;
    LabeledDataset::new(
        points,
        vec![model.class_label; n],
        DomainTag::Generated,
        model.class_label + 1,
    )
    .map(|mut d| {
        d.class_count = d.class_count.max(model.class_label + 1);
        d
    })
}

/// Everything produced by per-class training: the concatenated fake dataset
/// and the per-class models (with their histories).
#[derive(Debug, Clone)]
pub struct GeneratedClasses {
    pub data: LabeledDataset,
    pub models: Vec<MiddleGanModel>,
}

/// Trains one model per class (class `c` uses seed `seed + c`) and
/// concatenates `n_fake_per_class` generated samples per class.
pub fn generate_all_classes(
    source: &LabeledDataset,
    target: &LabeledDataset,
    cfg: &GanTrainConfig,
    n_fake_per_class: usize,
    seed: u64,
) -> Result<GeneratedClasses> {
    if source.class_count != target.class_count {
        return Err(Error::config(format!(
            "class_count mismatch: source {} vs target {}",
            source.class_count, target.class_count
        )));
    }
    if n_fake_per_class == 0 {
        return Err(Error::EmptyInput("n_fake_per_class must be >= 1".into()));
    }
    let mut models = Vec::with_capacity(source.class_count);
    let mut parts: Vec<LabeledDataset> = Vec::with_capacity(source.class_count);
    for class in 0..source.class_count {
        if source.class_size(class) == 0 {
            return Err(Error::MissingClass {
                class,
                which: "source".into(),
            });
        }
        if target.class_size(class) == 0 {
            return Err(Error::MissingClass {
                class,
                which: "target".into(),
            });
        }
        let src = source.class_subset(class)?;
        let tgt = target.class_subset(class)?;
        let class_seed = seed.wrapping_add(class as u64);
        let model = train_middlegan(&src, &tgt, cfg, class_seed)?;
        let fake = generate(&model, n_fake_per_class, derive_seed(class_seed, 1))?;
        models.push(model);
        parts.push(fake);
    }
    let refs: Vec<&LabeledDataset> = parts.iter().collect();
    let (points, labels) = LabeledDataset::stack(&refs)?;
    let data = LabeledDataset::new(points, labels, DomainTag::Generated, source.class_count)?;
    Ok(GeneratedClasses { data, models })
}

/// Per-epoch training history as `class,epoch,loss_g,loss_ds,loss_dt,v_estimate`.
pub fn histories_to_csv(models: &[MiddleGanModel]) -> String {
    let mut out = String::from("class,epoch,loss_g,loss_ds,loss_dt,v_estimate\n");
    for m in models {
        for (epoch, rec) in m.history.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                m.class_label, epoch, rec.loss_g, rec.loss_ds, rec.loss_dt, rec.v_estimate
            ));
        }
    }
    out
}
