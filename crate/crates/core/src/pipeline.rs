//! The end-to-end adaptation flow: pseudo-label the target, generate
//! per-class middle samples, train the final classifier on real plus
//! generated data, evaluate on the target, and run the fake-rotation
//! symmetry diagnostic.
//!
//! The pseudo-labeler is a deliberate proxy: either a thresholded source
//! classifier or nearest-class-centroid assignment. Reports name which one
//! produced the labels.

use rand::seq::SliceRandom;

use crate::domains::{transform_dataset, DomainTag, LabeledDataset};
use crate::error::{Error, Result};
use crate::gan::{generate_all_classes, GanTrainConfig, MiddleGanModel};
use crate::loss::{softmax_row, Loss, SoftmaxCrossEntropy};
use crate::nn::{adam_step, Activation, AdamState, LayerSpec, Network};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoLabelMethod {
    /// Train a classifier on the source; keep target points whose top
    /// softmax probability clears the threshold.
    SourceClassifier,
    /// Assign each target point to the closest source class centroid; keep
    /// everything.
    NearestClassCentroid,
}

impl PseudoLabelMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PseudoLabelMethod::SourceClassifier => "source_classifier",
            PseudoLabelMethod::NearestClassCentroid => "nearest_class_centroid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "source_classifier" => Some(PseudoLabelMethod::SourceClassifier),
            "nearest_class_centroid" => Some(PseudoLabelMethod::NearestClassCentroid),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelConfig {
    pub method: PseudoLabelMethod,
    pub confidence_threshold: f64,
}

impl Default for PseudoLabelConfig {
    fn default() -> Self {
        PseudoLabelConfig {
            method: PseudoLabelMethod::SourceClassifier,
            confidence_threshold: 0.8,
        }
    }
}

impl PseudoLabelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(Error::config(format!(
                "confidence_threshold = {} violates 0 <= confidence_threshold <= 1",
                self.confidence_threshold
            )));
        }
        Ok(())
    }

    /// Human-readable identification of the proxy labeler, for report headers.
    pub fn describe(&self) -> String {
        match self.method {
            PseudoLabelMethod::SourceClassifier => format!(
                "source_classifier proxy (confidence threshold {})",
                self.confidence_threshold
            ),
            PseudoLabelMethod::NearestClassCentroid => {
                "nearest_class_centroid proxy (keeps all points)".to_string()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            hidden: vec![64, 64],
            // The small dense net starts from random weights, so it needs far
            // more passes than a pretrained image model would.
            epochs: 300,
            batch_size: 32,
            learning_rate: 2e-4,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::config(format!(
                "epochs = {} violates epochs >= 1",
                self.epochs
            )));
        }
        if self.batch_size < 1 {
            return Err(Error::config(format!(
                "batch_size = {} violates batch_size >= 1",
                self.batch_size
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::config(format!(
                "learning_rate = {} violates learning_rate > 0",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Trains a softmax classifier on raw points and labels.
pub fn train_classifier_on(
    points: &Tensor2,
    labels: &[usize],
    class_count: usize,
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<Network> {
    cfg.validate()?;
    if points.rows() != labels.len() {
        return Err(Error::ShapeMismatch {
            context: "train_classifier".into(),
            expected: format!("{} labels", points.rows()),
            actual: format!("{}", labels.len()),
        });
    }
    let distinct = {
        let mut seen = vec![false; class_count];
        for &l in labels {
            seen[l] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::config(
            "classifier training needs at least 2 classes present",
        ));
    }

    let mut rng = rng_from_seed(seed);
    let mut dims = vec![points.cols()];
    dims.extend_from_slice(&cfg.hidden);
    dims.push(class_count);
    let specs: Vec<LayerSpec> = (0..dims.len() - 1)
        .map(|k| {
            let act = if k + 2 == dims.len() {
                Activation::Identity
            } else {
                Activation::leaky()
            };
            LayerSpec::new(dims[k], dims[k + 1], act)
        })
        .collect();
    let mut net = Network::new(&specs, &mut rng)?;
    let mut adam = AdamState::new(&net, cfg.learning_rate, 0.9, 0.999);

    let n = points.rows();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = Vec::with_capacity(chunk.len() * points.cols());
            let mut batch_labels = Vec::with_capacity(chunk.len());
            for &r in chunk {
                batch.extend_from_slice(points.row(r));
                batch_labels.push(labels[r]);
            }
            let batch = Tensor2::from_vec(chunk.len(), points.cols(), batch)?;
            let loss = SoftmaxCrossEntropy {
                labels: batch_labels,
            };
            let pass = net.forward(&batch)?;
            let grads = net.backward(&pass, &loss.output_gradient(&pass.output))?;
            adam_step(&mut net, &grads, &mut adam)?;
        }
    }
    Ok(net)
}

/// Trains a softmax classifier on a labeled dataset.
pub fn train_classifier(data: &LabeledDataset, cfg: &ClassifierConfig, seed: u64) -> Result<Network> {
    train_classifier_on(&data.points, &data.labels, data.class_count, cfg, seed)
}

/// Argmax class per row (ties resolve to the lowest index).
pub fn predict_labels(classifier: &Network, points: &Tensor2) -> Result<Vec<usize>> {
    let logits = classifier.output(points)?;
    Ok((0..logits.rows())
        .map(|r| {
            let row = logits.row(r);
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect())
}

/// Fraction of argmax predictions matching the labels.
pub fn evaluate(classifier: &Network, test: &LabeledDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyInput("evaluate needs a nonempty test set".into()));
    }
    let predictions = predict_labels(classifier, &test.points)?;
    let correct = predictions
        .iter()
        .zip(&test.labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// Labels target points with the configured proxy labeler. Returns the kept
/// subset (tagged as target) and the kept fraction.
pub fn pseudo_label(
    source: &LabeledDataset,
    target_points: &Tensor2,
    cfg: &PseudoLabelConfig,
    clf_cfg: &ClassifierConfig,
    seed: u64,
) -> Result<(LabeledDataset, f64)> {
    cfg.validate()?;
    if target_points.rows() == 0 {
        return Err(Error::EmptyInput("pseudo_label needs target points".into()));
    }
    let n = target_points.rows();
    let (kept_rows, kept_labels): (Vec<usize>, Vec<usize>) = match cfg.method {
        PseudoLabelMethod::SourceClassifier => {
            let clf = train_classifier(source, clf_cfg, seed)?;
            let logits = clf.output(target_points)?;
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for r in 0..n {
                let probs = softmax_row(logits.row(r));
                let (best, conf) = probs
                    .iter()
                    .enumerate()
                    .fold((0, 0.0), |acc, (c, &p)| if p > acc.1 { (c, p) } else { acc });
                if conf >= cfg.confidence_threshold {
                    rows.push(r);
                    labels.push(best);
                }
            }
            (rows, labels)
        }
        PseudoLabelMethod::NearestClassCentroid => {
            let centroids: Vec<Vec<f64>> = (0..source.class_count)
                .map(|c| source.class_centroid(c))
                .collect::<Result<_>>()?;
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for r in 0..n {
                let p = target_points.row(r);
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (c, ctr) in centroids.iter().enumerate() {
                    let d: f64 = p
                        .iter()
                        .zip(ctr)
                        .map(|(&a, &b)| (a - b) * (a - b))
                        .sum();
                    if d < best_d {
                        best_d = d;
                        best = c;
                    }
                }
                rows.push(r);
                labels.push(best);
            }
            (rows, labels)
        }
    };
    let coverage = kept_rows.len() as f64 / n as f64;
    if kept_rows.is_empty() {
        return Err(Error::config(format!(
            "no target point cleared the confidence threshold {} (coverage 0 of {n})",
            cfg.confidence_threshold
        )));
    }
    let rows: Vec<Vec<f64>> = kept_rows
        .iter()
        .map(|&r| target_points.row(r).to_vec())
        .collect();
    let data = LabeledDataset::new(
        Tensor2::from_rows(&rows)?,
        kept_labels,
        DomainTag::Target,
        source.class_count,
    )?;
    Ok((data, coverage))
}

/// Everything a single adaptation run produces.
#[derive(Debug)]
pub struct AdaptationOutcome {
    pub source_only_acc: f64,
    pub middlegan_acc: f64,
    pub coverage: f64,
    /// Generated middle samples; `None` when `n_fake_per_class = 0`, which
    /// reduces the run to a pseudo-label-only baseline.
    pub fake_data: Option<LabeledDataset>,
    pub per_class_models: Vec<MiddleGanModel>,
    pub pseudo_label_only: bool,
}

/// Trains a source-only baseline and the augmented classifier, evaluating
/// both on the target's held-back labels. All randomness derives from `seed`.
pub fn run_adaptation(
    source: &LabeledDataset,
    target: &LabeledDataset,
    gan_cfg: &GanTrainConfig,
    pl_cfg: &PseudoLabelConfig,
    clf_cfg: &ClassifierConfig,
    n_fake_per_class: usize,
    seed: u64,
) -> Result<AdaptationOutcome> {
    if source.class_count != target.class_count {
        return Err(Error::config(format!(
            "class_count mismatch: source {} vs target {}",
            source.class_count, target.class_count
        )));
    }

    let source_only = train_classifier(source, clf_cfg, derive_seed(seed, 0))?;
    let source_only_acc = evaluate(&source_only, target)?;

    let (pseudo, coverage) =
        pseudo_label(source, &target.points, pl_cfg, clf_cfg, derive_seed(seed, 1))?;

    let (fake_data, per_class_models) = if n_fake_per_class > 0 {
        for class in 0..source.class_count {
            let have = pseudo.class_size(class);
            if have < gan_cfg.batch_size {
                return Err(Error::TooFewClassSamples {
                    class,
                    have,
                    need: gan_cfg.batch_size,
                });
            }
        }
        let generated =
            generate_all_classes(source, &pseudo, gan_cfg, n_fake_per_class, derive_seed(seed, 2))?;
        (Some(generated.data), generated.models)
    } else {
        (None, Vec::new())
    };

    let mut parts: Vec<&LabeledDataset> = vec![source, &pseudo];
    if let Some(fake) = &fake_data {
        parts.push(fake);
    }
    let (points, labels) = LabeledDataset::stack(&parts)?;
    let final_clf = train_classifier_on(
        &points,
        &labels,
        source.class_count,
        clf_cfg,
        derive_seed(seed, 3),
    )?;
    let middlegan_acc = evaluate(&final_clf, target)?;

    Ok(AdaptationOutcome {
        source_only_acc,
        middlegan_acc,
        coverage,
        fake_data,
        per_class_models,
        pseudo_label_only: n_fake_per_class == 0,
    })
}

/// Accuracies of classifiers trained with plain versus transformed fakes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgnosticismReport {
    pub source_acc_plain: f64,
    pub target_acc_plain: f64,
    pub source_acc_transformed: f64,
    pub target_acc_transformed: f64,
    /// Largest per-domain accuracy change caused by transforming the fakes.
    pub max_delta: f64,
}

/// Trains one classifier on `source + target + fake` and one on
/// `source + target + rotate(fake)`, evaluating both on both test sets.
/// Both classifiers share the seed, so a zero-degree transform reproduces
/// identical training trajectories.
#[allow(clippy::too_many_arguments)]
pub fn agnosticism_test(
    fake: &LabeledDataset,
    source_train: &LabeledDataset,
    source_test: &LabeledDataset,
    target_train: &LabeledDataset,
    target_test: &LabeledDataset,
    rotation_degrees: f64,
    clf_cfg: &ClassifierConfig,
    seed: u64,
) -> Result<AgnosticismReport> {
    let class_count = source_train.class_count;
    let rotated = transform_dataset(fake, rotation_degrees, &[])?;

    let mut accs = [0.0f64; 4];
    for (i, fakes) in [fake, &rotated].into_iter().enumerate() {
        let (points, labels) =
            LabeledDataset::stack(&[source_train, target_train, fakes])?;
        let clf = train_classifier_on(&points, &labels, class_count, clf_cfg, seed)?;
        accs[2 * i] = evaluate(&clf, source_test)?;
        accs[2 * i + 1] = evaluate(&clf, target_test)?;
    }
    let max_delta = (accs[0] - accs[2]).abs().max((accs[1] - accs[3]).abs());
    Ok(AgnosticismReport {
        source_acc_plain: accs[0],
        target_acc_plain: accs[1],
        source_acc_transformed: accs[2],
        target_acc_transformed: accs[3],
        max_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{sample_domain, DomainSpec};
    use crate::seed::rng_from_seed;

    fn blobs(sep: f64, sigma: f64) -> DomainSpec {
        DomainSpec::isotropic_gaussian(
            vec![vec![-sep, 0.0], vec![sep, 0.0]],
            &[sigma, sigma],
        )
    }

    fn quick_clf() -> ClassifierConfig {
        ClassifierConfig {
            hidden: vec![32, 32],
            epochs: 150,
            batch_size: 32,
            learning_rate: 1e-3,
        }
    }

    #[test]
    fn separable_data_trains_to_near_perfect_accuracy() {
        let data = sample_domain(&blobs(2.0, 0.4), 100, 1).unwrap();
        let clf = train_classifier(&data, &ClassifierConfig::default(), 7).unwrap();
        let acc = evaluate(&clf, &data).unwrap();
        assert!(acc >= 0.99, "training accuracy {acc}");
    }

    #[test]
    fn shuffled_labels_score_at_chance_on_held_out_data() {
        // A single shuffle leaves a sampling majority per region that the
        // classifier amplifies in a random direction, so chance level holds
        // in the average over shuffles rather than per shuffle.
        let held_out = sample_domain(&blobs(2.0, 0.4), 200, 9).unwrap();
        let mut accs = Vec::new();
        for shuffle_seed in 0..5u64 {
            let mut train = sample_domain(&blobs(2.0, 0.4), 150, 2).unwrap();
            let mut rng = rng_from_seed(shuffle_seed);
            train.labels.shuffle(&mut rng);
            let clf = train_classifier(&train, &quick_clf(), 5).unwrap();
            accs.push(evaluate(&clf, &held_out).unwrap());
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((mean - 0.5).abs() <= 0.1, "held-out accuracies {accs:?}");
    }

    #[test]
    fn single_class_and_zero_epochs_rejected() {
        let data = sample_domain(&blobs(2.0, 0.4), 50, 1).unwrap();
        let only0 = data.class_subset(0).unwrap();
        assert!(train_classifier(&only0, &quick_clf(), 1).is_err());

        let bad = ClassifierConfig {
            epochs: 0,
            ..ClassifierConfig::default()
        };
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("epochs") && err.contains(">= 1"), "{err}");
    }

    #[test]
    fn evaluate_constant_classifier_and_single_point() {
        // zero net: all logits equal, argmax falls on class 0
        let net = Network::zeros(&[LayerSpec::new(2, 2, Activation::Identity)]).unwrap();
        let data = sample_domain(&blobs(2.0, 0.4), 100, 4).unwrap();
        let acc = evaluate(&net, &data).unwrap();
        assert!((acc - 0.5).abs() < 1e-12);

        let single = LabeledDataset::new(
            Tensor2::from_vec(1, 2, vec![0.0, 0.0]).unwrap(),
            vec![0],
            DomainTag::Target,
            2,
        )
        .unwrap();
        assert_eq!(evaluate(&net, &single).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_is_permutation_invariant() {
        let data = sample_domain(&blobs(2.0, 0.5), 60, 8).unwrap();
        let clf = train_classifier(&data, &quick_clf(), 2).unwrap();
        let acc = evaluate(&clf, &data).unwrap();

        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng_from_seed(99));
        let rows: Vec<Vec<f64>> = order.iter().map(|&r| data.points.row(r).to_vec()).collect();
        let labels: Vec<usize> = order.iter().map(|&r| data.labels[r]).collect();
        let permuted = LabeledDataset::new(
            Tensor2::from_rows(&rows).unwrap(),
            labels,
            data.domain_tag,
            data.class_count,
        )
        .unwrap();
        assert_eq!(evaluate(&clf, &permuted).unwrap(), acc);
    }

    #[test]
    fn source_only_classifier_fails_under_label_flipping_rotation() {
        // symmetric blobs: a 180-degree rotation maps each class onto the
        // other, so the source classifier is almost exactly wrong
        let source = sample_domain(&blobs(2.0, 0.4), 150, 11).unwrap();
        let target_spec = blobs(2.0, 0.4).with_transform(180.0, vec![]);
        let target = sample_domain(&target_spec, 150, 12).unwrap();
        let clf = train_classifier(&source, &quick_clf(), 13).unwrap();
        let acc = evaluate(&clf, &target).unwrap();
        assert!(acc <= 0.1, "accuracy under label flip {acc}");
    }

    #[test]
    fn nearest_centroid_recovers_source_labels() {
        let source = sample_domain(&blobs(2.5, 0.3), 80, 21).unwrap();
        let cfg = PseudoLabelConfig {
            method: PseudoLabelMethod::NearestClassCentroid,
            confidence_threshold: 0.8,
        };
        let (labeled, coverage) =
            pseudo_label(&source, &source.points, &cfg, &quick_clf(), 1).unwrap();
        assert_eq!(coverage, 1.0);
        assert_eq!(labeled.labels, source.labels);
    }

    #[test]
    fn threshold_zero_keeps_everything() {
        let source = sample_domain(&blobs(2.0, 0.5), 60, 31).unwrap();
        let target = sample_domain(&blobs(2.0, 0.5), 60, 32).unwrap();
        let cfg = PseudoLabelConfig {
            method: PseudoLabelMethod::SourceClassifier,
            confidence_threshold: 0.0,
        };
        let (_, coverage) =
            pseudo_label(&source, &target.points, &cfg, &quick_clf(), 2).unwrap();
        assert_eq!(coverage, 1.0);
    }

    #[test]
    fn pseudo_labels_accurate_under_mild_rotation() {
        let source = sample_domain(&blobs(2.0, 0.4), 150, 41).unwrap();
        let target_spec = blobs(2.0, 0.4).with_transform(30.0, vec![]);
        let target = sample_domain(&target_spec, 150, 42).unwrap();
        let cfg = PseudoLabelConfig::default();
        let (labeled, coverage) =
            pseudo_label(&source, &target.points, &cfg, &quick_clf(), 3).unwrap();
        assert!(coverage > 0.5, "coverage {coverage}");
        // audit against the hidden true labels: kept points are re-matched by
        // position
        let mut correct = 0;
        let mut total = 0;
        for r in 0..labeled.len() {
            let p = labeled.points.row(r);
            let idx = (0..target.len())
                .find(|&i| target.points.row(i) == p)
                .expect("kept point comes from the target");
            total += 1;
            if target.labels[idx] == labeled.labels[r] {
                correct += 1;
            }
        }
        let acc = correct as f64 / total as f64;
        assert!(acc >= 0.9, "pseudo-label accuracy {acc}");
    }

    #[test]
    fn coverage_non_increasing_in_threshold() {
        let source = sample_domain(&blobs(2.0, 0.6), 100, 51).unwrap();
        let target_spec = blobs(2.0, 0.6).with_transform(30.0, vec![]);
        let target = sample_domain(&target_spec, 100, 52).unwrap();
        let mut last = f64::INFINITY;
        for threshold in [0.0, 0.5, 0.8, 0.9, 0.99, 0.9999] {
            let cfg = PseudoLabelConfig {
                method: PseudoLabelMethod::SourceClassifier,
                confidence_threshold: threshold,
            };
            match pseudo_label(&source, &target.points, &cfg, &quick_clf(), 4) {
                Ok((_, coverage)) => {
                    assert!(coverage <= last + 1e-12);
                    last = coverage;
                }
                Err(_) => {
                    // zero coverage rejection; only allowed at the strictest end
                    assert!(threshold > 0.99);
                }
            }
        }
    }

    #[test]
    fn agnosticism_zero_rotation_is_bit_exact() {
        let source = sample_domain(&blobs(2.0, 0.5), 60, 61).unwrap();
        let target = sample_domain(&blobs(2.0, 0.5), 60, 62).unwrap();
        let mut fake = sample_domain(&blobs(1.0, 0.3), 40, 63).unwrap();
        fake.domain_tag = DomainTag::Generated;
        let report = agnosticism_test(
            &fake,
            &source,
            &sample_domain(&blobs(2.0, 0.5), 60, 64).unwrap(),
            &target,
            &sample_domain(&blobs(2.0, 0.5), 60, 65).unwrap(),
            0.0,
            &quick_clf(),
            9,
        )
        .unwrap();
        assert_eq!(report.max_delta, 0.0);
        assert_eq!(report.source_acc_plain, report.source_acc_transformed);
        assert_eq!(report.target_acc_plain, report.target_acc_transformed);
    }

    #[test]
    fn adaptation_no_shift_control_and_determinism() {
        let spec = blobs(2.0, 0.5);
        let source = sample_domain(&spec, 80, 71).unwrap();
        let mut target = sample_domain(&spec, 80, 72).unwrap();
        target.domain_tag = DomainTag::Target;
        let gan_cfg = GanTrainConfig {
            epochs: 300,
            batch_size: 32,
            ..GanTrainConfig::default()
        };
        let clf_cfg = quick_clf();
        let out = run_adaptation(
            &source,
            &target,
            &gan_cfg,
            &PseudoLabelConfig::default(),
            &clf_cfg,
            40,
            5,
        )
        .unwrap();
        assert!(
            (out.middlegan_acc - out.source_only_acc).abs() <= 0.05,
            "no-shift control: {} vs {}",
            out.middlegan_acc,
            out.source_only_acc
        );
        assert!(!out.pseudo_label_only);
        assert_eq!(out.fake_data.as_ref().unwrap().len(), 80);

        let again = run_adaptation(
            &source,
            &target,
            &gan_cfg,
            &PseudoLabelConfig::default(),
            &clf_cfg,
            40,
            5,
        )
        .unwrap();
        assert_eq!(out.source_only_acc.to_bits(), again.source_only_acc.to_bits());
        assert_eq!(out.middlegan_acc.to_bits(), again.middlegan_acc.to_bits());
        assert_eq!(out.coverage.to_bits(), again.coverage.to_bits());
    }

    #[test]
    fn zero_fakes_reduce_to_pseudo_label_baseline() {
        let spec = blobs(2.0, 0.5);
        let source = sample_domain(&spec, 60, 81).unwrap();
        let target = sample_domain(&spec, 60, 82).unwrap();
        let out = run_adaptation(
            &source,
            &target,
            &GanTrainConfig::default(),
            &PseudoLabelConfig::default(),
            &quick_clf(),
            0,
            6,
        )
        .unwrap();
        assert!(out.pseudo_label_only);
        assert!(out.fake_data.is_none());
        assert!(out.per_class_models.is_empty());
    }

    #[test]
    fn too_few_pseudo_labels_per_class_rejected() {
        let spec = blobs(2.0, 0.5);
        let source = sample_domain(&spec, 30, 91).unwrap();
        let target = sample_domain(&spec, 30, 92).unwrap();
        let gan_cfg = GanTrainConfig {
            batch_size: 64, // more than any class can cover
            ..GanTrainConfig::default()
        };
        let err = run_adaptation(
            &source,
            &target,
            &gan_cfg,
            &PseudoLabelConfig::default(),
            &quick_clf(),
            10,
            7,
        )
        .unwrap_err();
        assert!(matches!(err, Error::TooFewClassSamples { .. }), "{err}");
    }

}
