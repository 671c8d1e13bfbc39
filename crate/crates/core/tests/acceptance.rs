//! Acceptance suite: the gates this laboratory has to clear before its
//! numbers mean anything. One test per criterion; each prints a PASS/FAIL
//! line with the measured value and its pinned threshold.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use middlegan_lab::config::parse_config;
use middlegan_lab::domains::{sample_domain, DomainSpec, DomainTag};
use middlegan_lab::gan::{generate, train_middlegan, GanTrainConfig};
use middlegan_lab::oracles::{
    estimate_density, jsd, jsd_centroid, kl, optimal_discriminator, random_density,
    total_variation, value_at_optimal_discriminators, verify_centroid_optimality, virtual_criterion,
    CentroidSolverConfig, DensityGrid, GridSpec,
};
use middlegan_lab::pipeline::{run_adaptation, ClassifierConfig, PseudoLabelConfig};
use middlegan_lab::runner::run_experiment;
use middlegan_lab::seed::rng_from_seed;

struct Gate {
    name: &'static str,
    budget_secs: f64,
    started: Instant,
}

impl Gate {
    fn open(name: &'static str, budget_secs: f64) -> Self {
        Gate {
            name,
            budget_secs,
            started: Instant::now(),
        }
    }

    /// Prints the one-line verdict, then asserts it.
    fn close(self, pass: bool, detail: String) {
        let elapsed = self.started.elapsed().as_secs_f64();
        let in_budget = elapsed < self.budget_secs;
        let verdict = if pass && in_budget { "PASS" } else { "FAIL" };
        println!(
            "acceptance {}: {verdict} ({detail}; {elapsed:.1}s of {:.0}s budget)",
            self.name, self.budget_secs
        );
        assert!(pass, "{}: {detail}", self.name);
        assert!(
            in_budget,
            "{}: took {elapsed:.1}s, budget {:.0}s",
            self.name, self.budget_secs
        );
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn gaussian_grid(spec: &GridSpec, mean: f64, sd: f64) -> DensityGrid {
    let w: Vec<f64> = (0..spec.cell_count())
        .map(|i| {
            let x = spec.cell_center(i)[0];
            (-0.5 * ((x - mean) / sd).powi(2)).exp()
        })
        .collect();
    DensityGrid::from_weights(spec.clone(), w).unwrap()
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_1_gradient_correctness() {
    let gate = Gate::open("1 gradient correctness", 10.0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        &format!(
            "[experiment]\nkind = \"gradcheck\"\nseeds = 1\noutput_dir = \"{}\"\n\
             [gradcheck]\narchitectures = 20\nfd_step = 1e-5\ntolerance = 1e-4\n",
            dir.path().display()
        ),
        true,
    )
    .unwrap();
    let out = run_experiment(&cfg).unwrap();
    let max_err = out.report.aggregate["max_rel_error"].max;
    let pass = out.verification_failure.is_none() && max_err < 1e-4;
    gate.close(pass, format!("max rel error {max_err:.3e} < 1e-4 over 20 nets"));
}

#[test]
fn criterion_2_value_identity_exact() {
    let gate = Gate::open("2 value identity", 5.0);
    let mut rng = rng_from_seed(2026);
    let grids = [
        GridSpec::default_1d(),
        GridSpec::new(vec![(-4.0, 4.0), (-4.0, 4.0)], vec![13, 13]).unwrap(),
    ];
    let mut max_residual = 0.0f64;
    for k in 0..100 {
        let spec = &grids[k % grids.len()];
        let ps = random_density(spec, &mut rng).unwrap();
        let pt = random_density(spec, &mut rng).unwrap();
        let pm = random_density(spec, &mut rng).unwrap();
        let integral = value_at_optimal_discriminators(&ps, &pt, &pm).unwrap();
        let closed_form = virtual_criterion(&ps, &pt, &pm).unwrap();
        max_residual = max_residual.max((integral - closed_form).abs());
    }
    gate.close(
        max_residual < 1e-9,
        format!("max residual {max_residual:.3e} < 1e-9 over 100 triples"),
    );
}

#[test]
fn criterion_3_trained_discriminator_matches_density_ratio() {
    let gate = Gate::open("3 discriminator vs density ratio", 60.0);
    let grid = GridSpec::default_1d();
    let spec = DomainSpec::isotropic_gaussian(vec![vec![-2.0]], &[0.5]);
    let seed = 11u64;
    let src = sample_domain(&spec, 4000, 301).unwrap();
    let tgt = sample_domain(&spec, 4000, 401).unwrap();

    // the fixed untrained generator whose output density defines the oracle
    let frozen_cfg = GanTrainConfig {
        epochs: 0,
        batch_size: 256,
        ..GanTrainConfig::default()
    };
    let frozen = train_middlegan(&src, &tgt, &frozen_cfg, seed).unwrap();
    let fake = generate(&frozen, 60_000, 999).unwrap();
    let pm = estimate_density(&fake.points, &grid).unwrap();
    let big = sample_domain(&spec, 60_000, 501).unwrap();
    let ps = estimate_density(&big.points, &grid).unwrap();
    let oracle = optimal_discriminator(&ps, &pm).unwrap();

    // 2000 discriminator steps against the same (frozen) generator
    let cfg = GanTrainConfig {
        epochs: 2000,
        batch_size: 256,
        lr_generator: 0.0,
        lr_disc_source: 2e-3,
        lr_disc_target: 2e-3,
        ..GanTrainConfig::default()
    };
    let trained = train_middlegan(&src, &tgt, &cfg, seed).unwrap();
    let d_values = trained.disc_source.output(&grid.centers()).unwrap();

    // cells covering >= 99% of the balanced real/fake mixture
    let mix: Vec<f64> = ps
        .mass()
        .iter()
        .zip(pm.mass())
        .map(|(&a, &b)| (a + b) / 2.0)
        .collect();
    let mut order: Vec<usize> = (0..grid.cell_count()).collect();
    order.sort_by(|&a, &b| mix[b].total_cmp(&mix[a]));
    let mut cum = 0.0;
    let mut cells = Vec::new();
    for &i in &order {
        if cum >= 0.99 {
            break;
        }
        cum += mix[i];
        cells.push(i);
    }
    let mae = cells
        .iter()
        .map(|&i| (d_values.get(i, 0) - oracle.values[i]).abs())
        .sum::<f64>()
        / cells.len() as f64;
    gate.close(
        mae < 0.1,
        format!("trained D vs density-ratio oracle MAE {mae:.4} < 0.1 on {} cells", cells.len()),
    );
}

#[test]
fn criterion_4_centroid_optimality() {
    let gate = Gate::open("4 centroid optimality", 30.0);
    let spec = GridSpec::default_1d();
    assert_eq!(spec.bins(), &[241]);
    let ps = gaussian_grid(&spec, -2.0, 1.0);
    let pt = gaussian_grid(&spec, 2.0, 1.0);
    let cfg = CentroidSolverConfig::default();
    let verification = verify_centroid_optimality(&ps, &pt, &cfg, 404).unwrap();

    let coincident = jsd_centroid(&ps, &ps, &cfg).unwrap();

    let pass = verification.max_violation <= 1e-9
        && verification.trace_monotone
        && coincident.objective.abs() <= 1e-9;
    gate.close(
        pass,
        format!(
            "max probe violation {:.3e} <= 1e-9 over {} probes, trace monotone {}, \
             coincident objective {:.3e}",
            verification.max_violation,
            verification.probes_checked,
            verification.trace_monotone,
            coincident.objective
        ),
    );
}

#[test]
fn criterion_5_generator_in_the_middle() {
    let gate = Gate::open("5 generator in the middle", 300.0);
    let grid = GridSpec::default_1d();
    let spec_s = DomainSpec::isotropic_gaussian(vec![vec![-2.0]], &[0.5]);
    let spec_t = DomainSpec::isotropic_gaussian(vec![vec![2.0]], &[0.5]);
    let cfg = GanTrainConfig {
        epochs: 6000,
        batch_size: 128,
        ..GanTrainConfig::default()
    };
    let mut tvs = Vec::new();
    for seed in 1..=5u64 {
        let src = sample_domain(&spec_s, 400, 100 + seed).unwrap();
        let tgt = sample_domain(&spec_t, 400, 200 + seed).unwrap();
        let ps = estimate_density(&src.points, &grid).unwrap();
        let pt = estimate_density(&tgt.points, &grid).unwrap();
        let oracle = jsd_centroid(&ps, &pt, &CentroidSolverConfig::default()).unwrap();

        let model = train_middlegan(&src, &tgt, &cfg, seed).unwrap();
        let fake = generate(&model, 5000, 1000 + seed).unwrap();
        let pm = estimate_density(&fake.points, &grid).unwrap();
        tvs.push(total_variation(&pm, &oracle.centroid).unwrap());
    }
    let med = median(&mut tvs);
    gate.close(
        med <= 0.25,
        format!("5-seed median TV to oracle centroid {med:.3} <= 0.25 (all {tvs:?})"),
    );
}

#[test]
fn criterion_6_agnosticism_analog() {
    let gate = Gate::open("6 agnosticism analog", 300.0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        &format!(
            "[experiment]\nkind = \"agnosticism\"\nseeds = 1, 2, 3, 4, 5\noutput_dir = \"{}\"\n\
             [source]\nfamily = \"gaussian_mixture\"\nclass_count = 2\ndim = 2\n\
             means = -2.0, 2.0, 2.0, 2.0\nsigmas = 0.5, 0.5\nn_per_class = 150\nn_test_per_class = 200\n\
             [target]\nfrom_source_rotation = 180.0\n\
             [gan]\nepochs = 2000\nbatch_size = 48\n",
            dir.path().display()
        ),
        true,
    )
    .unwrap();
    let out = run_experiment(&cfg).unwrap();
    let med = out.report.aggregate["max_delta"].median;
    let pass = out.verification_failure.is_none() && med <= 0.05;
    gate.close(
        pass,
        format!(
            "5-seed median max accuracy delta {med:.3} <= 0.05 (plain {:.3}/{:.3}, rotated {:.3}/{:.3})",
            out.report.aggregate["source_acc_plain"].median,
            out.report.aggregate["target_acc_plain"].median,
            out.report.aggregate["source_acc_transformed"].median,
            out.report.aggregate["target_acc_transformed"].median
        ),
    );
}

#[test]
fn criterion_7_adaptation_benefit() {
    let gate = Gate::open("7 adaptation benefit", 600.0);
    let source_spec = DomainSpec::two_moons(2.0, 0.15);
    let shifted_spec = DomainSpec::two_moons(2.0, 0.15).with_transform(30.0, vec![]);
    let gan_cfg = GanTrainConfig {
        epochs: 2000,
        batch_size: 48,
        ..GanTrainConfig::default()
    };
    let clf_cfg = ClassifierConfig::default();
    let pl_cfg = PseudoLabelConfig::default();

    let mut wins = 0u32;
    let mut shifted_pairs = Vec::new();
    for seed in 1..=5u64 {
        let source = sample_domain(&source_spec, 150, 1000 + seed).unwrap();
        let mut target = sample_domain(&shifted_spec, 150, 2000 + seed).unwrap();
        target.domain_tag = DomainTag::Target;
        let out =
            run_adaptation(&source, &target, &gan_cfg, &pl_cfg, &clf_cfg, 150, seed).unwrap();
        wins += (out.middlegan_acc >= out.source_only_acc) as u32;
        shifted_pairs.push((out.source_only_acc, out.middlegan_acc));
    }

    // no-shift control: target drawn from the source distribution
    let mut control_diffs = Vec::new();
    for seed in 1..=5u64 {
        let source = sample_domain(&source_spec, 150, 3000 + seed).unwrap();
        let mut target = sample_domain(&source_spec, 150, 4000 + seed).unwrap();
        target.domain_tag = DomainTag::Target;
        let out =
            run_adaptation(&source, &target, &gan_cfg, &pl_cfg, &clf_cfg, 150, seed).unwrap();
        control_diffs.push(out.middlegan_acc - out.source_only_acc);
    }
    let mut abs_diffs: Vec<f64> = control_diffs.iter().map(|d| d.abs()).collect();
    let control_median = median(&mut abs_diffs);

    let pass = wins >= 4 && control_median <= 0.05;
    gate.close(
        pass,
        format!(
            "augmented >= baseline in {wins}/5 seeds (pairs {shifted_pairs:?}); \
             no-shift |delta| median {control_median:.3} <= 0.05"
        ),
    );
}

#[test]
fn criterion_8_determinism() {
    let gate = Gate::open("8 determinism", 120.0);
    let dir = tempfile::tempdir().unwrap();

    // a verification kind and a training kind, each run twice into the same
    // directory; every reported byte must match
    let verify_cfg = parse_config(
        &format!(
            "[experiment]\nkind = \"verify_identity\"\nseeds = 1, 2\noutput_dir = \"{}\"\n\
             [source]\nfamily = \"gaussian_mixture\"\nclass_count = 1\ndim = 1\n\
             means = -2.0\nsigmas = 1.0\nn_per_class = 400\n\
             [target]\nfamily = \"gaussian_mixture\"\nclass_count = 1\ndim = 1\n\
             means = 2.0\nsigmas = 1.0\nn_per_class = 400\n[grid]\nbins = 61\n",
            dir.path().join("verify").display()
        ),
        true,
    )
    .unwrap();
    run_experiment(&verify_cfg).unwrap();
    let first = std::fs::read(dir.path().join("verify/report.json")).unwrap();
    run_experiment(&verify_cfg).unwrap();
    let second = std::fs::read(dir.path().join("verify/report.json")).unwrap();
    let verify_identical = first == second;

    let adapt_cfg = parse_config(
        &format!(
            "[experiment]\nkind = \"adaptation\"\nseeds = 7\noutput_dir = \"{}\"\n\
             [source]\nfamily = \"two_moons\"\nnoise_std = 0.15\nn_per_class = 100\n\
             [target]\nfrom_source_rotation = 30.0\n\
             [gan]\nepochs = 400\nbatch_size = 48\n\
             [classifier]\nepochs = 120\nlearning_rate = 0.001\n",
            dir.path().join("adapt").display()
        ),
        true,
    )
    .unwrap();
    run_experiment(&adapt_cfg).unwrap();
    let first = std::fs::read(dir.path().join("adapt/report.json")).unwrap();
    let first_fake = std::fs::read(dir.path().join("adapt/fake_seed7.csv")).unwrap();
    run_experiment(&adapt_cfg).unwrap();
    let second = std::fs::read(dir.path().join("adapt/report.json")).unwrap();
    let second_fake = std::fs::read(dir.path().join("adapt/fake_seed7.csv")).unwrap();
    let adapt_identical = first == second && first_fake == second_fake;

    gate.close(
        verify_identical && adapt_identical,
        format!(
            "verify report bytes identical: {verify_identical}, \
             adaptation report and fake CSV bytes identical: {adapt_identical}"
        ),
    );
}

#[test]
fn criterion_9_divergence_sanity() {
    let gate = Gate::open("9 divergence sanity", 5.0);
    let spec = GridSpec::new(vec![(-3.0, 3.0)], vec![23]).unwrap();
    let mut rng = rng_from_seed(909);
    let log2 = 2.0f64.ln();
    let floor = -2.0 * 4.0f64.ln();
    let mut pass = true;
    let mut worst = String::new();
    for i in 0..1000 {
        let p = random_density(&spec, &mut rng).unwrap();
        let q = random_density(&spec, &mut rng).unwrap();
        let m = random_density(&spec, &mut rng).unwrap();
        let self_jsd = jsd(&p, &p).unwrap();
        let pq = jsd(&p, &q).unwrap();
        let qp = jsd(&q, &p).unwrap();
        let divergence = kl(&p, &q).unwrap();
        let criterion = virtual_criterion(&p, &q, &m).unwrap();
        let checks = [
            (self_jsd == 0.0, "jsd(p,p) = 0"),
            (pq.to_bits() == qp.to_bits(), "jsd symmetric"),
            (pq <= log2 + 1e-12, "jsd <= log 2"),
            (divergence >= 0.0, "kl >= 0"),
            (criterion >= floor - 1e-12, "criterion >= -2 log 4"),
        ];
        for (ok, what) in checks {
            if !ok {
                pass = false;
                worst = format!("{what} failed at trial {i}");
            }
        }
    }
    gate.close(
        pass,
        if pass {
            "all five gates held over 1000 random pairs/triples".to_string()
        } else {
            worst
        },
    );
}
