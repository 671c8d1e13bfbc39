//! Brute-force numerical oracles on discretized distributions.
//!
//! Everything here works on probability mass functions over a fixed
//! rectangular grid: histogram density estimation, KL and Jensen-Shannon
//! divergences, the optimal-discriminator density ratio, the closed-form
//! value of the two-discriminator game at those optima, and a solver for the
//! distribution minimizing the sum of JS divergences to two references.
//!
//! These functions are the ground truth the adversarial training code is
//! checked against, so they stay deliberately simple: plain sums over cells,
//! no approximations beyond the grid itself.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::tensor::Tensor2;

/// Additive smoothing applied per cell before normalization in
/// [`estimate_density`]. Keeps every log finite while perturbing divergences
/// by far less than the tolerances used anywhere in the lab.
pub const DENSITY_SMOOTHING: f64 = 1e-6;

/// Floor applied to the second argument of [`kl`].
pub const KL_FLOOR: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Grid geometry
// ---------------------------------------------------------------------------

/// Rectangular grid: per-dimension bounds and bin counts.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    bounds: Vec<(f64, f64)>,
    bins: Vec<usize>,
}

impl GridSpec {
    pub fn new(bounds: Vec<(f64, f64)>, bins: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() || bounds.len() != bins.len() {
            return Err(Error::GridMismatch(format!(
                "{} bound pairs vs {} bin counts",
                bounds.len(),
                bins.len()
            )));
        }
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::GridMismatch(format!(
                    "dimension {d} bounds [{lo}, {hi}] are not a finite interval"
                )));
            }
            if bins[d] == 0 {
                return Err(Error::GridMismatch(format!("dimension {d} has zero bins")));
            }
        }
        Ok(GridSpec { bounds, bins })
    }

    /// 1-D default used by the lab: 241 bins on [-6, 6].
    pub fn default_1d() -> Self {
        GridSpec::new(vec![(-6.0, 6.0)], vec![241]).expect("static spec")
    }

    /// 2-D default used by the lab: 61 x 61 on [-6, 6]^2.
    pub fn default_2d() -> Self {
        GridSpec::new(vec![(-6.0, 6.0), (-6.0, 6.0)], vec![61, 61]).expect("static spec")
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn cell_count(&self) -> usize {
        self.bins.iter().product()
    }

    /// Flat cell index of `point` (row-major over dimensions), or `None` if
    /// the point lies outside the bounds. The upper edge of the last bin is
    /// inclusive.
    pub fn cell_index(&self, point: &[f64]) -> Option<usize> {
        debug_assert_eq!(point.len(), self.dim());
        let mut idx = 0usize;
        for (d, &x) in point.iter().enumerate() {
            let (lo, hi) = self.bounds[d];
            if x < lo || x > hi || !x.is_finite() {
                return None;
            }
            let nb = self.bins[d];
            let mut b = ((x - lo) / (hi - lo) * nb as f64) as usize;
            if b >= nb {
                b = nb - 1;
            }
            idx = idx * nb + b;
        }
        Some(idx)
    }

    /// Center coordinates of the flat cell `idx`.
    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        let mut rem = idx;
        let mut center = vec![0.0; self.dim()];
        for d in (0..self.dim()).rev() {
            let nb = self.bins[d];
            let b = rem % nb;
            rem /= nb;
            let (lo, hi) = self.bounds[d];
            let w = (hi - lo) / nb as f64;
            center[d] = lo + (b as f64 + 0.5) * w;
        }
        center
    }

    /// All cell centers as an `(cells x dim)` matrix, in flat-index order.
    pub fn centers(&self) -> Tensor2 {
        let n = self.cell_count();
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        for idx in 0..n {
            data.extend(self.cell_center(idx));
        }
        Tensor2::from_vec(n, d, data).expect("consistent by construction")
    }
}

// ---------------------------------------------------------------------------
// Density grids
// ---------------------------------------------------------------------------

/// A probability mass function over a [`GridSpec`]: nonnegative masses that
/// sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    spec: GridSpec,
    mass: Vec<f64>,
}

impl DensityGrid {
    /// Normalizes nonnegative weights into a mass function.
    pub fn from_weights(spec: GridSpec, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != spec.cell_count() {
            return Err(Error::GridMismatch(format!(
                "{} weights for {} cells",
                weights.len(),
                spec.cell_count()
            )));
        }
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NonFinite {
                    context: "density weights".into(),
                    index: i,
                });
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::EmptyInput("density weights sum to zero".into()));
        }
        let mass = weights.into_iter().map(|w| w / total).collect();
        Ok(DensityGrid { spec, mass })
    }

    pub fn uniform(spec: GridSpec) -> Self {
        let n = spec.cell_count();
        DensityGrid {
            spec,
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn cell_count(&self) -> usize {
        self.mass.len()
    }

    /// Serializes as `cell_index,mass` CSV text.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell_index,mass\n");
        for (i, &m) in self.mass.iter().enumerate() {
            out.push_str(&format!("{i},{m}\n"));
        }
        out
    }
}

fn check_same_grid(a: &DensityGrid, b: &DensityGrid) -> Result<()> {
    if a.spec != b.spec {
        return Err(Error::GridMismatch(
            "operands live on different grids".into(),
        ));
    }
    Ok(())
}

/// A mass function drawn uniformly from the simplex (flat Dirichlet, via
/// normalized exponential spacings).
pub fn random_density(spec: &GridSpec, rng: &mut impl Rng) -> Result<DensityGrid> {
    let weights: Vec<f64> = (0..spec.cell_count())
        .map(|_| -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln())
        .collect();
    DensityGrid::from_weights(spec.clone(), weights)
}

/// Histogram density estimate with additive smoothing.
///
/// Samples outside the bounds are dropped; it is an error for every sample to
/// fall outside.
pub fn estimate_density(points: &Tensor2, spec: &GridSpec) -> Result<DensityGrid> {
    if points.rows() == 0 {
        return Err(Error::EmptyInput("estimate_density needs samples".into()));
    }
    if points.cols() != spec.dim() {
        return Err(Error::ShapeMismatch {
            context: "estimate_density".into(),
            expected: format!("points with {} columns", spec.dim()),
            actual: format!("{} columns", points.cols()),
        });
    }
    let mut counts = vec![0.0f64; spec.cell_count()];
    let mut kept = 0usize;
    for r in 0..points.rows() {
        if let Some(idx) = spec.cell_index(points.row(r)) {
            counts[idx] += 1.0;
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(Error::AllSamplesOutOfBounds { n: points.rows() });
    }
    for c in counts.iter_mut() {
        *c += DENSITY_SMOOTHING;
    }
    DensityGrid::from_weights(spec.clone(), counts)
}

// ---------------------------------------------------------------------------
// Divergences
// ---------------------------------------------------------------------------

/// Kullback-Leibler divergence `sum p log(p/q)` over cells with `p > 0`;
/// `q` is floored at [`KL_FLOOR`].
pub fn kl(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    check_same_grid(p, q)?;
    Ok(kl_raw(&p.mass, &q.mass))
}

fn kl_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            acc += pi * (pi / qi.max(KL_FLOOR)).ln();
        }
    }
    acc
}

/// Jensen-Shannon divergence; symmetric and bounded by `log 2`.
pub fn jsd(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    check_same_grid(p, q)?;
    Ok(jsd_raw(&p.mass, &q.mass))
}

fn jsd_raw(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| (a + b) / 2.0).collect();
    0.5 * kl_raw(p, &m) + 0.5 * kl_raw(q, &m)
}

/// Half the L1 distance between two mass functions.
pub fn total_variation(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    check_same_grid(p, q)?;
    Ok(0.5
        * p.mass
            .iter()
            .zip(&q.mass)
            .map(|(&a, &b)| (a - b).abs())
            .sum::<f64>())
}

// ---------------------------------------------------------------------------
// Optimal discriminator and the value of the game at that optimum
// ---------------------------------------------------------------------------

/// Cellwise density ratio `p / (p + pm)` with `0/0` cells set to 0.5.
#[derive(Debug, Clone)]
pub struct OptimalDiscriminator {
    /// Value per cell, in flat-index order.
    pub values: Vec<f64>,
    /// Number of `0/0` cells that were pinned to 0.5.
    pub undefined_cells: usize,
}

pub fn optimal_discriminator(p: &DensityGrid, pm: &DensityGrid) -> Result<OptimalDiscriminator> {
    check_same_grid(p, pm)?;
    let mut undefined = 0usize;
    let values = p
        .mass
        .iter()
        .zip(&pm.mass)
        .map(|(&a, &b)| {
            if a + b > 0.0 {
                a / (a + b)
            } else {
                undefined += 1;
                0.5
            }
        })
        .collect();
    Ok(OptimalDiscriminator {
        values,
        undefined_cells: undefined,
    })
}

/// Closed form of the maximized value objective:
/// `-2 log 4 + 2 JSD(ps||pm) + 2 JSD(pt||pm)`.
pub fn virtual_criterion(ps: &DensityGrid, pt: &DensityGrid, pm: &DensityGrid) -> Result<f64> {
    check_same_grid(ps, pt)?;
    check_same_grid(ps, pm)?;
    Ok(-2.0 * 4.0f64.ln() + 2.0 * jsd_raw(&ps.mass, &pm.mass) + 2.0 * jsd_raw(&pt.mass, &pm.mass))
}

/// The value objective integrated over the grid with each discriminator at
/// its density-ratio optimum. Agrees with [`virtual_criterion`] to roundoff;
/// the two routes share no code past the mass vectors.
pub fn value_at_optimal_discriminators(
    ps: &DensityGrid,
    pt: &DensityGrid,
    pm: &DensityGrid,
) -> Result<f64> {
    check_same_grid(ps, pt)?;
    check_same_grid(ps, pm)?;
    let mut acc = 0.0;
    for ((&s, &t), &m) in ps.mass.iter().zip(&pt.mass).zip(&pm.mass) {
        if s > 0.0 {
            // real-source term: ps * log D_s with D_s = s / (s + m)
            acc += s * (s / (s + m)).ln();
        }
        if t > 0.0 {
            acc += t * (t / (t + m)).ln();
        }
        if m > 0.0 {
            // fake terms: pm * log(1 - D) = pm * log(m / (p + m)), once per discriminator
            acc += m * (m / (s + m)).ln();
            acc += m * (m / (t + m)).ln();
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// JSD centroid solver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentroidMethod {
    /// Search the mixture family `alpha * ps + (1 - alpha) * pt` only.
    MixtureSweep,
    /// Mixture sweep followed by projected gradient descent over the full
    /// simplex.
    SimplexDescent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSolverConfig {
    pub method: CentroidMethod,
    pub sweep_resolution: usize,
    pub descent_steps: usize,
    pub descent_rate: f64,
    pub tolerance: f64,
}

impl Default for CentroidSolverConfig {
    fn default() -> Self {
        CentroidSolverConfig {
            method: CentroidMethod::SimplexDescent,
            sweep_resolution: 101,
            descent_steps: 500,
            descent_rate: 0.1,
            tolerance: 1e-9,
        }
    }
}

impl CentroidSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweep_resolution < 11 {
            return Err(Error::config(format!(
                "sweep_resolution = {} violates sweep_resolution >= 11",
                self.sweep_resolution
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config(format!(
                "tolerance = {} violates tolerance > 0",
                self.tolerance
            )));
        }
        if !(self.descent_rate > 0.0) {
            return Err(Error::config(format!(
                "descent_rate = {} violates descent_rate > 0",
                self.descent_rate
            )));
        }
        Ok(())
    }
}

/// Result of [`jsd_centroid`].
#[derive(Debug, Clone)]
pub struct CentroidSolution {
    pub centroid: DensityGrid,
    /// Achieved `JSD(ps||pm) + JSD(pt||pm)`.
    pub objective: f64,
    /// Best mixture weight found by the sweep stage.
    pub sweep_alpha: f64,
    /// Objective after the initial point and after every accepted descent
    /// step; non-increasing by construction.
    pub trace: Vec<f64>,
}

fn centroid_objective(ps: &[f64], pt: &[f64], pm: &[f64]) -> f64 {
    jsd_raw(ps, pm) + jsd_raw(pt, pm)
}

/// d/d pm_i of the centroid objective; pm floored at `KL_FLOOR` inside logs.
fn centroid_gradient(ps: &[f64], pt: &[f64], pm: &[f64]) -> Vec<f64> {
    pm.iter()
        .enumerate()
        .map(|(i, &m)| {
            let m = m.max(KL_FLOOR);
            0.5 * (2.0 * m / (ps[i] + m)).ln() + 0.5 * (2.0 * m / (pt[i] + m)).ln()
        })
        .collect()
}

/// Clip negatives to zero and renormalize onto the simplex.
fn project_simplex(v: &mut [f64]) {
    let mut total = 0.0;
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
        total += *x;
    }
    if total > 0.0 {
        for x in v.iter_mut() {
            *x /= total;
        }
    } else {
        let u = 1.0 / v.len() as f64;
        for x in v.iter_mut() {
            *x = u;
        }
    }
}

/// Minimizes `JSD(ps||pm) + JSD(pt||pm)` over mass functions `pm`.
///
/// The sweep stage scans the mixture family (always including the endpoints
/// and the even blend); the descent stage refines over the full simplex with
/// per-step backtracking so the logged objective never increases.
pub fn jsd_centroid(
    ps: &DensityGrid,
    pt: &DensityGrid,
    cfg: &CentroidSolverConfig,
) -> Result<CentroidSolution> {
    check_same_grid(ps, pt)?;
    cfg.validate()?;

    let n = ps.cell_count();
    let mix = |alpha: f64| -> Vec<f64> {
        (0..n)
            .map(|i| alpha * ps.mass[i] + (1.0 - alpha) * pt.mass[i])
            .collect()
    };

    let mut best_alpha = 0.0;
    let mut best = mix(0.0);
    let mut best_obj = centroid_objective(&ps.mass, &pt.mass, &best);
    let r = cfg.sweep_resolution;
    let sweep_alphas = (0..=r).map(|i| i as f64 / r as f64);
    // 0.5 need not land on the sweep lattice; probing it keeps the solver at
    // least as good as the even mixture.
    for alpha in sweep_alphas.chain(std::iter::once(0.5)) {
        let pm = mix(alpha);
        let obj = centroid_objective(&ps.mass, &pt.mass, &pm);
        if !obj.is_finite() {
            return Err(Error::SolverDiverged { iterate: 0 });
        }
        if obj < best_obj {
            best_obj = obj;
            best = pm;
            best_alpha = alpha;
        }
    }

    let mut trace = vec![best_obj];
    if cfg.method == CentroidMethod::SimplexDescent {
        let mut pm = best;
        let mut obj = best_obj;
        'descent: for step in 0..cfg.descent_steps {
            let grad = centroid_gradient(&ps.mass, &pt.mass, &pm);
            let mut rate = cfg.descent_rate;
            for _ in 0..40 {
                let mut cand: Vec<f64> =
                    pm.iter().zip(&grad).map(|(&m, &g)| m - rate * g).collect();
                project_simplex(&mut cand);
                let cand_obj = centroid_objective(&ps.mass, &pt.mass, &cand);
                if !cand_obj.is_finite() {
                    return Err(Error::SolverDiverged { iterate: step });
                }
                if cand_obj <= obj {
                    // Accept only non-worsening steps; once no shrinkage of
                    // the rate makes progress the solver has converged.
                    if obj - cand_obj < cfg.tolerance * 1e-3 && rate < cfg.descent_rate {
                        pm = cand;
                        obj = cand_obj;
                        trace.push(obj);
                        break 'descent;
                    }
                    pm = cand;
                    obj = cand_obj;
                    trace.push(obj);
                    continue 'descent;
                }
                rate *= 0.5;
            }
            break;
        }
        best = pm;
        best_obj = obj;
    }

    Ok(CentroidSolution {
        centroid: DensityGrid::from_weights(ps.spec.clone(), best)?,
        objective: best_obj,
        sweep_alpha: best_alpha,
        trace,
    })
}

// ---------------------------------------------------------------------------
// Global-minimum verification
// ---------------------------------------------------------------------------

/// Outcome of [`verify_centroid_optimality`]: the solved centroid is compared against
/// random simplex probes and the named reference points.
#[derive(Debug, Clone)]
pub struct CentroidVerification {
    pub centroid: DensityGrid,
    /// `JSD(ps||pm*) + JSD(pt||pm*)` at the solved centroid.
    pub centroid_objective: f64,
    /// Maximized value objective at the centroid (`-2 log 4 + 2 JSD + 2 JSD`).
    pub criterion_at_centroid: f64,
    pub probes_checked: usize,
    /// Largest amount by which any probe beat the centroid (<= 0 when none did).
    pub max_violation: f64,
    pub trace_monotone: bool,
    pub trace_initial: f64,
    pub trace_final: f64,
}

/// Number of random simplex probes used by [`verify_centroid_optimality`].
pub const CENTROID_RANDOM_PROBES: usize = 100;

/// Confirms numerically that the solved centroid is the global minimum of the
/// maximized value objective: no random simplex probe, nor `ps`, `pt`, or the
/// uniform distribution, may beat it by more than `cfg.tolerance`.
pub fn verify_centroid_optimality(
    ps: &DensityGrid,
    pt: &DensityGrid,
    cfg: &CentroidSolverConfig,
    seed: u64,
) -> Result<CentroidVerification> {
    let solution = jsd_centroid(ps, pt, cfg)?;
    let c_star = virtual_criterion(ps, pt, &solution.centroid)?;

    let mut rng = rng_from_seed(seed);
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst: Option<String> = None;
    let mut probes_checked = 0usize;

    let mut check = |label: String, probe: &DensityGrid| -> Result<()> {
        let c = virtual_criterion(ps, pt, probe)?;
        let violation = c_star - c;
        probes_checked += 1;
        if violation > max_violation {
            max_violation = violation;
            worst = Some(label);
        }
        Ok(())
    };

    for k in 0..CENTROID_RANDOM_PROBES {
        let probe = random_density(ps.spec(), &mut rng)?;
        check(format!("random probe {k}"), &probe)?;
    }
    check("ps".into(), ps)?;
    check("pt".into(), pt)?;
    check("uniform".into(), &DensityGrid::uniform(ps.spec().clone()))?;

    let trace_monotone = solution.trace.windows(2).all(|w| w[1] <= w[0]);
    let verification = CentroidVerification {
        centroid_objective: solution.objective,
        criterion_at_centroid: c_star,
        probes_checked,
        max_violation,
        trace_monotone,
        trace_initial: *solution.trace.first().expect("trace nonempty"),
        trace_final: *solution.trace.last().expect("trace nonempty"),
        centroid: solution.centroid,
    };

    if max_violation > cfg.tolerance {
        return Err(Error::VerificationFailed(format!(
            "{} beats the centroid by {max_violation:.3e} (tolerance {:.1e})",
            worst.unwrap_or_default(),
            cfg.tolerance
        )));
    }
    if !trace_monotone {
        return Err(Error::VerificationFailed(
            "descent trace is not monotonically non-increasing".into(),
        ));
    }
    Ok(verification)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn grid1(bins: usize) -> GridSpec {
        GridSpec::new(vec![(-6.0, 6.0)], vec![bins]).unwrap()
    }

    fn random_grid(spec: &GridSpec, rng: &mut impl Rng) -> DensityGrid {
        random_density(spec, rng).unwrap()
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

    #[test]
    fn density_single_cell_gets_almost_all_mass() {
        let spec = grid1(12);
        let pts = Tensor2::from_vec(4, 1, vec![0.1, 0.1, 0.1, 0.1]).unwrap();
        let d = estimate_density(&pts, &spec).unwrap();
        let idx = spec.cell_index(&[0.1]).unwrap();
        assert!(d.mass()[idx] > 0.999);
        let total: f64 = d.mass().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_uniform_samples_flatten() {
        let mut rng = rng_from_seed(11);
        let n = 200_000;
        let spec = grid1(24);
        let data: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..6.0)).collect();
        let pts = Tensor2::from_vec(n, 1, data).unwrap();
        let d = estimate_density(&pts, &spec).unwrap();
        let expect = 1.0 / 24.0;
        let bound = 3.0 / (n as f64).sqrt();
        for &m in d.mass() {
            assert!((m - expect).abs() < bound, "cell mass {m} vs {expect}");
        }
    }

    #[test]
    fn density_two_equal_clusters_split_mass() {
        let spec = grid1(12);
        let pts =
            Tensor2::from_vec(6, 1, vec![-3.0, -3.0, -3.0, 3.0, 3.0, 3.0]).unwrap();
        let d = estimate_density(&pts, &spec).unwrap();
        let a = spec.cell_index(&[-3.0]).unwrap();
        let b = spec.cell_index(&[3.0]).unwrap();
        assert!((d.mass()[a] - 0.5).abs() < 1e-5);
        assert!((d.mass()[b] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn density_rejects_fully_out_of_bounds() {
        let spec = grid1(10);
        let pts = Tensor2::from_vec(2, 1, vec![9.0, -7.5]).unwrap();
        match estimate_density(&pts, &spec) {
            Err(Error::AllSamplesOutOfBounds { n: 2 }) => {}
            other => panic!("expected out-of-bounds rejection, got {other:?}"),
        }
    }

    #[test]
    fn kl_of_self_is_zero_and_two_cell_case_is_log2() {
        let spec = GridSpec::new(vec![(0.0, 1.0)], vec![2]).unwrap();
        let p = DensityGrid::from_weights(spec.clone(), vec![1.0, 0.0]).unwrap();
        let q = DensityGrid::from_weights(spec.clone(), vec![0.5, 0.5]).unwrap();
        assert_eq!(kl(&p, &p).unwrap(), 0.0);
        assert!((kl(&p, &q).unwrap() - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn kl_nonnegative_on_random_pairs() {
        let spec = grid1(17);
        let mut rng = rng_from_seed(5);
        for _ in 0..1000 {
            let p = random_grid(&spec, &mut rng);
            let q = random_grid(&spec, &mut rng);
            assert!(kl(&p, &q).unwrap() >= 0.0);
        }
    }

    #[test]
    fn jsd_zero_max_and_symmetry() {
        let spec = GridSpec::new(vec![(0.0, 1.0)], vec![4]).unwrap();
        let p = DensityGrid::from_weights(spec.clone(), vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let q = DensityGrid::from_weights(spec.clone(), vec![0.0, 0.0, 3.0, 1.0]).unwrap();
        assert_eq!(jsd(&p, &p).unwrap(), 0.0);
        assert!((jsd(&p, &q).unwrap() - 2.0f64.ln()).abs() < 1e-12);

        let spec = grid1(23);
        let mut rng = rng_from_seed(9);
        for _ in 0..1000 {
            let a = random_grid(&spec, &mut rng);
            let b = random_grid(&spec, &mut rng);
            let ab = jsd(&a, &b).unwrap();
            let ba = jsd(&b, &a).unwrap();
            assert_eq!(ab.to_bits(), ba.to_bits(), "jsd must be bitwise symmetric");
            assert!(ab >= 0.0 && ab <= 2.0f64.ln() + 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let p = DensityGrid::uniform(grid1(10));
        let q = DensityGrid::uniform(grid1(11));
        assert!(matches!(kl(&p, &q), Err(Error::GridMismatch(_))));
        assert!(matches!(jsd(&p, &q), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn optimal_discriminator_cases() {
        let spec = GridSpec::new(vec![(0.0, 1.0)], vec![2]).unwrap();
        let p = DensityGrid::from_weights(spec.clone(), vec![0.8, 0.2]).unwrap();
        let d = optimal_discriminator(&p, &p).unwrap();
        assert!(d.values.iter().all(|&v| (v - 0.5).abs() < 1e-12));
        assert_eq!(d.undefined_cells, 0);

        let pm = DensityGrid::from_weights(spec.clone(), vec![0.2, 0.8]).unwrap();
        let d = optimal_discriminator(&p, &pm).unwrap();
        assert!((d.values[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn virtual_criterion_trivial_points() {
        let spec = GridSpec::new(vec![(0.0, 1.0)], vec![3]).unwrap();
        let u = DensityGrid::uniform(spec.clone());
        let c = virtual_criterion(&u, &u, &u).unwrap();
        assert!((c + 2.0 * 4.0f64.ln()).abs() < 1e-12);

        let a = DensityGrid::from_weights(spec.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        let b = DensityGrid::from_weights(spec.clone(), vec![0.0, 1.0, 0.0]).unwrap();
        let m = DensityGrid::from_weights(spec.clone(), vec![0.0, 0.0, 1.0]).unwrap();
        let c = virtual_criterion(&a, &b, &m).unwrap();
        assert!(c.abs() < 1e-12, "pairwise disjoint triple should hit 0, got {c}");
    }

    #[test]
    fn criterion_matches_grid_integral_on_random_triples() {
        let spec = grid1(31);
        let mut rng = rng_from_seed(21);
        for _ in 0..100 {
            let ps = random_grid(&spec, &mut rng);
            let pt = random_grid(&spec, &mut rng);
            let pm = random_grid(&spec, &mut rng);
            let lhs = value_at_optimal_discriminators(&ps, &pt, &pm).unwrap();
            let rhs = virtual_criterion(&ps, &pt, &pm).unwrap();
            assert!(
                (lhs - rhs).abs() < 1e-9,
                "identity residual {:.3e}",
                (lhs - rhs).abs()
            );
        }
    }

    #[test]
    fn criterion_bounded_below_on_random_triples() {
        let spec = grid1(13);
        let mut rng = rng_from_seed(33);
        let floor = -2.0 * 4.0f64.ln();
        for _ in 0..1000 {
            let ps = random_grid(&spec, &mut rng);
            let pt = random_grid(&spec, &mut rng);
            let pm = random_grid(&spec, &mut rng);
            assert!(virtual_criterion(&ps, &pt, &pm).unwrap() >= floor - 1e-12);
        }
    }

    #[test]
    fn centroid_of_identical_inputs_is_the_input() {
        let spec = grid1(41);
        let p = gaussian_grid(&spec, 0.5, 1.0);
        let sol = jsd_centroid(&p, &p, &CentroidSolverConfig::default()).unwrap();
        assert!(sol.objective.abs() < 1e-9);
        assert!(total_variation(&sol.centroid, &p).unwrap() < 1e-9);
    }

    #[test]
    fn centroid_of_disjoint_point_masses_is_even_mixture() {
        let spec = GridSpec::new(vec![(0.0, 1.0)], vec![8]).unwrap();
        let a = DensityGrid::from_weights(spec.clone(), {
            let mut w = vec![0.0; 8];
            w[1] = 1.0;
            w
        })
        .unwrap();
        let b = DensityGrid::from_weights(spec.clone(), {
            let mut w = vec![0.0; 8];
            w[6] = 1.0;
            w
        })
        .unwrap();
        let cfg = CentroidSolverConfig {
            method: CentroidMethod::MixtureSweep,
            sweep_resolution: 1001,
            ..CentroidSolverConfig::default()
        };
        let sol = jsd_centroid(&a, &b, &cfg).unwrap();
        assert!((sol.sweep_alpha - 0.5).abs() < 1e-9);
        assert!((sol.centroid.mass()[1] - 0.5).abs() < 1e-9);
        assert!((sol.centroid.mass()[6] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn centroid_symmetric_under_swap() {
        let spec = grid1(61);
        let a = gaussian_grid(&spec, -1.5, 0.7);
        let b = gaussian_grid(&spec, 2.0, 1.1);
        let cfg = CentroidSolverConfig::default();
        let ab = jsd_centroid(&a, &b, &cfg).unwrap();
        let ba = jsd_centroid(&b, &a, &cfg).unwrap();
        assert!((ab.objective - ba.objective).abs() < cfg.tolerance);
        assert!(total_variation(&ab.centroid, &ba.centroid).unwrap() < 1e-4);
    }

    #[test]
    fn centroid_beats_reference_points() {
        let spec = grid1(41);
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let a = random_grid(&spec, &mut rng);
            let b = random_grid(&spec, &mut rng);
            let sol = jsd_centroid(&a, &b, &CentroidSolverConfig::default()).unwrap();
            for probe in [&a, &b] {
                let obj = jsd(&a, probe).unwrap() + jsd(&b, probe).unwrap();
                assert!(sol.objective <= obj + 1e-12);
            }
            let mid_w: Vec<f64> = a
                .mass()
                .iter()
                .zip(b.mass())
                .map(|(&x, &y)| (x + y) / 2.0)
                .collect();
            let mid = DensityGrid::from_weights(spec.clone(), mid_w).unwrap();
            let obj = jsd(&a, &mid).unwrap() + jsd(&b, &mid).unwrap();
            assert!(sol.objective <= obj + 1e-12);
        }
    }

    #[test]
    fn centroid_optimality_uniform_case_attains_floor() {
        let spec = grid1(31);
        let u = DensityGrid::uniform(spec);
        let v = verify_centroid_optimality(&u, &u, &CentroidSolverConfig::default(), 17).unwrap();
        assert!((v.criterion_at_centroid + 2.0 * 4.0f64.ln()).abs() < 1e-9);
        assert!(v.max_violation <= 1e-9);
        assert!(v.trace_monotone);
    }

    #[test]
    fn centroid_optimality_separated_gaussians() {
        let spec = grid1(241);
        let ps = gaussian_grid(&spec, -2.0, 1.0);
        let pt = gaussian_grid(&spec, 2.0, 1.0);
        let v = verify_centroid_optimality(&ps, &pt, &CentroidSolverConfig::default(), 99).unwrap();
        assert_eq!(v.probes_checked, CENTROID_RANDOM_PROBES + 3);
        assert!(v.max_violation <= 1e-9, "violation {:.3e}", v.max_violation);
        assert!(v.trace_monotone);
        assert!(v.trace_final <= v.trace_initial);
    }
}
