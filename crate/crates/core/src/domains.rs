//! Synthetic labeled 2-D (and 1-D) domains plus the rigid transforms used to
//! manufacture controlled domain shift.

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    Source,
    Target,
    Generated,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Source => "source",
            DomainTag::Target => "target",
            DomainTag::Generated => "generated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "source" => Some(DomainTag::Source),
            "target" => Some(DomainTag::Target),
            "generated" => Some(DomainTag::Generated),
            _ => None,
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Points in `R^d` with one class label per point and a domain tag for the
/// whole collection.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub points: Tensor2,
    pub labels: Vec<usize>,
    pub domain_tag: DomainTag,
    pub class_count: usize,
}

impl LabeledDataset {
    pub fn new(
        points: Tensor2,
        labels: Vec<usize>,
        domain_tag: DomainTag,
        class_count: usize,
    ) -> Result<Self> {
        if points.rows() == 0 {
            return Err(Error::EmptyInput("dataset needs at least one point".into()));
        }
        if labels.len() != points.rows() {
            return Err(Error::ShapeMismatch {
                context: "LabeledDataset".into(),
                expected: format!("{} labels", points.rows()),
                actual: format!("{}", labels.len()),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::MissingClass {
                class: bad,
                which: format!("class range 0..{class_count}"),
            });
        }
        if let Some(i) = points.first_non_finite() {
            return Err(Error::NonFinite {
                context: "dataset points".into(),
                index: i,
            });
        }
        Ok(LabeledDataset {
            points,
            labels,
            domain_tag,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// The rows of one class, as a new dataset with the same tag.
    pub fn class_subset(&self, class: usize) -> Result<LabeledDataset> {
        let rows: Vec<Vec<f64>> = (0..self.len())
            .filter(|&r| self.labels[r] == class)
            .map(|r| self.points.row(r).to_vec())
            .collect();
        if rows.is_empty() {
            return Err(Error::MissingClass {
                class,
                which: format!("{} dataset", self.domain_tag),
            });
        }
        let n = rows.len();
        LabeledDataset::new(
            Tensor2::from_rows(&rows)?,
            vec![class; n],
            self.domain_tag,
            self.class_count,
        )
    }

    /// Per-class mean point.
    pub fn class_centroid(&self, class: usize) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.dim()];
        let mut n = 0usize;
        for r in 0..self.len() {
            if self.labels[r] == class {
                for (a, &x) in acc.iter_mut().zip(self.points.row(r)) {
                    *a += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::MissingClass {
                class,
                which: format!("{} dataset", self.domain_tag),
            });
        }
        for a in acc.iter_mut() {
            *a /= n as f64;
        }
        Ok(acc)
    }

    /// Stacks points and labels from several datasets for classifier
    /// training; the domain tags of the parts are irrelevant there.
    pub fn stack(parts: &[&LabeledDataset]) -> Result<(Tensor2, Vec<usize>)> {
        let parts: Vec<&&LabeledDataset> = parts.iter().filter(|p| !p.is_empty()).collect();
        if parts.is_empty() {
            return Err(Error::EmptyInput("stack of empty datasets".into()));
        }
        let dim = parts[0].dim();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for p in parts {
            if p.dim() != dim {
                return Err(Error::ShapeMismatch {
                    context: "LabeledDataset::stack".into(),
                    expected: format!("dimension {dim}"),
                    actual: format!("dimension {}", p.dim()),
                });
            }
            for r in 0..p.len() {
                rows.push(p.points.row(r).to_vec());
                labels.push(p.labels[r]);
            }
        }
        Ok((Tensor2::from_rows(&rows)?, labels))
    }

    /// CSV text with header `x0,...,label,domain`, values at 9 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for d in 0..self.dim() {
            out.push_str(&format!("x{d},"));
        }
        out.push_str("label,domain\n");
        for r in 0..self.len() {
            for &x in self.points.row(r) {
                out.push_str(&fmt_sig9(x));
                out.push(',');
            }
            out.push_str(&format!("{},{}\n", self.labels[r], self.domain_tag));
        }
        out
    }
}

/// Formats with 9 significant digits, like C's `%.9g`.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

/// Reads dataset CSV text back, grouping rows by domain tag in order of
/// first appearance.
pub fn read_datasets_csv(path: &Path) -> Result<Vec<LabeledDataset>> {
    let text = std::fs::read_to_string(path)?;
    let bad = |message: String| Error::MalformedDataset {
        path: path.display().to_string(),
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| bad("empty file".to_string()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[cols.len() - 2] != "label" || cols[cols.len() - 1] != "domain" {
        return Err(bad(format!("unexpected header '{header}'")));
    }
    let dim = cols.len() - 2;

    let mut groups: Vec<(DomainTag, Vec<Vec<f64>>, Vec<usize>)> = Vec::new();
    let mut max_label = 0usize;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(bad(format!(
                "line {}: expected {} fields, got {}",
                lineno + 1,
                dim + 2,
                fields.len()
            )));
        }
        let mut point = Vec::with_capacity(dim);
        for f in &fields[..dim] {
            point.push(
                f.parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad number '{f}'", lineno + 1)))?,
            );
        }
        let label: usize = fields[dim]
            .parse()
            .map_err(|_| bad(format!("line {}: bad label", lineno + 1)))?;
        let tag = DomainTag::parse(fields[dim + 1])
            .ok_or_else(|| bad(format!("line {}: bad domain tag", lineno + 1)))?;
        max_label = max_label.max(label);
        match groups.iter_mut().find(|(t, _, _)| *t == tag) {
            Some((_, pts, labels)) => {
                pts.push(point);
                labels.push(label);
            }
            None => groups.push((tag, vec![point], vec![label])),
        }
    }
    if groups.is_empty() {
        return Err(bad("no data rows".to_string()));
    }
    groups
        .into_iter()
        .map(|(tag, pts, labels)| {
            LabeledDataset::new(Tensor2::from_rows(&pts)?, labels, tag, max_label + 1)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Domain specifications
// ---------------------------------------------------------------------------

/// Standard-normal noise prior for the generator input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub dimension: usize,
}

impl NoiseSpec {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::config("noise dimension must be >= 1"));
        }
        Ok(NoiseSpec { dimension })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Tensor2 {
        let data: Vec<f64> = (0..n * self.dimension)
            .map(|_| StandardNormal.sample(rng))
            .collect();
        Tensor2::from_vec(n, self.dimension, data).expect("consistent by construction")
    }
}

/// Rigid transform: rotation about the origin (in the first two coordinates)
/// followed by a shift.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub rotation_degrees: f64,
    pub shift: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainFamily {
    /// One Gaussian blob per class. Covariances are flattened row-major
    /// `d x d` matrices and must be positive definite.
    GaussianMixture {
        means: Vec<Vec<f64>>,
        covariances: Vec<Vec<f64>>,
    },
    /// The interleaved half-circles, centered at the origin. Always 2-D,
    /// always two classes.
    TwoMoons { radius: f64, noise_std: f64 },
    /// Concentric circles, one radius per class. Always 2-D.
    Ring { radii: Vec<f64>, noise_std: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub family: DomainFamily,
    pub class_count: usize,
    pub transform: Option<Transform>,
}

impl DomainSpec {
    pub fn gaussian(means: Vec<Vec<f64>>, covariances: Vec<Vec<f64>>) -> Self {
        let class_count = means.len();
        DomainSpec {
            family: DomainFamily::GaussianMixture { means, covariances },
            class_count,
            transform: None,
        }
    }

    /// Isotropic Gaussian blobs with one standard deviation per class.
    pub fn isotropic_gaussian(means: Vec<Vec<f64>>, sigmas: &[f64]) -> Self {
        let dim = means.first().map_or(0, Vec::len);
        let covariances = sigmas
            .iter()
            .map(|&s| {
                let mut cov = vec![0.0; dim * dim];
                for d in 0..dim {
                    cov[d * dim + d] = s * s;
                }
                cov
            })
            .collect();
        DomainSpec::gaussian(means, covariances)
    }

    pub fn two_moons(radius: f64, noise_std: f64) -> Self {
        DomainSpec {
            family: DomainFamily::TwoMoons { radius, noise_std },
            class_count: 2,
            transform: None,
        }
    }

    pub fn ring(radii: Vec<f64>, noise_std: f64) -> Self {
        let class_count = radii.len();
        DomainSpec {
            family: DomainFamily::Ring { radii, noise_std },
            class_count,
            transform: None,
        }
    }

    pub fn with_transform(mut self, rotation_degrees: f64, shift: Vec<f64>) -> Self {
        self.transform = Some(Transform {
            rotation_degrees,
            shift,
        });
        self
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            DomainFamily::GaussianMixture { means, .. } => means.first().map_or(0, Vec::len),
            DomainFamily::TwoMoons { .. } | DomainFamily::Ring { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_count == 0 {
            return Err(Error::config("class_count must be >= 1"));
        }
        match &self.family {
            DomainFamily::GaussianMixture { means, covariances } => {
                if means.len() != self.class_count || covariances.len() != self.class_count {
                    return Err(Error::config(format!(
                        "gaussian_mixture needs {} means and covariances, got {} and {}",
                        self.class_count,
                        means.len(),
                        covariances.len()
                    )));
                }
                let dim = self.dim();
                if dim == 0 {
                    return Err(Error::config("gaussian_mixture means must be nonempty"));
                }
                for (c, (m, cov)) in means.iter().zip(covariances).enumerate() {
                    if m.len() != dim {
                        return Err(Error::config(format!(
                            "class {c} mean has dimension {}, expected {dim}",
                            m.len()
                        )));
                    }
                    if cov.len() != dim * dim {
                        return Err(Error::config(format!(
                            "class {c} covariance has {} entries, expected {}",
                            cov.len(),
                            dim * dim
                        )));
                    }
                    cholesky(cov, dim).ok_or(Error::DegenerateCovariance { class: c })?;
                }
            }
            DomainFamily::TwoMoons { radius, noise_std } => {
                if self.class_count != 2 {
                    return Err(Error::config("two_moons has exactly 2 classes"));
                }
                if !(*radius > 0.0) || *noise_std < 0.0 {
                    return Err(Error::config(
                        "two_moons needs radius > 0 and noise_std >= 0",
                    ));
                }
            }
            DomainFamily::Ring { radii, noise_std } => {
                if radii.len() != self.class_count {
                    return Err(Error::config(format!(
                        "ring needs {} radii, got {}",
                        self.class_count,
                        radii.len()
                    )));
                }
                if radii.iter().any(|&r| !(r > 0.0)) || *noise_std < 0.0 {
                    return Err(Error::config("ring needs radii > 0 and noise_std >= 0"));
                }
            }
        }
        if let Some(t) = &self.transform {
            if !(0.0..360.0).contains(&t.rotation_degrees) {
                return Err(Error::config(format!(
                    "rotation_degrees = {} violates 0 <= rotation < 360",
                    t.rotation_degrees
                )));
            }
            if !t.shift.is_empty() && t.shift.len() != self.dim() {
                return Err(Error::config(format!(
                    "shift has dimension {}, expected {}",
                    t.shift.len(),
                    self.dim()
                )));
            }
        }
        Ok(())
    }
}

/// Lower-triangular Cholesky factor of a flattened `d x d` matrix, or `None`
/// if it is not positive definite.
fn cholesky(cov: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = cov[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 1e-12 {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Draws a balanced dataset: `n_per_class` points per class, classes in
/// order, then the spec's transform. Deterministic per seed.
pub fn sample_domain(spec: &DomainSpec, n_per_class: usize, seed: u64) -> Result<LabeledDataset> {
    spec.validate()?;
    if n_per_class == 0 {
        return Err(Error::EmptyInput("n_per_class must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let dim = spec.dim();
    let n = n_per_class * spec.class_count;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);

    match &spec.family {
        DomainFamily::GaussianMixture { means, covariances } => {
            for (c, (mean, cov)) in means.iter().zip(covariances).enumerate() {
                let l = cholesky(cov, dim).ok_or(Error::DegenerateCovariance { class: c })?;
                for _ in 0..n_per_class {
                    let z: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let mut p = mean.clone();
                    for i in 0..dim {
                        for k in 0..=i {
                            p[i] += l[i * dim + k] * z[k];
                        }
                    }
                    rows.push(p);
                    labels.push(c);
                }
            }
        }
        DomainFamily::TwoMoons { radius, noise_std } => {
            for c in 0..2usize {
                for _ in 0..n_per_class {
                    let t: f64 = rng.random_range(0.0..std::f64::consts::PI);
                    // interleaved half-circles, re-centered at the origin
                    let (mut x, mut y) = if c == 0 {
                        (t.cos(), t.sin())
                    } else {
                        (1.0 - t.cos(), 0.5 - t.sin())
                    };
                    x = (x - 0.5) * radius;
                    y = (y - 0.25) * radius;
                    let nx: f64 = StandardNormal.sample(&mut rng);
                    let ny: f64 = StandardNormal.sample(&mut rng);
                    rows.push(vec![x + noise_std * nx, y + noise_std * ny]);
                    labels.push(c);
                }
            }
        }
        DomainFamily::Ring { radii, noise_std } => {
            for (c, &r) in radii.iter().enumerate() {
                for _ in 0..n_per_class {
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let nx: f64 = StandardNormal.sample(&mut rng);
                    let ny: f64 = StandardNormal.sample(&mut rng);
                    rows.push(vec![
                        r * theta.cos() + noise_std * nx,
                        r * theta.sin() + noise_std * ny,
                    ]);
                    labels.push(c);
                }
            }
        }
    }

    let base = LabeledDataset::new(
        Tensor2::from_rows(&rows)?,
        labels,
        DomainTag::Source,
        spec.class_count,
    )?;
    match &spec.transform {
        Some(t) => transform_dataset(&base, t.rotation_degrees, &t.shift),
        None => Ok(base),
    }
}

/// Rotates every point about the origin (in the first two coordinates) and
/// then shifts it. Labels and the domain tag are untouched.
pub fn transform_dataset(
    data: &LabeledDataset,
    rotation_degrees: f64,
    shift: &[f64],
) -> Result<LabeledDataset> {
    if data.is_empty() {
        return Err(Error::EmptyInput("transform of empty dataset".into()));
    }
    if rotation_degrees != 0.0 && data.dim() < 2 {
        return Err(Error::ShapeMismatch {
            context: "transform_dataset rotation".into(),
            expected: "at least 2 dimensions".into(),
            actual: format!("{}", data.dim()),
        });
    }
    if !shift.is_empty() && shift.len() != data.dim() {
        return Err(Error::ShapeMismatch {
            context: "transform_dataset shift".into(),
            expected: format!("{} components", data.dim()),
            actual: format!("{}", shift.len()),
        });
    }
    let theta = rotation_degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let mut points = data.points.clone();
    for r in 0..points.rows() {
        if rotation_degrees != 0.0 {
            let x = points.get(r, 0);
            let y = points.get(r, 1);
            points.set(r, 0, cos * x - sin * y);
            points.set(r, 1, sin * x + cos * y);
        }
        for (d, &s) in shift.iter().enumerate() {
            points.set(r, d, points.get(r, d) + s);
        }
    }
    LabeledDataset::new(points, data.labels.clone(), data.domain_tag, data.class_count)
}
