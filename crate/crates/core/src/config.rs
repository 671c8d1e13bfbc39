//! Experiment configuration: a line-oriented text format, its strict parser,
//! the canonical serializer, and the config digest.
//!
//! Format: `[section]` headers, `key = value` entries, `#` comments. Values
//! are integers, reals, quoted strings, or comma-separated lists of those.
//! Unknown sections and keys are rejected (strict mode), duplicates are
//! rejected, and every diagnostic carries a line number. Re-serializing a
//! parsed config materializes all defaults in a fixed order, so equal
//! configurations always hash to the same digest.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::domains::{DomainFamily, DomainSpec};
use crate::error::{Error, Result};
use crate::gan::{GanTrainConfig, GeneratorLossVariant};
use crate::oracles::{CentroidMethod, CentroidSolverConfig, GridSpec};
use crate::pipeline::{ClassifierConfig, PseudoLabelConfig, PseudoLabelMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    GanTrain,
    OracleCentroid,
    VerifyIdentity,
    Adaptation,
    Agnosticism,
    Gradcheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::GanTrain => "gan_train",
            ExperimentKind::OracleCentroid => "oracle_centroid",
            ExperimentKind::VerifyIdentity => "verify_identity",
            ExperimentKind::Adaptation => "adaptation",
            ExperimentKind::Agnosticism => "agnosticism",
            ExperimentKind::Gradcheck => "gradcheck",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gan_train" => Some(ExperimentKind::GanTrain),
            "oracle_centroid" => Some(ExperimentKind::OracleCentroid),
            "verify_identity" => Some(ExperimentKind::VerifyIdentity),
            "adaptation" => Some(ExperimentKind::Adaptation),
            "agnosticism" => Some(ExperimentKind::Agnosticism),
            "gradcheck" => Some(ExperimentKind::Gradcheck),
            _ => None,
        }
    }
}

/// A domain together with the sample counts the experiments draw from it.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub spec: DomainSpec,
    pub n_per_class: usize,
    pub n_test_per_class: usize,
}

/// The target domain is either spelled out or derived from the source by a
/// rigid transform.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetConfig {
    FromSource { rotation_degrees: f64, shift: Vec<f64> },
    Explicit(DomainConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    /// Bins per dimension; `None` picks 241 for 1-D and 61 for 2-D.
    pub bins: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lo: -6.0,
            hi: 6.0,
            bins: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckConfig {
    pub architectures: usize,
    pub fd_step: f64,
    pub tolerance: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig {
            architectures: 20,
            fd_step: 1e-5,
            tolerance: 1e-4,
        }
    }
}

/// Every knob of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub source: DomainConfig,
    pub target: TargetConfig,
    pub gan: GanTrainConfig,
    /// `None` defaults to the source's per-class count.
    pub n_fake_per_class: Option<usize>,
    pub classifier: ClassifierConfig,
    pub pseudo_label: PseudoLabelConfig,
    pub grid: GridConfig,
    pub centroid: CentroidSolverConfig,
    pub gradcheck: GradcheckConfig,
}

impl ExperimentConfig {
    pub fn default_for(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seeds: vec![1, 2, 3, 4, 5],
            output_dir: PathBuf::from("out"),
            source: DomainConfig {
                spec: DomainSpec::isotropic_gaussian(
                    vec![vec![-2.0, 0.0], vec![2.0, 0.0]],
                    &[0.5, 0.5],
                ),
                n_per_class: 150,
                n_test_per_class: 200,
            },
            target: TargetConfig::FromSource {
                rotation_degrees: 30.0,
                shift: vec![],
            },
            gan: GanTrainConfig::default(),
            n_fake_per_class: None,
            classifier: ClassifierConfig::default(),
            pseudo_label: PseudoLabelConfig::default(),
            grid: GridConfig::default(),
            centroid: CentroidSolverConfig::default(),
            gradcheck: GradcheckConfig::default(),
        }
    }

    /// The target's full domain configuration with any preset applied.
    pub fn resolved_target(&self) -> Result<DomainConfig> {
        match &self.target {
            TargetConfig::Explicit(d) => Ok(d.clone()),
            TargetConfig::FromSource {
                rotation_degrees,
                shift,
            } => {
                let mut spec = self.source.spec.clone();
                spec = spec.with_transform(*rotation_degrees, shift.clone());
                spec.validate()?;
                Ok(DomainConfig {
                    spec,
                    n_per_class: self.source.n_per_class,
                    n_test_per_class: self.source.n_test_per_class,
                })
            }
        }
    }

    /// Fake samples per class, defaulting to the source per-class count.
    pub fn fake_per_class(&self) -> usize {
        self.n_fake_per_class.unwrap_or(self.source.n_per_class)
    }

    /// The density grid for the experiment's data dimension.
    pub fn grid_spec(&self) -> Result<GridSpec> {
        let dim = self.source.spec.dim();
        let bins = self.grid.bins.unwrap_or(match dim {
            1 => 241,
            _ => 61,
        });
        GridSpec::new(vec![(self.grid.lo, self.grid.hi); dim], vec![bins; dim])
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must be nonempty"));
        }
        let distinct: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        self.source.spec.validate()?;
        if self.source.n_per_class == 0 || self.source.n_test_per_class == 0 {
            return Err(Error::config("n_per_class and n_test_per_class must be >= 1"));
        }
        self.resolved_target()?.spec.validate()?;
        self.gan.validate()?;
        self.classifier.validate()?;
        self.pseudo_label.validate()?;
        self.centroid.validate()?;
        if self.grid.lo >= self.grid.hi {
            return Err(Error::config(format!(
                "grid lo = {} must be below hi = {}",
                self.grid.lo, self.grid.hi
            )));
        }
        if let Some(bins) = self.grid.bins {
            if bins < 2 {
                return Err(Error::config(format!("bins = {bins} violates bins >= 2")));
            }
        }
        if self.gradcheck.architectures == 0 {
            return Err(Error::config("architectures must be >= 1"));
        }
        if !(self.gradcheck.fd_step > 0.0) {
            return Err(Error::config(format!(
                "fd_step = {} violates fd_step > 0",
                self.gradcheck.fd_step
            )));
        }
        if !(self.gradcheck.tolerance > 0.0) {
            return Err(Error::config(format!(
                "tolerance = {} violates tolerance > 0",
                self.gradcheck.tolerance
            )));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_config(text, true)
    }

    /// Stable hash of the canonicalized configuration.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    /// Re-serializes with every knob materialized, in a fixed order.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "kind = \"{}\"", self.kind.as_str());
        let _ = writeln!(s, "seeds = {}", join_ints(&self.seeds));
        let _ = writeln!(s, "output_dir = \"{}\"", self.output_dir.display());
        s.push('\n');

        let _ = writeln!(s, "[source]");
        write_domain(&mut s, &self.source);
        s.push('\n');

        let _ = writeln!(s, "[target]");
        match &self.target {
            TargetConfig::FromSource {
                rotation_degrees,
                shift,
            } => {
                let _ = writeln!(s, "from_source_rotation = {rotation_degrees}");
                if !shift.is_empty() {
                    let _ = writeln!(s, "from_source_shift = {}", join_reals(shift));
                }
            }
            TargetConfig::Explicit(d) => write_domain(&mut s, d),
        }
        s.push('\n');

        let _ = writeln!(s, "[gan]");
        let _ = writeln!(s, "epochs = {}", self.gan.epochs);
        let _ = writeln!(s, "batch_size = {}", self.gan.batch_size);
        let _ = writeln!(s, "noise_dim = {}", self.gan.noise.dimension);
        let _ = writeln!(s, "lr_generator = {}", self.gan.lr_generator);
        let _ = writeln!(s, "lr_disc_source = {}", self.gan.lr_disc_source);
        let _ = writeln!(s, "lr_disc_target = {}", self.gan.lr_disc_target);
        let _ = writeln!(
            s,
            "generator_hidden = {}",
            join_ints(&to_u64s(&self.gan.generator_hidden))
        );
        let _ = writeln!(
            s,
            "discriminator_hidden = {}",
            join_ints(&to_u64s(&self.gan.discriminator_hidden))
        );
        let _ = writeln!(s, "loss_variant = \"{}\"", self.gan.loss_variant.as_str());
        let _ = writeln!(s, "label_smoothing = {}", self.gan.label_smoothing);
        if let Some(n) = self.n_fake_per_class {
            let _ = writeln!(s, "n_fake_per_class = {n}");
        }
        s.push('\n');

        let _ = writeln!(s, "[classifier]");
        let _ = writeln!(s, "hidden = {}", join_ints(&to_u64s(&self.classifier.hidden)));
        let _ = writeln!(s, "epochs = {}", self.classifier.epochs);
        let _ = writeln!(s, "batch_size = {}", self.classifier.batch_size);
        let _ = writeln!(s, "learning_rate = {}", self.classifier.learning_rate);
        s.push('\n');

        let _ = writeln!(s, "[pseudo_label]");
        let _ = writeln!(s, "method = \"{}\"", self.pseudo_label.method.as_str());
        let _ = writeln!(
            s,
            "confidence_threshold = {}",
            self.pseudo_label.confidence_threshold
        );
        s.push('\n');

        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "lo = {}", self.grid.lo);
        let _ = writeln!(s, "hi = {}", self.grid.hi);
        if let Some(bins) = self.grid.bins {
            let _ = writeln!(s, "bins = {bins}");
        }
        s.push('\n');

        let _ = writeln!(s, "[centroid]");
        let method = match self.centroid.method {
            CentroidMethod::MixtureSweep => "mixture_sweep",
            CentroidMethod::SimplexDescent => "simplex_descent",
        };
        let _ = writeln!(s, "method = \"{method}\"");
        let _ = writeln!(s, "sweep_resolution = {}", self.centroid.sweep_resolution);
        let _ = writeln!(s, "descent_steps = {}", self.centroid.descent_steps);
        let _ = writeln!(s, "descent_rate = {}", self.centroid.descent_rate);
        let _ = writeln!(s, "tolerance = {}", self.centroid.tolerance);
        s.push('\n');

        let _ = writeln!(s, "[gradcheck]");
        let _ = writeln!(s, "architectures = {}", self.gradcheck.architectures);
        let _ = writeln!(s, "fd_step = {}", self.gradcheck.fd_step);
        let _ = writeln!(s, "tolerance = {}", self.gradcheck.tolerance);
        s
    }
}

fn to_u64s(v: &[usize]) -> Vec<u64> {
    v.iter().map(|&x| x as u64).collect()
}

fn join_ints(v: &[u64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn join_reals(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_domain(s: &mut String, d: &DomainConfig) {
    match &d.spec.family {
        DomainFamily::GaussianMixture { means, covariances } => {
            let dim = d.spec.dim();
            let _ = writeln!(s, "family = \"gaussian_mixture\"");
            let _ = writeln!(s, "class_count = {}", d.spec.class_count);
            let _ = writeln!(s, "dim = {dim}");
            let flat_means: Vec<f64> = means.iter().flatten().copied().collect();
            let _ = writeln!(s, "means = {}", join_reals(&flat_means));
            // isotropic covariances serialize as sigmas, anything else in full
            let isotropic: Option<Vec<f64>> = covariances
                .iter()
                .map(|cov| {
                    let s0 = cov[0].sqrt();
                    let iso = (0..dim).all(|i| {
                        (0..dim).all(|j| {
                            let want = if i == j { cov[0] } else { 0.0 };
                            cov[i * dim + j] == want
                        })
                    });
                    if iso {
                        Some(s0)
                    } else {
                        None
                    }
                })
                .collect();
            match isotropic {
                Some(sigmas) => {
                    let _ = writeln!(s, "sigmas = {}", join_reals(&sigmas));
                }
                None => {
                    let flat: Vec<f64> = covariances.iter().flatten().copied().collect();
                    let _ = writeln!(s, "covs = {}", join_reals(&flat));
                }
            }
        }
        DomainFamily::TwoMoons { radius, noise_std } => {
            let _ = writeln!(s, "family = \"two_moons\"");
            let _ = writeln!(s, "class_count = 2");
            let _ = writeln!(s, "radius = {radius}");
            let _ = writeln!(s, "noise_std = {noise_std}");
        }
        DomainFamily::Ring { radii, noise_std } => {
            let _ = writeln!(s, "family = \"ring\"");
            let _ = writeln!(s, "class_count = {}", d.spec.class_count);
            let _ = writeln!(s, "radii = {}", join_reals(radii));
            let _ = writeln!(s, "noise_std = {noise_std}");
        }
    }
    let _ = writeln!(s, "n_per_class = {}", d.n_per_class);
    let _ = writeln!(s, "n_test_per_class = {}", d.n_test_per_class);
    if let Some(t) = &d.spec.transform {
        let _ = writeln!(s, "rotation_degrees = {}", t.rotation_degrees);
        if !t.shift.is_empty() {
            let _ = writeln!(s, "shift = {}", join_reals(&t.shift));
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum RawValue {
    Int(i64),
    Real(f64),
    Str(String),
}

#[derive(Debug)]
struct RawEntry {
    key: String,
    line: usize,
    values: Vec<RawValue>,
    consumed: std::cell::Cell<bool>,
}

#[derive(Debug)]
struct RawSection {
    name: String,
    line: usize,
    entries: Vec<RawEntry>,
}

fn lex(text: &str) -> Result<Vec<RawSection>> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config_at(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if sections.iter().any(|s| s.name == name) {
                return Err(Error::config_at(
                    line_no,
                    format!("duplicate section [{name}]"),
                ));
            }
            sections.push(RawSection {
                name,
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config_at(line_no, format!("expected `key = value`, got '{line}'"))
        })?;
        let key = key.trim().to_string();
        let section = sections.last_mut().ok_or_else(|| {
            Error::config_at(line_no, format!("key '{key}' appears before any [section]"))
        })?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(Error::config_at(
                line_no,
                format!("duplicate key '{key}' in [{}]", section.name),
            ));
        }
        let values = parse_values(value.trim(), line_no)?;
        section.entries.push(RawEntry {
            key,
            line: line_no,
            values,
            consumed: std::cell::Cell::new(false),
        });
    }
    Ok(sections)
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_values(text: &str, line: usize) -> Result<Vec<RawValue>> {
    if text.is_empty() {
        return Err(Error::config_at(line, "missing value after `=`"));
    }
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    for c in text.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                current.push(c);
            }
            ',' if !in_quotes => {
                parts.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if in_quotes {
        return Err(Error::config_at(line, "unterminated string"));
    }
    parts.push(current);
    parts
        .into_iter()
        .map(|p| parse_scalar(p.trim(), line))
        .collect()
}

fn parse_scalar(token: &str, line: usize) -> Result<RawValue> {
    if token.is_empty() {
        return Err(Error::config_at(line, "empty value in list"));
    }
    if let Some(inner) = token.strip_prefix('"') {
        let inner = inner
            .strip_suffix('"')
            .ok_or_else(|| Error::config_at(line, "unterminated string"))?;
        return Ok(RawValue::Str(inner.to_string()));
    }
    if let Ok(i) = token.parse::<i64>() {
        return Ok(RawValue::Int(i));
    }
    if let Ok(r) = token.parse::<f64>() {
        return Ok(RawValue::Real(r));
    }
    Err(Error::config_at(
        line,
        format!("'{token}' is not an integer, real, or quoted string"),
    ))
}

// ---------------------------------------------------------------------------
// Typed section reader
// ---------------------------------------------------------------------------

struct SectionReader<'a> {
    section: &'a RawSection,
}

impl<'a> SectionReader<'a> {
    fn entry(&self, key: &str) -> Option<&'a RawEntry> {
        let e = self.section.entries.iter().find(|e| e.key == key);
        if let Some(e) = e {
            e.consumed.set(true);
        }
        e
    }

    fn has(&self, key: &str) -> bool {
        self.section.entries.iter().any(|e| e.key == key)
    }

    fn scalar(&self, e: &'a RawEntry) -> Result<&'a RawValue> {
        if e.values.len() != 1 {
            return Err(Error::config_at(
                e.line,
                format!("'{}' expects a single value, got a list", e.key),
            ));
        }
        Ok(&e.values[0])
    }

    fn string(&self, key: &str) -> Result<Option<(String, usize)>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match self.scalar(e)? {
                RawValue::Str(s) => Ok(Some((s.clone(), e.line))),
                _ => Err(Error::config_at(
                    e.line,
                    format!("'{key}' must be a quoted string"),
                )),
            },
        }
    }

    fn real(&self, key: &str) -> Result<Option<(f64, usize)>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match self.scalar(e)? {
                RawValue::Real(r) => Ok(Some((*r, e.line))),
                RawValue::Int(i) => Ok(Some((*i as f64, e.line))),
                RawValue::Str(_) => Err(Error::config_at(
                    e.line,
                    format!("'{key}' must be a number"),
                )),
            },
        }
    }

    fn count(&self, key: &str, minimum: usize) -> Result<Option<usize>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match self.scalar(e)? {
                RawValue::Int(i) if *i >= minimum as i64 => Ok(Some(*i as usize)),
                RawValue::Int(i) => Err(Error::config_at(
                    e.line,
                    format!("{key} = {i} violates {key} >= {minimum}"),
                )),
                _ => Err(Error::config_at(
                    e.line,
                    format!("'{key}' must be an integer"),
                )),
            },
        }
    }

    fn reals(&self, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::with_capacity(e.values.len());
                for v in &e.values {
                    match v {
                        RawValue::Real(r) => out.push(*r),
                        RawValue::Int(i) => out.push(*i as f64),
                        RawValue::Str(_) => {
                            return Err(Error::config_at(
                                e.line,
                                format!("'{key}' must be a list of numbers"),
                            ))
                        }
                    }
                }
                Ok(Some((out, e.line)))
            }
        }
    }

    fn counts(&self, key: &str, minimum: usize) -> Result<Option<Vec<usize>>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::with_capacity(e.values.len());
                for v in &e.values {
                    match v {
                        RawValue::Int(i) if *i >= minimum as i64 => out.push(*i as usize),
                        RawValue::Int(i) => {
                            return Err(Error::config_at(
                                e.line,
                                format!("{key} = {i} violates {key} >= {minimum}"),
                            ))
                        }
                        _ => {
                            return Err(Error::config_at(
                                e.line,
                                format!("'{key}' must be a list of integers"),
                            ))
                        }
                    }
                }
                Ok(Some(out))
            }
        }
    }

    fn unknown_keys(&self) -> Vec<(&str, usize)> {
        self.section
            .entries
            .iter()
            .filter(|e| !e.consumed.get())
            .map(|e| (e.key.as_str(), e.line))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

const SECTION_ORDER: [&str; 9] = [
    "experiment",
    "source",
    "target",
    "gan",
    "classifier",
    "pseudo_label",
    "grid",
    "centroid",
    "gradcheck",
];

/// Parses the text format into a validated [`ExperimentConfig`]. In strict
/// mode unknown sections and keys are errors; otherwise they are ignored.
pub fn parse_config(text: &str, strict: bool) -> Result<ExperimentConfig> {
    let sections = lex(text)?;
    for s in &sections {
        if strict && !SECTION_ORDER.contains(&s.name.as_str()) {
            return Err(Error::config_at(
                s.line,
                format!("unknown section [{}]", s.name),
            ));
        }
    }
    let find = |name: &str| -> Option<SectionReader<'_>> {
        sections
            .iter()
            .find(|s| s.name == name)
            .map(|section| SectionReader { section })
    };

    let experiment = find("experiment")
        .ok_or_else(|| Error::config("missing required section [experiment]"))?;
    let (kind_str, kind_line) = experiment
        .string("kind")?
        .ok_or_else(|| Error::config("missing required key 'kind' in [experiment]"))?;
    let kind = ExperimentKind::parse(&kind_str).ok_or_else(|| {
        Error::config_at(
            kind_line,
            format!(
                "kind = \"{kind_str}\" is not one of gan_train, oracle_centroid, \
                 verify_identity, adaptation, agnosticism, gradcheck"
            ),
        )
    })?;

    let mut cfg = ExperimentConfig::default_for(kind);

    if let Some(e) = experiment.entry("seeds") {
        let mut seeds = Vec::with_capacity(e.values.len());
        for v in &e.values {
            match v {
                RawValue::Int(i) if *i >= 0 => seeds.push(*i as u64),
                RawValue::Int(i) => {
                    return Err(Error::config_at(
                        e.line,
                        format!("seeds = {i} violates seeds >= 0"),
                    ))
                }
                _ => {
                    return Err(Error::config_at(
                        e.line,
                        "'seeds' must be a list of integers",
                    ))
                }
            }
        }
        cfg.seeds = seeds;
    }
    if let Some((dir, _)) = experiment.string("output_dir")? {
        cfg.output_dir = PathBuf::from(dir);
    }
    finish_section(&experiment, strict)?;

    if let Some(source) = find("source") {
        cfg.source = parse_domain(&source, strict)?;
    }

    if let Some(target) = find("target") {
        let preset = target.has("from_source_rotation") || target.has("from_source_shift");
        let explicit = target.has("family");
        if preset && explicit {
            return Err(Error::config_at(
                target.section.line,
                "[target] mixes from_source_* presets with an explicit domain",
            ));
        }
        if preset {
            let rotation_degrees = target
                .real("from_source_rotation")?
                .map(|(r, _)| r)
                .unwrap_or(0.0);
            let shift = target
                .reals("from_source_shift")?
                .map(|(v, _)| v)
                .unwrap_or_default();
            cfg.target = TargetConfig::FromSource {
                rotation_degrees,
                shift,
            };
            finish_section(&target, strict)?;
        } else {
            cfg.target = TargetConfig::Explicit(parse_domain(&target, strict)?);
        }
    }

    if let Some(gan) = find("gan") {
        if let Some(v) = gan.count("epochs", 1)? {
            cfg.gan.epochs = v;
        }
        if let Some(v) = gan.count("batch_size", 2)? {
            cfg.gan.batch_size = v;
        }
        if let Some(v) = gan.count("noise_dim", 1)? {
            cfg.gan.noise.dimension = v;
        }
        if let Some((v, line)) = gan.real("lr_generator")? {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config_at(
                    line,
                    format!("lr_generator = {v} violates lr_generator >= 0"),
                ));
            }
            cfg.gan.lr_generator = v;
        }
        if let Some((v, line)) = gan.real("lr_disc_source")? {
            ensure_positive("lr_disc_source", v, line)?;
            cfg.gan.lr_disc_source = v;
        }
        if let Some((v, line)) = gan.real("lr_disc_target")? {
            ensure_positive("lr_disc_target", v, line)?;
            cfg.gan.lr_disc_target = v;
        }
        if let Some(v) = gan.counts("generator_hidden", 1)? {
            cfg.gan.generator_hidden = v;
        }
        if let Some(v) = gan.counts("discriminator_hidden", 1)? {
            cfg.gan.discriminator_hidden = v;
        }
        if let Some((v, line)) = gan.string("loss_variant")? {
            cfg.gan.loss_variant = GeneratorLossVariant::parse(&v).ok_or_else(|| {
                Error::config_at(
                    line,
                    format!("loss_variant = \"{v}\" is not saturating or non_saturating"),
                )
            })?;
        }
        if let Some((v, line)) = gan.real("label_smoothing")? {
            if !(0.0..=0.2).contains(&v) {
                return Err(Error::config_at(
                    line,
                    format!("label_smoothing = {v} violates 0 <= label_smoothing <= 0.2"),
                ));
            }
            cfg.gan.label_smoothing = v;
        }
        if let Some(e) = gan.entry("n_fake_per_class") {
            match gan.scalar(e)? {
                RawValue::Int(i) if *i >= 0 => cfg.n_fake_per_class = Some(*i as usize),
                RawValue::Int(i) => {
                    return Err(Error::config_at(
                        e.line,
                        format!("n_fake_per_class = {i} violates n_fake_per_class >= 0"),
                    ))
                }
                _ => {
                    return Err(Error::config_at(
                        e.line,
                        "'n_fake_per_class' must be an integer",
                    ))
                }
            }
        }
        finish_section(&gan, strict)?;
    }

    if let Some(clf) = find("classifier") {
        if let Some(v) = clf.counts("hidden", 1)? {
            cfg.classifier.hidden = v;
        }
        if let Some(v) = clf.count("epochs", 1)? {
            cfg.classifier.epochs = v;
        }
        if let Some(v) = clf.count("batch_size", 1)? {
            cfg.classifier.batch_size = v;
        }
        if let Some((v, line)) = clf.real("learning_rate")? {
            ensure_positive("learning_rate", v, line)?;
            cfg.classifier.learning_rate = v;
        }
        finish_section(&clf, strict)?;
    }

    if let Some(pl) = find("pseudo_label") {
        if let Some((v, line)) = pl.string("method")? {
            cfg.pseudo_label.method = PseudoLabelMethod::parse(&v).ok_or_else(|| {
                Error::config_at(
                    line,
                    format!(
                        "method = \"{v}\" is not source_classifier or nearest_class_centroid"
                    ),
                )
            })?;
        }
        if let Some((v, line)) = pl.real("confidence_threshold")? {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config_at(
                    line,
                    format!(
                        "confidence_threshold = {v} violates 0 <= confidence_threshold <= 1"
                    ),
                ));
            }
            cfg.pseudo_label.confidence_threshold = v;
        }
        finish_section(&pl, strict)?;
    }

    if let Some(grid) = find("grid") {
        if let Some((v, _)) = grid.real("lo")? {
            cfg.grid.lo = v;
        }
        if let Some((v, _)) = grid.real("hi")? {
            cfg.grid.hi = v;
        }
        if let Some(v) = grid.count("bins", 2)? {
            cfg.grid.bins = Some(v);
        }
        finish_section(&grid, strict)?;
    }

    if let Some(cen) = find("centroid") {
        if let Some((v, line)) = cen.string("method")? {
            cfg.centroid.method = match v.as_str() {
                "mixture_sweep" => CentroidMethod::MixtureSweep,
                "simplex_descent" => CentroidMethod::SimplexDescent,
                _ => {
                    return Err(Error::config_at(
                        line,
                        format!("method = \"{v}\" is not mixture_sweep or simplex_descent"),
                    ))
                }
            };
        }
        if let Some(v) = cen.count("sweep_resolution", 11)? {
            cfg.centroid.sweep_resolution = v;
        }
        if let Some(v) = cen.count("descent_steps", 0)? {
            cfg.centroid.descent_steps = v;
        }
        if let Some((v, line)) = cen.real("descent_rate")? {
            ensure_positive("descent_rate", v, line)?;
            cfg.centroid.descent_rate = v;
        }
        if let Some((v, line)) = cen.real("tolerance")? {
            ensure_positive("tolerance", v, line)?;
            cfg.centroid.tolerance = v;
        }
        finish_section(&cen, strict)?;
    }

    if let Some(gc) = find("gradcheck") {
        if let Some(v) = gc.count("architectures", 1)? {
            cfg.gradcheck.architectures = v;
        }
        if let Some((v, line)) = gc.real("fd_step")? {
            ensure_positive("fd_step", v, line)?;
            cfg.gradcheck.fd_step = v;
        }
        if let Some((v, line)) = gc.real("tolerance")? {
            ensure_positive("tolerance", v, line)?;
            cfg.gradcheck.tolerance = v;
        }
        finish_section(&gc, strict)?;
    }

    cfg.validate()?;
    Ok(cfg)
}

fn ensure_positive(key: &str, v: f64, line: usize) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::config_at(
            line,
            format!("{key} = {v} violates {key} > 0"),
        ));
    }
    Ok(())
}

fn finish_section(reader: &SectionReader<'_>, strict: bool) -> Result<()> {
    if strict {
        if let Some((key, line)) = reader.unknown_keys().first() {
            return Err(Error::config_at(
                *line,
                format!("unknown key '{key}' in [{}]", reader.section.name),
            ));
        }
    }
    Ok(())
}

fn parse_domain(reader: &SectionReader<'_>, strict: bool) -> Result<DomainConfig> {
    let (family, family_line) = reader
        .string("family")?
        .ok_or_else(|| {
            Error::config_at(
                reader.section.line,
                format!("missing required key 'family' in [{}]", reader.section.name),
            )
        })?;
    let class_count = reader.count("class_count", 1)?;

    let spec_family = match family.as_str() {
        "gaussian_mixture" => {
            let class_count = class_count.ok_or_else(|| {
                Error::config_at(family_line, "gaussian_mixture requires 'class_count'")
            })?;
            let dim = reader.count("dim", 1)?.unwrap_or(2);
            let (flat_means, means_line) = reader.reals("means")?.ok_or_else(|| {
                Error::config_at(family_line, "gaussian_mixture requires 'means'")
            })?;
            if flat_means.len() != class_count * dim {
                return Err(Error::config_at(
                    means_line,
                    format!(
                        "means has {} values, expected class_count * dim = {}",
                        flat_means.len(),
                        class_count * dim
                    ),
                ));
            }
            let means: Vec<Vec<f64>> =
                flat_means.chunks(dim).map(|c| c.to_vec()).collect();
            let covariances = match (reader.reals("sigmas")?, reader.reals("covs")?) {
                (Some(_), Some((_, line))) => {
                    return Err(Error::config_at(
                        line,
                        "'sigmas' and 'covs' are mutually exclusive",
                    ))
                }
                (Some((sigmas, line)), None) => {
                    if sigmas.len() != class_count {
                        return Err(Error::config_at(
                            line,
                            format!(
                                "sigmas has {} values, expected class_count = {class_count}",
                                sigmas.len()
                            ),
                        ));
                    }
                    sigmas
                        .iter()
                        .map(|&sd| {
                            let mut cov = vec![0.0; dim * dim];
                            for d in 0..dim {
                                cov[d * dim + d] = sd * sd;
                            }
                            cov
                        })
                        .collect()
                }
                (None, Some((flat, line))) => {
                    if flat.len() != class_count * dim * dim {
                        return Err(Error::config_at(
                            line,
                            format!(
                                "covs has {} values, expected class_count * dim^2 = {}",
                                flat.len(),
                                class_count * dim * dim
                            ),
                        ));
                    }
                    flat.chunks(dim * dim).map(|c| c.to_vec()).collect()
                }
                (None, None) => {
                    return Err(Error::config_at(
                        family_line,
                        "gaussian_mixture requires 'sigmas' or 'covs'",
                    ))
                }
            };
            DomainFamily::GaussianMixture { means, covariances }
        }
        "two_moons" => {
            if let Some(c) = class_count {
                if c != 2 {
                    return Err(Error::config_at(
                        family_line,
                        format!("class_count = {c} violates two_moons class_count == 2"),
                    ));
                }
            }
            DomainFamily::TwoMoons {
                radius: reader.real("radius")?.map(|(v, _)| v).unwrap_or(2.0),
                noise_std: reader.real("noise_std")?.map(|(v, _)| v).unwrap_or(0.15),
            }
        }
        "ring" => {
            let (radii, radii_line) = reader
                .reals("radii")?
                .ok_or_else(|| Error::config_at(family_line, "ring requires 'radii'"))?;
            if let Some(c) = class_count {
                if c != radii.len() {
                    return Err(Error::config_at(
                        radii_line,
                        format!("radii has {} values, expected class_count = {c}", radii.len()),
                    ));
                }
            }
            DomainFamily::Ring {
                radii,
                noise_std: reader.real("noise_std")?.map(|(v, _)| v).unwrap_or(0.1),
            }
        }
        other => {
            return Err(Error::config_at(
                family_line,
                format!("family = \"{other}\" is not gaussian_mixture, two_moons, or ring"),
            ))
        }
    };

    let class_count = match &spec_family {
        DomainFamily::GaussianMixture { means, .. } => means.len(),
        DomainFamily::TwoMoons { .. } => 2,
        DomainFamily::Ring { radii, .. } => radii.len(),
    };
    let mut spec = DomainSpec {
        family: spec_family,
        class_count,
        transform: None,
    };
    let rotation = reader.real("rotation_degrees")?;
    let shift = reader.reals("shift")?;
    if rotation.is_some() || shift.is_some() {
        spec = spec.with_transform(
            rotation.map(|(v, _)| v).unwrap_or(0.0),
            shift.map(|(v, _)| v).unwrap_or_default(),
        );
    }
    let n_per_class = reader.count("n_per_class", 1)?.unwrap_or(150);
    let n_test_per_class = reader.count("n_test_per_class", 1)?.unwrap_or(200);
    finish_section(reader, strict)?;
    spec.validate()?;
    Ok(DomainConfig {
        spec,
        n_per_class,
        n_test_per_class,
    })
}
