//! Seeded Monte Carlo harness: CLT histograms for projection norms, and the
//! size and power of the eigenspace test.
//!
//! Replicate `r` draws its data from stream `r` of the root seed, so any
//! replicate can be re-run in isolation and reports do not depend on how
//! many threads ran them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{projection_law, ProjectionLaw};
use crate::error::{Error, Result};
use crate::inference::{statistic_t2, vartheta, Hypothesis, VarthetaMode};
use crate::model::{
    build_model, factorize, require_detectable, BulkSpectrum, FactorDecomposition, PopulationModel, Rotation, Side,
    SpectralRegime,
};
use crate::randgen::{draw_entries_stream, kappa_x, EntryDistribution};
use crate::spectral::{eig_desc, match_spike_indices, projection_norm, sample_covariance};
use crate::stats::{histogram, ks_normal, lag1_autocorrelation, mean, sample_variance, HistogramBin};

pub const DEFAULT_REPLICATES: usize = 2000;
pub const FAST_REPLICATES: usize = 500;
pub const DEFAULT_LEVEL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CltFigure,
    SizeTable,
    PowerTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionName {
    Gaussian,
    Rademacher,
    Uniform,
    StudentT,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationName {
    Identity,
    Bidiagonal,
    RandomOrthogonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarthetaChoice {
    Adaptive,
    Oracle,
}

/// `[model]` table of a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// `"value:multiplicity"` entries.
    #[serde(default)]
    pub spikes: Vec<String>,
    /// `"eigenvalue:weight"` entries.
    #[serde(default = "default_bulk")]
    pub bulk: Vec<String>,
    #[serde(default = "default_rotation")]
    pub rotation: RotationName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
}

fn default_bulk() -> Vec<String> {
    vec!["1:1".into()]
}

fn default_rotation() -> RotationName {
    RotationName::Identity
}

fn default_distribution() -> DistributionName {
    DistributionName::Gaussian
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

fn default_vartheta() -> VarthetaChoice {
    VarthetaChoice::Adaptive
}

fn default_alternative() -> usize {
    4
}

/// Config file schema. Every key except `experiment`, `n` and `[model]`
/// has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentKind,
    #[serde(default = "default_distribution")]
    pub distribution: DistributionName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    pub n: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "default_vartheta")]
    pub vartheta: VarthetaChoice,
    /// 1-based spike groups for `clt_figure`; all groups when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<usize>>,
    /// 1-based coordinate that carries the spike under the alternative.
    #[serde(default = "default_alternative")]
    pub alternative_direction: usize,
    pub model: ModelSpec,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, used as the report's config hash.
    /// `output` is left out: where artifacts go does not change them.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(&Self { output: None, ..self.clone() }).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Parses `"value:multiplicity"`.
pub fn parse_spike(text: &str) -> Result<(f64, usize)> {
    let (v, m) = text
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("spike `{text}` must look like value:multiplicity")))?;
    let value = v.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad spike value in `{text}`")))?;
    let mult = m.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad multiplicity in `{text}`")))?;
    Ok((value, mult))
}

/// Parses `"eigenvalue:weight"`.
pub fn parse_atom(text: &str) -> Result<(f64, f64)> {
    let (t, w) = text
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("bulk atom `{text}` must look like eigenvalue:weight")))?;
    let t = t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad eigenvalue in `{text}`")))?;
    let w = w.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad weight in `{text}`")))?;
    Ok((t, w))
}

pub fn parse_bulk(atoms: &[String]) -> Result<BulkSpectrum> {
    let atoms = atoms.iter().map(|a| parse_atom(a)).collect::<Result<Vec<_>>>()?;
    BulkSpectrum::new(atoms)
}

impl ModelSpec {
    pub fn build(&self, n: usize) -> Result<PopulationModel> {
        let p = match (self.p, self.c) {
            (Some(p), None) => p,
            (None, Some(c)) if c > 0.0 => (c * n as f64).round() as usize,
            (Some(_), Some(_)) => return Err(Error::Config("give either model.p or model.c, not both".into())),
            _ => return Err(Error::Config("model.p or a positive model.c is required".into())),
        };
        let spikes = self.spikes.iter().map(|s| parse_spike(s)).collect::<Result<Vec<_>>>()?;
        let bulk = parse_bulk(&self.bulk)?;
        let rotation = match self.rotation {
            RotationName::Identity => Rotation::Identity,
            RotationName::Bidiagonal => Rotation::Bidiagonal {
                tau: self.tau.ok_or_else(|| Error::Config("rotation = bidiagonal needs model.tau".into()))?,
            },
            RotationName::RandomOrthogonal => Rotation::RandomOrthogonal { seed: self.rotation_seed.unwrap_or(0) },
        };
        build_model(&spikes, bulk, rotation, p)
    }
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub file: ConfigFile,
    pub experiment: ExperimentKind,
    pub model: PopulationModel,
    pub distribution: EntryDistribution,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    pub output_path: Option<PathBuf>,
    pub vartheta_mode: VarthetaChoice,
    /// 0-based spike groups.
    pub groups: Vec<usize>,
    /// 0-based alternative coordinate.
    pub alternative_direction: usize,
}

impl ExperimentConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self> {
        if file.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if file.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if !(file.level > 0.0 && file.level <= 1.0) {
            return Err(Error::Config(format!("level {} must lie in (0, 1]", file.level)));
        }
        let distribution = match file.distribution {
            DistributionName::Gaussian => EntryDistribution::Gaussian,
            DistributionName::Rademacher => EntryDistribution::Rademacher,
            DistributionName::Uniform => EntryDistribution::UniformScaled,
            DistributionName::StudentT => EntryDistribution::StudentT {
                dof: file.dof.ok_or_else(|| Error::Config("distribution = student_t needs dof".into()))?,
            },
        };
        distribution.validate()?;
        let model = file.model.build(file.n)?;
        let k = model.spikes().len();
        let groups = match &file.groups {
            None => (0..k).collect(),
            Some(g) => {
                if let Some(&bad) = g.iter().find(|&&x| x == 0 || x > k) {
                    return Err(Error::Config(format!("group {bad} out of range 1..={k}")));
                }
                g.iter().map(|x| x - 1).collect()
            }
        };
        if file.alternative_direction == 0 || file.alternative_direction > model.p() {
            return Err(Error::Config(format!(
                "alternative_direction {} out of range 1..={}",
                file.alternative_direction,
                model.p()
            )));
        }
        Ok(Self {
            experiment: file.experiment,
            distribution,
            n: file.n,
            replicates: file.replicates,
            seed: file.seed,
            level: file.level,
            output_path: file.output.as_ref().map(PathBuf::from),
            vartheta_mode: file.vartheta,
            groups,
            alternative_direction: file.alternative_direction - 1,
            model,
            file,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_file(ConfigFile::from_toml(text)?)
    }

    pub fn ratio(&self) -> f64 {
        self.model.p() as f64 / self.n as f64
    }
}

/// One statistic from one replicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub replicate: usize,
    /// 1-based spike group.
    pub group: usize,
    /// Raw statistic: `‖ξ‖²` for CLT runs, `√n T₁` for tests. `None` when
    /// the replicate failed (see `failure`).
    pub value: Option<f64>,
    /// Standardized statistic: `√n(‖ξ‖² − center_n)/√variance`, or `T₂`.
    pub standardized: Option<f64>,
    pub reject: Option<bool>,
    pub spike_estimate: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: usize,
    pub spike: f64,
    pub multiplicity: usize,
    /// 1-based sample rank used for the statistic.
    pub sample_rank: usize,
    /// CLT runs: the projection law used for centering and scaling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<ProjectionLaw>,
    /// Test runs: `ϑ` at the true spike, the predicted variance of `√n T₁`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vartheta_true: Option<f64>,
    pub count: usize,
    pub failures: usize,
    pub raw_mean: Option<f64>,
    pub raw_variance: Option<f64>,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub variance_defined: bool,
    pub ks_statistic: Option<f64>,
    pub ks_p_value: Option<f64>,
    pub lag1_autocorrelation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejections: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection_rate: Option<f64>,
    /// `√(α(1 − α)/R)` at the nominal level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binomial_se_nominal: Option<f64>,
    /// `√(r(1 − r)/R)` at the observed rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binomial_se_empirical: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub replicates: usize,
    pub default_replicates: usize,
    pub rng: String,
    pub crate_version: String,
    pub p: usize,
    pub n: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub distribution: EntryDistribution,
    pub level: f64,
    pub provenance: Provenance,
    pub groups: Vec<GroupSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<Record>,
    pub summary: Summary,
    /// Histogram of the standardized statistic per group (1-based).
    pub histograms: Vec<(usize, Vec<HistogramBin>)>,
}

impl ExperimentReport {
    pub fn group(&self, group: usize) -> Option<&GroupSummary> {
        self.summary.groups.iter().find(|g| g.group == group)
    }

    /// Standardized values of one group, skipping failed replicates.
    pub fn standardized(&self, group: usize) -> Vec<f64> {
        self.records.iter().filter(|r| r.group == group).filter_map(|r| r.standardized).collect()
    }

    pub fn values(&self, group: usize) -> Vec<f64> {
        self.records.iter().filter(|r| r.group == group).filter_map(|r| r.value).collect()
    }
}

fn provenance(config: &ExperimentConfig) -> Provenance {
    Provenance {
        config_sha256: config.file.sha256(),
        seed: config.seed,
        replicates: config.replicates,
        default_replicates: DEFAULT_REPLICATES,
        rng: "ChaCha8, seeded by `seed`, stream = replicate index".into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        p: config.model.p(),
        n: config.n,
        ratio: config.ratio(),
    }
}

fn summarize(group: usize, records: &[Record], level: Option<f64>) -> (GroupSummary, Vec<HistogramBin>) {
    let mine: Vec<&Record> = records.iter().filter(|r| r.group == group).collect();
    let raw: Vec<f64> = mine.iter().filter_map(|r| r.value).collect();
    let std: Vec<f64> = mine.iter().filter_map(|r| r.standardized).collect();
    let failures = mine.iter().filter(|r| r.failure.is_some()).count();
    let ks = ks_normal(&std, 0.0, 1.0);
    let total = mine.len();
    let (rejections, rate, se_nom, se_emp) = match level {
        Some(a) => {
            let k = mine.iter().filter(|r| r.reject == Some(true)).count();
            let r = k as f64 / total as f64;
            (Some(k), Some(r), Some((a * (1.0 - a) / total as f64).sqrt()), Some((r * (1.0 - r) / total as f64).sqrt()))
        }
        None => (None, None, None, None),
    };
    let variance = sample_variance(&std);
    let summary = GroupSummary {
        group,
        spike: f64::NAN,
        multiplicity: 0,
        sample_rank: 0,
        law: None,
        vartheta_true: None,
        count: std.len(),
        failures,
        raw_mean: (!raw.is_empty()).then(|| mean(&raw)),
        raw_variance: sample_variance(&raw),
        mean: (!std.is_empty()).then(|| mean(&std)),
        variance,
        variance_defined: variance.is_some(),
        ks_statistic: ks.map(|k| k.statistic),
        ks_p_value: ks.map(|k| k.p_value),
        lag1_autocorrelation: lag1_autocorrelation(&std),
        rejections,
        rejection_rate: rate,
        binomial_se_nominal: se_nom,
        binomial_se_empirical: se_emp,
    };
    (summary, histogram(&std))
}

fn init_threads() {
    // Replicates are the unit of parallelism; keep each decomposition serial.
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Projection-norm CLT for the configured spike groups.
pub fn run_clt(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let model = &config.model;
    let n = config.n;
    require_detectable(model, config.ratio())?;
    let ranks = match_spike_indices(model, n)?;
    let factor = factorize(model);
    let limit = SpectralRegime::limit(model, n);
    let fourth = config.distribution.fourth_moment();
    let mut laws = Vec::with_capacity(config.groups.len());
    for &k in &config.groups {
        let spike = &model.spikes()[k];
        let kappa = kappa_x(factor.u1(), model.group_slots(k), fourth)?;
        let finite = SpectralRegime::finite_for_group(model, k, n)?;
        laws.push(projection_law(spike.value, spike.multiplicity, kappa, &limit, &finite)?);
    }
    init_threads();
    let sqrt_n = (n as f64).sqrt();
    let per_replicate: Vec<Result<Vec<Record>>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let x = draw_entries_stream(&config.distribution, model.p(), n, config.seed, r as u64)?;
            let b = sample_covariance(factor.t(), x.entries.as_ref())?;
            let s = eig_desc(b.as_ref())?;
            config
                .groups
                .iter()
                .zip(&laws)
                .map(|(&k, law)| {
                    let slots = model.group_slots(k);
                    let i = ranks[k].start;
                    let norm = projection_norm(factor.v().subcols(slots.start, slots.len()), s.eigenvector(i))?;
                    Ok(Record {
                        replicate: r,
                        group: k + 1,
                        value: Some(norm),
                        standardized: Some(sqrt_n * (norm - law.center_n) / law.variance.sqrt()),
                        reject: None,
                        spike_estimate: None,
                        failure: None,
                    })
                })
                .collect()
        })
        .collect();
    let mut records = Vec::with_capacity(config.replicates * config.groups.len());
    for rep in per_replicate {
        records.extend(rep?);
    }
    let mut groups = Vec::new();
    let mut histograms = Vec::new();
    for (&k, law) in config.groups.iter().zip(laws) {
        let (mut g, h) = summarize(k + 1, &records, None);
        let spike = &model.spikes()[k];
        g.spike = spike.value;
        g.multiplicity = spike.multiplicity;
        g.sample_rank = ranks[k].start + 1;
        g.law = Some(law);
        groups.push(g);
        histograms.push((k + 1, h));
    }
    Ok(ExperimentReport {
        records,
        summary: Summary {
            experiment: ExperimentKind::CltFigure,
            distribution: config.distribution,
            level: config.level,
            provenance: provenance(config),
            groups,
        },
        histograms,
    })
}

fn single_upper_spike(model: &PopulationModel) -> Result<f64> {
    match model.spikes() {
        [s] if s.multiplicity == 1 && s.side == Side::Upper => Ok(s.value),
        _ => Err(Error::Config("size and power runs need exactly one upper spike of multiplicity 1".into())),
    }
}

fn run_test(
    config: &ExperimentConfig,
    data_factor: &FactorDecomposition,
    kind: ExperimentKind,
) -> Result<ExperimentReport> {
    let model = &config.model;
    let n = config.n;
    let d2 = single_upper_spike(model)?;
    require_detectable(model, config.ratio())?;
    let null_factor = factorize(model);
    let hypothesis = Hypothesis::new(null_factor.v1().to_owned())?;
    let regime = SpectralRegime::finite_for_group(model, 0, n)?;
    let fourth = config.distribution.fourth_moment();
    let mode = match config.vartheta_mode {
        VarthetaChoice::Adaptive => VarthetaMode::Adaptive,
        VarthetaChoice::Oracle => VarthetaMode::Oracle(d2),
    };
    let vartheta_true = vartheta(d2, regime.ratio, &regime.bulk, fourth)?;
    init_threads();
    let sqrt_n = (n as f64).sqrt();
    let per_replicate: Vec<Result<Record>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let x = draw_entries_stream(&config.distribution, model.p(), n, config.seed, r as u64)?;
            let b = sample_covariance(data_factor.t(), x.entries.as_ref())?;
            let s = eig_desc(b.as_ref())?;
            match statistic_t2(&s, &hypothesis, n, config.level, fourth, &regime, mode) {
                Ok(o) => Ok(Record {
                    replicate: r,
                    group: 1,
                    value: Some(sqrt_n * o.t1),
                    standardized: Some(o.t2),
                    reject: Some(o.reject),
                    spike_estimate: Some(o.spike_estimate),
                    failure: None,
                }),
                // The estimate fell into the bulk: no valid statistic, counted
                // as a non-rejection and reported as a failure.
                Err(e @ (Error::VarianceError(_) | Error::DivergentEstimate | Error::NoBulkError)) => Ok(Record {
                    replicate: r,
                    group: 1,
                    value: None,
                    standardized: None,
                    reject: Some(false),
                    spike_estimate: None,
                    failure: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect();
    let records = per_replicate.into_iter().collect::<Result<Vec<_>>>()?;
    let (mut g, h) = summarize(1, &records, Some(config.level));
    g.spike = d2;
    g.multiplicity = 1;
    g.sample_rank = 1;
    g.vartheta_true = Some(vartheta_true);
    Ok(ExperimentReport {
        records,
        summary: Summary {
            experiment: kind,
            distribution: config.distribution,
            level: config.level,
            provenance: provenance(config),
            groups: vec![g],
        },
        histograms: vec![(1, h)],
    })
}

/// Type I error of `T₂` under the null model.
pub fn run_size(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let factor = factorize(&config.model);
    run_test(config, &factor, ExperimentKind::SizeTable)
}

/// Rejection rate of `T₂` when the data's spike direction is moved to the
/// configured alternative coordinate while the test keeps the null basis.
pub fn run_power(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let factor = factorize(&config.model).with_swapped_coordinates(0, config.alternative_direction);
    run_test(config, &factor, ExperimentKind::PowerTable)
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.experiment {
        ExperimentKind::CltFigure => run_clt(config),
        ExperimentKind::SizeTable => run_size(config),
        ExperimentKind::PowerTable => run_power(config),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn records_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("replicate,group,value,standardized,reject,spike_estimate,failure\n");
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.replicate,
            r.group,
            opt(r.value),
            opt(r.standardized),
            r.reject.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.spike_estimate),
            r.failure.as_deref().map(|f| format!("\"{}\"", f.replace('"', "\"\""))).unwrap_or_default()
        );
    }
    out
}

pub fn histogram_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("group,bin_left,bin_right,count,density,normal_density\n");
    for (g, bins) in &report.histograms {
        for b in bins {
            let _ = writeln!(out, "{g},{},{},{},{},{}", b.left, b.right, b.count, b.density, b.normal_density);
        }
    }
    out
}

pub fn summary_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportPaths {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub histogram: PathBuf,
}

/// Writes `records.csv`, `summary.json` and `hist.csv` under `dir`.
pub fn export_report(report: &ExperimentReport, dir: &Path) -> Result<ExportPaths> {
    fs::create_dir_all(dir)?;
    let paths = ExportPaths {
        records: dir.join("records.csv"),
        summary: dir.join("summary.json"),
        histogram: dir.join("hist.csv"),
    };
    fs::write(&paths.records, records_csv(report))?;
    fs::write(&paths.summary, summary_json(report))?;
    fs::write(&paths.histogram, histogram_csv(report))?;
    Ok(paths)
}

/// Table-1/Table-2 population: one spike `d²` at coordinate 1 over a bulk
/// of halves at 2 and 1, `p = round(c n)`.
pub fn table_config(kind: ExperimentKind, d2: f64, c: f64, n: usize, replicates: usize, seed: u64) -> ConfigFile {
    ConfigFile {
        experiment: kind,
        distribution: DistributionName::Gaussian,
        dof: None,
        n,
        replicates,
        seed,
        level: DEFAULT_LEVEL,
        output: None,
        vartheta: VarthetaChoice::Adaptive,
        groups: None,
        alternative_direction: 4,
        model: ModelSpec {
            p: None,
            c: Some(c),
            spikes: vec![format!("{d2}:1")],
            bulk: vec!["2:0.5".into(), "1:0.5".into()],
            rotation: RotationName::Identity,
            tau: None,
            rotation_seed: None,
        },
    }
}
