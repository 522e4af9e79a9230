use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use faer::Mat;
use serde::Serialize;
use spiked_core::experiments::{
    export_report, parse_bulk, run, table_config, ConfigFile, DistributionName, ExperimentConfig, ExperimentKind,
    ExperimentReport, ModelSpec, RotationName, VarthetaChoice, DEFAULT_REPLICATES, FAST_REPLICATES,
};
use spiked_core::{
    eig_desc, estimate_spike, sample_covariance, statistic_t2, validate_spikes, Error, Hypothesis, Result,
    SpectralRegime, TestOutcome, VarthetaMode,
};

use crate::args::{ConfigArg, EstimateArgs, FigureArgs, Overrides, SimulateArgs, TableArgs, TestArgs, VarthetaArg};
use crate::data::read_matrix;
use crate::tables::{parse_cell, Cell, Table};

const DEFAULT_OUTPUT: &str = "output";

fn apply(file: &mut ConfigFile, o: &Overrides) {
    if let Some(seed) = o.seed {
        file.seed = seed;
    }
    if let Some(r) = o.replicates {
        file.replicates = r;
    }
    if let Some(level) = o.level {
        file.level = level;
    }
    if let Some(out) = &o.output {
        file.output = Some(out.display().to_string());
    }
}

fn write_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    if let Some(path) = output {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.5}"))
}

fn print_report(report: &ExperimentReport) {
    let prov = &report.summary.provenance;
    println!(
        "{}: p = {}, n = {}, c = {:.4}, replicates = {}, seed = {}, config sha256 {}",
        serde_json::to_value(report.summary.experiment)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        prov.p,
        prov.n,
        prov.ratio,
        prov.replicates,
        prov.seed,
        prov.config_sha256
    );
    for g in &report.summary.groups {
        let mut line = format!(
            "  group {} (d2 = {}, m = {}, sample rank {}): count {}, failures {}, mean {}, variance {}",
            g.group,
            g.spike,
            g.multiplicity,
            g.sample_rank,
            g.count,
            g.failures,
            fmt_opt(g.mean),
            fmt_opt(g.variance)
        );
        if let Some(p) = g.ks_p_value {
            let _ = write!(line, ", KS p {p:.3e}");
        }
        if let (Some(rate), Some(se)) = (g.rejection_rate, g.binomial_se_empirical) {
            let _ = write!(line, ", rejection rate {rate:.4} +/- {:.4}", 2.0 * se);
        }
        println!("{line}");
    }
}

pub fn validate_model(args: &ConfigArg) -> Result<()> {
    let cfg = ExperimentConfig::from_file(ConfigFile::load(&args.config)?)?;
    let c = cfg.ratio();
    println!("p = {}, n = {}, c = {c:.4}", cfg.model.p(), cfg.n);
    println!(
        "{:>10} {:>5} {:>6} {:>12} {:>12} {:>11} {:>10}",
        "spike", "mult", "side", "psi", "psi'", "separation", "detectable"
    );
    let reports = validate_spikes(&cfg.model, c);
    for r in &reports {
        println!(
            "{:>10} {:>5} {:>6} {:>12.6} {:>12.6} {:>11} {:>10}",
            r.value,
            r.multiplicity,
            format!("{:?}", r.side).to_lowercase(),
            r.psi,
            r.psi_prime,
            r.separation.map_or_else(|| "-".into(), |s| format!("{s:.4}")),
            if r.detectable { "yes" } else { "no" }
        );
    }
    match reports.iter().find(|r| !r.detectable) {
        Some(r) => Err(Error::SpikeNotDetectable(r.value, r.psi_prime)),
        None => Ok(()),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut file = ConfigFile::load(&args.config)?;
    apply(&mut file, &args.overrides);
    let cfg = ExperimentConfig::from_file(file)?;
    let report = run(&cfg)?;
    print_report(&report);
    let dir = cfg.output_path.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    let paths = export_report(&report, &dir)?;
    println!("wrote {}, {}, {}", paths.records.display(), paths.summary.display(), paths.histogram.display());
    Ok(())
}

fn sample_spectrum(data: &Mat<f64>) -> Result<spiked_core::SampleSpectrum> {
    let p = data.nrows();
    let b = sample_covariance(Mat::<f64>::identity(p, p).as_ref(), data.as_ref())?;
    eig_desc(b.as_ref())
}

#[derive(Serialize)]
struct SpikeEstimate {
    /// 1-based rank of the sample eigenvalue, largest first.
    rank: usize,
    eigenvalue: f64,
    d2_hat: f64,
}

#[derive(Serialize)]
struct EstimateOutput {
    p: usize,
    n: usize,
    spikes: Vec<SpikeEstimate>,
}

pub fn estimate(args: &EstimateArgs) -> Result<()> {
    let data = read_matrix(&args.data)?;
    let (p, n) = (data.nrows(), data.ncols());
    if args.n_spikes + args.n_lower_spikes > p {
        return Err(Error::DimensionError(format!(
            "asked for {} spikes from {p} variables",
            args.n_spikes + args.n_lower_spikes
        )));
    }
    if args.n_lower_spikes > 0 && p >= n {
        return Err(Error::DimensionError(format!("lower spikes need p < n, got p = {p}, n = {n}")));
    }
    let spectrum = sample_spectrum(&data)?;
    let ranks = (0..args.n_spikes).chain((p - args.n_lower_spikes..p).rev());
    let spikes = ranks
        .map(|i| {
            Ok(SpikeEstimate {
                rank: i + 1,
                eigenvalue: spectrum.eigenvalues()[i],
                d2_hat: estimate_spike(spectrum.eigenvalues(), i, n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(&EstimateOutput { p, n, spikes }, args.output.as_deref())
}

#[derive(Serialize)]
struct TestOutput {
    p: usize,
    n: usize,
    ratio: f64,
    #[serde(flatten)]
    outcome: TestOutcome,
}

pub fn test(args: &TestArgs) -> Result<()> {
    let data = read_matrix(&args.data)?;
    let basis = read_matrix(&args.basis)?;
    let (p, n) = (data.nrows(), data.ncols());
    if basis.nrows() != p {
        return Err(Error::DimensionError(format!("basis has {} rows, data has {p} variables", basis.nrows())));
    }
    let hypothesis = Hypothesis::new(basis)?;
    let bulk = parse_bulk(&args.bulk)?;
    // The tested spike is removed from the bulk dimension count.
    let regime = SpectralRegime::new((p - 1) as f64 / n as f64, bulk);
    let mode = match (args.vartheta, args.spike) {
        (VarthetaArg::Adaptive, _) => VarthetaMode::Adaptive,
        (VarthetaArg::Oracle, Some(d2)) => VarthetaMode::Oracle(d2),
        (VarthetaArg::Oracle, None) => return Err(Error::Config("--vartheta oracle needs --spike".into())),
    };
    if !(args.fourth_moment >= 1.0) {
        return Err(Error::Config(format!("--fourth-moment {} must be at least 1", args.fourth_moment)));
    }
    let spectrum = sample_spectrum(&data)?;
    let outcome = statistic_t2(&spectrum, &hypothesis, n, args.level, args.fourth_moment, &regime, mode)?;
    write_json(&TestOutput { p, n, ratio: regime.ratio, outcome }, args.output.as_deref())
}

/// Settings shared by every cell of a table run.
struct Base {
    file: Option<ConfigFile>,
    seed: u64,
    replicates: usize,
}

fn table_base(args: &TableArgs) -> Result<Base> {
    let file = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let replicates = args
        .overrides
        .replicates
        .or(args.fast.then_some(FAST_REPLICATES))
        .or(file.as_ref().map(|f| f.replicates))
        .unwrap_or(DEFAULT_REPLICATES);
    let seed = args.overrides.seed.or(file.as_ref().map(|f| f.seed)).unwrap_or(0);
    Ok(Base { file, seed, replicates })
}

fn cell_config(table: Table, cell: &Cell, base: &Base, overrides: &Overrides) -> Result<ExperimentConfig> {
    let kind = match table {
        Table::Size => ExperimentKind::SizeTable,
        Table::Power => ExperimentKind::PowerTable,
    };
    let seed = base.seed.wrapping_add(table.position(cell).unwrap_or(0) as u64);
    let mut file = table_config(kind, cell.d2, cell.c, cell.n, base.replicates, seed);
    if let Some(b) = &base.file {
        file.distribution = b.distribution;
        file.dof = b.dof;
        file.vartheta = b.vartheta;
        file.level = b.level;
        file.alternative_direction = b.alternative_direction;
    }
    if let Some(level) = overrides.level {
        file.level = level;
    }
    ExperimentConfig::from_file(file)
}

fn cell_dir(root: &Path, cell: &Cell) -> PathBuf {
    root.join(format!("d{}_c{}_n{}", cell.d2, cell.c, cell.n))
}

fn reproduce_table(table: Table, args: &TableArgs) -> Result<()> {
    let base = table_base(args)?;
    let cells = match &args.cell {
        Some(text) => vec![parse_cell(text)?],
        None => table.cells(),
    };
    let label = match table {
        Table::Size => "size",
        Table::Power => "power",
    };
    let mut csv = String::from("d2,c,n,p,replicates,seed,rate,binomial_se,failures,published\n");
    println!(
        "{:>6} {:>5} {:>5} {:>5} {:>6} {:>8} {:>9} {:>8} {:>10}",
        "d2", "c", "n", "p", "R", label, "2*SE", "failures", "published"
    );
    for cell in &cells {
        let cfg = cell_config(table, cell, &base, &args.overrides)?;
        let report = run(&cfg)?;
        let g = &report.summary.groups[0];
        let rate = g.rejection_rate.unwrap_or(f64::NAN);
        let se = g.binomial_se_empirical.unwrap_or(f64::NAN);
        let published = table.published(cell);
        println!(
            "{:>6} {:>5} {:>5} {:>5} {:>6} {:>8.4} {:>9.4} {:>8} {:>10}",
            cell.d2,
            cell.c,
            cell.n,
            cfg.model.p(),
            cfg.replicates,
            rate,
            2.0 * se,
            g.failures,
            published.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            cell.d2,
            cell.c,
            cell.n,
            cfg.model.p(),
            cfg.replicates,
            cfg.seed,
            rate,
            se,
            g.failures,
            published.map(|v| v.to_string()).unwrap_or_default()
        );
        if let Some(root) = &args.overrides.output {
            export_report(&report, &cell_dir(root, cell))?;
        }
    }
    if let Some(root) = &args.overrides.output {
        fs::create_dir_all(root)?;
        let name = match table {
            Table::Size => "table1.csv",
            Table::Power => "table2.csv",
        };
        fs::write(root.join(name), csv)?;
        println!("wrote {}", root.join(name).display());
    }
    Ok(())
}

pub fn reproduce_table1(args: &TableArgs) -> Result<()> {
    reproduce_table(Table::Size, args)
}

pub fn reproduce_table2(args: &TableArgs) -> Result<()> {
    reproduce_table(Table::Power, args)
}

fn figure_config(rotation: RotationName, args: &FigureArgs) -> ConfigFile {
    let o = &args.overrides;
    ConfigFile {
        experiment: ExperimentKind::CltFigure,
        distribution: DistributionName::Gaussian,
        dof: None,
        n: args.n.unwrap_or(1000),
        replicates: o.replicates.unwrap_or(if args.fast { FAST_REPLICATES } else { DEFAULT_REPLICATES }),
        seed: o.seed.unwrap_or(0),
        level: o.level.unwrap_or(0.05),
        output: None,
        vartheta: VarthetaChoice::Adaptive,
        groups: None,
        alternative_direction: 4,
        model: ModelSpec {
            p: Some(args.p.unwrap_or(100)),
            c: None,
            spikes: ["4:1", "3:2", "0.2:2", "0.1:1"].map(String::from).to_vec(),
            bulk: vec!["1:1".into()],
            tau: (rotation == RotationName::Bidiagonal).then_some(0.5),
            rotation,
            rotation_seed: None,
        },
    }
}

pub fn reproduce_figures(args: &FigureArgs) -> Result<()> {
    let root = args.overrides.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    for (name, rotation) in [("figure1", RotationName::Identity), ("figure2", RotationName::Bidiagonal)] {
        let cfg = ExperimentConfig::from_file(figure_config(rotation, args))?;
        let report = run(&cfg)?;
        println!("{name} ({} rotation)", format!("{rotation:?}").to_lowercase());
        print_report(&report);
        for g in &report.summary.groups {
            if let Some(law) = &g.law {
                println!(
                    "    group {}: center_n {:.5}, center {:.5}, predicted variance {:.5}",
                    g.group, law.center_n, law.center_limit, law.variance
                );
            }
        }
        let paths = export_report(&report, &root.join(name))?;
        println!("  wrote {}", paths.summary.parent().unwrap_or(&root).display());
    }
    Ok(())
}
