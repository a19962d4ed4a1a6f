use std::fs;
use std::io::Write;
use std::path::PathBuf;

use aen_shaping::io::{
    write_comparison_csv, write_constellation_csv, write_curves_csv, write_gaps_csv,
    write_mi_rows_csv, ConstellationRecord,
};
use aen_shaping::selftest::{self, SelfTestHooks, SelfTestReport};
use aen_shaping::{
    build_constellation, compare_families, gap_to_capacity_db, gray_labels, sweep, BitLabeling,
    CapacityCurve, Constellation, ConstellationCurve, Error, Estimator, Family, MiCurve, Scheme,
    SearchSettings, SweepRow, MAX_SYMBOLS,
};
use anyhow::Context;
use serde::Serialize;

use crate::args::{
    Command, EstimatorArgs, FamilyArg, Format, GridArgs, MethodArg, OutputArgs, Recipe, SchemeArg,
    SearchArgs, SetArgs,
};

pub enum Failure {
    /// Inconsistent or out-of-range configuration; exit status 2.
    Config(String),
    /// Numerical, search or I/O failure; exit status 3.
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(msg) => Failure::Config(msg),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn config_err<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    fn points(&self) -> Outcome<Vec<f64>> {
        let Grid { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite()) {
            return config_err("grid needs finite start/stop and a positive step");
        }
        if stop < start {
            return config_err(format!("grid stop {stop} is below start {start}"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    }
}

/// Every input that determines an output file; embedded in JSON outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub tool_version: &'static str,
    pub family: Option<FamilyArg>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub lambda: Option<f64>,
    pub scheme: Option<SchemeArg>,
    pub snr_db: Option<f64>,
    pub grid: Option<Grid>,
    pub target_rate: Option<Vec<f64>>,
    pub recipe: Option<Recipe>,
    pub curves: Option<bool>,
    pub method: Option<MethodArg>,
    pub n_samples: Option<u64>,
    pub n_nodes: Option<usize>,
    pub seed: Option<u64>,
    pub tol_db: Option<f64>,
    pub shards: usize,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    fn new(command: &'static str, shards: Option<usize>) -> Outcome<Self> {
        let shards = match shards {
            Some(0) => return config_err("shards must be at least 1"),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Ok(RunConfig {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            family: None,
            m: None,
            lambda: None,
            scheme: None,
            snr_db: None,
            grid: None,
            target_rate: None,
            recipe: None,
            curves: None,
            method: None,
            n_samples: None,
            n_nodes: None,
            seed: None,
            tol_db: None,
            shards,
            format: None,
            output: None,
        })
    }

    fn with_set(mut self, set: &SetArgs) -> Self {
        self.family = Some(set.family);
        self.m = set.m;
        self.lambda = (set.family == FamilyArg::Martinez).then_some(set.lambda);
        self.scheme = Some(set.scheme);
        self
    }

    fn with_estimator(mut self, est: &EstimatorArgs) -> Self {
        self.method = Some(est.method);
        self.n_samples = Some(est.n_samples);
        self.n_nodes = Some(est.n_nodes);
        self.seed = Some(est.seed);
        self
    }

    fn with_output(mut self, out: &OutputArgs) -> Self {
        self.format = Some(out.format);
        self.output = out.output.clone();
        self
    }

    fn with_search(mut self, search: &SearchArgs) -> Self {
        self.tol_db = Some(search.tol_db);
        self
    }

    fn with_grid(mut self, grid: &GridArgs) -> Self {
        self.grid = Some(Grid {
            start: grid.start,
            stop: grid.stop,
            step: grid.step,
        });
        self
    }

    fn estimator(&self) -> Estimator {
        match self.method {
            Some(MethodArg::Quadrature) => Estimator::Quadrature {
                n_nodes: self.n_nodes.unwrap_or_default(),
            },
            _ => Estimator::MonteCarlo {
                n_samples: self.n_samples.unwrap_or_default(),
                seed: self.seed.unwrap_or_default(),
            },
        }
    }

    fn search(&self) -> Outcome<SearchSettings> {
        let tol_db = self.tol_db.unwrap_or(0.01);
        if !(tol_db > 0.0 && tol_db.is_finite()) {
            return config_err(format!("tol-db must be positive, got {tol_db}"));
        }
        Ok(SearchSettings {
            tol_db,
            ..SearchSettings::default()
        })
    }

    fn targets(&self) -> Outcome<Vec<f64>> {
        let targets = self.target_rate.clone().unwrap_or_default();
        if targets.is_empty() {
            return config_err("at least one target rate is required");
        }
        if let Some(t) = targets.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return config_err(format!("target rates must be positive, got {t}"));
        }
        Ok(targets)
    }
}

fn scheme_of(s: SchemeArg) -> Scheme {
    match s {
        SchemeArg::Cm => Scheme::Cm,
        SchemeArg::Bicm => Scheme::Bicm,
    }
}

/// The signal set named on the command line, built and checked up front.
struct SignalSet {
    scheme: Scheme,
    cons: Option<Constellation>,
    labeling: Option<BitLabeling>,
}

impl SignalSet {
    fn build(cfg: &RunConfig) -> Outcome<Self> {
        let scheme = scheme_of(cfg.scheme.unwrap_or(SchemeArg::Cm));
        let family = match cfg.family {
            Some(FamilyArg::Uniform) => Family::Uniform,
            Some(FamilyArg::Martinez) => Family::Martinez,
            Some(FamilyArg::Log) => Family::Log,
            Some(FamilyArg::Capacity) | None => {
                if cfg.m.is_some() {
                    return config_err("--m does not apply to the capacity curve");
                }
                return Ok(SignalSet {
                    scheme,
                    cons: None,
                    labeling: None,
                });
            }
        };
        let Some(m) = cfg.m else {
            return config_err("--m is required for a constellation family");
        };
        if !(2..=MAX_SYMBOLS).contains(&m) {
            return config_err(format!("M must lie in 2..={MAX_SYMBOLS}, got {m}"));
        }
        if scheme == Scheme::Bicm && !m.is_power_of_two() {
            return config_err(format!("BICM needs M to be a power of 2, got {m}"));
        }
        let cons = build_constellation(family, m, cfg.lambda.unwrap_or(1.0))?;
        let labeling = match scheme {
            Scheme::Bicm => Some(gray_labels(m)?),
            Scheme::Cm => None,
        };
        Ok(SignalSet {
            scheme,
            cons: Some(cons),
            labeling,
        })
    }

    fn curve(&self, estimator: Estimator) -> Outcome<Box<dyn MiCurve + '_>> {
        Ok(match &self.cons {
            Some(c) => Box::new(ConstellationCurve::new(
                self.scheme,
                c,
                self.labeling.as_ref(),
                estimator,
            )?),
            None => Box::new(CapacityCurve {
                scheme: self.scheme,
            }),
        })
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a RunConfig,
    result: T,
}

fn render_json<T: Serialize>(cfg: &RunConfig, result: T) -> Outcome<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(&Document {
        config: cfg,
        result,
    })
    .context("serializing JSON output")?;
    buf.push(b'\n');
    Ok(buf)
}

fn render<T: Serialize>(
    cfg: &RunConfig,
    result: T,
    csv: impl FnOnce(&mut Vec<u8>, &T) -> aen_shaping::Result<()>,
) -> Outcome<Vec<u8>> {
    match cfg.format {
        Some(Format::Json) => render_json(cfg, result),
        _ => {
            let mut buf = Vec::new();
            csv(&mut buf, &result)?;
            Ok(buf)
        }
    }
}

fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> Outcome {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .context("writing to standard output")?;
        }
    }
    Ok(())
}

fn in_pool<T: Send>(shards: usize, job: impl FnOnce() -> Outcome<T> + Send) -> Outcome<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(shards)
        .build()
        .context("starting worker threads")?;
    pool.install(job)
}

fn recipe_sizes(recipe: Recipe) -> (Scheme, &'static [usize], &'static [f64]) {
    match recipe {
        Recipe::Fig1 => (
            Scheme::Cm,
            &[4, 8, 16, 32, 64, 128, 256],
            &[1.0, 2.0, 3.0, 4.0, 5.0],
        ),
        Recipe::Fig2 => (Scheme::Cm, &[256, 512, 1024, 2048], &[4.0]),
        Recipe::Fig3 => (
            Scheme::Bicm,
            &[4, 8, 16, 32, 64, 128, 256],
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        ),
    }
}

pub fn execute(command: Command) -> Outcome {
    match command {
        Command::Constellation { set, out } => {
            let cfg = RunConfig::new("constellation", Some(1))?
                .with_set(&set)
                .with_output(&out);
            if set.family == FamilyArg::Capacity {
                return config_err("the capacity curve has no constellation");
            }
            let s = SignalSet::build(&cfg)?;
            let cons = s.cons.expect("constellation family");
            let bytes = render(
                &cfg,
                ConstellationRecord::new(cons, s.labeling.as_ref()),
                |buf, rec| write_constellation_csv(buf, &rec.constellation, s.labeling.as_ref()),
            )?;
            emit(cfg.output.as_ref(), &bytes)
        }
        Command::Mi {
            set,
            snr_db,
            est,
            out,
        } => {
            let mut cfg = RunConfig::new("mi", est.shards)?
                .with_set(&set)
                .with_estimator(&est)
                .with_output(&out);
            if !snr_db.is_finite() {
                return config_err("snr-db must be finite");
            }
            cfg.snr_db = Some(snr_db);
            let s = SignalSet::build(&cfg)?;
            let curve = s.curve(cfg.estimator())?;
            let mi = in_pool(cfg.shards, || Ok(curve.mi_at(snr_db)?))?;
            let row = SweepRow { snr_db, mi };
            let bytes = render(&cfg, row, |buf, r| {
                write_mi_rows_csv(buf, std::slice::from_ref(r))
            })?;
            emit(cfg.output.as_ref(), &bytes)
        }
        Command::Sweep {
            set,
            grid,
            est,
            out,
        } => {
            let cfg = RunConfig::new("sweep", est.shards)?
                .with_set(&set)
                .with_grid(&grid)
                .with_estimator(&est)
                .with_output(&out);
            let points = cfg.grid.expect("grid recorded").points()?;
            let s = SignalSet::build(&cfg)?;
            let curve = s.curve(cfg.estimator())?;
            let result = in_pool(cfg.shards, || Ok(sweep(curve.as_ref(), &points)?))?;
            let bytes = render(&cfg, result, |buf, r| write_mi_rows_csv(buf, &r.rows))?;
            emit(cfg.output.as_ref(), &bytes)
        }
        Command::Gap {
            set,
            targets,
            search,
            est,
            out,
        } => {
            let mut cfg = RunConfig::new("gap", est.shards)?
                .with_set(&set)
                .with_search(&search)
                .with_estimator(&est)
                .with_output(&out);
            cfg.target_rate = Some(targets);
            let targets = cfg.targets()?;
            let settings = cfg.search()?;
            let s = SignalSet::build(&cfg)?;
            let curve = s.curve(cfg.estimator())?;
            let reports = in_pool(cfg.shards, || {
                targets
                    .iter()
                    .map(|&t| Ok(gap_to_capacity_db(curve.as_ref(), t, settings)?))
                    .collect::<Outcome<Vec<_>>>()
            })?;
            let bytes = render(&cfg, reports, |buf, r| write_gaps_csv(buf, r))?;
            emit(cfg.output.as_ref(), &bytes)
        }
        Command::Compare {
            recipe,
            targets,
            lambda,
            curves,
            grid,
            search,
            est,
            out,
        } => {
            let (scheme, sizes, default_targets) = recipe_sizes(recipe);
            let mut cfg = RunConfig::new("compare", est.shards)?
                .with_estimator(&est)
                .with_output(&out);
            cfg.recipe = Some(recipe);
            cfg.curves = Some(curves);
            cfg.scheme = Some(match scheme {
                Scheme::Cm => SchemeArg::Cm,
                Scheme::Bicm => SchemeArg::Bicm,
            });
            if !(lambda > 0.0 && lambda.is_finite()) {
                return config_err(format!("lambda must be positive, got {lambda}"));
            }
            cfg.lambda = Some(lambda);
            let estimator = cfg.estimator();
            if curves {
                if !targets.is_empty() {
                    return config_err("--curves takes an SNR grid, not target rates");
                }
                cfg = cfg.with_grid(&grid);
                let points = cfg.grid.expect("grid recorded").points()?;
                let result = in_pool(cfg.shards, || {
                    recipe_curves(scheme, sizes, lambda, estimator, &points)
                })?;
                let bytes = render(&cfg, result, |buf, r| write_curves_csv(buf, r))?;
                return emit(cfg.output.as_ref(), &bytes);
            }
            cfg = cfg.with_search(&search);
            cfg.target_rate = Some(if targets.is_empty() {
                default_targets.to_vec()
            } else {
                targets
            });
            let targets = cfg.targets()?;
            let settings = cfg.search()?;
            let rows = in_pool(cfg.shards, || {
                Ok(compare_families(
                    &targets, scheme, sizes, lambda, estimator, settings,
                )?)
            })?;
            let bytes = render(&cfg, rows, |buf, r| write_comparison_csv(buf, r))?;
            emit(cfg.output.as_ref(), &bytes)
        }
        Command::Selftest {
            format,
            output,
            shards,
            inject_non_gray,
            perturb_log,
        } => {
            let mut cfg = RunConfig::new("selftest", shards)?;
            cfg.format = format;
            cfg.output = output;
            if !perturb_log.is_finite() {
                return config_err("perturbation must be finite");
            }
            let hooks = SelfTestHooks {
                non_gray_labeling: inject_non_gray,
                log_perturbation: perturb_log,
            };
            let report = in_pool(cfg.shards, || Ok(selftest::run(hooks)?))?;
            let failed = report.failures().count();
            let bytes = match cfg.format {
                Some(Format::Json) => render_json(&cfg, &report)?,
                Some(Format::Csv) => selftest_csv(&report)?,
                None => selftest_text(&report).into_bytes(),
            };
            emit(cfg.output.as_ref(), &bytes)?;
            if failed > 0 {
                for c in report.failures() {
                    eprintln!(
                        "FAIL {}: {}: observed {}, expected {}",
                        c.module, c.invariant, c.observed, c.expected
                    );
                }
                return Err(Failure::Runtime(anyhow::anyhow!(
                    "{failed} of {} self-test checks failed",
                    report.checks.len()
                )));
            }
            Ok(())
        }
    }
}

fn recipe_curves(
    scheme: Scheme,
    sizes: &[usize],
    lambda: f64,
    estimator: Estimator,
    points: &[f64],
) -> Outcome<Vec<aen_shaping::SweepResult>> {
    let mut out = vec![sweep(&CapacityCurve { scheme }, points)?];
    for family in [Family::Log, Family::Martinez] {
        for &m in sizes {
            let cons = build_constellation(family, m, lambda)?;
            let labeling = match scheme {
                Scheme::Bicm => Some(gray_labels(m)?),
                Scheme::Cm => None,
            };
            let curve = ConstellationCurve::new(scheme, &cons, labeling.as_ref(), estimator)?;
            out.push(sweep(&curve, points)?);
        }
    }
    Ok(out)
}

fn selftest_text(report: &SelfTestReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        s.push_str(&format!("{tag} {}: {}\n", c.module, c.invariant));
    }
    let failed = report.failures().count();
    s.push_str(&format!(
        "{} checks, {} failed\n",
        report.checks.len(),
        failed
    ));
    s
}

fn selftest_csv(report: &SelfTestReport) -> Outcome<Vec<u8>> {
    #[derive(Serialize)]
    struct Row<'a> {
        module: &'a str,
        invariant: &'a str,
        passed: bool,
        observed: &'a str,
        expected: &'a str,
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for c in &report.checks {
            w.serialize(Row {
                module: c.module,
                invariant: &c.invariant,
                passed: c.passed,
                observed: &c.observed,
                expected: &c.expected,
            })
            .context("writing self-test CSV")?;
        }
        w.flush().context("writing self-test CSV")?;
    }
    Ok(buf)
}
