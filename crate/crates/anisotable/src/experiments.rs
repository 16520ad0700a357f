//! Experiment kinds: parameters, execution and CSV output.

use std::path::Path;

use anisotable_core::cone::ConeDomain;
use anisotable_core::estimators::{
    factorization_ratio, overshoot_conditional_check, survival_curve, survival_exponent_space,
    survival_exponent_time, yaglom_convergence, BinSpec, EstimateCI, ExponentFit,
    OvershootBins, SurvivalPoint,
};
use anisotable_core::exec::{RecordLog, Runner, StreamUse, BATCH_SIZE};
use anisotable_core::model::StableModel;
use anisotable_core::point::Point;
use anisotable_core::sampler::{scheme_bias_probe, PathSampler};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};
use crate::formats::point;
use crate::pool::WorkerPool;

/// One CSV file written by a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub rows: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub outputs: Vec<OutputFile>,
    pub streams: Vec<StreamUse>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn coords(p: &Point) -> impl Iterator<Item = String> + '_ {
    p.as_slice().iter().map(|v| fmt(*v))
}

fn axis_header(prefix: &str, dim: usize) -> impl Iterator<Item = String> + '_ {
    (1..=dim).map(move |i| format!("{prefix}_{i}"))
}

struct CsvSink<'a> {
    dir: &'a Path,
    outputs: Vec<OutputFile>,
}

impl CsvSink<'_> {
    fn write(&mut self, name: &str, header: Vec<String>, rows: Vec<Vec<String>>) -> AppResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for r in &rows {
            w.write_record(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| AppError::Config(format!("CSV buffer: {e}")))?;
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).map_err(|e| AppError::io(&path, e))?;
        self.outputs.push(OutputFile {
            file: name.to_string(),
            sha256: sha256_hex(&bytes),
            rows: rows.len() as u64,
        });
        Ok(())
    }

    fn survival(&mut self, dim: usize, points: &[SurvivalPoint]) -> AppResult<()> {
        let header = axis_header("x", dim)
            .chain(["t", "p_hat", "se", "n"].map(String::from))
            .collect();
        let rows = points
            .iter()
            .map(|p| {
                coords(&p.x)
                    .chain([
                        fmt(p.t),
                        fmt(p.estimate.value),
                        fmt(p.estimate.stderr),
                        p.estimate.n.to_string(),
                    ])
                    .collect()
            })
            .collect();
        self.write("survival.csv", header, rows)
    }

    fn exponents(&mut self, rows: &[(&str, EstimateCI, usize)]) -> AppResult<()> {
        let header = ["target", "estimate", "ci_lo", "ci_hi", "n_points"]
            .map(String::from)
            .to_vec();
        let rows = rows
            .iter()
            .map(|(name, e, k)| {
                vec![name.to_string(), fmt(e.value), fmt(e.ci_lo), fmt(e.ci_hi), k.to_string()]
            })
            .collect();
        self.write("exponent.csv", header, rows)
    }
}

fn params<T: DeserializeOwned>(config: &ExperimentConfig) -> AppResult<T> {
    serde_json::from_value(config.params.clone())
        .map_err(|e| AppError::Config(format!("params: {e}")))
}

fn need_n(n: u64) -> AppResult<u64> {
    if n == 0 {
        return Err(AppError::Config("params.n must be at least 1".into()));
    }
    Ok(n)
}

fn need_grid(g: &[f64], what: &str) -> AppResult<()> {
    if g.is_empty() {
        return Err(AppError::Config(format!("params.{what} must be nonempty")));
    }
    Ok(())
}

fn points(list: &[Vec<f64>], what: &str, dim: usize) -> AppResult<Vec<Point>> {
    if list.is_empty() {
        return Err(AppError::Config(format!("params.{what} must be nonempty")));
    }
    list.iter()
        .map(|p| {
            let q = point(p, what)?;
            if q.dim() != dim {
                return Err(AppError::Config(format!("params.{what}: expected {dim} coordinates")));
            }
            Ok(q)
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleParams {
    start: Vec<f64>,
    t: f64,
    n: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SurvivalParams {
    starts: Vec<Vec<f64>>,
    t_grid: Vec<f64>,
    n: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentTimeParams {
    start: Vec<f64>,
    t_grid: Vec<f64>,
    n: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentSpaceParams {
    direction: Vec<f64>,
    s_grid: Vec<f64>,
    t: f64,
    n: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorizationParams {
    x_list: Vec<Vec<f64>>,
    y_list: Vec<Vec<f64>>,
    t: f64,
    n: u64,
    #[serde(default)]
    bandwidth: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OvershootParams {
    start: Vec<f64>,
    t_max: f64,
    n: u64,
    distance_edges: Vec<f64>,
    depth_bins: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct YaglomParams {
    starts: Vec<Vec<f64>>,
    t_grid: Vec<f64>,
    n: u64,
    window_lo: Vec<f64>,
    window_hi: Vec<f64>,
    bins: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZolotarevParams {
    /// Optional Monte Carlo cross-check of `rho` from `<X_1, normal>`.
    #[serde(default)]
    mc_samples: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BiasProbeParams {
    n: u64,
}

/// Run `kind` as configured, writing CSV files into `out_dir`.
pub fn run(
    kind: ExperimentKind,
    config: &ExperimentConfig,
    master_seed: u64,
    workers: usize,
    out_dir: &Path,
) -> AppResult<RunOutcome> {
    std::fs::create_dir_all(out_dir).map_err(|e| AppError::io(out_dir, e))?;
    let model = config.model.build()?;
    let dim = model.dim();
    let domain = config.domain.build(dim)?;
    let pool = WorkerPool::new(workers);
    let runner = Runner::new(&pool, master_seed).with_policy(config.scheme.policy()?);
    let mut out = CsvSink {
        dir: out_dir,
        outputs: Vec::new(),
    };
    match kind {
        ExperimentKind::Sample => sample(config, &runner, &model, &domain, &mut out)?,
        ExperimentKind::Survival => {
            let p: SurvivalParams = params(config)?;
            need_grid(&p.t_grid, "t_grid")?;
            let mut rows = Vec::new();
            for x in points(&p.starts, "starts", dim)? {
                rows.extend(survival_curve(&runner, &model, &domain, &x, &p.t_grid, need_n(p.n)?)?);
            }
            out.survival(dim, &rows)?;
        }
        ExperimentKind::ExponentTime => {
            let p: ExponentTimeParams = params(config)?;
            let x = points(&[p.start], "start", dim)?[0];
            let fit = survival_exponent_time(&runner, &model, &domain, &x, &p.t_grid, need_n(p.n)?)?;
            write_fit(&mut out, dim, &fit, "beta_over_alpha", model.alpha())?;
        }
        ExperimentKind::ExponentSpace => {
            let p: ExponentSpaceParams = params(config)?;
            let u = points(&[p.direction], "direction", dim)?[0];
            let fit = survival_exponent_space(&runner, &model, &domain, &u, &p.s_grid, p.t, need_n(p.n)?)?;
            write_fit(&mut out, dim, &fit, "beta", 1.0)?;
        }
        ExperimentKind::Factorization => {
            let p: FactorizationParams = params(config)?;
            let xs = points(&p.x_list, "x_list", dim)?;
            let ys = points(&p.y_list, "y_list", dim)?;
            let bw = match &p.bandwidth {
                Some(b) => Some(points(std::slice::from_ref(b), "bandwidth", dim)?[0]),
                None => None,
            };
            let table = factorization_ratio(&runner, &model, &domain, &xs, &ys, p.t, need_n(p.n)?, bw)?;
            let rows = table
                .ratio
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(move |(j, r)| vec![i.to_string(), j.to_string(), fmt(*r)])
                })
                .collect();
            out.write("ratio.csv", ["x_id", "y_id", "ratio"].map(String::from).to_vec(), rows)?;
        }
        ExperimentKind::Overshoot => {
            let p: OvershootParams = params(config)?;
            let x = points(&[p.start], "start", dim)?[0];
            let bins = OvershootBins {
                distance_edges: p.distance_edges,
                depth_bins: p.depth_bins,
            };
            let rep = overshoot_conditional_check(&runner, &model, &domain, &x, p.t_max, need_n(p.n)?, &bins)?;
            let mut rows: Vec<Vec<String>> = rep
                .bins
                .iter()
                .map(|b| vec![fmt(b.lo), fmt(b.hi), b.exits.to_string(), fmt(b.tv)])
                .collect();
            let edges = &bins.distance_edges;
            rows.push(vec![
                fmt(edges[0]),
                fmt(edges[edges.len() - 1]),
                rep.exits_in_range.to_string(),
                fmt(rep.aggregate_tv),
            ]);
            out.write(
                "overshoot.csv",
                ["bin_lo", "bin_hi", "exits", "tv"].map(String::from).to_vec(),
                rows,
            )?;
        }
        ExperimentKind::Yaglom => {
            let p: YaglomParams = params(config)?;
            let starts = points(&p.starts, "starts", dim)?;
            need_grid(&p.t_grid, "t_grid")?;
            let spec = BinSpec::new(
                points(&[p.window_lo], "window_lo", dim)?[0],
                points(&[p.window_hi], "window_hi", dim)?[0],
                p.bins,
            )?;
            let table = yaglom_convergence(&runner, &model, &domain, &starts, &p.t_grid, need_n(p.n)?, &spec)?;
            for (s, t, hist) in &table.histograms {
                let header = axis_header("bin_lo", dim)
                    .chain(axis_header("bin_hi", dim))
                    .chain(std::iter::once("mass".to_string()))
                    .collect();
                let rows = (0..spec.len())
                    .map(|b| {
                        let (lo, hi) = spec.bounds(b);
                        coords(&lo)
                            .chain(coords(&hi))
                            .chain(std::iter::once(fmt(hist.masses[b])))
                            .collect()
                    })
                    .collect();
                out.write(&format!("histogram_start{s}_t{}.csv", fmt(*t)), header, rows)?;
            }
            let mut rows: Vec<Vec<String>> = table
                .across_time
                .iter()
                .map(|(a, b, tv)| vec!["time".into(), fmt(*a), fmt(*b), fmt(*tv)])
                .collect();
            rows.extend(
                table
                    .across_starts
                    .iter()
                    .map(|(a, b, tv)| vec!["start".into(), a.to_string(), b.to_string(), fmt(*tv)]),
            );
            out.write(
                "yaglom_tv.csv",
                ["comparison", "a", "b", "tv"].map(String::from).to_vec(),
                rows,
            )?;
        }
        ExperimentKind::Zolotarev => {
            let p: ZolotarevParams = params(config)?;
            zolotarev(&runner, &model, &domain, p.mc_samples, &mut out)?;
        }
        ExperimentKind::BiasProbe => {
            let p: BiasProbeParams = params(config)?;
            let scheme = runner.policy().resolve(&model, 1.0)?;
            let mut rng = runner.aux_rng();
            let rep = scheme_bias_probe(&model, &scheme, need_n(p.n)? as usize, &mut rng)?;
            let mut rows = vec![vec![
                "scaling".to_string(),
                fmt(rep.scaling.statistic),
                fmt(rep.scaling.p_value),
                fmt(rep.suggested_eps),
                fmt(rep.suggested_delta),
            ]];
            if let Some(o) = rep.oracle {
                rows.push(vec![
                    "oracle".to_string(),
                    fmt(o.statistic),
                    fmt(o.p_value),
                    fmt(rep.suggested_eps),
                    fmt(rep.suggested_delta),
                ]);
            }
            out.write(
                "bias.csv",
                ["test", "statistic", "p_value", "suggested_eps", "suggested_delta"]
                    .map(String::from)
                    .to_vec(),
                rows,
            )?;
        }
    }
    Ok(RunOutcome {
        outputs: out.outputs,
        streams: runner.streams(),
    })
}

fn write_fit(out: &mut CsvSink<'_>, dim: usize, fit: &ExponentFit, target: &str, alpha: f64) -> AppResult<()> {
    out.survival(dim, &fit.points)?;
    let mut rows = vec![(target, fit.estimate, fit.n_points())];
    if target == "beta_over_alpha" {
        let e = fit.estimate;
        let scaled = EstimateCI {
            value: e.value * alpha,
            stderr: e.stderr * alpha,
            ci_lo: e.ci_lo * alpha,
            ci_hi: e.ci_hi * alpha,
            ..e
        };
        rows.push(("beta", scaled, fit.n_points()));
    }
    out.exponents(&rows)
}

fn sample(
    config: &ExperimentConfig,
    runner: &Runner<'_, WorkerPool>,
    model: &StableModel,
    domain: &ConeDomain,
    out: &mut CsvSink<'_>,
) -> AppResult<()> {
    let p: SampleParams = params(config)?;
    let dim = model.dim();
    let x0 = points(&[p.start], "start", dim)?[0];
    let sampler = PathSampler::new(model, runner.policy().resolve(model, p.t)?)?;
    let log = runner.simulate(&sampler, domain, x0, p.t, need_n(p.n)?, RecordLog::default)?;
    let header = ["batch", "path_id", "survived", "exit_time"]
        .map(String::from)
        .into_iter()
        .chain(axis_header("pre_exit", dim))
        .chain(axis_header("post_exit", dim))
        .chain(std::iter::once("exit_kind".to_string()))
        .collect();
    let rows = log
        .0
        .iter()
        .map(|(id, r)| {
            [
                (id / BATCH_SIZE).to_string(),
                id.to_string(),
                r.survived.to_string(),
                fmt(r.exit_time),
            ]
            .into_iter()
            .chain(coords(&r.pre_exit))
            .chain(coords(&r.post_exit))
            .chain(std::iter::once(r.exit_kind.as_str().to_string()))
            .collect()
        })
        .collect();
    out.write("exits.csv", header, rows)
}

fn zolotarev(
    runner: &Runner<'_, WorkerPool>,
    model: &StableModel,
    domain: &ConeDomain,
    mc_samples: Option<u64>,
    out: &mut CsvSink<'_>,
) -> AppResult<()> {
    let normal = match domain {
        ConeDomain::HalfSpace { normal } => *normal,
        _ => {
            return Err(AppError::Config(
                "zolotarev needs a halfspace domain (its axis is the inward normal)".into(),
            ))
        }
    };
    let ex = model.halfspace_exponents(&normal)?;
    let mut rows = vec![
        ("rho", EstimateCI::exact(ex.rho, 0), 0),
        ("beta", EstimateCI::exact(ex.beta, 0), 0),
        ("beta_hat", EstimateCI::exact(ex.beta_hat, 0), 0),
    ];
    if let Some(n) = mc_samples {
        let sampler = PathSampler::new(model, runner.policy().resolve(model, 1.0)?)?;
        let inc = runner.increments(&sampler, 1.0, need_n(n)?)?;
        let positive = inc.iter().filter(|x| x.dot(&normal) > 0.0).count() as u64;
        rows.push(("rho_mc", EstimateCI::bernoulli(positive, n), 0));
    }
    out.exponents(&rows)
}
