//! Running one solver on one instance and turning the outcome into CSV rows.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use clap::ValueEnum;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sparse_iscra::baselines::{self, BaselineOptions, FoldedConcave};
use sparse_iscra::iscra;
use sparse_iscra::model::{
    loss, nnz_threshold, relative_error, GroundTruth, ProblemInstance, SolveTrace, SolverOptions,
};
use sparse_iscra::ssnal::SsnalOptions;

use crate::source::InstanceSource;

pub const CSV_HEADER: [&str; 10] =
    ["solver", "lambda", "c_lambda", "seed", "relerr", "nnz", "loss", "time_s", "outer_iters", "inexactness"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Iscra,
    Lasso,
    LlaScad,
    LlaMcp,
    MscrCl1,
    DcaTrl1,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Iscra => "iscra",
            SolverKind::Lasso => "lasso",
            SolverKind::LlaScad => "lla-scad",
            SolverKind::LlaMcp => "lla-mcp",
            SolverKind::MscrCl1 => "mscr-cl1",
            SolverKind::DcaTrl1 => "dca-trl1",
        }
    }
}

/// Shared solver settings; `mu` and `rho` only affect iSCRA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub rho: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub max_outer: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let base = SolverOptions::new(1.0);
        Self { rho: base.rho, mu: base.mu, epsilon: base.epsilon, tol: base.inner_tolerance, max_outer: base.max_outer }
    }
}

/// A solver together with any per-variant override, labelled for the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub kind: SolverKind,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
}

impl Variant {
    pub fn plain(kind: SolverKind) -> Self {
        Self { kind, mu: None, rho: None }
    }

    pub fn label(&self) -> String {
        match (self.mu, self.rho) {
            (None, None) => self.kind.name().to_string(),
            (Some(mu), None) => format!("{}[mu={mu}]", self.kind.name()),
            (None, Some(rho)) => format!("{}[rho={rho}]", self.kind.name()),
            (Some(mu), Some(rho)) => format!("{}[mu={mu},rho={rho}]", self.kind.name()),
        }
    }
}

/// Solution of one run: the final point and, for sequential methods, the trace.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: DVector<f64>,
    pub trace: Option<SolveTrace>,
    pub seconds: f64,
}

impl Outcome {
    pub fn outer_iterations(&self) -> usize {
        self.trace.as_ref().map_or(1, |t| t.iterates.iter().filter(|r| r.k >= 1).count())
    }
}

pub fn solve(instance: &ProblemInstance, variant: &Variant, lambda: f64, settings: &SolverSettings) -> Result<Outcome> {
    let started = Instant::now();
    let inner = SsnalOptions::with_tol(settings.tol);
    let base = BaselineOptions { inner_tolerance: settings.tol, max_outer: settings.max_outer, ..BaselineOptions::new(lambda) };
    let trace = match variant.kind {
        SolverKind::Lasso => {
            let rep = baselines::lasso_report(instance, lambda, &inner)?;
            return Ok(Outcome { x: rep.x_out, trace: None, seconds: started.elapsed().as_secs_f64() });
        }
        SolverKind::Iscra => {
            let opts = SolverOptions {
                rho: variant.rho.unwrap_or(settings.rho),
                mu: variant.mu.unwrap_or(settings.mu),
                epsilon: settings.epsilon,
                inner_tolerance: settings.tol,
                max_outer: settings.max_outer,
                ..SolverOptions::new(lambda)
            };
            iscra::run_with(instance, &opts, &inner)?
        }
        SolverKind::LlaScad => baselines::lla(instance, &base, FoldedConcave::Scad)?,
        SolverKind::LlaMcp => baselines::lla(instance, &base, FoldedConcave::Mcp)?,
        SolverKind::MscrCl1 => baselines::mscr_cl1(instance, &base)?,
        SolverKind::DcaTrl1 => baselines::dca_trl1(instance, &base)?,
    };
    Ok(Outcome { x: trace.final_x.clone(), trace: Some(trace), seconds: started.elapsed().as_secs_f64() })
}

/// One CSV line. `None` fields are written as empty cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsRow {
    pub solver: String,
    pub lambda: Option<f64>,
    pub c_lambda: Option<f64>,
    pub seed: String,
    pub relerr: Option<f64>,
    pub nnz: Option<f64>,
    pub loss: Option<f64>,
    pub time_s: Option<f64>,
    pub outer_iters: Option<f64>,
    pub inexactness: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl MetricsRow {
    pub fn record(&self) -> [String; 10] {
        [
            self.solver.clone(),
            cell(self.lambda),
            cell(self.c_lambda),
            self.seed.clone(),
            cell(self.relerr),
            cell(self.nnz),
            cell(self.loss),
            cell(self.time_s),
            cell(self.outer_iters),
            cell(self.inexactness),
        ]
    }

    pub fn from_outcome(
        label: String,
        instance: &ProblemInstance,
        truth: Option<&GroundTruth>,
        lambda: f64,
        c_lambda: Option<f64>,
        seed: String,
        outcome: &Outcome,
        record_time: bool,
    ) -> Result<Self> {
        let x = &outcome.x;
        let thr = nnz_threshold(x);
        Ok(Self {
            solver: label,
            lambda: Some(lambda),
            c_lambda,
            seed,
            relerr: truth.map(|t| relative_error(x, t)).transpose()?,
            nnz: Some(x.iter().filter(|v| v.abs() > thr).count() as f64),
            loss: Some(loss(instance, x)?),
            time_s: record_time.then_some(outcome.seconds),
            outer_iters: Some(outcome.outer_iterations() as f64),
            inexactness: Some(outcome.trace.as_ref().map_or(0.0, |t| t.max_inexactness())),
        })
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[MetricsRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(())
}

/// The regularization level of a sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    Scale(f64),
    Absolute(f64),
}

impl Level {
    pub fn lambda(self, instance: &ProblemInstance) -> f64 {
        match self {
            Level::Scale(c) => instance.lambda_from_scale(c),
            Level::Absolute(l) => l,
        }
    }

    fn c_lambda(self) -> Option<f64> {
        match self {
            Level::Scale(c) => Some(c),
            Level::Absolute(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub source: InstanceSource,
    pub variants: Vec<Variant>,
    pub levels: Vec<Level>,
    pub seeds: Vec<u64>,
    pub settings: SolverSettings,
    pub record_time: bool,
}

/// Runs every (variant, level, seed) cell in parallel. Rows are ordered by
/// variant, then level, then seed, each group followed by its mean row.
/// A failing cell yields a row with empty metrics.
pub fn sweep(plan: &SweepPlan) -> Result<Vec<MetricsRow>> {
    let instances: Vec<_> = plan.seeds.par_iter().map(|&s| plan.source.load(s)).collect::<Result<_>>()?;
    let cells: Vec<(usize, usize, usize)> = (0..plan.variants.len())
        .flat_map(|v| (0..plan.levels.len()).flat_map(move |l| (0..plan.seeds.len()).map(move |s| (v, l, s))))
        .collect();
    let rows: Vec<MetricsRow> = cells
        .par_iter()
        .map(|&(v, l, s)| {
            let (inst, truth) = &instances[s];
            let variant = &plan.variants[v];
            let level = plan.levels[l];
            let lambda = level.lambda(inst);
            let seed = plan.seeds[s].to_string();
            let label = variant.label();
            solve(inst, variant, lambda, &plan.settings)
                .and_then(|out| {
                    MetricsRow::from_outcome(label.clone(), inst, truth.as_ref(), lambda, level.c_lambda(), seed.clone(), &out, plan.record_time)
                })
                .unwrap_or_else(|_| MetricsRow {
                    solver: label,
                    lambda: Some(lambda),
                    c_lambda: level.c_lambda(),
                    seed,
                    ..MetricsRow::default()
                })
        })
        .collect();

    let per_group = plan.seeds.len();
    let mut out = Vec::with_capacity(rows.len() + rows.len() / per_group.max(1));
    for group in rows.chunks(per_group.max(1)) {
        out.extend_from_slice(group);
        out.push(mean_row(group));
    }
    Ok(out)
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let got: Vec<f64> = values.flatten().collect();
    (!got.is_empty()).then(|| got.iter().sum::<f64>() / got.len() as f64)
}

fn mean_row(group: &[MetricsRow]) -> MetricsRow {
    let ok: Vec<&MetricsRow> = group.iter().filter(|r| r.loss.is_some()).collect();
    MetricsRow {
        solver: group[0].solver.clone(),
        lambda: mean_of(group.iter().map(|r| r.lambda)),
        c_lambda: group[0].c_lambda,
        seed: "mean".into(),
        relerr: mean_of(ok.iter().map(|r| r.relerr)),
        nnz: mean_of(ok.iter().map(|r| r.nnz)),
        loss: mean_of(ok.iter().map(|r| r.loss)),
        time_s: mean_of(ok.iter().map(|r| r.time_s)),
        outer_iters: mean_of(ok.iter().map(|r| r.outer_iters)),
        inexactness: mean_of(ok.iter().map(|r| r.inexactness)),
    }
}

/// Per-solver summary used by `solve` output.
pub fn trace_summary(outcome: &Outcome) -> BTreeMap<&'static str, serde_json::Value> {
    let mut map = BTreeMap::new();
    map.insert("outer_iters", serde_json::json!(outcome.outer_iterations()));
    if let Some(t) = &outcome.trace {
        map.insert("status", serde_json::to_value(t.status).unwrap_or_default());
        map.insert("max_inexactness", serde_json::json!(t.max_inexactness()));
        map.insert("subproblem_solves", serde_json::json!(t.subproblem_solves()));
    }
    map
}
