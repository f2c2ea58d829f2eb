//! Command-line front end. `run` is the whole program minus process exit.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::applications::{self, ManifoldRecord, SamplePoint, Verdict};
use crate::catalog;
use crate::combinatorics::{self, TupleSpec};
use crate::delta::{self, OptimizerOptions};
use crate::error::{Error, Result};
use crate::extrinsic::{self, DEFAULT_MARGIN_TOL};
use crate::lagrangian::{self, InequalityCase, LagrangianData, LagrangianSample};
use crate::report::{self, OptimizerMeta, ReportRecord};
use crate::spec;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Tolerance for equality-pattern residuals.
const STRUCTURE_TOL: f64 = extrinsic::DEFAULT_STRUCTURE_TOL;

#[derive(Debug, Parser)]
#[command(name = "dinv", version, about = "Delta-invariants and curvature inequalities for concrete manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Optimizer restarts per tuple.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Optimizer sweep limit per restart.
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Master seed (decimal or 0x-hex); overrides DINV_SEED.
    #[arg(long, global = true, value_parser = parse_seed)]
    pub seed: Option<u64>,
    /// Omit timestamps so reports are byte-for-byte reproducible.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cardinality of the tuple set, p(n) − 1.
    Partitions {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        asymptotic: bool,
    },
    /// Built-in manifolds.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// δ-invariants at one point.
    Compute(ComputeArgs),
    /// Run a theorem check over a grid.
    Check(CheckArgs),
    /// Re-emit a saved JSON report in the chosen format.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<String>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated chart point; defaults to the chart center.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long, conflicts_with = "all_tuples", required_unless_present = "all_tuples")]
    pub tuple: Option<String>,
    #[arg(long)]
    pub all_tuples: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Chen,
    Lagrangian,
    Warped,
    Spectral,
    Ideality,
    Obstruction,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub which: CheckKind,
    #[command(flatten)]
    pub source: Source,
    /// Points per axis.
    #[arg(long, default_value_t = 4)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN_TOL)]
    pub tol: f64,
    #[arg(long, value_parser = parse_case)]
    pub case: Option<InequalityCase>,
    /// Single tuple; all of S(n) by default.
    #[arg(long, conflicts_with = "all_tuples")]
    pub tuple: Option<String>,
    #[arg(long)]
    pub all_tuples: bool,
    /// Squared mean curvature for warped checks without an immersion.
    #[arg(long)]
    pub h2: Option<f64>,
    /// Upper bound of the ambient sectional curvature (warped check).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub max_k: f64,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("bad seed `{s}`: {e}"))
}

fn parse_case(s: &str) -> std::result::Result<InequalityCase, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Invalid(format!("bad coordinate `{x}`")))
        })
        .collect()
}

struct Context {
    opts: OptimizerOptions,
    timestamp: Option<String>,
}

impl Context {
    fn meta(&self) -> OptimizerMeta {
        OptimizerMeta::from(&self.opts)
    }

    fn finish(&self, records: Vec<ReportRecord>) -> Vec<ReportRecord> {
        let ts = self.timestamp.as_deref();
        records.into_iter().map(|r| r.stamped(ts)).collect()
    }
}

fn load_record(src: &Source) -> Result<ManifoldRecord> {
    match (&src.spec, &src.catalog) {
        (Some(path), _) => spec::load_spec(path)?.to_record(),
        (None, Some(name)) => catalog::resolve(name),
        (None, None) => Err(Error::Invalid("need --spec or --catalog".into())),
    }
}

fn tuples_for(n: usize, tuple: Option<&str>) -> Result<Vec<TupleSpec>> {
    match tuple {
        Some(t) => Ok(vec![TupleSpec::parse(n, t)?]),
        None => {
            if n > delta::DEFAULT_DIMENSION_CAP {
                return Err(Error::DimensionCap {
                    dim: n,
                    cap: delta::DEFAULT_DIMENSION_CAP,
                });
            }
            combinatorics::enumerate_tuples(n)
        }
    }
}

fn samples(rec: &ManifoldRecord, grid: usize) -> Result<Vec<SamplePoint>> {
    rec.sample(grid).par_iter().map(|p| rec.sample_point(p)).collect()
}

fn tuple_label(t: &TupleSpec) -> Option<String> {
    Some(t.to_string())
}

fn info(check: String, rec: &ManifoldRecord, point: &[f64], lhs: f64, rhs: f64, ctx: &Context) -> ReportRecord {
    ReportRecord::new(check, rec.name.clone(), point, None, lhs, rhs, 0.0, 0.0, false, ctx.meta())
}

fn compute(args: &ComputeArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    let rec = load_record(&args.source)?;
    let point = match &args.point {
        Some(p) => parse_point(p)?,
        None => rec.sample(1).remove(0),
    };
    let s = rec.sample_point(&point)?;
    let tuples = tuples_for(rec.dim(), args.tuple.as_deref())?;
    tuples
        .iter()
        .map(|t| {
            let d = delta::delta_invariant(&s.curvature, t, &ctx.opts)?;
            Ok(ReportRecord::new(
                "delta",
                rec.name.clone(),
                &s.point,
                tuple_label(t),
                d.delta,
                d.normalized,
                0.0,
                0.0,
                d.certified,
                ctx.meta(),
            ))
        })
        .collect()
}

fn need_h2(s: &SamplePoint, check: &str) -> Result<f64> {
    s.h2
        .ok_or_else(|| Error::MissingData(format!("{check} check needs extrinsic data (an immersion or h)")))
}

fn check_chen(rec: &ManifoldRecord, a: &CheckArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    let tuples = tuples_for(rec.dim(), a.tuple.as_deref())?;
    let pts = samples(rec, a.grid)?;
    let per_point: Vec<Vec<ReportRecord>> = pts
        .par_iter()
        .map(|s| {
            let h2 = need_h2(s, "chen")?;
            tuples
                .iter()
                .map(|t| {
                    let d = delta::delta_invariant(&s.curvature, t, &ctx.opts)?;
                    let r = extrinsic::chen_inequality_check(&d, h2, t, s.c, a.tol)?;
                    Ok(ReportRecord::new("chen", rec.name.clone(), &s.point, tuple_label(t), r.delta, r.rhs, r.margin, a.tol, d.certified, ctx.meta()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn case_applies(t: &TupleSpec, case: InequalityCase) -> bool {
    match case {
        InequalityCase::L1 => true,
        InequalityCase::L2 => t.sum() < t.n(),
        InequalityCase::L3 => t.sum() == t.n(),
    }
}

fn lagrangian_data(rec: &ManifoldRecord, s: &SamplePoint) -> Result<LagrangianData> {
    match &rec.immersion {
        Some(f) => LagrangianData::at(f, &s.point),
        None => {
            let h = s
                .sff
                .as_ref()
                .ok_or_else(|| Error::MissingData("lagrangian check needs h".into()))?;
            if h.codim() != h.dim() {
                return Err(Error::Invalid("point-level Lagrangian data needs codimension n".into()));
            }
            LagrangianData::from_cubic(h.dim(), |a, b, c| h.component(c, a, b))
        }
    }
}

fn check_lagrangian(rec: &ManifoldRecord, a: &CheckArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    let n = rec.dim();
    let case = a.case.unwrap_or(InequalityCase::L1);
    let tuples: Vec<TupleSpec> = match &a.tuple {
        Some(_) => {
            let t = tuples_for(n, a.tuple.as_deref())?;
            lagrangian::lagrangian_coefficient(n, &t[0], case)?;
            t
        }
        None => tuples_for(n, None)?.into_iter().filter(|t| case_applies(t, case)).collect(),
    };
    if rec.immersion.is_some() && rec.immersion.as_ref().unwrap().ambient_dim() != 2 * n {
        return Err(Error::Invalid(format!("`{}` is not an immersion into C^{n}", rec.name)));
    }
    let pts = samples(rec, a.grid)?;
    let name = rec.name.clone();
    let per_point: Vec<(Vec<ReportRecord>, Vec<(TupleSpec, LagrangianSample)>)> = pts
        .par_iter()
        .map(|s| {
            let mut out = Vec::new();
            let mut lsamples = Vec::new();
            if let Some(f) = &rec.immersion {
                let res = lagrangian::lagrangian_check(f, &s.point)?;
                let tol = lagrangian::LAGRANGIAN_TOL;
                out.push(ReportRecord::new("lagrangian-residual", name.clone(), &s.point, None, res, tol, tol - res, 0.0, false, ctx.meta()));
            }
            let h2 = need_h2(s, "lagrangian")?;
            let data = lagrangian_data(rec, s).ok();
            for t in &tuples {
                let d = delta::delta_invariant(&s.curvature, t, &ctx.opts)?;
                let r = lagrangian::lagrangian_inequality_check(&d, h2, t, s.c, case, a.tol)?;
                let label = format!("lagrangian-{case:?}");
                out.push(ReportRecord::new(label, name.clone(), &s.point, tuple_label(t), r.delta, r.rhs, r.margin, a.tol, d.certified, ctx.meta()));
                if r.margin.abs() <= a.tol {
                    if let Some(data) = &data {
                        let res = match case {
                            InequalityCase::L2 => Some(lagrangian::equality_form_check_l2(data, &d.minimizer, t, STRUCTURE_TOL)?.max_residual),
                            InequalityCase::L3 => Some(lagrangian::equality_conditions_check_l3(data, &d.minimizer, t, STRUCTURE_TOL)?.max_residual),
                            InequalityCase::L1 => None,
                        };
                        if let Some(res) = res {
                            let check = format!("equality-form-{case:?}");
                            out.push(ReportRecord::new(check, name.clone(), &s.point, tuple_label(t), res, STRUCTURE_TOL, -res, STRUCTURE_TOL, d.certified, ctx.meta()));
                        }
                    }
                }
                lsamples.push((
                    t.clone(),
                    LagrangianSample {
                        point: s.point.clone(),
                        delta: d.delta,
                        h2,
                        c: s.c,
                    },
                ));
            }
            Ok((out, lsamples))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut all_samples = Vec::new();
    for (r, l) in per_point {
        records.extend(r);
        all_samples.extend(l);
    }
    for t in &tuples {
        let mine: Vec<LagrangianSample> = all_samples.iter().filter(|(u, _)| u == t).map(|(_, s)| s.clone()).collect();
        let rep = lagrangian::minimality_at_equality_check(&mine, t, 1e-6, 1e-6)?;
        let flagged = rep.flagged.len() as f64;
        records.push(ReportRecord::new("minimality-at-equality", name.clone(), &[], tuple_label(t), flagged, 0.0, -flagged, 0.0, false, ctx.meta()));
    }
    Ok(records)
}

fn check_warped(rec: &ManifoldRecord, a: &CheckArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    let w = rec
        .warped
        .as_ref()
        .ok_or_else(|| Error::MissingData(format!("`{}` is not a warped product", rec.name)))?;
    let n1 = w.n1();
    let pts = rec
        .warped
        .as_ref()
        .map(|w| crate::geometry::MetricSource::domain(w).grid(a.grid, applications::GRID_MARGIN))
        .unwrap_or_default();
    pts.par_iter()
        .map(|p| {
            let h2 = match (a.h2, &rec.immersion) {
                (Some(h), _) => h,
                (None, Some(f)) => extrinsic::PointGeometry::at(f, p)?.mean.h2,
                (None, None) => return Err(Error::MissingData("warped check needs --h2 or an immersion".into())),
            };
            let r = applications::warped_inequality_check(w, h2, a.max_k, &p[..n1], a.tol)?;
            Ok(ReportRecord::new("warped", rec.name.clone(), p, None, r.lhs, r.rhs, r.margin, a.tol, false, ctx.meta()))
        })
        .collect()
}

fn check_spectral(rec: &ManifoldRecord, a: &CheckArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    // homogeneous: one point stands for all
    let center = rec.sample(1).remove(0);
    let s = rec.sample_point(&center)?;
    let all = delta::delta_all(&s.curvature, &ctx.opts)?;
    let rep = applications::spectral_bound_check(rec, &all, a.tol)?;
    let mut out: Vec<ReportRecord> = rep
        .entries
        .iter()
        .map(|e| {
            let certified = all.iter().any(|d| d.tuple == e.tuple && d.certified);
            ReportRecord::new("spectral", rec.name.clone(), &s.point, tuple_label(&e.tuple), rep.lambda1, e.bound, e.margin, a.tol, certified, ctx.meta())
        })
        .collect();
    let best = delta::argmax_normalized(&all).expect("S(n) is never empty");
    let bl = applications::best_living_test(rec, best.normalized, a.tol)?;
    let check = if bl.best_living { "best-living:yes" } else { "best-living:no" };
    out.push(ReportRecord::new(check, rec.name.clone(), &s.point, tuple_label(&best.tuple), bl.lambda1, bl.lambda1 - bl.gap, bl.gap, a.tol, best.certified, ctx.meta()));
    if rec.volume.is_some() && rec.metric_source().is_some() && rec.dim() <= 3 {
        let avg = applications::average_bound_test(rec, a.grid, &ctx.opts, a.tol)?;
        let check = if avg.fires { "average-bound:fires" } else { "average-bound:no-conclusion" };
        out.push(ReportRecord::new(check, rec.name.clone(), &[], None, avg.lambda1, avg.bound, avg.margin, a.tol, false, ctx.meta()));
    }
    Ok(out)
}

fn check_ideality(rec: &ManifoldRecord, a: &CheckArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    let f = rec
        .immersion
        .as_ref()
        .ok_or_else(|| Error::MissingData("ideality check needs an immersion".into()))?;
    let rep = extrinsic::ideality_check(f, &rec.sample(a.grid), &ctx.opts, a.tol)?;
    Ok(rep
        .points
        .iter()
        .map(|p| ReportRecord::new("ideality", rec.name.clone(), &p.point, tuple_label(&p.tuple), p.h2, p.delta_hat0, -p.gap, a.tol, false, ctx.meta()))
        .collect())
}

fn check_obstruction(rec: &ManifoldRecord, a: &CheckArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    let pts = samples(rec, a.grid)?;
    let m = applications::minimal_obstruction(&pts, &ctx.opts, a.tol)?;
    let mut out = Vec::new();
    let (point, tuple, max_delta) = m
        .max_delta
        .as_ref()
        .map(|w| (w.point.clone(), tuple_label(&w.tuple), w.delta))
        .unwrap_or_default();
    let state = if m.delta_fires { "fires" } else { "not-detected" };
    let mut r = info(format!("minimal-obstruction:{state}"), rec, &point, max_delta, a.tol, ctx);
    r.tuple = tuple;
    out.push(r);
    let state = if m.ricci_fires { "fires" } else { "not-detected" };
    out.push(info(format!("ricci-obstruction:{state}"), rec, &[], m.max_ricci, a.tol, ctx));

    let l = applications::lagrangian_obstruction(&pts, rec.topology, &ctx.opts, a.tol)?;
    let best = l.witness.as_ref().and_then(|t| l.per_tuple.iter().find(|m| &m.tuple == t));
    let min_delta = best.map_or(0.0, |m| m.min_delta);
    let mut r = match l.verdict {
        Verdict::Fires => info("lagrangian-obstruction:fires".into(), rec, &[], min_delta, a.tol, ctx),
        Verdict::DoesNotFire => info("lagrangian-obstruction:does-not-fire".into(), rec, &[], min_delta, a.tol, ctx),
        // missing topology is not a pass
        Verdict::Inconclusive => ReportRecord::new("lagrangian-obstruction:inconclusive", rec.name.clone(), &[], None, 0.0, 1.0, -1.0, 0.0, false, ctx.meta()),
    };
    r.tuple = l.witness.as_ref().and_then(tuple_label);
    out.push(r);

    if let Some(w) = &rec.warped {
        let base: Vec<Vec<f64>> = crate::geometry::MetricSource::domain(w.base()).grid(a.grid, applications::GRID_MARGIN);
        let flags = applications::warped_obstruction_flags(w, &base, a.tol)?;
        let mut names = Vec::new();
        if flags.harmonic {
            names.push("harmonic");
        }
        if flags.eigenvalue.is_some() {
            names.push("eigenfunction");
        }
        if flags.compact {
            names.push("compact");
        }
        let label = if names.is_empty() { "none".to_string() } else { names.join("+") };
        out.push(info(format!("warped-obstruction:{label}"), rec, &[], flags.eigenvalue.unwrap_or(0.0), a.tol, ctx));
    }
    Ok(out)
}

fn check(a: &CheckArgs, ctx: &Context) -> Result<Vec<ReportRecord>> {
    if !(a.tol >= 0.0) {
        return Err(Error::Invalid("--tol must be nonnegative".into()));
    }
    if a.grid == 0 {
        return Err(Error::Invalid("--grid must be positive".into()));
    }
    if a.case.is_some() && a.which != CheckKind::Lagrangian {
        return Err(Error::Invalid("--case only applies to the lagrangian check".into()));
    }
    let rec = load_record(&a.source)?;
    match a.which {
        CheckKind::Chen => check_chen(&rec, a, ctx),
        CheckKind::Lagrangian => check_lagrangian(&rec, a, ctx),
        CheckKind::Warped => check_warped(&rec, a, ctx),
        CheckKind::Spectral => check_spectral(&rec, a, ctx),
        CheckKind::Ideality => check_ideality(&rec, a, ctx),
        CheckKind::Obstruction => check_obstruction(&rec, a, ctx),
    }
}

fn emit(cli: &Cli, records: &[ReportRecord], out: &mut dyn Write) -> Result<()> {
    let text = match cli.format {
        Format::Json => report::to_json(records)? + "\n",
        Format::Csv => report::to_csv(records)?,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var("DINV_SEED") {
            Ok(v) => parse_seed(&v).map_err(Error::Invalid)?,
            Err(_) => OptimizerOptions::default().seed,
        },
    };
    let defaults = OptimizerOptions::default();
    let ctx = Context {
        opts: OptimizerOptions {
            restarts: cli.restarts.unwrap_or(defaults.restarts).max(1),
            max_iters: cli.max_iters.unwrap_or(defaults.max_iters),
            seed,
            tol: defaults.tol,
        },
        timestamp: (!cli.no_timestamp).then(report::now_timestamp),
    };
    let records = match &cli.command {
        Command::Partitions { n, asymptotic } => {
            let count = combinatorics::cardinality(*n)?;
            writeln!(out, "{count}")?;
            if *asymptotic {
                let approx = combinatorics::asymptotic_cardinality(*n);
                writeln!(out, "asymptotic {approx:.6e}")?;
                if let Some(c) = count.to_f64() {
                    writeln!(out, "ratio {:.6}", c / approx)?;
                }
            }
            return Ok(EXIT_PASS);
        }
        Command::Catalog { action: CatalogAction::List } => {
            for e in catalog::list() {
                writeln!(out, "{}\t{}\t{}", e.name, serde_json::to_value(e.kind).unwrap().as_str().unwrap_or(""), e.description)?;
            }
            return Ok(EXIT_PASS);
        }
        Command::Compute(args) => ctx.finish(compute(args, &ctx)?),
        Command::Check(args) => ctx.finish(check(args, &ctx)?),
        Command::Report { input } => report::from_json(&std::fs::read_to_string(input)?)?,
    };
    emit(cli, &records, out)?;
    Ok(if records.iter().all(|r| r.passed) { EXIT_PASS } else { EXIT_FAIL })
}

/// Parses `argv` (including the program name) and runs it, returning the
/// exit code: 0 all checks passed, 1 some check failed, 2 usage or
/// validation error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
