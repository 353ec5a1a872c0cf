//! Command-line front end: instance generation, single-instance tools and the
//! seeded experiment suite.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{audit_all, AuditReport, DEFAULT_TOL_BB, DEFAULT_TOL_IC};
use crate::bilateral::{bom_price, gft_bom, gft_som, som_price};
use crate::error::{Error, Result};
use crate::market::{validate_instance, DiscreteDistribution, FeasibilityFamily, Instance};
use crate::matching::DEFAULT_FAMILY_CAP;
use crate::mechanism::{
    build_mechanism, gft_exact, pairwise_surplus, virtual_gft, MechanismKind, MechanismTable,
};
use crate::second_best::{build_second_best_lp, duality_benchmark, first_best, solve_second_best};
use crate::lp::solve_lp;
use crate::transforms::wbb_to_sbb_pipeline;
use crate::virtuals::{buyer_virtual_values, seller_virtual_values};

/// Generated support values are multiples of this step.
const VALUE_STEP: f64 = 1.0 / 8.0;
/// Largest generated value, in steps.
const VALUE_STEPS: u32 = 16;
const MAX_PMF_WEIGHT: u32 = 8;

const ORDER_TOL: f64 = 1e-6;
const CHAIN_TOL: f64 = 1e-9;

/// How to draw the feasibility family of a generated instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FamilyKind {
    AllMatchings,
    Cap(usize),
    /// Subset closure of one to three random matchings.
    RandomExplicit,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::AllMatchings => write!(f, "all"),
            FamilyKind::Cap(k) => write!(f, "cap:{k}"),
            FamilyKind::RandomExplicit => write!(f, "explicit"),
        }
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all_matchings" => Ok(FamilyKind::AllMatchings),
            "explicit" | "random_explicit" => Ok(FamilyKind::RandomExplicit),
            _ => s
                .strip_prefix("cap:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(FamilyKind::Cap)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "unknown family {s:?} (expected all, cap:K or explicit)"
                    ))
                }),
        }
    }
}

impl TryFrom<String> for FamilyKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FamilyKind> for String {
    fn from(k: FamilyKind) -> String {
        k.to_string()
    }
}

fn random_distribution(rng: &mut ChaCha8Rng, max_support: usize) -> DiscreteDistribution {
    let size = rng.gen_range(1..=max_support);
    let mut grid: Vec<u32> = (0..=VALUE_STEPS).collect();
    grid.shuffle(rng);
    let mut steps = grid[..size].to_vec();
    steps.sort_unstable();
    let weights: Vec<u32> = (0..size).map(|_| rng.gen_range(1..=MAX_PMF_WEIGHT)).collect();
    let total: u32 = weights.iter().sum();
    DiscreteDistribution::new(
        steps.iter().map(|&k| k as f64 * VALUE_STEP).collect(),
        weights.iter().map(|&w| w as f64 / total as f64).collect(),
    )
    .expect("generated distribution is valid")
}

/// Deterministic random instance. Supports are drawn without replacement from
/// the grid `0, 1/8, ..., 2`; probabilities are integer weights in `1..=8`,
/// normalized.
pub fn gen_instance(seed: u64, n: usize, m: usize, max_support: usize, family: FamilyKind) -> Result<Instance> {
    if n == 0 || m == 0 || max_support == 0 {
        return Err(Error::InvalidArgument("n, m and max_support must be positive".into()));
    }
    if max_support > VALUE_STEPS as usize + 1 {
        return Err(Error::InvalidArgument(format!(
            "max_support is at most {}",
            VALUE_STEPS + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let buyers = (0..n).map(|_| random_distribution(&mut rng, max_support)).collect();
    let sellers = (0..m).map(|_| random_distribution(&mut rng, max_support)).collect();
    let feasibility = match family {
        FamilyKind::AllMatchings => FeasibilityFamily::AllMatchings,
        FamilyKind::Cap(k) => FeasibilityFamily::cap(k)?,
        FamilyKind::RandomExplicit => {
            let all = FeasibilityFamily::AllMatchings.members(n, m, DEFAULT_FAMILY_CAP)?;
            let count = rng.gen_range(1..=3);
            let generators = (0..count)
                .map(|_| all.choose(&mut rng).expect("non-empty").clone())
                .collect();
            FeasibilityFamily::explicit(generators)?
        }
    };
    Instance::new(buyers, sellers, feasibility)
}

/// One block of generated instances: seeds `seed_start .. seed_start + count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRun {
    pub seed_start: u64,
    pub count: u64,
    pub n: usize,
    pub m: usize,
    pub max_support: usize,
    pub family: FamilyKind,
    #[serde(default = "yes")]
    pub opt_lp: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub runs: Vec<SuiteRun>,
    /// Record wall-clock time per instance (makes reports non-reproducible).
    #[serde(default)]
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub ok: bool,
    pub failed: Vec<String>,
}

impl AuditSummary {
    fn new(report: &AuditReport, required: &[&str]) -> Self {
        let failed: Vec<String> = report
            .entries()
            .iter()
            .filter(|(name, check)| required.contains(name) && !check.pass)
            .map(|(name, _)| name.to_string())
            .collect();
        Self {
            ok: failed.is_empty(),
            failed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_best: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark_alpha1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_lp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gft_gsom: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gft_gbom: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub virtual_gft_gsom: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub virtual_gft_gbom: Option<f64>,
    /// `max(gft_gsom, gft_gbom) / opt_lp` (1 when the optimum is zero).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_ratio: Option<f64>,
    pub sandwich_ok: bool,
    pub ordering_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_gsom: Option<AuditSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_gbom: Option<AuditSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_pipeline_gsom: Option<AuditSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_pipeline_gbom: Option<AuditSummary>,
    pub pairwise_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl ExperimentReport {
    pub fn all_ok(&self) -> bool {
        let audits = [
            &self.audit_gsom,
            &self.audit_gbom,
            &self.audit_pipeline_gsom,
            &self.audit_pipeline_gbom,
        ];
        self.error.is_none()
            && self.sandwich_ok
            && self.ordering_ok
            && self.pairwise_ok
            && audits.iter().all(|a| a.as_ref().is_some_and(|a| a.ok))
    }
}

const MECHANISM_PROPS: &[&str] = &["IR", "DSIC", "ex-ante WBB"];
const PIPELINE_PROPS: &[&str] = &["IR", "BIC", "SBB"];

/// Runs every benchmark, mechanism and audit on one instance.
pub fn evaluate_instance(instance: &Instance, with_opt: bool) -> Result<ExperimentReport> {
    let fb = first_best(instance)?;
    let bench1 = duality_benchmark(instance, 1.0)?;
    let opt = if with_opt {
        match solve_second_best(instance) {
            Ok((value, _)) => Some(value),
            Err(Error::LpTooLarge { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let gsom = build_mechanism(instance, MechanismKind::Gsom)?;
    let gbom = build_mechanism(instance, MechanismKind::Gbom)?;
    let (g_gsom, g_gbom) = (gft_exact(&gsom), gft_exact(&gbom));
    let (v_gsom, v_gbom) = (
        virtual_gft(&gsom, MechanismKind::Gsom)?,
        virtual_gft(&gbom, MechanismKind::Gbom)?,
    );

    let chain_ok = bench1 <= v_gsom + v_gbom + CHAIN_TOL
        && v_gsom <= g_gsom + CHAIN_TOL
        && v_gbom <= g_gbom + CHAIN_TOL;
    let sandwich_ok = chain_ok && opt.is_none_or(|o| g_gsom + g_gbom >= o - ORDER_TOL);

    let mut ordering_ok = g_gsom >= 0.0 && g_gbom >= 0.0;
    let ceiling = opt.unwrap_or(fb);
    ordering_ok &= g_gsom <= ceiling + ORDER_TOL && g_gbom <= ceiling + ORDER_TOL;
    if let Some(o) = opt {
        ordering_ok &= o <= fb + ORDER_TOL;
        for alpha in [0.5, 1.0, 2.0] {
            ordering_ok &= o <= duality_benchmark(instance, alpha)? + ORDER_TOL;
        }
    }

    let pairwise_ok = pairwise_surplus(&gsom, MechanismKind::Gsom)?.worst >= -CHAIN_TOL
        && pairwise_surplus(&gbom, MechanismKind::Gbom)?.worst >= -CHAIN_TOL;
    let audit = |t: &MechanismTable, props| AuditSummary::new(&audit_all(t, DEFAULT_TOL_IC, DEFAULT_TOL_BB), props);
    let pipeline = |t: &MechanismTable| -> Result<AuditSummary> {
        let out = wbb_to_sbb_pipeline(t)?;
        let mut summary = audit(&out, PIPELINE_PROPS);
        if gft_exact(&out) != gft_exact(t) {
            summary.ok = false;
            summary.failed.push("GFT changed".into());
        }
        Ok(summary)
    };

    Ok(ExperimentReport {
        n: instance.n(),
        m: instance.m(),
        family: instance.feasibility().label(),
        first_best: Some(fb),
        benchmark_alpha1: Some(bench1),
        opt_lp: opt,
        gft_gsom: Some(g_gsom),
        gft_gbom: Some(g_gbom),
        virtual_gft_gsom: Some(v_gsom),
        virtual_gft_gbom: Some(v_gbom),
        best_ratio: opt.map(|o| if o > 1e-12 { g_gsom.max(g_gbom) / o } else { 1.0 }),
        sandwich_ok,
        ordering_ok,
        audit_gsom: Some(audit(&gsom, MECHANISM_PROPS)),
        audit_gbom: Some(audit(&gbom, MECHANISM_PROPS)),
        audit_pipeline_gsom: Some(pipeline(&gsom)?),
        audit_pipeline_gbom: Some(pipeline(&gbom)?),
        pairwise_ok,
        ..Default::default()
    })
}

fn run_one(run: &SuiteRun, seed: u64, timing: bool) -> ExperimentReport {
    let start = Instant::now();
    let result = gen_instance(seed, run.n, run.m, run.max_support, run.family)
        .and_then(|inst| evaluate_instance(&inst, run.opt_lp));
    let mut report = result.unwrap_or_else(|e| ExperimentReport {
        n: run.n,
        m: run.m,
        family: run.family.to_string(),
        error: Some(e.to_string()),
        ..Default::default()
    });
    report.seed = seed;
    if timing {
        report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    report
}

/// Evaluates every configured instance in parallel; reports come back in
/// configuration order.
pub fn run_suite(config: &SuiteConfig) -> Vec<ExperimentReport> {
    let jobs: Vec<(&SuiteRun, u64)> = config
        .runs
        .iter()
        .flat_map(|run| (0..run.count).map(move |k| (run, run.seed_start + k)))
        .collect();
    jobs.par_iter()
        .map(|&(run, seed)| run_one(run, seed, config.timing))
        .collect()
}

#[derive(Parser, Debug)]
#[command(name = "gft", version, about = "Budget-balanced double-auction mechanisms and benchmarks")]
pub struct Cli {
    /// Instance JSON file.
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        max_support: usize,
        #[arg(long, default_value = "all")]
        family: FamilyKind,
    },
    /// Raw and ironed virtual values of every agent.
    Virtuals,
    /// Posted-price mechanisms on a one-buyer, one-seller instance.
    Bilateral,
    /// Build the GSOM or GBOM table.
    Run {
        #[arg(long, default_value = "gsom")]
        mechanism: MechanismKind,
    },
    /// First-best and duality benchmark.
    Benchmark {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Solve the second-best LP.
    OptLp {
        /// Write the LP in JSON form.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Apply a payment transformation to a table.
    Transform {
        #[arg(long, default_value = "wbb-to-sbb")]
        pipeline: String,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Audit a mechanism table.
    Audit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL_IC)]
        tol_ic: f64,
        #[arg(long, default_value_t = DEFAULT_TOL_BB)]
        tol_bb: f64,
        /// Properties that decide the exit code.
        #[arg(long, value_delimiter = ',', default_value = "IR,BIC,ex-ante WBB")]
        require: Vec<String>,
    },
    /// Run the seeded experiment suite and emit newline-delimited JSON.
    Suite {
        /// Suite configuration JSON; otherwise one run from the flags below
        /// starting at --seed.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        max_support: usize,
        #[arg(long, default_value = "all")]
        family: FamilyKind,
        #[arg(long)]
        no_opt_lp: bool,
        #[arg(long)]
        timing: bool,
    },
}

struct Ctx {
    instance: Option<PathBuf>,
    out: Option<PathBuf>,
    json: bool,
}

impl Ctx {
    fn instance(&self) -> Result<Instance> {
        let path = self
            .instance
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("--instance is required".into()))?;
        validate_instance(&fs::read_to_string(path)?)
    }

    /// Writes `text` to --out if given, else stdout.
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T, human: impl FnOnce() -> String) -> Result<()> {
        if self.json || self.out.is_some() {
            self.emit(&serde_json::to_string_pretty(value)?)
        } else {
            println!("{}", human());
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        file.write_all(b"\n")?;
    }
    Ok(())
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}

fn execute(cli: Cli) -> Result<i32> {
    let ctx = Ctx {
        instance: cli.instance,
        out: cli.out,
        json: cli.json,
    };
    match cli.command {
        Command::Gen {
            n,
            m,
            max_support,
            family,
        } => {
            let inst = gen_instance(cli.seed, n, m, max_support, family)?;
            ctx.emit(&inst.to_json())?;
            Ok(0)
        }
        Command::Virtuals => {
            let inst = ctx.instance()?;
            let tables: Vec<_> = inst
                .buyers()
                .iter()
                .map(buyer_virtual_values)
                .chain(inst.sellers().iter().map(seller_virtual_values))
                .collect();
            ctx.emit_json(&tables, || {
                let names = inst.agents().map(|a| a.to_string());
                names
                    .zip(&tables)
                    .map(|(name, t)| {
                        format!(
                            "{name}\n  support {}\n  raw     {}\n  ironed  {}\n  ironed intervals {:?}",
                            fmt_list(&t.support),
                            fmt_list(&t.raw),
                            fmt_list(&t.ironed),
                            t.ironed_intervals
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            })?;
            Ok(0)
        }
        Command::Bilateral => {
            let inst = ctx.instance()?;
            if !inst.is_bilateral() {
                return Err(Error::NotBilateral {
                    n: inst.n(),
                    m: inst.m(),
                });
            }
            let (buyer, seller) = (inst.buyer(0), inst.seller(0));
            let som: Vec<_> = seller
                .support()
                .iter()
                .map(|&s| som_price(s, buyer))
                .collect::<Result<_>>()?;
            let bom: Vec<_> = buyer
                .support()
                .iter()
                .map(|&b| bom_price(b, seller))
                .collect::<Result<_>>()?;
            let (g_som, g_bom) = (gft_som(&inst)?, gft_bom(&inst)?);
            let fb = first_best(&inst)?;
            let opt = solve_second_best(&inst)?.0;
            let value = serde_json::json!({
                "som": som, "bom": bom, "gft_som": g_som, "gft_bom": g_bom,
                "first_best": fb, "opt_lp": opt,
            });
            ctx.emit_json(&value, || {
                let mut lines = vec!["seller-offering prices".to_string()];
                for (s, o) in seller.support().iter().zip(&som) {
                    lines.push(format!("  s = {s}: price {}", o.price));
                }
                lines.push("buyer-offering prices".into());
                for (b, o) in buyer.support().iter().zip(&bom) {
                    lines.push(format!("  b = {b}: price {}", o.price));
                }
                lines.push(format!("GFT  SOM {g_som:.9}  BOM {g_bom:.9}"));
                lines.push(format!("first-best {fb:.9}  OPT {opt:.9}"));
                lines.join("\n")
            })?;
            Ok(0)
        }
        Command::Run { mechanism } => {
            let inst = ctx.instance()?;
            let table = build_mechanism(&inst, mechanism)?;
            if ctx.out.is_some() || ctx.json {
                ctx.emit(&table.to_json())?;
            }
            if !ctx.json {
                println!(
                    "{mechanism}: GFT {:.9}, virtual GFT {:.9}",
                    gft_exact(&table),
                    virtual_gft(&table, mechanism)?
                );
            }
            Ok(0)
        }
        Command::Benchmark { alpha } => {
            let inst = ctx.instance()?;
            let fb = first_best(&inst)?;
            let bench = duality_benchmark(&inst, alpha)?;
            let value = serde_json::json!({ "first_best": fb, "alpha": alpha, "benchmark": bench });
            ctx.emit_json(&value, || {
                format!("first-best {fb:.9}\nbenchmark (alpha = {alpha}) {bench:.9}")
            })?;
            Ok(0)
        }
        Command::OptLp { dump_lp } => {
            let inst = ctx.instance()?;
            let lp = build_second_best_lp(&inst)?;
            if let Some(path) = dump_lp {
                write_file(&path, &serde_json::to_string(&lp.problem)?)?;
            }
            let sol = solve_lp(&lp.problem)?;
            let value = serde_json::json!({
                "status": sol.status.as_str(),
                "opt_lp": sol.objective,
                "variables": lp.problem.num_vars(),
                "rows": lp.problem.rows.len(),
                "iterations": sol.iterations,
            });
            ctx.emit_json(&value, || {
                format!(
                    "status {}\nOPT {:.9}\n{} variables, {} rows, {} pivots",
                    sol.status.as_str(),
                    sol.objective,
                    lp.problem.num_vars(),
                    lp.problem.rows.len(),
                    sol.iterations
                )
            })?;
            Ok(0)
        }
        Command::Transform { pipeline, input } => {
            if pipeline != "wbb-to-sbb" {
                return Err(Error::InvalidArgument(format!("unknown pipeline {pipeline:?}")));
            }
            let table = MechanismTable::from_json(&fs::read_to_string(input)?)?;
            let out = wbb_to_sbb_pipeline(&table)?;
            ctx.emit(&out.to_json())?;
            Ok(0)
        }
        Command::Audit {
            input,
            tol_ic,
            tol_bb,
            require,
        } => {
            let table = MechanismTable::from_json(&fs::read_to_string(input)?)?;
            let report = audit_all(&table, tol_ic, tol_bb);
            let known: Vec<&str> = report.entries().iter().map(|(n, _)| *n).collect();
            for r in &require {
                if !known.iter().any(|k| k.eq_ignore_ascii_case(r)) {
                    return Err(Error::InvalidArgument(format!("unknown property {r:?}")));
                }
            }
            let ok = report
                .entries()
                .iter()
                .filter(|(n, _)| require.iter().any(|r| r.eq_ignore_ascii_case(n)))
                .all(|(_, c)| c.pass);
            if !ctx.json {
                print!("{report}");
            }
            if ctx.json || ctx.out.is_some() {
                ctx.emit(&serde_json::to_string_pretty(&report)?)?;
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Suite {
            config,
            count,
            n,
            m,
            max_support,
            family,
            no_opt_lp,
            timing,
        } => {
            let mut config = match config {
                Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
                None => SuiteConfig {
                    runs: vec![SuiteRun {
                        seed_start: cli.seed,
                        count,
                        n,
                        m,
                        max_support,
                        family,
                        opt_lp: !no_opt_lp,
                    }],
                    timing: false,
                },
            };
            config.timing |= timing;
            let reports = run_suite(&config);
            let mut lines = String::new();
            for r in &reports {
                lines.push_str(&serde_json::to_string(r)?);
                lines.push('\n');
            }
            let failures = reports.iter().filter(|r| !r.all_ok()).count();
            match &ctx.out {
                Some(path) => {
                    write_file(path, &lines)?;
                    println!("{} instances, {} failing", reports.len(), failures);
                }
                None => print!("{lines}"),
            }
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}
