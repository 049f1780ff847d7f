//! Command-line front end: argument parsing, JSON output and exit codes.

pub mod pipeline;
pub mod report;

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, OnceLock};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kpell_core::algebraic::dominant_root;
use kpell_core::bigseq::{generate, Family, RecurrenceSpec};
use kpell_core::heights::{report_value, stage1_n_bound, stage2_k_bound, FirstHeightVariant};
use kpell_core::reduction::{stage1_campaign, stage2_campaign, stage3_campaign, CampaignReport};
use kpell_core::search::{exhaustive_search, SearchDomain, SolutionRecord};
use kpell_core::{Error, PrecisionPolicy};
use serde::Serialize;
use serde_json::json;

use pipeline::{campaign_config, campaign_exit, expected_in, verify_paper};
use report::{Exit, PipelineConfig, Status};

#[derive(Parser, Debug)]
#[command(name = "kpell", version, about = "Certified search for repdigits in k-generalized Pell sequences")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print terms of a recurrence preset.
    Generate(GenerateArgs),
    /// Dominant root alpha(k) and g_k(alpha).
    Root(RootArgs),
    /// Linear-form bounds: the small-k chain for one k, or the large-k chain.
    Bound(BoundArgs),
    /// Run one reduction campaign.
    Reduce(ReduceArgs),
    /// Exhaustive repdigit scan.
    Search(SearchArgs),
    /// Full verification pipeline with a JSON report.
    VerifyPaper(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct PrecisionArgs {
    #[arg(long, default_value_t = 2048)]
    precision_bits: u32,
    #[arg(long, default_value_t = 1 << 20)]
    precision_cap: u32,
}

impl PrecisionArgs {
    fn policy(&self) -> kpell_core::Result<PrecisionPolicy> {
        PrecisionPolicy::new(self.precision_bits, self.precision_cap)
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    PellK,
    Pell,
    Fibonacci,
    FibonacciK,
    Lucas,
    PellLucas,
}

impl FamilyArg {
    fn family(self) -> Family {
        match self {
            FamilyArg::PellK | FamilyArg::Pell => Family::Pell,
            FamilyArg::Fibonacci | FamilyArg::FibonacciK => Family::Fibonacci,
            FamilyArg::Lucas => Family::Lucas,
            FamilyArg::PellLucas => Family::PellLucas,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "pell-k")]
    family: FamilyArg,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    n_max: i64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RootArgs {
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Significant digits in the printed balls.
    #[arg(long, default_value_t = 40)]
    digits: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, default_value_t = 3, conflicts_with = "large_k")]
    k: usize,
    /// Use `k log 2` instead of `k log 10` for the first height.
    #[arg(long)]
    log2_height: bool,
    /// Run the k > 400 chain instead.
    #[arg(long)]
    large_k: bool,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct RangeArgs {
    #[arg(long, default_value_t = 3)]
    k_min: usize,
    #[arg(long, default_value_t = 400)]
    k_max: usize,
    #[arg(long, default_value_t = 1)]
    d_min: u8,
    #[arg(long, default_value_t = 9)]
    d_max: u8,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    stage: u8,
    #[command(flatten)]
    range: RangeArgs,
    #[arg(long, default_value_t = 40)]
    advance_budget: usize,
    /// Directory for per-instance checkpoints.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = 3)]
    k_min: usize,
    #[arg(long, default_value_t = 400)]
    k_max: usize,
    /// Defaults to 5, or 1 when `--m-min` is 1.
    #[arg(long)]
    n_min: Option<i64>,
    #[arg(long, default_value_t = 99)]
    n_max: i64,
    #[arg(long, default_value_t = 2)]
    m_min: u32,
    /// Exit 1 unless the hits are exactly the theorem's solutions inside
    /// the domain.
    #[arg(long)]
    expect_theorem: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    range: RangeArgs,
    #[arg(long, default_value_t = 99)]
    n_max: i64,
    #[arg(long, default_value_t = 40)]
    advance_budget: usize,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn cancel_flag() -> Arc<AtomicBool> {
    static FLAG: OnceLock<Arc<AtomicBool>> = OnceLock::new();
    FLAG.get_or_init(|| {
        let flag = Arc::new(AtomicBool::new(false));
        let f = flag.clone();
        // A second registration in the same process is harmless to skip.
        let _ = ctrlc::set_handler(move || f.store(true, std::sync::atomic::Ordering::SeqCst));
        flag
    })
    .clone()
}

fn set_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Exit {
    let text = match serde_json::to_string_pretty(value) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Io;
        }
    };
    let res = match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    match res {
        Ok(()) => Exit::Pass,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            Exit::Io
        }
    }
}

fn fail(e: &Error) -> Exit {
    eprintln!("error: {e}");
    Exit::of_error(e)
}

fn table(lines: impl IntoIterator<Item = String>) {
    let mut err = std::io::stderr();
    if err.is_terminal() {
        for l in lines {
            let _ = writeln!(err, "{l}");
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Usage.code() } else { Exit::Pass.code() };
        }
    };
    let exit = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Root(a) => cmd_root(a),
        Cmd::Bound(a) => cmd_bound(a),
        Cmd::Reduce(a) => cmd_reduce(a),
        Cmd::Search(a) => cmd_search(a),
        Cmd::VerifyPaper(a) => cmd_verify(a),
    };
    exit.code()
}

fn cmd_generate(a: GenerateArgs) -> Exit {
    set_jobs(a.output.jobs);
    let family = a.family.family();
    let res = RecurrenceSpec::preset(family, a.k).and_then(|spec| generate(&spec, a.n_max));
    let w = match res {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    let terms: Vec<_> = w.iter().map(|(n, v)| json!({"n": n, "value": v.to_string()})).collect();
    table(w.iter().map(|(n, v)| format!("{n:>6}  {v}")));
    emit(
        &json!({"family": family.name(), "k": a.k, "n_max": a.n_max, "terms": terms}),
        a.output.out.as_deref(),
    )
}

fn cmd_root(a: RootArgs) -> Exit {
    let root = match a.precision.policy().and_then(|p| dominant_root(a.k, &p)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    table([format!("alpha({}) = {}", a.k, root.alpha), format!("g_k(alpha) = {}", root.g)]);
    emit(
        &json!({
            "k": a.k,
            "alpha": root.alpha.to_decimal(a.digits),
            "g": root.g.to_decimal(a.digits),
            "bracket": [root.lower.to_decimal(a.digits), root.upper.to_decimal(a.digits)],
            "precision_bits": root.alpha.prec(),
        }),
        a.output.out.as_deref(),
    )
}

fn cmd_bound(a: BoundArgs) -> Exit {
    set_jobs(a.output.jobs);
    let policy = match a.precision.policy() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let (value, holds) = if a.large_k {
        match stage2_k_bound(&policy) {
            Ok(b) => (
                json!({
                    "matveev_coefficient": report_value(&b.matveev_coefficient),
                    "log_coefficient": report_value(&b.log_coefficient),
                    "fixed_point": report_value(&b.fixed_point),
                    "k_bound": report_value(&b.k_bound),
                    "n_bound": report_value(&b.n_bound),
                    "m_bound": report_value(&b.m_bound),
                    "steps": b.steps,
                    "holds": b.holds(),
                }),
                b.holds(),
            ),
            Err(e) => return fail(&e),
        }
    } else {
        let variant = if a.log2_height {
            FirstHeightVariant::KLog2
        } else {
            FirstHeightVariant::KLog10
        };
        match stage1_n_bound(a.k, variant, &policy) {
            Ok(b) => (
                json!({
                    "k": b.k,
                    "closed_form": report_value(&b.closed_form),
                    "rederived": report_value(&b.rederived),
                    "matveev_coefficient": report_value(&b.matveev_coefficient),
                    "steps": b.steps,
                    "holds": b.holds(),
                }),
                b.holds(),
            ),
            Err(e) => return fail(&e),
        }
    };
    let exit = emit(&value, a.output.out.as_deref());
    if exit != Exit::Pass {
        exit
    } else if holds {
        Exit::Pass
    } else {
        Exit::Mismatch
    }
}

fn campaign_table(rep: &CampaignReport) {
    let mut lines = vec![format!("stage {}: {} instances, {} failures", rep.stage, rep.records.len(), rep.failures.len())];
    if let Some(b) = &rep.max_reduced_bound {
        lines.push(format!("max reduced bound {} (k={:?}, d={:?})", b.mid, rep.worst_k, rep.worst_d));
    }
    for d in &rep.derived {
        lines.push(format!("{} {}", d.name, d.value));
    }
    table(lines);
}

fn cmd_reduce(a: ReduceArgs) -> Exit {
    set_jobs(a.output.jobs);
    let cfg = PipelineConfig {
        precision_bits: a.precision.precision_bits,
        precision_cap: a.precision.precision_cap,
        k_range: [a.range.k_min, a.range.k_max],
        d_range: [a.range.d_min, a.range.d_max],
        convergent_advance_budget: a.advance_budget,
        checkpoint: a.checkpoint.clone(),
        ..PipelineConfig::default()
    };
    let ccfg = match campaign_config(&cfg, Some(cancel_flag())) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let d = (a.range.d_min, a.range.d_max);
    let res = match a.stage {
        1 => stage1_campaign((a.range.k_min, a.range.k_max), d, &ccfg),
        2 => stage2_campaign(d, &ccfg),
        _ => stage3_campaign(d, &ccfg),
    };
    let rep = match res {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    campaign_table(&rep);
    let exit = emit(&rep, a.output.out.as_deref());
    exit.worst(campaign_exit(&rep))
}

fn cmd_search(a: SearchArgs) -> Exit {
    set_jobs(a.output.jobs);
    let dom = SearchDomain {
        k_min: a.k_min,
        k_max: a.k_max,
        n_min: a.n_min.unwrap_or(if a.m_min >= 2 { 5 } else { 1 }),
        n_max: a.n_max,
        m_min: a.m_min,
    };
    let hits = match exhaustive_search(&dom) {
        Ok(h) => h,
        Err(e) => return fail(&e),
    };
    table(hits.iter().map(|h| format!("n={} k={} d={} m={} value={}", h.n, h.k, h.d, h.m, h.value)));
    let exit = emit(&json!({"domain": dom, "solutions": hits}), a.output.out.as_deref());
    if exit != Exit::Pass || !a.expect_theorem {
        return exit;
    }
    let mut got: Vec<_> = hits.iter().map(SolutionRecord::tuple).collect();
    got.sort();
    let mut want = expected_in(&dom);
    want.sort();
    if got == want {
        Exit::Pass
    } else {
        eprintln!("solutions differ from the expected set {want:?}");
        Exit::Mismatch
    }
}

fn cmd_verify(a: VerifyArgs) -> Exit {
    set_jobs(a.output.jobs);
    let cfg = PipelineConfig {
        precision_bits: a.precision.precision_bits,
        precision_cap: a.precision.precision_cap,
        k_range: [a.range.k_min, a.range.k_max],
        d_range: [a.range.d_min, a.range.d_max],
        n_max: a.n_max,
        convergent_advance_budget: a.advance_budget,
        output: a.output.out.clone(),
        checkpoint: a.checkpoint.clone(),
        jobs: a.output.jobs,
    };
    let (report, exit) = match verify_paper(&cfg, cancel_flag()) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    table(report.stages.iter().map(|s| {
        let status = match s.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Info => "info",
        };
        format!("{status:<5} {:<26} {:>8} ms", s.name, s.elapsed_ms)
    }));
    emit(&report, a.output.out.as_deref()).worst(exit)
}
