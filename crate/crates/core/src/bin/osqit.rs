//! Command-line front end: compute one-shot quantities, run the
//! verification suites, and emit expansion/residual data.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use oneshot_qit::bounds::BoundInterval;
use oneshot_qit::distances;
use oneshot_qit::entropies;
use oneshot_qit::error::{QitError, Result};
use oneshot_qit::hypotest::{self, ClassicalIIDSpec};
use oneshot_qit::moddev::{
    self, ExpansionInputs, ExpansionTask, ModerateSequence, ResidualTask,
};
use oneshot_qit::optimize::OptimizerConfig;
use oneshot_qit::protocols::{self, ConvexSplitInstance};
use oneshot_qit::qchannels::{
    channel_functionals, meta_converse_bound, Channel, ChannelJson, MetaConverseMode,
};
use oneshot_qit::qregisters::{
    DensityState, HermitianOperator, MatrixJson, RegisterShape,
};
use oneshot_qit::smoothing;
use oneshot_qit::testutil::{rand_povm, rand_pure, seeded_rng};
use oneshot_qit::verify::{SuiteReport, VerifyConfig};

#[derive(Parser)]
#[command(name = "osqit", version, about = "one-shot quantum information toolkit")]
struct Cli {
    /// Write output here instead of stdout (written atomically)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropic quantities of one or two states
    Entropy(EntropyArgs),
    /// Distance measures between two states
    Dist(DistArgs),
    /// Hypothesis-testing relative entropy
    Dh(DhArgs),
    /// Certified two-sided bounds on smoothed quantities
    SmoothBounds(SmoothArgs),
    /// Channel functionals and meta-converse bounds
    Channel(ChannelArgs),
    /// Moderate-deviation expansion curve
    Expand(ExpandArgs),
    /// Residuals of computed one-shot values against the expansion
    Residual(ResidualArgs),
    /// Run a verification suite (or all of them)
    Verify(VerifyArgs),
    /// Protocol demonstrations
    Protocol(ProtocolArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EntropyKind {
    VonNeumann,
    Varentropy,
    Relative,
    RelativeVariance,
    Dmax,
    Dmin,
    Sandwiched,
    Petz,
    Mutual,
    MutualVariance,
    Imax,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long, value_enum)]
    kind: EntropyKind,
    /// State JSON file
    #[arg(long)]
    rho: PathBuf,
    /// Second operator JSON file (relative-type kinds)
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Rényi order (sandwiched, petz)
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated A-side labels (mutual, imax)
    #[arg(long)]
    a_labels: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Trace,
    TraceNorm,
    Fidelity,
    GeneralizedFidelity,
    Purified,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    kind: DistKind,
    #[arg(long)]
    rho: PathBuf,
    #[arg(long)]
    sigma: PathBuf,
}

#[derive(Args)]
struct DhArgs {
    /// State JSON file (quantum route)
    #[arg(long)]
    rho: Option<PathBuf>,
    /// Second operator JSON file (quantum route)
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Comma-separated distribution (classical i.i.d. route)
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Number of i.i.d. copies (classical route)
    #[arg(long)]
    n: Option<usize>,
    /// Type-I error budget
    #[arg(long)]
    eps: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothKind {
    Dmax,
    Dmin,
    Imax,
}

#[derive(Args)]
struct SmoothArgs {
    #[arg(long, value_enum)]
    kind: SmoothKind,
    #[arg(long)]
    rho: PathBuf,
    #[arg(long)]
    sigma: Option<PathBuf>,
    #[arg(long)]
    eps: f64,
    /// Chain constant for dmin (k > 1)
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    /// Comma-separated R-side labels (imax)
    #[arg(long)]
    r_labels: Option<String>,
    /// Tensor copies (imax)
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelOp {
    Functionals,
    MetaConverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConverseMode {
    CovariantMes,
    General,
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel JSON file (Kraus operators)
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, value_enum)]
    op: ChannelOp,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum, default_value = "covariant-mes")]
    mode: ConverseMode,
    /// RNG seed, recorded in the output
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpandTaskArg {
    #[value(alias = "state_splitting")]
    StateSplitting,
    #[value(alias = "source_low")]
    SourceLow,
    #[value(alias = "source_high")]
    SourceHigh,
    #[value(alias = "channel_sim")]
    ChannelSim,
    #[value(alias = "channel_coding")]
    ChannelCoding,
    #[value(alias = "imax_partial")]
    ImaxPartial,
}

#[derive(Args)]
struct ExpandArgs {
    #[arg(long, value_enum)]
    task: ExpandTaskArg,
    /// State JSON file (source and bipartite tasks)
    #[arg(long)]
    state: Option<PathBuf>,
    /// Channel JSON file (channel tasks)
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Comma-separated R-side labels (state-splitting, imax-partial)
    #[arg(long)]
    r_labels: Option<String>,
    /// Power sequence a_n = n^(α−1/2)
    #[arg(long)]
    alpha: f64,
    /// Copy range START..END (geometric doubling) or a single integer
    #[arg(long)]
    n: String,
    /// RNG seed for the channel optimizer, recorded in the output
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResidualTaskArg {
    #[value(alias = "dh_iid_low")]
    DhIidLow,
    #[value(alias = "dh_iid_high")]
    DhIidHigh,
    #[value(alias = "imax_partial_upper")]
    ImaxPartialUpper,
}

#[derive(Args)]
struct ResidualArgs {
    #[arg(long, value_enum)]
    task: ResidualTaskArg,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Comma-separated joint diagonal on A×B (imax-partial-upper)
    #[arg(long)]
    joint: Option<String>,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    /// Power sequence a_n = n^(α−1/2)
    #[arg(long)]
    alpha: f64,
    /// Copy range START..END (geometric doubling) or a single integer
    #[arg(long)]
    n: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or "all"
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the per-suite report here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolDemo {
    ConvexSplit,
    DeFinetti,
    StrongConverse,
    Teleport,
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long, value_enum)]
    demo: ProtocolDemo,
    /// Bipartite state JSON on registers [B, R] (convex-split)
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Codebook size (strong-converse)
    #[arg(long)]
    m: Option<usize>,
    /// Success probability (teleport)
    #[arg(long)]
    p_succ: Option<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("ONE_SHOT_QIT_THREADS") {
        if let Ok(t) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                QitError::Parse(_) | QitError::Io(_) => 2,
                QitError::Domain(_)
                | QitError::Cutoff(_)
                | QitError::ShapeMismatch(_)
                | QitError::UnknownLabel(_)
                | QitError::LabelCollision(_)
                | QitError::NotHermitian(_)
                | QitError::NotPositive(_)
                | QitError::InvalidTrace(_)
                | QitError::FunctionUndefined(_) => 3,
                _ => 1,
            })
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Entropy(a) => emit(cli.out.as_deref(), &cmd_entropy(a)?),
        Command::Dist(a) => emit(cli.out.as_deref(), &cmd_dist(a)?),
        Command::Dh(a) => emit(cli.out.as_deref(), &cmd_dh(a)?),
        Command::SmoothBounds(a) => emit(cli.out.as_deref(), &cmd_smooth(a)?),
        Command::Channel(a) => emit(cli.out.as_deref(), &cmd_channel(a)?),
        Command::Expand(a) => emit(cli.out.as_deref(), &cmd_expand(a)?),
        Command::Residual(a) => emit(cli.out.as_deref(), &cmd_residual(a)?),
        Command::Verify(a) => return cmd_verify(cli.out.as_deref(), a),
        Command::Protocol(a) => emit(cli.out.as_deref(), &cmd_protocol(a)?),
    }?;
    Ok(0)
}

// ---- input/output plumbing ----

fn load_op(path: &Path) -> Result<HermitianOperator> {
    let text = std::fs::read_to_string(path)?;
    let mj: MatrixJson = serde_json::from_str(&text)?;
    mj.to_operator()
}

fn load_state(path: &Path) -> Result<DensityState> {
    DensityState::new(load_op(path)?)
}

fn load_channel(path: &Path) -> Result<Channel> {
    let text = std::fs::read_to_string(path)?;
    let cj: ChannelJson = serde_json::from_str(&text)?;
    cj.to_channel()
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        None => {
            println!("{content}");
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, format!("{content}\n"))?;
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| QitError::Parse(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

fn parse_labels(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).collect()
}

/// "START..END" expands by doubling from START; a bare integer is a
/// single point. END is always included.
fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let bad = |s: &str| QitError::Parse(format!("bad copy range {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let start: usize = a.trim().parse().map_err(|_| bad(s))?;
        let end: usize = b.trim().parse().map_err(|_| bad(s))?;
        if start == 0 || end < start {
            return Err(bad(s));
        }
        let mut out = Vec::new();
        let mut n = start;
        while n < end {
            out.push(n);
            n *= 2;
        }
        out.push(end);
        Ok(out)
    } else {
        let n: usize = s.trim().parse().map_err(|_| bad(s))?;
        if n == 0 {
            return Err(bad(s));
        }
        Ok(vec![n])
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| QitError::Parse(format!("missing required flag --{flag}")))
}

fn need_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| QitError::Parse("--seed is required for stochastic jobs".into()))
}

fn scalar_json(command: &str, kind: &str, bits: f64, finite: bool) -> String {
    serde_json::to_string_pretty(&json!({
        "command": command,
        "kind": kind,
        "bits": bits,
        "finite": finite,
    }))
    .expect("json")
}

// ---- commands ----

fn cmd_entropy(a: &EntropyArgs) -> Result<String> {
    let rho = load_state(&a.rho)?;
    let kind = clap::ValueEnum::to_possible_value(&a.kind)
        .unwrap()
        .get_name()
        .to_string();
    let sigma = || -> Result<HermitianOperator> { load_op(&need(&a.sigma, "sigma")?) };
    let a_labels = || -> Result<Vec<String>> { Ok(parse_labels(&need(&a.a_labels, "a-labels")?)) };
    let v = match a.kind {
        EntropyKind::VonNeumann => entropies::von_neumann(&rho),
        EntropyKind::Varentropy => entropies::varentropy(&rho),
        EntropyKind::Relative => {
            entropies::relative_entropy(&rho.as_subnormalized(), &sigma()?)
        }
        EntropyKind::RelativeVariance => {
            entropies::relative_entropy_variance(&rho.as_subnormalized(), &sigma()?)
        }
        EntropyKind::Dmax => entropies::dmax(&rho.as_subnormalized(), &sigma()?),
        EntropyKind::Dmin => entropies::dmin(&rho.as_subnormalized(), &sigma()?),
        EntropyKind::Sandwiched => {
            entropies::sandwiched_renyi(&rho, &sigma()?, need(&a.alpha, "alpha")?)?
        }
        EntropyKind::Petz => {
            entropies::petz_renyi(&rho, &sigma()?, need(&a.alpha, "alpha")?)?
        }
        EntropyKind::Mutual => {
            let labels = a_labels()?;
            let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
            entropies::mutual_information(&rho, &refs)?
        }
        EntropyKind::MutualVariance => {
            let labels = a_labels()?;
            let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
            entropies::mutual_information_variance(&rho, &refs)?
        }
        EntropyKind::Imax => {
            let labels = a_labels()?;
            let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
            let b_labels: Vec<&str> = rho
                .op()
                .shape()
                .labels()
                .iter()
                .filter(|l| !refs.contains(&l.as_str()))
                .map(|l| l.as_str())
                .collect();
            let tau = oneshot_qit::qregisters::partial_trace(rho.op(), &b_labels)?;
            entropies::imax(&rho, &tau)?
        }
    };
    Ok(scalar_json("entropy", &kind, v.bits, v.finite))
}

fn cmd_dist(a: &DistArgs) -> Result<String> {
    let rho = load_state(&a.rho)?.as_subnormalized();
    let sig_op = load_op(&a.sigma)?;
    let (kind, value) = match a.kind {
        DistKind::Trace => (
            "trace",
            distances::trace_distance(
                &rho,
                &oneshot_qit::qregisters::SubnormalizedState::new(sig_op)?,
            )?,
        ),
        DistKind::TraceNorm => ("trace-norm", distances::trace_norm(&rho.op().sub(&sig_op)?)),
        DistKind::Fidelity => (
            "fidelity",
            distances::fidelity(
                &rho,
                &oneshot_qit::qregisters::SubnormalizedState::new(sig_op)?,
            )?,
        ),
        DistKind::GeneralizedFidelity => (
            "generalized-fidelity",
            distances::generalized_fidelity(
                &rho,
                &oneshot_qit::qregisters::SubnormalizedState::new(sig_op)?,
            )?,
        ),
        DistKind::Purified => (
            "purified",
            distances::purified_distance(
                &rho,
                &oneshot_qit::qregisters::SubnormalizedState::new(sig_op)?,
            )?,
        ),
    };
    Ok(serde_json::to_string_pretty(&json!({
        "command": "dist",
        "kind": kind,
        "value": value,
    }))
    .expect("json"))
}

fn cmd_dh(a: &DhArgs) -> Result<String> {
    if let (Some(p), Some(q)) = (&a.p, &a.q) {
        let n = need(&a.n, "n")?;
        let spec = ClassicalIIDSpec::new(parse_list(p)?, parse_list(q)?, n)?;
        let v = hypotest::dh_classical_iid(&spec, a.eps)?;
        return Ok(serde_json::to_string_pretty(&json!({
            "command": "dh",
            "route": "classical-iid",
            "n": n,
            "eps": a.eps,
            "bits": v.bits,
            "bits_per_copy": v.bits / n as f64,
            "finite": v.finite,
        }))
        .expect("json"));
    }
    let rho = load_state(&need(&a.rho, "rho")?)?;
    let sigma = load_op(&need(&a.sigma, "sigma")?)?;
    let v = hypotest::dh(&rho, &sigma, a.eps)?;
    Ok(serde_json::to_string_pretty(&json!({
        "command": "dh",
        "route": "quantum",
        "eps": a.eps,
        "bits": v.bits,
        "finite": v.finite,
    }))
    .expect("json"))
}

fn interval_json(command: &str, kind: &str, b: &BoundInterval, eps: f64) -> String {
    serde_json::to_string_pretty(&json!({
        "command": command,
        "kind": kind,
        "eps": eps,
        "lower": b.lower,
        "upper": b.upper,
        "lower_provenance": b.lower_provenance,
        "upper_provenance": b.upper_provenance,
    }))
    .expect("json")
}

fn cmd_smooth(a: &SmoothArgs) -> Result<String> {
    let rho = load_state(&a.rho)?;
    match a.kind {
        SmoothKind::Dmax => {
            let sigma = load_op(&need(&a.sigma, "sigma")?)?;
            let b = smoothing::dmax_smoothed_bounds(&rho, &sigma, a.eps)?;
            Ok(interval_json("smooth-bounds", "dmax", &b, a.eps))
        }
        SmoothKind::Dmin => {
            let sigma = load_op(&need(&a.sigma, "sigma")?)?;
            let lower = smoothing::dmin_smoothed_lower(&rho, &sigma, a.eps)?;
            let upper = smoothing::dmin_smoothed_upper(&rho, &sigma, a.eps, a.k, None)?;
            let b = BoundInterval::new(
                lower.min(upper),
                upper,
                "unsmoothed feasible point",
                &format!("hypothesis-testing chain, k={}", a.k),
            );
            Ok(interval_json("smooth-bounds", "dmin", &b, a.eps))
        }
        SmoothKind::Imax => {
            let labels = parse_labels(&need(&a.r_labels, "r-labels")?);
            let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
            let b = smoothing::imax_partially_smoothed_bounds(&rho, &refs, a.n, a.eps)?;
            Ok(interval_json("smooth-bounds", "imax", &b, a.eps))
        }
    }
}

fn cmd_channel(a: &ChannelArgs) -> Result<String> {
    let ch = load_channel(&a.channel)?;
    match a.op {
        ChannelOp::Functionals => {
            let seed = need_seed(a.seed)?;
            let cfg = OptimizerConfig {
                seed,
                ..OptimizerConfig::default()
            };
            let f = channel_functionals(&ch, &cfg)?;
            Ok(serde_json::to_string_pretty(&json!({
                "command": "channel",
                "op": "functionals",
                "seed": seed,
                "capacity_like": f.capacity_like,
                "vmax": f.vmax,
                "optimizer": {
                    "starts": f.report.starts,
                    "best": f.report.best,
                    "spread": f.report.spread,
                    "converged": f.report.converged,
                },
            }))
            .expect("json"))
        }
        ChannelOp::MetaConverse => {
            let eps = need(&a.eps, "eps")?;
            let mode = match a.mode {
                ConverseMode::CovariantMes => MetaConverseMode::CovariantMes,
                ConverseMode::General => MetaConverseMode::GeneralLowerConf,
            };
            let v = meta_converse_bound(&ch, eps, mode)?;
            Ok(serde_json::to_string_pretty(&json!({
                "command": "channel",
                "op": "meta-converse",
                "mode": match a.mode {
                    ConverseMode::CovariantMes => "covariant-mes",
                    ConverseMode::General => "general",
                },
                "eps": eps,
                "bits_per_use": v,
            }))
            .expect("json"))
        }
    }
}

fn cmd_expand(a: &ExpandArgs) -> Result<String> {
    let ns = parse_n_range(&a.n)?;
    let seq = ModerateSequence::Power { alpha: a.alpha };
    let mut inputs = ExpansionInputs {
        mutual_information: None,
        mi_variance: None,
        entropy: None,
        varentropy: None,
        capacity: None,
        vmax: None,
    };
    let mut seed_line = String::new();
    let task = match a.task {
        ExpandTaskArg::StateSplitting => ExpansionTask::StateSplitting,
        ExpandTaskArg::SourceLow => ExpansionTask::SourceLow,
        ExpandTaskArg::SourceHigh => ExpansionTask::SourceHigh,
        ExpandTaskArg::ChannelSim => ExpansionTask::ChannelSim,
        ExpandTaskArg::ChannelCoding => ExpansionTask::ChannelCoding,
        ExpandTaskArg::ImaxPartial => ExpansionTask::ImaxPartial,
    };
    match task {
        ExpansionTask::SourceLow | ExpansionTask::SourceHigh => {
            let rho = load_state(&need(&a.state, "state")?)?;
            inputs.entropy = Some(entropies::von_neumann(&rho).bits);
            inputs.varentropy = Some(entropies::varentropy(&rho).bits);
        }
        ExpansionTask::StateSplitting | ExpansionTask::ImaxPartial => {
            let rho = load_state(&need(&a.state, "state")?)?;
            let labels = parse_labels(&need(&a.r_labels, "r-labels")?);
            let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
            inputs.mutual_information = Some(entropies::mutual_information(&rho, &refs)?.bits);
            inputs.mi_variance = Some(entropies::mutual_information_variance(&rho, &refs)?.bits);
        }
        ExpansionTask::ChannelSim | ExpansionTask::ChannelCoding => {
            let ch = load_channel(&need(&a.channel, "channel")?)?;
            let seed = need_seed(a.seed)?;
            let cfg = OptimizerConfig {
                seed,
                ..OptimizerConfig::default()
            };
            let f = channel_functionals(&ch, &cfg)?;
            inputs.capacity = Some(f.capacity_like);
            inputs.vmax = Some(f.vmax);
            seed_line = format!("# seed={seed}\n");
        }
    }
    let mut csv = format!("{seed_line}n,a_n,eps_n,predicted\n");
    for &n in &ns {
        let a_n = seq.a(n)?;
        let eps_n = seq.eps(n)?;
        let predicted = moddev::expansion(task, &inputs, &seq, n)?;
        csv.push_str(&format!("{n},{a_n},{eps_n},{predicted}\n"));
    }
    Ok(csv.trim_end().to_string())
}

fn cmd_residual(a: &ResidualArgs) -> Result<String> {
    let ns = parse_n_range(&a.n)?;
    let seq = ModerateSequence::Power { alpha: a.alpha };
    let task = match a.task {
        ResidualTaskArg::DhIidLow => ResidualTask::DhIidLow {
            p: parse_list(&need(&a.p, "p")?)?,
            q: parse_list(&need(&a.q, "q")?)?,
        },
        ResidualTaskArg::DhIidHigh => ResidualTask::DhIidHigh {
            p: parse_list(&need(&a.p, "p")?)?,
            q: parse_list(&need(&a.q, "q")?)?,
        },
        ResidualTaskArg::ImaxPartialUpper => ResidualTask::ImaxPartialUpper {
            joint: parse_list(&need(&a.joint, "joint")?)?,
            na: need(&a.na, "na")?,
            nb: need(&a.nb, "nb")?,
        },
    };
    let points = moddev::residual_curve(&task, &seq, &ns)?;
    Ok(moddev::residual_csv(&points).trim_end().to_string())
}

fn cmd_verify(out: Option<&Path>, a: &VerifyArgs) -> Result<u8> {
    let seed = need_seed(a.seed)?;
    let cfg = VerifyConfig {
        trials: a.trials,
        seed,
    };
    let report: SuiteReport = if a.suite == "all" {
        oneshot_qit::verify::run_all(&cfg)?
    } else {
        SuiteReport {
            results: vec![oneshot_qit::verify::run_suite(&a.suite, &cfg)?],
        }
    };
    let mut text = format!("# seed={seed} trials={}\n", a.trials);
    for r in &report.results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        text.push_str(&format!("{tag} {}: {}\n", r.name, r.detail));
    }
    let all = report.all_pass();
    text.push_str(if all { "all suites passed\n" } else { "FAILURES present\n" });
    emit(out, text.trim_end())?;
    if let Some(path) = &a.report {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, &text)?;
        std::fs::rename(&tmp, path)?;
    }
    Ok(if all { 0 } else { 1 })
}

fn cmd_protocol(a: &ProtocolArgs) -> Result<String> {
    match a.demo {
        ProtocolDemo::ConvexSplit => {
            let rho_br = load_state(&need(&a.state, "state")?)?;
            let labels = rho_br.op().shape().labels().to_vec();
            if labels.len() != 2 {
                return Err(QitError::ShapeMismatch(
                    "convex split needs a state on exactly two registers [B, R]".into(),
                ));
            }
            let sigma_b = rho_br.marginal(&[labels[1].as_str()])?;
            let inst = ConvexSplitInstance {
                rho_br,
                sigma_b,
                n: a.n.unwrap_or(4),
                delta: a.delta.unwrap_or(0.5),
            };
            let rep = protocols::convex_split_check(&inst)?;
            Ok(serde_json::to_string_pretty(&json!({
                "command": "protocol",
                "demo": "convex-split",
                "n": inst.n,
                "delta": inst.delta,
                "fidelity": rep.fidelity,
                "bound": rep.bound,
                "hypothesis_holds": rep.hypothesis_holds,
                "pass": rep.pass,
            }))
            .expect("json"))
        }
        ProtocolDemo::DeFinetti => {
            let n = a.n.unwrap_or(2);
            let d = a.d.unwrap_or(2);
            let obj = protocols::de_finetti(n, d)?;
            let zeta = MatrixJson::from_operator(obj.zeta.op());
            Ok(serde_json::to_string_pretty(&json!({
                "command": "protocol",
                "demo": "de-finetti",
                "n": n,
                "d": d,
                "g": obj.g.to_string(),
                "g_bound": protocols::de_finetti_g_bound(n, d),
                "sym_dim": obj.sym_dim.to_string(),
                "zeta": zeta,
            }))
            .expect("json"))
        }
        ProtocolDemo::StrongConverse => {
            let seed = need_seed(a.seed)?;
            let mut rng = seeded_rng(seed);
            let d = a.d.unwrap_or(2);
            let n = a.n.unwrap_or(2);
            let m = a.m.unwrap_or(8);
            let dim = d
                .checked_pow(n as u32)
                .ok_or_else(|| QitError::Cutoff("d^n overflow".into()))?;
            let shape = RegisterShape::single("X", dim);
            let mut worst_margin = f64::INFINITY;
            let mut worst = None;
            for _ in 0..a.trials {
                let states: Vec<DensityState> = (0..m)
                    .map(|_| rand_pure(&mut rng, shape.clone()).density())
                    .collect::<Result<_>>()?;
                let povm: Vec<HermitianOperator> = rand_povm(&mut rng, dim, m)
                    .into_iter()
                    .map(|e| HermitianOperator::new(shape.clone(), e))
                    .collect::<Result<_>>()?;
                let rep = protocols::strong_converse_check(&states, &povm, d, n)?;
                let margin = rep.bound.min(1.0) - rep.p_succ;
                if margin < worst_margin {
                    worst_margin = margin;
                    worst = Some(rep);
                }
            }
            let rep = worst.ok_or_else(|| QitError::Domain("--trials must be ≥ 1".into()))?;
            Ok(serde_json::to_string_pretty(&json!({
                "command": "protocol",
                "demo": "strong-converse",
                "seed": seed,
                "trials": a.trials,
                "d": d,
                "n": n,
                "m": m,
                "worst_p_succ": rep.p_succ,
                "bound": rep.bound,
                "worst_margin": worst_margin,
                "pass": rep.pass,
            }))
            .expect("json"))
        }
        ProtocolDemo::Teleport => {
            let seed = need_seed(a.seed)?;
            let mut rng = seeded_rng(seed);
            let p_succ = a.p_succ.unwrap_or(0.75);
            let d = a.d.unwrap_or(2);
            let rep = protocols::teleport_coding_check(p_succ, d, a.trials, &mut rng)?;
            Ok(serde_json::to_string_pretty(&json!({
                "command": "protocol",
                "demo": "teleport",
                "seed": seed,
                "trials": a.trials,
                "p_succ": p_succ,
                "d": d,
                "worst_purified_distance": rep.worst,
                "bound": rep.bound,
            }))
            .expect("json"))
        }
    }
}
