//! `qccd`: compile multi-tenant workloads, generate attacks, run sweeps,
//! apply defenses and emit benchmark programs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qccd_core::analysis::{max_victim_size, sweep_assumptions, SweepMethod};
use qccd_core::attack::random::{prune, prune_against, pseudo_victim, search_best, PruneResult};
use qccd_core::attack::systematic::{assemble, AttackSpec};
use qccd_core::bench::{gen_adder, gen_qaoa, gen_qft};
use qccd_core::defenses::{admit, hybrid_map_scoped, pad_victim};
use qccd_core::scheduler::{summarize, write_trace_csv, ScheduleSummary};
use qccd_core::{compile, emit_program, parse_program, place_multi, DeviceConfig, Policy, Program, RandomScope};

#[derive(Parser)]
#[command(name = "qccd", version, about = "Multi-tenant trapped-ion QCCD compiler and attack/defense toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Place and compile one or more programs on a shared device.
    Compile(CompileArgs),
    /// Generate an adversarial program.
    #[command(subcommand)]
    Attack(AttackCmd),
    /// Shuttle counts of attacks built for each assumed victim size against each actual size.
    Sweep(SweepArgs),
    #[command(subcommand)]
    Defend(DefendCmd),
    /// Emit a benchmark program.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Args, Clone)]
struct DeviceArgs {
    /// Device config JSON; defaults to two traps of 15 with 2 communication slots.
    #[arg(long)]
    device: Option<PathBuf>,
    /// Override the trap capacity.
    #[arg(long)]
    trap_cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mapping {
    Greedy,
    Random,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Segment,
    Trap,
}

impl From<Scope> for RandomScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Segment => RandomScope::Segment,
            Scope::Trap => RandomScope::Trap,
        }
    }
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    device: DeviceArgs,
    /// Program file; repeat for each tenant, in placement order.
    #[arg(long = "program", required = true)]
    programs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "greedy")]
    mapping: Mapping,
    #[arg(long, value_enum, default_value = "segment")]
    random_scope: Scope,
    /// Random draws tried by hybrid mapping.
    #[arg(long, default_value_t = 1)]
    hybrid_draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Summary JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Event trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AttackCmd {
    /// Build the SC + bridge + IMC program.
    Systematic(SystematicArgs),
    /// Search random all-pairs programs and prune the best.
    Random(RandomArgs),
}

#[derive(Args)]
struct SystematicArgs {
    #[arg(long, default_value_t = 15)]
    trap_cap: usize,
    #[arg(long, default_value_t = 2)]
    comm_cap: usize,
    /// Adversary qubits; defaults to trap capacity + 3.
    #[arg(long)]
    adversary_size: Option<usize>,
    #[arg(long, default_value_t = 8)]
    assumed_victim: usize,
    #[arg(long, default_value_t = 80)]
    sc_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Program file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sidecar JSON; defaults to the program path with a `.json` extension.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PruneMetric {
    /// Pseudo-victim of the size the best candidate hurts most.
    Single,
    /// Sum over all pseudo-victims.
    Mean,
}

#[derive(Args)]
struct RandomArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, default_value_t = 1000)]
    candidates: usize,
    /// Adversary qubits; defaults to trap capacity + 3.
    #[arg(long)]
    adversary_size: Option<usize>,
    /// Pseudo-victim sizes, e.g. `2..12` (inclusive) or `2,4,8`.
    #[arg(long, default_value = "2..12")]
    victim_sizes: String,
    #[arg(long, value_enum, default_value = "single")]
    prune_metric: PruneMetric,
    #[arg(long)]
    no_prune: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Program file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report JSON; defaults to the program path with a `.json` extension.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Systematic,
    Random,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, value_enum, default_value = "systematic")]
    method: Method,
    /// Victim sizes; defaults to `2..(trap capacity - 3)`.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long, default_value_t = 80)]
    sc_length: usize,
    /// Candidates per assumed size for the random method.
    #[arg(long, default_value_t = 100)]
    candidates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV matrix; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full table with per-row statistics.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DefendCmd {
    /// Grow a program with idle dummy qubits.
    Pad(PadArgs),
    /// Best of greedy and random mappings.
    Hybrid(HybridArgs),
    /// Isolate programs whose solo shuttle count exceeds a threshold.
    Admit(AdmitArgs),
}

#[derive(Args)]
struct PadArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    target: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HybridArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long = "program", required = true)]
    programs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    hybrid_draws: usize,
    #[arg(long, value_enum, default_value = "segment")]
    random_scope: Scope,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdmitArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long = "program", required = true)]
    programs: Vec<PathBuf>,
    #[arg(long)]
    max_shuttles: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCmd {
    Qft(BenchArgs),
    Adder(BenchArgs),
    Qaoa(QaoaArgs),
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QaoaArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Bad input or an I/O problem.
    Usage(String),
    Domain(qccd_core::Error),
}

impl From<qccd_core::Error> for Failure {
    fn from(e: qccd_core::Error) -> Self {
        Failure::Domain(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Write to `path`, or print when there is none.
fn emit(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn load_device(a: &DeviceArgs) -> Res<DeviceConfig> {
    let mut cfg = match &a.device {
        Some(p) => DeviceConfig::from_json(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => DeviceConfig::default(),
    };
    if let Some(c) = a.trap_cap {
        cfg.trap_capacity = c;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn load_program(path: &Path) -> Res<Program> {
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let p = parse_program(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(p.with_id(id))
}

fn load_programs(paths: &[PathBuf]) -> Res<Vec<Program>> {
    paths.iter().map(|p| load_program(p)).collect()
}

/// `a..b` and `a..=b` are both inclusive; otherwise a comma list.
fn parse_sizes(s: &str) -> Res<Vec<usize>> {
    let bad = || Failure::Usage(format!("bad size list `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let sizes = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        (a..=b).collect::<Vec<_>>()
    } else {
        s.split(',').map(num).collect::<Res<Vec<_>>>()?
    };
    if sizes.is_empty() {
        return Err(bad());
    }
    Ok(sizes)
}

fn sidecar_path(out: Option<&Path>, explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| out.map(|p| p.with_extension("json")))
}

#[derive(Serialize)]
struct CompileReport {
    #[serde(flatten)]
    summary: ScheduleSummary,
    mapping: &'static str,
    seed: u64,
    /// Per-branch detail when hybrid mapping ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    hybrid: Option<HybridDetail>,
    initial_chains: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct HybridDetail {
    chosen: &'static str,
    chosen_seed: Option<u64>,
    greedy_shuttles: usize,
    random_shuttles: Vec<usize>,
}

fn chains(st: &qccd_core::MachineState) -> Vec<Vec<String>> {
    st.chains()
        .iter()
        .map(|c| c.iter().map(|i| i.to_string()).collect())
        .collect()
}

fn policy_name(p: Policy) -> &'static str {
    match p {
        Policy::Greedy => "greedy",
        Policy::Random(_) => "random",
    }
}

fn cmd_compile(a: CompileArgs) -> Res<()> {
    let cfg = load_device(&a.device)?;
    let programs = load_programs(&a.programs)?;
    let scope = RandomScope::from(a.random_scope);
    let (init, schedule, hybrid) = match a.mapping {
        Mapping::Greedy | Mapping::Random => {
            let policy = match a.mapping {
                Mapping::Greedy => Policy::Greedy,
                _ => Policy::Random(scope),
            };
            let init = place_multi(&programs, policy, &cfg, a.seed)?;
            let s = compile(&programs, &init, &cfg)?;
            (init, s, None)
        }
        Mapping::Hybrid => {
            let h = hybrid_map_scoped(&programs, &cfg, a.seed, a.hybrid_draws, scope)?;
            let detail = HybridDetail {
                chosen: policy_name(h.chosen),
                chosen_seed: h.chosen_seed,
                greedy_shuttles: h.greedy_shuttles,
                random_shuttles: h.random_shuttles,
            };
            (h.state, h.schedule, Some(detail))
        }
    };
    if let Some(t) = &a.trace {
        let mut buf = Vec::new();
        write_trace_csv(&schedule, &mut buf).map_err(|e| Failure::Usage(e.to_string()))?;
        write(t, &String::from_utf8(buf).expect("trace is utf-8"))?;
    }
    let report = CompileReport {
        summary: summarize(&programs, &schedule),
        mapping: match a.mapping {
            Mapping::Greedy => "greedy",
            Mapping::Random => "random",
            Mapping::Hybrid => "hybrid",
        },
        seed: a.seed,
        hybrid,
        initial_chains: chains(&init),
    };
    emit(a.out.as_deref(), &json(&report))
}

#[derive(Serialize)]
struct SystematicSidecar<'a> {
    schema: &'static str,
    spec: &'a AttackSpec,
    predicted_shuttles: usize,
    program_length: usize,
    sc_length: usize,
    sc_exhausted: bool,
    bridge: String,
    imc_length: usize,
    sc_steps: &'a [qccd_core::attack::systematic::ScStep],
}

fn cmd_systematic(a: SystematicArgs) -> Res<()> {
    let spec = AttackSpec {
        comm_capacity: a.comm_cap,
        adversary_size: a.adversary_size.unwrap_or(a.trap_cap + 3),
        ..AttackSpec::new(a.trap_cap, a.assumed_victim, a.sc_length, a.seed)
    };
    let atk = assemble(&spec)?;
    emit(a.out.as_deref(), &emit_program(&atk.program))?;
    if let Some(p) = sidecar_path(a.out.as_deref(), a.sidecar.as_deref()) {
        let side = SystematicSidecar {
            schema: "qccd.attack.systematic.v1",
            spec: &atk.spec,
            predicted_shuttles: atk.predicted_shuttles,
            program_length: atk.program.len(),
            sc_length: atk.sc.gates.len(),
            sc_exhausted: atk.sc.exhausted,
            bridge: atk.bridge.to_string(),
            imc_length: atk.imc_len,
            sc_steps: &atk.sc.steps,
        };
        write(&p, &json(&side))?;
    }
    if atk.sc.exhausted {
        eprintln!(
            "warning: SC block stopped at {} of {} gates",
            atk.sc.gates.len(),
            spec.sc_block_length
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct PruneReport {
    metric: PruneMetric,
    victim_sizes: Vec<usize>,
    #[serde(flatten)]
    result: PruneResult,
}

#[derive(Serialize)]
struct RandomReport {
    schema: &'static str,
    seed: u64,
    trap_capacity: usize,
    adversary_size: usize,
    candidates: usize,
    victim_sizes: Vec<usize>,
    best_index: usize,
    best_mean: f64,
    means: Vec<f64>,
    shuttles: Vec<Vec<usize>>,
    prune: Option<PruneReport>,
}

fn cmd_random(a: RandomArgs) -> Res<()> {
    let cfg = load_device(&a.device)?;
    let sizes = parse_sizes(&a.victim_sizes)?;
    let n = a.adversary_size.unwrap_or(cfg.trap_capacity + 3);
    let r = search_best(a.candidates, n, &sizes, &cfg, a.seed)?;
    let pruned = if a.no_prune {
        None
    } else {
        Some(match a.prune_metric {
            PruneMetric::Single => {
                let row = r.best_row();
                let top = row.iter().max().copied().unwrap_or(0);
                let size = sizes[row.iter().position(|&x| x == top).unwrap_or(0)];
                let v = pseudo_victim(size, a.seed)?;
                PruneReport {
                    metric: a.prune_metric,
                    victim_sizes: vec![size],
                    result: prune(&r.best, &v, &cfg)?,
                }
            }
            PruneMetric::Mean => {
                let vs = sizes
                    .iter()
                    .map(|&s| pseudo_victim(s, a.seed))
                    .collect::<qccd_core::Result<Vec<_>>>()?;
                PruneReport {
                    metric: a.prune_metric,
                    victim_sizes: sizes.clone(),
                    result: prune_against(&r.best, &vs, &cfg)?,
                }
            }
        })
    };
    let program = pruned.as_ref().map_or(&r.best, |p| &p.result.program);
    emit(a.out.as_deref(), &emit_program(program))?;
    if let Some(p) = sidecar_path(a.out.as_deref(), a.report.as_deref()) {
        let report = RandomReport {
            schema: "qccd.attack.random.v1",
            seed: a.seed,
            trap_capacity: cfg.trap_capacity,
            adversary_size: n,
            candidates: a.candidates,
            victim_sizes: sizes,
            best_index: r.best_index,
            best_mean: r.means[r.best_index],
            means: r.means.clone(),
            shuttles: r.shuttles.clone(),
            prune: pruned,
        };
        write(&p, &json(&report))?;
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Res<()> {
    let cfg = load_device(&a.device)?;
    let sizes = match &a.sizes {
        Some(s) => parse_sizes(s)?,
        None => (2..=max_victim_size(&cfg)).collect(),
    };
    let method = match a.method {
        Method::Systematic => SweepMethod::Systematic,
        Method::Random => SweepMethod::Random { candidates: a.candidates },
    };
    let table = sweep_assumptions(method, &cfg, &sizes, a.sc_length, a.seed)?;
    emit(a.out.as_deref(), &table.to_csv())?;
    if let Some(p) = &a.json {
        write(p, &json(&table))?;
    }
    Ok(())
}

fn cmd_defend(c: DefendCmd) -> Res<()> {
    match c {
        DefendCmd::Pad(a) => {
            let p = load_program(&a.program)?;
            emit(a.out.as_deref(), &emit_program(&pad_victim(&p, a.target)?))
        }
        DefendCmd::Hybrid(a) => {
            #[derive(Serialize)]
            struct Report {
                schema: &'static str,
                seed: u64,
                draws: usize,
                chosen: &'static str,
                chosen_seed: Option<u64>,
                greedy_shuttles: usize,
                random_shuttles: Vec<usize>,
                shuttle_count: usize,
            }
            let cfg = load_device(&a.device)?;
            let programs = load_programs(&a.programs)?;
            let h = hybrid_map_scoped(&programs, &cfg, a.seed, a.hybrid_draws, a.random_scope.into())?;
            let r = Report {
                schema: "qccd.hybrid.v1",
                seed: a.seed,
                draws: a.hybrid_draws,
                chosen: policy_name(h.chosen),
                chosen_seed: h.chosen_seed,
                greedy_shuttles: h.greedy_shuttles,
                random_shuttles: h.random_shuttles,
                shuttle_count: h.shuttle_count,
            };
            emit(a.out.as_deref(), &json(&r))
        }
        DefendCmd::Admit(a) => {
            let cfg = load_device(&a.device)?;
            let programs = load_programs(&a.programs)?;
            emit(a.out.as_deref(), &json(&admit(&programs, &cfg, a.max_shuttles)?))
        }
    }
}

fn cmd_bench(c: BenchCmd) -> Res<()> {
    let (p, out) = match c {
        BenchCmd::Qft(a) => (gen_qft(a.n)?, a.out),
        BenchCmd::Adder(a) => (gen_adder(a.n)?, a.out),
        BenchCmd::Qaoa(a) => (gen_qaoa(a.n, a.density, a.seed)?, a.out),
    };
    emit(out.as_deref(), &emit_program(&p))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Compile(a) => cmd_compile(a),
        Cmd::Attack(AttackCmd::Systematic(a)) => cmd_systematic(a),
        Cmd::Attack(AttackCmd::Random(a)) => cmd_random(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Defend(c) => cmd_defend(c),
        Cmd::Bench(c) => cmd_bench(c),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
