use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pdv_core::automata::{Dfa, Word};
use pdv_core::bench::generate::MANIFEST_FILE;
use pdv_core::bench::{
    contact_dataset, gen_benchmark, read_records, render_csv, render_text, run_suite, summarize,
    FaultShape, Manifest, Settings, TemporalNetwork,
};
use pdv_core::faultyflow::{detect, FlowVerdict};
use pdv_core::oracle::{DfaOracle, FaultInjectedOracle, LanguageOracle, RnnModel, RnnOracle};
use pdv_core::verify::{self, Algorithm, Outcome, SmcBound};

#[derive(Parser)]
#[command(name = "pdv", version, about = "Verify black-box sequence classifiers against DFA specifications")]
struct Cli {
    /// TOML settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark: DFAs, specs, datasets and a manifest.
    GenBench(GenBenchArgs),
    /// Build a contact-sequence dataset and path spec from a temporal network.
    GenContact(GenContactArgs),
    /// Check one oracle against one spec.
    Verify(VerifyArgs),
    /// Run PDV (unless a counterexample is given) and look for a faulty flow.
    FaultyFlow(FaultyFlowArgs),
    /// Run algorithms over every instance and spec of a manifest.
    Suite(SuiteArgs),
    /// Summarize suite results.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenBenchArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    alphabet_size: Option<usize>,
    #[arg(long)]
    specs_per_dfa: Option<usize>,
    #[arg(long)]
    train_size: Option<usize>,
    #[arg(long)]
    test_size: Option<usize>,
    /// Inject a loop-shaped fault into every oracle (default shape unless
    /// the config sets one).
    #[arg(long)]
    fault: bool,
}

#[derive(Args)]
struct GenContactArgs {
    /// Edge list of `t u v` lines.
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Smc,
    Aamc,
    Pdv,
}

impl From<Method> for Algorithm {
    fn from(m: Method) -> Self {
        match m {
            Method::Smc => Algorithm::Smc,
            Method::Aamc => Algorithm::Aamc,
            Method::Pdv => Algorithm::Pdv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Dfa,
    Xor,
    Rnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bound {
    Paper,
    Hoeffding,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    oracle: OracleKind,
    /// DFA file (dfa, xor) or model file (rnn).
    #[arg(long)]
    target: PathBuf,
    /// Fault DFA, xor only.
    #[arg(long)]
    fault: Option<PathBuf>,
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Per-letter stop probability of the word distribution.
    #[arg(long)]
    stop_prob: Option<f64>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    #[arg(long, value_enum)]
    smc_bound: Option<Bound>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[command(flatten)]
    oracle: OracleArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Write the final hypothesis here in `dfa v1` format.
    #[arg(long)]
    hypothesis_out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FaultyFlowArgs {
    #[command(flatten)]
    oracle: OracleArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Counterexample to analyse; requires --hypothesis.
    #[arg(long, requires = "hypothesis")]
    word: Option<String>,
    #[arg(long, requires = "word")]
    hypothesis: Option<PathBuf>,
    #[arg(long)]
    pump_max: Option<u64>,
    #[arg(long)]
    threshold: Option<u64>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Smc, Method::Aamc, Method::Pdv])]
    methods: Vec<Method>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Run the faulty-flow pass on PDV counterexamples.
    #[arg(long)]
    faulty_flow: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    csv: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut settings = match &cli.config {
        Some(p) => Settings::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => Settings::default(),
    };
    match cli.command {
        Command::GenBench(a) => gen_bench(a, &mut settings),
        Command::GenContact(a) => gen_contact(a, &settings),
        Command::Verify(a) => verify_cmd(a, &mut settings),
        Command::FaultyFlow(a) => faulty_flow(a, &mut settings),
        Command::Suite(a) => suite(a, &mut settings),
        Command::Report(a) => report(a),
    }
}

fn required_seed(flag: Option<u64>, settings: &Settings) -> Result<u64> {
    flag.or(settings.seed)
        .context("a seed is required: pass --seed or set `seed` in the config")
}

fn gen_bench(a: GenBenchArgs, settings: &mut Settings) -> Result<()> {
    let seed = required_seed(a.seed, settings)?;
    let cfg = &mut settings.bench;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    set!(count, n_max, alphabet_size, specs_per_dfa, train_size, test_size);
    if a.fault && cfg.fault.is_none() {
        cfg.fault = Some(FaultShape::default());
    }
    let m = gen_benchmark(cfg, seed, &a.out)?;
    println!(
        "{} instances written to {}",
        m.instances.len(),
        a.out.join(MANIFEST_FILE).display()
    );
    Ok(())
}

fn gen_contact(a: GenContactArgs, settings: &Settings) -> Result<()> {
    let seed = required_seed(a.seed, settings)?;
    let net = TemporalNetwork::load(&a.network)?;
    let (train, test) = contact_dataset(&net, seed)?;
    std::fs::create_dir_all(&a.out)?;
    train.save(a.out.join("train.tsv"))?;
    test.save(a.out.join("test.tsv"))?;
    std::fs::write(a.out.join("spec.dfa"), net.path_spec_dfa()?.to_text())?;
    println!(
        "{} vertices, {} edges: {} train and {} test examples in {}",
        net.vertices(),
        net.edges().len(),
        train.examples.len(),
        test.examples.len(),
        a.out.display()
    );
    Ok(())
}

fn read_dfa(path: &Path) -> Result<Dfa> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Dfa::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_oracle(a: &OracleArgs) -> Result<(Box<dyn LanguageOracle>, Dfa)> {
    let spec = read_dfa(&a.spec)?;
    let oracle: Box<dyn LanguageOracle> = match a.oracle {
        OracleKind::Dfa => Box::new(DfaOracle::new(read_dfa(&a.target)?)),
        OracleKind::Xor => {
            let fault = a.fault.as_deref().context("--oracle xor needs --fault")?;
            Box::new(FaultInjectedOracle::new(read_dfa(&a.target)?, read_dfa(fault)?)?)
        }
        OracleKind::Rnn => Box::new(RnnOracle::new(
            RnnModel::load(&a.target).with_context(|| format!("loading {}", a.target.display()))?,
        )),
    };
    if !matches!(a.oracle, OracleKind::Xor) && a.fault.is_some() {
        bail!("--fault only applies to --oracle xor");
    }
    Ok((oracle, spec))
}

fn apply_params(p: &ParamArgs, settings: &mut Settings) {
    let v = &mut settings.verify;
    if let Some(x) = p.epsilon {
        v.epsilon = x;
    }
    if let Some(x) = p.gamma {
        v.gamma = x;
    }
    if let Some(x) = p.timeout_secs {
        v.timeout_secs = x;
    }
    if let Some(b) = p.smc_bound {
        v.smc_bound = match b {
            Bound::Paper => SmcBound::Paper,
            Bound::Hoeffding => SmcBound::Hoeffding,
        };
    }
    if let Some(x) = p.stop_prob {
        settings.sampling.stop_prob = x;
    }
}

fn verify_cmd(a: VerifyArgs, settings: &mut Settings) -> Result<()> {
    apply_params(&a.params, settings);
    let (oracle, spec) = load_oracle(&a.oracle)?;
    let seed = a.params.seed.or(settings.seed).unwrap_or(0);
    let params = settings.verify_params(spec.alphabet().len(), seed)?;
    let alg = Algorithm::from(a.method);
    let verdict = verify::run(alg, oracle.as_ref(), &spec, &params)?;
    if let (Some(path), Some(h)) = (&a.hypothesis_out, &verdict.hypothesis) {
        std::fs::write(path, h.to_text())?;
    }
    let sigma = spec.alphabet();
    if a.json {
        let out = json!({
            "algorithm": alg,
            "seed": seed,
            "outcome": verdict.outcome,
            "counterexample": verdict.counterexample().map(|w| sigma.spell(w)),
            "stats": verdict.stats,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    match &verdict.outcome {
        Outcome::CounterexampleFound { word, .. } => {
            println!("counterexample: {}", show(sigma.render(word)))
        }
        Outcome::PropertySatisfied { epsilon, gamma } => {
            println!("property satisfied (epsilon {epsilon}, gamma {gamma})")
        }
        Outcome::BudgetExhausted { reason } => println!("budget exhausted: {reason:?}"),
    }
    let s = &verdict.stats;
    println!("time: {:.3} s", s.wall_time_secs);
    println!("membership queries: {}", s.membership_queries);
    println!("sampled words: {}", s.sampled_words);
    if let Some(n) = s.final_hypothesis_size() {
        println!("hypothesis size: {n} (after {} hypotheses)", s.hypothesis_sizes.len());
    }
    Ok(())
}

fn show(s: String) -> String {
    if s.is_empty() {
        "ε".into()
    } else {
        s
    }
}

fn faulty_flow(a: FaultyFlowArgs, settings: &mut Settings) -> Result<()> {
    apply_params(&a.params, settings);
    let (oracle, spec) = load_oracle(&a.oracle)?;
    let sigma = spec.alphabet().clone();
    let (word, hyp): (Word, Dfa) = match (&a.word, &a.hypothesis) {
        (Some(w), Some(h)) => (sigma.parse_word(w)?, read_dfa(h)?),
        _ => {
            let seed = a.params.seed.or(settings.seed).unwrap_or(0);
            let params = settings.verify_params(sigma.len(), seed)?;
            let v = verify::run(Algorithm::Pdv, oracle.as_ref(), &spec, &params)?;
            match (v.counterexample().cloned(), v.hypothesis) {
                (Some(w), Some(h)) => (w, h),
                _ => {
                    println!("no counterexample: {:?}", v.outcome);
                    return Ok(());
                }
            }
        }
    };
    let mut cfg = settings.faulty_flow.flow_config();
    if let Some(x) = a.pump_max {
        cfg.pump_max = x;
    }
    if let Some(x) = a.threshold {
        cfg.threshold = x;
    }
    let report = detect(oracle.as_ref(), &spec, &hyp, &word, &cfg)?;
    println!("counterexample: {}", show(sigma.render(&word)));
    println!("candidate loops tested: {}", report.candidates_tested);
    match (&report.verdict, &report.best) {
        (FlowVerdict::FaultyFlowFound, Some(f)) => println!(
            "faulty flow: prefix {} loop {} suffix {} ({}/{} pumped words misclassified)",
            show(sigma.render(&f.prefix)),
            show(sigma.render(&f.loop_word)),
            show(sigma.render(&f.suffix)),
            f.hits,
            report.pump_max
        ),
        _ => println!("no faulty flow (threshold {})", report.threshold),
    }
    Ok(())
}

fn suite(a: SuiteArgs, settings: &mut Settings) -> Result<()> {
    let v = &mut settings.verify;
    if let Some(x) = a.epsilon {
        v.epsilon = x;
    }
    if let Some(x) = a.gamma {
        v.gamma = x;
    }
    if let Some(x) = a.timeout_secs {
        v.timeout_secs = x;
    }
    if a.faulty_flow {
        settings.faulty_flow.enabled = true;
    }
    let manifest = Manifest::load(&a.manifest)?;
    let algs: Vec<Algorithm> = a.methods.iter().copied().map(Algorithm::from).collect();
    let records = run_suite(&manifest, &algs, settings, a.seed, Some(&a.out))?;
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    println!("{} runs ({errors} failed) written to {}", records.len(), a.out.display());
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let rows = summarize(&read_records(&a.results)?);
    print!("{}", if a.csv { render_csv(&rows) } else { render_text(&rows) });
    Ok(())
}
