//! `gitstab`: stability checks for weighted subspace configurations.
//!
//! Every subcommand prints one JSON report. Exit status is 0 on success, 1
//! when `--expect` disagrees with the verdict or a corpus case fails, and 2
//! on bad input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use gitstab_core::balance::{balance_solve, bundle_balance_solve, exact_hints, SolveOptions};
use gitstab_core::cone::{conjecture_probe, hypersimplex_membership, ConeSpec, ProbeReport};
use gitstab_core::config::WeightedConfiguration;
use gitstab_core::corpus::run_corpus;
use gitstab_core::correspondence::{gale_transform, gm_forward, orbit_equivalent, OrbitAnswer};
use gitstab_core::exact::{format_q, parse_q, Q};
use gitstab_core::filtration::{
    hn_filtration, jh_filtration, mfiltration_to_config, tensor_filtrations,
};
use gitstab_core::hilbert_mumford::{
    decide, mu_lambda_s, search_space, DecideOptions, Status, DEFAULT_DEPTH,
};
use gitstab_core::io;

#[derive(Parser)]
#[command(
    name = "gitstab",
    version,
    about = "Stability of weighted subspace configurations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Rounds of lattice closure when generating candidate subspaces.
    #[arg(long, global = true, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Residual tolerance of the balance flow.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    /// Comma-separated weights, e.g. `1,1,3/2`.
    #[arg(long, global = true)]
    weights: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Comma-separated item dimensions.
    #[arg(long, global = true)]
    k: Option<String>,
    /// JSON file with extra subspaces to test.
    #[arg(long, global = true)]
    extra_h: Option<PathBuf>,
    /// Expected status; a mismatch exits with status 1.
    #[arg(long, global = true)]
    expect: Option<String>,
    /// Corroborate exact verdicts with the balance flow.
    #[arg(long, global = true)]
    numeric: bool,
    /// Omit wall-clock fields so reports are byte-for-byte reproducible.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Stability verdict with an exact certificate.
    Check { config: PathBuf },
    /// Harder–Narasimhan filtration.
    Hn { config: PathBuf },
    /// Jordan–Hölder filtration of a semistable configuration.
    Jh { config: PathBuf },
    /// Numerical balance metric.
    Balance { config: PathBuf },
    /// Balance metric of a sampled bundle configuration.
    BundleBalance { bundle: PathBuf },
    /// Packed matrix of a configuration of subspaces.
    Gm { config: PathBuf },
    /// Gale transform.
    Gale { config: PathBuf },
    /// Whether two configurations lie in the same orbit.
    OrbitEq { a: PathBuf, b: PathBuf },
    /// Tensor product of two weighted filtration families.
    Tensor { a: PathBuf, b: PathBuf },
    /// Hypersimplex membership of a weight vector.
    Cone,
    /// Random sampling of verdicts at a weight vector.
    Probe,
    /// Built-in hand-checked cases.
    Corpus,
}

enum Failure {
    Input(String),
    Outcome(Value),
}

impl From<gitstab_core::Error> for Failure {
    fn from(e: gitstab_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run<T> = std::result::Result<T, Failure>;

struct Inputs {
    bytes: Vec<u8>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Run<String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.bytes.extend_from_slice(text.as_bytes());
        self.bytes.push(0);
        Ok(text)
    }

    fn config(&mut self, path: &Path) -> Run<WeightedConfiguration> {
        let text = self.read(path)?;
        io::parse_config(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn list<T>(s: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Run<Vec<T>> {
    s.split(',')
        .map(|t| {
            parse(t.trim()).ok_or_else(|| Failure::Input(format!("invalid {what} entry {t:?}")))
        })
        .collect()
}

fn cone_inputs(c: &Common) -> Run<(ConeSpec, Vec<Q>)> {
    let n =
        c.n.ok_or_else(|| Failure::Input("--n is required".into()))?;
    let k = list(
        c.k.as_deref()
            .ok_or_else(|| Failure::Input("--k is required".into()))?,
        "--k",
        |t| t.parse().ok(),
    )?;
    let w = match &c.weights {
        Some(s) => list(s, "--weights", |t| parse_q(t).ok())?,
        None => vec![gitstab_core::exact::q(1); k.len()],
    };
    Ok((ConeSpec::new(n, k)?, w))
}

fn decide_opts(c: &Common) -> DecideOptions {
    DecideOptions {
        numeric: c.numeric,
        balance: solve_opts(c),
        ..DecideOptions::with_depth(c.depth)
    }
}

fn solve_opts(c: &Common) -> SolveOptions {
    SolveOptions {
        tol: c.tol,
        max_iter: c.max_iter,
        seed: c.seed,
        ..SolveOptions::default()
    }
}

fn qs(v: &[Q]) -> Value {
    json!(v.iter().map(format_q).collect::<Vec<_>>())
}

fn probe_value(r: &ProbeReport) -> Value {
    json!({
        "n": r.n,
        "k": r.k,
        "weights": qs(&r.weights),
        "x": qs(&r.x),
        "membership": r.membership.name(),
        "trials": r.trials,
        "seed": r.seed,
        "depth": r.depth,
        "stable": r.stable,
        "strictly_semistable": r.strictly_semistable,
        "unstable": r.unstable,
        "fraction_semistable": r.fraction_semistable,
        "fraction_stable": r.fraction_stable,
        "soundness_violations": r.soundness_violations,
        "n_less_than_total": r.n_less_than_total,
        "dimension_condition": r.dimension_condition,
    })
}

/// `polystable` says whether a splitting into stable summands was found.
fn check_expect(common: &Common, status: Status, polystable: bool, result: &Value) -> Run<()> {
    if let Some(e) = &common.expect {
        let want = Status::parse(e)
            .ok_or_else(|| Failure::Input(format!("unknown status {e:?} for --expect")))?;
        let matches = match want {
            Status::Polystable => polystable,
            _ => want == status,
        };
        if !matches {
            return Err(Failure::Outcome(result.clone()));
        }
    }
    Ok(())
}

fn execute(cmd: &Command, common: &Common, inputs: &mut Inputs) -> Run<Value> {
    let opts = decide_opts(common);
    match cmd {
        Command::Check { config } => {
            let c = inputs.config(config)?;
            let mut opts = opts;
            if let Some(p) = &common.extra_h {
                let text = inputs.read(p)?;
                opts.extra = io::parse_extra(&text, c.n())
                    .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            }
            let v = decide(&c, &opts)?;
            let out = io::verdict_value(&v);
            check_expect(
                common,
                v.status,
                v.decomposition.is_some() || v.status == Status::Stable,
                &out,
            )?;
            Ok(out)
        }
        Command::Hn { config } => {
            let c = inputs.config(config)?;
            Ok(io::flag_value(&hn_filtration(&c, &opts)?))
        }
        Command::Jh { config } => {
            let c = inputs.config(config)?;
            Ok(io::flag_value(&jh_filtration(&c, &opts)?))
        }
        Command::Balance { config } => {
            let c = inputs.config(config)?;
            let res = balance_solve(&c, &solve_opts(common))?;
            let mut out = io::balance_value(&res);
            let candidates = search_space(&c, &opts)?;
            let hints: Vec<Value> = exact_hints(&c, &res, &candidates)
                .iter()
                .map(|h| {
                    let mu = mu_lambda_s(&c, h).map(|m| format_q(&m)).unwrap_or_default();
                    json!({ "basis": io::subspace_value(h), "mu": mu })
                })
                .collect();
            out["exact_hints"] = Value::Array(hints);
            Ok(out)
        }
        Command::BundleBalance { bundle } => {
            let text = inputs.read(bundle)?;
            let b = io::parse_bundle(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", bundle.display())))?;
            let r = bundle_balance_solve(&b, &solve_opts(common))?;
            Ok(io::bundle_balance_value(&r, 1e-6))
        }
        Command::Gm { config } => {
            let c = inputs.config(config)?;
            let p = gm_forward(&c)?;
            Ok(json!({
                "matrix": io::rational_matrix_value(p.matrix()),
                "blocks": p.blocks(),
                "row_space": io::subspace_value(&p.row_space()),
            }))
        }
        Command::Gale { config } => {
            let c = inputs.config(config)?;
            let g = gale_transform(&c)?;
            Ok(json!({
                "config": io::config_value(&g.config),
                "degenerate_blocks": g.degenerate_blocks,
            }))
        }
        Command::OrbitEq { a, b } => {
            let (ca, cb) = (inputs.config(a)?, inputs.config(b)?);
            Ok(
                match orbit_equivalent(&ca, &cb, common.trials, common.seed)? {
                    OrbitAnswer::Yes(g) => {
                        json!({ "answer": "Yes", "transform": io::rational_matrix_value(&g) })
                    }
                    OrbitAnswer::No => json!({ "answer": "No" }),
                    OrbitAnswer::Inconclusive => json!({ "answer": "Inconclusive" }),
                },
            )
        }
        Command::Tensor { a, b } => {
            let fa = io::parse_mfiltration(&inputs.read(a)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", a.display())))?;
            let fb = io::parse_mfiltration(&inputs.read(b)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", b.display())))?;
            let t = tensor_filtrations(&fa, &fb)?;
            let c = mfiltration_to_config(&t)?;
            let v = decide(&c, &opts)?;
            let out = json!({
                "filtration": io::mfiltration_value(&t),
                "verdict": io::verdict_value(&v),
            });
            check_expect(
                common,
                v.status,
                v.decomposition.is_some() || v.status == Status::Stable,
                &out,
            )?;
            Ok(out)
        }
        Command::Cone => {
            let (spec, w) = cone_inputs(common)?;
            let (m, x) = hypersimplex_membership(&spec, &w)?;
            let (less, dimension) = spec.freeness_conditions();
            Ok(json!({
                "n": spec.n,
                "k": spec.k,
                "weights": qs(&w),
                "x": qs(&x),
                "membership": m.name(),
                "n_less_than_total": less,
                "dimension_condition": dimension,
            }))
        }
        Command::Probe => {
            let (spec, w) = cone_inputs(common)?;
            let r = conjecture_probe(&spec, &w, common.trials, common.seed, &opts)?;
            Ok(probe_value(&r))
        }
        Command::Corpus => {
            let out = run_corpus(&opts)?;
            let cases: Vec<Value> = out
                .iter()
                .map(|o| {
                    json!({
                        "name": o.name,
                        "passed": o.passed,
                        "status": o.status.name(),
                        "hn_slopes": qs(&o.hn_slopes),
                        "jh_slopes": o.jh_slopes.as_deref().map(qs),
                        "mismatches": o.mismatches,
                    })
                })
                .collect();
            let passed = out.iter().filter(|o| o.passed).count();
            let result = json!({ "cases": cases, "passed": passed, "total": out.len() });
            if passed == out.len() {
                Ok(result)
            } else {
                Err(Failure::Outcome(result))
            }
        }
    }
}

fn report(common: &Common, inputs: &Inputs, result: Value, elapsed: f64) -> Value {
    let mut r = json!({
        "command": std::env::args().skip(1).collect::<Vec<_>>(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "input_digest": io::sha256_hex(&inputs.bytes),
        "seed": common.seed,
        "depth": common.depth,
        "result": result,
    });
    if !common.no_timestamp {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        r["timestamp"] = json!(now);
        r["wall_clock_seconds"] = json!(elapsed);
    }
    r
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("GITSTAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        // ignore the error if a pool was already built
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
    let start = Instant::now();
    let mut inputs = Inputs { bytes: Vec::new() };
    let outcome = execute(&cli.command, &cli.common, &mut inputs);
    let elapsed = start.elapsed().as_secs_f64();
    let (value, code) = match outcome {
        Ok(v) => (v, 0),
        Err(Failure::Outcome(v)) => (v, 1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let r = report(&cli.common, &inputs, value, elapsed);
    let text = serde_json::to_string_pretty(&r).expect("report serializes");
    // a closed pipe downstream is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code)
}
