use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nsx_core::demos::{self, DemoReport, DEMOS};
use nsx_core::extract::{parse_script, run_pipeline, PipelineScript};
use nsx_core::formula::{parse_formula, print_closed, registry};
use nsx_core::kernel::{parse_term_str, typecheck, TypeEnv};
use nsx_core::normal_form::{to_normal_form, ImplMode, NormalizeOptions};
use nsx_core::oracles::{verify_contract, DomainSpec, VerificationReport};
use nsx_core::random::{degenerate_round, gen_normal_form, Comparison};
use nsx_core::sexpr::parse_one;
use nsx_core::sst::{check_fixed_point, sst_translate, trace_json};

mod config;

use config::Config;

#[derive(Parser)]
#[command(
    name = "nsx",
    version,
    about = "Normal forms and term extraction for nonstandard definitions"
)]
struct Cli {
    /// Evaluation budget per term [default: the script's, else 10^7 steps]
    #[arg(long, global = true)]
    fuel: Option<u64>,
    /// Grid denominator for real quantifiers [default: the script's, else 64]
    #[arg(long, global = true)]
    denom: Option<u64>,
    /// Depth of the binary trees atoms range over [default: the script's, else 3]
    #[arg(long, global = true)]
    depth: Option<u64>,
    #[arg(long, global = true)]
    json: bool,
    /// Emit rewrite traces as JSON
    #[arg(long, global = true)]
    trace: bool,
    /// Seed for randomized sweeps [default: 24301]
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strong,
    Weak,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula, term or pipeline and print it back
    Parse { file: PathBuf },
    /// Compute the normal form of a formula
    Normalize {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Names for the functionals introduced by implication steps
        #[arg(long)]
        zeta: Vec<String>,
        /// Witness base names declared upward-monotone
        #[arg(long)]
        monotone: Vec<String>,
    },
    /// Clause-by-clause translation into a normal form
    Translate { file: PathBuf },
    /// Run a pipeline script and print the extraction result
    Extract {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a contract from an extraction result (.json) or a pipeline (.nsp)
    Verify {
        file: PathBuf,
        /// Domain items such as k=1..64, x=grid:16, f=suite:continuity
        #[arg(long, num_args = 1..)]
        domain: Vec<String>,
    },
    /// Run a bundled example end to end
    Demo {
        /// Demo name, or "all"
        name: String,
        #[arg(long, num_args = 1..)]
        domain: Vec<String>,
    },
    /// List the definition registry
    Registry,
    /// Random fixed-point and degenerate-semantics checks
    Sweep {
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
}

enum Failure {
    Usage(String),
    Verification,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn is_pipeline(text: &str) -> bool {
    matches!(parse_one(text), Ok(s) if s.head() == Some("pipeline"))
}

fn cmd_parse(cfg: &Config, text: &str) -> Outcome {
    if is_pipeline(text) {
        let s = parse_script(text)?;
        if cfg.json {
            print_json(&json!({
                "pipeline": s.name,
                "inputs": s.inputs.iter().map(|v| format!("{} : {}", v, v.ty)).collect::<Vec<_>>(),
                "formula": print_closed(&s.formula),
                "steps": s.steps.len(),
                "domain": s.domain.items(),
            }));
        } else {
            println!("pipeline {} ({} steps)", s.name, s.steps.len());
            println!("{}", print_closed(&s.formula));
        }
        return Ok(());
    }
    match parse_formula(text) {
        Ok(f) => {
            if cfg.json {
                print_json(&json!({"formula": print_closed(&f), "internal": f.is_internal()}));
            } else {
                println!("{}", print_closed(&f));
            }
            Ok(())
        }
        Err(fe) => {
            let t = parse_term_str(text).map_err(|_| Failure::Usage(fe.to_string()))?;
            let ty = typecheck(&t, &TypeEnv::new()).map_err(|e| Failure::Usage(e.to_string()))?;
            if cfg.json {
                print_json(&json!({"term": t.to_string(), "type": ty.to_string()}));
            } else {
                println!("{t} : {ty}");
            }
            Ok(())
        }
    }
}

fn cmd_normalize(
    cfg: &Config,
    text: &str,
    mode: Option<Mode>,
    zeta: Vec<String>,
    monotone: Vec<String>,
) -> Outcome {
    let (formula, mut opts) = if is_pipeline(text) {
        let s = parse_script(text)?;
        let opts = NormalizeOptions {
            mode: s.mode,
            zeta_names: s.zeta.clone(),
            monotone: s.monotone.clone(),
        };
        (s.formula, opts)
    } else {
        (parse_formula(text)?, NormalizeOptions::default())
    };
    if let Some(m) = mode {
        opts.mode = match m {
            Mode::Strong => ImplMode::Strong,
            Mode::Weak => ImplMode::Weak,
        };
    }
    if !zeta.is_empty() {
        opts.zeta_names = zeta;
    }
    opts.monotone.extend(monotone);
    let (nf, trace) = to_normal_form(&formula, &opts)?;
    if cfg.json || cfg.trace {
        let mut out = json!({"normal_form": print_closed(&nf.to_formula())});
        if cfg.trace {
            out["trace"] = trace.to_json();
        }
        print_json(&out);
    } else {
        println!("{}", print_closed(&nf.to_formula()));
    }
    Ok(())
}

fn cmd_translate(cfg: &Config, text: &str) -> Outcome {
    let f = parse_formula(text)?;
    let r = sst_translate(&f)?;
    let shown = print_closed(&r.translated.to_formula());
    if cfg.json || cfg.trace {
        let mut out = json!({"translated": shown, "fixed_point": check_fixed_point(&f)});
        if cfg.trace {
            out["trace"] = trace_json(&r);
        }
        print_json(&out);
    } else {
        println!("{shown}");
    }
    Ok(())
}

fn cmd_extract(text: &str, output: Option<PathBuf>) -> Outcome {
    let script = parse_script(text)?;
    let r = run_pipeline(&script)?;
    let body = serde_json::to_string_pretty(&r.to_json())?;
    match output {
        Some(p) => std::fs::write(&p, body + "\n")
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => println!("{body}"),
    }
    Ok(())
}

fn show_report(cfg: &Config, label: &str, report: &VerificationReport) -> Outcome {
    if cfg.json {
        print_json(&json!({"contract": label, "report": report}));
    } else {
        println!("{label}");
        println!(
            "{}: {} checks, {} failures",
            report.status,
            report.checked,
            report.failures.len()
        );
        for f in report.failures.iter().take(20) {
            println!("  {}: {}", f.input, f.detail);
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_verify(cfg: &Config, path: &Path, text: &str, extra: &[String]) -> Outcome {
    let overrides = cfg.domain(extra)?;
    let trimmed = text.trim_start();
    let (contract, domain) =
        if trimmed.starts_with('{') || path.extension().is_some_and(|e| e == "json") {
            let v: Value = serde_json::from_str(text)?;
            let contract = v["contract"]
                .as_str()
                .ok_or_else(|| Failure::Usage("result has no contract".into()))?;
            let items: Vec<String> = match v["domain"].as_array() {
                Some(a) => a
                    .iter()
                    .filter_map(|x| x.as_str().map(str::to_string))
                    .collect(),
                None => vec![],
            };
            (parse_formula(contract)?, DomainSpec::parse(&items)?)
        } else {
            let script: PipelineScript = parse_script(text)?;
            let r = run_pipeline(&script)?;
            (r.contract, script.domain)
        };
    let domain = domain.merged(&overrides);
    let report = verify_contract(&contract, &domain)?;
    show_report(cfg, &print_closed(&contract), &report)
}

fn print_demo(cfg: &Config, r: &DemoReport, secs: f64) {
    if cfg.json {
        let mut v = r.to_json();
        v["seconds"] = json!(secs);
        print_json(&v);
        return;
    }
    println!("== {} ({})", r.name, r.about);
    println!("witness: {}", r.result.witness_json());
    println!("contract: {}", print_closed(&r.result.contract));
    println!(
        "verification: {} ({} checks, {} failures)",
        r.verification.status,
        r.verification.checked,
        r.verification.failures.len()
    );
    for f in r.verification.failures.iter().take(10) {
        println!("  {}: {}", f.input, f.detail);
    }
    for c in &r.checks {
        println!(
            "  [{}] {}: {}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    println!("{} in {secs:.2}s", if r.passed() { "PASS" } else { "FAIL" });
}

fn cmd_demo(cfg: &Config, name: &str, extra: &[String]) -> Outcome {
    let overrides = cfg.domain(extra)?;
    let names: Vec<&str> = if name == "all" {
        DEMOS.iter().map(|d| d.name).collect()
    } else {
        vec![name]
    };
    let mut ok = true;
    for n in names {
        let start = Instant::now();
        let r = demos::run_demo(n, &overrides)?;
        print_demo(cfg, &r, start.elapsed().as_secs_f64());
        ok &= r.passed();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_registry(cfg: &Config) -> Outcome {
    if cfg.json {
        let entries: Vec<Value> = registry()
            .iter()
            .map(|e| {
                json!({
                    "name": e.name,
                    "params": e.params.iter().map(|v| format!("{} : {}", v, v.ty)).collect::<Vec<_>>(),
                    "citation": e.cite,
                    "internal": e.internal,
                    "expansion": e.expansion.to_string(),
                    "normal_form": e.normal_form.to_string(),
                })
            })
            .collect();
        print_json(&Value::Array(entries));
    } else {
        for e in registry() {
            println!("{:<24} {}", e.name, e.cite);
        }
    }
    Ok(())
}

fn cmd_sweep(cfg: &Config, count: usize) -> Outcome {
    let mut rng = cfg.rng();
    let mut not_fixed = Vec::new();
    for _ in 0..count {
        let nf = gen_normal_form(&mut rng);
        if !check_fixed_point(&nf.to_formula()) {
            not_fixed.push(nf.to_string());
        }
    }
    let labels = ["idealize", "monotone-collapse", "relativize-st"];
    let mut tally = [(0usize, 0usize, 0usize); 3];
    let mut shown = Vec::new();
    for _ in 0..count {
        for (i, c) in degenerate_round(&mut rng)?.into_iter().enumerate() {
            match c {
                Comparison::Agree => tally[i].0 += 1,
                Comparison::Skipped => tally[i].2 += 1,
                Comparison::Disagree {
                    before,
                    after,
                    detail,
                } => {
                    tally[i].1 += 1;
                    shown.push(format!("{}: {before} vs {after} ({detail})", labels[i]));
                }
            }
        }
    }
    let ok = not_fixed.is_empty() && shown.is_empty();
    if cfg.json {
        print_json(&json!({
            "seed": cfg.seed,
            "count": count,
            "not_fixed": not_fixed,
            "degenerate": labels.iter().zip(&tally).map(|(l, t)| json!({"transform": l, "agree": t.0, "disagree": t.1, "skipped": t.2})).collect::<Vec<_>>(),
            "discrepancies": shown,
        }));
    } else {
        println!("seed {}", cfg.seed);
        println!("fixed points: {}/{count}", count - not_fixed.len());
        for f in &not_fixed {
            println!("  not fixed: {f}");
        }
        for (l, t) in labels.iter().zip(&tally) {
            println!("{l}: {} agree, {} disagree, {} skipped", t.0, t.1, t.2);
        }
        for s in shown.iter().take(10) {
            println!("  {s}");
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: Cli) -> Outcome {
    let cfg = Config::from_flags(
        cli.fuel, cli.denom, cli.depth, cli.json, cli.trace, cli.seed,
    )?;
    match cli.cmd {
        Cmd::Parse { file } => cmd_parse(&cfg, &read_input(&file)?),
        Cmd::Normalize {
            file,
            mode,
            zeta,
            monotone,
        } => cmd_normalize(&cfg, &read_input(&file)?, mode, zeta, monotone),
        Cmd::Translate { file } => cmd_translate(&cfg, &read_input(&file)?),
        Cmd::Extract { file, output } => cmd_extract(&read_input(&file)?, output),
        Cmd::Verify { file, domain } => cmd_verify(&cfg, &file, &read_input(&file)?, &domain),
        Cmd::Demo { name, domain } => cmd_demo(&cfg, &name, &domain),
        Cmd::Registry => cmd_registry(&cfg),
        Cmd::Sweep { count } => cmd_sweep(&cfg, count),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("nsx: {msg}");
            ExitCode::from(2)
        }
    }
}
