//! cohc: command-line front end for the cohesive-kernel checker.
//!
//! Subcommands: `check` type-checks proof files in order, `eval`
//! normalizes an expression against an environment built from files,
//! `corpus` runs a manifest of expectations. Exit codes: 0 success,
//! 1 semantic failure, 2 usage, parse, or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use cohesive_kernel::corpus::{self, push_json_string, CorpusManifest};
use cohesive_kernel::kernel::{Diagnostic, DiagnosticCode, DEFAULT_FUEL};
use cohesive_kernel::parser::{self, print_term, ResolveErrorKind};
use cohesive_kernel::Environment;

const USAGE: &str = "usage: cohc <command> [options]

commands:
  check FILE...            type-check files in order
  eval EXPR [FILE...]      normalize EXPR in the environment of FILE...
  corpus [--tier NAME]     run the proof corpus against its manifest
         [--manifest PATH]

options:
  --json      machine-readable output (single JSON array, newline-terminated)
  --fuel N    reduction budget per conversion query (default 1000000,
              also settable via COHC_FUEL)";

struct Config {
    command: Command,
    files: Vec<PathBuf>,
    json: bool,
    fuel: u64,
    tier: Option<String>,
    manifest: Option<PathBuf>,
    expr: Option<String>,
}

enum Command {
    Check,
    Eval,
    Corpus,
}

fn main() -> ExitCode {
    // Deep proof terms recurse through the evaluator; run the real work on
    // a thread with a generous stack.
    let child = std::thread::Builder::new()
        .name("cohc".into())
        .stack_size(256 * 1024 * 1024)
        .spawn(run)
        .expect("spawn worker thread");
    match child.join() {
        Ok(code) => code,
        Err(_) => ExitCode::from(2),
    }
}

fn run() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match parse_args(&args) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("{}", message);
            eprintln!("{}", USAGE);
            return ExitCode::from(2);
        }
    };
    match config.command {
        Command::Check => cmd_check(&config),
        Command::Eval => cmd_eval(&config),
        Command::Corpus => cmd_corpus(&config),
    }
}

fn parse_args(args: &[String]) -> Result<Config, String> {
    let mut it = args.iter().peekable();
    let command = match it.next().map(|s| s.as_str()) {
        Some("check") => Command::Check,
        Some("eval") => Command::Eval,
        Some("corpus") => Command::Corpus,
        Some("help") | Some("--help") | Some("-h") => {
            println!("{}", USAGE);
            std::process::exit(0);
        }
        Some(other) => return Err(format!("unknown command '{}'", other)),
        None => return Err("missing command".into()),
    };
    let mut config = Config {
        command,
        files: Vec::new(),
        json: false,
        fuel: default_fuel(),
        tier: None,
        manifest: None,
        expr: None,
    };
    let mut positionals: Vec<String> = Vec::new();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--json" => config.json = true,
            "--fuel" => {
                let value = it.next().ok_or("--fuel needs a value")?;
                config.fuel = value
                    .parse()
                    .map_err(|_| format!("bad fuel value '{}'", value))?;
            }
            "--tier" => {
                let value = it.next().ok_or("--tier needs a value")?;
                config.tier = Some(value.clone());
            }
            "--manifest" => {
                let value = it.next().ok_or("--manifest needs a value")?;
                config.manifest = Some(PathBuf::from(value));
            }
            other if other.starts_with("--") => {
                return Err(format!("unknown option '{}'", other));
            }
            other => positionals.push(other.to_string()),
        }
    }
    match config.command {
        Command::Check => {
            if positionals.is_empty() {
                return Err("check needs at least one file".into());
            }
            config.files = positionals.into_iter().map(PathBuf::from).collect();
        }
        Command::Eval => {
            if positionals.is_empty() {
                return Err("eval needs an expression".into());
            }
            config.expr = Some(positionals.remove(0));
            config.files = positionals.into_iter().map(PathBuf::from).collect();
        }
        Command::Corpus => {
            if !positionals.is_empty() {
                return Err(format!("unexpected argument '{}'", positionals[0]));
            }
        }
    }
    Ok(config)
}

fn default_fuel() -> u64 {
    std::env::var("COHC_FUEL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_FUEL)
}

fn diagnostic_json(diag: &Diagnostic) -> String {
    let mut out = String::from("{\"code\":");
    push_json_string(&mut out, diag.code.as_str());
    out.push_str(",\"message\":");
    push_json_string(&mut out, &diag.message);
    let (file, line, col) = match &diag.span {
        Some(span) => (span.file.to_string(), span.start_line, span.start_col),
        None => (String::new(), 0, 0),
    };
    out.push_str(",\"file\":");
    push_json_string(&mut out, &file);
    out.push_str(&format!(",\"line\":{},\"col\":{}", line, col));
    out.push_str(",\"context\":[");
    for (i, entry) in diag.context.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"name\":");
        push_json_string(&mut out, &entry.name);
        out.push_str(",\"type\":");
        push_json_string(&mut out, &entry.ty);
        out.push_str(",\"polarity\":");
        push_json_string(&mut out, &entry.polarity.to_string());
        out.push('}');
    }
    out.push_str("]}");
    out
}

/// Severity classes for exit codes: parse-, scope-, and I/O-level problems
/// exit 2; kernel rejections exit 1.
enum Failure {
    Semantic(Diagnostic),
    Usage(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Semantic(_) => ExitCode::from(1),
            Failure::Usage(_) => ExitCode::from(2),
        }
    }
}

/// Loads files into an accumulating environment. `report_decl` is called
/// with each successfully checked declaration name.
fn load_files(
    env: &mut Environment,
    files: &[PathBuf],
    fuel: u64,
    mut report_decl: impl FnMut(&str),
) -> Result<(), Failure> {
    for path in files {
        let source = std::fs::read_to_string(path).map_err(|e| {
            Failure::Usage(format!("cannot read {}: {}", path.display(), e))
        })?;
        let name = path.to_string_lossy().to_string();
        let decls = parser::parse_module(&source, &name)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        let located = parser::resolve(&decls, &|n| env.contains(n)).map_err(|e| {
            match e.kind {
                ResolveErrorKind::Scope { .. } => Failure::Usage(e.to_string()),
                ResolveErrorKind::Duplicate { .. } => Failure::Semantic(
                    Diagnostic::new(DiagnosticCode::DuplicateName, e.to_string()),
                ),
            }
        })?;
        for located_decl in located {
            env.declare(&located_decl.decl, fuel)
                .map_err(|d| Failure::Semantic(d.with_span(located_decl.span.clone())))?;
            report_decl(located_decl.decl.name());
        }
    }
    Ok(())
}

fn emit_failure(failure: &Failure, json: bool) {
    match failure {
        Failure::Semantic(diag) => {
            if json {
                println!("[{}]", diagnostic_json(diag));
            } else {
                eprintln!("{}", diag);
            }
        }
        Failure::Usage(message) => {
            if json {
                let mut out = String::from("[{\"code\":\"ParseError\",\"message\":");
                push_json_string(&mut out, message);
                out.push_str("}]");
                println!("{}", out);
            } else {
                eprintln!("error: {}", message);
            }
        }
    }
}

fn cmd_check(config: &Config) -> ExitCode {
    let mut env = Environment::new();
    let quiet = config.json;
    // Each file reports at most its first diagnostic; later files still
    // run against whatever checked so far.
    let mut failures: Vec<Failure> = Vec::new();
    for path in &config.files {
        let result = load_files(&mut env, std::slice::from_ref(path), config.fuel, |name| {
            if !quiet {
                println!("OK {}", name);
            }
        });
        if let Err(failure) = result {
            if !config.json {
                emit_failure(&failure, false);
            }
            failures.push(failure);
        }
    }
    if config.json {
        let mut out = String::from("[");
        for (i, failure) in failures.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match failure {
                Failure::Semantic(diag) => out.push_str(&diagnostic_json(diag)),
                Failure::Usage(message) => {
                    out.push_str("{\"code\":\"ParseError\",\"message\":");
                    push_json_string(&mut out, message);
                    out.push('}');
                }
            }
        }
        out.push(']');
        println!("{}", out);
    }
    if failures.iter().any(|f| matches!(f, Failure::Usage(_))) {
        ExitCode::from(2)
    } else if !failures.is_empty() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_eval(config: &Config) -> ExitCode {
    let mut env = Environment::new();
    if let Err(failure) = load_files(&mut env, &config.files, config.fuel, |_| {}) {
        emit_failure(&failure, config.json);
        return failure.exit_code();
    }
    let expr_text = config.expr.as_deref().unwrap_or_default();
    let result = eval_expression(&env, expr_text, config.fuel);
    match result {
        Ok((nf, ty)) => {
            if config.json {
                let mut out = String::from("[{\"result\":");
                push_json_string(&mut out, &nf);
                out.push_str(",\"type\":");
                push_json_string(&mut out, &ty);
                out.push_str("}]");
                println!("{}", out);
            } else {
                println!("{} : {}", nf, ty);
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            emit_failure(&failure, config.json);
            failure.exit_code()
        }
    }
}

fn eval_expression(
    env: &Environment,
    expr_text: &str,
    fuel: u64,
) -> Result<(String, String), Failure> {
    // Parse the expression by wrapping it as a definition body.
    let module = format!("def it : Unit := {}", expr_text);
    let decls = parser::parse_module(&module, "<expr>")
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let body = match decls.into_iter().next() {
        Some(parser::SurfaceDecl::Def { body, .. }) => body,
        _ => return Err(Failure::Usage("expected a single expression".into())),
    };
    let term = parser::resolve_term(&body, &[], &|n| env.contains(n))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let checker = cohesive_kernel::Checker::new(env, fuel);
    let empty = cohesive_kernel::Telescope::new();
    let ty = checker
        .infer(&empty, &term)
        .map_err(Failure::Semantic)?;
    let nf = checker.normalize(&empty, &term).map_err(Failure::Semantic)?;
    let ty_nf = checker.normalize(&empty, &ty).map_err(Failure::Semantic)?;
    Ok((print_term(&nf), print_term(&ty_nf)))
}

fn cmd_corpus(config: &Config) -> ExitCode {
    let manifest_path = config
        .manifest
        .clone()
        .unwrap_or_else(|| PathBuf::from("corpus/manifest.txt"));
    let manifest = match CorpusManifest::load(&manifest_path) {
        Ok(m) => m,
        Err(e) => {
            emit_failure(&Failure::Usage(e.to_string()), config.json);
            return ExitCode::from(2);
        }
    };
    let report = corpus::run_corpus(&manifest, config.fuel, config.tier.as_deref());
    if config.json {
        println!("{}", report.to_json());
    } else {
        let width = report
            .files
            .iter()
            .map(|f| f.path.len())
            .max()
            .unwrap_or(4)
            .max(4);
        println!("{:<width$}  {:<28}  {:<28}  {:>6}", "file", "expected", "outcome", "ms");
        for file in &report.files {
            let marker = if file.passed { "" } else { "  <-- FAIL" };
            println!(
                "{:<width$}  {:<28}  {:<28}  {:>6}{}",
                file.path,
                file.expectation.to_string(),
                file.outcome.short(),
                file.millis,
                marker,
            );
        }
        let failed = report.files.iter().filter(|f| !f.passed).count();
        println!(
            "{} file(s), {} failed",
            report.files.len(),
            failed
        );
        for file in &report.files {
            if !file.passed {
                if let corpus::Outcome::Rejected { message, .. }
                | corpus::Outcome::ParseFailed { message } = &file.outcome
                {
                    eprintln!("--- {}\n{}", file.path, message);
                }
            }
        }
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
