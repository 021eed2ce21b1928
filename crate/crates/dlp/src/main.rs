use std::io::{IsTerminal, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dlp::export::{export_provenance, ExportError};
use dlp::parse::parse_document;
use dlp::repl::{load_document, run_kb, run_repl, Session};

#[derive(Parser)]
#[command(name = "dlp", version, about = "Inconsistency-robust logic programming")]
struct Cli {
    /// Step budget for proofs and plan searches (default 10000, or $DLP_BUDGET)
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Maximum nesting depth for hypothetical reasoning
    #[arg(long, global = true, default_value_t = 3)]
    hyp_depth: u32,
    /// Do not compile `implies` clauses into plans
    #[arg(long, global = true)]
    no_plans: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interactive shell; batch-friendly when stdin is piped
    Repl,
    /// Load a knowledge base and report each theory
    Run { file: PathBuf },
    /// Prove a proposition in one theory of a knowledge base
    Prove {
        theory: String,
        prop: String,
        /// Knowledge base file (stdin when omitted)
        #[arg(long)]
        kb: Option<PathBuf>,
    },
    /// Write a theory's provenance JSON
    Export {
        theory: String,
        out: PathBuf,
        /// Knowledge base file (stdin when omitted)
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

fn resolve_budget(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("DLP_BUDGET").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(10_000)
}

fn kb_text(kb: &Option<PathBuf>) -> Result<String, u8> {
    match kb {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            1
        }),
        None => {
            let mut stdin = std::io::stdin();
            if stdin.is_terminal() {
                eprintln!("error: no knowledge base (pass --kb <file> or pipe one on stdin)");
                return Err(2);
            }
            let mut text = String::new();
            stdin.read_to_string(&mut text).map_err(|e| {
                eprintln!("error: stdin: {e}");
                1
            })?;
            Ok(text)
        }
    }
}

/// Load the KB and focus the named theory; error codes match the REPL's
/// batch conventions (1 for I/O, 2 for unusable input).
fn session_for(
    cli: &Cli,
    theory: &str,
    kb: &Option<PathBuf>,
) -> Result<Session, u8> {
    let text = kb_text(kb)?;
    let doc = match parse_document(&text) {
        Ok(doc) => doc,
        Err(e) => {
            println!("error: {e}");
            return Err(2);
        }
    };
    let mut session = Session {
        budget: resolve_budget(cli.budget),
        hyp_depth: cli.hyp_depth,
        with_plans: !cli.no_plans,
        ..Session::default()
    };
    if let Err(msg) = load_document(&mut session, &doc) {
        println!("error: {msg}");
        return Err(2);
    }
    match session.store.theory_id(theory) {
        Some(t) => {
            session.current = Some(t);
            Ok(session)
        }
        None => {
            println!("error: unknown theory `{theory}`");
            Err(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code: u8 = match &cli.command {
        Command::Repl => {
            let mut session = Session {
                budget: resolve_budget(cli.budget),
                hyp_depth: cli.hyp_depth,
                with_plans: !cli.no_plans,
                ..Session::default()
            };
            let interactive = std::io::stdin().is_terminal();
            let mut input = std::io::stdin().lock();
            let mut output = std::io::stdout().lock();
            run_repl(&mut session, &mut input, &mut output, interactive) as u8
        }
        Command::Run { file } => match std::fs::read_to_string(file) {
            Err(e) => {
                eprintln!("error: {}: {e}", file.display());
                1
            }
            Ok(text) => {
                let mut session = Session {
                    budget: resolve_budget(cli.budget),
                    hyp_depth: cli.hyp_depth,
                    with_plans: !cli.no_plans,
                    ..Session::default()
                };
                let mut output = std::io::stdout().lock();
                run_kb(&mut session, &text, &mut output) as u8
            }
        },
        Command::Prove { theory, prop, kb } => match session_for(&cli, theory, kb) {
            Err(code) => code,
            Ok(mut session) => match session.eval(&format!("prove {prop}")) {
                Ok(Some(text)) => {
                    println!("{text}");
                    0
                }
                Ok(None) => 0,
                Err(msg) => {
                    println!("error: {msg}");
                    2
                }
            },
        },
        Command::Export { theory, out, kb } => match session_for(&cli, theory, kb) {
            Err(code) => code,
            Ok(session) => {
                let t = session.current.expect("session_for sets the theory");
                match std::fs::File::create(out) {
                    Err(e) => {
                        eprintln!("error: {}: {e}", out.display());
                        1
                    }
                    Ok(mut file) => {
                        match export_provenance(&session.store, t, &mut file) {
                            Ok(bytes) => {
                                println!("wrote {bytes} bytes to {}", out.display());
                                0
                            }
                            Err(ExportError::Io(e)) => {
                                eprintln!("error: {}: {e}", out.display());
                                1
                            }
                            Err(e) => {
                                println!("error: {e}");
                                2
                            }
                        }
                    }
                }
            }
        },
    };
    ExitCode::from(code)
}
