use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use qiopa_cli::{run, validate, Flags, Protocol, RunError};

#[derive(Parser)]
#[command(name = "qiopa", version, about = "Quantum-injected parametric amplification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// γ_ij table and the two amplified branches |Φ^φ⟩, |Φ^φ⊥⟩.
    Macrostate(Flags),
    /// The Micro-Macro state |Σ⟩ and its macro photon statistics.
    MicroMacro(Flags),
    /// Entanglement swapping: outcome probabilities and post-state fidelities.
    Swap(Flags),
    /// Double amplification compared with the directly built Macro-Macro singlet.
    DoubleAmp(Flags),
    /// Closed-form (and with --oracle, displaced-parity) Wigner slice.
    Wigner(Flags),
    /// CHSH parameter of a protocol state.
    Chsh(Flags),
    /// Correlation fringe against the site-B analyzer phase.
    Fringe(Flags),
    /// Predict the truncation deficit of a cutoff without running anything.
    Validate(Flags),
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let message = e.to_string();
                    let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
                    eprintln!("{}", json!({"error": "usage", "message": first}));
                    ExitCode::from(2)
                }
            };
        }
    };
    let (protocol, flags) = match cli.command {
        Command::Macrostate(f) => (Some(Protocol::Macrostate), f),
        Command::MicroMacro(f) => (Some(Protocol::MicroMacro), f),
        Command::Swap(f) => (Some(Protocol::Swap), f),
        Command::DoubleAmp(f) => (Some(Protocol::DoubleAmp), f),
        Command::Wigner(f) => (Some(Protocol::Wigner), f),
        Command::Chsh(f) => (Some(Protocol::Chsh), f),
        Command::Fringe(f) => (Some(Protocol::Fringe), f),
        Command::Validate(f) => (None, f),
    };
    let config = match flags.resolve(protocol) {
        Ok(c) => c,
        Err(e) => return fail(e.into()),
    };
    if protocol.is_none() {
        return match validate(&config) {
            Ok(d) => {
                println!("{}", serde_json::to_string(&d).expect("serializable"));
                ExitCode::SUCCESS
            }
            Err(e) => fail(e.into()),
        };
    }
    match run(&config) {
        Ok(report) => {
            let line = json!({
                "status": "ok",
                "manifest": report.manifest,
                "outputs": report.outputs,
                "diagnostics": report.diagnostics,
            });
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
