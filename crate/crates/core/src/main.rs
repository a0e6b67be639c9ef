use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ct_engine::checker::search::{search_counterexample_theorem1, Principle, SearchBounds, SearchOutcome, Toggles};
use ct_engine::dsl::{check_source, oracle_for_query, RunOptions};
use ct_engine::quantum::oracle::OracleParams;

#[derive(Parser)]
#[command(name = "ct-engine", version, about = "Possibility checks for information and work media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every query of a declaration file and print the report.
    Check {
        file: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also require all transitions to share one energy class.
        #[arg(long)]
        strict_work_axiom: bool,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
    },
    /// Run the fidelity oracle on the task behind one query.
    Oracle {
        file: String,
        /// Query index, counting from 0.
        #[arg(long)]
        task: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 4)]
        ancilla_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search small abstract models for a work-extraction counterexample.
    Enumerate {
        #[arg(long)]
        attributes: usize,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        n_trunc: usize,
        #[arg(long = "disable-principle")]
        disable: Vec<Principle>,
    },
}

fn read(file: &str) -> Result<String, ExitCode> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {file}: {e}");
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check {
            file,
            seed,
            strict_work_axiom,
            json: _,
            text,
        } => {
            let src = match read(&file) {
                Ok(s) => s,
                Err(c) => return c,
            };
            let opts = RunOptions { seed, strict_work_axiom };
            match check_source(&src, &opts) {
                Ok(report) => {
                    if text {
                        print!("{}", report.to_text());
                    } else {
                        print!("{}", report.to_json_string());
                    }
                    ExitCode::from(report.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("{file}:{e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Oracle {
            file,
            task,
            restarts,
            iters,
            ancilla_dim,
            seed,
        } => {
            let src = match read(&file) {
                Ok(s) => s,
                Err(c) => return c,
            };
            let params = OracleParams {
                ancilla_dim,
                restarts,
                iters,
                seed,
            };
            match oracle_for_query(&src, task, params) {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Enumerate {
            attributes,
            arity,
            n_trunc,
            disable,
        } => {
            let toggles = disable.into_iter().fold(Toggles::default(), Toggles::without);
            let bounds = SearchBounds {
                attributes,
                arity,
                n_truncation: n_trunc,
            };
            match search_counterexample_theorem1(bounds, toggles) {
                Ok(r) => {
                    let (verdict, cx) = match &r.outcome {
                        SearchOutcome::Exhausted => ("exhausted", serde_json::Value::Null),
                        SearchOutcome::Counterexample(c) => (
                            "counterexample",
                            serde_json::json!({
                                "energies": c.energies,
                                "possible_transitions": c.possible_transitions,
                                "work_tasks": c.work_tasks,
                                "distinguishing": c.distinguishing,
                                "work": [c.work.0, c.work.1, c.work.2],
                                "source": [c.source().0, c.source().1],
                            }),
                        ),
                    };
                    let out = serde_json::json!({
                        "verdict": verdict,
                        "disabled": toggles.disabled().iter().map(|p| p.as_str()).collect::<Vec<_>>(),
                        "estimated": r.estimated as u64,
                        "examined": r.examined,
                        "inconsistent": r.inconsistent,
                        "principle_failures": r.principle_failures,
                        "with_work": r.with_work,
                        "counterexamples": r.counterexamples,
                        "extractor_depth": r.extractor_depth,
                        "counterexample": cx,
                    });
                    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
