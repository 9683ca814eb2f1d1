//! Command-line entry point.
//!
//! ```text
//! fraudrank <command> [--config FILE] [--section.key VALUE]...
//! ```
//!
//! Every config-file key doubles as a flag of the same dotted name, so
//! `--split.train_fraction 0.8` overrides whatever the file says. Exit
//! codes: 0 success, 1 configuration/usage error, 2 stage failure.

use std::path::PathBuf;
use std::process::ExitCode;

use fraudrank::config::{parse_pairs, PipelineConfig};
use fraudrank::pipeline::{
    run_pipeline, stage_evaluate, stage_features, stage_graph, stage_ppr, stage_psi, stage_report,
    stage_synth, stage_train, MetricsDocument,
};

const USAGE: &str = "\
usage: fraudrank <command> [--config FILE] [--section.key VALUE]...

commands:
  run          execute every stage end to end
  synth        generate the synthetic ledger and ring roster
  graph-stats  build the account graph and print its statistics
  ppr          compute exposure scores over the training graph
  features     assemble train/test feature matrices
  train        fit the logistic model(s) on cached features
  evaluate     score the test matrix and write metrics
  psi          measure train-vs-test feature stability
  report       render the importance table and ROC/PR plots

options:
  --config FILE        read settings from a sectioned key-value file
  --section.key VALUE  override any setting (e.g. --run.seed 7)
  --help               show this message

exit codes: 0 success, 1 configuration error, 2 stage failure";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    Run,
    Synth,
    GraphStats,
    Ppr,
    Features,
    Train,
    Evaluate,
    Psi,
    Report,
}

impl Command {
    fn parse(name: &str) -> Option<Command> {
        Some(match name {
            "run" => Command::Run,
            "synth" => Command::Synth,
            "graph-stats" => Command::GraphStats,
            "ppr" => Command::Ppr,
            "features" => Command::Features,
            "train" => Command::Train,
            "evaluate" => Command::Evaluate,
            "psi" => Command::Psi,
            "report" => Command::Report,
            _ => return None,
        })
    }
}

struct Cli {
    command: Command,
    config_path: Option<PathBuf>,
    overrides: Vec<(String, String)>,
    help: bool,
}

fn parse_cli(args: &[String]) -> Result<Cli, String> {
    let mut command = None;
    let mut config_path = None;
    let mut overrides = Vec::new();
    let mut help = false;

    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        if arg == "--help" || arg == "-h" {
            help = true;
        } else if arg == "--config" {
            let value = args
                .get(i + 1)
                .ok_or_else(|| "--config needs a file path".to_owned())?;
            config_path = Some(PathBuf::from(value));
            i += 1;
        } else if let Some(key) = arg.strip_prefix("--") {
            if !key.contains('.') {
                return Err(format!(
                    "unknown flag `{arg}` (settings are --section.key VALUE)"
                ));
            }
            let value = args
                .get(i + 1)
                .ok_or_else(|| format!("flag `{arg}` needs a value"))?;
            overrides.push((key.to_owned(), value.clone()));
            i += 1;
        } else if command.is_none() {
            command = Some(Command::parse(arg).ok_or_else(|| format!("unknown command `{arg}`"))?);
        } else {
            return Err(format!("unexpected argument `{arg}`"));
        }
        i += 1;
    }

    if help {
        return Ok(Cli {
            command: command.unwrap_or(Command::Run),
            config_path,
            overrides,
            help: true,
        });
    }
    let command = command.ok_or_else(|| "no command given".to_owned())?;
    Ok(Cli {
        command,
        config_path,
        overrides,
        help: false,
    })
}

fn build_config(cli: &Cli) -> Result<PipelineConfig, String> {
    let mut config = match &cli.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
            let mut config = PipelineConfig::default();
            for (key, value) in parse_pairs(&text).map_err(|e| e.to_string())? {
                config.apply_pair(&key, &value).map_err(|e| e.to_string())?;
            }
            config
        }
        None => PipelineConfig::default(),
    };
    for (key, value) in &cli.overrides {
        config.apply_pair(key, value).map_err(|e| e.to_string())?;
    }
    config.finalize().map_err(|e| e.to_string())?;
    Ok(config)
}

fn print_metrics_summary(document: &MetricsDocument) {
    println!("auc: {}", document.primary.auc);
    if let Some(comparison) = &document.comparison {
        println!("auc_base: {}", comparison.auc_base);
        println!("auc_ppr: {}", comparison.auc_ppr);
        println!("delta: {}", comparison.delta);
    }
}

fn dispatch(command: Command, config: &PipelineConfig) -> Result<(), ExitCode> {
    let stage_failed = |err: fraudrank::pipeline::StageError| {
        eprintln!("error: {err}");
        ExitCode::from(2)
    };
    let out = config.output_dir.display();
    match command {
        Command::Run => {
            let document = run_pipeline(config).map_err(stage_failed)?;
            print_metrics_summary(&document);
            println!("artifacts in {out}");
        }
        Command::Synth => {
            let outcome = stage_synth(config).map_err(stage_failed)?;
            println!(
                "wrote ledger.csv ({} rows) and rings.csv ({} mule accounts) to {out}",
                outcome.n_rows, outcome.n_mules
            );
        }
        Command::GraphStats => {
            let stats = stage_graph(config).map_err(stage_failed)?;
            println!("nodes: {}", stats.n_nodes);
            println!("edges: {}", stats.n_edges);
            println!("transactions: {}", stats.n_transactions);
            println!("self_loops: {}", stats.n_self_loops);
            println!("dangling: {}", stats.n_dangling);
        }
        Command::Ppr => {
            let outcome = stage_ppr(config).map_err(stage_failed)?;
            println!(
                "scored {} accounts in {} iterations (converged: {})",
                outcome.n_accounts, outcome.iterations_used, outcome.converged
            );
        }
        Command::Features => {
            let (n_train, n_test) = stage_features(config).map_err(stage_failed)?;
            println!(
                "wrote features_train.csv ({n_train} rows) and features_test.csv ({n_test} rows) to {out}"
            );
        }
        Command::Train => {
            stage_train(config).map_err(stage_failed)?;
            println!("wrote model artifacts to {out}");
        }
        Command::Evaluate => {
            let document = stage_evaluate(config).map_err(stage_failed)?;
            print_metrics_summary(&document);
        }
        Command::Psi => {
            let entries = stage_psi(config).map_err(stage_failed)?;
            for (name, entry) in &entries {
                let flag = if entry.degenerate {
                    "degenerate"
                } else if entry.psi < 0.05 {
                    "stable"
                } else {
                    "shifted"
                };
                println!("{name}: {} ({flag})", entry.psi);
            }
        }
        Command::Report => {
            stage_report(config).map_err(stage_failed)?;
            println!("wrote importance.csv, roc.svg, pr.svg to {out}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Rust ignores SIGPIPE by default, so `fraudrank run | head` would panic
    // on the first write after the reader exits. Restore the Unix default:
    // die quietly like any other pipeline tool.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_cli(&args) {
        Ok(cli) => cli,
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    if cli.help {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let config = match build_config(&cli) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
