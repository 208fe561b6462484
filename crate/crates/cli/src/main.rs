use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nominal::format::{parse_automaton, print_automaton};
use nominal::runner::{run, Algo, RunConfig};
use nominal_core::targets::TargetSpec;

#[derive(Parser)]
#[command(name = "nominal", version, about = "Learn nominal automata over equality atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a built-in target with an exact teacher.
    Learn {
        /// fifo:N, ww:N, nlast:N or leq
        #[arg(long)]
        target: TargetSpec,
        #[arg(long, value_enum, default_value = "lstar")]
        algo: Algo,
        /// Equivalence depth bound for nlstar.
        #[arg(long)]
        depth: Option<usize>,
        /// Write the learned automaton here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        trace: bool,
        /// Check the equivalence-query bound and per-hypothesis progress.
        #[arg(long)]
        assert_bounds: bool,
        /// Cap on explored equivalence configurations.
        #[arg(long)]
        max_configs: Option<usize>,
        /// Compare the result with the target on random words from this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse an automaton file and print it in canonical form.
    Show { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Learn { target, algo, depth, out, stats, trace, assert_bounds, max_configs, seed } => {
            let cfg = RunConfig { target, algo, depth, max_configs, assert_bounds, seed };
            let outcome = match run(&cfg) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            for n in &outcome.notices {
                eprintln!("notice: {n}");
            }
            if trace {
                for line in &outcome.trace {
                    println!("{line}");
                }
            }
            println!("{}", outcome.summary());
            if stats {
                print!("{}\n{}", outcome.stats_table(), outcome.stats_kv());
            }
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, print_automaton(&outcome.report.automaton)) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Command::Show { file } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", file.display());
                    return ExitCode::from(1);
                }
            };
            match parse_automaton(&text) {
                Ok(a) => {
                    print!("{}", print_automaton(&a));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", file.display());
                    ExitCode::from(2)
                }
            }
        }
    }
}
