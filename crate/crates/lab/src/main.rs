use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, ValueEnum};

use prodset_lab::runners::{self, RunOptions};
use prodset_lab::{ExperimentConfig, ResultRecord};

/// Exit status for usage and config errors.
const USAGE_EXIT: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    JinVerify,
    Thm2Bound,
    Counterexample,
    WalkDensity,
    CoverGreedy,
    Selftest,
}

/// Seeded experiments on product sets in groups.
///
/// Exit status: 0 when every checked bound holds, 1 on any violation, 2 when
/// some trial ran out of budget and none failed, 3 on usage or config errors.
#[derive(Debug, Parser)]
#[command(name = "prodset-lab", version)]
struct Cli {
    command: Command,
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: the config's `out`, else ./results].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn dispatch(cmd: Command, cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    match cmd {
        Command::JinVerify => runners::run_jin_verify(cfg, opts),
        Command::Thm2Bound => runners::run_thm2_bound(cfg, opts),
        Command::Counterexample => runners::run_counterexample(cfg, opts),
        Command::WalkDensity => runners::run_walk_density(cfg, opts),
        Command::CoverGreedy => runners::run_cover_greedy(cfg, opts),
        Command::Selftest => runners::run_selftest(cfg, opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE_EXIT) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match ExperimentConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(USAGE_EXIT);
        }
    };
    let opts = RunOptions {
        seed: cli.seed.unwrap_or(cfg.seed),
        jobs: cli.jobs.max(1),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|p| cfg.resolve(p)))
        .unwrap_or_else(|| PathBuf::from("results"));

    // bad parameters surface as runner errors before any work is written
    let rec = match dispatch(cli.command, &cfg, opts).and_then(|r| r.check_citations().map(|_| r)) {
        Ok(rec) => rec,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(USAGE_EXIT);
        }
    };
    match rec.write_to(&out) {
        Ok(files) => {
            // a closed pipe on stdout is not worth a panic
            let mut stdout = io::stdout().lock();
            let a = &rec.aggregate;
            let _ = writeln!(
                stdout,
                "{}: {} trials, {} passed, {} violations, {} undetermined, {} reports -> {:?}",
                rec.experiment, a.trials, a.passed, a.violations, a.undetermined, a.reports, rec.verdict
            );
            for f in files {
                let _ = writeln!(stdout, "  {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(USAGE_EXIT);
        }
    }
    ExitCode::from(rec.verdict.exit_code() as u8)
}
