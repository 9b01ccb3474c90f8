use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use clap::{Parser, Subcommand};
use kicked_duo_cli::run::compare_files;
use kicked_duo_cli::{execute, fig_presets, worker_count, Config, ExperimentSpec, Plan, RunContext, Scale};

#[derive(Parser)]
#[command(name = "kicked-duo", version, about = "Two coupled delta-kicked rotors: quantum and classical runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file or a figure preset.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// fig1 .. fig5; physics other than hbar, w and grids comes from the config.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, requires = "preset", default_value = "desk")]
        scale: Scale,
        /// Continue from a state.kduo or ensemble.csv checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subtract the delta2 column of two series CSVs (first minus second).
    Compare {
        minuend: PathBuf,
        subtrahend: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<u64>>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> kicked_duo_cli::Result<()> {
    match cli.command {
        Command::Run { config, preset, scale, resume, workers, out } => {
            let config = Config::load(&config)?;
            let specs = match &preset {
                Some(name) => fig_presets(name, scale, &config)?,
                None => vec![ExperimentSpec::from_config(&config)],
            };
            let plan = Plan::build(&specs)?;
            let env = std::env::var("KICKED_DUO_WORKERS").ok();
            let mut ctx = RunContext::new(
                out.unwrap_or_else(|| config.settings.output_dir.clone()),
                worker_count(workers, env.as_deref())?,
            );
            ctx.resume = resume;
            ctx.scale = preset.as_ref().map(|_| scale);
            ctx.preset = preset;
            let flag = ctx.interrupt.clone();
            let _ = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed));
            execute(&plan, &ctx)?;
            eprintln!("wrote {}", ctx.out_dir.display());
            Ok(())
        }
        Command::Compare { minuend, subtrahend, window, out } => {
            let window = window.map(|w| (w[0], w[1]));
            let report = compare_files(&out, &minuend, &subtrahend, window)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
