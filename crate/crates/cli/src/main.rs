//! Binary entry point: parse flags, dispatch, map errors to exit codes
//! (0 success, 1 usage/config, 2 data, 3 internal).

use clap::Parser;
use soda_citron_cli::args::{Cli, Command};
use soda_citron_cli::{commands, CliError};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Render clap's own message (help/version exit 0).
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.common.config(soda_citron::EngineMode::SodaCitron)?;
            let out = commands::cmd_simulate(&cfg)?;
            println!(
                "wrote {} ({} objects) and {} ({} detections)",
                out.truth_path.display(),
                out.n_objects,
                out.detections_path.display(),
                out.n_detections
            );
        }
        Command::Run(args) => {
            let cfg = args.common.config(args.method)?;
            let out = commands::cmd_run(&cfg, &args.detections, &args.truth)?;
            println!(
                "wrote {} ({} checkpoints) and {} ({} estimates)",
                out.csv_path.display(),
                out.rows.len(),
                out.estimates_path.display(),
                out.estimates.estimates.len()
            );
        }
        Command::Montecarlo(args) => {
            let cfg = args.common.config(soda_citron::EngineMode::SodaCitron)?;
            let out = commands::cmd_montecarlo(&cfg, args.runs, &args.methods())?;
            print!("{}", out.report);
            println!(
                "wrote {} ({} rows) and {}",
                out.csv_path.display(),
                out.rows.len(),
                out.report_path.display()
            );
        }
        Command::Bench(args) => {
            let cfg = args.common.config(args.method)?;
            let out = commands::cmd_bench(&cfg, &args.sizes)?;
            for r in &out.rows {
                println!(
                    "{} detections in {:.3}s ({:.0} detections/s)",
                    r.n_detections, r.seconds, r.detections_per_sec
                );
            }
            if let Some(exp) = out.exponent {
                println!("log-log growth exponent: {exp:.3}");
            }
            println!("wrote {}", out.csv_path.display());
        }
        Command::Evaluate(args) => {
            let out = commands::cmd_evaluate(&args.estimates, &args.truth, &args.out)?;
            println!(
                "tp {} fp {} fn {} f1 {}",
                out.row.tp,
                out.row.fp,
                out.row.fn_count,
                out.row
                    .f1
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "n/a".into())
            );
            println!("wrote {}", out.csv_path.display());
        }
    }
    Ok(())
}
