use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use resilval::outage::Scenario;
use resilval::report::{compare_scenarios, export_exposure, percent_reduction, run_config_file, write_demo, RunOverrides};
use resilval::{Error, Result};

#[derive(Parser)]
#[command(name = "resilval", version, about = "Customer interruption cost valuation for cold-weather outages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario end to end and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: Option<Scenario>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare finished runs; the first directory is the reference.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize indoor temperatures of a finished run by building and by
    /// insulation class.
    ExportExposure { dir: PathBuf },
    /// Write the demo config and weather series into a directory.
    Demo { dir: PathBuf },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            scenario,
            trials,
            seed,
            out,
            threads,
        } => {
            let overrides = RunOverrides {
                scenario,
                n_trials: trials,
                seed,
                output_dir: out,
                threads,
            };
            let report = run_config_file(&config, &overrides)?;
            let s = &report.summary;
            println!(
                "{}: {} trials, mean total {:.2}, mean NEI {:.2}, mean RR {:.5} -> {}",
                s.scenario.label(),
                s.n_trials,
                s.stats.total.mean,
                s.stats.nei.mean,
                s.mean_rr,
                report.output_dir.display()
            );
        }
        Command::Compare { dirs, out } => {
            let cmp = compare_scenarios(&dirs)?;
            print!("{}", cmp.render());
            let nei = |i| cmp.value("nei", i).unwrap_or(0.0);
            for (i, label) in cmp.labels.iter().enumerate().skip(1) {
                println!(
                    "NEI reduction {} vs {}: {:.1}%",
                    label,
                    cmp.labels[0],
                    percent_reduction(nei(0), nei(i))
                );
            }
            if let Some(path) = out {
                let file = fs::File::create(&path).map_err(|source| Error::Output { path, source })?;
                cmp.write_csv(BufWriter::new(file))?;
            }
        }
        Command::ExportExposure { dir } => {
            let classes = export_exposure(&dir)?;
            println!("{:<20} {:>6} {:>8} {:>8} {:>8}", "insulation", "n", "mean_t", "min_t", "mean_rr");
            for c in classes {
                println!(
                    "{:<20} {:>6} {:>8.2} {:>8.2} {:>8.4}",
                    c.insulation.as_str(),
                    c.n_buildings,
                    c.mean_t_in,
                    c.min_t_in,
                    c.mean_rr
                );
            }
        }
        Command::Demo { dir } => {
            let config = write_demo(&dir)?;
            println!("wrote {}", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
