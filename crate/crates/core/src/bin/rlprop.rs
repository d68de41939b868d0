use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rlprop::analysis::{self, RunError};
use rlprop::grid::{read_grid, FieldGrid, Quantity};
use rlprop::ray::Execution;
use rlprop::Vec3;

#[derive(Parser)]
#[command(name = "rlprop", version, about = "Ray-launching radio propagation simulator")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; analysis commands read `grid.rlg` from here by default.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Trace launch directions serially in lattice order.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads for tracing (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Power,
    DelaySpread,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Power => Quantity::Power,
            QuantityArg::DelaySpread => Quantity::DelaySpread,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by --config.
    Simulate,
    /// Export one horizontal layer as CSV.
    Slice {
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        height: f64,
        #[arg(long, value_enum, default_value = "power")]
        quantity: QuantityArg,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the power delay profile of the cell containing a point.
    Pdp {
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Compare simulated power with a measurement CSV (x,y,z,power_dbm).
    Compare {
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        measurements: PathBuf,
        /// Per-point report CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Coverage mask of one layer for a receiver sensitivity.
    Coverage {
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        sensitivity: f64,
        #[arg(long)]
        height: f64,
        /// Mask CSV (x,y,z,covered).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render one layer as a PPM heatmap.
    Export {
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        height: f64,
        #[arg(long, value_enum, default_value = "power")]
        quantity: QuantityArg,
        #[arg(long, allow_hyphen_values = true)]
        min: f64,
        #[arg(long, allow_hyphen_values = true)]
        max: f64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load(grid: &Option<PathBuf>, out_dir: &Path) -> Result<FieldGrid, RunError> {
    let path = grid.clone().unwrap_or_else(|| out_dir.join("grid.rlg"));
    if !path.is_file() {
        return Err(RunError::Config(format!("grid dump not found: {}", path.display())));
    }
    Ok(read_grid(&path)?)
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), RunError> {
    match output {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| RunError::Io { context: format!("cannot write {}", p.display()), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match &cli.command {
        Command::Simulate => {
            let config = cli.config.as_ref().ok_or_else(|| RunError::Config("simulate requires --config".into()))?;
            let execution = if cli.deterministic { Execution::Deterministic } else { Execution::Parallel };
            let summary = analysis::run(config, &cli.out_dir, execution, cli.workers)?;
            let s = summary.stats;
            println!(
                "rays {} segments {} children {} (reflected {}, transmitted {}, diffracted {}) in {:.1} s",
                s.rays_launched,
                s.segments,
                s.children(),
                s.reflected_children,
                s.transmitted_children,
                s.diffracted_children,
                summary.wall_clock_s
            );
            println!("wrote {}", cli.out_dir.display());
        }
        Command::Slice { grid, height, quantity, output } => {
            let g = load(grid, &cli.out_dir)?;
            let plane = g.plane_slice(*height, (*quantity).into())?;
            emit(&plane.to_csv(), output)?;
        }
        Command::Pdp { grid, x, y, z } => {
            let g = load(grid, &cli.out_dir)?;
            let cell = g.cell_at(Vec3::new(*x, *y, *z))?;
            let mut text = String::from("delay_ns,power_dbm\n");
            for e in g.pdp(cell) {
                text.push_str(&format!("{},{}\n", e.delay_ns, e.power_dbm));
            }
            print!("{text}");
        }
        Command::Compare { grid, measurements, report } => {
            let g = load(grid, &cli.out_dir)?;
            let set = analysis::read_measurements(measurements)?;
            let r = analysis::compare(&g, &set)?;
            if let Some(p) = report {
                emit(&r.to_csv(), &Some(p.clone()))?;
            }
            print!("{}", r.summary());
        }
        Command::Coverage { grid, sensitivity, height, output } => {
            let g = load(grid, &cli.out_dir)?;
            let c = analysis::coverage(&g, *sensitivity, *height)?;
            if let Some(p) = output {
                emit(&c.to_csv(), &Some(p.clone()))?;
            }
            println!(
                "covered {} of {} reached cells ({:.4}) at {} dBm",
                c.covered, c.reached, c.fraction, c.sensitivity_dbm
            );
        }
        Command::Export { grid, height, quantity, min, max, output } => {
            let g = load(grid, &cli.out_dir)?;
            let plane = g.plane_slice(*height, (*quantity).into())?;
            let sidecar = analysis::export_heatmap(&plane, output, *min, *max)?;
            println!("wrote {} and {}", output.display(), sidecar.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
