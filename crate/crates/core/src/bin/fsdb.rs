use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fsdb::bench;
use fsdb::element::Formulation;
use fsdb::model_io::{builtin_names, load_model, read_results, write_results, Overrides};
use fsdb::plot::write_plots;
use fsdb::FsdbError;

#[derive(Parser)]
#[command(
    name = "fsdb",
    version,
    about = "Fibre beam analyses with adaptive shape functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol of a model file or built-in benchmark.
    Run {
        /// Model file path, or the name of a built-in model.
        model: String,
        /// Protocol to run.
        #[arg(long, default_value = "pushover")]
        protocol: String,
        #[command(flatten)]
        flags: ElementFlags,
        /// Output directory for the results tables.
        #[arg(long, env = "FSDB_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Run a benchmark suite and compare against published values.
    Bench {
        #[arg(value_enum, default_value_t = Suite::Table1)]
        suite: Suite,
        #[arg(long)]
        ips: Option<usize>,
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long, value_enum)]
        axial_eq: Option<Switch>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Render SVG plots of a results directory.
    Plot {
        results: PathBuf,
        /// Where to write the SVG files (defaults to the results directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Steps drawn in the profile plots, comma separated.
        #[arg(long, value_delimiter = ',')]
        at_steps: Option<Vec<usize>>,
    },
    /// List the built-in models.
    Models,
}

#[derive(Args)]
struct ElementFlags {
    #[arg(long, value_enum)]
    formulation: Option<FormulationArg>,
    /// Integration points per element.
    #[arg(long)]
    ips: Option<usize>,
    /// Elements per member.
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long, value_enum)]
    axial_eq: Option<Switch>,
    /// Step count of ramp protocols.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Fsdb,
    Db,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Table1,
    Benchmark1,
}

impl ElementFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            formulation: self.formulation.map(|f| match f {
                FormulationArg::Fsdb => Formulation::Fsdb,
                FormulationArg::Db => Formulation::Db,
            }),
            integration_points: self.ips,
            elements: self.elements,
            axial_eq: self.axial_eq.map(|s| matches!(s, Switch::On)),
            steps: self.steps,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, FsdbError> {
    match command {
        Command::Run {
            model,
            protocol,
            flags,
            out_dir,
        } => {
            let spec = load_model(&model)?;
            let out = spec.run(&protocol, &flags.overrides())?;
            let meta = &out.metadata;
            let dir = out_dir.unwrap_or_else(|| {
                PathBuf::from("results").join(format!(
                    "{}-{}-{}",
                    meta.model, meta.protocol, meta.formulation
                ))
            });
            write_results(&out.bundle(), &dir)?;
            let res = &out.result;
            let iters: usize = res.steps.iter().map(|s| s.iterations).sum();
            let halvings = res.steps.iter().map(|s| s.halvings).max().unwrap_or(0);
            println!(
                "{} / {}: {} {} element(s), {} IPs, axial equilibration {}",
                meta.model,
                meta.protocol,
                meta.elements,
                meta.formulation,
                meta.integration_points,
                if meta.axial_equilibration {
                    "on"
                } else {
                    "off"
                }
            );
            println!(
                "peak force   {:.2} kN / {:.2} kN",
                res.peak_positive() / 1e3,
                res.peak_negative() / 1e3
            );
            if let Some(last) = res.steps.last() {
                println!("final drift  {:.4} m", last.control_disp);
            }
            println!(
                "steps        {} ({} Newton iterations, max {} halvings)",
                res.steps.len(),
                iters,
                halvings
            );
            println!("results      {}", dir.display());
            if let Some(f) = &res.failure {
                eprintln!("did not converge: {f}");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            suite,
            ips,
            elements,
            axial_eq,
            steps,
        } => {
            let ov = ElementFlags {
                formulation: None,
                ips,
                elements,
                axial_eq,
                steps,
            }
            .overrides();
            let cases = match suite {
                Suite::Table1 => bench::table1(&ov),
                Suite::Benchmark1 => bench::benchmark1(&ov),
            };
            print!("{}", bench::format_table(&cases));
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot {
            results,
            out_dir,
            at_steps,
        } => {
            let bundle = read_results(&results)?;
            let dir = out_dir.unwrap_or_else(|| results.clone());
            for p in write_plots(&bundle, &dir, at_steps.as_deref())? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Models => {
            for name in builtin_names() {
                let spec = load_model(name)?;
                println!(
                    "{name:<12} {} (protocols: {})",
                    spec.description,
                    spec.protocols
                        .keys()
                        .cloned()
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
