use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use toricpot::formats::Overrides;
use toricpot::run::{run, Command, Invocation};

/// Potential functions, pattern polytopes, quadric invariants, flow
/// trajectories, and boundary-disk classification from declarative input
/// files.
#[derive(Parser)]
#[command(name = "toricpot", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: TopCmd,
}

#[derive(Subcommand)]
enum TopCmd {
    /// Laurent potential of a facet system: terms, critical points, families.
    Potential {
        #[command(subcommand)]
        command: PotCmd,
    },
    /// Facet systems: vertex enumeration, pattern polytopes, membership.
    Polytope {
        #[command(subcommand)]
        command: PolyCmd,
    },
    /// Projective quadric invariants: eigenvalue ladders and the Segre chart.
    Quadric {
        #[command(subcommand)]
        command: QuadCmd,
    },
    /// Gradient-Hamiltonian trajectories on the quadric pencil.
    Flow {
        #[command(subcommand)]
        command: FlowCmd,
    },
    /// Boundary-disk liftability and singular-configuration enumeration.
    Disks {
        #[command(subcommand)]
        command: DiskCmd,
    },
}

#[derive(Subcommand)]
enum PotCmd {
    /// Expand the potential of the facet system into Laurent terms.
    Build(Common),
    /// Locate critical points across t samples and certify fibers.
    Crit(Common),
    /// Verify declared critical families exactly and by sampling.
    Family(Common),
}

#[derive(Subcommand)]
enum PolyCmd {
    /// Enumerate the vertices of the facet system.
    Vertices(Common),
    /// Build the triangular-pattern polytope for a top row.
    Gc(Common),
    /// Test rational points for (strict) membership.
    Contains(Common),
}

#[derive(Subcommand)]
enum QuadCmd {
    /// Tabulate eigenvalue ladders and moment values per point (CSV).
    GcValues(Common),
    /// Map coordinate pairs through the Segre chart onto the quadric.
    Segre(Common),
}

#[derive(Subcommand)]
enum FlowCmd {
    /// Integrate trajectories from the configured start points (CSV).
    Run(Common),
}

#[derive(Subcommand)]
enum DiskCmd {
    /// Classify disk classes and enumerate singular configurations.
    Classify(Common),
}

#[derive(Args)]
struct Common {
    /// Input document (.toml or .json).
    input: PathBuf,
    /// Directory for the report and CSV side files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Override the solver seed recorded in the input.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of solver starts.
    #[arg(long)]
    starts: Option<usize>,
    /// Override the solver residual tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Override the t samples (comma-separated, e.g. 0.2,0.1,0.05).
    #[arg(long, value_delimiter = ',')]
    t_samples: Option<Vec<f64>>,
    /// Override the offset scale λ (rational, e.g. 2 or 3/2).
    #[arg(long)]
    lambda: Option<String>,
}

impl Common {
    fn into_invocation(self, command: Command) -> Invocation {
        Invocation {
            command,
            input: self.input,
            out_dir: self.out_dir,
            overrides: Overrides {
                seed: self.seed,
                starts: self.starts,
                tolerance: self.tolerance,
                t_samples: self.t_samples,
                lambda: self.lambda,
            },
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let inv = match cli.command {
        TopCmd::Potential { command } => match command {
            PotCmd::Build(c) => c.into_invocation(Command::PotentialBuild),
            PotCmd::Crit(c) => c.into_invocation(Command::PotentialCrit),
            PotCmd::Family(c) => c.into_invocation(Command::PotentialFamily),
        },
        TopCmd::Polytope { command } => match command {
            PolyCmd::Vertices(c) => c.into_invocation(Command::PolytopeVertices),
            PolyCmd::Gc(c) => c.into_invocation(Command::PolytopeGc),
            PolyCmd::Contains(c) => c.into_invocation(Command::PolytopeContains),
        },
        TopCmd::Quadric { command } => match command {
            QuadCmd::GcValues(c) => c.into_invocation(Command::QuadricGcValues),
            QuadCmd::Segre(c) => c.into_invocation(Command::QuadricSegre),
        },
        TopCmd::Flow { command } => match command {
            FlowCmd::Run(c) => c.into_invocation(Command::FlowRun),
        },
        TopCmd::Disks { command } => match command {
            DiskCmd::Classify(c) => c.into_invocation(Command::DisksClassify),
        },
    };
    std::process::exit(run(&inv));
}
