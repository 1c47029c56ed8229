use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsc_core::dsc_state::{checkpoint, Field};
use dsc_core::hexmesh::io::{read_mesh, write_mesh};
use dsc_core::hexmesh::{gen_annulus, gen_box, MeshReport, MeshTopology, Vec3};
use dsc_core::sim::{config::MESH_TOLERANCE, run_file};
use dsc_core::{DscError, Result};

/// Buoyant flow solver on hexahedral meshes.
#[derive(Debug, Parser)]
#[command(name = "dsc", version)]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation described by a TOML file.
    Run {
        config: PathBuf,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Generate or inspect meshes.
    Mesh {
        #[command(subcommand)]
        command: MeshCommand,
    },
    /// Print the state of one cell stored in a checkpoint.
    Probe {
        checkpoint: PathBuf,
        #[arg(long)]
        cell: usize,
    },
}

#[derive(Debug, Subcommand)]
enum MeshCommand {
    /// Write a generated mesh.
    Gen {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Validate a mesh file and print geometric checks.
    Check { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum Shape {
    /// Axis-aligned box at the origin.
    Box {
        #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"])]
        cells: Vec<usize>,
        #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"])]
        extent: Vec<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Coaxial annular gap around the z axis.
    Annulus {
        #[arg(long, num_args = 3, value_names = ["NR", "NTHETA", "NZ"])]
        cells: Vec<usize>,
        #[arg(long)]
        r_inner: f64,
        #[arg(long)]
        r_outer: f64,
        #[arg(long)]
        length: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(DscError::InvalidParameter("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| DscError::InvalidParameter(e.to_string()))?;
    }
    match cli.command {
        Command::Run { config, resume } => {
            let s = run_file(&config, resume.as_deref())?;
            println!(
                "finished: {} steps, t = {} s ({:?}); max |u| = {:.4e} m/s, T in [{:.4}, {:.4}] K",
                s.steps, s.time, s.reason, s.last.max_u, s.last.min_t, s.last.max_t
            );
            println!("diagnostics: {}", s.diagnostics.display());
        }
        Command::Mesh { command } => match command {
            MeshCommand::Gen { shape } => {
                let (mesh, out) = match shape {
                    Shape::Box { cells, extent, output } => (
                        gen_box(
                            [cells[0], cells[1], cells[2]],
                            Vec3::new(extent[0], extent[1], extent[2]),
                        )?,
                        output,
                    ),
                    Shape::Annulus {
                        cells,
                        r_inner,
                        r_outer,
                        length,
                        output,
                    } => (
                        gen_annulus([cells[0], cells[1], cells[2]], r_inner, r_outer, length)?,
                        output,
                    ),
                };
                MeshTopology::build(mesh.clone(), MESH_TOLERANCE)?;
                write_mesh(&mesh, &out)?;
                println!("wrote {} cells to {}", mesh.cells.len(), out.display());
            }
            MeshCommand::Check { file } => {
                let topo = MeshTopology::build(read_mesh(&file)?, MESH_TOLERANCE)?;
                print!("{}", MeshReport::new(&topo));
            }
        },
        Command::Probe { checkpoint, cell } => {
            let (store, grid) = checkpoint::load(&checkpoint)?;
            if cell >= store.n_cells() {
                return Err(DscError::InvalidParameter(format!(
                    "cell {cell} out of range, checkpoint has {} cells",
                    store.n_cells()
                )));
            }
            println!("step {} time {} tau {}", grid.step, grid.time, grid.tau);
            for f in Field::ALL {
                let s = store.get(f);
                let ports: Vec<String> = s.port[cell].iter().map(|v| v.to_string()).collect();
                println!("{:<4} node {} ports [{}]", f.name(), s.node[cell], ports.join(", "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
