use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use distcurv::regge::{ReggeField, Space};
use distcurv_cli::experiments::{
    assemble_curvature, interpolate, run_convergence, run_lincheck, run_probes, FunctionalKind, MetricKind, RunConfig,
    DEFAULT_PERTURB,
};
use distcurv_cli::io::{read_coefficients, read_mesh, write_coefficients, write_functional, write_mesh, write_results};
use distcurv_cli::{Error, Result};

#[derive(Parser)]
#[command(name = "distcurv", version, about = "Distributional curvature of Regge metrics")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Write the structured cube mesh of the first level.
    Mesh(Opts),
    /// Write the canonical Regge interpolant of the metric.
    Interp(Opts),
    /// Write a curvature functional assembled against the test basis.
    Curvature(Opts),
    /// H⁻² error of a curvature functional over several levels.
    Convergence(Opts),
    /// H⁻² norms of the probe functionals F1, F2, F3.
    Probes(Opts),
    /// Central-difference check of the linearization formula.
    Lincheck(Opts),
}

#[derive(Args, Clone)]
struct Opts {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Comma-separated refinement levels.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    levels: Vec<usize>,
    /// Polynomial order of the Regge metric.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Lagrange order of the test space (default: order + 2).
    #[arg(long)]
    test_order: Option<usize>,
    /// Vertex perturbation as a fraction of the mesh size.
    #[arg(long, default_value_t = DEFAULT_PERTURB)]
    perturb: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated sizes of the path quadrature.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    gp: Vec<usize>,
    #[arg(long, default_value = "qop")]
    functional: String,
    /// Exact metric: `benchmark` or `flat`.
    #[arg(long, default_value = "benchmark")]
    metric: String,
    /// Read the mesh from a file instead of generating it.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Read Regge coefficients instead of interpolating.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    flip_edge_jump: bool,
}

impl Opts {
    fn config(&self) -> Result<RunConfig> {
        let cfg = RunConfig {
            dim: self.dim,
            levels: self.levels.clone(),
            order: self.order,
            test_order: self.test_order,
            perturb: self.perturb,
            seed: self.seed,
            gp: self.gp.clone(),
            functional: FunctionalKind::parse(&self.functional)?,
            metric: MetricKind::parse(&self.metric)?,
            edge_sign: if self.flip_edge_jump { -1.0 } else { 1.0 },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(File::create(p)?),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn mesh(&self, cfg: &RunConfig) -> Result<distcurv::mesh::Mesh> {
        match &self.mesh {
            Some(p) => read_mesh(BufReader::new(File::open(p)?), &p.display().to_string()),
            None => cfg.mesh(cfg.levels[0]),
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.verb {
        Verb::Mesh(o) => {
            let cfg = o.config()?;
            write_mesh(&o.mesh(&cfg)?, o.output()?)?;
        }
        Verb::Interp(o) => {
            let cfg = o.config()?;
            let mesh = o.mesh(&cfg)?;
            let rs = Space::regge(&mesh, cfg.order);
            write_coefficients(&interpolate(&cfg, &rs)?.coeffs, o.output()?)?;
        }
        Verb::Curvature(o) => {
            let cfg = o.config()?;
            let mesh = o.mesh(&cfg)?;
            let rs = Space::regge(&mesh, cfg.order);
            let gh = match &o.coeffs {
                Some(p) => {
                    let c = read_coefficients(File::open(p)?, &p.display().to_string())?;
                    if c.len() != rs.ndofs() {
                        return Err(Error::Config(format!("{} coefficients for {} DOFs", c.len(), rs.ndofs())));
                    }
                    ReggeField::new(&rs, c)
                }
                None => interpolate(&cfg, &rs)?,
            };
            write_functional(&assemble_curvature(&cfg, &mesh, &gh)?, o.output()?)?;
        }
        Verb::Convergence(o) => {
            let cfg = o.config()?;
            let rows = run_convergence(&cfg)?;
            write_results(&rows, &cfg.hash(), o.output()?)?;
        }
        Verb::Probes(o) => {
            let cfg = o.config()?;
            let rows = run_probes(&cfg)?;
            write_results(&rows, &cfg.hash(), o.output()?)?;
        }
        Verb::Lincheck(o) => {
            let cfg = o.config()?;
            let rep = run_lincheck(&cfg)?;
            write!(o.output()?, "{}", rep.render())?;
            return Ok(rep.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
