//! `fem2d` command line: argument parsing, option echo and the six
//! commands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use fem2d::io::{csv, format::general, read_mesh, vtk};
use fem2d::problems::{
    compare_methods, exact_velocity_norm, l2_error, l2_error_zero_mean, solve_bvp_1d, solve_darcy_mixed,
    solve_navier_steady_picard, solve_poisson_lagrange, solve_stokes_steady, bvp1d_exact,
};
use fem2d::quadrature::quad_order_for;
use fem2d::spaces::{CellFunction, ScalarFn, VectorFn};
use fem2d::{ExactSolution, FemError, Mesh, PicardOptions, SolveReport, SolverOptions};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fem2d", version, about = "2D finite element solvers and method comparison")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Poisson problem with Lagrange elements
    SolveLaplace,
    /// Mixed Darcy problem with Raviart-Thomas elements
    SolveDarcy,
    /// Lagrange vs mixed comparison table (compare.csv)
    Compare,
    /// Steady Stokes with Taylor-Hood elements
    SolveStokes,
    /// Steady Navier-Stokes by Picard iteration
    SolveNavier,
    /// 1D model problem -u'' = e^x on (0, 1)
    Bvp1d {
        /// Number of elements
        #[arg(short = 'n', long = "elements", default_value_t = 64)]
        n: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveLaplace => "solve-laplace",
            Command::SolveDarcy => "solve-darcy",
            Command::Compare => "compare",
            Command::SolveStokes => "solve-stokes",
            Command::SolveNavier => "solve-navier",
            Command::Bvp1d { .. } => "bvp1d",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Mesh file (.femmesh); each command has a built-in default
    #[arg(short = 'm', long = "mesh", global = true)]
    pub mesh: Option<PathBuf>,
    /// Finite element order
    #[arg(short = 'o', long = "order", global = true)]
    pub order: Option<usize>,
    /// Uniform refinements of the input mesh
    #[arg(short = 'r', long = "refinements", global = true, default_value_t = 0)]
    pub refinements: usize,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub rtol: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, global = true, default_value_t = 10000)]
    pub maxiter: usize,
    /// Kinematic viscosity (Stokes)
    #[arg(long, global = true, default_value_t = 1.0)]
    pub nu: f64,
    /// Reynolds number (Navier-Stokes, nu = 1/Re)
    #[arg(long = "re", global = true, default_value_t = 40.0)]
    pub re: f64,
    /// Manufactured solution name
    #[arg(long, global = true)]
    pub mms: Option<String>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long = "picard-tol", global = true, default_value_t = 1e-8)]
    pub picard_tol: f64,
    #[arg(long = "picard-maxit", global = true, default_value_t = 50)]
    pub picard_maxit: usize,
    /// Picard under-relaxation factor in (0, 1]
    #[arg(long, global = true, default_value_t = 1.0)]
    pub relaxation: f64,
    /// Use diagonal / block-diagonal preconditioning
    #[arg(long, global = true)]
    pub precondition: bool,
}

/// Per-command defaults and limits.
struct Defaults {
    order: usize,
    orders: (usize, usize),
    mms: &'static str,
}

fn defaults(cmd: Command) -> Defaults {
    match cmd {
        Command::SolveLaplace => Defaults { order: 1, orders: (1, 4), mms: "sinsin" },
        Command::SolveDarcy => Defaults { order: 0, orders: (0, 1), mms: "sinsin" },
        Command::Compare => Defaults { order: 1, orders: (1, 2), mms: "harmonic" },
        Command::SolveStokes => Defaults { order: 2, orders: (2, 4), mms: "vortex" },
        Command::SolveNavier => Defaults { order: 2, orders: (2, 4), mms: "kovasznay" },
        Command::Bvp1d { .. } => Defaults { order: 1, orders: (1, 1), mms: "" },
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    NotConverged(String),
    Io(String),
}

impl From<FemError> for Failure {
    fn from(e: FemError) -> Self {
        match e {
            FemError::NotConverged { .. } => Failure::NotConverged(e.to_string()),
            FemError::Io(_) | FemError::Mesh(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("error: {msg}");
            EXIT_NOT_CONVERGED
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}

/// Echo of every effective option, one per line.
pub fn format_options(cli: &Cli) -> String {
    let c = &cli.config;
    let d = defaults(cli.command);
    let mut lines = vec!["Options used:".to_string(), format!("   {}", cli.command.name())];
    let mesh = c.mesh.as_ref().map_or_else(|| "<built-in>".to_string(), |p| p.display().to_string());
    lines.push(format!("   --mesh {mesh}"));
    lines.push(format!("   --order {}", c.order.unwrap_or(d.order)));
    lines.push(format!("   --refinements {}", c.refinements));
    lines.push(format!("   --rtol {}", general(c.rtol)));
    lines.push(format!("   --atol {}", general(c.atol)));
    lines.push(format!("   --maxiter {}", c.maxiter));
    lines.push(format!("   --nu {}", general(c.nu)));
    lines.push(format!("   --re {}", general(c.re)));
    lines.push(format!("   --mms {}", c.mms.as_deref().unwrap_or(d.mms)));
    lines.push(format!("   --out {}", c.out.display()));
    lines.push(format!("   --picard-tol {}", general(c.picard_tol)));
    lines.push(format!("   --picard-maxit {}", c.picard_maxit));
    lines.push(format!("   --relaxation {}", general(c.relaxation)));
    lines.push(format!("   --precondition {}", c.precondition));
    if let Command::Bvp1d { n } = cli.command {
        lines.push(format!("   -n {n}"));
    }
    lines.join("\n")
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let c = &cli.config;
    let d = defaults(cli.command);
    let order = c.order.unwrap_or(d.order);
    if order < d.orders.0 || order > d.orders.1 {
        return Err(Failure::Usage(format!(
            "{} needs --order in {}..={}, got {order}",
            cli.command.name(),
            d.orders.0,
            d.orders.1
        )));
    }
    for (name, v) in [("rtol", c.rtol), ("atol", c.atol)] {
        if !(v >= 0.0) {
            return Err(Failure::Usage(format!("--{name} must be nonnegative, got {v}")));
        }
    }
    println!("{}", format_options(cli));
    let opts = SolverOptions { rtol: c.rtol, atol: c.atol, maxiter: c.maxiter, precondition: c.precondition };
    if let Command::Bvp1d { n } = cli.command {
        let s = solve_bvp_1d(n, f64::exp, &opts)?;
        println!("{}", s.report.message());
        println!("|| u_h - u ||_L2 = {}", general(s.l2_error(bvp1d_exact)));
        println!("u_h(0.5) = {}", general(s.eval(0.5)));
        return check(&s.report);
    }
    let mesh = load_mesh(cli.command, c.mesh.as_deref(), c.refinements)?;
    let mms = c.mms.as_deref().unwrap_or(d.mms);
    let nu = if cli.command == Command::SolveNavier { 1.0 / c.re } else { c.nu };
    let exact = ExactSolution::by_name(mms, nu, c.re)?;
    std::fs::create_dir_all(&c.out).map_err(|e| Failure::Io(format!("cannot create {}: {e}", c.out.display())))?;
    println!("Number of cells: {}, h = {}", mesh.num_cells(), general(mesh.h()));
    let q = quad_order_for(order) + 2;
    let vtk_path = |field: &str| c.out.join(format!("{}_{field}.vtk", cli.command.name()));
    match cli.command {
        Command::SolveLaplace => {
            let (p, f) = need_scalar(&exact)?;
            let s = solve_poisson_lagrange(mesh.clone(), order, &|x| f(x), &|x| p(x), &opts)?;
            println!("{}", s.report.message());
            println!("|| p_h - p ||_L2 = {}", general(l2_error(&s.p, &ScalarFn(|x| p(x)), &mesh, q)?));
            vtk::write_vtk(&vtk_path("p"), &mesh, &[("p", &s.p)])?;
            check(&s.report)
        }
        Command::SolveDarcy => {
            let (p, f) = need_scalar(&exact)?;
            let u = exact.u.clone().ok_or_else(|| Failure::Usage(format!("'{mms}' has no velocity")))?;
            let s = solve_darcy_mixed(mesh.clone(), order, &|_| [0.0, 0.0], &|x| -f(x), &|x| p(x), &opts)?;
            println!("{}", s.report.message());
            println!("|| p_h - p ||_L2 = {}", general(l2_error(&s.p, &ScalarFn(|x| p(x)), &mesh, q)?));
            println!("|| u_h - u ||_L2 = {}", general(l2_error(&s.u, &VectorFn(|x| u(x)), &mesh, q)?));
            vtk::write_vtk(&vtk_path("p"), &mesh, &[("p", &s.p)])?;
            vtk::write_vtk(&vtk_path("u"), &mesh, &[("u", &s.u)])?;
            check(&s.report)
        }
        Command::Compare => {
            // the table refines internally, so start from the unrefined input
            let base = load_mesh(cli.command, c.mesh.as_deref(), 0)?;
            let rows = compare_methods(base.clone(), order, c.refinements, &exact, &opts)?;
            let header = fem2d::ComparisonRow::HEADER;
            println!("{}", header.iter().map(|h| format!("{h:>13}")).collect::<String>());
            for row in &rows {
                println!("{}", row.values().iter().map(|v| format!("{:>13}", general(*v))).collect::<String>());
            }
            csv::write_csv(&c.out.join("compare.csv"), &rows)?;
            let finest = Arc::new(base.refined(c.refinements));
            let unorm = exact_velocity_norm(&exact, &finest, q)?;
            let normalized: Vec<_> = rows.iter().map(|r| r.normalized(unorm)).collect();
            csv::write_csv(&c.out.join("compare_normalized.csv"), &normalized)?;
            println!("wrote {}", c.out.join("compare.csv").display());
            Ok(())
        }
        Command::SolveStokes => {
            let (u, p, f) = need_flow(&exact)?;
            let s = solve_stokes_steady(mesh.clone(), order, nu, &|x| f(x), &|x| u(x), &opts)?;
            println!("{}", s.report.message());
            println!("|| u_h - u ||_L2 = {}", general(l2_error(&s.u, &VectorFn(|x| u(x)), &mesh, q)?));
            if let Some(p) = p {
                let e = l2_error_zero_mean(&s.p, &ScalarFn(|x| p(x)), &mesh, q)?;
                println!("|| p_h - p ||_L2 (mean-free) = {}", general(e));
            }
            println!("|| D u_h || = {}", general(s.divergence_residual));
            write_flow(&vtk_path("u"), &vtk_path("p"), &mesh, &s.u, &s.p)?;
            check(&s.report)
        }
        Command::SolveNavier => {
            let (u, _, f) = need_flow(&exact)?;
            let picard = PicardOptions { tol: c.picard_tol, maxit: c.picard_maxit, relaxation: c.relaxation };
            let s = solve_navier_steady_picard(mesh.clone(), order, nu, &|x| f(x), &|x| u(x), &picard, &opts, None)?;
            for (i, inc) in s.increments.iter().enumerate() {
                println!("Picard iteration {:>3}: |du| = {}", i + 1, general(*inc));
            }
            println!("{}", s.last_report.message());
            println!("|| u_h - u ||_L2 = {}", general(l2_error(&s.u, &VectorFn(|x| u(x)), &mesh, q)?));
            write_flow(&vtk_path("u"), &vtk_path("p"), &mesh, &s.u, &s.p)?;
            if s.converged {
                println!("Picard converged in {} iterations.", s.iterations);
                Ok(())
            } else {
                Err(Failure::NotConverged(format!("Picard did not converge in {} iterations", s.iterations)))
            }
        }
        Command::Bvp1d { .. } => unreachable!("handled above"),
    }
}

fn check(report: &SolveReport) -> Result<(), Failure> {
    if report.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(report.message()))
    }
}

type Scalar = fem2d::problems::ScalarFunction;
type Vector = fem2d::problems::VectorFunction;

fn need_scalar(exact: &ExactSolution) -> Result<(Scalar, Scalar), Failure> {
    match (&exact.p, &exact.source) {
        (Some(p), Some(f)) => Ok((p.clone(), f.clone())),
        _ => Err(Failure::Usage(format!("'{}' is not a Laplace solution", exact.name))),
    }
}

fn need_flow(exact: &ExactSolution) -> Result<(Vector, Option<Scalar>, Vector), Failure> {
    match (&exact.u, &exact.force) {
        (Some(u), Some(f)) => Ok((u.clone(), exact.p.clone(), f.clone())),
        _ => Err(Failure::Usage(format!("'{}' is not a flow solution", exact.name))),
    }
}

fn write_flow(
    u_path: &Path,
    p_path: &Path,
    mesh: &Mesh,
    u: &dyn CellFunction,
    p: &dyn CellFunction,
) -> Result<(), Failure> {
    vtk::write_vtk(u_path, mesh, &[("u", u)])?;
    vtk::write_vtk(p_path, mesh, &[("p", p)])?;
    Ok(())
}

fn load_mesh(cmd: Command, path: Option<&Path>, refinements: usize) -> Result<Arc<Mesh>, Failure> {
    let base = match path {
        Some(p) => read_mesh(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => match cmd {
            Command::SolveStokes => Mesh::rectangle_quads([0.0, 1.0], [0.0, 1.0], 4, 4),
            Command::SolveNavier => Mesh::rectangle_quads([-0.5, 1.0], [-0.5, 1.5], 3, 4),
            _ => Mesh::unit_square_triangles(),
        },
    };
    Ok(Arc::new(base.refined(refinements)))
}
