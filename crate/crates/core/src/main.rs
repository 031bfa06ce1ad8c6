use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stfem::assembly::FinalPenalty;
use stfem::driver::problems::problem_by_name;
use stfem::driver::studies::{run_convergence, write_dat, Refine};
use stfem::driver::MethodConfig;
use stfem::quadrature::RuleMode;
use stfem::spaces::Method;
use stfem::Error;

#[derive(Parser)]
#[command(name = "stfem", version, about = "Unfitted space-time FEM convergence runs on moving 1D domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    MovingInterval,
    PolyTest,
    FittedStatic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dg,
    Cg,
    Cgbox,
    Gcc,
}

#[derive(Clone, Copy, ValueEnum)]
enum TintArg {
    Preserve,
    Insensitive,
}

#[derive(Clone, Copy, ValueEnum)]
enum FinalPenaltyArg {
    Plain,
    Dt,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefineArg {
    Both,
    Space,
    Time,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a refinement study and write a .dat table.
    Run {
        #[arg(long, value_enum, default_value = "moving-interval")]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value = "dg")]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        ks: usize,
        #[arg(long, default_value_t = 1)]
        kt: usize,
        /// Spatial geometry order (defaults to ks)
        #[arg(long)]
        qs: Option<usize>,
        /// Temporal geometry order (defaults to kt)
        #[arg(long)]
        qt: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
        #[arg(long, default_value_t = 1.1)]
        epsf: f64,
        #[arg(long, value_enum, default_value = "preserve")]
        tint: TintArg,
        #[arg(long, default_value_t = 1)]
        substeps: usize,
        #[arg(long, default_value_t = 1)]
        order_factor: usize,
        #[arg(long, value_enum, default_value = "both")]
        refine: RefineArg,
        #[arg(long, default_value_t = 4)]
        nref: usize,
        /// Spatial level: fixed when refining in time, first level when refining in space
        #[arg(long, default_value_t = 0)]
        is0: usize,
        /// Temporal level: fixed when refining in space, first level when refining in time
        #[arg(long, default_value_t = 0)]
        it0: usize,
        /// Relative pivot threshold of the slab solver (0 disables the check)
        #[arg(long, default_value_t = 1e-13)]
        pivot_tol: f64,
        /// Scaling of the CG final-time ghost penalty
        #[arg(long, value_enum, default_value = "dt")]
        final_penalty: FinalPenaltyArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Cmd::Run {
        problem,
        method,
        ks,
        kt,
        qs,
        qt,
        gamma,
        epsf,
        tint,
        substeps,
        order_factor,
        refine,
        nref,
        is0,
        it0,
        pivot_tol,
        final_penalty,
        out,
    } = cli.cmd;
    let pname = match problem {
        ProblemArg::MovingInterval => "moving_interval",
        ProblemArg::PolyTest => "poly_test",
        ProblemArg::FittedStatic => "fitted_static",
    };
    let prob = problem_by_name(pname).expect("known problem");
    let method = match method {
        MethodArg::Dg => Method::Dg,
        MethodArg::Cg => Method::Cg,
        MethodArg::Cgbox => Method::CgBox,
        MethodArg::Gcc => Method::Gcc,
    };
    let mut cfg = MethodConfig::new(method, ks);
    cfg.k_t = kt;
    cfg.q_s = qs.unwrap_or(ks);
    cfg.q_t = qt.unwrap_or(kt);
    cfg.gamma = gamma;
    cfg.eps_f = epsf;
    cfg.pivot_tol = pivot_tol;
    cfg.final_penalty = match final_penalty {
        FinalPenaltyArg::Plain => FinalPenalty::Plain,
        FinalPenaltyArg::Dt => FinalPenalty::TimeStep,
    };
    cfg.rule_mode = match tint {
        TintArg::Preserve => RuleMode::TopologyPreserving,
        TintArg::Insensitive => RuleMode::TopologyInsensitive {
            substeps,
            order_factor,
        },
    };
    cfg.i_s = is0;
    cfg.i_t = it0;
    let refine = match refine {
        RefineArg::Both => Refine::Both,
        RefineArg::Space => Refine::Space,
        RefineArg::Time => Refine::Time,
    };
    let refine_name = match refine {
        Refine::Both => "both",
        Refine::Space => "space",
        Refine::Time => "time",
    };
    let header = format!(
        "problem={pname} {} refine={refine_name} nref={nref} is0={is0} it0={it0} T={} | columns: i l2_final l2l2 nze_max wall_s geom_dist",
        cfg.describe(),
        prob.t_end
    );
    let first = match refine {
        Refine::Both => 0,
        Refine::Space => is0,
        Refine::Time => it0,
    };
    let rows = match run_convergence(&cfg, &prob, refine, first, nref) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::ConstraintViolation { .. } => 2,
                Error::SingularSystem { .. } => 3,
                _ => 1,
            });
        }
    };
    for r in &rows {
        println!(
            "{} {:.6e} {:.6e} {} {:.3} {:.6e}",
            r.i, r.l2_final, r.l2l2, r.nze_max, r.wall_s, r.geom_dist
        );
    }
    if let Err(e) = write_dat(&out, &header, &rows) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
