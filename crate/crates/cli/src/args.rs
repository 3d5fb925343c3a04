use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unimodal::analysis::ClassifyBudget;
use unimodal::cascade::Caps;

#[derive(Debug, Parser)]
#[command(name = "unimodal", version, about = "Cascades, summability and classification for S-unimodal maps")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON file whose keys supply flags; flags on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Central cascade u_1 > u_2 > ... of nice points.
    Cascade {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        caps: CapArgs,
        /// Starting nice point; defaults to the positive fixed point.
        #[arg(long)]
        u1: Option<f64>,
    },
    /// Branches of the first return map to a central interval.
    Branches {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        caps: CapArgs,
        /// Cascade level whose interval is used.
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Explicit half-width, instead of a cascade level.
        #[arg(long)]
        u: Option<f64>,
    },
    /// Decomposition of the critical orbit up to time k.
    Telemann {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, default_value_t = 500)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        n0: usize,
        /// Also check that signatures of all k' <= k are distinct.
        #[arg(long)]
        injectivity: bool,
    },
    /// Partial sums of |Df^k(f(0))|^(-1/alpha).
    Summability {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2000)]
        kmax: usize,
    },
    /// Derivative growth along returns to a central level.
    #[command(name = "audit-prop31")]
    AuditProp31 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        s_max: usize,
    },
    /// Expansion envelope of orbits avoiding (-u, u).
    Mane {
        #[command(flatten)]
        common: Common,
        /// Defaults to the positive fixed point.
        #[arg(long)]
        u: Option<f64>,
        #[arg(long, default_value_t = 20)]
        r_max: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Histogram of a long orbit.
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        iters: usize,
        #[arg(long, default_value_t = 200)]
        bins: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        x0: f64,
    },
    /// Lyapunov exponent of a typical orbit.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        x0: f64,
    },
    /// Label one parameter as P, R, M_candidate, NonRecurrent, I_unknown or Budget.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Classify a uniform grid of quadratic parameters.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = 0.5)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 10)]
        grid: usize,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Quadratic family parameter.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// JSON map descriptor {kind, alpha, coefficients}, instead of --t.
    #[arg(long, value_name = "PATH", conflicts_with = "t")]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Maximum number of central levels.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub return_time: Option<usize>,
    #[arg(long)]
    pub nice_check: Option<usize>,
    /// Grid size for branch enumeration.
    #[arg(long)]
    pub branch_grid: Option<usize>,
    #[arg(long)]
    pub u_floor: Option<f64>,
}

impl CapArgs {
    pub fn apply(&self, base: Caps) -> Caps {
        Caps {
            depth: self.depth.unwrap_or(base.depth),
            return_time: self.return_time.unwrap_or(base.return_time),
            nice_check: self.nice_check.unwrap_or(base.nice_check),
            grid: self.branch_grid.unwrap_or(base.grid),
            u_floor: self.u_floor.unwrap_or(base.u_floor),
        }
    }
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[command(flatten)]
    pub caps: CapArgs,
    /// Critical-orbit iterates for the attractor search.
    #[arg(long)]
    pub iterates: Option<usize>,
    #[arg(long)]
    pub p_max: Option<usize>,
    #[arg(long)]
    pub nest_max: Option<usize>,
    #[arg(long)]
    pub nest_threshold: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub lyapunov_iters: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
}

impl BudgetArgs {
    pub fn budget(&self, seed: u64) -> ClassifyBudget {
        let base = ClassifyBudget::default();
        ClassifyBudget {
            iterates: self.iterates.unwrap_or(base.iterates),
            caps: self.caps.apply(base.caps),
            p_max: self.p_max.unwrap_or(base.p_max),
            nest_max: self.nest_max.unwrap_or(base.nest_max),
            nest_threshold: self.nest_threshold.unwrap_or(base.nest_threshold),
            kmax: self.kmax.unwrap_or(base.kmax),
            lyapunov_iters: self.lyapunov_iters.unwrap_or(base.lyapunov_iters),
            lyapunov_burn_in: self.burn_in.unwrap_or(base.lyapunov_burn_in),
            seed,
        }
    }
}
