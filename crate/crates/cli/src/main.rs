//! `rgdp`: calibration, sampling and the budget/utility experiments as CSV.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riemann_gdp::calibration::{CalibrationConfig, DEFAULT_M, DEFAULT_N, DEFAULT_N_EPS};
use riemann_gdp::experiments::{
    self, quarter_grid, DistKind, Fig1Config, Fig1Target, MethodChoice, RunManifest, SampleConfig, SampleMethod,
    Table, UtilityConfig, FIG1_REPLICATES, UTILITY_N, UTILITY_RADIUS, UTILITY_REPS,
};
use riemann_gdp::mechanisms::{FrechetOptions, DEFAULT_MAX_ITER, DEFAULT_STEP, DEFAULT_TOL};
use riemann_gdp::samplers::{ChainConfig, SamplerChoice, DEFAULT_BURN_IN, DEFAULT_THIN};
use riemann_gdp::{Error, ManifoldKind, ManifoldSpec, Point};

#[derive(Parser)]
#[command(name = "rgdp", version, about = "Gaussian differential privacy on constant-curvature manifolds")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Value recorded in the manifest header; kept fixed so reruns are byte-identical.
    #[arg(long, global = true, default_value = "none")]
    timestamp: String,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Privacy budget μ of the Gaussian mechanism with rate σ.
    #[command(allow_negative_numbers = true)]
    Calibrate {
        #[arg(long)]
        manifold: ManifoldKind,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        sigma: f64,
        /// auto | analytic | mcmc | closed-form
        #[arg(long, default_value = "auto")]
        method: MethodChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Exact versus Monte-Carlo μ for σ = k/4, k = 1..16, Δ = 1.
    #[command(allow_negative_numbers = true)]
    Fig1Budget {
        /// circle | euclidean
        #[arg(long)]
        target: Fig1Target,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 16)]
        k_max: usize,
        #[arg(long, default_value_t = FIG1_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Gaussian versus Laplace release of a Fréchet mean on the sphere, σ = k/4, k = 1..12.
    #[command(allow_negative_numbers = true)]
    SphereUtility {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 12)]
        k_max: usize,
        /// Run a single σ instead of the k/4 sweep.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = UTILITY_REPS)]
        reps: usize,
        /// Dataset size.
        #[arg(long, default_value_t = UTILITY_N)]
        n_data: usize,
        /// Data ball radius.
        #[arg(long, default_value_t = UTILITY_RADIUS)]
        radius: f64,
        /// Fréchet-mean gradient step.
        #[arg(long, default_value_t = DEFAULT_STEP)]
        frechet_step: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        frechet_tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        frechet_max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Raw draws from a Riemannian Gaussian or Laplace distribution.
    #[command(allow_negative_numbers = true)]
    Sample {
        #[arg(long)]
        manifold: ManifoldKind,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// gaussian | laplace
        #[arg(long, default_value = "gaussian")]
        dist: DistKind,
        /// Comma-separated ambient coordinates (an angle on the circle); origin when omitted.
        #[arg(long)]
        footprint: Option<String>,
        /// σ for the Gaussian, b for the Laplace.
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// mh | exact
        #[arg(long, default_value = "mh")]
        sampler: SampleMethod,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        chain: ChainArgs,
    },
}

#[derive(Args)]
struct McArgs {
    /// Draws per distribution per replicate.
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_N_EPS)]
    n_eps: usize,
    #[arg(long)]
    eps_max: Option<f64>,
    /// Replicates averaged inside one calibration.
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    /// Force MH even where an exact sampler exists.
    #[arg(long)]
    mh_only: bool,
    #[command(flatten)]
    chain: ChainArgs,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = DEFAULT_THIN)]
    thin: usize,
    /// Initial MH proposal scale (default: the target rate).
    #[arg(long)]
    proposal_scale: Option<f64>,
    #[arg(long)]
    no_adapt: bool,
}

impl ChainArgs {
    fn config(&self) -> ChainConfig {
        ChainConfig {
            burn_in: self.burn_in,
            thin: self.thin,
            proposal_scale: self.proposal_scale,
            adapt: !self.no_adapt,
        }
    }

    fn record(&self, m: RunManifest) -> RunManifest {
        m.param("burn_in", self.burn_in)
            .param("thin", self.thin)
            .param("proposal_scale", opt(self.proposal_scale))
            .param("adapt", !self.no_adapt)
    }
}

impl McArgs {
    fn config(&self, delta: f64, sigma: f64, seed: u64) -> CalibrationConfig {
        CalibrationConfig {
            n: self.n,
            n_eps: self.n_eps,
            eps_max: self.eps_max,
            m: self.m,
            sampler: if self.mh_only { SamplerChoice::Mh } else { SamplerChoice::Auto },
            chain: self.chain.config(),
            ..CalibrationConfig::new(delta, sigma, seed)
        }
    }

    fn record(&self, m: RunManifest) -> RunManifest {
        let m = m
            .param("n", self.n)
            .param("n_eps", self.n_eps)
            .param("eps_max", opt(self.eps_max))
            .param("m", self.m)
            .param("mh_only", self.mh_only);
        self.chain.record(m)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "default".to_string(), |x| x.to_string())
}

fn parse_point(s: &str) -> Result<Point, Error> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map(Point::new)
        .map_err(|e| Error::InvalidParameter {
            name: "footprint",
            reason: format!("{s:?}: {e}"),
        })
}

fn run(cli: Cli) -> Result<(), Error> {
    let (manifest, table) = match cli.command {
        Command::Calibrate {
            manifold,
            dim,
            delta,
            sigma,
            method,
            seed,
            mc,
        } => {
            let spec = ManifoldSpec::new(manifold, dim)?;
            let man = RunManifest::new("calibrate", seed)
                .param("manifold", manifold)
                .param("dim", dim)
                .param("delta", delta)
                .param("sigma", sigma)
                .param("method", method);
            let table = experiments::calibrate(&spec, method, &mc.config(delta, sigma, seed))?;
            (mc.record(man), table)
        }
        Command::Fig1Budget {
            target,
            delta,
            k_max,
            replicates,
            seed,
            mc,
        } => {
            let cfg = Fig1Config {
                sigmas: quarter_grid(k_max),
                replicates,
                calibration: mc.config(delta, 1.0, seed),
                ..Fig1Config::new(target, seed)
            };
            let man = RunManifest::new("fig1-budget", seed)
                .param("target", format!("{target:?}").to_lowercase())
                .param("delta", delta)
                .param("k_max", k_max)
                .param("replicates", replicates);
            (mc.record(man), experiments::fig1_budget(&cfg)?)
        }
        Command::SphereUtility {
            dim,
            k_max,
            sigma,
            reps,
            n_data,
            radius,
            frechet_step,
            frechet_tol,
            frechet_max_iter,
            seed,
            mc,
        } => {
            let cfg = UtilityConfig {
                dim,
                sigmas: sigma.map_or_else(|| quarter_grid(k_max), |s| vec![s]),
                reps,
                n_data,
                radius,
                calibration: mc.config(1.0, 1.0, seed),
                frechet: FrechetOptions {
                    step: frechet_step,
                    tol: frechet_tol,
                    max_iter: frechet_max_iter,
                },
                chain: mc.chain.config(),
                seed,
            };
            let man = RunManifest::new("sphere-utility", seed)
                .param("dim", dim)
                .param("k_max", k_max)
                .param("sigma", opt(sigma))
                .param("reps", reps)
                .param("n_data", n_data)
                .param("radius", radius)
                .param("frechet_step", frechet_step)
                .param("frechet_tol", frechet_tol)
                .param("frechet_max_iter", frechet_max_iter);
            (mc.record(man), experiments::sphere_utility(&cfg)?)
        }
        Command::Sample {
            manifold,
            dim,
            dist,
            footprint,
            rate,
            n,
            sampler,
            seed,
            chain,
        } => {
            let spec = ManifoldSpec::new(manifold, dim)?;
            let fp = footprint.as_deref().map(parse_point).transpose()?;
            let fp = match (manifold, fp) {
                (ManifoldKind::Circle, Some(p)) if p.len() == 1 => Some(Point::angle(p.coords()[0])),
                (_, p) => p,
            };
            if let Some(p) = &fp {
                spec.validate(p)?;
            }
            let cfg = SampleConfig {
                manifold: spec,
                dist,
                footprint: fp,
                rate,
                n,
                sampler,
                chain: chain.config(),
                seed,
            };
            let man = RunManifest::new("sample", seed)
                .param("manifold", manifold)
                .param("dim", dim)
                .param("dist", format!("{dist:?}").to_lowercase())
                .param("footprint", footprint.as_deref().unwrap_or("origin"))
                .param("rate", rate)
                .param("n", n)
                .param("sampler", format!("{sampler:?}").to_lowercase());
            (chain.record(man), experiments::sample(&cfg)?)
        }
    };
    let manifest = RunManifest {
        timestamp: cli.timestamp,
        out: cli
            .out
            .as_ref()
            .map_or_else(|| "-".to_string(), |p| p.display().to_string()),
        ..manifest
    };
    write_output(&manifest, &table, cli.out.as_ref())
}

fn write_output(manifest: &RunManifest, table: &Table, out: Option<&PathBuf>) -> Result<(), Error> {
    let bytes = experiments::render(manifest, table)?;
    let res = match out {
        Some(path) => fs::write(path, bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    res.map_err(|e| Error::Output(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
