use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qaoa_mc::analysis::{fit_m_sweep, fit_sweep, win_fraction};
use qaoa_mc::chain::run_chains;
use qaoa_mc::files::{instance_to_json, read_instance, write_matrix};
use qaoa_mc::kernels::{build_kernel, phase_table, CircuitSettings, ThetaChoice};
use qaoa_mc::magnetization::{magnetization, MagnetizationSpec};
use qaoa_mc::records::{read_csv, read_headers, write_csv, ExperimentRecord, MSweepRecord, SampleBudget};
use qaoa_mc::sweep::{generate_instances, m_sweep, spectral_sweep, RunOptions};
use qaoa_mc::theta_study::{fit_depth_scaling, summarize_theta, theta_study};
use qaoa_mc::{Proposal, SweepSpec};
use qaoa_mc_core::optimize::{find_theta_star, theta_max_for_depth};
use qaoa_mc_core::proposal::MATRIX_CAP;
use qaoa_mc_core::rng::derive_seed;
use qaoa_mc_core::spectral::{build_transition_matrix, symmetrize};
use qaoa_mc_core::{
    BoltzmannTarget, SampledSeeds, SearchMode, SpinConfiguration, SpinGlassInstance, ThetaSearchConfig,
};

/// Metropolis sampling of Ising spin glasses with symmetric QAOA-circuit
/// proposals: sweeps, fits and chain runs.
#[derive(Parser)]
#[command(name = "qaoa-mc", version)]
struct Cli {
    /// Master seed (instance seed for single-instance commands).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// JSON sweep specification; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Fill the wall_time column. Makes output non-reproducible.
    #[arg(long, global = true)]
    timing: bool,
    /// Score every θ in a sampled search with the same chain seed (common
    /// random numbers) instead of independently seeded chains.
    #[arg(long = "common-seeds", global = true)]
    common_seeds: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance as JSON.
    GenInstance {
        #[arg(long)]
        n: usize,
    },
    /// δ and exact AR for every (instance, proposal).
    SpectralSweep(SweepArgs),
    /// Per-size means and 2^(−kn) fits from a sweep or M-sweep CSV.
    FitScaling {
        #[arg(long)]
        input: PathBuf,
    },
    /// Per-size fraction of instances where the optimized kernel wins.
    WinFraction {
        #[arg(long)]
        input: PathBuf,
    },
    /// Re-optimize θ with M-step AR estimates and record δ at θ*.
    MSweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long = "m-values", value_delimiter = ',', default_value = "8,32,128,inf")]
        m_values: Vec<SampleBudget>,
    },
    /// θ* across sizes (at fixed p) or across depths (at fixed n).
    ThetaStudy {
        #[arg(long, value_enum)]
        by: StudyAxis,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Depths for `--by p`.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
        depths: Vec<usize>,
        /// Instance size for `--by p`.
        #[arg(long = "study-n", default_value_t = 5)]
        study_n: usize,
        /// Search on (0, scale·a/p] instead of (0, θ_max].
        #[arg(long = "theta-max-scale")]
        theta_max_scale: Option<f64>,
    },
    /// Running ⟨m⟩ estimates per kernel against the exact value.
    Magnetization {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        /// Chain length behind each AR estimate in the θ* search.
        #[arg(long = "m", default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10)]
        chains: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long = "burn-in", default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long = "theta-max", default_value_t = 0.3)]
        theta_max: f64,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "optimized,random,uniform,local")]
        proposals: Vec<Proposal>,
    },
    /// Run chains and write the per-step trace.
    RunChain {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        chains: usize,
        /// Initial configuration index; random per chain if absent.
        #[arg(long)]
        init: Option<usize>,
    },
    /// Search θ* for one instance and print JSON.
    OptimizeTheta {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long = "m", default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0.1)]
        temperature: f64,
        #[arg(long = "theta-max")]
        theta_max: Option<f64>,
    },
    /// Write the dense transition matrix P or its symmetric form S as CSV.
    DumpMatrix {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum, default_value_t = Which::P)]
        matrix: Which,
    },
}

#[derive(Args, Default)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long = "theta-max")]
    theta_max: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',')]
    proposals: Option<Vec<Proposal>>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON file.
    #[arg(long, conflicts_with = "n")]
    instance: Option<PathBuf>,
    /// Generate an instance of this size from the instance seed.
    #[arg(long)]
    n: Option<usize>,
    /// Instance seed for `--n` (defaults to `--seed`).
    #[arg(long = "instance-seed")]
    instance_seed: Option<u64>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    proposal: Proposal,
    /// Circuit angle for `optimized`; searched exactly if absent.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long = "theta-max", default_value_t = 0.3)]
    theta_max: f64,
    #[arg(long, default_value_t = 0.1)]
    temperature: f64,
    /// Chain length behind AR estimates when the instance is too large for
    /// an exact search.
    #[arg(long = "m", default_value_t = 1000)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyAxis {
    N,
    P,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    P,
    S,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build_global()
        .context("building worker pool")?;
    let seeds = if cli.common_seeds {
        SampledSeeds::Common
    } else {
        SampledSeeds::PerEvaluation
    };
    let options = RunOptions {
        timing: cli.timing,
        seeds,
    };
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::GenInstance { n } => {
            let inst = SpinGlassInstance::generate(*n, seed)?;
            let path = output(&cli.out, &format!("instance_n{n}_seed{seed}.json"))?;
            fs::write(&path, instance_to_json(&inst)?).with_context(|| path.display().to_string())?;
            println!("{}", path.display());
        }
        Command::SpectralSweep(args) => {
            let spec = sweep_spec(&cli, args)?;
            let instances = generate_instances(&spec)?;
            let rows = spectral_sweep(&spec, &instances, options)?;
            let path = output(&cli.out, "spectral_sweep.csv")?;
            write_csv(&path, &rows)?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            println!("{} rows ({failed} failed) -> {}", rows.len(), path.display());
        }
        Command::FitScaling { input } => {
            let headers = read_headers(input)?;
            let (summaries, fits) = if headers.iter().any(|h| h == "m") {
                fit_m_sweep(&read_csv::<MSweepRecord>(input)?)?
            } else {
                fit_sweep(&read_csv::<ExperimentRecord>(input)?)?
            };
            write_csv(&output(&cli.out, "scaling_summary.csv")?, &summaries)?;
            write_csv(&output(&cli.out, "scaling_fit.csv")?, &fits)?;
            for f in &fits {
                println!(
                    "{:<12} k = {:.4} ± {:.4}  R² = {:.4}  k_uniform/k = {}",
                    f.label,
                    f.k,
                    f.k_uncertainty,
                    f.r_squared,
                    f.ratio_to_uniform.map_or("-".into(), |r| format!("{r:.3}"))
                );
            }
        }
        Command::WinFraction { input } => {
            let wins = win_fraction(&read_csv::<ExperimentRecord>(input)?)?;
            write_csv(&output(&cli.out, "win_fraction.csv")?, &wins)?;
            for w in &wins {
                println!(
                    "n={:<3} instances={:<4} uniform {:5.1}%  local {:5.1}%  random {:5.1}%  all {:5.1}%",
                    w.n,
                    w.instances,
                    100.0 * w.beats_uniform,
                    100.0 * w.beats_local,
                    100.0 * w.beats_random,
                    100.0 * w.beats_all
                );
            }
        }
        Command::MSweep { sweep, m_values } => {
            if m_values.is_empty() {
                bail!("--m-values must not be empty");
            }
            let spec = sweep_spec(&cli, sweep)?;
            let instances = generate_instances(&spec)?;
            let rows = m_sweep(&spec, &instances, m_values, options)?;
            write_csv(&output(&cli.out, "m_sweep.csv")?, &rows)?;
            if spec.sizes.len() < 3 {
                println!("{} rows; fewer than 3 sizes, no fit", rows.len());
                return Ok(());
            }
            let (summaries, fits) = fit_m_sweep(&rows)?;
            write_csv(&output(&cli.out, "m_sweep_summary.csv")?, &summaries)?;
            write_csv(&output(&cli.out, "m_sweep_fit.csv")?, &fits)?;
            for f in &fits {
                println!("{:<8} k = {:.4} ± {:.4}", f.label, f.k, f.k_uncertainty);
            }
        }
        Command::ThetaStudy {
            by,
            sweep,
            depths,
            study_n,
            theta_max_scale,
        } => {
            let spec = sweep_spec(&cli, sweep)?;
            let (instances, depths) = match by {
                StudyAxis::N => (generate_instances(&spec)?, vec![spec.p]),
                StudyAxis::P => {
                    let at_n = SweepSpec {
                        sizes: vec![*study_n],
                        ..spec.clone()
                    };
                    at_n.validate()?;
                    (generate_instances(&at_n)?, depths.clone())
                }
            };
            let theta_max = |p: usize| match theta_max_scale {
                Some(s) => s * theta_max_for_depth(p),
                None if p == spec.p => spec.theta_max,
                None => theta_max_for_depth(p),
            };
            let rows = theta_study(&instances, &depths, spec.temperature, theta_max)?;
            write_csv(&output(&cli.out, "theta_study.csv")?, &rows)?;
            let summary = summarize_theta(&rows);
            write_csv(&output(&cli.out, "theta_summary.csv")?, &summary)?;
            for s in &summary {
                println!(
                    "n={:<3} p={:<3} <θ*> = {:.4} ± {:.4}  ({} instances, {} at boundary)",
                    s.n, s.p, s.mean_theta_star, s.std_theta_star, s.count, s.boundary_count
                );
            }
            if matches!(by, StudyAxis::P) {
                let (a, sigma) = fit_depth_scaling(&rows)?;
                let path = output(&cli.out, "theta_fit.json")?;
                let json = serde_json::json!({ "a": a, "a_uncertainty": sigma });
                fs::write(&path, format!("{json:#}\n")).with_context(|| path.display().to_string())?;
                println!("θ* ≈ a/p with a = {a:.4} ± {sigma:.4}");
            }
        }
        Command::Magnetization {
            instance,
            temperature,
            samples,
            chains,
            steps,
            burn_in,
            p,
            theta_max,
            proposals,
        } => {
            let inst = load_instance(instance, seed)?;
            let spec = MagnetizationSpec {
                temperature: *temperature,
                samples: *samples,
                chains: *chains,
                steps: *steps,
                burn_in: *burn_in,
                p: *p,
                theta_max: *theta_max,
                proposals: proposals.clone(),
                common_seeds: cli.common_seeds,
            };
            let run = magnetization(&inst, &spec, seed)?;
            write_csv(&output(&cli.out, "magnetization.csv")?, &run.rows())?;
            println!("exact <m> = {:.6}", run.exact);
            for r in &run.runs {
                let (mean, se) = run.final_estimate(r.proposal).expect("run has steps");
                println!(
                    "{:<10} final {:.6} ± {:.6}  |error| {:.6}",
                    r.proposal,
                    mean,
                    se,
                    (mean - run.exact).abs()
                );
            }
        }
        Command::RunChain {
            instance,
            kernel,
            steps,
            chains,
            init,
        } => {
            if *steps == 0 {
                bail!("--steps must be at least 1");
            }
            if *chains == 0 {
                bail!("--chains must be at least 1");
            }
            let inst = load_instance(instance, seed)?;
            let init = init.map(|z| SpinConfiguration::new(z, inst.n())).transpose()?;
            let (target, built) = kernel_for(&inst, kernel, seed, seeds)?;
            let rows = run_chains(&target, &built, *steps, *chains, init, seed)?;
            let path = output(&cli.out, "trace.csv")?;
            write_csv(&path, &rows)?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::OptimizeTheta {
            instance,
            p,
            mode,
            samples,
            temperature,
            theta_max,
        } => {
            let inst = load_instance(instance, seed)?;
            let target = BoltzmannTarget::new(inst, *temperature)?;
            let search = match mode {
                Mode::Exact => SearchMode::Exact,
                Mode::Sampled => SearchMode::Sampled {
                    samples: *samples,
                    seed,
                },
            };
            let mut config = ThetaSearchConfig::new(*p, search).with_seeds(seeds);
            if let Some(tm) = theta_max {
                config = config.with_theta_max(*tm);
            }
            let found = find_theta_star(&target, &config)?;
            let json = serde_json::json!({
                "theta_star": found.theta_star,
                "ar": found.ar_at_star,
                "evaluations": found.evaluations,
                "boundary": found.boundary,
            });
            let text = format!("{json:#}\n");
            let path = output(&cli.out, "optimize_theta.json")?;
            fs::write(&path, &text).with_context(|| path.display().to_string())?;
            print!("{text}");
        }
        Command::DumpMatrix {
            instance,
            kernel,
            matrix,
        } => {
            let inst = load_instance(instance, seed)?;
            if inst.n() > MATRIX_CAP {
                bail!("n = {} exceeds the matrix cap {MATRIX_CAP}", inst.n());
            }
            let (target, built) = kernel_for(&inst, kernel, seed, seeds)?;
            let exact = target.enumerate_with_cap(MATRIX_CAP)?;
            let q = built.exact_q_matrix()?;
            let (name, dim, rows) = match matrix {
                Which::P => {
                    let p = build_transition_matrix(&exact, &q)?;
                    ("P", p.dim(), p.to_row_major())
                }
                Which::S => {
                    let s = symmetrize(&exact, &q)?;
                    ("S", s.dim(), s.as_row_major().to_vec())
                }
            };
            let description = format!(
                "n={} matrix={name} kernel={} theta={} p={} temperature={} instance_seed={} layout=row-major[to][from]",
                inst.n(),
                kernel.proposal,
                built.theta().map_or("-".into(), |t| t.to_string()),
                kernel.p,
                kernel.temperature,
                inst.seed()
            );
            let path = output(&cli.out, &format!("matrix_{name}.csv"))?;
            let file = fs::File::create(&path).with_context(|| path.display().to_string())?;
            write_matrix(std::io::BufWriter::new(file), &description, dim, &rows)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn output(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    Ok(dir.join(name))
}

/// Defaults, then `--config`, then explicit flags.
fn sweep_spec(cli: &Cli, args: &SweepArgs) -> Result<SweepSpec> {
    let mut spec = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SweepSpec::default(),
    };
    if let Some(seed) = cli.seed {
        spec.master_seed = seed;
    }
    if let Some(v) = &args.sizes {
        spec.sizes = v.clone();
    }
    if let Some(v) = args.instances {
        spec.instances_per_size = v;
    }
    if let Some(v) = args.temperature {
        spec.temperature = v;
    }
    if let Some(v) = args.p {
        spec.p = v;
    }
    if let Some(v) = args.theta_max {
        spec.theta_max = v;
    }
    if let Some(v) = &args.proposals {
        spec.proposals = v.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn load_instance(args: &InstanceArgs, seed: u64) -> Result<SpinGlassInstance> {
    match (&args.instance, args.n) {
        (Some(path), _) => Ok(read_instance(path)?),
        (None, Some(n)) => Ok(SpinGlassInstance::generate(n, args.instance_seed.unwrap_or(seed))?),
        (None, None) => bail!("pass --instance FILE or --n N"),
    }
}

fn kernel_for(
    inst: &SpinGlassInstance,
    args: &KernelArgs,
    seed: u64,
    seeds: SampledSeeds,
) -> Result<(BoltzmannTarget, qaoa_mc_core::ProposalKernel)> {
    let target = BoltzmannTarget::new(inst.clone(), args.temperature)?;
    let choice = match args.theta {
        Some(t) => ThetaChoice::Fixed(t),
        None if inst.n() <= MATRIX_CAP => ThetaChoice::Search(SearchMode::Exact),
        None => ThetaChoice::Search(SearchMode::Sampled {
            samples: args.samples,
            seed,
        }),
    };
    let settings = CircuitSettings {
        p: args.p,
        theta_max: args.theta_max,
        choice,
        random_seed: derive_seed(seed, qaoa_mc::spec::stream::RANDOM_THETA),
        seeds,
    };
    let built = build_kernel(args.proposal, &target, &phase_table(inst)?, &settings)?;
    Ok((target, built.kernel))
}
