//! Command line front end: noise sampling, model realizations,
//! renormalized solves and the verification studies, driven by a JSON
//! config file with flag overrides.
//!
//! Exit codes: 0 every declared check passed, 1 an assertion failed,
//! 2 configuration error, 3 a blow-up left the run inconclusive.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpam::algebra::identities::check_group_law;
use gpam::algebra::{check_identities, parse_symbol};
use gpam::analysis::{
    cosine_bump, density_nondegeneracy, epsilon_convergence_study, gateaux_check,
    heat_kernel_lower_bound, plateau_bump, standard_initial, standard_shift,
    strong_maximum_principle_check, tangent_positivity, translation_consistency,
    weak_maximum_principle, StudyReport,
};
use gpam::config::{CSpec, FieldSpec, RunConfig};
use gpam::fields::{mollify, white_noise, Fft2, Field};
use gpam::formats::{
    output_dir, read_field, write_field, write_field_csv, write_json, write_trajectory,
};
use gpam::models::canonical_model;
use gpam::solver::{max_stable_dt, solve_gpam, solve_tangent, Nonlinearity, PdeConfig};
use gpam::wavelets::{sobolev_norm, Dwt2};

#[derive(Parser)]
#[command(
    name = "gpam",
    version,
    about = "Renormalized multiplicative stochastic heat equation toolkit",
    propagate_version = true
)]
struct Cli {
    /// JSON run configuration; command line flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for seed ensembles (default: logical cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the exact identity suite for the symbol algebra.
    ///
    /// Covers reexpansion group law and inverses, lower-order support of
    /// reexpanded symbols, shift compatibility, renormalization/shift
    /// commutation and the renormalization group law, on every basis
    /// symbol of both structures plus randomly sampled characters. All
    /// comparisons are exact.
    AlgebraCheck {
        /// Random character pairs for the group law rounds.
        #[arg(long, default_value_t = 100)]
        rounds: usize,
        /// Seed for the sampled characters.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sample periodic white noise to a field file, optionally mollified.
    Noise {
        #[command(flatten)]
        common: CommonOpts,
        /// Skip mollification and write the raw sample.
        #[arg(long)]
        raw: bool,
        /// Also write a CSV table next to the field file.
        #[arg(long)]
        csv: bool,
    },
    /// Model realizations on a sampled noise.
    Model {
        #[command(subcommand)]
        cmd: ModelCmd,
    },
    /// Integrate the renormalized equation and save the frames.
    Solve {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        evo: EvoOpts,
    },
    /// Tangent equation in a shift direction along a fresh base run.
    Tangent {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        evo: EvoOpts,
        /// Constant shift direction h.
        #[arg(long, default_value_t = 1.0)]
        h_const: f64,
    },
    /// Maximum principle studies for the homogeneous tangent flow.
    ///
    /// Checks that heat flow keeps a quarter of the mass on growing
    /// balls, that nonnegative data stays nonnegative over a seed
    /// ensemble, and that plateau data spreads to strict positivity.
    Maxprinciple {
        #[command(flatten)]
        common: CommonOpts,
        /// Which study to run.
        #[arg(long, value_parser = ["all", "heat", "weak", "strong"], default_value = "all")]
        mode: String,
        /// Ensemble size for the weak principle.
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Final time for the tangent runs.
        #[arg(long, default_value_t = 0.25)]
        t_end: f64,
    },
    /// Directional derivative and translation identity checks.
    ///
    /// Verifies the finite difference order of the shift derivative,
    /// exact linearity in the direction, and that translating the model
    /// matches solving with pre-shifted noise.
    Gateaux {
        #[command(flatten)]
        common: CommonOpts,
        /// Finite difference magnitudes, decreasing.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.125, 0.0625, 0.03125])]
        deltas: Vec<f64>,
        /// Probe time for the pointwise derivative.
        #[arg(long, default_value_t = 0.25)]
        t_probe: f64,
    },
    /// Coupled-scale convergence study on one noise sample.
    ///
    /// Solves at every scale in the list with the same seed and checks
    /// that successive sup distances contract. With --no-renorm the
    /// subtraction constant is forced to zero and the contraction is
    /// expected to fail, so the command exits nonzero.
    Converge {
        #[command(flatten)]
        common: CommonOpts,
        /// Mollification scales, strictly decreasing.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.125, 0.0625, 0.03125])]
        eps_list: Vec<f64>,
        /// Final time of each solve.
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Force the subtraction constant to zero.
        #[arg(long)]
        no_renorm: bool,
    },
    /// Law of the solution value at a point over a seed ensemble.
    ///
    /// Checks spread and atom-freeness of the empirical law, compares to
    /// the exact Gaussian law when the reaction is constant one from zero
    /// data, and asserts positivity of the unit-shift tangent value.
    Density {
        #[command(flatten)]
        common: CommonOpts,
        /// Ensemble size.
        #[arg(long, default_value_t = 200)]
        seeds: usize,
        /// Observation time.
        #[arg(long, default_value_t = 0.25)]
        t: f64,
        /// Observation point as i,j grid indices.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<usize>>,
        /// Skip the tangent positivity pass.
        #[arg(long)]
        skip_tangent: bool,
    },
    /// Wavelet norms and level scans of a saved field.
    Wavelet {
        #[command(subcommand)]
        cmd: WaveletCmd,
    },
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Evaluate one symbol's realization at a base point to a field file.
    Dump {
        #[command(flatten)]
        common: CommonOpts,
        /// Symbol expression, e.g. "Xi", "I(Xi)*Xi", "X1^2".
        #[arg(long)]
        symbol: String,
        /// Base point as i,j grid indices (default 0,0).
        #[arg(long, value_delimiter = ',')]
        base_point: Option<Vec<usize>>,
        /// Skip renormalization (keep the plain canonical model).
        #[arg(long)]
        raw: bool,
    },
    /// Reexpansion consistency of the four model variants.
    ///
    /// Samples random point pairs and checks that the reexpanded
    /// realization at one point reproduces the realization at the other,
    /// for the plain, renormalized, extended and translated models.
    Check {
        #[command(flatten)]
        common: CommonOpts,
        /// Random point pairs per model.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Sup-error tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum WaveletCmd {
    /// Print a smoothness norm of a saved field.
    Norm {
        /// Field file to read.
        #[arg(long)]
        input: PathBuf,
        /// Smoothness exponent.
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        beta: f64,
    },
    /// Per-level coefficient table of a saved field.
    Scan {
        /// Field file to read.
        #[arg(long)]
        input: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags shared by most subcommands; unset flags fall back to the config
/// file, then to defaults.
#[derive(Args, Clone)]
struct CommonOpts {
    /// Grid side length (power of two, at least 16).
    #[arg(long)]
    n: Option<usize>,
    /// Mollification scale.
    #[arg(long)]
    eps: Option<f64>,
    /// Noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Reaction term: zero, one, sin, cos, sin+2, rational.
    #[arg(long)]
    g: Option<String>,
    /// Subtraction constant: a number, or "auto" for the kernel-noise
    /// expectation at the current scale.
    #[arg(long)]
    c: Option<String>,
    /// Output directory (overrides config and GPAM_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EvoOpts {
    /// Final time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Time step cap (default: noise-product stability rule).
    #[arg(long)]
    dt: Option<f64>,
    /// Constant initial level (default: a fixed smooth profile).
    #[arg(long)]
    u0_const: Option<f64>,
    /// Initial data from a field file.
    #[arg(long)]
    u0_file: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli_config: &Option<PathBuf>) -> anyhow::Result<RunConfig> {
    match cli_config {
        Some(path) => Ok(RunConfig::from_file(path)?),
        None => Ok(RunConfig::default()),
    }
}

fn apply_common(cfg: &mut RunConfig, opts: &CommonOpts) -> anyhow::Result<()> {
    if let Some(n) = opts.n {
        cfg.grid_n = n;
    }
    if let Some(eps) = opts.eps {
        cfg.epsilon = Some(eps);
    }
    if let Some(seed) = opts.seed {
        cfg.seed = Some(seed);
    }
    if let Some(g) = &opts.g {
        cfg.g = g.clone();
    }
    if let Some(c) = &opts.c {
        cfg.c = if c == "auto" {
            CSpec::Named("auto".into())
        } else {
            CSpec::Value(
                c.parse::<f64>()
                    .map_err(|_| anyhow::anyhow!("--c must be a number or \"auto\", got {c:?}"))?,
            )
        };
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(())
}

fn default_eps(cfg: &RunConfig) -> f64 {
    cfg.epsilon.unwrap_or(0.0625)
}

fn default_seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

/// Output directory resolution: --out flag beats GPAM_OUT beats config.
fn resolve_out(cfg: &RunConfig, opts: &CommonOpts) -> PathBuf {
    match &opts.out {
        Some(p) => p.clone(),
        None => output_dir(cfg.output_dir.as_deref()),
    }
}

/// Exit code from a set of reports: blow-up trouble dominates, then any
/// failed assertion, then success.
fn exit_code(reports: &[&StudyReport]) -> u8 {
    let mut failed = false;
    for rep in reports {
        for m in &rep.metrics {
            if !m.pass {
                if m.name == "blowup_count" || m.name == "checked_seeds" {
                    return 3;
                }
                failed = true;
            }
        }
    }
    u8::from(failed)
}

/// Prints the report, writes `<study>.json` into `dir`.
fn emit(rep: &StudyReport, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    println!("# {}", rep.study);
    print!("{}", rep.render_lines());
    write_json(&dir.join(format!("{}.json", rep.study)), rep)?;
    Ok(())
}

fn build_noise(fft: &Fft2, cfg: &RunConfig, eps: f64, seed: u64) -> anyhow::Result<Field> {
    let raw = white_noise(cfg.grid()?, seed);
    Ok(mollify(fft, &raw, eps)?)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let mut cfg = load_config(&cli.config)?;
    match cli.cmd {
        Cmd::AlgebraCheck { rounds, seed } => {
            let params = cfg.structure_params()?;
            let mut checks = check_identities(&params);
            checks.extend(check_group_law(&params, seed, rounds));
            let all_pass = checks.iter().all(|c| c.pass);
            let doc = serde_json::json!({
                "pass": all_pass,
                "checks": checks.iter().map(|c| serde_json::json!({
                    "identity": c.identity,
                    "symbol": c.symbol,
                    "status": if c.pass { "pass" } else { "FAIL" },
                    "detail": c.detail,
                })).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(u8::from(!all_pass))
        }
        Cmd::Noise { common, raw, csv } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let seed = default_seed(&cfg);
            let field = if raw {
                white_noise(grid, seed)
            } else {
                let fft = Fft2::new(grid);
                build_noise(&fft, &cfg, default_eps(&cfg), seed)?
            };
            let dir = resolve_out(&cfg, &common);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("noise.gpf");
            write_field(&path, &field)?;
            println!("wrote {}", path.display());
            if csv {
                let cpath = dir.join("noise.csv");
                write_field_csv(&cpath, &field)?;
                println!("wrote {}", cpath.display());
            }
            Ok(0)
        }
        Cmd::Model { cmd } => run_model(&cli.config, cfg, cmd),
        Cmd::Solve { common, evo } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let eps = default_eps(&cfg);
            let seed = default_seed(&cfg);
            let g: Nonlinearity = cfg.nonlinearity()?;
            let xi = build_noise(&fft, &cfg, eps, seed)?;
            let c = cfg.resolve_c(&fft, eps)?;
            let u0 = initial_data(&cfg, &evo)?;
            let dt = evo.dt.or(cfg.dt).unwrap_or_else(|| max_stable_dt(&xi));
            let t_end = evo.t_end.or(cfg.t_end).unwrap_or(0.25);
            let pde = PdeConfig::new(u0, eps, c, dt, t_end)?;
            let traj = solve_gpam(&fft, &pde, g, &xi)?;
            let dir = resolve_out(&cfg, &common).join("solve");
            let mut params = cfg.manifest_params();
            params.push(("c_effective".into(), c.to_string()));
            let manifest = write_trajectory(&dir, &traj, params)?;
            println!(
                "wrote {} frames to {}, final sup {:.6e}",
                manifest.frames.len(),
                dir.display(),
                traj.frames().last().map(|f| f.linf()).unwrap_or(f64::NAN)
            );
            if let Some(t) = traj.blowup() {
                println!("blow-up threshold crossed at t = {t:.6}");
                return Ok(3);
            }
            Ok(0)
        }
        Cmd::Tangent { common, evo, h_const } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let eps = default_eps(&cfg);
            let seed = default_seed(&cfg);
            let g: Nonlinearity = cfg.nonlinearity()?;
            let xi = build_noise(&fft, &cfg, eps, seed)?;
            let c = cfg.resolve_c(&fft, eps)?;
            let u0 = initial_data(&cfg, &evo)?;
            let dt = evo.dt.or(cfg.dt).unwrap_or_else(|| max_stable_dt(&xi));
            let t_end = evo.t_end.or(cfg.t_end).unwrap_or(0.25);
            let pde = PdeConfig::new(u0, eps, c, dt, t_end)?;
            let base = solve_gpam(&fft, &pde, g, &xi)?;
            if let Some(t) = base.blowup() {
                println!("base run crossed the blow-up threshold at t = {t:.6}");
                return Ok(3);
            }
            let h = match &cfg.h {
                Some(spec) => cfg.build_field(spec)?,
                None => Field::constant(grid, h_const),
            };
            let v = solve_tangent(&fft, &pde, g, &xi, &h, &base)?;
            let dir = resolve_out(&cfg, &common).join("tangent");
            let mut params = cfg.manifest_params();
            params.push(("c_effective".into(), c.to_string()));
            params.push(("h_const".into(), h_const.to_string()));
            let manifest = write_trajectory(&dir, &v, params)?;
            println!(
                "wrote {} frames to {}, final sup {:.6e}",
                manifest.frames.len(),
                dir.display(),
                v.frames().last().map(|f| f.linf()).unwrap_or(f64::NAN)
            );
            Ok(0)
        }
        Cmd::Maxprinciple {
            common,
            mode,
            seeds,
            t_end,
        } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let eps = default_eps(&cfg);
            let g: Nonlinearity = cfg.nonlinearity()?;
            let dir = resolve_out(&cfg, &common);
            let center = (grid.n() / 2, grid.n() / 2);
            let bump = plateau_bump(grid, center, 0.3, 0.8);
            let mut reports = Vec::new();
            if mode == "all" || mode == "heat" {
                reports.push(heat_kernel_lower_bound(&fft, 0.5, &[1.0, 2.0, 4.0], 16)?);
            }
            if mode == "all" || mode == "weak" {
                let seed_list: Vec<u64> = (0..seeds as u64).collect();
                let v0 = cosine_bump(grid);
                reports.push(weak_maximum_principle(&fft, g, eps, &v0, &seed_list, t_end)?);
            }
            if mode == "all" || mode == "strong" {
                let xi = build_noise(&fft, &cfg, eps, default_seed(&cfg))?;
                reports.push(strong_maximum_principle_check(&fft, g, eps, &xi, &bump, t_end)?);
            }
            for rep in &reports {
                emit(rep, &dir)?;
            }
            Ok(exit_code(&reports.iter().collect::<Vec<_>>()))
        }
        Cmd::Gateaux {
            common,
            deltas,
            t_probe,
        } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let eps = default_eps(&cfg);
            let g: Nonlinearity = cfg.nonlinearity()?;
            let xi = build_noise(&fft, &cfg, eps, default_seed(&cfg))?;
            let h = match &cfg.h {
                Some(spec) => cfg.build_field(spec)?,
                None => standard_shift(grid),
            };
            let probe = (grid.n() / 3, grid.n() / 5);
            let dir = resolve_out(&cfg, &common);
            let rep_g = gateaux_check(&fft, g, eps, &xi, &h, &deltas, t_probe, probe)?;
            let rep_t = translation_consistency(&fft, g, eps, &xi, &h)?;
            emit(&rep_g, &dir)?;
            emit(&rep_t, &dir)?;
            Ok(exit_code(&[&rep_g, &rep_t]))
        }
        Cmd::Converge {
            common,
            eps_list,
            t_end,
            no_renorm,
        } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let g: Nonlinearity = cfg.nonlinearity()?;
            let scales = match &cfg.eps_list {
                Some(list) if common.eps.is_none() => list.clone(),
                _ => eps_list,
            };
            let h = match &cfg.h {
                Some(spec) => cfg.build_field(spec)?,
                None => standard_shift(grid),
            };
            let rep = epsilon_convergence_study(
                &fft,
                g,
                default_seed(&cfg),
                &scales,
                &h,
                t_end,
                !no_renorm,
            )?;
            let dir = resolve_out(&cfg, &common);
            emit(&rep, &dir)?;
            Ok(exit_code(&[&rep]))
        }
        Cmd::Density {
            common,
            seeds,
            t,
            x,
            skip_tangent,
        } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let eps = default_eps(&cfg);
            let g: Nonlinearity = cfg.nonlinearity()?;
            let u0 = match &cfg.u0 {
                Some(spec) => cfg.build_field(spec)?,
                None => Field::zeros(grid),
            };
            let point = match &x {
                Some(v) if v.len() == 2 => (v[0], v[1]),
                Some(_) => anyhow::bail!("--x wants two indices, e.g. --x 8,12"),
                None => (grid.n() / 3, grid.n() / 5),
            };
            if point.0 >= grid.n() || point.1 >= grid.n() {
                anyhow::bail!("--x {},{} outside the {} grid", point.0, point.1, grid.n());
            }
            let seed_list: Vec<u64> = (0..seeds as u64).collect();
            let dt = cfg.dt.unwrap_or(2e-3);
            let dir = resolve_out(&cfg, &common);
            let rep_d = density_nondegeneracy(&fft, g, eps, &u0, t, point, &seed_list, dt)?;
            emit(&rep_d, &dir)?;
            let mut reports = vec![&rep_d];
            let rep_t;
            if !skip_tangent {
                rep_t = tangent_positivity(&fft, g, eps, &u0, t, point, &seed_list, dt)?;
                emit(&rep_t, &dir)?;
                reports.push(&rep_t);
            }
            Ok(exit_code(&reports))
        }
        Cmd::Wavelet { cmd } => run_wavelet(cmd),
    }
}

fn initial_data(cfg: &RunConfig, evo: &EvoOpts) -> anyhow::Result<Field> {
    let grid = cfg.grid()?;
    if let Some(path) = &evo.u0_file {
        let spec = FieldSpec::File { path: path.clone() };
        return Ok(cfg.build_field(&spec)?);
    }
    if let Some(v) = evo.u0_const {
        return Ok(Field::constant(grid, v));
    }
    match &cfg.u0 {
        Some(spec) => Ok(cfg.build_field(spec)?),
        None => Ok(standard_initial(grid)),
    }
}

fn run_model(cli_config: &Option<PathBuf>, mut cfg: RunConfig, cmd: ModelCmd) -> anyhow::Result<u8> {
    let _ = cli_config;
    match cmd {
        ModelCmd::Dump {
            common,
            symbol,
            base_point,
            raw,
        } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let eps = default_eps(&cfg);
            let tau = parse_symbol(&symbol)
                .map_err(|e| anyhow::anyhow!("cannot parse symbol {symbol:?}: {e}"))?;
            let xi = build_noise(&fft, &cfg, eps, default_seed(&cfg))?;
            let params = cfg.structure_params()?;
            let mut model = canonical_model(&fft, xi, eps, params);
            if !raw {
                model = model.renormalize(cfg.resolve_c(&fft, eps)?);
            }
            let x = match &base_point {
                Some(v) if v.len() == 2 => (v[0], v[1]),
                Some(_) => anyhow::bail!("--base-point wants two indices, e.g. --base-point 3,5"),
                None => (0, 0),
            };
            if x.0 >= grid.n() || x.1 >= grid.n() {
                anyhow::bail!("--base-point {},{} outside the {} grid", x.0, x.1, grid.n());
            }
            let field = model.eval_pi(x, &tau)?;
            let dir = resolve_out(&cfg, &common);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("model_dump.gpf");
            write_field(&path, &field)?;
            println!(
                "wrote {} (sup {:.6e})",
                path.display(),
                field.linf()
            );
            Ok(0)
        }
        ModelCmd::Check { common, pairs, tol } => {
            apply_common(&mut cfg, &common)?;
            let grid = cfg.grid()?;
            let fft = Fft2::new(grid);
            let eps = default_eps(&cfg);
            let seed = default_seed(&cfg);
            let params = cfg.structure_params()?;
            let xi = build_noise(&fft, &cfg, eps, seed)?;
            let c = cfg.resolve_c(&fft, eps)?;
            let h = standard_shift(grid);
            let plain = canonical_model(&fft, xi, eps, params);
            let renorm = plain.renormalize(c);
            let extended = renorm.extend(&fft, h.clone())?;
            let translated = renorm.translate(&fft, h)?;
            let mut doc = Vec::new();
            let mut worst: f64 = 0.0;
            for (name, model) in [
                ("plain", &plain),
                ("renormalized", &renorm),
                ("extended", &extended),
                ("translated", &translated),
            ] {
                let err = model.admissibility_error(pairs, seed ^ 0xA11CE)?;
                worst = worst.max(err);
                println!(
                    "[{}] {name}: reexpansion sup error {err:.3e} (tol {tol:.1e})",
                    if err <= tol { "pass" } else { "FAIL" }
                );
                doc.push(serde_json::json!({
                    "model": name,
                    "sup_error": err,
                    "tol": tol,
                    "pass": err <= tol,
                }));
            }
            let dir = resolve_out(&cfg, &common);
            std::fs::create_dir_all(&dir)?;
            write_json(
                &dir.join("model_check.json"),
                &serde_json::json!({ "pairs": pairs, "results": doc, "pass": worst <= tol }),
            )?;
            Ok(u8::from(worst > tol))
        }
    }
}

fn run_wavelet(cmd: WaveletCmd) -> anyhow::Result<u8> {
    match cmd {
        WaveletCmd::Norm { input, beta } => {
            let f = read_field(&input)?;
            let norm = sobolev_norm(&f, beta)?;
            println!("{norm:.12e}");
            Ok(0)
        }
        WaveletCmd::Scan { input, out } => {
            let f = read_field(&input)?;
            let dwt = Dwt2::full(f.grid());
            let coeffs = dwt.analyze(&f);
            let mut table = String::from("level,count,sup\n");
            for ell in 1..=coeffs.depth() {
                let side = coeffs.band_side(ell);
                let sup = coeffs.detail(ell)
                    .iter()
                    .flat_map(|band| band.iter())
                    .fold(0.0f64, |acc, v| acc.max(v.abs()));
                table.push_str(&format!("{ell},{},{sup:.12e}\n", 3 * side * side));
            }
            match out {
                Some(path) => {
                    std::fs::write(&path, table)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{table}"),
            }
            Ok(0)
        }
    }
}
