//! `mgkp`: command-line interface for the line-wave toolkit.
//!
//! Subcommands: profile | kinematics | conservation-check | evolve |
//! charge | constraints | normalize. Every run writes a `manifest.json`
//! listing its outputs; identical arguments and seeds produce
//! byte-identical CSV/JSON data files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments,
//! 3 kinematically inadmissible parameters, 4 a verification check
//! failed, 5 numeric abort (non-finite values or singular powers).

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use mgkp::conservation::{
    self, constraint_diagnostics, topological_charge, RectCurve, Variant,
};
use mgkp::field2d::{Field2D, Grid2D, Spectral};
use mgkp::kinematics::{
    admissible, sample_region, shock_curve_speed, shock_from_theta, soliton_from_ctheta,
    KinematicQuery,
};
use mgkp::params::{
    detect_special_case, normalize, scaling_weight, RawCoefficients, ScaledParams, ScalingKind,
};
use mgkp::rational::HalfInt;
use mgkp::solver::{measure_row_speed, seed_line_wave, snap_slope, Solver, SolverConfig};
use mgkp::wave::{
    construct, hw_to_angle_speed, profile_hw, shock_hw_to_angle_speed, shock_profile_hw,
    Polarity, SolutionKind, WaveFrame,
};
use mgkp::{Error, Result};

use io::{
    fmt_f64, prepare_out_dir, read_field, write_csv, write_field, write_json, Config, RunManifest,
};

// --------------------------------------------------------------------
// argument structures
// --------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(name = "mgkp", version, about = "Line-wave toolkit: exact profiles, kinematic regions, conservation-law verification, spectral evolution")]
struct Cli {
    /// Flat key-value config file supplying defaults for omitted flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for all output files (created if missing)
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// PRNG seed for random test fields (recorded in the manifest)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also print the machine-readable verdict JSON to standard output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample an exact line-soliton/line-shock profile to CSV (+ metadata)
    Profile(ProfileArgs),
    /// Emit the admissible (c, θ) region grid and boundary polylines
    Kinematics(KinematicsArgs),
    /// Verify the off-shell conservation-law identities
    ConservationCheck(ConservationArgs),
    /// Evolve initial data with the pseudo-spectral solver
    Evolve(EvolveArgs),
    /// Evaluate a topological charge on a rectangular curve
    Charge(ChargeArgs),
    /// Diagnose the Cauchy-data constraints on initial data (q = 1)
    Constraints(ConstraintsArgs),
    /// Scale raw equation coefficients to the canonical form
    Normalize(NormalizeArgs),
}

/// Equation parameters, either as one `--sp` spec or individual flags.
#[derive(Args, Debug, Clone)]
struct ParamArgs {
    /// Parameter set: `preset:<kp|gkp|mkp|mkp-continued>` or `s1,s2,a,b,q`
    #[arg(long)]
    sp: Option<String>,
    #[arg(long)]
    sigma1: Option<i8>,
    #[arg(long)]
    sigma2: Option<i8>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Nonlinearity power q as `n` or `n/d` (integer or half-integer)
    #[arg(long)]
    q: Option<String>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Frame slope μ (with --nu)
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Frame speed ν (with --mu)
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    /// Intrinsic speed c (with --theta)
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Direction angle θ in radians (with --c)
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Peak height h (with --w)
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    /// Width w (with --h)
    #[arg(long, allow_negative_numbers = true)]
    w: Option<f64>,
    /// Sample a shock profile instead of a soliton
    #[arg(long)]
    shock: bool,
    /// Wave family (default: first admitted family)
    #[arg(long)]
    kind: Option<String>,
    /// Branch for pair families: bright or dark
    #[arg(long, default_value = "bright")]
    branch: String,
    /// Number of uniform samples
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    /// Half-range of ξ in units of the width w
    #[arg(long, default_value_t = 10.0)]
    xi_span: f64,
    /// Emit a whole figure parameter sweep: focus-q1 | defocus-q1 | shock-q1
    #[arg(long)]
    figure_set: Option<String>,
}

#[derive(Args, Debug)]
struct KinematicsArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Named sign case: focus-normal | defocus-normal | focus-negative | defocus-negative
    #[arg(long)]
    case: Option<String>,
    /// Transverse coupling k² (with --case; sets a = 0, b from k)
    #[arg(long, allow_negative_numbers = true)]
    k2: Option<f64>,
    /// Speed range `lo,hi`
    #[arg(long, default_value = "0.01,5", allow_hyphen_values = true)]
    c_range: String,
    /// Angle range `lo,hi` in radians (|θ| < π/2)
    #[arg(long, default_value = "-1.4,1.4", allow_hyphen_values = true)]
    theta_range: String,
    /// Grid resolution `nc,ntheta`
    #[arg(long, default_value = "120,120")]
    resolution: String,
}

#[derive(Args, Debug)]
struct ConservationArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Check every id 1..=15 (inapplicable ids are marked skipped)
    #[arg(long)]
    all: bool,
    /// Check a single id
    #[arg(long)]
    id: Option<u8>,
    /// Use canonical per-id parameter sets covering all ids and sign pairs
    /// (ignores --sp)
    #[arg(long)]
    canonical: bool,
    /// Random analytic test fields per id
    #[arg(long, default_value_t = 20)]
    fields: usize,
    /// Random evaluation points per field
    #[arg(long, default_value_t = 5)]
    points: usize,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Grid as `Nx,Ny,Lx,Ly`
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Initial data: soliton | shock | gaussian | file:<sidecar.json>
    #[arg(long, default_value = "gaussian")]
    ic: String,
    /// Frame slope μ for soliton/shock seeding (snapped to a periodic wrap)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu: f64,
    /// Frame speed ν for soliton seeding
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    nu: f64,
    /// Gaussian amplitude
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    /// Gaussian width (default Lx/16)
    #[arg(long, allow_negative_numbers = true)]
    width: Option<f64>,
    /// Subtract the row mean of the initial data (always done for gaussian)
    #[arg(long)]
    project_mean: bool,
    /// Dealias cutoff override (fraction of Nyquist)
    #[arg(long)]
    dealias: Option<f64>,
    #[arg(long, default_value_t = mgkp::solver::DEFAULT_CFL_GUARD)]
    cfl_guard: f64,
    /// Keep a field snapshot every N steps
    #[arg(long)]
    snap_every: Option<usize>,
    /// Sample the conserved-integral trace every N steps
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    /// Path of the trace JSON (relative to --out-dir)
    #[arg(long, default_value = "trace.json")]
    trace_out: String,
}

#[derive(Args, Debug)]
struct ChargeArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Conservation-law id of the charge: 2 (mass) or 11 (y-moment)
    #[arg(long, default_value_t = 2)]
    id: u8,
    /// Grid as `Nx,Ny,Lx,Ly`
    #[arg(long, default_value = "128,128,32,32")]
    grid: String,
    /// Initial data: gaussian | file:<sidecar.json>
    #[arg(long, default_value = "gaussian")]
    ic: String,
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    #[arg(long, allow_negative_numbers = true)]
    width: Option<f64>,
    /// Inner curve `i0,i1,j0,j1` (default: middle half of the grid)
    #[arg(long)]
    rect: Option<String>,
    /// Acceptance threshold relative to the field normalization
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ConstraintsArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = "64,64,32,32")]
    grid: String,
    /// Initial data: gaussian | file:<sidecar.json>
    #[arg(long, default_value = "gaussian")]
    ic: String,
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    #[arg(long, allow_negative_numbers = true)]
    width: Option<f64>,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Nonlinearity power p (q = p/2)
    #[arg(long)]
    p: u32,
}

// --------------------------------------------------------------------
// parsing helpers
// --------------------------------------------------------------------

fn parse_halfint(s: &str) -> Result<HalfInt> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: i32 = n
        .parse()
        .map_err(|_| Error::InvalidParams(format!("bad q numerator `{n}`")))?;
    let den: i32 = d
        .parse()
        .map_err(|_| Error::InvalidParams(format!("bad q denominator `{d}`")))?;
    HalfInt::new(num, den)
}

fn parse_list<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(Error::InvalidParams(format!(
            "{what}: expected {N} comma-separated values, got `{s}`"
        )));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts.iter()) {
        *o = p
            .parse()
            .map_err(|_| Error::InvalidParams(format!("{what}: bad number `{p}`")))?;
    }
    Ok(out)
}

fn parse_grid(s: &str) -> Result<Grid2D> {
    let v: [f64; 4] = parse_list(s, "--grid Nx,Ny,Lx,Ly")?;
    Grid2D::new(v[0] as usize, v[1] as usize, v[2], v[3])
}

fn preset(name: &str) -> Result<ScaledParams> {
    let r2 = 2.0f64.sqrt();
    match name {
        "kp" => ScaledParams::new(1, 1, 0.0, 0.0, HalfInt::new(1, 2)?),
        "gkp" => ScaledParams::new(1, 1, 0.0, 0.0, HalfInt::new(1, 1)?),
        "mkp" => ScaledParams::new(-1, 1, r2, 0.0, HalfInt::new(1, 1)?),
        "mkp-continued" => ScaledParams::new(1, -1, r2, 0.0, HalfInt::new(1, 1)?),
        _ => Err(Error::InvalidParams(format!(
            "unknown preset `{name}` (kp | gkp | mkp | mkp-continued)"
        ))),
    }
}

impl ParamArgs {
    fn resolve(&self, cfg: &Config) -> Result<ScaledParams> {
        let sp_spec = self
            .sp
            .clone()
            .or_else(|| cfg.get("sp").map(String::from));
        if let Some(spec) = sp_spec {
            if let Some(name) = spec.strip_prefix("preset:") {
                return preset(name);
            }
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            if parts.len() != 5 {
                return Err(Error::InvalidParams(format!(
                    "--sp expects `preset:<name>` or `s1,s2,a,b,q`, got `{spec}`"
                )));
            }
            let s1: i8 = parts[0]
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad sigma1 `{}`", parts[0])))?;
            let s2: i8 = parts[1]
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad sigma2 `{}`", parts[1])))?;
            let a: f64 = parts[2]
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad a `{}`", parts[2])))?;
            let b: f64 = parts[3]
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad b `{}`", parts[3])))?;
            return ScaledParams::new(s1, s2, a, b, parse_halfint(parts[4])?);
        }
        let from_cfg = |key: &str| cfg.get(key).map(String::from);
        let s1 = match (self.sigma1, from_cfg("sigma1")) {
            (Some(v), _) => v,
            (None, Some(s)) => s
                .parse()
                .map_err(|_| Error::InvalidParams(format!("config sigma1 `{s}`")))?,
            (None, None) => {
                return Err(Error::InvalidParams(
                    "missing parameters: pass --sp or --sigma1/--sigma2/--a/--b/--q".into(),
                ))
            }
        };
        let req = |flag: Option<String>, key: &str| -> Result<String> {
            flag.or_else(|| from_cfg(key))
                .ok_or_else(|| Error::InvalidParams(format!("missing --{key}")))
        };
        let s2: i8 = req(self.sigma2.map(|v| v.to_string()), "sigma2")?
            .parse()
            .map_err(|_| Error::InvalidParams("bad sigma2".into()))?;
        let a: f64 = req(self.a.map(|v| v.to_string()), "a")?
            .parse()
            .map_err(|_| Error::InvalidParams("bad a".into()))?;
        let b: f64 = req(self.b.map(|v| v.to_string()), "b")?
            .parse()
            .map_err(|_| Error::InvalidParams("bad b".into()))?;
        let q = parse_halfint(&req(self.q.clone(), "q")?)?;
        ScaledParams::new(s1, s2, a, b, q)
    }
}

fn parse_kind(name: &str) -> Result<SolutionKind> {
    Ok(match name {
        "symmetric-pair" => SolutionKind::SymmetricSolitonPair,
        "nonsymmetric-pair" => SolutionKind::NonsymmetricSolitonPair,
        "single" => SolutionKind::SingleSoliton,
        "bright" => SolutionKind::BrightSoliton,
        "symmetric-shock-pair" => SolutionKind::SymmetricShockPair,
        "single-shock" => SolutionKind::SingleShock,
        "bright-shock" => SolutionKind::BrightShock,
        _ => {
            return Err(Error::InvalidParams(format!(
                "unknown kind `{name}` (symmetric-pair | nonsymmetric-pair | single | bright | symmetric-shock-pair | single-shock | bright-shock)"
            )))
        }
    })
}

fn kind_name(kind: SolutionKind) -> &'static str {
    match kind {
        SolutionKind::SymmetricSolitonPair => "symmetric-pair",
        SolutionKind::NonsymmetricSolitonPair => "nonsymmetric-pair",
        SolutionKind::SingleSoliton => "single",
        SolutionKind::BrightSoliton => "bright",
        SolutionKind::SymmetricShockPair => "symmetric-shock-pair",
        SolutionKind::SingleShock => "single-shock",
        SolutionKind::BrightShock => "bright-shock",
    }
}

fn parse_branch(name: &str) -> Result<Polarity> {
    match name {
        "bright" => Ok(Polarity::Bright),
        "dark" => Ok(Polarity::Dark),
        _ => Err(Error::InvalidParams(format!(
            "unknown branch `{name}` (bright | dark)"
        ))),
    }
}

fn gaussian_ic(grid: Grid2D, amp: f64, width: Option<f64>) -> Field2D {
    let w = width.unwrap_or(grid.lx / 16.0);
    let (x0, y0) = (grid.lx / 2.0, grid.ly / 2.0);
    let mut u = Field2D::from_fn(grid, |x, y| {
        let r2 = (x - x0).powi(2) + (y - y0).powi(2);
        amp * (-r2 / (2.0 * w * w)).exp()
    });
    u.project_zero_row_mean();
    u
}

fn load_ic(
    spec: &str,
    grid: Grid2D,
    amp: f64,
    width: Option<f64>,
    manifest: &mut RunManifest,
) -> Result<Field2D> {
    if spec == "gaussian" {
        return Ok(gaussian_ic(grid, amp, width));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let path = Path::new(path);
        manifest.hash_input(path)?;
        manifest.hash_input(&path.with_extension("bin"))?;
        let (u, _t) = read_field(path)?;
        if u.grid != grid {
            return Err(Error::InvalidParams(format!(
                "field file grid {}x{} does not match --grid {}x{}",
                u.grid.nx, u.grid.ny, grid.nx, grid.ny
            )));
        }
        return Ok(u);
    }
    Err(Error::InvalidParams(format!(
        "unknown initial-data spec `{spec}`"
    )))
}

// --------------------------------------------------------------------
// subcommand implementations
// --------------------------------------------------------------------

fn cmd_profile(cli: &Cli, args: &ProfileArgs, cfg: &Config) -> Result<()> {
    let out = prepare_out_dir(&cli.out_dir)?;
    let seed = cli.seed.unwrap_or(0);

    if let Some(set) = &args.figure_set {
        return figure_set(cli, set, &out, seed);
    }

    let sp = args.params.resolve(cfg)?;
    let branch = parse_branch(&args.branch)?;
    let mut manifest = RunManifest::new(
        "profile",
        json!({"sp": sp, "branch": args.branch, "samples": args.samples, "xi_span": args.xi_span}),
        seed,
    );
    if let Some(p) = &cli.config {
        manifest.hash_input(p)?;
    }

    // three equivalent parameterizations: (mu, nu), (c, theta), (h, w)
    let sol = match (args.mu, args.nu, args.c, args.theta, args.h, args.w) {
        (Some(mu), Some(nu), None, None, None, None) => {
            let frame = WaveFrame::new(mu, nu);
            let rc = mgkp::wave::reduced_constants(&sp, &frame);
            let admitted = mgkp::wave::classify(&sp, &rc);
            let kind = match &args.kind {
                Some(k) => parse_kind(k)?,
                None => *admitted
                    .iter()
                    .find(|k| k.is_shock() == args.shock)
                    .ok_or_else(|| {
                        Error::Inadmissible(format!(
                            "no {} admitted at (mu={mu}, nu={nu}); admitted: {admitted:?}",
                            if args.shock { "shock" } else { "soliton" }
                        ))
                    })?,
            };
            construct(&sp, &frame, kind, branch)?
        }
        (None, None, Some(c), Some(theta), None, None) => {
            if args.shock {
                shock_from_theta(&sp, theta, branch)?
            } else {
                let kind = match &args.kind {
                    Some(k) => parse_kind(k)?,
                    None => {
                        let adm = admissible(&sp, &KinematicQuery { c, theta })?;
                        *adm.soliton_kinds.first().ok_or_else(|| {
                            Error::Inadmissible(format!(
                                "no soliton admitted at (c={c}, theta={theta}); \
                                 bounds c_min={}, c_max={:?}",
                                adm.c_min, adm.c_max
                            ))
                        })?
                    }
                };
                soliton_from_ctheta(&sp, c, theta, kind, branch)?
            }
        }
        (None, None, None, None, Some(h), Some(w)) => {
            // the (h, w) route samples the closed-form profile directly
            return profile_from_hw(&sp, h, w, args, &out, manifest);
        }
        _ => {
            return Err(Error::InvalidParams(
                "pass exactly one of (--mu, --nu), (--c, --theta), (--h, --w)".into(),
            ))
        }
    };

    let meta = sol.metadata();
    let span = args.xi_span * meta.w;
    let rows: Vec<Vec<String>> = (0..args.samples)
        .map(|i| {
            let xi = -span + 2.0 * span * i as f64 / (args.samples - 1) as f64;
            vec![fmt_f64(xi), fmt_f64(sol.eval(xi))]
        })
        .collect();
    write_csv(&out, "profile.csv", "xi,u", &rows, &mut manifest)?;
    write_json(&out, "metadata.json", &meta, &mut manifest)?;
    manifest.write(&out)?;
    println!(
        "profile: kind={} h={:.6} w={:.6} theta={:.6} c={:.6} -> {}/profile.csv",
        kind_name(meta.kind),
        meta.h,
        meta.w,
        meta.theta,
        meta.c,
        out.display()
    );
    if cli.json {
        println!("{}", serde_json::to_string(&meta).unwrap());
    }
    Ok(())
}

fn profile_from_hw(
    sp: &ScaledParams,
    h: f64,
    w: f64,
    args: &ProfileArgs,
    out: &Path,
    mut manifest: RunManifest,
) -> Result<()> {
    let span = args.xi_span * w;
    let sample: Box<dyn Fn(f64) -> Result<f64>> = if args.shock {
        Box::new(move |xi| shock_profile_hw(sp, h, w, xi))
    } else {
        Box::new(move |xi| profile_hw(sp, h, w, xi))
    };
    let mut rows = Vec::with_capacity(args.samples);
    for i in 0..args.samples {
        let xi = -span + 2.0 * span * i as f64 / (args.samples - 1) as f64;
        rows.push(vec![fmt_f64(xi), fmt_f64(sample(xi)?)]);
    }
    write_csv(out, "profile.csv", "xi,u", &rows, &mut manifest)?;
    let meta = if args.shock {
        let s = shock_hw_to_angle_speed(sp, h, w)?;
        serde_json::to_value(&s).unwrap()
    } else {
        let (theta, c) = hw_to_angle_speed(sp, h, w)?;
        json!({"h": h, "w": w, "theta": theta, "c": c})
    };
    write_json(out, "metadata.json", &meta, &mut manifest)?;
    manifest.write(out)?;
    println!("profile(h={h}, w={w}) -> {}/profile.csv", out.display());
    Ok(())
}

/// The q = 1 figure parameter sweeps: heights {1, 2.5, 4} over a width
/// list, defocussing widths filtered by the non-singularity bound
/// w·h^q < l (l = √6 at q = 1).
fn figure_set(cli: &Cli, set: &str, out: &Path, seed: u64) -> Result<()> {
    let q1 = HalfInt::new(1, 1)?;
    let (sp, shock) = match set {
        "focus-q1" => (ScaledParams::new(1, 1, 0.0, 1.0, q1)?, false),
        "defocus-q1" => (ScaledParams::new(-1, 1, 0.0, 1.0, q1)?, false),
        "shock-q1" => (ScaledParams::new(-1, 1, 0.0, 1.0, q1)?, true),
        _ => {
            return Err(Error::InvalidParams(format!(
                "unknown figure set `{set}` (focus-q1 | defocus-q1 | shock-q1)"
            )))
        }
    };
    let heights = [1.0, 2.5, 4.0];
    let widths = [0.1, 0.2, 0.5, 1.0, 2.0];
    let l_bound = 6.0f64.sqrt(); // √((2q+1)(q+1))/q at q = 1
    let mut manifest = RunManifest::new(
        "profile --figure-set",
        json!({"set": set, "heights": heights, "widths": widths}),
        seed,
    );
    let mut index = Vec::new();
    let mut worst_h_err = 0.0f64;
    for &h in &heights {
        for &w in &widths {
            if sp.sigma1 == -1 && !shock && w * h >= l_bound {
                continue; // singular: outside the defocussing bound
            }
            let samples = 2001usize;
            let span = 10.0 * w;
            let mut rows = Vec::with_capacity(samples);
            let mut max_abs = 0.0f64;
            let mut ok = true;
            for i in 0..samples {
                let xi = -span + 2.0 * span * i as f64 / (samples - 1) as f64;
                let u = if shock {
                    shock_profile_hw(&sp, h, w, xi)
                } else {
                    profile_hw(&sp, h, w, xi)
                };
                match u {
                    Ok(u) => {
                        max_abs = max_abs.max(u.abs());
                        rows.push(vec![fmt_f64(xi), fmt_f64(u)]);
                    }
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue; // (h, w) pair outside this family's range
            }
            let name = format!("profile_q1_h{h}_w{w}.csv").replace('.', "p").replace("pcsv", ".csv");
            write_csv(out, &name, "xi,u", &rows, &mut manifest)?;
            worst_h_err = worst_h_err.max((max_abs - h).abs());
            index.push(json!({"file": name, "h": h, "w": w, "max_abs_u": max_abs}));
        }
    }
    write_json(
        out,
        "figure_index.json",
        &json!({"set": set, "profiles": index, "worst_height_error": worst_h_err}),
        &mut manifest,
    )?;
    manifest.write(out)?;
    println!(
        "figure set {set}: {} profiles, worst |max|U|| - h| = {worst_h_err:.3e}",
        manifest.outputs.len() - 1
    );
    if worst_h_err > 1e-12 {
        return Err(Error::CheckFailed(format!(
            "profile peak mismatch: worst |max|U| - h| = {worst_h_err:.3e} > 1e-12"
        )));
    }
    if cli.json {
        println!(
            "{}",
            json!({"set": set, "worst_height_error": worst_h_err, "pass": true})
        );
    }
    Ok(())
}

fn cmd_kinematics(cli: &Cli, args: &KinematicsArgs, cfg: &Config) -> Result<()> {
    let out = prepare_out_dir(&cli.out_dir)?;
    let sp = if let Some(case) = &args.case {
        let (s1, s2) = match case.as_str() {
            "focus-normal" => (1, 1),
            "defocus-normal" => (-1, 1),
            "focus-negative" => (1, -1),
            "defocus-negative" => (-1, -1),
            _ => {
                return Err(Error::InvalidParams(format!(
                    "unknown case `{case}` (focus-normal | defocus-normal | focus-negative | defocus-negative)"
                )))
            }
        };
        // realize k² via a = 0, b = k·√6 at q = 1 (k = (a+b)/√6 there)
        let k2 = args.k2.unwrap_or(1.0 / 3.0);
        if k2 < 0.0 {
            return Err(Error::InvalidParams("--k2 must be nonnegative".into()));
        }
        ScaledParams::new(s1, s2, 0.0, k2.sqrt() * 6.0f64.sqrt(), HalfInt::new(1, 1)?)?
    } else {
        args.params.resolve(cfg)?
    };

    let cr: [f64; 2] = parse_list(&args.c_range, "--c-range")?;
    let tr: [f64; 2] = parse_list(&args.theta_range, "--theta-range")?;
    let res: [f64; 2] = parse_list(&args.resolution, "--resolution")?;
    let resolution = (res[0] as usize, res[1] as usize);

    let mut manifest = RunManifest::new(
        "kinematics",
        json!({"sp": sp, "c_range": cr, "theta_range": tr, "resolution": res}),
        cli.seed.unwrap_or(0),
    );

    let grid = sample_region(&sp, (cr[0], cr[1]), (tr[0], tr[1]), resolution)?;
    let mut rows = Vec::new();
    for (jt, &theta) in grid.theta_values.iter().enumerate() {
        for (ic, &c) in grid.c_values.iter().enumerate() {
            let kinds = if grid.admissible[jt][ic] {
                admissible(&sp, &KinematicQuery { c, theta })?
                    .soliton_kinds
                    .iter()
                    .map(|k| kind_name(*k))
                    .collect::<Vec<_>>()
                    .join(";")
            } else {
                String::new()
            };
            rows.push(vec![
                fmt_f64(c),
                fmt_f64(theta),
                (grid.admissible[jt][ic] as u8).to_string(),
                kinds,
            ]);
        }
    }
    write_csv(&out, "region.csv", "c,theta,admissible,kinds", &rows, &mut manifest)?;

    let mut brows = Vec::new();
    for (id, poly) in grid.boundaries.iter().enumerate() {
        for &(theta, c) in poly {
            brows.push(vec![id.to_string(), fmt_f64(c), fmt_f64(theta)]);
        }
    }
    write_csv(&out, "boundaries.csv", "curve_id,c,theta", &brows, &mut manifest)?;

    if sp.sigma1 == -1 {
        // the shock exists exactly on c = c_shock(θ)
        let mut srows = Vec::new();
        for &theta in &grid.theta_values {
            if theta != 0.0 {
                srows.push(vec![fmt_f64(shock_curve_speed(&sp, theta)?), fmt_f64(theta)]);
            }
        }
        write_csv(&out, "shock_curve.csv", "c,theta", &srows, &mut manifest)?;
    }

    // one-line reproduction commands for each standard region figure
    let recipes = json!({
        "focus-normal-region": "mgkp kinematics --case focus-normal",
        "defocus-normal-region (mKP at k2 = 1/3)": "mgkp kinematics --case defocus-normal --k2 0.3333333333333333",
        "focus-negative-region": "mgkp kinematics --case focus-negative",
        "defocus-negative-region": "mgkp kinematics --case defocus-negative",
        "defocus-normal-shock-curve": "mgkp kinematics --case defocus-normal # see shock_curve.csv",
        "defocus-negative-shock-curve": "mgkp kinematics --case defocus-negative # see shock_curve.csv",
        "stationary-shock (k2 = 1, sign-changing)": "mgkp kinematics --case defocus-negative --k2 1.0",
        "profile-figures": "mgkp profile --figure-set defocus-q1 (also focus-q1, shock-q1)"
    });
    write_json(&out, "recipes.json", &recipes, &mut manifest)?;
    manifest.write(&out)?;
    println!(
        "kinematics: {}x{} region grid, {} boundary polylines -> {}",
        resolution.0,
        resolution.1,
        grid.boundaries.len(),
        out.display()
    );
    Ok(())
}

fn cmd_conservation(cli: &Cli, args: &ConservationArgs, cfg: &Config) -> Result<()> {
    let out = prepare_out_dir(&cli.out_dir)?;
    let seed = cli.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<u8> = match (args.all, args.id) {
        (true, None) => (1..=15).collect(),
        (false, Some(id)) if (1..=15).contains(&id) => vec![id],
        (false, Some(id)) => {
            return Err(Error::InvalidParams(format!("--id {id} out of range 1..=15")))
        }
        _ => {
            return Err(Error::InvalidParams(
                "pass exactly one of --all or --id <n>".into(),
            ))
        }
    };

    let mut reports = Vec::new();
    if args.canonical {
        for &id in &ids {
            for (s1, s2) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                if let Some(sp) = conservation::params_for_id(id, s1, s2) {
                    reports.push(conservation::verify_id(id, &sp, args.fields, args.points, &mut rng)?);
                }
            }
        }
    } else {
        let sp = args.params.resolve(cfg)?;
        for &id in &ids {
            reports.push(conservation::verify_id(id, &sp, args.fields, args.points, &mut rng)?);
        }
    }

    let mut manifest = RunManifest::new(
        "conservation-check",
        json!({"ids": ids, "fields": args.fields, "points": args.points, "canonical": args.canonical}),
        seed,
    );
    write_json(&out, "conservation_report.json", &reports, &mut manifest)?;
    manifest.write(&out)?;

    let mut failed = false;
    for r in &reports {
        let residual = if r.applicable {
            format!("{:.3e}", r.residual_max)
        } else {
            "-".into()
        };
        println!(
            "id {:>2}  residual {:>10}  f: {:<16}  {}",
            r.id,
            residual,
            r.f_choices.join(","),
            r.verdict
        );
        if r.verdict == "fail" {
            failed = true;
        }
    }
    if cli.json {
        println!("{}", serde_json::to_string(&reports).unwrap());
    }
    if failed {
        return Err(Error::CheckFailed(
            "one or more conservation-law identities failed".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct EvolveReport {
    steps: usize,
    t_end: f64,
    momentum_drift_rel: f64,
    mass_drift_abs: f64,
    energy_var_drift: Option<f64>,
    measured_speed: Option<f64>,
    predicted_speed: Option<f64>,
    seed_info: Option<mgkp::solver::SeedReport>,
}

fn cmd_evolve(cli: &Cli, args: &EvolveArgs, cfg: &Config) -> Result<()> {
    let out = prepare_out_dir(&cli.out_dir)?;
    let seed = cli.seed.unwrap_or(0);
    let sp = args.params.resolve(cfg)?;
    let from_cfg_f64 = |key: &str| -> Result<Option<f64>> {
        match cfg.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidParams(format!("config {key} `{s}`"))),
        }
    };
    let grid = parse_grid(
        args.grid
            .clone()
            .or_else(|| cfg.get("grid").map(String::from))
            .ok_or_else(|| Error::InvalidParams("missing --grid Nx,Ny,Lx,Ly".into()))?
            .as_str(),
    )?;
    let dt = args
        .dt
        .or(from_cfg_f64("dt")?)
        .ok_or_else(|| Error::InvalidParams("missing --dt".into()))?;
    let t_end = args
        .t_end
        .or(from_cfg_f64("t_end")?)
        .ok_or_else(|| Error::InvalidParams("missing --t-end".into()))?;

    let mut manifest = RunManifest::new(
        "evolve",
        json!({"sp": sp, "grid": grid, "dt": dt, "t_end": t_end, "ic": args.ic}),
        seed,
    );
    if let Some(p) = &cli.config {
        manifest.hash_input(p)?;
    }

    // initial data
    let mut seed_info = None;
    let mut predicted_speed = None;
    let mut u0 = match args.ic.as_str() {
        "soliton" | "shock" => {
            let (mu, _) = snap_slope(args.mu, grid);
            let branch = Polarity::Bright;
            let sol = if args.ic == "shock" {
                shock_from_theta(&sp, mu.atan(), branch)?
            } else {
                let frame = WaveFrame::new(mu, args.nu);
                let rc = mgkp::wave::reduced_constants(&sp, &frame);
                let admitted = mgkp::wave::classify(&sp, &rc);
                let kind = *admitted
                    .iter()
                    .find(|k| !k.is_shock())
                    .ok_or_else(|| {
                        Error::Inadmissible(format!(
                            "no soliton admitted at (mu={mu}, nu={}); admitted: {admitted:?}",
                            args.nu
                        ))
                    })?;
                construct(&sp, &frame, kind, branch)?
            };
            predicted_speed = Some(sol.frame.nu);
            let (u, info) = seed_line_wave(&sol, mu, grid.lx / 2.0, grid, args.project_mean)?;
            seed_info = Some(info);
            u
        }
        other => load_ic(other, grid, args.amp, args.width, &mut manifest)?,
    };
    if args.project_mean && seed_info.is_none() {
        u0.project_zero_row_mean();
    }

    let solver = Solver::new(&sp, grid, args.dealias)?;
    let solver_cfg = SolverConfig {
        dt,
        t_end,
        dealias_fraction: args.dealias,
        cfl_guard: args.cfl_guard,
        record_every: args.record_every,
        snap_every: args.snap_every,
    };
    let evo = solver.evolve(&u0, &solver_cfg)?;

    // outputs: trace, snapshots, final field
    write_json(&out, &args.trace_out, &evo.trace, &mut manifest)?;
    for (idx, (t, snap)) in evo.snapshots.iter().enumerate() {
        write_field(&out, &format!("snap_{idx:04}"), snap, *t, &mut manifest)?;
    }

    let p = &evo.trace.momentum;
    let m = &evo.trace.mass;
    let p_drift = p
        .iter()
        .map(|v| (v - p[0]).abs())
        .fold(0.0f64, f64::max)
        / p[0].abs().max(1e-300);
    let m_drift = m.iter().map(|v| (v - m[0]).abs()).fold(0.0f64, f64::max);
    let e = &evo.trace.energy_var;
    let e_drift = if e[0].is_finite() {
        Some(
            e.iter()
                .map(|v| (v - e[0]).abs())
                .fold(0.0f64, f64::max),
        )
    } else {
        None
    };
    let measured_speed = if seed_info.is_some() && evo.snapshots.len() >= 3 {
        measure_row_speed(&evo.snapshots, 0).ok()
    } else {
        None
    };
    let report = EvolveReport {
        steps: evo.steps,
        t_end,
        momentum_drift_rel: p_drift,
        mass_drift_abs: m_drift,
        energy_var_drift: e_drift,
        measured_speed,
        predicted_speed,
        seed_info,
    };
    write_json(&out, "evolve_report.json", &report, &mut manifest)?;
    manifest.write(&out)?;

    println!(
        "evolve: {} steps to t = {t_end}; momentum drift {:.3e} (rel), mass drift {:.3e}",
        evo.steps, p_drift, m_drift
    );
    if let (Some(ms), Some(ps)) = (measured_speed, predicted_speed) {
        println!("measured speed {ms:.6} vs predicted {ps:.6}");
    }
    if cli.json {
        println!("{}", serde_json::to_string(&report).unwrap());
    }
    Ok(())
}

fn cmd_charge(cli: &Cli, args: &ChargeArgs, cfg: &Config) -> Result<()> {
    let out = prepare_out_dir(&cli.out_dir)?;
    let sp = args.params.resolve(cfg)?;
    let grid = parse_grid(&args.grid)?;
    let mut manifest = RunManifest::new(
        "charge",
        json!({"sp": sp, "id": args.id, "grid": grid, "tol": args.tol}),
        cli.seed.unwrap_or(0),
    );
    let u = load_ic(&args.ic, grid, args.amp, args.width, &mut manifest)?;

    // u_t from the evolution right-hand side: (u, u_t) is an
    // instantaneous solution, so the charge must vanish
    let solver = Solver::new(&sp, grid, None)?;
    let ut = solver.rhs(&u)?;
    let spectral = Spectral::new(grid);

    let inner = match &args.rect {
        Some(r) => {
            let v: [f64; 4] = parse_list(r, "--rect i0,i1,j0,j1")?;
            RectCurve {
                i0: v[0] as usize,
                i1: v[1] as usize,
                j0: v[2] as usize,
                j1: v[3] as usize,
            }
        }
        None => RectCurve {
            i0: grid.nx / 4,
            i1: 3 * grid.nx / 4,
            j0: grid.ny / 4,
            j1: 3 * grid.ny / 4,
        },
    };
    let outer = RectCurve {
        i0: inner.i0 / 2,
        i1: (inner.i1 + grid.nx - 1) / 2,
        j0: inner.j0 / 2,
        j1: (inner.j1 + grid.ny - 1) / 2,
    };
    let c_inner = topological_charge(args.id, &sp, &spectral, &u, &ut, inner)?;
    let c_outer = topological_charge(args.id, &sp, &spectral, &u, &ut, outer)?;
    let normalization = (1.0 + u.linf_norm()) * 2.0 * (grid.lx + grid.ly);
    let tol = args.tol * normalization;
    let pass = c_inner.abs() <= tol && c_outer.abs() <= tol && (c_inner - c_outer).abs() <= 2.0 * tol;

    let verdict = json!({
        "id": args.id,
        "charge_inner": c_inner,
        "charge_outer": c_outer,
        "normalization": normalization,
        "tolerance": tol,
        "pass": pass,
    });
    write_json(&out, "charge.json", &verdict, &mut manifest)?;
    manifest.write(&out)?;
    println!(
        "charge id {}: inner {:.3e}, outer {:.3e} (tolerance {:.3e}) -> {}",
        args.id,
        c_inner,
        c_outer,
        tol,
        if pass { "pass" } else { "FAIL" }
    );
    if cli.json {
        println!("{verdict}");
    }
    if !pass {
        return Err(Error::CheckFailed(format!(
            "charge magnitude or deformation dependence exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(())
}

fn cmd_constraints(cli: &Cli, args: &ConstraintsArgs, cfg: &Config) -> Result<()> {
    let out = prepare_out_dir(&cli.out_dir)?;
    let sp = args.params.resolve(cfg)?;
    let grid = parse_grid(&args.grid)?;
    let mut manifest = RunManifest::new(
        "constraints",
        json!({"sp": sp, "grid": grid}),
        cli.seed.unwrap_or(0),
    );
    let u0 = load_ic(&args.ic, grid, args.amp, args.width, &mut manifest)?;
    let spectral = Spectral::new(grid);
    let report = constraint_diagnostics(&sp, &spectral, &u0)?;
    write_json(&out, "constraints.json", &report, &mut manifest)?;
    manifest.write(&out)?;

    println!(
        "P^y = {:.3e} ({}), P = {:.6}",
        report.p_y,
        if report.p_y_zero { "zero" } else { "NONZERO" },
        report.p
    );
    if let Some(e) = report.energy {
        println!("energy = {e:.6}");
    }
    for caveat in [&report.l2_caveat, &report.energy_caveat].into_iter().flatten() {
        println!("caveat: {caveat}");
    }
    if cli.json {
        println!("{}", serde_json::to_string(&report).unwrap());
    }
    if !report.p_y_zero {
        return Err(Error::CheckFailed(
            "initial data violates the zero y-momentum constraint".into(),
        ));
    }
    Ok(())
}

fn cmd_normalize(cli: &Cli, args: &NormalizeArgs) -> Result<()> {
    let out = prepare_out_dir(&cli.out_dir)?;
    let raw = RawCoefficients {
        alpha: args.alpha,
        epsilon: args.epsilon,
        kappa: args.kappa,
        beta: args.beta,
        gamma: args.gamma,
        p: args.p,
    };
    let (sp, transform) = normalize(&raw)?;
    let special = detect_special_case(&sp);
    let weights = json!({
        "momentum": scaling_weight(ScalingKind::Momentum, sp.q.numerator() as i64, sp.q.denominator() as i64)?,
        "energy_variational": scaling_weight(ScalingKind::EnergyVar, sp.q.numerator() as i64, sp.q.denominator() as i64)?,
    });
    let verdict = json!({
        "scaled": sp,
        "transform": transform,
        "special_case": format!("{special:?}"),
        "scaling_weights": weights,
    });
    let mut manifest = RunManifest::new("normalize", json!({"raw": raw}), cli.seed.unwrap_or(0));
    write_json(&out, "normalized.json", &verdict, &mut manifest)?;
    manifest.write(&out)?;
    println!(
        "scaled: sigma1={} sigma2={} a={:.6} b={:.6} q={}/{} ({special:?})",
        sp.sigma1,
        sp.sigma2,
        sp.a,
        sp.b,
        sp.q.numerator(),
        sp.q.denominator()
    );
    if cli.json {
        println!("{verdict}");
    }
    Ok(())
}

// --------------------------------------------------------------------
// entry point
// --------------------------------------------------------------------

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParams(_) | Error::MissingJetEntry(..) => 2,
        Error::Inadmissible(_) => 3,
        Error::CheckFailed(_) => 4,
        Error::NumericAbort(_) => 5,
        Error::Io(_) => 1,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    match &cli.cmd {
        Cmd::Profile(args) => cmd_profile(cli, args, &cfg),
        Cmd::Kinematics(args) => cmd_kinematics(cli, args, &cfg),
        Cmd::ConservationCheck(args) => cmd_conservation(cli, args, &cfg),
        Cmd::Evolve(args) => cmd_evolve(cli, args, &cfg),
        Cmd::Charge(args) => cmd_charge(cli, args, &cfg),
        Cmd::Constraints(args) => cmd_constraints(cli, args, &cfg),
        Cmd::Normalize(args) => cmd_normalize(cli, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with code 2 on bad arguments
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Ensure the Variant type stays reachable for downstream scripting of
/// the quarantine protocol (printed vs corrected flux evaluators).
#[allow(dead_code)]
const _QUARANTINE_VARIANTS: [Variant; 2] = [Variant::Printed, Variant::Corrected];
