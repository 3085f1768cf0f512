//! File-driven command-line front end. Every run is reproducible from its
//! config and seed; outputs are plain CSV and JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::czkernel::{cancellation_report, Kernel, KernelKind, PvParams};
use crate::error::Error;
use crate::extension::extend_field;
use crate::geometry::{Domain, DomainDescriptor, Point, ScalarField};
use crate::moduli::Modulus;
use crate::seminorm::{campanato_seminorm, whitney_noise_field, CubeSampler};
use crate::t1::{bloch_profile, log_spaced, phi_field, t1_check, tchi_field, T1Config};
use crate::whitney::{build_whitney, reflection_map, verify_covering, Side};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Parser)]
#[command(name = "campanato", about = "Campanato-space numerics for restricted singular integrals", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed override for random samplers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker pool size; results are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Quadrature tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Validate the config and print the plan without writing anything.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Build Whitney coverings and verify the covering properties.
    Whitney,
    /// Build the extension of a configured field and rasterize it.
    Extend,
    /// Estimate a Campanato seminorm of a configured field.
    Seminorm,
    /// Rasterize (T chi_D) chi_D on a grid.
    Tchi,
    /// Gradient decay profile along the inward normal.
    GradProfile,
    /// Full T1 condition check with verdict.
    T1check,
    /// Extra-cancellation check on a ball.
    Cancellation,
}

/// JSON run configuration (everything optional has a pinned default).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: Option<DomainDescriptor>,
    pub kernel: Option<KernelKind>,
    pub modulus: Option<Modulus>,
    pub field: Option<FieldConfig>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_min_level")]
    pub min_level: i32,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_delta_range")]
    pub delta_range: [f64; 2],
    #[serde(default = "default_delta_count")]
    pub delta_count: usize,
    /// Pass threshold: max |T chi_B| for `cancellation`, sup-ratio for
    /// `seminorm`/`t1check`, ratio band for `grad-profile`.
    pub threshold: Option<f64>,
    #[serde(default)]
    pub interior: bool,
    #[serde(default = "default_p")]
    pub p: u8,
}

fn default_seed() -> u64 {
    0xC0FFEE
}
fn default_tol() -> f64 {
    1e-4
}
fn default_grid_n() -> usize {
    128
}
fn default_min_level() -> i32 {
    -8
}
fn default_probes() -> usize {
    50
}
fn default_delta_range() -> [f64; 2] {
    [1e-4, 1e-1]
}
fn default_delta_count() -> usize {
    12
}
fn default_p() -> u8 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

/// Test-field selector for `extend` and `seminorm`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldConfig {
    Constant { value: f64 },
    Coordinate { axis: usize },
    Phi { tau: [f64; 2] },
    WhitneyNoise,
    Tchi,
}

/// Entry point: returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(pass) => {
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit codes: 0 pass, 1 threshold fail, 2 config, 3 geometry,
/// 4 quadrature, 5 reflection, 6 partition, 7 capability/roughness,
/// 8 poisoned/empty, 9 other.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Geometry(_) => 3,
        Error::Quadrature { .. } => 4,
        Error::Reflection { .. } => 5,
        Error::PartitionGap { .. } => 6,
        Error::Capability(_) | Error::Roughness(_) => 7,
        Error::Poisoned(_) | Error::EmptyReport => 8,
    }
}

fn execute(cli: &Cli) -> crate::Result<bool> {
    if let Some(n) = cli.threads {
        // Identical results for any pool size; ignore re-init errors.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let mut config: RunConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.tol = tol;
    }

    if cli.dry_run {
        let plan = json!({
            "command": format!("{:?}", cli.command),
            "config": config,
            "out": cli.out,
            "dry_run": true,
        });
        println!("{}", serde_json::to_string_pretty(&plan).unwrap());
        return Ok(true);
    }
    fs::create_dir_all(&cli.out)
        .map_err(|e| Error::Config(format!("cannot create output dir: {e}")))?;

    match cli.command {
        Command::Whitney => cmd_whitney(&config, &cli.out),
        Command::Extend => cmd_extend(&config, &cli.out),
        Command::Seminorm => cmd_seminorm(&config, &cli.out),
        Command::Tchi => cmd_tchi(&config, &cli.out),
        Command::GradProfile => cmd_grad_profile(&config, &cli.out),
        Command::T1check => cmd_t1check(&config, &cli.out),
        Command::Cancellation => cmd_cancellation(&config, &cli.out),
    }
}

fn domain_from(config: &RunConfig) -> crate::Result<Arc<Domain>> {
    let desc = config
        .domain
        .as_ref()
        .ok_or_else(|| Error::Config("config needs a \"domain\"".into()))?;
    Ok(Arc::new(Domain::from_descriptor(desc)?))
}

fn kernel_from(config: &RunConfig) -> crate::Result<Kernel> {
    let kind = config
        .kernel
        .clone()
        .ok_or_else(|| Error::Config("config needs a \"kernel\"".into()))?;
    Kernel::from_kind(kind)
}

fn modulus_from(config: &RunConfig) -> crate::Result<Modulus> {
    config
        .modulus
        .clone()
        .ok_or_else(|| Error::Config("config needs a \"modulus\"".into()))
}

fn build_field(
    config: &RunConfig,
    domain: &Arc<Domain>,
) -> crate::Result<ScalarField> {
    let spec = config
        .field
        .clone()
        .unwrap_or(FieldConfig::Constant { value: 1.0 });
    let support = domain.bounding_box().inflate(1.5);
    Ok(match spec {
        FieldConfig::Constant { value } => ScalarField::constant(support, value),
        FieldConfig::Coordinate { axis } => {
            if axis > 1 {
                return Err(Error::Config("coordinate axis must be 0 or 1".into()));
            }
            ScalarField::coordinate(support, axis)
        }
        FieldConfig::Phi { tau } => {
            let m = modulus_from(config)?;
            phi_field(&m, Point::new(tau[0], tau[1]), support)
        }
        FieldConfig::WhitneyNoise => {
            let m = modulus_from(config)?;
            let cov = Arc::new(build_whitney(domain, Side::Interior, config.min_level)?);
            whitney_noise_field(&cov, &m, config.seed)
        }
        FieldConfig::Tchi => {
            let k = kernel_from(config)?;
            tchi_field(domain, &k, config.grid_n, config.tol)?
        }
    })
}

fn write_csv(
    path: &Path,
    schema: &str,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> crate::Result<()> {
    let mut text = format!("#schema: campanato.{schema}.{SCHEMA_VERSION}\n{header}\n");
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> crate::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value).unwrap())
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_whitney(config: &RunConfig, out: &Path) -> crate::Result<bool> {
    let domain = domain_from(config)?;
    let interior = Arc::new(build_whitney(&domain, Side::Interior, config.min_level - 1)?);
    let exterior = Arc::new(build_whitney(&domain, Side::Exterior, config.min_level)?);
    let rep_int = verify_covering(&interior);
    let rep_ext = verify_covering(&exterior);
    let reflections = reflection_map(&interior, &exterior, domain.window_size())?;

    for (cov, name) in [(&interior, "interior"), (&exterior, "exterior")] {
        write_csv(
            &out.join(format!("whitney_{name}.csv")),
            "whitney-cubes",
            "level,ix,iy,side,dist_to_boundary",
            cov.cubes.iter().zip(&cov.dist).map(|(q, d)| {
                format!("{},{},{},{},{}", q.level, q.ix, q.iy, q.side(), d)
            }),
        )?;
    }
    write_csv(
        &out.join("whitney_reflection.csv"),
        "whitney-reflection",
        "ext_level,ext_ix,ext_iy,int_level,int_ix,int_iy",
        exterior
            .cubes
            .iter()
            .zip(&reflections)
            .filter_map(|(q, r)| {
                r.map(|i| {
                    let p = &interior.cubes[i as usize];
                    format!("{},{},{},{},{},{}", q.level, q.ix, q.iy, p.level, p.ix, p.iy)
                })
            }),
    )?;
    let pass = rep_int.violations.is_empty() && rep_ext.violations.is_empty();
    write_json(
        &out.join("whitney_report.json"),
        &json!({
            "interior": rep_int,
            "exterior": rep_ext,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn cmd_extend(config: &RunConfig, out: &Path) -> crate::Result<bool> {
    let domain = domain_from(config)?;
    let f = build_field(config, &domain)?;
    let ext = Arc::new(extend_field(f, &domain, config.min_level, 32)?);
    let field = ext.as_field();
    let hull = ext.support_hull().inflate(1.1);
    let n = config.grid_n;
    write_csv(
        &out.join("extension.csv"),
        "field-raster",
        "x,y,value",
        (0..n * n).map(|idx| {
            let (i, j) = (idx % n, idx / n);
            let p = Point::new(
                hull.x0 + hull.width() * i as f64 / (n - 1) as f64,
                hull.y0 + hull.height() * j as f64 / (n - 1) as f64,
            );
            format!("{},{},{}", p.x, p.y, field.eval(p))
        }),
    )?;
    write_json(
        &out.join("extension_report.json"),
        &json!({
            "cutoff": ext.cutoff,
            "support_hull": ext.support_hull(),
            "exterior_cubes": ext.exterior.len(),
            "interior_cubes": ext.interior.len(),
            "pass": true,
        }),
    )?;
    Ok(true)
}

fn cmd_seminorm(config: &RunConfig, out: &Path) -> crate::Result<bool> {
    let domain = domain_from(config)?;
    let m = modulus_from(config)?;
    let f = build_field(config, &domain)?;
    let cov = build_whitney(&domain, Side::Interior, config.min_level)?;
    let sampler = CubeSampler::domain_anchored(&domain, &cov, config.seed, 1000, 20_000);
    let report = campanato_seminorm(
        &f,
        Some(&domain),
        &m,
        config.p,
        &sampler,
        config.interior,
        32,
    )?;
    write_csv(
        &out.join("seminorm.csv"),
        "oscillation-records",
        "center_x,center_y,side,best_constant,oscillation,ratio",
        report.records.iter().map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.center.x, r.center.y, r.side, r.best_constant, r.oscillation, r.ratio
            )
        }),
    )?;
    let pass = config
        .threshold
        .map(|t| report.sup_ratio <= t)
        .unwrap_or(true);
    write_json(
        &out.join("seminorm_report.json"),
        &json!({
            "sup_ratio": report.sup_ratio,
            "cubes": report.records.len(),
            "p": report.p,
            "interior": report.interior,
            "threshold": config.threshold,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn cmd_tchi(config: &RunConfig, out: &Path) -> crate::Result<bool> {
    let domain = domain_from(config)?;
    let k = kernel_from(config)?;
    let field = tchi_field(&domain, &k, config.grid_n, config.tol)?;
    let bbox = domain.bounding_box().inflate(1.05);
    let n = config.grid_n;
    let mut max_abs = 0.0f64;
    let mut rows = Vec::with_capacity(n * n);
    for idx in 0..n * n {
        let (i, j) = (idx % n, idx / n);
        let p = Point::new(
            bbox.x0 + bbox.width() * i as f64 / (n - 1) as f64,
            bbox.y0 + bbox.height() * j as f64 / (n - 1) as f64,
        );
        let v = field.eval(p);
        max_abs = max_abs.max(v.abs());
        rows.push(format!("{},{},{}", p.x, p.y, v));
    }
    write_csv(
        &out.join("tchi.csv"),
        "field-raster",
        "x,y,value",
        rows.into_iter(),
    )?;
    write_json(
        &out.join("tchi_report.json"),
        &json!({ "max_abs": max_abs, "grid_n": n, "tol": config.tol, "pass": true }),
    )?;
    Ok(true)
}

fn cmd_grad_profile(config: &RunConfig, out: &Path) -> crate::Result<bool> {
    let domain = domain_from(config)?;
    let k = kernel_from(config)?;
    let m = modulus_from(config)?;
    let deltas = log_spaced(config.delta_range[0], config.delta_range[1], config.delta_count);
    let rows = bloch_profile(&domain, &k, &m, &deltas, 1)?;
    write_csv(
        &out.join("grad_profile.csv"),
        "grad-profile",
        "delta,grad_norm,ratio",
        rows.iter()
            .map(|r| format!("{},{},{}", r.delta, r.grad_norm, r.ratio)),
    )?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let max = ratios.iter().cloned().fold(0.0f64, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let band = if min > 0.0 { max / min } else { f64::INFINITY };
    let pass = config.threshold.map(|t| band <= t).unwrap_or(true);
    write_json(
        &out.join("grad_profile_report.json"),
        &json!({
            "max_ratio": max,
            "min_ratio": min,
            "band": band,
            "threshold": config.threshold,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn cmd_t1check(config: &RunConfig, out: &Path) -> crate::Result<bool> {
    let domain = domain_from(config)?;
    let k = kernel_from(config)?;
    let m = modulus_from(config)?;
    let mut t1cfg = T1Config {
        grid_n: config.grid_n,
        tol: config.tol,
        seed: config.seed,
        min_level: config.min_level,
        ..Default::default()
    };
    if let Some(t) = config.threshold {
        t1cfg.sup_threshold = t;
    }
    let report = t1_check(&domain, &k, &m, &t1cfg)?;
    write_csv(
        &out.join("t1_oscillation.csv"),
        "oscillation-records",
        "center_x,center_y,side,best_constant,oscillation,ratio",
        report.oscillation.records.iter().map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.center.x, r.center.y, r.side, r.best_constant, r.oscillation, r.ratio
            )
        }),
    )?;
    let pass = report.verdict_pass;
    write_json(
        &out.join("t1_report.json"),
        &serde_json::to_value(&report).unwrap(),
    )?;
    Ok(pass)
}

fn cmd_cancellation(config: &RunConfig, out: &Path) -> crate::Result<bool> {
    let domain = domain_from(config)?;
    let k = kernel_from(config)?;
    let radius = match domain.as_ref() {
        Domain::Ball(b) => b.radius,
        _ => return Err(Error::Config("cancellation needs a ball domain".into())),
    };
    // Seeded interior probes with rho >= radius/10.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let center = match domain.as_ref() {
        Domain::Ball(b) => b.center,
        _ => unreachable!(),
    };
    let mut probes = Vec::new();
    while probes.len() < config.probes {
        let p = Point::new(
            center.x + rng.gen_range(-radius..radius),
            center.y + rng.gen_range(-radius..radius),
        );
        if domain.contains(p) && domain.dist_to_boundary_fast(p) >= radius / 10.0 {
            probes.push(p);
        }
    }
    let report = cancellation_report(&domain, &k, &probes, &PvParams::with_tol(config.tol))?;
    write_csv(
        &out.join("cancellation.csv"),
        "cancellation-probes",
        "x,y,tchi",
        report
            .values
            .iter()
            .map(|(p, v)| format!("{},{},{}", p.x, p.y, v)),
    )?;
    let threshold = config.threshold.unwrap_or(1e-4);
    let pass = report.max_abs <= threshold;
    write_json(
        &out.join("cancellation_report.json"),
        &json!({
            "kernel": report.kernel,
            "max_abs": report.max_abs,
            "threshold": threshold,
            "probes": report.values.len(),
            "pass": pass,
        }),
    )?;
    Ok(pass)
}
