use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use biscat_core::harness::{self, Check};
use biscat_core::specfun::{self, HankelPath};
use biscat_core::threshold::{self, ThresholdContext};
use biscat_core::waveop::{self, WaveMode, WaveOperatorConfig};
use biscat_core::{io, operators, Complex64, Field, PotentialSpec, TestFunction};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "biscat", version, about = "Scattering diagnostics for the fourth-order Schrodinger operator on the plane")]
struct Cli {
    /// JSON config with `grid`, `quadrature` and `tolerance` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tabular CSV output instead of JSON, where the command supports it.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Kernel evaluations.
    Kernel {
        #[command(subcommand)]
        cmd: KernelCmd,
    },
    /// Zero-energy classification.
    Classify {
        #[arg(long)]
        potential: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the report to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Threshold-expansion norms over a λ sweep.
    Expand {
        #[arg(long)]
        potential: String,
        #[arg(long, value_delimiter = ',')]
        lambda_sweep: Vec<f64>,
    },
    /// Apply W₋ to a field file.
    Waveop(WaveArgs),
    /// Run verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Empirical L^p stability scan.
    LpScan {
        #[arg(long)]
        op: String,
        #[arg(long, default_value = "4/3,2,4")]
        p: String,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        res: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// `H₀⁽¹⁾(zr)` on the chosen path and the resolvent kernel `R(z, r)`.
    Eval {
        /// Spectral parameter `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum, default_value = "series")]
        path: PathArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Series,
    Integral,
}

#[derive(Args)]
struct WaveArgs {
    #[arg(long)]
    potential: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// `full-inverse`, `born N`, `low-energy-only`, `high-energy-only`.
    #[arg(long, num_args = 1..=2, default_values = ["full-inverse"])]
    mode: Vec<String>,
    /// Spectral annulus `lo,hi` of the input; estimated from the spectrum when omitted.
    #[arg(long, value_delimiter = ',')]
    annulus: Vec<f64>,
    /// Also write the metrics to this file.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct Config {
    grid: GridSection,
    quadrature: QuadSection,
    tolerance: TolSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct GridSection {
    /// Points per side of the operator grid.
    n: Option<usize>,
    half_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct QuadSection {
    wave_nodes: Option<usize>,
    circle_nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct TolSection {
    classify: Option<f64>,
    inv: Option<f64>,
    /// Relative spectral level used to estimate an input annulus.
    annulus: Option<f64>,
}

fn load_config(path: Option<&PathBuf>) -> Result<Config> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(Config::default()),
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BISCAT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("BISCAT_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn emit<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().with_context(|| format!("bad number `{t}`"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => bail!("expected `re,im`, got `{s}`"),
    }
}

fn operator_grid(cfg: &Config) -> Result<biscat_core::PlaneGrid> {
    let g = operators::operator_grid();
    Ok(biscat_core::PlaneGrid::new(cfg.grid.n.unwrap_or(g.n()), cfg.grid.half_width.unwrap_or(g.half_width()))?)
}

/// Smallest annulus holding every dual node with `|û| > rel · max|û|`.
fn estimate_annulus(u: &Field, rel: f64) -> (f64, f64) {
    let s = u.spectrum();
    let cut = rel * s.max_abs();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (idx, v) in s.data.iter().enumerate() {
        if v.norm() > cut {
            let (a, b) = s.grid.freq_point(idx);
            let r = a.hypot(b);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

fn parse_mode(parts: &[String]) -> Result<WaveMode> {
    Ok(match parts.first().map(String::as_str) {
        Some("full-inverse") | None => WaveMode::FullInverse,
        Some("born") => {
            let n = parts.get(1).context("`--mode born` needs an order")?.parse()?;
            WaveMode::Born(n)
        }
        Some("low-energy-only") => WaveMode::LowEnergyOnly,
        Some("high-energy-only") => WaveMode::HighEnergyOnly,
        Some(m) => bail!("unknown mode `{m}`"),
    })
}

#[derive(Serialize)]
struct KernelEval {
    z: [f64; 2],
    r: f64,
    path: &'static str,
    h01: [f64; 2],
    resolvent: [f64; 2],
}

#[derive(Serialize)]
struct WaveOutput {
    mode: WaveMode,
    annulus: [f64; 2],
    #[serde(flatten)]
    metrics: waveop::WaveMetrics,
}

fn print_checks_csv(checks: &[Check]) {
    println!("suite,name,value,tolerance,pass");
    for c in checks {
        println!("{},\"{}\",{:e},{:e},{}", c.suite, c.name, c.value, c.tolerance, c.pass);
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    init_threads()?;
    let cfg = load_config(cli.config.as_ref())?;
    match cli.cmd {
        Cmd::Kernel { cmd: KernelCmd::Eval { z, r, path } } => {
            let z = parse_complex(&z)?;
            let (hp, name) = match path {
                PathArg::Series => (HankelPath::Series, "series"),
                PathArg::Integral => (HankelPath::Integral, "integral"),
            };
            let h = specfun::hankel_h01(z * r, hp)?;
            let k = specfun::ComplexKernel::new(specfun::KernelKind::BiharmonicResolvent).eval(z, r)?;
            emit(&KernelEval { z: [z.re, z.im], r, path: name, h01: [h.re, h.im], resolvent: [k.re, k.im] })?;
        }
        Cmd::Classify { potential, tol, json } => {
            let spec: PotentialSpec = potential.parse()?;
            let p = operators::load_potential(&spec, operator_grid(&cfg)?)?;
            let proj = threshold::build_projections(&p)?;
            let tol = tol.or(cfg.tolerance.classify).unwrap_or(threshold::CLASSIFY_TOL);
            let rep = threshold::classify_zero_energy(&p, &proj, tol)?;
            let text = serde_json::to_string_pretty(&rep)?;
            if let Some(path) = json {
                std::fs::write(&path, &text)?;
            }
            println!("{text}");
        }
        Cmd::Expand { potential, lambda_sweep } => {
            if lambda_sweep.is_empty() {
                bail!("--lambda-sweep needs at least one value");
            }
            let spec: PotentialSpec = potential.parse()?;
            let p = operators::load_potential(&spec, operator_grid(&cfg)?)?;
            let ctx = ThresholdContext::new(&p)?;
            let diag = threshold::expansion_sweep(&ctx, &lambda_sweep)?;
            if cli.csv {
                let keys: Vec<String> = diag.sweeps[0].norms.keys().cloned().collect();
                println!("lambda,{}", keys.join(","));
                for s in &diag.sweeps {
                    let row: Vec<String> = keys.iter().map(|k| format!("{:e}", s.norms[k])).collect();
                    println!("{},{}", s.lambda, row.join(","));
                }
            } else {
                emit(&diag)?;
            }
        }
        Cmd::Waveop(a) => {
            let spec: PotentialSpec = a.potential.parse()?;
            let field = io::read_field(&a.input)?;
            let (lo, hi) = match a.annulus.as_slice() {
                [lo, hi] => (*lo, *hi),
                [] => estimate_annulus(&field, cfg.tolerance.annulus.unwrap_or(1e-6)),
                _ => bail!("--annulus expects `lo,hi`"),
            };
            let u = TestFunction::from_field(field, lo, hi)?;
            let p = operators::load_potential(&spec, u.grid())?;
            let mut wc = WaveOperatorConfig { mode: parse_mode(&a.mode)?, ..Default::default() };
            if let Some(n) = cfg.quadrature.wave_nodes {
                wc.nodes = n;
            }
            if let Some(n) = cfg.quadrature.circle_nodes {
                wc.circle_nodes = n;
            }
            if let Some(t) = cfg.tolerance.inv {
                wc.inv_tol = t;
            }
            let wu = waveop::apply_side(&u, &p, &wc, waveop::Side::Minus)?;
            io::write_field(&a.out, &wu)?;
            let out = WaveOutput { mode: wc.mode.clone(), annulus: [lo, hi], metrics: waveop::wave_metrics(&u, &p, &wc)? };
            let text = serde_json::to_string_pretty(&out)?;
            if let Some(path) = a.metrics {
                std::fs::write(&path, &text)?;
            }
            println!("{text}");
        }
        Cmd::Verify { suite } => {
            let checks = harness::verify_suite(&suite)?;
            if cli.csv {
                print_checks_csv(&checks);
            } else {
                emit(&checks)?;
            }
            if checks.iter().any(|c| !c.pass) {
                std::process::exit(1);
            }
        }
        Cmd::LpScan { op, p, res, seed } => {
            let ps = harness::parse_p_list(&p)?;
            let rep = harness::lp_scan(&op, &ps, &res, seed)?;
            if cli.csv {
                let head: Vec<String> = rep.resolutions.iter().map(|n| format!("n{n}")).collect();
                println!("p,{},spread,stable", head.join(","));
                for (row, v) in rep.table.iter().zip(&rep.verdicts) {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
                    println!("{},{},{:e},{}", v.p, cells.join(","), v.spread, v.stable);
                }
            } else {
                emit(&rep)?;
            }
        }
    }
    Ok(())
}
