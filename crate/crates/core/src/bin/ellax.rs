//! Command-line front end: runs constructions and verification suites and
//! emits JSON reports.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_traits::Zero;

use ellax::gs::GsBasis;
use ellax::lie::RootSystem;
use ellax::rat::{rvec_add, rvec_scale, Rat};
use ellax::report::{self, rat_str, ConfigEcho, ReportDocument, Tolerances, TAU_DEFAULT};
use ellax::transition::{compute_kappa, find_lambda, invariant_cartan};

#[derive(Parser)]
#[command(name = "ellax", version, about = "elliptic Lax operators and r-matrices over root systems")]
struct Cli {
    /// config file with "key = value" lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    algebra: Option<String>,
    /// class generator node (1-based minuscule node)
    #[arg(long, global = true)]
    class: Option<usize>,
    /// tau as "re,im"
    #[arg(long, global = true)]
    tau: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tols: TolArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long = "tol-gram", global = true)]
    gram: Option<f64>,
    #[arg(long = "tol-elliptic", global = true)]
    elliptic: Option<f64>,
    #[arg(long = "tol-lax-qp", global = true)]
    lax_qp: Option<f64>,
    #[arg(long = "tol-lax-residue", global = true)]
    lax_residue: Option<f64>,
    #[arg(long = "tol-ham", global = true)]
    ham: Option<f64>,
    #[arg(long = "tol-rll", global = true)]
    rll: Option<f64>,
    #[arg(long = "tol-cybe", global = true)]
    cybe: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// root-system and center data
    Info { algebra: Option<String> },
    /// kappa, the diagram symmetry lambda and the invariant Cartan
    Transition { algebra: Option<String> },
    /// graded-basis checks: Gram closed forms, eigenvectors, grading
    Gs { algebra: Option<String> },
    /// Lax quasi-periodicity and residue checks
    LaxVerify { algebra: Option<String> },
    /// E2-fit of (1/2)(L,L) against the closed-form Hamiltonians
    Hamiltonians { algebra: Option<String> },
    /// dynamical RLL identity residuals
    VerifyRll { algebra: Option<String> },
    /// classical dynamical Yang-Baxter residuals
    VerifyCybe { algebra: Option<String> },
    /// Fay identities and kernel quasi-periodicities
    VerifyFay,
    /// conformal-degree table
    Degrees,
    /// characteristic class of a coweight, e.g. "w3+w3" or "2w1"
    Class {
        algebra: Option<String>,
        coweight: Option<String>,
    },
    /// full verification suite
    All { algebra: Option<String> },
}

struct Config {
    algebra: Option<String>,
    class: Option<usize>,
    tau: Complex64,
    seed: u64,
    samples: usize,
    out: Option<PathBuf>,
    tols: Tolerances,
}

fn usage_err(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn parse_tau(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("bad tau '{s}': expected re,im"));
    }
    let re: f64 = parts[0].trim().parse().map_err(|e| format!("bad tau re: {e}"))?;
    let im: f64 = parts[1].trim().parse().map_err(|e| format!("bad tau im: {e}"))?;
    Ok(Complex64::new(re, im))
}

fn build_config(cli: &Cli) -> Result<Config, String> {
    // defaults < config file < flags
    let mut algebra = None;
    let mut class = None;
    let mut tau = Complex64::new(TAU_DEFAULT.0, TAU_DEFAULT.1);
    let mut seed = 1u64;
    let mut samples = 20usize;
    let mut out = None;
    let mut tols = Tolerances::default();

    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("bad config line '{line}'"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "algebra" => algebra = Some(value.to_string()),
                "class" => class = Some(value.parse().map_err(|e| format!("class: {e}"))?),
                "tau" => tau = parse_tau(value)?,
                "seed" => seed = value.parse().map_err(|e| format!("seed: {e}"))?,
                "samples" => samples = value.parse().map_err(|e| format!("samples: {e}"))?,
                "out" => out = Some(PathBuf::from(value)),
                "tol-gram" => tols.gram = value.parse().map_err(|e| format!("{key}: {e}"))?,
                "tol-elliptic" => tols.elliptic = value.parse().map_err(|e| format!("{key}: {e}"))?,
                "tol-lax-qp" => tols.lax_qp = value.parse().map_err(|e| format!("{key}: {e}"))?,
                "tol-lax-residue" => {
                    tols.lax_residue = value.parse().map_err(|e| format!("{key}: {e}"))?
                }
                "tol-ham" => tols.ham = value.parse().map_err(|e| format!("{key}: {e}"))?,
                "tol-rll" => tols.rll = value.parse().map_err(|e| format!("{key}: {e}"))?,
                "tol-cybe" => tols.cybe = value.parse().map_err(|e| format!("{key}: {e}"))?,
                _ => return Err(format!("unknown config key '{key}'")),
            }
        }
    }

    if let Some(a) = &cli.algebra {
        algebra = Some(a.clone());
    }
    if let Some(c) = cli.class {
        class = Some(c);
    }
    if let Some(t) = &cli.tau {
        tau = parse_tau(t)?;
    }
    if let Some(s) = cli.seed {
        seed = s;
    }
    if let Some(s) = cli.samples {
        samples = s;
    }
    if let Some(o) = &cli.out {
        out = Some(o.clone());
    }
    let t = &cli.tols;
    if let Some(v) = t.gram {
        tols.gram = v;
    }
    if let Some(v) = t.elliptic {
        tols.elliptic = v;
    }
    if let Some(v) = t.lax_qp {
        tols.lax_qp = v;
    }
    if let Some(v) = t.lax_residue {
        tols.lax_residue = v;
    }
    if let Some(v) = t.ham {
        tols.ham = v;
    }
    if let Some(v) = t.rll {
        tols.rll = v;
    }
    if let Some(v) = t.cybe {
        tols.cybe = v;
    }

    if tau.im < 0.1 {
        return Err(format!("Im tau = {} is below 0.1", tau.im));
    }
    if samples == 0 {
        return Err("samples must be at least 1".into());
    }
    Ok(Config {
        algebra,
        class,
        tau,
        seed,
        samples,
        out,
        tols,
    })
}

fn resolve_algebra(
    positional: &Option<String>,
    cfg: &Config,
) -> Result<RootSystem, String> {
    let label = positional
        .clone()
        .or_else(|| cfg.algebra.clone())
        .ok_or("no algebra given (positional or --algebra)")?;
    RootSystem::from_label(&label).map_err(|e| e.to_string())
}

/// default class node: the first minuscule node, or the requested one.
fn resolve_node(rs: &RootSystem, cfg: &Config) -> Result<usize, String> {
    let nodes = rs.minuscule_nodes();
    match cfg.class {
        Some(n) if nodes.contains(&n) => Ok(n),
        Some(n) => Err(format!(
            "node {n} is not a class generator of {} (candidates: {nodes:?})",
            rs.label()
        )),
        None => Ok(nodes[0]),
    }
}

/// "w3+w3", "2w1+w2", "0": integer combination of fundamental coweights.
fn parse_coweight(rs: &RootSystem, expr: &str) -> Result<Vec<Rat>, String> {
    let mut gamma = vec![Rat::zero(); rs.rank];
    if expr.trim() == "0" {
        return Ok(gamma);
    }
    for term in expr.split('+') {
        let term = term.trim();
        let (count, node) = match term.split_once('w') {
            Some(("", node)) => (1i64, node),
            Some((c, node)) => (
                c.parse().map_err(|e| format!("bad coefficient '{c}': {e}"))?,
                node,
            ),
            None => return Err(format!("bad coweight term '{term}' (expected e.g. 2w3)")),
        };
        let node: usize = node.parse().map_err(|e| format!("bad node '{node}': {e}"))?;
        if node == 0 || node > rs.rank {
            return Err(format!("node {node} out of range for {}", rs.label()));
        }
        gamma = rvec_add(
            &gamma,
            &rvec_scale(&rs.coweights[node - 1], Rat::from_integer(count)),
        );
    }
    Ok(gamma)
}

fn echo(cfg: &Config, rs: Option<&RootSystem>, node: Option<usize>) -> ConfigEcho {
    ConfigEcho {
        algebra: rs.map(|r| r.label()),
        class_node: node,
        tau: [cfg.tau.re, cfg.tau.im],
        seed: cfg.seed,
        samples: cfg.samples,
        tolerances: cfg.tols.clone(),
    }
}

fn emit(cfg: &Config, mut doc: ReportDocument) -> ExitCode {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default();
    doc.generated_at = Some(stamp);
    let json = serde_json::to_string_pretty(&doc).expect("report serializes");
    if let Some(path) = &cfg.out {
        if let Err(e) = fs::write(path, &json) {
            return usage_err(format!("writing {}: {e}", path.display()));
        }
        // human-readable table when the JSON goes to a file
        for c in &doc.checks {
            match c.residual {
                Some(r) => println!(
                    "{:6} {:<55} {:>10.2e} (tol {:.0e})",
                    c.status,
                    c.name,
                    r,
                    c.tolerance.unwrap_or(f64::NAN)
                ),
                None => println!("{:6} {:<55}      exact", c.status, c.name),
            }
        }
        println!("summary: {}", doc.summary);
    } else {
        println!("{json}");
    }
    if doc.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: &Cli, cfg: &Config) -> Result<ExitCode, String> {
    let tols = &cfg.tols;
    match &cli.cmd {
        Cmd::Info { algebra } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let doc = ReportDocument::new(
                "info",
                echo(cfg, Some(&rs), None),
                Some(report::info_data(&rs)),
                vec![],
            );
            Ok(emit(cfg, doc))
        }
        Cmd::Transition { algebra } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let node = resolve_node(&rs, cfg)?;
            let kappa = compute_kappa(&rs);
            let lam = find_lambda(&rs, node).map_err(|e| e.to_string())?;
            let inv = invariant_cartan(&rs, &lam).map_err(|e| e.to_string())?;
            let data = serde_json::json!({
                "kappa": kappa.iter().map(|r| rat_str(*r)).collect::<Vec<_>>(),
                "node": node,
                "lambda_order": lam.order,
                "invariant_cartan_dim": inv.kernel.len(),
                "invariant_cartan_basis": inv.kernel.iter()
                    .map(|b| b.iter().map(|r| rat_str(*r)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            });
            let checks = report::transition_suite()
                .into_iter()
                .filter(|c| c.name.contains(&format!("transition {} ", rs.label())))
                .collect();
            let doc =
                ReportDocument::new("transition", echo(cfg, Some(&rs), Some(node)), Some(data), checks);
            Ok(emit(cfg, doc))
        }
        Cmd::Gs { algebra } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let node = resolve_node(&rs, cfg)?;
            let label = rs.label();
            let gs = GsBasis::new(rs, node).map_err(|e| e.to_string())?;
            let inv =
                ellax::gs::identify_invariant_subalgebra(&gs).map_err(|e| e.to_string())?;
            let data = serde_json::json!({
                "order": gs.l,
                "dim": gs.dim,
                "root_orbits": gs.orbits.root_orbits.len(),
                "grades": gs.grades,
                "invariant_type": inv.tilde_type,
                "dim_invariant": inv.dim_tilde,
                "dim_g0": inv.dim_g0,
            });
            let mut checks = report::gs_suite(&label, node, tols.gram, cfg.seed);
            checks.extend(
                report::table4_suite()
                    .into_iter()
                    .filter(|c| c.name.contains(&format!("{label} node {node}"))),
            );
            let doc = ReportDocument::new(
                "gs",
                echo(cfg, Some(&gs.rs), Some(node)),
                Some(data),
                checks,
            );
            Ok(emit(cfg, doc))
        }
        Cmd::LaxVerify { algebra } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let node = resolve_node(&rs, cfg)?;
            let checks =
                report::lax_case(&rs.label(), node, cfg.tau, cfg.seed, cfg.samples, tols);
            let doc = ReportDocument::new("lax-verify", echo(cfg, Some(&rs), Some(node)), None, checks);
            Ok(emit(cfg, doc))
        }
        Cmd::Hamiltonians { algebra } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let node = resolve_node(&rs, cfg)?;
            let checks = report::hamiltonian_case(&rs.label(), node, cfg.tau, cfg.seed, tols);
            let doc =
                ReportDocument::new("hamiltonians", echo(cfg, Some(&rs), Some(node)), None, checks);
            Ok(emit(cfg, doc))
        }
        Cmd::VerifyRll { algebra } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let node = resolve_node(&rs, cfg)?;
            let checks = report::rll_case(&rs.label(), node, cfg.tau, cfg.seed, cfg.samples, tols);
            let doc =
                ReportDocument::new("verify-rll", echo(cfg, Some(&rs), Some(node)), None, checks);
            Ok(emit(cfg, doc))
        }
        Cmd::VerifyCybe { algebra } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let node = resolve_node(&rs, cfg)?;
            let checks = report::cybe_case(&rs.label(), node, cfg.tau, cfg.seed, cfg.samples, tols);
            let doc =
                ReportDocument::new("verify-cybe", echo(cfg, Some(&rs), Some(node)), None, checks);
            Ok(emit(cfg, doc))
        }
        Cmd::VerifyFay => {
            let checks = report::elliptic_suite(cfg.seed, 1000, tols.elliptic);
            let doc = ReportDocument::new("verify-fay", echo(cfg, None, None), None, checks);
            Ok(emit(cfg, doc))
        }
        Cmd::Degrees => {
            let checks = report::degrees_suite();
            let doc = ReportDocument::new(
                "degrees",
                echo(cfg, None, None),
                Some(report::degrees_data()),
                checks,
            );
            Ok(emit(cfg, doc))
        }
        Cmd::Class { algebra, coweight } => {
            let rs = resolve_algebra(algebra, cfg)?;
            let coweight = coweight
                .as_deref()
                .ok_or("class needs a coweight expression, e.g. 'class A3 w3+w3'")?;
            let gamma = parse_coweight(&rs, coweight)?;
            let data = report::class_data(&rs, &gamma).map_err(|e| e.to_string())?;
            let doc = ReportDocument::new("class", echo(cfg, Some(&rs), None), Some(data), vec![]);
            Ok(emit(cfg, doc))
        }
        Cmd::All { algebra } => {
            let checks = match algebra.clone().or_else(|| cfg.algebra.clone()) {
                Some(label) => {
                    let rs = RootSystem::from_label(&label).map_err(|e| e.to_string())?;
                    let node = resolve_node(&rs, cfg)?;
                    report::all_for_algebra(&rs.label(), node, cfg.tau, cfg.seed, cfg.samples, tols)
                }
                None => report::acceptance_checks(cfg.tau, cfg.seed, cfg.samples, tols),
            };
            let rs = algebra
                .clone()
                .or_else(|| cfg.algebra.clone())
                .and_then(|l| RootSystem::from_label(&l).ok());
            let doc = ReportDocument::new("all", echo(cfg, rs.as_ref(), cfg.class), None, checks);
            Ok(emit(cfg, doc))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => return usage_err(e),
    };
    match run(&cli, &cfg) {
        Ok(code) => code,
        Err(e) => usage_err(e),
    }
}
