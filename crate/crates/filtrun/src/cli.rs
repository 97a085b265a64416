//! Command-line interface: bounds, simulate, sweep, psi, validate.
//!
//! Every run writes a CSV to `--out` and a JSON mirror (same rows plus the
//! full configuration echo) next to it with the extension replaced by
//! `.json`. Floats are printed with nine significant digits, and identical
//! `(command, seed)` pairs produce byte-identical files regardless of thread
//! count.
//!
//! Exit codes: 0 success, 1 validation failure, 2 bad input or
//! configuration.

use crate::adversary::{lower_bound_diagonal, lower_bound_correlation, AdvAStrategy};
use crate::asymptotics::{ProblemFamily, PsiCurve};
use crate::error::{Error, Result};
use crate::filtrun::{build_classifier, upper_bound_diagonal, upper_bound_general, BoundReport};
use crate::gmm::{load_problem, CoordSet, GmmProblem};
use crate::harness::{
    mc_error_under_adv, mc_robust_error_with_budget, sweep, validate_oracles, FSelector, Suite,
    SweepRow,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "filtrun",
    about = "Robust Gaussian-mixture classification under sparse (l0) attacks",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the closed-form error bounds for one problem and budget
    Bounds(BoundsArgs),
    /// Monte Carlo robust-error estimate under an exact or randomized attack
    Simulate(SimulateArgs),
    /// Sweep the adversary budget and tabulate estimate plus bounds per row
    Sweep(SweepArgs),
    /// Sample the budget-exponent curve of a problem family
    Psi(PsiArgs),
    /// Run the brute-force validation suites
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct ProblemSource {
    /// JSON problem file ({"mu": [..], "sigma": {"diag"|"dense": ..}, "normalize": bool})
    #[arg(long, conflicts_with = "family")]
    pub problem: Option<PathBuf>,
    /// Built-in family: uniform | spiked | log-block
    #[arg(long)]
    pub family: Option<String>,
    /// Dimension (uniform/spiked; for log-block must equal 2^n - 1)
    #[arg(long = "d")]
    pub d: Option<usize>,
    /// Block count for the log-block family
    #[arg(long)]
    pub nblocks: Option<usize>,
}

impl ProblemSource {
    fn resolve(&self) -> Result<(GmmProblem, String)> {
        match (&self.problem, &self.family) {
            (Some(path), None) => Ok((load_problem(path)?, path.display().to_string())),
            (None, Some(name)) => {
                let family = ProblemFamily::parse(name)?;
                let param = match family {
                    ProblemFamily::LogBlock => match (self.nblocks, self.d) {
                        (Some(n), _) => n,
                        (None, Some(d)) => blocks_from_dim(d)?,
                        (None, None) => {
                            return Err(Error::InvalidArgument(
                                "log-block family needs --nblocks N or --d (2^n - 1)".into(),
                            ))
                        }
                    },
                    _ => self.d.ok_or_else(|| {
                        Error::InvalidArgument(format!("family '{name}' needs --d N"))
                    })?,
                };
                Ok((family.problem(param)?, name.clone()))
            }
            _ => Err(Error::InvalidArgument(
                "exactly one of --problem FILE or --family NAME is required".into(),
            )),
        }
    }
}

fn blocks_from_dim(d: usize) -> Result<usize> {
    let n = (d + 1).trailing_zeros() as usize;
    if d >= 3 && (1usize << n) == d + 1 {
        Ok(n)
    } else {
        Err(Error::InvalidArgument(format!(
            "log-block dimension must be 2^n - 1, got {d}"
        )))
    }
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Adversary budget
    #[arg(long = "k")]
    pub k: usize,
    /// Filtration set: suffix:R | auto-diag | auto-min | full
    #[arg(long = "F", default_value = "auto-min")]
    pub f: String,
    /// Output CSV path (JSON mirror written alongside)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Adversary budget (and classifier truncation level where feasible)
    #[arg(long = "k")]
    pub k: usize,
    /// Monte Carlo sample count
    #[arg(long = "n")]
    pub n: usize,
    /// Base seed; every sample derives its own substream
    #[arg(long)]
    pub seed: u64,
    /// Attack: exact worst case or the randomized erasure strategy
    #[arg(long, default_value = "exact", value_parser = ["exact", "adv-a"])]
    pub attack: String,
    /// Attack set for adv-a: top:M (by whitened-mean magnitude) or all
    #[arg(long = "A")]
    pub a: Option<String>,
    /// Output CSV path (JSON mirror written alongside)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Built-in family: uniform | spiked | log-block
    #[arg(long)]
    pub family: String,
    /// Dimension (for log-block must equal 2^n - 1)
    #[arg(long = "d")]
    pub d: usize,
    /// Budget grid A:B:STEP (inclusive)
    #[arg(long = "k-grid")]
    pub k_grid: String,
    /// Monte Carlo sample count per row
    #[arg(long = "n")]
    pub n: usize,
    /// Base seed
    #[arg(long)]
    pub seed: u64,
    /// Filtration policy: suffix:R | auto-diag | auto-min | full
    #[arg(long = "select", default_value = "auto-diag")]
    pub select: String,
    /// Output CSV path (JSON mirror written alongside)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PsiArgs {
    /// Built-in family: uniform | spiked | log-block
    #[arg(long)]
    pub family: String,
    /// Block count for the log-block family
    #[arg(long, conflicts_with = "d")]
    pub nblocks: Option<usize>,
    /// Dimension (uniform/spiked; for log-block must equal 2^n - 1)
    #[arg(long = "d")]
    pub d: Option<usize>,
    /// Level grid A:B:STEP over c in (0, 1]
    #[arg(long = "c-grid")]
    pub c_grid: String,
    /// Output CSV path (JSON mirror written alongside)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Seed for the randomized oracles
    #[arg(long)]
    pub seed: u64,
    /// Which suite to run
    #[arg(long, default_value = "all", value_parser = ["all", "trunc", "attack", "adv", "bounds"])]
    pub suite: String,
}

/// Nine significant digits, locale-free.
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

fn parse_k_grid(text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "k-grid must be A:B:STEP, got '{text}'"
        )));
    }
    let a: usize = parts[0]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid start '{}'", parts[0])))?;
    let b: usize = parts[1]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid end '{}'", parts[1])))?;
    let step: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid step '{}'", parts[2])))?;
    if step == 0 || b < a {
        return Err(Error::InvalidArgument(format!("empty grid '{text}'")));
    }
    Ok((a..=b).step_by(step).collect())
}

fn parse_c_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "c-grid must be A:B:STEP, got '{text}'"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid start '{}'", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid end '{}'", parts[1])))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid step '{}'", parts[2])))?;
    if step.is_nan() || step <= 0.0 || b < a || a <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "c-grid must be increasing within (0, 1], got '{text}'"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let c = a + i as f64 * step;
        if c > b + 1e-12 {
            break;
        }
        grid.push(c.min(1.0));
        i += 1;
    }
    Ok(grid)
}

fn parse_attack_set(text: &str, problem: &GmmProblem) -> Result<CoordSet> {
    let d = problem.dim();
    if text == "all" {
        return Ok(CoordSet::full(d));
    }
    if let Some(rest) = text.strip_prefix("top:") {
        let m: usize = rest
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad attack set size '{rest}'")))?;
        if m == 0 || m > d {
            return Err(Error::InvalidArgument(format!(
                "attack set size {m} out of range 1..={d}"
            )));
        }
        let nu = problem.nu();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            nu[b]
                .abs()
                .partial_cmp(&nu[a].abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut idx: Vec<usize> = order[..m].to_vec();
        idx.sort_unstable();
        return CoordSet::new(idx, d);
    }
    Err(Error::InvalidArgument(format!(
        "attack set must be top:M or all, got '{text}'"
    )))
}

fn write_outputs(out: &Path, csv: &str, mirror: serde_json::Value) -> Result<()> {
    std::fs::write(out, csv)?;
    let json_path = out.with_extension("json");
    let mut text = serde_json::to_string_pretty(&mirror)
        .map_err(|e| Error::InvalidArgument(format!("json serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(json_path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct BoundRowOut {
    kind: String,
    budget: f64,
    value: f64,
    phi_bar_arg: Option<f64>,
    additive_slack: Option<f64>,
    raw_value: Option<f64>,
    f_size: usize,
}

fn bound_row(report: &BoundReport, f_size: usize) -> BoundRowOut {
    let kind = match report.kind {
        crate::filtrun::BoundKind::UpperGeneral => "upper-general",
        crate::filtrun::BoundKind::UpperDiagonal => "upper-diagonal",
        crate::filtrun::BoundKind::LowerDiagonal => "lower-diagonal",
        crate::filtrun::BoundKind::LowerCorrelation => "lower-correlation",
    };
    BoundRowOut {
        kind: kind.to_string(),
        budget: report.budget,
        value: report.value,
        phi_bar_arg: report.components.map(|c| c.phi_bar_arg),
        additive_slack: report.components.map(|c| c.additive_slack),
        raw_value: report.components.map(|c| c.raw_value),
        f_size,
    }
}

/// The longest magnitude-sorted prefix whose erasure budget fits under `k`,
/// scored by `nu` for diagonal problems and `u / sqrt(zeta_min)` otherwise.
fn affordable_attack_prefix(problem: &GmmProblem, k: usize) -> CoordSet {
    let d = problem.dim();
    let ln_d = (d as f64).ln();
    let (score, inflation) = if problem.is_diagonal() {
        (problem.nu().as_slice().to_vec(), 1.0)
    } else {
        (
            problem.u_vector().into_vec(),
            1.0 / problem.zeta_min().sqrt(),
        )
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| score[b].abs().partial_cmp(&score[a].abs()).unwrap());
    let mut acc = 0.0;
    let mut chosen = Vec::new();
    for &i in &order {
        let next = acc + score[i].abs();
        if next * ln_d * inflation > k as f64 + 1e-12 {
            break;
        }
        acc = next;
        chosen.push(i);
    }
    chosen.sort_unstable();
    CoordSet::new(chosen, d).expect("prefix is valid")
}

fn run_bounds(args: &BoundsArgs) -> Result<()> {
    let (problem, source_name) = args.source.resolve()?;
    let selector = FSelector::parse(&args.f)?;
    let selection = selector.select(&problem, args.k)?;
    let f = selection.f;
    let mut rows: Vec<BoundRowOut> = Vec::new();
    if 2 * args.k < f.len() {
        rows.push(bound_row(&upper_bound_general(&problem, &f, args.k)?, f.len()));
        if problem.is_diagonal() {
            rows.push(bound_row(&upper_bound_diagonal(&problem, &f, args.k)?, f.len()));
        }
    } else {
        rows.push(bound_row(
            &BoundReport::vacuous_upper(crate::filtrun::BoundKind::UpperGeneral, args.k as f64),
            f.len(),
        ));
    }
    let attack_set = affordable_attack_prefix(&problem, args.k);
    if problem.is_diagonal() {
        rows.push(bound_row(
            &lower_bound_diagonal(&problem, &attack_set)?,
            f.len(),
        ));
    }
    rows.push(bound_row(
        &lower_bound_correlation(&problem, &attack_set)?,
        f.len(),
    ));

    let mut csv = String::from("kind,budget,value,phi_bar_arg,additive_slack,raw_value,f_size\n");
    for r in &rows {
        let opt = |v: Option<f64>| v.map(fmt9).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.kind,
            fmt9(r.budget),
            fmt9(r.value),
            opt(r.phi_bar_arg),
            opt(r.additive_slack),
            opt(r.raw_value),
            r.f_size
        ));
    }
    let mirror = json!({
        "command": "bounds",
        "config": {
            "source": source_name,
            "d": problem.dim(),
            "k": args.k,
            "F": args.f,
            "saturated_selection": selection.saturated,
        },
        "rows": rows,
    });
    write_outputs(&args.out, &csv, mirror)
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from("d,k,f_size,p_hat,ci_low,ci_high,upper_bound,lower_bound,n,seed\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.d,
            r.k,
            r.f_size,
            fmt9(r.estimate.p_hat),
            fmt9(r.estimate.ci_low),
            fmt9(r.estimate.ci_high),
            fmt9(r.upper.value),
            fmt9(r.lower.value),
            r.estimate.n,
            r.estimate.seed
        ));
    }
    csv
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let family = ProblemFamily::parse(&args.family)?;
    let param = match family {
        ProblemFamily::LogBlock => blocks_from_dim(args.d)?,
        _ => args.d,
    };
    let problem = family.problem(param)?;
    let k_grid = parse_k_grid(&args.k_grid)?;
    let selector = FSelector::parse(&args.select)?;
    let rows = sweep(&problem, &k_grid, args.n, args.seed, selector)?;
    let csv = sweep_csv(&rows);
    let mirror = json!({
        "command": "sweep",
        "config": {
            "family": args.family,
            "d": problem.dim(),
            "k_grid": args.k_grid,
            "n": args.n,
            "seed": args.seed,
            "select": args.select,
        },
        "rows": rows,
    });
    write_outputs(&args.out, &csv, mirror)
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let (problem, source_name) = args.source.resolve()?;
    let selector = if problem.is_diagonal() {
        FSelector::AutoDiag
    } else {
        FSelector::AutoMin
    };
    let selection = selector.select(&problem, args.k)?;
    let f = selection.f;
    let k_trunc = args.k.min((f.len() - 1) / 2);
    let clf = build_classifier(&problem, &f, k_trunc)?;

    let (attack_label, budget, estimate) = match args.attack.as_str() {
        "exact" => {
            let est = mc_robust_error_with_budget(&problem, &clf, args.k, args.n, args.seed)?;
            ("exact".to_string(), args.k as f64, est)
        }
        "adv-a" => {
            let spec = args.a.as_deref().ok_or_else(|| {
                Error::InvalidArgument("--attack adv-a needs --A top:M or --A all".into())
            })?;
            let a = parse_attack_set(spec, &problem)?;
            let strat = AdvAStrategy::new(&problem, a)?;
            let est = mc_error_under_adv(&problem, &clf, &strat, args.n, args.seed)?;
            (format!("adv-a({spec})"), strat.budget(), est)
        }
        other => {
            return Err(Error::InvalidArgument(format!("unknown attack '{other}'")));
        }
    };

    let mut csv = String::from("d,k,f_size,attack,p_hat,ci_low,ci_high,misclassified,n,seed\n");
    csv.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        problem.dim(),
        fmt9(budget),
        f.len(),
        attack_label,
        fmt9(estimate.p_hat),
        fmt9(estimate.ci_low),
        fmt9(estimate.ci_high),
        estimate.misclassified_count,
        estimate.n,
        estimate.seed
    ));
    let mirror = json!({
        "command": "simulate",
        "config": {
            "source": source_name,
            "d": problem.dim(),
            "k": args.k,
            "n": args.n,
            "seed": args.seed,
            "attack": args.attack,
            "A": args.a,
            "f_size": f.len(),
            "truncation": k_trunc,
        },
        "row": {
            "attack": attack_label,
            "budget": budget,
            "estimate": estimate,
        },
    });
    write_outputs(&args.out, &csv, mirror)
}

fn run_psi(args: &PsiArgs) -> Result<()> {
    let family = ProblemFamily::parse(&args.family)?;
    let param = match family {
        ProblemFamily::LogBlock => match (args.nblocks, args.d) {
            (Some(n), _) => n,
            (None, Some(d)) => blocks_from_dim(d)?,
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "log-block family needs --nblocks N or --d (2^n - 1)".into(),
                ))
            }
        },
        _ => args.d.ok_or_else(|| {
            Error::InvalidArgument(format!("family '{}' needs --d N", args.family))
        })?,
    };
    let problem = family.problem(param)?;
    let grid = parse_c_grid(&args.c_grid)?;
    let curve = PsiCurve::sample(family.name(), &problem, &grid)?;
    curve.validate()?;
    let mut csv = String::from("d,c,lambda_c,psi_d\n");
    for p in &curve.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            curve.d,
            fmt9(p.c),
            p.lambda,
            fmt9(p.psi)
        ));
    }
    let mirror = json!({
        "command": "psi",
        "config": {
            "family": args.family,
            "d": curve.d,
            "c_grid": args.c_grid,
        },
        "curve": curve,
    });
    write_outputs(&args.out, &csv, mirror)
}

fn run_validate(args: &ValidateArgs) -> Result<bool> {
    let suite = Suite::parse(&args.suite)?;
    let report = validate_oracles(args.seed, suite);
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status} {} — {}", check.name, check.detail);
    }
    println!(
        "{}/{} checks passed",
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len()
    );
    Ok(report.all_passed())
}

/// Entry point shared by `main` and the CLI integration tests.
/// Returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let outcome: Result<bool> = match &cli.command {
        Command::Bounds(args) => run_bounds(args).map(|()| true),
        Command::Simulate(args) => run_simulate(args).map(|()| true),
        Command::Sweep(args) => run_sweep(args).map(|()| true),
        Command::Psi(args) => run_psi(args).map(|()| true),
        Command::Validate(args) => run_validate(args),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_grid_parsing() {
        assert_eq!(parse_k_grid("0:8:2").unwrap(), vec![0, 2, 4, 6, 8]);
        assert_eq!(parse_k_grid("3:3:1").unwrap(), vec![3]);
        assert!(parse_k_grid("5:1:1").is_err());
        assert!(parse_k_grid("1:5:0").is_err());
        assert!(parse_k_grid("1-5-2").is_err());
    }

    #[test]
    fn c_grid_parsing() {
        let g = parse_c_grid("0.1:1.0:0.3").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] - 1.0).abs() < 1e-9);
        assert!(parse_c_grid("0:1:0.1").is_err());
        assert!(parse_c_grid("0.5:0.1:0.1").is_err());
    }

    #[test]
    fn attack_set_parsing() {
        let p = crate::asymptotics::family_uniform(16).unwrap();
        let all = parse_attack_set("all", &p).unwrap();
        assert_eq!(all.len(), 16);
        let top = parse_attack_set("top:4", &p).unwrap();
        assert_eq!(top.len(), 4);
        assert!(parse_attack_set("top:0", &p).is_err());
        assert!(parse_attack_set("bottom:4", &p).is_err());
    }

    #[test]
    fn blocks_from_dim_checks_power() {
        assert_eq!(blocks_from_dim(7).unwrap(), 3);
        assert_eq!(blocks_from_dim(4095).unwrap(), 12);
        assert!(blocks_from_dim(4096).is_err());
    }
}
