//! Library behind the `expsum` binary: report formats, verification
//! suites, the sweep engine, and the command dispatcher.

pub mod report;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use expsum_core::addcomb::{
    additive_energy, difference_quotient_set, difference_set, product_set, ratio_set, sumset,
    EnergyBackend, PowerSet, ResidueSet,
};
use expsum_core::bounds::{
    corollary_bound, korobov_bound, lemma3_bounds, shkredov_energy_bound, theorem1_bound,
    theorem2_bound, theorem3_bound, RegimeFlag,
};
use expsum_core::expsum::{eval_sum, fourth_moment, max_over_lambda, sigma_hybrid, LambdaMode};
use expsum_core::modmath::{element_of_order, FieldCtx, SubgroupCtx};

use report::{fmt_f64, OutputFormat};
use sweep::{NGrid, OrderSel, PrimeSel, Slack, SweepConfig, SweepLambdaMode};

/// Exit codes: 0 success, 1 assertion/counterexample, 2 usage error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] expsum_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Parser, Debug)]
#[command(
    name = "expsum",
    about = "Incomplete exponential sums over subgroups of F_p: evaluation, moments, energies, bounds, verification, sweeps",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Naive,
    Hash,
    Transform,
}

impl From<BackendArg> for EnergyBackend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Naive => EnergyBackend::Naive,
            BackendArg::Hash => EnergyBackend::Hashed,
            BackendArg::Transform => EnergyBackend::Transform,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    Identity,
    Backend,
    Lemma2,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SetOpArg {
    Sum,
    Diff,
    Prod,
    Ratio,
    /// (A−A)/(A−A)
    Dq,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate S_{g,p}(λ,N) = Σ_{n=1}^{N} e_p(λ gⁿ)
    Sum {
        #[arg(long)]
        p: u64,
        #[arg(long, conflicts_with = "t")]
        g: Option<u64>,
        /// Pick g of this order instead of passing g directly
        #[arg(long)]
        t: Option<u64>,
        #[arg(long)]
        lambda: u64,
        #[arg(long = "N")]
        n: u64,
    },
    /// Evaluate the hybrid sum σ(a,c) = Σ_{n=1}^{t} e_t(an) e_p(c gⁿ)
    Sigma {
        #[arg(long)]
        p: u64,
        #[arg(long, conflicts_with = "t")]
        g: Option<u64>,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        c: u64,
    },
    /// max over λ ∈ {1,…,p−1} of |S(λ,N)|
    Maxsum {
        #[arg(long)]
        p: u64,
        #[arg(long, conflicts_with = "t")]
        g: Option<u64>,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// J(g,N), p·J, and the λ ≠ 0 fourth moment
    Moment4 {
        #[arg(long)]
        p: u64,
        #[arg(long, conflicts_with = "t")]
        g: Option<u64>,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long = "N")]
        n: u64,
    },
    /// Additive energy E₊(A,B) of explicit sets or of power sets of g
    Energy {
        #[arg(long)]
        p: u64,
        #[arg(long, conflicts_with = "t")]
        g: Option<u64>,
        #[arg(long)]
        t: Option<u64>,
        /// Power-set length; defaults to the full subgroup
        #[arg(long = "N")]
        n: Option<u64>,
        /// Explicit A as comma-separated residues (overrides --g/--t)
        #[arg(long, value_delimiter = ',')]
        set_a: Option<Vec<u64>>,
        /// Explicit B; defaults to A
        #[arg(long, value_delimiter = ',')]
        set_b: Option<Vec<u64>>,
        #[arg(long, value_enum, default_value = "hash")]
        backend: BackendArg,
    },
    /// Set algebra: A+B, A−B, A·B, A/B, (A−A)/(A−A)
    Sumset {
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',')]
        set_a: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        set_b: Option<Vec<u64>>,
        #[arg(long, value_enum, default_value = "sum")]
        op: SetOpArg,
    },
    /// Evaluate every applicable bound formula at (p, t, N)
    Bounds {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        t: u64,
        #[arg(long = "N")]
        n: Option<u64>,
        /// Subgroup energy for the lemma-3 pair; computed when omitted
        #[arg(long)]
        energy: Option<u128>,
    },
    /// Run verification suites; exit 1 on any hard-assertion failure
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 199)]
        cap: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sweep (p, t, N) cells into a CSV or JSON-lines report
    Sweep {
        /// Explicit prime list (comma-separated); overrides --pmin/--pmax
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        #[arg(long, default_value_t = 2)]
        pmin: u64,
        #[arg(long, default_value_t = 101)]
        pmax: u64,
        /// Keep only these orders t (must divide p−1); default all divisors
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<u64>>,
        /// Explicit N grid; default geometric 1,2,4,… capped at t
        #[arg(long = "n-grid", value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
        #[arg(long, default_value_t = 2)]
        grid_ratio: u64,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Full (a,c) σ scans for p up to this cap (0 disables)
        #[arg(long, default_value_t = 499)]
        sigma_cap: u64,
        /// Energy backend; default picks transform below its guard
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutArg,
        /// Output file; stdout when omitted
        #[arg(long)]
        path: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        slack_korobov: f64,
        #[arg(long, default_value_t = 10.0)]
        slack_theorem1: f64,
        #[arg(long, default_value_t = 10.0)]
        slack_theorem2: f64,
        #[arg(long, default_value_t = 10.0)]
        slack_lemma3: f64,
        /// Per-cell time budget in milliseconds
        #[arg(long)]
        cell_budget_ms: Option<u64>,
    },
}

fn resolve_ctx(p: u64, g: Option<u64>, t: Option<u64>) -> Result<SubgroupCtx, HarnessError> {
    let field = FieldCtx::new(p)?.with_root_table();
    match (g, t) {
        (Some(g), None) => Ok(SubgroupCtx::new(field, g)?),
        (None, Some(t)) => Ok(element_of_order(&field, t)?),
        _ => Err(HarnessError::Usage("pass exactly one of --g or --t".into())),
    }
}

fn residue_set(p: u64, values: &[u64]) -> Result<ResidueSet, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Usage("set must be nonempty".into()));
    }
    Ok(ResidueSet::new(p, values.iter().copied()))
}

/// 15 digits after the decimal point, the format of the single-value
/// commands.
fn fmt_fixed(x: f64) -> String {
    format!("{:.15}", x)
}

fn print_complex(out: &mut dyn Write, value: (f64, f64)) -> io::Result<()> {
    let (re, im) = value;
    let sign = if im < 0.0 { '-' } else { '+' };
    writeln!(out, "{} {} {}i", fmt_fixed(re), sign, fmt_fixed(im.abs()))?;
    writeln!(out, "|S| = {}", fmt_fixed(re.hypot(im)))
}

fn cmd_sum(
    out: &mut dyn Write,
    p: u64,
    g: Option<u64>,
    t: Option<u64>,
    lambda: u64,
    n: u64,
) -> Result<(), HarnessError> {
    let ctx = resolve_ctx(p, g, t)?;
    let s = eval_sum(&ctx, lambda, n)?;
    writeln!(
        out,
        "S at p={p} g={} t={} lambda={lambda} N={n}:",
        ctx.g(),
        ctx.order()
    )?;
    print_complex(out, s.value())?;
    Ok(())
}

fn cmd_sigma(
    out: &mut dyn Write,
    p: u64,
    g: Option<u64>,
    t: Option<u64>,
    a: u64,
    c: u64,
) -> Result<(), HarnessError> {
    let ctx = resolve_ctx(p, g, t)?;
    let s = sigma_hybrid(&ctx, a, c)?;
    writeln!(
        out,
        "sigma at p={p} g={} t={} a={a} c={c}:",
        ctx.g(),
        ctx.order()
    )?;
    print_complex(out, s.value())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_maxsum(
    out: &mut dyn Write,
    p: u64,
    g: Option<u64>,
    t: Option<u64>,
    n: u64,
    mode: ModeArg,
    samples: u64,
    seed: u64,
) -> Result<(), HarnessError> {
    let ctx = resolve_ctx(p, g, t)?;
    let mode = match mode {
        ModeArg::Exhaustive => LambdaMode::Exhaustive,
        ModeArg::Sampled => LambdaMode::Sampled {
            count: samples,
            seed,
        },
    };
    let scan = max_over_lambda(&ctx, n, mode)?;
    writeln!(out, "lambda* = {}", scan.lambda)?;
    writeln!(out, "max|S|  = {}", fmt_fixed(scan.magnitude))?;
    if scan.lower_bound_only {
        writeln!(
            out,
            "note: sampled scan; this is a lower bound on the true maximum"
        )?;
    }
    Ok(())
}

fn cmd_moment4(
    out: &mut dyn Write,
    p: u64,
    g: Option<u64>,
    t: Option<u64>,
    n: u64,
) -> Result<(), HarnessError> {
    let ctx = resolve_ctx(p, g, t)?;
    let m = fourth_moment(&ctx, n)?;
    writeln!(out, "J(g,N)                 = {}", m.j_count)?;
    writeln!(out, "sum4_all   (p*J exact) = {}", m.fourth_moment_all)?;
    writeln!(
        out,
        "sum4_nonzero (exact)   = {}",
        m.fourth_moment_nonzero_exact(n)
    )?;
    writeln!(
        out,
        "sum4_nonzero ({}) = {}",
        if m.nonzero_is_direct {
            "direct "
        } else {
            "p*J-N^4"
        },
        fmt_f64(m.fourth_moment_nonzero)
    )?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_energy(
    out: &mut dyn Write,
    p: u64,
    g: Option<u64>,
    t: Option<u64>,
    n: Option<u64>,
    set_a: Option<Vec<u64>>,
    set_b: Option<Vec<u64>>,
    backend: BackendArg,
) -> Result<(), HarnessError> {
    let (a, b) = match set_a {
        Some(values) => {
            let a = residue_set(p, &values)?;
            let b = match set_b {
                Some(vb) => residue_set(p, &vb)?,
                None => a.clone(),
            };
            (a, b)
        }
        None => {
            let ctx = resolve_ctx(p, g, t)?;
            let len = n.unwrap_or(ctx.order());
            let ps = PowerSet::interval(&ctx, 0, len)?;
            (ps.elements().clone(), ps.elements().clone())
        }
    };
    let e = additive_energy(&a, &b, backend.into())?;
    writeln!(out, "|A| = {}, |B| = {}", a.len(), b.len())?;
    writeln!(out, "E+(A,B) = {e}")?;
    Ok(())
}

fn cmd_sumset(
    out: &mut dyn Write,
    p: u64,
    set_a: Vec<u64>,
    set_b: Option<Vec<u64>>,
    op: SetOpArg,
) -> Result<(), HarnessError> {
    let a = residue_set(p, &set_a)?;
    let b = match &set_b {
        Some(vb) => residue_set(p, vb)?,
        None => a.clone(),
    };
    let result = match op {
        SetOpArg::Sum => sumset(&a, &b)?,
        SetOpArg::Diff => difference_set(&a, &b)?,
        SetOpArg::Prod => product_set(&a, &b)?,
        SetOpArg::Ratio => ratio_set(&a, &b)?,
        SetOpArg::Dq => difference_quotient_set(&a)?,
    };
    if matches!(op, SetOpArg::Ratio) && result.is_empty() {
        writeln!(out, "note: denominator set has no nonzero element")?;
    }
    writeln!(out, "size = {}", result.len())?;
    let elems: Vec<String> = result.iter().map(|e| e.to_string()).collect();
    writeln!(out, "{{{}}}", elems.join(","))?;
    Ok(())
}

fn cmd_bounds(
    out: &mut dyn Write,
    p: u64,
    t: u64,
    n: Option<u64>,
    energy: Option<u128>,
) -> Result<(), HarnessError> {
    writeln!(out, "# log = ln; o(1) exponents dropped")?;
    match korobov_bound(p) {
        Ok(v) => writeln!(out, "korobov              = {}", fmt_f64(v))?,
        Err(e) => writeln!(out, "korobov              : skipped ({e})")?,
    }
    if let Some(n) = n {
        writeln!(
            out,
            "theorem1             = {}",
            fmt_f64(theorem1_bound(p, t, n)?)
        )?;
        let t2 = theorem2_bound(p, t, n)?;
        writeln!(
            out,
            "theorem2 (regime {})  = {}{}",
            t2.regime,
            fmt_f64(t2.value),
            if t2.flag == Some(RegimeFlag::Boundary) {
                "  [boundary: N = t outside printed ranges]"
            } else {
                ""
            }
        )?;
        let cor = corollary_bound(p, n)?;
        writeln!(
            out,
            "corollary (regime {}) = {}  [assumes t of order sqrt(p)]",
            cor.regime,
            fmt_f64(cor.value)
        )?;
    }
    let t3 = theorem3_bound(p, t)?;
    writeln!(
        out,
        "theorem3 (regime {})  = {}{}",
        t3.regime,
        fmt_f64(t3.value),
        if t3.flag == Some(RegimeFlag::RegimeGap) {
            "  [gap band: classified first-match]"
        } else {
            ""
        }
    )?;
    let shk = shkredov_energy_bound(p, t)?;
    writeln!(
        out,
        "shkredov (regime {})  = {}",
        shk.regime,
        fmt_f64(shk.value)
    )?;
    let energy = match energy {
        Some(e) => Some(e),
        None if (2..=8192).contains(&t) => {
            let ctx = element_of_order(&FieldCtx::new(p)?, t)?;
            let ps = PowerSet::interval(&ctx, 0, t)?;
            let backend = if p <= expsum_core::addcomb::TRANSFORM_MODULUS_LIMIT {
                EnergyBackend::Transform
            } else {
                EnergyBackend::Hashed
            };
            let e = additive_energy(ps.elements(), ps.elements(), backend)?;
            writeln!(out, "E+(subgroup)         = {e}  (computed)")?;
            Some(e)
        }
        None => None,
    };
    if let Some(e) = energy {
        if t >= 2 {
            let (a, b) = lemma3_bounds(p, t, e)?;
            writeln!(out, "lemma3 first         = {}", fmt_f64(a))?;
            writeln!(out, "lemma3 second        = {}", fmt_f64(b))?;
        }
    }
    Ok(())
}

fn cmd_verify(
    out: &mut dyn Write,
    suite: SuiteArg,
    cap: u64,
    seed: u64,
) -> Result<i32, HarnessError> {
    let mut outcomes = Vec::new();
    match suite {
        SuiteArg::Identity => {
            let (parseval, moment) = verify::identity_suites(cap);
            outcomes.push(parseval);
            outcomes.push(moment);
        }
        SuiteArg::Backend => {
            outcomes.push(verify::backend_suite(cap, verify::BACKEND_SUITE_PAIRS, seed));
        }
        SuiteArg::Lemma2 => {
            outcomes.push(verify::lemma2_suite(cap, verify::LEMMA2_SUITE_PAIRS, seed));
        }
        SuiteArg::All => {
            let (parseval, moment) = verify::identity_suites(cap);
            outcomes.push(parseval);
            outcomes.push(moment);
            outcomes.push(verify::backend_suite(cap, verify::BACKEND_SUITE_PAIRS, seed));
            outcomes.push(verify::lemma2_suite(cap, verify::LEMMA2_SUITE_PAIRS, seed));
        }
    }
    let mut failed = false;
    for o in &outcomes {
        writeln!(out, "{}", o.summary())?;
        for f in o.failures.iter().take(5) {
            writeln!(out, "  counterexample: {f}")?;
        }
        failed |= !o.passed();
    }
    Ok(if failed { EXIT_COUNTEREXAMPLE } else { EXIT_OK })
}

struct SweepArgs {
    primes: Option<Vec<u64>>,
    backend: Option<BackendArg>,
    pmin: u64,
    pmax: u64,
    orders: Option<Vec<u64>>,
    n_grid: Option<Vec<u64>>,
    grid_ratio: u64,
    mode: ModeArg,
    samples: u64,
    seed: u64,
    sigma_cap: u64,
    format: OutputFormat,
    path: Option<String>,
    slack: Slack,
    cell_budget_ms: Option<u64>,
}

fn cmd_sweep(out: &mut dyn Write, args: SweepArgs) -> Result<i32, HarnessError> {
    let cfg = SweepConfig {
        primes: match args.primes {
            Some(list) => PrimeSel::List(list),
            None => PrimeSel::Range {
                lo: args.pmin,
                hi: args.pmax,
            },
        },
        orders: match args.orders {
            Some(list) => OrderSel::List(list),
            None => OrderSel::AllDivisors,
        },
        n_grid: match args.n_grid {
            Some(list) => NGrid::List(list),
            None => NGrid::Geometric {
                ratio: args.grid_ratio,
            },
        },
        lambda_mode: match args.mode {
            ModeArg::Exhaustive => SweepLambdaMode::Exhaustive,
            ModeArg::Sampled => SweepLambdaMode::Sampled {
                count: args.samples,
            },
        },
        seed: args.seed,
        sigma_scan_cap: args.sigma_cap,
        energy_backend: args.backend.map(EnergyBackend::from),
        slack: args.slack,
        cell_budget: args.cell_budget_ms.map(Duration::from_millis),
        ..SweepConfig::default()
    };
    let outcome = match &args.path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            let outcome = sweep::run_sweep(&cfg, args.format, &mut file)?;
            file.flush()?;
            outcome
        }
        None => sweep::run_sweep(&cfg, args.format, out)?,
    };
    writeln!(
        out,
        "sweep: {} rows, {} cell errors, {} slack breaches",
        outcome.rows,
        outcome.cell_errors,
        outcome.breaches.len()
    )?;
    for b in outcome.breaches.iter().take(10) {
        writeln!(out, "  breach: {b}")?;
    }
    Ok(if outcome.breaches.is_empty() {
        EXIT_OK
    } else {
        EXIT_COUNTEREXAMPLE
    })
}

/// Runs a parsed command, writing to `out`. Returns the process exit code.
pub fn dispatch(cli: Cli, out: &mut dyn Write) -> i32 {
    let result: Result<i32, HarnessError> = match cli.cmd {
        Cmd::Sum { p, g, t, lambda, n } => cmd_sum(out, p, g, t, lambda, n).map(|_| EXIT_OK),
        Cmd::Sigma { p, g, t, a, c } => cmd_sigma(out, p, g, t, a, c).map(|_| EXIT_OK),
        Cmd::Maxsum {
            p,
            g,
            t,
            n,
            mode,
            samples,
            seed,
        } => cmd_maxsum(out, p, g, t, n, mode, samples, seed).map(|_| EXIT_OK),
        Cmd::Moment4 { p, g, t, n } => cmd_moment4(out, p, g, t, n).map(|_| EXIT_OK),
        Cmd::Energy {
            p,
            g,
            t,
            n,
            set_a,
            set_b,
            backend,
        } => cmd_energy(out, p, g, t, n, set_a, set_b, backend).map(|_| EXIT_OK),
        Cmd::Sumset { p, set_a, set_b, op } => {
            cmd_sumset(out, p, set_a, set_b, op).map(|_| EXIT_OK)
        }
        Cmd::Bounds { p, t, n, energy } => cmd_bounds(out, p, t, n, energy).map(|_| EXIT_OK),
        Cmd::Verify { suite, cap, seed } => cmd_verify(out, suite, cap, seed),
        Cmd::Sweep {
            primes,
            pmin,
            pmax,
            orders,
            n_grid,
            grid_ratio,
            mode,
            samples,
            seed,
            sigma_cap,
            backend,
            out: format,
            path,
            slack_korobov,
            slack_theorem1,
            slack_theorem2,
            slack_lemma3,
            cell_budget_ms,
        } => cmd_sweep(
            out,
            SweepArgs {
                primes,
                backend,
                pmin,
                pmax,
                orders,
                n_grid,
                grid_ratio,
                mode,
                samples,
                seed,
                sigma_cap,
                format: match format {
                    OutArg::Csv => OutputFormat::Csv,
                    OutArg::Json => OutputFormat::Json,
                },
                path,
                slack: Slack {
                    korobov: slack_korobov,
                    theorem1: slack_theorem1,
                    theorem2: slack_theorem2,
                    lemma3: slack_lemma3,
                },
                cell_budget_ms,
            },
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
