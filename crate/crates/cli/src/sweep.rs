//! Parameter sweeps over (p, t, N) cells with bound evaluation, ratio
//! tracking, and incremental report output.
//!
//! Cells inside one prime are computed with the worker pool (the λ scans
//! and σ scans are parallel maps); rows are always emitted in (p, t, N)
//! order and flushed per prime, so an interrupted sweep leaves a valid
//! report prefix.

use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use expsum_core::addcomb::{additive_energy, EnergyBackend, PowerSet, TRANSFORM_MODULUS_LIMIT};
use expsum_core::bounds::{
    self, korobov_bound, lemma3_bounds, shkredov_energy_bound, theorem3_bound, RegimeFlag,
};
use expsum_core::expsum::{count_j, max_over_lambda, JBackend, LambdaMode};
use expsum_core::modmath::{element_of_order, factorize, is_prime, FieldCtx, SubgroupCtx};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::report::{write_header, write_row, HeaderMeta, OutputFormat, ReportRow, SlackMeta};
use crate::HarnessError;

/// Which primes a sweep visits.
#[derive(Debug, Clone)]
pub enum PrimeSel {
    Range { lo: u64, hi: u64 },
    List(Vec<u64>),
}

/// Which orders t | p−1 a sweep visits.
#[derive(Debug, Clone)]
pub enum OrderSel {
    AllDivisors,
    List(Vec<u64>),
}

/// The N grid per order.
#[derive(Debug, Clone)]
pub enum NGrid {
    /// 1, r, r², …, capped at t.
    Geometric { ratio: u64 },
    List(Vec<u64>),
}

/// λ scan mode; sampled scans derive one seed per cell from the global one.
#[derive(Debug, Clone, Copy)]
pub enum SweepLambdaMode {
    Exhaustive,
    Sampled { count: u64 },
}

/// Ratio thresholds that absorb the implied ≪-constants. Configuration,
/// not mathematics; breaches fail the sweep.
#[derive(Debug, Clone, Copy)]
pub struct Slack {
    pub korobov: f64,
    pub theorem1: f64,
    pub theorem2: f64,
    pub lemma3: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Slack {
            korobov: 2.0,
            theorem1: 10.0,
            theorem2: 10.0,
            lemma3: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub primes: PrimeSel,
    pub orders: OrderSel,
    pub n_grid: NGrid,
    pub lambda_mode: SweepLambdaMode,
    pub seed: u64,
    pub j_backend: JBackend,
    /// None picks transform below its guard, hashed above.
    pub energy_backend: Option<EnergyBackend>,
    /// Full (a, c) σ scans run for p ≤ this cap; 0 disables them.
    pub sigma_scan_cap: u64,
    /// Subgroup energy (t² pair work) is skipped for t above this cap.
    pub energy_order_cap: u64,
    pub slack: Slack,
    pub cell_budget: Option<Duration>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            primes: PrimeSel::Range { lo: 2, hi: 101 },
            orders: OrderSel::AllDivisors,
            n_grid: NGrid::Geometric { ratio: 2 },
            lambda_mode: SweepLambdaMode::Exhaustive,
            seed: 1,
            j_backend: JBackend::Hashed,
            energy_backend: None,
            sigma_scan_cap: 499,
            energy_order_cap: 8192,
            slack: Slack::default(),
            cell_budget: None,
        }
    }
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub rows: u64,
    pub breaches: Vec<String>,
    pub cell_errors: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn cell_seed(seed: u64, p: u64, t: u64, n: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed ^ p) ^ t) ^ n)
}

pub fn expand_primes(sel: &PrimeSel) -> Result<Vec<u64>, HarnessError> {
    let mut primes = match sel {
        PrimeSel::Range { lo, hi } => (*lo..=*hi).filter(|&n| is_prime(n)).collect::<Vec<_>>(),
        PrimeSel::List(list) => {
            for &p in list {
                if !is_prime(p) {
                    return Err(HarnessError::Usage(format!("{p} is not prime")));
                }
            }
            list.clone()
        }
    };
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

fn expand_orders(sel: &OrderSel, p: u64) -> Vec<u64> {
    let divisors = factorize(p - 1).divisors();
    match sel {
        OrderSel::AllDivisors => divisors,
        OrderSel::List(list) => divisors
            .into_iter()
            .filter(|t| list.contains(t))
            .collect(),
    }
}

fn expand_grid(grid: &NGrid, t: u64) -> Vec<u64> {
    let mut ns = match grid {
        NGrid::Geometric { ratio } => {
            let ratio = (*ratio).max(2);
            let mut ns = Vec::new();
            let mut n = 1u64;
            while n <= t {
                ns.push(n);
                match n.checked_mul(ratio) {
                    Some(next) => n = next,
                    None => break,
                }
            }
            ns
        }
        // N ≤ t is enforced at expansion time.
        NGrid::List(list) => list.iter().copied().filter(|&n| n >= 1 && n <= t).collect(),
    };
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// max over a ∈ [0,t) and c ∈ [1,p−1] of |σ(a,c)|. For fixed c the values
/// over all a are the DFT magnitudes of (e_p(cg^n))_n, so each c costs one
/// length-t transform. Returns None if the deadline passes mid-scan.
fn max_sigma_scan(ctx: &SubgroupCtx, deadline: Option<Instant>) -> Option<f64> {
    let t = ctx.order();
    let p = ctx.p();
    let field = ctx.field();
    let g = ctx.g();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t as usize);
    let timed_out = AtomicBool::new(false);
    // sigma scans only run for small p, so the usize cast is lossless.
    let max_sq = (1..p as usize)
        .into_par_iter()
        .with_min_len(8)
        .map(|c| c as u64)
        .map(|c| {
            if timed_out.load(Ordering::Relaxed) {
                return 0.0;
            }
            if let Some(d) = deadline {
                if Instant::now() > d {
                    timed_out.store(true, Ordering::Relaxed);
                    return 0.0;
                }
            }
            let mut v = Vec::with_capacity(t as usize);
            let mut y = 1u64; // g^0; the n = t term equals the n = 0 term
            for _ in 0..t {
                let (re, im) = field.root(expsum_core::modmath::mulmod(c, y, p));
                v.push(Complex64::new(re, im));
                y = expsum_core::modmath::mulmod(y, g, p);
            }
            fft.process(&mut v);
            v.iter().map(|z| z.norm_sqr()).fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0f64, f64::max);
    if timed_out.load(Ordering::Relaxed) {
        None
    } else {
        Some(max_sq.sqrt())
    }
}

/// Per-(p, t) quantities shared by every N cell of the order.
struct OrderShared {
    ctx: SubgroupCtx,
    energy: Option<u128>,
    max_sigma: Option<f64>,
    lemma3: Option<(f64, f64)>,
    theorem3: Option<bounds::RegimeBound>,
    shkredov: Option<bounds::RegimeBound>,
    korobov: Option<f64>,
    group_error: Option<String>,
}

fn prepare_order(cfg: &SweepConfig, field: &FieldCtx, t: u64) -> OrderShared {
    let p = field.p();
    let ctx = element_of_order(field, t).expect("t divides p−1 by construction");
    let deadline = cfg.cell_budget.map(|b| Instant::now() + b);
    let mut group_error = None;

    let energy = if t <= cfg.energy_order_cap {
        let backend = cfg.energy_backend.unwrap_or(if p <= TRANSFORM_MODULUS_LIMIT {
            EnergyBackend::Transform
        } else {
            EnergyBackend::Hashed
        });
        let subgroup = PowerSet::interval(&ctx, 0, t).expect("1 ≤ t ≤ t");
        match additive_energy(subgroup.elements(), subgroup.elements(), backend) {
            Ok(e) => Some(e),
            Err(err) => {
                group_error = Some(format!("energy: {err}"));
                None
            }
        }
    } else {
        None
    };

    let max_sigma = match energy {
        Some(_) if p <= cfg.sigma_scan_cap && t >= 2 => {
            let scanned = max_sigma_scan(&ctx, deadline);
            if scanned.is_none() {
                group_error = Some("timeout: sigma scan".into());
            }
            scanned
        }
        _ => None,
    };

    let lemma3 = energy.and_then(|e| lemma3_bounds(p, t, e).ok());
    OrderShared {
        energy,
        max_sigma,
        lemma3,
        theorem3: theorem3_bound(p, t).ok(),
        shkredov: shkredov_energy_bound(p, t).ok(),
        korobov: korobov_bound(p).ok(),
        group_error,
        ctx,
    }
}

fn compute_cell(cfg: &SweepConfig, shared: &OrderShared, n: u64, breaches: &mut Vec<String>) -> ReportRow {
    let ctx = &shared.ctx;
    let (p, t, g) = (ctx.p(), ctx.order(), ctx.g());
    let (mode_name, mode): (&'static str, LambdaMode) = match cfg.lambda_mode {
        SweepLambdaMode::Exhaustive => ("exhaustive", LambdaMode::Exhaustive),
        SweepLambdaMode::Sampled { count } => (
            "sampled",
            LambdaMode::Sampled {
                count,
                seed: cell_seed(cfg.seed, p, t, n),
            },
        ),
    };
    let mut row = ReportRow::empty(p, t, g, n, mode_name);
    row.error = shared.group_error.clone();
    let deadline = cfg.cell_budget.map(|b| Instant::now() + b);
    let fail = |row: &mut ReportRow, what: String| {
        row.error = Some(match row.error.take() {
            Some(prev) => format!("{prev}; {what}"),
            None => what,
        });
    };

    // Stage 1: λ scan.
    let over_budget = |d: &Option<Instant>| d.is_some_and(|d| Instant::now() > d);
    match max_over_lambda(ctx, n, mode) {
        Ok(scan) => {
            row.max_s = Some(scan.magnitude);
            row.max_s_lambda = Some(scan.lambda);
            row.sampled_lower_bound = scan.lower_bound_only;
        }
        Err(e) => fail(&mut row, format!("max|S|: {e}")),
    }
    if over_budget(&deadline) {
        fail(&mut row, "timeout: after λ scan".into());
        return row;
    }

    // Stage 2: quadruple count and the exact moments.
    match count_j(ctx, n, cfg.j_backend) {
        Ok(j) => {
            row.j = Some(j);
            let all = p as u128 * j as u128;
            row.sum4_all = Some(all);
            row.sum4_nonzero = Some(all - (n as u128).pow(4));
        }
        Err(e) => fail(&mut row, format!("J: {e}")),
    }

    // Stage 3: bounds and ratios.
    row.energy = shared.energy;
    row.max_sigma = shared.max_sigma;
    row.korobov = shared.korobov;
    if let (Some(b), Some(s)) = (row.korobov, row.max_s) {
        let ratio = s / b;
        row.ratio_korobov = Some(ratio);
        if ratio > cfg.slack.korobov {
            breaches.push(format!(
                "p={p} t={t} N={n}: max|S|/korobov = {ratio:.6} > {}",
                cfg.slack.korobov
            ));
        }
    }
    if let Ok(b) = bounds::theorem1_bound(p, t, n) {
        row.theorem1 = Some(b);
        if let Some(m4) = row.sum4_nonzero {
            let ratio = m4 as f64 / b;
            row.ratio_theorem1 = Some(ratio);
            if ratio > cfg.slack.theorem1 {
                breaches.push(format!(
                    "p={p} t={t} N={n}: Σ|S|⁴/theorem1 = {ratio:.6} > {}",
                    cfg.slack.theorem1
                ));
            }
        }
    }
    if let Ok(b) = bounds::theorem2_bound(p, t, n) {
        row.theorem2 = Some(b.value);
        row.theorem2_regime = Some(b.regime);
        row.theorem2_boundary = b.flag == Some(RegimeFlag::Boundary);
        if let Some(s) = row.max_s {
            let ratio = s / b.value;
            row.ratio_theorem2 = Some(ratio);
            if ratio > cfg.slack.theorem2 {
                breaches.push(format!(
                    "p={p} t={t} N={n}: max|S|/theorem2 = {ratio:.6} > {}",
                    cfg.slack.theorem2
                ));
            }
        }
    }
    if let Some(b) = shared.theorem3 {
        row.theorem3 = Some(b.value);
        row.theorem3_regime = Some(b.regime);
        row.theorem3_gap = b.flag == Some(RegimeFlag::RegimeGap);
        row.ratio_theorem3 = row.max_s.map(|s| s / b.value);
    }
    if let Ok(b) = bounds::corollary_bound(p, n) {
        row.corollary = Some(b.value);
        row.corollary_regime = Some(b.regime);
        row.ratio_corollary = row.max_s.map(|s| s / b.value);
    }
    if let Some((a, b)) = shared.lemma3 {
        row.lemma3_a = Some(a);
        row.lemma3_b = Some(b);
        if let Some(sigma) = row.max_sigma {
            let (ra, rb) = (sigma / a, sigma / b);
            row.ratio_sigma_lemma3_a = Some(ra);
            row.ratio_sigma_lemma3_b = Some(rb);
            if ra > cfg.slack.lemma3 || rb > cfg.slack.lemma3 {
                breaches.push(format!(
                    "p={p} t={t}: max|σ|/lemma3 = ({ra:.6}, {rb:.6}) exceeds {}",
                    cfg.slack.lemma3
                ));
            }
        }
    }
    if let Some(b) = shared.shkredov {
        row.shkredov = Some(b.value);
        row.shkredov_regime = Some(b.regime);
    }
    row
}

/// Runs the sweep, streaming rows in (p, t, N) order and flushing after
/// each prime. Per-cell failures are recorded in the row; only breached
/// slack thresholds make the outcome failing.
pub fn run_sweep(
    cfg: &SweepConfig,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<SweepOutcome, HarnessError> {
    let primes = expand_primes(&cfg.primes)?;
    let meta = HeaderMeta {
        version: crate::report::REPORT_VERSION,
        seed: cfg.seed,
        lambda_mode: match cfg.lambda_mode {
            SweepLambdaMode::Exhaustive => "exhaustive".to_string(),
            SweepLambdaMode::Sampled { count } => format!("sampled({count})"),
        },
        log_base: "natural (ln)",
        slack: SlackMeta {
            korobov: cfg.slack.korobov,
            theorem1: cfg.slack.theorem1,
            theorem2: cfg.slack.theorem2,
            lemma3: cfg.slack.lemma3,
        },
    };
    write_header(out, format, &meta)?;

    let mut outcome = SweepOutcome::default();
    for &p in &primes {
        let field = FieldCtx::new(p)?.with_root_table();
        for t in expand_orders(&cfg.orders, p) {
            let shared = prepare_order(cfg, &field, t);
            for n in expand_grid(&cfg.n_grid, t) {
                let row = compute_cell(cfg, &shared, n, &mut outcome.breaches);
                if row.error.is_some() {
                    outcome.cell_errors += 1;
                }
                write_row(out, format, &row)?;
                outcome.rows += 1;
            }
        }
        out.flush()?;
    }
    Ok(outcome)
}
