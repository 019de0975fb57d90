//! Report rows and the CSV / JSON-lines writers.
//!
//! Bodies are byte-identical across reruns with the same config and seeds;
//! the only nondeterministic line is the `# generated:` CSV header line.
//! JSON output is one object per line so an interrupted run still leaves a
//! valid prefix.

use std::io::{self, Write};

use serde::Serialize;

pub const REPORT_VERSION: &str = "expsum-report-v1";

/// 15 significant digits, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    format!("{:.14e}", x)
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_num<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// One (p, t, N) cell of a sweep. Exact integers stay integers; every
/// ratio column is recomputable from its numerator and denominator columns.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub p: u64,
    pub t: u64,
    pub g: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub lambda_mode: &'static str,
    pub sampled_lower_bound: bool,
    pub max_s: Option<f64>,
    pub max_s_lambda: Option<u64>,
    pub j: Option<u64>,
    pub sum4_all: Option<u128>,
    pub sum4_nonzero: Option<u128>,
    pub energy: Option<u128>,
    pub max_sigma: Option<f64>,
    pub korobov: Option<f64>,
    pub ratio_korobov: Option<f64>,
    pub theorem1: Option<f64>,
    pub ratio_theorem1: Option<f64>,
    pub theorem2: Option<f64>,
    pub theorem2_regime: Option<u8>,
    pub theorem2_boundary: bool,
    pub ratio_theorem2: Option<f64>,
    pub theorem3: Option<f64>,
    pub theorem3_regime: Option<u8>,
    pub theorem3_gap: bool,
    pub ratio_theorem3: Option<f64>,
    pub corollary: Option<f64>,
    pub corollary_regime: Option<u8>,
    pub ratio_corollary: Option<f64>,
    pub lemma3_a: Option<f64>,
    pub lemma3_b: Option<f64>,
    pub ratio_sigma_lemma3_a: Option<f64>,
    pub ratio_sigma_lemma3_b: Option<f64>,
    pub shkredov: Option<f64>,
    pub shkredov_regime: Option<u8>,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn empty(p: u64, t: u64, g: u64, n: u64, lambda_mode: &'static str) -> Self {
        ReportRow {
            p,
            t,
            g,
            n,
            lambda_mode,
            sampled_lower_bound: false,
            max_s: None,
            max_s_lambda: None,
            j: None,
            sum4_all: None,
            sum4_nonzero: None,
            energy: None,
            max_sigma: None,
            korobov: None,
            ratio_korobov: None,
            theorem1: None,
            ratio_theorem1: None,
            theorem2: None,
            theorem2_regime: None,
            theorem2_boundary: false,
            ratio_theorem2: None,
            theorem3: None,
            theorem3_regime: None,
            theorem3_gap: false,
            ratio_theorem3: None,
            corollary: None,
            corollary_regime: None,
            ratio_corollary: None,
            lemma3_a: None,
            lemma3_b: None,
            ratio_sigma_lemma3_a: None,
            ratio_sigma_lemma3_b: None,
            shkredov: None,
            shkredov_regime: None,
            error: None,
        }
    }
}

pub const CSV_COLUMNS: &str = "p,t,g,N,lambda_mode,sampled_lower_bound,max_s,max_s_lambda,\
j,sum4_all,sum4_nonzero,energy,max_sigma,korobov,ratio_korobov,theorem1,ratio_theorem1,\
theorem2,theorem2_regime,theorem2_boundary,ratio_theorem2,theorem3,theorem3_regime,\
theorem3_gap,ratio_theorem3,corollary,corollary_regime,ratio_corollary,lemma3_a,lemma3_b,\
ratio_sigma_lemma3_a,ratio_sigma_lemma3_b,shkredov,shkredov_regime,error";

pub fn row_to_csv(r: &ReportRow) -> String {
    let fields = [
        r.p.to_string(),
        r.t.to_string(),
        r.g.to_string(),
        r.n.to_string(),
        r.lambda_mode.to_string(),
        flag(r.sampled_lower_bound).to_string(),
        opt_f64(r.max_s),
        opt_num(r.max_s_lambda),
        opt_num(r.j),
        opt_num(r.sum4_all),
        opt_num(r.sum4_nonzero),
        opt_num(r.energy),
        opt_f64(r.max_sigma),
        opt_f64(r.korobov),
        opt_f64(r.ratio_korobov),
        opt_f64(r.theorem1),
        opt_f64(r.ratio_theorem1),
        opt_f64(r.theorem2),
        opt_num(r.theorem2_regime),
        flag(r.theorem2_boundary).to_string(),
        opt_f64(r.ratio_theorem2),
        opt_f64(r.theorem3),
        opt_num(r.theorem3_regime),
        flag(r.theorem3_gap).to_string(),
        opt_f64(r.ratio_theorem3),
        opt_f64(r.corollary),
        opt_num(r.corollary_regime),
        opt_f64(r.ratio_corollary),
        opt_f64(r.lemma3_a),
        opt_f64(r.lemma3_b),
        opt_f64(r.ratio_sigma_lemma3_a),
        opt_f64(r.ratio_sigma_lemma3_b),
        opt_f64(r.shkredov),
        opt_num(r.shkredov_regime),
        // Commas inside error text would break the column grid.
        r.error
            .as_deref()
            .map(|e| e.replace(',', ";"))
            .unwrap_or_default(),
    ];
    fields.join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Metadata emitted once at the top of every report.
#[derive(Debug, Clone, Serialize)]
pub struct HeaderMeta {
    pub version: &'static str,
    pub seed: u64,
    pub lambda_mode: String,
    pub log_base: &'static str,
    pub slack: SlackMeta,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlackMeta {
    pub korobov: f64,
    pub theorem1: f64,
    pub theorem2: f64,
    pub lemma3: f64,
}

pub fn write_header(
    out: &mut dyn Write,
    format: OutputFormat,
    meta: &HeaderMeta,
) -> io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(out, "# {}", meta.version)?;
            let epoch = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            writeln!(out, "# generated: unix {epoch}")?;
            writeln!(out, "# seed: {}", meta.seed)?;
            writeln!(out, "# lambda-mode: {}", meta.lambda_mode)?;
            writeln!(
                out,
                "# log-base: {}; o(1) exponent corrections dropped",
                meta.log_base
            )?;
            writeln!(
                out,
                "# slack: korobov={} theorem1={} theorem2={} lemma3={} (absorb implied constants; config, not math)",
                meta.slack.korobov, meta.slack.theorem1, meta.slack.theorem2, meta.slack.lemma3
            )?;
            writeln!(out, "# columns: {CSV_COLUMNS}")?;
        }
        OutputFormat::Json => {
            writeln!(out, "{}", serde_json::to_string(meta)?)?;
        }
    }
    Ok(())
}

pub fn write_row(out: &mut dyn Write, format: OutputFormat, row: &ReportRow) -> io::Result<()> {
    match format {
        OutputFormat::Csv => writeln!(out, "{}", row_to_csv(row)),
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string(row)?),
    }
}
