//! Artifact layouts shared by the subcommands and the batch runner.

use harper_core::butterfly::{ButterflyDataset, ButterflyRow};
use harper_core::coefficients::{CoefficientSheet, Residual21};
use harper_core::numbertheory::{ComponentCount, FranelRow};
use harper_core::spectrum::{BandSet, GapRecord, DEFAULT_MIN_WIDTH, TOUCH_TOLERANCE};
use serde_json::json;

use crate::cells;
use crate::config::{RunConfig, TOOL, VERSION};
use crate::csvio::{num, Table};

pub const GAP_COLUMNS: [&str; 10] = ["p", "q", "beta", "gap_lo", "gap_hi", "ids_num", "ids_den", "m", "n", "width"];

/// Resolvent convention of every coefficient sheet.
pub const SIGN_CONVENTION: &str = "tau((h-z)^-1 w_pq)";

pub fn gap_row(g: &GapRecord) -> Vec<String> {
    cells![g.freq.p(), g.freq.q(), num(g.beta), num(g.lo), num(g.hi), g.j, g.freq.q(), g.m, g.n, num(g.width())]
}

pub fn band_table(config: &RunConfig, sets: &[BandSet]) -> String {
    let mut t = Table::new(&config.comment_line(), &["p", "q", "beta", "band", "lo", "hi"]);
    for bs in sets {
        let f = bs.freq();
        for (k, b) in bs.bands.iter().enumerate() {
            t.row(cells![f.p(), f.q(), num(bs.beta()), k, num(b.lo), num(b.hi)]);
        }
    }
    t.into_string()
}

pub fn gap_table<'a>(config: &RunConfig, gaps: impl IntoIterator<Item = &'a GapRecord>) -> String {
    let mut t = Table::new(&config.comment_line(), &GAP_COLUMNS);
    for g in gaps {
        t.row(gap_row(g));
    }
    t.into_string()
}

/// First line of a dataset file.
pub fn dataset_header(config: &RunConfig, q_max: u64, beta: f64, min_width: f64) -> String {
    format!(
        "# {TOOL}-dataset version={VERSION} Q={q_max} beta={} min_width={} touch_tolerance={} \
         rows=0/1,reduced-p/q-in-(0,1]-with-q<=Q order=(q,p) config={}",
        num(beta),
        num(min_width),
        num(TOUCH_TOLERANCE),
        config.hash()
    )
}

/// Lines contributed by one row: its gap records, or one comment for a failure.
pub fn dataset_rows(row: &ButterflyRow) -> String {
    let mut t = Table::default();
    match &row.error {
        Some(e) => t.comment(&format!("# error {}: {e}", row.freq)),
        None => row.gaps.iter().for_each(|g| t.row(gap_row(g))),
    }
    t.into_string()
}

pub fn dataset_preamble(config: &RunConfig, q_max: u64, beta: f64, min_width: f64) -> String {
    let mut t = Table::default();
    t.comment(&dataset_header(config, q_max, beta, min_width));
    t.row(GAP_COLUMNS.iter().map(|s| s.to_string()));
    t.into_string()
}

pub fn dataset_file(config: &RunConfig, d: &ButterflyDataset) -> String {
    let mut s = dataset_preamble(config, d.q_max, d.beta, d.min_width);
    for row in &d.rows {
        s.push_str(&dataset_rows(row));
    }
    s
}

pub fn dataset_config(q_max: u64, beta: f64, min_width: f64) -> RunConfig {
    RunConfig::new("butterfly").with("Q", q_max).with("beta", num(beta)).with("min_width", num(min_width))
}

pub fn default_dataset_config(q_max: u64, beta: f64) -> RunConfig {
    dataset_config(q_max, beta, DEFAULT_MIN_WIDTH)
}

pub fn sheet_table(config: &RunConfig, sheet: &CoefficientSheet, residual: Option<Residual21>) -> String {
    let mut t = Table::default();
    t.comment(&config.comment_line());
    if let Some(r) = residual {
        t.comment(&format!(
            "# residual_off_origin={} origin_first={} origin_second={} imag_max={}",
            num(r.off_origin),
            num(r.origin_first),
            num(r.origin_second),
            num(sheet.imag_max)
        ));
    }
    t.row(["kind", "p_num", "q_den", "beta", "z", "P", "sign_convention"].map(String::from));
    t.row(cells![
        sheet.kind.name(),
        sheet.freq.p(),
        sheet.freq.q(),
        num(sheet.beta),
        num(sheet.z),
        sheet.radius,
        SIGN_CONVENTION
    ]);
    t.row(["p", "qe", "value"].map(String::from));
    for (p, qe, v) in sheet.entries() {
        t.row(cells![p, qe, num(v)]);
    }
    t.into_string()
}

pub fn franel_csv(config: &RunConfig, rows: &[FranelRow]) -> String {
    let mut t = Table::new(&config.comment_line(), &["n", "sum", "n_times_sum"]);
    for r in rows {
        t.row(cells![r.n, num(r.sum), num(r.n_times_sum)]);
    }
    t.into_string()
}

pub fn component_json(config: &RunConfig, c: &ComponentCount) -> serde_json::Value {
    let members: Vec<Vec<String>> = c.members.iter().map(|m| m.iter().map(|f| f.to_string()).collect()).collect();
    json!({
        "k": c.k,
        "Q": c.q_max,
        "beta": c.beta,
        "predicted": c.predicted,
        "observed": c.observed,
        "component_members": members,
        "excluded": c.excluded.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "provenance": config.provenance(),
    })
}

pub fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}
