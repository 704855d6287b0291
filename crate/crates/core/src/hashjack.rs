//! Hashtag hijacking estimates: how much more likely the partisans of one
//! party are to sit in a target network's contra community than the other
//! accounts of that network.
//!
//! For partisan set `P` and target network `T` with contra community `C`,
//! counted over the accounts present in `T`:
//!
//! ```text
//!                 in C    not in C
//! partisan         a         b
//! non-partisan     c         d
//! ```
//!
//! The headline is the odds ratio `ad / bc`. It is estimated twice: from the
//! table directly and through a one-predictor logistic regression fitted by
//! iteratively reweighted least squares, whose slope equals `ln(ad / bc)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::CommunityPartition;
use crate::graph::{AccountIdx, RetweetNetwork};
use crate::labeling::{ClusterLabeling, Label, PartisanAssignment};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;
pub const IRLS_TOLERANCE: f64 = 1e-8;
pub const IRLS_MAX_ITERATIONS: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashjackError {
    #[error("target network {0} has no contra community")]
    NoContra(String),
    #[error("logistic fit needs at least one positive and one negative outcome")]
    OneSidedOutcome,
    #[error("outcomes ({outcomes}) and predictor ({predictor}) differ in length")]
    LengthMismatch { outcomes: usize, predictor: usize },
    #[error("labeling is for {labeling}, network is {network}")]
    NetworkMismatch { network: String, labeling: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    /// partisans in the contra community
    pub a: u64,
    /// partisans elsewhere in the network
    pub b: u64,
    /// non-partisans in the contra community
    pub c: u64,
    /// non-partisans elsewhere in the network
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn has_zero_cell(&self) -> bool {
        self.a == 0 || self.b == 0 || self.c == 0 || self.d == 0
    }

    /// `(a·d)/(b·c)` without correction; `None` when a cell is zero.
    pub fn cross_product_ratio(&self) -> Option<f64> {
        if self.has_zero_cell() {
            return None;
        }
        Some((self.a as f64 * self.d as f64) / (self.b as f64 * self.c as f64))
    }

    /// Swaps the partisan and non-partisan rows.
    pub fn swap_rows(&self) -> Self {
        ContingencyTable2x2::new(self.c, self.d, self.a, self.b)
    }
}

/// Counts the table from explicit account sets. Partisans absent from the
/// network are ignored.
pub fn contingency_from_sets(
    partisans: &BTreeSet<AccountIdx>,
    nodes: &BTreeSet<AccountIdx>,
    contra: &BTreeSet<AccountIdx>,
) -> ContingencyTable2x2 {
    let mut t = ContingencyTable2x2::default();
    for node in nodes {
        match (partisans.contains(node), contra.contains(node)) {
            (true, true) => t.a += 1,
            (true, false) => t.b += 1,
            (false, true) => t.c += 1,
            (false, false) => t.d += 1,
        }
    }
    t
}

fn contra_members(
    target: &RetweetNetwork,
    partition: &CommunityPartition,
    labeling: &ClusterLabeling,
) -> Result<BTreeSet<AccountIdx>, HashjackError> {
    if labeling.network != target.hashtag {
        return Err(HashjackError::NetworkMismatch {
            network: target.hashtag.clone(),
            labeling: labeling.network.clone(),
        });
    }
    if labeling.contra().is_none() {
        return Err(HashjackError::NoContra(target.hashtag.clone()));
    }
    Ok(labeling.members_with(partition, Label::Contra))
}

pub fn contingency(
    partisans: &PartisanAssignment,
    target: &RetweetNetwork,
    partition: &CommunityPartition,
    labeling: &ClusterLabeling,
) -> Result<ContingencyTable2x2, HashjackError> {
    let contra = contra_members(target, partition, labeling)?;
    Ok(contingency_from_sets(&partisans.members, target.nodes(), &contra))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddsRatio {
    pub odds_ratio: f64,
    /// 95% interval of `ln(odds_ratio)`.
    pub log_ci95: (f64, f64),
    pub ci_low: f64,
    pub ci_high: f64,
    /// Haldane–Anscombe correction (+0.5 per cell) was applied.
    pub corrected: bool,
    /// Risk ratio `(a/(a+b)) / (c/(c+d))`, on the corrected table when
    /// `corrected` is set.
    pub risk_ratio: f64,
}

pub fn odds_ratio(table: &ContingencyTable2x2) -> OddsRatio {
    let corrected = table.has_zero_cell();
    let shift = if corrected { 0.5 } else { 0.0 };
    let [a, b, c, d] = [table.a, table.b, table.c, table.d].map(|x| x as f64 + shift);
    let or = (a * d) / (b * c);
    let se = (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt();
    let log_or = or.ln();
    let log_ci95 = (log_or - Z_95 * se, log_or + Z_95 * se);
    OddsRatio {
        odds_ratio: or,
        log_ci95,
        ci_low: log_ci95.0.exp(),
        ci_high: log_ci95.1.exp(),
        corrected,
        risk_ratio: (a / (a + b)) / (c / (c + d)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub beta0: f64,
    pub beta1: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The outcome is perfectly predicted in one predictor group, so the
    /// maximum-likelihood slope does not exist.
    pub separation: bool,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// IRLS for `logit P(y=1) = β0 + β1·x` over weighted observations
/// `(x, y, weight)`.
fn irls(rows: &[(f64, f64, f64)]) -> (f64, f64, bool, usize) {
    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    for iter in 1..=IRLS_MAX_ITERATIONS {
        // normal equations X'WX β = X'Wz
        let (mut s00, mut s01, mut s11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y, w) in rows {
            let eta = b0 + b1 * x;
            let p = sigmoid(eta);
            let var = (p * (1.0 - p)).max(1e-300);
            let z = eta + (y - p) / var;
            let wv = w * var;
            s00 += wv;
            s01 += wv * x;
            s11 += wv * x * x;
            r0 += wv * z;
            r1 += wv * x * z;
        }
        let det = s00 * s11 - s01 * s01;
        if det.abs() < 1e-300 || !det.is_finite() {
            return (b0, b1, false, iter);
        }
        let n0 = (s11 * r0 - s01 * r1) / det;
        let n1 = (s00 * r1 - s01 * r0) / det;
        let change = (n0 - b0).abs().max((n1 - b1).abs());
        b0 = n0;
        b1 = n1;
        if change < IRLS_TOLERANCE {
            return (b0, b1, true, iter);
        }
    }
    (b0, b1, false, IRLS_MAX_ITERATIONS)
}

fn fit_weighted(table: &ContingencyTable2x2) -> LogisticFit {
    if table.has_zero_cell() {
        return LogisticFit {
            beta0: f64::NAN,
            beta1: f64::NAN,
            converged: false,
            iterations: 0,
            separation: true,
        };
    }
    let rows = [
        (1.0, 1.0, table.a as f64),
        (1.0, 0.0, table.b as f64),
        (0.0, 1.0, table.c as f64),
        (0.0, 0.0, table.d as f64),
    ];
    let (beta0, beta1, converged, iterations) = irls(&rows);
    LogisticFit {
        beta0,
        beta1,
        converged,
        iterations,
        separation: false,
    }
}

/// Fits `logit P(outcome) = β0 + β1·predictor` on per-account data.
///
/// A zero cell in the implied 2×2 table means (quasi-)complete separation:
/// the fit is reported with `converged = false` and `separation = true`.
pub fn fit_logistic(outcomes: &[bool], predictor: &[bool]) -> Result<LogisticFit, HashjackError> {
    if outcomes.len() != predictor.len() {
        return Err(HashjackError::LengthMismatch {
            outcomes: outcomes.len(),
            predictor: predictor.len(),
        });
    }
    let positives = outcomes.iter().filter(|&&y| y).count();
    if positives == 0 || positives == outcomes.len() {
        return Err(HashjackError::OneSidedOutcome);
    }
    let mut table = ContingencyTable2x2::default();
    for (&y, &x) in outcomes.iter().zip(predictor) {
        match (x, y) {
            (true, true) => table.a += 1,
            (true, false) => table.b += 1,
            (false, true) => table.c += 1,
            (false, false) => table.d += 1,
        }
    }
    if table.has_zero_cell() {
        return Ok(fit_weighted(&table));
    }
    let rows: Vec<(f64, f64, f64)> = outcomes
        .iter()
        .zip(predictor)
        .map(|(&y, &x)| (f64::from(u8::from(x)), f64::from(u8::from(y)), 1.0))
        .collect();
    let (beta0, beta1, converged, iterations) = irls(&rows);
    Ok(LogisticFit {
        beta0,
        beta1,
        converged,
        iterations,
        separation: false,
    })
}

/// Same model fitted on the four cell counts as weighted observations.
pub fn fit_logistic_table(table: &ContingencyTable2x2) -> Result<LogisticFit, HashjackError> {
    let positives = table.a + table.c;
    if positives == 0 || positives == table.total() {
        return Err(HashjackError::OneSidedOutcome);
    }
    Ok(fit_weighted(table))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateFlag {
    /// A zero cell; the odds ratio and interval use the +0.5 correction.
    HaldaneCorrected,
    /// Logistic slope undefined (separation); the corrected OR is reported.
    Separation,
    /// IRLS hit the iteration cap before converging.
    NotConverged,
    /// No partisan of this party appears in the target network.
    NoPartisansInTarget,
    /// Every account of the target network is a partisan.
    NoNonPartisans,
    /// Target is the party's own network.
    OwnNetwork,
}

impl fmt::Display for EstimateFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashjackEstimate {
    pub party: String,
    pub target: String,
    pub table: ContingencyTable2x2,
    pub odds_ratio: f64,
    /// `ad/bc` on the raw table, absent when a cell is zero.
    pub odds_ratio_uncorrected: Option<f64>,
    pub log_or_ci95: (f64, f64),
    pub ci_low: f64,
    pub ci_high: f64,
    pub risk_ratio: f64,
    /// `None` when the slope is undefined.
    pub logistic_beta0: Option<f64>,
    pub logistic_beta: Option<f64>,
    pub converged: bool,
    pub flags: Vec<EstimateFlag>,
}

impl HashjackEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.flags.iter().any(|f| {
            matches!(
                f,
                EstimateFlag::NoPartisansInTarget | EstimateFlag::NoNonPartisans
            )
        })
    }

    pub fn ci_covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Odds ratio, interval and logistic fit for one partisan set and target.
pub fn estimate(
    partisans: &PartisanAssignment,
    target: &RetweetNetwork,
    partition: &CommunityPartition,
    labeling: &ClusterLabeling,
) -> Result<HashjackEstimate, HashjackError> {
    let contra = contra_members(target, partition, labeling)?;
    let nodes = target.nodes();
    let table = contingency_from_sets(&partisans.members, nodes, &contra);
    let outcomes: Vec<bool> = nodes.iter().map(|n| contra.contains(n)).collect();
    let predictor: Vec<bool> = nodes.iter().map(|n| partisans.contains(*n)).collect();
    let fit = fit_logistic(&outcomes, &predictor).ok();
    Ok(assemble(&partisans.party, &target.hashtag, table, fit))
}

/// Builds an estimate from a table and an optional logistic fit (absent
/// when the outcome is one-sided).
pub fn assemble(
    party: &str,
    target: &str,
    table: ContingencyTable2x2,
    fit: Option<LogisticFit>,
) -> HashjackEstimate {
    let or = odds_ratio(&table);
    let mut flags = Vec::new();
    if or.corrected {
        flags.push(EstimateFlag::HaldaneCorrected);
    }
    if table.a + table.b == 0 {
        flags.push(EstimateFlag::NoPartisansInTarget);
    }
    if table.c + table.d == 0 {
        flags.push(EstimateFlag::NoNonPartisans);
    }
    if party == target {
        flags.push(EstimateFlag::OwnNetwork);
    }
    let (beta0, beta1, converged) = match fit {
        Some(f) if f.separation => {
            flags.push(EstimateFlag::Separation);
            (None, None, false)
        }
        Some(f) => {
            if !f.converged {
                flags.push(EstimateFlag::NotConverged);
            }
            (Some(f.beta0), Some(f.beta1), f.converged)
        }
        None => {
            flags.push(EstimateFlag::Separation);
            (None, None, false)
        }
    };
    flags.sort();
    flags.dedup();
    HashjackEstimate {
        party: party.to_string(),
        target: target.to_string(),
        table,
        odds_ratio: or.odds_ratio,
        odds_ratio_uncorrected: table.cross_product_ratio(),
        log_or_ci95: or.log_ci95,
        ci_low: or.ci_low,
        ci_high: or.ci_high,
        risk_ratio: or.risk_ratio,
        logistic_beta0: beta0,
        logistic_beta: beta1,
        converged,
        flags,
    }
}

/// A target network with its partition and labeling.
#[derive(Debug, Clone, Copy)]
pub struct Target<'a> {
    pub network: &'a RetweetNetwork,
    pub partition: &'a CommunityPartition,
    pub labeling: &'a ClusterLabeling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub party: String,
    pub target: String,
    pub estimate: Option<HashjackEstimate>,
    pub error: Option<String>,
}

/// One estimate per (partisan set, target) pair. Failures are recorded in
/// their cell.
pub fn hashjack_matrix(parties: &[PartisanAssignment], targets: &[Target<'_>]) -> Vec<MatrixCell> {
    let mut cells = Vec::with_capacity(parties.len() * targets.len());
    for p in parties {
        for t in targets {
            let result = estimate(p, t.network, t.partition, t.labeling);
            cells.push(MatrixCell {
                party: p.party.clone(),
                target: t.network.hashtag.clone(),
                error: result.as_ref().err().map(ToString::to_string),
                estimate: result.ok(),
            });
        }
    }
    cells
}

/// Flat row of `odds.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddsRow {
    pub party: String,
    pub target: String,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    #[serde(rename = "or")]
    pub odds_ratio: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub risk_ratio: Option<f64>,
    pub beta1: Option<f64>,
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<&MatrixCell> for OddsRow {
    fn from(cell: &MatrixCell) -> Self {
        match &cell.estimate {
            Some(e) => OddsRow {
                party: cell.party.clone(),
                target: cell.target.clone(),
                a: e.table.a,
                b: e.table.b,
                c: e.table.c,
                d: e.table.d,
                odds_ratio: Some(e.odds_ratio),
                ci_low: Some(e.ci_low),
                ci_high: Some(e.ci_high),
                risk_ratio: Some(e.risk_ratio),
                beta1: e.logistic_beta,
                flags: e.flags.iter().map(ToString::to_string).collect(),
                error: None,
            },
            None => OddsRow {
                party: cell.party.clone(),
                target: cell.target.clone(),
                a: 0,
                b: 0,
                c: 0,
                d: 0,
                odds_ratio: None,
                ci_low: None,
                ci_high: None,
                risk_ratio: None,
                beta1: None,
                flags: Vec::new(),
                error: cell.error.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(t: &ContingencyTable2x2) -> (Vec<bool>, Vec<bool>) {
        let mut y = Vec::new();
        let mut x = Vec::new();
        for (count, xi, yi) in [(t.a, true, true), (t.b, true, false), (t.c, false, true), (t.d, false, false)] {
            for _ in 0..count {
                x.push(xi);
                y.push(yi);
            }
        }
        (y, x)
    }

    #[test]
    fn worked_table() {
        let t = ContingencyTable2x2::new(50, 50, 100, 400);
        let or = odds_ratio(&t);
        assert_eq!(or.odds_ratio, 4.0);
        assert!(!or.corrected);
        let se = (1.0f64 / 50.0 + 1.0 / 50.0 + 1.0 / 100.0 + 1.0 / 400.0).sqrt();
        assert!((or.ci_low - (4.0f64.ln() - 1.96 * se).exp()).abs() < 1e-12);
        assert!((or.ci_high - (4.0f64.ln() + 1.96 * se).exp()).abs() < 1e-12);
        assert!((or.risk_ratio - 0.5 / 0.2).abs() < 1e-12);
    }

    #[test]
    fn logistic_slope_is_log_or() {
        let t = ContingencyTable2x2::new(50, 50, 100, 400);
        let (y, x) = expand(&t);
        let fit = fit_logistic(&y, &x).unwrap();
        assert!(fit.converged);
        assert!((fit.beta1 - 4.0f64.ln()).abs() < 1e-6, "{}", fit.beta1);
        assert!((fit.beta0 - (100.0f64 / 400.0).ln()).abs() < 1e-6);
        let agg = fit_logistic_table(&t).unwrap();
        assert!((agg.beta1 - fit.beta1).abs() < 1e-9);
    }

    #[test]
    fn independent_predictor_gives_zero_slope() {
        let t = ContingencyTable2x2::new(20, 80, 20, 80);
        let (y, x) = expand(&t);
        let fit = fit_logistic(&y, &x).unwrap();
        assert!(fit.beta1.abs() < 1e-9);
        assert_eq!(odds_ratio(&t).odds_ratio, 1.0);
    }

    #[test]
    fn separation_flagged() {
        let t = ContingencyTable2x2::new(30, 0, 10, 60);
        let (y, x) = expand(&t);
        let fit = fit_logistic(&y, &x).unwrap();
        assert!(!fit.converged);
        assert!(fit.separation);
        let e = assemble("#afd", "#c", t, Some(fit));
        assert!(e.flags.contains(&EstimateFlag::Separation));
        assert!(e.flags.contains(&EstimateFlag::HaldaneCorrected));
        assert!(e.logistic_beta.is_none());
        assert!((e.odds_ratio - (30.5 * 60.5) / (0.5 * 10.5)).abs() < 1e-9);
    }

    #[test]
    fn one_sided_outcome_is_error() {
        assert_eq!(
            fit_logistic(&[true, true], &[true, false]),
            Err(HashjackError::OneSidedOutcome)
        );
        assert!(fit_logistic(&[true], &[true, false]).is_err());
    }

    #[test]
    fn contingency_counts_present_accounts_only() {
        let nodes: BTreeSet<AccountIdx> = (0..600).collect();
        let partisans: BTreeSet<AccountIdx> = (0..100).chain(1000..1050).collect();
        let contra: BTreeSet<AccountIdx> = (0..50).chain(100..200).collect();
        let t = contingency_from_sets(&partisans, &nodes, &contra);
        assert_eq!(t, ContingencyTable2x2::new(50, 50, 100, 400));
        assert_eq!(t.total(), 600);
    }

    #[test]
    fn empty_partisan_overlap_is_degenerate() {
        let nodes: BTreeSet<AccountIdx> = (0..10).collect();
        let contra: BTreeSet<AccountIdx> = (0..3).collect();
        let partisans: BTreeSet<AccountIdx> = (50..60).collect();
        let t = contingency_from_sets(&partisans, &nodes, &contra);
        assert_eq!(t, ContingencyTable2x2::new(0, 0, 3, 7));
        let e = assemble("#afd", "#c", t, fit_logistic_table(&t).ok());
        assert!(e.is_degenerate());
        assert!(e.flags.contains(&EstimateFlag::NoPartisansInTarget));
    }

    #[test]
    fn odds_row_from_error_cell() {
        let cell = MatrixCell {
            party: "#afd".into(),
            target: "#c".into(),
            estimate: None,
            error: Some("boom".into()),
        };
        let row = OddsRow::from(&cell);
        assert_eq!(row.error.as_deref(), Some("boom"));
        let json = serde_json::to_value(&row).unwrap();
        assert!(json.get("or").is_some());
    }
}
