//! Experiment outputs and the predicates re-checked from them.
//!
//! The same predicates run after `run` and during `verify`, so a verified
//! directory needs nothing beyond its CSV files.

use std::collections::BTreeMap;
use std::path::Path;

use polarmem::metrics::i_z_bounds_check_tol;
use polarmem::trellis::{InequalityCheck, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::records::*;

pub const MI_W: &str = "mutual-information";
pub const Z_W: &str = "bhattacharyya";
pub const ZG_W: &str = "genie-bhattacharyya";
pub const NOISE_PAIR: &str = "noise-pair-mi";
pub const OUTPUT_PAIR: &str = "output-pair-mi";
pub const FIRST_CHILD: &str = "first-child-mi";
pub const SECOND_CHILD: &str = "second-child-mi";
pub const GAP: &str = "length-two-gap";
pub const NOISE_MINUS_OUTPUT: &str = "noise-minus-output";
pub const RESIDUAL: &str = "length-two-residual";
pub const I_DAGGER: &str = "i-dagger";
pub const LIMIT_MEAN: &str = "limit-mean-mi";

/// Absolute tolerance of the length-two identity on top of three reported errors.
pub const IDENTITY_TOL: f64 = 2e-3;
/// Distance allowed between the longest block's average and its limit.
pub const MEAN_TARGET_TOL: f64 = 0.03;
/// Distance allowed between a threshold fraction and its limit.
pub const FRACTION_TARGET_TOL: f64 = 0.05;
pub const GOOD_LEVEL: f64 = 0.99;
pub const MIDDLE_BAND: (f64, f64) = (0.1, 0.9);
pub const PROCESS_TAIL: f64 = 0.99;
const SIGMAS: f64 = 3.0;
const ROUNDING: f64 = 1e-12;

pub const MEMORY_AWARE: &str = "memory-aware";
pub const MEMORYLESS: &str = "memoryless";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Typed tables of one experiment kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Outputs {
    Metrics {
        metrics: Vec<MetricRow>,
    },
    Polarize {
        report: Vec<ReportRow>,
        average: Vec<AverageRow>,
        trend: Vec<TrendRecord>,
    },
    Theorem4 {
        theorem4: Vec<Theorem4Row>,
    },
    Rate {
        metrics: Vec<MetricRow>,
        report: Vec<ReportRow>,
        upper: Vec<TrendRecord>,
        lower: Vec<TrendRecord>,
        processes: Vec<ProcessRow>,
    },
    Ber {
        report: Vec<ReportRow>,
        ber: Vec<BerRow>,
    },
    Fig3 {
        fig3: Vec<Fig3Row>,
    },
    Fig4 {
        fig4: Vec<Fig4Row>,
        metrics: Vec<MetricRow>,
    },
}

impl Outputs {
    pub fn kind(&self) -> &'static str {
        match self {
            Outputs::Metrics { .. } => "metrics",
            Outputs::Polarize { .. } => "polarize",
            Outputs::Theorem4 { .. } => "theorem4",
            Outputs::Rate { .. } => "rate",
            Outputs::Ber { .. } => "ber",
            Outputs::Fig3 { .. } => "fig3",
            Outputs::Fig4 { .. } => "fig4",
        }
    }

    /// `(file name, CSV bytes)` for every table.
    pub fn tables(&self) -> Result<Vec<(&'static str, Vec<u8>)>, csv::Error> {
        Ok(match self {
            Outputs::Metrics { metrics } => vec![(METRICS_CSV, to_csv(metrics)?)],
            Outputs::Polarize { report, average, trend } => vec![
                (REPORT_CSV, to_csv(report)?),
                (AVERAGE_CSV, to_csv(average)?),
                (TREND_CSV, to_csv(trend)?),
            ],
            Outputs::Theorem4 { theorem4 } => vec![(THEOREM4_CSV, to_csv(theorem4)?)],
            Outputs::Rate {
                metrics,
                report,
                upper,
                lower,
                processes,
            } => vec![
                (METRICS_CSV, to_csv(metrics)?),
                (REPORT_CSV, to_csv(report)?),
                (TREND_CSV, to_csv(upper)?),
                (LOWER_TREND_CSV, to_csv(lower)?),
                (PROCESSES_CSV, to_csv(processes)?),
            ],
            Outputs::Ber { report, ber } => vec![(REPORT_CSV, to_csv(report)?), (BER_CSV, to_csv(ber)?)],
            Outputs::Fig3 { fig3 } => vec![(FIG3_CSV, to_csv(fig3)?)],
            Outputs::Fig4 { fig4, metrics } => {
                vec![(FIG4_CSV, to_csv(fig4)?), (METRICS_CSV, to_csv(metrics)?)]
            }
        })
    }

    /// Reads the tables of `kind` back from `dir`.
    pub fn read(dir: &Path, kind: &str) -> Result<Self, CliError> {
        let p = |f: &str| dir.join(f);
        Ok(match kind {
            "metrics" => Outputs::Metrics {
                metrics: read_csv(&p(METRICS_CSV))?,
            },
            "polarize" => Outputs::Polarize {
                report: read_csv(&p(REPORT_CSV))?,
                average: read_csv(&p(AVERAGE_CSV))?,
                trend: read_csv(&p(TREND_CSV))?,
            },
            "theorem4" => Outputs::Theorem4 {
                theorem4: read_csv(&p(THEOREM4_CSV))?,
            },
            "rate" => Outputs::Rate {
                metrics: read_csv(&p(METRICS_CSV))?,
                report: read_csv(&p(REPORT_CSV))?,
                upper: read_csv(&p(TREND_CSV))?,
                lower: read_csv(&p(LOWER_TREND_CSV))?,
                processes: read_csv(&p(PROCESSES_CSV))?,
            },
            "ber" => Outputs::Ber {
                report: read_csv(&p(REPORT_CSV))?,
                ber: read_csv(&p(BER_CSV))?,
            },
            "fig3" => Outputs::Fig3 {
                fig3: read_csv(&p(FIG3_CSV))?,
            },
            "fig4" => Outputs::Fig4 {
                fig4: read_csv(&p(FIG4_CSV))?,
                metrics: read_csv(&p(METRICS_CSV))?,
            },
            other => return Err(CliError::artifact(dir, format!("unknown experiment kind {other:?}"))),
        })
    }

    pub fn checks(&self) -> Vec<Check> {
        match self {
            Outputs::Metrics { metrics } => metric_checks(metrics),
            Outputs::Polarize { report, average, trend } => polarize_checks(report, average, trend),
            Outputs::Theorem4 { theorem4 } => theorem4_checks(theorem4),
            Outputs::Rate {
                report,
                upper,
                processes,
                ..
            } => rate_checks(report, upper, processes),
            Outputs::Ber { report, ber } => ber_checks(report, ber),
            Outputs::Fig3 { fig3 } => fig3_checks(fig3),
            Outputs::Fig4 { fig4, metrics } => fig4_checks(fig4, metrics),
        }
    }
}

fn combined(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// `next ≥ prev` within three combined standard errors.
fn holds_non_decreasing(prev: (f64, f64), next: (f64, f64)) -> bool {
    next.0 >= prev.0 - SIGMAS * combined(prev.1, next.1) - ROUNDING
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn lookup<'a>(rows: &'a [MetricRow], q: &str) -> Option<&'a MetricRow> {
    rows.iter().find(|r| r.quantity == q)
}

fn missing(name: &str, what: &str) -> Check {
    Check::new(name, false, format!("missing {what}"))
}

fn i_z_pair_check(rows: &[MetricRow]) -> Check {
    let name = "i-z-bounds";
    match (lookup(rows, MI_W), lookup(rows, Z_W)) {
        (Some(i), Some(z)) => {
            let tol = SIGMAS * (i.stderr + z.stderr) + ROUNDING;
            Check::new(
                name,
                i_z_bounds_check_tol(i.value, z.value, tol),
                format!("I(W)={:.6} Z(W)={:.6}", i.value, z.value),
            )
        }
        _ => missing(name, "I(W) or Z(W)"),
    }
}

fn genie_below_check(rows: &[MetricRow], strict: bool) -> Check {
    let name = "genie-below-bhattacharyya";
    match (lookup(rows, ZG_W), lookup(rows, Z_W)) {
        (Some(g), Some(z)) => {
            let margin = z.value - g.value;
            let tol = g.stderr + z.stderr;
            let pass = if strict { margin > tol } else { margin >= -(SIGMAS * tol + ROUNDING) };
            Check::new(
                name,
                pass,
                format!("Zg(W)={:.6} Z(W)={:.6} margin={margin:.3e}", g.value, z.value),
            )
        }
        _ => missing(name, "Zg(W) or Z(W)"),
    }
}

fn metric_checks(rows: &[MetricRow]) -> Vec<Check> {
    let mut out = vec![i_z_pair_check(rows), genie_below_check(rows, false)];
    let name = "length-two-identity";
    out.push(match lookup(rows, RESIDUAL) {
        Some(r) => Check::new(
            name,
            r.value.abs() <= IDENTITY_TOL + SIGMAS * r.stderr,
            format!("residual {:+.3e} (reported error {:.1e})", r.value, r.stderr),
        ),
        None => missing(name, "residual"),
    });
    let name = "i-dagger-non-negative";
    out.push(match lookup(rows, I_DAGGER) {
        Some(r) => Check::new(
            name,
            r.value >= -(SIGMAS * r.stderr + ROUNDING),
            format!("I-dagger {:.6e}", r.value),
        ),
        None => missing(name, "I-dagger"),
    });
    out
}

fn report_bounds_check(report: &[ReportRow]) -> Check {
    let bad: Vec<String> = report
        .iter()
        .filter(|r| {
            let tol = SIGMAS * (r.mi_stderr + r.z_stderr) + ROUNDING;
            !i_z_bounds_check_tol(r.mi, r.z, tol)
        })
        .map(|r| format!("L={} i={}", r.len, r.index))
        .collect();
    Check::new(
        "i-z-bounds",
        bad.is_empty() && !report.is_empty(),
        format!("{} rows, {} outside bounds {:?}", report.len(), bad.len(), bad),
    )
}

fn by_len(report: &[ReportRow]) -> BTreeMap<usize, Vec<&ReportRow>> {
    let mut m: BTreeMap<usize, Vec<&ReportRow>> = BTreeMap::new();
    for r in report {
        m.entry(r.len).or_default().push(r);
    }
    for rows in m.values_mut() {
        rows.sort_by_key(|r| r.index);
    }
    m
}

fn fraction(rows: &[&ReportRow], pred: impl Fn(f64) -> bool) -> f64 {
    rows.iter().filter(|r| pred(r.mi)).count() as f64 / rows.len() as f64
}

fn polarize_checks(report: &[ReportRow], average: &[AverageRow], trend: &[TrendRecord]) -> Vec<Check> {
    let mut out = vec![report_bounds_check(report)];
    let groups = by_len(report);

    let mut outside = 0;
    let mut total = 0;
    for rows in groups.values() {
        for pair in rows.chunks_exact(2) {
            total += 1;
            let (o, e) = (pair[0], pair[1]);
            if e.mi < o.mi - SIGMAS * combined(o.mi_stderr, e.mi_stderr) - ROUNDING {
                outside += 1;
            }
        }
    }
    out.push(Check::new(
        "adjacent-ordering",
        outside == 0,
        format!("{outside} of {total} adjacent pairs with I(even) < I(odd) beyond 3 sigma"),
    ));

    let mut growth_checked = 0;
    let mut growth_failed = 0;
    for (len, parent) in &groups {
        if let Some(child) = groups.get(&(2 * len)) {
            for (i, p) in parent.iter().enumerate() {
                let (o, e) = (child[2 * i], child[2 * i + 1]);
                let se = (o.mi_stderr.powi(2) + e.mi_stderr.powi(2) + 4.0 * p.mi_stderr.powi(2)).sqrt();
                growth_checked += 1;
                if o.mi + e.mi < 2.0 * p.mi - SIGMAS * se - ROUNDING {
                    growth_failed += 1;
                }
            }
        }
    }
    if growth_checked > 0 {
        out.push(Check::new(
            "sum-growth",
            growth_failed == 0,
            format!("{growth_failed} of {growth_checked} parents with child sum below twice the parent"),
        ));
    }

    let mono = average
        .windows(2)
        .all(|w| holds_non_decreasing((w[0].mean_mi, w[0].stderr), (w[1].mean_mi, w[1].stderr)));
    out.push(Check::new(
        "average-mi-non-decreasing",
        mono && !average.is_empty(),
        average
            .iter()
            .map(|a| format!("L={}: {:.5}±{:.5}", a.len, a.mean_mi, a.stderr))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    out.push(match average.last() {
        Some(a) => Check::new(
            "average-mi-near-limit",
            (a.mean_mi - a.target).abs() < MEAN_TARGET_TOL,
            format!("L={}: {:.5} vs limit {:.5}", a.len, a.mean_mi, a.target),
        ),
        None => missing("average-mi-near-limit", "averages"),
    });

    let good: Vec<(usize, f64)> = groups
        .iter()
        .map(|(len, rows)| (*len, fraction(rows, |i| i > GOOD_LEVEL)))
        .collect();
    let mid: Vec<f64> = groups
        .values()
        .map(|rows| fraction(rows, |i| i > MIDDLE_BAND.0 && i < MIDDLE_BAND.1))
        .collect();
    let good_mono = good
        .windows(2)
        .all(|w| holds_non_decreasing((w[0].1, binomial_se(w[0].1, w[0].0)), (w[1].1, binomial_se(w[1].1, w[1].0))));
    out.push(Check::new(
        "good-fraction-non-decreasing",
        good_mono,
        good.iter()
            .map(|(l, f)| format!("L={l}: {f:.4}"))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    let mid_falls = mid.windows(2).all(|w| w[1] <= w[0]) && mid.len() >= 2 && mid[mid.len() - 1] < mid[0];
    out.push(Check::new(
        "middle-fraction-decreasing",
        mid_falls,
        mid.iter().map(|f| format!("{f:.4}")).collect::<Vec<_>>().join(", "),
    ));
    out.push(match (good.last(), trend.last()) {
        (Some((len, f)), Some(t)) => Check::new(
            "good-fraction-near-limit",
            (f - t.target).abs() < FRACTION_TARGET_TOL,
            format!("L={len}: {f:.4} vs limit {:.4}", t.target),
        ),
        _ => missing("good-fraction-near-limit", "fractions"),
    });
    out
}

fn theorem4_checks(rows: &[Theorem4Row]) -> Vec<Check> {
    let mut per: BTreeMap<&str, (usize, usize, usize, usize)> = BTreeMap::new();
    for r in rows {
        let v = InequalityCheck::new(&r.check, r.lhs, r.rhs, r.stderr).verdict;
        let e = per.entry(r.check.as_str()).or_default();
        e.0 += 1;
        match v {
            Verdict::Violated => e.1 += 1,
            Verdict::Inconclusive => e.2 += 1,
            Verdict::Holds => {}
        }
        if verdict_str(v) != r.verdict {
            e.3 += 1;
        }
    }
    per.into_iter()
        .map(|(name, (n, viol, inc, mismatch))| {
            Check::new(
                name,
                viol == 0 && mismatch == 0,
                format!("{n} comparisons, {viol} violated, {inc} inconclusive, {mismatch} recorded verdicts disagree"),
            )
        })
        .collect()
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Inconclusive => "inconclusive",
        Verdict::Violated => "violated",
    }
}

fn rate_checks(report: &[ReportRow], upper: &[TrendRecord], processes: &[ProcessRow]) -> Vec<Check> {
    let mut out = vec![report_bounds_check(report)];
    let mono = upper
        .windows(2)
        .all(|w| holds_non_decreasing((w[0].fraction, w[0].stderr), (w[1].fraction, w[1].stderr)));
    out.push(Check::new(
        "upper-fraction-non-decreasing",
        mono && !upper.is_empty(),
        upper
            .iter()
            .map(|t| format!("L={}: {:.4}", t.len, t.fraction))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    out.push(match upper.last() {
        Some(t) => Check::new(
            "upper-fraction-near-limit",
            (t.fraction - t.target).abs() < FRACTION_TARGET_TOL,
            format!("L={}: {:.4} vs limit {:.4}", t.len, t.fraction, t.target),
        ),
        None => missing("upper-fraction-near-limit", "trend"),
    });
    out.push(match processes.last() {
        Some(p) => Check::new(
            "process-upper-tail",
            p.upper_fraction > PROCESS_TAIL,
            format!(
                "l={}: fraction below threshold {:.4}±{:.4}; mean {:.3} vs log threshold {:.3}",
                p.l, p.upper_fraction, p.upper_stderr, p.mean_upper, p.upper_log_threshold
            ),
        ),
        None => missing("process-upper-tail", "process levels"),
    });
    out
}

fn ber_checks(report: &[ReportRow], ber: &[BerRow]) -> Vec<Check> {
    let mut out = vec![report_bounds_check(report)];
    let largest = ber.iter().map(|r| r.blocks).max();
    let pick = |dec: &str| ber.iter().find(|r| Some(r.blocks) == largest && r.decoder == dec);
    out.push(match (pick(MEMORY_AWARE), pick(MEMORYLESS)) {
        (Some(a), Some(m)) => {
            let (a_hi, m_lo) = (a.ber + 1.96 * a.stderr, m.ber - 1.96 * m.stderr);
            Check::new(
                "memory-aware-better",
                a.ber < m.ber && a_hi < m_lo,
                format!(
                    "{} blocks: memory-aware {:.5}±{:.5}, memoryless {:.5}±{:.5}",
                    a.blocks, a.ber, a.stderr, m.ber, m.stderr
                ),
            )
        }
        _ => missing("memory-aware-better", "both decoders at the largest budget"),
    });
    out
}

fn fig3_checks(rows: &[Fig3Row]) -> Vec<Check> {
    let positive = rows.iter().all(|r| r.gap > 0.0);
    let worst = rows
        .iter()
        .map(|r| (r.gap - r.noise_minus_output).abs() - SIGMAS * r.tolerance)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = vec![
        Check::new(
            "gap-positive",
            positive && !rows.is_empty(),
            rows.iter()
                .map(|r| format!("{}: {:.5}", r.amplitude, r.gap))
                .collect::<Vec<_>>()
                .join(", "),
        ),
        Check::new(
            "length-two-identity",
            worst <= IDENTITY_TOL,
            format!("largest excess residual {worst:.3e}"),
        ),
    ];
    if rows.len() >= 3 {
        let interior = rows.windows(3).any(|w| {
            let (a, b, c) = (w[0].output_pair_mi, w[1].output_pair_mi, w[2].output_pair_mi);
            (b < a && b < c) || (b > a && b > c)
        });
        out.push(Check::new(
            "output-pair-interior-extremum",
            interior,
            "output-pair information is non-monotone over the sweep",
        ));
    }
    out
}

fn fig4_checks(rows: &[Fig4Row], metrics: &[MetricRow]) -> Vec<Check> {
    let mut out = Vec::new();
    if rows.is_empty() {
        out.push(missing("genie-profile-minimum", "profile"));
        return out;
    }
    let centre = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.t0.abs().total_cmp(&b.1.t0.abs()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let argmin = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.genie_z.total_cmp(&b.1.genie_z))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let slack = |a: &Fig4Row, b: &Fig4Row| SIGMAS * combined(a.stderr, b.stderr) + ROUNDING;
    let right = (centre..rows.len() - 1).all(|k| rows[k + 1].genie_z >= rows[k].genie_z - slack(&rows[k], &rows[k + 1]));
    let left = (1..=centre).all(|k| rows[k - 1].genie_z >= rows[k].genie_z - slack(&rows[k - 1], &rows[k]));
    let lowest = rows[argmin].genie_z;
    let centred = rows[centre].genie_z <= lowest + slack(&rows[centre], &rows[argmin]);
    out.push(Check::new(
        "genie-profile-minimum",
        centred && left && right,
        format!(
            "minimum {lowest:.6} at t0={}, value at t0={} is {:.6}, non-decreasing away from it: {}",
            rows[argmin].t0,
            rows[centre].t0,
            rows[centre].genie_z,
            left && right
        ),
    ));
    out.push(i_z_pair_check(metrics));
    out.push(genie_below_check(metrics, true));
    out
}
