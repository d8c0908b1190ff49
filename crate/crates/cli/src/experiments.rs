//! Experiment runners: configuration in, typed tables and plots out.

use polarmem::channel::{FiniteStateChannel, MemoryChannel};
use polarmem::metrics::{
    fsc_mi_w, fsc_output_pair_mi, fsc_single_layer_mi, fsc_z_w, fsc_zg, i_dagger, lemma1_residual,
    mi_w, z_w, zg_conditional, zg_w, Lemma1Terms,
};
use polarmem::noise::{noise_pair_mi, MarkovNoiseModel};
use polarmem::polar::select_frozen;
use polarmem::quadrature::QuadratureSpec;
use polarmem::ratebounds::{
    empirical_rate_check, estimate_rho_lambda, simulate_bound_processes, BoundProcessConfig,
    GenieZLevel, RateConstants,
};
use polarmem::trellis::{
    mc_split, simulate_ber, split_channel_exact, theorem4_exact, theorem4_mc, PolarIndexReport,
};
use polarmem::EstimateWithCI;

use crate::checks::*;
use crate::config::{Experiment, ExperimentConfig, Model};
use crate::error::CliError;
use crate::records::*;
use crate::svg::{histogram, LinePlot, Series};

/// Longest block enumerated exactly; longer blocks use Monte Carlo.
pub const EXACT_MAX_LEN: usize = 8;

pub struct RunResult {
    pub outputs: Outputs,
    pub plots: Vec<(String, String)>,
    /// Quantities whose numerical evaluation did not converge.
    pub flagged: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    spec: QuadratureSpec,
    flagged: Vec<String>,
}

impl Ctx<'_> {
    fn seed(&self, stream: u64) -> u64 {
        self.cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream)
    }

    fn metric(&mut self, quantity: &str, e: &EstimateWithCI) -> MetricRow {
        if e.flagged {
            self.flagged.push(quantity.to_owned());
        }
        MetricRow::new(quantity, self.cfg.model_id(), &self.cfg.params_hash(), e)
    }

    fn noise_pair(&self) -> Result<EstimateWithCI, CliError> {
        Ok(match self.cfg.model()? {
            Model::GilbertElliott(ge) => ge.noise_pair_mi(),
            Model::Gaussian(ch) => noise_pair_mi(ch.noise(), &self.spec)?,
            Model::Student(ch) => noise_pair_mi(ch.noise(), &self.spec)?,
        })
    }

    /// `I(W) + I†(W)` on the finite-state form.
    fn limit(&mut self, fsc: &FiniteStateChannel) -> Result<f64, CliError> {
        let dag = i_dagger(fsc, self.noise_pair()?)?;
        if dag.value.flagged {
            self.flagged.push(I_DAGGER.into());
        }
        Ok(fsc_mi_w(fsc).value + dag.value.value)
    }

    /// Exact report for short blocks, Monte Carlo otherwise, plus the block-average row.
    fn report(&self, fsc: &FiniteStateChannel, len: usize, stream: u64) -> Result<(PolarIndexReport, (f64, f64)), CliError> {
        if len <= EXACT_MAX_LEN {
            let rep = PolarIndexReport::from_exact(len, &split_channel_exact(fsc, len)?);
            let m = rep.mean_i();
            Ok((rep, (m, 0.0)))
        } else {
            let split = mc_split(fsc, len, self.cfg.budget.samples, self.seed(stream))?;
            let m = split.mean_i();
            Ok((split.report(), (m.value, m.stderr)))
        }
    }
}

fn report_rows(rep: &PolarIndexReport) -> Vec<ReportRow> {
    rep.rows
        .iter()
        .map(|r| ReportRow {
            len: rep.len,
            index: r.index,
            z: r.z.value,
            z_stderr: r.z.stderr,
            mi: r.i.value,
            mi_stderr: r.i.stderr,
            method: r.i.method.as_str().into(),
        })
        .collect()
}

fn terms_rows(ctx: &mut Ctx, t: &Lemma1Terms, z: &EstimateWithCI, zg: &EstimateWithCI, dag: &EstimateWithCI) -> Vec<MetricRow> {
    let residual = EstimateWithCI {
        value: t.residual(),
        stderr: t.tolerance(),
        ..t.i_w
    }
    .with_flag(t.flagged());
    let gap = EstimateWithCI {
        value: t.gap(),
        stderr: t.i_first.stderr + t.i_second.stderr + 2.0 * t.i_w.stderr,
        ..t.i_w
    };
    let predicted = EstimateWithCI {
        value: t.predicted_gap(),
        stderr: t.noise_pair.stderr + t.output_pair.stderr,
        ..t.output_pair
    };
    vec![
        ctx.metric(MI_W, &t.i_w),
        ctx.metric(Z_W, z),
        ctx.metric(ZG_W, zg),
        ctx.metric(NOISE_PAIR, &t.noise_pair),
        ctx.metric(OUTPUT_PAIR, &t.output_pair),
        ctx.metric(FIRST_CHILD, &t.i_first),
        ctx.metric(SECOND_CHILD, &t.i_second),
        ctx.metric(GAP, &gap),
        ctx.metric(NOISE_MINUS_OUTPUT, &predicted),
        ctx.metric(RESIDUAL, &residual),
        ctx.metric(I_DAGGER, dag),
    ]
}

fn continuous_metrics<N: MarkovNoiseModel>(ctx: &mut Ctx, ch: &MemoryChannel<N>) -> Result<Vec<MetricRow>, CliError> {
    let terms = lemma1_residual(ch, &ctx.spec)?;
    let z = z_w(ch, &ctx.spec);
    let zg = zg_w(ch, &ctx.spec);
    let dag = i_dagger(&ctx.cfg.fsc()?, terms.noise_pair)?.value;
    Ok(terms_rows(ctx, &terms, &z, &zg, &dag))
}

fn run_metrics(ctx: &mut Ctx) -> Result<Outputs, CliError> {
    let metrics = match ctx.cfg.model()? {
        Model::Gaussian(ch) => continuous_metrics(ctx, &ch)?,
        Model::Student(ch) => continuous_metrics(ctx, &ch)?,
        Model::GilbertElliott(ge) => {
            let fsc = FiniteStateChannel::gilbert_elliott(&ge);
            let (i_first, i_second) = fsc_single_layer_mi(&fsc);
            let terms = Lemma1Terms {
                i_w: fsc_mi_w(&fsc),
                i_first,
                i_second,
                noise_pair: ge.noise_pair_mi(),
                output_pair: fsc_output_pair_mi(&fsc),
            };
            let zg = EstimateWithCI::enumeration(fsc_zg(&fsc).mean, fsc.states());
            let dag = i_dagger(&fsc, terms.noise_pair)?.value;
            terms_rows(ctx, &terms, &fsc_z_w(&fsc), &zg, &dag)
        }
    };
    Ok(Outputs::Metrics { metrics })
}

fn run_polarize(ctx: &mut Ctx, ladder: &[usize]) -> Result<(Outputs, Vec<(String, String)>), CliError> {
    let fsc = ctx.cfg.fsc()?;
    let target = ctx.limit(&fsc)?;
    let mut report = Vec::new();
    let mut average = Vec::new();
    let mut trend = Vec::new();
    let mut last = None;
    for (k, &len) in ladder.iter().enumerate() {
        let (rep, (mean, se)) = ctx.report(&fsc, len, k as u64)?;
        let good = rep.fraction(|r| r.i.value > GOOD_LEVEL);
        trend.push(TrendRecord {
            len,
            threshold: GOOD_LEVEL,
            fraction: good,
            stderr: (good * (1.0 - good) / len as f64).sqrt(),
            target,
        });
        average.push(AverageRow {
            len,
            mean_mi: mean,
            stderr: se,
            target,
        });
        report.extend(report_rows(&rep));
        last = Some(rep);
    }
    let mut plots = Vec::new();
    if let Some(rep) = last {
        let values: Vec<f64> = rep.rows.iter().map(|r| r.i.value).collect();
        plots.push((
            "histogram.svg".into(),
            histogram(&format!("Subchannel mutual information, L = {}", rep.len), "I", &values, 20, 0.0, 1.0),
        ));
    }
    let log_len = |l: usize| (l as f64).log2();
    plots.push((
        "trend.svg".into(),
        LinePlot {
            title: "Polarization trend",
            x_label: "log2 L",
            y_label: "fraction / average",
            series: vec![
                Series::new("frac I > 0.99", trend.iter().map(|t| (log_len(t.len), t.fraction)).collect()),
                Series::new("average I", average.iter().map(|a| (log_len(a.len), a.mean_mi)).collect()),
                Series::new("limit", ladder.iter().map(|&l| (log_len(l), target)).collect()).dashed(),
            ],
        }
        .render(),
    ));
    Ok((Outputs::Polarize { report, average, trend }, plots))
}

fn run_theorem4(ctx: &mut Ctx, ladder: &[usize]) -> Result<Outputs, CliError> {
    let fsc = ctx.cfg.fsc()?;
    let mut theorem4 = Vec::new();
    for (k, &len) in ladder.iter().enumerate() {
        let recs = if 2 * len <= EXACT_MAX_LEN {
            theorem4_exact(&fsc, len)?
        } else {
            theorem4_mc(&fsc, len, ctx.cfg.budget.samples, ctx.seed(k as u64))?
        };
        for r in recs {
            for c in r.checks {
                theorem4.push(Theorem4Row {
                    len: r.len,
                    index: r.index,
                    verdict: verdict_str(c.verdict).into(),
                    check: c.name,
                    lhs: c.lhs,
                    rhs: c.rhs,
                    stderr: c.stderr,
                });
            }
        }
    }
    Ok(Outputs::Theorem4 { theorem4 })
}

#[allow(clippy::too_many_arguments)]
fn run_rate(
    ctx: &mut Ctx,
    ladder: &[usize],
    exact_levels: &[usize],
    l_max: u32,
    process_rho: Option<f64>,
    process_lambda: Option<f64>,
) -> Result<(Outputs, Vec<(String, String)>), CliError> {
    let fsc = ctx.cfg.fsc()?;
    let target = ctx.limit(&fsc)?;
    let mut levels = Vec::new();
    let mut start = None;
    for &len in exact_levels {
        let rows = split_channel_exact(&fsc, len)?;
        if len == 2 {
            let logs = rows.iter().map(|r| r.z.log2());
            let s2 = logs.clone().fold(f64::INFINITY, f64::min);
            let u2 = logs.fold(f64::NEG_INFINITY, f64::max);
            start = Some((s2, u2));
        }
        levels.push(GenieZLevel::from_exact(&rows));
    }
    let (s2, u2) = start.expect("validated: exact levels include 2");
    let rl = estimate_rho_lambda(&levels)?;
    let constants = RateConstants::new(rl.rho, rl.lambda, s2);
    let mut reports = Vec::new();
    let mut report = Vec::new();
    for (k, &len) in ladder.iter().enumerate() {
        let (rep, _) = ctx.report(&fsc, len, k as u64)?;
        report.extend(report_rows(&rep));
        reports.push(rep);
    }
    let trend = empirical_rate_check(&reports, &constants, target)?;
    let pcfg = BoundProcessConfig {
        rho: process_rho.unwrap_or(rl.rho),
        lambda: process_lambda.unwrap_or(rl.lambda),
        s2,
        u2,
        l_max,
    };
    let stats = simulate_bound_processes(&pcfg, ctx.cfg.budget.paths, ctx.seed(1000))?;
    if stats.flagged {
        ctx.flagged.push("bound-processes".into());
    }
    let processes: Vec<ProcessRow> = stats
        .levels
        .iter()
        .map(|lv| ProcessRow {
            l: lv.l,
            upper_fraction: lv.upper_fraction,
            upper_stderr: lv.upper_stderr,
            lower_fraction: lv.lower_fraction,
            lower_stderr: lv.lower_stderr,
            mean_upper: lv.mean_u,
            mean_lower: lv.mean_s,
            upper_log_threshold: stats.constants.upper_log_threshold(lv.l),
            lower_log_threshold: stats.constants.lower_log_threshold(lv.l),
        })
        .collect();
    let exact = |v: f64| EstimateWithCI::enumeration(v, 1);
    let metrics = vec![
        ctx.metric("ratio-sup", &exact(rl.rho)),
        ctx.metric("contraction-inf", &exact(rl.lambda)),
        ctx.metric("upper-constant-c0", &exact(constants.c0)),
        ctx.metric("upper-exponent-c1", &exact(constants.c1)),
        ctx.metric("lower-constant-c2", &exact(constants.c2)),
        ctx.metric("start-lower-log", &exact(s2)),
        ctx.metric("start-upper-log", &exact(u2)),
        ctx.metric(LIMIT_MEAN, &exact(target)),
    ];
    let log_len = |l: usize| (l as f64).log2();
    let plots = vec![
        (
            "rate_trend.svg".into(),
            LinePlot {
                title: "Fraction below the upper rate threshold",
                x_label: "log2 L",
                y_label: "fraction",
                series: vec![
                    Series::new("Pr[Z <= c0 L^(c1/2)]", trend.upper.iter().map(|t| (log_len(t.len), t.fraction)).collect()),
                    Series::new("limit", trend.upper.iter().map(|t| (log_len(t.len), t.target)).collect()).dashed(),
                ],
            }
            .render(),
        ),
        (
            "processes.svg".into(),
            LinePlot {
                title: "Bounding processes",
                x_label: "l",
                y_label: "fraction",
                series: vec![
                    Series::new("upper below threshold", processes.iter().map(|p| (p.l as f64, p.upper_fraction)).collect()),
                    Series::new("lower above threshold", processes.iter().map(|p| (p.l as f64, p.lower_fraction)).collect()),
                ],
            }
            .render(),
        ),
    ];
    Ok((
        Outputs::Rate {
            metrics,
            report,
            upper: trend.upper,
            lower: trend.lower,
            processes,
        },
        plots,
    ))
}

fn run_ber(ctx: &mut Ctx, len: usize, rate: f64, blocks: &[usize]) -> Result<(Outputs, Vec<(String, String)>), CliError> {
    let fsc = ctx.cfg.fsc()?;
    let (rep, _) = ctx.report(&fsc, len, 0)?;
    let frozen = select_frozen(&rep, rate)?;
    let mut ber = Vec::new();
    for (k, &b) in blocks.iter().enumerate() {
        let cmp = simulate_ber(&fsc, &frozen, b, ctx.seed(100 + k as u64))?;
        for (name, p) in [(MEMORY_AWARE, &cmp.memory_aware), (MEMORYLESS, &cmp.memoryless)] {
            ber.push(BerRow {
                len,
                rate,
                blocks: p.blocks,
                decoder: name.into(),
                info_bits: p.info_bits,
                ber: p.ber,
                stderr: p.stderr,
            });
        }
    }
    let series = |dec: &str| {
        ber.iter()
            .filter(|r| r.decoder == dec)
            .map(|r| ((r.blocks as f64).log10(), r.ber))
            .collect()
    };
    let plot = LinePlot {
        title: &format!("SC decoding, L = {len}, rate {rate}"),
        x_label: "log10 blocks",
        y_label: "bit-error rate",
        series: vec![Series::new(MEMORY_AWARE, series(MEMORY_AWARE)), Series::new(MEMORYLESS, series(MEMORYLESS))],
    }
    .render();
    Ok((
        Outputs::Ber {
            report: report_rows(&rep),
            ber,
        },
        vec![("ber.svg".into(), plot)],
    ))
}

fn fig3_row<N: MarkovNoiseModel>(ctx: &mut Ctx, ch: &MemoryChannel<N>, amplitude: f64) -> Result<Fig3Row, CliError> {
    let t = lemma1_residual(ch, &ctx.spec)?;
    if t.flagged() {
        ctx.flagged.push(format!("length-two terms at amplitude {amplitude}"));
    }
    Ok(Fig3Row {
        amplitude,
        mi_w: t.i_w.value,
        mi_children_sum: t.i_first.value + t.i_second.value,
        gap: t.gap(),
        noise_minus_output: t.predicted_gap(),
        output_pair_mi: t.output_pair.value,
        tolerance: t.tolerance(),
    })
}

fn run_fig3(ctx: &mut Ctx, amplitudes: &[f64]) -> Result<(Outputs, Vec<(String, String)>), CliError> {
    let mut fig3 = Vec::new();
    for &a in amplitudes {
        fig3.push(match ctx.cfg.model_at(a)? {
            Model::Gaussian(ch) => fig3_row(ctx, &ch, a)?,
            Model::Student(ch) => fig3_row(ctx, &ch, a)?,
            Model::GilbertElliott(_) => unreachable!("validated: continuous model"),
        });
    }
    let col = |f: fn(&Fig3Row) -> f64| fig3.iter().map(|r| (r.amplitude, f(r))).collect();
    let plot = LinePlot {
        title: "Single polarization step",
        x_label: "amplitude",
        y_label: "bits",
        series: vec![
            Series::new("2 I(W)", col(|r| 2.0 * r.mi_w)),
            Series::new("I(W2_1) + I(W2_2)", col(|r| r.mi_children_sum)),
            Series::new("gap", col(|r| r.gap)),
            Series::new("I(Y0;Y1)", col(|r| r.output_pair_mi)),
        ],
    }
    .render();
    Ok((Outputs::Fig3 { fig3 }, vec![("fig3.svg".into(), plot)]))
}

fn fig4_rows<N: MarkovNoiseModel>(ctx: &mut Ctx, ch: &MemoryChannel<N>, t0: &[f64]) -> (Vec<Fig4Row>, Vec<MetricRow>) {
    let rows = t0
        .iter()
        .map(|&t| {
            let e = zg_conditional(ch, t, &ctx.spec);
            if e.flagged {
                ctx.flagged.push(format!("genie Z at t0 = {t}"));
            }
            Fig4Row {
                t0: t,
                genie_z: e.value,
                stderr: e.stderr,
            }
        })
        .collect();
    let metrics = vec![
        ctx.metric(MI_W, &mi_w(ch, &ctx.spec)),
        ctx.metric(Z_W, &z_w(ch, &ctx.spec)),
        ctx.metric(ZG_W, &zg_w(ch, &ctx.spec)),
    ];
    (rows, metrics)
}

fn run_fig4(ctx: &mut Ctx, t0: &[f64]) -> Result<(Outputs, Vec<(String, String)>), CliError> {
    let (fig4, metrics) = match ctx.cfg.model()? {
        Model::Gaussian(ch) => fig4_rows(ctx, &ch, t0),
        Model::Student(ch) => fig4_rows(ctx, &ch, t0),
        Model::GilbertElliott(_) => unreachable!("validated: continuous model"),
    };
    let constant = |q: &str| {
        let v = metrics.iter().find(|m| m.quantity == q).map_or(f64::NAN, |m| m.value);
        t0.iter().map(|&t| (t, v)).collect()
    };
    let plot = LinePlot {
        title: "Genie-aided Bhattacharyya parameter",
        x_label: "previous noise t0",
        y_label: "Z",
        series: vec![
            Series::new("Zg(W | t0)", fig4.iter().map(|r| (r.t0, r.genie_z)).collect()),
            Series::new("Z(W)", constant(Z_W)).dashed(),
            Series::new("Zg(W)", constant(ZG_W)).dashed(),
        ],
    }
    .render();
    Ok((Outputs::Fig4 { fig4, metrics }, vec![("fig4.svg".into(), plot)]))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunResult, CliError> {
    let mut ctx = Ctx {
        cfg,
        spec: QuadratureSpec::default(),
        flagged: Vec::new(),
    };
    let (outputs, plots) = match &cfg.experiment {
        Experiment::Metrics => (run_metrics(&mut ctx)?, Vec::new()),
        Experiment::Polarize { ladder } => run_polarize(&mut ctx, ladder)?,
        Experiment::Theorem4 { ladder } => (run_theorem4(&mut ctx, ladder)?, Vec::new()),
        Experiment::Rate {
            ladder,
            exact_levels,
            l_max,
            process_rho,
            process_lambda,
        } => run_rate(&mut ctx, ladder, exact_levels, *l_max, *process_rho, *process_lambda)?,
        Experiment::Ber { len, rate, blocks } => run_ber(&mut ctx, *len, *rate, blocks)?,
        Experiment::Fig3 { amplitudes } => run_fig3(&mut ctx, amplitudes)?,
        Experiment::Fig4 { t0 } => run_fig4(&mut ctx, t0)?,
    };
    Ok(RunResult {
        outputs,
        plots,
        flagged: ctx.flagged,
    })
}
