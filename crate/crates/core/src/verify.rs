//! Monitors and experiment suites.
//!
//! Time integrals are discrete: `L2(0,T;X)` norms become `(sum tau |.|_X^2)^{1/2}`
//! over the completed steps and `L-infinity` norms become maxima over all time
//! levels. Experiments that need several trajectories run them on scoped
//! threads; the number of workers is capped by the `CHBS_THREADS` environment
//! variable and results are always aggregated in input order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::rng::FieldRng;
use crate::scheme::{self, RunOutput, SchemeConfig, SchemeState};
use crate::spaces::{
    form_a, inner_h, inner_v, mean, norm_h, norm_h0_in_v0_star, norm_v, norm_v0, norm_v_star,
    poincare_constant, project_zero_mean, subgrad_phi, FieldPair, Functional,
};

/// Lower bound on the right-hand side of the continuous-dependence ratio.
pub const RHS_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub total_mass: f64,
    pub energy: f64,
    pub norm_v_v0: f64,
    pub norm_v_v0star: f64,
    pub norm_mu_v: f64,
    pub l1_xi_bulk: f64,
    pub l1_xi_surf: f64,
    pub envelope_integral_bulk: f64,
    pub envelope_integral_surf: f64,
    pub omega: f64,
    pub newton_iters: usize,
}

impl MonitorRecord {
    pub fn capture(dom: &DiscreteDomain, cfg: &SchemeConfig, s: &SchemeState, newton_iters: usize) -> Result<Self> {
        let u = s.u();
        let (env_b, env_s) = scheme::envelope_integrals(dom, cfg, s)?;
        let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        Ok(MonitorRecord {
            t: s.t,
            total_mass: dom.integrate_bulk(&u.bulk)? + dom.integrate_surf(&u.boundary)?,
            energy: scheme::energy(dom, cfg, s)?,
            norm_v_v0: norm_v0(dom, &s.v)?,
            norm_v_v0star: norm_h0_in_v0_star(dom, &s.v)?,
            norm_mu_v: norm_v(dom, &s.mu)?,
            l1_xi_bulk: dom.integrate_bulk(&abs(&s.xi.bulk))?,
            l1_xi_surf: dom.integrate_surf(&abs(&s.xi.boundary))?,
            envelope_integral_bulk: env_b,
            envelope_integral_surf: env_s,
            omega: s.omega,
            newton_iters,
        })
    }
}

/// Per-level quantities used by the a priori table but not monitored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxRecord {
    pub norm_v_h0: f64,
    /// `|(v^n - v^{n-1}) / tau|_{V0*}`; zero at the initial level.
    pub dq_v0star: f64,
}

impl AuxRecord {
    pub fn capture(dom: &DiscreteDomain, cfg: &SchemeConfig, prev: Option<&SchemeState>, s: &SchemeState) -> Result<Self> {
        let dq_v0star = match prev {
            Some(p) => norm_h0_in_v0_star(dom, &s.v.sub(&p.v).scaled(1.0 / cfg.tau))?,
            None => 0.0,
        };
        Ok(AuxRecord {
            norm_v_h0: norm_h(dom, &s.v)?,
            dq_v0star,
        })
    }
}

/// One line of a pass/fail report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn render(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Common interface of experiment reports.
pub trait Report {
    fn passed(&self) -> bool;
    fn text(&self) -> String;
    /// Header and rows of the CSV form.
    fn csv(&self) -> (Vec<String>, Vec<Vec<String>>);
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// Worker count for experiment fan-out.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("CHBS_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => cap.min(available.max(1)),
        _ => available,
    }
}

/// Maps `f` over `items` on up to [`worker_count`] threads; output order
/// follows input order.
pub fn fan_out<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = worker_count().min(items.len()).max(1);
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot is filled"))
        .collect()
}

// ---------------------------------------------------------------------------
// A priori bounds

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriRow {
    pub eps: f64,
    pub eps_sqrt_max_v_h0: f64,
    pub max_v_v0star: f64,
    pub l2_v_v0: f64,
    pub l1_xi: f64,
    pub max_envelope: f64,
    pub l2_omega: f64,
    pub l2_mu_v: f64,
    pub l2_dq_v0star: f64,
}

impl AprioriRow {
    pub const COLUMNS: [&'static str; 8] = [
        "eps_sqrt_max_v_h0",
        "max_v_v0star",
        "l2_v_v0",
        "l1_xi",
        "max_envelope",
        "l2_omega",
        "l2_mu_v",
        "l2_dq_v0star",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.eps_sqrt_max_v_h0,
            self.max_v_v0star,
            self.l2_v_v0,
            self.l1_xi,
            self.max_envelope,
            self.l2_omega,
            self.l2_mu_v,
            self.l2_dq_v0star,
        ]
    }

    pub fn from_run(cfg: &SchemeConfig, out: &RunOutput) -> Self {
        let tau = cfg.tau;
        let steps = &out.records[1..];
        let l2 = |f: &dyn Fn(usize) -> f64| -> f64 {
            (1..out.records.len()).map(|k| tau * f(k).powi(2)).sum::<f64>().sqrt()
        };
        let max_h0 = out.aux.iter().map(|a| a.norm_v_h0).fold(0.0, f64::max);
        AprioriRow {
            eps: cfg.eps,
            eps_sqrt_max_v_h0: cfg.eps.sqrt() * max_h0,
            max_v_v0star: out.records.iter().map(|r| r.norm_v_v0star).fold(0.0, f64::max),
            l2_v_v0: l2(&|k| out.records[k].norm_v_v0),
            l1_xi: steps.iter().map(|r| tau * (r.l1_xi_bulk + r.l1_xi_surf)).sum(),
            max_envelope: out
                .records
                .iter()
                .map(|r| r.envelope_integral_bulk + r.envelope_integral_surf)
                .fold(0.0, f64::max),
            l2_omega: l2(&|k| out.records[k].omega),
            l2_mu_v: l2(&|k| out.records[k].norm_mu_v),
            l2_dq_v0star: l2(&|k| out.aux[k].dq_v0star),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AprioriTable {
    pub rows: Vec<AprioriRow>,
    /// `max / min` of each column across rows (`1` for an all-zero column).
    pub column_ratios: Vec<(&'static str, f64)>,
}

/// Largest admissible `max / min` ratio of a column.
pub const APRIORI_RATIO_LIMIT: f64 = 10.0;

impl AprioriTable {
    pub fn bounded(&self) -> bool {
        self.column_ratios.iter().all(|(_, r)| *r <= APRIORI_RATIO_LIMIT)
    }
}

pub fn apriori_bound_table(runs: &[(&SchemeConfig, &RunOutput)]) -> AprioriTable {
    let rows: Vec<AprioriRow> = runs.iter().map(|(c, o)| AprioriRow::from_run(c, o)).collect();
    let column_ratios = AprioriRow::COLUMNS
        .iter()
        .enumerate()
        .map(|(j, &name)| {
            let col: Vec<f64> = rows.iter().map(|r| r.values()[j].abs()).collect();
            let max = col.iter().copied().fold(0.0, f64::max);
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            let ratio = if max == 0.0 { 1.0 } else { max / min };
            (name, ratio)
        })
        .collect();
    AprioriTable { rows, column_ratios }
}

// ---------------------------------------------------------------------------
// Continuous dependence

/// Initial datum and forcing of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub u0: FieldPair,
    pub forcing: Forcing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceLevel {
    pub tau: f64,
    /// `sup_t LHS(t) / max(RHS(t), RHS_FLOOR)`.
    pub sup_ratio: f64,
    pub sup_lhs: f64,
    pub max_rhs: f64,
    pub completed: bool,
}

impl DependenceLevel {
    pub fn degenerate(&self) -> bool {
        self.max_rhs == 0.0
    }
}

/// Continuous-dependence ratio of two data sets at the time step of `cfg`.
pub fn dependence_level(dom: &DiscreteDomain, cfg: &SchemeConfig, d1: &DataSet, d2: &DataSet) -> Result<DependenceLevel> {
    let m1 = mean(dom, &d1.u0)?;
    let m2 = mean(dom, &d2.u0)?;
    if (m1 - m2).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "data sets have different means ({m1} vs {m2})"
        )));
    }
    let pair = [d1, d2];
    let mut outs = fan_out(&pair, |d| scheme::run(dom, cfg, &d.u0, &d.forcing, 1))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let o2 = outs.pop().unwrap();
    let o1 = outs.pop().unwrap();
    let completed = o1.completed() && o2.completed();
    let levels = o1.snapshots.len().min(o2.snapshots.len());
    let tau = cfg.tau;

    let dv0 = o1.snapshots[0].v.sub(&o2.snapshots[0].v);
    let mut rhs = norm_h0_in_v0_star(dom, &dv0)?.powi(2);
    let mut integral = 0.0;
    let mut sup_ratio = 0.0f64;
    let mut sup_lhs = 0.0f64;
    let mut max_rhs = rhs;
    for k in 0..levels {
        let dv = o1.snapshots[k].v.sub(&o2.snapshots[k].v);
        if k > 0 {
            let t = o1.snapshots[k].t;
            let df = d1.forcing.sample(dom, t).sub(&d2.forcing.sample(dom, t));
            rhs += tau * norm_v_star(dom, &Functional::from_h_pair(dom, &df)?)?.powi(2);
            integral += tau * norm_v0(dom, &dv)?.powi(2);
        }
        let lhs = norm_h0_in_v0_star(dom, &dv)?.powi(2) + integral;
        sup_lhs = sup_lhs.max(lhs);
        max_rhs = max_rhs.max(rhs);
        sup_ratio = sup_ratio.max(lhs / rhs.max(RHS_FLOOR));
    }
    Ok(DependenceLevel {
        tau,
        sup_ratio,
        sup_lhs,
        max_rhs,
        completed,
    })
}

fn variation(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        (max - min) / min
    }
}

/// Largest admissible relative spread of the ratio under time-step refinement.
pub const TAU_VARIATION_LIMIT: f64 = 0.3;
/// Largest admissible relative spread of the ratio across perturbation scales.
pub const SCALE_VARIATION_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDependenceReport {
    /// Levels `tau, tau/2, tau/4`.
    pub levels: Vec<DependenceLevel>,
    /// `(max - min) / min` of the ratios.
    pub variation: f64,
}

impl ContinuousDependenceReport {
    pub fn degenerate(&self) -> bool {
        self.levels.iter().all(|l| l.degenerate())
    }
}

impl Report for ContinuousDependenceReport {
    fn passed(&self) -> bool {
        if !self.levels.iter().all(|l| l.completed) {
            return false;
        }
        if self.degenerate() {
            return self.levels.iter().all(|l| l.sup_lhs == 0.0);
        }
        self.variation < TAU_VARIATION_LIMIT
    }

    fn text(&self) -> String {
        let mut s = String::from("continuous dependence\n");
        if self.degenerate() {
            s.push_str("ratio: 0 (degenerate)\n");
        } else {
            for l in &self.levels {
                s.push_str(&format!(
                    "tau {:.3e}: ratio {:.6e} (sup lhs {:.3e}, max rhs {:.3e}){}\n",
                    l.tau,
                    l.sup_ratio,
                    l.sup_lhs,
                    l.max_rhs,
                    if l.completed { "" } else { " incomplete" }
                ));
            }
            s.push_str(&format!("variation across tau: {:.4}\n", self.variation));
        }
        let line = CheckLine::new(
            "ratio stable under tau refinement",
            self.passed(),
            format!("variation {:.4} (limit {TAU_VARIATION_LIMIT})", self.variation),
        );
        s.push_str(&line.render());
        s.push('\n');
        s
    }

    fn csv(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = ["tau", "sup_ratio", "sup_lhs", "max_rhs", "completed"]
            .map(String::from)
            .to_vec();
        let rows = self
            .levels
            .iter()
            .map(|l| {
                vec![
                    fmt(l.tau),
                    fmt(l.sup_ratio),
                    fmt(l.sup_lhs),
                    fmt(l.max_rhs),
                    l.completed.to_string(),
                ]
            })
            .collect();
        (header, rows)
    }
}

/// Runs both data sets at `tau`, `tau/2` and `tau/4`.
pub fn continuous_dependence_experiment(
    dom: &DiscreteDomain,
    cfg: &SchemeConfig,
    d1: &DataSet,
    d2: &DataSet,
) -> Result<ContinuousDependenceReport> {
    let configs = [1.0, 0.5, 0.25]
        .iter()
        .map(|s| cfg.clone().with_tau(cfg.tau * s))
        .collect::<Result<Vec<_>>>()?;
    let levels = fan_out(&configs, |c| dependence_level(dom, c, d1, d2))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = levels.iter().map(|l| l.sup_ratio).collect();
    Ok(ContinuousDependenceReport {
        variation: variation(&ratios),
        levels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSweepReport {
    pub scales: Vec<f64>,
    pub levels: Vec<DependenceLevel>,
    pub variation: f64,
}

impl ScaleSweepReport {
    pub fn passed(&self) -> bool {
        self.levels.iter().all(|l| l.completed) && self.variation < SCALE_VARIATION_LIMIT
    }
}

/// Compares `base` with `base.forcing + s * perturbation` for each scale `s`.
pub fn perturbation_scale_sweep(
    dom: &DiscreteDomain,
    cfg: &SchemeConfig,
    base: &DataSet,
    perturbation: &Forcing,
    scales: &[f64],
) -> Result<ScaleSweepReport> {
    let levels = fan_out(scales, |&s| {
        let other = DataSet {
            u0: base.u0.clone(),
            forcing: base.forcing.clone().perturbed(s, perturbation.clone()),
        };
        dependence_level(dom, cfg, base, &other)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = levels.iter().map(|l| l.sup_ratio).collect();
    Ok(ScaleSweepReport {
        scales: scales.to_vec(),
        variation: variation(&ratios),
        levels,
    })
}

// ---------------------------------------------------------------------------
// Vanishing regularization

/// Largest admissible `|d log |v|_{L2(V0)} / d log eps|`.
pub const EPS_SLOPE_LIMIT: f64 = 0.1;
/// Slack allowed when checking that successive distances do not increase.
pub const CAUCHY_SLACK: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct EpsStudyReport {
    pub eps: Vec<f64>,
    pub table: AprioriTable,
    /// `max_t |v_k - v_{k+1}|_{H0}` for consecutive entries of `eps`.
    pub d_h0: Vec<f64>,
    /// `(sum tau |v_k - v_{k+1}|_{V0}^2)^{1/2}`.
    pub d_l2_v0: Vec<f64>,
    /// Least-squares slope of `log |v|_{L2(V0)}` against `log eps`.
    pub slope: f64,
    /// Runs that stopped early, with their errors.
    pub failures: Vec<(f64, String)>,
}

impl EpsStudyReport {
    pub fn cauchy(&self) -> bool {
        self.d_h0.windows(2).all(|w| w[1] <= CAUCHY_SLACK * w[0])
    }

    pub fn slope_ok(&self) -> bool {
        self.slope.abs() <= EPS_SLOPE_LIMIT
    }

    pub fn checks(&self) -> Vec<CheckLine> {
        let seq = |d: &[f64]| d.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ");
        let worst = self
            .table
            .column_ratios
            .iter()
            .fold(("", 0.0f64), |acc, &(n, r)| if r > acc.1 { (n, r) } else { acc });
        vec![
            CheckLine::new(
                "all runs completed",
                self.failures.is_empty(),
                if self.failures.is_empty() {
                    "ok".to_string()
                } else {
                    self.failures
                        .iter()
                        .map(|(e, m)| format!("eps {e}: {m}"))
                        .collect::<Vec<_>>()
                        .join("; ")
                },
            ),
            CheckLine::new(
                "successive distances nonincreasing",
                self.cauchy(),
                format!("d_h0 = [{}], d_l2_v0 = [{}]", seq(&self.d_h0), seq(&self.d_l2_v0)),
            ),
            CheckLine::new(
                "a priori columns bounded",
                self.table.bounded(),
                format!(
                    "largest max/min {:.3} in {} (limit {APRIORI_RATIO_LIMIT})",
                    worst.1, worst.0
                ),
            ),
            CheckLine::new(
                "no growth of |v|_L2(V0) in eps",
                self.slope_ok(),
                format!("slope {:.4} (limit {EPS_SLOPE_LIMIT})", self.slope),
            ),
        ]
    }
}

impl Report for EpsStudyReport {
    fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    fn text(&self) -> String {
        let mut s = String::from("vanishing eps study\n");
        s.push_str(&format!("eps {}\n", AprioriRow::COLUMNS.join(" ")));
        for r in &self.table.rows {
            let vals: Vec<String> = r.values().iter().map(|v| format!("{v:.6e}")).collect();
            s.push_str(&format!("{} {}\n", r.eps, vals.join(" ")));
        }
        for c in self.checks() {
            s.push_str(&c.render());
            s.push('\n');
        }
        s
    }

    fn csv(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut header = vec!["eps".to_string()];
        header.extend(AprioriRow::COLUMNS.iter().map(|c| c.to_string()));
        header.push("d_h0_next".into());
        header.push("d_l2_v0_next".into());
        let rows = self
            .table
            .rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let mut row = vec![fmt(r.eps)];
                row.extend(r.values().iter().map(|v| fmt(*v)));
                row.push(self.d_h0.get(k).map_or(String::new(), |d| fmt(*d)));
                row.push(self.d_l2_v0.get(k).map_or(String::new(), |d| fmt(*d)));
                row
            })
            .collect();
        (header, rows)
    }
}

/// Runs the same data for every `eps` in `eps_list` (non-increasing, at
/// least three entries, all in `(0,1]`).
pub fn vanishing_eps_study(
    dom: &DiscreteDomain,
    cfg_base: &SchemeConfig,
    eps_list: &[f64],
    data: &DataSet,
) -> Result<EpsStudyReport> {
    if eps_list.len() < 3 {
        return Err(Error::Precondition(format!(
            "eps list needs at least 3 entries, got {}",
            eps_list.len()
        )));
    }
    if eps_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Precondition("eps list must be non-increasing".into()));
    }
    let configs = eps_list
        .iter()
        .map(|&e| cfg_base.clone().with_eps(e))
        .collect::<Result<Vec<_>>>()?;
    let outs = fan_out(&configs, |c| scheme::run(dom, c, &data.u0, &data.forcing, 1))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let failures = configs
        .iter()
        .zip(&outs)
        .filter_map(|(c, o)| o.failure.as_ref().map(|e| (c.eps, e.to_string())))
        .collect();

    let tau = cfg_base.tau;
    let mut d_h0 = Vec::new();
    let mut d_l2_v0 = Vec::new();
    for w in outs.windows(2) {
        let levels = w[0].snapshots.len().min(w[1].snapshots.len());
        let mut dmax = 0.0f64;
        let mut l2 = 0.0;
        for k in 0..levels {
            let dv = w[0].snapshots[k].v.sub(&w[1].snapshots[k].v);
            dmax = dmax.max(norm_h(dom, &dv)?);
            if k > 0 {
                l2 += tau * norm_v0(dom, &dv)?.powi(2);
            }
        }
        d_h0.push(dmax);
        d_l2_v0.push(l2.sqrt());
    }

    let runs: Vec<(&SchemeConfig, &RunOutput)> = configs.iter().zip(&outs).collect();
    let table = apriori_bound_table(&runs);
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.l2_v_v0 > 0.0)
        .map(|r| (r.eps.ln(), r.l2_v_v0.ln()))
        .collect();
    Ok(EpsStudyReport {
        eps: eps_list.to_vec(),
        slope: least_squares_slope(&pts),
        table,
        d_h0,
        d_l2_v0,
        failures,
    })
}

/// Slope of the least-squares line through `pts`; zero when undetermined.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

// ---------------------------------------------------------------------------
// Functional-analytic checks

/// Number of random fields used by the sampled Poincare check.
pub const POINCARE_SAMPLES: usize = 1000;
/// Number of random pairs used by the adjointness and projection checks.
pub const PAIR_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub resolution: usize,
    pub poincare: f64,
    pub lines: Vec<CheckLine>,
}

impl Report for AppendixReport {
    fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    fn text(&self) -> String {
        let mut s = format!("functional-analytic checks (n = {})\n", self.resolution);
        for l in &self.lines {
            s.push_str(&l.render());
            s.push('\n');
        }
        s
    }

    fn csv(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = ["check", "passed", "detail"].map(String::from).to_vec();
        let rows = self
            .lines
            .iter()
            .map(|l| vec![l.name.clone(), l.passed.to_string(), l.detail.clone()])
            .collect();
        (header, rows)
    }
}

/// Minimum of `(a(z,z) - c |z|_V^2) / |z|_V^2` over random zero-mean pairs.
pub fn poincare_min_slack(dom: &DiscreteDomain, c: f64, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = FieldRng::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let z = rng.zero_mean_pair(dom);
        let v = inner_v(dom, &z, &z)?;
        worst = worst.min((form_a(dom, &z, &z)? - c * v) / v);
    }
    Ok(worst)
}

/// Largest `|(d phi(z), w)_H - a(z, w)| / (|z|_V |w|_V)` over random pairs.
pub fn adjointness_defect(dom: &DiscreteDomain, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = FieldRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z = rng.zero_mean_pair(dom);
        let w = rng.zero_mean_pair(dom);
        let lhs = inner_h(dom, &subgrad_phi(dom, &z)?, &w)?;
        let rhs = form_a(dom, &z, &w)?;
        worst = worst.max((lhs - rhs).abs() / (norm_v(dom, &z)? * norm_v(dom, &w)?));
    }
    Ok(worst)
}

/// Largest `|(z*, P w)_H - (z*, w)_H| / (|z*|_H |w|_H)` over zero-mean `z*`
/// and arbitrary `H` pairs `w`.
pub fn projection_defect(dom: &DiscreteDomain, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = FieldRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let zs = project_zero_mean(dom, &rng.h_pair(dom))?;
        let w = rng.h_pair(dom);
        let a = inner_h(dom, &zs, &project_zero_mean(dom, &w)?)?;
        let b = inner_h(dom, &zs, &w)?;
        worst = worst.max((a - b).abs() / (norm_h(dom, &zs)? * norm_h(dom, &w)?));
    }
    Ok(worst)
}

/// Probe estimate of the smallest `c` with `|z|_H0 <= delta |z|_V0 + c |z|_V0*`:
/// the maximum of `(|z|_H0 - delta |z|_V0) / |z|_V0*` over projected
/// products of cosines (`k, l <= 4`) and `random` seeded fields.
pub fn interpolation_constant(dom: &DiscreteDomain, delta: f64, random: usize, seed: u64) -> Result<f64> {
    let pi = std::f64::consts::PI;
    let mut probes = Vec::new();
    for k in 0..=4 {
        for l in 0..=4 {
            if k + l == 0 {
                continue;
            }
            let bulk = dom.interpolate(|x, y| (k as f64 * pi * x).cos() * (l as f64 * pi * y).cos());
            probes.push(project_zero_mean(dom, &FieldPair::from_bulk(dom, bulk))?);
        }
    }
    let mut rng = FieldRng::new(seed);
    probes.extend((0..random).map(|_| rng.zero_mean_pair(dom)));
    let mut best = 0.0f64;
    for z in &probes {
        let dual = norm_h0_in_v0_star(dom, z)?;
        if dual > 0.0 {
            best = best.max((norm_h(dom, z)? - delta * norm_v0(dom, z)?) / dual);
        }
    }
    Ok(best)
}

/// Tolerance of the adjointness identity.
pub const ADJOINTNESS_TOL: f64 = 1e-10;

pub fn appendix_checks(dom: &DiscreteDomain, seed: u64) -> Result<AppendixReport> {
    let mut lines = Vec::new();
    let c = match poincare_constant(dom) {
        Ok(c) => c,
        Err(e) => {
            lines.push(CheckLine::new("poincare constant positive", false, e.to_string()));
            f64::NAN
        }
    };
    if c.is_finite() {
        lines.push(CheckLine::new(
            "poincare constant positive",
            c > 0.0 && c <= 1.0,
            format!("c_p = {c:.10}"),
        ));
        let slack = poincare_min_slack(dom, c, POINCARE_SAMPLES, seed)?;
        lines.push(CheckLine::new(
            "poincare inequality on samples",
            slack >= -1e-9,
            format!("{POINCARE_SAMPLES} samples, min relative slack {slack:.3e}"),
        ));
    }

    let adj = adjointness_defect(dom, PAIR_SAMPLES, seed.wrapping_add(1))?;
    lines.push(CheckLine::new(
        "subdifferential adjointness",
        adj <= ADJOINTNESS_TOL,
        format!("{PAIR_SAMPLES} pairs, max relative defect {adj:.3e}"),
    ));

    let proj = projection_defect(dom, PAIR_SAMPLES, seed.wrapping_add(2))?;
    lines.push(CheckLine::new(
        "projection identity",
        proj <= 1e-12,
        format!("{PAIR_SAMPLES} pairs, max relative defect {proj:.3e}"),
    ));

    let one = FieldPair::constant(dom, 1.0);
    let zero = subgrad_phi(dom, &project_zero_mean(dom, &one)?)?;
    let probe = FieldRng::new(seed.wrapping_add(3)).zero_mean_pair(dom);
    let a_const = form_a(dom, &one, &probe)?.abs();
    let g_max = zero.bulk.iter().chain(&zero.boundary).fold(0.0f64, |m, x| m.max(x.abs()));
    lines.push(CheckLine::new(
        "constants in the kernel",
        g_max == 0.0 && a_const <= 1e-12,
        format!("|d phi(P 1)| = {g_max:.3e}, |a(1, z)| = {a_const:.3e}"),
    ));

    for delta in [0.5, 0.1] {
        let cd = interpolation_constant(dom, delta, PAIR_SAMPLES, seed.wrapping_add(4))?;
        lines.push(CheckLine::new(
            format!("interpolation constant (delta = {delta})"),
            cd.is_finite(),
            format!("c_delta = {cd:.6}"),
        ));
    }

    Ok(AppendixReport {
        resolution: dom.resolution(),
        poincare: c,
        lines,
    })
}
