//! Backward-Euler time stepping of the regularized bulk-surface system.
//!
//! With `K` and `M` the coupled stiffness and lumped mass of trace-consistent
//! pairs (see [`crate::domain`]), each step solves for `(v, mu)`
//!
//! ```text
//! M (v - v_old)/tau + K mu                                   = 0
//! M mu - eps M (v - v_old)/tau - K v - B(u) - P(u*) + G(f)   = 0
//! ```
//!
//! where `u = v + m0`, `B` is the mass-lumped nodal Yosida term (boundary
//! nodes regularized with `eps * rho`), `P` the lumped perturbation term and
//! `G(f)` the `H` embedding of the forcing at the new time level. The
//! perturbation is evaluated at `u* = u_old` (convex splitting) or at
//! `u* = u` (fully implicit).
//!
//! The system is solved by damped Newton. After five unsuccessful halvings of
//! a Newton step the iteration switches to a Picard linearization that
//! replaces the derivative of `beta_eps` by its Lipschitz bound.

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::linalg::{dot, SparseLu};
use crate::monotone::GraphPair;
use crate::spaces::{form_a, mean, FieldPair, Functional};
use crate::verify::{AuxRecord, MonitorRecord};

const MAX_HALVINGS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// Monotone part implicit, perturbation explicit.
    #[default]
    ConvexSplit,
    FullyImplicit,
}

impl Splitting {
    pub fn name(self) -> &'static str {
        match self {
            Splitting::ConvexSplit => "convex-split",
            Splitting::FullyImplicit => "fully-implicit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "convex-split" => Some(Splitting::ConvexSplit),
            "fully-implicit" => Some(Splitting::FullyImplicit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub eps: f64,
    pub tau: f64,
    pub t_end: f64,
    pub graphs: GraphPair,
    /// Absolute tolerance on both weak residual norms.
    pub newton_tol: f64,
    pub newton_max: usize,
    pub splitting: Splitting,
    unregularized: bool,
}

impl SchemeConfig {
    pub fn new(graphs: GraphPair, eps: f64, tau: f64, t_end: f64) -> Result<Self> {
        let cfg = SchemeConfig {
            eps,
            tau,
            t_end,
            graphs,
            newton_tol: 1e-10,
            newton_max: 50,
            splitting: Splitting::ConvexSplit,
            unregularized: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Diagnostic configuration with `eps = 0`: the unregularized graphs are
    /// used directly and the viscous term vanishes. Only the fully implicit
    /// splitting and single-valued graphs are supported.
    pub fn unregularized(graphs: GraphPair, tau: f64, t_end: f64) -> Result<Self> {
        let cfg = SchemeConfig {
            eps: 0.0,
            tau,
            t_end,
            graphs,
            newton_tol: 1e-10,
            newton_max: 50,
            splitting: Splitting::FullyImplicit,
            unregularized: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_splitting(mut self, splitting: Splitting) -> Result<Self> {
        self.splitting = splitting;
        self.validate()?;
        Ok(self)
    }

    pub fn with_newton(mut self, tol: f64, max_iter: usize) -> Result<Self> {
        self.newton_tol = tol;
        self.newton_max = max_iter;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.tau = tau;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn is_unregularized(&self) -> bool {
        self.unregularized
    }

    pub fn validate(&self) -> Result<()> {
        if self.unregularized {
            if self.splitting != Splitting::FullyImplicit {
                return Err(Error::Config("eps = 0 requires the fully-implicit splitting".into()));
            }
            if self.graphs.bulk.kind == crate::GraphKind::Obstacle
                || self.graphs.boundary.kind == crate::GraphKind::Obstacle
            {
                return Err(Error::Config("eps = 0 is not available for the obstacle graph".into()));
            }
        } else if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::Config(format!("eps must lie in (0,1], got {}", self.eps)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return Err(Error::Config(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max == 0 {
            return Err(Error::Config("newton_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end` (the last step may overshoot
    /// by less than `tau`).
    pub fn num_steps(&self) -> usize {
        let q = self.t_end / self.tau;
        let r = q.round();
        if (q - r).abs() <= 1e-9 * q.max(1.0) {
            r as usize
        } else {
            q.ceil() as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState {
    /// Zero-mean part of the order parameter, trace-consistent.
    pub v: FieldPair,
    pub mu: FieldPair,
    /// Nodal Yosida values `beta_eps(u)`, `beta_{Gamma,eps}(u_Gamma)`.
    pub xi: FieldPair,
    pub omega: f64,
    pub t: f64,
    pub step_index: usize,
    pub m0: f64,
}

impl SchemeState {
    /// `u = v + m0 1`.
    pub fn u(&self) -> FieldPair {
        self.v.shifted(self.m0)
    }
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub r1: f64,
    pub r2: f64,
    pub picard: bool,
}

struct Nonlinear<'a> {
    dom: &'a DiscreteDomain,
    cfg: &'a SchemeConfig,
    m0: f64,
}

impl Nonlinear<'_> {
    fn beta_bulk(&self, r: f64) -> Result<f64> {
        if self.cfg.unregularized {
            self.cfg.graphs.bulk.minimal_section(r)
        } else {
            self.cfg.graphs.bulk.yosida(self.cfg.eps, r)
        }
    }

    fn beta_boundary(&self, r: f64) -> Result<f64> {
        if self.cfg.unregularized {
            self.cfg.graphs.boundary.minimal_section(r)
        } else {
            self.cfg.graphs.yosida_boundary(self.cfg.eps, r)
        }
    }

    fn dbeta_bulk(&self, r: f64) -> Result<f64> {
        if self.cfg.unregularized {
            Ok(self.cfg.graphs.bulk.section_derivative(r))
        } else {
            self.cfg.graphs.bulk.yosida_derivative(self.cfg.eps, r)
        }
    }

    fn dbeta_boundary(&self, r: f64) -> Result<f64> {
        if self.cfg.unregularized {
            Ok(self.cfg.graphs.boundary.section_derivative(r))
        } else {
            self.cfg.graphs.yosida_boundary_derivative(self.cfg.eps, r)
        }
    }

    /// Nodal `xi` at `u = v + m0`.
    fn xi(&self, v: &[f64]) -> Result<FieldPair> {
        let bulk = v
            .iter()
            .map(|x| self.beta_bulk(x + self.m0))
            .collect::<Result<Vec<_>>>()?;
        let boundary = self
            .dom
            .trace(v)
            .iter()
            .map(|x| self.beta_boundary(x + self.m0))
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldPair::new(bulk, boundary))
    }

    /// Functional `B(u)` of a nodal pair.
    fn lumped(&self, pair: &FieldPair) -> Vec<f64> {
        Functional::from_h_pair(self.dom, pair)
            .expect("nodal pairs match the domain")
            .0
    }

    fn perturbation(&self, v: &[f64]) -> FieldPair {
        let g = &self.cfg.graphs;
        let bulk = v.iter().map(|x| g.bulk.perturbation.eval(x + self.m0)).collect();
        let boundary = self
            .dom
            .trace(v)
            .iter()
            .map(|x| g.boundary.perturbation.eval(x + self.m0))
            .collect();
        FieldPair::new(bulk, boundary)
    }

    /// Lumped diagonal of `d(B + P)/dv`, optionally with the Picard bound in
    /// place of `beta_eps'`.
    fn jacobian_diag(&self, v: &[f64], picard: bool) -> Result<Vec<f64>> {
        let g = &self.cfg.graphs;
        let implicit_pi = self.cfg.splitting == Splitting::FullyImplicit;
        let mut bulk = Vec::with_capacity(v.len());
        for x in v {
            let r = x + self.m0;
            let mut d = if picard { 1.0 / self.cfg.eps } else { self.dbeta_bulk(r)? };
            if implicit_pi {
                d += g.bulk.perturbation.derivative(r);
            }
            bulk.push(d);
        }
        let mut boundary = Vec::with_capacity(self.dom.num_boundary());
        for x in self.dom.trace(v) {
            let r = x + self.m0;
            let mut d = if picard {
                1.0 / (self.cfg.eps * g.rho)
            } else {
                self.dbeta_boundary(r)?
            };
            if implicit_pi {
                d += g.boundary.perturbation.derivative(r);
            }
            boundary.push(d);
        }
        Ok(self.lumped(&FieldPair::new(bulk, boundary)))
    }
}

/// Residual blocks of the step equations at `(v, mu)`.
struct Residual {
    r1: Vec<f64>,
    r2: Vec<f64>,
}

struct StepProblem<'a> {
    nl: Nonlinear<'a>,
    v_old: &'a [f64],
    /// `-P(u*) + G(f)` when the perturbation is explicit, `G(f)` otherwise.
    explicit: Vec<f64>,
}

impl StepProblem<'_> {
    fn residual(&self, v: &[f64], mu: &[f64]) -> Result<Residual> {
        let ops = self.nl.dom.coupled();
        let cfg = self.nl.cfg;
        let kmu = ops.stiffness.mul_vec(mu);
        let kv = ops.stiffness.mul_vec(v);
        let b = self.nl.lumped(&self.nl.xi(v)?);
        let p = if cfg.splitting == Splitting::FullyImplicit {
            Some(self.nl.lumped(&self.nl.perturbation(v)))
        } else {
            None
        };
        let n = v.len();
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        for i in 0..n {
            let m = ops.mass[i];
            let rate = m * (v[i] - self.v_old[i]) / cfg.tau;
            r1.push(rate + kmu[i]);
            let mut s = m * mu[i] - cfg.eps * rate - kv[i] - b[i] + self.explicit[i];
            if let Some(p) = &p {
                s -= p[i];
            }
            r2.push(s);
        }
        Ok(Residual { r1, r2 })
    }

    fn merit(&self, res: &Residual) -> f64 {
        let m = &self.nl.dom.coupled().mass;
        res.r1
            .iter()
            .zip(&res.r2)
            .zip(m)
            .map(|((a, b), m)| (a * a + b * b) / m)
            .sum()
    }

    fn weak_norms(&self, res: &Residual) -> Result<(f64, f64)> {
        weak_norms(self.nl.dom, res)
    }

    fn newton_direction(&self, v: &[f64], res: &Residual, picard: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let dom = self.nl.dom;
        let cfg = self.nl.cfg;
        let ops = dom.coupled();
        let n = v.len();
        let d = self.nl.jacobian_diag(v, picard)?;
        let mut entries = Vec::with_capacity(2 * ops.stiffness.nnz() + 4 * n);
        for i in 0..n {
            let m = ops.mass[i];
            entries.push((i, i, m / cfg.tau));
            entries.push((n + i, n + i, m));
            entries.push((n + i, i, -(cfg.eps * m / cfg.tau + d[i])));
        }
        for (i, j, k) in ops.stiffness.triplets() {
            entries.push((i, n + j, k));
            entries.push((n + i, j, -k));
        }
        let lu = SparseLu::factor(2 * n, &entries)?;
        let rhs: Vec<f64> = res.r1.iter().chain(&res.r2).map(|r| -r).collect();
        let mut x = lu.solve(&rhs)?;
        let dmu = x.split_off(n);
        Ok((x, dmu))
    }
}

fn weak_norms(dom: &DiscreteDomain, res: &Residual) -> Result<(f64, f64)> {
    let r1 = crate::spaces::norm_v0_star(dom, &Functional(res.r1.clone()).restrict_to_zero_mean(dom))?;
    let m = &dom.coupled().mass;
    let r2 = res.r2.iter().zip(m).map(|(r, m)| r * r / m).sum::<f64>().sqrt();
    Ok((r1, r2))
}

fn check_forcing(dom: &DiscreteDomain, f: &FieldPair) -> Result<()> {
    f.check_shape(dom)?;
    if f.bulk.iter().chain(&f.boundary).any(|x| !x.is_finite()) {
        return Err(Error::Precondition("forcing contains non-finite values".into()));
    }
    Ok(())
}

fn finish_state(
    dom: &DiscreteDomain,
    cfg: &SchemeConfig,
    v: Vec<f64>,
    mu: Vec<f64>,
    m0: f64,
    f: &FieldPair,
    t: f64,
    step_index: usize,
) -> Result<SchemeState> {
    let nl = Nonlinear { dom, cfg, m0 };
    let xi = nl.xi(&v)?;
    let pi = nl.perturbation(&v);
    let omega = mean(dom, &xi.add_scaled(1.0, &pi).sub(f))?;
    Ok(SchemeState {
        v: FieldPair::from_bulk(dom, v),
        mu: FieldPair::from_bulk(dom, mu),
        xi,
        omega,
        t,
        step_index,
        m0,
    })
}

/// Initial state: `v = u0 - m(u0)`, and `mu` from the chemical-potential
/// relation with a vanishing time derivative.
pub fn initialize(
    dom: &DiscreteDomain,
    cfg: &SchemeConfig,
    u0: &FieldPair,
    f0: &FieldPair,
) -> Result<SchemeState> {
    cfg.validate()?;
    u0.check_shape(dom)?;
    check_forcing(dom, f0)?;
    if !u0.is_trace_consistent(dom) {
        return Err(Error::Precondition(format!(
            "initial datum is not trace-consistent (defect {:.3e})",
            u0.trace_defect(dom)
        )));
    }
    let g = &cfg.graphs;
    for (i, &x) in u0.bulk.iter().enumerate() {
        if !g.bulk.in_domain(x) {
            return Err(Error::Compatibility(format!(
                "initial value {x} at bulk node {i} lies outside D(beta) of the {} graph",
                g.bulk.kind.name()
            )));
        }
    }
    for (k, &x) in u0.boundary.iter().enumerate() {
        if !g.boundary.in_domain(x) {
            return Err(Error::Compatibility(format!(
                "initial value {x} at boundary node {} (chain position {k}) lies outside D(beta_Gamma) of the {} graph",
                dom.trace_map()[k],
                g.boundary.kind.name()
            )));
        }
    }
    let m0 = mean(dom, u0)?;
    if !g.boundary.in_interior(m0) {
        return Err(Error::Compatibility(format!(
            "initial mean {m0} is not interior to D(beta_Gamma) of the {} graph",
            g.boundary.kind.name()
        )));
    }
    let v: Vec<f64> = u0.bulk.iter().map(|x| x - m0).collect();
    let nl = Nonlinear { dom, cfg, m0 };
    let ops = dom.coupled();
    let kv = ops.stiffness.mul_vec(&v);
    let b = nl.lumped(&nl.xi(&v)?);
    let p = nl.lumped(&nl.perturbation(&v));
    let gf = nl.lumped(f0);
    let mu: Vec<f64> = (0..v.len())
        .map(|i| (kv[i] + b[i] + p[i] - gf[i]) / ops.mass[i])
        .collect();
    finish_state(dom, cfg, v, mu, m0, f0, 0.0, 0)
}

/// Advances `state` by one step with forcing `f_next` sampled at `t + tau`.
pub fn step(
    dom: &DiscreteDomain,
    cfg: &SchemeConfig,
    state: &SchemeState,
    f_next: &FieldPair,
) -> Result<(SchemeState, StepStats)> {
    check_forcing(dom, f_next)?;
    state.v.check_shape(dom)?;
    let nl = Nonlinear { dom, cfg, m0: state.m0 };
    let mut explicit = nl.lumped(f_next);
    if cfg.splitting == Splitting::ConvexSplit {
        let p = nl.lumped(&nl.perturbation(&state.v.bulk));
        for (e, p) in explicit.iter_mut().zip(p) {
            *e -= p;
        }
    }
    let problem = StepProblem {
        nl,
        v_old: &state.v.bulk,
        explicit,
    };

    let mut v = state.v.bulk.clone();
    let mut mu = state.mu.bulk.clone();
    let mut res = problem.residual(&v, &mu)?;
    let mut merit = problem.merit(&res);
    let (mut r1, mut r2) = problem.weak_norms(&res)?;
    let mut picard = false;
    let mut iterations = 0;
    while r1 > cfg.newton_tol || r2 > cfg.newton_tol {
        if iterations == cfg.newton_max {
            return Err(Error::StepFailed {
                step: state.step_index + 1,
                iterations,
                residual: r1.max(r2),
            });
        }
        iterations += 1;
        let (dv, dmu) = problem.newton_direction(&v, &res, picard)?;
        let trial = |alpha: f64| -> Result<(Vec<f64>, Vec<f64>, Residual)> {
            let tv: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + alpha * b).collect();
            let tm: Vec<f64> = mu.iter().zip(&dmu).map(|(a, b)| a + alpha * b).collect();
            let tr = problem.residual(&tv, &tm)?;
            Ok((tv, tm, tr))
        };
        let accepted = if picard {
            Some(trial(1.0)?)
        } else {
            let mut alpha = 1.0;
            let mut found = None;
            for _ in 0..=MAX_HALVINGS {
                // Trial points may leave the domain of the unregularized graphs.
                if let Ok(t) = trial(alpha) {
                    if problem.merit(&t.2) < (1.0 - 1e-4 * alpha) * merit {
                        found = Some(t);
                        break;
                    }
                }
                alpha *= 0.5;
            }
            found
        };
        match accepted {
            Some((tv, tm, tr)) => {
                v = tv;
                mu = tm;
                res = tr;
                merit = problem.merit(&res);
                (r1, r2) = problem.weak_norms(&res)?;
            }
            None if cfg.unregularized => {
                return Err(Error::StepFailed {
                    step: state.step_index + 1,
                    iterations,
                    residual: r1.max(r2),
                });
            }
            None => picard = true,
        }
    }

    let shift = dot(&dom.coupled().mass, &v) / dom.coupled().mass.iter().sum::<f64>();
    for x in &mut v {
        *x -= shift;
    }
    let next = finish_state(
        dom,
        cfg,
        v,
        mu,
        state.m0,
        f_next,
        state.t + cfg.tau,
        state.step_index + 1,
    )?;
    Ok((
        next,
        StepStats {
            iterations,
            r1,
            r2,
            picard,
        },
    ))
}

/// Weak residual norms of the step `prev -> next`: the `V0*` norm of the
/// first equation over zero-mean tests and the `H` norm of the second.
pub fn weak_residuals(
    dom: &DiscreteDomain,
    cfg: &SchemeConfig,
    prev: &SchemeState,
    next: &SchemeState,
    f_next: &FieldPair,
) -> Result<(f64, f64)> {
    check_forcing(dom, f_next)?;
    let nl = Nonlinear { dom, cfg, m0: next.m0 };
    let mut explicit = nl.lumped(f_next);
    if cfg.splitting == Splitting::ConvexSplit {
        let p = nl.lumped(&nl.perturbation(&prev.v.bulk));
        for (e, p) in explicit.iter_mut().zip(p) {
            *e -= p;
        }
    }
    let problem = StepProblem {
        nl,
        v_old: &prev.v.bulk,
        explicit,
    };
    let res = problem.residual(&next.v.bulk, &next.mu.bulk)?;
    problem.weak_norms(&res)
}

/// Discrete free energy
/// `1/2 a(v, v) + sum M beta_hat_eps(u) + sum M_G beta_hat_{G,eps}(u_G) + sum M pi_hat(u)`
/// with `pi_hat(m0) = 0`.
pub fn energy(dom: &DiscreteDomain, cfg: &SchemeConfig, state: &SchemeState) -> Result<f64> {
    let (eb, es) = envelope_integrals(dom, cfg, state)?;
    let g = &cfg.graphs;
    let u = state.u();
    let pb: Vec<f64> = u
        .bulk
        .iter()
        .map(|&r| g.bulk.perturbation.antiderivative(r, state.m0))
        .collect();
    let ps: Vec<f64> = u
        .boundary
        .iter()
        .map(|&r| g.boundary.perturbation.antiderivative(r, state.m0))
        .collect();
    Ok(0.5 * form_a(dom, &state.v, &state.v)?
        + eb
        + es
        + dom.integrate_bulk(&pb)?
        + dom.integrate_surf(&ps)?)
}

/// Lumped integrals of the (regularized) convex potentials of `u`.
pub fn envelope_integrals(dom: &DiscreteDomain, cfg: &SchemeConfig, state: &SchemeState) -> Result<(f64, f64)> {
    let g = &cfg.graphs;
    let u = state.u();
    let (bulk, boundary): (Vec<f64>, Vec<f64>) = if cfg.unregularized {
        (
            u.bulk.iter().map(|&r| g.bulk.potential(r)).collect(),
            u.boundary.iter().map(|&r| g.boundary.potential(r)).collect(),
        )
    } else {
        (
            u.bulk
                .iter()
                .map(|&r| g.bulk.envelope(cfg.eps, r))
                .collect::<Result<_>>()?,
            u.boundary
                .iter()
                .map(|&r| g.envelope_boundary(cfg.eps, r))
                .collect::<Result<_>>()?,
        )
    };
    Ok((dom.integrate_bulk(&bulk)?, dom.integrate_surf(&boundary)?))
}

/// Stepper driving a single trajectory.
pub struct Simulation<'a> {
    dom: &'a DiscreteDomain,
    cfg: &'a SchemeConfig,
    forcing: &'a Forcing,
    state: SchemeState,
    total_steps: usize,
}

impl<'a> Simulation<'a> {
    pub fn new(dom: &'a DiscreteDomain, cfg: &'a SchemeConfig, u0: &FieldPair, forcing: &'a Forcing) -> Result<Self> {
        let state = initialize(dom, cfg, u0, &forcing.sample(dom, 0.0))?;
        Ok(Simulation {
            dom,
            cfg,
            forcing,
            state,
            total_steps: cfg.num_steps(),
        })
    }

    pub fn state(&self) -> &SchemeState {
        &self.state
    }

    pub fn is_finished(&self) -> bool {
        self.state.step_index >= self.total_steps
    }

    pub fn time_of_step(&self, k: usize) -> f64 {
        k as f64 * self.cfg.tau
    }

    /// Performs one step; `None` once `t_end` is reached.
    pub fn advance(&mut self) -> Result<Option<StepStats>> {
        if self.is_finished() {
            return Ok(None);
        }
        let t_next = self.time_of_step(self.state.step_index + 1);
        let f = self.forcing.sample(self.dom, t_next);
        let (mut next, stats) = step(self.dom, self.cfg, &self.state, &f)?;
        // Avoid drift of the clock from repeated addition.
        next.t = t_next;
        self.state = next;
        Ok(Some(stats))
    }
}

/// Everything recorded along a trajectory.
#[derive(Debug)]
pub struct RunOutput {
    /// One record per time level, starting at `t = 0`.
    pub records: Vec<MonitorRecord>,
    pub aux: Vec<AuxRecord>,
    /// Stats of every accepted step.
    pub steps: Vec<StepStats>,
    /// States kept at multiples of the snapshot stride (and the last one).
    pub snapshots: Vec<SchemeState>,
    pub final_state: SchemeState,
    /// Set when a step failed; the output then covers the completed part.
    pub failure: Option<Error>,
}

impl RunOutput {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs to `t_end`. `snapshot_stride = 0` keeps no intermediate states.
pub fn run(
    dom: &DiscreteDomain,
    cfg: &SchemeConfig,
    u0: &FieldPair,
    forcing: &Forcing,
    snapshot_stride: usize,
) -> Result<RunOutput> {
    let mut sim = Simulation::new(dom, cfg, u0, forcing)?;
    let mut records = vec![MonitorRecord::capture(dom, cfg, sim.state(), 0)?];
    let mut aux = vec![AuxRecord::capture(dom, cfg, None, sim.state())?];
    let mut steps = Vec::new();
    let mut snapshots = Vec::new();
    if snapshot_stride > 0 {
        snapshots.push(sim.state().clone());
    }
    let mut failure = None;
    loop {
        let prev = sim.state().clone();
        match sim.advance() {
            Ok(None) => break,
            Ok(Some(stats)) => {
                let s = sim.state();
                records.push(MonitorRecord::capture(dom, cfg, s, stats.iterations)?);
                aux.push(AuxRecord::capture(dom, cfg, Some(&prev), s)?);
                steps.push(stats);
                if snapshot_stride > 0 && (s.step_index % snapshot_stride == 0 || sim.is_finished()) {
                    snapshots.push(s.clone());
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(RunOutput {
        records,
        aux,
        steps,
        snapshots,
        final_state: sim.state().clone(),
        failure,
    })
}
