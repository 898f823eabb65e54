//! Scalar maximal monotone graphs and their regularizations.
//!
//! A [`GraphSpec`] describes the convex part `beta = d(beta_hat)` of a
//! double-well potential together with its Lipschitz perturbation `pi`. For
//! every `eps > 0` we provide
//!
//! * the resolvent `J_eps = (I + eps*beta)^{-1}`,
//! * the Yosida approximation `beta_eps = (I - J_eps) / eps`,
//! * the Moreau-Yosida envelope
//!   `beta_hat_eps(r) = |r - J_eps(r)|^2 / (2 eps) + beta_hat(J_eps(r))`.
//!
//! The boundary graph of a [`GraphPair`] is regularized with the scaled
//! parameter `eps * rho`, so that `|beta_eps| <= rho |beta_{Gamma,eps}| + c0`
//! inherits the constants of the unregularized compatibility condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance kept from the endpoints of the open logarithmic domain.
const LOG_DOMAIN_SHRINK: f64 = 1e-15;
const RESOLVENT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    /// `beta(r) = r^3` on the whole line.
    Polynomial,
    /// `beta(r) = ln((1+r)/(1-r))` on `(-1, 1)`.
    Logarithmic,
    /// `beta = subdifferential of the indicator of [-1, 1]`.
    Obstacle,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Polynomial => "polynomial",
            GraphKind::Logarithmic => "logarithmic",
            GraphKind::Obstacle => "obstacle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "polynomial" => Some(GraphKind::Polynomial),
            "logarithmic" => Some(GraphKind::Logarithmic),
            "obstacle" => Some(GraphKind::Obstacle),
            _ => None,
        }
    }
}

/// Lipschitz perturbation `pi` of the monotone part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// `pi(r) = slope * r`; the prototypes use `slope = -1` or `slope = -2c`.
    Linear { slope: f64 },
    /// `pi(r) = -amplitude * sin(r)`.
    Sine { amplitude: f64 },
}

impl Perturbation {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Perturbation::Linear { slope } => slope * r,
            Perturbation::Sine { amplitude } => -amplitude * r.sin(),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            Perturbation::Linear { slope } => slope,
            Perturbation::Sine { amplitude } => -amplitude * r.cos(),
        }
    }

    /// Antiderivative of `pi` normalized to vanish at `anchor`.
    pub fn antiderivative(&self, r: f64, anchor: f64) -> f64 {
        match *self {
            Perturbation::Linear { slope } => 0.5 * slope * (r * r - anchor * anchor),
            Perturbation::Sine { amplitude } => amplitude * (r.cos() - anchor.cos()),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Perturbation::Linear { slope } => slope.abs(),
            Perturbation::Sine { amplitude } => amplitude.abs(),
        }
    }
}

/// A maximal monotone graph together with its Lipschitz perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub perturbation: Perturbation,
}

impl GraphSpec {
    pub fn new(kind: GraphKind, perturbation: Perturbation) -> Self {
        GraphSpec { kind, perturbation }
    }

    /// Prototype graph with its customary perturbation `pi(r) = -r`.
    pub fn prototype(kind: GraphKind) -> Self {
        GraphSpec::new(kind, Perturbation::Linear { slope: -1.0 })
    }

    pub fn domain_lo(&self) -> f64 {
        match self.kind {
            GraphKind::Polynomial => f64::NEG_INFINITY,
            GraphKind::Logarithmic | GraphKind::Obstacle => -1.0,
        }
    }

    pub fn domain_hi(&self) -> f64 {
        match self.kind {
            GraphKind::Polynomial => f64::INFINITY,
            GraphKind::Logarithmic | GraphKind::Obstacle => 1.0,
        }
    }

    /// Membership in the effective domain `D(beta)`.
    pub fn in_domain(&self, r: f64) -> bool {
        match self.kind {
            GraphKind::Polynomial => r.is_finite(),
            GraphKind::Logarithmic => r > -1.0 && r < 1.0,
            GraphKind::Obstacle => (-1.0..=1.0).contains(&r),
        }
    }

    pub fn in_interior(&self, r: f64) -> bool {
        r.is_finite() && r > self.domain_lo() && r < self.domain_hi()
    }

    /// The convex potential `beta_hat`, `+inf` outside its (closed) domain.
    pub fn potential(&self, r: f64) -> f64 {
        if !(r >= self.domain_lo() && r <= self.domain_hi()) {
            return f64::INFINITY;
        }
        match self.kind {
            GraphKind::Polynomial => 0.25 * r * r * r * r,
            GraphKind::Logarithmic => log_potential(r),
            GraphKind::Obstacle => 0.0,
        }
    }

    /// Least-modulus element of `beta(r)`.
    pub fn minimal_section(&self, r: f64) -> Result<f64> {
        if !self.in_domain(r) {
            return Err(Error::Domain(format!(
                "{} is outside D(beta) for the {} graph",
                r,
                self.kind.name()
            )));
        }
        Ok(match self.kind {
            GraphKind::Polynomial => r * r * r,
            GraphKind::Logarithmic => log_beta(r),
            // beta(+-1) is a half line containing 0.
            GraphKind::Obstacle => 0.0,
        })
    }

    /// Derivative of the single-valued part of `beta`, used by Newton
    /// linearizations of the unregularized graph.
    pub(crate) fn section_derivative(&self, r: f64) -> f64 {
        match self.kind {
            GraphKind::Polynomial => 3.0 * r * r,
            GraphKind::Logarithmic => 2.0 / ((1.0 - r) * (1.0 + r)),
            GraphKind::Obstacle => 0.0,
        }
    }

    /// Resolvent `J_eps(r)`: the unique `j` with `j + eps*s = r`, `s in beta(j)`.
    pub fn resolvent(&self, eps: f64, r: f64) -> Result<f64> {
        check_eps(eps)?;
        if !r.is_finite() {
            return Err(Error::Domain(format!("resolvent argument {r} is not finite")));
        }
        match self.kind {
            GraphKind::Obstacle => Ok(r.clamp(-1.0, 1.0)),
            GraphKind::Polynomial => {
                let (lo, hi) = if r >= 0.0 { (0.0, r) } else { (r, 0.0) };
                solve_monotone(
                    |j| j + eps * j * j * j - r,
                    |j| 1.0 + 3.0 * eps * j * j,
                    lo,
                    hi,
                    r,
                )
            }
            GraphKind::Logarithmic => {
                let edge = 1.0 - LOG_DOMAIN_SHRINK;
                let (lo, hi) = if r >= 0.0 {
                    (0.0, r.min(edge))
                } else {
                    (r.max(-edge), 0.0)
                };
                let g = |j: f64| j + eps * log_beta(j) - r;
                // Roots closer to +-1 than the shrink margin are not representable.
                if r > 0.0 && g(hi) < 0.0 {
                    return Ok(hi);
                }
                if r < 0.0 && g(lo) > 0.0 {
                    return Ok(lo);
                }
                solve_monotone(g, |j| 1.0 + 2.0 * eps / ((1.0 - j) * (1.0 + j)), lo, hi, r)
            }
        }
    }

    /// Yosida approximation `beta_eps(r) = (r - J_eps(r)) / eps`.
    pub fn yosida(&self, eps: f64, r: f64) -> Result<f64> {
        let j = self.resolvent(eps, r)?;
        Ok((r - j) / eps)
    }

    /// Derivative of `beta_eps` at `r`; for the obstacle graph the element
    /// `0` is chosen on `[-1, 1]` and `1/eps` outside.
    pub fn yosida_derivative(&self, eps: f64, r: f64) -> Result<f64> {
        match self.kind {
            GraphKind::Obstacle => {
                check_eps(eps)?;
                Ok(if r.abs() > 1.0 { 1.0 / eps } else { 0.0 })
            }
            _ => {
                let j = self.resolvent(eps, r)?;
                let dj = 1.0 / (1.0 + eps * self.section_derivative(j));
                Ok((1.0 - dj) / eps)
            }
        }
    }

    /// Moreau-Yosida envelope `beta_hat_eps(r)`.
    pub fn envelope(&self, eps: f64, r: f64) -> Result<f64> {
        let j = self.resolvent(eps, r)?;
        let d = r - j;
        Ok(d * d / (2.0 * eps) + self.potential(j))
    }
}

/// Bulk and boundary graphs with the compatibility constants `rho`, `c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPair {
    pub bulk: GraphSpec,
    pub boundary: GraphSpec,
    pub rho: f64,
    pub c0: f64,
}

impl GraphPair {
    pub fn new(bulk: GraphSpec, boundary: GraphSpec, rho: f64, c0: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Config(format!("rho must be positive, got {rho}")));
        }
        if !(c0.is_finite() && c0 >= 0.0) {
            return Err(Error::Config(format!("c0 must be nonnegative, got {c0}")));
        }
        if boundary.domain_lo() < bulk.domain_lo() || boundary.domain_hi() > bulk.domain_hi() {
            return Err(Error::Config(format!(
                "D(beta_Gamma) of the {} graph is not contained in D(beta) of the {} graph",
                boundary.kind.name(),
                bulk.kind.name()
            )));
        }
        // An open logarithmic bulk domain cannot host a closed obstacle boundary domain.
        if bulk.kind == GraphKind::Logarithmic && boundary.kind == GraphKind::Obstacle {
            return Err(Error::Config(
                "D(beta_Gamma) = [-1,1] is not contained in D(beta) = (-1,1)".into(),
            ));
        }
        Ok(GraphPair {
            bulk,
            boundary,
            rho,
            c0,
        })
    }

    /// The same graph on both sides with `rho = 1`, `c0 = 0`.
    pub fn symmetric(graph: GraphSpec) -> Self {
        GraphPair {
            bulk: graph,
            boundary: graph,
            rho: 1.0,
            c0: 0.0,
        }
    }

    /// Yosida approximation of the boundary graph with parameter `eps * rho`.
    pub fn yosida_boundary(&self, eps: f64, r: f64) -> Result<f64> {
        self.boundary.yosida(eps * self.rho, r)
    }

    pub fn yosida_boundary_derivative(&self, eps: f64, r: f64) -> Result<f64> {
        self.boundary.yosida_derivative(eps * self.rho, r)
    }

    pub fn envelope_boundary(&self, eps: f64, r: f64) -> Result<f64> {
        self.boundary.envelope(eps * self.rho, r)
    }
}

/// Outcome of sampling the regularized compatibility inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub samples: usize,
    /// `min_r (rho |beta_{Gamma,eps}(r)| + c0 - |beta_eps(r)|)`, `+inf` when empty.
    pub worst_slack: f64,
    pub worst_at: Option<f64>,
    pub passed: bool,
}

/// Checks `|beta_eps(r)| <= rho |beta_{Gamma,eps}(r)| + c0` at every sample.
pub fn check_compatibility(pair: &GraphPair, eps: f64, samples: &[f64]) -> Result<CompatibilityReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Precondition(format!("eps must lie in (0,1], got {eps}")));
    }
    let mut worst_slack = f64::INFINITY;
    let mut worst_at = None;
    for &r in samples {
        let bulk = pair.bulk.yosida(eps, r)?.abs();
        let boundary = pair.yosida_boundary(eps, r)?.abs();
        let slack = pair.rho * boundary + pair.c0 - bulk;
        if slack < worst_slack {
            worst_slack = slack;
            worst_at = Some(r);
        }
    }
    // Equal graphs coincide only up to rounding of the two resolvent solves.
    let passed = worst_slack >= -1e-12 * (1.0 + worst_slack.abs());
    Ok(CompatibilityReport {
        samples: samples.len(),
        worst_slack,
        worst_at,
        passed: samples.is_empty() || passed,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("eps must be positive, got {eps}")))
    }
}

fn log_beta(r: f64) -> f64 {
    r.ln_1p() - (-r).ln_1p()
}

fn log_potential(r: f64) -> f64 {
    let plus = if r == -1.0 { 0.0 } else { (1.0 + r) * r.ln_1p() };
    let minus = if r == 1.0 { 0.0 } else { (1.0 - r) * (-r).ln_1p() };
    plus + minus
}

/// Safeguarded Newton for an increasing function with a root in `[lo, hi]`.
fn solve_monotone(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    r: f64,
) -> Result<f64> {
    let tol = 1e-15 * r.abs().max(1.0);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..RESOLVENT_MAX_ITER {
        let gx = g(x);
        if gx.abs() <= tol {
            return Ok(x);
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // Bracket collapsed to adjacent floats.
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi });
        }
        let newton = x - gx / dg(x);
        x = if newton > lo && newton < hi { newton } else { mid };
    }
    Err(Error::Numerical(format!(
        "resolvent iteration did not converge for r = {r}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kinds() -> [GraphSpec; 3] {
        [
            GraphSpec::prototype(GraphKind::Polynomial),
            GraphSpec::prototype(GraphKind::Logarithmic),
            GraphSpec::prototype(GraphKind::Obstacle),
        ]
    }

    #[test]
    fn resolvent_examples() {
        let poly = GraphSpec::prototype(GraphKind::Polynomial);
        assert_eq!(poly.resolvent(1.0, 2.0).unwrap(), 1.0);
        for g in all_kinds() {
            assert_eq!(g.resolvent(0.3, 0.0).unwrap(), 0.0);
        }
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        assert_eq!(obstacle.resolvent(0.5, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn resolvent_residual_is_tiny() {
        let poly = GraphSpec::prototype(GraphKind::Polynomial);
        let log = GraphSpec::prototype(GraphKind::Logarithmic);
        for &eps in &[1.0, 0.1, 0.01] {
            for k in -40..=40 {
                let r = k as f64 * 0.075;
                let j = poly.resolvent(eps, r).unwrap();
                assert!((j + eps * j * j * j - r).abs() <= 1e-14 * r.abs().max(1.0));
                let j = log.resolvent(eps, r).unwrap();
                if j.abs() >= 1.0 - LOG_DOMAIN_SHRINK {
                    // Saturated: the root is not representable.
                    continue;
                }
                // Near +-1 one ulp of j moves the residual by ulp * g'(j).
                let slope = 1.0 + 2.0 * eps / ((1.0 - j) * (1.0 + j));
                let res = (j + eps * log_beta(j) - r).abs();
                assert!(res <= 1e-14 * r.abs().max(1.0) + f64::EPSILON * slope, "r {r} res {res:e}");
            }
        }
    }

    #[test]
    fn resolvent_rejects_bad_input() {
        let g = GraphSpec::prototype(GraphKind::Polynomial);
        assert!(matches!(g.resolvent(0.1, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(g.resolvent(0.0, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(g.resolvent(-1.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn log_resolvent_saturates_inside_domain() {
        let log = GraphSpec::prototype(GraphKind::Logarithmic);
        let j = log.resolvent(0.01, 50.0).unwrap();
        assert!(j < 1.0 && j > 0.999);
        let j = log.resolvent(0.01, -50.0).unwrap();
        assert!(j > -1.0 && j < -0.999);
        assert!(log.yosida(0.01, 50.0).unwrap().is_finite());
    }

    #[test]
    fn yosida_examples() {
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        assert_eq!(obstacle.yosida(0.5, 3.0).unwrap(), 4.0);
        let poly = GraphSpec::prototype(GraphKind::Polynomial);
        assert_eq!(poly.yosida(1.0, 2.0).unwrap(), 1.0);
        let log = GraphSpec::prototype(GraphKind::Logarithmic);
        assert_eq!(log.yosida(0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn yosida_boundary_examples() {
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        let pair = GraphPair::new(obstacle, obstacle, 2.0, 0.0).unwrap();
        assert_eq!(pair.yosida_boundary(0.5, 3.0).unwrap(), 2.0);
        assert_eq!(pair.yosida_boundary(0.5, 0.0).unwrap(), 0.0);
        for g in all_kinds() {
            let pair = GraphPair::symmetric(g);
            for k in -30..=30 {
                let r = k as f64 * 0.1;
                assert_eq!(pair.yosida_boundary(0.2, r).unwrap(), g.yosida(0.2, r).unwrap());
            }
        }
    }

    #[test]
    fn envelope_examples() {
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        assert_eq!(obstacle.envelope(0.5, 3.0).unwrap(), 4.0);
        let poly = GraphSpec::prototype(GraphKind::Polynomial);
        assert_eq!(poly.envelope(1.0, 2.0).unwrap(), 0.75);
        for g in all_kinds() {
            assert_eq!(g.envelope(0.4, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn minimal_section_examples() {
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        assert_eq!(obstacle.minimal_section(0.7).unwrap(), 0.0);
        assert_eq!(obstacle.minimal_section(1.0).unwrap(), 0.0);
        assert_eq!(obstacle.minimal_section(-1.0).unwrap(), 0.0);
        let poly = GraphSpec::prototype(GraphKind::Polynomial);
        assert_eq!(poly.minimal_section(-2.0).unwrap(), -8.0);
        let log = GraphSpec::prototype(GraphKind::Logarithmic);
        assert!((log.minimal_section(0.5).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(matches!(log.minimal_section(1.0), Err(Error::Domain(_))));
        assert!(matches!(obstacle.minimal_section(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn potential_vanishes_at_zero_and_is_infinite_outside() {
        for g in all_kinds() {
            assert_eq!(g.potential(0.0), 0.0);
        }
        let log = GraphSpec::prototype(GraphKind::Logarithmic);
        assert!((log.potential(1.0) - 2f64.ln() * 2.0).abs() < 1e-15);
        assert!((log.potential(1.0 - 1e-12) - 2f64.ln() * 2.0).abs() < 1e-10);
        assert!(log.potential(1.0 + 1e-12).is_infinite());
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        assert!(obstacle.potential(1.0001).is_infinite());
    }

    #[test]
    fn compatibility_examples() {
        let dense: Vec<f64> = (0..=20_000).map(|k| -10.0 + k as f64 * 1e-3).collect();
        for g in all_kinds() {
            let report = check_compatibility(&GraphPair::symmetric(g), 0.5, &dense).unwrap();
            assert!(report.passed);
            assert!(report.worst_slack >= -1e-12);
        }
        let empty = check_compatibility(&GraphPair::symmetric(all_kinds()[0]), 0.5, &[]).unwrap();
        assert!(empty.passed);
        assert_eq!(empty.samples, 0);
    }

    #[test]
    fn mixed_pair_compatibility_against_dense_sweep() {
        // Polynomial bulk over an obstacle boundary: on [-1,1] the boundary
        // section vanishes while |r^3| reaches 1, so c0 >= 1 is needed.
        let poly = GraphSpec::prototype(GraphKind::Polynomial);
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        let samples: Vec<f64> = (0..=20_000).map(|k| -10.0 + k as f64 * 1e-3).collect();
        let good = GraphPair::new(poly, obstacle, 1.0, 1.0).unwrap();
        let bad = GraphPair::new(poly, obstacle, 1.0, 0.2).unwrap();
        for &eps in &[1.0, 0.1, 0.01] {
            assert!(check_compatibility(&good, eps, &samples).unwrap().passed);
            let report = check_compatibility(&bad, eps, &samples).unwrap();
            assert!(!report.passed);
            assert!(report.worst_at.unwrap().abs() <= 1.0 + eps);
        }
        assert!(check_compatibility(&good, 0.0, &samples).is_err());
        assert!(check_compatibility(&good, 1.5, &samples).is_err());
    }

    #[test]
    fn pair_rejects_incompatible_domains() {
        let poly = GraphSpec::prototype(GraphKind::Polynomial);
        let obstacle = GraphSpec::prototype(GraphKind::Obstacle);
        let log = GraphSpec::prototype(GraphKind::Logarithmic);
        assert!(GraphPair::new(obstacle, poly, 1.0, 0.0).is_err());
        assert!(GraphPair::new(log, obstacle, 1.0, 0.0).is_err());
        assert!(GraphPair::new(obstacle, log, 1.0, 0.0).is_ok());
        assert!(GraphPair::new(poly, poly, 0.0, 0.0).is_err());
        assert!(GraphPair::new(poly, poly, 1.0, -1.0).is_err());
    }

    #[test]
    fn yosida_derivative_matches_difference_quotient() {
        for g in all_kinds() {
            for &eps in &[1.0, 0.1] {
                for k in -20..=20 {
                    let r = k as f64 * 0.0937 + 0.013;
                    if g.kind == GraphKind::Obstacle && (r.abs() - 1.0).abs() < 1e-3 {
                        continue;
                    }
                    let h = 1e-6;
                    let fd = (g.yosida(eps, r + h).unwrap() - g.yosida(eps, r - h).unwrap()) / (2.0 * h);
                    let d = g.yosida_derivative(eps, r).unwrap();
                    assert!((fd - d).abs() <= 1e-5 * (1.0 + d.abs()), "{:?} eps={eps} r={r}: {fd} vs {d}", g.kind);
                }
            }
        }
    }

    #[test]
    fn perturbation_antiderivative_is_consistent() {
        for p in [Perturbation::Linear { slope: -1.0 }, Perturbation::Sine { amplitude: 0.7 }] {
            assert_eq!(p.antiderivative(0.3, 0.3), 0.0);
            let h = 1e-6;
            for k in -10..=10 {
                let r = k as f64 * 0.21;
                let fd = (p.antiderivative(r + h, 0.1) - p.antiderivative(r - h, 0.1)) / (2.0 * h);
                assert!((fd - p.eval(r)).abs() < 1e-8);
            }
        }
    }
}
