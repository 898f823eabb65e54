//! Discrete product spaces `H = L2(Omega) x L2(Gamma)` and its trace-consistent
//! subspace `V`.
//!
//! A [`FieldPair`] carries a bulk nodal vector and a boundary-chain vector.
//! Pairs in `V` satisfy `boundary[k] == bulk[trace_map[k]]`; pairs in `H` have
//! independent components. Functionals on `V` are stored as coefficient
//! vectors over bulk nodes ([`Functional`]), so that `<l, z> = l . z.bulk`
//! for every trace-consistent `z`.

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigenvalues};

/// Tolerance used when validating trace consistency and zero means.
const CONSTRAINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub bulk: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl FieldPair {
    pub fn new(bulk: Vec<f64>, boundary: Vec<f64>) -> Self {
        FieldPair { bulk, boundary }
    }

    pub fn zeros(dom: &DiscreteDomain) -> Self {
        FieldPair::constant(dom, 0.0)
    }

    pub fn constant(dom: &DiscreteDomain, c: f64) -> Self {
        FieldPair {
            bulk: vec![c; dom.num_nodes()],
            boundary: vec![c; dom.num_boundary()],
        }
    }

    /// Trace-consistent pair built from bulk nodal values.
    pub fn from_bulk(dom: &DiscreteDomain, bulk: Vec<f64>) -> Self {
        let boundary = dom.trace(&bulk);
        FieldPair { bulk, boundary }
    }

    pub fn check_shape(&self, dom: &DiscreteDomain) -> Result<()> {
        if self.bulk.len() != dom.num_nodes() {
            return Err(Error::shape("bulk component", dom.num_nodes(), self.bulk.len()));
        }
        if self.boundary.len() != dom.num_boundary() {
            return Err(Error::shape(
                "boundary component",
                dom.num_boundary(),
                self.boundary.len(),
            ));
        }
        Ok(())
    }

    /// Largest mismatch between the boundary component and the trace of the bulk.
    pub fn trace_defect(&self, dom: &DiscreteDomain) -> f64 {
        dom.trace_map()
            .iter()
            .zip(&self.boundary)
            .map(|(&node, &b)| (self.bulk[node] - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_trace_consistent(&self, dom: &DiscreteDomain) -> bool {
        let scale = self.bulk.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        self.trace_defect(dom) <= CONSTRAINT_TOL * scale
    }

    pub fn scaled(&self, s: f64) -> FieldPair {
        FieldPair {
            bulk: self.bulk.iter().map(|v| s * v).collect(),
            boundary: self.boundary.iter().map(|v| s * v).collect(),
        }
    }

    pub fn add_scaled(&self, s: f64, other: &FieldPair) -> FieldPair {
        FieldPair {
            bulk: self.bulk.iter().zip(&other.bulk).map(|(a, b)| a + s * b).collect(),
            boundary: self
                .boundary
                .iter()
                .zip(&other.boundary)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &FieldPair) -> FieldPair {
        self.add_scaled(-1.0, other)
    }

    pub fn shifted(&self, c: f64) -> FieldPair {
        FieldPair {
            bulk: self.bulk.iter().map(|v| v + c).collect(),
            boundary: self.boundary.iter().map(|v| v + c).collect(),
        }
    }
}

/// Element of the dual of `V`, as coefficients over bulk nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional(pub Vec<f64>);

impl Functional {
    /// Embedding of an `H` pair into `V*`: `z -> (g, z)_H`.
    pub fn from_h_pair(dom: &DiscreteDomain, g: &FieldPair) -> Result<Functional> {
        g.check_shape(dom)?;
        let mut out: Vec<f64> = dom.bulk_mass().iter().zip(&g.bulk).map(|(m, v)| m * v).collect();
        for (k, &node) in dom.trace_map().iter().enumerate() {
            out[node] += dom.surface_mass()[k] * g.boundary[k];
        }
        Ok(Functional(out))
    }

    /// `<l, z>`; only the bulk component of `z` enters.
    pub fn apply(&self, z: &FieldPair) -> f64 {
        dot(&self.0, &z.bulk)
    }

    /// `<l, 1>`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Restriction to zero-mean test pairs, represented by the unique
    /// functional with `<l, 1> = 0` agreeing with `self` on `V0`.
    pub fn restrict_to_zero_mean(&self, dom: &DiscreteDomain) -> Functional {
        let q = &dom.coupled().mass;
        let c = self.total() / q.iter().sum::<f64>();
        Functional(self.0.iter().zip(q).map(|(l, q)| l - c * q).collect())
    }
}

pub fn inner_h(dom: &DiscreteDomain, z: &FieldPair, w: &FieldPair) -> Result<f64> {
    z.check_shape(dom)?;
    w.check_shape(dom)?;
    let bulk: f64 = dom
        .bulk_mass()
        .iter()
        .zip(z.bulk.iter().zip(&w.bulk))
        .map(|(m, (a, b))| m * a * b)
        .sum();
    let surf: f64 = dom
        .surface_mass()
        .iter()
        .zip(z.boundary.iter().zip(&w.boundary))
        .map(|(m, (a, b))| m * a * b)
        .sum();
    Ok(bulk + surf)
}

/// `a(z, w) = z' K_bulk w + z_G' K_surf w_G`.
pub fn form_a(dom: &DiscreteDomain, z: &FieldPair, w: &FieldPair) -> Result<f64> {
    z.check_shape(dom)?;
    w.check_shape(dom)?;
    Ok(dom.bulk_stiffness().bilinear(&z.bulk, &w.bulk)
        + dom.surface_stiffness().bilinear(&z.boundary, &w.boundary))
}

pub fn inner_v(dom: &DiscreteDomain, z: &FieldPair, w: &FieldPair) -> Result<f64> {
    Ok(inner_h(dom, z, w)? + form_a(dom, z, w)?)
}

pub fn norm_h(dom: &DiscreteDomain, z: &FieldPair) -> Result<f64> {
    Ok(inner_h(dom, z, z)?.max(0.0).sqrt())
}

pub fn norm_v(dom: &DiscreteDomain, z: &FieldPair) -> Result<f64> {
    Ok(inner_v(dom, z, z)?.max(0.0).sqrt())
}

/// Combined mean `(int_Omega z + int_Gamma z_G) / (|Omega| + |Gamma|)`.
pub fn mean(dom: &DiscreteDomain, z: &FieldPair) -> Result<f64> {
    Ok((dom.integrate_bulk(&z.bulk)? + dom.integrate_surf(&z.boundary)?)
        / (dom.area() + dom.perimeter()))
}

/// `P z = z - m(z) 1`.
pub fn project_zero_mean(dom: &DiscreteDomain, z: &FieldPair) -> Result<FieldPair> {
    let m = mean(dom, z)?;
    Ok(z.shifted(-m))
}

fn require_v0(dom: &DiscreteDomain, z: &FieldPair) -> Result<()> {
    z.check_shape(dom)?;
    if !z.is_trace_consistent(dom) {
        return Err(Error::Precondition(format!(
            "pair is not trace-consistent (defect {:.3e})",
            z.trace_defect(dom)
        )));
    }
    let m = mean(dom, z)?;
    let scale = z.bulk.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if m.abs() > CONSTRAINT_TOL * scale {
        return Err(Error::Precondition(format!("pair has nonzero mean {m:.3e}")));
    }
    Ok(())
}

/// Duality map `F: V0 -> V0*`, `<F z, w> = a(z, w)`.
pub fn apply_f(dom: &DiscreteDomain, z: &FieldPair) -> Result<Functional> {
    require_v0(dom, z)?;
    let mut out = dom.bulk_stiffness().mul_vec(&z.bulk);
    let surf = dom.surface_stiffness().mul_vec(&z.boundary);
    for (k, &node) in dom.trace_map().iter().enumerate() {
        out[node] += surf[k];
    }
    Ok(Functional(out))
}

/// Solves `a(w, z) = <rhs, z>` for all zero-mean `z` with `m(w) = 0`.
///
/// The constraint enters through one Lagrange multiplier, giving the
/// symmetric indefinite system `[K q; q' 0]` factorized with the domain.
pub fn solve_f_inverse(dom: &DiscreteDomain, rhs: &Functional) -> Result<FieldPair> {
    let nn = dom.num_nodes();
    if rhs.0.len() != nn {
        return Err(Error::shape("functional", nn, rhs.0.len()));
    }
    let scale = rhs.0.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if rhs.total().abs() > CONSTRAINT_TOL * scale {
        return Err(Error::Precondition(format!(
            "functional does not annihilate constants (<l,1> = {:.3e})",
            rhs.total()
        )));
    }
    let ops = dom.coupled();
    let mut b = rhs.0.clone();
    b.push(0.0);
    let sol = ops.saddle.solve(&b)?;
    let w = sol[..nn].to_vec();

    let kw = ops.stiffness.mul_vec(&w);
    let multiplier = sol[nn];
    let res = kw
        .iter()
        .zip(&ops.mass)
        .zip(&rhs.0)
        .map(|((k, q), r)| (k + multiplier * q - r).abs())
        .fold(0.0, f64::max);
    let rhs_max = rhs.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if res > 1e-10 * rhs_max.max(f64::MIN_POSITIVE) && res > 1e-14 {
        return Err(Error::Numerical(format!(
            "saddle-point solve residual {res:.3e} too large"
        )));
    }
    Ok(FieldPair::from_bulk(dom, w))
}

/// `|z|_{V0} = sqrt(a(z, z))`.
pub fn norm_v0(dom: &DiscreteDomain, z: &FieldPair) -> Result<f64> {
    Ok(form_a(dom, z, z)?.max(0.0).sqrt())
}

/// `|l|_{V0*} = sqrt(<l, F^{-1} l>)`.
pub fn norm_v0_star(dom: &DiscreteDomain, rhs: &Functional) -> Result<f64> {
    let w = solve_f_inverse(dom, rhs)?;
    Ok(rhs.apply(&w).max(0.0).sqrt())
}

/// `|z|_{V0*}` of a zero-mean `H` pair.
pub fn norm_h0_in_v0_star(dom: &DiscreteDomain, z: &FieldPair) -> Result<f64> {
    norm_v0_star(dom, &Functional::from_h_pair(dom, z)?)
}

/// Dual norm of `l` over the full space `V` with its graph norm.
pub fn norm_v_star(dom: &DiscreteDomain, rhs: &Functional) -> Result<f64> {
    let x = dom.coupled().riesz.solve(&rhs.0)?;
    Ok(dot(&rhs.0, &x).max(0.0).sqrt())
}

/// Largest `c_p` with `c_p |z|_V^2 <= a(z, z)` on zero-mean pairs of `V`.
///
/// With `M` the coupled lumped mass and `K` the coupled stiffness, the
/// constraint `m(z) = 0` is the `M`-orthogonal complement of the constants,
/// which span the kernel of `K`. The symmetric matrix `M^{-1/2} K M^{-1/2}`
/// therefore has its smallest constrained eigenvalue `lambda` as the first
/// eigenvalue after deflating `M^{1/2} 1`, and `c_p = lambda / (1 + lambda)`.
pub fn poincare_constant(dom: &DiscreteDomain) -> Result<f64> {
    let ops = dom.coupled();
    let nn = dom.num_nodes();
    let sqrt_m: Vec<f64> = ops.mass.iter().map(|m| m.sqrt()).collect();
    let mut a = vec![vec![0.0; nn]; nn];
    for (i, j, v) in ops.stiffness.triplets() {
        a[i][j] += v / (sqrt_m[i] * sqrt_m[j]);
    }
    let norm2: f64 = ops.mass.iter().sum();
    let shift = 1.0 + a.iter().enumerate().map(|(i, row)| row[i]).sum::<f64>();
    for i in 0..nn {
        for j in 0..nn {
            a[i][j] += shift * sqrt_m[i] * sqrt_m[j] / norm2;
        }
    }
    let ev = symmetric_eigenvalues(&a)?;
    let lambda = ev[0];
    if !(lambda > 0.0) {
        return Err(Error::Numerical(format!(
            "constrained stiffness is not positive definite (lambda = {lambda:.3e})"
        )));
    }
    Ok(lambda / (1.0 + lambda))
}

/// `H0` representer of `a(z, .)` on zero-mean test pairs: the discrete
/// realization of `(-Laplace z, d_nu z - Laplace_Gamma z_G)`.
pub fn subgrad_phi(dom: &DiscreteDomain, z: &FieldPair) -> Result<FieldPair> {
    let f = apply_f(dom, z)?;
    let g: Vec<f64> = f.0.iter().zip(&dom.coupled().mass).map(|(l, m)| l / m).collect();
    project_zero_mean(dom, &FieldPair::from_bulk(dom, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zero_mean_pair(dom: &DiscreteDomain, seed: u64) -> FieldPair {
        let bulk = (0..dom.num_nodes())
            .map(|i| ((i as f64 + 1.0) * 0.7123 + seed as f64 * 1.37).sin())
            .collect();
        project_zero_mean(dom, &FieldPair::from_bulk(dom, bulk)).unwrap()
    }

    #[test]
    fn inner_products_on_constants() {
        let dom = DiscreteDomain::build_unit_square(5).unwrap();
        let one = FieldPair::constant(&dom, 1.0);
        assert!((inner_h(&dom, &one, &one).unwrap() - 5.0).abs() < 1e-12);
        let z = zero_mean_pair(&dom, 3);
        assert!(form_a(&dom, &one, &z).unwrap().abs() < 1e-12);
        assert!(form_a(&dom, &z, &one).unwrap().abs() < 1e-12);
        assert!(inner_v(&dom, &z, &z).unwrap() >= inner_h(&dom, &z, &z).unwrap());
    }

    #[test]
    fn mean_examples() {
        let dom = DiscreteDomain::build_unit_square(4).unwrap();
        assert!((mean(&dom, &FieldPair::constant(&dom, 0.3)).unwrap() - 0.3).abs() < 1e-15);
        let bulk_only = FieldPair::new(vec![1.0; dom.num_nodes()], vec![0.0; dom.num_boundary()]);
        assert!((mean(&dom, &bulk_only).unwrap() - 0.2).abs() < 1e-14);
        let z = zero_mean_pair(&dom, 1);
        assert!(mean(&dom, &z).unwrap().abs() < 1e-15);
        let short = FieldPair::new(vec![0.0; 3], vec![0.0; dom.num_boundary()]);
        assert!(matches!(mean(&dom, &short), Err(Error::Shape { .. })));
    }

    #[test]
    fn projection_examples() {
        let dom = DiscreteDomain::build_unit_square(4).unwrap();
        let p = project_zero_mean(&dom, &FieldPair::constant(&dom, 2.5)).unwrap();
        assert!(p.bulk.iter().chain(&p.boundary).all(|v| v.abs() < 1e-15));
        let z = zero_mean_pair(&dom, 2);
        let pz = project_zero_mean(&dom, &z).unwrap();
        for (a, b) in pz.bulk.iter().zip(&z.bulk) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn f_inverse_rejects_nonzero_total() {
        let dom = DiscreteDomain::build_unit_square(4).unwrap();
        let l = Functional(vec![1.0; dom.num_nodes()]);
        assert!(matches!(solve_f_inverse(&dom, &l), Err(Error::Precondition(_))));
        let zero = Functional(vec![0.0; dom.num_nodes()]);
        let w = solve_f_inverse(&dom, &zero).unwrap();
        assert!(w.bulk.iter().all(|v| *v == 0.0));
        assert_eq!(norm_v0_star(&dom, &zero).unwrap(), 0.0);
        assert_eq!(norm_v0(&dom, &FieldPair::zeros(&dom)).unwrap(), 0.0);
    }

    #[test]
    fn apply_f_preconditions() {
        let dom = DiscreteDomain::build_unit_square(4).unwrap();
        assert!(matches!(
            apply_f(&dom, &FieldPair::constant(&dom, 1.0)),
            Err(Error::Precondition(_))
        ));
        let mut z = zero_mean_pair(&dom, 0);
        z.boundary[0] += 0.1;
        assert!(matches!(apply_f(&dom, &z), Err(Error::Precondition(_))));
        let zero = apply_f(&dom, &FieldPair::zeros(&dom)).unwrap();
        assert!(zero.0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn duality_identities() {
        let dom = DiscreteDomain::build_unit_square(6).unwrap();
        let z = zero_mean_pair(&dom, 4);
        let w = zero_mean_pair(&dom, 9);
        let fz = apply_f(&dom, &z).unwrap();
        let fw = apply_f(&dom, &w).unwrap();
        assert!((fz.apply(&w) - fw.apply(&z)).abs() < 1e-12);
        assert!((fz.apply(&z) - form_a(&dom, &z, &z).unwrap()).abs() < 1e-12);
        let a = norm_v0_star(&dom, &fz).unwrap();
        let b = norm_v0(&dom, &z).unwrap();
        assert!((a - b).abs() < 1e-10 * b);
        assert!(fz.apply(&w).abs() <= b * norm_v0(&dom, &w).unwrap() + 1e-12);
    }

    #[test]
    fn poincare_is_between_zero_and_one() {
        for n in [3, 5, 8] {
            let dom = DiscreteDomain::build_unit_square(n).unwrap();
            let cp = poincare_constant(&dom).unwrap();
            assert!(cp > 0.0 && cp <= 1.0, "n={n}: {cp}");
        }
    }

    #[test]
    fn subgrad_phi_of_constant_direction_vanishes() {
        let dom = DiscreteDomain::build_unit_square(5).unwrap();
        let g = subgrad_phi(&dom, &FieldPair::zeros(&dom)).unwrap();
        assert!(g.bulk.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn subgrad_phi_approximates_laplacian_in_the_interior() {
        // z = cos(pi x) cos(pi y) has zero mean over bulk and boundary and
        // -Laplace z = 2 pi^2 z. Interior errors must decay like h^2.
        let pi = std::f64::consts::PI;
        let mut errs = Vec::new();
        for n in [9, 17, 33] {
            let dom = DiscreteDomain::build_unit_square(n).unwrap();
            let z = FieldPair::from_bulk(&dom, dom.interpolate(|x, y| (pi * x).cos() * (pi * y).cos()));
            let z = project_zero_mean(&dom, &z).unwrap();
            let g = subgrad_phi(&dom, &z).unwrap();
            let err = dom
                .coords()
                .iter()
                .enumerate()
                .filter(|(i, _)| dom.chain_position(*i).is_none())
                .map(|(i, &[x, y])| (g.bulk[i] - 2.0 * pi * pi * (pi * x).cos() * (pi * y).cos()).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.8, "rate {rate}, errors {errs:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn projection_identity(values in prop::collection::vec(-2.0f64..2.0, 25 + 16 + 16)) {
            let dom = DiscreteDomain::build_unit_square(5).unwrap();
            let (a, rest) = values.split_at(25);
            let (b, c) = rest.split_at(16);
            let zstar = project_zero_mean(&dom, &FieldPair::new(a.to_vec(), b.to_vec())).unwrap();
            let w = FieldPair::new(a.iter().rev().copied().collect(), c.to_vec());
            let lhs = inner_h(&dom, &zstar, &project_zero_mean(&dom, &w).unwrap()).unwrap();
            let rhs = inner_h(&dom, &zstar, &w).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
            let pw = project_zero_mean(&dom, &w).unwrap();
            let ppw = project_zero_mean(&dom, &pw).unwrap();
            prop_assert!(pw.bulk.iter().zip(&ppw.bulk).all(|(x, y)| (x - y).abs() < 1e-14));
        }

        #[test]
        fn f_roundtrip(values in prop::collection::vec(-1.0f64..1.0, 36)) {
            let dom = DiscreteDomain::build_unit_square(6).unwrap();
            let z = project_zero_mean(&dom, &FieldPair::from_bulk(&dom, values)).unwrap();
            let back = solve_f_inverse(&dom, &apply_f(&dom, &z).unwrap()).unwrap();
            for (a, b) in back.bulk.iter().zip(&z.bulk) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
