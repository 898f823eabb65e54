//! Dense reference implementations used as test oracles. Nothing here calls
//! into the crate's assembly or solvers; only mesh conventions (node
//! numbering, counterclockwise boundary chain from the origin) are shared.

#![allow(dead_code)]

use std::ops::SubAssign;

use nalgebra::{DMatrix, DVector};

/// Dense coupled operators on the unit square with `n` nodes per side.
pub struct DenseModel {
    pub n: usize,
    pub coords: Vec<(f64, f64)>,
    pub chain: Vec<usize>,
    pub k_bulk: DMatrix<f64>,
    pub k_surf: DMatrix<f64>,
    pub m_bulk: DVector<f64>,
    pub m_surf: DVector<f64>,
}

impl DenseModel {
    pub fn new(n: usize) -> Self {
        let h = 1.0 / (n - 1) as f64;
        let nn = n * n;
        let coords: Vec<(f64, f64)> = (0..nn).map(|p| ((p % n) as f64 * h, (p / n) as f64 * h)).collect();
        let mut k_bulk = DMatrix::zeros(nn, nn);
        let mut m_bulk = DVector::zeros(nn);
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let sw = i + j * n;
                let se = sw + 1;
                let ne = se + n;
                let nw = sw + n;
                for tri in [[sw, se, ne], [sw, ne, nw]] {
                    // Element stiffness from the gradient matrix of the affine map.
                    let g = DMatrix::from_row_slice(
                        3,
                        3,
                        &[
                            1.0, coords[tri[0]].0, coords[tri[0]].1,
                            1.0, coords[tri[1]].0, coords[tri[1]].1,
                            1.0, coords[tri[2]].0, coords[tri[2]].1,
                        ],
                    );
                    let area = 0.5 * g.determinant().abs();
                    let inv = g.try_inverse().unwrap();
                    let grads = inv.rows(1, 2).into_owned();
                    let local = grads.transpose() * grads * area;
                    for a in 0..3 {
                        m_bulk[tri[a]] += area / 3.0;
                        for b in 0..3 {
                            k_bulk[(tri[a], tri[b])] += local[(a, b)];
                        }
                    }
                }
            }
        }
        let mut chain = Vec::new();
        let mut p = (0usize, 0usize);
        for (di, dj) in [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)] {
            for _ in 0..n - 1 {
                chain.push(p.0 + p.1 * n);
                p = ((p.0 as i64 + di) as usize, (p.1 as i64 + dj) as usize);
            }
        }
        let nb = chain.len();
        let mut k_surf = DMatrix::zeros(nb, nb);
        let mut m_surf = DVector::zeros(nb);
        for k in 0..nb {
            let l = (k + 1) % nb;
            k_surf[(k, k)] += 1.0 / h;
            k_surf[(l, l)] += 1.0 / h;
            k_surf[(k, l)] -= 1.0 / h;
            k_surf[(l, k)] -= 1.0 / h;
            m_surf[k] += 0.5 * h;
            m_surf[l] += 0.5 * h;
        }
        DenseModel {
            n,
            coords,
            chain,
            k_bulk,
            k_surf,
            m_bulk,
            m_surf,
        }
    }

    pub fn nn(&self) -> usize {
        self.n * self.n
    }

    /// Trace matrix `T` with `(T z)_k = z[chain[k]]`.
    pub fn trace(&self) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.chain.len(), self.nn());
        for (k, &p) in self.chain.iter().enumerate() {
            t[(k, p)] = 1.0;
        }
        t
    }

    pub fn stiffness(&self) -> DMatrix<f64> {
        let t = self.trace();
        &self.k_bulk + t.transpose() * &self.k_surf * &t
    }

    pub fn mass(&self) -> DVector<f64> {
        let t = self.trace();
        &self.m_bulk + t.transpose() * &self.m_surf
    }

    /// Solves `[K q; q' 0] (w, lambda) = (rhs, 0)` with `q = M 1`.
    pub fn f_inverse(&self, rhs: &[f64]) -> Vec<f64> {
        let nn = self.nn();
        let k = self.stiffness();
        let q = self.mass();
        let mut a = DMatrix::zeros(nn + 1, nn + 1);
        a.view_mut((0, 0), (nn, nn)).copy_from(&k);
        for i in 0..nn {
            a[(i, nn)] = q[i];
            a[(nn, i)] = q[i];
        }
        let mut b = DVector::zeros(nn + 1);
        for i in 0..nn {
            b[i] = rhs[i];
        }
        let x = a.lu().solve(&b).unwrap();
        x.rows(0, nn).iter().copied().collect()
    }

    /// Smallest generalized eigenvalue of `K` against `M + K` on the
    /// subspace `q' z = 0`.
    pub fn poincare(&self) -> f64 {
        let nn = self.nn();
        let k = self.stiffness();
        let m = self.mass();
        let q = m.normalize();
        // Orthonormal basis of the complement of q from a full QR.
        let mut basis = DMatrix::identity(nn, nn);
        basis.set_column(0, &q);
        let qr = basis.qr();
        let full_q = qr.q();
        let z = full_q.columns(1, nn - 1).into_owned();
        let a = z.transpose() * &k * &z;
        let b = z.transpose() * (DMatrix::from_diagonal(&m) + &k) * &z;
        let l = b.cholesky().unwrap().l();
        let linv = l.try_inverse().unwrap();
        let c = &linv * a * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        c.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Resolvent of `r -> r^3` by bisection.
pub fn cubic_resolvent(eps: f64, r: f64) -> f64 {
    let (mut lo, mut hi) = if r >= 0.0 { (0.0, r) } else { (r, 0.0) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + eps * mid * mid * mid > r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn cubic_yosida(eps: f64, r: f64) -> f64 {
    (r - cubic_resolvent(eps, r)) / eps
}

/// Parameters of one backward-Euler step for the dense oracle.
pub struct StepData<'a> {
    pub tau: f64,
    /// Coefficient of the viscous term.
    pub visc: f64,
    pub v_old: &'a [f64],
    pub m0: f64,
    /// Nodal nonlinearity on bulk and boundary nodes.
    pub beta_bulk: &'a dyn Fn(f64) -> f64,
    pub beta_surf: &'a dyn Fn(f64) -> f64,
    /// Lipschitz bounds used for stabilization.
    pub lip_bulk: f64,
    pub lip_surf: f64,
    /// Slope of the linear perturbation `pi(r) = slope r` (bulk and boundary).
    pub pi_slope: f64,
    /// Evaluate `pi` at the new level instead of the old one.
    pub pi_implicit: bool,
    pub f_bulk: &'a [f64],
    pub f_surf: &'a [f64],
}

/// One convex-split step solved by a stabilized fixed-point iteration on
/// dense matrices, iterated until the update falls below `tol`.
pub fn picard_step(model: &DenseModel, d: &StepData, tol: f64) -> (Vec<f64>, Vec<f64>, usize) {
    let nn = model.nn();
    let t = model.trace();
    let k = model.stiffness();
    let m = model.mass();
    let s = &model.m_bulk * d.lip_bulk + t.transpose() * &model.m_surf * d.lip_surf;
    let v_old = DVector::from_column_slice(d.v_old);
    let lump = |bulk: &DVector<f64>, surf: &DVector<f64>| -> DVector<f64> {
        bulk.component_mul(&model.m_bulk) + t.transpose() * surf.component_mul(&model.m_surf)
    };
    let u_star = if d.pi_implicit {
        DVector::from_element(nn, d.m0)
    } else {
        v_old.add_scalar(d.m0)
    };
    let p = lump(&(&u_star * d.pi_slope), &(&t * &u_star * d.pi_slope));
    let implicit_slope = if d.pi_implicit { d.pi_slope } else { 0.0 };
    let g = lump(
        &DVector::from_column_slice(d.f_bulk),
        &DVector::from_column_slice(d.f_surf),
    );

    // [M/tau, K; -(visc M/tau + K + S + c M), M] (v, mu) = (M v_old/tau, rhs2),
    // with c the slope of an implicit perturbation.
    let mut a = DMatrix::zeros(2 * nn, 2 * nn);
    for i in 0..nn {
        a[(i, i)] = m[i] / d.tau;
        a[(nn + i, nn + i)] = m[i];
        a[(nn + i, i)] = -(d.visc * m[i] / d.tau + s[i] + implicit_slope * m[i]);
    }
    a.view_mut((0, nn), (nn, nn)).copy_from(&k);
    a.view_mut((nn, 0), (nn, nn)).sub_assign(&k);
    let lu = a.lu();

    let mut v = v_old.clone();
    let mut iters = 0;
    loop {
        iters += 1;
        let u = v.add_scalar(d.m0);
        let ub = u.map(|x| (d.beta_bulk)(x));
        let us = (&t * &u).map(|x| (d.beta_surf)(x));
        let b = lump(&ub, &us);
        let mut rhs = DVector::zeros(2 * nn);
        for i in 0..nn {
            rhs[i] = m[i] * v_old[i] / d.tau;
            rhs[nn + i] = -d.visc * m[i] * v_old[i] / d.tau + b[i] - s[i] * v[i] + p[i] - g[i];
        }
        let x = lu.solve(&rhs).unwrap();
        let v_new = x.rows(0, nn).into_owned();
        let change = (&v_new - &v).amax();
        v = v_new;
        if change < tol || iters > 10_000 {
            let mu: Vec<f64> = x.rows(nn, nn).iter().copied().collect();
            return (v.iter().copied().collect(), mu, iters);
        }
    }
}

/// `i`-th point of the base-2 van der Corput sequence mapped to `[lo, hi)`.
pub fn van_der_corput(i: usize, lo: f64, hi: f64) -> f64 {
    let mut x = 0.0;
    let mut f = 0.5;
    let mut k = i + 1;
    while k > 0 {
        if k & 1 == 1 {
            x += f;
        }
        f *= 0.5;
        k >>= 1;
    }
    lo + (hi - lo) * x
}
