//! Seeded randomness.
//!
//! Every random quantity is drawn from `ChaCha8Rng::seed_from_u64(seed)`
//! (a counter-based stream cipher generator) through `Rng::gen::<f64>()`,
//! which maps the top 53 bits of a `u64` draw onto `[0, 1)`. Fields are
//! filled in node order, bulk nodes first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::DiscreteDomain;
use crate::spaces::{project_zero_mean, FieldPair};

pub struct FieldRng(ChaCha8Rng);

impl FieldRng {
    pub fn new(seed: u64) -> Self {
        FieldRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform sample in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.gen::<f64>()
    }

    pub fn uniform_vec(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }

    /// Trace-consistent pair with bulk values `mean + amplitude * U(-1, 1)`.
    pub fn perturbed_constant(&mut self, dom: &DiscreteDomain, mean: f64, amplitude: f64) -> FieldPair {
        let bulk = (0..dom.num_nodes())
            .map(|_| mean + amplitude * self.uniform(-1.0, 1.0))
            .collect();
        FieldPair::from_bulk(dom, bulk)
    }

    /// Random zero-mean trace-consistent pair.
    pub fn zero_mean_pair(&mut self, dom: &DiscreteDomain) -> FieldPair {
        let z = self.perturbed_constant(dom, 0.0, 1.0);
        project_zero_mean(dom, &z).expect("shapes match by construction")
    }

    /// Random pair with independent bulk and boundary components.
    pub fn h_pair(&mut self, dom: &DiscreteDomain) -> FieldPair {
        let bulk = self.uniform_vec(dom.num_nodes(), -1.0, 1.0);
        let boundary = self.uniform_vec(dom.num_boundary(), -1.0, 1.0);
        FieldPair::new(bulk, boundary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = FieldRng::new(7).uniform_vec(5, -1.0, 1.0);
        let b = FieldRng::new(7).uniform_vec(5, -1.0, 1.0);
        let c = FieldRng::new(8).uniform_vec(5, -1.0, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| (-1.0..1.0).contains(v)));
    }
}
