//! Seeded generators for test inputs.  Everything downstream of a fixed seed
//! is deterministic, so reports built from sampled checks are reproducible.

use crate::geometry::RatBox;
use crate::rearrangement::Profile;
use crate::scalar::{rat_int, two_pow, Rat, Scalar};
use crate::step::StepFunction;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Rational with numerator in [lo, hi] over a small random denominator.
    pub fn rat(&mut self, lo: i64, hi: i64) -> Rat {
        let den = *[1i64, 2, 3, 4, 8].choose(&mut self.rng).expect("nonempty");
        let num = self.rng.random_range(lo * den..=hi * den);
        Rat::new(num.into(), den.into())
    }

    fn nonzero_value(&mut self) -> Scalar {
        loop {
            let v = self.rat(-8, 8);
            if v != rat_int(0) {
                return Scalar::real(v);
            }
        }
    }

    /// Strictly increasing cuts carving [lo, hi] into `cells` intervals.
    fn axis_cuts(&mut self, lo: i64, hi: i64, cells: usize) -> Vec<Rat> {
        let mut cuts = vec![rat_int(lo), rat_int(hi)];
        let mut guard = 0;
        while cuts.len() < cells + 1 && guard < 200 {
            let c = self.rat(lo, hi);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
            guard += 1;
        }
        cuts.sort();
        cuts
    }

    /// Random step function on a grid partition of [-4,4]^dim; some cells are
    /// left empty so supports have holes.
    pub fn step_function(&mut self, dim: usize, max_cells_per_axis: usize) -> StepFunction {
        let cells = self.rng.random_range(1..=max_cells_per_axis.max(1));
        let axes: Vec<Vec<Rat>> = (0..dim).map(|_| self.axis_cuts(-4, 4, cells)).collect();
        let mut pieces = Vec::new();
        let mut idx = vec![0usize; dim];
        loop {
            if self.rng.random_bool(0.7) {
                let sides: Vec<(Rat, Rat)> = (0..dim)
                    .map(|a| (axes[a][idx[a]].clone(), axes[a][idx[a] + 1].clone()))
                    .collect();
                let b = RatBox::new(sides).expect("cuts strictly increase");
                pieces.push((b, self.nonzero_value()));
            }
            // odometer over the grid
            let mut a = 0;
            loop {
                if a == dim {
                    let f = StepFunction::from_pieces(dim, pieces)
                        .expect("grid cells are disjoint");
                    if f.is_zero() {
                        // retry rather than hand back a zero sample
                        return self.step_function(dim, max_cells_per_axis);
                    }
                    return f;
                }
                idx[a] += 1;
                if idx[a] + 1 < axes[a].len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }

    /// Non-increasing right-continuous profile with dyadic-ish breakpoints.
    pub fn profile(&mut self, max_pieces: usize) -> Profile {
        let n = self.rng.random_range(1..=max_pieces.max(1));
        let mut breakpoints: Vec<Rat> = vec![rat_int(0)];
        let mut t = rat_int(0);
        let mut values: Vec<Rat> = Vec::with_capacity(n);
        let mut v = self.rat(1, 10) + rat_int(8);
        for _ in 0..n {
            t += self.rat(1, 4) * two_pow(-self.rng.random_range(0..3));
            breakpoints.push(t.clone());
            values.push(v.clone());
            let drop = self.rat(1, 4);
            v = if v.clone() - drop.clone() > rat_int(0) {
                v - drop
            } else {
                v / rat_int(2)
            };
        }
        Profile::from_parts(breakpoints, values).expect("breakpoints increase, values decrease")
    }

    /// Pair of step functions on a common dimension, for two-argument checks.
    pub fn pair(&mut self, dim: usize) -> (StepFunction, StepFunction) {
        (self.step_function(dim, 3), self.step_function(dim, 3))
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        xs.shuffle(&mut self.rng);
    }

    /// Compact set strictly inside an open union, plus a budget: K is each
    /// G-box shrunk by a quarter of its min side, so containment is certain.
    pub fn cover_instance(&mut self, dim: usize) -> (Vec<RatBox>, Vec<RatBox>, Rat) {
        let count = self.rng.random_range(1..=2);
        let mut g_boxes = Vec::with_capacity(count);
        let mut k_boxes = Vec::with_capacity(count);
        let mut offset = rat_int(0);
        for _ in 0..count {
            let mut sides = Vec::with_capacity(dim);
            let mut inner = Vec::with_capacity(dim);
            for a in 0..dim {
                let lo = if a == 0 {
                    offset.clone() + self.rat(0, 1)
                } else {
                    self.rat(-2, 0)
                };
                let len = self.rat(1, 2) + rat_int(1);
                let hi = lo.clone() + len.clone();
                let margin = len / rat_int(4);
                inner.push((lo.clone() + margin.clone(), hi.clone() - margin));
                sides.push((lo, hi));
            }
            offset = sides[0].1.clone() + rat_int(1); // separate along the first axis
            g_boxes.push(RatBox::new(sides).expect("positive length"));
            k_boxes.push(RatBox::new(inner).expect("margin below half"));
        }
        // deeper targets in higher dimension explode the cube count
        let max_exp = if dim > 1 { 5 } else { 7 };
        let eps = two_pow(-self.rng.random_range(3..max_exp));
        (k_boxes, g_boxes, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RegionSet;

    #[test]
    fn same_seed_same_samples() {
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        for _ in 0..5 {
            let fa = a.step_function(2, 3);
            let fb = b.step_function(2, 3);
            assert!(fa.ae_eq(&fb).unwrap());
        }
        assert_eq!(a.profile(4).breakpoints(), b.profile(4).breakpoints());
    }

    #[test]
    fn different_seeds_differ() {
        let fa = Sampler::new(1).step_function(1, 4);
        let fb = Sampler::new(2).step_function(1, 4);
        assert!(!fa.ae_eq(&fb).unwrap());
    }

    #[test]
    fn samples_are_wellformed() {
        let mut s = Sampler::new(42);
        for dim in 1..=2 {
            for _ in 0..20 {
                let f = s.step_function(dim, 3);
                assert!(!f.is_zero());
                assert_eq!(f.dim(), dim);
            }
        }
        for _ in 0..20 {
            let p = s.profile(5);
            let mut prev: Option<Rat> = None;
            for v in p.values() {
                if let Some(pv) = &prev {
                    assert!(v <= pv);
                }
                prev = Some(v.clone());
            }
        }
    }

    #[test]
    fn cover_instances_are_strictly_nested() {
        let mut s = Sampler::new(11);
        for dim in 1..=2 {
            for _ in 0..10 {
                let (k, g, eps) = s.cover_instance(dim);
                assert_eq!(k.len(), g.len());
                for (inner, outer) in k.iter().zip(&g) {
                    assert!(inner.strictly_inside(outer));
                }
                assert!(eps > rat_int(0));
                // G boxes must be pairwise disjoint for downstream excess math
                let rs = RegionSet::new(g.clone()).unwrap();
                let total: Rat = rs.measure();
                let sum: Rat = g.iter().map(|b| b.measure()).sum();
                assert_eq!(total, sum);
            }
        }
    }
}
