//! Dilation operators and the lacunary splitting that bounds them.
//!
//! D_a f(x) = f(a x). Two interleaved geometric families of intervals
//! partition (0, 1):
//!   parity 1: (4^{-k-1}, 2 * 4^{-k-1}),  k >= 0  (total measure 1/3)
//!   parity 2: (2 * 4^{-k-1}, 4^{-k}),    k >= 0  (total measure 2/3)
//! Either family meets (0, x) in measure exactly x - (2/3) * lower(I_k)
//! when x lies in its k-th interval, and never more than (2/3) x. Feeding
//! that through distribution functions bounds the rearrangement of a
//! restricted function by a 3/2-dilation of the original, which is what
//! drives the operator-norm bound below.

use crate::error::{Error, Result};
use crate::geometry::{RatBox, RegionSet};
use crate::quasinorm::QuasinormSpec;
use crate::rearrangement::{rearrangement, Profile};
use crate::scalar::{rat, rat_to_f64, two_pow, Rat};
use crate::step::StepFunction;
use num_traits::{Signed, Zero};

/// D_a f: each piece box is carried to box / a.
pub fn dilate(f: &StepFunction, a: &Rat) -> Result<StepFunction> {
    if !a.is_positive() {
        return Err(Error::NonpositiveDilation(a.to_string()));
    }
    let inv = a.recip();
    let pieces = f
        .pieces()
        .iter()
        .map(|(b, v)| Ok((b.scaled(&inv)?, v.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(StepFunction::from_disjoint_pieces(f.dim(), pieces))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LacunaryFamily {
    pub parity: u8,
    /// intervals k = 0..=depth are materialized; the rest is the tail
    pub depth: usize,
}

impl LacunaryFamily {
    pub fn new(parity: u8, depth: usize) -> Result<Self> {
        if parity != 1 && parity != 2 {
            return Err(Error::BadParameter(format!("parity must be 1 or 2, got {parity}")));
        }
        Ok(LacunaryFamily { parity, depth })
    }

    fn factor(&self) -> Rat {
        rat(self.parity as i64, 1)
    }

    /// lower endpoint of the k-th interval: factor * 4^{-k-1}
    pub fn lower(&self, k: usize) -> Rat {
        self.factor() * two_pow(-2 * (k as i32) - 2)
    }

    pub fn interval(&self, k: usize) -> RatBox {
        let lo = self.lower(k);
        let hi = &lo + &lo;
        RatBox::interval(lo, hi).expect("0 < lo < hi")
    }

    pub fn intervals(&self) -> Vec<RatBox> {
        (0..=self.depth).map(|k| self.interval(k)).collect()
    }

    pub fn to_region_set(&self) -> RegionSet {
        RegionSet::new(self.intervals()).expect("disjoint intervals")
    }

    /// measure of the whole (untruncated) family: parity / 3
    pub fn total_measure(&self) -> Rat {
        self.factor() * rat(1, 3)
    }

    /// measure of the intervals beyond `depth`: (parity/3) * 4^{-depth-1}
    pub fn truncation_tail(&self) -> Rat {
        self.total_measure() * two_pow(-2 * (self.depth as i32) - 2)
    }

    /// smallest k with lower(I_k) < x; float estimate refined exactly
    fn first_k_below(&self, x: &Rat) -> usize {
        let xf = rat_to_f64(x);
        let mut k = if xf > 0.0 {
            (((self.parity as f64 / xf).log2() / 2.0) - 1.0).ceil().max(0.0) as usize
        } else {
            0
        };
        while k > 0 && self.lower(k - 1) < *x {
            k -= 1;
        }
        while self.lower(k) >= *x {
            k += 1;
        }
        k
    }

    /// Exact measure of the full (untruncated) family inside (0, x),
    /// geometric tail included.
    pub fn measure_below(&self, x: &Rat) -> Rat {
        if !x.is_positive() {
            return Rat::zero();
        }
        let k = self.first_k_below(x);
        let lo = self.lower(k);
        let hi = &lo + &lo;
        // sum of all interval lengths from index k on: lower(I_k) * 4/3
        let from_k = &lo * rat(4, 3);
        if *x >= hi {
            from_k
        } else {
            (x - &lo) + (from_k - lo)
        }
    }

    /// The measure identity at interior points: for x in I_k the family
    /// meets (0, x) in measure exactly x - (2/3) lower(I_k).
    pub fn shift_position(&self, x: &Rat, k: usize) -> Rat {
        x - rat(2, 3) * self.lower(k)
    }
}

/// Restriction of a (profile-shaped) function to the truncated family,
/// together with the measure dropped by the truncation.
pub fn lacunary_restrict(g: &Profile, parity: u8, depth: usize) -> Result<(StepFunction, Rat)> {
    let fam = LacunaryFamily::new(parity, depth)?;
    let step = g.to_step();
    Ok((step.restrict_disjoint(&fam.intervals()), fam.truncation_tail()))
}

#[derive(Clone, Debug)]
pub struct LacunaryBoundCheck {
    pub parity: u8,
    pub depth: usize,
    /// (t, g(3t/2) - (Rg)*(t)) at every probe; all entries must be >= 0
    pub margins: Vec<(Rat, Rat)>,
    pub min_margin: Rat,
    pub equality_hits: usize,
}

impl LacunaryBoundCheck {
    pub fn holds(&self) -> bool {
        !self.min_margin.is_negative()
    }
}

/// Exact check of (R g)*(t) <= g(3t/2) over breakpoint-derived probes:
/// the rearrangement of the restriction is dominated by the 3/2-dilate.
pub fn check_lacunary_rearrangement_bound(
    g: &Profile,
    parity: u8,
    depth: usize,
) -> Result<LacunaryBoundCheck> {
    let (restricted, _tail) = lacunary_restrict(g, parity, depth)?;
    let r = rearrangement(&restricted)?;
    let three_halves = rat(3, 2);
    let two_thirds = rat(2, 3);

    // probes: breakpoints and midpoints of (Rg)*, pullbacks of g's
    // breakpoints through t -> 3t/2, and a coarse dyadic sweep
    let mut probes: Vec<Rat> = Vec::new();
    let rb = r.breakpoints();
    for j in 0..rb.len() {
        probes.push(rb[j].clone());
        if j + 1 < rb.len() {
            probes.push((&rb[j] + &rb[j + 1]) / rat(2, 1));
        }
    }
    for t in g.breakpoints() {
        probes.push(t * &two_thirds);
    }
    let horizon = g.support_bound();
    for i in 1..=16 {
        probes.push(&horizon * rat(i, 16));
    }
    probes.sort();
    probes.dedup();

    let mut margins = Vec::with_capacity(probes.len());
    let mut min_margin: Option<Rat> = None;
    let mut equality_hits = 0;
    for t in probes {
        let lhs = r.eval(&t);
        let rhs = g.eval(&(&t * &three_halves));
        let margin = rhs - lhs;
        if margin.is_zero() {
            equality_hits += 1;
        }
        match &min_margin {
            Some(m) if *m <= margin => {}
            _ => min_margin = Some(margin.clone()),
        }
        margins.push((t, margin));
    }
    Ok(LacunaryBoundCheck {
        parity,
        depth,
        margins,
        min_margin: min_margin.unwrap_or_else(Rat::zero),
        equality_hits,
    })
}

/// Certified upper bound for the operator norm of D_a on a C-quasinormed
/// rearrangement-invariant space over R^n: compressions (a >= 1) do not
/// expand, and each (2/3)^{1/n} step of stretching costs at most 2C.
pub fn dilation_norm_bound(n: u32, c: f64, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::BadParameter("dimension must be >= 1".into()));
    }
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::BadParameter(format!("concavity must be >= 1, got {c}")));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::NonpositiveDilation(format!("{a}")));
    }
    if a >= 1.0 {
        return Ok(1.0);
    }
    let step = (2.0f64 / 3.0).powf(1.0 / n as f64);
    Ok(2.0 * c * a.powf((2.0 * c).ln() / step.ln()))
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub a: f64,
    /// worst ||D_a f|| / ||f|| over the sample set
    pub worst_ratio: f64,
    pub bound: f64,
}

/// Empirical dilation sweep: for each a, the worst norm ratio over the
/// samples, paired with the certified bound it must respect.
pub fn empirical_dilation_sweep(
    spec: &QuasinormSpec,
    samples: &[StepFunction],
    a_grid: &[Rat],
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(a_grid.len());
    for a in a_grid {
        let af = rat_to_f64(a);
        let mut worst: f64 = 0.0;
        let mut n_dim = 1u32;
        for f in samples {
            let base = spec.eval(f)?;
            if base == 0.0 {
                continue;
            }
            n_dim = f.dim() as u32;
            let ratio = spec.eval(&dilate(f, a)?)? / base;
            worst = worst.max(ratio);
        }
        out.push(SweepPoint {
            a: af,
            worst_ratio: worst,
            bound: dilation_norm_bound(n_dim, spec.concavity, af)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasinorm::lp_norm;
    use crate::scalar::{rat_int, Scalar};
    use num_traits::One;

    fn iv(lo: Rat, hi: Rat) -> RatBox {
        RatBox::interval(lo, hi).unwrap()
    }

    fn probe_profile() -> Profile {
        Profile::from_parts(
            vec![Rat::zero(), rat(1, 8), rat(1, 2), rat_int(2)],
            vec![rat_int(3), rat_int(2), Rat::one()],
        )
        .unwrap()
    }

    #[test]
    fn dilate_scales_regions_and_measure() {
        let f = StepFunction::from_pieces(
            1,
            vec![
                (iv(rat_int(0), rat_int(1)), Scalar::from_int(3)),
                (iv(rat_int(1), rat_int(3)), Scalar::from_int(1)),
            ],
        )
        .unwrap();
        let g = dilate(&f, &rat(1, 2)).unwrap(); // g(x) = f(x/2), support (0,6)
        assert_eq!(g.support_measure(), rat_int(6));
        assert_eq!(g.eval(&[rat(11, 2)]), Scalar::from_int(1));
        assert_eq!(g.eval(&[rat(3, 2)]), Scalar::from_int(3));
        assert!(dilate(&f, &Rat::zero()).is_err());
        // round trip
        let back = dilate(&g, &rat_int(2)).unwrap();
        assert!(back.ae_eq(&f).unwrap());
    }

    #[test]
    fn family_geometry() {
        let f1 = LacunaryFamily::new(1, 3).unwrap();
        let f2 = LacunaryFamily::new(2, 3).unwrap();
        assert_eq!(f1.interval(0), iv(rat(1, 4), rat(1, 2)));
        assert_eq!(f2.interval(0), iv(rat(1, 2), rat_int(1)));
        assert_eq!(f1.total_measure(), rat(1, 3));
        assert_eq!(f2.total_measure(), rat(2, 3));
        assert_eq!(f1.truncation_tail(), rat(1, 3) * two_pow(-8));
        // the two truncated families tile (4^{-d-1}, 1) up to endpoints
        let mut all = f1.intervals();
        all.extend(f2.intervals());
        let union = RegionSet::new(all).unwrap();
        assert_eq!(union.measure(), Rat::one() - two_pow(-8));
        assert!(LacunaryFamily::new(3, 1).is_err());
    }

    #[test]
    fn measure_below_frozen_example() {
        // x = 3/8 sits in the parity-1 interval (1/4, 1/2):
        // (3/8 - 1/4) + 1/12 = 5/24
        let fam = LacunaryFamily::new(1, 10).unwrap();
        assert_eq!(fam.measure_below(&rat(3, 8)), rat(5, 24));
        assert_eq!(fam.measure_below(&rat_int(5)), rat(1, 3));
        assert_eq!(fam.measure_below(&Rat::zero()), Rat::zero());
    }

    #[test]
    fn shift_formula_matches_measure() {
        // wherever x lies inside I_k, the exact intersection measure is
        // the shifted position x - (2/3) lower(I_k)
        for parity in [1u8, 2u8] {
            let fam = LacunaryFamily::new(parity, 20).unwrap();
            for k in [0usize, 1, 3, 7] {
                let lo = fam.lower(k);
                for w in [rat(1, 10), rat(1, 2), rat(9, 10)] {
                    let x = &lo + &lo * w; // inside (lo, 2 lo)
                    assert_eq!(fam.measure_below(&x), fam.shift_position(&x, k));
                }
            }
        }
    }

    #[test]
    fn intersection_measure_is_at_most_two_thirds_x() {
        let grid: Vec<Rat> = (1..=64).map(|i| rat(i, 48)).collect();
        for parity in [1u8, 2u8] {
            let fam = LacunaryFamily::new(parity, 30).unwrap();
            for x in &grid {
                let m = fam.measure_below(x);
                assert!(m <= rat(2, 3) * x, "parity {parity}, x={x}: {m}");
            }
            // equality at interval upper endpoints
            let top = fam.interval(2).sides()[0].1.clone();
            assert_eq!(fam.measure_below(&top), rat(2, 3) * &top);
        }
    }

    #[test]
    fn restrictions_partition_the_window() {
        let g = probe_profile();
        let depth = 4;
        let (r1, _) = lacunary_restrict(&g, 1, depth).unwrap();
        let (r2, _) = lacunary_restrict(&g, 2, depth).unwrap();
        let window = iv(two_pow(-2 * (depth as i32) - 2), Rat::one());
        let inside = g.to_step().restrict_disjoint(std::slice::from_ref(&window));
        assert!(r1.add(&r2).unwrap().ae_eq(&inside).unwrap());
    }

    #[test]
    fn rearrangement_bound_holds_with_equality_somewhere() {
        for parity in [1u8, 2u8] {
            let chk = check_lacunary_rearrangement_bound(&probe_profile(), parity, 6).unwrap();
            assert!(chk.holds(), "parity {parity}: min margin {}", chk.min_margin);
            assert!(chk.min_margin.is_zero());
            assert!(chk.equality_hits > 0);
        }
        // indicator profile: the restricted mass is exactly total_measure
        // minus tail, and the bound is tight along the flat stretch
        let flat = Profile::from_parts(vec![Rat::zero(), rat(1, 2)], vec![Rat::one()]).unwrap();
        let chk = check_lacunary_rearrangement_bound(&flat, 1, 8).unwrap();
        assert!(chk.holds());
    }

    #[test]
    fn norm_bound_frozen_and_monotone() {
        let b = dilation_norm_bound(1, 2.0, 0.5).unwrap();
        assert!((b - 42.784685562260975).abs() < 1e-9, "{b}");
        assert_eq!(dilation_norm_bound(1, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(dilation_norm_bound(1, 2.0, 3.0).unwrap(), 1.0);
        assert!(dilation_norm_bound(1, 2.0, 0.25).unwrap() > b);
        assert!(dilation_norm_bound(2, 2.0, 0.5).unwrap() > b); // weaker step in higher dimension
        assert!(dilation_norm_bound(1, 2.0, 0.0).is_err());
    }

    #[test]
    fn sweep_respects_bounds_and_lp_closed_form() {
        let samples = vec![
            StepFunction::from_pieces(
                1,
                vec![
                    (iv(rat_int(0), rat(1, 2)), Scalar::from_int(4)),
                    (iv(rat(1, 2), rat_int(2)), Scalar::from_int(1)),
                ],
            )
            .unwrap(),
            StepFunction::indicator(iv(rat(1, 3), rat_int(3))),
        ];
        let spec = QuasinormSpec::lp(0.5).unwrap();
        let grid: Vec<Rat> = vec![rat(1, 4), rat(1, 2), rat(3, 4), Rat::one()];
        let sweep = empirical_dilation_sweep(&spec, &samples, &grid).unwrap();
        for w in sweep.windows(2) {
            assert!(w[0].worst_ratio >= w[1].worst_ratio - 1e-9);
        }
        for pt in &sweep {
            assert!(pt.worst_ratio <= pt.bound * (1.0 + 1e-9), "a={}", pt.a);
        }
        // ||D_a f||_p = a^{-1/p} ||f||_p in one dimension
        let f = &samples[0];
        for a in &grid {
            let af = rat_to_f64(a);
            for p in [0.5, 1.0, 2.0] {
                let lhs = lp_norm(&dilate(f, a).unwrap(), p).unwrap();
                let rhs = af.powf(-1.0 / p) * lp_norm(f, p).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10 * rhs, "a={af}, p={p}");
            }
        }
    }
}
