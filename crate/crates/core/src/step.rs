//! Step functions: finitely many box pieces with exact scalar values.
//!
//! A `StepFunction` is zero outside its pieces; pieces are pairwise disjoint
//! up to measure zero and carry nonzero values. Integrals and measures are
//! exact rationals.

use crate::error::{Error, Result};
use crate::geometry::{RatBox, RegionSet};
use crate::jsonio;
use crate::scalar::{Rat, Scalar};
use num_traits::Zero;
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFunction {
    dim: usize,
    pieces: Vec<(RatBox, Scalar)>,
}

impl StepFunction {
    pub fn zero(dim: usize) -> Self {
        StepFunction {
            dim,
            pieces: Vec::new(),
        }
    }

    pub fn indicator(region: RatBox) -> Self {
        let dim = region.dim();
        StepFunction {
            dim,
            pieces: vec![(region, Scalar::from_int(1))],
        }
    }

    pub fn scaled_indicator(region: RatBox, value: Scalar) -> Self {
        let dim = region.dim();
        if value.is_zero() {
            return StepFunction::zero(dim);
        }
        StepFunction {
            dim,
            pieces: vec![(region, value)],
        }
    }

    /// Validating constructor: drops zero values, sorts, rejects overlaps.
    pub fn from_pieces(dim: usize, pieces: Vec<(RatBox, Scalar)>) -> Result<Self> {
        let mut kept: Vec<(RatBox, Scalar)> = Vec::with_capacity(pieces.len());
        for (b, v) in pieces {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch(dim, b.dim()));
            }
            if !v.is_zero() {
                kept.push((b, v));
            }
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        if dim == 1 {
            for w in kept.windows(2) {
                let (_, ahi) = &w[0].0.sides()[0];
                let (blo, _) = &w[1].0.sides()[0];
                if blo < ahi {
                    return Err(Error::OverlappingPieces(format!(
                        "{:?} and {:?}",
                        w[0].0, w[1].0
                    )));
                }
            }
        } else {
            for i in 0..kept.len() {
                for j in i + 1..kept.len() {
                    if kept[i].0.overlaps(&kept[j].0) {
                        return Err(Error::OverlappingPieces(format!(
                            "{:?} and {:?}",
                            kept[i].0, kept[j].0
                        )));
                    }
                }
            }
        }
        let mut f = StepFunction { dim, pieces: kept };
        f.merge_adjacent();
        Ok(f)
    }

    /// Internal fast path for pieces known to be pairwise disjoint.
    pub(crate) fn from_disjoint_pieces(dim: usize, mut pieces: Vec<(RatBox, Scalar)>) -> Self {
        pieces.retain(|(_, v)| !v.is_zero());
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        let mut f = StepFunction { dim, pieces };
        f.merge_adjacent();
        f
    }

    /// Coalesce touching 1-D intervals carrying equal values.
    fn merge_adjacent(&mut self) {
        if self.dim != 1 || self.pieces.len() < 2 {
            return;
        }
        let mut merged: Vec<(RatBox, Scalar)> = Vec::with_capacity(self.pieces.len());
        for (b, v) in self.pieces.drain(..) {
            if let Some((prev, pv)) = merged.last_mut() {
                let (plo, phi) = prev.sides()[0].clone();
                let (lo, hi) = b.sides()[0].clone();
                if phi == lo && *pv == v {
                    *prev = RatBox::interval(plo, hi).expect("ordered");
                    continue;
                }
            }
            merged.push((b, v));
        }
        self.pieces = merged;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[(RatBox, Scalar)] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn eval(&self, x: &[Rat]) -> Scalar {
        for (b, v) in &self.pieces {
            if b.contains_point(x) {
                return v.clone();
            }
        }
        Scalar::zero()
    }

    pub fn support(&self) -> RegionSet {
        RegionSet::new(self.pieces.iter().map(|(b, _)| b.clone()).collect())
            .expect("pieces share a dimension")
    }

    pub fn support_measure(&self) -> Rat {
        self.pieces.iter().map(|(b, _)| b.measure()).sum()
    }

    pub fn bounding_box(&self) -> Option<RatBox> {
        let first = self.pieces.first()?;
        let mut sides: Vec<(Rat, Rat)> = first.0.sides().to_vec();
        for (b, _) in &self.pieces[1..] {
            for (i, (lo, hi)) in b.sides().iter().enumerate() {
                if lo < &sides[i].0 {
                    sides[i].0 = lo.clone();
                }
                if hi > &sides[i].1 {
                    sides[i].1 = hi.clone();
                }
            }
        }
        Some(RatBox::new(sides).expect("nonempty sides"))
    }

    /// Pointwise combination on the common refinement. The combiner must map
    /// (0, 0) to 0 so the result keeps compact support.
    pub fn combine<F>(&self, other: &Self, op: F) -> Result<Self>
    where
        F: Fn(&Scalar, &Scalar) -> Scalar,
    {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.is_zero() && other.is_zero() {
            return Ok(StepFunction::zero(self.dim));
        }
        if self.dim == 1 {
            return Ok(self.combine_1d(other, op));
        }
        let mut cuts: Vec<Vec<Rat>> = vec![Vec::new(); self.dim];
        for (b, _) in self.pieces.iter().chain(other.pieces.iter()) {
            for (i, (lo, hi)) in b.sides().iter().enumerate() {
                cuts[i].push(lo.clone());
                cuts[i].push(hi.clone());
            }
        }
        for c in cuts.iter_mut() {
            c.sort();
            c.dedup();
        }
        let mut out: Vec<(RatBox, Scalar)> = Vec::new();
        let mut idx = vec![0usize; self.dim];
        'outer: loop {
            let sides: Vec<(Rat, Rat)> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| (cuts[i][j].clone(), cuts[i][j + 1].clone()))
                .collect();
            let cell = RatBox::new(sides).expect("cuts strictly increase");
            let c = cell.center();
            let a = self.eval(&c);
            let b = other.eval(&c);
            if !(a.is_zero() && b.is_zero()) {
                let v = op(&a, &b);
                if !v.is_zero() {
                    out.push((cell, v));
                }
            }
            for i in 0..self.dim {
                idx[i] += 1;
                if idx[i] + 1 < cuts[i].len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        Ok(StepFunction::from_disjoint_pieces(self.dim, out))
    }

    fn combine_1d<F>(&self, other: &Self, op: F) -> Self
    where
        F: Fn(&Scalar, &Scalar) -> Scalar,
    {
        let mut cuts: Vec<Rat> = Vec::with_capacity(2 * (self.pieces.len() + other.pieces.len()));
        for (b, _) in self.pieces.iter().chain(other.pieces.iter()) {
            let (lo, hi) = &b.sides()[0];
            cuts.push(lo.clone());
            cuts.push(hi.clone());
        }
        cuts.sort();
        cuts.dedup();
        let mut out: Vec<(RatBox, Scalar)> = Vec::new();
        let (mut fi, mut gi) = (0usize, 0usize);
        for w in cuts.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            while fi < self.pieces.len() && &self.pieces[fi].0.sides()[0].1 <= lo {
                fi += 1;
            }
            while gi < other.pieces.len() && &other.pieces[gi].0.sides()[0].1 <= lo {
                gi += 1;
            }
            let a = self
                .pieces
                .get(fi)
                .filter(|(b, _)| &b.sides()[0].0 <= lo)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(Scalar::zero);
            let b = other
                .pieces
                .get(gi)
                .filter(|(b, _)| &b.sides()[0].0 <= lo)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(Scalar::zero);
            if a.is_zero() && b.is_zero() {
                continue;
            }
            let v = op(&a, &b);
            if !v.is_zero() {
                out.push((
                    RatBox::interval(lo.clone(), hi.clone()).expect("cuts strictly increase"),
                    v,
                ));
            }
        }
        StepFunction::from_disjoint_pieces(1, out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a * b)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return StepFunction::zero(self.dim);
        }
        StepFunction {
            dim: self.dim,
            pieces: self.pieces.iter().map(|(b, v)| (b.clone(), v * c)).collect(),
        }
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        self.scale(&Scalar::real(c.clone()))
    }

    /// Pointwise modulus. Exact; errors when some |value| is irrational.
    pub fn abs(&self) -> Result<Self> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (b, v) in &self.pieces {
            let m = v
                .try_modulus()
                .ok_or_else(|| Error::IrrationalModulus(v.to_string()))?;
            pieces.push((b.clone(), Scalar::real(m)));
        }
        let mut f = StepFunction {
            dim: self.dim,
            pieces,
        };
        f.merge_adjacent();
        Ok(f)
    }

    /// Restriction to a union of pairwise disjoint boxes.
    pub fn restrict_disjoint(&self, boxes: &[RatBox]) -> Self {
        let mut out = Vec::new();
        for (b, v) in &self.pieces {
            for r in boxes {
                if let Some(i) = b.intersect(r) {
                    out.push((i, v.clone()));
                }
            }
        }
        StepFunction::from_disjoint_pieces(self.dim, out)
    }

    /// Restriction to an arbitrary finite union of boxes.
    pub fn restrict(&self, region: &RegionSet) -> Self {
        if region.is_empty() {
            return StepFunction::zero(self.dim);
        }
        self.restrict_disjoint(&region.disjoint_cells())
    }

    /// f minus its restriction: the part supported outside `boxes`.
    pub fn restrict_complement_disjoint(&self, boxes: &[RatBox]) -> Result<Self> {
        self.sub(&self.restrict_disjoint(boxes))
    }

    /// Exact integral of f.
    pub fn integral(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for (b, v) in &self.pieces {
            acc = &acc + &v.scale(&b.measure());
        }
        acc
    }

    /// Exact integral of |f|; errors when some |value| is irrational.
    pub fn integral_abs(&self) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (b, v) in &self.pieces {
            let m = v
                .try_modulus()
                .ok_or_else(|| Error::IrrationalModulus(v.to_string()))?;
            acc = acc + m * b.measure();
        }
        Ok(acc)
    }

    /// Equality up to a null set.
    pub fn ae_eq(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// |self| <= |other| almost everywhere, decided exactly on |.|^2.
    pub fn dominated_in_modulus_by(&self, other: &Self) -> Result<bool> {
        let excess = self.combine(other, |a, b| {
            if a.modulus_sq() > b.modulus_sq() {
                Scalar::from_int(1)
            } else {
                Scalar::zero()
            }
        })?;
        Ok(excess.is_zero())
    }

    /// Largest |value|; zero for the zero function.
    pub fn max_modulus(&self) -> Result<Rat> {
        let mut best = Rat::zero();
        for (_, v) in &self.pieces {
            let m = v
                .try_modulus()
                .ok_or_else(|| Error::IrrationalModulus(v.to_string()))?;
            if m > best {
                best = m;
            }
        }
        Ok(best)
    }

    pub fn min_piece_side(&self) -> Option<Rat> {
        self.pieces.iter().map(|(b, _)| b.min_side()).min()
    }

    pub fn to_json_value(&self) -> Result<Value> {
        let pieces = self
            .pieces
            .iter()
            .map(|(b, v)| {
                Ok(json!({
                    "region": jsonio::region_to_json(b)?,
                    "value": jsonio::scalar_to_json(v)?,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(json!({ "dimension": self.dim, "pieces": pieces }))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_json_value()?)
            .map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Serialization("step function must be an object".into()))?;
        let dim = obj
            .get("dimension")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Serialization("missing integer `dimension`".into()))?
            as usize;
        let pieces = obj
            .get("pieces")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Serialization("missing array `pieces`".into()))?;
        let parsed = pieces
            .iter()
            .map(|p| {
                let po = p
                    .as_object()
                    .ok_or_else(|| Error::Serialization("piece is not an object".into()))?;
                let region = jsonio::region_from_json(
                    po.get("region")
                        .ok_or_else(|| Error::Serialization("piece missing `region`".into()))?,
                )?;
                let value = jsonio::scalar_from_json(
                    po.get("value")
                        .ok_or_else(|| Error::Serialization("piece missing `value`".into()))?,
                )?;
                Ok((region, value))
            })
            .collect::<Result<Vec<_>>>()?;
        StepFunction::from_pieces(dim, parsed)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        StepFunction::from_json_value(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn iv(lo: Rat, hi: Rat) -> RatBox {
        RatBox::interval(lo, hi).unwrap()
    }

    fn step(parts: &[(i64, i64, i64, i64, i64, i64)]) -> StepFunction {
        // (lo_num, lo_den, hi_num, hi_den, val_num, val_den)
        StepFunction::from_pieces(
            1,
            parts
                .iter()
                .map(|&(a, b, c, d, n, m)| (iv(rat(a, b), rat(c, d)), Scalar::from_pair(n, m)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_overlap() {
        let r = StepFunction::from_pieces(
            1,
            vec![
                (iv(rat_int(0), rat_int(2)), Scalar::from_int(1)),
                (iv(rat_int(1), rat_int(3)), Scalar::from_int(2)),
            ],
        );
        assert!(matches!(r, Err(Error::OverlappingPieces(_))));
    }

    #[test]
    fn add_refines_partitions() {
        let f = StepFunction::indicator(iv(rat_int(0), rat_int(2)));
        let g = StepFunction::indicator(iv(rat_int(1), rat_int(3)));
        let s = f.add(&g).unwrap();
        assert_eq!(s.piece_count(), 3);
        assert_eq!(s.eval(&[rat(3, 2)]), Scalar::from_int(2));
        assert_eq!(s.eval(&[rat(1, 2)]), Scalar::from_int(1));
        assert_eq!(s.eval(&[rat(5, 2)]), Scalar::from_int(1));
        assert_eq!(s.integral(), Scalar::from_int(4));
        // subtracting g back recovers f up to a null set
        assert!(s.sub(&g).unwrap().ae_eq(&f).unwrap());
    }

    #[test]
    fn merge_is_a_noop_on_function_values() {
        // split (0,2) into halves with the same value: canonical form re-merges
        let split = step(&[(0, 1, 1, 1, 5, 1), (1, 1, 2, 1, 5, 1)]);
        let whole = step(&[(0, 1, 2, 1, 5, 1)]);
        assert_eq!(split, whole);
        assert_eq!(split.piece_count(), 1);
    }

    #[test]
    fn abs_and_integral() {
        // f = 3 chi_(0,1) - 2 chi_(1,3): integral f = -1, integral |f| = 7
        let f = step(&[(0, 1, 1, 1, 3, 1), (1, 1, 3, 1, -2, 1)]);
        assert_eq!(f.integral(), Scalar::from_int(-1));
        assert_eq!(f.integral_abs().unwrap(), rat_int(7));
        let a = f.abs().unwrap();
        assert_eq!(a.eval(&[rat(2, 1)]), Scalar::from_int(2));
        assert_eq!(a.integral(), Scalar::from_int(7));
        assert_eq!(f.max_modulus().unwrap(), rat_int(3));
    }

    #[test]
    fn abs_rejects_irrational_modulus() {
        let f = StepFunction::scaled_indicator(
            iv(rat_int(0), rat_int(1)),
            Scalar::new(rat_int(1), rat_int(1)),
        );
        assert!(matches!(f.abs(), Err(Error::IrrationalModulus(_))));
        // but a Pythagorean value is fine
        let g = StepFunction::scaled_indicator(
            iv(rat_int(0), rat_int(1)),
            Scalar::new(rat_int(3), rat_int(4)),
        );
        assert_eq!(g.abs().unwrap().eval(&[rat(1, 2)]), Scalar::from_int(5));
    }

    #[test]
    fn restriction() {
        let f = step(&[(0, 1, 4, 1, 2, 1)]);
        let r = f.restrict_disjoint(&[iv(rat_int(1), rat_int(2)), iv(rat_int(3), rat_int(5))]);
        assert_eq!(r.support_measure(), rat_int(2));
        assert_eq!(r.integral(), Scalar::from_int(4));
        let c = f.restrict_complement_disjoint(&[iv(rat_int(1), rat_int(2))]).unwrap();
        assert_eq!(c.support_measure(), rat_int(3));
    }

    #[test]
    fn modulus_domination() {
        let f = step(&[(0, 1, 1, 1, 1, 1)]);
        let g = step(&[(0, 1, 2, 1, -3, 1)]);
        assert!(f.dominated_in_modulus_by(&g).unwrap());
        assert!(!g.dominated_in_modulus_by(&f).unwrap());
    }

    #[test]
    fn two_dim_combine() {
        let a = StepFunction::indicator(
            RatBox::new(vec![(rat_int(0), rat_int(1)), (rat_int(0), rat_int(1))]).unwrap(),
        );
        let b = StepFunction::indicator(
            RatBox::new(vec![(rat(1, 2), rat(3, 2)), (rat_int(0), rat_int(1))]).unwrap(),
        );
        let s = a.add(&b).unwrap();
        assert_eq!(s.integral(), Scalar::from_int(2));
        assert_eq!(s.support_measure(), rat(3, 2));
        assert_eq!(s.eval(&[rat(3, 4), rat(1, 2)]), Scalar::from_int(2));
    }

    #[test]
    fn json_roundtrip() {
        let f = step(&[(0, 1, 1, 2, 3, 4), (1, 2, 1, 1, -2, 1)]);
        let s = f.to_json_string().unwrap();
        let g = StepFunction::from_json_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn scale_by_zero() {
        let f = step(&[(0, 1, 1, 1, 1, 1)]);
        assert!(f.scale(&Scalar::zero()).is_zero());
    }
}
