//! Rational boxes, dyadic cubes and exact Lebesgue measure of finite unions.
//!
//! Everything here identifies sets that differ by a Lebesgue-null set, so a
//! box is treated as open and shared faces never contribute measure.

use crate::error::{Error, Result};
use crate::scalar::{rat_int, two_pow, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// Axis-aligned box with rational corners, `lo < hi` on every axis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RatBox {
    sides: Vec<(Rat, Rat)>,
}

impl RatBox {
    pub fn new(sides: Vec<(Rat, Rat)>) -> Result<RatBox> {
        if sides.is_empty() {
            return Err(Error::DegenerateRegion("zero-dimensional box".into()));
        }
        for (lo, hi) in &sides {
            if lo >= hi {
                return Err(Error::DegenerateRegion(format!("side ({lo}, {hi})")));
            }
        }
        Ok(RatBox { sides })
    }

    pub fn interval(lo: Rat, hi: Rat) -> Result<RatBox> {
        RatBox::new(vec![(lo, hi)])
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[(Rat, Rat)] {
        &self.sides
    }

    pub fn measure(&self) -> Rat {
        self.sides
            .iter()
            .fold(rat_int(1), |acc, (lo, hi)| acc * (hi - lo))
    }

    /// Open intersection; `None` when the overlap has measure zero.
    pub fn intersect(&self, other: &RatBox) -> Option<RatBox> {
        if self.dim() != other.dim() {
            return None;
        }
        let mut sides = Vec::with_capacity(self.dim());
        for ((alo, ahi), (blo, bhi)) in self.sides.iter().zip(other.sides.iter()) {
            let lo = alo.max(blo).clone();
            let hi = ahi.min(bhi).clone();
            if lo >= hi {
                return None;
            }
            sides.push((lo, hi));
        }
        Some(RatBox { sides })
    }

    /// Positive-measure overlap.
    pub fn overlaps(&self, other: &RatBox) -> bool {
        self.intersect(other).is_some()
    }

    /// Closures intersect (touching faces count).
    pub fn meets_closed(&self, other: &RatBox) -> bool {
        self.dim() == other.dim()
            && self
                .sides
                .iter()
                .zip(other.sides.iter())
                .all(|((alo, ahi), (blo, bhi))| alo <= bhi && blo <= ahi)
    }

    /// Open intersection with a closed box is nonempty (strict on both ends).
    pub fn open_meets_closure_of(&self, other: &RatBox) -> bool {
        self.dim() == other.dim()
            && self
                .sides
                .iter()
                .zip(other.sides.iter())
                .all(|((alo, ahi), (blo, bhi))| alo < bhi && blo < ahi)
    }

    /// The closure of `self` lies inside the open box `outer`.
    pub fn strictly_inside(&self, outer: &RatBox) -> bool {
        self.dim() == outer.dim()
            && self
                .sides
                .iter()
                .zip(outer.sides.iter())
                .all(|((lo, hi), (olo, ohi))| olo < lo && hi < ohi)
    }

    /// Smallest per-axis margin of the closure of `self` inside open `outer`.
    pub fn margin_inside(&self, outer: &RatBox) -> Option<Rat> {
        if !self.strictly_inside(outer) {
            return None;
        }
        let mut best: Option<Rat> = None;
        for ((lo, hi), (olo, ohi)) in self.sides.iter().zip(outer.sides.iter()) {
            let m = (lo - olo).min(ohi - hi);
            best = Some(match best {
                None => m,
                Some(b) => b.min(m),
            });
        }
        best
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        x.len() == self.dim()
            && self
                .sides
                .iter()
                .zip(x.iter())
                .all(|((lo, hi), xi)| lo < xi && xi < hi)
    }

    pub fn center(&self) -> Vec<Rat> {
        self.sides
            .iter()
            .map(|(lo, hi)| (lo + hi) / rat_int(2))
            .collect()
    }

    /// Coordinate-wise scaling by c > 0.
    pub fn scaled(&self, c: &Rat) -> Result<RatBox> {
        if !c.is_positive() {
            return Err(Error::NonpositiveDilation(c.to_string()));
        }
        Ok(RatBox {
            sides: self.sides.iter().map(|(lo, hi)| (lo * c, hi * c)).collect(),
        })
    }

    /// Grow every side by m on both ends.
    pub fn inflated(&self, m: &Rat) -> RatBox {
        RatBox {
            sides: self.sides.iter().map(|(lo, hi)| (lo - m, hi + m)).collect(),
        }
    }

    /// Squared Euclidean distance between the closures; exact.
    pub fn dist_sq(&self, other: &RatBox) -> Rat {
        let mut acc = Rat::zero();
        for ((alo, ahi), (blo, bhi)) in self.sides.iter().zip(other.sides.iter()) {
            let g1 = alo - bhi;
            let g2 = blo - ahi;
            let gap = if g1.is_positive() {
                g1
            } else if g2.is_positive() {
                g2
            } else {
                Rat::zero()
            };
            acc = acc + &gap * &gap;
        }
        acc
    }

    pub fn min_side(&self) -> Rat {
        self.sides
            .iter()
            .map(|(lo, hi)| hi - lo)
            .min()
            .expect("nonempty")
    }

    /// Largest |corner coordinate|; support radius in the max norm.
    pub fn sup_norm_bound(&self) -> Rat {
        self.sides
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .max()
            .expect("nonempty")
    }
}

/// Open dyadic cube of order k: product of (a_i/2^k, (a_i+1)/2^k).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicCube {
    pub k: i32,
    pub corner: Vec<i64>,
}

impl DyadicCube {
    pub fn new(k: i32, corner: Vec<i64>) -> Self {
        assert!(!corner.is_empty());
        DyadicCube { k, corner }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn side(&self) -> Rat {
        two_pow(-self.k)
    }

    pub fn measure(&self) -> Rat {
        let mut m = rat_int(1);
        for _ in 0..self.dim() {
            m = m * self.side();
        }
        m
    }

    pub fn to_box(&self) -> RatBox {
        let s = self.side();
        RatBox {
            sides: self
                .corner
                .iter()
                .map(|a| {
                    let lo = Rat::from(BigInt::from(*a)) * &s;
                    let hi = &lo + &s;
                    (lo, hi)
                })
                .collect(),
        }
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u64 << n) {
            let corner: Vec<i64> = self
                .corner
                .iter()
                .enumerate()
                .map(|(i, a)| 2 * a + ((mask >> i) & 1) as i64)
                .collect();
            out.push(DyadicCube::new(self.k + 1, corner));
        }
        out
    }
}

/// Finite union of same-order dyadic cubes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicComplex {
    pub k: i32,
    pub cells: BTreeSet<Vec<i64>>,
}

impl DyadicComplex {
    pub fn new(k: i32) -> Self {
        DyadicComplex {
            k,
            cells: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, corner: Vec<i64>) {
        self.cells.insert(corner);
    }

    pub fn dim(&self) -> Option<usize> {
        self.cells.iter().next().map(|c| c.len())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn measure(&self) -> Rat {
        match self.dim() {
            None => Rat::zero(),
            Some(n) => {
                let mut cell = rat_int(1);
                for _ in 0..n {
                    cell = cell * two_pow(-self.k);
                }
                cell * rat_int(self.cells.len() as i64)
            }
        }
    }

    pub fn cubes(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        self.cells
            .iter()
            .map(move |c| DyadicCube::new(self.k, c.clone()))
    }

    pub fn to_boxes(&self) -> Vec<RatBox> {
        self.cubes().map(|q| q.to_box()).collect()
    }
}

/// Finite union of boxes. Overlaps are allowed; measure counts the union once.
#[derive(Clone, Debug)]
pub struct RegionSet {
    dim: usize,
    boxes: Vec<RatBox>,
}

impl RegionSet {
    pub fn new(boxes: Vec<RatBox>) -> Result<RegionSet> {
        let dim = match boxes.first() {
            Some(b) => b.dim(),
            None => {
                return Ok(RegionSet {
                    dim: 0,
                    boxes: Vec::new(),
                })
            }
        };
        for b in &boxes {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch(dim, b.dim()));
            }
        }
        Ok(RegionSet { dim, boxes })
    }

    pub fn empty() -> RegionSet {
        RegionSet {
            dim: 0,
            boxes: Vec::new(),
        }
    }

    pub fn boxes(&self) -> &[RatBox] {
        &self.boxes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn measure(&self) -> Rat {
        self.disjoint_cells().iter().map(RatBox::measure).sum()
    }

    /// Grid-arrangement decomposition of the union into disjoint cells.
    pub fn disjoint_cells(&self) -> Vec<RatBox> {
        arrangement_cells(&self.boxes, |cell| covered_by_any(cell, &self.boxes))
    }

    /// Exact measure of self minus other.
    pub fn measure_difference(&self, other: &RegionSet) -> Rat {
        let mut all = self.boxes.clone();
        all.extend(other.boxes.iter().cloned());
        arrangement_cells(&all, |cell| {
            covered_by_any(cell, &self.boxes) && !covered_by_any(cell, &other.boxes)
        })
        .iter()
        .map(RatBox::measure)
        .sum()
    }

    pub fn intersection_cells(&self, other: &RegionSet) -> Vec<RatBox> {
        let mut all = self.boxes.clone();
        all.extend(other.boxes.iter().cloned());
        arrangement_cells(&all, |cell| {
            covered_by_any(cell, &self.boxes) && covered_by_any(cell, &other.boxes)
        })
    }
}

fn covered_by_any(cell: &RatBox, boxes: &[RatBox]) -> bool {
    let c = cell.center();
    boxes.iter().any(|b| b.contains_point(&c))
}

/// Cells of the coordinate arrangement generated by the boxes, filtered.
fn arrangement_cells(boxes: &[RatBox], keep: impl Fn(&RatBox) -> bool) -> Vec<RatBox> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let dim = boxes[0].dim();
    let mut cuts: Vec<Vec<Rat>> = vec![Vec::new(); dim];
    for b in boxes {
        for (i, (lo, hi)) in b.sides().iter().enumerate() {
            cuts[i].push(lo.clone());
            cuts[i].push(hi.clone());
        }
    }
    for c in cuts.iter_mut() {
        c.sort();
        c.dedup();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let mut sides = Vec::with_capacity(dim);
        for (i, &j) in idx.iter().enumerate() {
            sides.push((cuts[i][j].clone(), cuts[i][j + 1].clone()));
        }
        let cell = RatBox { sides };
        if keep(&cell) {
            out.push(cell);
        }
        for i in 0..dim {
            idx[i] += 1;
            if idx[i] + 1 < cuts[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    out
}

/// Underlying measure space of a problem instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureSpace {
    /// (0, length) with Lebesgue measure.
    Interval { length: Rat },
    /// R^n with Lebesgue measure.
    Euclidean { dim: usize },
    /// Finitely many atoms with the given positive weights.
    Atoms { weights: Vec<Rat> },
}

impl MeasureSpace {
    pub fn dim(&self) -> usize {
        match self {
            MeasureSpace::Interval { .. } => 1,
            MeasureSpace::Euclidean { dim } => *dim,
            MeasureSpace::Atoms { .. } => 1,
        }
    }

    pub fn total_measure(&self) -> Option<Rat> {
        match self {
            MeasureSpace::Interval { length } => Some(length.clone()),
            MeasureSpace::Euclidean { .. } => None,
            MeasureSpace::Atoms { weights } => Some(weights.iter().cloned().sum()),
        }
    }

    /// Atoms realized as consecutive intervals of their weights; functions on
    /// the atomic space embed as step functions constant on these intervals.
    pub fn atom_intervals(&self) -> Option<Vec<RatBox>> {
        match self {
            MeasureSpace::Atoms { weights } => {
                let mut out = Vec::with_capacity(weights.len());
                let mut t = Rat::zero();
                for w in weights {
                    if !w.is_positive() {
                        return None;
                    }
                    let hi = &t + w;
                    out.push(RatBox::interval(t.clone(), hi.clone()).expect("w > 0"));
                    t = hi;
                }
                Some(out)
            }
            _ => None,
        }
    }
}

/// Is `w` an integer power of two? Returns the exponent k with w = 2^k.
pub fn log2_exact(w: &Rat) -> Option<i32> {
    if !w.is_positive() {
        return None;
    }
    let (n, d) = (w.numer(), w.denom());
    let one = BigInt::from(1);
    if d == &one {
        let bits = n.bits();
        if n == &(&one << (bits - 1) as usize) {
            return Some((bits - 1) as i32);
        }
        None
    } else if n == &one {
        let bits = d.bits();
        if d == &(&one << (bits - 1) as usize) {
            return Some(-((bits - 1) as i32));
        }
        None
    } else {
        None
    }
}

/// Recognize a box as a dyadic cube.
pub fn as_dyadic_cube(b: &RatBox) -> Option<DyadicCube> {
    let w = {
        let (lo, hi) = &b.sides()[0];
        hi - lo
    };
    let k = -log2_exact(&w)?;
    let mut corner = Vec::with_capacity(b.dim());
    for (lo, hi) in b.sides() {
        if &(hi - lo) != &w {
            return None;
        }
        let scaled = lo * two_pow(k);
        if !scaled.is_integer() {
            return None;
        }
        corner.push(scaled.to_integer().to_i64()?);
    }
    Some(DyadicCube::new(k, corner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn iv(a: i64, b: i64, c: i64, d: i64) -> RatBox {
        RatBox::interval(rat(a, b), rat(c, d)).unwrap()
    }

    #[test]
    fn box_measure_and_intersection() {
        let b = RatBox::new(vec![(rat(0, 1), rat(1, 2)), (rat(1, 4), rat(1, 1))]).unwrap();
        assert_eq!(b.measure(), rat(3, 8));
        let c = RatBox::new(vec![(rat(1, 4), rat(1, 1)), (rat(0, 1), rat(1, 2))]).unwrap();
        let i = b.intersect(&c).unwrap();
        assert_eq!(i.measure(), rat(1, 16));
        assert!(RatBox::interval(rat(1, 2), rat(1, 2)).is_err());
    }

    #[test]
    fn union_measure_counts_overlap_once() {
        let r = RegionSet::new(vec![iv(0, 1, 2, 1), iv(1, 1, 3, 1)]).unwrap();
        assert_eq!(r.measure(), rat(3, 1));
        // disjoint with a shared endpoint: no double counting, no gap
        let r2 = RegionSet::new(vec![iv(0, 1, 1, 1), iv(1, 1, 2, 1)]).unwrap();
        assert_eq!(r2.measure(), rat(2, 1));
    }

    #[test]
    fn difference_measure() {
        let a = RegionSet::new(vec![iv(0, 1, 4, 1)]).unwrap();
        let b = RegionSet::new(vec![iv(1, 1, 2, 1), iv(3, 1, 5, 1)]).unwrap();
        assert_eq!(a.measure_difference(&b), rat(2, 1));
        assert_eq!(b.measure_difference(&a), rat(1, 1));
    }

    #[test]
    fn two_dim_union() {
        // two unit squares overlapping in a 1/2 x 1 strip
        let a = RatBox::new(vec![(rat(0, 1), rat(1, 1)), (rat(0, 1), rat(1, 1))]).unwrap();
        let b = RatBox::new(vec![(rat(1, 2), rat(3, 2)), (rat(0, 1), rat(1, 1))]).unwrap();
        let r = RegionSet::new(vec![a, b]).unwrap();
        assert_eq!(r.measure(), rat(3, 2));
    }

    #[test]
    fn dyadic_cube_roundtrip() {
        let q = DyadicCube::new(2, vec![1, -3]);
        assert_eq!(q.measure(), rat(1, 16));
        let b = q.to_box();
        assert_eq!(b.sides()[0], (rat(1, 4), rat(2, 4)));
        assert_eq!(b.sides()[1], (rat(-3, 4), rat(-2, 4)));
        assert_eq!(as_dyadic_cube(&b), Some(q.clone()));
        assert_eq!(q.children().len(), 4);
        let m: Rat = q.children().iter().map(|c| c.measure()).sum();
        assert_eq!(m, q.measure());
    }

    #[test]
    fn complex_measure() {
        // five cubes of order 2 in the plane: 5 * 2^(-2*2)
        let mut cx = DyadicComplex::new(2);
        for a in [[0, 0], [1, 0], [2, 0], [0, 1], [1, 1]] {
            cx.insert(a.to_vec());
        }
        assert_eq!(cx.measure(), rat(5, 16));
    }

    #[test]
    fn distances_and_margins() {
        let a = iv(0, 1, 1, 1);
        let b = iv(3, 1, 4, 1);
        assert_eq!(a.dist_sq(&b), rat(4, 1));
        assert_eq!(a.dist_sq(&a), rat(0, 1));
        let outer = iv(-1, 2, 3, 2);
        assert_eq!(a.margin_inside(&outer), Some(rat(1, 2)));
        assert_eq!(b.margin_inside(&outer), None);
    }

    #[test]
    fn log2_detection() {
        assert_eq!(log2_exact(&rat(1, 8)), Some(-3));
        assert_eq!(log2_exact(&rat(4, 1)), Some(2));
        assert_eq!(log2_exact(&rat(1, 1)), Some(0));
        assert_eq!(log2_exact(&rat(3, 8)), None);
        assert_eq!(log2_exact(&rat(1, 6)), None);
    }

    #[test]
    fn atoms_embed_as_intervals() {
        let sp = MeasureSpace::Atoms {
            weights: vec![rat(1, 1), rat(1, 2), rat(2, 1)],
        };
        let ivs = sp.atom_intervals().unwrap();
        assert_eq!(ivs.len(), 3);
        assert_eq!(ivs[2], iv(3, 2, 7, 2));
        assert_eq!(sp.total_measure(), Some(rat(7, 2)));
    }
}
