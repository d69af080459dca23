//! Dyadic covering and approximation by dyadic simple functions.
//!
//! `dyadic_cover` surrounds a compact union of boxes K, sitting inside an
//! open union G, with a complex of equal-order dyadic cubes Omega so that
//!   (1) Omega is contained in G,
//!   (2) K \ Omega is null,
//!   (3) the overshoot Omega \ K has measure below a requested epsilon,
//!   (4) every member cube meets K.
//! All four properties are re-verified with exact rational set arithmetic
//! before the complex is returned.
//!
//! `approximate_simple` uses the cover to produce a dyadic simple function
//! s with a certified bound ||f - s|| <= (2C + C^2 + C^3 + C^4 + C^5) eps
//! on any absolutely continuous quasinorm, logging the five error terms
//! the bound is assembled from.

use crate::error::{Error, Result};
use crate::geometry::{DyadicComplex, DyadicCube, RatBox, RegionSet};
use crate::quasinorm::QuasinormSpec;
use crate::scalar::{rat_to_f64, two_pow, Rat, Scalar};
use crate::step::StepFunction;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

const MAX_CUBES: i128 = 2_000_000;
const MAX_SPLIT_DEPTH: u32 = 24;
const MAX_SPLIT_LEAVES: usize = 65_536;

/// Finite union of closed boxes with dyadic-rational corners.
#[derive(Clone, Debug)]
pub struct CompactDyadicSet {
    dim: usize,
    boxes: Vec<RatBox>,
}

impl CompactDyadicSet {
    pub fn from_boxes(boxes: Vec<RatBox>) -> Result<Self> {
        let dim = match boxes.first() {
            Some(b) => b.dim(),
            None => return Err(Error::DegenerateRegion("empty compact set".into())),
        };
        for b in &boxes {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch(dim, b.dim()));
            }
        }
        Ok(CompactDyadicSet { dim, boxes })
    }

    pub fn from_cubes(cubes: &[DyadicCube]) -> Result<Self> {
        Self::from_boxes(cubes.iter().map(|q| q.to_box()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[RatBox] {
        &self.boxes
    }

    pub fn measure(&self) -> Rat {
        RegionSet::new(self.boxes.clone()).map(|r| r.measure()).unwrap_or_else(|_| Rat::zero())
    }
}

enum Containment {
    /// certified inside, with a sup-metric margin to the union's complement
    Inside(Rat),
    /// a sub-box with positive measure outside the union
    Outside(RatBox),
    /// split budget exhausted without a decision
    Undecided,
}

fn bisect(b: &RatBox) -> Vec<RatBox> {
    let mid: Vec<Rat> = b.center();
    let mut out = Vec::with_capacity(1 << b.dim());
    let mut idx = vec![false; b.dim()];
    loop {
        let sides: Vec<(Rat, Rat)> = b
            .sides()
            .iter()
            .enumerate()
            .map(|(a, (lo, hi))| {
                if idx[a] {
                    (mid[a].clone(), hi.clone())
                } else {
                    (lo.clone(), mid[a].clone())
                }
            })
            .collect();
        out.push(RatBox::new(sides).expect("bisection keeps lo < hi"));
        let mut a = 0;
        loop {
            if a == idx.len() {
                return out;
            }
            idx[a] = !idx[a];
            if idx[a] {
                break;
            }
            a += 1;
        }
    }
}

/// Certify that the CLOSED box sits inside the OPEN union, by recursive
/// bisection: a leaf counts once it is strictly inside a single member box.
/// Definite rejection happens when a sub-box has positive measure outside
/// the union.
fn certify_closed_in_open_union(b: &RatBox, union: &[RatBox]) -> Containment {
    let union_set = match RegionSet::new(union.to_vec()) {
        Ok(r) => r,
        Err(_) => return Containment::Undecided,
    };
    let mut stack: Vec<(RatBox, u32)> = vec![(b.clone(), 0)];
    let mut margin: Option<Rat> = None;
    let mut processed = 0usize;
    while let Some((leaf, depth)) = stack.pop() {
        processed += 1;
        if processed > MAX_SPLIT_LEAVES {
            return Containment::Undecided;
        }
        let best = union
            .iter()
            .filter_map(|g| leaf.margin_inside(g))
            .max();
        if let Some(m) = best {
            margin = Some(match margin {
                Some(acc) if acc <= m => acc,
                _ => m,
            });
            continue;
        }
        let leaf_set = RegionSet::new(vec![leaf.clone()]).expect("single box");
        if leaf_set.measure_difference(&union_set).is_positive() {
            return Containment::Outside(leaf);
        }
        if depth >= MAX_SPLIT_DEPTH {
            return Containment::Undecided;
        }
        for half in bisect(&leaf) {
            stack.push((half, depth + 1));
        }
    }
    match margin {
        Some(m) => Containment::Inside(m),
        None => Containment::Undecided,
    }
}

fn rat_floor_i64(x: &Rat) -> Result<i64> {
    x.floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::BadParameter("cube corner exceeds the machine range".into()))
}

/// Integer range of order-k cubes whose OPEN cube meets the CLOSED interval
/// [lo, hi]: a 2^{-k} < hi and (a+1) 2^{-k} > lo, both strict.
fn meeting_range(lo: &Rat, hi: &Rat, k: i32) -> Result<(i64, i64)> {
    let scale = two_pow(k);
    let lo_s = lo * &scale;
    let hi_s = hi * &scale;
    // smallest integer strictly greater than lo*2^k - 1
    let t = &lo_s - Rat::one();
    let a_min = if t.is_integer() {
        rat_floor_i64(&t)? + 1
    } else {
        rat_floor_i64(&t.ceil())?
    };
    // largest integer strictly smaller than hi*2^k
    let a_max = if hi_s.is_integer() {
        rat_floor_i64(&hi_s)? - 1
    } else {
        rat_floor_i64(&hi_s)?
    };
    Ok((a_min, a_max))
}

#[derive(Clone, Debug)]
pub struct DyadicCover {
    pub order: i32,
    pub cubes: DyadicComplex,
    /// dyadic inflation margin used for the overshoot control
    pub inflation: Rat,
    /// certified sup-metric separation between K and the complement of the
    /// working open set
    pub separation: Rat,
    /// exact measure of Omega \ K
    pub outer_excess: Rat,
    pub cube_count: usize,
}

/// Cover K by a complex of order-k cubes, k >= k0; all four output
/// properties are re-verified exactly before returning.
pub fn dyadic_cover(
    k_set: &CompactDyadicSet,
    g_boxes: &[RatBox],
    eps: &Rat,
    k0: i32,
) -> Result<DyadicCover> {
    let n = k_set.dim();
    if !eps.is_positive() {
        return Err(Error::BadParameter(format!("epsilon must be positive, got {eps}")));
    }
    for g in g_boxes {
        if g.dim() != n {
            return Err(Error::DimensionMismatch(n, g.dim()));
        }
    }

    // containment pre-check; its by-product is the exact sup-metric margin
    // from K to the complement of G
    let mut delta_g: Option<Rat> = None;
    for b in k_set.boxes() {
        match certify_closed_in_open_union(b, g_boxes) {
            Containment::Inside(m) => {
                delta_g = Some(match delta_g {
                    Some(acc) if acc <= m => acc,
                    _ => m,
                });
            }
            Containment::Outside(w) => {
                return Err(Error::NotCovered(format!(
                    "a region of positive measure near {w:?} lies outside the open set"
                )))
            }
            Containment::Undecided => {
                return Err(Error::ZeroMargin(format!(
                    "cannot certify positive distance from {b:?} to the complement"
                )))
            }
        }
    }
    let delta_g = delta_g.ok_or_else(|| Error::DegenerateRegion("empty compact set".into()))?;

    // largest dyadic inflation whose overshoot stays under eps
    let k_region = RegionSet::new(k_set.boxes().to_vec())?;
    let mut j = 0i32;
    let inflation = loop {
        let m = two_pow(-j);
        let inflated: Vec<RatBox> = k_set.boxes().iter().map(|b| b.inflated(&m)).collect();
        let excess = RegionSet::new(inflated)?.measure_difference(&k_region);
        if excess < *eps {
            break m;
        }
        j += 1;
        if j > 200 {
            return Err(Error::BadParameter("inflation search exhausted".into()));
        }
    };

    let separation = inflation.clone().min(delta_g);
    if !separation.is_positive() {
        return Err(Error::ZeroMargin("compact set touches the complement".into()));
    }

    // smallest admissible order: cube diameter sqrt(n) 2^{-k} below the
    // separation, compared as n 4^{-k} < separation^2 to stay rational
    let sep_sq = &separation * &separation;
    let n_rat = Rat::from_integer(BigInt::from(n));
    let mut order = k0.max(0);
    while &n_rat * two_pow(-2 * order) >= sep_sq {
        order += 1;
        if order > 200 {
            return Err(Error::ZeroMargin("separation too small for a workable order".into()));
        }
    }

    // enumerate candidate cubes per box; count before materializing
    let mut ranges: Vec<Vec<(i64, i64)>> = Vec::with_capacity(k_set.boxes().len());
    let mut total: i128 = 0;
    for b in k_set.boxes() {
        let mut per_axis = Vec::with_capacity(n);
        let mut count: i128 = 1;
        for (lo, hi) in b.sides() {
            let (a_min, a_max) = meeting_range(lo, hi, order)?;
            count *= (a_max - a_min + 1) as i128;
            per_axis.push((a_min, a_max));
        }
        total += count;
        if total > MAX_CUBES {
            return Err(Error::BadParameter(format!(
                "cover at order {order} would need more than {MAX_CUBES} cubes"
            )));
        }
        ranges.push(per_axis);
    }

    let mut complex = DyadicComplex::new(order);
    for (b, per_axis) in k_set.boxes().iter().zip(&ranges) {
        let mut corner: Vec<i64> = per_axis.iter().map(|(a, _)| *a).collect();
        'cells: loop {
            complex.insert(corner.clone());
            // property (4) for this cube: open cube meets the closed source
            let cube = DyadicCube::new(order, corner.clone());
            if !cube.to_box().open_meets_closure_of(b) {
                return Err(Error::NotCovered(format!(
                    "enumerated cube {corner:?} misses its source box"
                )));
            }
            let mut axis = 0;
            loop {
                if axis == n {
                    break 'cells;
                }
                corner[axis] += 1;
                if corner[axis] <= per_axis[axis].1 {
                    break;
                }
                corner[axis] = per_axis[axis].0;
                axis += 1;
            }
        }
    }

    // property (2): each source box is covered by its own closed cube range
    for (b, per_axis) in k_set.boxes().iter().zip(&ranges) {
        for (axis, (lo, hi)) in b.sides().iter().enumerate() {
            let (a_min, a_max) = per_axis[axis];
            let left = Rat::from_integer(BigInt::from(a_min)) * two_pow(-order);
            let right = Rat::from_integer(BigInt::from(a_max + 1)) * two_pow(-order);
            if &left > lo || &right < hi {
                return Err(Error::NotCovered(format!(
                    "cube range [{a_min}, {a_max}] fails to cover axis {axis} of {b:?}"
                )));
            }
        }
    }

    // property (1): every cube inside the open union, exactly
    let inflated: Vec<RatBox> = k_set.boxes().iter().map(|b| b.inflated(&inflation)).collect();
    for cube in complex.cubes() {
        let qb = cube.to_box();
        let in_g = g_boxes.iter().any(|g| qb.strictly_inside(g))
            || matches!(certify_closed_in_open_union(&qb, g_boxes), Containment::Inside(_));
        if !in_g {
            return Err(Error::NotCovered(format!("cube {:?} escapes the open set", cube)));
        }
        // the overshoot argument also needs every cube inside the inflation
        let in_h = inflated.iter().any(|h| qb.strictly_inside(h))
            || matches!(certify_closed_in_open_union(&qb, &inflated), Containment::Inside(_));
        if !in_h {
            return Err(Error::NotCovered(format!(
                "cube {:?} escapes the inflated hull",
                cube
            )));
        }
    }

    // property (3): lambda(Omega \ K) = lambda(Omega) - lambda(K), using (2)
    let cube_count = complex.cubes().count();
    let outer_excess = complex.measure() - k_region.measure();
    if outer_excess >= *eps {
        return Err(Error::NotCovered(format!(
            "overshoot {outer_excess} is not below {eps}"
        )));
    }

    Ok(DyadicCover {
        order,
        cubes: complex,
        inflation,
        separation,
        outer_excess,
        cube_count,
    })
}

/// Simple function supported on equal-order dyadic cubes with complex
/// rational values.
#[derive(Clone, Debug)]
pub struct RationalSimpleFunction {
    pub order: i32,
    pub cells: Vec<(DyadicCube, Scalar)>,
}

impl RationalSimpleFunction {
    pub fn to_step(&self, dim: usize) -> StepFunction {
        let pieces: Vec<(RatBox, Scalar)> = self
            .cells
            .iter()
            .map(|(q, v)| (q.to_box(), v.clone()))
            .collect();
        StepFunction::from_pieces(dim, pieces).expect("cells are disjoint")
    }
}

fn is_dyadic_rat(r: &Rat) -> bool {
    let d = r.denom().magnitude();
    d.count_ones() == 1
}

/// Exact order of the dyadic rational (smallest k with r * 2^k integral).
fn dyadic_order(r: &Rat) -> i32 {
    r.denom().magnitude().trailing_zeros().unwrap_or(0) as i32
}

/// Membership in the dyadic simple family: every piece is a product of
/// dyadic-rational intervals (values are rational by construction).
pub fn is_dyadic_simple(f: &StepFunction) -> bool {
    f.pieces()
        .iter()
        .all(|(b, _)| b.sides().iter().all(|(lo, hi)| is_dyadic_rat(lo) && is_dyadic_rat(hi)))
}

/// Decompose a dyadic-cornered step function into equal-order cubes.
fn decompose_dyadic(f: &StepFunction) -> Option<RationalSimpleFunction> {
    let mut order = 0i32;
    for (b, _) in f.pieces() {
        for (lo, hi) in b.sides() {
            order = order.max(dyadic_order(lo)).max(dyadic_order(hi));
        }
    }
    let scale = two_pow(order);
    let mut cells = Vec::new();
    for (b, v) in f.pieces() {
        let mut ranges = Vec::with_capacity(b.dim());
        let mut count: i128 = 1;
        for (lo, hi) in b.sides() {
            let a = (lo * &scale).to_integer().to_i64()?;
            let z = (hi * &scale).to_integer().to_i64()?;
            count *= (z - a) as i128;
            ranges.push((a, z - 1));
        }
        if count > 65_536 {
            return None;
        }
        let mut corner: Vec<i64> = ranges.iter().map(|(a, _)| *a).collect();
        'cells: loop {
            cells.push((DyadicCube::new(order, corner.clone()), v.clone()));
            let mut axis = 0;
            loop {
                if axis == corner.len() {
                    break 'cells;
                }
                corner[axis] += 1;
                if corner[axis] <= ranges[axis].1 {
                    break;
                }
                corner[axis] = ranges[axis].0;
                axis += 1;
            }
        }
    }
    Some(RationalSimpleFunction { order, cells })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShrinkSequence {
    /// E_k = (-2^{-k}, 2^{-k})^n
    ShrinkToOrigin,
    /// E_k = complement of [-2^k, 2^k]^n
    EscapeToInfinity,
}

impl ShrinkSequence {
    fn window(&self, dim: usize, k: i32) -> RatBox {
        let r = match self {
            ShrinkSequence::ShrinkToOrigin => two_pow(-k),
            ShrinkSequence::EscapeToInfinity => two_pow(k),
        };
        RatBox::new(vec![(-r.clone(), r.clone()); dim]).expect("r > 0")
    }

    /// f restricted to E_k.
    fn restrict(&self, f: &StepFunction, k: i32) -> StepFunction {
        let w = self.window(f.dim(), k);
        match self {
            ShrinkSequence::ShrinkToOrigin => f.restrict_disjoint(std::slice::from_ref(&w)),
            ShrinkSequence::EscapeToInfinity => f
                .restrict_complement_disjoint(std::slice::from_ref(&w))
                .expect("same dimension"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ACVerdict {
    Vanishes,
    Stagnates { floor: f64 },
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct ACWitness {
    pub norm: String,
    pub sequence: ShrinkSequence,
    pub norms: Vec<f64>,
    pub monotone: bool,
    pub verdict: ACVerdict,
}

/// Evaluate ||f chi_{E_k}|| along a canonical shrinking sequence and judge
/// whether the norms vanish.
pub fn ac_test(
    f: &StepFunction,
    spec: &QuasinormSpec,
    sequence: ShrinkSequence,
    depth: i32,
) -> Result<ACWitness> {
    let depth = depth.max(1);
    let mut norms = Vec::with_capacity(depth as usize + 1);
    for k in 0..=depth {
        norms.push(spec.eval(&sequence.restrict(f, k))?);
    }
    let first = norms[0];
    let last = *norms.last().expect("nonempty");
    let monotone = norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
    let verdict = if first == 0.0 || last <= 1e-6 * first {
        ACVerdict::Vanishes
    } else if last >= 0.5 * first
        && (norms[norms.len() - 2] - last).abs() <= 1e-12 * first
    {
        ACVerdict::Stagnates { floor: last }
    } else {
        ACVerdict::Inconclusive
    };
    Ok(ACWitness {
        norm: spec.name.clone(),
        sequence,
        norms,
        monotone,
        verdict,
    })
}

#[derive(Clone, Debug)]
pub struct TraceTerm {
    pub name: String,
    /// measured norm of this slice of f - s
    pub raw: f64,
    pub weight: f64,
    pub weighted: f64,
}

#[derive(Clone, Debug)]
pub struct ApproxTrace {
    pub norm: String,
    pub eps: f64,
    pub concavity: f64,
    /// height/support cutoff certified exactly empty for step inputs
    pub cutoff: i64,
    pub grid_order: i32,
    pub cover_order: i32,
    /// exact measure of the support left outside the inscribed compact
    pub residual_measure: Rat,
    pub terms: Vec<TraceTerm>,
    pub certified_factor: f64,
    pub certified_bound: f64,
    pub measured: f64,
}

impl ApproxTrace {
    pub fn within_certificate(&self) -> bool {
        let term_sum: f64 = self.terms.iter().map(|t| t.weighted).sum();
        self.measured <= self.certified_bound * (1.0 + 1e-9)
            && self.measured <= term_sum.max(self.measured * (1.0 - 1e-12))
    }
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub simple: RationalSimpleFunction,
    pub step: StepFunction,
    pub trace: ApproxTrace,
}

fn trace_weights(c: f64) -> [f64; 5] {
    [2.0 * c, c * c, c.powi(3), c.powi(4), c.powi(5)]
}

fn certified_factor(c: f64) -> f64 {
    trace_weights(c).iter().sum()
}

fn make_trace(
    spec: &QuasinormSpec,
    eps: f64,
    cutoff: i64,
    grid_order: i32,
    cover_order: i32,
    residual_measure: Rat,
    raw_terms: [(String, f64); 5],
    measured: f64,
) -> ApproxTrace {
    let c = spec.concavity;
    let weights = trace_weights(c);
    let terms = raw_terms
        .into_iter()
        .zip(weights)
        .map(|((name, raw), weight)| TraceTerm {
            name,
            raw,
            weight,
            weighted: raw * weight,
        })
        .collect();
    ApproxTrace {
        norm: spec.name.clone(),
        eps,
        concavity: c,
        cutoff,
        grid_order,
        cover_order,
        residual_measure,
        terms,
        certified_factor: certified_factor(c),
        certified_bound: certified_factor(c) * eps,
        measured,
    }
}

fn zero_raw_terms() -> [(String, f64); 5] {
    [
        ("tail-tall".into(), 0.0),
        ("tail-far".into(), 0.0),
        ("outside-cover".into(), 0.0),
        ("core-mismatch".into(), 0.0),
        ("cover-annulus".into(), 0.0),
    ]
}

/// Approximate f by a dyadic simple function within the certified factor
/// of eps. The five logged terms slice f - s along the proof's regions:
/// the over-height tail, the far tail, the support left outside the cover,
/// the inscribed core (exactly zero), and the cover annulus.
pub fn approximate_simple(
    spec: &QuasinormSpec,
    f: &StepFunction,
    eps: &Rat,
) -> Result<Approximation> {
    if !eps.is_positive() {
        return Err(Error::BadParameter(format!("epsilon must be positive, got {eps}")));
    }
    if !spec.is_absolutely_continuous() {
        return Err(Error::NotAbsolutelyContinuous(format!(
            "{}: indicators keep norm 1 on arbitrarily small sets, so the tail and covering steps cannot shrink",
            spec.name
        )));
    }
    let eps_f = rat_to_f64(eps);
    let dim = f.dim();

    if f.is_zero() {
        return Ok(Approximation {
            simple: RationalSimpleFunction { order: 0, cells: vec![] },
            step: StepFunction::zero(dim),
            trace: make_trace(spec, eps_f, 0, 0, 0, Rat::zero(), zero_raw_terms(), 0.0),
        });
    }

    // exact member of the dyadic family already: s = f
    if is_dyadic_simple(f) {
        if let Some(simple) = decompose_dyadic(f) {
            let step = simple.to_step(dim);
            debug_assert!(step.ae_eq(f).unwrap_or(false));
            let order = simple.order;
            return Ok(Approximation {
                simple,
                step,
                trace: make_trace(spec, eps_f, 0, order, order, Rat::zero(), zero_raw_terms(), 0.0),
            });
        }
    }

    // cutoff N: |f| <= N exactly and supp f inside [-N, N]^n exactly, so
    // both tail terms vanish identically rather than merely dropping below
    // eps
    let bbox = f.bounding_box().ok_or_else(|| Error::DegenerateRegion("no support".into()))?;
    let mut cutoff: i64 = 1;
    loop {
        let n_rat = Rat::from_integer(BigInt::from(cutoff));
        let n_sq = &n_rat * &n_rat;
        let height_ok = f.pieces().iter().all(|(_, v)| v.modulus_sq() <= n_sq);
        let span_ok = bbox
            .sides()
            .iter()
            .all(|(lo, hi)| *lo >= -n_rat.clone() && *hi <= n_rat.clone());
        if height_ok && span_ok {
            break;
        }
        cutoff = cutoff
            .checked_mul(2)
            .ok_or_else(|| Error::BadParameter("cutoff search overflow".into()))?;
    }

    // measure budget: on a set A with |f| <= N, the norm of f chi_A is at
    // most N * fundamental(lambda(A)); pick a dyadic measure below which
    // that is under eps
    let target = eps_f / cutoff as f64;
    let measure_budget = spec
        .vanishing_indicator_measure(target)
        .ok_or_else(|| Error::NotAbsolutelyContinuous(spec.name.clone()))?;

    // inscribed compact: per piece, the solid block of order-j cells with a
    // one-cell interior margin; the margin forces every later cover cube to
    // sit inside a single piece, which is what makes the core term vanish
    let min_side = f
        .min_piece_side()
        .ok_or_else(|| Error::DegenerateRegion("no pieces".into()))?;
    let mut grid_order = 0i32;
    while two_pow(-grid_order) * Rat::from_integer(4.into()) > min_side {
        grid_order += 1;
        if grid_order > 60 {
            return Err(Error::BadParameter("pieces too thin to inscribe".into()));
        }
    }
    let (k_blocks, residual) = loop {
        let scale = two_pow(grid_order);
        let step_len = two_pow(-grid_order);
        let mut blocks: Vec<(RatBox, Scalar)> = Vec::new();
        let mut inscribed = Rat::zero();
        for (b, v) in f.pieces() {
            let mut sides = Vec::with_capacity(dim);
            let mut ok = true;
            for (lo, hi) in b.sides() {
                // leave at least one full cell between the block and the
                // piece boundary on every side
                let a_min = (lo * &scale + Rat::one()).ceil();
                let a_max = (hi * &scale - Rat::from_integer(2.into())).floor();
                if a_min > a_max {
                    ok = false;
                    break;
                }
                let left = &a_min * &step_len;
                let right = (&a_max + Rat::one()) * &step_len;
                sides.push((left, right));
            }
            if ok {
                let block = RatBox::new(sides)?;
                inscribed += block.measure();
                blocks.push((block, v.clone()));
            }
        }
        let residual = f.support_measure() - &inscribed;
        if residual < measure_budget && !blocks.is_empty() {
            break (blocks, residual);
        }
        grid_order += 1;
        if grid_order > 60 {
            return Err(Error::BadParameter(
                "cannot inscribe enough of the support at any workable grid order".into(),
            ));
        }
    };

    // cover the inscribed compact inside the open pieces
    let compact = CompactDyadicSet::from_boxes(k_blocks.iter().map(|(b, _)| b.clone()).collect())?;
    let g_boxes: Vec<RatBox> = f.pieces().iter().map(|(b, _)| b.clone()).collect();
    let cover = dyadic_cover(&compact, &g_boxes, &measure_budget, grid_order + 1)?;

    // one value per cube: the cube sits inside a single piece, so the exact
    // piece value is read off at the cube's center
    let mut cells = Vec::with_capacity(cover.cube_count);
    for cube in cover.cubes.cubes() {
        let value = f.eval(&cube.to_box().center());
        if value.is_zero() {
            return Err(Error::NotCovered(format!(
                "cover cube {cube:?} landed outside the support"
            )));
        }
        cells.push((cube, value));
    }
    let simple = RationalSimpleFunction { order: cover.order, cells };
    let s = simple.to_step(dim);

    // exact difference and the five logged slices
    let d = f.sub(&s)?;
    let cover_boxes = cover.cubes.to_boxes();
    let d_core = d.restrict_disjoint(compact.boxes());
    let d_on_cover = d.restrict_disjoint(&cover_boxes);
    if !d_core.is_zero() || !d_on_cover.is_zero() {
        return Err(Error::NotCovered(
            "difference does not vanish on the cover; a cube crossed a piece boundary".into(),
        ));
    }
    let outside = d.restrict_complement_disjoint(&cover_boxes)?;
    let t_outside = spec.eval(&outside)?;
    let measured = spec.eval(&d)?;

    let raw_terms = [
        ("tail-tall".to_string(), 0.0),
        ("tail-far".to_string(), 0.0),
        ("outside-cover".to_string(), t_outside),
        ("core-mismatch".to_string(), 0.0),
        ("cover-annulus".to_string(), 0.0),
    ];
    let trace = make_trace(
        spec,
        eps_f,
        cutoff,
        grid_order,
        cover.order,
        residual,
        raw_terms,
        measured,
    );
    Ok(Approximation { simple, step: s, trace })
}

/// Split f into m disjoint pieces of norm above eps along the canonical
/// shrinking sequence; only possible when the norm fails to be absolutely
/// continuous on f.
pub fn non_ac_split(
    spec: &QuasinormSpec,
    f: &StepFunction,
    eps: f64,
    m: usize,
    horizon: i32,
) -> Result<Vec<StepFunction>> {
    if m == 0 {
        return Err(Error::BadParameter("need at least one component".into()));
    }
    let seq = ShrinkSequence::ShrinkToOrigin;
    let depth_norm = spec.eval(&seq.restrict(f, horizon))?;
    if depth_norm <= eps {
        return Err(Error::GrowthPrecondition(format!(
            "norm along the shrinking sequence falls to {depth_norm} <= {eps} by depth {horizon}; the split needs it to stay above eps"
        )));
    }

    // k_{i+1}: smallest index where the annulus from k_i crosses eps; the
    // annulus norms increase to the full tail norm, so the search succeeds
    // whenever the tail norms stay above eps
    let mut indices = vec![0i32];
    let mut components = Vec::with_capacity(m);
    for i in 0..m {
        let k_i = *indices.last().expect("nonempty");
        let outer = seq.restrict(f, k_i);
        let mut found = None;
        for k in (k_i + 1)..=horizon {
            let annulus = outer.sub(&seq.restrict(f, k))?;
            if spec.eval(&annulus)? > eps {
                found = Some((k, annulus));
                break;
            }
        }
        let (k_next, annulus) =
            found.ok_or_else(|| Error::HorizonExhausted(i, format!("no annulus above {eps} beyond depth {k_i}")))?;
        indices.push(k_next);
        components.push(annulus);
    }

    // re-verify the three claimed properties exactly
    for (i, c) in components.iter().enumerate() {
        if !(spec.eval(c)? > eps) {
            return Err(Error::HorizonExhausted(i, "component norm fell to eps".into()));
        }
        if !c.dominated_in_modulus_by(f)? {
            return Err(Error::GrowthPrecondition(format!(
                "component {i} exceeds |f| somewhere"
            )));
        }
    }
    for i in 0..components.len() {
        for j in (i + 1)..components.len() {
            let si = components[i].support_measure();
            let sj = components[j].support_measure();
            let mut boxes = components[i].support().boxes().to_vec();
            boxes.extend(components[j].support().boxes().to_vec());
            let union = RegionSet::new(boxes)?.measure();
            if union != si + sj {
                return Err(Error::OverlappingPieces(format!(
                    "components {i} and {j} share support"
                )));
            }
        }
    }
    Ok(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn iv(lo: Rat, hi: Rat) -> RatBox {
        RatBox::interval(lo, hi).unwrap()
    }

    #[test]
    fn cover_interval_inside_interval() {
        // K = [1/4, 1/2] in G = (1/8, 5/8): inflation 1/32, separation
        // 1/32, so the order lands at 6 and every property is re-verified
        let k = CompactDyadicSet::from_boxes(vec![iv(rat(1, 4), rat(1, 2))]).unwrap();
        let g = vec![iv(rat(1, 8), rat(5, 8))];
        let cover = dyadic_cover(&k, &g, &rat(1, 8), 1).unwrap();
        assert!(cover.order >= 3, "order {}", cover.order);
        assert!(cover.outer_excess < rat(1, 8));
        assert!(cover.outer_excess >= Rat::zero());
        // exact coverage: K minus the cube union is null
        let omega = RegionSet::new(cover.cubes.to_boxes()).unwrap();
        let k_region = RegionSet::new(k.boxes().to_vec()).unwrap();
        assert!(k_region.measure_difference(&omega).is_zero());
    }

    #[test]
    fn cover_loose_epsilon_single_box() {
        let k = CompactDyadicSet::from_boxes(vec![iv(rat(1, 4), rat(1, 2))]).unwrap();
        let g = vec![iv(rat(1, 8), rat(5, 8))];
        // epsilon above the measure of G \ K: still returns a valid complex
        let cover = dyadic_cover(&k, &g, &rat(1, 2), 0).unwrap();
        assert!(cover.outer_excess < rat(1, 2));
        assert!(cover.cube_count >= 1);
    }

    #[test]
    fn cover_two_dimensional() {
        let k = CompactDyadicSet::from_boxes(vec![RatBox::new(vec![
            (rat(1, 4), rat(1, 2)),
            (rat(1, 4), rat(1, 2)),
        ])
        .unwrap()])
        .unwrap();
        let g = vec![RatBox::new(vec![(Rat::zero(), rat_int(1)), (Rat::zero(), rat_int(1))]).unwrap()];
        let cover = dyadic_cover(&k, &g, &rat(1, 100), 2).unwrap();
        assert!(cover.order >= 2);
        assert!(cover.outer_excess < rat(1, 100));
        // every cube meets K
        for cube in cover.cubes.cubes() {
            assert!(cube.to_box().open_meets_closure_of(&k.boxes()[0]));
        }
    }

    #[test]
    fn cover_rejections() {
        // positive-measure escape: definite rejection
        let k = CompactDyadicSet::from_boxes(vec![iv(rat(1, 4), rat(3, 4))]).unwrap();
        let g = vec![iv(Rat::zero(), rat(1, 2))];
        assert!(matches!(
            dyadic_cover(&k, &g, &rat(1, 8), 0),
            Err(Error::NotCovered(_))
        ));
        // closure touches the boundary: no positive separation exists
        let k2 = CompactDyadicSet::from_boxes(vec![iv(Rat::zero(), rat(1, 2))]).unwrap();
        let g2 = vec![iv(Rat::zero(), rat_int(1))];
        assert!(matches!(
            dyadic_cover(&k2, &g2, &rat(1, 8), 0),
            Err(Error::ZeroMargin(_))
        ));
    }

    #[test]
    fn ac_test_verdicts() {
        let f = StepFunction::indicator(iv(Rat::zero(), Rat::one()));
        let lp = QuasinormSpec::lp(0.5).unwrap();
        let w = ac_test(&f, &lp, ShrinkSequence::ShrinkToOrigin, 12).unwrap();
        assert_eq!(w.verdict, ACVerdict::Vanishes);
        assert!(w.monotone);
        // closed form: ||chi_(0,2^{-k})||_{1/2} = 4^{-k}
        assert!((w.norms[3] - 4f64.powi(-3)).abs() < 1e-12);

        let sup = QuasinormSpec::sup();
        let w = ac_test(&f, &sup, ShrinkSequence::ShrinkToOrigin, 12).unwrap();
        assert_eq!(w.verdict, ACVerdict::Stagnates { floor: 1.0 });

        let w = ac_test(&f, &lp, ShrinkSequence::EscapeToInfinity, 8).unwrap();
        assert_eq!(w.verdict, ACVerdict::Vanishes);

        let w = ac_test(&StepFunction::zero(1), &lp, ShrinkSequence::ShrinkToOrigin, 5).unwrap();
        assert_eq!(w.verdict, ACVerdict::Vanishes);
        assert!(w.norms.iter().all(|&n| n == 0.0));
    }

    #[test]
    fn dyadic_family_membership() {
        let f = StepFunction::indicator(iv(rat(1, 4), rat(3, 8)));
        assert!(is_dyadic_simple(&f));
        let g = StepFunction::indicator(iv(rat(1, 3), rat(1, 2)));
        assert!(!is_dyadic_simple(&g));
    }

    #[test]
    fn approximation_fast_path() {
        let f = StepFunction::from_pieces(
            1,
            vec![
                (iv(Rat::zero(), rat(1, 2)), Scalar::from_int(3)),
                (iv(rat(1, 2), rat_int(1)), Scalar::from_int(1)),
            ],
        )
        .unwrap();
        let spec = QuasinormSpec::lp(0.5).unwrap();
        let approx = approximate_simple(&spec, &f, &rat(1, 1024)).unwrap();
        assert!(approx.step.ae_eq(&f).unwrap());
        assert_eq!(approx.trace.measured, 0.0);
        assert!(approx.trace.within_certificate());
    }

    #[test]
    fn approximation_general_path() {
        // non-dyadic corners force the covering route
        let f = StepFunction::from_pieces(
            1,
            vec![
                (iv(Rat::zero(), rat(1, 3)), Scalar::from_int(3)),
                (iv(rat(1, 3), Rat::one()), Scalar::from_int(-2)),
            ],
        )
        .unwrap();
        let spec = QuasinormSpec::lp(0.5).unwrap();
        let eps = rat(1, 64);
        let approx = approximate_simple(&spec, &f, &eps).unwrap();
        // certified: measured below 64 eps; here the construction actually
        // achieves measured < eps because only the outside-cover slice is
        // nonzero
        assert!(approx.trace.measured < rat_to_f64(&eps), "{}", approx.trace.measured);
        assert!(approx.trace.within_certificate());
        assert!((approx.trace.certified_factor - 64.0).abs() < 1e-12);
        assert!(is_dyadic_simple(&approx.step));
        // s takes values only from f's value set
        for (_, v) in approx.step.pieces() {
            assert!(v == &Scalar::from_int(3) || v == &Scalar::from_int(-2));
        }
        // trace slices: only outside-cover is nonzero
        for t in &approx.trace.terms {
            if t.name != "outside-cover" {
                assert_eq!(t.raw, 0.0, "{}", t.name);
            }
        }
    }

    #[test]
    fn approximation_needs_absolute_continuity() {
        let f = StepFunction::indicator(iv(Rat::zero(), Rat::one()));
        assert!(matches!(
            approximate_simple(&QuasinormSpec::sup(), &f, &rat(1, 4)),
            Err(Error::NotAbsolutelyContinuous(_))
        ));
    }

    #[test]
    fn split_on_sup_norm() {
        let f = StepFunction::indicator(iv(Rat::zero(), Rat::one()));
        let spec = QuasinormSpec::sup();
        let parts = non_ac_split(&spec, &f, 0.5, 5, 40).unwrap();
        assert_eq!(parts.len(), 5);
        for p in &parts {
            assert!(spec.eval(p).unwrap() > 0.5);
            assert!(p.dominated_in_modulus_by(&f).unwrap());
        }
        // the first annulus is [1/2, 1)
        assert_eq!(parts[0].support_measure(), rat(1, 2));
    }

    #[test]
    fn split_rejects_vanishing_norm() {
        let f = StepFunction::indicator(iv(Rat::zero(), Rat::one()));
        let spec = QuasinormSpec::lp(0.5).unwrap();
        assert!(matches!(
            non_ac_split(&spec, &f, 0.5, 3, 40),
            Err(Error::GrowthPrecondition(_))
        ));
    }
}
