//! Associate (Koethe dual) norms by certified search.
//!
//! The associate norm of f is the supremum of integral |f g| / ||g|| over
//! nonzero g. Searching a finite candidate class gives a certified LOWER
//! bound; the class is chosen so that the bound is sharp for the classical
//! exponent range and the pairing integrals stay exact rationals.

use crate::error::{Error, Result};
use crate::geometry::RatBox;
use crate::quasinorm::{lp_norm, NormKind, QuasinormSpec};
use crate::scalar::{rat_to_f64, two_pow, Rat, Scalar};
use crate::step::StepFunction;
use num_traits::{One, Zero};

#[derive(Clone, Debug)]
pub struct SearchClass {
    /// each piece of f is split 2^refine_level times along every axis
    pub refine_level: u32,
    /// relative weights tried on cell pairs (absolute scale is irrelevant:
    /// the quotient is homogeneous)
    pub value_grid: Vec<Rat>,
    /// hard cap on the number of candidates
    pub enumeration_cap: usize,
}

impl Default for SearchClass {
    fn default() -> Self {
        SearchClass {
            refine_level: 1,
            value_grid: vec![Rat::one(), crate::scalar::rat(1, 2), crate::scalar::rat(1, 4)],
            enumeration_cap: 4096,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AssociateEstimate {
    pub norm: String,
    /// searched lower bound for the associate norm
    pub value: f64,
    pub witness: StepFunction,
    /// exact pairing integral |f g| for the witness, when |f| is rational
    pub witness_pairing: Option<Rat>,
    pub candidates_tried: usize,
}

fn split_box(b: &RatBox, level: u32) -> Vec<RatBox> {
    let parts = 1usize << level;
    let mut axes: Vec<Vec<(Rat, Rat)>> = Vec::with_capacity(b.dim());
    for (lo, hi) in b.sides() {
        let step = (hi - lo) / Rat::from_integer(parts.into());
        let mut cuts = Vec::with_capacity(parts);
        for i in 0..parts {
            let a = lo + &step * Rat::from_integer(i.into());
            let c = if i + 1 == parts { hi.clone() } else { lo + &step * Rat::from_integer((i + 1).into()) };
            cuts.push((a, c));
        }
        axes.push(cuts);
    }
    let mut out = Vec::with_capacity(parts.pow(b.dim() as u32));
    let mut idx = vec![0usize; b.dim()];
    loop {
        let sides: Vec<(Rat, Rat)> = idx.iter().enumerate().map(|(a, &i)| axes[a][i].clone()).collect();
        out.push(RatBox::new(sides).expect("subdivision keeps lo < hi"));
        let mut a = 0;
        loop {
            if a == idx.len() {
                return out;
            }
            idx[a] += 1;
            if idx[a] < parts {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Refined cells of the support of f, each tagged with |f| there (f64).
fn refined_cells(f: &StepFunction, class: &SearchClass) -> Vec<(RatBox, f64)> {
    let level = {
        let would_be = f.piece_count() << (class.refine_level as usize * f.dim());
        if would_be > class.enumeration_cap { 0 } else { class.refine_level }
    };
    let mut cells = Vec::new();
    for (b, v) in f.pieces() {
        let m = v.modulus_f64();
        for sub in split_box(b, level) {
            cells.push((sub, m));
        }
    }
    cells
}

/// Deterministic candidate class: single-cell indicators, level-set
/// indicators, |f| itself, the exponent-aligned profile for Lp, and
/// two-cell weight combinations from the grid.
pub fn build_candidates(
    f: &StepFunction,
    spec: &QuasinormSpec,
    class: &SearchClass,
) -> Result<Vec<StepFunction>> {
    let dim = f.dim();
    let mut out: Vec<StepFunction> = Vec::new();
    if f.is_zero() {
        return Ok(out);
    }
    let cells = refined_cells(f, class);

    for (b, _) in &cells {
        out.push(StepFunction::indicator(b.clone()));
        if out.len() >= class.enumeration_cap {
            return Ok(out);
        }
    }

    // level sets {|f| >= lambda} over the distinct values of |f|
    let mut levels: Vec<f64> = f.pieces().iter().map(|(_, v)| v.modulus_f64()).collect();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();
    for lambda in &levels {
        let boxes: Vec<(RatBox, Scalar)> = f
            .pieces()
            .iter()
            .filter(|(_, v)| v.modulus_f64() >= *lambda - 1e-15)
            .map(|(b, _)| (b.clone(), Scalar::from_int(1)))
            .collect();
        out.push(StepFunction::from_pieces(dim, boxes)?);
        if out.len() >= class.enumeration_cap {
            return Ok(out);
        }
    }

    if let Ok(a) = f.abs() {
        out.push(a);
    }

    // aligned profile |f|^{p'-1} (the equality case of the p-p' pairing
    // bound), snapped to a dyadic grid so values stay rational; the
    // quotient is first-order flat at the maximizer, so the snap costs
    // O(grid^2)
    if let NormKind::Lp { p } = spec.kind {
        if p > 1.0 {
            let pp = p / (p - 1.0);
            let q20 = two_pow(20);
            let pieces: Vec<(RatBox, Scalar)> = f
                .pieces()
                .iter()
                .filter_map(|(b, v)| {
                    let aligned = v.modulus_f64().powf(pp - 1.0);
                    let snapped = (aligned * rat_to_f64(&q20)).round() as i64;
                    if snapped == 0 {
                        None
                    } else {
                        Some((
                            b.clone(),
                            Scalar::real(Rat::from_integer(snapped.into()) / q20.clone()),
                        ))
                    }
                })
                .collect();
            if !pieces.is_empty() {
                out.push(StepFunction::from_pieces(dim, pieces)?);
            }
        }
    }

    // two-cell combinations with grid weights
    let pair_budget = class.enumeration_cap.saturating_sub(out.len());
    let g = &class.value_grid;
    let full_pairs = cells.len() * cells.len() * g.len() * g.len();
    let adjacent_only = full_pairs > pair_budget;
    'pairs: for i in 0..cells.len() {
        let js: Vec<usize> = if adjacent_only {
            if i + 1 < cells.len() { vec![i + 1] } else { vec![] }
        } else {
            ((i + 1)..cells.len()).collect()
        };
        for j in js {
            for a in g {
                for b in g {
                    if a == b {
                        continue;
                    }
                    let pieces = vec![
                        (cells[i].0.clone(), Scalar::real(a.clone())),
                        (cells[j].0.clone(), Scalar::real(b.clone())),
                    ];
                    out.push(StepFunction::from_pieces(dim, pieces)?);
                    if out.len() >= class.enumeration_cap {
                        break 'pairs;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Exact pairing integral |f g| when both moduli are rational piecewise.
pub fn pairing(f: &StepFunction, g: &StepFunction) -> Result<Rat> {
    f.mul(g)?.integral_abs()
}

/// f64 pairing that tolerates irrational moduli.
pub fn pairing_f64(f: &StepFunction, g: &StepFunction) -> Result<f64> {
    let product = f.mul(g)?;
    let mut acc = 0.0;
    for (b, v) in product.pieces() {
        acc += v.modulus_f64() * rat_to_f64(&b.measure());
    }
    Ok(acc)
}

pub fn associate_norm(
    spec: &QuasinormSpec,
    f: &StepFunction,
    class: &SearchClass,
) -> Result<AssociateEstimate> {
    associate_norm_with_extra(spec, f, class, &[])
}

/// Search including caller-pinned candidates. Pinning h into the class when
/// evaluating denominators makes downstream quotients against h certified.
pub fn associate_norm_with_extra(
    spec: &QuasinormSpec,
    f: &StepFunction,
    class: &SearchClass,
    extra: &[StepFunction],
) -> Result<AssociateEstimate> {
    let mut candidates = build_candidates(f, spec, class)?;
    for h in extra {
        if h.dim() != f.dim() {
            return Err(Error::DimensionMismatch(f.dim(), h.dim()));
        }
        if !h.is_zero() {
            candidates.push(h.clone());
        }
    }
    if candidates.is_empty() {
        if f.is_zero() {
            return Ok(AssociateEstimate {
                norm: spec.name.clone(),
                value: 0.0,
                witness: StepFunction::zero(f.dim()),
                witness_pairing: Some(Rat::zero()),
                candidates_tried: 0,
            });
        }
        return Err(Error::EmptyCandidateClass);
    }
    let tried = candidates.len();
    let mut best: Option<(f64, StepFunction)> = None;
    for g in candidates {
        let denom = spec.eval(&g)?;
        if !(denom > 0.0) {
            continue;
        }
        let quotient = pairing_f64(f, &g)? / denom;
        match &best {
            Some((q, _)) if *q >= quotient => {}
            _ => best = Some((quotient, g)),
        }
    }
    let (value, witness) = best.ok_or(Error::EmptyCandidateClass)?;
    let witness_pairing = pairing(f, &witness).ok();
    Ok(AssociateEstimate {
        norm: spec.name.clone(),
        value,
        witness,
        witness_pairing,
        candidates_tried: tried,
    })
}

/// Exact dual norm of a simple function in Lp, p >= 1, on its own
/// partition: (sum |f_j|^{p'} mu_j)^{1/p'}, with the max for p = 1.
pub fn closed_form_dual_on_partition(f: &StepFunction, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::BadParameter(format!(
            "closed-form dual needs p >= 1, got {p}"
        )));
    }
    if p == 1.0 {
        return Ok(f
            .pieces()
            .iter()
            .map(|(_, v)| v.modulus_f64())
            .fold(0.0, f64::max));
    }
    let pp = p / (p - 1.0);
    lp_norm(f, pp)
}

#[derive(Clone, Debug)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// integral |f g| <= ||f||_p ||g||_{p'} for p >= 1 (p' = oo when p = 1).
pub fn holder_check(p: f64, f: &StepFunction, g: &StepFunction) -> Result<HolderCheck> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::BadParameter(format!(
            "conjugate exponents need p >= 1, got {p}"
        )));
    }
    let lhs = pairing_f64(f, g)?;
    let nf = lp_norm(f, p)?;
    let ng = if p == 1.0 {
        g.pieces().iter().map(|(_, v)| v.modulus_f64()).fold(0.0, f64::max)
    } else {
        lp_norm(g, p / (p - 1.0))?
    };
    let rhs = nf * ng;
    Ok(HolderCheck {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

#[derive(Clone, Debug)]
pub struct SecondAssociateCheck {
    pub norm: String,
    pub x_norm: f64,
    /// searched second-associate value; every quotient is certified to sit
    /// below x_norm because f itself is pinned into the inner search class
    pub second_norm: f64,
    pub quotients: Vec<f64>,
    pub candidates: usize,
}

impl SecondAssociateCheck {
    pub fn embedding_holds(&self, tol: f64) -> bool {
        self.second_norm <= self.x_norm * (1.0 + tol)
    }
}

pub fn second_associate_check(
    spec: &QuasinormSpec,
    f: &StepFunction,
    class: &SearchClass,
) -> Result<SecondAssociateCheck> {
    let x_norm = spec.eval(f)?;
    if f.is_zero() {
        return Ok(SecondAssociateCheck {
            norm: spec.name.clone(),
            x_norm,
            second_norm: 0.0,
            quotients: vec![],
            candidates: 0,
        });
    }
    let outer = build_candidates(f, spec, class)?;
    let pinned = [f.clone()];
    let mut quotients = Vec::with_capacity(outer.len());
    let mut second: f64 = 0.0;
    for g in &outer {
        let num = pairing_f64(f, g)?;
        if num == 0.0 {
            continue;
        }
        let denom = associate_norm_with_extra(spec, g, class, &pinned)?.value;
        if !(denom > 0.0) {
            continue;
        }
        let q = num / denom;
        quotients.push(q);
        second = second.max(q);
    }
    Ok(SecondAssociateCheck {
        norm: spec.name.clone(),
        x_norm,
        second_norm: second,
        quotients,
        candidates: outer.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MeasureSpace;
    use crate::scalar::{rat, rat_int};

    fn iv(lo: Rat, hi: Rat) -> RatBox {
        RatBox::interval(lo, hi).unwrap()
    }

    fn two_step() -> StepFunction {
        StepFunction::from_pieces(
            1,
            vec![
                (iv(rat_int(0), rat_int(1)), Scalar::from_int(3)),
                (iv(rat_int(1), rat_int(3)), Scalar::from_int(-1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn atoms_l1_dual_is_the_max() {
        // three unit atoms carrying (2, 5, 3): L1 dual value 5 at the
        // indicator of the heaviest atom
        let space = MeasureSpace::Atoms {
            weights: vec![Rat::one(), Rat::one(), Rat::one()],
        };
        let cells = space.atom_intervals().unwrap();
        let pieces = vec![
            (cells[0].clone(), Scalar::from_int(2)),
            (cells[1].clone(), Scalar::from_int(5)),
            (cells[2].clone(), Scalar::from_int(3)),
        ];
        let f = StepFunction::from_pieces(1, pieces).unwrap();
        let spec = QuasinormSpec::lp(1.0).unwrap();
        let est = associate_norm(&spec, &f, &SearchClass::default()).unwrap();
        assert!((est.value - 5.0).abs() < 1e-12, "{}", est.value);
        assert!((closed_form_dual_on_partition(&f, 1.0).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn l2_self_duality_exact_at_f() {
        let f = two_step();
        let spec = QuasinormSpec::lp(2.0).unwrap();
        let est = associate_norm(&spec, &f, &SearchClass::default()).unwrap();
        let nf = lp_norm(&f, 2.0).unwrap(); // sqrt(9 + 2) = sqrt(11)
        assert!((nf - 11f64.sqrt()).abs() < 1e-12);
        assert!((est.value - nf).abs() < 1e-9, "{} vs {}", est.value, nf);
        // witness pairing is exact: integral |f|^2 = 11
        assert_eq!(est.witness_pairing.as_ref().unwrap(), &rat_int(11));
    }

    #[test]
    fn search_matches_closed_form_dual() {
        let f = two_step();
        for p in [1.5, 2.0, 3.0] {
            let spec = QuasinormSpec::lp(p).unwrap();
            let est = associate_norm(&spec, &f, &SearchClass::default()).unwrap();
            let cf = closed_form_dual_on_partition(&f, p).unwrap();
            assert!(
                est.value <= cf * (1.0 + 1e-9),
                "p={p}: searched {} above closed form {cf}",
                est.value
            );
            assert!(
                est.value >= cf * (1.0 - 1e-6),
                "p={p}: searched {} misses closed form {cf}",
                est.value
            );
        }
    }

    #[test]
    fn holder_slack_nonnegative_and_tight() {
        let f = two_step();
        // generic pair: strictly positive slack
        let g = StepFunction::from_pieces(
            1,
            vec![(iv(rat(1, 2), rat(5, 2)), Scalar::from_int(2))],
        )
        .unwrap();
        let h = holder_check(2.0, &f, &g).unwrap();
        assert!(h.slack > 0.0);
        // aligned pair: zero slack
        let tight = holder_check(2.0, &f, &f.abs().unwrap()).unwrap();
        assert!(tight.slack.abs() < 1e-9 * tight.rhs, "{}", tight.slack);
        // p = 1 against a constant on the support
        let c = StepFunction::scaled_indicator(iv(rat_int(0), rat_int(3)), Scalar::from_int(7));
        let t1 = holder_check(1.0, &f, &c).unwrap();
        assert!(t1.slack.abs() < 1e-12 * t1.rhs, "{}", t1.slack);
    }

    #[test]
    fn second_associate_embeds() {
        let f = two_step();
        for selector in ["lp:p=1", "lp:p=2", "lp:p=0.5", "lorentz:p=2,q=0.5"] {
            let spec = QuasinormSpec::parse(selector).unwrap();
            let chk = second_associate_check(&spec, &f, &SearchClass::default()).unwrap();
            assert!(
                chk.embedding_holds(1e-9),
                "{selector}: second {} vs x {}",
                chk.second_norm,
                chk.x_norm
            );
            assert!(chk.second_norm > 0.0);
        }
    }

    #[test]
    fn l2_second_associate_is_sharp() {
        // self-dual case: the second associate search recovers the norm
        let f = two_step();
        let spec = QuasinormSpec::lp(2.0).unwrap();
        let chk = second_associate_check(&spec, &f, &SearchClass::default()).unwrap();
        assert!(
            (chk.second_norm - chk.x_norm).abs() < 1e-6 * chk.x_norm,
            "second {} vs x {}",
            chk.second_norm,
            chk.x_norm
        );
    }

    #[test]
    fn zero_function_has_zero_associate() {
        let spec = QuasinormSpec::lp(1.0).unwrap();
        let est = associate_norm(&spec, &StepFunction::zero(1), &SearchClass::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.candidates_tried, 0);
    }
}
