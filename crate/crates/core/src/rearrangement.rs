//! Distribution functions and non-increasing rearrangements, exact on step
//! functions.

use crate::error::{Error, Result};
use crate::geometry::RatBox;
use crate::scalar::{rat_int, rat_to_f64, Rat, Scalar};
use crate::step::StepFunction;
use num_traits::Zero;
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Right-continuous non-increasing step function on [0, oo): value `values[j]`
/// on [breakpoints[j], breakpoints[j+1]), zero from the last breakpoint on.
///
/// Breakpoints start at 0 and strictly increase; values are positive and
/// strictly decrease, so the representation is canonical and equality is
/// structural. Serves both as a rearrangement and as a distribution function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    breakpoints: Vec<Rat>,
    values: Vec<Rat>,
}

impl Profile {
    pub fn zero() -> Self {
        Profile {
            breakpoints: vec![Rat::zero()],
            values: Vec::new(),
        }
    }

    /// Aggregates (value, measure) pairs; nonpositive values and measures are
    /// dropped, equal values merge.
    pub fn from_value_measures<I: IntoIterator<Item = (Rat, Rat)>>(pairs: I) -> Self {
        let mut agg: BTreeMap<Rat, Rat> = BTreeMap::new();
        for (v, m) in pairs {
            if v > Rat::zero() && m > Rat::zero() {
                *agg.entry(v).or_insert_with(Rat::zero) += m;
            }
        }
        let mut breakpoints = vec![Rat::zero()];
        let mut values = Vec::with_capacity(agg.len());
        let mut t = Rat::zero();
        for (v, m) in agg.into_iter().rev() {
            t = &t + &m;
            breakpoints.push(t.clone());
            values.push(v);
        }
        Profile {
            breakpoints,
            values,
        }
    }

    /// Validating constructor from explicit data.
    pub fn from_parts(breakpoints: Vec<Rat>, values: Vec<Rat>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::BadParameter(
                "profile needs one more breakpoint than values".into(),
            ));
        }
        if breakpoints.first() != Some(&Rat::zero()) {
            return Err(Error::BadParameter("profile must start at 0".into()));
        }
        for w in breakpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::BadParameter(
                    "breakpoints must strictly increase".into(),
                ));
            }
        }
        for w in values.windows(2) {
            if w[0] <= w[1] {
                return Err(Error::BadParameter(
                    "values must strictly decrease".into(),
                ));
            }
        }
        if values.iter().any(|v| v <= &Rat::zero()) {
            return Err(Error::BadParameter("values must be positive".into()));
        }
        Ok(Profile {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// Right end of the support.
    pub fn support_bound(&self) -> Rat {
        self.breakpoints.last().expect("nonempty").clone()
    }

    pub fn max_value(&self) -> Rat {
        self.values.first().cloned().unwrap_or_else(Rat::zero)
    }

    /// Right-continuous evaluation at t >= 0.
    pub fn eval(&self, t: &Rat) -> Rat {
        debug_assert!(t >= &Rat::zero());
        // first index with breakpoints[j+1] > t
        let m = self.values.len();
        if m == 0 || t >= &self.breakpoints[m] {
            return Rat::zero();
        }
        let mut lo = 0usize; // invariant: breakpoints[lo] <= t
        let mut hi = m;
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if &self.breakpoints[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.values[lo].clone()
    }

    /// Distribution function of the profile itself: s -> |{p > s}|. The
    /// transpose of a canonical profile is again a canonical profile.
    pub fn distribution(&self) -> Profile {
        let mut breakpoints = vec![Rat::zero()];
        let mut values = Vec::with_capacity(self.values.len());
        for v in self.values.iter().rev() {
            breakpoints.push(v.clone());
        }
        for t in self.breakpoints.iter().skip(1).rev() {
            values.push(t.clone());
        }
        Profile {
            breakpoints,
            values,
        }
    }

    /// Composition with t -> a t (the dilation by a on (0, oo)): breakpoints
    /// divide by a.
    pub fn dilate(&self, a: &Rat) -> Result<Profile> {
        if a <= &Rat::zero() {
            return Err(Error::NonpositiveDilation(a.to_string()));
        }
        Ok(Profile {
            breakpoints: self.breakpoints.iter().map(|t| t / a).collect(),
            values: self.values.clone(),
        })
    }

    /// The profile as a step function on (0, oo).
    pub fn to_step(&self) -> StepFunction {
        let pieces = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                (
                    RatBox::interval(self.breakpoints[j].clone(), self.breakpoints[j + 1].clone())
                        .expect("strictly increasing breakpoints"),
                    Scalar::real(v.clone()),
                )
            })
            .collect();
        StepFunction::from_disjoint_pieces(1, pieces)
    }

    /// Integral of p^1 over (0, oo); exact.
    pub fn integral(&self) -> Rat {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| v * (&self.breakpoints[j + 1] - &self.breakpoints[j]))
            .sum()
    }

    pub fn to_json_value(&self) -> Result<Value> {
        let b = self
            .breakpoints
            .iter()
            .map(crate::jsonio::rat_to_json)
            .collect::<Result<Vec<_>>>()?;
        let v = self
            .values
            .iter()
            .map(crate::jsonio::rat_to_json)
            .collect::<Result<Vec<_>>>()?;
        Ok(json!({ "breakpoints": b, "values": v }))
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Serialization("profile must be an object".into()))?;
        let b = obj
            .get("breakpoints")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Serialization("missing array `breakpoints`".into()))?
            .iter()
            .map(crate::jsonio::rat_from_json)
            .collect::<Result<Vec<_>>>()?;
        let vals = obj
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Serialization("missing array `values`".into()))?
            .iter()
            .map(crate::jsonio::rat_from_json)
            .collect::<Result<Vec<_>>>()?;
        Profile::from_parts(b, vals)
    }
}

fn modulus_measure_pairs(f: &StepFunction) -> Result<Vec<(Rat, Rat)>> {
    f.pieces()
        .iter()
        .map(|(b, v)| {
            let m = v
                .try_modulus()
                .ok_or_else(|| Error::IrrationalModulus(v.to_string()))?;
            Ok((m, b.measure()))
        })
        .collect()
}

/// mu_f(s) = |{ |f| > s }| as a profile in the threshold variable s.
pub fn distribution_function(f: &StepFunction) -> Result<Profile> {
    let mut agg: BTreeMap<Rat, Rat> = BTreeMap::new();
    for (m, mu) in modulus_measure_pairs(f)? {
        if m > Rat::zero() {
            *agg.entry(m).or_insert_with(Rat::zero) += mu;
        }
    }
    // descending thresholds s in [v_{j+1}, v_j) carry the cumulated measure
    let mut breakpoints = vec![Rat::zero()];
    let mut values: Vec<Rat> = Vec::with_capacity(agg.len());
    let mut cum = Rat::zero();
    let entries: Vec<(Rat, Rat)> = agg.into_iter().collect();
    for (v, _) in entries.iter() {
        breakpoints.push(v.clone());
    }
    for (_, mu) in entries.iter().rev() {
        cum = &cum + mu;
        values.push(cum.clone());
    }
    values.reverse();
    Ok(Profile {
        breakpoints,
        values,
    })
}

/// Non-increasing rearrangement of |f| as an exact profile.
pub fn rearrangement(f: &StepFunction) -> Result<Profile> {
    Ok(Profile::from_value_measures(modulus_measure_pairs(f)?))
}

/// Volume of the unit ball: exact for n = 1, floating point above.
#[derive(Clone, Debug, PartialEq)]
pub enum BallVolume {
    Exact(Rat),
    Approx(f64),
}

impl BallVolume {
    pub fn as_f64(&self) -> f64 {
        match self {
            BallVolume::Exact(r) => rat_to_f64(r),
            BallVolume::Approx(x) => *x,
        }
    }
}

/// lambda^n of the unit ball in R^n via the two-step recursion
/// v_n = v_{n-2} * 2 pi / n with v_1 = 2 (exact) and v_2 = pi.
pub fn unit_ball_volume(n: usize) -> Result<BallVolume> {
    if n == 0 {
        return Err(Error::BadParameter("dimension must be positive".into()));
    }
    if n == 1 {
        return Ok(BallVolume::Exact(rat_int(2)));
    }
    let mut v = if n % 2 == 0 {
        std::f64::consts::PI
    } else {
        2.0
    };
    let mut m = if n % 2 == 0 { 2 } else { 1 };
    while m < n {
        m += 2;
        v *= 2.0 * std::f64::consts::PI / m as f64;
    }
    Ok(BallVolume::Approx(v))
}

/// The radially decreasing representative x -> p(alpha_n |x|^n), carried
/// symbolically: the profile is never resampled.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialCarrier {
    pub profile: Profile,
    pub dim: usize,
    pub alpha: BallVolume,
}

impl RadialCarrier {
    /// For n = 1 the carrier is an explicit even step function on R:
    /// p(2|x|) takes value v_j for |x| in (t_{j-1}/2, t_j/2).
    pub fn to_step_1d(&self) -> Result<StepFunction> {
        if self.dim != 1 {
            return Err(Error::BadParameter(
                "explicit carrier is only materialized in dimension 1".into(),
            ));
        }
        let two = rat_int(2);
        let bp = self.profile.breakpoints();
        let mut pieces = Vec::new();
        for (j, v) in self.profile.values().iter().enumerate() {
            let inner = &bp[j] / &two;
            let outer = &bp[j + 1] / &two;
            pieces.push((
                RatBox::interval(inner.clone(), outer.clone()).expect("increasing"),
                Scalar::real(v.clone()),
            ));
            pieces.push((
                RatBox::interval(-outer, -inner.clone()).expect("increasing"),
                Scalar::real(v.clone()),
            ));
        }
        // the two pieces at the origin share the boundary point 0 only
        Ok(StepFunction::from_disjoint_pieces(1, pieces))
    }
}

/// Radial rearrangement f -> f(star): the carrier of the rearrangement of f.
pub fn radial_rearrangement(f: &StepFunction) -> Result<RadialCarrier> {
    Ok(RadialCarrier {
        profile: rearrangement(f)?,
        dim: f.dim(),
        alpha: unit_ball_volume(f.dim())?,
    })
}
