//! Quasinorm families on step functions.
//!
//! Three rearrangement-invariant families are built in:
//!   * `lp:p=<p>` — (integral |f|^p)^(1/p), 0 < p < oo;
//!   * `lorentz:p=<p>,q=<q>` — (integral t^{q/p-1} f*(t)^q dt)^{1/q};
//!   * `sup` — essential supremum.
//!
//! Every evaluation goes through the exact profile of |f|; floating point
//! enters only in the final power computations (relative error <= 1e-12 is
//! the working assumption for the piecewise closed forms).

use crate::error::{Error, Result};
use crate::rearrangement::{rearrangement, Profile};
use crate::scalar::{rat, rat_to_f64, two_pow, Rat};
use crate::step::StepFunction;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    Lp { p: f64 },
    Lorentz { p: f64, q: f64 },
    Sup,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasinormSpec {
    pub name: String,
    pub kind: NormKind,
    /// Stored upper bound for the modulus of concavity; configurable because
    /// the sharp constant is not known in closed form for every family.
    pub concavity: f64,
    pub rearrangement_invariant: bool,
}

impl QuasinormSpec {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::BadParameter(format!("lp requires p > 0, got {p}")));
        }
        Ok(QuasinormSpec {
            name: format!("lp:p={p}"),
            kind: NormKind::Lp { p },
            concavity: (2f64.powf(1.0 / p - 1.0)).max(1.0),
            rearrangement_invariant: true,
        })
    }

    pub fn lorentz(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0 && q.is_finite() && q > 0.0) {
            return Err(Error::BadParameter(format!(
                "lorentz requires p, q > 0, got p={p}, q={q}"
            )));
        }
        // conservative default: the subadditivity loss of the q-power mean
        // times the dilation loss when p and q disagree
        let c = 2f64.powf(1.0 / p.min(q).min(1.0) - 1.0)
            * 2f64.powf((1.0 / p - 1.0 / q).max(0.0));
        Ok(QuasinormSpec {
            name: format!("lorentz:p={p},q={q}"),
            kind: NormKind::Lorentz { p, q },
            concavity: c.max(1.0),
            rearrangement_invariant: true,
        })
    }

    pub fn sup() -> Self {
        QuasinormSpec {
            name: "sup".into(),
            kind: NormKind::Sup,
            concavity: 1.0,
            rearrangement_invariant: true,
        }
    }

    pub fn with_concavity(mut self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 1.0) {
            return Err(Error::BadParameter(format!("concavity must be >= 1, got {c}")));
        }
        self.concavity = c;
        Ok(self)
    }

    /// Parse `lp:p=0.5`, `lorentz:p=2,q=1/2`, `sup`.
    pub fn parse(selector: &str) -> Result<Self> {
        let bad = || Error::BadNormSelector(selector.to_string());
        let s = selector.trim();
        if s == "sup" {
            return Ok(QuasinormSpec::sup());
        }
        let (head, args) = s.split_once(':').ok_or_else(bad)?;
        let mut p: Option<f64> = None;
        let mut q: Option<f64> = None;
        for part in args.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let value = parse_number(v).ok_or_else(bad)?;
            match k.trim() {
                "p" => p = Some(value),
                "q" => q = Some(value),
                _ => return Err(bad()),
            }
        }
        match head.trim() {
            "lp" => QuasinormSpec::lp(p.ok_or_else(bad)?),
            "lorentz" => QuasinormSpec::lorentz(p.ok_or_else(bad)?, q.ok_or_else(bad)?),
            _ => Err(bad()),
        }
    }

    pub fn eval(&self, f: &StepFunction) -> Result<f64> {
        Ok(self.eval_profile(&rearrangement(f)?))
    }

    pub fn eval_profile(&self, profile: &Profile) -> f64 {
        if profile.is_zero() {
            return 0.0;
        }
        let bp = profile.breakpoints();
        match &self.kind {
            NormKind::Lp { p } => {
                let mut acc = 0.0;
                for (j, v) in profile.values().iter().enumerate() {
                    let width = rat_to_f64(&(&bp[j + 1] - &bp[j]));
                    acc += rat_to_f64(v).powf(*p) * width;
                }
                acc.powf(1.0 / p)
            }
            NormKind::Lorentz { p, q } => {
                // per piece: v^q * (p/q) * (t_j^{q/p} - t_{j-1}^{q/p})
                let e = q / p;
                let mut acc = 0.0;
                for (j, v) in profile.values().iter().enumerate() {
                    let hi = rat_to_f64(&bp[j + 1]).powf(e);
                    let lo = rat_to_f64(&bp[j]).powf(e);
                    acc += rat_to_f64(v).powf(*q) * (p / q) * (hi - lo);
                }
                acc.powf(1.0 / q)
            }
            NormKind::Sup => rat_to_f64(&profile.max_value()),
        }
    }

    /// Norm of an indicator of a set of measure t (fundamental function).
    pub fn fundamental(&self, t: &Rat) -> f64 {
        if !t.is_positive() {
            return 0.0;
        }
        let tf = rat_to_f64(t);
        match &self.kind {
            NormKind::Lp { p } => tf.powf(1.0 / p),
            NormKind::Lorentz { p, q } => (p / q).powf(1.0 / q) * tf.powf(1.0 / p),
            NormKind::Sup => 1.0,
        }
    }

    /// Largest dyadic t = 2^-j with fundamental(t) < target; `None` when the
    /// fundamental function does not vanish at 0 (the norm is not absolutely
    /// continuous) or no such dyadic step exists above 2^-200.
    pub fn vanishing_indicator_measure(&self, target: f64) -> Option<Rat> {
        if !(target > 0.0) {
            return None;
        }
        if let NormKind::Sup = self.kind {
            return None;
        }
        for j in 0..=200 {
            let t = two_pow(-j);
            if self.fundamental(&t) < target {
                return Some(t);
            }
        }
        None
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        !matches!(self.kind, NormKind::Sup)
    }

    pub fn aoki_rolewicz_exponent(&self) -> f64 {
        aoki_rolewicz_exponent(self.concavity).expect("stored concavity >= 1")
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().ok()?;
        let d: f64 = d.trim().parse().ok()?;
        if d == 0.0 {
            return None;
        }
        return Some(n / d);
    }
    s.parse().ok()
}

/// Exponent r with (2C)^r = 2: any C-quasinormed space carries an equivalent
/// r-subadditive quasinorm.
pub fn aoki_rolewicz_exponent(c: f64) -> Result<f64> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::BadParameter(format!(
            "modulus of concavity must be >= 1, got {c}"
        )));
    }
    Ok(1.0 / (2.0 * c).log2())
}

/// Direct sum route for the p-norm, bypassing the profile.
pub fn lp_norm(f: &StepFunction, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::BadParameter(format!("lp requires p > 0, got {p}")));
    }
    let mut acc = 0.0;
    for (b, v) in f.pieces() {
        acc += v.modulus_f64().powf(p) * rat_to_f64(&b.measure());
    }
    Ok(acc.powf(1.0 / p))
}

pub fn lorentz_norm(f: &StepFunction, p: f64, q: f64) -> Result<f64> {
    QuasinormSpec::lorentz(p, q)?.eval(f)
}

#[derive(Clone, Debug)]
pub struct AxiomFinding {
    pub axiom: String,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub norm: String,
    pub samples: usize,
    pub stored_concavity: f64,
    /// max over sampled pairs of ||f+g|| / (||f|| + ||g||): an empirical
    /// lower bound for the true modulus of concavity.
    pub empirical_concavity: f64,
    pub homogeneity_worst_rel: f64,
    pub definiteness_ok: bool,
    pub lattice_ok: bool,
    pub monotone_limit_ok: bool,
    pub indicator_norms_finite: bool,
    /// worst ||x1+x2+x3||^r / sum ||xi||^r against the classical factor 4
    pub power_sum_worst: f64,
    /// empirical concentration values integral_E |f| / ||f|| per probe set
    pub concentration: Vec<(String, f64)>,
    pub failures: Vec<AxiomFinding>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub struct AxiomCheckConfig {
    pub tol_rel: f64,
    pub triangle_slack: f64,
}

impl Default for AxiomCheckConfig {
    fn default() -> Self {
        AxiomCheckConfig {
            tol_rel: 1e-9,
            triangle_slack: 1e-9,
        }
    }
}

/// Samplewise verification of the quasinorm axioms: absolute homogeneity,
/// definiteness, the C-triangle inequality, lattice monotonicity, monotone
/// convergence along truncations, and finiteness on indicators. Extra pairs
/// let callers pin known extremal configurations.
pub fn check_axioms(
    spec: &QuasinormSpec,
    samples: &[StepFunction],
    extra_pairs: &[(StepFunction, StepFunction)],
    cfg: &AxiomCheckConfig,
) -> Result<AxiomReport> {
    let mut failures = Vec::new();
    let mut homogeneity_worst: f64 = 0.0;
    let mut definiteness_ok = true;
    let scalars = [rat(2, 1), rat(1, 3), rat(-5, 4)];

    for (i, f) in samples.iter().enumerate() {
        let nf = spec.eval(f)?;
        if f.is_zero() {
            if nf != 0.0 {
                definiteness_ok = false;
                failures.push(AxiomFinding {
                    axiom: "definiteness".into(),
                    detail: format!("sample {i}: zero function has norm {nf}"),
                });
            }
            continue;
        }
        if !(nf > 0.0) {
            definiteness_ok = false;
            failures.push(AxiomFinding {
                axiom: "definiteness".into(),
                detail: format!("sample {i}: nonzero function has norm {nf}"),
            });
        }
        for a in &scalars {
            let scaled = spec.eval(&f.scale_rat(a))?;
            let expect = rat_to_f64(a).abs() * nf;
            let rel = if expect == 0.0 {
                scaled.abs()
            } else {
                (scaled - expect).abs() / expect
            };
            homogeneity_worst = homogeneity_worst.max(rel);
            if rel > cfg.tol_rel {
                failures.push(AxiomFinding {
                    axiom: "homogeneity".into(),
                    detail: format!("sample {i}, a={a}: rel err {rel:.3e}"),
                });
            }
        }
    }

    // C-triangle and lattice on consecutive pairs plus pinned pairs
    let mut empirical_c: f64 = 0.0;
    let mut lattice_ok = true;
    let mut pairs: Vec<(&StepFunction, &StepFunction)> = samples
        .windows(2)
        .map(|w| (&w[0], &w[1]))
        .collect();
    for (f, g) in extra_pairs {
        pairs.push((f, g));
    }
    for (idx, (f, g)) in pairs.iter().enumerate() {
        let nf = spec.eval(f)?;
        let ng = spec.eval(g)?;
        if nf + ng == 0.0 {
            continue;
        }
        let ns = spec.eval(&f.add(g)?)?;
        let ratio = ns / (nf + ng);
        empirical_c = empirical_c.max(ratio);
        if ratio > spec.concavity * (1.0 + cfg.triangle_slack) {
            failures.push(AxiomFinding {
                axiom: "triangle".into(),
                detail: format!(
                    "pair {idx}: ratio {ratio:.12} exceeds stored C {}",
                    spec.concavity
                ),
            });
        }
        // |f| <= |f| + |g| pointwise, so the norms must be ordered
        let dominating = f.abs()?.add(&g.abs()?)?;
        let nd = spec.eval(&dominating)?;
        if nf > nd * (1.0 + cfg.tol_rel) {
            lattice_ok = false;
            failures.push(AxiomFinding {
                axiom: "lattice".into(),
                detail: format!("pair {idx}: ||f|| = {nf} > ||(|f|+|g|)|| = {nd}"),
            });
        }
    }

    // monotone limit along truncations: restrict to the first 1..=m pieces
    let mut monotone_limit_ok = true;
    for (i, f) in samples.iter().enumerate().take(32) {
        if f.is_zero() {
            continue;
        }
        let g = f.abs()?;
        let boxes: Vec<_> = g.pieces().iter().map(|(b, _)| b.clone()).collect();
        let mut prev = 0.0;
        for m in 1..=boxes.len() {
            let truncated = g.restrict_disjoint(&boxes[..m]);
            let n = spec.eval(&truncated)?;
            if n + cfg.tol_rel * n.max(1.0) < prev {
                monotone_limit_ok = false;
                failures.push(AxiomFinding {
                    axiom: "monotone-limit".into(),
                    detail: format!("sample {i}: norm decreased along truncations"),
                });
                break;
            }
            prev = n;
        }
        let total = spec.eval(&g)?;
        if (prev - total).abs() > cfg.tol_rel * total.max(1.0) {
            monotone_limit_ok = false;
            failures.push(AxiomFinding {
                axiom: "monotone-limit".into(),
                detail: format!("sample {i}: truncation limit {prev} != norm {total}"),
            });
        }
    }

    // indicators of finite-measure sets have finite norm
    let mut indicator_norms_finite = true;
    for t in [rat(1, 4), rat(1, 1), rat(7, 2)] {
        let n = spec.fundamental(&t);
        if !n.is_finite() {
            indicator_norms_finite = false;
            failures.push(AxiomFinding {
                axiom: "indicator-finiteness".into(),
                detail: format!("fundamental({t}) = {n}"),
            });
        }
    }

    // diagnostic: r-power subadditivity with the classical factor 4
    let r = spec.aoki_rolewicz_exponent();
    let mut power_sum_worst: f64 = 0.0;
    for w in samples.windows(3) {
        let sum = w[0].add(&w[1])?.add(&w[2])?;
        let ns = spec.eval(&sum)?.powf(r);
        let mut rhs = 0.0;
        for f in w {
            rhs += spec.eval(f)?.powf(r);
        }
        if rhs > 0.0 {
            power_sum_worst = power_sum_worst.max(ns / rhs);
        }
    }
    if power_sum_worst > 4.0 * (1.0 + cfg.triangle_slack) {
        failures.push(AxiomFinding {
            axiom: "power-subadditivity".into(),
            detail: format!("worst ratio {power_sum_worst:.6} exceeds 4"),
        });
    }

    // diagnostic: concentration of mass against the norm on probe sets
    let mut concentration = Vec::new();
    for (label, hi) in [("(0,1)", rat(1, 1)), ("(0,1/16)", rat(1, 16))] {
        let probe = crate::geometry::RatBox::interval(Rat::zero(), hi)?;
        let mut worst: f64 = 0.0;
        for f in samples {
            let n = spec.eval(f)?;
            if n == 0.0 {
                continue;
            }
            let mass = f.restrict_disjoint(std::slice::from_ref(&probe)).integral_abs()?;
            worst = worst.max(rat_to_f64(&mass) / n);
        }
        concentration.push((label.to_string(), worst));
    }

    Ok(AxiomReport {
        norm: spec.name.clone(),
        samples: samples.len(),
        stored_concavity: spec.concavity,
        empirical_concavity: empirical_c,
        homogeneity_worst_rel: homogeneity_worst,
        definiteness_ok,
        lattice_ok,
        monotone_limit_ok,
        indicator_norms_finite,
        power_sum_worst,
        concentration,
        failures,
    })
}

/// Disjoint translates with equal norms: the extremal pair for the p < 1
/// triangle ratio 2^{1/p-1}.
pub fn disjoint_equal_norm_pair() -> (StepFunction, StepFunction) {
    let f = StepFunction::indicator(
        crate::geometry::RatBox::interval(Rat::zero(), Rat::one()).expect("0 < 1"),
    );
    let g = StepFunction::indicator(
        crate::geometry::RatBox::interval(Rat::one(), rat(2, 1)).expect("1 < 2"),
    );
    (f, g)
}
