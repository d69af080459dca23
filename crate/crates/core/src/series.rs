//! Series machinery: iterated triangle bounds, certified partial sums with
//! analytic tails, rapid-Cauchy subsequence extraction, monotone and liminf
//! norm limits, and divergence witnesses built from calibrated spikes.

use crate::error::{Error, Result};
use crate::geometry::RatBox;
use crate::quasinorm::{NormKind, QuasinormSpec};
use crate::scalar::{parse_rat, rat_int, rat_to_f64, two_pow, Rat, Scalar};
use crate::step::StepFunction;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

/// Float-side slack for norm comparisons; rational checks carry none.
pub const SERIES_REL_TOL: f64 = 1e-9;

fn rat_powi(base: &Rat, e: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct NtPrefix {
    pub upto: usize,
    /// ‖Σ_{n≤upto} x_n‖
    pub partial_norm: f64,
    /// Σ_{n≤upto} C^{n+1}‖x_n‖
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NtReport {
    pub norm: String,
    pub c: f64,
    pub term_norms: Vec<f64>,
    pub prefixes: Vec<NtPrefix>,
}

impl NtReport {
    pub fn holds(&self) -> bool {
        self.prefixes
            .iter()
            .all(|p| p.slack >= -SERIES_REL_TOL * p.bound.max(1.0))
    }

    pub fn worst_slack(&self) -> f64 {
        self.prefixes
            .iter()
            .map(|p| p.slack)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Iterated triangle inequality: ‖Σ_{n≤N} x_n‖ ≤ Σ_{n≤N} C^{n+1}‖x_n‖ for
/// every prefix N.  A violation means the stored C is too small for the norm.
pub fn nt_inequality_check(spec: &QuasinormSpec, terms: &[StepFunction]) -> Result<NtReport> {
    if terms.is_empty() {
        return Err(Error::BadParameter("empty term list".into()));
    }
    let c = spec.concavity;
    let mut term_norms = Vec::with_capacity(terms.len());
    let mut prefixes = Vec::with_capacity(terms.len());
    let mut sum = StepFunction::zero(terms[0].dim());
    let mut bound = 0.0;
    for (n, x) in terms.iter().enumerate() {
        let norm_x = spec.eval(x)?;
        term_norms.push(norm_x);
        bound += c.powi(n as i32 + 1) * norm_x;
        sum = sum.add(x)?;
        let partial_norm = spec.eval(&sum)?;
        prefixes.push(NtPrefix {
            upto: n,
            partial_norm,
            bound,
            slack: bound - partial_norm,
        });
    }
    Ok(NtReport {
        norm: spec.name.clone(),
        c,
        term_norms,
        prefixes,
    })
}

/// Term source for a series together with whatever closed forms it admits.
/// Infinite series are handled as an exact finite prefix plus an analytic
/// tail bound; nothing genuinely infinite is ever materialized.
#[derive(Debug, Clone)]
pub enum SeriesGenerator {
    /// x_n = ratio^{n+1}·base; the full sum is (ratio/(1−ratio))·base.
    GeometricIndicator { base: StepFunction, ratio: Rat },
    /// x_n = height_ratio^n·χ_{(n,n+1)}; disjoint supports, no finite-piece limit.
    DisjointBlocks { height_ratio: Rat },
    /// Finite list, identically zero beyond the end.
    Explicit(Vec<StepFunction>),
}

impl SeriesGenerator {
    /// `geometric:ratio=1/4` (base χ_{(0,1)}) or `blocks:ratio=0.5`.
    pub fn parse(selector: &str) -> Result<SeriesGenerator> {
        let (head, args) = selector.split_once(':').unwrap_or((selector, ""));
        let ratio = args.strip_prefix("ratio=").and_then(parse_rat);
        match head {
            "geometric" => {
                let ratio = ratio.ok_or_else(|| {
                    Error::BadParameter(format!("generator `{selector}` needs ratio=<rational>"))
                })?;
                let base =
                    StepFunction::indicator(RatBox::interval(rat_int(0), rat_int(1)).expect("unit"));
                Ok(SeriesGenerator::GeometricIndicator { base, ratio })
            }
            "blocks" => {
                let ratio = ratio.ok_or_else(|| {
                    Error::BadParameter(format!("generator `{selector}` needs ratio=<rational>"))
                })?;
                Ok(SeriesGenerator::DisjointBlocks { height_ratio: ratio })
            }
            _ => Err(Error::BadParameter(format!(
                "unknown series generator `{selector}`"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SeriesGenerator::GeometricIndicator { base, .. } => base.dim(),
            SeriesGenerator::DisjointBlocks { .. } => 1,
            SeriesGenerator::Explicit(terms) => terms.first().map_or(1, |t| t.dim()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SeriesGenerator::GeometricIndicator { ratio, .. }
            | SeriesGenerator::DisjointBlocks { height_ratio: ratio } => {
                if !ratio.is_positive() || *ratio >= Rat::one() {
                    return Err(Error::BadParameter(format!(
                        "ratio must lie in (0,1), got {ratio}"
                    )));
                }
            }
            SeriesGenerator::Explicit(terms) => {
                if terms.is_empty() {
                    return Err(Error::BadParameter("explicit generator is empty".into()));
                }
                let d = terms[0].dim();
                for t in terms {
                    if t.dim() != d {
                        return Err(Error::DimensionMismatch(d, t.dim()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn term(&self, n: usize) -> Result<StepFunction> {
        match self {
            SeriesGenerator::GeometricIndicator { base, ratio } => {
                Ok(base.scale_rat(&rat_powi(ratio, n + 1)))
            }
            SeriesGenerator::DisjointBlocks { height_ratio } => {
                let b = RatBox::interval(rat_int(n as i64), rat_int(n as i64 + 1))?;
                Ok(StepFunction::scaled_indicator(
                    b,
                    Scalar::real(rat_powi(height_ratio, n)),
                ))
            }
            SeriesGenerator::Explicit(terms) => Ok(terms
                .get(n)
                .cloned()
                .unwrap_or_else(|| StepFunction::zero(self.dim()))),
        }
    }

    /// Exact pointwise sum of the whole series, when it is a finite step function.
    pub fn limit(&self) -> Result<Option<StepFunction>> {
        match self {
            SeriesGenerator::GeometricIndicator { base, ratio } => {
                let s = ratio.clone() / (Rat::one() - ratio.clone());
                Ok(Some(base.scale_rat(&s)))
            }
            SeriesGenerator::DisjointBlocks { .. } => Ok(None),
            SeriesGenerator::Explicit(terms) => {
                let mut acc = StepFunction::zero(self.dim());
                for t in terms {
                    acc = acc.add(t)?;
                }
                Ok(Some(acc))
            }
        }
    }

    /// Analytic Σ_{n>m} C^{n+1}‖x_n‖, or None when the weighted series diverges.
    pub fn weighted_tail(&self, spec: &QuasinormSpec, m: usize) -> Result<Option<f64>> {
        let c = spec.concavity;
        match self {
            SeriesGenerator::GeometricIndicator { base, ratio } => {
                let x = c * rat_to_f64(ratio);
                if x >= 1.0 {
                    return Ok(None);
                }
                let base_norm = spec.eval(base)?;
                Ok(Some(base_norm * x.powi(m as i32 + 2) / (1.0 - x)))
            }
            SeriesGenerator::DisjointBlocks { height_ratio } => {
                let x = c * rat_to_f64(height_ratio);
                if x >= 1.0 {
                    return Ok(None);
                }
                // ‖x_n‖ = r^n·φ(1), so the tail is C·φ(1)·(Cr)^{m+1}/(1−Cr)
                let phi1 = spec.fundamental(&rat_int(1));
                Ok(Some(c * phi1 * x.powi(m as i32 + 1) / (1.0 - x)))
            }
            SeriesGenerator::Explicit(terms) => {
                let mut tail = 0.0;
                for (n, t) in terms.iter().enumerate().skip(m + 1) {
                    tail += c.powi(n as i32 + 1) * spec.eval(t)?;
                }
                Ok(Some(tail))
            }
        }
    }

    /// Closed-form ‖f − s_m‖ where one exists.
    pub fn residual_norm(&self, spec: &QuasinormSpec, m: usize) -> Result<Option<f64>> {
        match self {
            SeriesGenerator::GeometricIndicator { base, ratio } => {
                // f − s_m = (ratio^{m+2}/(1−ratio))·base, so homogeneity is exact
                let s = rat_powi(ratio, m + 2) / (Rat::one() - ratio.clone());
                Ok(Some(rat_to_f64(&s) * spec.eval(base)?))
            }
            SeriesGenerator::DisjointBlocks { height_ratio } => {
                let r = rat_to_f64(height_ratio);
                match spec.kind {
                    // disjoint unit-width blocks: ‖tail after m‖_p = r^{m+1}(1−r^p)^{−1/p}
                    NormKind::Lp { p } => {
                        Ok(Some(r.powi(m as i32 + 1) * (1.0 - r.powf(p)).powf(-1.0 / p)))
                    }
                    NormKind::Sup => Ok(Some(r.powi(m as i32 + 1))),
                    NormKind::Lorentz { .. } => Ok(None),
                }
            }
            SeriesGenerator::Explicit(terms) => {
                let mut tail = StepFunction::zero(self.dim());
                for t in terms.iter().skip(m + 1) {
                    tail = tail.add(t)?;
                }
                Ok(Some(spec.eval(&tail)?))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CauchyGap {
    pub from: usize,
    pub to: usize,
    /// ‖s_to − s_from‖
    pub gap: f64,
    /// Σ_{n=from+1}^{to} C^{n+1}‖x_n‖
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualEntry {
    pub upto: usize,
    /// analytic Σ_{n>upto} C^{n+1}‖x_n‖
    pub tail_bound: f64,
    /// closed-form ‖f − s_upto‖ when the generator has one
    pub closed_form: Option<f64>,
    /// evaluated ‖f − s_upto‖ when the limit is a finite step function
    pub measured: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesCertificate {
    pub norm: String,
    pub c: f64,
    pub prefix: usize,
    pub term_norms: Vec<f64>,
    /// Σ_{n<prefix} C^{n+1}‖x_n‖
    pub weighted_prefix_sum: f64,
    /// analytic bound for the rest of the weighted series
    pub weighted_tail_bound: f64,
    /// ‖s_M‖ for M = 0..prefix
    pub partial_norms: Vec<f64>,
    /// ‖t_M‖ with t_M = Σ_{n≤M}|x_n|; must be non-decreasing
    pub abs_partial_norms: Vec<f64>,
    pub abs_monotone: bool,
    pub cauchy: Vec<CauchyGap>,
    pub residuals: Vec<ResidualEntry>,
    pub failures: Vec<String>,
    pub converges: bool,
}

/// Sums the series to the given prefix and certifies: the iterated triangle
/// bound on every prefix, monotonicity of t_M = Σ|x_n|, the Cauchy trace
/// ‖s_N − s_M‖ against in-window weighted bounds, and (when the limit is
/// finite) ‖f − s_M‖ ≤ analytic tail at every M, non-increasing in M.
///
/// Refuses generators whose weighted series Σ C^{n+1}‖x_n‖ has no finite
/// analytic tail.
pub fn riesz_fischer_sum(
    spec: &QuasinormSpec,
    gen: &SeriesGenerator,
    prefix: usize,
) -> Result<(Option<StepFunction>, SeriesCertificate)> {
    if prefix == 0 {
        return Err(Error::BadParameter("prefix must be at least 1".into()));
    }
    gen.validate()?;
    let c = spec.concavity;
    let weighted_tail_bound = gen.weighted_tail(spec, prefix - 1)?.ok_or_else(|| {
        Error::GrowthPrecondition(
            "weighted series Σ C^{n+1}‖x_n‖ has no finite analytic tail for this generator"
                .into(),
        )
    })?;

    let mut failures: Vec<String> = Vec::new();
    let mut term_norms = Vec::with_capacity(prefix);
    let mut partial_norms = Vec::with_capacity(prefix);
    let mut abs_partial_norms = Vec::with_capacity(prefix);
    let mut partials: Vec<StepFunction> = Vec::with_capacity(prefix);
    let mut weighted_prefix_sum = 0.0;
    let mut sum = StepFunction::zero(gen.dim());
    let mut abs_sum = StepFunction::zero(gen.dim());
    let mut abs_monotone = true;

    for n in 0..prefix {
        let x = gen.term(n)?;
        let norm_x = spec.eval(&x)?;
        weighted_prefix_sum += c.powi(n as i32 + 1) * norm_x;
        term_norms.push(norm_x);
        sum = sum.add(&x)?;
        let next_abs = abs_sum.add(&x.abs()?)?;
        if !abs_sum.dominated_in_modulus_by(&next_abs)? {
            abs_monotone = false;
            failures.push(format!("t_{n} does not dominate t_{}", n.wrapping_sub(1)));
        }
        abs_sum = next_abs;
        partial_norms.push(spec.eval(&sum)?);
        abs_partial_norms.push(spec.eval(&abs_sum)?);
        partials.push(sum.clone());
    }
    for (n, w) in abs_partial_norms.windows(2).enumerate() {
        if w[1] < w[0] - SERIES_REL_TOL * w[0].max(1.0) {
            abs_monotone = false;
            failures.push(format!("‖t‖ decreased at {}: {} -> {}", n + 1, w[0], w[1]));
        }
    }

    // iterated triangle bound along the run
    let mut bound = 0.0;
    for (n, (norm_x, partial)) in term_norms.iter().zip(&partial_norms).enumerate() {
        bound += c.powi(n as i32 + 1) * norm_x;
        if *partial > bound + SERIES_REL_TOL * bound.max(1.0) {
            failures.push(format!(
                "prefix {n}: ‖s_N‖ = {partial} exceeds iterated bound {bound}"
            ));
        }
    }

    // Cauchy trace on sampled index pairs
    let stride = (prefix / 16).max(1);
    let mut cauchy = Vec::new();
    for m in (0..prefix.saturating_sub(1)).step_by(stride) {
        for n in (m + 1)..prefix {
            if n % stride != 0 && n != prefix - 1 {
                continue;
            }
            let gap = spec.eval(&partials[n].sub(&partials[m])?)?;
            let mut gap_bound = 0.0;
            for j in (m + 1)..=n {
                gap_bound += c.powi(j as i32 + 1) * term_norms[j];
            }
            if gap > gap_bound + SERIES_REL_TOL * gap_bound.max(1.0) {
                failures.push(format!(
                    "‖s_{n} − s_{m}‖ = {gap} exceeds weighted window bound {gap_bound}"
                ));
            }
            cauchy.push(CauchyGap {
                from: m,
                to: n,
                gap,
                bound: gap_bound,
            });
        }
    }

    // residual trace against the analytic tails
    let limit = gen.limit()?;
    let mut residuals = Vec::with_capacity(prefix);
    let mut prev_measured = f64::INFINITY;
    for m in 0..prefix {
        let tail_bound = gen.weighted_tail(spec, m)?.unwrap_or(f64::INFINITY);
        let closed_form = gen.residual_norm(spec, m)?;
        let measured = match &limit {
            Some(f) => Some(spec.eval(&f.sub(&partials[m])?)?),
            None => None,
        };
        if let Some(meas) = measured {
            if meas > prev_measured + SERIES_REL_TOL * prev_measured.max(1.0) {
                failures.push(format!(
                    "residual increased at M={m}: {prev_measured} -> {meas}"
                ));
            }
            prev_measured = meas;
            if meas > tail_bound + SERIES_REL_TOL * tail_bound.max(1.0) {
                failures.push(format!(
                    "residual {meas} at M={m} exceeds weighted tail {tail_bound}"
                ));
            }
            if let Some(cf) = closed_form {
                if meas > cf + SERIES_REL_TOL * cf.max(1.0) {
                    failures.push(format!(
                        "residual {meas} at M={m} exceeds closed form {cf}"
                    ));
                }
            }
        }
        residuals.push(ResidualEntry {
            upto: m,
            tail_bound,
            closed_form,
            measured,
        });
    }

    let converges = failures.is_empty();
    let certificate = SeriesCertificate {
        norm: spec.name.clone(),
        c,
        prefix,
        term_norms,
        weighted_prefix_sum,
        weighted_tail_bound,
        partial_norms,
        abs_partial_norms,
        abs_monotone,
        cauchy,
        residuals,
        failures,
        converges,
    };
    Ok((limit, certificate))
}

#[derive(Debug, Clone, Serialize)]
pub struct RapidSubsequence {
    pub c_prime: f64,
    pub indices: Vec<usize>,
    /// (2C′)^{−j−2} for the j-th increment
    pub thresholds: Vec<f64>,
    /// ‖x_{k_{j+1}} − x_{k_j}‖, each ≤ its threshold
    pub increment_norms: Vec<f64>,
    /// x_{k_last} equals x_{k_0} + Σ increments as step functions
    pub telescoping_exact: bool,
}

/// Extracts k_0 < k_1 < … with ‖x_i − x_j‖ ≤ (2C′)^{−n−2} for all pairs
/// i, j ≥ k_n inside the supplied window, and certifies the telescoping
/// identity for the extracted subsequence exactly.
pub fn extract_rapid_subsequence(
    spec: &QuasinormSpec,
    seq: &[StepFunction],
    c_prime: f64,
) -> Result<RapidSubsequence> {
    if seq.len() < 2 {
        return Err(Error::BadParameter(
            "need at least two sequence elements".into(),
        ));
    }
    if !(c_prime >= 1.0) {
        return Err(Error::BadParameter(format!(
            "C' must be at least 1, got {c_prime}"
        )));
    }
    let len = seq.len();
    let mut gap = vec![vec![0.0f64; len]; len];
    for i in 0..len {
        for j in (i + 1)..len {
            gap[i][j] = spec.eval(&seq[j].sub(&seq[i])?)?;
        }
    }
    // maxtail[m] = sup of gaps over pairs at indices ≥ m
    let mut maxtail = vec![0.0f64; len + 1];
    for m in (0..len).rev() {
        let mut worst = maxtail[m + 1];
        for j in (m + 1)..len {
            worst = worst.max(gap[m][j]);
        }
        maxtail[m] = worst;
    }

    let q = 2.0 * c_prime;
    let mut indices: Vec<usize> = Vec::new();
    let mut thresholds = Vec::new();
    for step in 0..len {
        let tau = q.powi(-(step as i32) - 2);
        let start = indices.last().map_or(0, |&k| k + 1);
        match (start..len).find(|&m| maxtail[m] <= tau * (1.0 + SERIES_REL_TOL)) {
            Some(k) => {
                indices.push(k);
                thresholds.push(tau);
                if k == len - 1 {
                    break;
                }
            }
            None => break,
        }
    }
    if indices.len() < 2 {
        return Err(Error::HorizonExhausted(
            len,
            "sequence window is not Cauchy at rate (2C')^(-n-2)".into(),
        ));
    }

    let mut increment_norms = Vec::new();
    let mut rebuilt = seq[indices[0]].clone();
    for w in indices.windows(2) {
        let y = seq[w[1]].sub(&seq[w[0]])?;
        increment_norms.push(spec.eval(&y)?);
        rebuilt = rebuilt.add(&y)?;
    }
    let telescoping_exact = rebuilt.ae_eq(&seq[*indices.last().expect("nonempty")])?;
    thresholds.truncate(increment_norms.len());
    Ok(RapidSubsequence {
        c_prime,
        indices,
        thresholds,
        increment_norms,
        telescoping_exact,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FatouMonotone {
    pub norms: Vec<f64>,
    pub limit_norm: f64,
    /// each truncation dominates the previous one pointwise (exact)
    pub pointwise_monotone: bool,
    pub nondecreasing: bool,
    /// the final truncation equals f a.e. (exact), so the norms attain ‖f‖
    pub attains: bool,
}

/// Truncations f·χ_{(−k,k)^n} increase to f; their norms must climb to ‖f‖.
pub fn fatou_monotone_truncation(
    spec: &QuasinormSpec,
    f: &StepFunction,
    steps: usize,
) -> Result<FatouMonotone> {
    if steps == 0 {
        return Err(Error::BadParameter("need at least one step".into()));
    }
    let limit_norm = spec.eval(f)?;
    let radius_needed: i64 = f.bounding_box().map_or(1, |b| {
        (b.sup_norm_bound().ceil().to_integer().to_i64()).unwrap_or(i64::MAX / 2) + 1
    });
    let mut ks: Vec<i64> = (1..=steps as i64).collect();
    if *ks.last().expect("nonempty") < radius_needed {
        ks.push(radius_needed);
    }

    let mut norms = Vec::with_capacity(ks.len());
    let mut prev: Option<StepFunction> = None;
    let mut pointwise_monotone = true;
    for k in &ks {
        let window = RatBox::new(vec![(rat_int(-k), rat_int(*k)); f.dim()])?;
        let t = f.restrict_disjoint(&[window]);
        if let Some(p) = &prev {
            if !p.dominated_in_modulus_by(&t)? {
                pointwise_monotone = false;
            }
        }
        norms.push(spec.eval(&t)?);
        prev = Some(t);
    }
    let attains = prev.expect("at least one window").ae_eq(f)?;
    let nondecreasing = norms
        .windows(2)
        .all(|w| w[1] >= w[0] - SERIES_REL_TOL * w[0].max(1.0));
    Ok(FatouMonotone {
        norms,
        limit_norm,
        pointwise_monotone,
        nondecreasing,
        attains,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FatouLiminf {
    pub term_norms: Vec<f64>,
    /// min over the tail half of the window, the finite stand-in for liminf
    pub liminf: f64,
    pub limit_norm: f64,
    /// ‖limit‖ ≤ liminf ‖f_k‖
    pub holds: bool,
    pub strict_gap: f64,
}

/// Norm of the a.e. limit against the liminf of the term norms.  The
/// inequality can be strict; `strict_gap` reports by how much.
pub fn fatou_liminf(
    spec: &QuasinormSpec,
    terms: &[StepFunction],
    limit: &StepFunction,
) -> Result<FatouLiminf> {
    if terms.is_empty() {
        return Err(Error::BadParameter("empty term list".into()));
    }
    let term_norms: Vec<f64> = terms
        .iter()
        .map(|t| spec.eval(t))
        .collect::<Result<Vec<_>>>()?;
    let tail = &term_norms[terms.len() / 2..];
    let liminf = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let limit_norm = spec.eval(limit)?;
    let holds = limit_norm <= liminf + SERIES_REL_TOL * liminf.max(1.0);
    Ok(FatouLiminf {
        term_norms,
        liminf,
        limit_norm,
        holds,
        strict_gap: liminf - limit_norm,
    })
}

/// χ_{(k,k+1)} for k = 0..count: unit norms, zero pointwise limit.
pub fn sliding_bump(count: usize) -> Vec<StepFunction> {
    (0..count)
        .map(|k| {
            StepFunction::indicator(
                RatBox::interval(rat_int(k as i64), rat_int(k as i64 + 1)).expect("ordered"),
            )
        })
        .collect()
}

/// Positive functional evaluated exactly in rational arithmetic.
#[derive(Debug, Clone)]
pub enum Functional {
    /// Φ(g) = ∫|g|
    Integral,
    /// Φ(g) = ∫|f₀·g|
    PairingWith(StepFunction),
}

impl Functional {
    pub fn apply(&self, g: &StepFunction) -> Result<Rat> {
        match self {
            Functional::Integral => g.integral_abs(),
            Functional::PairingWith(f0) => f0.mul(g)?.integral_abs(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ResonanceGenerator {
    /// Width and height solved per norm so that ‖g_n‖ ≤ 1 while ∫g_n equals
    /// n(2C)^{n+1} + 1 exactly (the +1 keeps the rate inequality strict).
    CalibratedSpikes,
    /// Fixed element repeated; fails the growth precondition once the rate
    /// target passes Φ(g₀).
    Constant(StepFunction),
    Explicit(Vec<StepFunction>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceWitness {
    pub norm: String,
    pub c: f64,
    pub prefix: usize,
    /// each ≤ 1 (checked)
    pub generator_norms: Vec<f64>,
    /// Φ(g_n); rationals reported as floats, compared exactly internally
    pub functional_values: Vec<f64>,
    /// n(2C)^{n+1}
    pub rate_targets: Vec<f64>,
    /// Φ(f_k) for each prefix k
    pub witness_trace: Vec<f64>,
    /// (2C)^{−k−1}Φ(g_k); witness_trace dominates it and exceeds k
    pub floor_trace: Vec<f64>,
    pub witness_norm: f64,
    /// Σ C^{n+1}(2C)^{−n−1}‖g_n‖ — the iterated bound on ‖f‖
    pub rf_bound: f64,
    /// f ≥ (2C)^{−k−1}|g_k| a.e. for every k, exact
    pub pointwise_domination: bool,
    /// Φ(f_k) ≥ (2C)^{−k−1}Φ(g_k) and Φ(f_k) > k, exact rational comparisons
    pub divergence_exact: bool,
}

impl ResonanceWitness {
    pub fn passed(&self) -> bool {
        self.pointwise_domination && self.divergence_exact && self.witness_norm.is_finite()
    }
}

fn calibrated_spikes(
    spec: &QuasinormSpec,
    functional: &Functional,
    targets: &[Rat],
) -> Result<Vec<StepFunction>> {
    if !matches!(functional, Functional::Integral) {
        return Err(Error::BadParameter(
            "calibrated spikes are solved against the integral functional; \
             supply explicit terms for pairings"
                .into(),
        ));
    }
    // thin spikes beat the norm when φ(t)/t → ∞ as t → 0 (p < 1); wide
    // plateaus when φ(t)/t → 0 as t → ∞ (p > 1, sup); at p = 1 the integral
    // is comparable to the norm and no calibration exists
    let thin = match spec.kind {
        NormKind::Lp { p } | NormKind::Lorentz { p, .. } => {
            if (p - 1.0).abs() < 1e-12 {
                return Err(Error::GrowthPrecondition(
                    "fundamental function grows linearly, so the integral is bounded \
                     by the norm; no divergence witness exists"
                        .into(),
                ));
            }
            p < 1.0
        }
        NormKind::Sup => false,
    };

    let mut spikes = Vec::with_capacity(targets.len());
    let mut offset = rat_int(0);
    for t in targets {
        let goal = t.clone() + Rat::one();
        let mut m: i32 = 0;
        let spike = loop {
            let width = if thin { two_pow(-m) } else { two_pow(m) };
            let height = goal.clone() / width.clone();
            let b = RatBox::interval(offset.clone(), offset.clone() + width.clone())?;
            let g = StepFunction::scaled_indicator(b, Scalar::real(height));
            if spec.eval(&g)? <= 1.0 {
                break g;
            }
            m += 1;
            if m > 4000 {
                return Err(Error::HorizonExhausted(
                    4000,
                    "spike calibration failed to reach unit norm".into(),
                ));
            }
        };
        let (_, hi) = spike.bounding_box().expect("nonzero spike").sides()[0].clone();
        offset = hi + Rat::one(); // unit gap keeps supports disjoint
        spikes.push(spike);
    }
    Ok(spikes)
}

/// Builds f = Σ_{n<prefix} (2C)^{−n−1}|g_n| from a generator whose terms sit
/// in the unit ball while Φ(g_n) > n(2C)^{n+1}, and certifies that Φ(f_k)
/// exceeds k at every prefix even though ‖f‖ stays below the iterated bound.
pub fn resonance_witness(
    spec: &QuasinormSpec,
    gen: &ResonanceGenerator,
    functional: &Functional,
    prefix: usize,
) -> Result<(StepFunction, ResonanceWitness)> {
    if prefix == 0 {
        return Err(Error::BadParameter("prefix must be at least 1".into()));
    }
    let c = spec.concavity;
    let c2 = Rat::from_float(2.0 * c)
        .ok_or_else(|| Error::BadParameter("concavity is not finite".into()))?;
    let targets: Vec<Rat> = (0..prefix)
        .map(|n| rat_int(n as i64) * rat_powi(&c2, n + 1))
        .collect();

    let terms: Vec<StepFunction> = match gen {
        ResonanceGenerator::CalibratedSpikes => calibrated_spikes(spec, functional, &targets)?,
        ResonanceGenerator::Constant(g) => vec![g.clone(); prefix],
        ResonanceGenerator::Explicit(v) => {
            if v.len() < prefix {
                return Err(Error::BadParameter(format!(
                    "generator supplies {} terms, prefix needs {prefix}",
                    v.len()
                )));
            }
            v[..prefix].to_vec()
        }
    };

    let mut generator_norms = Vec::with_capacity(prefix);
    let mut phi_g: Vec<Rat> = Vec::with_capacity(prefix);
    for (n, g) in terms.iter().enumerate() {
        let norm_g = spec.eval(g)?;
        if norm_g > 1.0 + SERIES_REL_TOL {
            return Err(Error::GrowthPrecondition(format!(
                "‖g_{n}‖ = {norm_g} exceeds 1"
            )));
        }
        let phi = functional.apply(g)?;
        if phi <= targets[n] {
            return Err(Error::GrowthPrecondition(format!(
                "Φ(g_{n}) = {} does not exceed n(2C)^(n+1) = {}",
                rat_to_f64(&phi),
                rat_to_f64(&targets[n]),
            )));
        }
        generator_norms.push(norm_g);
        phi_g.push(phi);
    }

    let dim = terms[0].dim();
    let mut f = StepFunction::zero(dim);
    let mut scaled_terms = Vec::with_capacity(prefix);
    let mut witness_exact: Vec<Rat> = Vec::with_capacity(prefix);
    for (n, g) in terms.iter().enumerate() {
        let weight = rat_powi(&c2, n + 1).recip();
        let piece = g.abs()?.scale_rat(&weight);
        f = f.add(&piece)?;
        scaled_terms.push(piece);
        witness_exact.push(functional.apply(&f)?);
    }

    let mut pointwise_domination = true;
    for piece in &scaled_terms {
        if !piece.dominated_in_modulus_by(&f)? {
            pointwise_domination = false;
        }
    }
    let mut divergence_exact = true;
    let mut floor_trace = Vec::with_capacity(prefix);
    for (k, phi_fk) in witness_exact.iter().enumerate() {
        let floor = phi_g[k].clone() / rat_powi(&c2, k + 1);
        if *phi_fk < floor || *phi_fk <= rat_int(k as i64) {
            divergence_exact = false;
        }
        floor_trace.push(rat_to_f64(&floor));
    }

    let witness_norm = spec.eval(&f)?;
    let rf_bound: f64 = generator_norms
        .iter()
        .enumerate()
        .map(|(n, ng)| c.powi(n as i32 + 1) * rat_to_f64(&rat_powi(&c2, n + 1).recip()) * ng)
        .sum();

    let witness = ResonanceWitness {
        norm: spec.name.clone(),
        c,
        prefix,
        generator_norms,
        functional_values: phi_g.iter().map(rat_to_f64).collect(),
        rate_targets: targets.iter().map(rat_to_f64).collect(),
        witness_trace: witness_exact.iter().map(rat_to_f64).collect(),
        floor_trace,
        witness_norm,
        rf_bound,
        pointwise_domination,
        divergence_exact,
    };
    Ok((f, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn lp(p: f64) -> QuasinormSpec {
        QuasinormSpec::lp(p).unwrap()
    }

    fn unit(lo: i64, hi: i64) -> StepFunction {
        StepFunction::indicator(RatBox::interval(rat_int(lo), rat_int(hi)).unwrap())
    }

    #[test]
    fn nt_two_unit_terms_bound_six() {
        // C = 2, two disjoint unit-norm terms: bound C + C² = 6, measured 4
        let spec = lp(0.5);
        let report = nt_inequality_check(&spec, &[unit(0, 1), unit(1, 2)]).unwrap();
        assert!(report.holds());
        assert!((report.prefixes[0].bound - 2.0).abs() < 1e-12);
        assert!((report.prefixes[0].partial_norm - 1.0).abs() < 1e-12);
        assert!((report.prefixes[1].bound - 6.0).abs() < 1e-12);
        assert!((report.prefixes[1].partial_norm - 4.0).abs() < 1e-12);
        assert!((report.worst_slack() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nt_overlapping_signed_terms_hold() {
        let spec = lp(0.5);
        let terms = vec![
            unit(0, 2),
            unit(1, 3).scale_rat(&rat(-3, 2)),
            unit(0, 1).scale_rat(&rat(1, 4)),
            unit(2, 4).scale_rat(&rat(5, 3)),
            unit(-1, 1).scale_rat(&rat(-1, 7)),
        ];
        let report = nt_inequality_check(&spec, &terms).unwrap();
        assert!(report.holds(), "worst slack {}", report.worst_slack());
    }

    #[test]
    fn geometric_certificate_closed_forms() {
        // x_n = 4^{-n-1}χ_{(0,1)} under L^{1/2}: limit (1/3)χ, residual
        // (1/3)4^{-M-1}, weighted tail 2^{-M-1}
        let spec = lp(0.5);
        let gen = SeriesGenerator::GeometricIndicator {
            base: unit(0, 1),
            ratio: rat(1, 4),
        };
        let (limit, cert) = riesz_fischer_sum(&spec, &gen, 8).unwrap();
        let expected = unit(0, 1).scale_rat(&rat(1, 3));
        assert!(limit.unwrap().ae_eq(&expected).unwrap());
        assert!(cert.converges, "failures: {:?}", cert.failures);
        assert!(cert.abs_monotone);
        for (m, entry) in cert.residuals.iter().enumerate() {
            let closed = entry.closed_form.unwrap();
            let expected_residual = 0.25f64.powi(m as i32 + 1) / 3.0;
            assert!((closed - expected_residual).abs() <= 1e-12 * expected_residual);
            let measured = entry.measured.unwrap();
            assert!((measured - expected_residual).abs() <= 1e-9 * expected_residual);
            let expected_tail = 0.5f64.powi(m as i32 + 1);
            assert!((entry.tail_bound - expected_tail).abs() <= 1e-12 * expected_tail);
        }
        assert!(!cert.cauchy.is_empty());
    }

    #[test]
    fn disjoint_blocks_l1_residual_exact() {
        // heights 2^{-n} on (n,n+1) under L¹: ‖f − s_M‖ = 2^{-M} exactly
        let spec = lp(1.0);
        let gen = SeriesGenerator::DisjointBlocks {
            height_ratio: rat(1, 2),
        };
        let (limit, cert) = riesz_fischer_sum(&spec, &gen, 6).unwrap();
        assert!(limit.is_none());
        assert!(cert.converges, "failures: {:?}", cert.failures);
        for (n, tn) in cert.term_norms.iter().enumerate() {
            assert!((tn - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
        for (m, entry) in cert.residuals.iter().enumerate() {
            let closed = entry.closed_form.unwrap();
            assert!(
                (closed - 0.5f64.powi(m as i32)).abs() <= 1e-12 * closed,
                "M={m}: {closed}"
            );
            assert!((entry.tail_bound - 0.5f64.powi(m as i32)).abs() <= 1e-12 * closed);
        }
    }

    #[test]
    fn explicit_series_with_zero_tail_is_trivial() {
        let spec = lp(0.5);
        let f0 = unit(0, 1).scale_rat(&rat(5, 2));
        let gen = SeriesGenerator::Explicit(vec![f0.clone(), StepFunction::zero(1)]);
        let (limit, cert) = riesz_fischer_sum(&spec, &gen, 2).unwrap();
        assert!(limit.unwrap().ae_eq(&f0).unwrap());
        assert!(cert.converges);
        assert_eq!(cert.residuals[1].measured, Some(0.0));
        assert_eq!(cert.residuals[1].tail_bound, 0.0);
    }

    #[test]
    fn divergent_weighted_tail_is_refused() {
        // C·ratio = 2·(3/4) ≥ 1: no finite analytic tail
        let spec = lp(0.5);
        let gen = SeriesGenerator::GeometricIndicator {
            base: unit(0, 1),
            ratio: rat(3, 4),
        };
        assert!(matches!(
            riesz_fischer_sum(&spec, &gen, 4),
            Err(Error::GrowthPrecondition(_))
        ));
    }

    #[test]
    fn generator_parsing() {
        match SeriesGenerator::parse("geometric:ratio=0.25").unwrap() {
            SeriesGenerator::GeometricIndicator { ratio, .. } => assert_eq!(ratio, rat(1, 4)),
            other => panic!("wrong generator: {other:?}"),
        }
        match SeriesGenerator::parse("blocks:ratio=1/2").unwrap() {
            SeriesGenerator::DisjointBlocks { height_ratio } => {
                assert_eq!(height_ratio, rat(1, 2))
            }
            other => panic!("wrong generator: {other:?}"),
        }
        assert!(SeriesGenerator::parse("triangular:ratio=1/2").is_err());
        assert!(SeriesGenerator::parse("geometric").is_err());
    }

    #[test]
    fn rapid_subsequence_from_partial_sums() {
        let spec = lp(0.5);
        let gen = SeriesGenerator::GeometricIndicator {
            base: unit(0, 1),
            ratio: rat(1, 4),
        };
        let mut partials = Vec::new();
        let mut sum = StepFunction::zero(1);
        for n in 0..12 {
            sum = sum.add(&gen.term(n).unwrap()).unwrap();
            partials.push(sum.clone());
        }
        let sub = extract_rapid_subsequence(&spec, &partials, 2.0).unwrap();
        assert!(sub.indices.len() >= 3);
        assert!(sub.indices.windows(2).all(|w| w[0] < w[1]));
        for (inc, tau) in sub.increment_norms.iter().zip(&sub.thresholds) {
            assert!(inc <= &(tau * (1.0 + 1e-9)), "increment {inc} > {tau}");
        }
        assert!(sub.telescoping_exact);
    }

    #[test]
    fn rapid_subsequence_rejects_non_cauchy_window() {
        let spec = lp(1.0);
        // alternating far-apart bumps never settle
        let seq: Vec<StepFunction> = (0..8)
            .map(|k| if k % 2 == 0 { unit(0, 1) } else { unit(5, 6) })
            .collect();
        assert!(matches!(
            extract_rapid_subsequence(&spec, &seq, 1.0),
            Err(Error::HorizonExhausted(_, _))
        ));
    }

    #[test]
    fn fatou_truncation_attains_norm() {
        let spec = lp(0.5);
        let f = StepFunction::from_pieces(
            1,
            vec![
                (
                    RatBox::interval(rat_int(0), rat_int(1)).unwrap(),
                    Scalar::from_int(3),
                ),
                (
                    RatBox::interval(rat_int(1), rat_int(3)).unwrap(),
                    Scalar::from_int(1),
                ),
            ],
        )
        .unwrap();
        let report = fatou_monotone_truncation(&spec, &f, 4).unwrap();
        assert!(report.pointwise_monotone);
        assert!(report.nondecreasing);
        assert!(report.attains);
        assert!((report.norms[0] - 3.0).abs() < 1e-12); // window (−1,1) sees only the tall piece
        let last = *report.norms.last().unwrap();
        assert!((last - report.limit_norm).abs() <= 1e-12 * report.limit_norm);
        assert!((report.limit_norm - 13.928203230275509).abs() < 1e-9);
    }

    #[test]
    fn fatou_sliding_bump_gap_is_strict() {
        let spec = lp(1.0);
        let bumps = sliding_bump(8);
        let report = fatou_liminf(&spec, &bumps, &StepFunction::zero(1)).unwrap();
        assert!(report.holds);
        assert!((report.liminf - 1.0).abs() < 1e-12);
        assert_eq!(report.limit_norm, 0.0);
        assert!((report.strict_gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fatou_constant_sequence_is_tight() {
        let spec = lp(0.5);
        let f = unit(0, 2).scale_rat(&rat(7, 3));
        let report = fatou_liminf(&spec, &vec![f.clone(); 6], &f).unwrap();
        assert!(report.holds);
        assert!(report.strict_gap.abs() <= 1e-12 * report.limit_norm);
    }

    #[test]
    fn resonance_thin_spikes_diverge_with_bounded_norm() {
        // L^{1/2}, C = 2: targets n·4^{n+1}, spike integrals n·4^{n+1} + 1
        let spec = lp(0.5);
        let (f, w) = resonance_witness(
            &spec,
            &ResonanceGenerator::CalibratedSpikes,
            &Functional::Integral,
            10,
        )
        .unwrap();
        assert!(w.passed());
        assert!((w.functional_values[1] - 17.0).abs() < 1e-12);
        assert!((w.functional_values[2] - 129.0).abs() < 1e-12);
        for (k, norm_g) in w.generator_norms.iter().enumerate() {
            assert!(*norm_g <= 1.0 + 1e-12, "‖g_{k}‖ = {norm_g}");
            assert!(*norm_g >= 0.5, "calibration too loose at {k}");
        }
        for (k, phi) in w.witness_trace.iter().enumerate() {
            assert!(*phi > k as f64, "Φ(f_{k}) = {phi}");
        }
        // ‖f‖ ≤ Σ 2^{-n-1}‖g_n‖ < 1 even though Φ(f) > 9
        assert!(w.witness_norm <= w.rf_bound * (1.0 + 1e-9));
        assert!(w.rf_bound < 1.0);
        assert!(*w.witness_trace.last().unwrap() > 45.0);
        assert!(!f.is_zero());
    }

    #[test]
    fn resonance_wide_plateaus_for_convex_range() {
        for spec in [lp(2.0), QuasinormSpec::sup()] {
            let (_, w) = resonance_witness(
                &spec,
                &ResonanceGenerator::CalibratedSpikes,
                &Functional::Integral,
                6,
            )
            .unwrap();
            assert!(w.passed(), "{} witness failed", w.norm);
            for (k, phi) in w.witness_trace.iter().enumerate() {
                assert!(*phi > k as f64);
            }
            assert!(w.witness_norm <= w.rf_bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn resonance_refused_when_integral_is_bounded() {
        for spec in [lp(1.0), QuasinormSpec::lorentz(1.0, 0.5).unwrap()] {
            assert!(matches!(
                resonance_witness(
                    &spec,
                    &ResonanceGenerator::CalibratedSpikes,
                    &Functional::Integral,
                    4,
                ),
                Err(Error::GrowthPrecondition(_))
            ));
        }
    }

    #[test]
    fn resonance_constant_generator_fails_rate() {
        let spec = lp(0.5);
        let err = resonance_witness(
            &spec,
            &ResonanceGenerator::Constant(unit(0, 1)),
            &Functional::Integral,
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::GrowthPrecondition(_)));
    }

    #[test]
    fn resonance_pairing_with_explicit_spikes() {
        // Φ(g) = ∫|f₀g| with f₀ = 7χ_{(0,1)}; spikes handed in explicitly,
        // placed inside (0,1) with ∫g_n = n·4^{n+1} + 1
        let spec = lp(0.5);
        let f0 = unit(0, 1).scale_rat(&rat_int(7));
        let prefix = 4usize;
        let mut terms = Vec::new();
        for n in 0..prefix {
            let goal = rat_int(n as i64) * rat_powi(&rat_int(4), n + 1) + Rat::one();
            let mut m = (n as i32) + 2;
            loop {
                let width = two_pow(-m);
                let height = goal.clone() / width.clone();
                let lo = two_pow(-(n as i32) - 1);
                let b = RatBox::interval(lo.clone(), lo + width.clone()).unwrap();
                let g = StepFunction::scaled_indicator(b, Scalar::real(height));
                if spec.eval(&g).unwrap() <= 1.0 {
                    terms.push(g);
                    break;
                }
                m += 1;
            }
        }
        let (_, w) = resonance_witness(
            &spec,
            &ResonanceGenerator::Explicit(terms),
            &Functional::PairingWith(f0),
            prefix,
        )
        .unwrap();
        assert!(w.passed());
        // pairing multiplies every integral by 7
        assert!((w.functional_values[1] - 7.0 * 17.0).abs() < 1e-9);
    }
}
