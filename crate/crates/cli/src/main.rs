//! Batch verification runner: every suite and construction as a subcommand
//! with reproducible seeds and machine-readable reports.
//!
//! Exit codes: 0 = all assertions passed, 1 = at least one assertion failed,
//! 2 = usage error (bad flags, bad selectors, malformed files).

use clap::{Args, Parser, Subcommand, ValueEnum};
use qbfs_core::approximation::{approximate_simple, dyadic_cover, CompactDyadicSet};
use qbfs_core::associate::{associate_norm, second_associate_check, SearchClass};
use qbfs_core::dilation::{dilate, empirical_dilation_sweep};
use qbfs_core::quasinorm::{
    check_axioms, disjoint_equal_norm_pair, AxiomCheckConfig, NormKind, QuasinormSpec,
};
use qbfs_core::rearrangement::{distribution_function, radial_rearrangement, rearrangement};
use qbfs_core::report::SuiteReport;
use qbfs_core::sampling::Sampler;
use qbfs_core::scalar::parse_rat;
use qbfs_core::series::{
    resonance_witness, riesz_fischer_sum, Functional, ResonanceGenerator, SeriesGenerator,
};
use qbfs_core::{rat_int, rat_to_f64, Rat, RatBox, StepFunction};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "qbfs",
    version,
    about = "Verification suites for step-function calculus on quasinormed function spaces"
)]
struct Cli {
    /// optional key=value file mirroring the long flags; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite
    #[command(subcommand)]
    Verify(VerifySuite),
    /// Empirical dilation-operator sweep over a grid of scale factors
    DilationSweep(SweepArgs),
    /// Cover sampled compact dyadic sets by same-order cubes inside open unions
    Cover(CoverArgs),
    /// Approximate step functions by dyadic simple functions within 64·eps
    Approximate(ApproxArgs),
    /// Sum a generated series and certify residuals against analytic tails
    RieszFischer(SeriesArgs),
    /// Build a divergence witness from calibrated spikes
    Resonance(ResonanceArgs),
}

#[derive(Subcommand)]
enum VerifySuite {
    /// Quasinorm axioms on sampled step functions
    Axioms(CommonArgs),
    /// Equimeasurability and invariance of the rearrangement
    Rearrangement(CommonArgs),
    /// Associate-norm search: witness tightness and second-associate embedding
    Associate(CommonArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// norm selector: lp:p=<r>, lorentz:p=<r>,q=<r>, sup
    #[arg(long)]
    norm: Option<String>,
    /// seed driving all randomized sampling
    #[arg(long)]
    seed: Option<u64>,
    /// number of sampled inputs
    #[arg(long)]
    samples: Option<usize>,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// report format: json or csv
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// dimension of the sampled functions
    #[arg(long)]
    n: Option<u32>,
    /// scale grid as start:stop:step, rationals or decimals
    #[arg(long = "a-grid")]
    a_grid: Option<String>,
}

#[derive(Args)]
struct CoverArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// dimension of the sampled instances
    #[arg(long)]
    dim: Option<usize>,
    /// minimum cube order
    #[arg(long)]
    k0: Option<i32>,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// target accuracy, rational or decimal
    #[arg(long)]
    eps: Option<String>,
    /// approximate this step function (JSON file) instead of sampled ones
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// term source: geometric:ratio=<r> or blocks:ratio=<r>
    #[arg(long)]
    generator: Option<String>,
    /// number of terms summed exactly
    #[arg(long)]
    prefix: Option<usize>,
}

#[derive(Args)]
struct ResonanceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// number of generator terms
    #[arg(long)]
    prefix: Option<usize>,
}

struct CliError(String);

fn usage(msg: impl Into<String>) -> CliError {
    CliError(msg.into())
}

impl From<qbfs_core::Error> for CliError {
    fn from(e: qbfs_core::Error) -> Self {
        CliError(e.to_string())
    }
}

struct Ctx {
    cfg: BTreeMap<String, String>,
}

impl Ctx {
    fn pick<T: FromStr>(&self, cli: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(v),
            None => match self.cfg.get(key) {
                Some(raw) => raw
                    .parse()
                    .map_err(|e| usage(format!("config {key}={raw}: {e}"))),
                None => Ok(default),
            },
        }
    }

    fn pick_opt<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => match self.cfg.get(key) {
                Some(raw) => raw
                    .parse()
                    .map(Some)
                    .map_err(|e| usage(format!("config {key}={raw}: {e}"))),
                None => Ok(None),
            },
        }
    }
}

struct Resolved {
    spec: QuasinormSpec,
    seed: u64,
    samples: usize,
    out: Option<PathBuf>,
    format: Format,
}

fn resolve_common(ctx: &Ctx, args: &CommonArgs) -> Result<Resolved, CliError> {
    let selector = ctx.pick(args.norm.clone(), "norm", "lp:p=0.5".to_string())?;
    let spec = QuasinormSpec::parse(&selector)?;
    Ok(Resolved {
        spec,
        seed: ctx.pick(args.seed, "seed", 7)?,
        samples: ctx.pick(args.samples, "samples", 100)?,
        out: ctx.pick_opt(args.out.clone(), "out")?,
        format: ctx.pick(args.format, "format", Format::Json)?,
    })
}

fn load_config(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", lineno + 1)))?;
        cfg.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(cfg)
}

fn parse_rat_flag(raw: &str, what: &str) -> Result<Rat, CliError> {
    parse_rat(raw).ok_or_else(|| usage(format!("{what}: `{raw}` is not a rational")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.0);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let ctx = Ctx {
        cfg: match &cli.config {
            Some(p) => load_config(p)?,
            None => BTreeMap::new(),
        },
    };
    let (report, resolved) = match &cli.cmd {
        Command::Verify(VerifySuite::Axioms(a)) => {
            let r = resolve_common(&ctx, a)?;
            (suite_axioms(&r)?, r)
        }
        Command::Verify(VerifySuite::Rearrangement(a)) => {
            let r = resolve_common(&ctx, a)?;
            (suite_rearrangement(&r)?, r)
        }
        Command::Verify(VerifySuite::Associate(a)) => {
            let r = resolve_common(&ctx, a)?;
            (suite_associate(&r)?, r)
        }
        Command::DilationSweep(a) => {
            let r = resolve_common(&ctx, &a.common)?;
            let n = ctx.pick(a.n, "n", 1u32)?;
            let grid = ctx.pick(a.a_grid.clone(), "a-grid", "0.1:1.0:0.1".to_string())?;
            (suite_dilation(&r, n, &grid)?, r)
        }
        Command::Cover(a) => {
            let r = resolve_common(&ctx, &a.common)?;
            let dim = ctx.pick(a.dim, "dim", 1usize)?;
            let k0 = ctx.pick(a.k0, "k0", 1i32)?;
            (suite_cover(&r, dim, k0)?, r)
        }
        Command::Approximate(a) => {
            let r = resolve_common(&ctx, &a.common)?;
            let eps_raw = ctx.pick(a.eps.clone(), "eps", "1/64".to_string())?;
            let eps = parse_rat_flag(&eps_raw, "--eps")?;
            let input = ctx.pick_opt(a.input.clone(), "input")?;
            (suite_approximate(&r, &eps, input.as_ref())?, r)
        }
        Command::RieszFischer(a) => {
            let r = resolve_common(&ctx, &a.common)?;
            let gen_raw = ctx.pick(
                a.generator.clone(),
                "generator",
                "geometric:ratio=0.25".to_string(),
            )?;
            let prefix = ctx.pick(a.prefix, "prefix", 20usize)?;
            (suite_series(&r, &gen_raw, prefix)?, r)
        }
        Command::Resonance(a) => {
            let r = resolve_common(&ctx, &a.common)?;
            let prefix = ctx.pick(a.prefix, "prefix", 10usize)?;
            (suite_resonance(&r, prefix)?, r)
        }
    };

    let text = match resolved.format {
        Format::Json => report.to_json_string(),
        Format::Csv => report.to_csv_string(),
    };
    match &resolved.out {
        Some(p) => fs::write(p, &text)
            .map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    eprintln!("{}", report.summary());
    Ok(report.exit_code())
}

const TOL: f64 = 1e-9;

fn suite_axioms(r: &Resolved) -> Result<SuiteReport, CliError> {
    let mut s = Sampler::new(r.seed);
    let samples: Vec<StepFunction> = (0..r.samples).map(|_| s.step_function(1, 3)).collect();
    let pinned = [disjoint_equal_norm_pair()];
    let ax = check_axioms(&r.spec, &samples, &pinned, &AxiomCheckConfig::default())?;
    let mut out = SuiteReport::new(format!("axioms[{}]", r.spec.name), r.seed, r.samples);
    out.push(
        "axioms/concavity",
        "empirical triangle constant within the stored modulus",
        ax.empirical_concavity <= ax.stored_concavity + TOL,
        ax.stored_concavity - ax.empirical_concavity,
        format!(
            "empirical C = {}, stored C = {}",
            ax.empirical_concavity, ax.stored_concavity
        ),
    );
    out.push(
        "axioms/homogeneity",
        "norm scales exactly with |c|",
        ax.homogeneity_worst_rel <= TOL,
        TOL - ax.homogeneity_worst_rel,
        format!("worst relative drift {}", ax.homogeneity_worst_rel),
    );
    out.push(
        "axioms/definiteness",
        "norm vanishes exactly on the zero function",
        ax.definiteness_ok,
        if ax.definiteness_ok { 1.0 } else { -1.0 },
        "",
    );
    out.push(
        "axioms/lattice",
        "pointwise domination implies norm domination",
        ax.lattice_ok,
        if ax.lattice_ok { 1.0 } else { -1.0 },
        "",
    );
    out.push(
        "axioms/monotone-limit",
        "norms of increasing truncations climb to the norm",
        ax.monotone_limit_ok,
        if ax.monotone_limit_ok { 1.0 } else { -1.0 },
        "",
    );
    out.push(
        "axioms/indicators-finite",
        "indicators of finite boxes have finite norm",
        ax.indicator_norms_finite,
        if ax.indicator_norms_finite { 1.0 } else { -1.0 },
        "",
    );
    for (i, f) in ax.failures.iter().enumerate() {
        out.push(
            format!("axioms/failure/{i:04}"),
            f.axiom.clone(),
            false,
            -1.0,
            f.detail.clone(),
        );
    }
    Ok(out)
}

fn suite_rearrangement(r: &Resolved) -> Result<SuiteReport, CliError> {
    let mut s = Sampler::new(r.seed);
    let mut shuffler = Sampler::new(r.seed ^ 0xa5a5);
    let mut equimeasurable = 0usize;
    let mut radial_ok = 0usize;
    let mut radial_total = 0usize;
    let mut shuffle_ok = 0usize;
    let mut first_failure = String::new();
    for i in 0..r.samples {
        let dim = 1 + (i % 2);
        let f = s.step_function(dim, 3);
        let star = rearrangement(&f)?;
        let d_f = distribution_function(&f)?;
        let d_star = distribution_function(&star.to_step())?;
        if d_f.breakpoints() == d_star.breakpoints() && d_f.values() == d_star.values() {
            equimeasurable += 1;
        } else if first_failure.is_empty() {
            first_failure = format!("sample {i}: profile of f* differs from profile of |f|");
        }
        if dim == 1 {
            radial_total += 1;
            let radial = radial_rearrangement(&f)?.to_step_1d()?;
            let again = rearrangement(&radial)?;
            if again.breakpoints() == star.breakpoints() && again.values() == star.values() {
                radial_ok += 1;
            }
        }
        let mut order: Vec<usize> = (0..f.pieces().len()).collect();
        shuffler.shuffle(&mut order);
        let mut cursor = rat_int(0);
        let mut moved = Vec::with_capacity(order.len());
        for &j in &order {
            let (b, v) = &f.pieces()[j];
            let mut sides = b.sides().to_vec();
            let w = &sides[0].1 - &sides[0].0;
            sides[0] = (cursor.clone(), &cursor + &w);
            cursor = &cursor + &w + rat_int(1);
            moved.push((RatBox::new(sides)?, v.clone()));
        }
        let relocated = StepFunction::from_pieces(f.dim(), moved)?;
        let relocated_star = rearrangement(&relocated)?;
        if relocated_star.breakpoints() == star.breakpoints()
            && relocated_star.values() == star.values()
        {
            shuffle_ok += 1;
        }
    }
    let mut out = SuiteReport::new("rearrangement", r.seed, r.samples);
    out.push(
        "rearrangement/equimeasurable",
        "f* and |f| share their distribution, exactly",
        equimeasurable == r.samples,
        (equimeasurable as f64) - (r.samples as f64),
        first_failure,
    );
    out.push(
        "rearrangement/radial-realization",
        "realizing the radial profile preserves the rearrangement",
        radial_ok == radial_total,
        (radial_ok as f64) - (radial_total as f64),
        format!("{radial_ok}/{radial_total} one-dimensional samples"),
    );
    out.push(
        "rearrangement/relocation",
        "moving pieces to disjoint slots preserves the profile",
        shuffle_ok == r.samples,
        (shuffle_ok as f64) - (r.samples as f64),
        "",
    );
    Ok(out)
}

fn suite_associate(r: &Resolved) -> Result<SuiteReport, CliError> {
    let mut s = Sampler::new(r.seed);
    let class = SearchClass::default();
    let mut witness_worst: f64 = 0.0;
    let mut embed_worst: f64 = f64::NEG_INFINITY;
    let mut ok_witness = true;
    let mut ok_embed = true;
    for _ in 0..r.samples {
        let f = s.step_function(1, 2);
        let est = associate_norm(&r.spec, &f, &class)?;
        if let Some(pairing) = &est.witness_pairing {
            let g_norm = r.spec.eval(&est.witness)?;
            let slack = (rat_to_f64(pairing) - g_norm * est.value).abs();
            witness_worst = witness_worst.max(slack);
            if slack > TOL * rat_to_f64(pairing).max(1.0) {
                ok_witness = false;
            }
        }
        let check = second_associate_check(&r.spec, &f, &class)?;
        let excess = check.second_norm - check.x_norm;
        embed_worst = embed_worst.max(excess);
        if !check.embedding_holds(TOL) {
            ok_embed = false;
        }
    }
    let mut out = SuiteReport::new(format!("associate[{}]", r.spec.name), r.seed, r.samples);
    out.push(
        "associate/witness-tightness",
        "pairing attains ||g||·S at the search witness",
        ok_witness,
        TOL - witness_worst,
        format!("worst witness slack {witness_worst}"),
    );
    out.push(
        "associate/second-embedding",
        "searched second associate stays below the norm",
        ok_embed,
        -embed_worst,
        format!("worst excess {embed_worst}"),
    );
    Ok(out)
}

fn parse_grid(raw: &str) -> Result<Vec<Rat>, CliError> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--a-grid `{raw}`: expected start:stop:step")));
    }
    let start = parse_rat_flag(parts[0], "--a-grid start")?;
    let stop = parse_rat_flag(parts[1], "--a-grid stop")?;
    let step = parse_rat_flag(parts[2], "--a-grid step")?;
    if step <= rat_int(0) || stop < start {
        return Err(usage(format!("--a-grid `{raw}`: empty or backwards range")));
    }
    let mut grid = Vec::new();
    let mut cur = start;
    while cur <= stop {
        grid.push(cur.clone());
        cur += step.clone();
    }
    Ok(grid)
}

fn suite_dilation(r: &Resolved, n: u32, grid_raw: &str) -> Result<SuiteReport, CliError> {
    if n == 0 || n > 3 {
        return Err(usage(format!("--n must be 1..=3, got {n}")));
    }
    let grid = parse_grid(grid_raw)?;
    let mut s = Sampler::new(r.seed);
    let samples: Vec<StepFunction> = (0..r.samples)
        .map(|_| s.step_function(n as usize, 3))
        .collect();
    let sweep = empirical_dilation_sweep(&r.spec, &samples, &grid)?;
    let mut out = SuiteReport::new(format!("dilation[{}]", r.spec.name), r.seed, r.samples);
    for pt in &sweep {
        out.push(
            format!("dilation/a={}", pt.a),
            "worst dilation ratio stays below the analytic bound",
            pt.worst_ratio <= pt.bound + TOL,
            pt.bound - pt.worst_ratio,
            format!("ratio {} vs bound {}", pt.worst_ratio, pt.bound),
        );
    }
    let monotone = sweep
        .windows(2)
        .all(|w| w[1].worst_ratio <= w[0].worst_ratio * (1.0 + TOL) + TOL);
    out.push(
        "dilation/monotone",
        "worst ratio is non-increasing in the scale",
        monotone,
        if monotone { 1.0 } else { -1.0 },
        "",
    );
    if let NormKind::Lp { p } = r.spec.kind {
        let mut worst = 0.0f64;
        for f in samples.iter().take(20) {
            let base = r.spec.eval(f)?;
            for a in &grid {
                let lhs = r.spec.eval(&dilate(f, a)?)?;
                let rhs = rat_to_f64(a).powf(-(n as f64) / p) * base;
                worst = worst.max((lhs - rhs).abs() / rhs.max(1e-300));
            }
        }
        out.push(
            "dilation/lp-closed-form",
            "pipeline matches a^{-n/p}·||f||_p",
            worst <= 1e-10,
            1e-10 - worst,
            format!("worst relative error {worst}"),
        );
    }
    Ok(out)
}

fn suite_cover(r: &Resolved, dim: usize, k0: i32) -> Result<SuiteReport, CliError> {
    if dim == 0 || dim > 3 {
        return Err(usage(format!("--dim must be 1..=3, got {dim}")));
    }
    let mut s = Sampler::new(r.seed);
    let mut out = SuiteReport::new("cover", r.seed, r.samples);
    for i in 0..r.samples {
        let (k_boxes, g_boxes, eps) = s.cover_instance(dim);
        let compact = CompactDyadicSet::from_boxes(k_boxes)?;
        match dyadic_cover(&compact, &g_boxes, &eps, k0) {
            Ok(cover) => {
                let margin = rat_to_f64(&eps) - rat_to_f64(&cover.outer_excess);
                out.push(
                    format!("cover/{i:04}"),
                    "cubes cover K inside G with excess below eps",
                    cover.outer_excess < eps && cover.order >= k0,
                    margin,
                    format!(
                        "order {} cubes {} excess {}",
                        cover.order, cover.cube_count, cover.outer_excess
                    ),
                );
            }
            Err(e) => out.push(
                format!("cover/{i:04}"),
                "cubes cover K inside G with excess below eps",
                false,
                -1.0,
                e.to_string(),
            ),
        }
    }
    Ok(out)
}

fn suite_approximate(
    r: &Resolved,
    eps: &Rat,
    input: Option<&PathBuf>,
) -> Result<SuiteReport, CliError> {
    if !r.spec.is_absolutely_continuous() {
        return Err(usage(format!(
            "{}: approximation requires an absolutely continuous norm",
            r.spec.name
        )));
    }
    let inputs: Vec<StepFunction> = match input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            vec![StepFunction::from_json_str(&text)?]
        }
        None => {
            let mut s = Sampler::new(r.seed);
            (0..r.samples).map(|_| s.step_function(1, 3)).collect()
        }
    };
    let eps_f = rat_to_f64(eps);
    let mut out = SuiteReport::new(format!("approximate[{}]", r.spec.name), r.seed, inputs.len());
    for (i, f) in inputs.iter().enumerate() {
        match approximate_simple(&r.spec, f, eps) {
            Ok(approx) => {
                let t = &approx.trace;
                let budget = t.certified_factor * eps_f;
                let terms_ok = t
                    .terms
                    .iter()
                    .all(|term| term.weighted <= term.weight * eps_f * (1.0 + TOL));
                out.push(
                    format!("approximate/{i:04}"),
                    "measured error within the certified multiple of eps",
                    t.within_certificate() && terms_ok,
                    budget - t.measured,
                    format!(
                        "measured {} budget {} cover order {}",
                        t.measured, budget, t.cover_order
                    ),
                );
            }
            Err(e) => out.push(
                format!("approximate/{i:04}"),
                "measured error within the certified multiple of eps",
                false,
                -1.0,
                e.to_string(),
            ),
        }
    }
    Ok(out)
}

fn suite_series(r: &Resolved, gen_raw: &str, prefix: usize) -> Result<SuiteReport, CliError> {
    let gen = SeriesGenerator::parse(gen_raw)?;
    let (_, cert) = riesz_fischer_sum(&r.spec, &gen, prefix)?;
    let mut out = SuiteReport::new(format!("series[{}]", r.spec.name), r.seed, prefix);
    out.push(
        "series/weighted-prefix",
        "weighted prefix sum plus analytic tail is finite",
        cert.weighted_prefix_sum.is_finite() && cert.weighted_tail_bound.is_finite(),
        cert.weighted_tail_bound,
        format!(
            "prefix {} tail {}",
            cert.weighted_prefix_sum, cert.weighted_tail_bound
        ),
    );
    out.push(
        "series/abs-monotone",
        "partial sums of |x_n| increase pointwise and in norm",
        cert.abs_monotone,
        if cert.abs_monotone { 1.0 } else { -1.0 },
        "",
    );
    let mut residual_margin = f64::INFINITY;
    for e in &cert.residuals {
        if let Some(m) = e.measured {
            residual_margin = residual_margin.min(e.tail_bound - m);
        }
    }
    out.push(
        "series/residuals-below-tail",
        "every logged residual sits below its analytic tail",
        cert.failures.iter().all(|f| !f.contains("residual")),
        if residual_margin.is_finite() {
            residual_margin
        } else {
            0.0
        },
        format!("worst margin {residual_margin}"),
    );
    out.push(
        "series/converges",
        "certificate reports convergence with no violations",
        cert.converges,
        if cert.converges { 1.0 } else { -1.0 },
        cert.failures.join("; "),
    );
    Ok(out)
}

fn suite_resonance(r: &Resolved, prefix: usize) -> Result<SuiteReport, CliError> {
    let (_, w) = resonance_witness(
        &r.spec,
        &ResonanceGenerator::CalibratedSpikes,
        &Functional::Integral,
        prefix,
    )?;
    let mut out = SuiteReport::new(format!("resonance[{}]", r.spec.name), r.seed, prefix);
    for (k, phi) in w.witness_trace.iter().enumerate() {
        out.push(
            format!("resonance/prefix-{k:03}"),
            "functional on the witness exceeds the prefix index",
            *phi > k as f64,
            phi - k as f64,
            format!("phi = {phi}"),
        );
    }
    out.push(
        "resonance/domination",
        "witness dominates every scaled generator pointwise",
        w.pointwise_domination,
        if w.pointwise_domination { 1.0 } else { -1.0 },
        "",
    );
    out.push(
        "resonance/norm-bounded",
        "witness norm stays inside the iterated bound",
        w.witness_norm <= w.rf_bound * (1.0 + TOL),
        w.rf_bound - w.witness_norm,
        format!("norm {} bound {}", w.witness_norm, w.rf_bound),
    );
    Ok(out)
}
