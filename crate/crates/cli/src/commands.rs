//! One handler per subcommand.

use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use wpset_core::approx::{bpb_minimize, littlewood_ratio, Family, InterpolationProblem};
use wpset_core::riesz::{riesz_partial, RieszParams};
use wpset_core::rrs::{partial_product, RrsParams, Spacing};
use wpset_core::rudinshapiro::{rs_signs, rudin_shapiro_pair, verify_flatness};
use wpset_core::spectra::{
    annihilating_polynomial_check, conv_power_bound_check, idempotent_decompose, perturbed_power_bound_check,
    value_set,
};
use wpset_core::trigcore::{convolve, eval_on_grid, SparseSpectrum};
use wpset_core::witness::{
    block_l2_sum, block_normalization, build_block_plan, l1_mu_distance_to_one, l2_mu_brute_force, l2_mu_closed_form,
    WeightRule,
};
use wpset_core::wpsets::{
    build_set_u, cantor_from_balls, membership_u, AnnulusSeq, Ball, Membership, SetUParams, SetUSpec, Unknown,
};

use crate::artifact::{
    finite, spectrum_from_records, spectrum_records, BracketRecord, CoefficientRecord, ComplexRecord, L1Record,
    PolynomialFile, TowerRecord,
};
use crate::config::{self, SetUConfig};
use crate::error::{invalid, CliError};
use crate::manifest::{ConstantsRecord, Run};
use crate::seqexpr::Sequence;
use crate::{
    BpbArgs, CantorArgs, LittlewoodArgs, RieszArgs, RrsBuildArgs, RrsWitnessArgs, RudinShapiroArgs, SetUBuildArgs,
    SetUMemberArgs, SpacingArg, SpectraCheckArgs, SpectraMode, WeightRuleArg,
};

type Res = Result<(), CliError>;

fn sequence(text: &str) -> Result<Sequence, CliError> {
    text.parse().map_err(|e: crate::seqexpr::ParseError| invalid(e.to_string()))
}

fn read_json<T: for<'de> Deserialize<'de>>(run: &mut Run, role: &str, path: &Path) -> Result<T, CliError> {
    let bytes = run.read_input(role, path)?;
    serde_json::from_slice(&bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct FlatnessRecord {
    unit_coefficients: bool,
    l2_exact: bool,
    grid_size: usize,
    grid_sup: f64,
    sup_bound: f64,
    sup_ok: bool,
    parallelogram_rel_err: f64,
    parallelogram_ok: bool,
}

#[derive(Serialize)]
struct RudinShapiroFile {
    level: u32,
    p: Vec<i8>,
    q: Vec<i8>,
    checks: FlatnessRecord,
}

pub fn rudin_shapiro(args: &RudinShapiroArgs, run: &mut Run) -> Res {
    if args.level > 20 {
        return Err(invalid(format!("level {} exceeds 20", args.level)));
    }
    run.config.oversample = Some(args.oversample);
    let (p, q) = rs_signs(args.level);
    let r = verify_flatness(&rudin_shapiro_pair(args.level), args.oversample)?;
    let file = RudinShapiroFile {
        level: args.level,
        p,
        q,
        checks: FlatnessRecord {
            unit_coefficients: r.unit_coefficients,
            l2_exact: r.l2_exact,
            grid_size: r.grid_size,
            grid_sup: r.grid_sup,
            sup_bound: r.sup_bound,
            sup_ok: r.sup_ok,
            parallelogram_rel_err: r.parallelogram_rel_err,
            parallelogram_ok: r.parallelogram_ok,
        },
    };
    run.write_json("--out", &args.out, &file)
}

#[derive(Serialize)]
struct RieszFile {
    levels: usize,
    a: Vec<f64>,
    n: Vec<String>,
    support: usize,
    /// Minimum of the real part on a grid, when the grid is small enough.
    grid_min: Option<f64>,
    grid_size: Option<usize>,
    coefficients: Vec<CoefficientRecord>,
}

const RIESZ_GRID_MAX: usize = 1 << 22;

pub fn riesz(args: &RieszArgs, run: &mut Run) -> Res {
    let a = sequence(&args.a_spec)?.values(args.levels);
    let n = sequence(&args.n_spec)?
        .integers(args.levels)
        .map_err(|k| invalid(format!("--n-spec is not an integer at k = {k}")))?;
    let params = RieszParams::new(a.clone(), n.clone())?;
    let f = riesz_partial(&params, args.levels)?;
    let deg = f.max_abs_freq();
    let grid = (deg * 2u32 + 1u32) * 8u32;
    let grid_size = usize::try_from(grid).ok().filter(|&m| m <= RIESZ_GRID_MAX).map(|m| m.max(64));
    let grid_min = match grid_size {
        Some(m) => Some(eval_on_grid(&f, m)?.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)),
        None => None,
    };
    let file = RieszFile {
        levels: args.levels,
        a,
        n: n.iter().map(BigInt::to_string).collect(),
        support: f.len(),
        grid_min,
        grid_size,
        coefficients: spectrum_records(&f),
    };
    run.write_json("--out", &args.out, &file)
}

fn rrs_params(eps_spec: &str, n_spec: Option<&str>, levels: usize, spacing: SpacingArg) -> Result<RrsParams, CliError> {
    let eps = sequence(eps_spec)?.values(levels);
    let spacing = match spacing {
        SpacingArg::Separated => Spacing::Separated,
        SpacingArg::Minimal => Spacing::Minimal,
    };
    match n_spec {
        Some(spec) => {
            let n = sequence(spec)?
                .integers(levels)
                .map_err(|k| invalid(format!("--n-spec is not an integer at k = {k}")))?
                .into_iter()
                .map(|x| u32::try_from(x).map_err(|_| invalid("--n-spec values must be small non-negative integers")))
                .collect::<Result<Vec<u32>, CliError>>()?;
            Ok(RrsParams::from_levels_with(eps, n, spacing)?)
        }
        None => Ok(RrsParams::derive_with(&eps, levels, spacing)?),
    }
}

#[derive(Serialize)]
struct RrsFile {
    levels: usize,
    spacing: String,
    eps: Vec<f64>,
    n: Vec<u32>,
    m: Vec<String>,
    r: Vec<String>,
    support: usize,
    l2_norm_sq: f64,
    /// `prod_k (1 + 2^{n_k + 1} eps_k^2)`.
    l2_norm_sq_levels: f64,
    coefficients: Vec<CoefficientRecord>,
}

pub fn rrs_build(args: &RrsBuildArgs, run: &mut Run) -> Res {
    let params = rrs_params(&args.eps_spec, args.n_spec.as_deref(), args.levels, args.spacing)?;
    let f = partial_product(&params, args.levels)?;
    let levels_product = params
        .eps
        .iter()
        .zip(&params.n)
        .map(|(e, &n)| 1.0 + e * e * 2f64.powi(n as i32 + 1))
        .product();
    let file = RrsFile {
        levels: args.levels,
        spacing: format!("{:?}", params.spacing).to_lowercase(),
        eps: params.eps.clone(),
        n: params.n.clone(),
        m: params.m.iter().map(BigInt::to_string).collect(),
        r: params.r.iter().map(BigInt::to_string).collect(),
        support: f.len(),
        l2_norm_sq: f.l2_norm_sq(),
        l2_norm_sq_levels: levels_product,
        coefficients: spectrum_records(&f),
    };
    run.write_json("--out", &args.out, &file)
}

#[derive(Serialize)]
struct WitnessRow {
    k: usize,
    first_level: usize,
    last_level: usize,
    support: usize,
    block_normalization: f64,
    l2_lebesgue: f64,
    l2_mu_closed: f64,
    l2_mu_brute: Option<f64>,
    l1_dist_to_one: Option<f64>,
    mu_levels: usize,
}

pub fn rrs_witness(args: &RrsWitnessArgs, run: &mut Run) -> Res {
    let params = rrs_params(&args.eps_spec, None, args.levels, SpacingArg::Separated)?;
    let rule = match args.rule {
        WeightRuleArg::LeastSquares => WeightRule::LeastSquares { growth: args.growth },
        WeightRuleArg::Uniform => WeightRule::Uniform,
    };
    let plan = build_block_plan(&params, args.blocks, rule)?;
    let mut rows = Vec::with_capacity(args.blocks);
    for (i, block) in plan.blocks.iter().enumerate() {
        let k = i + 1;
        let support: usize = block.levels().map(|l| 1usize << params.n[l - 1]).sum();
        let brute = support <= args.brute_max_support;
        let (l2_mu_brute, l1_dist_to_one) = if brute {
            (
                Some(l2_mu_brute_force(&plan, k, &params, args.levels)?),
                Some(l1_mu_distance_to_one(&plan, k, &params, args.levels)?.distance),
            )
        } else {
            (None, None)
        };
        rows.push(WitnessRow {
            k,
            first_level: block.first,
            last_level: block.last,
            support,
            block_normalization: block_normalization(&plan, k, &params)?,
            l2_lebesgue: block_l2_sum(&plan, k, &params)?,
            l2_mu_closed: l2_mu_closed_form(&plan, k, &params)?,
            l2_mu_brute,
            l1_dist_to_one,
            mu_levels: args.levels,
        });
    }
    run.write_csv("--report", &args.report, &rows)
}

#[derive(Serialize)]
struct PowerRowRecord {
    m: u32,
    power_l1: L1Record,
    bound: Option<f64>,
    bound_padded: Option<f64>,
    margin: Option<f64>,
    holds: bool,
}

#[derive(Serialize)]
struct PowerFile {
    mode: &'static str,
    support: usize,
    values: Vec<ComplexRecord>,
    delta: f64,
    lambda_max: f64,
    idempotent: bool,
    orthogonal: bool,
    reconstructs: bool,
    f_l1: L1Record,
    rows: Vec<PowerRowRecord>,
    all_hold: bool,
}

#[derive(Serialize)]
struct PerturbedFile {
    mode: &'static str,
    m: usize,
    k: u32,
    delta: f64,
    lambda_max: f64,
    eps: f64,
    support_f: usize,
    support_g: usize,
    g_l2: f64,
    g_l2_bound: f64,
    g_l2_ok: bool,
    gamma: f64,
    f_l1: L1Record,
    gamma_norm: f64,
    ln_support: f64,
    c_const: Option<f64>,
    power_l1: L1Record,
    rhs: Option<f64>,
    holds: bool,
}

#[derive(Serialize)]
struct AnnihilateFile {
    mode: &'static str,
    roots: Vec<ComplexRecord>,
    residual: f64,
    exact_zero: bool,
}

pub fn spectra_check(args: &SpectraCheckArgs, run: &mut Run) -> Res {
    let poly: PolynomialFile = read_json(run, "input", &args.input)?;
    let f = spectrum_from_records(&poly.coefficients)?;
    if f.is_empty() {
        return Err(invalid("the input polynomial has no coefficients"));
    }
    run.config.oversample = Some(args.oversample);
    match args.mode {
        SpectraMode::Power => {
            let report = conv_power_bound_check(&f, args.m_max, args.oversample)?;
            let dec = idempotent_decompose(&f);
            let idempotent = dec.idempotents.iter().all(|e| convolve(e, e) == *e);
            let orthogonal = dec
                .idempotents
                .iter()
                .enumerate()
                .all(|(i, e)| dec.idempotents[i + 1..].iter().all(|o| convolve(e, o).is_empty()));
            let reconstructs = dec.reconstruct() == strip_exact(&f);
            let file = PowerFile {
                mode: "power",
                support: f.len(),
                values: report.values.iter().map(|&v| v.into()).collect(),
                delta: report.delta,
                lambda_max: report.lambda_max,
                idempotent,
                orthogonal,
                reconstructs,
                f_l1: report.f_l1.into(),
                all_hold: report.all_hold(),
                rows: report
                    .rows
                    .iter()
                    .map(|r| PowerRowRecord {
                        m: r.m,
                        power_l1: r.power_l1.into(),
                        bound: finite(r.bound),
                        bound_padded: finite(r.bound_padded),
                        margin: finite(r.margin),
                        holds: r.holds,
                    })
                    .collect(),
            };
            run.write_json("--out", &args.out, &file)
        }
        SpectraMode::Perturbed => {
            let lambda = match &args.lambda {
                Some(l) => l.0.clone(),
                None => return Err(invalid("--mode perturbed needs --lambda")),
            };
            let r = perturbed_power_bound_check(&f, &lambda, args.snap_eps, args.k, args.oversample)?;
            let file = PerturbedFile {
                mode: "perturbed",
                m: r.m,
                k: args.k,
                delta: r.delta,
                lambda_max: r.lambda_max,
                eps: r.eps,
                support_f: r.support_f,
                support_g: r.g.len(),
                g_l2: r.g_l2,
                g_l2_bound: r.g_l2_bound,
                g_l2_ok: r.g_l2_ok,
                gamma: r.gamma,
                f_l1: r.f_l1.into(),
                gamma_norm: r.gamma_norm,
                ln_support: r.ln_support,
                c_const: finite(r.c_const),
                power_l1: r.power_l1.into(),
                rhs: finite(r.rhs),
                holds: r.holds,
            };
            run.write_json("--out", &args.out, &file)
        }
        SpectraMode::Annihilate => {
            let values = value_set(&f, 0.0)?;
            let r = annihilating_polynomial_check(&f, &values);
            let file = AnnihilateFile {
                mode: "annihilate",
                roots: r.roots.iter().map(|&v| v.into()).collect(),
                residual: r.residual,
                exact_zero: r.residual == 0.0,
            };
            run.write_json("--out", &args.out, &file)
        }
    }
}

fn strip_exact(f: &SparseSpectrum) -> SparseSpectrum {
    SparseSpectrum::from_pairs(f.iter().map(|(n, c)| (n.clone(), c.value)))
}

#[derive(Serialize)]
struct BpbFile {
    lambda: Vec<String>,
    support: Vec<String>,
    target_eps: f64,
    l1: L1Record,
    iterations: usize,
    converged: bool,
    constraint_residual: f64,
    target_met: bool,
    history: Vec<f64>,
    coefficients: Vec<CoefficientRecord>,
}

pub fn bpb(args: &BpbArgs, run: &mut Run) -> Res {
    let problem = InterpolationProblem::new(args.lambda.0.clone(), args.support.0.clone())?;
    let r = bpb_minimize(&problem, args.eps, args.max_iter, args.tol)?;
    let file = BpbFile {
        lambda: args.lambda.0.iter().map(BigInt::to_string).collect(),
        support: args.support.0.iter().map(BigInt::to_string).collect(),
        target_eps: args.eps,
        l1: r.l1.into(),
        iterations: r.iterations,
        converged: r.converged,
        constraint_residual: r.constraint_residual,
        target_met: r.target_met,
        history: r.history.clone(),
        coefficients: spectrum_records(&r.f),
    };
    run.write_json("--out", &args.out, &file)
}

#[derive(Serialize)]
struct RatioRow {
    n: u64,
    support: usize,
    l1: f64,
    l1_error: f64,
    ratio: f64,
    lower: f64,
    upper: f64,
}

fn log2_exact(n: u64, flag: &str) -> Result<u32, CliError> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(invalid(format!("{flag} = {n} must be a power of two")))
    }
}

pub fn littlewood(args: &LittlewoodArgs, run: &mut Run) -> Res {
    let (lo, hi) = (log2_exact(args.min_n, "--min-n")?, log2_exact(args.max_n, "--max-n")?);
    if lo > hi || hi > 20 {
        return Err(invalid("need --min-n <= --max-n <= 2^20"));
    }
    run.config.oversample = Some(args.oversample);
    let family = match args.family {
        crate::FamilyArg::Dirichlet => Family::Dirichlet,
        crate::FamilyArg::RudinShapiro => Family::RudinShapiro,
    };
    let mut rows = Vec::new();
    for (n, f) in family.members(lo, hi) {
        let r = littlewood_ratio(&f, args.oversample)?;
        rows.push(RatioRow {
            n,
            support: r.support,
            l1: r.l1.value,
            l1_error: r.l1.error_bound,
            ratio: r.ratio,
            lower: r.lower,
            upper: r.upper,
        });
    }
    run.write_csv("--csv", &args.csv, &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct EpsRecord {
    neglog2_eps: TowerRecord,
    neglog2_psi: BracketRecord,
    neglog2_half_inner: BracketRecord,
    below_psi: bool,
    below_half_inner: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RecordedRecord {
    n: usize,
    index: BracketRecord,
    neglog2_outer: BracketRecord,
    neglog2_inner: BracketRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ComponentRecord {
    index: u64,
    neglog2_scale: BracketRecord,
    base: Vec<f64>,
    neglog2_radius: TowerRecord,
    radius_rules: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ChecksRecord {
    eps_rules: bool,
    radius_rules: bool,
    scales_decreasing: bool,
    pairwise_disjoint: bool,
    annulus_avoiding: bool,
    min_pair_gap: Option<TowerRecord>,
    min_annulus_gap: Option<TowerRecord>,
    all_pass: bool,
}

/// Everything about a built set; `set-u member` rebuilds from the parameters and
/// insists on an identical record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SetUFile {
    depth: usize,
    a: f64,
    b: f64,
    #[serde(rename = "K")]
    k: f64,
    annuli: String,
    constants: ConstantsRecord,
    eps: Vec<EpsRecord>,
    recorded: Vec<RecordedRecord>,
    components: Vec<ComponentRecord>,
    neglog2_next_scale: BracketRecord,
    checks: ChecksRecord,
}

fn set_u_record(spec: &SetUSpec, constants: &ConstantsRecord) -> SetUFile {
    let p = &spec.params;
    SetUFile {
        depth: p.depth,
        a: p.a,
        b: p.b,
        k: p.k,
        annuli: "gaussian".into(),
        constants: constants.clone(),
        eps: spec
            .eps
            .iter()
            .map(|e| EpsRecord {
                neglog2_eps: e.neglog2_eps.into(),
                neglog2_psi: e.neglog2_psi.into(),
                neglog2_half_inner: e.neglog2_half_inner.into(),
                below_psi: e.below_psi,
                below_half_inner: e.below_half_inner,
            })
            .collect(),
        recorded: spec
            .recorded
            .iter()
            .map(|r| RecordedRecord {
                n: r.n,
                index: r.index.into(),
                neglog2_outer: r.neglog2_outer.into(),
                neglog2_inner: r.neglog2_inner.into(),
            })
            .collect(),
        components: spec
            .components
            .iter()
            .map(|c| ComponentRecord {
                index: c.index,
                neglog2_scale: c.neglog2_scale.into(),
                base: c.base.clone(),
                neglog2_radius: c.neglog2_radius.into(),
                radius_rules: c.radius_rules,
            })
            .collect(),
        neglog2_next_scale: spec.neglog2_next_scale.into(),
        checks: ChecksRecord {
            eps_rules: spec.checks.eps_rules,
            radius_rules: spec.checks.radius_rules,
            scales_decreasing: spec.checks.scales_decreasing,
            pairwise_disjoint: spec.checks.pairwise_disjoint,
            annulus_avoiding: spec.checks.annulus_avoiding,
            min_pair_gap: spec.checks.min_pair_gap.map(Into::into),
            min_annulus_gap: spec.checks.min_annulus_gap.map(Into::into),
            all_pass: spec.checks.all_pass(),
        },
    }
}

fn annuli(name: Option<&str>) -> Result<AnnulusSeq, CliError> {
    match name.unwrap_or("gaussian") {
        "gaussian" => Ok(AnnulusSeq::Gaussian),
        other => Err(invalid(format!("unknown annulus family {other:?}; only \"gaussian\" is built in"))),
    }
}

pub fn set_u_build(args: &SetUBuildArgs, run: &mut Run, use_env: bool) -> Res {
    let path = config::effective_path(args.config.clone(), use_env);
    let cfg = match &path {
        Some(p) => {
            crate::manifest::set_flag(&mut run.args, "--config", &p.display().to_string());
            run.config.config_path = Some(p.display().to_string());
            config::load(run, p)?
        }
        None => SetUConfig::default(),
    };
    let (consts, record) = config::constants(&cfg.constants)?;
    run.config.constants = Some(record.clone());
    let params = SetUParams {
        a: cfg.a.unwrap_or(config::DEFAULT_A),
        b: cfg.b.unwrap_or(config::DEFAULT_B),
        k: cfg.k.unwrap_or(config::DEFAULT_K),
        consts,
        depth: args.depth,
    };
    let spec = build_set_u(&annuli(cfg.annuli.as_deref())?, &params)?;
    run.write_json("--out", &args.out, &set_u_record(&spec, &record))
}

#[derive(Serialize)]
struct MemberFile {
    z: ComplexRecord,
    result: &'static str,
    component: Option<u64>,
    base: Option<f64>,
    reason: Option<&'static str>,
    depth: usize,
}

pub fn set_u_member(args: &SetUMemberArgs, run: &mut Run) -> Res {
    let file: SetUFile = read_json(run, "spec", &args.spec)?;
    let consts = wpset_core::wpsets::Constants::new(
        file.constants.littlewood,
        file.constants.alpha,
        file.constants.lambda,
    )?;
    run.config.constants = Some(file.constants.clone());
    let params = SetUParams { a: file.a, b: file.b, k: file.k, consts, depth: file.depth };
    let spec = build_set_u(&annuli(Some(&file.annuli))?, &params)?;
    if set_u_record(&spec, &file.constants) != file {
        return Err(invalid(format!("{} does not match the set its parameters build", args.spec.display())));
    }
    let (result, component, base, reason) = match membership_u(args.z, &spec) {
        Membership::In { component, base } => ("in", Some(component), Some(base), None),
        Membership::Out => ("out", None, None, None),
        Membership::Unknown(Unknown::BeyondDepth) => ("unknown", None, None, Some("beyond depth")),
        Membership::Unknown(Unknown::Boundary) => ("unknown", None, None, Some("boundary")),
    };
    println!("{result}");
    let out = MemberFile { z: args.z.into(), result, component, base, reason, depth: file.depth };
    run.write_json("--out", &args.out, &out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BallRecord {
    center: ComplexRecord,
    radius: f64,
}

#[derive(Deserialize)]
struct BallsFile {
    balls: Vec<BallRecord>,
}

#[derive(Serialize)]
struct CantorFile {
    depth: usize,
    balls: Vec<BallRecord>,
    chosen: Vec<usize>,
    generators: Vec<ComplexRecord>,
    points: Vec<ComplexRecord>,
    pairs_checked: usize,
    all_inside: bool,
    worst_margin: f64,
}

pub fn cantor(args: &CantorArgs, run: &mut Run) -> Res {
    let balls: Vec<Ball> = match &args.input {
        Some(path) => {
            let f: BallsFile = read_json(run, "balls", path)?;
            f.balls
                .iter()
                .map(|b| Ball { center: Complex64::new(b.center.re, b.center.im), radius: b.radius })
                .collect()
        }
        None => {
            if !(args.ratio > 0.0 && args.ratio < 1.0 && args.power >= 1.0) {
                return Err(invalid("need 0 < --ratio < 1 and --power >= 1"));
            }
            let dir = Complex64::from_polar(1.0, args.angle);
            (1..=args.count)
                .map(|k| {
                    let c = args.ratio.powi(k as i32);
                    Ball { center: dir * c, radius: c.powf(args.power) }
                })
                .take_while(|b| b.radius > 0.0)
                .collect()
        }
    };
    let approx = cantor_from_balls(&balls, args.depth)?;
    let file = CantorFile {
        depth: args.depth,
        balls: balls.iter().map(|b| BallRecord { center: b.center.into(), radius: b.radius }).collect(),
        chosen: approx.chosen.clone(),
        generators: approx.generators.iter().map(|&g| g.into()).collect(),
        points: approx.points.iter().map(|&p| p.into()).collect(),
        pairs_checked: approx.pairs_checked,
        all_inside: approx.all_inside,
        worst_margin: approx.worst_margin,
    };
    run.write_json("--out", &args.out, &file)
}
