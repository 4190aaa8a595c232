//! Named check suites shared by the command line and the test harness.
//!
//! A suite runs a fixed list of residual checks, each with an expected
//! verdict (some checks exist to demonstrate a failure), and optionally
//! the λ classification and triviality verdict of a structure.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::examples::{
    example_euclidean_claimed_conformal, example_euclidean_conformal_corrected, example_euclidean_gradient,
    example_neg_m_sphere, example_pseudo_hyperbolic, example_space_form, ConformalExample, ExampleId, ExampleSpec,
    PseudoH, PseudoHyperbolic,
};
use crate::expr::{parse_expression, Expr, ParameterBinding};
use crate::geometry::random::{random_metric, random_scalar, random_sym, random_vector, DEFAULT_EPSILON};
use crate::geometry::{
    bianchi_residual, d_scalar_on, div_hessian_residual, div_product_residual, gradient_norm_residual, hessian,
    lemma21_residual, lie_hessian_residual, metric_compatibility_residual, nabla_product_residual, ricci,
    sample_points, MetricField, PointSample, SymTensorField,
};
use crate::report::{evaluate_residual, pointwise, Residual, ResidualReport};
use crate::soliton::{
    classify_lambda, conformal_factor_hessian_check, conformal_killing_check, conformal_potential_residual,
    derived_fields, divric_chain_residuals, divric_identity_residual, eqpprinc_residual, form_check,
    gradient_equivalence_residual, gradient_soliton_residual, lambda_summary, mu_expression, mu_field,
    potential_from_factor, soliton_residual, trace_identity_residual, traceless_inner_residual, triviality_check,
    Classification, HForm, SolitonStructure, LAMBDA_CONSTANT_SPREAD,
};
use crate::spaces::{height_function, last_axis, make_sphere, oneill_ricci};

/// Sampling and tolerance settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            points: 200,
            seed: 42,
            tol: 1e-8,
        }
    }
}

/// A report and the verdict it is supposed to reach.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub report: ResidualReport,
    pub expected: bool,
}

impl CheckOutcome {
    pub fn realized(&self) -> bool {
        self.report.pass == self.expected
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutcome {
    pub name: String,
    pub checks: Vec<CheckOutcome>,
    pub classification: Option<Classification>,
    pub expected_classification: Option<Classification>,
    pub trivial: Option<bool>,
    pub expected_trivial: Option<bool>,
    /// Homothety constant estimate from the triviality check.
    pub homothety: Option<f64>,
}

impl SuiteOutcome {
    fn new(name: &str) -> SuiteOutcome {
        SuiteOutcome {
            name: name.to_string(),
            ..Default::default()
        }
    }

    fn expect(&mut self, report: ResidualReport, expected: bool) {
        self.checks.push(CheckOutcome { report, expected });
    }

    /// Every check, the classification and the triviality verdict came out
    /// as expected.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(CheckOutcome::realized)
            && (self.expected_classification.is_none() || self.classification == self.expected_classification)
            && (self.expected_trivial.is_none() || self.trivial == self.expected_trivial)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.report.name == name)
    }
}

/// Samples admissible points for a structure.
pub fn structure_points(s: &SolitonStructure, opts: &CheckOptions) -> Result<Vec<PointSample>> {
    sample_points(
        s.metric().chart(),
        Some(s.metric()),
        s.binding(),
        opts.points,
        opts.seed,
    )
}

/// `(λ − min λ) / max|λ|` per point: the sup is the relative spread, so the
/// report passes exactly when λ counts as constant.
pub fn lambda_constancy(s: &SolitonStructure, points: &[PointSample]) -> Result<ResidualReport> {
    let vals: Vec<f64> = crate::report::sample_values(std::slice::from_ref(s.lambda()), s.binding(), points)?
        .iter()
        .map(|r| r[0])
        .collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let res = vals
        .iter()
        .map(|v| if scale < 1e-14 { 0.0 } else { (v - lo) / scale })
        .collect();
    Ok(s.annotate(ResidualReport::from_values(
        "lambda-constant",
        points,
        res,
        LAMBDA_CONSTANT_SPREAD,
    )))
}

/// Classification and triviality for a structure.
pub fn classify_structure(
    s: &SolitonStructure,
    points: &[PointSample],
    out: &mut SuiteOutcome,
    tol: f64,
) -> Result<()> {
    out.classification = Some(classify_lambda(s, points)?);
    let t = triviality_check(s, points, tol)?;
    out.trivial = Some(t.trivial);
    out.homothety = Some(t.homothety);
    Ok(())
}

/// The soliton structure an example id describes. Conformal-field ids have
/// no structure.
pub fn example_structure(spec: &ExampleSpec) -> Result<SolitonStructure> {
    match spec.id {
        ExampleId::SpaceFormGradient => {
            example_space_form(spec.get("c"), spec.dim("n")?, spec.get("m"), spec.get("tau"))
        }
        ExampleId::EuclideanGradient => example_euclidean_gradient(spec.dim("n")?, spec.get("m"), spec.get("tau")),
        ExampleId::PseudoHyperbolic => Ok(pseudo_hyperbolic(spec)?.structure),
        ExampleId::NegMSphere => example_neg_m_sphere(spec.dim("n")?, spec.get("m"), spec.get("a"), spec.get("b")),
        ExampleId::EuclideanConformalClaimed | ExampleId::EuclideanConformalCorrected => Err(Error::invalid(format!(
            "example {} is a vector field, not a soliton structure",
            spec.id
        ))),
    }
}

pub fn pseudo_hyperbolic(spec: &ExampleSpec) -> Result<PseudoHyperbolic> {
    let h = match &spec.h {
        None => PseudoH::NegMOverU(spec.get("m")),
        Some(text) => PseudoH::Function(parse_expression(text, &["t"], &[])?),
    };
    example_pseudo_hyperbolic(spec.dim("n")?, spec.get("k"), spec.get("a"), spec.get("l"), h)
}

/// Runs the declared check suite of an example.
pub fn run_example(spec: &ExampleSpec, opts: &CheckOptions) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new(spec.id.as_str());
    let tol = opts.tol;
    match spec.id {
        ExampleId::EuclideanConformalClaimed | ExampleId::EuclideanConformalCorrected => {
            let n = spec.dim("n")?;
            let ex = if spec.id == ExampleId::EuclideanConformalClaimed {
                example_euclidean_claimed_conformal(n)?
            } else {
                example_euclidean_conformal_corrected(n)?
            };
            conformal_suite(&ex, opts, &mut out)?;
            return Ok(out);
        }
        _ => {}
    }
    let s = example_structure(spec)?;
    let pts = structure_points(&s, opts)?;
    out.expect(gradient_soliton_residual(&s, &pts, tol)?, true);
    out.expect(soliton_residual(&s, &pts, tol)?, true);
    out.expect(gradient_equivalence_residual(&s, &pts, tol)?, true);
    out.expect(trace_identity_residual(&s, &pts, tol)?, true);
    if s.form() != HForm::Free {
        out.expect(form_check(&s, &pts, tol)?, true);
    }
    match spec.id {
        ExampleId::SpaceFormGradient => {
            out.expect(divric_identity_residual(&s, &pts, tol)?, true);
            // X = ∇u is conformal with factor ρ = (λ − R/n)/h
            let rho = derived_fields(&s)?.rho;
            out.expect(
                conformal_factor_hessian_check(s.metric(), &rho, s.binding(), &pts, tol)?,
                true,
            );
            out.expect(lambda_constancy(&s, &pts)?, false);
            out.expected_trivial = Some(false);
        }
        ExampleId::EuclideanGradient => {
            out.expect(divric_identity_residual(&s, &pts, tol)?, true);
            out.expect(lambda_constancy(&s, &pts)?, false);
            let m = spec.get("m");
            out.expected_classification = Some(if m > 0.0 {
                Classification::Shrinking
            } else {
                Classification::Expanding
            });
            // ∇u = 2x is homothetic: L_X g = 4g
            out.expected_trivial = Some(true);
        }
        ExampleId::PseudoHyperbolic => {
            let ph = pseudo_hyperbolic(spec)?;
            pseudo_hyperbolic_checks(spec, &ph, &pts, tol, &mut out)?;
            out.expected_trivial = Some(false);
        }
        ExampleId::NegMSphere => {
            out.expect(eqpprinc_residual(&s, &pts, tol)?, true);
            out.expect(lambda_constancy(&s, &pts)?, spec.get("a") == 0.0);
            out.expected_trivial = Some(spec.get("a") == 0.0);
        }
        _ => unreachable!(),
    }
    classify_structure(&s, &pts, &mut out, tol)?;
    Ok(out)
}

fn pseudo_hyperbolic_checks(
    spec: &ExampleSpec,
    ph: &PseudoHyperbolic,
    pts: &[PointSample],
    tol: f64,
    out: &mut SuiteOutcome,
) -> Result<()> {
    let s = &ph.structure;
    let g = s.metric();
    let k = ph.profile.k;
    let l = ph.profile.l;
    let u = s.potential().expect("gradient");
    let hess = hessian(g, u);
    let eig = SymTensorField::from_fn(g.dim(), |i, j| hess.get(i, j) + k * u * g.get(i, j));
    out.expect(s.check("potential-hessian", pts, &Residual::Sym(eig), tol)?, true);
    let f = &ph.profile.f;
    let df = g.partial(f, 0);
    let conserved = df.powi(2) + k * f.powi(2) + l;
    out.expect(
        s.check("profile-identity", pts, &Residual::Scalar(conserved), tol)?,
        true,
    );
    if let HForm::NegMOverU(m) = s.form() {
        out.expect(lambda_constancy(s, pts)?, true);
        let mu = mu_field(s, pts, tol)?;
        out.expect(mu.report, true);
        // closed form μ = −(m−1) k l
        let expected = -(m - 1.0) * k * l;
        let r = mu_expression(s)? - expected;
        out.expect(s.check("mu-closed-form", pts, &Residual::Scalar(r), tol)?, true);
        out.expect(eqpprinc_residual(s, pts, tol)?, true);
        out.expected_classification = Some(Classification::of_values(&[(spec.dim("n")? as f64 + m - 1.0) * k]));
    }
    Ok(())
}

fn conformal_suite(ex: &ConformalExample, opts: &CheckOptions, out: &mut SuiteOutcome) -> Result<()> {
    let b = ParameterBinding::new();
    let g = &ex.metric;
    let pts = sample_points(g.chart(), Some(g), &b, opts.points, opts.seed)?;
    let v = conformal_killing_check(g, &ex.field, &b, &pts, opts.tol)?;
    out.expect(v.traceless, ex.expect_conformal);
    let closed = v.s_ring.sub(&ex.expected_traceless);
    let ctol = opts.tol.min(1e-10);
    out.expect(
        evaluate_residual(
            "traceless-closed-form",
            g,
            &b,
            &pts,
            &Residual::Components(closed.components().to_vec()),
            ctol,
        )?,
        true,
    );
    let rho = crate::geometry::divergence_vector(g, &ex.field)? / g.dim() as f64 - &ex.expected_rho;
    out.expect(
        evaluate_residual("rho-closed-form", g, &b, &pts, &Residual::Scalar(rho), ctol)?,
        true,
    );
    Ok(())
}

/// Identity suites runnable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityName {
    Bianchi,
    FgFormulas,
    Lemma21,
    Divric,
    Eqpprinc,
    MuConst,
    ConformalFactor,
    Oneill,
}

impl IdentityName {
    pub const ALL: [IdentityName; 8] = [
        IdentityName::Bianchi,
        IdentityName::FgFormulas,
        IdentityName::Lemma21,
        IdentityName::Divric,
        IdentityName::Eqpprinc,
        IdentityName::MuConst,
        IdentityName::ConformalFactor,
        IdentityName::Oneill,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IdentityName::Bianchi => "bianchi",
            IdentityName::FgFormulas => "fg-formulas",
            IdentityName::Lemma21 => "lemma21",
            IdentityName::Divric => "divric",
            IdentityName::Eqpprinc => "eqpprinc",
            IdentityName::MuConst => "mu-const",
            IdentityName::ConformalFactor => "conformal-factor",
            IdentityName::Oneill => "oneill",
        }
    }

    /// Whether the suite runs on random metrics rather than an example.
    pub fn is_universal(&self) -> bool {
        matches!(
            self,
            IdentityName::Bianchi | IdentityName::FgFormulas | IdentityName::Lemma21
        )
    }

    /// Example used when none is given.
    pub fn default_example(&self) -> Option<ExampleId> {
        match self {
            IdentityName::Divric => Some(ExampleId::EuclideanGradient),
            IdentityName::Eqpprinc => Some(ExampleId::NegMSphere),
            IdentityName::MuConst | IdentityName::Oneill => Some(ExampleId::PseudoHyperbolic),
            _ => None,
        }
    }
}

impl fmt::Display for IdentityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityName {
    type Err = Error;

    fn from_str(s: &str) -> Result<IdentityName> {
        IdentityName::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown identity `{s}`")))
    }
}

/// Perturbed metric number `i` of a random-identity run, with its fields.
pub struct RandomInstance {
    pub metric: MetricField,
    pub phi: Expr,
    pub t: SymTensorField,
    pub z: crate::geometry::VectorField,
    pub points: Vec<PointSample>,
}

pub fn random_instance(seed: u64, n: usize, points: usize) -> Result<RandomInstance> {
    let metric = random_metric(seed, n, DEFAULT_EPSILON)?;
    let pts = sample_points(metric.chart(), Some(&metric), &ParameterBinding::new(), points, seed)?;
    Ok(RandomInstance {
        phi: random_scalar(seed, n),
        t: random_sym(seed, n),
        z: random_vector(seed, n),
        points: pts,
        metric,
    })
}

/// Concatenates per-metric residuals into one report per check name.
struct Pooled {
    names: Vec<String>,
    points: Vec<Vec<PointSample>>,
    values: Vec<Vec<f64>>,
}

impl Pooled {
    fn new(names: &[&str]) -> Pooled {
        Pooled {
            names: names.iter().map(|s| s.to_string()).collect(),
            points: vec![Vec::new(); names.len()],
            values: vec![Vec::new(); names.len()],
        }
    }

    fn add(&mut self, idx: usize, g: &MetricField, pts: &[PointSample], r: &Residual) -> Result<()> {
        let v = pointwise(g, &ParameterBinding::new(), pts, r)?;
        self.points[idx].extend_from_slice(pts);
        self.values[idx].extend(v);
        Ok(())
    }

    fn finish(self, out: &mut SuiteOutcome, tol: f64, metrics: usize, seed: u64) {
        for ((name, pts), vals) in self.names.iter().zip(self.points).zip(self.values) {
            let r = ResidualReport::from_values(name, &pts, vals, tol)
                .with_meta("metrics", metrics)
                .with_meta("seed", seed)
                .with_meta("epsilon", DEFAULT_EPSILON);
            out.expect(r, true);
        }
    }
}

/// Options for [`run_identity`].
#[derive(Debug, Clone)]
pub struct IdentitySource {
    /// Number of random perturbed metrics for the universal identities.
    pub random_metrics: usize,
    /// Dimension of the random metrics.
    pub dim: usize,
    /// Example for the structure-specific identities.
    pub example: Option<ExampleSpec>,
}

impl Default for IdentitySource {
    fn default() -> Self {
        IdentitySource {
            random_metrics: 20,
            dim: 3,
            example: None,
        }
    }
}

pub fn run_identity(name: IdentityName, src: &IdentitySource, opts: &CheckOptions) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new(name.as_str());
    let tol = opts.tol;
    if name.is_universal() {
        if src.random_metrics == 0 {
            return Err(Error::invalid("at least one random metric is required"));
        }
        let names: &[&str] = match name {
            IdentityName::Bianchi => &["contracted-bianchi", "metric-compatibility"],
            IdentityName::FgFormulas => &[
                "div-product",
                "nabla-product",
                "gradient-norm",
                "div-hessian",
                "lie-hessian",
            ],
            _ => &[
                "lemma21",
                "divric-chain-lemma",
                "divric-chain-bianchi",
                "traceless-inner",
            ],
        };
        let mut pool = Pooled::new(names);
        for i in 0..src.random_metrics {
            let inst = random_instance(opts.seed.wrapping_add(i as u64), src.dim, opts.points)?;
            let (g, p) = (&inst.metric, &inst.points);
            match name {
                IdentityName::Bianchi => {
                    pool.add(0, g, p, &bianchi_residual(g)?)?;
                    pool.add(1, g, p, &metric_compatibility_residual(g)?)?;
                }
                IdentityName::FgFormulas => {
                    pool.add(0, g, p, &div_product_residual(g, &inst.phi, &inst.t)?)?;
                    pool.add(1, g, p, &nabla_product_residual(g, &inst.phi, &inst.t)?)?;
                    pool.add(2, g, p, &gradient_norm_residual(g, &inst.phi)?)?;
                    pool.add(3, g, p, &div_hessian_residual(g, &inst.phi)?)?;
                    pool.add(4, g, p, &lie_hessian_residual(g, &inst.phi)?)?;
                }
                _ => {
                    pool.add(0, g, p, &lemma21_residual(g, &inst.t, &inst.phi, &inst.z)?)?;
                    let (a, b) = divric_chain_residuals(g, &inst.z)?;
                    pool.add(1, g, p, &a)?;
                    pool.add(2, g, p, &b)?;
                    pool.add(3, g, p, &traceless_inner_residual(g, &inst.z)?)?;
                }
            }
        }
        pool.finish(&mut out, tol, src.random_metrics, opts.seed);
        return Ok(out);
    }
    if name == IdentityName::ConformalFactor {
        conformal_factor_suite(opts, &mut out)?;
        return Ok(out);
    }
    let spec = match &src.example {
        Some(s) => s.clone(),
        None => ExampleSpec::new(name.default_example().expect("structure identity")),
    };
    match name {
        IdentityName::Oneill => oneill_suite(&spec, opts, &mut out)?,
        _ => {
            let s = example_structure(&spec)?;
            let pts = structure_points(&s, opts)?;
            match name {
                IdentityName::Divric => out.expect(divric_identity_residual(&s, &pts, tol)?, true),
                IdentityName::Eqpprinc => out.expect(eqpprinc_residual(&s, &pts, tol)?, true),
                IdentityName::MuConst => {
                    out.expect(gradient_soliton_residual(&s, &pts, tol)?, true);
                    out.expect(mu_field(&s, &pts, tol)?.report, true);
                    // λ constant turns the 1-form identity into dμ = 0
                    out.expect(eqpprinc_residual(&s, &pts, tol)?, true);
                    let dmu = d_scalar_on(s.metric(), &mu_expression(&s)?);
                    out.expect(s.check("d-mu", &pts, &Residual::OneForm(dmu), tol)?, true);
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(out)
}

/// `ρ = h_v` on `S³(1)`: the Hessian equation, the recovered potential
/// `u = −h_v` and `½ L_{∇u} g = ρ g`.
fn conformal_factor_suite(opts: &CheckOptions, out: &mut SuiteOutcome) -> Result<()> {
    let space = make_sphere(3, 1.0)?;
    let g = space.metric();
    let b = ParameterBinding::new();
    let rho = height_function(&space, &last_axis(3))?.field;
    let pts = sample_points(g.chart(), Some(g), &b, opts.points, opts.seed)?;
    out.expect(conformal_factor_hessian_check(g, &rho, &b, &pts, opts.tol)?, true);
    let u = potential_from_factor(g, &rho, &b, &pts)?;
    out.expect(
        evaluate_residual(
            "potential-closed-form",
            g,
            &b,
            &pts,
            &Residual::Scalar(&u + &rho),
            opts.tol,
        )?,
        true,
    );
    out.expect(conformal_potential_residual(g, &u, &rho, &b, &pts, opts.tol)?, true);
    Ok(())
}

/// Direct Ricci of a warped product against the O'Neill formulas, and
/// against `(n−1)k g` since pseudo-hyperbolic spaces have constant curvature.
fn oneill_suite(spec: &ExampleSpec, opts: &CheckOptions, out: &mut SuiteOutcome) -> Result<()> {
    if spec.id != ExampleId::PseudoHyperbolic {
        return Err(Error::invalid(
            "the O'Neill check needs a pseudo-hyperbolic warped product",
        ));
    }
    let ph = pseudo_hyperbolic(spec)?;
    let w = &ph.warped;
    let g = w.product().expect("explicit fiber");
    let b = ph.structure.binding();
    let pts = sample_points(g.chart(), Some(g), b, opts.points, opts.seed)?;
    let direct = ricci(g);
    let formula = oneill_ricci(w)?.product.expect("explicit fiber");
    let diff = direct.sub(&formula);
    out.expect(
        evaluate_residual(
            "oneill-vs-direct",
            g,
            b,
            &pts,
            &Residual::Components(diff.components().to_vec()),
            opts.tol,
        )?,
        true,
    );
    let c = (g.dim() as f64 - 1.0) * ph.profile.k;
    let einstein = formula.sub(&g.components().scale(&Expr::constant(c)));
    out.expect(
        evaluate_residual(
            "oneill-einstein",
            g,
            b,
            &pts,
            &Residual::Components(einstein.components().to_vec()),
            opts.tol,
        )?,
        true,
    );
    Ok(())
}

/// λ summary for reports.
pub fn lambda_mean(s: &SolitonStructure, points: &[PointSample]) -> Result<f64> {
    Ok(lambda_summary(s, points)?.mean)
}
