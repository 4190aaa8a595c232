//! Command-line front end for the soliton verification engine.
//!
//! Exit codes: 0 when every verdict comes out as expected, 1 when a numeric
//! check does not, 2 for bad input or an unmet precondition.

pub mod error;
pub mod manifest;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hsoliton_core::examples::{ExampleId, ExampleSpec};
use hsoliton_core::soliton::{
    classify_lambda, eqpprinc_residual, form_check, gradient_soliton_residual, lambda_summary, mu_field,
    soliton_residual, triviality_check, warped_einstein_construct, Classification,
};
use hsoliton_core::spaces::{einstein_fiber, Fiber};
use hsoliton_core::suites::{
    example_structure, run_example, run_identity, structure_points, CheckOptions, IdentityName, IdentitySource,
};
use hsoliton_core::{HForm, SolitonStructure};
use serde_json::json;

pub use error::{CliResult, Failure};
pub use manifest::{Manifest, SCHEMA};
pub use report::ReportDocument;

/// Default tolerance for example and manifest checks.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default tolerance for the identity suites, whose random metrics carry
/// larger expressions.
pub const IDENTITY_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(
    name = "hsoliton",
    version,
    about = "Verify h-almost Ricci solitons at sampled chart points"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Number of sample points.
    #[arg(long, global = true, default_value_t = 200)]
    pub points: usize,
    /// Residual tolerance [default: 1e-8, or 1e-7 for check-identity].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Sampler seed.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Write the JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

/// Parameter overrides for built-in examples. Only the parameters an
/// example declares are accepted.
#[derive(Debug, Args, Default, Clone)]
pub struct ExampleParams {
    /// Curvature sign of the space form, 1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Dimension.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<f64>,
    /// The constant m in h = ±m/u.
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Additive constant τ in the potential.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Negative constant k of the warping profile.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// The amplitude A of the warping profile, or the coefficient a.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Profile constant l ≥ 0; l > 0 selects a hyperbolic fiber.
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,
    /// Constant b > |a| in u = a h_v + b.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Expression for h in the coordinate t (pseudo-hyperbolic only).
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
}

impl ExampleParams {
    pub fn is_empty(&self) -> bool {
        [self.c, self.n, self.m, self.tau, self.k, self.a, self.l, self.b]
            .iter()
            .all(Option::is_none)
            && self.h.is_none()
    }

    pub fn spec(&self, id: &str) -> CliResult<ExampleSpec> {
        let id: ExampleId = id.parse()?;
        let mut spec = ExampleSpec::new(id);
        let pairs = [
            ("c", self.c),
            ("n", self.n),
            ("m", self.m),
            ("tau", self.tau),
            ("k", self.k),
            ("a", self.a),
            ("l", self.l),
            ("b", self.b),
        ];
        for (key, v) in pairs {
            if let Some(v) = v {
                spec.set(key, v)?;
            }
        }
        if let Some(h) = &self.h {
            if id != ExampleId::PseudoHyperbolic {
                return Err(Failure::input(format!(
                    "--h applies to pseudo-hyperbolic only, not {id}"
                )));
            }
            spec.h = Some(h.clone());
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FiberKind {
    /// Flat for μ = 0, a sphere for μ > 0, hyperbolic space for μ < 0.
    Auto,
    Flat,
    Sphere,
    Hyperbolic,
    /// No explicit metric; the product is checked with the O'Neill blocks.
    Abstract,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the check suite of a built-in example.
    VerifyExample {
        /// Example id, e.g. space-form-gradient.
        id: String,
        #[command(flatten)]
        params: ExampleParams,
    },
    /// Verify a structure described by a manifest file.
    VerifyManifest {
        /// Manifest file (schema soliton-manifest/1).
        path: PathBuf,
    },
    /// Run an identity suite.
    CheckIdentity {
        /// bianchi, fg-formulas, lemma21, divric, eqpprinc, mu-const, conformal-factor or oneill.
        name: String,
        /// Random perturbed metrics for bianchi, fg-formulas and lemma21.
        #[arg(long, default_value_t = 20)]
        random_metrics: usize,
        /// Dimension of the random metrics.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Example for divric, eqpprinc and mu-const.
        #[arg(long)]
        example: Option<String>,
        /// Warped example for oneill.
        #[arg(long, conflicts_with = "example")]
        warped: Option<String>,
        #[command(flatten)]
        params: ExampleParams,
    },
    /// Build the Einstein warped product over a gradient (−m/u) soliton base.
    ConstructWarped {
        #[arg(long, conflicts_with = "base_manifest", required_unless_present = "base_manifest")]
        /// Built-in base example.
        base_example: Option<String>,
        /// Base manifest file.
        #[arg(long)]
        base_manifest: Option<PathBuf>,
        /// Fiber dimension; must equal m.
        #[arg(long)]
        fiber_dim: usize,
        /// Einstein constant μ of the fiber, Ric_F = μ g_F.
        #[arg(long, allow_negative_numbers = true)]
        fiber_mu: f64,
        /// Fiber metric.
        #[arg(long, value_enum, default_value_t = FiberKind::Auto)]
        fiber: FiberKind,
        /// Write the product metric as an Einstein manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: ExampleParams,
    },
    /// Report the λ classification and the triviality verdict.
    Classify {
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        /// Built-in example.
        example: Option<String>,
        /// Manifest file.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        params: ExampleParams,
    },
}

/// Result of one invocation, before anything is written.
#[derive(Debug)]
pub struct Outcome {
    pub report: ReportDocument,
    /// Manifest to write to `--out`.
    pub product: Option<(PathBuf, Manifest)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.pass {
            0
        } else {
            1
        }
    }
}

fn options(g: &GlobalArgs, default_tol: f64) -> CliResult<CheckOptions> {
    let tol = g.tol.unwrap_or(default_tol);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::input(format!("--tol must be positive, got {tol}")));
    }
    if g.points == 0 {
        return Err(Failure::input("--points must be at least 1"));
    }
    Ok(CheckOptions {
        points: g.points,
        seed: g.seed,
        tol,
    })
}

fn spec_digest(spec: &ExampleSpec) -> String {
    let v = json!({"example": spec.id.as_str(), "parameters": spec.params, "h": spec.h});
    report::digest(v.to_string().as_bytes())
}

fn read_manifest(path: &Path) -> CliResult<(Manifest, String)> {
    let bytes = fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::input("manifest is not UTF-8"))?;
    Ok((Manifest::from_json(&text)?, report::digest(&bytes)))
}

fn subject_of(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    let report = match &cli.command {
        Command::VerifyExample { id, params } => {
            let opts = options(g, DEFAULT_TOL)?;
            let spec = params.spec(id)?;
            let suite = run_example(&spec, &opts)?;
            ReportDocument::from_suite("verify-example", spec_digest(&spec), &opts, &suite)
        }
        Command::VerifyManifest { path } => {
            let opts = options(g, DEFAULT_TOL)?;
            let (m, digest) = read_manifest(path)?;
            let s = m.build()?;
            let mut doc = ReportDocument::new("verify-manifest", &subject_of(path), digest, &opts);
            verify_structure(&s, &opts, &mut doc)?;
            doc
        }
        Command::CheckIdentity {
            name,
            random_metrics,
            dim,
            example,
            warped,
            params,
        } => {
            let opts = options(g, IDENTITY_TOL)?;
            let id: IdentityName = name.parse()?;
            let chosen = example.as_ref().or(warped.as_ref());
            if id.is_universal() && chosen.is_some() {
                return Err(Failure::input(format!(
                    "{id} runs on random metrics and takes no example"
                )));
            }
            if *dim < 2 {
                return Err(Failure::input("--dim must be at least 2"));
            }
            let spec = match chosen {
                Some(e) => Some(params.spec(e)?),
                None => match id.default_example() {
                    Some(d) => Some(params.spec(d.as_str())?),
                    None => None,
                },
            };
            let src = IdentitySource {
                random_metrics: *random_metrics,
                dim: *dim,
                example: spec.clone(),
            };
            let suite = run_identity(id, &src, &opts)?;
            let digest = report::digest(
                json!({
                    "identity": id.as_str(),
                    "random_metrics": random_metrics,
                    "dim": dim,
                    "example": spec.as_ref().map(|s| json!({"id": s.id.as_str(), "parameters": s.params, "h": s.h})),
                })
                .to_string()
                .as_bytes(),
            );
            ReportDocument::from_suite("check-identity", digest, &opts, &suite)
        }
        Command::ConstructWarped {
            base_example,
            base_manifest,
            fiber_dim,
            fiber_mu,
            fiber,
            out,
            params,
        } => {
            let opts = options(g, DEFAULT_TOL)?;
            let (base, subject, digest) = load_base(base_example.as_deref(), base_manifest.as_deref(), params)?;
            return construct_warped(
                &base,
                &subject,
                digest,
                *fiber_dim,
                *fiber_mu,
                *fiber,
                out.as_deref(),
                &opts,
            );
        }
        Command::Classify {
            example,
            manifest,
            params,
        } => {
            let opts = options(g, DEFAULT_TOL)?;
            let (s, subject, digest) = load_base(example.as_deref(), manifest.as_deref(), params)?;
            let pts = structure_points(&s, &opts)?;
            let mut doc = ReportDocument::new("classify", &subject, digest, &opts);
            doc.push(&soliton_residual(&s, &pts, opts.tol)?, true);
            let lam = lambda_summary(&s, &pts)?;
            let t = triviality_check(&s, &pts, opts.tol)?;
            doc.classification = Some(classify_lambda(&s, &pts)?.as_str().to_string());
            doc.trivial = Some(t.trivial);
            doc.notes
                .push(format!("lambda mean {:e}, relative spread {:e}", lam.mean, lam.spread));
            if t.trivial {
                doc.notes.push(format!("homothetic with L_X g = {:e} g", t.homothety));
            }
            doc
        }
    };
    Ok(Outcome { report, product: None })
}

fn load_base(
    example: Option<&str>,
    manifest: Option<&Path>,
    params: &ExampleParams,
) -> CliResult<(SolitonStructure, String, String)> {
    match (example, manifest) {
        (Some(id), None) => {
            let spec = params.spec(id)?;
            Ok((example_structure(&spec)?, spec.id.to_string(), spec_digest(&spec)))
        }
        (None, Some(path)) => {
            if !params.is_empty() {
                return Err(Failure::input("example parameters cannot be combined with a manifest"));
            }
            let (m, digest) = read_manifest(path)?;
            Ok((m.build()?, subject_of(path), digest))
        }
        _ => Err(Failure::input("give exactly one of an example or a manifest")),
    }
}

/// Soliton equation, its gradient form, the declared h-form, the λ
/// classification and triviality; for `h = −m/u` also μ and the 1-form
/// identity once the gradient equation holds.
fn verify_structure(s: &SolitonStructure, opts: &CheckOptions, doc: &mut ReportDocument) -> CliResult<()> {
    let tol = opts.tol;
    let pts = structure_points(s, opts)?;
    doc.push(&soliton_residual(s, &pts, tol)?, true);
    let grad = if s.is_gradient() {
        let r = gradient_soliton_residual(s, &pts, tol)?;
        doc.push(&r, true);
        r.pass
    } else {
        false
    };
    if s.form() != HForm::Free {
        doc.push(&form_check(s, &pts, tol)?, true);
    }
    doc.classification = Some(classify_lambda(s, &pts)?.as_str().to_string());
    doc.trivial = Some(triviality_check(s, &pts, tol)?.trivial);
    if let HForm::NegMOverU(_) = s.form() {
        if grad {
            if lambda_summary(s, &pts)?.is_constant() {
                doc.push(&mu_field(s, &pts, tol)?.report, true);
            } else {
                doc.notes.push("λ is not constant; μ is not defined".to_string());
            }
            doc.push(&eqpprinc_residual(s, &pts, tol)?, true);
        } else {
            doc.notes
                .push("gradient equation fails; μ and the 1-form identity were skipped".to_string());
        }
    }
    Ok(())
}

/// Coordinate prefix for the fiber that does not clash with the base.
fn fiber_prefix(base: &SolitonStructure, m: usize) -> String {
    let names = base.metric().chart().coords();
    ["z", "w", "v", "s", "q"]
        .iter()
        .find(|p| (1..=m).all(|i| !names.contains(&format!("{p}{i}"))))
        .map(|p| p.to_string())
        .unwrap_or_else(|| "fiber_z".to_string())
}

#[allow(clippy::too_many_arguments)]
fn construct_warped(
    base: &SolitonStructure,
    subject: &str,
    digest: String,
    dim: usize,
    mu: f64,
    kind: FiberKind,
    out: Option<&Path>,
    opts: &CheckOptions,
) -> CliResult<Outcome> {
    if !mu.is_finite() {
        return Err(Failure::input("--fiber-mu must be finite"));
    }
    let sign_ok = match kind {
        FiberKind::Auto | FiberKind::Abstract => true,
        FiberKind::Flat => mu == 0.0,
        FiberKind::Sphere => mu > 0.0,
        FiberKind::Hyperbolic => mu < 0.0,
    };
    if !sign_ok {
        return Err(Failure::input(
            format!("a {kind:?} fiber cannot have Einstein constant μ = {mu}").to_lowercase(),
        ));
    }
    let fiber = if kind == FiberKind::Abstract {
        if out.is_some() {
            return Err(Failure::input(
                "an abstract fiber has no explicit product metric to write",
            ));
        }
        Fiber::Abstract { dim, mu: Some(mu) }
    } else {
        Fiber::Explicit(std::sync::Arc::new(einstein_fiber(dim, mu, &fiber_prefix(base, dim))?))
    };
    let we = warped_einstein_construct(base, fiber, mu, opts.points, opts.seed, opts.tol)?;
    let mut doc = ReportDocument::new("construct-warped", subject, digest, opts);
    doc.push(&we.mu.report, true);
    doc.push(&we.einstein, true);
    doc.classification = Some(Classification::of_values(&[we.lambda]).as_str().to_string());
    doc.notes
        .push(format!("product dimension {}, Ric = {} g", we.product.dim(), we.lambda));
    let product = match out {
        Some(path) => {
            let g = we.product.product().expect("explicit fiber");
            Some((path.to_path_buf(), Manifest::einstein(g, base.binding(), we.lambda)))
        }
        None => None,
    };
    Ok(Outcome { report: doc, product })
}

/// Parses arguments, runs the command, writes outputs and returns the exit
/// code. Text goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Some((path, m)) = &outcome.product {
                if let Err(e) = fs::write(path, m.to_json()) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            if let Some(path) = &cli.global.json {
                if let Err(e) = fs::write(path, outcome.report.to_json()) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            let _ = write!(stdout, "{}", outcome.report.summary());
            outcome.exit_code()
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            f.exit_code()
        }
    }
}
