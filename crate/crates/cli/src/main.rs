//! `lorentz-verify` command line: each subcommand assembles a scenario and
//! hands it to the runner. Exit status 0 = all pass, 1 = a check failed,
//! 2 = configuration or usage error.

use clap::{Args, Parser, Subcommand};
use lorentz_verify::error::{Error, Result};
use lorentz_verify::models::builtin_space;
use lorentz_verify::par;
use lorentz_verify::runner::scenario::{AmbientSpec, FieldSpec, ImmersionSpec, MeshSpec, SCHEMA_VERSION};
use lorentz_verify::runner::{emit_report, list_builtins, load_scenario, run, CheckSpec, Format, Scenario};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lorentz-verify", version, about = "Numerical checks for closed conformal fields and spacelike hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Overrides every catalog and scenario tolerance without its own value.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `json` or `text`.
    #[arg(long, default_value = "text")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Clone)]
struct Ambient {
    /// Built-in model name (see `list`).
    #[arg(long, default_value = "de-sitter-grw")]
    model: String,
    /// Fiber dimension.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Random sample points per check.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Clone)]
struct Surface {
    /// Immersion fixture name.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    height: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Metric, Christoffel symbols and curvature of an ambient model.
    VerifyAmbient {
        #[command(flatten)]
        ambient: Ambient,
        /// Expected constant sectional curvature.
        #[arg(long, allow_hyphen_values = true)]
        curvature: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Certify a built-in field as closed conformal.
    VerifyConformal {
        #[command(flatten)]
        ambient: Ambient,
        #[arg(long, default_value = "canonical")]
        field: String,
        /// parallel, homothetic, closed_conformal or not_closed_conformal.
        #[arg(long)]
        expect_class: Option<String>,
        /// Expected conformal factor as an expression in x0, x1, ...
        #[arg(long)]
        psi: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Shape operator, mean curvatures and support identities of a hypersurface.
    Curvature {
        #[command(flatten)]
        ambient: Ambient,
        #[arg(long, default_value = "canonical")]
        field: String,
        #[command(flatten)]
        surface: Surface,
        #[command(flatten)]
        common: Common,
    },
    /// Flow a codimension-two base along the field and test the mean curvature decay.
    Flow {
        #[command(flatten)]
        ambient: Ambient,
        #[arg(long, default_value = "canonical")]
        field: String,
        #[command(flatten)]
        surface: Surface,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// `small` (maximal flowed surface, also gates sup |H|) or `large`.
        #[arg(long, value_parser = ["small", "large"])]
        expect: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Strong r-stability probe of a hypersurface.
    Stability {
        #[command(flatten)]
        ambient: Ambient,
        #[arg(long, default_value = "canonical")]
        field: String,
        #[command(flatten)]
        surface: Surface,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long)]
        expect_classification: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario document, or a built-in suite by name.
    Run {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// List built-in models, fields, fixtures, suites and checks.
    List {
        #[arg(long, default_value = "text")]
        format: String,
    },
}

fn scenario(id: &str, a: &Ambient) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        id: id.into(),
        seed: 0,
        ambient: AmbientSpec::Builtin { name: a.model.clone(), n: a.n },
        fields: Vec::new(),
        immersions: Vec::new(),
        mesh: MeshSpec { samples: a.samples.unwrap_or(MeshSpec::default().samples), ..MeshSpec::default() },
        tol: None,
        fd_tol: None,
        checks: Vec::new(),
    }
}

fn field(name: &str) -> FieldSpec {
    FieldSpec { name: name.into(), builtin: Some(name.into()), components: None, constant: None, scale: None }
}

fn immersion(s: &Surface, default_fixture: &str) -> ImmersionSpec {
    ImmersionSpec {
        name: "M".into(),
        fixture: Some(s.fixture.clone().unwrap_or_else(|| default_fixture.into())),
        t0: s.t0,
        theta0: s.theta0,
        height: s.height,
        ..ImmersionSpec::default()
    }
}

fn is_grw(a: &Ambient) -> Result<bool> {
    Ok(builtin_space(&a.model, a.n)?.as_grw().is_some())
}

fn build(cmd: Command) -> Result<(Scenario, Common)> {
    Ok(match cmd {
        Command::VerifyAmbient { ambient, curvature, common } => {
            let mut s = scenario("verify-ambient", &ambient);
            let mut curv = CheckSpec::new("curvature_at");
            if let Some(c) = curvature {
                curv = curv.arg("expected", c);
            }
            s.checks = vec![CheckSpec::new("metric_at"), CheckSpec::new("christoffel_at"), curv];
            if is_grw(&ambient)? {
                let mut g = CheckSpec::new("grw_curvature_residual");
                if let Some(c) = curvature {
                    g = g.arg("c", c);
                }
                s.checks.push(g);
            }
            (s, common)
        }
        Command::VerifyConformal { ambient, field: f, expect_class, psi, common } => {
            let mut s = scenario("verify-conformal", &ambient);
            s.fields = vec![field(&f)];
            let mut cert = CheckSpec::new("certify").arg("field", f.as_str());
            if let Some(c) = expect_class {
                cert = cert.arg("expect_class", c);
            }
            if let Some(p) = psi {
                cert = cert.arg("psi", p);
            }
            s.checks = vec![
                cert,
                CheckSpec::new("covariant_derivative").arg("field", f.as_str()),
                CheckSpec::new("divergence_at").arg("field", f.as_str()),
                CheckSpec::new("gradient_identities_check").arg("field", f.as_str()),
            ];
            (s, common)
        }
        Command::Curvature { ambient, field: f, surface, common } => {
            let mut s = scenario("curvature", &ambient);
            s.fields = vec![field(&f)];
            s.immersions = vec![immersion(&surface, "grw-slice")];
            s.checks = vec![
                CheckSpec::new("frame_at").arg("immersion", "M"),
                CheckSpec::new("shape_operator_at").arg("immersion", "M"),
                CheckSpec::new("newton_identities_check").arg("immersion", "M"),
                CheckSpec::new("support_identities_check").arg("field", f.as_str()).arg("immersion", "M"),
                CheckSpec::new("bernstein_audit").arg("field", f.as_str()).arg("immersion", "M"),
            ];
            (s, common)
        }
        Command::Flow { ambient, field: f, surface, eps, expect, common } => {
            let mut s = scenario("flow", &ambient);
            s.fields = vec![field(&f)];
            s.immersions = vec![immersion(&surface, "fiber-circle")];
            let on_base = |c: &str| CheckSpec::new(c).arg("field", f.as_str()).arg("base", "M").arg("eps", eps);
            s.checks = vec![on_base("build_flowed_immersion")];
            if expect.as_deref() == Some("small") {
                s.checks.push(on_base("mean_curvature_vector"));
            }
            s.checks.push(on_base("decay_law_check"));
            let mut probe = on_base("simons_equivalence_probe");
            if let Some(e) = expect {
                probe = probe.arg("expect", e);
            }
            s.checks.push(probe);
            (s, common)
        }
        Command::Stability { ambient, field: f, surface, r, expect_classification, common } => {
            let mut s = scenario("stability", &ambient);
            s.fields = vec![field(&f)];
            s.immersions = vec![immersion(&surface, "grw-slice")];
            let mut probe = CheckSpec::new("stability_probe").arg("field", f.as_str()).arg("immersion", "M").arg("r", r);
            if let Some(c) = expect_classification {
                probe = probe.arg("expect_classification", c);
            }
            s.checks = vec![probe];
            (s, common)
        }
        Command::Run { scenario, common } => (load_scenario(&scenario)?, common),
        Command::List { .. } => unreachable!("handled before build"),
    })
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidArgument(format!("--out {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn list(format: &str) -> Result<()> {
    let items = list_builtins();
    let text = match Format::parse(format)? {
        Format::Json => serde_json::to_string_pretty(&items).expect("catalog serializes") + "\n",
        Format::Text => items.iter().map(|i| format!("{:<10} {:<34} {}\n", i.kind, i.name, i.description)).collect(),
    };
    emit(&text, None)
}

fn main_inner(cli: Cli) -> Result<i32> {
    if let Command::List { format } = &cli.command {
        list(format)?;
        return Ok(0);
    }
    let (mut s, common) = build(cli.command)?;
    let format = Format::parse(&common.format)?;
    if let Some(t) = common.tol {
        s.tol = Some(t);
    }
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    let report = run(&s)?;
    emit(&emit_report(&report, format), common.out.as_deref())?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    par::init_from_env();
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(if e.is_usage_error() { 2 } else { 1 })
        }
    }
}
