use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use theta_summa::format::{self, pair, FormatError, ModelDoc, ModelRef, OmegaDoc, SummandDoc};
use theta_summa::report::Combined;
use theta_summa::sampling::trial_rng;
use theta_summa::suites::{self, Identity, RunConfig, DEFAULT_SEED};
use theta_summa_core::jacobian::{make_hyperelliptic2_with, make_torus, DEFAULT_NODES};
use theta_summa_core::kernel::{theta1, theta_short, ModularPair, Nome, Theta1Route};
use theta_summa_core::riemann::{theta_g_with_info, Characteristic, PeriodMatrix, DEFAULT_TOL};
use theta_summa_core::summation::{induction_step_residual, theorem_sum_pair};
use theta_summa_core::Complex64;

#[derive(Parser)]
#[command(
    name = "theta-summa",
    version,
    about = "Evaluate theta functions and verify theta-function summation identities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a single function.
    Eval {
        #[command(subcommand)]
        what: Eval,
    },
    /// Run a randomized verification suite.
    Verify(VerifyArgs),
    /// Build a surface model and write it as JSON.
    Model {
        #[command(subcommand)]
        what: ModelCmd,
    },
    /// Sample or evaluate a summand configuration.
    Summand {
        #[command(subcommand)]
        what: SummandCmd,
    },
}

fn complex(s: &str) -> Result<Complex64, String> {
    format::parse_complex(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Series,
    Product,
}

#[derive(Subcommand)]
enum Eval {
    /// θ(a;p).
    #[command(name = "theta_short")]
    ThetaShort {
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        a: Complex64,
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        p: Complex64,
        #[arg(long)]
        json: bool,
    },
    /// θ₁(u; σ, τ).
    #[command(name = "theta1")]
    Theta1 {
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        u: Complex64,
        #[arg(long, value_parser = complex, allow_hyphen_values = true, default_value = "1")]
        sigma: Complex64,
        #[arg(long, value_parser = complex, allow_hyphen_values = true, default_value = "i")]
        tau: Complex64,
        #[arg(long, value_enum, default_value = "series")]
        route: Route,
        #[arg(long)]
        json: bool,
    },
    /// Riemann theta with characteristics, from `--tau` (genus 1) or an `Omega` file.
    #[command(name = "theta_g")]
    ThetaG {
        /// Vector: `re+imi` entries separated by `,`, or `re,im` entries separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, value_parser = complex, allow_hyphen_values = true, conflicts_with = "omega_file")]
        tau: Option<Complex64>,
        /// JSON file with an `Omega` field (row-major `[re, im]` pairs), e.g. a model file.
        #[arg(long)]
        omega_file: Option<PathBuf>,
        /// Rationals such as `1/2,0`; zero when omitted.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        theta_tol: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Identity name, or `all`.
    identity: String,
    #[arg(long, env = "THETA_SUMMA_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 1)]
    genus: usize,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    theta_tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    /// Model file to use instead of the built-in surfaces.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of summary lines.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum ModelCmd {
    Torus {
        #[arg(long, value_parser = complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Hyperelliptic2 {
        /// Six increasing real branch points, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        e: String,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SummandCmd {
    /// Draw a random configuration on a torus or a model file.
    Sample {
        #[arg(long, default_value_t = 1)]
        genus: usize,
        /// Model file, referenced by path from the output.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, env = "THETA_SUMMA_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate both sides of the summation identity for a configuration.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        theta_tol: Option<f64>,
        /// Exit with status 1 when the residual exceeds this.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    /// Bad input or IO.
    Usage(String),
    /// Numerical failure or failed verification.
    Check(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Model(m) => Failure::Check(m),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<theta_summa_core::Error> for Failure {
    fn from(e: theta_summa_core::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

type CliResult = Result<bool, Failure>;

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => Ok(format::write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_value(name: &str, v: Complex64, extra: serde_json::Value, as_json: bool) {
    if as_json {
        let mut obj = json!({ "function": name, "value": pair(v) });
        if let (Some(o), serde_json::Value::Object(e)) = (obj.as_object_mut(), extra) {
            o.extend(e);
        }
        print!("{}", format::to_json(&obj));
    } else {
        println!("{:.17e} {:+.17e}i", v.re, v.im);
        if let serde_json::Value::Object(e) = extra {
            for (k, x) in e {
                println!("{k} = {x}");
            }
        }
    }
}

fn eval(what: Eval) -> CliResult {
    match what {
        Eval::ThetaShort { a, p, json } => {
            let v = theta_short(a, Nome::new(p)?)?;
            print_value("theta_short", v, json!({}), json);
        }
        Eval::Theta1 { u, sigma, tau, route, json } => {
            let b = ModularPair::new(sigma, tau)?;
            let r = match route {
                Route::Series => Theta1Route::Series,
                Route::Product => Theta1Route::Product,
            };
            print_value("theta1", theta1(u, &b, r), json!({}), json);
        }
        Eval::ThetaG { u, tau, omega_file, alpha, beta, theta_tol, json } => {
            let u = format::parse_vector(&u)?;
            let om = match (tau, omega_file) {
                (Some(t), None) => PeriodMatrix::scalar(t)?,
                (None, Some(f)) => format::period_matrix_from_pairs(&format::read_json::<OmegaDoc>(&f)?.omega)?,
                _ => return Err(Failure::Usage("give exactly one of --tau and --omega-file".into())),
            };
            let g = om.g();
            let rat = |s: Option<String>| -> Result<_, Failure> {
                Ok(match s {
                    Some(s) => format::parse_ratios(&s)?,
                    None => Characteristic::zero(g).alpha,
                })
            };
            let ch = Characteristic::new(rat(alpha)?, rat(beta)?)?;
            if u.len() != g || ch.g() != g {
                return Err(Failure::Usage(format!("genus is {g}: u and the characteristic need {g} entries")));
            }
            let info = theta_g_with_info(&u, &om, &ch, theta_tol)?;
            let extra = json!({"terms": info.terms, "radius": info.radius, "max_term": info.max_term});
            print_value("theta_g", info.value, extra, json);
        }
    }
    Ok(true)
}

fn verify(args: VerifyArgs) -> CliResult {
    let model = match &args.model {
        Some(p) => Some(format::read_json::<ModelDoc>(p)?),
        None => None,
    };
    let cfg = RunConfig {
        seed: args.seed,
        trials: args.trials,
        tol: args.tol,
        genus: args.genus,
        n_max: args.n_max,
        theta_tol: args.theta_tol,
        nodes: args.nodes,
        model,
    };
    let (text, lines, passed) = if args.identity == "all" {
        let all = Combined::new(suites::run_all(&cfg)?);
        let lines: Vec<String> = all.reports.iter().map(|r| r.summary_line()).collect();
        (format::to_json(&all), lines, all.passed)
    } else {
        let id: Identity = args.identity.parse().map_err(Failure::Usage)?;
        let r = suites::run(id, &cfg)?;
        (format::to_json(&r), vec![r.summary_line()], r.passed)
    };
    if let Some(p) = &args.out {
        format::write_text(p, &text)?;
    }
    if args.json {
        print!("{text}");
    } else {
        for l in lines {
            println!("{l}");
        }
    }
    Ok(passed)
}

fn model(what: ModelCmd) -> CliResult {
    let (m, nodes, out) = match what {
        ModelCmd::Torus { tau, out } => (make_torus(tau)?, DEFAULT_NODES, out),
        ModelCmd::Hyperelliptic2 { e, nodes, out } => {
            let v = format::parse_reals(&e)?;
            let e: [f64; 6] =
                v.try_into().map_err(|v: Vec<f64>| Failure::Usage(format!("need 6 branch points, got {}", v.len())))?;
            (make_hyperelliptic2_with(e, nodes)?, nodes, out)
        }
    };
    emit(&format::to_json(&ModelDoc::from_model(&m, nodes)), out.as_deref())?;
    Ok(true)
}

fn summand(what: SummandCmd) -> CliResult {
    match what {
        SummandCmd::Sample { genus, model, n, seed, out } => {
            let (m, mref) = match &model {
                Some(p) => {
                    let doc: ModelDoc = format::read_json(p)?;
                    (doc.to_model()?, ModelRef::Path(p.display().to_string()))
                }
                None if genus == 1 => {
                    let m = make_torus(Complex64::new(0.15, 1.05))?;
                    let doc = ModelDoc::from_model(&m, DEFAULT_NODES);
                    (m, ModelRef::Inline(Box::new(doc)))
                }
                None if genus == 2 => {
                    let m = make_hyperelliptic2_with(suites::DEFAULT_BRANCH_POINTS, DEFAULT_NODES)?;
                    let doc = ModelDoc::from_model(&m, DEFAULT_NODES);
                    (m, ModelRef::Inline(Box::new(doc)))
                }
                None => return Err(Failure::Usage(format!("no built-in surface for genus {genus}; pass --model"))),
            };
            let mut rng = trial_rng(seed, "summand", 0);
            let cfg = theta_summa::sampling::summand_config(&mut rng, &m, n);
            emit(&format::to_json(&SummandDoc::new(mref, &cfg)), out.as_deref())?;
            Ok(true)
        }
        SummandCmd::Eval { config, theta_tol, tol, json } => {
            let doc: SummandDoc = format::read_json(&config)?;
            let mut m = doc.model_doc(config.parent())?.to_model()?;
            if let Some(t) = theta_tol {
                m = m.with_theta_tol(t)?;
            }
            let cfg = doc.config()?;
            cfg.validate(&m)?;
            let p = theorem_sum_pair(&m, &cfg)?;
            let step = induction_step_residual(&m, &cfg)?;
            let residual = p.residual();
            let out = json!({
                "n": cfg.n(),
                "lhs": pair(p.lhs),
                "rhs": pair(p.rhs),
                "scale": p.scale,
                "residual": residual,
                "induction_step_residual": step,
            });
            if json {
                print!("{}", format::to_json(&out));
            } else {
                println!("lhs = {:.17e} {:+.17e}i", p.lhs.re, p.lhs.im);
                println!("rhs = {:.17e} {:+.17e}i", p.rhs.re, p.rhs.im);
                println!("residual = {residual:.3e}");
                println!("induction_step_residual = {step:.3e}");
            }
            Ok(tol.is_none_or(|t| residual.max(step) <= t))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Eval { what } => eval(what),
        Cmd::Verify(args) => verify(args),
        Cmd::Model { what } => model(what),
        Cmd::Summand { what } => summand(what),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
