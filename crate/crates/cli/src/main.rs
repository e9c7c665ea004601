use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rikit::corpus::{random_sequence, trial_rng};
use rikit::duality::{associate_closed_form, AssociateEstimator};
use rikit::represent::{verify_identity, AtomicRepresentation};
use rikit::shapefn::{check_admissible, ShapeFunction};
use rikit::spaces::{self, SpaceSpec};
use rikit::stepcore::{rearrange, Layout, MonotoneStep, SequenceFn, StepFunction};
use rikit::theorems::{self, run_suite, Suite, Verdict};
use rikit::value::{format_float, format_rational, parse_rational};
use rikit::{Error, ExtRational, Rational};

#[derive(Parser, Debug)]
#[command(name = "rikit", version, about = "Exact rearrangement-invariant quasinorms on step functions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Inputs are inline JSON or paths to JSON files.
#[derive(Args, Debug)]
struct Common {
    /// Space specification
    #[arg(long, global = true)]
    space: Option<String>,
    /// Step function
    #[arg(long = "fn", global = true)]
    function: Option<String>,
    /// Shape function
    #[arg(long, global = true)]
    phi: Option<String>,
    /// Domain end, a rational or "inf"
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit CSV rows instead of JSON where supported
    #[arg(long, global = true)]
    csv: bool,
    /// Also write the JSON result to this file
    #[arg(long, global = true)]
    json: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quasinorm of --fn in --space
    Eval,
    /// Non-increasing rearrangement of --fn
    Rearrange,
    /// Fundamental function of --space
    Fundamental {
        /// Comma-separated sample points
        #[arg(long)]
        sample: Option<String>,
    },
    /// Admissibility report for --phi
    ShapeCheck,
    /// Endpoint constant S for --phi, with optional trial evidence
    EndpointCheck,
    /// Closed-form associate of --space and estimates at a function
    Associate {
        /// Function to evaluate the associate at
        #[arg(long)]
        at: Option<String>,
        /// JSON array of candidate functions
        #[arg(long)]
        candidates: Option<String>,
    },
    /// Round-trip and modulus checks for an atomic representation
    RepresentCheck {
        #[arg(long)]
        beta: String,
        /// Inner sequence space
        #[arg(long)]
        inner: String,
    },
    /// Seeded verification suites
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

enum Failure {
    Input(Error),
    Violation(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = std::result::Result<Output, Failure>;

enum Output {
    Json(Value),
    Text(String),
}

fn load(arg: &str) -> Result<Value, Error> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::Parse(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid JSON in {arg}: {e}")))
}

fn required<'a>(value: &'a Option<String>, flag: &str) -> Result<&'a str, Error> {
    value.as_deref().ok_or_else(|| Error::Parse(format!("missing required flag --{flag}")))
}

impl Common {
    fn space(&self) -> Result<SpaceSpec, Error> {
        SpaceSpec::from_json(&load(required(&self.space, "space")?)?)
    }

    fn phi(&self) -> Result<ShapeFunction, Error> {
        ShapeFunction::from_json(&load(required(&self.phi, "phi")?)?)
    }

    fn alpha(&self) -> Result<Option<ExtRational>, Error> {
        self.alpha.as_deref().map(ExtRational::parse).transpose()
    }

    fn function(&self) -> Result<StepFunction, Error> {
        let f = StepFunction::from_json(&load(required(&self.function, "fn")?)?)?;
        match self.alpha()? {
            Some(alpha) => f.with_alpha(alpha),
            None => Ok(f),
        }
    }
}

fn eval(c: &Common) -> Outcome {
    let spec = c.space()?;
    let value = spaces::norm(&spec, &c.function()?)?;
    Ok(Output::Json(json!({"value": value.to_string(), "approx": format_float(value.to_f64())})))
}

fn rearrange_cmd(c: &Common) -> Outcome {
    let fstar = rearrange(&c.function()?);
    if c.csv {
        let mut out = String::from("start,end,value\n");
        for s in fstar.segments() {
            out.push_str(&format!("{},{},{}\n", format_rational(&s.start), s.end, format_rational(&s.value)));
        }
        return Ok(Output::Text(out));
    }
    Ok(Output::Json(fstar.to_step_function().to_json()))
}

fn fundamental_cmd(c: &Common, sample: &Option<String>) -> Outcome {
    let spec = c.space()?;
    let alpha = match c.alpha()? {
        Some(a) => a,
        None => spec.domain().cloned().unwrap_or(ExtRational::Infinite),
    };
    let fun = spaces::fundamental(&spec, &alpha)?;
    let points = match sample {
        Some(list) => list.split(',').map(|s| parse_rational(s.trim())).collect::<Result<Vec<Rational>, Error>>()?,
        None => Vec::new(),
    };
    let mut rows = Vec::with_capacity(points.len());
    for t in &points {
        rows.push((t, fun.value(t)?));
    }
    if c.csv {
        let mut out = String::from("t,phi\n");
        for (t, v) in &rows {
            out.push_str(&format!("{},{}\n", format_rational(t), format_float(v.to_f64())));
        }
        return Ok(Output::Text(out));
    }
    let samples: Vec<Value> = rows
        .iter()
        .map(|(t, v)| json!({"t": format_rational(t), "value": v.to_string(), "approx": format_float(v.to_f64())}))
        .collect();
    Ok(Output::Json(json!({"phi": fun.shape.to_json(), "up_to_equivalence": fun.up_to_equivalence, "samples": samples})))
}

fn endpoint_cmd(c: &Common) -> Outcome {
    let phi = c.phi()?;
    let report = theorems::endpoint_equivalence(&phi)?;
    let mut out = report.to_json();
    let trials = c.trials.unwrap_or(0);
    if trials > 0 && report.s.is_finite() {
        let opts = rikit::corpus::StepOptions::default().with_tail(0.3);
        let mut best = 0f64;
        let mut witness = None;
        for t in 0..trials as u64 {
            let f = rikit::corpus::random_step(&mut trial_rng(c.seed, t), &opts);
            let r = theorems::endpoint_ratio(&phi, &rearrange(&f))?.unwrap_or(0.0);
            if r > best {
                best = r;
                witness = Some(f);
            }
        }
        out["max_ratio"] = json!(format_float(best));
        if !rikit::ExtValue::from_f64(best).le_tol(&report.s, 1e-9, 0.0) {
            out["witness"] = witness.map(|f| f.to_json()).unwrap_or(Value::Null);
            return Err(Failure::Violation(out));
        }
    }
    Ok(Output::Json(out))
}

fn candidate(v: &Value) -> Result<MonotoneStep, Error> {
    if v.get("pieces").is_some() {
        Ok(rearrange(&StepFunction::from_json(v)?))
    } else {
        MonotoneStep::from_json(v)
    }
}

fn associate_cmd(c: &Common, at: &Option<String>, candidates: &Option<String>) -> Outcome {
    let spec = c.space()?;
    let form = associate_closed_form(&spec);
    let mut out = json!({"closed_form": form.as_ref().map(|f| f.to_json())});
    let Some(at) = at else {
        return Ok(Output::Json(out));
    };
    let f = StepFunction::from_json(&load(at)?)?;
    let pool = match candidates {
        Some(path) => match load(path)? {
            Value::Array(items) => items.iter().map(candidate).collect::<Result<Vec<_>, Error>>()?,
            _ => return Err(Error::Parse("candidates must be a JSON array".into()).into()),
        },
        None => Vec::new(),
    };
    let estimate = if pool.is_empty() && !matches!(spec, SpaceSpec::WeakMarcinkiewicz(_)) {
        None
    } else {
        Some(AssociateEstimator::new(&spec, &pool)?.estimate(&f)?)
    };
    let exact = form.as_ref().map(|form| form.value(&f)).transpose()?;
    if let Some(e) = &estimate {
        out["estimate"] = json!({
            "value": e.value.to_string(),
            "approx": format_float(e.value.to_f64()),
            "best": e.best.map_or(json!("reciprocal"), |i| json!(i)),
        });
    }
    if let Some(v) = &exact {
        out["value"] = json!(v.to_string());
        out["approx"] = json!(format_float(v.to_f64()));
    }
    if let (Some(e), Some(v)) = (&estimate, &exact) {
        if !e.value.le_tol(v, 1e-9, 0.0) {
            out["violation"] = json!("estimate exceeds the closed form");
            return Err(Failure::Violation(out));
        }
    }
    Ok(Output::Json(out))
}

fn represent_cmd(c: &Common, beta: &str, inner: &str) -> Outcome {
    let rep = AtomicRepresentation::new(parse_rational(beta)?, SpaceSpec::from_json(&load(inner)?)?)?;
    let trials = c.trials.unwrap_or(200);
    let mut failures = Vec::new();
    let mut max_gap = 0f64;
    for t in 0..trials as u64 {
        let values = random_sequence(&mut trial_rng(c.seed, t), 8, 12, 4);
        let g = SequenceFn::from_values(&values, rep.beta().clone())?;
        let check = verify_identity(&rep, &g)?;
        let (a, b) = (check.sequence_norm.to_f64(), check.function_norm.to_f64());
        if a.is_finite() && b.is_finite() && a > 0.0 {
            max_gap = max_gap.max((a - b).abs() / a);
        }
        if !check.holds && failures.len() < 5 {
            failures.push(json!({"trial": t, "g": g.to_json()}));
        }
    }
    let probe = spaces::modulus_probe(&rep.spec(), trials, c.seed)?;
    let out = json!({
        "space": rep.spec().to_json(),
        "identity": {"trials": trials, "holds": failures.is_empty(), "max_relative_gap": format_float(max_gap), "failures": failures},
        "modulus": probe.to_json(),
    });
    if failures.is_empty() && probe.within_bound() {
        Ok(Output::Json(out))
    } else {
        Err(Failure::Violation(out))
    }
}

fn verify_cmd(c: &Common, suite: &str) -> Outcome {
    let suite: Suite = suite.parse()?;
    let reports = run_suite(suite, c.trials.unwrap_or(100), c.seed)?;
    let out = Value::Array(reports.iter().map(|r| r.to_json()).collect());
    if reports.iter().any(|r| r.verdict == Verdict::Fails) {
        Err(Failure::Violation(out))
    } else {
        Ok(Output::Json(out))
    }
}

fn run(cli: &Cli) -> Outcome {
    let c = &cli.common;
    match &cli.command {
        Command::Eval => eval(c),
        Command::Rearrange => rearrange_cmd(c),
        Command::Fundamental { sample } => fundamental_cmd(c, sample),
        Command::ShapeCheck => Ok(Output::Json(check_admissible(&c.phi()?).to_json())),
        Command::EndpointCheck => endpoint_cmd(c),
        Command::Associate { at, candidates } => associate_cmd(c, at, candidates),
        Command::RepresentCheck { beta, inner } => represent_cmd(c, beta, inner),
        Command::Verify { suite } => verify_cmd(c, suite),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn error_object(kind: &str, message: &str) -> String {
    pretty(&json!({"error": {"kind": kind, "message": message}}))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("RIKIT_MAX_PARALLELISM") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| Error::Parse(format!("RIKIT_MAX_PARALLELISM must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(Error::OutOfRange("RIKIT_MAX_PARALLELISM must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Unsupported(format!("cannot configure worker threads: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            print!("{}", error_object("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    if let Err(e) = configure_threads() {
        print!("{}", error_object(e.kind(), &e.to_string()));
        return ExitCode::from(2);
    }
    let (payload, code) = match run(&cli) {
        Ok(Output::Json(v)) => (Some(v), ExitCode::SUCCESS),
        Ok(Output::Text(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(Failure::Violation(v)) => (Some(v), ExitCode::from(1)),
        Err(Failure::Input(e)) => {
            print!("{}", error_object(e.kind(), &e.to_string()));
            return ExitCode::from(2);
        }
    };
    let v = payload.expect("json payload");
    let text = pretty(&v);
    if let Some(path) = &cli.common.json {
        if let Err(e) = fs::write(path, &text) {
            print!("{}", error_object("io", &format!("cannot write {path}: {e}")));
            return ExitCode::from(2);
        }
    }
    print!("{text}");
    code
}
