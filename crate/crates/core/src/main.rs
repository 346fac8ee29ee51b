use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use charfield::algebra::{format_rational, parse_rational, RingSpec};
use charfield::harness::{self, default_seed, emit, exit_code, Scenario, ScenarioConfig};
use charfield::measure::{
    classify, closed_form_sd, is_independent, marginals, push_t, Classification, Dist,
};
use charfield::padic::{
    branch_table, is_square, norm, padd, pdiv, pmul, psub, sqrt_hensel, sqrt_series, BranchRule,
    PAdic, DEFAULT_PRECISION,
};

#[derive(Parser)]
#[command(
    name = "charfield",
    version,
    about = "Exact checks for independence of S = ξ + η and D = (ξ − η)²"
)]
struct Cli {
    /// Worker threads for randomized trials (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification scenario and print its JSON report.
    Verify(VerifyArgs),
    /// p-adic arithmetic and square roots.
    Padic(PadicArgs),
    /// Operations on finite-support distributions.
    Dist(DistArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// lemma1, closed_form, theorem1, theorem2, remark1, remark2, theorem3,
    /// remark3, lemma3, lemma4, lemma5 or eq12.
    scenario: String,
    /// Carrier: fp:p, fpn:p,n, zmod:p,N or q.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    prec: u32,
    #[arg(long, default_value_t = harness::DEFAULT_TRIALS)]
    trials: u64,
    /// Master seed; falls back to CHARFIELD_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 3)]
    radius: u64,
    #[arg(long, default_value_t = 2)]
    denom_bound: u64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the report (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PadicOp {
    Sqrt,
    Series,
    Norm,
    IsSquare,
    Add,
    Sub,
    Mul,
    Div,
    Branch,
    Show,
}

#[derive(Args)]
struct PadicArgs {
    op: PadicOp,
    #[arg(long)]
    p: u64,
    /// An integer or `num/den`.
    #[arg(long)]
    value: Option<String>,
    /// Second operand for add, sub, mul and div.
    #[arg(long)]
    other: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    prec: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistOp {
    Push,
    ClosedForm,
    Marginals,
    Independent,
    Classify,
    Feq,
}

#[derive(Args)]
struct DistArgs {
    op: DistOp,
    #[arg(long)]
    field: String,
    /// `elem:num/den,...`
    #[arg(long)]
    mu: String,
    /// Second law for push and independent; defaults to mu.
    #[arg(long)]
    nu: Option<String>,
}

enum Out {
    /// Already formatted, printed verbatim.
    Raw(String),
    Json(Value),
}

type CliResult = Result<(Out, i32), String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = pool.install(|| match cli.command {
        Command::Verify(a) => verify(a),
        Command::Padic(a) => padic(a),
        Command::Dist(a) => dist(a),
    });
    match outcome {
        Ok((v, code)) => {
            match v {
                Out::Raw(s) => print!("{s}"),
                Out::Json(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("plain data"))
                }
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn verify(a: VerifyArgs) -> CliResult {
    let scenario: Scenario = a.scenario.parse().map_err(|e| format!("{e}"))?;
    let mut config = ScenarioConfig::new(scenario);
    if let Some(f) = &a.field {
        config.field = Some(f.parse::<RingSpec>().map_err(|e| e.to_string())?);
    }
    config.p = a.p;
    config.m = a.m;
    config.level = a.level;
    config.prec = a.prec;
    config.trials = a.trials;
    config.seed = match a.seed {
        Some(s) => s,
        None => default_seed().map_err(|e| e.to_string())?,
    };
    config.radius = a.radius;
    config.denom_bound = a.denom_bound;
    config.timing = a.timing;
    let report = harness::run(&config).map_err(|e| e.to_string())?;
    if let Some(path) = &a.out {
        emit(&report, path).map_err(|e| e.to_string())?;
    }
    Ok((Out::Raw(report.to_canonical_json()), exit_code(&report)))
}

fn parse_padic(p: u64, s: Option<&String>, prec: u32, flag: &str) -> Result<PAdic, String> {
    let s = s.ok_or_else(|| format!("--{flag} is required"))?;
    let r = parse_rational(s).ok_or_else(|| format!("--{flag} {s} is not a rational"))?;
    PAdic::from_rational(p, &r, prec).map_err(|e| e.to_string())
}

fn padic_json(x: &PAdic) -> Value {
    json!({ "text": x.to_string(), "json": serde_json::to_value(x).expect("plain data") })
}

fn padic(a: PadicArgs) -> CliResult {
    let err = |e: charfield::padic::PadicError| e.to_string();
    let p = a.p;
    let x = || parse_padic(p, a.value.as_ref(), a.prec, "value");
    let y = || parse_padic(p, a.other.as_ref(), a.prec, "other");
    let out = match a.op {
        PadicOp::Branch => {
            let t = branch_table(p).map_err(err)?;
            let rule = match t.rule() {
                BranchRule::Residues { .. } => "residues",
                BranchRule::UnitOneModFour => "unit_one_mod_four",
            };
            json!({ "p": p, "rule": rule, "primitive_root": t.primitive_root(),
                    "branch_residues": t.branch_residues() })
        }
        PadicOp::Show => padic_json(&x()?),
        PadicOp::Norm => json!(format_rational(&norm(&x()?))),
        PadicOp::IsSquare => json!(is_square(&x()?).map_err(err)?),
        PadicOp::Sqrt => {
            padic_json(&sqrt_hensel(&x()?, &branch_table(p).map_err(err)?).map_err(err)?)
        }
        PadicOp::Series => {
            padic_json(&sqrt_series(&x()?, &branch_table(p).map_err(err)?).map_err(err)?)
        }
        PadicOp::Add => padic_json(&padd(&x()?, &y()?).map_err(err)?),
        PadicOp::Sub => padic_json(&psub(&x()?, &y()?).map_err(err)?),
        PadicOp::Mul => padic_json(&pmul(&x()?, &y()?).map_err(err)?),
        PadicOp::Div => padic_json(&pdiv(&x()?, &y()?).map_err(err)?),
    };
    Ok((Out::Json(out), 0))
}

fn dist(a: DistArgs) -> CliResult {
    let err = |e: charfield::measure::MeasureError| e.to_string();
    let c: RingSpec = a
        .field
        .parse()
        .map_err(|e: charfield::algebra::AlgebraError| e.to_string())?;
    let mu = Dist::parse(&c, &a.mu).map_err(err)?;
    let nu = match &a.nu {
        Some(s) => Dist::parse(&c, s).map_err(err)?,
        None => mu.clone(),
    };
    let out = match a.op {
        DistOp::Push => serde_json::to_value(push_t(&mu, &nu).map_err(err)?).expect("plain data"),
        DistOp::ClosedForm => {
            serde_json::to_value(closed_form_sd(&mu).map_err(err)?).expect("plain data")
        }
        DistOp::Marginals => {
            let (s, d) = marginals(&push_t(&mu, &nu).map_err(err)?);
            json!({ "s": s.to_literal(), "d": d.to_literal() })
        }
        DistOp::Independent => {
            let v = is_independent(&push_t(&mu, &nu).map_err(err)?);
            match v.witness {
                None => json!({ "independent": true }),
                Some(w) => json!({
                    "independent": false,
                    "u": c.format_element(&w.u),
                    "v": c.format_element(&w.v),
                    "joint": format_rational(&w.joint),
                    "product": format_rational(&w.product),
                }),
            }
        }
        DistOp::Classify => match classify(&mu).map_err(err)? {
            Classification::Degenerate(x) => {
                json!({ "class": "degenerate", "point": c.format_element(&x) })
            }
            Classification::HaarShift { subgroup, shift } => json!({
                "class": "haar_shift",
                "subgroup": subgroup.elements().iter().map(|x| c.format_element(x)).collect::<Vec<_>>(),
                "shift": c.format_element(&shift),
            }),
            Classification::Other => json!({ "class": "other" }),
        },
        DistOp::Feq => charfield::characterize::feq_check(mu.pmf(), &c)
            .map_err(|e| e.to_string())?
            .to_json(&c),
    };
    Ok((Out::Json(out), 0))
}
