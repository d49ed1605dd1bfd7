//! Command-line front end. [`run`] maps an argument vector to stdout, stderr and an exit code
//! without touching any other state, so the binary is a thin shell around it.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid input.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::ainf::{full_table, ProductKey, StructureTable};
use crate::eisenstein::{classical_e2, eisenstein_value, EisensteinIndex, EisensteinMethod};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SummationConfig};
use crate::trees::{aggregate_tree_sum, MAX_TREE_LEAVES};
use crate::verify::{
    check_sign_lemma, check_tree_aggregate, run_suite, CheckKind, CheckReport, SuiteConfig,
    DEFAULT_CUSP_IM_TAU,
};

/// Environment variable overriding the default `--tol` of `eis` and `m-table`.
pub const TOL_ENV: &str = "ELLIPTIC_AINF_TOL";

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_RADIUS_MARGIN: f64 = 1.2;
/// Summation tolerance used by `verify` unless `--eps` is given.
pub const DEFAULT_VERIFY_EPS: f64 = 1e-15;

pub const CSV_HEADER: &str = "family,exponents,arity,inputs,output,re,im,tail_bound";

#[derive(Debug, Parser)]
#[command(
    name = "elliptic-ainf",
    version,
    about = "Eisenstein series and the A-infinity structure of an elliptic curve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate e*_n (n even >= 2).
    Eis(EisArgs),
    /// Emit the table of nonvanishing products m_n with n <= n-max.
    MTable(TableArgs),
    /// Run identity checks.
    Verify(VerifyArgs),
    /// Tree-sum buckets for xi^a, theta, xi_L^b, eta, xi^c, theta, xi_L^d.
    Trees(TreesArgs),
}

#[derive(Debug, Args)]
struct LatticeArgs {
    /// tau as `re,im`, for the lattice Z + Z tau.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, conflicts_with_all = ["omega1", "omega2"])]
    tau: Option<Complex64>,
    /// First basis vector as `re,im` (with --omega2).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "omega2")]
    omega1: Option<Complex64>,
    /// Second basis vector as `re,im` (with --omega1).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "omega1")]
    omega2: Option<Complex64>,
}

impl LatticeArgs {
    fn lattice(&self) -> Result<Lattice> {
        match (self.tau, self.omega1, self.omega2) {
            (_, Some(w1), Some(w2)) => Lattice::new(w1, w2),
            (Some(t), _, _) => Lattice::from_tau(t),
            _ => Lattice::from_tau(Complex64::new(0.0, 1.0)),
        }
    }

    fn describe(&self, l: &Lattice) -> Value {
        json!({ "omega1": cj(l.omega1()), "omega2": cj(l.omega2()), "tau": cj(l.tau()) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Rapid,
    Classical,
    QSeries,
    All,
}

#[derive(Debug, Args)]
struct EisArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value = "rapid")]
    method: MethodArg,
    /// Bound on the truncated tail of each lattice sum.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long = "n-max")]
    n_max: u32,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run every check (the default).
    #[arg(long, conflicts_with = "only")]
    all: bool,
    /// Run only the named groups: eis, zeros, symbolic, poisson, prop-i, prop-ii, weil,
    /// dual-route, ainfty, cusp, theta, m2, trees.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Values of Im tau for the cusp checks.
    #[arg(long = "im-tau", value_delimiter = ',')]
    im_tau: Vec<f64>,
    /// Tolerance replacing every check's own.
    #[arg(long)]
    tol: Option<f64>,
    /// Bound on the truncated tail of each lattice sum.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Debug, Args)]
struct TreesArgs {
    /// Exponents `a,b,c,d`.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 0, 0, 0])]
    exponents: Vec<u32>,
    /// Also check the closed-form sign on join trees with `n1,n2` extra leaves.
    #[arg(long, value_delimiter = ',')]
    sign: Option<Vec<usize>>,
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `re,im`, got '{s}'"));
    }
    let re = parts[0]
        .parse::<f64>()
        .map_err(|e| format!("bad real part: {e}"))?;
    let im = parts[1]
        .parse::<f64>()
        .map_err(|e| format!("bad imaginary part: {e}"))?;
    Ok(Complex64::new(re, im))
}

fn cj(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// One computed quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub index: Value,
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Everything a command prints in JSON form; the key order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub results: Vec<ResultRow>,
    pub suite: Option<Vec<CheckReport>>,
}

/// What a command invocation produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Values fixed at process start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defaults {
    pub tol: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { tol: DEFAULT_TOL }
    }
}

impl Defaults {
    /// Reads the tolerance override from the environment value, if any.
    pub fn from_env_value(value: Option<&str>) -> Result<Defaults> {
        match value {
            None => Ok(Defaults::default()),
            Some(s) => {
                let tol = s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidConfig(format!("{TOL_ENV}='{s}' is not a number"))
                })?;
                if !(tol > 0.0) {
                    return Err(Error::InvalidConfig(format!("{TOL_ENV} must be positive")));
                }
                Ok(Defaults { tol })
            }
        }
    }
}

fn to_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn summation(tol: f64) -> Result<SummationConfig> {
    let cfg = SummationConfig {
        target_epsilon: tol,
        radius_margin: DEFAULT_RADIUS_MARGIN,
        ..SummationConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn json_text(rec: &OutputRecord) -> String {
    let mut s = serde_json::to_string_pretty(rec).expect("records serialize");
    s.push('\n');
    s
}

enum Failure {
    Invalid(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, S>(args: I, defaults: Defaults) -> CliOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CliOutcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Eis(a) => cmd_eis(a, defaults),
        Command::MTable(a) => cmd_table(a, defaults),
        Command::Verify(a) => cmd_verify(a),
        Command::Trees(a) => cmd_trees(a),
    };
    match result {
        Ok(out) => out,
        Err(Failure::Invalid(e)) => CliOutcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn ok(stdout: String) -> CliOutcome {
    CliOutcome {
        code: 0,
        stdout,
        stderr: String::new(),
    }
}

fn cmd_eis(args: &EisArgs, defaults: Defaults) -> std::result::Result<CliOutcome, Failure> {
    let idx = EisensteinIndex::new(args.n)?;
    let lattice = args.lattice.lattice()?;
    let tol = args.tol.unwrap_or(defaults.tol);
    let cfg = summation(tol)?;
    let methods: Vec<EisensteinMethod> = match args.method {
        MethodArg::Rapid => vec![EisensteinMethod::Rapid],
        MethodArg::Classical => vec![EisensteinMethod::Classical],
        MethodArg::QSeries => vec![EisensteinMethod::QSeries],
        MethodArg::All => EisensteinMethod::ALL.to_vec(),
    };
    let mut results = Vec::new();
    for m in methods {
        let v = eisenstein_value(&lattice, idx, m, &cfg)?;
        results.push(ResultRow {
            index: json!({ "n": args.n, "method": m.as_str(), "quantity": "e*" }),
            value: v.value,
            tail_bound: v.tail_bound,
        });
        if m == EisensteinMethod::Classical && args.n == 2 {
            let (e2, correction) = classical_e2(&lattice, &cfg)?;
            results.push(ResultRow {
                index: json!({ "n": 2, "method": m.as_str(), "quantity": "e" }),
                value: e2.value,
                tail_bound: e2.tail_bound,
            });
            results.push(ResultRow {
                index: json!({ "n": 2, "method": m.as_str(), "quantity": "correction" }),
                value: correction,
                tail_bound: 0.0,
            });
        }
    }
    let mut inputs = to_map(args.lattice.describe(&lattice));
    inputs.insert("n".into(), json!(args.n));
    inputs.insert(
        "method".into(),
        json!(format!("{:?}", args.method).to_lowercase()),
    );
    inputs.insert("tol".into(), json!(tol));
    Ok(ok(json_text(&OutputRecord {
        command: "eis".into(),
        inputs,
        results,
        suite: None,
    })))
}

fn entry_index(
    key: &ProductKey,
    inputs: &[crate::ainf::BasisElement],
    output: crate::ainf::BasisElement,
) -> Value {
    let exps = match key {
        ProductKey::Binary { .. } => Vec::new(),
        ProductKey::Higher(idx) => idx.exponents.clone(),
    };
    json!({
        "family": key.label(),
        "exponents": exps,
        "arity": inputs.len(),
        "inputs": inputs.iter().map(|b| b.name()).collect::<Vec<_>>(),
        "output": output.name(),
    })
}

/// CSV rendering of a table: the fixed header, then one row per entry.
pub fn table_csv(table: &StructureTable) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for e in &table.entries {
        let exps = match &e.key {
            ProductKey::Binary { .. } => String::new(),
            ProductKey::Higher(idx) => idx
                .exponents
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(";"),
        };
        let inputs: Vec<&str> = e.inputs.iter().map(|b| b.name()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:e},{:e},{:e}",
            e.key.label(),
            exps,
            e.arity,
            inputs.join(" "),
            e.output.name(),
            e.coefficient.re,
            e.coefficient.im,
            e.tail_bound
        );
    }
    s
}

fn cmd_table(args: &TableArgs, defaults: Defaults) -> std::result::Result<CliOutcome, Failure> {
    let lattice = args.lattice.lattice()?;
    let tol = args.tol.unwrap_or(defaults.tol);
    let cfg = summation(tol)?;
    let table = full_table(&lattice, args.n_max, &cfg)?;
    if args.format == Format::Csv {
        return Ok(ok(table_csv(&table)));
    }
    let results = table
        .entries
        .iter()
        .map(|e| ResultRow {
            index: entry_index(&e.key, &e.inputs, e.output),
            value: e.coefficient,
            tail_bound: e.tail_bound,
        })
        .collect();
    let mut inputs = to_map(args.lattice.describe(&lattice));
    inputs.insert("n_max".into(), json!(args.n_max));
    inputs.insert("tol".into(), json!(tol));
    Ok(ok(json_text(&OutputRecord {
        command: "m-table".into(),
        inputs,
        results,
        suite: None,
    })))
}

fn cmd_verify(args: &VerifyArgs) -> std::result::Result<CliOutcome, Failure> {
    let only = args
        .only
        .iter()
        .map(|s| s.parse::<CheckKind>())
        .collect::<Result<Vec<_>>>()?;
    if let Some(t) = args.tol {
        if !(t >= 0.0) {
            return Err(Error::InvalidConfig(format!("--tol must be nonnegative, got {t}")).into());
        }
    }
    if args.im_tau.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::InvalidConfig("--im-tau values must be positive".into()).into());
    }
    let eps = args.eps.unwrap_or(DEFAULT_VERIFY_EPS);
    let cfg = SuiteConfig {
        summation: summation(eps)?,
        cusp_im_tau: if args.im_tau.is_empty() {
            DEFAULT_CUSP_IM_TAU.to_vec()
        } else {
            args.im_tau.clone()
        },
        tolerance: args.tol,
        only: only.clone(),
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg);
    let inputs = to_map(json!({
        "only": if only.is_empty() { json!("all") } else { json!(only.iter().map(|k| k.as_str()).collect::<Vec<_>>()) },
        "im_tau": cfg.cusp_im_tau,
        "tol": args.tol,
        "eps": eps,
    }));
    let mut stderr = format!("{} checks, {} failed\n", report.total, report.failures);
    for r in report.reports.iter().filter(|r| !r.passed) {
        let _ = writeln!(
            stderr,
            "FAIL {} {} residual {:e} > {:e}",
            r.name,
            Value::Object(r.inputs.clone()),
            r.residual,
            r.tolerance
        );
    }
    Ok(CliOutcome {
        code: if report.passed { 0 } else { 1 },
        stdout: json_text(&OutputRecord {
            command: "verify".into(),
            inputs,
            results: Vec::new(),
            suite: Some(report.reports),
        }),
        stderr,
    })
}

fn cmd_trees(args: &TreesArgs) -> std::result::Result<CliOutcome, Failure> {
    if args.exponents.len() != 4 {
        return Err(Error::InvalidIndex("--exponents takes four values a,b,c,d".into()).into());
    }
    if args.sign.as_ref().is_some_and(|s| s.len() != 2) {
        return Err(Error::InvalidIndex("--sign takes two values n1,n2".into()).into());
    }
    let e: Vec<usize> = args.exponents.iter().map(|&x| x as usize).collect();
    let (a, b, c, d) = (e[0], e[1], e[2], e[3]);
    if a + b + c + d + 3 > MAX_TREE_LEAVES {
        return Err(Error::Budget(format!(
            "{} leaves exceeds the enumeration limit of {MAX_TREE_LEAVES}",
            a + b + c + d + 3
        ))
        .into());
    }
    let agg = aggregate_tree_sum(a, b, c, d, false)?;
    let results = agg
        .buckets
        .iter()
        .map(|((k, l, p), v)| ResultRow {
            index: json!({ "phi": [k, l, p] }),
            value: Complex64::new(*v as f64, 0.0),
            tail_bound: 0.0,
        })
        .collect();
    let mut suite = vec![check_tree_aggregate([a, b, c, d])];
    if let Some(s) = &args.sign {
        suite.push(check_sign_lemma(s[0], s[1]));
    }
    let passed = suite.iter().all(|r| r.passed);
    let inputs = to_map(json!({
        "exponents": [a, b, c, d],
        "leaves": agg.leaves,
        "trees_enumerated": agg.trees_enumerated,
        "vanishing_degree": agg.vanishing_degree,
        "contributing": agg.contributing,
    }));
    Ok(CliOutcome {
        code: if passed { 0 } else { 1 },
        stdout: json_text(&OutputRecord {
            command: "trees".into(),
            inputs,
            results,
            suite: Some(suite),
        }),
        stderr: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> CliOutcome {
        let mut v = vec!["elliptic-ainf"];
        v.extend_from_slice(args);
        run(v, Defaults::default())
    }

    #[test]
    fn parse_complex_pairs() {
        assert_eq!(
            parse_complex("0.25,1.5").unwrap(),
            Complex64::new(0.25, 1.5)
        );
        assert_eq!(parse_complex("-1, 2").unwrap(), Complex64::new(-1.0, 2.0));
        assert!(parse_complex("1").is_err());
    }

    #[test]
    fn eis_record() {
        let out = call(&["eis", "--tau", "0,2", "--n", "4", "--method", "rapid"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let rec: OutputRecord = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(rec.command, "eis");
        assert_eq!(rec.results.len(), 1);
        assert!(rec.results[0].tail_bound <= 1e-10);
    }

    #[test]
    fn eis_invalid_index() {
        let out = call(&["eis", "--n", "3"]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("n must be even ≥ 2"), "{}", out.stderr);
    }

    #[test]
    fn env_defaults() {
        assert_eq!(Defaults::from_env_value(None).unwrap().tol, DEFAULT_TOL);
        assert_eq!(Defaults::from_env_value(Some("1e-12")).unwrap().tol, 1e-12);
        assert!(Defaults::from_env_value(Some("abc")).is_err());
        assert!(Defaults::from_env_value(Some("-1")).is_err());
    }

    #[test]
    fn unknown_check_is_invalid() {
        assert_eq!(call(&["verify", "--only", "bogus"]).code, 2);
    }
}
