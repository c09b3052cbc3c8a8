//! Command-line front end: operator and curve I/O, one verb per analysis,
//! JSON reports with CSV companions for external plotting.
//!
//! Exit codes: 0 when every certified check in the run passes, 1 when a
//! check fails, 2 on usage or input errors. Every JSON report embeds the
//! config that produced it, together with the grids, seeds, and refinement
//! deltas of the run. Reports are deterministic: floating-point values are
//! printed in the shortest form that round-trips the binary double (the
//! serde_json rule, at most 17 significant digits), collections keep a
//! fixed order, and no timestamps are recorded, so identical configs
//! produce byte-identical files.
//!
//! Verbs: `profile`, `meansquare`, `naboko`, `vancasteren`, `dynkin`,
//! `transplant`, `charfn`, `rho`, `power`, `zoo`, `verify-extension`,
//! `lemma-integral`, `criteria`, `reproduce-paper`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::criteria::{
    self, default_band_grid, mean_square, meansquare_implies_pointwise_check, nf_criterion,
    power_bounded_check, probe_vectors, resolvent_profile, rho_tests, CharacteristicFunction,
    DiskGrid, MeanSquareGrid, ProbeSpec, ProfileGrid, Thresholds,
};
use crate::curves::{
    nice_family, radial_diffeo, CurveFamily, FamilySide, JordanCurve, DEFAULT_GRID_DENSITY,
};
use crate::dynkin::{
    cauchy_green_apply, comparability_report, hausdorff_distance, lemma_integral_bound_with,
    transplant_result, QuadratureSpec,
};
use crate::io::{self, atomic_write};
use crate::linalg::{eigenvalues, operator_norm, ComplexMatrix, Lu};
use crate::pseudoanalytic::{jet_extension, verify_extension, CurveFunction, ExtensionSampleSpec};
use crate::zoo::{self, shift_f, shift_real_part_top_eig, transfer_product, u_pm, MakeParams,
    OperatorKind, WeightedShiftSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CRITERION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

const VERBS: &str = "profile, meansquare, naboko, vancasteren, dynkin, transplant, charfn, \
     rho, power, zoo, verify-extension, lemma-integral, criteria, reproduce-paper";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input {path}: {detail}")]
    Input { path: String, detail: String },
    #[error("[{module}] {detail}")]
    Module {
        module: &'static str,
        detail: String,
    },
}

/// Wraps a downstream error with the name of the module it came from.
fn me<E: std::fmt::Display>(module: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Module {
        module,
        detail: e.to_string(),
    }
}

fn input_err<E: std::fmt::Display>(path: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Input {
        path: path.to_string(),
        detail: e.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Complete description of one run. Defaults are documented per field; a
/// config round-trips through JSON without loss, and every report embeds
/// the config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Verb to execute. Default `reproduce-paper`.
    pub command: String,
    /// Sub-action for verbs that take one (`zoo make`, `dynkin apply`).
    /// Default: empty.
    pub action: String,
    /// Operator file, JSON or CSV. Default: empty, which builds the
    /// operator from `kind`, `curve`, `n`, and the generator fields below.
    pub matrix: String,
    /// Built-in curve spec (`circle`, `circle:R`, `ellipse:A:B`,
    /// `blob:SEED`) or a path to a curve JSON file. Default `circle`.
    pub curve: String,
    /// Generated-operator kind: `normal`, `similar`, `jordan`, `shift`.
    /// Default `normal`.
    pub kind: String,
    /// Dimension of generated operators. Default 16.
    pub n: usize,
    /// Boundary function for the calculus verbs: `rational:EXPR` over the
    /// variable z or `boundary-samples:PATH`. Default `rational:z`.
    #[serde(rename = "fn")]
    pub function: String,
    /// First shift weight for `kind = shift`. Default: unset.
    pub alpha: Option<f64>,
    /// Second shift weight for `kind = shift`. Default: unset.
    pub beta: Option<f64>,
    /// Condition-number target for `kind = similar`. Default: unset.
    pub kappa: Option<f64>,
    /// Operator radius for the `rho` verb. Default 2.
    pub rho: f64,
    /// Power-sweep length for the `power` verb. Default 256.
    pub steps: usize,
    /// Contour nodes for the quadrature verbs. Default 512.
    pub quad_nodes: usize,
    /// Radial quadrature layers. Default 16.
    pub quad_layers: usize,
    /// Angular samples per profile level. Default 25.
    pub grid_angular: usize,
    /// Dyadic distance levels of the profile tube. Default 4.
    pub grid_levels: usize,
    /// Number of scales in the mean-square grid. Default 12.
    pub scales: usize,
    /// Trapezoid node floor per family curve. Default 1024.
    pub min_nodes: usize,
    /// Speed of the shrinking curve families. Default 0.5.
    pub family_speed: f64,
    /// Family side for the mean-square verbs, `outside` or `inside`.
    /// Default `outside`.
    pub side: String,
    /// Inner annulus radius for `lemma-integral`. Default 0.5.
    pub annulus_a: f64,
    /// Outer annulus radius for `lemma-integral`. Default 2.
    pub annulus_b: f64,
    /// Weight exponent for `lemma-integral`, in (-1, 0). Default -0.5.
    pub exponent: f64,
    /// Seed for generated operators and probe vectors. Default 7.
    pub seed: u64,
    /// Report directory. Default `reports`.
    pub out: String,
    /// Artifact path for `zoo make`. Default: empty, which picks
    /// `<out>/operator.json`.
    pub output: String,
    /// Section filter for `reproduce-paper`. Default: empty, run all.
    pub suite: Vec<String>,
    /// Named tolerance overrides; unnamed tolerances keep their built-in
    /// defaults. Default: empty.
    pub tol: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: "reproduce-paper".into(),
            action: String::new(),
            matrix: String::new(),
            curve: "circle".into(),
            kind: "normal".into(),
            n: 16,
            function: "rational:z".into(),
            alpha: None,
            beta: None,
            kappa: None,
            rho: 2.0,
            steps: 256,
            quad_nodes: 512,
            quad_layers: 16,
            grid_angular: 25,
            grid_levels: 4,
            scales: 12,
            min_nodes: 1024,
            family_speed: 0.5,
            side: "outside".into(),
            annulus_a: 0.5,
            annulus_b: 2.0,
            exponent: -0.5,
            seed: 7,
            out: "reports".into(),
            output: String::new(),
            suite: Vec::new(),
            tol: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    /// Tolerance override lookup with a built-in default.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tol.get(name).copied().unwrap_or(default)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "scl",
    version,
    about = "Resolvent-criteria toolkit: tube profiles, mean-square certificates, \
             boundary functional calculus, and model operators"
)]
struct Cli {
    /// Verb to run (see --help for the list).
    verb: String,
    /// Sub-action for verbs that take one (zoo make).
    action: Option<String>,
    /// Operator file (JSON or CSV); omitted means a generated operator.
    #[arg(long)]
    matrix: Option<String>,
    /// Built-in curve spec or curve file path.
    #[arg(long, default_value = "circle")]
    curve: String,
    /// Generated-operator kind: normal | similar | jordan | shift.
    #[arg(long, default_value = "normal")]
    kind: String,
    /// Dimension of generated operators.
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Boundary function: rational:EXPR or boundary-samples:PATH.
    #[arg(long = "fn", default_value = "rational:z")]
    function: String,
    /// First shift weight (kind = shift).
    #[arg(long)]
    alpha: Option<f64>,
    /// Second shift weight (kind = shift).
    #[arg(long)]
    beta: Option<f64>,
    /// Condition-number target (kind = similar).
    #[arg(long)]
    kappa: Option<f64>,
    /// Operator radius for the rho verb.
    #[arg(long, default_value_t = 2.0)]
    rho: f64,
    /// Power-sweep length.
    #[arg(long, default_value_t = 256)]
    steps: usize,
    /// Quadrature override NODES,LAYERS.
    #[arg(long, value_name = "NODES,LAYERS")]
    quad: Option<String>,
    /// Profile grid override ANGULAR,LEVELS.
    #[arg(long, value_name = "ANGULAR,LEVELS")]
    grid: Option<String>,
    /// Number of scales in the mean-square grid.
    #[arg(long, default_value_t = 12)]
    scales: usize,
    /// Trapezoid node floor per family curve.
    #[arg(long, default_value_t = 1024)]
    min_nodes: usize,
    /// Speed of the shrinking curve families.
    #[arg(long, default_value_t = 0.5)]
    family_speed: f64,
    /// Family side: outside | inside.
    #[arg(long, default_value = "outside")]
    side: String,
    /// Annulus override A,B for lemma-integral.
    #[arg(long, value_name = "A,B")]
    annulus: Option<String>,
    /// Weight exponent for lemma-integral.
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    exponent: f64,
    /// Seed for generated operators and probe vectors.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Report directory.
    #[arg(long, default_value = "reports")]
    out: String,
    /// Artifact path for zoo make.
    #[arg(short, long)]
    output: Option<String>,
    /// Restrict reproduce-paper to named sections (repeatable).
    #[arg(long)]
    suite: Vec<String>,
    /// Tolerance override NAME=VALUE (repeatable).
    #[arg(long, value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

fn parse_pair(spec: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "{what} wants two comma-separated values, got {spec:?}"
        )));
    }
    let a = parts[0].trim().parse::<f64>();
    let b = parts[1].trim().parse::<f64>();
    match (a, b) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        _ => Err(CliError::Usage(format!("could not parse {what} {spec:?}"))),
    }
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut config = RunConfig {
            command: self.verb,
            action: self.action.unwrap_or_default(),
            matrix: self.matrix.unwrap_or_default(),
            curve: self.curve,
            kind: self.kind,
            n: self.n,
            function: self.function,
            alpha: self.alpha,
            beta: self.beta,
            kappa: self.kappa,
            rho: self.rho,
            steps: self.steps,
            scales: self.scales,
            min_nodes: self.min_nodes,
            family_speed: self.family_speed,
            side: self.side,
            exponent: self.exponent,
            seed: self.seed,
            out: self.out,
            output: self.output.unwrap_or_default(),
            suite: self.suite,
            ..RunConfig::default()
        };
        if let Some(q) = &self.quad {
            let (nodes, layers) = parse_pair(q, "--quad")?;
            config.quad_nodes = nodes as usize;
            config.quad_layers = layers as usize;
        }
        if let Some(g) = &self.grid {
            let (angular, levels) = parse_pair(g, "--grid")?;
            config.grid_angular = angular as usize;
            config.grid_levels = levels as usize;
        }
        if let Some(a) = &self.annulus {
            let (lo, hi) = parse_pair(a, "--annulus")?;
            config.annulus_a = lo;
            config.annulus_b = hi;
        }
        for entry in &self.tol {
            let (name, value) = entry.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--tol wants NAME=VALUE, got {entry:?}"))
            })?;
            let value: f64 = value.parse().map_err(|_| {
                CliError::Usage(format!("--tol {name}: bad value {value:?}"))
            })?;
            config.tol.insert(name.trim().to_string(), value);
        }
        Ok(config)
    }
}

/// Parses the process arguments, runs the verb, and maps the outcome to the
/// exit-code contract.
pub fn main_entry() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match cli.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match run(&config) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CRITERION,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Runs one configured verb. `Ok(true)` means every certified check in the
/// run passed, `Ok(false)` means at least one failed; errors are input or
/// environment problems.
pub fn run(config: &RunConfig) -> Result<bool, CliError> {
    let out = PathBuf::from(&config.out);
    fs::create_dir_all(&out).map_err(input_err(&config.out))?;
    match config.command.as_str() {
        "profile" => run_profile(config, &out),
        "meansquare" => run_meansquare(config, &out),
        "naboko" => run_naboko(config, &out),
        "vancasteren" => run_vancasteren(config, &out),
        "dynkin" => run_dynkin(config, &out),
        "transplant" => run_transplant(config, &out),
        "charfn" => run_charfn(config, &out),
        "rho" => run_rho(config, &out),
        "power" => run_power(config, &out),
        "zoo" => run_zoo(config, &out),
        "verify-extension" => run_verify_extension(config, &out),
        "lemma-integral" => run_lemma_integral(config, &out),
        "reproduce-paper" => run_reproduce(config, &out),
        "criteria" => run_criteria(config, &out),
        other => Err(CliError::Usage(format!(
            "unknown verb {other:?}; expected one of: {VERBS}"
        ))),
    }
}

/// Umbrella verb over the operator-criteria checks: `criteria run --suite
/// NAME` dispatches to the matching single-check verb, `--suite all` (or no
/// suite) runs the full battery against one operator and fails if any check
/// fails.
fn run_criteria(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    if config.action != "run" {
        return Err(CliError::Usage(format!(
            "criteria takes the action \"run\", got {:?}",
            config.action
        )));
    }
    const ALL: [&str; 7] = [
        "pointwise",
        "meansquare",
        "naboko",
        "vancasteren",
        "charfn",
        "rho",
        "power",
    ];
    let wanted: Vec<String> = if config.suite.is_empty()
        || config.suite.iter().any(|s| s == "all")
    {
        ALL.iter().map(|s| s.to_string()).collect()
    } else {
        config.suite.clone()
    };
    let mut all_pass = true;
    for name in &wanted {
        let pass = match name.as_str() {
            "pointwise" => run_profile(config, out),
            "meansquare" => run_meansquare(config, out),
            "naboko" => run_naboko(config, out),
            "vancasteren" => run_vancasteren(config, out),
            "charfn" => run_charfn(config, out),
            "rho" => run_rho(config, out),
            "power" => run_power(config, out),
            other => Err(CliError::Usage(format!(
                "unknown criteria suite {other:?}; expected one of: pointwise, meansquare, \
                 naboko, vancasteren, charfn, rho, power, all"
            ))),
        }?;
        all_pass &= pass;
    }
    Ok(all_pass)
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn load_curve(config: &RunConfig) -> Result<JordanCurve, CliError> {
    let head = config.curve.split(':').next().unwrap_or("");
    if matches!(head, "circle" | "ellipse" | "blob") {
        return JordanCurve::builtin(&config.curve).map_err(me("curves"));
    }
    let data = io::read_curve(Path::new(&config.curve)).map_err(input_err(&config.curve))?;
    JordanCurve::from_file_data(&data, DEFAULT_GRID_DENSITY).map_err(me("curves"))
}

fn load_operator(
    config: &RunConfig,
    curve: &JordanCurve,
) -> Result<(ComplexMatrix, String), CliError> {
    if !config.matrix.is_empty() {
        let m = io::read_matrix(Path::new(&config.matrix)).map_err(input_err(&config.matrix))?;
        return Ok((m, format!("file:{}", config.matrix)));
    }
    let kind = OperatorKind::from_str(&config.kind).map_err(CliError::Usage)?;
    let params = MakeParams {
        kappa: config.kappa,
        alpha: config.alpha,
        beta: config.beta,
        angle: None,
    };
    let m = zoo::make_operator(kind, curve, config.n, &params, config.seed).map_err(me("zoo"))?;
    Ok((m, format!("{}:{}", config.kind, config.n)))
}

fn family_side(config: &RunConfig) -> Result<FamilySide, CliError> {
    match config.side.as_str() {
        "outside" => Ok(FamilySide::Outside),
        "inside" => Ok(FamilySide::Inside),
        other => Err(CliError::Usage(format!(
            "--side wants outside or inside, got {other:?}"
        ))),
    }
}

fn load_family(
    config: &RunConfig,
    curve: &JordanCurve,
    side: FamilySide,
) -> Result<CurveFamily, CliError> {
    let diffeo = radial_diffeo(curve, None).map_err(me("curves"))?;
    nice_family(&diffeo, side, config.family_speed).map_err(me("curves"))
}

/// Geometric scale grid from 1e-3 up to 1, `count` points.
fn scale_grid(count: usize) -> Result<Vec<f64>, CliError> {
    if count < 2 {
        return Err(CliError::Usage(format!(
            "--scales must be at least 2, got {count}"
        )));
    }
    Ok((0..count)
        .map(|i| 1e-3f64.powf(1.0 - i as f64 / (count - 1) as f64))
        .collect())
}

fn ms_grid(config: &RunConfig) -> Result<MeanSquareGrid, CliError> {
    Ok(MeanSquareGrid {
        s_values: scale_grid(config.scales)?,
        min_nodes: config.min_nodes,
    })
}

fn probes_from(config: &RunConfig) -> ProbeSpec {
    ProbeSpec {
        random: 8,
        seed: config.seed,
    }
}

fn thresholds_from(config: &RunConfig) -> Thresholds {
    let d = Thresholds::default();
    Thresholds {
        growth_cut: config.tolerance("growth", d.growth_cut),
        kappa_cut: config.tolerance("kappa_cut", d.kappa_cut),
        stampfli_tol: config.tolerance("stampfli", d.stampfli_tol),
        contraction_tol: config.tolerance("contraction", d.contraction_tol),
    }
}

/// A float as a JSON value; non-finite values become strings so the report
/// stays serializable.
fn jf(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(format!("{v}"))
    }
}

fn write_json(out: &Path, name: &str, body: &Value) -> Result<PathBuf, CliError> {
    let path = out.join(name);
    let text = format!("{}\n", serde_json::to_string_pretty(body).expect("serializable report"));
    atomic_write(&path, text.as_bytes()).map_err(input_err(&path.display().to_string()))?;
    Ok(path)
}

fn write_csv(
    out: &Path,
    name: &str,
    header: &str,
    rows: &[Vec<String>],
) -> Result<PathBuf, CliError> {
    let path = out.join(name);
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    atomic_write(&path, text.as_bytes()).map_err(input_err(&path.display().to_string()))?;
    Ok(path)
}

fn report_value<T: Serialize>(config: &RunConfig, body: &T) -> Value {
    json!({ "config": config, "report": body })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

// ---------------------------------------------------------------------------
// Rational boundary expressions
// ---------------------------------------------------------------------------

/// Tiny rational-expression language over the complex variable `z`:
/// numbers, `i`, parentheses, `+ - * /`, and integer powers via `^`.
pub mod expr {
    use num_complex::Complex64;

    use crate::linalg::{ComplexMatrix, Lu};

    #[derive(Clone, Debug)]
    pub enum Node {
        Z,
        Const(Complex64),
        Neg(Box<Node>),
        Add(Box<Node>, Box<Node>),
        Sub(Box<Node>, Box<Node>),
        Mul(Box<Node>, Box<Node>),
        Div(Box<Node>, Box<Node>),
        Pow(Box<Node>, i32),
    }

    pub fn parse(src: &str) -> Result<Node, String> {
        let mut p = Parser { src, pos: 0 };
        let node = p.expression()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.fail("trailing input"));
        }
        Ok(node)
    }

    struct Parser<'a> {
        src: &'a str,
        pos: usize,
    }

    impl<'a> Parser<'a> {
        fn fail(&self, what: &str) -> String {
            format!("{what} at byte {} of {:?}", self.pos, self.src)
        }

        fn skip_ws(&mut self) {
            while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
                self.pos += 1;
            }
        }

        fn peek(&self) -> Option<char> {
            self.src[self.pos..].chars().next()
        }

        fn eat(&mut self, c: char) -> bool {
            self.skip_ws();
            if self.peek() == Some(c) {
                self.pos += c.len_utf8();
                true
            } else {
                false
            }
        }

        fn expression(&mut self) -> Result<Node, String> {
            let mut node = self.term()?;
            loop {
                if self.eat('+') {
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                } else if self.eat('-') {
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                } else {
                    return Ok(node);
                }
            }
        }

        fn term(&mut self) -> Result<Node, String> {
            let mut node = self.unary()?;
            loop {
                if self.eat('*') {
                    node = Node::Mul(Box::new(node), Box::new(self.unary()?));
                } else if self.eat('/') {
                    node = Node::Div(Box::new(node), Box::new(self.unary()?));
                } else {
                    return Ok(node);
                }
            }
        }

        fn unary(&mut self) -> Result<Node, String> {
            if self.eat('-') {
                return Ok(Node::Neg(Box::new(self.unary()?)));
            }
            self.power()
        }

        fn power(&mut self) -> Result<Node, String> {
            let base = self.atom()?;
            if self.eat('^') {
                let k = self.integer()?;
                return Ok(Node::Pow(Box::new(base), k));
            }
            Ok(base)
        }

        fn integer(&mut self) -> Result<i32, String> {
            self.skip_ws();
            let start = self.pos;
            if self.peek() == Some('-') {
                self.pos += 1;
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            self.src[start..self.pos]
                .parse()
                .map_err(|_| self.fail("expected an integer exponent"))
        }

        fn atom(&mut self) -> Result<Node, String> {
            self.skip_ws();
            match self.peek() {
                Some('(') => {
                    self.pos += 1;
                    let node = self.expression()?;
                    if !self.eat(')') {
                        return Err(self.fail("expected a closing parenthesis"));
                    }
                    Ok(node)
                }
                Some('z') => {
                    self.pos += 1;
                    Ok(Node::Z)
                }
                Some('i') => {
                    self.pos += 1;
                    Ok(Node::Const(Complex64::new(0.0, 1.0)))
                }
                Some(c) if c.is_ascii_digit() || c == '.' => {
                    let start = self.pos;
                    while self
                        .peek()
                        .is_some_and(|c| c.is_ascii_digit() || c == '.')
                    {
                        self.pos += 1;
                    }
                    if self.peek() == Some('e') || self.peek() == Some('E') {
                        self.pos += 1;
                        if matches!(self.peek(), Some('+') | Some('-')) {
                            self.pos += 1;
                        }
                        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                            self.pos += 1;
                        }
                    }
                    let lit = &self.src[start..self.pos];
                    lit.parse::<f64>()
                        .map(|v| Node::Const(Complex64::new(v, 0.0)))
                        .map_err(|_| self.fail("expected a number"))
                }
                _ => Err(self.fail("expected a factor")),
            }
        }
    }

    impl Node {
        pub fn eval(&self, z: Complex64) -> Complex64 {
            match self {
                Node::Z => z,
                Node::Const(c) => *c,
                Node::Neg(a) => -a.eval(z),
                Node::Add(a, b) => a.eval(z) + b.eval(z),
                Node::Sub(a, b) => a.eval(z) - b.eval(z),
                Node::Mul(a, b) => a.eval(z) * b.eval(z),
                Node::Div(a, b) => a.eval(z) / b.eval(z),
                Node::Pow(a, k) => a.eval(z).powi(*k),
            }
        }

        /// Evaluates the expression at a matrix argument. Everything here
        /// is a rational function of the one variable, so all intermediate
        /// matrices commute and quotients are well defined wherever the
        /// denominator is invertible.
        pub fn eval_matrix(&self, t: &ComplexMatrix) -> Result<ComplexMatrix, String> {
            let n = t.dim();
            let value = match self {
                Node::Z => t.clone(),
                Node::Const(c) => ComplexMatrix::identity(n).scale(*c),
                Node::Neg(a) => a.eval_matrix(t)?.scale(Complex64::new(-1.0, 0.0)),
                Node::Add(a, b) => a.eval_matrix(t)?.add(&b.eval_matrix(t)?),
                Node::Sub(a, b) => a.eval_matrix(t)?.sub(&b.eval_matrix(t)?),
                Node::Mul(a, b) => a.eval_matrix(t)?.matmul(&b.eval_matrix(t)?),
                Node::Div(a, b) => {
                    let denom = b.eval_matrix(t)?;
                    let lu = Lu::factor(&denom);
                    if lu.min_pivot() == 0.0 {
                        return Err("denominator is singular at the operator".into());
                    }
                    a.eval_matrix(t)?.matmul(&lu.inverse())
                }
                Node::Pow(a, k) => {
                    let base = a.eval_matrix(t)?;
                    let abs_pow = |m: &ComplexMatrix, k: u32| {
                        let mut acc = ComplexMatrix::identity(n);
                        for _ in 0..k {
                            acc = acc.matmul(m);
                        }
                        acc
                    };
                    if *k >= 0 {
                        abs_pow(&base, *k as u32)
                    } else {
                        let lu = Lu::factor(&base);
                        if lu.min_pivot() == 0.0 {
                            return Err("negative power of a singular operator".into());
                        }
                        abs_pow(&lu.inverse(), k.unsigned_abs())
                    }
                }
            };
            Ok(value)
        }
    }
}

#[derive(Deserialize)]
struct SamplesFile {
    values: Vec<String>,
}

/// Trigonometric interpolation of uniform periodic samples onto a grid of
/// `m` points. Uniform data determines the bandlimited trig polynomial
/// exactly, so smooth inputs stay smooth; linear interpolation would kink
/// the tangential derivative the jet extension differentiates.
fn resample_periodic(values: &[Complex64], m: usize) -> Vec<Complex64> {
    let l = values.len();
    if l == m {
        return values.to_vec();
    }
    let mut coeffs: Vec<Complex64> = Vec::with_capacity(l);
    for k in 0..l {
        let mut acc = Complex64::default();
        for (j, v) in values.iter().enumerate() {
            acc += v * Complex64::from_polar(1.0, -TAU * (j * k) as f64 / l as f64);
        }
        coeffs.push(acc / l as f64);
    }
    (0..m)
        .map(|p| {
            let x = p as f64 / m as f64;
            let mut acc = Complex64::default();
            for (k, c) in coeffs.iter().enumerate() {
                if 2 * k == l {
                    // Split the Nyquist mode evenly between +l/2 and -l/2.
                    acc += c * (TAU * k as f64 * x).cos();
                } else {
                    let freq = if 2 * k > l { k as f64 - l as f64 } else { k as f64 };
                    acc += c * Complex64::from_polar(1.0, TAU * freq * x);
                }
            }
            acc
        })
        .collect()
}

/// Loads the boundary function named by `spec` onto the curve grid. The
/// expression tree comes back too when the function is rational, so verbs
/// with an exact oracle can evaluate it directly.
fn load_function(
    spec: &str,
    curve: &JordanCurve,
) -> Result<(CurveFunction, Option<expr::Node>), CliError> {
    if let Some(src) = spec.strip_prefix("rational:") {
        let node = expr::parse(src).map_err(|e| CliError::Usage(format!("--fn: {e}")))?;
        let data = CurveFunction::from_closure(curve, |z| node.eval(z));
        return Ok((data, Some(node)));
    }
    if let Some(path) = spec.strip_prefix("boundary-samples:") {
        let text = fs::read_to_string(path).map_err(input_err(path))?;
        let file: SamplesFile = serde_json::from_str(&text).map_err(input_err(path))?;
        if file.values.len() < 8 {
            return Err(CliError::Input {
                path: path.into(),
                detail: format!("need at least 8 boundary samples, got {}", file.values.len()),
            });
        }
        let mut values = Vec::with_capacity(file.values.len());
        for (i, cell) in file.values.iter().enumerate() {
            let v = io::parse_complex(cell).map_err(|e| CliError::Input {
                path: path.into(),
                detail: format!("values[{i}]: {e}"),
            })?;
            values.push(v);
        }
        let resampled = resample_periodic(&values, curve.grid_size());
        return Ok((CurveFunction::from_samples(curve, resampled), None));
    }
    Err(CliError::Usage(format!(
        "--fn wants rational:EXPR or boundary-samples:PATH, got {spec:?}"
    )))
}

fn quad_from(config: &RunConfig) -> QuadratureSpec {
    QuadratureSpec {
        contour_nodes: config.quad_nodes,
        radial_layers: config.quad_layers,
        ..QuadratureSpec::default()
    }
}

// ---------------------------------------------------------------------------
// Verbs
// ---------------------------------------------------------------------------

fn run_profile(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let grid = ProfileGrid {
        angular: config.grid_angular,
        levels: config.grid_levels,
        d_max: None,
    };
    let thresholds = thresholds_from(config);
    let profile = resolvent_profile(&t, &curve, &grid, &thresholds).map_err(me("criteria"))?;
    let pass = profile.stampfli_normal;

    let body = json!({
        "source": source,
        "grid": { "angular": grid.angular, "levels": grid.levels },
        "levels": profile.levels,
        "c_inside": jf(profile.c_inside),
        "c_outside": jf(profile.c_outside),
        "stampfli_normal": profile.stampfli_normal,
        "sample_count": profile.samples.len(),
    });
    let path = write_json(out, "profile.json", &report_value(config, &body))?;
    let rows: Vec<Vec<String>> = profile
        .samples
        .iter()
        .map(|s| {
            vec![
                format!("{:?}", s.side),
                s.level.to_string(),
                s.lambda.re.to_string(),
                s.lambda.im.to_string(),
                s.dist.to_string(),
                s.norm.to_string(),
                (s.dist * s.norm).to_string(),
            ]
        })
        .collect();
    write_csv(
        out,
        "profile.csv",
        "side,level,lambda_re,lambda_im,dist,resolvent_norm,dist_times_norm",
        &rows,
    )?;
    println!(
        "profile: C_inside = {:.6e}, C_outside = {:.6e}, normal identity {} ({})",
        profile.c_inside,
        profile.c_outside,
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

fn meansquare_csv_rows(report: &criteria::MeanSquareReport) -> Vec<Vec<String>> {
    report
        .per_s
        .iter()
        .map(|(s, v)| vec![s.to_string(), v.to_string()])
        .collect()
}

fn run_meansquare(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let family = load_family(config, &curve, family_side(config)?)?;
    let grid = ms_grid(config)?;
    let report = mean_square(&t, &family, false, &probes_from(config), &grid)
        .map_err(me("criteria"))?;
    let growth_cut = config.tolerance("growth", Thresholds::default().growth_cut);
    let pass = report.fitted_c.is_finite() && report.growth_exponent.abs() <= growth_cut;

    let body = json!({
        "source": source,
        "side": config.side,
        "seed": config.seed,
        "grid": { "s_values": grid.s_values, "min_nodes": grid.min_nodes },
        "per_s": report.per_s,
        "fitted_c": jf(report.fitted_c),
        "growth_exponent": jf(report.growth_exponent),
        "growth_cut": growth_cut,
    });
    let path = write_json(out, "meansquare.json", &report_value(config, &body))?;
    write_csv(out, "meansquare.csv", "s,per_s", &meansquare_csv_rows(&report))?;
    println!(
        "meansquare: fitted C = {:.6e}, growth exponent = {:+.4}, {} ({})",
        report.fitted_c,
        report.growth_exponent,
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

fn run_naboko(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let family = load_family(config, &curve, family_side(config)?)?;
    let grid = ms_grid(config)?;
    let probes = probes_from(config);
    let forward = mean_square(&t, &family, false, &probes, &grid).map_err(me("criteria"))?;
    let adjoint = mean_square(&t, &family, true, &probes, &grid).map_err(me("criteria"))?;
    let growth_cut = config.tolerance("growth", Thresholds::default().growth_cut);
    let pass = forward.fitted_c.is_finite()
        && adjoint.fitted_c.is_finite()
        && forward.growth_exponent.abs() <= growth_cut
        && adjoint.growth_exponent.abs() <= growth_cut;

    let body = json!({
        "source": source,
        "side": config.side,
        "seed": config.seed,
        "grid": { "s_values": grid.s_values, "min_nodes": grid.min_nodes },
        "forward": {
            "per_s": forward.per_s,
            "fitted_c": jf(forward.fitted_c),
            "growth_exponent": jf(forward.growth_exponent),
        },
        "adjoint": {
            "per_s": adjoint.per_s,
            "fitted_c": jf(adjoint.fitted_c),
            "growth_exponent": jf(adjoint.growth_exponent),
        },
        "growth_cut": growth_cut,
    });
    let path = write_json(out, "naboko.json", &report_value(config, &body))?;
    let rows: Vec<Vec<String>> = forward
        .per_s
        .iter()
        .zip(&adjoint.per_s)
        .map(|((s, f), (_, a))| vec![s.to_string(), f.to_string(), a.to_string()])
        .collect();
    write_csv(out, "naboko.csv", "s,per_s_forward,per_s_adjoint", &rows)?;
    println!(
        "naboko: forward C = {:.6e} (exp {:+.4}), adjoint C = {:.6e} (exp {:+.4}), {} ({})",
        forward.fitted_c,
        forward.growth_exponent,
        adjoint.fitted_c,
        adjoint.growth_exponent,
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

fn run_vancasteren(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let side = family_side(config)?;
    let family = load_family(config, &curve, side)?;
    let grid = ProfileGrid {
        angular: config.grid_angular,
        levels: config.grid_levels,
        d_max: None,
    };
    let thresholds = thresholds_from(config);
    let profile = resolvent_profile(&t, &curve, &grid, &thresholds).map_err(me("criteria"))?;
    let link = meansquare_implies_pointwise_check(
        &t,
        &family,
        &profile,
        &probes_from(config),
        &ms_grid(config)?,
        &thresholds,
    )
    .map_err(me("criteria"))?;
    let pass = link.applicable && link.link_constant.is_some_and(f64::is_finite);

    let body = json!({
        "source": source,
        "side": config.side,
        "seed": config.seed,
        "applicable": link.applicable,
        "growth_exponent": jf(link.growth_exponent),
        "fitted_c": jf(link.fitted_c),
        "per_level": link.per_level.iter().map(|l| json!({
            "distance": l.distance,
            "pointwise": jf(l.pointwise),
            "prediction": jf(l.prediction),
        })).collect::<Vec<_>>(),
        "link_constant": link.link_constant.map(jf),
    });
    let path = write_json(out, "vancasteren.json", &report_value(config, &body))?;
    let rows: Vec<Vec<String>> = link
        .per_level
        .iter()
        .map(|l| {
            vec![
                l.distance.to_string(),
                l.pointwise.to_string(),
                l.prediction.to_string(),
            ]
        })
        .collect();
    write_csv(out, "vancasteren.csv", "distance,pointwise,prediction", &rows)?;
    match link.link_constant {
        Some(k) => println!(
            "vancasteren: link constant = {:.6e}, {} ({})",
            k,
            verdict(pass),
            path.display()
        ),
        None => println!(
            "vancasteren: mean-square hypothesis failed (growth exponent {:+.4}), FAIL ({})",
            link.growth_exponent,
            path.display()
        ),
    }
    Ok(pass)
}

fn matrix_artifacts(
    out: &Path,
    stem: &str,
    m: &ComplexMatrix,
) -> Result<PathBuf, CliError> {
    let json_path = out.join(format!("{stem}.json"));
    io::write_matrix(&json_path, m).map_err(input_err(&json_path.display().to_string()))?;
    let csv_path = out.join(format!("{stem}.csv"));
    atomic_write(&csv_path, io::matrix_to_csv(m).as_bytes())
        .map_err(input_err(&csv_path.display().to_string()))?;
    Ok(json_path)
}

fn run_dynkin(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    if !config.action.is_empty() && config.action != "apply" {
        return Err(CliError::Usage(format!(
            "dynkin supports only the apply action, got {:?}",
            config.action
        )));
    }
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let (data, node) = load_function(&config.function, &curve)?;
    let alpha = config.tolerance("alpha", 0.9);
    let delta = 0.4 * curve.reach();
    let ext = jet_extension(&curve, &data, delta, alpha).map_err(me("pseudoanalytic"))?;
    let diffeo = radial_diffeo(&curve, None).map_err(me("curves"))?;
    let fam_out = nice_family(&diffeo, FamilySide::Outside, config.family_speed)
        .map_err(me("curves"))?;
    let fam_in =
        nice_family(&diffeo, FamilySide::Inside, config.family_speed).map_err(me("curves"))?;
    let quad = quad_from(config);
    let result =
        cauchy_green_apply(&t, &ext, &curve, &fam_out, &fam_in, &quad).map_err(me("dynkin"))?;

    let result_norm = operator_norm(&result.matrix);
    let oracle_error = match &node {
        Some(n) => {
            let direct = n
                .eval_matrix(&t)
                .map_err(|e| CliError::Module { module: "cli", detail: e })?;
            let denom = operator_norm(&direct).max(f64::MIN_POSITIVE);
            Some(operator_norm(&result.matrix.sub(&direct)) / denom)
        }
        None => None,
    };
    let rel_residual = result.residual_estimate / result_norm.max(f64::MIN_POSITIVE);
    let pass = match oracle_error {
        Some(err) => err <= config.tolerance("dynkin", 1e-3),
        None => rel_residual <= config.tolerance("residual", 1e-3),
    };

    let matrix_path = matrix_artifacts(out, "dynkin_matrix", &result.matrix)?;
    let body = json!({
        "source": source,
        "function": config.function,
        "quad": { "contour_nodes": quad.contour_nodes, "radial_layers": quad.radial_layers },
        "tube": { "delta": delta, "alpha": alpha, "family_speed": config.family_speed },
        "result_norm": jf(result_norm),
        "contour_norm": jf(operator_norm(&result.contour_part)),
        "area_norm": jf(operator_norm(&result.area_part)),
        "residual_estimate": jf(result.residual_estimate),
        "relative_residual": jf(rel_residual),
        "oracle_error": oracle_error.map(jf),
        "matrix_file": matrix_path.display().to_string(),
    });
    let path = write_json(out, "dynkin.json", &report_value(config, &body))?;
    let mut rows = vec![
        vec!["result_norm".into(), result_norm.to_string()],
        vec!["residual_estimate".into(), result.residual_estimate.to_string()],
        vec!["relative_residual".into(), rel_residual.to_string()],
    ];
    if let Some(err) = oracle_error {
        rows.push(vec!["oracle_error".into(), err.to_string()]);
    }
    write_csv(out, "dynkin.csv", "quantity,value", &rows)?;
    match oracle_error {
        Some(err) => println!(
            "dynkin: oracle error = {:.6e}, residual = {:.6e}, {} ({})",
            err,
            result.residual_estimate,
            verdict(pass),
            path.display()
        ),
        None => println!(
            "dynkin: relative residual = {:.6e}, {} ({})",
            rel_residual,
            verdict(pass),
            path.display()
        ),
    }
    Ok(pass)
}

fn run_transplant(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let diffeo = radial_diffeo(&curve, None).map_err(me("curves"))?;
    let quad = quad_from(config);
    let result = transplant_result(&t, &diffeo, &curve, &quad).map_err(me("dynkin"))?;
    let a = result.matrix;

    let a_eigs = eigenvalues(&a).map_err(me("linalg"))?;
    let t_eigs = eigenvalues(&t).map_err(me("linalg"))?;
    let mapped: Vec<Complex64> = t_eigs.iter().map(|&ev| diffeo.forward(ev)).collect();
    let hd = hausdorff_distance(&a_eigs, &mapped);
    let pass = hd <= config.tolerance("hausdorff", 1e-3);

    let matrix_path = matrix_artifacts(out, "transplant_matrix", &a)?;
    let body = json!({
        "source": source,
        "quad": { "contour_nodes": quad.contour_nodes, "radial_layers": quad.radial_layers },
        "hausdorff": jf(hd),
        "residual_estimate": jf(result.residual_estimate),
        "eigenvalues": a_eigs,
        "mapped_eigenvalues": mapped,
        "matrix_file": matrix_path.display().to_string(),
    });
    let path = write_json(out, "transplant.json", &report_value(config, &body))?;
    let rows: Vec<Vec<String>> = a_eigs
        .iter()
        .map(|ev| {
            let (gap, nearest) = mapped.iter().fold(
                (f64::INFINITY, Complex64::default()),
                |(best, arg), &m| {
                    let d = (ev - m).norm();
                    if d < best {
                        (d, m)
                    } else {
                        (best, arg)
                    }
                },
            );
            vec![
                ev.re.to_string(),
                ev.im.to_string(),
                nearest.re.to_string(),
                nearest.im.to_string(),
                gap.to_string(),
            ]
        })
        .collect();
    write_csv(
        out,
        "transplant.csv",
        "eig_re,eig_im,mapped_re,mapped_im,gap",
        &rows,
    )?;
    println!(
        "transplant: spectral Hausdorff gap = {:.6e}, {} ({})",
        hd,
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

fn run_charfn(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let grid = DiskGrid {
        edge_margin: config.tolerance("edge", 1e-2),
        ..DiskGrid::default()
    };
    let report = nf_criterion(&t, &grid).map_err(me("criteria"))?;
    let pass = report.empty_defect || report.invertible_everywhere;

    let mut rows: Vec<Vec<String>> = Vec::new();
    if !report.empty_defect {
        let cf = CharacteristicFunction::new(&t).map_err(me("criteria"))?;
        for &z in &report.grid {
            let rep = cf.evaluate(z).map_err(me("criteria"))?;
            let lu = Lu::factor(&rep);
            let inv_norm = if lu.min_pivot() == 0.0 {
                f64::INFINITY
            } else {
                operator_norm(&lu.inverse())
            };
            rows.push(vec![
                z.re.to_string(),
                z.im.to_string(),
                inv_norm.to_string(),
            ]);
        }
    }

    let body = json!({
        "source": source,
        "grid": {
            "radial": grid.radial,
            "angular": grid.angular,
            "edge_margin": grid.edge_margin,
            "points": report.grid.len(),
        },
        "empty_defect": report.empty_defect,
        "sup_inv_norm": jf(report.sup_inv_norm),
        "invertible_everywhere": report.invertible_everywhere,
        "singular_points": report.singular_points,
    });
    let path = write_json(out, "charfn.json", &report_value(config, &body))?;
    write_csv(out, "charfn.csv", "lambda_re,lambda_im,inverse_norm", &rows)?;
    if report.empty_defect {
        println!(
            "charfn: defect space is trivial (operator is unitary), vacuous PASS ({})",
            path.display()
        );
    } else {
        println!(
            "charfn: sup inverse norm = {:.6e}, invertible everywhere = {}, {} ({})",
            report.sup_inv_norm,
            report.invertible_everywhere,
            verdict(pass),
            path.display()
        );
    }
    Ok(pass)
}

fn run_rho(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    if config.rho < 2.0 {
        return Err(CliError::Usage(format!(
            "--rho must be at least 2, got {}",
            config.rho
        )));
    }
    let band = default_band_grid(config.rho, 6, 64);
    let report = rho_tests(&t, config.rho, 64, &band).map_err(me("criteria"))?;
    let pass = report.holds;

    let body = json!({
        "source": source,
        "rho": config.rho,
        "grid": { "theta_count": 64, "band_radial": 6, "band_angular": 64 },
        "real_part_margin": jf(report.real_part_margin),
        "band_margin": jf(report.band_margin),
        "holds": report.holds,
    });
    let path = write_json(out, "rho.json", &report_value(config, &body))?;
    let rows: Vec<Vec<String>> = report
        .band_samples
        .iter()
        .map(|s| {
            vec![
                s.lambda.re.to_string(),
                s.lambda.im.to_string(),
                s.norm.to_string(),
                s.bound.to_string(),
            ]
        })
        .collect();
    write_csv(
        out,
        "rho.csv",
        "lambda_re,lambda_im,resolvent_norm,allowed_bound",
        &rows,
    )?;
    println!(
        "rho: real-part margin = {:+.6e}, band margin = {:+.6e}, {} ({})",
        report.real_part_margin,
        report.band_margin,
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

fn run_power(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (t, source) = load_operator(config, &curve)?;
    let report = power_bounded_check(&t, config.steps);
    let pass = !report.unbounded;

    // Short norm trajectory for plotting; the sweep above carries the
    // certified supremum.
    let mut rows: Vec<Vec<String>> = vec![vec!["0".into(), "1".into()]];
    let mut p = ComplexMatrix::identity(t.dim());
    for k in 1..=config.steps.min(64) {
        p = p.matmul(&t);
        let norm = operator_norm(&p);
        rows.push(vec![k.to_string(), norm.to_string()]);
        if !norm.is_finite() || norm > 1e12 {
            break;
        }
    }

    let body = json!({
        "source": source,
        "n_max": report.n_max,
        "sup_forward": jf(report.sup_forward),
        "sup_backward": report.sup_backward.map(jf),
        "unbounded": report.unbounded,
        "abort_at": report.abort_at,
    });
    let path = write_json(out, "power.json", &report_value(config, &body))?;
    write_csv(out, "power.csv", "k,power_norm", &rows)?;
    println!(
        "power: sup forward = {:.6e}, backward = {}, {} ({})",
        report.sup_forward,
        report
            .sup_backward
            .map_or("n/a".to_string(), |v| format!("{v:.6e}")),
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

fn run_zoo(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    if config.action != "make" {
        return Err(CliError::Usage(format!(
            "zoo supports the make action (`zoo make --kind ...`), got {:?}",
            config.action
        )));
    }
    let curve = load_curve(config)?;
    let kind = OperatorKind::from_str(&config.kind).map_err(CliError::Usage)?;
    let params = MakeParams {
        kappa: config.kappa,
        alpha: config.alpha,
        beta: config.beta,
        angle: None,
    };
    let m = zoo::make_operator(kind, &curve, config.n, &params, config.seed).map_err(me("zoo"))?;

    let target = if config.output.is_empty() {
        out.join("operator.json")
    } else {
        PathBuf::from(&config.output)
    };
    io::write_matrix(&target, &m).map_err(input_err(&target.display().to_string()))?;
    let csv_target = target.with_extension("csv");
    atomic_write(&csv_target, io::matrix_to_csv(&m).as_bytes())
        .map_err(input_err(&csv_target.display().to_string()))?;

    let mut body = json!({
        "kind": config.kind,
        "n": config.n,
        "seed": config.seed,
        "operator_norm": jf(operator_norm(&m)),
        "matrix_file": target.display().to_string(),
    });
    if kind == OperatorKind::Shift {
        let spec = WeightedShiftSpec::new(
            config.alpha.unwrap_or_default(),
            config.beta.unwrap_or_default(),
            config.n,
        )
        .map_err(me("zoo"))?;
        body["in_regime"] = json!(spec.in_regime());
        body["weight_square_sum"] = json!(spec.weight_square_sum());
    }
    let path = write_json(out, "zoo_make.json", &report_value(config, &body))?;
    println!(
        "zoo make: wrote {} ({} x {}), report {}",
        target.display(),
        config.n,
        config.n,
        path.display()
    );
    Ok(true)
}

fn run_verify_extension(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let curve = load_curve(config)?;
    let (data, _) = load_function(&config.function, &curve)?;
    let alpha = config.tolerance("alpha", 0.9);
    let delta = 0.4 * curve.reach();
    let ext = jet_extension(&curve, &data, delta, alpha).map_err(me("pseudoanalytic"))?;

    let base = ExtensionSampleSpec::default();
    let refined = ExtensionSampleSpec {
        angular: base.angular * 2,
        radial: base.radial * 2,
        ..base
    };
    let constant = verify_extension(&ext, &curve, &base);
    let constant_refined = verify_extension(&ext, &curve, &refined);
    let drift = (constant_refined - constant).abs() / constant.max(f64::MIN_POSITIVE);
    // Below the stencil noise floor the defect has effectively vanished
    // and drift between two noise samples carries no information, so the
    // floor route certifies analytic data on its own.
    let floor = config.tolerance("floor", 1e-8);
    let pass = constant.is_finite()
        && constant_refined.is_finite()
        && (constant <= floor || drift <= config.tolerance("drift", 0.10));

    // Per-sample decay data for plotting: the dbar defect against distance.
    let mut rows: Vec<Vec<String>> = Vec::new();
    for j in 0..base.angular {
        let t = TAU * j as f64 / base.angular as f64;
        let p = curve.psi(t);
        let dp = curve.psi_t(t);
        let normal = -Complex64::new(0.0, 1.0) * dp / dp.norm();
        for lvl in 0..base.radial {
            let frac = base.inner_fraction
                + (base.outer_fraction - base.inner_fraction) * lvl as f64
                    / (base.radial - 1) as f64;
            let d = frac * delta;
            for side in [1.0, -1.0] {
                let z = p + side * d * normal;
                let defect = ext.dbar(z).norm();
                rows.push(vec![
                    d.to_string(),
                    defect.to_string(),
                    (defect / d.powf(alpha)).to_string(),
                ]);
            }
        }
    }

    let body = json!({
        "function": config.function,
        "alpha": alpha,
        "delta": delta,
        "sampling": { "angular": base.angular, "radial": base.radial, "both_sides": base.both_sides },
        "constant": jf(constant),
        "constant_refined": jf(constant_refined),
        "drift": jf(drift),
        "floor": floor,
    });
    let path = write_json(out, "verify_extension.json", &report_value(config, &body))?;
    write_csv(out, "verify_extension.csv", "dist,dbar_norm,ratio", &rows)?;
    println!(
        "verify-extension: constant = {:.6e}, refined = {:.6e}, drift = {:.3}%, {} ({})",
        constant,
        constant_refined,
        100.0 * drift,
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

fn lemma_w_grid(a: f64, b: f64) -> Vec<Complex64> {
    let mut grid = Vec::with_capacity(16);
    for i in 0..4 {
        let r = a + (b - a) * i as f64 / 3.0;
        for j in 0..4 {
            grid.push(Complex64::from_polar(r, TAU * j as f64 / 4.0));
        }
    }
    grid
}

fn run_lemma_integral(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let (a, b, beta) = (config.annulus_a, config.annulus_b, config.exponent);
    if !(0.0 < a && a < 1.0 && b > 1.0) {
        return Err(CliError::Usage(format!(
            "--annulus must straddle the unit circle with 0 < A < 1 < B, got {a},{b}"
        )));
    }
    if !(-1.0..0.0).contains(&beta) {
        return Err(CliError::Usage(format!(
            "--exponent must lie in (-1, 0), got {beta}"
        )));
    }
    let grid = lemma_w_grid(a, b);
    let sup = lemma_integral_bound_with(a, b, beta, &grid, 1);
    let sup_refined = lemma_integral_bound_with(a, b, beta, &grid, 2);
    let drift = (sup_refined - sup).abs() / sup.max(f64::MIN_POSITIVE);
    let pass = sup.is_finite() && sup_refined.is_finite()
        && drift < config.tolerance("drift", 0.02);

    let per_w: Vec<f64> = grid
        .iter()
        .map(|&w| lemma_integral_bound_with(a, b, beta, &[w], 1))
        .collect();
    let body = json!({
        "annulus": [a, b],
        "exponent": beta,
        "w_grid": grid,
        "per_w": per_w,
        "sup": jf(sup),
        "sup_refined": jf(sup_refined),
        "drift": jf(drift),
    });
    let path = write_json(out, "lemma_integral.json", &report_value(config, &body))?;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&per_w)
        .map(|(w, v)| vec![w.re.to_string(), w.im.to_string(), v.to_string()])
        .collect();
    write_csv(out, "lemma_integral.csv", "w_re,w_im,integral", &rows)?;
    println!(
        "lemma-integral: sup = {:.6e}, refined = {:.6e}, drift = {:.3}%, {} ({})",
        sup,
        sup_refined,
        100.0 * drift,
        verdict(pass),
        path.display()
    );
    Ok(pass)
}

// ---------------------------------------------------------------------------
// The reproduction suite
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
struct SuiteRow {
    section: &'static str,
    name: &'static str,
    measured: f64,
    required: String,
    pass: bool,
}

impl SuiteRow {
    fn new(
        section: &'static str,
        name: &'static str,
        measured: f64,
        required: impl Into<String>,
        pass: bool,
    ) -> Self {
        SuiteRow {
            section,
            name,
            measured,
            required: required.into(),
            pass,
        }
    }
}

fn roots_of_unity(n: usize) -> ComplexMatrix {
    let diag: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect();
    ComplexMatrix::from_diag(&diag)
}

/// Offset ring of spectral parameters for the comparability checks: points
/// pushed off the curve along the outward normal on both sides.
fn comparability_grid(curve: &JordanCurve, count: usize, fraction: f64) -> Vec<Complex64> {
    let d = fraction * curve.reach();
    let mut grid = Vec::with_capacity(2 * count);
    for j in 0..count {
        let t = TAU * (j as f64 + 0.37) / count as f64;
        let p = curve.psi(t);
        let dp = curve.psi_t(t);
        let normal = -Complex64::new(0.0, 1.0) * dp / dp.norm();
        grid.push(p + d * normal);
        grid.push(p - d * normal);
    }
    grid
}

fn profile_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let curve = JordanCurve::builtin("circle").map_err(me("curves"))?;
    let grid = ProfileGrid::default();
    let thresholds = Thresholds::default();

    let normal = roots_of_unity(16);
    let profile = resolvent_profile(&normal, &curve, &grid, &thresholds).map_err(me("criteria"))?;
    let c = profile.c_inside.max(profile.c_outside);
    rows.push(SuiteRow::new(
        "profile",
        "normal-profile-c-equals-one",
        c,
        "|C - 1| <= 1e-6",
        (c - 1.0).abs() <= 1e-6,
    ));

    let params = MakeParams {
        kappa: Some(10.0),
        ..MakeParams::default()
    };
    let similar = zoo::make_operator(OperatorKind::Similar, &curve, 8, &params, config.seed)
        .map_err(me("zoo"))?;
    let sp = crate::linalg::spectrum(&similar).map_err(me("linalg"))?;
    let kappa = sp.diagonalizer_condition.value().unwrap_or(f64::INFINITY);
    let profile = resolvent_profile(&similar, &curve, &grid, &thresholds).map_err(me("criteria"))?;
    let c = profile.c_inside.max(profile.c_outside);
    rows.push(SuiteRow::new(
        "profile",
        "similar-profile-bounded-by-kappa",
        c,
        format!("C <= kappa = {kappa:.3e}"),
        c <= kappa + 1e-6,
    ));
    Ok(())
}

fn calculus_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let curve = JordanCurve::builtin("circle").map_err(me("curves"))?;
    let t = roots_of_unity(8);
    let node = expr::parse("1/(z-2)").expect("fixed expression parses");
    let data = CurveFunction::from_closure(&curve, |z| node.eval(z));
    let ext = jet_extension(&curve, &data, 0.4 * curve.reach(), 0.9)
        .map_err(me("pseudoanalytic"))?;
    let diffeo = radial_diffeo(&curve, None).map_err(me("curves"))?;
    let fam_out = nice_family(&diffeo, FamilySide::Outside, 0.5).map_err(me("curves"))?;
    let fam_in = nice_family(&diffeo, FamilySide::Inside, 0.5).map_err(me("curves"))?;
    let quad = quad_from(config);
    let result =
        cauchy_green_apply(&t, &ext, &curve, &fam_out, &fam_in, &quad).map_err(me("dynkin"))?;
    let direct = node
        .eval_matrix(&t)
        .map_err(|e| CliError::Module { module: "cli", detail: e })?;
    let rel = operator_norm(&result.matrix.sub(&direct))
        / operator_norm(&direct).max(f64::MIN_POSITIVE);
    rows.push(SuiteRow::new(
        "calculus",
        "dynkin-rational-oracle",
        rel,
        "relative error <= 1e-3",
        rel <= 1e-3,
    ));
    Ok(())
}

fn transplant_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let curve = JordanCurve::builtin("ellipse:1.2:1").map_err(me("curves"))?;
    let diffeo = radial_diffeo(&curve, None).map_err(me("curves"))?;
    let t = zoo::make_operator(
        OperatorKind::Normal,
        &curve,
        8,
        &MakeParams::default(),
        config.seed,
    )
    .map_err(me("zoo"))?;
    let quad = quad_from(config);
    let a = transplant_result(&t, &diffeo, &curve, &quad)
        .map_err(me("dynkin"))?
        .matrix;
    let a_eigs = eigenvalues(&a).map_err(me("linalg"))?;
    let mapped: Vec<Complex64> = eigenvalues(&t)
        .map_err(me("linalg"))?
        .iter()
        .map(|&ev| diffeo.forward(ev))
        .collect();
    let hd = hausdorff_distance(&a_eigs, &mapped);
    rows.push(SuiteRow::new(
        "transplant",
        "transplant-spectral-map",
        hd,
        "Hausdorff gap <= 1e-3",
        hd <= 1e-3,
    ));

    // Grid stability of the measured comparability constant for the same
    // transplanted pair.
    let probes = probe_vectors(8, &ProbeSpec { random: 4, seed: config.seed });
    let coarse = comparability_grid(&curve, 8, 0.3);
    let fine = comparability_grid(&curve, 16, 0.3);
    let c_coarse = comparability_report(&t, &a, &diffeo, &coarse, &probes)
        .map_err(me("dynkin"))?
        .constant;
    let c_fine = comparability_report(&t, &a, &diffeo, &fine, &probes)
        .map_err(me("dynkin"))?
        .constant;
    let change = (c_fine - c_coarse).abs() / c_coarse.max(f64::MIN_POSITIVE);
    rows.push(SuiteRow::new(
        "comparability",
        "comparability-grid-stability",
        change,
        "relative change < 0.2 under grid doubling",
        change < 0.2 && c_fine.is_finite(),
    ));
    Ok(())
}

fn comparability_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let circle = JordanCurve::builtin("circle").map_err(me("curves"))?;
    let diffeo = radial_diffeo(&circle, None).map_err(me("curves"))?;
    let t = roots_of_unity(8);
    let probes = probe_vectors(8, &ProbeSpec { random: 4, seed: config.seed });
    let grid = comparability_grid(&circle, 8, 0.3);
    let c = comparability_report(&t, &t, &diffeo, &grid, &probes)
        .map_err(me("dynkin"))?
        .constant;
    rows.push(SuiteRow::new(
        "comparability",
        "comparability-identity",
        c,
        "C <= 1 + 1e-10",
        c <= 1.0 + 1e-10,
    ));

    let big = JordanCurve::builtin("circle:2").map_err(me("curves"))?;
    let diffeo2 = radial_diffeo(&big, None).map_err(me("curves"))?;
    let u = roots_of_unity(8);
    let t2 = u.scale(Complex64::new(2.0, 0.0));
    let grid2 = comparability_grid(&big, 8, 0.3);
    let c2 = comparability_report(&t2, &u, &diffeo2, &grid2, &probes)
        .map_err(me("dynkin"))?
        .constant;
    rows.push(SuiteRow::new(
        "comparability",
        "comparability-scaling",
        c2,
        "|C - 2| <= 1e-10",
        (c2 - 2.0).abs() <= 1e-10,
    ));
    Ok(())
}

fn meansquare_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let curve = JordanCurve::builtin("circle").map_err(me("curves"))?;
    let diffeo = radial_diffeo(&curve, None).map_err(me("curves"))?;
    let family = nice_family(&diffeo, FamilySide::Outside, 1.0).map_err(me("curves"))?;
    let t = roots_of_unity(8);
    let grid = MeanSquareGrid::default();
    let report = mean_square(&t, &family, false, &probes_from(config), &grid)
        .map_err(me("criteria"))?;

    // Outside circles of radius r = 1 + s, the scaled integral for a
    // unitary has the closed form 2 pi r / (r + 1): the Poisson-type
    // integral of |e^{i theta} - lambda|^-2 over |lambda| = r equals
    // 2 pi r / (r^2 - 1) regardless of theta, and the factor s = r - 1
    // cancels one denominator root.
    let mut worst = 0.0f64;
    for &(s, v) in &report.per_s {
        let r = 1.0 + s;
        let exact = TAU * r / (r + 1.0);
        worst = worst.max((v - exact).abs() / exact);
    }
    rows.push(SuiteRow::new(
        "meansquare",
        "unitary-closed-form",
        worst,
        "relative error <= 1e-4",
        worst <= 1e-4,
    ));
    rows.push(SuiteRow::new(
        "meansquare",
        "unitary-growth-exponent",
        report.growth_exponent.abs(),
        "|exponent| <= 0.02",
        report.growth_exponent.abs() <= 0.02,
    ));
    Ok(())
}

fn violator_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let curve = JordanCurve::builtin("circle").map_err(me("curves"))?;
    let jordan = zoo::make_operator(
        OperatorKind::Jordan,
        &curve,
        2,
        &MakeParams::default(),
        config.seed,
    )
    .map_err(me("zoo"))?;

    let family = load_family(config, &curve, FamilySide::Outside)?;
    let report = mean_square(&jordan, &family, false, &probes_from(config), &ms_grid(config)?)
        .map_err(me("criteria"))?;
    rows.push(SuiteRow::new(
        "violator",
        "jordan-growth-exponent",
        report.growth_exponent,
        "exponent >= 0.8",
        report.growth_exponent >= 0.8,
    ));

    let grid = ProfileGrid::default();
    let profile = resolvent_profile(&jordan, &curve, &grid, &Thresholds::default())
        .map_err(me("criteria"))?;
    let finest = profile.levels.len() - 1;
    let d = profile.levels[finest];
    let peak = profile
        .level_constant(crate::curves::Side::Interior, finest)
        .max(profile.level_constant(crate::curves::Side::Exterior, finest));
    rows.push(SuiteRow::new(
        "violator",
        "jordan-profile-lower-bound",
        peak,
        format!("sup dist*norm >= 0.5/dist = {:.3e} at the finest level", 0.5 / d),
        peak >= 0.5 / d,
    ));
    Ok(())
}

fn shift_rows(rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let alpha = std::f64::consts::SQRT_2;
    let beta = alpha;
    let spec = WeightedShiftSpec::new(alpha, beta, 101).map_err(me("zoo"))?;
    let t = spec.matrix();

    let band = default_band_grid(2.0, 6, 64);
    let rho = rho_tests(&t, 2.0, 64, &band).map_err(me("criteria"))?;
    rows.push(SuiteRow::new(
        "shift",
        "shift-2-contraction",
        rho.real_part_margin,
        "margin >= -1e-8",
        rho.real_part_margin >= -1e-8,
    ));

    let mut f_min = f64::INFINITY;
    for k in 0..50 {
        let lambda = 2.0 + 8.0 * (k + 1) as f64 / 50.0;
        f_min = f_min.min(shift_f(lambda, alpha, beta).map_err(me("zoo"))?);
    }
    rows.push(SuiteRow::new(
        "shift",
        "shift-f-positivity",
        f_min,
        "min over the lambda grid > 0",
        f_min > 0.0,
    ));

    // Claimed identity: the transfer combination equals f(lambda). The
    // measured residual is dominated by the gap 2 lambda^2 - s.
    let mut rng = {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(7)
    };
    let mut residual = 0.0f64;
    for _ in 0..100 {
        use rand::Rng;
        let lambda = 2.0 + 4.0 * rng.gen::<f64>().max(1e-6);
        let (plus, minus) = u_pm(lambda).map_err(me("zoo"))?;
        let m = transfer_product(lambda, alpha, beta).entries;
        let combination = plus * (m[1][0] * minus + m[1][1]) - (m[0][0] * minus + m[0][1]);
        let f = shift_f(lambda, alpha, beta).map_err(me("zoo"))?;
        residual = residual.max((combination - f).abs() / f.abs().max(1.0));
    }
    rows.push(SuiteRow::new(
        "shift",
        "shift-transfer-identity",
        residual,
        "relative residual <= 1e-9",
        residual <= 1e-9,
    ));

    let heavy = WeightedShiftSpec::new(alpha, beta, 401).map_err(me("zoo"))?;
    let top = shift_real_part_top_eig(&heavy).map_err(me("zoo"))?;
    rows.push(SuiteRow::new(
        "shift",
        "shift-top-eig-band",
        top,
        "top eigenvalue <= 2 + 1e-3",
        top <= 2.0 + 1e-3,
    ));

    let free = WeightedShiftSpec::new(1.0, 1.0, 101).map_err(me("zoo"))?;
    let free_top = shift_real_part_top_eig(&free).map_err(me("zoo"))?;
    let exact = 2.0 * (std::f64::consts::PI / 102.0).cos();
    rows.push(SuiteRow::new(
        "shift",
        "shift-free-top-eig",
        (free_top - exact).abs(),
        "|top - 2 cos(pi/102)| <= 1e-10",
        (free_top - exact).abs() <= 1e-10,
    ));

    let power = power_bounded_check(&t, 256);
    rows.push(SuiteRow::new(
        "shift",
        "shift-power-bounded",
        power.sup_forward,
        format!("sup ||T^n|| <= alpha beta = {:.6}", alpha * beta),
        !power.unbounded && power.sup_forward <= alpha * beta + 1e-9,
    ));
    Ok(())
}

fn lemma_rows(rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let grid = lemma_w_grid(0.5, 2.0);
    let sup = lemma_integral_bound_with(0.5, 2.0, -0.5, &grid, 1);
    let refined = lemma_integral_bound_with(0.5, 2.0, -0.5, &grid, 2);
    let drift = (refined - sup).abs() / sup.max(f64::MIN_POSITIVE);
    rows.push(SuiteRow::new(
        "lemma",
        "lemma-integral-uniformity",
        drift,
        "finite sup, drift < 0.02 under mesh doubling",
        sup.is_finite() && drift < 0.02,
    ));
    Ok(())
}

fn extension_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    let curve = JordanCurve::builtin("ellipse:1.2:1").map_err(me("curves"))?;
    let spec = ExtensionSampleSpec::default();

    let identity = CurveFunction::from_closure(&curve, |z| z);
    let ext = jet_extension(&curve, &identity, 0.4 * curve.reach(), 0.9)
        .map_err(me("pseudoanalytic"))?;
    let constant = verify_extension(&ext, &curve, &spec);
    rows.push(SuiteRow::new(
        "extension",
        "extension-z-exact",
        constant,
        "defect constant <= 1e-8 for f(z) = z",
        constant <= 1e-8,
    ));

    // One seeded boundary polynomial of degree 8.
    let coeffs: Vec<Complex64> = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
        (0..=8)
            .map(|k| {
                let scale = 1.0 / (1.0 + k as f64);
                Complex64::new(
                    scale * (2.0 * rng.gen::<f64>() - 1.0),
                    scale * (2.0 * rng.gen::<f64>() - 1.0),
                )
            })
            .collect()
    };
    let poly = move |z: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::default(), |acc, &c| acc * z + c)
    };
    let data = CurveFunction::from_closure(&curve, poly);
    let ext = jet_extension(&curve, &data, 0.4 * curve.reach(), 0.9)
        .map_err(me("pseudoanalytic"))?;
    let base = verify_extension(&ext, &curve, &spec);
    let refined = verify_extension(
        &ext,
        &curve,
        &ExtensionSampleSpec {
            angular: spec.angular * 2,
            radial: spec.radial * 2,
            ..spec
        },
    );
    let drift = (refined - base).abs() / base.max(f64::MIN_POSITIVE);
    rows.push(SuiteRow::new(
        "extension",
        "extension-poly-drift",
        drift,
        "drift < 0.1 under sampling refinement",
        base.is_finite() && drift < 0.1,
    ));
    Ok(())
}

fn charfn_rows(config: &RunConfig, rows: &mut Vec<SuiteRow>) -> Result<(), CliError> {
    // Scalar contraction: the characteristic function is the Mobius map
    // (lambda - t) / (1 - t lambda).
    let t = 0.5;
    let scalar = ComplexMatrix::from_diag(&[Complex64::new(t, 0.0)]);
    let cf = CharacteristicFunction::new(&scalar).map_err(me("criteria"))?;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let lambda = Complex64::from_polar(0.9 * (k + 1) as f64 / 20.0, 0.37 * k as f64);
        let measured = cf.evaluate(lambda).map_err(me("criteria"))?.get(0, 0);
        let exact = (lambda - t) / (1.0 - t * lambda);
        worst = worst.max((measured - exact).norm());
    }
    rows.push(SuiteRow::new(
        "charfn",
        "charfn-scalar-mobius",
        worst,
        "pointwise error <= 1e-12 at 20 grid points",
        worst <= 1e-12,
    ));

    // Theta(0) acts as -T on the defect space: compare the lifted actions.
    let mut theta0_worst = 0.0f64;
    for seed in [config.seed, config.seed + 1] {
        let raw = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            ComplexMatrix::from_fn(4, |_, _| {
                Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
            })
        };
        let contraction = raw.scale(Complex64::new(0.8 / operator_norm(&raw), 0.0));
        let cf = CharacteristicFunction::new(&contraction).map_err(me("criteria"))?;
        let theta0 = cf.evaluate(Complex64::default()).map_err(me("criteria"))?;
        let k = cf.defect_dimension();
        for j in 0..k {
            let mut lifted = vec![Complex64::default(); 4];
            let mut direct = vec![Complex64::default(); 4];
            for i in 0..k {
                for (row, b) in cf.basis_adj()[i].iter().enumerate() {
                    lifted[row] += theta0.get(i, j) * b;
                }
            }
            // Direct action: -T applied to the j-th defect basis vector.
            for row in 0..4 {
                let mut acc = Complex64::default();
                for col in 0..4 {
                    acc += contraction.get(row, col) * cf.basis()[j][col];
                }
                direct[row] = -acc;
            }
            let gap: f64 = lifted
                .iter()
                .zip(&direct)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            theta0_worst = theta0_worst.max(gap);
        }
    }
    rows.push(SuiteRow::new(
        "charfn",
        "charfn-theta0-identity",
        theta0_worst,
        "||Theta(0) + T restricted to the defect|| <= 1e-12",
        theta0_worst <= 1e-12,
    ));

    // A 2x2 contraction similar to a unitary is itself unitary, so the
    // criterion report is vacuous: an empty defect with a zero supremum,
    // stable under any edge refinement.
    let u2 = roots_of_unity(2);
    let report = nf_criterion(&u2, &DiskGrid::default()).map_err(me("criteria"))?;
    let report_tight = nf_criterion(
        &u2,
        &DiskGrid {
            edge_margin: 1e-3,
            ..DiskGrid::default()
        },
    )
    .map_err(me("criteria"))?;
    rows.push(SuiteRow::new(
        "charfn",
        "charfn-similar-unitary-vacuous",
        report.sup_inv_norm.max(report_tight.sup_inv_norm),
        "finite sup, stable as the edge margin shrinks to 1e-3 (empty defect)",
        report.empty_defect
            && report_tight.empty_defect
            && report.sup_inv_norm == 0.0
            && report_tight.sup_inv_norm == 0.0,
    ));
    Ok(())
}

fn run_reproduce(config: &RunConfig, out: &Path) -> Result<bool, CliError> {
    let sections: &[(&str, fn(&RunConfig, &mut Vec<SuiteRow>) -> Result<(), CliError>)] = &[
        ("profile", profile_rows),
        ("calculus", calculus_rows),
        ("transplant", transplant_rows),
        ("comparability", comparability_rows),
        ("meansquare", meansquare_rows),
        ("violator", violator_rows),
        ("shift", |_, rows| shift_rows(rows)),
        ("lemma", |_, rows| lemma_rows(rows)),
        ("extension", extension_rows),
        ("charfn", charfn_rows),
    ];
    let selected: Vec<&str> = if config.suite.is_empty() {
        sections.iter().map(|(name, _)| *name).collect()
    } else {
        let known: Vec<&str> = sections.iter().map(|(n, _)| *n).collect();
        for want in &config.suite {
            if !known.contains(&want.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown suite section {want:?}; known sections: {}",
                    known.join(", ")
                )));
            }
        }
        known
            .into_iter()
            .filter(|n| config.suite.iter().any(|w| w == n))
            .collect()
    };

    let mut rows: Vec<SuiteRow> = Vec::new();
    for (name, build) in sections {
        if selected.contains(name) {
            build(config, &mut rows)?;
        }
    }

    println!("reproduction suite ({} checks)", rows.len());
    for row in &rows {
        println!(
            "{:4}  {:<34}  measured {:>13.6e}  required: {}",
            verdict(row.pass),
            row.name,
            row.measured,
            row.required
        );
    }
    let failures = rows.iter().filter(|r| !r.pass).count();
    let pass = failures == 0;
    println!(
        "summary: {} passed, {} failed",
        rows.len() - failures,
        failures
    );

    let body = json!({
        "sections": selected,
        "seed": config.seed,
        "rows": rows.iter().map(|r| json!({
            "section": r.section,
            "name": r.name,
            "measured": jf(r.measured),
            "required": r.required,
            "pass": r.pass,
        })).collect::<Vec<_>>(),
        "passed": rows.len() - failures,
        "failed": failures,
    });
    let path = write_json(out, "summary.json", &report_value(config, &body))?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.section.to_string(),
                r.name.to_string(),
                r.measured.to_string(),
                format!("{:?}", r.required),
                verdict(r.pass).to_string(),
            ]
        })
        .collect();
    write_csv(out, "summary.csv", "section,name,measured,required,status", &csv_rows)?;
    println!("report: {}", path.display());
    Ok(pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let config = RunConfig::default();
        let text = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);

        let mut custom = RunConfig {
            command: "zoo".into(),
            action: "make".into(),
            kind: "shift".into(),
            alpha: Some(1.4142),
            beta: Some(1.4142),
            n: 401,
            output: "shift.json".into(),
            suite: vec!["shift".into(), "lemma".into()],
            ..RunConfig::default()
        };
        custom.tol.insert("growth".into(), 0.25);
        let text = serde_json::to_string(&custom).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(custom, back);
    }

    #[test]
    fn config_defaults_fill_missing_fields() {
        let parsed: RunConfig = serde_json::from_str(r#"{"command": "profile"}"#).unwrap();
        assert_eq!(parsed.command, "profile");
        assert_eq!(parsed.curve, "circle");
        assert_eq!(parsed.quad_nodes, 512);
        assert_eq!(parsed.seed, 7);
    }

    #[test]
    fn expressions_evaluate_scalars() {
        let z = Complex64::new(3.0, 0.0);
        let cases = [
            ("1/(z-2)", Complex64::new(1.0, 0.0)),
            ("(z-3)/(z+5)", Complex64::default()),
            ("z^2", Complex64::new(9.0, 0.0)),
            ("z/2", Complex64::new(1.5, 0.0)),
            ("-z + 2*i", Complex64::new(-3.0, 2.0)),
            ("z^-1", Complex64::new(1.0 / 3.0, 0.0)),
            ("2.5e-1 * z", Complex64::new(0.75, 0.0)),
        ];
        for (src, expected) in cases {
            let node = expr::parse(src).unwrap();
            let got = node.eval(z);
            assert!((got - expected).norm() <= 1e-14, "{src}: {got}");
        }
    }

    #[test]
    fn expressions_report_positions_on_parse_errors() {
        for bad in ["z +", "q", "(z", "z^x", "1..2"] {
            let err = expr::parse(bad).unwrap_err();
            assert!(err.contains("byte"), "{bad}: {err}");
        }
    }

    #[test]
    fn matrix_evaluation_agrees_with_scalar_evaluation_on_diagonals() {
        let node = expr::parse("(z-3)/(z+5) + z^2").unwrap();
        let diag = [
            Complex64::new(0.5, 0.2),
            Complex64::new(-1.0, 0.1),
            Complex64::new(2.0, -0.4),
        ];
        let t = ComplexMatrix::from_diag(&diag);
        let m = node.eval_matrix(&t).unwrap();
        for (k, &z) in diag.iter().enumerate() {
            assert!((m.get(k, k) - node.eval(z)).norm() <= 1e-13);
        }
    }

    #[test]
    fn matrix_evaluation_rejects_singular_denominators() {
        let node = expr::parse("1/(z-1)").unwrap();
        let t = ComplexMatrix::identity(3);
        assert!(node.eval_matrix(&t).is_err());
    }

    #[test]
    fn tolerance_lookup_prefers_overrides() {
        let mut config = RunConfig::default();
        assert_eq!(config.tolerance("growth", 0.5), 0.5);
        config.tol.insert("growth".into(), 0.25);
        assert_eq!(config.tolerance("growth", 0.5), 0.25);
    }

    #[test]
    fn pair_flags_parse_and_reject() {
        assert_eq!(parse_pair("512,16", "--quad").unwrap(), (512.0, 16.0));
        assert!(parse_pair("512", "--quad").is_err());
        assert!(parse_pair("a,b", "--quad").is_err());
    }

    #[test]
    fn unknown_verbs_are_usage_errors() {
        let config = RunConfig {
            command: "frobnicate".into(),
            out: std::env::temp_dir()
                .join("scl-cli-test-unknown")
                .display()
                .to_string(),
            ..RunConfig::default()
        };
        assert!(matches!(run(&config), Err(CliError::Usage(_))));
    }

    #[test]
    fn resampling_interpolates_through_the_original_nodes() {
        let values: Vec<Complex64> = (0..16)
            .map(|k| Complex64::new(k as f64, -(k as f64)))
            .collect();
        let same = resample_periodic(&values, 16);
        for (a, b) in values.iter().zip(&same) {
            assert!((a - b).norm() == 0.0);
        }
        let doubled = resample_periodic(&values, 32);
        assert_eq!(doubled.len(), 32);
        for (k, v) in values.iter().enumerate() {
            assert!((doubled[2 * k] - v).norm() <= 1e-12, "node {k}");
        }
    }

    #[test]
    fn resampling_is_exact_on_bandlimited_data() {
        let f = |x: f64| {
            Complex64::from_polar(1.0, TAU * x)
                + Complex64::from_polar(0.3, -2.0 * TAU * x)
        };
        let values: Vec<Complex64> = (0..16).map(|j| f(j as f64 / 16.0)).collect();
        let fine = resample_periodic(&values, 64);
        for (p, got) in fine.iter().enumerate() {
            let want = f(p as f64 / 64.0);
            assert!((got - want).norm() <= 1e-13, "point {p}");
        }
    }
}
