use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use worms::berezin::{self, ChartDomain, IntegralReport};
use worms::cohomology;
use worms::dgca::{self, CeAlgebra, ConnectionForm, LieAlgebraFile, LieAlgebraSpec};
use worms::dsl::{parse_bindings, parse_expr, parse_expr_on, parse_map, parse_worm};
use worms::expr::expr_equal_seeded;
use worms::grassmann::OddVectorField;
use worms::lifts::{self, Operator};
use worms::pseudo::parse_pseudo;
use worms::pullback::{pullback, SmoothMap};
use worms::quadrature::QuadratureConfig;
use worms::riemann::{self, MetricConditions, MetricSpec};
use worms::{Chart, Worm, WormError};

#[derive(Parser)]
#[command(name = "worm", version, about = "Differential worms from the command line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ChartArgs {
    /// Comma-separated coordinate names
    #[arg(long, value_delimiter = ',')]
    coords: Vec<String>,
    /// Level of the worm algebra
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// TOML chart file with `coords` and `level` (overrides --coords/--k)
    #[arg(long)]
    chart: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Common {
    /// Machine-readable output
    #[arg(long)]
    json: bool,
    /// Seed for randomized checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a worm or scalar expression, optionally evaluating it
    Eval {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        /// Point for numeric evaluation, e.g. `x=1,y=1/2`
        #[arg(long)]
        at: Option<String>,
        /// Second expression to compare against
        #[arg(long, allow_hyphen_values = true)]
        equal: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Apply differentials; `--a 1,2` means d₁d₂ (rightmost first)
    D {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<usize>,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Apply the lift of a vector field on R^{0|k}, e.g. `t1*t2*D1`
    Lift {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, allow_hyphen_values = true)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        /// Apply the unsigned flat lift instead of the homomorphic one
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Pull a worm back along `target = f(source)` assignments
    Pullback {
        #[command(flatten)]
        chart: ChartArgs,
        /// e.g. `y = x^2; z = x + 1`
        #[arg(long, allow_hyphen_values = true)]
        map: String,
        /// Worm on the target coordinates
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a pseudodifferential worm, or the metric exponential of a surface
    Integrate {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, required_unless_present = "euler", allow_hyphen_values = true)]
        expr: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PathArg::Analytic)]
        path: PathArg,
        /// Integrate exp(d₁d₂γ) for a built-in surface instead of `--expr`
        #[arg(long, value_enum)]
        euler: Option<Surface>,
        #[arg(long, default_value_t = 1)]
        radius: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Christoffel symbols and curvature of a metric, e.g. `--metric "1,0; 0,sin(th)^2"`
    Riemann {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, required_unless_present = "characterize")]
        metric: Option<String>,
        /// Solve for metric worms with coefficients of degree ≤ D instead
        #[arg(long, value_name = "D")]
        characterize: Option<u32>,
        /// Only impose the diagonal E conditions when characterizing
        #[arg(long)]
        diagonal: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Per-weight d_a-Betti numbers of polynomial worms on R^n
    Cohomology {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        a: usize,
        /// Inclusive range, e.g. `0..5`
        #[arg(long, default_value = "0..5")]
        weights: String,
        #[command(flatten)]
        common: Common,
    },
    /// Chevalley–Eilenberg differential and Maurer–Cartan residual
    Dgca {
        /// TOML file with `dim` and `constants`, or one of su2, heisenberg, abelian<N>
        #[arg(long)]
        algebra: String,
        /// TOML file with `coords` and `forms`
        #[arg(long)]
        connection: Option<PathBuf>,
        /// Perturb the structure constants with `--seed`
        #[arg(long)]
        perturb: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Analytic,
    Pure,
}

#[derive(Clone, Copy, ValueEnum)]
enum Surface {
    Sphere,
    Torus,
}

/// Failures that are the caller's fault, as opposed to domain errors.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(WormError),
}

impl From<WormError> for Failure {
    fn from(e: WormError) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(Value, String), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = match &cli.command {
        Command::Eval { common, .. }
        | Command::D { common, .. }
        | Command::Lift { common, .. }
        | Command::Pullback { common, .. }
        | Command::Integrate { common, .. }
        | Command::Riemann { common, .. }
        | Command::Cohomology { common, .. }
        | Command::Dgca { common, .. } => common.json,
    };
    match run(cli.command) {
        Ok((value, text)) => {
            let out = if json { serde_json::to_string_pretty(&value).expect("serializable") } else { text };
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout(), "{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartFile {
    #[serde(default = "default_name")]
    name: String,
    coords: Vec<String>,
    #[serde(default = "default_level")]
    level: usize,
}

fn default_name() -> String {
    "U".into()
}

fn default_level() -> usize {
    1
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

impl ChartArgs {
    fn build(&self) -> Result<Arc<Chart>, Failure> {
        if let Some(path) = &self.chart {
            let f: ChartFile = read_toml(path)?;
            return Ok(Chart::from_owned(&f.name, f.coords, f.level)?);
        }
        if self.coords.is_empty() {
            return Err(Failure::Usage("give --coords or --chart".into()));
        }
        Ok(Chart::from_owned("U", self.coords.clone(), self.k)?)
    }
}

fn worm_value(w: &Worm) -> Value {
    json!({ "text": w.to_string(), "worm": w.to_json() })
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Eval { chart, expr, at, equal, common } => eval(&chart, &expr, at.as_deref(), equal.as_deref(), common.seed),
        Command::D { chart, a, expr, .. } => {
            let chart = chart.build()?;
            let mut w = parse_worm(&chart, &expr)?;
            for &i in a.iter().rev() {
                w = lifts::d(i, &w)?;
            }
            Ok((json!({ "command": "d", "result": worm_value(&w) }), w.to_string()))
        }
        Command::Lift { chart, field, expr, raw, .. } => {
            let chart = chart.build()?;
            let u = OddVectorField::parse(chart.level(), &field)?;
            let w = parse_worm(&chart, &expr)?;
            let op = if raw { Operator::Flat(u) } else { Operator::Lift(u) };
            let out = op.apply(&w)?;
            Ok((json!({ "command": "lift", "result": worm_value(&out) }), out.to_string()))
        }
        Command::Pullback { chart, map, expr, .. } => {
            let source = chart.build()?;
            let phi = SmoothMap::from_pairs(&source, parse_map(&source, &map)?)?;
            let w = parse_worm(phi.target(), &expr)?;
            let out = pullback(&phi, &w)?;
            Ok((json!({ "command": "pullback", "result": worm_value(&out) }), out.to_string()))
        }
        Command::Integrate { chart, expr, config, path, euler, radius, .. } => {
            let cfg = match config {
                Some(p) => read_toml::<QuadratureConfig>(&p)?,
                None => QuadratureConfig::default(),
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let est = match euler {
                Some(surface) => {
                    let domain = match surface {
                        Surface::Sphere => ChartDomain::round_sphere(radius)?,
                        Surface::Torus => ChartDomain::flat_torus()?,
                    };
                    berezin::euler_worm_integral(&domain, &cfg)?
                }
                None => {
                    let chart = chart.build()?;
                    let p = parse_pseudo(&chart, expr.as_deref().unwrap_or_default())?;
                    let path = match path {
                        PathArg::Analytic => berezin::Path::Analytic,
                        PathArg::Pure => berezin::Path::Pure,
                    };
                    berezin::integrate_over::<f64>(&p, &cfg, path, &[])?
                }
            };
            let report = IntegralReport::from(est);
            let mut v = serde_json::to_value(report).expect("serializable");
            v["command"] = json!("integrate");
            Ok((v, format!("{:.10} (error ≤ {:.2e}, {} nodes per axis)", report.value, report.est_error, report.nodes)))
        }
        Command::Riemann { chart, metric, characterize, diagonal, .. } => {
            let chart = chart.build()?;
            match characterize {
                Some(d) => characterize_cmd(&chart, d, diagonal),
                None => riemann_cmd(&chart, metric.as_deref().unwrap_or_default()),
            }
        }
        Command::Cohomology { k, n, a, weights, .. } => {
            let range = parse_range(&weights)?;
            let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            let chart = Chart::from_owned("R", names, k)?;
            let dims = cohomology::cohomology_dims(&chart, a, range.clone())?;
            let table: Vec<Value> =
                range.zip(&dims).map(|(w, b)| json!({ "weight": w, "betti": b })).collect();
            let text = format!("[{}]", dims.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
            Ok((json!({ "command": "cohomology", "k": k, "n": n, "a": a, "table": table }), text))
        }
        Command::Dgca { algebra, connection, perturb, common, .. } => {
            dgca_cmd(&algebra, connection.as_deref(), perturb.then_some(common.seed))
        }
    }
}

fn eval(chart: &ChartArgs, expr: &str, at: Option<&str>, equal: Option<&str>, seed: u64) -> Outcome {
    let has_chart = chart.chart.is_some() || !chart.coords.is_empty();
    let (normalized, terms, scalar) = if has_chart {
        let c = chart.build()?;
        let w = parse_worm(&c, expr)?;
        (w.to_string(), Some(w.to_json()), w.as_scalar())
    } else {
        let e = parse_expr(expr)?;
        (e.to_string(), None, Some(e))
    };
    let mut out = json!({ "command": "eval", "normalized": normalized });
    if let Some(t) = terms {
        out["worm"] = serde_json::to_value(t).expect("serializable");
    }
    let mut text = normalized.clone();
    if let Some(at) = at {
        let e = scalar.ok_or_else(|| Failure::Usage("--at needs a scalar expression".into()))?;
        let point = parse_bindings(at)?
            .into_iter()
            .map(|(k, v)| {
                let q = v.as_constant().ok_or_else(|| Failure::Usage(format!("value for `{k}` is not a number")))?;
                Ok((k, worms::num::rational_to_f64(&q)))
            })
            .collect::<Result<_, Failure>>()?;
        let value = e.eval(&point)?;
        out["value"] = json!(value);
        text = format!("{text}\n= {value}");
    }
    if let Some(other) = equal {
        let lhs = parse_expr(expr)?;
        let rhs = if has_chart { parse_expr_on(&*chart.build()?, other)? } else { parse_expr(other)? };
        let cert = expr_equal_seeded(&lhs, &rhs, seed);
        out["equal"] = json!(cert.is_equal());
        out["certification"] = json!(format!("{cert:?}"));
        text = format!("{text}\nequal: {}", cert.is_equal());
    }
    Ok((out, text))
}

fn parse_range(s: &str) -> Result<std::ops::Range<usize>, Failure> {
    let bad = || Failure::Usage(format!("weights must look like `0..5`, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok(a..b + 1)
}

fn parse_metric(chart: &Arc<Chart>, src: &str) -> Result<MetricSpec, Failure> {
    let rows = src
        .split(';')
        .map(|row| row.split(',').map(|e| parse_expr_on(chart, e)).collect::<Result<Vec<_>, WormError>>())
        .collect::<Result<Vec<_>, WormError>>()?;
    Ok(MetricSpec::new(chart, rows)?)
}

fn riemann_cmd(chart: &Arc<Chart>, metric: &str) -> Outcome {
    if chart.level() != 2 {
        return Err(Failure::Usage("riemann needs --k 2".into()));
    }
    let g = parse_metric(chart, metric)?;
    let curv = riemann::worm_curvature(&g)?;
    let lower = riemann::classical::christoffel_lower(&g);
    let riem = riemann::classical::riemann_lower(&g);
    let matches = curv.christoffel.equals(&lower) && curv.riemann.equals(&riem);
    let value = json!({
        "command": "riemann",
        "christoffel": curv.christoffel.entries(),
        "christoffel_upper": curv.christoffel_upper.entries(),
        "riemann": curv.riemann.entries(),
        "matches_classical": matches,
    });
    let mut text = format!("d1d2 gamma = {}\n", curv.d1d2_gamma);
    for (label, t) in [("Gamma_", &curv.christoffel), ("Gamma^", &curv.christoffel_upper), ("R_", &curv.riemann)] {
        for e in t.entries() {
            let idx: Vec<String> = e.index.iter().map(|i| chart.coord(*i).to_string()).collect();
            text.push_str(&format!("{label}{} = {}\n", idx.join(""), e.value));
        }
    }
    text.push_str(&format!("matches classical formulas: {matches}"));
    Ok((value, text))
}

fn characterize_cmd(chart: &Arc<Chart>, degree: u32, diagonal: bool) -> Outcome {
    let conditions = if diagonal { MetricConditions::Diagonal } else { MetricConditions::Full };
    let b = riemann::characterize_metric_worms(chart, degree, conditions)?;
    let per_coefficient = b.basis.len() / b.poly_dim.max(1);
    let value = json!({
        "command": "riemann",
        "dimension": b.basis.len(),
        "per_coefficient": per_coefficient,
        "symmetric": b.symmetric,
        "u_component_vanishes": b.u_component_vanishes,
        "basis": b.basis.iter().map(Worm::to_string).collect::<Vec<_>>(),
    });
    let text = format!(
        "{} solutions ({} per coefficient monomial), symmetric: {}",
        b.basis.len(),
        per_coefficient,
        b.symmetric
    );
    Ok((value, text))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionFile {
    coords: Vec<String>,
    /// One level-1 worm per Lie algebra index
    forms: Vec<String>,
}

fn builtin_algebra(name: &str) -> Option<LieAlgebraSpec> {
    match name {
        "su2" => Some(LieAlgebraSpec::su2()),
        "heisenberg" => Some(LieAlgebraSpec::heisenberg()),
        _ => name.strip_prefix("abelian").and_then(|n| n.parse().ok()).map(LieAlgebraSpec::abelian),
    }
}

fn dgca_cmd(algebra: &str, connection: Option<&Path>, perturb: Option<u64>) -> Outcome {
    let mut spec = match builtin_algebra(algebra) {
        Some(s) => s,
        None => LieAlgebraSpec::from_file(&read_toml::<LieAlgebraFile>(Path::new(algebra))?)?,
    };
    if let Some(seed) = perturb {
        spec = spec.perturbed(seed);
    }
    let alg = CeAlgebra::new(&spec)?;
    let mut value = json!({
        "command": "dgca",
        "dim": spec.dim(),
        "jacobi": spec.jacobi_holds(),
        "d_squared_zero": alg.d_squared_vanishes()?,
        "differential": (0..spec.dim())
            .map(|a| Ok(format!("d e{} = {}", a + 1, alg.d(&alg.generator(a))?)))
            .collect::<Result<Vec<_>, WormError>>()?,
    });
    if let Some(path) = connection {
        let f: ConnectionFile = read_toml(path)?;
        let chart = Chart::from_owned("M", f.coords, 1)?;
        let forms = f.forms.iter().map(|s| parse_worm(&chart, s)).collect::<Result<Vec<_>, _>>()?;
        let a = ConnectionForm::from_worms(&chart, &forms)?;
        let residual = dgca::mc_residual(&spec, &a)?;
        value["residual"] = json!(residual.iter().map(Worm::to_string).collect::<Vec<_>>());
        value["flat"] = json!(residual.iter().all(Worm::is_zero));
        value["morphism"] = json!(dgca::is_dgca_morphism(&alg, &a)?);
    }
    let mut text = String::new();
    for line in value["differential"].as_array().expect("array") {
        text.push_str(line.as_str().unwrap_or_default());
        text.push('\n');
    }
    text.push_str(&format!("jacobi: {}, d^2 = 0: {}", value["jacobi"], value["d_squared_zero"]));
    if let Some(res) = value.get("residual").and_then(Value::as_array) {
        for (a, r) in res.iter().enumerate() {
            text.push_str(&format!("\nF{} = {}", a + 1, r.as_str().unwrap_or_default()));
        }
        text.push_str(&format!("\nflat: {}, morphism: {}", value["flat"], value["morphism"]));
    }
    Ok((value, text))
}
