#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use signreg::approx::{
    block_mean_approx, interpolant_error_bounds, k_linear_interpolation, modulus_from_design, piecewise_constant_approx,
    InterpMode, Measure, Modulus,
};
use signreg::bounds::{
    bound_bn, heavy_tail_closed_form, ln_bracket, ln_solver, optimize_p, qbeta_moment, rate_term, BoundCase, BoundConfig,
    BoundInputs,
};
use signreg::curves::{Curve, TestCurve};
use signreg::estimators::{minimize_t, single_index_estimate, SieveConfig, Strategy};
use signreg::io::{parse_blocks, parse_f64_list, parse_index_csv, parse_usize_list, parse_xy_csv};
use signreg::selftest::{oracle_equivalence, Variant};
use signreg::sim::{
    monte_carlo_risk, resolve_seed, hetero_span_prediction, write_records, EstimatorSpec, MonteCarloConfig, ScenarioSpec, SEED_ENV,
};
use signreg::vc::{
    extremal_check, integer_grid, random_linear_baseline, random_planar_points, random_single_index_baseline,
    random_step_baseline, single_index_degree_check, r_monotone_bound, linear_space_bound, Generator, Trend,
};
use signreg::{Design, Error, Result, ShapeClass};

#[derive(Parser)]
#[command(name = "signreg", version, about = "Sign-test regression estimators, certificates and simulations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Global {
    /// Random seed; overrides the SIGNREG_SEED environment variable.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write outputs to files in this directory instead of stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Record wall-clock times (makes outputs non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Verb {
    /// Fit a shape class to x,y[,f0] data.
    Estimate(EstimateArgs),
    /// Monte-Carlo risk of estimators on a scenario file.
    Simulate(SimulateArgs),
    /// Build an approximant of a curve with its error certificate.
    Approx(ApproxArgs),
    /// Exhaustive level-set degree certificates on small point sets.
    VcCheck(VcArgs),
    /// Tabulate risk bound expressions.
    Bounds(Box<BoundsArgs>),
    /// Cross-check the supremum oracles against exhaustive search.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    data: PathBuf,
    /// e.g. nondecreasing, monotone, piecewise-monotone:2, convex-concave:1,
    /// fixed-partition, linear-span, single-index:2
    #[arg(long)]
    class: String,
    /// Blocks for fixed-partition, as 1-based ranges: "1-2,3".
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    #[arg(long)]
    max_blocks: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    angle_grid: Option<usize>,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Design size for generated scenarios.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Comma-separated: sign, lse, or a class name.
    #[arg(long, default_value = "sign,lse")]
    estimators: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ApproxMethod {
    BlockMean,
    PiecewiseConstant,
    Interp,
    Chord,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DesignKind {
    Equispaced,
    Quadratic,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureKind {
    Uniform,
    Design,
}

#[derive(Args)]
struct ApproxArgs {
    /// e.g. pow:0.5, exp:2, logistic:8:0.5, pwl:0/0,0.3/1,1/1.5
    #[arg(long)]
    curve: String,
    #[arg(long, value_enum)]
    method: ApproxMethod,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    /// Number of blocks or pieces.
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, value_enum, default_value = "equispaced")]
    design: DesignKind,
    #[arg(long, value_enum, default_value = "uniform")]
    measure: MeasureKind,
    /// Interpolation mode: 1 (derivative variation) or 2 (modulus).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    mode: u8,
    /// Partition for piecewise-constant, as 1-based ranges.
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VcClass {
    Monotone,
    ConvexConcave,
    RMonotone,
    Linear,
    SingleIndex,
}

#[derive(Args)]
struct VcArgs {
    #[arg(long, value_enum)]
    class: VcClass,
    /// Number of pieces k of the class.
    #[arg(long, default_value_t = 1)]
    pieces: usize,
    /// Number of constant or linear pieces K of the reference function.
    #[arg(long, default_value_t = 1)]
    baseline_pieces: usize,
    /// Number of points.
    #[arg(long, default_value_t = 12)]
    grid: usize,
    /// Order for r-monotone.
    #[arg(long, default_value_t = 3)]
    r: usize,
    /// Number of random reference functions.
    #[arg(long, default_value_t = 1)]
    baselines: usize,
    /// Degree to certify; defaults to the class bound.
    #[arg(long)]
    claimed: Option<usize>,
    /// Dimension for single-index (1 or 2).
    #[arg(long, default_value_t = 2)]
    dim: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableKind {
    /// sigma (D/n)^(1-1/p) over n, D and p grids.
    Rate,
    /// Heavy-tail example: L_n, closed form and optimised p.
    HeavyTail,
    PiecewiseConstant,
    Monotone,
    ConvexConcaveEquispaced,
    DerivativeVariation,
    PowerModulus,
    SingleIndex,
    LinearSpace,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    case: TableKind,
    /// Comma-separated sample sizes.
    #[arg(long, default_value = "100,1000,10000")]
    n: String,
    #[arg(long, default_value = "1")]
    d: String,
    #[arg(long, default_value = "1,1.5,2")]
    p: String,
    #[arg(long, default_value = "1")]
    beta: String,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    pieces: Option<usize>,
    #[arg(long)]
    v_j: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    v_prime: Option<f64>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "modulus-a")]
    a: Option<f64>,
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    approx_error: Option<f64>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Random instances per class variant.
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 8)]
    max_n: usize,
}

/// Where a verb's output goes: a file under `--out-dir`, or stdout.
struct Sink<'a> {
    out_dir: Option<&'a Path>,
}

impl Sink<'_> {
    fn emit(&self, name: &str, content: &str) -> Result<()> {
        match self.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(name), content)?;
                eprintln!("wrote {}", dir.join(name).display());
            }
            None => print!("{content}"),
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::parse(e.to_string()))?;
        s.push('\n');
        self.emit(name, &s)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::structural(format!("{}: {e}", path.display())))
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?)
        .map_err(|e| Error::parse(e.to_string()))
}

fn json_rows(header: &[&str], rows: &[Vec<String>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                let obj = header
                    .iter()
                    .zip(r)
                    .map(|(h, v)| {
                        let val = v.parse::<f64>().ok().and_then(serde_json::Number::from_f64).map(Value::Number);
                        (h.to_string(), val.unwrap_or_else(|| Value::String(v.clone())))
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect(),
    )
}

fn estimate(a: &EstimateArgs, g: &Global, sink: &Sink) -> Result<()> {
    let text = read(&a.data)?;
    let mut cfg = SieveConfig::default();
    if let Some(s) = a.strategy {
        cfg.strategy = s;
    }
    if let Some(v) = a.max_blocks {
        cfg.max_blocks = v;
    }
    if let Some(v) = a.restarts {
        cfg.restarts = v;
    }
    if let Some(v) = a.angle_grid {
        cfg.angle_grid = v;
    }
    cfg.seed = resolve_seed(g.seed, 0)?;
    let (rows, fhat, result) = if a.class.starts_with("single-index") {
        let data = parse_index_csv(&text)?;
        let class = ShapeClass::parse(&a.class, data.len(), None)?;
        if let ShapeClass::SingleIndexMonotone(m) = class {
            if m != data.design.dim() {
                return Err(Error::contract(format!("class dimension {m} differs from data dimension {}", data.design.dim())));
            }
        }
        let r = single_index_estimate(&data, &cfg)?;
        (data.design.rows().to_vec(), r.fhat.clone(), r)
    } else {
        let (data, f0) = parse_xy_csv(&text)?.into_data()?;
        let spec = match (&a.blocks, a.class.as_str()) {
            (Some(b), "fixed-partition") => {
                parse_blocks(b, data.len())?;
                format!("fixed-partition:{b}")
            }
            (Some(_), _) => return Err(Error::contract("--blocks applies to fixed-partition only")),
            _ => a.class.clone(),
        };
        let class = ShapeClass::parse(&spec, data.len(), f0.as_deref())?;
        let r = minimize_t(&class, &data, &cfg)?;
        (data.design.points().iter().map(|x| vec![*x]).collect(), r.fhat.clone(), r)
    };
    match g.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = serde_json::to_value(&result).map_err(|e| Error::parse(e.to_string()))?;
            v["class"] = json!(a.class);
            v["x"] = json!(rows);
            sink.json("estimate.json", &v)
        }
        Format::Csv => {
            let dim = rows.first().map_or(1, |r| r.len());
            let mut header: Vec<String> = (1..=dim).map(|j| if dim == 1 { "x".into() } else { format!("x{j}") }).collect();
            header.push("fhat".into());
            let body: Vec<Vec<String>> = rows
                .iter()
                .zip(&fhat)
                .map(|(r, f)| r.iter().chain(std::iter::once(f)).map(|v| v.to_string()).collect())
                .collect();
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            sink.emit("estimate.csv", &csv_table(&h, &body)?)
        }
    }
}

fn simulate(a: &SimulateArgs, g: &Global, sink: &Sink) -> Result<()> {
    let spec = ScenarioSpec::from_json(&read(&a.scenario)?)?;
    let scenario = spec.build(a.n)?;
    let seed = resolve_seed(g.seed, scenario.seed)?;
    let cfg = MonteCarloConfig { reps: a.reps, seed, timing: g.timing };
    let estimators: Vec<EstimatorSpec> =
        a.estimators.split(',').map(str::trim).filter(|s| !s.is_empty()).map(EstimatorSpec::parse).collect::<Result<_>>()?;
    if estimators.is_empty() {
        return Err(Error::structural("no estimators given"));
    }
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for est in &estimators {
        let r = monte_carlo_risk(est, &scenario, &cfg)?;
        summary.push(json!({
            "estimator": r.estimator, "mean": r.mean, "std_error": r.std_error,
            "reps": r.reps, "failures": r.failures,
        }));
        records.extend(r.records);
    }
    let mut report = json!({
        "scenario": scenario.label, "n": scenario.len(), "reps": a.reps, "seed": seed,
        "sigma2_squared": scenario.sigma2_squared(), "estimates": summary,
    });
    if matches!(spec, ScenarioSpec::HeteroSpan { .. }) {
        report["prediction"] = serde_json::to_value(hetero_span_prediction(scenario.len())?).map_err(|e| Error::parse(e.to_string()))?;
    }
    let mut csv = Vec::new();
    write_records(&records, &mut csv, true)?;
    let csv = String::from_utf8(csv).map_err(|e| Error::parse(e.to_string()))?;
    if sink.out_dir.is_some() {
        sink.emit("replications.csv", &csv)?;
        return sink.json("summary.json", &report);
    }
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.emit("replications.csv", &csv),
        Format::Json => sink.json("summary.json", &report),
    }
}

fn approx_design(a: &ApproxArgs, seed: u64) -> Result<Vec<f64>> {
    if a.n == 0 {
        return Err(Error::structural("n must be positive"));
    }
    let n = a.n as f64;
    let mut x: Vec<f64> = match a.design {
        DesignKind::Equispaced => (0..a.n).map(|i| (i as f64 + 0.5) / n).collect(),
        DesignKind::Quadratic => (0..a.n).map(|i| ((i as f64 + 0.5) / n).powi(2)).collect(),
        DesignKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..a.n).map(|_| rng.gen::<f64>()).collect()
        }
    };
    x.iter_mut().for_each(|t| *t = a.a + (a.b - a.a) * *t);
    x.sort_by(f64::total_cmp);
    Ok(x)
}

fn approx(a: &ApproxArgs, g: &Global, sink: &Sink) -> Result<()> {
    let curve = TestCurve::parse(&a.curve)?;
    if !(a.a < a.b) || !a.a.is_finite() || !a.b.is_finite() {
        return Err(Error::structural("need a finite interval a < b"));
    }
    let x = approx_design(a, resolve_seed(g.seed, 0)?)?;
    let values: Vec<f64> = x.iter().map(|&t| curve.value(t)).collect();
    let measure = || match a.measure {
        MeasureKind::Uniform => Measure::uniform(a.a, a.b),
        MeasureKind::Design => Measure::empirical(&x),
    };
    let modulus = || match a.measure {
        MeasureKind::Uniform => Modulus::affine(0.0, 1.0, 1.0, a.b - a.a),
        MeasureKind::Design => modulus_from_design(&x, a.a, a.b, None),
    };
    let out = match a.method {
        ApproxMethod::BlockMean => {
            let r = block_mean_approx(&Design::new(x.clone())?, &values, a.k)?;
            json!({ "method": "block-mean", "x": x, "values": values, "certificate": r })
        }
        ApproxMethod::PiecewiseConstant => {
            let blocks = a.blocks.as_deref().ok_or_else(|| Error::structural("piecewise-constant needs --blocks"))?;
            let p = parse_blocks(blocks, x.len())?;
            let r = piecewise_constant_approx(&Design::new(x.clone())?, &values, &p, a.gamma)?;
            json!({ "method": "piecewise-constant", "x": x, "values": values, "certificate": r })
        }
        ApproxMethod::Interp => {
            let mode = if a.mode == 1 { InterpMode::BoundedDerivativeVariation } else { InterpMode::ModulusDriven };
            let q = measure()?;
            let w = if a.mode == 2 { Some(modulus()?) } else { None };
            let (interp, cert) = k_linear_interpolation(&curve, a.a, a.b, a.k, &q, w.as_ref(), mode)?;
            json!({ "method": "interp", "interpolant": interp, "certificate": cert, "modulus": w })
        }
        ApproxMethod::Chord => {
            let w = modulus()?;
            let r = interpolant_error_bounds(&curve, a.a, a.b, &measure()?, &w)?;
            json!({ "method": "chord", "bounds": r, "best": r.min(), "modulus": w })
        }
    };
    sink.json("approx.json", &out)
}

fn vc_check(a: &VcArgs, g: &Global, sink: &Sink) -> Result<()> {
    let seed = resolve_seed(g.seed, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k, kk, n) = (a.pieces, a.baseline_pieces, a.grid);
    if k == 0 || kk == 0 || n == 0 || a.baselines == 0 {
        return Err(Error::structural("pieces, baseline pieces, grid and baselines must be positive"));
    }
    let mut certs = Vec::new();
    let mut claimed_all = None;
    for _ in 0..a.baselines {
        let grid = integer_grid(n);
        let (cert, fbar) = match a.class {
            VcClass::Monotone => {
                let fbar = random_step_baseline(n, k, kk, &mut rng);
                let claimed = a.claimed.unwrap_or(r_monotone_bound(1, k, kk));
                let gen = Generator::RMonotone { r: 1, pieces: k, trend: Trend::Either };
                (extremal_check(grid, fbar.clone(), gen, claimed)?, fbar)
            }
            VcClass::ConvexConcave => {
                let fbar = random_linear_baseline(n, kk, &mut rng);
                let claimed = a.claimed.unwrap_or(r_monotone_bound(2, k, kk));
                (extremal_check(grid, fbar.clone(), Generator::ConvexConcave { pieces: k }, claimed)?, fbar)
            }
            VcClass::RMonotone => {
                if kk != 1 {
                    return Err(Error::contract("r-monotone reference functions are polynomials; use --baseline-pieces 1"));
                }
                let r = a.r;
                if r == 0 {
                    return Err(Error::structural("r must be positive"));
                }
                let c: f64 = rng.gen_range(-2..=2) as f64;
                let fbar: Vec<f64> = (0..n).map(|i| c + (i as f64).powi(r as i32 - 1)).collect();
                let claimed = a.claimed.unwrap_or(r_monotone_bound(r, k, 1));
                let gen = Generator::RMonotone { r, pieces: k, trend: Trend::Up };
                (extremal_check(grid, fbar.clone(), gen, claimed)?, fbar)
            }
            VcClass::Linear => {
                let f0: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
                let b: f64 = rng.gen_range(-3..=3) as f64;
                let fbar: Vec<f64> = f0.iter().map(|v| b * v).collect();
                let claimed = a.claimed.unwrap_or(linear_space_bound(1));
                (extremal_check(grid, fbar.clone(), Generator::LinearSpan { f0 }, claimed)?, fbar)
            }
            VcClass::SingleIndex => {
                let points = match a.dim {
                    1 => grid,
                    2 => random_planar_points(n, &mut rng),
                    d => return Err(Error::refusal(format!("single-index certificates support dimension 1 or 2, got {d}"))),
                };
                let fbar = random_single_index_baseline(&points, kk, &mut rng);
                if a.claimed.is_some() {
                    return Err(Error::contract("single-index certificates use the bound (m + 1) K"));
                }
                (single_index_degree_check(points, fbar.clone(), kk)?, fbar)
            }
        };
        claimed_all = Some(cert.claimed_degree);
        certs.push(json!({ "fbar": fbar, "certificate": cert }));
    }
    let all_hold = certs.iter().all(|c| c["certificate"]["holds"] == json!(true));
    let out = json!({
        "class": a.class.to_possible_value().map(|v| v.get_name().to_string()),
        "pieces": k, "baseline_pieces": kk, "points": n, "seed": seed,
        "claimed_degree": claimed_all, "all_hold": all_hold, "baselines": certs,
    });
    sink.json("vc-check.json", &out)
}

fn list_f64(s: &str) -> Result<Vec<f64>> {
    let v = parse_f64_list(s)?;
    if v.is_empty() {
        return Err(Error::structural("empty list"));
    }
    Ok(v)
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn bounds(a: &BoundsArgs, g: &Global, sink: &Sink) -> Result<()> {
    let ns = list_f64(&a.n)?;
    let ps = list_f64(&a.p)?;
    let ds: Vec<f64> = parse_usize_list(&a.d)?.into_iter().map(|v| v as f64).collect();
    let betas = list_f64(&a.beta)?;
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match a.case {
        TableKind::Rate => {
            let mut rows = Vec::new();
            for &n in &ns {
                for &d in &ds {
                    for &p in &ps {
                        rows.push(vec![fmt(n), fmt(d), fmt(p), fmt(a.sigma), fmt(rate_term(a.sigma, d, n, p)?)]);
                    }
                    let best = optimize_p(&|_| a.sigma, d, n)?;
                    rows.push(vec![fmt(n), fmt(d), format!("opt:{}", best.p), fmt(a.sigma), fmt(best.value)]);
                }
            }
            (vec!["n", "d", "p", "sigma", "rate"], rows)
        }
        TableKind::HeavyTail => {
            let mut rows = Vec::new();
            for &beta in &betas {
                for &n in &ns {
                    for &d in &ds {
                        let l = ln_solver(beta, n, d)?;
                        let closed = heavy_tail_closed_form(beta, n, d)?;
                        let best = optimize_p(&|p| qbeta_moment(beta, p), d, n)?;
                        let (lo, hi) = match ln_bracket(beta, n, d)? {
                            Some((lo, hi)) => (fmt(lo), fmt(hi)),
                            None => (String::new(), String::new()),
                        };
                        rows.push(vec![fmt(beta), fmt(n), fmt(d), fmt(l), fmt(closed), fmt(best.value), fmt(best.p), lo, hi]);
                    }
                }
            }
            (vec!["beta", "n", "d", "l_n", "closed_form", "optimized", "p_star", "bracket_lo", "bracket_hi"], rows)
        }
        other => {
            let case = match other {
                TableKind::PiecewiseConstant => BoundCase::PiecewiseConstant,
                TableKind::Monotone => BoundCase::Monotone,
                TableKind::ConvexConcaveEquispaced => BoundCase::ConvexConcaveEquispaced,
                TableKind::DerivativeVariation => BoundCase::DerivativeVariation,
                TableKind::PowerModulus => BoundCase::PowerModulus,
                TableKind::SingleIndex => BoundCase::SingleIndex,
                _ => BoundCase::LinearSpace,
            };
            let cfg = BoundConfig { kappa: a.kappa, c: a.c };
            let mut rows = Vec::new();
            for &n in &ns {
                for &p in &ps {
                    let inp = BoundInputs {
                        n: Some(n),
                        p: Some(p),
                        sigma: Some(a.sigma),
                        k: a.k,
                        pieces: a.pieces,
                        v_j: a.v_j,
                        v: a.v,
                        w: a.w,
                        v_prime: a.v_prime,
                        length: a.length,
                        alpha: a.alpha,
                        a: a.a,
                        w0: a.w0,
                        m: a.m,
                        dim: a.dim,
                        approx_error: a.approx_error,
                    };
                    rows.push(vec![case.name(), fmt(n), fmt(p), fmt(a.sigma), fmt(bound_bn(case, &inp, &cfg)?)]);
                }
            }
            (vec!["case", "n", "p", "sigma", "bound_up_to_constants"], rows)
        }
    };
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.emit("bounds.csv", &csv_table(&header, &rows)?),
        Format::Json => sink.json("bounds.json", &json_rows(&header, &rows)),
    }
}

/// Returns whether every variant agreed.
fn selftest(a: &SelftestArgs, g: &Global, sink: &Sink) -> Result<bool> {
    if a.max_n == 0 || a.max_n > 12 {
        return Err(Error::refusal("exhaustive search supports 1 to 12 points"));
    }
    let seed = resolve_seed(g.seed, 0)?;
    let reports: Vec<_> =
        Variant::ALL.iter().map(|&v| oracle_equivalence(v, a.instances, a.max_n, seed)).collect::<Result<_>>()?;
    let ok = reports.iter().all(|r| r.mismatches == 0);
    sink.json("selftest.json", &json!({ "seed": seed, "passed": ok, "suites": reports }))?;
    Ok(ok)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let sink = Sink { out_dir: cli.global.out_dir.as_deref() };
    let g = &cli.global;
    match &cli.verb {
        Verb::Estimate(a) => estimate(a, g, &sink)?,
        Verb::Simulate(a) => simulate(a, g, &sink)?,
        Verb::Approx(a) => approx(a, g, &sink)?,
        Verb::VcCheck(a) => vc_check(a, g, &sink)?,
        Verb::Bounds(a) => bounds(a, g, &sink)?,
        Verb::Selftest(a) => {
            if !selftest(a, g, &sink)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Parse(_) = e {
                if std::env::var(SEED_ENV).is_ok() {
                    eprintln!("(check {SEED_ENV})");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
