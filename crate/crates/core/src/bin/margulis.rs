//! Command-line surface: angle input, region decomposition, boundary
//! sampling, lemma verification, and distortion certification, with
//! plot-ready JSON/CSV export.
//!
//! Exit codes: 0 success, 1 input error, 2 certification/oracle failure,
//! 3 precision budget.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Number, Value};

use margulis::cf::{AngleSpec, CFAngle};
use margulis::hyperbolic::{self, map_f, map_h, Point4, SamplerConfig};
use margulis::region::Region;
use margulis::Error;

const EXIT_INPUT: u8 = 1;
const EXIT_CERTIFICATION: u8 = 2;
const EXIT_PRECISION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "margulis",
    version,
    about = "Margulis region boundary structure and quasi-isometry certification for screw parabolic isometries of H^4"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact constituent-piece decomposition of the boundary b(r).
    Decompose(CommonArgs),
    /// Boundary profile samples (r, b(r), argmin k, b/sqrt(r)).
    Sample(CommonArgs),
    /// Continued-fraction and envelope invariant suite.
    Verify(CommonArgs),
    /// Sampled distortion certification for the maps h, f, or f∘h.
    Distort(DistortArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Angle spec: "1,1,1", "pre:[];per:[1]", "rat:1/3", or a decimal.
    #[arg(long)]
    angle: String,
    /// Margulis-type threshold ε; E = cosh(ε) − 1.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    epsilon: f64,
    /// Working depth of the continued fraction.
    #[arg(long, default_value_t = 30)]
    depth: usize,
    /// Surrogate guard depth (default: depth + 10).
    #[arg(long)]
    guard_depth: Option<usize>,
    /// Right end of the analyzed radius range.
    #[arg(long = "rmax", default_value_t = 1e6)]
    r_max: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistortArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    map: MapChoice,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum MapChoice {
    H,
    F,
    Fh,
}

/// A run either produces a document (plus pass/fail) or fails with a library
/// error that maps onto an exit code.
struct Outcome {
    document: String,
    certified: bool,
}

fn main() -> ExitCode {
    // Usage errors share the input-error exit code; --help/--version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (common, result) = match &cli.cmd {
        Cmd::Decompose(c) => (c, run_decompose(c)),
        Cmd::Sample(c) => (c, run_sample(c)),
        Cmd::Verify(c) => (c, run_verify(c)),
        Cmd::Distort(d) => (&d.common, run_distort(d)),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = emit(common, &outcome.document) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            if outcome.certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CERTIFICATION)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidAngle(_) | Error::InvalidArgument(_) => EXIT_INPUT,
                Error::CrossValidation(_) => EXIT_CERTIFICATION,
                Error::PrecisionBudget(_) | Error::DepthExceeded { .. } => EXIT_PRECISION,
            })
        }
    }
}

fn emit(common: &CommonArgs, document: &str) -> std::io::Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, document),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(document.as_bytes())
        }
    }
}

fn validate(c: &CommonArgs) -> margulis::Result<()> {
    if !(c.epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if c.depth < 2 {
        return Err(Error::InvalidArgument("depth must be at least 2".into()));
    }
    if c.samples < 1 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if !(c.r_max > 0.0) {
        return Err(Error::InvalidArgument("rmax must be positive".into()));
    }
    Ok(())
}

fn build_region(c: &CommonArgs) -> margulis::Result<Region> {
    validate(c)?;
    let spec = AngleSpec::parse_str(&c.angle)?;
    let angle = CFAngle::parse(&spec, Some(c.depth), c.guard_depth, None)?;
    Region::new(angle, c.epsilon)
}

/// Floats serialized with 17 significant digits so documents round-trip
/// f64 payloads exactly.
fn num17(x: f64) -> Value {
    let text = format!("{:.16e}", x);
    let n: Number = serde_json::from_str(&text).expect("valid number literal");
    Value::Number(n)
}

fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

fn run_decompose(c: &CommonArgs) -> margulis::Result<Outcome> {
    let region = build_region(c)?;
    let dec = region.decompose(c.r_max)?;
    let document = match c.format {
        Format::Json => {
            let pieces: Vec<Value> = dec
                .indices
                .iter()
                .enumerate()
                .map(|(m, &k)| {
                    json!({
                        "index": k,
                        "r_lo": num17(dec.breakpoints[m]),
                        "r_hi": num17(dec.breakpoints[m + 1]),
                    })
                })
                .collect();
            let mut doc = Map::new();
            doc.insert("angle".into(), Value::String(c.angle.clone()));
            doc.insert("epsilon".into(), num17(c.epsilon));
            doc.insert("r_max".into(), num17(dec.r_max));
            doc.insert("pieces".into(), Value::Array(pieces));
            doc.insert(
                "validation".into(),
                json!({
                    "oracle_checks": dec.oracle_checks,
                    "max_residual": num17(dec.max_residual),
                }),
            );
            pretty(&Value::Object(doc))
        }
        Format::Csv => {
            let mut out = String::from("index,r_lo,r_hi\n");
            for (m, &k) in dec.indices.iter().enumerate() {
                out.push_str(&format!(
                    "{k},{},{}\n",
                    fmt17(dec.breakpoints[m]),
                    fmt17(dec.breakpoints[m + 1])
                ));
            }
            out
        }
    };
    Ok(Outcome {
        document,
        certified: true,
    })
}

fn run_sample(c: &CommonArgs) -> margulis::Result<Outcome> {
    let region = build_region(c)?;
    let r_lo = 1e-3f64.min(c.r_max / 2.0);
    let n = c.samples.max(1);
    let ratio = if n > 1 {
        (c.r_max / r_lo).powf(1.0 / (n as f64 - 1.0))
    } else {
        1.0
    };
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let r = r_lo * ratio.powi(i as i32);
        let (b, k) = region.envelope_value(r)?;
        rows.push((r, b, k, b / r.sqrt()));
    }
    let document = match c.format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("angle".into(), Value::String(c.angle.clone()));
            doc.insert("epsilon".into(), num17(c.epsilon));
            let rows: Vec<Value> = rows
                .iter()
                .map(|&(r, b, k, q)| {
                    json!({"r": num17(r), "b": num17(b), "k": k, "ratio": num17(q)})
                })
                .collect();
            doc.insert("rows".into(), Value::Array(rows));
            pretty(&Value::Object(doc))
        }
        Format::Csv => {
            let mut out = String::from("r,b,k,ratio\n");
            for (r, b, k, q) in rows {
                out.push_str(&format!("{},{},{k},{}\n", fmt17(r), fmt17(b), fmt17(q)));
            }
            out
        }
    };
    Ok(Outcome {
        document,
        certified: true,
    })
}

fn run_verify(c: &CommonArgs) -> margulis::Result<Outcome> {
    let region = build_region(c)?;
    let angle = region.angle();
    let mut checks: Vec<(String, bool, f64)> = Vec::new();

    // Norm recursion, monotonicity, and two-sided bounds.
    let rec_depth = c.depth.saturating_sub(2);
    let report = angle.verify_norm_recursion(rec_depth)?;
    checks.push((
        "norm_recursion_residual".into(),
        report.max_rel_residual < 1e-12,
        report.max_rel_residual,
    ));
    checks.push((
        "norm_monotonicity".into(),
        report.monotonicity_failures.is_empty(),
        report.monotonicity_failures.len() as f64,
    ));
    checks.push((
        "norm_bounds".into(),
        report.bound_failures.is_empty(),
        report.bound_failures.len() as f64,
    ));

    // Closest returns equal convergent denominators up to K = min(q_depth, 1e4).
    let convs = angle.convergents(c.depth.min(angle.depth()))?;
    let q_depth = convs
        .last()
        .and_then(|cv| num_traits_to_u64(&cv.q))
        .unwrap_or(u64::MAX);
    let k_cap = q_depth.min(10_000).max(1);
    let returns = angle.closest_returns(k_cap)?;
    let mut denoms: Vec<u64> = convs
        .iter()
        .filter_map(|cv| num_traits_to_u64(&cv.q))
        .filter(|&q| q >= 1 && q <= k_cap)
        .collect();
    denoms.dedup();
    let cr_ok = returns == denoms;
    checks.push(("closest_returns_are_denominators".into(), cr_ok, k_cap as f64));

    // Region oracle equivalence (decompose cross-validates internally).
    let dec = region.decompose(c.r_max)?;
    checks.push((
        "envelope_oracle_equivalence".into(),
        dec.max_residual <= 1e-12,
        dec.max_residual,
    ));

    let all_pass = checks.iter().all(|(_, ok, _)| *ok);
    let document = match c.format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("angle".into(), Value::String(c.angle.clone()));
            doc.insert("bound_d".into(), Value::from(angle.bound_d()));
            doc.insert("depth".into(), Value::from(c.depth));
            let list: Vec<Value> = checks
                .iter()
                .map(|(name, ok, residual)| {
                    json!({"name": name, "pass": ok, "residual": num17(*residual)})
                })
                .collect();
            doc.insert("checks".into(), Value::Array(list));
            doc.insert("pass".into(), Value::Bool(all_pass));
            pretty(&Value::Object(doc))
        }
        Format::Csv => {
            let mut out = String::from("name,pass,residual\n");
            for (name, ok, residual) in &checks {
                out.push_str(&format!("{name},{ok},{}\n", fmt17(*residual)));
            }
            out
        }
    };
    Ok(Outcome {
        document,
        certified: all_pass,
    })
}

fn run_distort(d: &DistortArgs) -> margulis::Result<Outcome> {
    let c = &d.common;
    match d.map {
        MapChoice::H => {
            validate(c)?;
            let cfg = SamplerConfig::new(c.samples, c.seed);
            let rep = hyperbolic::certify_bilipschitz(&cfg)?;
            let certified = rep.min_ratio >= 0.25 && rep.max_ratio <= 4.0;
            Ok(Outcome {
                document: distortion_document(c, "h", &rep, certified, None),
                certified,
            })
        }
        MapChoice::F => {
            let region = build_region(c)?;
            require_irrational(&region)?;
            let cfg = SamplerConfig::new(c.samples, c.seed);
            let rep = hyperbolic::certify_quasi_isometry(&region, &cfg, c.r_max)?;
            let certified = rep.max_additive_defect <= 2.0 * rep.constant_c
                && rep.max_displacement <= rep.constant_c
                && rep.surjectivity_ok;
            Ok(Outcome {
                document: distortion_document(c, "f", &rep, certified, None),
                certified,
            })
        }
        MapChoice::Fh => {
            let region = build_region(c)?;
            require_irrational(&region)?;
            let cfg = SamplerConfig::new(c.samples, c.seed);
            let rep = hyperbolic::certify_quasi_isometry(&region, &cfg, c.r_max)?;
            let residual = composite_horosphere_residual(&region, c.r_max)?;
            let certified = residual <= 1e-9
                && rep.max_additive_defect <= 2.0 * rep.constant_c
                && rep.surjectivity_ok;
            Ok(Outcome {
                document: distortion_document(c, "fh", &rep, certified, Some(residual)),
                certified,
            })
        }
    }
}

fn require_irrational(region: &Region) -> margulis::Result<()> {
    if region.angle().rational_order().is_some() {
        return Err(Error::InvalidArgument(
            "maps f and f∘h require an irrational rotation spec".into(),
        ));
    }
    Ok(())
}

/// Max |u(f(h(P))) − b(r')| over the image of the height-1 horosphere, with
/// b evaluated through the certified piece decomposition (independent of the
/// envelope evaluation inside f).
fn composite_horosphere_residual(region: &Region, r_max: f64) -> margulis::Result<f64> {
    let dec = region.decompose(r_max)?;
    let r_hi = hyperbolic::profile_s(r_max);
    let r_lo = 1e-3f64.min(r_hi / 2.0);
    let n = 1000;
    let ratio = (r_hi / r_lo).powf(1.0 / (n as f64 - 1.0));
    let mut worst = 0.0f64;
    for i in 0..n {
        let r = r_lo * ratio.powi(i as i32);
        let p = Point4::new(r, 0.0, 0.0, 1.0)?;
        let image = map_f(region, map_h(p))?;
        let r_img = image.radial();
        if r_img > r_max {
            continue;
        }
        let b = region.curve_value(dec.active_index(r_img), r_img)?;
        worst = worst.max((image.u - b).abs());
    }
    Ok(worst)
}

fn distortion_document(
    c: &CommonArgs,
    map: &str,
    rep: &hyperbolic::DistortionReport,
    certified: bool,
    horosphere_residual: Option<f64>,
) -> String {
    match c.format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("map".into(), Value::String(map.into()));
            doc.insert("angle".into(), Value::String(c.angle.clone()));
            doc.insert("epsilon".into(), num17(c.epsilon));
            doc.insert("sample_count".into(), Value::from(rep.sample_count));
            doc.insert("seed".into(), Value::from(rep.seed));
            doc.insert("min_ratio".into(), num17(rep.min_ratio));
            doc.insert("max_ratio".into(), num17(rep.max_ratio));
            doc.insert("max_additive_defect".into(), num17(rep.max_additive_defect));
            doc.insert("max_displacement".into(), num17(rep.max_displacement));
            doc.insert("constant_C".into(), num17(rep.constant_c));
            doc.insert("surjectivity_ok".into(), Value::Bool(rep.surjectivity_ok));
            if let Some(res) = horosphere_residual {
                doc.insert("horosphere_residual".into(), num17(res));
            }
            doc.insert("certified".into(), Value::Bool(certified));
            pretty(&Value::Object(doc))
        }
        Format::Csv => {
            let mut out = String::from("field,value\n");
            out.push_str(&format!("map,{map}\n"));
            out.push_str(&format!("sample_count,{}\n", rep.sample_count));
            out.push_str(&format!("seed,{}\n", rep.seed));
            out.push_str(&format!("min_ratio,{}\n", fmt17(rep.min_ratio)));
            out.push_str(&format!("max_ratio,{}\n", fmt17(rep.max_ratio)));
            out.push_str(&format!(
                "max_additive_defect,{}\n",
                fmt17(rep.max_additive_defect)
            ));
            out.push_str(&format!("max_displacement,{}\n", fmt17(rep.max_displacement)));
            out.push_str(&format!("constant_C,{}\n", fmt17(rep.constant_c)));
            out.push_str(&format!("surjectivity_ok,{}\n", rep.surjectivity_ok));
            if let Some(res) = horosphere_residual {
                out.push_str(&format!("horosphere_residual,{}\n", fmt17(res)));
            }
            out.push_str(&format!("certified,{certified}\n"));
            out
        }
    }
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn num_traits_to_u64(q: &num_bigint::BigInt) -> Option<u64> {
    use num_traits::ToPrimitive;
    q.to_u64()
}
