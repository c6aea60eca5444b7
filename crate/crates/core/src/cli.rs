//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure, 3 numerical
//! degeneracy. Tolerances and the seed are taken from flags, then from the
//! `RELCALC_TOL_{RANK,ORTH,EQ,NUM,VAR}` and `RELCALC_SEED` environment
//! variables, then from the defaults.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::RelError;
use crate::gallery;
use crate::relspec::{Entry, RelationSpec};
use crate::report::{
    analyze_spec, check_conditioning, check_rank, clean, pair_energy, residual_table, stone_report,
    stone_residual_list, PairEnergy, Residual, StoneMethod, StoneReport, VERSION,
};
use crate::scalar::{Field, Scalar};
use crate::stone::{stone_classify, StoneClass};
use crate::tolerance::ToleranceConfig;
use crate::verify::{self, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "relcalc",
    version,
    about = "Analyze linear relations between finite-dimensional spaces"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Equality tolerance; the other tolerances are scaled by the same factor.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for random probes and the verification harness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parts, classification, decomposition, characteristic matrix and metric checks.
    Analyze {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = StoneMethod::Both)]
        method: StoneMethod,
    },
    /// Characteristic matrix by projection, by resolvents, or both.
    Stone {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = StoneMethod::Both)]
        method: StoneMethod,
    },
    /// Direct against variational energies of one graph element.
    Metric {
        path: PathBuf,
        /// Index of an input generator.
        #[arg(long, conflicts_with = "vector", required_unless_present = "vector")]
        pair: Option<usize>,
        /// The pair `f f′`, e.g. `e1 e1+e2`, `1,0 0.5,2` or `[1,0] [0,1]`.
        #[arg(long, num_args = 2, value_names = ["F", "FP"], allow_hyphen_values = true)]
        vector: Option<Vec<String>>,
    },
    /// Randomized property suites.
    Verify {
        #[arg(long, default_value_t = 200)]
        cases: u32,
        #[arg(long, default_value_t = 8)]
        max_dim: u32,
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Directory for witness files of failing cases.
        #[arg(long, default_value = "relcalc-witnesses")]
        artifact_dir: PathBuf,
    },
    /// Worked examples with their expected values.
    Gallery {
        /// Entry name; `list` prints the available names.
        name: String,
        /// Write the entry's relation spec to this path.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

/// An error together with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<RelError> for Failure {
    fn from(e: RelError) -> Self {
        let code = match e {
            RelError::Input(_)
            | RelError::DimensionMismatch(_)
            | RelError::EmptyAmbient
            | RelError::NotInGraph(_)
            | RelError::Precondition(_) => EXIT_INPUT,
            RelError::Degenerate { .. }
            | RelError::Inconsistent(_)
            | RelError::Unbounded(_)
            | RelError::InvalidCharacteristic(_)
            | RelError::NotSingleValued(_)
            | RelError::NotEverywhereDefined { .. } => EXIT_DEGENERATE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Tolerances from defaults, then environment, then `--tol`.
pub fn resolve_tolerances(
    flag: Option<f64>,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<ToleranceConfig, RelError> {
    let mut cfg = ToleranceConfig::default();
    for (name, slot) in [
        ("RANK", &mut cfg.rank),
        ("ORTH", &mut cfg.orth),
        ("EQ", &mut cfg.eq),
        ("NUM", &mut cfg.num),
        ("VAR", &mut cfg.var),
    ] {
        let key = format!("RELCALC_TOL_{name}");
        if let Some(v) = env(&key) {
            *slot = v
                .trim()
                .parse()
                .map_err(|_| RelError::Input(format!("{key}: '{v}' is not a number")))?;
        }
    }
    if let Some(tol) = flag {
        cfg = ToleranceConfig::scaled_to_eq(tol)
            .map_err(|e| RelError::Input(format!("--tol: {e}")))?;
    }
    cfg.validate().map_err(|e| RelError::Input(e.to_string()))?;
    Ok(cfg)
}

pub fn resolve_seed(
    flag: Option<u64>,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<u64, RelError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env("RELCALC_SEED") {
        Some(v) => v.trim().parse().map_err(|_| {
            RelError::Input(format!("RELCALC_SEED: '{v}' is not an unsigned integer"))
        }),
        None => Ok(0),
    }
}

/// Parses `e1+2e3`-style combinations of unit vectors (one-based), comma
/// separated entries, or a JSON array (complex entries as `[re, im]`).
pub fn parse_vector<T: Scalar>(text: &str, len: usize) -> Result<DVector<T>, RelError> {
    let text = text.trim();
    let bad = |why: &str| RelError::Input(format!("vector '{text}': {why}"));
    let entries: Vec<Entry> = if text.starts_with('[') {
        serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?
    } else if text.contains('e') && !text.contains(',') && text.parse::<f64>().is_err() {
        let mut v = vec![0.0; len];
        let normalized = text.replace(' ', "").replace('-', "+-");
        for term in normalized.split('+').filter(|t| !t.is_empty()) {
            let (coef, idx) = term
                .split_once('e')
                .ok_or_else(|| bad("terms look like 2e1"))?;
            let coef = match coef {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad("bad coefficient"))?,
            };
            let i: usize = idx.parse().map_err(|_| bad("bad unit index"))?;
            if i == 0 || i > len {
                return Err(bad(&format!("unit index must be between 1 and {len}")));
            }
            v[i - 1] += coef;
        }
        v.into_iter().map(Entry::Real).collect()
    } else {
        text.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map(Entry::Real)
                    .map_err(|_| bad("entries must be numbers"))
            })
            .collect::<Result<_, _>>()?
    };
    if entries.len() != len {
        return Err(bad(&format!(
            "expected {len} entries, found {}",
            entries.len()
        )));
    }
    let mut out = DVector::zeros(len);
    for (i, e) in entries.into_iter().enumerate() {
        let (re, im) = match e {
            Entry::Real(x) => (x, 0.0),
            Entry::Complex([a, b]) => (a, b),
        };
        out[i] = T::from_parts(re, im).ok_or_else(|| bad("complex entry in a real relation"))?;
    }
    Ok(out)
}

fn read_spec(path: &PathBuf) -> Result<RelationSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    RelationSpec::from_json(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn to_json<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("output always serializes")
}

fn matrix_text(rows: &[Vec<Entry>]) -> String {
    let mut s = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|e| match e {
                Entry::Real(x) => format!("{x:>10.6}"),
                Entry::Complex([a, b]) => format!("{a:>9.5}{b:+.5}i"),
            })
            .collect();
        let _ = writeln!(s, "    [{}]", cells.join(" "));
    }
    s
}

#[derive(Serialize)]
struct StoneOutput {
    input_digest: String,
    stone: StoneReport,
    classification: StoneClass,
    residuals: Vec<Residual>,
    tolerances: ToleranceConfig,
    version: &'static str,
}

fn stone_output<T: Scalar>(
    spec: &RelationSpec,
    method: StoneMethod,
    cfg: &ToleranceConfig,
) -> Result<StoneOutput, RelError> {
    check_rank(&spec.pairs::<T>()?, spec.dim_h, spec.dim_k, cfg)?;
    let t = spec.to_relation::<T>(cfg)?;
    check_conditioning(&t, cfg)?;
    let stone = stone_report(&t, method, cfg)?;
    let mut residuals = stone_residual_list(&t, cfg)?;
    if let Some(d) = stone.cross_route_distance {
        residuals.insert(0, Residual::new("stone.cross_route", d, cfg.eq));
    }
    Ok(StoneOutput {
        input_digest: spec.digest(),
        stone,
        classification: stone_classify(&t, cfg)?,
        residuals,
        tolerances: *cfg,
        version: VERSION,
    })
}

#[derive(Serialize)]
struct MetricOutput {
    input_digest: String,
    metric: PairEnergy,
    residuals: Vec<Residual>,
    tolerances: ToleranceConfig,
    version: &'static str,
}

fn metric_output<T: Scalar>(
    spec: &RelationSpec,
    pair: Option<usize>,
    vector: Option<&[String]>,
    cfg: &ToleranceConfig,
) -> Result<MetricOutput, RelError> {
    let pairs = spec.pairs::<T>()?;
    check_rank(&pairs, spec.dim_h, spec.dim_k, cfg)?;
    let t = spec.to_relation::<T>(cfg)?;
    check_conditioning(&t, cfg)?;
    let (f, fp) = match (pair, vector) {
        (Some(i), _) => pairs.get(i).cloned().ok_or_else(|| {
            RelError::Input(format!("--pair {i}: the spec lists {} pairs", pairs.len()))
        })?,
        (None, Some([f, fp])) => (parse_vector(f, spec.dim_h)?, parse_vector(fp, spec.dim_k)?),
        _ => return Err(RelError::Input("give --pair or --vector F FP".into())),
    };
    let energy = pair_energy(&t, pair, &f, &fp, cfg)?;
    let residuals = vec![
        Residual::new("metric.singular", energy.singular.defect(), cfg.var),
        Residual::new("metric.regular", energy.regular.defect(), cfg.var),
    ];
    Ok(MetricOutput {
        input_digest: spec.digest(),
        metric: energy,
        residuals,
        tolerances: *cfg,
        version: VERSION,
    })
}

fn by_field<R>(
    spec: &RelationSpec,
    real: impl FnOnce() -> Result<R, RelError>,
    complex: impl FnOnce() -> Result<R, RelError>,
) -> Result<R, RelError> {
    match spec.field {
        Field::Real => real(),
        Field::Complex => complex(),
    }
}

fn execute(
    cli: Cli,
    env: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = resolve_tolerances(cli.tol, env)?;
    let seed = resolve_seed(cli.seed, env)?;
    let json = cli.format == Format::Json;
    let mut text = String::new();
    let mut code = EXIT_OK;
    match cli.command {
        Command::Analyze { path, method } => {
            let spec = read_spec(&path)?;
            let report = analyze_spec(&spec, method, seed, &cfg)?;
            if !report.passed() {
                code = EXIT_DEGENERATE;
            }
            text = if json {
                report.to_json()
            } else {
                report.to_text()
            };
        }
        Command::Stone { path, method } => {
            let spec = read_spec(&path)?;
            let o = by_field(
                &spec,
                || stone_output::<f64>(&spec, method, &cfg),
                || stone_output::<Complex64>(&spec, method, &cfg),
            )?;
            if o.residuals.iter().any(|r| !r.passed) {
                code = EXIT_DEGENERATE;
            }
            if json {
                text = to_json(&o);
            } else {
                let _ = writeln!(text, "input digest {}", o.input_digest);
                for (label, blocks) in [
                    ("projection", &o.stone.projection),
                    ("resolvent", &o.stone.resolvent),
                ] {
                    if let Some(b) = blocks {
                        let _ = writeln!(text, "{label} route");
                        for (name, m) in [
                            ("R11", &b.r11),
                            ("R12", &b.r12),
                            ("R21", &b.r21),
                            ("R22", &b.r22),
                        ] {
                            let _ = writeln!(text, "  {name}");
                            text.push_str(&matrix_text(m));
                        }
                    }
                }
                if let Some(d) = o.stone.cross_route_distance {
                    let _ = writeln!(text, "cross-route distance {d:.3e}");
                }
                let c = &o.classification;
                let _ =
                    writeln!(
                    text,
                    "regular={} singular={} maximally_singular={} ‖R̃12‖={:.3e} ‖R̃22 − I‖={:.3e}",
                    c.regular, c.singular, c.maximally_singular, c.r12_norm, c.r22_identity_distance
                );
                text.push_str(&residual_table(&o.residuals));
            }
        }
        Command::Metric { path, pair, vector } => {
            let spec = read_spec(&path)?;
            let v = vector.as_deref();
            let o = by_field(
                &spec,
                || metric_output::<f64>(&spec, pair, v, &cfg),
                || metric_output::<Complex64>(&spec, pair, v, &cfg),
            )?;
            if o.residuals.iter().any(|r| !r.passed) {
                code = EXIT_DEGENERATE;
            }
            if json {
                text = to_json(&o);
            } else {
                let e = &o.metric;
                let _ = writeln!(
                    text,
                    "singular energy {:.9} (direct {:.9})\nregular energy  {:.9} (direct {:.9})\ngap {:.3e}",
                    clean(e.singular.variational),
                    clean(e.singular.direct),
                    clean(e.regular.variational),
                    clean(e.regular.direct),
                    e.gap
                );
                text.push_str(&residual_table(&o.residuals));
            }
        }
        Command::Verify {
            cases,
            max_dim,
            suite,
            artifact_dir,
        } => {
            if max_dim == 0 {
                return Err(input_error("--max-dim must be at least 1"));
            }
            let opts = VerifyOptions {
                seed,
                cases: cases as usize,
                max_dim: max_dim as usize,
                cfg,
                suites: Suite::parse_list(&suite)?,
            };
            let summary = verify::run(&opts);
            text = if json {
                summary.to_json()
            } else {
                summary.to_text()
            };
            if !summary.passed {
                code = EXIT_VERIFY;
                for w in summary.witnesses() {
                    let path = verify::write_witness(&artifact_dir, w)
                        .map_err(|e| input_error(format!("{}: {e}", artifact_dir.display())))?;
                    if !json {
                        let _ = writeln!(text, "witness written to {}", path.display());
                    }
                }
            }
        }
        Command::Gallery { name, emit } => {
            if name == "list" {
                text = gallery::NAMES.join("\n") + "\n";
            } else {
                let entry = gallery::entry(&name, &cfg).map_err(|e| match e {
                    RelError::Precondition(m) => input_error(m),
                    other => other.into(),
                })?;
                let checks = entry.verify(&cfg)?;
                if checks.iter().any(|c| !c.passed) {
                    code = EXIT_VERIFY;
                }
                if let Some(path) = &emit {
                    let spec = RelationSpec::from_relation(&entry.relation);
                    std::fs::write(path, spec.to_json_pretty() + "\n")
                        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
                }
                if json {
                    #[derive(Serialize)]
                    struct GalleryOutput<'a> {
                        name: &'a str,
                        notes: &'a str,
                        checks: &'a [gallery::Check],
                        spec: RelationSpec,
                    }
                    text = to_json(&GalleryOutput {
                        name: &entry.name,
                        notes: &entry.notes,
                        checks: &checks,
                        spec: RelationSpec::from_relation(&entry.relation),
                    });
                } else {
                    let _ = writeln!(text, "{}\n{}\n", entry.name, entry.notes);
                    let width = checks
                        .iter()
                        .map(|c| c.name.chars().count())
                        .max()
                        .unwrap_or(0);
                    let _ = writeln!(
                        text,
                        "{:<width$}  {:<24} {:<24} ok",
                        "check", "expected", "computed"
                    );
                    for c in &checks {
                        let pad = width - c.name.chars().count();
                        let _ = writeln!(
                            text,
                            "{}{}  {:<24} {:<24} {}",
                            c.name,
                            " ".repeat(pad),
                            c.expected,
                            c.computed,
                            if c.passed { "yes" } else { "NO" }
                        );
                    }
                    if let Some(path) = &emit {
                        let _ = writeln!(text, "spec written to {}", path.display());
                    }
                }
            }
        }
    }
    if !text.ends_with('\n') {
        text.push('\n');
    }
    out.write_all(text.as_bytes())
        .map_err(|e| input_error(e.to_string()))?;
    Ok(code)
}

/// Runs the CLI on explicit arguments and environment; returns the exit code.
pub fn run<I, S>(
    args: I,
    env: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, env, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "relcalc: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> i32 {
    let env = |k: &str| std::env::var(k).ok();
    run(
        std::env::args_os(),
        &env,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn vector_syntax() {
        let v: DVector<f64> = parse_vector("e1+e2", 2).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 1.0]);
        let v: DVector<f64> = parse_vector("2e1 - 0.5e3", 3).unwrap();
        assert_eq!(v.as_slice(), &[2.0, 0.0, -0.5]);
        let v: DVector<f64> = parse_vector("1.5,-2", 2).unwrap();
        assert_eq!(v.as_slice(), &[1.5, -2.0]);
        let v: DVector<f64> = parse_vector("[1e-3, 0]", 2).unwrap();
        assert_eq!(v.as_slice(), &[1e-3, 0.0]);
        let v: DVector<Complex64> = parse_vector("[[0, 1]]", 1).unwrap();
        assert_eq!(v[0], Complex64::new(0.0, 1.0));
        assert!(parse_vector::<f64>("e3", 2).is_err());
        assert!(parse_vector::<f64>("1,2,3", 2).is_err());
        assert!(parse_vector::<f64>("[[0, 1]]", 1).is_err());
        assert!(parse_vector::<f64>("x", 1).is_err());
    }

    #[test]
    fn precedence_of_tolerances_and_seed() {
        let env = |k: &str| match k {
            "RELCALC_TOL_EQ" => Some("1e-7".to_string()),
            "RELCALC_SEED" => Some("17".to_string()),
            _ => None,
        };
        assert_eq!(
            resolve_tolerances(None, &no_env).unwrap(),
            ToleranceConfig::default()
        );
        assert_eq!(resolve_tolerances(None, &env).unwrap().eq, 1e-7);
        assert_eq!(resolve_tolerances(Some(1e-8), &env).unwrap().eq, 1e-8);
        assert_eq!(resolve_seed(None, &env).unwrap(), 17);
        assert_eq!(resolve_seed(Some(3), &env).unwrap(), 3);
        assert_eq!(resolve_seed(None, &no_env).unwrap(), 0);
        let broken = |k: &str| (k == "RELCALC_TOL_NUM").then(|| "abc".to_string());
        assert!(resolve_tolerances(None, &broken).is_err());
    }

    #[test]
    fn bad_arguments_exit_with_input_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["relcalc", "frobnicate"], &no_env, &mut out, &mut err),
            EXIT_INPUT
        );
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["relcalc", "--help"], &no_env, &mut out, &mut err),
            EXIT_OK
        );
        assert!(String::from_utf8(out).unwrap().contains("verify"));
    }
}
