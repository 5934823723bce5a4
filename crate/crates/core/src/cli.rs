//! The `omni` command line.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 invalid model, 3 empty core
//! for the requested α, 4 inapplicable mode or size guard.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::allocation::{
    enumerate_integer_core, fairness_compare, greedy_vertex, greedy_vertices, shapley, Allocation,
    AllocationError, Method, FULL_VERTEX_LIMIT,
};
use crate::combinatorics::enumerate_subsets;
use crate::dilworth::{convex_characteristic, dilworth_truncate, greedy_point};
use crate::entropy::{validate_polymatroid, SourceKind, SourceModel, Violation};
use crate::game::{satisfies_slepian_wolf, GameSpec, Membership, RateVector};
use crate::model_file::{
    canonical_json, model_digest, parse_model, parse_unvalidated_table, read_text, ModelFileError,
};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::report::{self, RunReport};
use crate::sumrate::{core_nonempty, min_sum_rate, ModelKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID_MODEL: i32 = 2;
pub const EXIT_CORE_EMPTY: i32 = 3;
pub const EXIT_INAPPLICABLE: i32 = 4;

/// Default for the `OMNI_MAX_USERS` guard.
pub const DEFAULT_MAX_USERS: usize = 12;
/// `polyhedron` emits vertex lists only up to this many users.
pub const POLYHEDRON_MAX_USERS: usize = 8;
/// Join orders sampled by `allocate --method greedy` above the full-enumeration limit.
pub const SAMPLED_ORDERS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "omni", version, about = "Communication for omniscience as a coalitional game")]
pub struct Cli {
    /// Output format; csv applies to rate tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for the exponential scans (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    pub parallel: usize,
    /// Seed for sampled join orders.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateMode {
    Asymptotic,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AllocMethod {
    Shapley,
    Greedy,
    Enumerate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a model file describes a valid entropy function.
    Validate { model: PathBuf },
    /// Minimum sum-rate for omniscience.
    Minrate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = RateMode::Asymptotic)]
        mode: RateMode,
    },
    /// Core nonemptiness at α, or membership of a rate vector.
    Core {
        model: PathBuf,
        #[arg(long)]
        alpha: String,
        /// Comma-separated rates in user order.
        #[arg(long)]
        rates: Option<String>,
        /// Also require integral rates.
        #[arg(long)]
        integer: bool,
    },
    /// Rate allocations in the core.
    Allocate {
        model: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long, value_enum)]
        method: AllocMethod,
        /// Comma-separated user ids giving the join order for greedy.
        #[arg(long)]
        order: Option<String>,
    },
    /// Constraints, truncated values and vertices of the core, as plot data.
    Polyhedron {
        model: PathBuf,
        #[arg(long)]
        alpha: String,
    },
}

/// A failed command: exit code plus message.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    results: Value,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
            results: Value::Null,
        }
    }
}

struct Outcome {
    results: Value,
    certificates: Value,
    csv: Option<Vec<Vec<String>>>,
    code: i32,
}

impl Outcome {
    fn ok(results: Value, certificates: Value) -> Self {
        Outcome {
            results,
            certificates,
            csv: None,
            code: EXIT_OK,
        }
    }
}

/// Output of one CLI invocation.
#[derive(Debug, Clone)]
pub struct CliOutput {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<RunReport>,
}

fn max_users() -> usize {
    std::env::var("OMNI_MAX_USERS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_USERS)
}

fn load(path: &Path) -> Result<SourceModel, Failure> {
    let model = crate::model_file::load_model(path).map_err(model_failure)?;
    let limit = max_users();
    if model.num_users() > limit {
        return Err(Failure::new(
            EXIT_INAPPLICABLE,
            format!(
                "model has {} users, above OMNI_MAX_USERS = {limit}",
                model.num_users()
            ),
        ));
    }
    Ok(model)
}

fn model_failure(e: ModelFileError) -> Failure {
    let code = if e.is_invalid_model() {
        EXIT_INVALID_MODEL
    } else {
        EXIT_IO
    };
    Failure::new(code, e.to_string())
}

fn parse_alpha(text: &str) -> Result<Rational, Failure> {
    let alpha = parse_rational(text).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    if alpha < Rational::default() {
        return Err(Failure::new(EXIT_IO, format!("α must be nonnegative, got {text}")));
    }
    Ok(alpha)
}

fn game(model: &SourceModel, alpha: Rational) -> Result<GameSpec<'_>, Failure> {
    GameSpec::new(model, alpha).map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

fn parse_rates(model: &SourceModel, text: &str) -> Result<RateVector, Failure> {
    let values = text
        .split(',')
        .map(|s| parse_rational(s).map_err(|e| Failure::new(EXIT_IO, e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != model.num_users() {
        return Err(Failure::new(
            EXIT_IO,
            format!(
                "rate vector has {} entries but the model has {} users",
                values.len(),
                model.num_users()
            ),
        ));
    }
    RateVector::new(values).map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

fn parse_order(model: &SourceModel, text: &str) -> Result<Vec<usize>, Failure> {
    let order: Vec<usize> = text
        .split(',')
        .map(|id| {
            let id = id.trim();
            model
                .users()
                .iter()
                .position(|u| u == id)
                .ok_or_else(|| Failure::new(EXIT_IO, format!("unknown user id {id:?} in --order")))
        })
        .collect::<Result<_, _>>()?;
    let mut sorted = order.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != model.num_users() || order.len() != model.num_users() {
        return Err(Failure::new(
            EXIT_IO,
            "--order must list every user exactly once",
        ));
    }
    Ok(order)
}

fn membership_json(model: &SourceModel, m: &Membership) -> Value {
    match m {
        Membership::Member => json!({"kind": "member"}),
        Membership::SumMismatch { expected, actual } => json!({
            "kind": "sum_mismatch",
            "expected": report::rational(expected),
            "actual": report::rational(actual),
        }),
        Membership::Fractional { index } => json!({
            "kind": "fractional",
            "user": model.users()[*index],
        }),
        Membership::LowerBound { subset, bound, actual } => json!({
            "kind": "lower_bound",
            "set": report::subset(model, *subset),
            "bound": report::rational(bound),
            "actual": report::rational(actual),
        }),
        Membership::UpperBound { subset, bound, actual } => json!({
            "kind": "upper_bound",
            "set": report::subset(model, *subset),
            "bound": report::rational(bound),
            "actual": report::rational(actual),
        }),
    }
}

fn allocation_json(model: &SourceModel, a: &Allocation) -> Value {
    json!({
        "method": a.method.as_str(),
        "rates": report::rates(&a.rates),
        "order": a.order.as_ref().map(|o| o.iter().map(|&i| model.users()[i].clone()).collect::<Vec<_>>()),
        "jain_index": a.jain_index.as_ref().map(report::rational),
    })
}

fn rate_header(model: &SourceModel, leading: &[&str], trailing: &[&str]) -> Vec<String> {
    leading
        .iter()
        .map(|s| s.to_string())
        .chain(model.users().iter().map(|u| format!("r_{u}")))
        .chain(trailing.iter().map(|s| s.to_string()))
        .collect()
}

fn allocation_row(model: &SourceModel, a: &Allocation) -> Vec<String> {
    let order = a
        .order
        .as_ref()
        .map(|o| o.iter().map(|&i| model.users()[i].clone()).collect::<Vec<_>>().join(" "))
        .unwrap_or_default();
    std::iter::once(a.method.as_str().to_owned())
        .chain(std::iter::once(order))
        .chain(report::exact_rates(&a.rates))
        .chain(std::iter::once(
            a.jain_index.as_ref().map(format_rational).unwrap_or_default(),
        ))
        .collect()
}

fn cmd_validate(path: &Path) -> Result<(Option<SourceModel>, Outcome), Failure> {
    let text = read_text(path).map_err(model_failure)?;
    match parse_model(&text) {
        Ok(model) => {
            let kind = match model.kind() {
                SourceKind::Packets(_) => "packets",
                SourceKind::Table(_) => "entropy",
            };
            let results = json!({
                "valid": true,
                "kind": kind,
                "users": model.users(),
                "total_entropy": report::rational(model.total_entropy()),
                "violations": [],
            });
            Ok((Some(model), Outcome::ok(results, json!({}))))
        }
        Err(e) if e.is_invalid_model() => {
            // re-read without the polymatroid gate to list every violation
            let violations = match parse_unvalidated_table(&text) {
                Ok(Some(table)) => {
                    let users = table.users().to_vec();
                    let name = |x: crate::Subset| {
                        json!(x.iter().map(|i| users[i].clone()).collect::<Vec<_>>())
                    };
                    validate_polymatroid(&table)
                        .violations
                        .iter()
                        .map(|v| match v {
                            Violation::Normalization { value } => json!({
                                "kind": "normalization",
                                "value": report::rational(value),
                            }),
                            Violation::Monotonicity { smaller, larger } => json!({
                                "kind": "monotonicity",
                                "X": name(*smaller),
                                "Y": name(*larger),
                            }),
                            Violation::Submodularity { x, y } => json!({
                                "kind": "submodularity",
                                "X": name(*x),
                                "Y": name(*y),
                            }),
                        })
                        .collect::<Vec<_>>()
                }
                _ => vec![],
            };
            Err(Failure {
                code: EXIT_INVALID_MODEL,
                message: e.to_string(),
                results: json!({"valid": false, "error": e.to_string(), "violations": violations}),
            })
        }
        Err(e) => Err(model_failure(e)),
    }
}

fn cmd_minrate(model: &SourceModel, mode: RateMode) -> Outcome {
    let kind = match mode {
        RateMode::Asymptotic => ModelKind::Asymptotic,
        RateMode::Integer => ModelKind::NonAsymptotic,
    };
    let r = min_sum_rate(model, kind);
    let identity = r.mmi_identity_value();
    let mut results = json!({
        "mode": kind.as_str(),
        "r_co": report::rational(&r.r_co),
        "h_total": report::rational(&r.h_total),
        "mmi": report::rational(&r.mmi),
        "mmi_identity": {
            "value": report::rational(&identity),
            "holds": identity == r.r_co,
        },
        "integral_model": r.integral_model,
    });
    if kind == ModelKind::NonAsymptotic && !r.integral_model {
        results["warning"] = json!(
            "integer-rate formula applied to a model with non-integer entropies"
        );
    }
    let certificates = json!({
        "argmax_partition": report::partition(model, &r.argmax_partition),
        "mmi_partition": report::partition(model, &r.mmi_partition),
    });
    let mut out = Outcome::ok(results, certificates);
    out.csv = Some(vec![
        vec!["key".into(), "value".into()],
        vec!["mode".into(), kind.as_str().into()],
        vec!["r_co".into(), format_rational(&r.r_co)],
        vec!["h_total".into(), format_rational(&r.h_total)],
        vec!["mmi".into(), format_rational(&r.mmi)],
    ]);
    out
}

fn cmd_core(
    model: &SourceModel,
    alpha: Rational,
    rates: Option<&str>,
    integer: bool,
) -> Result<Outcome, Failure> {
    let rates = rates.map(|t| parse_rates(model, t)).transpose()?;
    let g = game(model, alpha)?;
    let cert = core_nonempty(&g);
    let code = if cert.nonempty { EXIT_OK } else { EXIT_CORE_EMPTY };
    let certificates = json!({
        "partition": report::partition(model, &cert.partition),
        "partition_min": report::rational(&cert.partition_min),
    });
    let mut results = json!({
        "alpha": report::rational(g.alpha()),
        "nonempty": cert.nonempty,
    });
    let mut csv = vec![
        vec!["key".into(), "value".into()],
        vec!["alpha".into(), format_rational(g.alpha())],
        vec!["nonempty".into(), cert.nonempty.to_string()],
    ];
    if let Some(r) = rates {
        let m = g.in_core(&r, integer).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        let sw = satisfies_slepian_wolf(model, &r).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        results["rates"] = report::rates(&r);
        results["integer"] = json!(integer);
        results["member"] = json!(m.is_member());
        results["membership"] = membership_json(model, &m);
        results["slepian_wolf"] = json!({
            "satisfied": sw.is_none(),
            "violated_set": sw.map(|x| report::subset(model, x)),
        });
        csv.push(vec!["member".into(), m.is_member().to_string()]);
    }
    Ok(Outcome {
        results,
        certificates,
        csv: Some(csv),
        code,
    })
}

fn core_empty_failure(e: AllocationError) -> Failure {
    match e {
        AllocationError::CoreEmpty { ref alpha, ref r_co } => Failure {
            code: EXIT_CORE_EMPTY,
            message: e.to_string(),
            results: json!({
                "alpha": report::rational(alpha),
                "nonempty": false,
                "r_co": report::rational(r_co),
            }),
        },
        AllocationError::FractionalAlpha(_) | AllocationError::FractionalDual { .. } => {
            Failure::new(EXIT_INAPPLICABLE, e.to_string())
        }
        other => Failure::new(EXIT_IO, other.to_string()),
    }
}

fn cmd_allocate(
    model: &SourceModel,
    alpha: Rational,
    method: AllocMethod,
    order: Option<&str>,
    seed: u64,
) -> Result<Outcome, Failure> {
    let order = order.map(|t| parse_order(model, t)).transpose()?;
    let g = game(model, alpha)?;
    let trunc = dilworth_truncate(&g);
    let mut results = json!({"alpha": report::rational(g.alpha()), "method": format!("{method:?}").to_lowercase()});
    let allocations: Vec<Allocation> = match method {
        AllocMethod::Shapley => vec![shapley(&trunc).map_err(core_empty_failure)?],
        AllocMethod::Greedy => match &order {
            Some(o) => vec![greedy_vertex(&trunc, o).map_err(core_empty_failure)?],
            None => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let set = greedy_vertices(&trunc, SAMPLED_ORDERS, &mut rng)
                    .map_err(core_empty_failure)?;
                results["partial"] = json!(set.partial);
                results["orders_tried"] = json!(set.orders_tried);
                set.vertices
            }
        },
        AllocMethod::Enumerate => {
            let points = enumerate_integer_core(&g).map_err(core_empty_failure)?;
            trunc.require_nonempty().map_err(|e| core_empty_failure(e.into()))?;
            points
                .into_iter()
                .map(|r| Allocation::new(r, Method::Enumerated, None))
                .collect()
        }
    };
    let ranked = fairness_compare(&allocations);
    results["count"] = json!(allocations.len());
    results["allocations"] = json!(allocations.iter().map(|a| allocation_json(model, a)).collect::<Vec<_>>());
    results["fairness_ranking"] = json!(ranked
        .iter()
        .map(|a| report::exact_rates(&a.rates))
        .collect::<Vec<_>>());
    let mut csv = vec![rate_header(model, &["method", "order"], &["jain_index"])];
    csv.extend(allocations.iter().map(|a| allocation_row(model, a)));
    Ok(Outcome {
        results,
        certificates: json!({"r_co": report::rational(trunc.min_sum_rate())}),
        csv: Some(csv),
        code: EXIT_OK,
    })
}

fn cmd_polyhedron(model: &SourceModel, alpha: Rational) -> Result<Outcome, Failure> {
    if model.num_users() > POLYHEDRON_MAX_USERS {
        return Err(Failure::new(
            EXIT_INAPPLICABLE,
            format!(
                "polyhedron output is limited to {POLYHEDRON_MAX_USERS} users, model has {}",
                model.num_users()
            ),
        ));
    }
    let g = game(model, alpha)?;
    let trunc = dilworth_truncate(&g);
    let ground = model.ground();
    let mut constraints = Vec::new();
    let mut truncated = Vec::new();
    let mut convex = Vec::new();
    let conv = convex_characteristic(&trunc);
    let blank = vec![String::new(); model.num_users()];
    let mut csv = vec![rate_header(model, &["kind", "set", "bound"], &[])];
    for x in enumerate_subsets(ground, false, true) {
        let bound = g.dual_value(x);
        let relation = if x == ground { "=" } else { "<=" };
        constraints.push(json!({
            "set": report::subset(model, x),
            "relation": relation,
            "bound": report::rational(&bound),
        }));
        truncated.push(json!({
            "set": report::subset(model, x),
            "value": report::rational(trunc.get(x)),
        }));
        convex.push(json!({
            "set": report::subset(model, x),
            "value": report::rational(conv.get(x)),
        }));
        let label = model.label(x);
        let mut row = vec!["constraint".to_owned(), label.clone(), format_rational(&bound)];
        row.extend(blank.iter().cloned());
        csv.push(row);
        let mut row = vec!["truncated".to_owned(), label, format_rational(trunc.get(x))];
        row.extend(blank.iter().cloned());
        csv.push(row);
    }
    let nonempty = trunc.core_nonempty();
    let mut vertices = Vec::new();
    if nonempty {
        let n = model.num_users();
        let mut seen = std::collections::HashSet::new();
        use itertools::Itertools;
        for order in (0..n).permutations(n) {
            let point = RateVector::new(greedy_point(trunc.values(), &order))
                .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
            if seen.insert(point.clone()) {
                let mut row = vec!["vertex".to_owned(), String::new(), String::new()];
                row.extend(report::exact_rates(&point));
                csv.push(row);
                vertices.push(point);
            }
        }
        debug_assert!(n <= FULL_VERTEX_LIMIT);
    }
    let results = json!({
        "alpha": report::rational(g.alpha()),
        "nonempty": nonempty,
        "constraints": constraints,
        "truncated": truncated,
        "convex": convex,
        "vertices": vertices.iter().map(report::rates).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        results,
        certificates: json!({"r_co": report::rational(trunc.min_sum_rate())}),
        csv: Some(csv),
        code: if nonempty { EXIT_OK } else { EXIT_CORE_EMPTY },
    })
}

fn configure_threads(n: usize) {
    if n > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn csv_string(rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(vec![]);
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// Runs one command line and captures its output.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            return CliOutput {
                exit_code: code,
                stdout: if code == EXIT_OK { text.clone() } else { String::new() },
                stderr: if code == EXIT_OK { String::new() } else { text },
                report: None,
            };
        }
    };
    configure_threads(cli.parallel);
    let start = Instant::now();
    let (name, path) = match &cli.command {
        Command::Validate { model } => ("validate", model),
        Command::Minrate { model, .. } => ("minrate", model),
        Command::Core { model, .. } => ("core", model),
        Command::Allocate { model, .. } => ("allocate", model),
        Command::Polyhedron { model, .. } => ("polyhedron", model),
    };
    let mut inputs = json!({"model_path": path.display().to_string()});
    let mut loaded: Option<SourceModel> = None;
    let result = (|| -> Result<Outcome, Failure> {
        if let Command::Validate { model } = &cli.command {
            let (model, outcome) = cmd_validate(model)?;
            loaded = model;
            return Ok(outcome);
        }
        let model = load(path)?;
        let outcome = match &cli.command {
            Command::Validate { .. } => unreachable!(),
            Command::Minrate { mode, .. } => {
                inputs["mode"] = json!(format!("{mode:?}").to_lowercase());
                cmd_minrate(&model, *mode)
            }
            Command::Core {
                alpha,
                rates,
                integer,
                ..
            } => {
                inputs["alpha"] = json!(alpha);
                inputs["rates"] = json!(rates);
                inputs["integer"] = json!(integer);
                let alpha = parse_alpha(alpha)?;
                cmd_core(&model, alpha, rates.as_deref(), *integer)?
            }
            Command::Allocate {
                alpha,
                method,
                order,
                ..
            } => {
                inputs["alpha"] = json!(alpha);
                inputs["method"] = json!(format!("{method:?}").to_lowercase());
                inputs["order"] = json!(order);
                inputs["seed"] = json!(cli.seed);
                let alpha = parse_alpha(alpha)?;
                let result = cmd_allocate(&model, alpha, *method, order.as_deref(), cli.seed);
                loaded = Some(model);
                return result;
            }
            Command::Polyhedron { alpha, .. } => {
                inputs["alpha"] = json!(alpha);
                let alpha = parse_alpha(alpha)?;
                cmd_polyhedron(&model, alpha)?
            }
        };
        loaded = Some(model);
        Ok(outcome)
    })();
    if let Some(model) = &loaded {
        inputs["model"] = canonical_json(model);
    }
    let timing_ms = start.elapsed().as_secs_f64() * 1e3;
    let digest = loaded.as_ref().map(model_digest);
    match result {
        Ok(outcome) => {
            let report = RunReport {
                command: name.to_owned(),
                model_digest: digest,
                inputs,
                results: outcome.results,
                certificates: outcome.certificates,
                timing_ms,
                exit_code: outcome.code,
            };
            let stdout = match (cli.format, &outcome.csv) {
                (Format::Csv, Some(rows)) => csv_string(rows),
                _ => report.to_json_string() + "\n",
            };
            CliOutput {
                exit_code: outcome.code,
                stdout,
                stderr: String::new(),
                report: Some(report),
            }
        }
        Err(failure) => {
            let mut results = failure.results;
            if results.is_null() {
                results = json!({});
            }
            results["error"] = json!(failure.message);
            let report = RunReport {
                command: name.to_owned(),
                model_digest: digest,
                inputs,
                results,
                certificates: json!({}),
                timing_ms,
                exit_code: failure.code,
            };
            CliOutput {
                exit_code: failure.code,
                stdout: report.to_json_string() + "\n",
                stderr: format!("omni {name}: {}\n", failure.message),
                report: Some(report),
            }
        }
    }
}
