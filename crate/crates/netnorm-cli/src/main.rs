//! netnorm: covering-net estimators for generalized operator norms.
//!
//! Exit codes: 0 success, 2 validation failure or malformed input, 3
//! budget/parameter errors.

mod instance;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use instance::InstanceFile;
use netnorm::algorithms::{
    hsep_basic, hsep_multipartite, hsep_sparse, injective_norm, s1_to_banach, EstimateError,
};
use netnorm::apps::{eb_channel_max_output_norm, two_to_q_even, two_to_q_norm};
use netnorm::feascheck::SolverConfig;
use netnorm::matlib::Exponent;
use netnorm::model::{banach_constants, NormFamily};
use netnorm::oracle;

#[derive(Parser)]
#[command(
    name = "netnorm",
    version,
    about = "Covering-net estimators for generalized operator norms"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Requested additive accuracy δ.
    #[arg(long)]
    delta: f64,
    /// Maximum number of net points to enumerate.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Base seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subgradient iteration cap per feasibility check.
    #[arg(long, default_value_t = 2000)]
    solver_iters: usize,
    /// Solver restarts per feasibility check.
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (json only).
    #[arg(long, default_value = "json")]
    format: String,
}

impl Common {
    fn solver(&self) -> SolverConfig<f64> {
        SolverConfig {
            max_iters: self.solver_iters,
            restarts: self.restarts,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check an instance file against its invariants.
    Validate { file: PathBuf },
    /// h_Sep of a one-way LOCC decomposition by direct net scan.
    Hsep {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
    /// h_Sep with sparsification preprocessing.
    HsepSparse {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
    /// Multipartite h_Sep for a fully one-way LOCC tree.
    HsepMulti {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
    /// Maximum output Schatten-α norm of an entanglement-breaking channel.
    ChannelNorm {
        /// Output norm exponent α > 1 (or "inf").
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
    /// ‖A‖²_{2→q} (or ‖A‖^q_{2→q} with --even) for q ≥ 2.
    TwoToQ {
        #[arg(long)]
        q: f64,
        /// Use the multipartite even-q reduction (even q ≥ 4).
        #[arg(long, default_value_t = false)]
        even: bool,
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
    /// Injective A→B norm from an explicit ℓ₁ factorization.
    Injective {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
    /// Brute-force references: alternating ascent (locc) or projected
    /// gradient ascent (matrix, with --q).
    Oracle {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        file: PathBuf,
    },
    /// Empirical lemma suites: net covering, matrix Hoeffding,
    /// symmetrization, Azuma-type tails, type constants.
    LemmaCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reduced trial counts for smoke testing.
        #[arg(long, default_value_t = false)]
        fast: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

fn tool_info() -> ToolInfo {
    ToolInfo {
        name: "netnorm",
        version: env!("CARGO_PKG_VERSION"),
    }
}

#[derive(Serialize)]
struct ReportFile {
    tool: ToolInfo,
    config: serde_json::Value,
    report: netnorm::EstimateReport64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

struct CliError {
    code: ExitCode,
    message: String,
}

fn data_err(message: impl Into<String>) -> CliError {
    CliError {
        code: ExitCode::from(2),
        message: message.into(),
    }
}

fn param_err(message: impl Into<String>) -> CliError {
    CliError {
        code: ExitCode::from(3),
        message: message.into(),
    }
}

fn estimate_err(e: EstimateError) -> CliError {
    match e {
        EstimateError::InvalidInput(v) => data_err(format!(
            "input failed validation: {}",
            serde_json::to_string(&v).unwrap_or_default()
        )),
        EstimateError::Net(_)
        | EstimateError::Parameter(_)
        | EstimateError::Sparsify(_)
        | EstimateError::NoFeasiblePoint => param_err(e.to_string()),
        other => CliError {
            code: ExitCode::from(1),
            message: other.to_string(),
        },
    }
}

fn load_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        data_err(format!(
            "{}: malformed instance at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn emit(out: &Option<PathBuf>, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serialization");
    match out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| param_err(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn with_pool<F: FnOnce() -> R + Send, R: Send>(threads: Option<usize>, f: F) -> R {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn check_format(format: &str) -> Result<(), CliError> {
    if format != "json" {
        return Err(param_err(format!("unsupported format {format:?}")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Cmd::Validate { file } => {
            let inst = load_instance(&file)?;
            let violations = match &inst {
                InstanceFile::Locc { .. } => inst.to_locc().map_err(data_err)?.validate(),
                InstanceFile::Channel { .. } => inst.to_channel().map_err(data_err)?.validate(),
                InstanceFile::Multiparty { .. } => {
                    inst.to_multiparty().map_err(data_err)?.validate()
                }
                InstanceFile::Matrix { .. } => {
                    inst.to_matrix().map_err(data_err)?;
                    Vec::new()
                }
                InstanceFile::General { .. } => {
                    let (g, desc) = inst.to_general().map_err(data_err)?;
                    g.validate(&desc)
                }
                InstanceFile::Injective { .. } => {
                    inst.to_injective().map_err(data_err)?;
                    Vec::new()
                }
            };
            let ok = violations.is_empty();
            let doc = json!({
                "tool": {"name": "netnorm", "version": env!("CARGO_PKG_VERSION")},
                "kind": inst.kind_name(),
                "valid": ok,
                "violations": violations,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }

        Cmd::Hsep { common, file } => {
            check_format(&common.format)?;
            let m = load_instance(&file)?.to_locc().map_err(data_err)?;
            let solver = common.solver();
            let report = with_pool(common.threads, || {
                hsep_basic(&m, common.delta, common.budget, &solver)
            })
            .map_err(estimate_err)?;
            let doc = ReportFile {
                tool: tool_info(),
                config: config_json("hsep", &common, &file, &[]),
                report,
            };
            emit(&common.out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }

        Cmd::HsepSparse { common, file } => {
            check_format(&common.format)?;
            let m = load_instance(&file)?.to_locc().map_err(data_err)?;
            let solver = common.solver();
            let report = with_pool(common.threads, || {
                hsep_sparse(&m, common.delta, common.seed, common.budget, &solver)
            })
            .map_err(estimate_err)?;
            let doc = ReportFile {
                tool: tool_info(),
                config: config_json("hsep-sparse", &common, &file, &[]),
                report,
            };
            emit(&common.out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }

        Cmd::HsepMulti { common, file } => {
            check_format(&common.format)?;
            let t = load_instance(&file)?.to_multiparty().map_err(data_err)?;
            let solver = common.solver();
            let report = with_pool(common.threads, || {
                hsep_multipartite(&t, common.delta, common.budget, &solver)
            })
            .map_err(estimate_err)?;
            let doc = ReportFile {
                tool: tool_info(),
                config: config_json("hsep-multi", &common, &file, &[]),
                report,
            };
            emit(&common.out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }

        Cmd::ChannelNorm {
            alpha,
            common,
            file,
        } => {
            check_format(&common.format)?;
            let ch = load_instance(&file)?.to_channel().map_err(data_err)?;
            let exp = parse_alpha(&alpha)?;
            let solver = common.solver();
            let report = with_pool(common.threads, || {
                eb_channel_max_output_norm(&ch, exp, common.delta, common.budget, &solver)
            })
            .map_err(estimate_err)?;
            let doc = ReportFile {
                tool: tool_info(),
                config: config_json("channel-norm", &common, &file, &[("alpha", json!(alpha))]),
                report,
            };
            emit(&common.out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }

        Cmd::TwoToQ {
            q,
            even,
            common,
            file,
        } => {
            check_format(&common.format)?;
            let a = load_instance(&file)?.to_matrix().map_err(data_err)?;
            let solver = common.solver();
            let report = with_pool(common.threads, || {
                if even {
                    two_to_q_even(&a, q as usize, common.delta, common.budget, &solver)
                } else {
                    two_to_q_norm(&a, q, common.delta, common.budget, &solver)
                }
            })
            .map_err(estimate_err)?;
            let doc = ReportFile {
                tool: tool_info(),
                config: config_json(
                    "two-to-q",
                    &common,
                    &file,
                    &[("q", json!(q)), ("even", json!(even))],
                ),
                report,
            };
            emit(&common.out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Injective { common, file } => {
            check_format(&common.format)?;
            let inst = load_instance(&file)?;
            let solver = common.solver();
            // `general` instances run the S₁→B scan directly; `injective`
            // instances carry an explicit factorization and input family.
            let report = match &inst {
                InstanceFile::General { .. } => {
                    let (g, desc) = inst.to_general().map_err(data_err)?;
                    with_pool(common.threads, || {
                        s1_to_banach(&g, &desc, common.delta, common.budget, &solver, None, None)
                    })
                    .map_err(estimate_err)?
                }
                _ => {
                    let (xstar, ys, family, a_dim, desc) = inst.to_injective().map_err(data_err)?;
                    with_pool(common.threads, || {
                        injective_norm(
                            &xstar,
                            &ys,
                            family,
                            a_dim,
                            &desc,
                            common.delta,
                            common.budget,
                            &solver,
                        )
                    })
                    .map_err(estimate_err)?
                }
            };
            let doc = ReportFile {
                tool: tool_info(),
                config: config_json("injective", &common, &file, &[]),
                report,
            };
            emit(&common.out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Oracle {
            q,
            restarts,
            iters,
            seed,
            out,
            file,
        } => {
            let inst = load_instance(&file)?;
            let doc = match &inst {
                InstanceFile::Locc { .. } => {
                    let m = inst.to_locc().map_err(data_err)?;
                    let (value, alpha, beta) =
                        oracle::hsep_alternating(&m.assemble(), m.d1, m.d2, restarts, iters, seed);
                    json!({
                        "tool": {"name": "netnorm", "version": env!("CARGO_PKG_VERSION")},
                        "oracle": "hsep-alternating",
                        "value": value,
                        "alpha": netnorm::jsonio::MatrixJson::from_hermitian(alpha.as_herm()),
                        "beta": netnorm::jsonio::MatrixJson::from_hermitian(beta.as_herm()),
                        "restarts": restarts, "iters": iters, "seed": seed,
                    })
                }
                InstanceFile::Matrix { .. } => {
                    let a = inst.to_matrix().map_err(data_err)?;
                    let q = q.ok_or_else(|| param_err("--q is required for matrix oracles"))?;
                    if q < 2.0 {
                        return Err(param_err("--q must be ≥ 2"));
                    }
                    let value = oracle::two_to_q_gradient(&a, q, restarts, iters, seed);
                    json!({
                        "tool": {"name": "netnorm", "version": env!("CARGO_PKG_VERSION")},
                        "oracle": "two-to-q-gradient",
                        "value": value,
                        "q": q, "restarts": restarts, "iters": iters, "seed": seed,
                    })
                }
                other => {
                    return Err(param_err(format!(
                        "no oracle for instance kind {}",
                        other.kind_name()
                    )))
                }
            };
            emit(&out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }

        Cmd::LemmaCheck { seed, fast, out } => {
            let doc = lemma_check(seed, fast);
            emit(&out, &doc)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_alpha(text: &str) -> Result<Exponent<f64>, CliError> {
    if text == "inf" {
        return Ok(Exponent::Infinity);
    }
    text.parse::<f64>()
        .map(Exponent::Finite)
        .map_err(|_| param_err(format!("--alpha must be a number or \"inf\", got {text:?}")))
}

fn config_json(
    subcommand: &str,
    common: &Common,
    file: &Path,
    extra: &[(&str, serde_json::Value)],
) -> serde_json::Value {
    let mut cfg = json!({
        "subcommand": subcommand,
        "instance": file.display().to_string(),
        "delta": common.delta,
        "budget": common.budget,
        "seed": common.seed,
        "solver_iters": common.solver_iters,
        "restarts": common.restarts,
        "threads": common.threads,
        "format": common.format,
    });
    for (k, v) in extra {
        cfg[k] = v.clone();
    }
    cfg
}

fn lemma_check(seed: u64, fast: bool) -> serde_json::Value {
    let scale = if fast { 10 } else { 1 };
    let covering = oracle::net_covering_check(100 / scale, seed);
    let deltas = [0.25, 0.5, 1.0];
    let mut hoeffding_pass = true;
    let mut hoeffding_rows = Vec::new();
    for d in [2usize, 4] {
        for k in [50usize, 200] {
            let rows = oracle::hoeffding_tail_check(d, k, 1.0, 2000 / scale, &deltas, seed + 1);
            for r in rows {
                hoeffding_pass &= r.pass;
                hoeffding_rows.push(json!({
                    "d": d, "k": k, "delta": r.delta,
                    "empirical": r.empirical, "bound": r.bound, "pass": r.pass,
                }));
            }
        }
    }
    let s2 = banach_constants::<f64>(NormFamily::Schatten, Exponent::Finite(2.0), 3).unwrap();
    let s4 = banach_constants::<f64>(NormFamily::Schatten, Exponent::Finite(4.0), 4).unwrap();
    let l2 = banach_constants::<f64>(NormFamily::Ell, Exponent::Finite(2.0), 6).unwrap();
    let sym2 = oracle::symmetrization_check(&s2, 6, 20, 400 / scale, seed + 2);
    let sym4 = oracle::symmetrization_check(&s4, 6, 20, 400 / scale, seed + 3);
    let azuma = oracle::azuma_tail_check(&s4, 50, 1.0, 2000 / scale, &deltas, seed + 4);
    let azuma_pass = azuma.iter().all(|r| r.pass);
    let t_l2 = oracle::type_constant_check(&l2, 10, 30 / scale.min(29), seed + 5);
    let t_s4 = oracle::type_constant_check(&s4, 8, 50 / scale.min(49), seed + 6);

    let lemmas = vec![
        json!({"lemma": "net-covering", "pass": covering.failures == 0,
               "trials": covering.trials, "failures": covering.failures,
               "worst_margin": covering.worst_margin}),
        json!({"lemma": "matrix-hoeffding", "pass": hoeffding_pass, "rows": hoeffding_rows}),
        json!({"lemma": "symmetrization", "pass": sym2.pass && sym4.pass,
               "s2": {"lhs": sym2.lhs, "rhs_doubled": sym2.rhs_doubled, "sigma": sym2.sigma},
               "s4": {"lhs": sym4.lhs, "rhs_doubled": sym4.rhs_doubled, "sigma": sym4.sigma}}),
        json!({"lemma": "azuma-tails", "pass": azuma_pass,
               "rows": azuma.iter().map(|r| json!({"delta": r.delta, "empirical": r.empirical,
                   "bound": r.bound, "pass": r.pass})).collect::<Vec<_>>()}),
        json!({"lemma": "type-constants", "pass": t_l2.pass && t_s4.pass,
               "l2": {"max_ratio": t_l2.max_ratio, "c_gamma": t_l2.c_gamma, "exact_signs": t_l2.exact_signs},
               "s4": {"max_ratio": t_s4.max_ratio, "c_gamma": t_s4.c_gamma, "mc_sigma": t_s4.mc_sigma}}),
    ];
    let all = lemmas.iter().all(|l| l["pass"].as_bool().unwrap_or(false));
    json!({
        "tool": {"name": "netnorm", "version": env!("CARGO_PKG_VERSION")},
        "seed": seed,
        "fast": fast,
        "all_pass": all,
        "lemmas": lemmas,
    })
}
