//! `disext` — dissipativity checks for operator extensions.
//!
//! Exit codes: 0 the checked inequality holds (dissipative/accretive),
//! 1 it fails, 2 the margin is inside the boundary band, 3 a domain
//! membership violation makes the check inapplicable, 4 input or schema
//! error.

mod output;
mod schema;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use disext_core::decision::BoundaryBand;
use disext_core::exec;
use disext_core::findim::{self, ExtensionSpec, PartialOperator};
use disext_core::firstorder::{
    build_extension, dissipativity_check, scan_point, ExtensionDescriptor, SingularParams,
};
use disext_core::funcspace::Interval;
use disext_core::gridoracle::{
    closability_falsifier, cross_validate, regression_cases, regression_pair, standard_ladder,
};
use disext_core::schrodinger::{accretive_check, solve_eta, PotentialSpec, DEFAULT_ETA_TOL};
use disext_core::CoreError;

use output::{csv_line, emit_error, emit_report};
use schema::{
    check_schema_version, matrix_from_json, potential_from_json, terms_from_json, InstanceFile,
    Tolerances,
};

#[derive(Parser)]
#[command(
    name = "disext",
    version,
    about = "Dissipativity checks for operator extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide dissipativity/accretivity of one extension instance
    Check {
        #[command(subcommand)]
        target: CheckTarget,
    },
    /// Sweep a coefficient range and emit one row per grid point
    Scan {
        #[command(subcommand)]
        target: ScanTarget,
    },
    /// Solve the decaying-kernel equation and report its boundary slope
    Eta {
        /// Constant potential value
        #[arg(long, default_value_t = 1.0)]
        potential_const: f64,
        /// JSON file holding a potential object instead
        #[arg(long)]
        input: Option<PathBuf>,
        /// Truncation length (default 40/sqrt(lower bound))
        #[arg(long = "truncation-L")]
        truncation_l: Option<f64>,
        /// Seed-sensitivity tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Keep at most this many grid nodes in the output
        #[arg(long, default_value_t = 513)]
        grid_cap: usize,
    },
    /// Cross-validate analytic decisions against grid-oracle margins
    Validate {
        /// Case id (e.g. fo-03) or "all"
        #[arg(long, default_value = "all")]
        case: String,
        /// Finest mesh width of the refinement ladder
        #[arg(long, default_value_t = 1.0 / 512.0)]
        max_h: f64,
        /// Number of ladder levels (each coarser by a factor 2)
        #[arg(long = "mesh-depth", default_value_t = 3)]
        mesh_depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Built-in demonstrations
    Demo {
        #[command(subcommand)]
        which: DemoKind,
    },
}

#[derive(Subcommand)]
enum CheckTarget {
    /// Finite-dimensional instance from a JSON file
    Matrix {
        #[arg(long)]
        input: PathBuf,
        /// Strict-positivity floor (default 1e-6 ||VA||)
        #[arg(long)]
        epsilon: Option<f64>,
        /// Relative boundary band (default 1e-9)
        #[arg(long)]
        band: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Half-line Schrodinger extension instance
    Schrodinger {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "truncation-L")]
        truncation_l: Option<f64>,
        /// Seed-sensitivity tolerance for the kernel solve
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        band: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Singular first-order extension instance
    #[command(name = "first-order")]
    FirstOrder {
        /// JSON instance file; alternatively pass --gamma with --v/--l
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Inline JSON term list for the complement direction
        #[arg(long)]
        v: Option<String>,
        /// Inline JSON term list for the image direction
        #[arg(long)]
        l: Option<String>,
        #[arg(long)]
        band: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum ScanTarget {
    /// Sweep `l = i c x^gamma`, `v = x^gamma` over a coefficient grid
    #[command(name = "first-order")]
    FirstOrder {
        /// Comma-separated gamma values
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        coeff_start: f64,
        #[arg(long, default_value_t = 8.0)]
        coeff_end: f64,
        #[arg(long, default_value_t = 0.1)]
        coeff_step: f64,
        #[arg(long)]
        band: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum DemoKind {
    /// The non-closable boundary form, in exact rational arithmetic
    Closability {
        /// Comma-separated indices of the hat functions
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        n: Vec<i64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors take the schema-error exit code; --help/--version exit 0
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(4);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    let code = run(cli);
    std::process::exit(code);
}

fn exit_code_for(err: &CoreError) -> i32 {
    match err {
        CoreError::DomainViolation { .. }
        | CoreError::NotInWStarDomain { .. }
        | CoreError::NonIntegrableSingularity { .. }
        | CoreError::ConditionFailed { .. }
        | CoreError::StrictPositivityViolated { .. } => 3,
        _ => 4,
    }
}

fn fail(err: CoreError) -> i32 {
    let code = exit_code_for(&err);
    emit_error(&err.to_string(), code);
    code
}

fn read_instance(path: &PathBuf) -> Result<InstanceFile, i32> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        emit_error(&format!("cannot read {}: {e}", path.display()), 4);
        4
    })?;
    serde_json::from_str(&text).map_err(|e| {
        emit_error(&format!("schema error in {}: {e}", path.display()), 4);
        4
    })
}

fn band_from(flag: Option<f64>, tol: &Option<Tolerances>) -> BoundaryBand {
    let rel = flag
        .or_else(|| tol.as_ref().and_then(|t| t.boundary_band))
        .unwrap_or(1e-9);
    BoundaryBand::new(rel)
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Check { target } => match target {
            CheckTarget::Matrix {
                input,
                epsilon,
                band,
                format,
            } => check_matrix(&input, epsilon, band, format),
            CheckTarget::Schrodinger {
                input,
                truncation_l,
                tol,
                band,
                format,
            } => check_schrodinger(&input, truncation_l, tol, band, format),
            CheckTarget::FirstOrder {
                input,
                gamma,
                v,
                l,
                band,
                format,
            } => check_first_order(input, gamma, v, l, band, format),
        },
        Command::Scan { target } => match target {
            ScanTarget::FirstOrder {
                gamma,
                coeff_start,
                coeff_end,
                coeff_step,
                band,
                format,
            } => scan_first_order(&gamma, coeff_start, coeff_end, coeff_step, band, format),
        },
        Command::Eta {
            potential_const,
            input,
            truncation_l,
            tol,
            grid_cap,
        } => eta_command(potential_const, input, truncation_l, tol, grid_cap),
        Command::Validate {
            case,
            max_h,
            mesh_depth,
            format,
        } => validate_command(&case, max_h, mesh_depth, format),
        Command::Demo { which } => match which {
            DemoKind::Closability { n, format } => demo_closability(&n, format),
        },
    }
}

// ---------------------------------------------------------------------------
// check subcommands

fn check_matrix(path: &PathBuf, epsilon: Option<f64>, band: Option<f64>, format: Format) -> i32 {
    let start = Instant::now();
    let instance = match read_instance(path) {
        Ok(InstanceFile::Matrix(m)) => m,
        Ok(_) => {
            emit_error("instance kind mismatch: expected \"matrix\"", 4);
            return 4;
        }
        Err(code) => return code,
    };
    let outcome = (|| -> disext_core::Result<findim::CheckReport> {
        check_schema_version(instance.schema_version)?;
        let n = instance.ambient_dim;
        let d_basis = matrix_from_json(&instance.domain_basis, n, "domain_basis")?;
        let d_action = matrix_from_json(&instance.domain_action, n, "domain_action")?;
        let c_basis = matrix_from_json(&instance.complement_basis, n, "complement_basis")?;
        let c_action = matrix_from_json(&instance.complement_action, n, "complement_action")?;
        let p = PartialOperator::new(d_basis, d_action)?;
        let e = ExtensionSpec::from_raw_complement(&p, c_basis, c_action)?;
        let va = findim::assemble_form_matrix(&p);
        let eps = epsilon
            .or(instance.epsilon)
            .unwrap_or_else(|| findim::default_epsilon(&va));
        let band = band_from(band, &instance.tolerances);
        findim::criterion_check(&p, &e, eps, band)
    })();
    match outcome {
        Ok(report) => {
            let code = report.decision.exit_code();
            eprintln!(
                "decision: {:?} | criterion margin {:.6e} | oracle margin {:.6e}",
                report.decision, report.criterion_margin, report.oracle_margin
            );
            match format {
                Format::Json => emit_report(
                    "matrix",
                    &instance,
                    &report,
                    start.elapsed().as_secs_f64() * 1e3,
                ),
                _ => {
                    println!(
                        "decision={:?} criterion_margin={:.12e} oracle_margin={:.12e} epsilon={:.3e}",
                        report.decision, report.criterion_margin, report.oracle_margin,
                        report.epsilon_used
                    );
                }
            }
            code
        }
        Err(e) => fail(e),
    }
}

#[derive(Serialize)]
struct SchrodingerBody {
    #[serde(flatten)]
    report: disext_core::schrodinger::AccretivityReport,
    truncation: f64,
    eta_residual: f64,
}

fn check_schrodinger(
    path: &PathBuf,
    truncation_l: Option<f64>,
    tol: Option<f64>,
    band: Option<f64>,
    format: Format,
) -> i32 {
    let start = Instant::now();
    let instance = match read_instance(path) {
        Ok(InstanceFile::Schrodinger(m)) => m,
        Ok(_) => {
            emit_error("instance kind mismatch: expected \"schrodinger\"", 4);
            return 4;
        }
        Err(code) => return code,
    };
    let outcome = (|| -> disext_core::Result<SchrodingerBody> {
        check_schema_version(instance.schema_version)?;
        let pot = potential_from_json(&instance.potential)?;
        let v_fn = terms_from_json(&instance.v, Interval::half_line(), "v")?;
        let ell = terms_from_json(&instance.l, Interval::half_line(), "l")?;
        let truncation = truncation_l
            .or(instance.truncation_l)
            .unwrap_or_else(|| pot.default_truncation());
        let eta_tol = tol
            .or_else(|| instance.tolerances.as_ref().and_then(|t| t.eta_tol))
            .unwrap_or(DEFAULT_ETA_TOL);
        let eta = solve_eta(&pot, truncation, eta_tol)?;
        let band = band_from(band, &instance.tolerances);
        let report = accretive_check(&v_fn, &ell, &pot, &eta, band)?;
        Ok(SchrodingerBody {
            report,
            truncation,
            eta_residual: eta.residual,
        })
    })();
    match outcome {
        Ok(body) => {
            let code = body.report.decision.exit_code();
            eprintln!(
                "decision: {:?} | lhs {:.6e} | rhs {:.6e} | eta'(0) {:.6e}",
                body.report.decision, body.report.lhs, body.report.rhs, body.report.eta_prime_0
            );
            match format {
                Format::Json => emit_report(
                    "schrodinger",
                    &instance,
                    &body,
                    start.elapsed().as_secs_f64() * 1e3,
                ),
                _ => println!(
                    "decision={:?} lhs={:.12e} rhs={:.12e} margin={:.12e}",
                    body.report.decision, body.report.lhs, body.report.rhs, body.report.margin
                ),
            }
            code
        }
        Err(e) => fail(e),
    }
}

#[derive(Serialize)]
struct FirstOrderBody {
    #[serde(flatten)]
    report: disext_core::firstorder::DissipativityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    extension: Option<ExtensionDescriptor>,
}

fn check_first_order(
    input: Option<PathBuf>,
    gamma: Option<f64>,
    v: Option<String>,
    l: Option<String>,
    band: Option<f64>,
    format: Format,
) -> i32 {
    let start = Instant::now();
    let instance = if let Some(path) = input {
        match read_instance(&path) {
            Ok(InstanceFile::FirstOrder(m)) => m,
            Ok(_) => {
                emit_error("instance kind mismatch: expected \"first_order\"", 4);
                return 4;
            }
            Err(code) => return code,
        }
    } else {
        let (Some(gamma), Some(v), Some(l)) = (gamma, v.as_ref(), l.as_ref()) else {
            emit_error("pass --input FILE, or all of --gamma, --v, --l", 4);
            return 4;
        };
        let parse_terms = |src: &str, field: &str| -> Result<Vec<schema::TermJson>, i32> {
            serde_json::from_str(src).map_err(|e| {
                emit_error(&format!("{field}: {e}"), 4);
                4
            })
        };
        let v_terms = match parse_terms(v, "--v") {
            Ok(t) => t,
            Err(code) => return code,
        };
        let l_terms = match parse_terms(l, "--l") {
            Ok(t) => t,
            Err(code) => return code,
        };
        schema::FirstOrderInstance {
            schema_version: schema::SCHEMA_VERSION,
            gamma,
            v: v_terms,
            l: l_terms,
            tolerances: None,
        }
    };
    let outcome = (|| -> disext_core::Result<FirstOrderBody> {
        check_schema_version(instance.schema_version)?;
        let params = SingularParams::new(instance.gamma)?;
        let v_fn = terms_from_json(&instance.v, Interval::unit(), "v")?;
        let ell = terms_from_json(&instance.l, Interval::unit(), "l")?;
        let band = band_from(band, &instance.tolerances);
        let report = dissipativity_check(&v_fn, &ell, params, band)?;
        let extension = build_extension(&v_fn, &ell, params, band).ok();
        Ok(FirstOrderBody { report, extension })
    })();
    match outcome {
        Ok(body) => {
            let code = body.report.decision.exit_code();
            eprintln!(
                "decision: {:?} | lhs {:.6e} | rhs {:.6e} | margin {:.6e}",
                body.report.decision, body.report.lhs, body.report.rhs, body.report.margin
            );
            match format {
                Format::Json => emit_report(
                    "first_order",
                    &instance,
                    &body,
                    start.elapsed().as_secs_f64() * 1e3,
                ),
                _ => println!(
                    "decision={:?} lhs={:.12e} rhs={:.12e} margin={:.12e}",
                    body.report.decision, body.report.lhs, body.report.rhs, body.report.margin
                ),
            }
            code
        }
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------------------
// scan

fn scan_first_order(
    gammas: &[f64],
    coeff_start: f64,
    coeff_end: f64,
    coeff_step: f64,
    band: Option<f64>,
    format: Format,
) -> i32 {
    if coeff_step.is_nan() || coeff_step <= 0.0 {
        emit_error("coeff-step must be positive", 4);
        return 4;
    }
    let band = BoundaryBand::new(band.unwrap_or(1e-9));
    let mut points: Vec<(f64, f64)> = Vec::new();
    if coeff_end >= coeff_start {
        let steps = ((coeff_end - coeff_start) / coeff_step + 1e-9).floor() as i64;
        for &g in gammas {
            for i in 0..=steps {
                points.push((g, coeff_start + coeff_step * i as f64));
            }
        }
    }
    let rows = exec::map_items(&points, |&(g, c)| scan_point(g, c, band));
    match format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&rows).expect("serializable rows")
            );
        }
        _ => {
            println!("gamma,c,lhs,rhs,margin,decision,error");
            for r in &rows {
                let decision = r
                    .decision
                    .map(|d| serde_variant_name(&d))
                    .unwrap_or_else(|| "error".into());
                println!(
                    "{}",
                    csv_line(&[
                        format!("{}", r.gamma),
                        format!("{}", r.coefficient),
                        format!("{:.12e}", r.lhs),
                        format!("{:.12e}", r.rhs),
                        format!("{:.12e}", r.margin),
                        decision,
                        r.error.clone().unwrap_or_default(),
                    ])
                );
            }
        }
    }
    eprintln!("scanned {} points", rows.len());
    0
}

/// snake_case decision name as used in the JSON reports.
fn serde_variant_name<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(|s| s.to_string()))
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// eta

#[derive(Serialize)]
struct EtaBody {
    eta_prime_0: f64,
    truncation: f64,
    residual: f64,
    grid_nodes: Vec<f64>,
    grid_values: Vec<f64>,
}

fn eta_command(
    potential_const: f64,
    input: Option<PathBuf>,
    truncation_l: Option<f64>,
    tol: Option<f64>,
    grid_cap: usize,
) -> i32 {
    let start = Instant::now();
    let outcome = (|| -> disext_core::Result<EtaBody> {
        let pot = match &input {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CoreError::InvalidInput(format!("cannot read file: {e}")))?;
                let pj: schema::PotentialJson = serde_json::from_str(&text)
                    .map_err(|e| CoreError::InvalidInput(format!("potential schema: {e}")))?;
                potential_from_json(&pj)?
            }
            None => PotentialSpec::constant(potential_const)?,
        };
        let truncation = truncation_l.unwrap_or_else(|| pot.default_truncation());
        let eta = solve_eta(&pot, truncation, tol.unwrap_or(DEFAULT_ETA_TOL))?;
        let nodes = eta.grid.nodes();
        let stride = (nodes.len() / grid_cap.max(2)).max(1);
        let mut grid_nodes = Vec::new();
        let mut grid_values = Vec::new();
        for j in (0..nodes.len()).step_by(stride) {
            grid_nodes.push(nodes[j]);
            grid_values.push(eta.grid.values()[j].re);
        }
        Ok(EtaBody {
            eta_prime_0: eta.eta_prime_0,
            truncation: eta.truncation,
            residual: eta.residual,
            grid_nodes,
            grid_values,
        })
    })();
    match outcome {
        Ok(body) => {
            eprintln!(
                "eta'(0) = {:.12e} (L = {}, residual {:.3e})",
                body.eta_prime_0, body.truncation, body.residual
            );
            emit_report(
                "eta",
                serde_json::json!({}),
                &body,
                start.elapsed().as_secs_f64() * 1e3,
            );
            0
        }
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------------------
// validate

fn validate_command(case_filter: &str, max_h: f64, mesh_depth: usize, format: Format) -> i32 {
    if max_h.is_nan() || max_h <= 0.0 || mesh_depth < 2 {
        emit_error("need max-h > 0 and mesh-depth >= 2", 4);
        return 4;
    }
    let band = BoundaryBand::new(1e-9);
    let cases: Vec<_> = regression_cases()
        .into_iter()
        .filter(|c| case_filter == "all" || c.id == case_filter)
        .collect();
    if cases.is_empty() {
        emit_error(&format!("unknown case id {case_filter}"), 4);
        return 4;
    }
    let meshes = standard_ladder(max_h, mesh_depth);
    let reports = exec::map_items(&cases, |case| {
        let params = SingularParams::new(case.gamma).expect("valid gamma");
        let (v, ell) = regression_pair(case);
        cross_validate(&v, &ell, params, &meshes, band)
    });
    let mut all_ok = true;
    match format {
        Format::Json => {
            let rows: Vec<_> = reports
                .iter()
                .zip(&cases)
                .map(|(r, c)| {
                    serde_json::json!({
                        "case": c.id,
                        "description": c.description,
                        "report": r.as_ref().ok(),
                        "error": r.as_ref().err().map(|e| e.to_string()),
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&rows).expect("serializable")
            );
            for r in &reports {
                match r {
                    Ok(rep) => all_ok &= rep.agrees_with_analytic && rep.sign_stable,
                    Err(_) => all_ok = false,
                }
            }
        }
        _ => {
            println!(
                "case,gamma,max_h,nodes,oracle_margin,analytic_margin,analytic_decision,sign_stable,agrees"
            );
            for (r, c) in reports.iter().zip(&cases) {
                match r {
                    Ok(rep) => {
                        for p in &rep.ladder {
                            println!(
                                "{}",
                                csv_line(&[
                                    c.id.to_string(),
                                    format!("{}", rep.gamma),
                                    format!("{:.6e}", p.max_h),
                                    format!("{}", p.nodes),
                                    format!("{:.12e}", p.oracle_margin),
                                    format!("{:.12e}", rep.analytic_margin),
                                    serde_variant_name(&rep.analytic_decision),
                                    format!("{}", rep.sign_stable),
                                    format!("{}", rep.agrees_with_analytic),
                                ])
                            );
                        }
                        all_ok &= rep.agrees_with_analytic && rep.sign_stable;
                    }
                    Err(e) => {
                        println!(
                            "{}",
                            csv_line(&[
                                c.id.to_string(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                format!("error: {e}"),
                            ])
                        );
                        all_ok = false;
                    }
                }
            }
        }
    }
    eprintln!(
        "validated {} case(s): {}",
        cases.len(),
        if all_ok {
            "all grid signs agree"
        } else {
            "DISAGREEMENT found"
        }
    );
    if all_ok {
        0
    } else {
        1
    }
}

// ---------------------------------------------------------------------------
// demo

fn demo_closability(ns: &[i64], format: Format) -> i32 {
    if ns.iter().any(|&n| n <= 0) {
        emit_error("hat indices must be positive", 4);
        return 4;
    }
    let demo = closability_falsifier(ns);
    match format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&demo).expect("serializable")
            );
        }
        Format::Csv => {
            println!("n,norm_sq,form_value");
            for row in &demo.rows {
                println!("{},{},{}", row.n, row.norm_sq, row.form_value);
            }
        }
        Format::Text => {
            println!("hat functions f_n(x) = max(0, 1 - n x) under q(f) = |f(0)|^2 / 2");
            println!("{:>8} {:>12} {:>12}", "n", "||f_n||^2", "q(f_n)");
            for row in &demo.rows {
                println!(
                    "{:>8} {:>12} {:>12}",
                    row.n,
                    row.norm_sq.to_string(),
                    row.form_value.to_string()
                );
            }
            println!(
                "q(f_n - f_m) = 0 for all pairs: {}",
                demo.cross_differences_zero
            );
            println!(
                "norms vanish and pairwise differences carry no form value, yet q(f_n) stays at 1/2;"
            );
            println!("no closure exists, hence no associated imaginary-part operator.");
        }
    }
    0
}
