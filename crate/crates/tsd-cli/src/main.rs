//! Command-line surface for torus shadow diagrams.
//!
//! Exit codes: 0 on success, 1 when a check fails (invalid diagram, failed
//! inequality, unmet precondition), 2 on input errors (unreadable or
//! malformed files, bad arguments).

use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tsd_cli::{format, svg};
use tsd_core::builders;
use tsd_core::diagram::TorusDiagram;
use tsd_core::invariants::adjunction_report;
use tsd_core::moves;
use tsd_core::report::InvariantReport;
use tsd_core::transversality::{
    clasp_count, deficit_vector, is_algebraically_transverse, is_braided,
    is_geometrically_transverse, make_algebraically_transverse, pull_tight_classify,
};

#[derive(Parser)]
#[command(
    name = "tsd",
    version,
    about = "Exact invariants, moves and rendering for torus shadow diagrams of bridge-trisected surfaces in CP^2"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every diagram invariant; lists violations if any.
    Validate { file: PathBuf },
    /// Compute the full invariant report.
    Invariants {
        file: PathBuf,
        /// Emit the JSON report instead of the text summary.
        #[arg(long)]
        json: bool,
        /// Clasp count for the adjunction section: "auto" or an integer.
        #[arg(long, default_value = "0")]
        clasps: String,
    },
    /// Adjunction-inequality bookkeeping.
    Adjunction {
        file: PathBuf,
        /// "auto" to run the clasp classifier, or an explicit integer.
        #[arg(long, default_value = "auto")]
        clasps: String,
    },
    /// Per-family transversality and braiding predicates.
    Transversality { file: PathBuf },
    /// Make the C family algebraically transverse by arc translations.
    Normalize {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Where to write the move script realizing the normalization.
        #[arg(long)]
        script: PathBuf,
    },
    /// Pull-tight clasp classification for each family.
    Clasps { file: PathBuf },
    /// Apply a single move given as a move-script line.
    Stabilize {
        file: PathBuf,
        #[arg(long = "move")]
        move_line: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Apply a move script, re-validating after every step.
    Apply {
        file: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build a reference diagram: line | lines:<d> | standardized:<c1>,<d>.
    Build {
        what: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Render the diagram to SVG.
    Render {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        options: RenderArgs,
    },
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, default_value_t = 600)]
    width: i64,
    #[arg(long)]
    epsilon_labels: bool,
    #[arg(long)]
    legend: bool,
}

enum CliError {
    /// A check failed (exit 1).
    Check(String),
    /// Bad input (exit 2).
    Input(String),
}

impl From<format::IoError> for CliError {
    fn from(e: format::IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn load(path: &Path) -> Result<TorusDiagram, CliError> {
    match format::load(path) {
        Ok(d) => Ok(d),
        Err(format::IoError::Validation { path, report }) => Err(CliError::Check(format!(
            "{path}: diagram violates invariants:\n{report}"
        ))),
        Err(e) => Err(CliError::Input(e.to_string())),
    }
}

fn parse_clasps(diagram: &TorusDiagram, spec: &str) -> Result<u64, CliError> {
    if spec == "auto" {
        clasp_count(diagram).map_err(|e| CliError::Check(format!("clasp classifier: {e}")))
    } else {
        spec.parse::<u64>()
            .map_err(|_| CliError::Input(format!("--clasps must be \"auto\" or an integer, got {spec:?}")))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
            let diagram = match format::from_str(&text, &file.display().to_string()) {
                Ok(d) => d,
                Err(format::IoError::Validation { report, .. }) => {
                    println!("INVALID");
                    print!("{report}");
                    return Err(CliError::Check(String::new()));
                }
                Err(e) => return Err(CliError::Input(e.to_string())),
            };
            println!(
                "valid: b={}, arcs={}, bridge points={}",
                diagram.bridge_index(),
                diagram.arcs.len(),
                diagram.bridge_points.len()
            );
            Ok(())
        }
        Command::Invariants { file, json, clasps } => {
            let diagram = load(&file)?;
            let n = parse_clasps(&diagram, &clasps)?;
            let report = InvariantReport::compute(&diagram, n)
                .map_err(|e| CliError::Check(e.to_string()))?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable report")
                );
            } else {
                print_report(&report);
            }
            Ok(())
        }
        Command::Adjunction { file, clasps } => {
            let diagram = load(&file)?;
            let n = parse_clasps(&diagram, &clasps)?;
            let rep = adjunction_report(&diagram, n)
                .map_err(|e| CliError::Check(e.to_string()))?;
            println!("degree           : {}", rep.degree);
            println!("chi              : {}", rep.chi);
            println!("bound 3d - d^2   : {}", rep.bound);
            println!("clasps n         : {}", rep.clasps);
            println!("sl(L~)           : {}", rep.sl_tilde);
            println!("-chi(F)          : {}", -rep.chi_ribbon);
            if let Some(g) = rep.genus_lower_bound {
                println!("genus_bound      : {g}");
            }
            let verdict = if rep.equality {
                "equality"
            } else if rep.satisfied {
                "satisfied"
            } else {
                "VIOLATED"
            };
            println!("adjunction       : {verdict}");
            if !rep.ribbon_equivalence_consistent {
                return Err(CliError::Check("ribbon bookkeeping inconsistent".into()));
            }
            if !rep.satisfied {
                return Err(CliError::Check("adjunction inequality violated".into()));
            }
            Ok(())
        }
        Command::Transversality { file } => {
            let diagram = load(&file)?;
            for lambda in 1..=3 {
                let geo = is_geometrically_transverse(&diagram, lambda)
                    .map_err(|e| CliError::Check(e.to_string()))?;
                let braid = is_braided(&diagram, lambda)
                    .map_err(|e| CliError::Check(e.to_string()))?;
                let alg = is_algebraically_transverse(&diagram, lambda)
                    .map_err(|e| CliError::Check(e.to_string()))?;
                println!(
                    "family {}: geometric={} braided={} algebraic={}",
                    lambda, geo.holds, braid.holds, alg.holds
                );
                for s in geo.violations.iter().take(4) {
                    println!("  non-transverse segment {}{}#{}", s.family, s.arc, s.seg);
                }
                for (i, integral) in alg.integrals.iter().enumerate() {
                    println!("  arc {i}: foliation integral {integral}");
                }
            }
            let deficit =
                deficit_vector(&diagram).map_err(|e| CliError::Check(e.to_string()))?;
            println!("Gamma = {}", deficit.gamma);
            Ok(())
        }
        Command::Normalize {
            file,
            output,
            script,
        } => {
            let diagram = load(&file)?;
            let (out, mv) = make_algebraically_transverse(&diagram)
                .map_err(|e| CliError::Check(e.to_string()))?;
            format::save(&out, &output)?;
            std::fs::write(&script, moves::format_script(&mv))
                .map_err(|e| CliError::Input(format!("{}: {e}", script.display())))?;
            println!(
                "normalized with {} moves -> {} (script {})",
                mv.len(),
                output.display(),
                script.display()
            );
            Ok(())
        }
        Command::Clasps { file } => {
            let diagram = load(&file)?;
            let mut total = 0;
            for lambda in 1..=3 {
                let records = pull_tight_classify(&diagram, lambda)
                    .map_err(|e| CliError::Check(e.to_string()))?;
                let n: u64 = records.iter().map(|r| r.k).sum();
                total += n;
                println!("family {lambda}: {} strip crossings, n_{lambda} = {n}", records.len());
                for r in &records {
                    if r.k > 0 {
                        println!(
                            "  arcs ({}, {}): case {} k={} R={} S={} Delta={}",
                            r.arc_i, r.arc_j, r.case, r.k, r.r_i, r.s_j, r.delta
                        );
                    }
                }
            }
            println!("n = {total}");
            Ok(())
        }
        Command::Stabilize {
            file,
            move_line,
            output,
        } => {
            let diagram = load(&file)?;
            let mv = moves::parse_move(&move_line)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let (out, _) = moves::apply_sequence(&diagram, &[mv])
                .map_err(|e| CliError::Check(e.to_string()))?;
            format::save(&out, &output)?;
            println!("applied 1 move -> {}", output.display());
            Ok(())
        }
        Command::Apply {
            file,
            script,
            output,
        } => {
            let diagram = load(&file)?;
            let text = std::fs::read_to_string(&script)
                .map_err(|e| CliError::Input(format!("{}: {e}", script.display())))?;
            let mv = moves::parse_script(&text).map_err(|e| CliError::Input(e.to_string()))?;
            let (out, steps) = moves::apply_sequence(&diagram, &mv)
                .map_err(|e| CliError::Check(e.to_string()))?;
            for s in &steps {
                println!(
                    "step {}: d={} b={} c={:?} chi={} residual={}",
                    s.step, s.degree, s.b, s.c, s.chi, s.framing_residual
                );
            }
            format::save(&out, &output)?;
            println!("applied {} moves -> {}", mv.len(), output.display());
            Ok(())
        }
        Command::Build { what, output } => {
            let diagram = build_target(&what)?;
            let mut meta = BTreeMap::new();
            meta.insert("generator".to_string(), what.clone());
            format::save_with_metadata(&diagram, &output, meta)?;
            println!("built {what} -> {}", output.display());
            Ok(())
        }
        Command::Render {
            file,
            output,
            options,
        } => {
            let diagram = load(&file)?;
            let svg_text = svg::render(
                &diagram,
                &svg::RenderOptions {
                    size: options.width,
                    epsilon_labels: options.epsilon_labels,
                    legend: options.legend,
                },
            );
            std::fs::write(&output, svg_text)
                .map_err(|e| CliError::Input(format!("{}: {e}", output.display())))?;
            println!("rendered -> {}", output.display());
            Ok(())
        }
    }
}

fn build_target(what: &str) -> Result<TorusDiagram, CliError> {
    if what == "line" {
        return Ok(builders::complex_line());
    }
    if let Some(d) = what.strip_prefix("lines:") {
        let d: usize = d
            .parse()
            .map_err(|_| CliError::Input(format!("bad line count in {what:?}")))?;
        return builders::generic_lines(d).map_err(|e| CliError::Input(e.to_string()));
    }
    if let Some(rest) = what.strip_prefix("standardized:") {
        let (c1, d) = rest
            .split_once(',')
            .ok_or_else(|| CliError::Input(format!("expected standardized:<c1>,<d>, got {what:?}")))?;
        let c1: usize = c1
            .parse()
            .map_err(|_| CliError::Input(format!("bad c1 in {what:?}")))?;
        let d: usize = d
            .parse()
            .map_err(|_| CliError::Input(format!("bad d in {what:?}")))?;
        let payload = builders::StandardizedPayload::default_for(c1, d);
        return builders::standardized(c1, d, payload).map_err(|e| CliError::Input(e.to_string()));
    }
    Err(CliError::Input(format!(
        "unknown build target {what:?}; expected line, lines:<d> or standardized:<c1>,<d>"
    )))
}

fn print_report(r: &InvariantReport) {
    println!("b                : {}", r.b);
    println!("c                : ({}, {}, {})", r.c[0], r.c[1], r.c[2]);
    println!("chi              : {}", r.chi);
    if let Some(g) = r.genus {
        println!("genus            : {g}");
    }
    println!(
        "degree           : {} (by sector: {:?})",
        r.degree, r.degree_by_lambda
    );
    println!("(p, q, r)        : ({}, {}, {})", r.p, r.q, r.r);
    for sc in &r.shadow_classes {
        println!(
            "[S(K{})]          : {}[alpha] + {}[beta]  (p={}, q={})",
            sc.lambda, sc.alpha_coeff, sc.beta_coeff, sc.p, sc.q
        );
    }
    println!(
        "writhes          : ({}, {}, {})",
        r.writhes[0], r.writhes[1], r.writhes[2]
    );
    println!("sigma sum        : {}", r.sigma_sum);
    println!("epsilon sum      : {}", r.epsilon_sum);
    println!(
        "surface framings : ({}, {}, {})",
        r.surface_framings[0], r.surface_framings[1], r.surface_framings[2]
    );
    println!(
        "framing identity : lhs={} rhs={} residual={}",
        r.framing.lhs, r.framing.rhs, r.framing.residual
    );
    for sl in &r.self_linking {
        println!(
            "sl(K{})           : {}{}",
            sl.lambda,
            sl.value,
            if sl.formal { " (formal)" } else { "" }
        );
    }
    println!("sl total         : {}", r.self_linking_total);
    if let Some(adj) = &r.adjunction {
        println!(
            "adjunction       : chi={} <= {} : {}",
            adj.chi,
            adj.bound,
            if adj.equality {
                "equality"
            } else if adj.satisfied {
                "satisfied"
            } else {
                "VIOLATED"
            }
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Check(msg)) => {
            if !msg.is_empty() {
                eprintln!("check failed: {msg}");
            }
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
