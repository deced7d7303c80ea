use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crnlc::cfrm::{
    cf_rm, link_breaks, lost_complexes, predict_numbers, verify_dynamic_equivalence, EquivalenceCheck, NewReactant,
    RelationCheck, TransformResult, Variant,
};
use crnlc::conjugacy::{
    build_milp, solve_conjugacy, verify_linear_conjugacy, ArcBounds, ConjugacyResiduals, MilpConfig, Mode, SolveStats,
    VerifyOptions,
};
use crnlc::kinetics::NodeClass;
use crnlc::ode::{integrate, IntegrateOptions, Method};
use crnlc::report::{analyze, NodeReport};
use crnlc::{parse_system, write_system, CrnError, KineticSystem, NetworkNumbers, ParamTolerance};
use serde::Serialize;

use crate::{Cli, Command, MilpArgs, ModeArg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: CrnError },
    #[error(transparent)]
    Core(#[from] CrnError),
    /// A check ran and failed; reported with exit code 2.
    #[error("{0}")]
    Rejected(String),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = Result<T, CliError>;

/// Envelope shared by every JSON report.
#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    input: Vec<&'a Path>,
    config: C,
    result: R,
}

fn envelope<'a, C: Serialize, R: Serialize>(
    command: &'static str,
    input: Vec<&'a Path>,
    config: C,
    result: R,
) -> Envelope<'a, C, R> {
    Envelope {
        tool: "crnlc",
        version: env!("CARGO_PKG_VERSION"),
        command,
        input,
        config,
        result,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn read_system(path: &Path) -> CliResult<KineticSystem> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_system(&text).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn tolerance(cli: &Cli) -> CliResult<ParamTolerance> {
    if !(cli.param_tol >= 0.0 && cli.param_tol.is_finite()) {
        return Err(CliError::Usage(format!("--param-tol must be non-negative, got {}", cli.param_tol)));
    }
    Ok(ParamTolerance(cli.param_tol))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze { path, t_csv, t_hat_csv } => cmd_analyze(cli, path, t_csv.as_deref(), t_hat_csv.as_deref()),
        Command::CfSubsets { path } => cmd_cf_subsets(cli, path),
        Command::Transform { path, plus, output } => cmd_transform(cli, path, *plus, output.as_deref()),
        Command::Conjugate {
            path,
            milp,
            output,
            lp_export,
        } => cmd_conjugate(cli, path, milp, output.as_deref(), lp_export.as_deref()),
        Command::Simulate {
            path,
            x0,
            t_end,
            tol,
            points,
            output,
        } => cmd_simulate(cli, path, x0.as_deref(), *t_end, *tol, *points, output.as_deref()),
        Command::VerifyConjugacy {
            source,
            target,
            c,
            samples,
            t_end,
            x0,
            tolerance,
        } => cmd_verify(cli, source, target, c, *samples, *t_end, x0.clone(), *tolerance),
        Command::ExportLp { path, milp, output } => cmd_export_lp(path, milp, output.as_deref()),
    }
}

#[derive(Serialize)]
struct SeedConfig {
    seed: u64,
    param_tol: f64,
}

fn cmd_analyze(cli: &Cli, path: &Path, t_csv: Option<&Path>, t_hat_csv: Option<&Path>) -> CliResult<()> {
    let sys = read_system(path)?;
    let report = analyze(&sys, cli.seed, tolerance(cli)?);
    for (dest, matrix, name) in [(t_csv, &report.t_matrix, "T"), (t_hat_csv, &report.t_hat, "T-hat")] {
        if let Some(dest) = dest {
            let m = matrix.as_ref().ok_or_else(|| {
                CliError::Usage(format!("the {name} matrix is only defined for complex factorizable kinetics"))
            })?;
            write_file(dest, &m.to_csv())?;
        }
    }
    if cli.json {
        let config = SeedConfig {
            seed: cli.seed,
            param_tol: cli.param_tol,
        };
        println!("{}", to_json(&envelope("analyze", vec![path], config, &report)));
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn cmd_cf_subsets(cli: &Cli, path: &Path) -> CliResult<()> {
    let sys = read_system(path)?;
    let report = analyze(&sys, cli.seed, tolerance(cli)?);
    if cli.json {
        #[derive(Serialize)]
        struct Subsets<'a> {
            cf_subsets: usize,
            reactant_complexes: usize,
            complex_factorizable: bool,
            nodes: &'a [NodeReport],
        }
        let result = Subsets {
            cf_subsets: report.cf_subsets,
            reactant_complexes: report.numbers.reactant_complexes,
            complex_factorizable: report.complex_factorizable,
            nodes: &report.nodes,
        };
        let config = SeedConfig {
            seed: cli.seed,
            param_tol: cli.param_tol,
        };
        println!("{}", to_json(&envelope("cf-subsets", vec![path], config, result)));
        return Ok(());
    }
    for node in &report.nodes {
        let class = match node.class {
            NodeClass::Cf => "CF",
            NodeClass::Nf => "NF",
            NodeClass::MaximallyNf => "maximally NF",
        };
        let subsets: Vec<String> = node.subsets.iter().map(|s| format!("{{{}}}", s.join(", "))).collect();
        println!("{}: {} [{}]", node.complex, subsets.join(" "), class);
    }
    println!(
        "N_R = {}, n_r = {}, complex factorizable: {}",
        report.cf_subsets,
        report.numbers.reactant_complexes,
        if report.complex_factorizable { "yes" } else { "no" }
    );
    Ok(())
}

#[derive(Serialize)]
struct TransformSummary<'a> {
    variant: Variant,
    identity: bool,
    changed: Vec<String>,
    new_reactants: &'a [NewReactant],
    reaction_map: &'a [(String, String)],
    source_numbers: NetworkNumbers,
    target_numbers: NetworkNumbers,
    cf_subsets: usize,
    lost_complexes: usize,
    link_breaks: i64,
    /// Source deficiency minus target deficiency.
    deficiency_drop: i64,
    checks: Vec<RelationCheck>,
    equivalence: EquivalenceCheck,
}

fn summarize_transform<'a>(
    sys: &KineticSystem,
    res: &'a TransformResult,
    seed: u64,
) -> CliResult<TransformSummary<'a>> {
    let source_numbers = sys.network.numbers();
    let target_numbers = res.target.network.numbers();
    let cf_subsets = sys.cf_partition().num_subsets();
    let breaks = link_breaks(sys, res);
    let checks = predict_numbers(sys, res.variant).check(&target_numbers, cf_subsets, breaks);
    Ok(TransformSummary {
        variant: res.variant,
        identity: res.is_identity(),
        changed: res.changed.iter().map(|&j| sys.network.reactions()[j].label.clone()).collect(),
        new_reactants: &res.new_reactants,
        reaction_map: &res.reaction_map,
        deficiency_drop: source_numbers.deficiency - target_numbers.deficiency,
        source_numbers,
        target_numbers,
        cf_subsets,
        lost_complexes: lost_complexes(sys, res),
        link_breaks: breaks,
        checks,
        equivalence: verify_dynamic_equivalence(sys, &res.target, 100, seed)?,
    })
}

fn transform_text(s: &TransformSummary) -> String {
    let mut out = String::new();
    if s.identity {
        let _ = writeln!(out, "input is complex factorizable; nothing to change");
    }
    for nr in s.new_reactants {
        let _ = writeln!(
            out,
            "moved {} onto {} (multiplier {})",
            nr.reactions.join(", "),
            nr.complex,
            nr.multiplier
        );
    }
    let (a, b) = (&s.source_numbers, &s.target_numbers);
    let _ = writeln!(
        out,
        "complexes {} -> {}, linkage classes {} -> {}, deficiency {} -> {}",
        a.complexes, b.complexes, a.linkage_classes, b.linkage_classes, a.deficiency, b.deficiency
    );
    for c in s.checks.iter().filter(|c| c.holds == Some(false)) {
        let _ = writeln!(out, "prediction not met: {} = {} ({:?})", c.quantity, c.actual, c.predicted);
    }
    let _ = writeln!(out, "equivalence residual: {:.3e}", s.equivalence.max_residual);
    out
}

fn cmd_transform(cli: &Cli, path: &Path, plus: bool, output: Option<&Path>) -> CliResult<()> {
    let sys = read_system(path)?;
    let variant = if plus { Variant::Plus } else { Variant::Generic };
    let res = cf_rm(&sys, variant);
    let summary = summarize_transform(&sys, &res, cli.seed)?;
    #[derive(Serialize)]
    struct Config {
        variant: Variant,
        seed: u64,
    }
    let report = envelope("transform", vec![path], Config { variant, seed: cli.seed }, &summary);
    let network = write_system(&res.target);
    match output {
        Some(out) => {
            write_file(out, &network)?;
            write_file(&sidecar_path(out), &to_json(&report))?;
            if cli.json {
                println!("{}", to_json(&report));
            } else {
                print!("{}", transform_text(&summary));
            }
        }
        None if cli.json => println!("{}", to_json(&report)),
        None => {
            print!("{network}");
            eprint!("{}", transform_text(&summary));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MilpSettings {
    mode: Mode,
    epsilon: f64,
    upper: f64,
    weakly_reversible: bool,
    support_cuts: bool,
    auto_transform: bool,
    transform_variant: Variant,
    seed: u64,
}

fn milp_config(args: &MilpArgs) -> MilpConfig {
    MilpConfig {
        epsilon: args.eps,
        upper: ArcBounds::Uniform(args.u),
        mode: match args.mode {
            ModeArg::Sparse => Mode::Sparse,
            ModeArg::Dense => Mode::Dense,
        },
        require_weak_reversibility: args.weakly_reversible,
        support_cuts: args.support_cuts,
    }
}

/// The system handed to the realization program, transformed first if requested.
fn conjugacy_source(sys: KineticSystem, args: &MilpArgs) -> CliResult<(KineticSystem, Option<TransformResult>)> {
    if sys.is_complex_factorizable() {
        return Ok((sys, None));
    }
    if !args.auto_transform {
        let partition = sys.cf_partition();
        return Err(CliError::Usage(format!(
            "{} (or pass --auto-transform)",
            CrnError::NotComplexFactorizable {
                cf_subsets: partition.num_subsets(),
                reactants: sys.network.reactant_complexes().len(),
            }
        )));
    }
    let variant = if args.plus { Variant::Plus } else { Variant::Generic };
    let res = cf_rm(&sys, variant);
    Ok((res.target.clone(), Some(res)))
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cmd_conjugate(
    cli: &Cli,
    path: &Path,
    args: &MilpArgs,
    output: Option<&Path>,
    lp_export: Option<&Path>,
) -> CliResult<()> {
    let original = read_system(path)?;
    let (sys, transform) = conjugacy_source(original.clone(), args)?;
    let cfg = milp_config(args);
    if let Some(lp) = lp_export {
        let cm = build_milp(&sys, &cfg)?;
        write_file(lp, &crnlc_milp::export_lp(&cm.model))?;
    }
    let r = solve_conjugacy(&sys, &cfg)?;
    let verify = VerifyOptions {
        seed: cli.seed,
        ..VerifyOptions::default()
    };
    let residuals = verify_linear_conjugacy(&sys, &r.target, &r.c, &verify)?;

    #[derive(Serialize)]
    struct ConjugateResult<'a> {
        objective: usize,
        c: &'a [f64],
        species: &'a [String],
        complexes: Vec<String>,
        transformed: Option<Vec<String>>,
        a_b: Vec<Vec<f64>>,
        a_k: Vec<Vec<f64>>,
        constraint_residual: f64,
        kirchhoff_residual: f64,
        verification: ConjugacyResiduals,
        target_numbers: NetworkNumbers,
        target: String,
        stats: &'a SolveStats,
    }
    let net = &sys.network;
    let result = ConjugateResult {
        objective: r.objective,
        c: &r.c,
        species: net.species(),
        complexes: (0..net.num_complexes()).map(|i| net.complex_label(i)).collect(),
        transformed: transform
            .as_ref()
            .map(|t| t.changed.iter().map(|&j| original.network.reactions()[j].label.clone()).collect()),
        a_b: rows(&r.a_b),
        a_k: rows(&r.a_k),
        constraint_residual: r.constraint_residual,
        kirchhoff_residual: r.kirchhoff_residual,
        verification: residuals,
        target_numbers: r.target.network.numbers(),
        target: write_system(&r.target),
        stats: &r.stats,
    };
    let config = MilpSettings {
        mode: cfg.mode,
        epsilon: args.eps,
        upper: args.u,
        weakly_reversible: args.weakly_reversible,
        support_cuts: cfg.support_cuts,
        auto_transform: args.auto_transform,
        transform_variant: if args.plus { Variant::Plus } else { Variant::Generic },
        seed: cli.seed,
    };
    let report = envelope("conjugate", vec![path], config, &result);
    if let Some(out) = output {
        write_file(out, &result.target)?;
        write_file(&sidecar_path(out), &to_json(&report))?;
    }
    if cli.json {
        println!("{}", to_json(&report));
    } else {
        if let Some(changed) = &result.transformed {
            println!("transformed first: moved {}", changed.join(", "));
        }
        println!("reactions: {}", r.objective);
        let c: Vec<String> = r.c.iter().map(|v| format!("{v:.6}")).collect();
        println!("c = ({})", c.join(", "));
        println!(
            "algebraic residual {:.3e}, trajectory residual {}",
            residuals.algebraic,
            residuals.trajectory.map_or("-".into(), |t| format!("{t:.3e}"))
        );
        println!(
            "{} binaries, {} nodes, {:.2} s",
            r.stats.binaries, r.stats.nodes, r.stats.seconds
        );
        if output.is_none() {
            print!("{}", result.target);
        }
    }
    Ok(())
}

fn cmd_simulate(
    cli: &Cli,
    path: &Path,
    x0: Option<&[f64]>,
    t_end: f64,
    tol: f64,
    points: usize,
    output: Option<&Path>,
) -> CliResult<()> {
    let sys = read_system(path)?;
    let m = sys.network.num_species();
    let x0 = x0.map_or_else(|| vec![1.0; m], <[f64]>::to_vec);
    let opts = IntegrateOptions {
        method: Method::Rkf45 { tolerance: tol },
        report_points: points,
    };
    let traj = integrate(&sys, &x0, t_end, &opts)?;
    let csv = traj.to_csv();
    match output {
        Some(out) => {
            write_file(out, &csv)?;
            if cli.json {
                #[derive(Serialize)]
                struct Config<'a> {
                    x0: &'a [f64],
                    t_end: f64,
                    tolerance: f64,
                    points: usize,
                }
                #[derive(Serialize)]
                struct Written<'a> {
                    output: &'a Path,
                    final_state: &'a [f64],
                }
                let config = Config {
                    x0: &x0,
                    t_end,
                    tolerance: tol,
                    points,
                };
                let result = Written {
                    output: out,
                    final_state: traj.final_state(),
                };
                println!("{}", to_json(&envelope("simulate", vec![path], config, result)));
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cli: &Cli,
    source: &Path,
    target: &Path,
    c: &[f64],
    samples: usize,
    t_end: f64,
    x0: Option<Vec<f64>>,
    tolerance: f64,
) -> CliResult<()> {
    let a = read_system(source)?;
    let b = read_system(target)?;
    let opts = VerifyOptions {
        samples,
        seed: cli.seed,
        x0,
        t_end,
        ..VerifyOptions::default()
    };
    let res = verify_linear_conjugacy(&a, &b, c, &opts)?;
    let pass = res.algebraic <= tolerance && res.trajectory.is_none_or(|t| t <= tolerance);
    if cli.json {
        #[derive(Serialize)]
        struct Config<'a> {
            c: &'a [f64],
            samples: usize,
            t_end: f64,
            tolerance: f64,
            seed: u64,
        }
        #[derive(Serialize)]
        struct Verdict {
            residuals: ConjugacyResiduals,
            pass: bool,
        }
        let config = Config {
            c,
            samples,
            t_end,
            tolerance,
            seed: cli.seed,
        };
        let verdict = Verdict { residuals: res, pass };
        println!("{}", to_json(&envelope("verify-conjugacy", vec![source, target], config, verdict)));
    } else {
        println!("algebraic residual: {:.3e}", res.algebraic);
        match res.trajectory {
            Some(t) => println!("trajectory residual: {t:.3e}"),
            None => println!("trajectory residual: skipped"),
        }
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Rejected(format!("residual above tolerance {tolerance:e}")))
    }
}

fn cmd_export_lp(path: &Path, args: &MilpArgs, output: Option<&Path>) -> CliResult<()> {
    let (sys, _) = conjugacy_source(read_system(path)?, args)?;
    let cm = build_milp(&sys, &milp_config(args))?;
    let text = crnlc_milp::export_lp(&cm.model);
    match output {
        Some(out) => write_file(out, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
