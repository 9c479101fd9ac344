//! Command line interface: net generation, transform propagation,
//! verification reports and OBJ export.
//!
//! Exit status is 0 when all requested checks pass, 1 on a failed check
//! or a geometry error, 2 on usage errors. The global relative tolerance
//! can be set with `--tolerance`, overriding the `PSK_TOLERANCE`
//! environment variable.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;

use pcenet::backlund::{propagate, seed_normals, verify_mates};
use pcenet::bianchi::{bennett_check, complete_net, halfturn_axis, BennettFrame};
use pcenet::generators::{axis_net, tractrix_net, AxisParams, TractrixParams};
use pcenet::net::{check_principal_net, curvature_profile, ContactElement, CurvatureProfile};
use pcenet::rotquad::{verify_theorem2, Theorem2Params};
use pcenet::Tol;

use pcenet_cli::netfile::{load_patch, save_patch};
use pcenet_cli::obj::export_obj;
use pcenet_cli::report::ReportFile;

#[derive(Parser)]
#[command(
    name = "pcenet",
    version,
    about = "Principal contact element nets: generation, transforms, verification"
)]
struct Cli {
    /// Relative tolerance for geometric predicates (default 1e-9;
    /// overrides the PSK_TOLERANCE environment variable).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a net file.
    Gen {
        #[command(subcommand)]
        which: GenCommand,
    },
    /// Propagate the transform of a constant-curvature net from a seed point.
    Backlund(BacklundArgs),
    /// Run a verification and write a report.
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
    /// Export a net file as a Wavefront OBJ quad mesh.
    ExportObj {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Degenerate axis net: points on the z-axis, radial normals.
    Axis {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Discrete pseudosphere of revolution over the axis net.
    Tractrix {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: f64,
        /// Seed normal angle (radians); default π/2.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        alpha: f64,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct BacklundArgs {
    input: PathBuf,
    #[arg(long)]
    qx: f64,
    #[arg(long)]
    qy: f64,
    #[arg(long)]
    qz: f64,
    /// Branch of the seed normal: "plus"/"+" or "minus"/"-".
    #[arg(long, default_value = "plus", value_parser = parse_branch)]
    branch: Branch,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug)]
enum Branch {
    Plus,
    Minus,
}

fn parse_branch(s: &str) -> Result<Branch, String> {
    match s {
        "plus" | "+" => Ok(Branch::Plus),
        "minus" | "-" => Ok(Branch::Minus),
        other => Err(format!("unknown branch '{other}', expected plus or minus")),
    }
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Per-edge principal-pair residuals plus per-face circle data.
    Principal {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transform conditions between two corresponding nets.
    Mates {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo area-ratio and curvature identity over random
    /// rotation quadrilaterals.
    Theorem2 {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        t_min: f64,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.2)]
        e_min: f64,
        #[arg(long, default_value_t = 2.0)]
        e_max: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Permutation completion from a source net and two equal-twist
    /// transforms, with linkage checks.
    Bianchi {
        a: PathBuf,
        b: PathBuf,
        c: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn resolve_tolerance(flag: Option<f64>) -> Tol {
    if let Some(rel) = flag {
        return Tol::with_rel(rel);
    }
    if let Ok(env) = std::env::var("PSK_TOLERANCE") {
        if let Ok(rel) = env.parse::<f64>() {
            return Tol::with_rel(rel);
        }
    }
    Tol::default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = resolve_tolerance(cli.tolerance);
    match run(cli.command, tol) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command, tol: Tol) -> Result<bool, Box<dyn std::error::Error>> {
    match command {
        Command::Gen { which } => {
            match which {
                GenCommand::Axis {
                    k,
                    rows,
                    cols,
                    output,
                } => {
                    let net = axis_net(&AxisParams { k, rows, cols }, tol)?;
                    save_patch(&net, &output)?;
                }
                GenCommand::Tractrix {
                    k,
                    d,
                    alpha,
                    rows,
                    cols,
                    output,
                } => {
                    let net = tractrix_net(
                        &TractrixParams {
                            k,
                            d,
                            alpha,
                            rows,
                            cols,
                        },
                        tol,
                    )?;
                    save_patch(&net, &output)?;
                }
            }
            Ok(true)
        }
        Command::Backlund(args) => {
            let source = load_patch(&args.input)?;
            let curvature = match curvature_profile(&source, tol) {
                CurvatureProfile::Constant { value, .. } if value < 0.0 => value,
                CurvatureProfile::Constant { .. } => {
                    return Err("source curvature is not negative".into())
                }
                CurvatureProfile::Undefined => {
                    return Err(
                        "source curvature is undefined; use `gen tractrix` for the degenerate axis pipeline"
                            .into(),
                    )
                }
                CurvatureProfile::Varying { .. } => {
                    return Err("source curvature is not constant".into())
                }
            };
            let p0 = *source.get(0, 0);
            let q0 = Vector3::new(args.qx, args.qy, args.qz);
            let seeds = seed_normals(&p0, q0, curvature, tol)?;
            let normal = match args.branch {
                Branch::Plus => seeds[0],
                Branch::Minus => seeds[1],
            };
            let seed = ContactElement::new(q0, normal)?;
            let mate = propagate(&source, &seed, tol)?;
            let report = verify_mates(&source, &mate, tol)?;
            eprintln!(
                "d = {}, phi = {} rad, twist = {}, K = {curvature}",
                report.distance,
                report.angle(),
                report.twist
            );
            save_patch(&mate, &args.output)?;
            Ok(true)
        }
        Command::Verify { which } => {
            let (report, output) = build_report(which, tol)?;
            let report = report.finalize();
            match &output {
                Some(path) => report.save(path)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            if !report.pass {
                for c in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!(
                        "failed: {} residual {:.3e} tolerance {:.3e}{}",
                        c.name,
                        c.residual,
                        c.tolerance,
                        c.location
                            .map(|(i, j)| format!(" at ({i}, {j})"))
                            .unwrap_or_default()
                    );
                }
            }
            Ok(report.pass)
        }
        Command::ExportObj { input, output } => {
            let net = load_patch(&input)?;
            export_obj(&net, &output)?;
            Ok(true)
        }
    }
}

fn build_report(
    which: VerifyCommand,
    tol: Tol,
) -> Result<(ReportFile, Option<PathBuf>), Box<dyn std::error::Error>> {
    let mut report = ReportFile::default();
    let output = match which {
        VerifyCommand::Principal { input, output } => {
            let net = load_patch(&input)?;
            let check = check_principal_net(&net, tol);
            for e in &check.edges {
                report.push_at(
                    format!("edge ({},{})-({},{})", e.from.0, e.from.1, e.to.0, e.to.1),
                    e.residual,
                    tol.rel,
                    Some(e.from),
                );
            }
            for q in &check.quads {
                if q.degenerate {
                    report.push_flag(
                        format!("face ({},{}) degenerate (no curvature)", q.cell.0, q.cell.1),
                        true,
                    );
                    continue;
                }
                report.push_at(
                    format!("face ({},{}) concyclicity", q.cell.0, q.cell.1),
                    q.concyclicity.unwrap_or(f64::INFINITY),
                    tol.rel * 10.0,
                    Some(q.cell),
                );
                report.push_at(
                    format!("face ({},{}) normal coplanarity", q.cell.0, q.cell.1),
                    q.normal_coplanarity.unwrap_or(f64::INFINITY),
                    tol.rel * 10.0,
                    Some(q.cell),
                );
            }
            output
        }
        VerifyCommand::Mates { a, b, output } => {
            let na = load_patch(&a)?;
            let nb = load_patch(&b)?;
            let m = verify_mates(&na, &nb, tol)?;
            report.push("distance constancy", m.distance_spread, tol.rel);
            report.push("angle constancy", m.angle_spread, tol.rel * 10.0);
            report.push("tangent-line condition", m.perp_residual, tol.rel * 10.0);
            report.push(
                "curvature identity K = -twist^2",
                m.curvature_residual,
                tol.twist_rel * 10.0,
            );
            output
        }
        VerifyCommand::Theorem2 {
            trials,
            seed,
            t_min,
            t_max,
            e_min,
            e_max,
            output,
        } => {
            let params = Theorem2Params {
                trials,
                t_range: (t_min, t_max),
                e_range: (e_min, e_max),
                seed,
            };
            let result = verify_theorem2(&params, tol)?;
            for (idx, trial) in result.trials.iter().enumerate() {
                report.push(
                    format!(
                        "trial {idx} area identity (t={:.3}, e={:.3})",
                        trial.t, trial.e
                    ),
                    trial.area_residual,
                    1e-8,
                );
                report.push(
                    format!("trial {idx} curvature value"),
                    trial.curvature_residual,
                    1e-8,
                );
            }
            output
        }
        VerifyCommand::Bianchi { a, b, c, output } => {
            let na = load_patch(&a)?;
            let nb = load_patch(&b)?;
            let nc = load_patch(&c)?;
            let nd = complete_net(&na, &nb, &nc, tol)?;
            report.push_flag("completion principal", nd.is_principal());
            let rb = verify_mates(&nd, &nb, tol)?;
            let rc = verify_mates(&nd, &nc, tol)?;
            report.push("transform of first input", rb.distance_spread, tol.rel);
            report.push("transform of second input", rc.distance_spread, tol.rel);
            for j in 0..na.rows() {
                for i in 0..na.cols() {
                    let half = halfturn_axis(nb.get(i, j), nc.get(i, j), tol)?;
                    report.push_at(
                        format!("half-turn swap ({i},{j})"),
                        half.swap_residual,
                        tol.rel * 10.0,
                        Some((i, j)),
                    );
                    let frame = BennettFrame::from_elements(
                        na.get(i, j),
                        nb.get(i, j),
                        nc.get(i, j),
                        nd.get(i, j),
                    );
                    let bc = bennett_check(&frame, tol)?;
                    report.push_flag(format!("special linkage ({i},{j})"), bc.special);
                }
            }
            output
        }
    };
    Ok((report, output))
}
