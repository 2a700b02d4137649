//! Command-line interface.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dixmier_core::algebra::invariant_ideals;
use dixmier_core::averaging::{
    dixmier_reduce, pcom_sweep, ph_average, MonitorOptions, DEFAULT_WINDOW_BUDGET,
};
use dixmier_core::crossed::CrossedElement;
use dixmier_core::group::GroupElement;
use dixmier_core::powers::construct_pcom;
use dixmier_core::rep::{norm_upper_l1, PowerOptions, TruncatedRep, WindowSpec};
use dixmier_core::structure::{
    bijection_report, block_decompose, ideal_pair, orbit_decomposition, trace_correspondence,
    MatrixModel,
};
use dixmier_core::twist::TwistedSystem;

use crate::description::{Built, SystemDescription};
use crate::error::{exit, Error, Result};
use crate::expr;
use crate::report::{
    AverageReport, BlockRow, DecomposeReport, Format, FullReport, IdealRow, IdealsReport,
    NormReport, Report, TracesReport, ValidateReport,
};

#[derive(Debug, Parser)]
#[command(
    name = "dixmier",
    version,
    about = "Twisted crossed products: validation, norms, averaging and finite structure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Ball radius for free-group windows.
    #[arg(long, global = true, default_value_t = 8)]
    pub radius: i64,
    /// Extra window radius beyond `--radius` (default: longest word in the element).
    #[arg(long, global = true)]
    pub guard: Option<i64>,
    /// Relative residual at which power iteration stops.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", global = true, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Symbolic Powers steps per averaging phase.
    #[arg(long, global = true, default_value_t = 4)]
    pub kmax: usize,
    /// Largest N for the (P_com) average.
    #[arg(long = "N", global = true, default_value_t = 64)]
    pub n: usize,
    /// Target for the analytic step count of PH averaging.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the twisted-system axioms.
    Validate { input: PathBuf },
    /// Lower bound for the norm of an element on a truncated window.
    Norm { input: PathBuf, element: String },
    /// Iterated Powers averaging (two phases for non-self-adjoint elements).
    AveragePh { input: PathBuf, element: String },
    /// (P_com) averages for N = 1, 4, 16, ... up to --N.
    AveragePcom { input: PathBuf, element: String },
    /// Induced and tilde ideals, maximal ideals (finite groups).
    Ideals { input: PathBuf },
    /// Invariant traces of A against traces of the model (finite groups).
    Traces { input: PathBuf },
    /// Block and orbit decomposition (finite groups).
    Decompose { input: PathBuf },
    /// Every applicable report.
    Report { input: PathBuf },
}

impl Command {
    fn input(&self) -> &PathBuf {
        match self {
            Command::Validate { input }
            | Command::Norm { input, .. }
            | Command::AveragePh { input, .. }
            | Command::AveragePcom { input, .. }
            | Command::Ideals { input }
            | Command::Traces { input }
            | Command::Decompose { input }
            | Command::Report { input } => input,
        }
    }
}

/// A rendered report with its exit status.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Report,
}

pub fn load(path: &PathBuf) -> Result<Built> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    SystemDescription::from_json(&text)?.build()
}

impl Cli {
    fn power(&self) -> PowerOptions {
        PowerOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }

    fn monitor(&self) -> MonitorOptions {
        MonitorOptions {
            power: self.power(),
            window_budget: DEFAULT_WINDOW_BUDGET,
        }
    }
}

fn validate_report(b: &Built) -> ValidateReport {
    let r = b.system.report();
    ValidateReport {
        system: b.name.clone(),
        valid: r.passed(),
        checks: r.checks.clone(),
    }
}

fn require_valid(b: &Built) -> Result<()> {
    match b.system.report().first_failure() {
        None => Ok(()),
        Some(c) => Err(Error::Validation(format!("axiom \"{}\" fails", c.name))),
    }
}

fn norm_report(cli: &Cli, b: &Built, label: &str, x: &CrossedElement) -> Result<NormReport> {
    let guard = match cli.guard {
        Some(g) => g.max(0) as usize,
        None => x.max_length(),
    };
    let (spec, window) = if b.system.group().as_finite().is_some() {
        (WindowSpec::Full, "full group".to_owned())
    } else {
        let r = cli.radius + guard as i64;
        (WindowSpec::Ball(r), format!("ball of radius {r}"))
    };
    let rep = TruncatedRep::new(&b.system, &spec)?;
    Ok(NormReport {
        system: b.name.clone(),
        element: label.to_owned(),
        window,
        window_size: rep.window().len(),
        guard,
        estimate: rep.norm_lower(x, &cli.power())?,
        l1_upper: norm_upper_l1(x),
    })
}

fn ideals_report(
    b: &Built,
    model: &MatrixModel,
    blocks: &dixmier_core::structure::BlockStructure,
) -> Result<IdealsReport> {
    let sys: &TwistedSystem = &b.system;
    let autos: Vec<_> = sys
        .group()
        .elements()
        .unwrap()
        .iter()
        .map(|g| sys.alpha(g))
        .collect();
    let lattice = invariant_ideals(sys.algebra(), &autos)?;
    let mut rows = Vec::new();
    for j in &lattice.ideals {
        let p = ideal_pair(model, blocks, j)?;
        rows.push(IdealRow {
            ideal: j.blocks().clone(),
            generated: p.generated,
            tilde: p.tilde,
            equal: p.equal,
        });
    }
    let bijection = bijection_report(model, blocks)?;
    Ok(IdealsReport {
        system: b.name.clone(),
        exact: rows.iter().all(|r| r.equal),
        invariant_ideals: rows,
        maximal_ideals: blocks.len(),
        maximal_invariant_ideals: bijection.invariant_maximal.len(),
        bijection,
    })
}

fn decompose_report(
    b: &Built,
    model: &MatrixModel,
    blocks: &dixmier_core::structure::BlockStructure,
) -> Result<DecomposeReport> {
    let orbits = if b.system.algebra().is_commutative() {
        Some(orbit_decomposition(&b.system)?)
    } else {
        None
    };
    Ok(DecomposeReport {
        system: b.name.clone(),
        ambient: model.ambient(),
        dimension: model.dimension(),
        faithfulness_margin: model.faithfulness_margin(),
        blocks: blocks
            .blocks
            .iter()
            .map(|k| BlockRow {
                dim: k.dim,
                multiplicity: k.multiplicity,
            })
            .collect(),
        orbits,
    })
}

fn finite_model(b: &Built) -> Result<(MatrixModel, dixmier_core::structure::BlockStructure)> {
    let model = MatrixModel::new(&b.system)?;
    let blocks = block_decompose(&model)?;
    Ok((model, blocks))
}

fn powers_of_four(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(4))
        .take_while(|&k| k <= n)
        .collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let b = load(cli.command.input())?;
    let ok = |report| Outcome {
        code: exit::OK,
        report,
    };
    match &cli.command {
        Command::Validate { .. } => {
            let r = validate_report(&b);
            let code = if r.valid { exit::OK } else { exit::VALIDATION };
            Ok(Outcome {
                code,
                report: Report::Validate(r),
            })
        }
        Command::Norm { element, .. } => {
            require_valid(&b)?;
            let x = expr::element(&b, element)?;
            Ok(ok(Report::Norm(norm_report(cli, &b, element, &x)?)))
        }
        Command::AveragePh { element, .. } => {
            require_valid(&b)?;
            let x = expr::element(&b, element)?;
            let scale = x.l1_norm().max(1.0);
            let report = if x.is_self_adjoint(1e-12 * scale) {
                let run = ph_average(&x, cli.eps, cli.kmax, &cli.monitor())?;
                AverageReport {
                    system: b.name.clone(),
                    element: element.clone(),
                    mode: "ph".into(),
                    process_length: run.process.len(),
                    steps_for_epsilon: Some(run.steps_for_epsilon),
                    final_bound: Some(run.final_bound),
                    refuted: run.refuted(),
                    rows: run.trace.rows,
                }
            } else {
                let run = dixmier_reduce(&x, cli.eps, cli.kmax, &cli.monitor())?;
                AverageReport {
                    system: b.name.clone(),
                    element: element.clone(),
                    mode: "two-phase".into(),
                    process_length: run.process.len(),
                    steps_for_epsilon: Some(
                        run.real.steps_for_epsilon + run.imaginary.steps_for_epsilon,
                    ),
                    final_bound: Some(run.final_bound),
                    refuted: run.refuted(),
                    rows: run.trace.rows,
                }
            };
            let code = if report.refuted {
                exit::REFUTATION
            } else {
                exit::OK
            };
            Ok(Outcome {
                code,
                report: Report::Average(report),
            })
        }
        Command::AveragePcom { element, .. } => {
            require_valid(&b)?;
            let x = expr::element(&b, element)?;
            let f: Vec<GroupElement> = x.support().into_iter().collect();
            let cert = construct_pcom(b.system.group(), &f)?;
            let y0 = x.conjugate(&cert.conjugator)?;
            let trace = pcom_sweep(&y0, &cert, &powers_of_four(cli.n.max(1)), &cli.monitor())?;
            let refuted = trace.refuted();
            let report = AverageReport {
                system: b.name.clone(),
                element: element.clone(),
                mode: "pcom".into(),
                process_length: cli.n,
                steps_for_epsilon: None,
                final_bound: None,
                refuted,
                rows: trace.rows,
            };
            Ok(Outcome {
                code: if refuted { exit::REFUTATION } else { exit::OK },
                report: Report::Average(report),
            })
        }
        Command::Ideals { .. } => {
            require_valid(&b)?;
            let (model, blocks) = finite_model(&b)?;
            Ok(ok(Report::Ideals(ideals_report(&b, &model, &blocks)?)))
        }
        Command::Traces { .. } => {
            require_valid(&b)?;
            let (model, blocks) = finite_model(&b)?;
            Ok(ok(Report::Traces(TracesReport {
                system: b.name.clone(),
                traces: trace_correspondence(&model, &blocks)?,
            })))
        }
        Command::Decompose { .. } => {
            require_valid(&b)?;
            let (model, blocks) = finite_model(&b)?;
            Ok(ok(Report::Decompose(decompose_report(
                &b, &model, &blocks,
            )?)))
        }
        Command::Report { .. } => {
            let validate = validate_report(&b);
            if !validate.valid {
                return Ok(Outcome {
                    code: exit::VALIDATION,
                    report: Report::Validate(validate),
                });
            }
            let mut full = FullReport {
                validate,
                ideals: None,
                traces: None,
                decompose: None,
                norms: Vec::new(),
            };
            for (name, x) in &b.elements {
                full.norms.push(norm_report(cli, &b, name, x)?);
            }
            if b.system.group().as_finite().is_some() {
                let (model, blocks) = finite_model(&b)?;
                full.decompose = Some(decompose_report(&b, &model, &blocks)?);
                full.ideals = Some(ideals_report(&b, &model, &blocks)?);
                full.traces = Some(TracesReport {
                    system: b.name.clone(),
                    traces: trace_correspondence(&model, &blocks)?,
                });
            }
            Ok(ok(Report::Full(Box::new(full))))
        }
    }
}

/// Runs the CLI; returns the exit status. Reports go to `--output` or
/// stdout, errors to stderr.
pub fn run(cli: &Cli) -> i32 {
    let outcome = execute(cli).and_then(|o| Ok((o.code, o.report.render(cli.format)?)));
    match outcome {
        Ok((code, text)) => {
            let written = match &cli.output {
                Some(p) => std::fs::write(p, &text).map_err(|source| Error::Io {
                    path: p.display().to_string(),
                    source,
                }),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
