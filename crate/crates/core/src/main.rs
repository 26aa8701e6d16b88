use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use sas_core::frontend::{parse_with, print_fol, print_goal, Form, SourceUnit};
use sas_core::logic::{
    check_goal, enumerate_assignments, shape_analysis_sentence, Conjunction, ExtractOptions,
    Verdict,
};
use sas_core::skeleton::{Protocol, Skeleton};
use sas_core::Substitution;

#[derive(Parser)]
#[command(
    name = "sas",
    version,
    about = "Shape analysis sentences and security goal checking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Sexpr,
    Fol,
}

#[derive(Subcommand)]
enum Command {
    /// Check well-formedness of every skeleton and every homomorphism.
    Verify { file: PathBuf },
    /// Print the shape analysis sentence of each analysis.
    Extract {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "sexpr")]
        format: Format,
        /// Assert the full node order instead of the stored edges.
        #[arg(long)]
        full_order: bool,
    },
    /// Decide a goal against a shape analysis (exit 0 achieved, 1 counterexample).
    CheckGoal { analysis: PathBuf, goal: PathBuf },
    /// List the assignments satisfying a formula in each skeleton, including
    /// the point of view and shapes of analyses.
    Sat { skeleton: PathBuf, formula: PathBuf },
}

struct Failure(String);

fn load(path: &Path, known: &[Arc<Protocol>]) -> Result<SourceUnit, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_with(&text, known).map_err(|d| Failure(format!("{}:{d}", path.display())))
}

fn protocols(unit: &SourceUnit) -> Vec<Arc<Protocol>> {
    unit.protocols().cloned().collect()
}

fn verify(file: &Path) -> Result<ExitCode, Failure> {
    let unit = load(file, &[])?;
    for (pos, form) in &unit.forms {
        match form {
            Form::Protocol(p) => {
                println!("{pos}: protocol {}: {} role(s)", p.name, p.roles().len())
            }
            Form::Skeleton(k) => println!(
                "{pos}: skeleton of {}: well-formed, {} strand(s)",
                k.protocol().name,
                k.strand_count()
            ),
            Form::Analysis(sa) => {
                println!(
                    "{pos}: analysis of {}: point of view well-formed, {} shape(s)",
                    sa.pov().protocol().name,
                    sa.shapes().len()
                );
                for (i, d) in sa.shapes().iter().enumerate() {
                    let map: Vec<String> = d.strand_map().iter().map(ToString::to_string).collect();
                    println!(
                        "  shape {i}: well-formed; homomorphism ({}) {} verified",
                        map.join(" "),
                        d.subst()
                    );
                }
            }
            Form::Goal(g) => println!(
                "{pos}: goal about {}: {} disjunct(s)",
                g.protocol,
                g.conclusion.len()
            ),
            Form::Formula(f) => println!(
                "{pos}: formula about {}: {} atom(s)",
                f.protocol,
                f.conjunction.atoms.len()
            ),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn extract(file: &Path, format: Format, full_order: bool) -> Result<ExitCode, Failure> {
    let unit = load(file, &[])?;
    let opts = ExtractOptions { full_order };
    let mut any = false;
    for sa in unit.analyses() {
        let s = shape_analysis_sentence(sa, opts);
        match format {
            Format::Sexpr => println!("{}", print_goal(&s)),
            Format::Fol => print!("{}", print_fol(&s, "axiom")),
        }
        any = true;
    }
    if !any {
        return Err(Failure(format!("{}: no defanalysis found", file.display())));
    }
    Ok(ExitCode::SUCCESS)
}

fn check(analysis: &Path, goal: &Path) -> Result<ExitCode, Failure> {
    let a_unit = load(analysis, &[])?;
    let g_unit = load(goal, &protocols(&a_unit))?;
    if a_unit.analyses().next().is_none() {
        return Err(Failure(format!(
            "{}: no defanalysis found",
            analysis.display()
        )));
    }
    let mut verdict = Verdict::Achieved;
    let mut any = false;
    for (pos, form) in &g_unit.forms {
        let Form::Goal(g) = form else { continue };
        any = true;
        let mut matched = false;
        for sa in a_unit
            .analyses()
            .filter(|sa| sa.pov().protocol().name == g.protocol)
        {
            matched = true;
            let report =
                check_goal(sa, g).map_err(|e| Failure(format!("{}:{pos}: {e}", goal.display())))?;
            print!("{report}");
            if report.verdict == Verdict::Counterexample {
                verdict = Verdict::Counterexample;
            }
        }
        if !matched {
            return Err(Failure(format!(
                "{}:{pos}: no analysis of protocol {}",
                goal.display(),
                g.protocol
            )));
        }
    }
    if !any {
        return Err(Failure(format!("{}: no defgoal found", goal.display())));
    }
    Ok(match verdict {
        Verdict::Achieved => ExitCode::SUCCESS,
        Verdict::Counterexample => ExitCode::from(1),
    })
}

fn sat(skeleton: &Path, formula: &Path) -> Result<ExitCode, Failure> {
    let k_unit = load(skeleton, &[])?;
    let f_unit = load(formula, &protocols(&k_unit))?;
    let formulas: Vec<(String, String, &Conjunction)> = f_unit
        .forms
        .iter()
        .filter_map(|(pos, form)| match form {
            Form::Formula(f) => Some((pos.to_string(), f.protocol.clone(), &f.conjunction)),
            Form::Goal(g) => Some((pos.to_string(), g.protocol.clone(), &g.hypothesis)),
            _ => None,
        })
        .collect();
    if formulas.is_empty() {
        return Err(Failure(format!(
            "{}: no defformula or defgoal found",
            formula.display()
        )));
    }
    let mut skeletons: Vec<(String, &Skeleton)> = k_unit
        .skeletons()
        .enumerate()
        .map(|(i, k)| (format!("skeleton {i}"), k.as_ref()))
        .collect();
    for (i, sa) in k_unit.analyses().enumerate() {
        skeletons.push((format!("analysis {i} pov"), sa.pov()));
        for (j, d) in sa.shapes().iter().enumerate() {
            skeletons.push((format!("analysis {i} shape {j}"), d.target()));
        }
    }
    for (label, k) in skeletons {
        for (pos, protocol, c) in &formulas {
            if *protocol != k.protocol().name {
                continue;
            }
            let found = enumerate_assignments(k, c, &Substitution::new())
                .map_err(|e| Failure(format!("{}:{pos}: {e}", formula.display())))?;
            println!("{label}, formula at {pos}: {} assignment(s)", found.len());
            for alpha in found {
                println!("  {alpha}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { file } => verify(file),
        Command::Extract {
            file,
            format,
            full_order,
        } => extract(file, *format, *full_order),
        Command::CheckGoal { analysis, goal } => check(analysis, goal),
        Command::Sat { skeleton, formula } => sat(skeleton, formula),
    };
    match result {
        Ok(code) => code,
        Err(Failure(message)) => {
            eprintln!("{message}");
            ExitCode::from(2)
        }
    }
}
