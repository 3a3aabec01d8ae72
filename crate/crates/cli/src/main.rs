//! Command-line front door: exact evaluation, the scaling translations, the
//! equivalence oracles and fragment classification, wired for reproducible
//! runs. Artifacts go to stdout (or `--out`), run summaries to stderr.
//!
//! Exit codes: 0 on success, 1 when a verification finds a mismatch, 2 on
//! usage or parse errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use relu_logic::equiv::{
    check_ik_equivalence, check_k_equivalence, check_plain_equivalence, make_grid,
    sample_assignments, symmetric_grid_values, unit_grid_values, EquivReport,
};
use relu_logic::formula::{
    classify, constant_value, eval_formula, parse_formula, parse_formula_with_style,
    props, ConstStyle, Formula, LogicId, Valuation,
};
use relu_logic::network::{formula_to_neuron, NeuralNetwork};
use relu_logic::rational::{format_rational, int, parse_rational, Rational};
use relu_logic::scaled::{expand_abbreviations, logical_size};
use relu_logic::term::{eval_term, parse_term, vars, EvaluationMap};
use relu_logic::translate::{
    compute_k_term, formula_to_luk_proto, formula_to_term, luk_proto_to_formula, network_to_logic,
    term_to_formula,
};
use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "relu-logic",
    version,
    about = "Exact translations between ReLU polynomials, fuzzy logics and rational ReLU networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a term at an exact rational assignment.
    EvalTerm {
        /// Term text, or '-' to read it from stdin.
        term: String,
        /// Comma-separated bindings, e.g. x0=3,x1=1/2.
        #[arg(long, default_value = "")]
        at: String,
    },
    /// Evaluate a formula at an exact valuation into [0,1].
    EvalFormula {
        /// Formula text, or '-' to read it from stdin.
        formula: String,
        /// Comma-separated bindings, e.g. p0=1,p1=0.
        #[arg(long, default_value = "")]
        at: String,
    },
    /// Run one of the scaling translations.
    Translate {
        direction: Direction,
        /// Inline text, or '-' for stdin; for nn2logic a path to network JSON.
        input: String,
        /// Input bound: the translation is certified for |E(x)| <= i.
        #[arg(long, default_value = "1")]
        i: String,
        /// Scaling factor; defaults to the computed minimum K.
        #[arg(long)]
        k: Option<String>,
        /// Target logic where the direction allows a choice.
        #[arg(long)]
        logic: Option<LogicArg>,
        /// Write the artifact here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the translation's exactness contract on a default grid.
        #[arg(long)]
        verify: bool,
        /// Expand SSUM/SCSUM abbreviations in emitted formulas.
        #[arg(long)]
        expand: bool,
        /// Size cap for grids and expansions.
        #[arg(long, default_value_t = 100_000)]
        cap: u64,
    },
    /// Exact sample-based equivalence check; exits 1 on mismatch.
    Verify {
        #[arg(long)]
        mode: Mode,
        /// Formula side (for mode k: the scaled formula psi).
        lhs: String,
        /// Term side (for mode k: the plain formula phi).
        rhs: String,
        #[arg(long)]
        i: Option<String>,
        #[arg(long)]
        k: Option<String>,
        /// Comma-separated per-variable grid values.
        #[arg(long)]
        grid: Option<String>,
        /// Use N seeded random points instead of a value grid.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest denominator for sampled rationals.
        #[arg(long, default_value_t = 32)]
        denominator: u32,
        #[arg(long, default_value_t = 100_000)]
        cap: u64,
    },
    /// Fragment classification of a formula, as JSON.
    Classify {
        /// Formula text, or '-' to read it from stdin.
        formula: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    #[value(name = "term2logic")]
    Term2Logic,
    #[value(name = "logic2term")]
    Logic2Term,
    #[value(name = "logic2nn")]
    Logic2Nn,
    #[value(name = "nn2logic")]
    Nn2Logic,
    #[value(name = "luk-roundtrip")]
    LukRoundtrip,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogicArg {
    #[value(name = "luk")]
    Luk,
    #[value(name = "rpl")]
    Rpl,
    #[value(name = "rplprod")]
    RplProd,
    #[value(name = "lpihalf")]
    LPiHalf,
    #[value(name = "lpihalf-impp-")]
    LPiHalfImpPMinus,
    #[value(name = "lpihalf-prod-impp-")]
    LPiHalfProdMinusImpPMinus,
}

impl From<LogicArg> for LogicId {
    fn from(value: LogicArg) -> LogicId {
        match value {
            LogicArg::Luk => LogicId::Luk,
            LogicArg::Rpl => LogicId::Rpl,
            LogicArg::RplProd => LogicId::RplProd,
            LogicArg::LPiHalf => LogicId::LPiHalf,
            LogicArg::LPiHalfImpPMinus => LogicId::LPiHalfImpPMinus,
            LogicArg::LPiHalfProdMinusImpPMinus => LogicId::LPiHalfProdMinusImpPMinus,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Plain,
    Ik,
    #[value(name = "k", alias = "k01")]
    K,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn read_input(input: &str) -> Result<String> {
    if input == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")?;
        Ok(text)
    } else {
        Ok(input.to_string())
    }
}

fn parse_bindings(text: &str) -> Result<Vec<(u32, Rational)>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("binding '{part}' is not of the form name=value"))?;
        let name = name.trim();
        let index: u32 = name
            .trim_start_matches(['x', 'p'])
            .parse()
            .map_err(|_| anyhow!("invalid variable or proposition name '{name}'"))?;
        let value = parse_rational(value).map_err(|e| anyhow!("binding '{part}': {e}"))?;
        out.push((index, value));
    }
    Ok(out)
}

fn parse_rational_flag(text: &str, flag: &str) -> Result<Rational> {
    parse_rational(text).map_err(|e| anyhow!("--{flag}: {e}"))
}

fn emit(out: &Option<PathBuf>, artifact: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, artifact)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{artifact}"),
    }
    Ok(())
}

fn render_formula(phi: &Formula, expand: bool, cap: u64) -> Result<String> {
    if !expand {
        return Ok(phi.to_string());
    }
    if logical_size(phi) > cap.into() {
        bail!("expansion would exceed the cap of {cap} nodes; raise --cap or drop --expand");
    }
    let expanded = expand_abbreviations(phi, cap)?;
    Ok(expanded.to_string())
}

fn report_outcome(report: &EquivReport) -> ExitCode {
    println!("{}", report.to_json());
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::EvalTerm { term, at } => {
            let text = read_input(&term)?;
            let t = parse_term(&text)?;
            let env = EvaluationMap::from_pairs(parse_bindings(&at)?);
            let value = eval_term(&t, &env)?;
            println!("{}", format_rational(&value));
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalFormula { formula, at } => {
            let text = read_input(&formula)?;
            let phi = parse_formula(&text)?;
            let valuation = Valuation::from_pairs(parse_bindings(&at)?)?;
            let value = eval_formula(&phi, &valuation)?;
            println!("{}", format_rational(&value));
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { formula } => {
            let text = read_input(&formula)?;
            let phi = parse_formula(&text)?;
            #[derive(serde::Serialize)]
            struct ClassifyOutput {
                #[serde(flatten)]
                info: relu_logic::formula::FragmentInfo,
                /// Present exactly when the formula is proposition-free.
                constant_value: Option<String>,
            }
            let output = ClassifyOutput {
                info: classify(&phi),
                constant_value: constant_value(&phi).map(|r| format_rational(&r)),
            };
            println!("{}", serde_json::to_string_pretty(&output)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            mode,
            lhs,
            rhs,
            i,
            k,
            grid,
            samples,
            seed,
            denominator,
            cap,
        } => run_verify(
            mode,
            &read_input(&lhs)?,
            &read_input(&rhs)?,
            i.as_deref(),
            k.as_deref(),
            grid.as_deref(),
            samples,
            seed,
            denominator,
            cap,
        ),
        Command::Translate {
            direction,
            input,
            i,
            k,
            logic,
            out,
            verify,
            expand,
            cap,
        } => {
            let i = parse_rational_flag(&i, "i")?;
            let k = k.as_deref().map(|t| parse_rational_flag(t, "k")).transpose()?;
            run_translate(direction, &input, &i, k.as_ref(), logic, &out, verify, expand, cap)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    mode: Mode,
    lhs: &str,
    rhs: &str,
    i: Option<&str>,
    k: Option<&str>,
    grid: Option<&str>,
    samples: Option<usize>,
    seed: u64,
    denominator: u32,
    cap: u64,
) -> Result<ExitCode> {
    let parse_values = |text: &str| -> Result<Vec<Rational>> {
        text.split(',')
            .map(|v| parse_rational(v.trim()).map_err(|e| anyhow!("--grid: {e}")))
            .collect()
    };
    match mode {
        Mode::Plain => {
            let phi = parse_formula(lhs)?;
            let t = parse_term(rhs)?;
            let indices: BTreeSet<u32> = props(&phi).union(&vars(&t)).copied().collect();
            let points = match samples {
                Some(n) => sample_assignments(&indices, n, &int(0), &int(1), denominator, seed),
                None => {
                    let values = match grid {
                        Some(g) => parse_values(g)?,
                        None => unit_grid_values(),
                    };
                    make_grid(&indices, &values, cap)?
                }
            };
            Ok(report_outcome(&check_plain_equivalence(&phi, &t, &points)?))
        }
        Mode::Ik => {
            let phi = parse_formula(lhs)?;
            let t = parse_term(rhs)?;
            let i = match i {
                Some(text) => parse_rational_flag(text, "i")?,
                None => int(1),
            };
            let k = match k {
                Some(text) => parse_rational_flag(text, "k")?,
                None => relu_logic::rational::biguint_to_rational(&compute_k_term(&t, &i)?),
            };
            let indices: BTreeSet<u32> = props(&phi).union(&vars(&t)).copied().collect();
            let points = match samples {
                Some(n) => {
                    sample_assignments(&indices, n, &-i.clone(), &i, denominator, seed)
                }
                None => {
                    let values = match grid {
                        Some(g) => parse_values(g)?,
                        None => symmetric_grid_values(&i),
                    };
                    make_grid(&indices, &values, cap)?
                }
            };
            Ok(report_outcome(&check_ik_equivalence(&phi, &t, &i, &k, &points)?))
        }
        Mode::K => {
            let psi = parse_formula(lhs)?;
            let phi = parse_formula(rhs)?;
            let k = match k {
                Some(text) => parse_rational_flag(text, "k")?,
                None => int(1),
            };
            let indices: BTreeSet<u32> = props(&psi).union(&props(&phi)).copied().collect();
            let points = match samples {
                Some(n) => sample_assignments(&indices, n, &int(0), &int(1), denominator, seed),
                None => {
                    let values = match grid {
                        Some(g) => parse_values(g)?,
                        None => unit_grid_values(),
                    };
                    make_grid(&indices, &values, cap)?
                }
            };
            Ok(report_outcome(&check_k_equivalence(&psi, &phi, &k, &points)?))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_translate(
    direction: Direction,
    input: &str,
    i: &Rational,
    k: Option<&Rational>,
    logic: Option<LogicArg>,
    out: &Option<PathBuf>,
    verify: bool,
    expand: bool,
    cap: u64,
) -> Result<ExitCode> {
    match direction {
        Direction::Term2Logic => {
            let t = parse_term(&read_input(input)?)?;
            let target = logic.map_or(LogicId::RplProd, LogicId::from);
            let tr = term_to_formula(&t, i, k, target)?;
            eprintln!("K = {}", tr.k_min);
            eprintln!("k = {}", format_rational(&tr.k_value));
            emit(out, &format!("{}\n", render_formula(&tr.formula, expand, cap)?))?;
            if verify {
                let grid = make_grid(&vars(&t), &symmetric_grid_values(i), cap)?;
                let report = check_ik_equivalence(&tr.formula, &t, i, &tr.k_value, &grid)?;
                eprintln!("verified: {}", report.passed);
                if !report.passed {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Direction::Logic2Term => {
            let style = logic
                .map(|l| match LogicId::from(l) {
                    LogicId::LPiHalf | LogicId::LPiHalfImpPMinus
                    | LogicId::LPiHalfProdMinusImpPMinus => ConstStyle::Underline,
                    _ => ConstStyle::TruthConst,
                })
                .unwrap_or(ConstStyle::TruthConst);
            let phi = parse_formula_with_style(&read_input(input)?, style)?;
            let t = formula_to_term(&phi)?;
            emit(out, &format!("{t}\n"))?;
            if verify {
                let indices: BTreeSet<u32> = props(&phi).union(&vars(&t)).copied().collect();
                let grid = make_grid(&indices, &unit_grid_values(), cap)?;
                let report = check_plain_equivalence(&phi, &t, &grid)?;
                eprintln!("verified: {}", report.passed);
                if !report.passed {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Direction::Logic2Nn => {
            let phi = parse_formula(&read_input(input)?)?;
            let net = formula_to_neuron(&phi)?;
            emit(out, &format!("{}\n", net.to_json()))?;
            if verify {
                let term = net.output_terms().remove(0);
                let indices: BTreeSet<u32> = props(&phi).union(&vars(&term)).copied().collect();
                let grid = make_grid(&indices, &unit_grid_values(), cap)?;
                let report = check_plain_equivalence(&phi, &term, &grid)?;
                eprintln!("verified: {}", report.passed);
                if !report.passed {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Direction::Nn2Logic => {
            let json = if input == "-" {
                read_input("-")?
            } else {
                std::fs::read_to_string(input).with_context(|| format!("reading {input}"))?
            };
            let net = NeuralNetwork::from_json(&json)?;
            let target = logic.map_or(LogicId::Rpl, LogicId::from);
            let tr = network_to_logic(&net, i, k, target)?;
            eprintln!("K = {}", tr.k_min);
            eprintln!("k = {}", format_rational(&tr.k_value));
            let mut artifact = String::new();
            for component in &tr.components {
                if component.input_scale != component.k_value {
                    eprintln!(
                        "input scale = {} (inputs pair at k*D after integer inflation)",
                        format_rational(&component.input_scale)
                    );
                }
                artifact.push_str(&render_formula(&component.formula, expand, cap)?);
                artifact.push('\n');
            }
            emit(out, &artifact)?;
            if verify {
                let mut all_passed = true;
                for (index, component) in tr.components.iter().enumerate() {
                    // Check the exact contract: against the inflated term at
                    // the input scale when inflation ran, else against the
                    // output term directly.
                    let (term, scale) = match &component.inflation {
                        Some(inflation) => (inflation.term.clone(), &component.input_scale),
                        None => (net.output_terms()[index].clone(), &component.k_value),
                    };
                    let grid = make_grid(&vars(&term), &symmetric_grid_values(i), cap)?;
                    let report =
                        check_ik_equivalence(&component.formula, &term, i, scale, &grid)?;
                    eprintln!("verified component {index}: {}", report.passed);
                    all_passed &= report.passed;
                }
                if !all_passed {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Direction::LukRoundtrip => {
            let phi = parse_formula(&read_input(input)?)?;
            let neuron = formula_to_luk_proto(&phi)?;
            let back = luk_proto_to_formula(&neuron, &int(1))?;
            eprintln!("syntactic-identity: {}", back == phi);
            emit(out, &format!("{}\n", render_formula(&back, expand, cap)?))?;
            if verify {
                let grid = make_grid(&props(&phi), &unit_grid_values(), cap)?;
                let report = check_k_equivalence(&back, &phi, &int(1), &grid)?;
                eprintln!("verified: {}", report.passed);
                if !report.passed {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
