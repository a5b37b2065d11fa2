mod error;
mod report;

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathpair::circuit::{build_scheme_a, build_scheme_b, BeamSplitter, Scheme};
use pathpair::dsl::{self, ParseDiagnostic, Severity};
use pathpair::evolution::{
    bell_overlap, evolve_with_tolerance, outcome_distribution, postselect_survivors, BellKind,
    OutcomeDistribution,
};
use pathpair::lhv::{
    behavior_from_quantum, contradiction_fraction, lhv_feasible, lhv_feasible_product_form,
    verify_certificate, Behavior, Cell, FeasibilityResult, ProductFormResult,
};
use pathpair::sampling::{frequencies, sample_table_chunked, CellTable, DEFAULT_CHUNK};
use pathpair::state::render_amplitude;
use pathpair::{Error, Wing};
use rayon::prelude::*;

use error::CliError;
use report::*;

/// Seed used by `sample` when `--seed` is omitted.
const DEFAULT_SEED: u64 = 42;

/// Largest number of grid points `sweep` accepts.
const MAX_GRID: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "pathpair",
    version,
    about = "Two-particle interferometer simulator"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Table)]
    format: OutputFormat,

    /// Amplitudes at or below this magnitude are dropped.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tolerance: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a scheme and print its final state, outcome table and Bell overlaps.
    Simulate(SchemeArg),
    /// Draw seeded Monte Carlo runs.
    Sample {
        #[command(flatten)]
        scheme: SchemeArg,
        /// Number of runs.
        #[arg(short = 'n', long = "runs", default_value_t = 10_000)]
        n: u64,
        /// RNG seed.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Local-hidden-variable feasibility of two behaviors.
    Lhv(LhvArgs),
    /// Outcome table over a grid of one splitter ratio or phase.
    Sweep {
        #[command(flatten)]
        scheme: SchemeArg,
        /// bs1, bs2, bs3, phase-ab or phase-cd, optionally prefixed by `minus.` or `plus.`.
        #[arg(long)]
        param: String,
        /// Grid as start:stop:step; numbers accept the `x/sqrt2` form.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
    },
    /// Parse a scheme file and list diagnostics.
    ParseCheck { path: PathBuf },
}

#[derive(Debug, Args)]
struct SchemeArg {
    /// `a`, `b` or a path to a scheme file.
    #[arg(long, default_value = "a")]
    scheme: String,
}

#[derive(Debug, Args)]
struct LhvArgs {
    /// Behavior file for context (a).
    #[arg(long = "a", requires = "behavior_b", conflicts_with = "from_qm")]
    behavior_a: Option<PathBuf>,
    /// Behavior file for context (b).
    #[arg(long = "b", requires = "behavior_a", conflicts_with = "from_qm")]
    behavior_b: Option<PathBuf>,
    /// Use the quantum predictions of the two built-in schemes.
    #[arg(long)]
    from_qm: bool,
    /// Also test the independent-sources (product-form) restriction.
    #[arg(long)]
    product_form: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let _ = out.flush();
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<u8, CliError> {
    if !(cli.tolerance.is_finite() && cli.tolerance > 0.0 && cli.tolerance < 1.0) {
        return Err(CliError::user("--tolerance must lie in (0, 1)"));
    }
    match &cli.command {
        Command::Simulate(s) => simulate(cli, &s.scheme, out).map(|_| 0),
        Command::Sample { scheme, n, seed } => sample(cli, scheme, *n, *seed, out).map(|_| 0),
        Command::Lhv(args) => lhv(cli, args, out).map(|_| 0),
        Command::Sweep {
            scheme,
            param,
            range,
        } => sweep(cli, scheme, param, range, out).map(|_| 0),
        Command::ParseCheck { path } => parse_check(cli, path, out),
    }
}

fn load_scheme(reference: &str) -> Result<Scheme<f64>, CliError> {
    match reference {
        "a" => return Ok(build_scheme_a()),
        "b" => return Ok(build_scheme_b()),
        _ => {}
    }
    let path = Path::new(reference);
    let bytes = std::fs::read(path).map_err(|e| CliError::from_read(path, e))?;
    let parsed = match std::str::from_utf8(&bytes) {
        Ok(text) => dsl::parse_with_warnings(text).map(|p| {
            for w in &p.warnings {
                eprintln!("{reference}:{w}");
            }
            p.scheme
        }),
        Err(_) => dsl::parse_bytes(&bytes),
    };
    let scheme = parsed.map_err(|diagnostics| CliError::Diagnostics {
        origin: reference.to_string(),
        diagnostics,
    })?;
    Ok(scheme.validated()?)
}

fn distribution(
    scheme: &Scheme<f64>,
    tolerance: f64,
) -> Result<OutcomeDistribution<f64>, CliError> {
    Ok(outcome_distribution(&evolve_with_tolerance(
        scheme, tolerance,
    )?)?)
}

fn simulate<W: Write>(cli: &Cli, reference: &str, out: &mut W) -> Result<(), CliError> {
    let scheme = load_scheme(reference)?;
    let tol = cli.tolerance;
    let state = evolve_with_tolerance(&scheme, tol)?;
    let dist = outcome_distribution(&state)?;
    let snap = |x: f64| if x.abs() < tol { 0.0 } else { num(x) };
    let terms: Vec<Term> = state
        .terms()
        .map(|(ket, amp)| Term {
            ket: ket.to_string(),
            re: snap(amp.re),
            im: snap(amp.im),
            text: render_amplitude(*amp, tol),
        })
        .collect();
    let overlaps = match postselect_survivors(&state) {
        Ok(s) => {
            let o = |k| bell_overlap(&s, k).map(num);
            Some(BellOverlaps {
                psi_plus_overlap: o(BellKind::PsiPlus)?,
                psi_minus_overlap: o(BellKind::PsiMinus)?,
                phi_plus_overlap: o(BellKind::PhiPlus)?,
                phi_minus_overlap: o(BellKind::PhiMinus)?,
            })
        }
        Err(Error::NoSurvivors) => None,
        Err(e) => return Err(e.into()),
    };
    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        scheme: scheme.name.clone(),
        tolerance: tol,
        state: terms,
        distribution: distribution_fields(&dist),
        survivor_probability: num(state.particle_sector().norm_squared()),
        bell_overlaps: overlaps,
    };
    match cli.format {
        OutputFormat::Json => write_json(out, &report),
        OutputFormat::Csv => write_csv(out, &["section", "key", "value"], &simulate_rows(&report)),
        OutputFormat::Table => {
            writeln!(out, "scheme: {}", report.scheme)?;
            writeln!(out, "final state:")?;
            for t in &report.state {
                writeln!(out, "  {} : {}", t.ket, t.text)?;
            }
            writeln!(out)?;
            let rows: Vec<Vec<String>> = simulate_rows(&report)
                .into_iter()
                .filter(|r| r[0] != "state")
                .map(|r| vec![r[1].clone(), r[2].clone()])
                .collect();
            write_table(out, &["quantity", "value"], &rows)?;
            if report.bell_overlaps.is_none() {
                writeln!(out, "no survivors: every run annihilates")?;
            }
            Ok(())
        }
    }
}

fn distribution_fields(d: &OutcomeDistribution<f64>) -> Distribution {
    Distribution {
        p_ee: num(d.p_ee),
        p_ef: num(d.p_ef),
        p_fe: num(d.p_fe),
        p_ff: num(d.p_ff),
        p_gamma: d
            .p_gamma
            .iter()
            .map(|(k, &v)| (k.clone(), num(v)))
            .collect(),
        gamma_total: num(d.gamma_total()),
    }
}

fn simulate_rows(r: &SimulateReport) -> Vec<Vec<String>> {
    let row = |s: &str, k: &str, v: String| vec![s.to_string(), k.to_string(), v];
    let mut rows: Vec<Vec<String>> = r
        .state
        .iter()
        .map(|t| row("state", &t.ket, t.text.clone()))
        .collect();
    let d = &r.distribution;
    rows.push(row("probability", "pEE", fmt(d.p_ee)));
    rows.push(row("probability", "pEF", fmt(d.p_ef)));
    rows.push(row("probability", "pFE", fmt(d.p_fe)));
    rows.push(row("probability", "pFF", fmt(d.p_ff)));
    for (label, p) in &d.p_gamma {
        rows.push(row("probability", &format!("gamma:{label}"), fmt(*p)));
    }
    rows.push(row("probability", "gammaTotal", fmt(d.gamma_total)));
    rows.push(row(
        "probability",
        "survivorProbability",
        fmt(r.survivor_probability),
    ));
    if let Some(b) = &r.bell_overlaps {
        rows.push(row("bell", "psiPlusOverlap", fmt(b.psi_plus_overlap)));
        rows.push(row("bell", "psiMinusOverlap", fmt(b.psi_minus_overlap)));
        rows.push(row("bell", "phiPlusOverlap", fmt(b.phi_plus_overlap)));
        rows.push(row("bell", "phiMinusOverlap", fmt(b.phi_minus_overlap)));
    }
    rows
}

fn sample<W: Write>(
    cli: &Cli,
    reference: &SchemeArg,
    n: u64,
    seed: u64,
    out: &mut W,
) -> Result<(), CliError> {
    let scheme = load_scheme(&reference.scheme)?;
    let table = CellTable::new(&distribution(&scheme, cli.tolerance)?);
    let tally = sample_table_chunked(&table, n, seed, DEFAULT_CHUNK);
    let freq = match frequencies(&tally) {
        Ok(f) => Some(f),
        Err(Error::EmptyTally) => None,
        Err(e) => return Err(e.into()),
    };
    let order: Vec<_> = table.cells().iter().map(|(c, _)| c.clone()).collect();
    let cells: BTreeMap<String, SampleCell> = table
        .cells()
        .iter()
        .map(|(c, p)| {
            let f = freq.as_ref().and_then(|f| f.get(c));
            (
                c.key(),
                SampleCell {
                    count: tally.count(c),
                    estimate: (n > 0).then(|| f.map_or(0.0, |f| num(f.estimate))),
                    standard_error: (n > 0).then(|| f.map_or(0.0, |f| num(f.standard_error))),
                    probability: num(*p),
                },
            )
        })
        .collect();
    let report = SampleReport {
        schema_version: SCHEMA_VERSION,
        command: "sample",
        scheme: scheme.name.clone(),
        n: tally.n,
        seed: tally.seed,
        cells,
        cell_order: order.iter().map(|c| c.key()).collect(),
    };
    let rows: Vec<Vec<String>> = report
        .cell_order
        .iter()
        .map(|k| {
            let c = &report.cells[k];
            vec![
                k.clone(),
                c.count.to_string(),
                fmt_opt(c.estimate),
                fmt_opt(c.standard_error),
                fmt(c.probability),
            ]
        })
        .collect();
    let header = ["cell", "count", "estimate", "standardError", "probability"];
    match cli.format {
        OutputFormat::Json => write_json(out, &report),
        OutputFormat::Csv => write_csv(out, &header, &rows),
        OutputFormat::Table => {
            writeln!(
                out,
                "scheme: {}  n: {}  seed: {}",
                report.scheme, report.n, report.seed
            )?;
            write_table(out, &header, &rows)
        }
    }
}

fn read_behavior(path: &Path) -> Result<Behavior, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::from_read(path, e))?;
    Behavior::from_json(&text).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

fn behavior_map(b: &Behavior) -> BTreeMap<String, f64> {
    b.iter().map(|(c, p)| (c.key(), num(p))).collect()
}

fn lhv<W: Write>(cli: &Cli, args: &LhvArgs, out: &mut W) -> Result<(), CliError> {
    let (a, b) = match (&args.behavior_a, &args.behavior_b, args.from_qm) {
        (Some(pa), Some(pb), false) => (read_behavior(pa)?, read_behavior(pb)?),
        (None, None, true) => (
            behavior_from_quantum(&distribution(&build_scheme_a(), cli.tolerance)?)?,
            behavior_from_quantum(&distribution(&build_scheme_b(), cli.tolerance)?)?,
        ),
        _ => return Err(CliError::user("give either --a FILE --b FILE or --from-qm")),
    };
    let result = lhv_feasible(&a, &b)?;
    let (verdict, weights, certificate) = match &result {
        FeasibilityResult::Feasible(w) => (
            "Feasible",
            Some(w.iter().map(|(s, &x)| (s.key(), num(x))).collect()),
            None,
        ),
        FeasibilityResult::Infeasible(c) => {
            let rows = |y: &[f64; 9]| {
                y.iter()
                    .enumerate()
                    .map(|(i, &v)| (Cell::from_index(i).key(), num(v)))
                    .collect()
            };
            (
                "Infeasible",
                None,
                Some(Certificate {
                    context_a: rows(&c.context_a),
                    context_b: rows(&c.context_b),
                    normalization: num(c.normalization),
                    verified: verify_certificate(c, &a, &b),
                }),
            )
        }
    };
    let product_form = if args.product_form {
        Some(match lhv_feasible_product_form(&a, &b)? {
            ProductFormResult::Feasible {
                minus_marginal,
                plus_marginal,
                ..
            } => ProductForm {
                verdict: "Feasible",
                minus_marginal: Some(minus_marginal.map(num)),
                plus_marginal: Some(plus_marginal.map(num)),
            },
            ProductFormResult::NotProductForm(_) | ProductFormResult::Infeasible(_) => {
                ProductForm {
                    verdict: "Infeasible",
                    minus_marginal: None,
                    plus_marginal: None,
                }
            }
        })
    } else {
        None
    };
    let report = LhvReport {
        schema_version: SCHEMA_VERSION,
        command: "lhv",
        behavior_a: behavior_map(&a),
        behavior_b: behavior_map(&b),
        verdict,
        weights,
        certificate,
        contradiction_fraction: num(contradiction_fraction(&a, &b)),
        contradiction_fraction_reverse: num(contradiction_fraction(&b, &a)),
        product_form,
    };
    let mut rows = vec![
        vec!["verdict".to_string(), report.verdict.to_string()],
        vec![
            "contradictionFraction".into(),
            fmt(report.contradiction_fraction),
        ],
        vec![
            "contradictionFractionReverse".into(),
            fmt(report.contradiction_fraction_reverse),
        ],
    ];
    if let Some(w) = &report.weights {
        rows.extend(w.iter().map(|(k, v)| vec![format!("weight:{k}"), fmt(*v)]));
    }
    if let Some(c) = &report.certificate {
        rows.push(vec!["certificateVerified".into(), c.verified.to_string()]);
        for (prefix, ys) in [("a", &c.context_a), ("b", &c.context_b)] {
            rows.extend(
                ys.iter()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(k, v)| vec![format!("certificate:{prefix}:{k}"), fmt(*v)]),
            );
        }
        if c.normalization != 0.0 {
            rows.push(vec![
                "certificate:normalization".into(),
                fmt(c.normalization),
            ]);
        }
    }
    if let Some(p) = &report.product_form {
        rows.push(vec!["productForm".into(), p.verdict.to_string()]);
    }
    match cli.format {
        OutputFormat::Json => write_json(out, &report),
        OutputFormat::Csv => write_csv(out, &["key", "value"], &rows),
        OutputFormat::Table => write_table(out, &["key", "value"], &rows),
    }
}

#[derive(Debug, Clone, Copy)]
enum Knob {
    Splitter(usize),
    PhaseAb,
    PhaseCd,
}

fn parse_param(spec: &str) -> Result<(Vec<Wing>, Knob), CliError> {
    let (wings, name) = match spec.split_once('.') {
        Some(("minus", rest)) => (vec![Wing::Minus], rest),
        Some(("plus", rest)) => (vec![Wing::Plus], rest),
        Some(_) => return Err(CliError::user(format!("unknown parameter '{spec}'"))),
        None => (vec![Wing::Minus, Wing::Plus], spec),
    };
    let knob = match name {
        "bs1" => Knob::Splitter(0),
        "bs2" => Knob::Splitter(1),
        "bs3" => Knob::Splitter(2),
        "phase-ab" => Knob::PhaseAb,
        "phase-cd" => Knob::PhaseCd,
        _ => return Err(CliError::user(format!("unknown parameter '{spec}'"))),
    };
    Ok((wings, knob))
}

/// Grid `start + k * step` for `k = 0, 1, ...` up to `stop`; a last point
/// within 1e-9 steps of `stop` is snapped onto it.
fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(CliError::user(format!(
            "range '{spec}' is not of the form start:stop:step"
        )));
    };
    let number = |s: &str| {
        dsl::parse_number(s).map_err(|d| CliError::user(format!("range '{spec}': {}", d.message)))
    };
    let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
    if start == stop {
        return Ok(vec![start]);
    }
    let span = (stop - start) / step;
    if step == 0.0 || !span.is_finite() || span < 0.0 {
        return Err(CliError::user(format!(
            "range '{spec}': step does not lead from start to stop"
        )));
    }
    let count = (span + 1e-9).floor() as usize + 1;
    if count > MAX_GRID {
        return Err(CliError::user(format!(
            "range '{spec}' has more than {MAX_GRID} points"
        )));
    }
    Ok((0..count)
        .map(|k| {
            let v = start + k as f64 * step;
            if ((v - stop) / step).abs() <= 1e-9 {
                stop
            } else {
                v
            }
        })
        .collect())
}

fn apply_knob(
    scheme: &Scheme<f64>,
    wings: &[Wing],
    knob: Knob,
    value: f64,
) -> Result<Scheme<f64>, CliError> {
    let mut s = scheme.clone();
    for &w in wings {
        let wing = s.wing_mut(w);
        match knob {
            Knob::Splitter(i) => wing.splitters[i] = BeamSplitter::new(value)?,
            Knob::PhaseAb => wing.phases = wing.phases.with_ab(value),
            Knob::PhaseCd => wing.phases = wing.phases.with_cd(value),
        }
    }
    Ok(s)
}

fn sweep<W: Write>(
    cli: &Cli,
    reference: &SchemeArg,
    param: &str,
    range: &str,
    out: &mut W,
) -> Result<(), CliError> {
    let (wings, knob) = parse_param(param)?;
    let grid = parse_range(range)?;
    let scheme = load_scheme(&reference.scheme)?;
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&v| {
            let d = distribution(&apply_knob(&scheme, &wings, knob, v)?, cli.tolerance)?;
            Ok(SweepRow {
                value: num(v),
                p_ee: num(d.p_ee),
                p_ef: num(d.p_ef),
                p_fe: num(d.p_fe),
                p_ff: num(d.p_ff),
                gamma_total: num(d.gamma_total()),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        command: "sweep",
        scheme: scheme.name.clone(),
        param: param.to_string(),
        rows,
    };
    let header = [param, "pEE", "pEF", "pFE", "pFF", "gammaTotal"];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            [r.value, r.p_ee, r.p_ef, r.p_fe, r.p_ff, r.gamma_total]
                .into_iter()
                .map(fmt)
                .collect()
        })
        .collect();
    match cli.format {
        OutputFormat::Json => write_json(out, &report),
        OutputFormat::Csv => write_csv(out, &header, &rows),
        OutputFormat::Table => write_table(out, &header, &rows),
    }
}

fn parse_check<W: Write>(cli: &Cli, path: &Path, out: &mut W) -> Result<u8, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Environment(format!("cannot read {}: {e}", path.display())))?;
    let (scheme, diagnostics) = match std::str::from_utf8(&bytes) {
        Ok(text) => match dsl::parse_with_warnings::<f64>(text) {
            Ok(p) => (Some(p.scheme), p.warnings),
            Err(d) => (None, d),
        },
        Err(_) => (
            None,
            dsl::parse_bytes::<f64>(&bytes).err().unwrap_or_default(),
        ),
    };
    let valid = scheme.is_some();
    let source = path.display().to_string();
    let report = ParseCheckReport {
        schema_version: SCHEMA_VERSION,
        command: "parse-check",
        path: source.clone(),
        valid,
        scheme: scheme.map(|s| s.name),
        diagnostics: diagnostics.iter().map(diagnostic_out).collect(),
    };
    let rows: Vec<Vec<String>> = report
        .diagnostics
        .iter()
        .map(|d| {
            vec![
                d.line.to_string(),
                d.column.to_string(),
                d.length.to_string(),
                d.severity.to_string(),
                d.message.clone(),
            ]
        })
        .collect();
    match cli.format {
        OutputFormat::Json => write_json(out, &report)?,
        OutputFormat::Csv => write_csv(
            &mut *out,
            &["line", "column", "length", "severity", "message"],
            &rows,
        )?,
        OutputFormat::Table => {
            if let Some(name) = &report.scheme {
                writeln!(out, "{source}: ok (scheme '{name}')")?;
            }
            for d in diagnostics.iter().filter(|d| !d.is_error()) {
                writeln!(out, "{source}:{d}")?;
            }
        }
    }
    if valid {
        Ok(0)
    } else {
        Err(CliError::Diagnostics {
            origin: source,
            diagnostics: diagnostics.into_iter().filter(|d| d.is_error()).collect(),
        })
    }
}

fn diagnostic_out(d: &ParseDiagnostic) -> DiagnosticOut {
    DiagnosticOut {
        line: d.span.line,
        column: d.span.column,
        length: d.span.length,
        severity: match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        },
        message: d.message.clone(),
    }
}
