//! Scenario-driven command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure (including an oracle deviation
//! above threshold), 2 scenario parse error, 3 dynamical instability.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use quadlind::bath::BathSpec;
use quadlind::lindblad::LindbladModel;
use quadlind::moments::{DriftMatrix, EffectiveHamiltonian};
use quadlind::nambu::{NambuError, QuadraticSystem};
use quadlind::scenario::{Scenario, ScenarioError};
use quadlind::{ep, fock, linalg, lindblad, moments, nambu, reduction};

#[derive(Parser)]
#[command(
    name = "quadlind",
    about = "Master-equation construction and exceptional-point analysis for open quadratic bosonic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeKind {
    Local,
    Global,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    Bare,
    Dressed,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Output path (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Normal-mode decomposition: dressed frequencies, ground-state shift,
    /// and the symplectic transform.
    Diagonalize(CommonArgs),
    /// First-moment drift matrix entries and eigenvalues (CSV).
    Drift {
        #[command(flatten)]
        common: CommonArgs,
        /// Master-equation construction.
        #[arg(long, value_enum, default_value = "global")]
        me: MeKind,
        /// Basis the drift is reported in.
        #[arg(long, value_enum, default_value = "bare")]
        basis: BasisArg,
    },
    /// Adiabatically eliminate fast modes and report the reduced effective
    /// Hamiltonian (JSON).
    Eliminate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "global")]
        me: MeKind,
        #[arg(long, value_enum, default_value = "bare")]
        basis: BasisArg,
        /// Comma-separated fast mode indices (in the chosen basis).
        #[arg(long, value_delimiter = ',', required = true)]
        fast: Vec<usize>,
    },
    /// Sweep the scenario's declared parameter, reporting the spectrum at
    /// every point (CSV) plus detected exceptional points (JSON; written to
    /// stdout when --output captures the CSV, to stderr otherwise).
    EpScan {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "global")]
        me: MeKind,
        #[arg(long, value_enum, default_value = "bare")]
        basis: BasisArg,
        /// Fast modes to eliminate before the spectral analysis.
        #[arg(long, value_delimiter = ',')]
        eliminate: Vec<usize>,
        /// Override the sweep range as from:to:points.
        #[arg(long)]
        range: Option<String>,
    },
    /// Validate the drift against brute-force density-matrix evolution in a
    /// truncated Fock space; nonzero exit if the deviation exceeds 1e-6.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "global")]
        me: MeKind,
        /// Per-mode Fock cutoff.
        #[arg(long, default_value = "6")]
        cutoff: usize,
        /// Comparison horizon (default 5 / max rate).
        #[arg(long)]
        t: Option<f64>,
        /// Integrator step (default: accuracy-budget heuristic).
        #[arg(long)]
        dt: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify_error(&e))
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Nambu(#[from] NambuError),
    #[error(transparent)]
    Lindblad(#[from] lindblad::LindbladError),
    #[error(transparent)]
    Moments(#[from] moments::MomentsError),
    #[error(transparent)]
    Reduction(#[from] reduction::ReductionError),
    #[error(transparent)]
    Ep(#[from] ep::EpError),
    #[error(transparent)]
    Fock(#[from] fock::FockError),
    #[error("{0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn classify_error(e: &CliError) -> u8 {
    match e {
        CliError::Scenario(ScenarioError::System(NambuError::Instability(_))) => 3,
        CliError::Scenario(_) => 2,
        CliError::Nambu(NambuError::Instability(_)) => 3,
        CliError::Lindblad(lindblad::LindbladError::Nambu(NambuError::Instability(_))) => 3,
        CliError::Usage(_) => 2,
        _ => 1,
    }
}

fn write_out(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// 17 significant digits, deterministic across runs.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn cpx_json(c: Complex64) -> serde_json::Value {
    serde_json::json!({"im": c.im, "re": c.re})
}

fn pretty_sorted(v: serde_json::Value) -> String {
    // serde_json's Value objects preserve insertion order; rebuilding the
    // maps as BTreeMaps sorts the keys.
    fn sort(v: serde_json::Value) -> serde_json::Value {
        match v {
            serde_json::Value::Object(m) => serde_json::Value::Object(
                m.into_iter()
                    .map(|(k, val)| (k, sort(val)))
                    .collect::<std::collections::BTreeMap<_, _>>()
                    .into_iter()
                    .collect(),
            ),
            serde_json::Value::Array(a) => {
                serde_json::Value::Array(a.into_iter().map(sort).collect())
            }
            other => other,
        }
    }
    serde_json::to_string_pretty(&sort(v)).expect("json")
}

fn build_model(
    sys: &QuadraticSystem,
    baths: &[BathSpec],
    me: MeKind,
) -> Result<LindbladModel, CliError> {
    match me {
        MeKind::Local => Ok(lindblad::build_local(sys, baths)?),
        MeKind::Global => match lindblad::build_global(sys, baths) {
            Ok(m) => Ok(m),
            Err(lindblad::LindbladError::DegenerateSpectrum) => {
                Ok(lindblad::build_global_degenerate(sys, baths)?)
            }
            Err(e) => Err(e.into()),
        },
    }
}

fn build_drift(sc: &Scenario, me: MeKind, basis: BasisArg) -> Result<DriftMatrix, CliError> {
    let sys = sc.system()?;
    let mut model = build_model(&sys, &sc.baths, me)?;
    if let Some(frame) = &sc.frame {
        model = model.with_frame(frame.clone())?;
    }
    let d = moments::drift(&model)?;
    match basis {
        BasisArg::Bare => Ok(d),
        BasisArg::Dressed => {
            let bt = nambu::diagonalize(&sys)?;
            Ok(moments::to_dressed(&d, &bt)?)
        }
    }
}

fn cmd_diagonalize(common: &CommonArgs) -> Result<ExitCode, CliError> {
    let sc = Scenario::from_file(&common.scenario)?;
    let sys = sc.system()?;
    let bt = nambu::diagonalize(&sys)?;
    let n = sys.n_modes;
    let transform: Vec<Vec<serde_json::Value>> = (0..2 * n)
        .map(|i| (0..2 * n).map(|j| cpx_json(bt.t[[i, j]])).collect())
        .collect();
    let report = serde_json::json!({
        "dressed_frequencies": bt.dressed_freq,
        "ground_shift": bt.ground_shift,
        "stable": true,
        "transform": transform,
    });
    write_out(&common.output, &(pretty_sorted(report) + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_drift(common: &CommonArgs, me: MeKind, basis: BasisArg) -> Result<ExitCode, CliError> {
    let sc = Scenario::from_file(&common.scenario)?;
    let d = build_drift(&sc, me, basis)?;
    let mut csv = String::from("kind,row,col,re,im\r\n");
    let n = d.m.nrows();
    for i in 0..n {
        for j in 0..n {
            let c = d.m[[i, j]];
            csv.push_str(&format!("entry,{i},{j},{},{}\r\n", fmt(c.re), fmt(c.im)));
        }
    }
    let (eigs, _) = linalg::eig(&d.m);
    let mut sorted: Vec<Complex64> = eigs.to_vec();
    sorted.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (k, e) in sorted.iter().enumerate() {
        csv.push_str(&format!("eigenvalue,{k},0,{},{}\r\n", fmt(e.re), fmt(e.im)));
    }
    write_out(&common.output, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn reduction_json(red: &reduction::Reduction) -> serde_json::Value {
    let h = &red.hamiltonian.h;
    let n = h.nrows();
    let entries: Vec<Vec<serde_json::Value>> =
        (0..n).map(|i| (0..n).map(|j| cpx_json(h[[i, j]])).collect()).collect();
    serde_json::json!({
        "fast_block_condition": red.fast_block_condition,
        "hamiltonian": entries,
        "mode_labels": red.hamiltonian.mode_labels,
        "separation_witness": red.separation_witness,
    })
}

fn cmd_eliminate(
    common: &CommonArgs,
    me: MeKind,
    basis: BasisArg,
    fast: &[usize],
) -> Result<ExitCode, CliError> {
    let sc = Scenario::from_file(&common.scenario)?;
    let d = build_drift(&sc, me, basis)?;
    let red = reduction::eliminate(&d, fast)?;
    write_out(&common.output, &(pretty_sorted(reduction_json(&red)) + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_range(text: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("--range must be from:to:points, got '{text}'")));
    }
    let from: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad range start '{}'", parts[0])))?;
    let to: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad range end '{}'", parts[1])))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad range point count '{}'", parts[2])))?;
    Ok((from, to, points))
}

fn cmd_ep_scan(
    common: &CommonArgs,
    me: MeKind,
    basis: BasisArg,
    fast: &[usize],
    range: &Option<String>,
) -> Result<ExitCode, CliError> {
    let sc = Scenario::from_file(&common.scenario)?;
    let sweep = sc
        .sweep
        .clone()
        .ok_or_else(|| CliError::Usage("scenario declares no sweep".into()))?;
    let (from, to, points) = match range {
        Some(r) => parse_range(r)?,
        None => (sweep.from, sweep.to, sweep.points),
    };
    // ep_scan needs an ascending range; remember if the file sweeps downhill.
    let (lo, hi, flip) = if from <= to { (from, to, false) } else { (to, from, true) };

    let hamiltonian_at = |x: f64| -> Result<EffectiveHamiltonian, CliError> {
        let at = sc.at_sweep_value(x)?;
        let d = build_drift(&at, me, basis)?;
        if fast.is_empty() {
            let n = d.n_modes();
            Ok(moments::effective_hamiltonian(&d, &(0..n).collect::<Vec<_>>())?)
        } else {
            Ok(reduction::eliminate(&d, fast)?.hamiltonian)
        }
    };
    // Surface scenario/model errors once, eagerly, instead of panicking
    // inside the scan closure.
    hamiltonian_at(lo)?;
    let family = |x: f64| hamiltonian_at(x).expect("family evaluation");
    let (mut points_out, mut reports) = ep::ep_scan(family, (lo, hi), points)?;
    if flip {
        points_out.reverse();
        for r in &mut reports {
            std::mem::swap(&mut r.symmetry_side_low, &mut r.symmetry_side_high);
        }
        reports.reverse();
    }

    let n_eig = points_out.first().map(|p| p.eigenvalues.len()).unwrap_or(0);
    let mut csv = String::from("param");
    for k in 0..n_eig {
        csv.push_str(&format!(",eig{k}_re,eig{k}_im"));
    }
    csv.push_str(",min_gap,coalescence,class\r\n");
    for p in &points_out {
        csv.push_str(&fmt(p.param_value));
        let mut eigs = p.eigenvalues.clone();
        eigs.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for e in &eigs {
            csv.push_str(&format!(",{},{}", fmt(e.re), fmt(e.im)));
        }
        csv.push_str(&format!(
            ",{},{},{}\r\n",
            fmt(p.min_gap),
            fmt(p.coalescence),
            p.classification.as_str()
        ));
    }

    let report_items: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            serde_json::json!({
                "discriminant_residual": r.discriminant_residual,
                "location": r.location,
                "refined": r.refined,
                "symmetry_side_high": r.symmetry_side_high.as_str(),
                "symmetry_side_low": r.symmetry_side_low.as_str(),
            })
        })
        .collect();
    let report = pretty_sorted(serde_json::json!({ "exceptional_points": report_items })) + "\n";

    write_out(&common.output, &csv)?;
    if common.output.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(
    common: &CommonArgs,
    me: MeKind,
    cutoff: usize,
    t: Option<f64>,
    dt: Option<f64>,
) -> Result<ExitCode, CliError> {
    let sc = Scenario::from_file(&common.scenario)?;
    let sys = sc.system()?;
    // The oracle works in the lab frame; any declared rotating frame is
    // irrelevant to the comparison and is ignored here.
    let model = build_model(&sys, &sc.baths, me)?;
    let d = moments::drift(&model)?;

    let n = sys.n_modes;
    let cutoffs = vec![cutoff; n];
    let rep = fock::FockRep::new(&model, &cutoffs)?;
    let max_rate = model
        .jumps
        .iter()
        .map(|j| j.rate)
        .chain(model.cross_blocks.iter().map(|b| linalg::max_abs(&b.rate_matrix)))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let t_max = t.unwrap_or(5.0 / max_rate);
    let step = dt.unwrap_or_else(|| {
        ((1e-9 / (rep.scale * t_max)).powf(0.25) / rep.scale).min(0.1 / rep.scale)
    });

    let alphas: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(0.12 + 0.03 * i as f64, -0.07 + 0.05 * i as f64))
        .collect();
    let rho0 = fock::DensityMatrix::coherent(&rep, &alphas)?;
    let mut v0 = quadlind::CVec::zeros(2 * n);
    for i in 0..n {
        let a = nambu::NambuVector::annihilation(i, n);
        let ad = nambu::NambuVector::creation(i, n);
        v0[i] = fock::expect_linear(&rep, &rho0, &a)?;
        v0[i + n] = fock::expect_linear(&rep, &rho0, &ad)?;
    }

    let samples = 5;
    let mut rho = rho0;
    let mut worst: f64 = 0.0;
    for k in 1..=samples {
        let tk = t_max * k as f64 / samples as f64;
        rho = fock::evolve(&rep, &rho, t_max / samples as f64, step)?;
        let v = moments::propagate(&d, &v0, tk)?;
        for i in 0..n {
            let a = nambu::NambuVector::annihilation(i, n);
            let got = fock::expect_linear(&rep, &rho, &a)?;
            worst = worst.max((got - v[i]).norm());
        }
    }

    let passed = worst <= 1e-6;
    let report = serde_json::json!({
        "cutoff": cutoff,
        "dt": step,
        "max_deviation": worst,
        "passed": passed,
        "t_max": t_max,
        "threshold": 1e-6,
    });
    write_out(&common.output, &(pretty_sorted(report) + "\n"))?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Diagonalize(common) => cmd_diagonalize(&common),
        Command::Drift { common, me, basis } => cmd_drift(&common, me, basis),
        Command::Eliminate { common, me, basis, fast } => {
            cmd_eliminate(&common, me, basis, &fast)
        }
        Command::EpScan { common, me, basis, eliminate, range } => {
            cmd_ep_scan(&common, me, basis, &eliminate, &range)
        }
        Command::Oracle { common, me, cutoff, t, dt } => {
            cmd_oracle(&common, me, cutoff, t, dt)
        }
    }
}
