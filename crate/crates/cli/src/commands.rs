use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use qmeter::catalog::{DeviceFamily, DeviceSpecParams};
use qmeter::estimator::{
    best_post_estimate, best_pre_estimate, check_bound, domain_boundary, estimate_pair, estimate_pairs, DomainDim,
};
use qmeter::haar::{haar_state_from, mc_g_post, mc_g_pre, mc_operation_fidelity, RngStream};
use qmeter::measurement::completeness_defect;
use qmeter::{Complex64, Measurement, QuantumState};

use crate::error::CliError;
use crate::files::{load_spec, load_state, to_json_string, to_pairs, write_json, DeviceSpecFile};
use crate::report::{
    CurveRecord, DomainRecord, EstimateRecord, EstimatesRecord, McValue, MonteCarloRecord, ReportRecord,
    ShotRecord, SimulationRecord, ValidationRecord,
};

#[derive(Debug, Parser)]
#[command(name = "qmeter", version, about = "Generalized measurements: optimal state estimates and mean fidelities")]
pub struct Cli {
    /// Emit one machine-readable JSON record instead of human-readable text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a device spec is complete.
    Validate {
        path: PathBuf,
        /// Completeness tolerance on ||sum_s M_s^dag M_s - 1||_F.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Best pre- and post-measurement state estimates.
    Estimate {
        path: PathBuf,
        /// 1-based outcome; all outcomes when omitted.
        #[arg(long)]
        outcome: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Mean fidelities G_post, G_pre, F and the tradeoff check.
    Fidelities {
        path: PathBuf,
        /// Cross-check against a Haar Monte Carlo run with this many samples.
        #[arg(long)]
        montecarlo: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Sample outcomes and collapsed states.
    Simulate {
        path: PathBuf,
        /// State file with `amplitudes` as [re, im] pairs.
        #[arg(long, conflicts_with = "haar", required_unless_present = "haar")]
        state: Option<PathBuf>,
        /// Draw a fresh Haar-random input state for every shot.
        #[arg(long)]
        haar: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        shots: usize,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Boundary of the (G_post, F) domain as CSV.
    Domain {
        /// Dimensions, comma separated; `inf` for the large-d limit.
        #[arg(long = "d", value_delimiter = ',', default_value = "2,4,8,16,inf")]
        dims: Vec<String>,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Write the spec of a built-in device family.
    Catalog {
        /// projective | identity | unsharp | random | tetrahedron
        family: String,
        #[arg(long = "d", default_value_t = 2)]
        dim: usize,
        /// Sharpness of the unsharp qubit device.
        #[arg(long)]
        lambda: Option<f64>,
        /// Outcome count of the random device.
        #[arg(long = "n", default_value_t = 2)]
        outcomes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Haar-random post-states for the tetrahedron device.
        #[arg(long)]
        post_seed: Option<u64>,
        /// Haar-random unitary kick per outcome.
        #[arg(long)]
        kick_seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs one command, writing its output to `out`. Returns the exit code for
/// runs that produced output; errors carry their own code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Validate { path, tolerance } => validate(path, *tolerance, cli.json, out),
        Command::Estimate {
            path,
            outcome,
            tolerance,
        } => estimate(path, *outcome, *tolerance, cli.json, out),
        Command::Fidelities {
            path,
            montecarlo,
            seed,
            tolerance,
        } => fidelities(path, *montecarlo, *seed, *tolerance, cli.json, out),
        Command::Simulate {
            path,
            state,
            haar,
            seed,
            shots,
            tolerance,
        } => {
            let input = match (state, haar) {
                (Some(p), _) => Input::Fixed(load_state(p)?),
                (None, true) => Input::Haar,
                (None, false) => return Err(CliError::Parse("either --state or --haar is required".into())),
            };
            simulate(path, input, *seed, *shots, *tolerance, cli.json, out)
        }
        Command::Domain { dims, steps } => domain(dims, *steps, cli.json, out),
        Command::Catalog {
            family,
            dim,
            lambda,
            outcomes,
            seed,
            post_seed,
            kick_seed,
            out: path,
        } => {
            let family: DeviceFamily = family.parse()?;
            let lambda = match (family, lambda) {
                (DeviceFamily::Unsharp, None) => {
                    return Err(CliError::Domain("the unsharp family requires --lambda".into()))
                }
                (_, l) => l.unwrap_or(0.0),
            };
            let params = DeviceSpecParams {
                family,
                dim: *dim,
                lambda,
                outcomes: *outcomes,
                seed: *seed,
                post_seed: *post_seed,
                kick_seed: *kick_seed,
            };
            catalog(&params, path.as_deref(), out)
        }
    }
}

fn load_device(path: &Path, tolerance: Option<f64>) -> Result<Measurement, CliError> {
    load_spec(path)?.to_measurement(tolerance)
}

fn fmt_state(v: &[Complex64]) -> String {
    v.iter()
        .map(|z| format!("{:+.16e}{:+.16e}i", z.re, z.im))
        .collect::<Vec<_>>()
        .join(" ")
}

fn validate(path: &Path, tolerance: Option<f64>, json: bool, out: &mut dyn Write) -> Result<u8, CliError> {
    let spec = load_spec(path)?;
    let tolerance = spec.effective_tolerance(tolerance)?;
    let defect = completeness_defect(&spec.matrices()?, spec.dim)?;
    let valid = defect <= tolerance;
    let record = ValidationRecord {
        valid,
        dim: spec.dim,
        outcomes: spec.kraus.len(),
        defect,
        tolerance,
    };
    if json {
        write_json(&record, out)?;
    } else {
        writeln!(out, "valid = {valid}")?;
        writeln!(out, "dim = {}", record.dim)?;
        writeln!(out, "outcomes = {}", record.outcomes)?;
        writeln!(out, "defect = {defect:e}")?;
        writeln!(out, "tolerance = {tolerance:e}")?;
    }
    Ok(if valid { 0 } else { 2 })
}

fn write_estimate_human(r: &EstimateRecord, pair_pre: &[Complex64], pair_post: &[Complex64], out: &mut dyn Write) -> std::io::Result<()> {
    match &r.label {
        Some(label) => writeln!(out, "outcome {} ({label})", r.outcome)?,
        None => writeln!(out, "outcome {}", r.outcome)?,
    }
    writeln!(out, "  a_max = {}", r.a_max)?;
    writeln!(out, "  chi_pre = {}", fmt_state(pair_pre))?;
    writeln!(out, "  chi_post = {}", fmt_state(pair_post))?;
    writeln!(out, "  degenerate = {}", r.degenerate)
}

fn estimate(
    path: &Path,
    outcome: Option<usize>,
    tolerance: Option<f64>,
    json: bool,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let m = load_device(path, tolerance)?;
    let pairs = match outcome {
        Some(s) => vec![estimate_pair(&m, s)?],
        None => estimate_pairs(&m)?,
    };
    let records: Vec<EstimateRecord> = pairs.iter().map(|p| EstimateRecord::new(p, &m)).collect();
    if json {
        write_json(&EstimatesRecord { estimates: records }, out)?;
    } else {
        for (r, p) in records.iter().zip(&pairs) {
            write_estimate_human(r, p.chi_pre.amplitudes(), p.chi_post.amplitudes(), out)?;
        }
    }
    Ok(0)
}

fn fidelities(
    path: &Path,
    montecarlo: Option<usize>,
    seed: u64,
    tolerance: Option<f64>,
    json: bool,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let m = load_device(path, tolerance)?;
    let report = check_bound(&m);
    let pairs = estimate_pairs(&m)?;
    let mut record = ReportRecord::new(&report, &m, &pairs);
    if let Some(samples) = montecarlo {
        let post: Vec<QuantumState> = (1..=m.outcomes()).map(|s| best_post_estimate(&m, s)).collect::<Result<_, _>>()?;
        let pre: Vec<QuantumState> = (1..=m.outcomes()).map(|s| best_pre_estimate(&m, s)).collect::<Result<_, _>>()?;
        let g_post = McValue::new(&mc_g_post(&m, &post, samples, seed)?, report.g_post);
        let g_pre = McValue::new(&mc_g_pre(&m, &pre, samples, seed)?, report.g_pre);
        let f_op = McValue::new(&mc_operation_fidelity(&m, samples, seed)?, report.f_op);
        let agree = g_post.agrees && g_pre.agrees && f_op.agrees;
        record.montecarlo = Some(MonteCarloRecord {
            samples,
            seed,
            g_post,
            g_pre,
            f_op,
            agree,
        });
    }

    if json {
        write_json(&record, out)?;
        return Ok(0);
    }
    writeln!(out, "dim = {}", record.dim)?;
    writeln!(out, "outcomes = {}", record.outcomes)?;
    writeln!(out, "g_post = {}", record.g_post)?;
    writeln!(out, "g_pre = {}", record.g_pre)?;
    writeln!(out, "f_op = {}", record.f_op)?;
    writeln!(out, "bound_lhs = {}", record.bound_lhs)?;
    writeln!(out, "bound_rhs = {}", record.bound_rhs)?;
    writeln!(out, "bound_satisfied = {}", record.bound_satisfied)?;
    writeln!(out, "within_display_window = {}", record.within_display_window)?;
    for (r, p) in record.estimates.iter().zip(&pairs) {
        write_estimate_human(r, p.chi_pre.amplitudes(), p.chi_post.amplitudes(), out)?;
    }
    if let Some(mc) = &record.montecarlo {
        writeln!(out, "montecarlo.samples = {}", mc.samples)?;
        writeln!(out, "montecarlo.seed = {}", mc.seed)?;
        for (name, v) in [("g_post", &mc.g_post), ("g_pre", &mc.g_pre), ("f_op", &mc.f_op)] {
            writeln!(
                out,
                "montecarlo.{name} = {} +/- {} (analytic {}, agrees = {})",
                v.mean, v.std_error, v.analytic, v.agrees
            )?;
        }
        writeln!(out, "montecarlo.agree = {}", mc.agree)?;
    }
    Ok(0)
}

enum Input {
    Fixed(QuantumState),
    Haar,
}

fn simulate(
    path: &Path,
    input: Input,
    seed: u64,
    shots: usize,
    tolerance: Option<f64>,
    json: bool,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let m = load_device(path, tolerance)?;
    if let Input::Fixed(psi) = &input {
        if psi.dim() != m.dim() {
            return Err(CliError::Domain(format!(
                "state has dimension {}, device has dimension {}",
                psi.dim(),
                m.dim()
            )));
        }
    }
    let mut counts = vec![0usize; m.outcomes()];
    let mut records = Vec::with_capacity(shots);
    for shot in 1..=shots {
        let mut rng = RngStream::new(seed, shot as u64).rng();
        let psi = match &input {
            Input::Fixed(psi) => psi.clone(),
            Input::Haar => haar_state_from(m.dim(), &mut rng),
        };
        let (s, post) = m.sample_outcome(&psi, &mut rng)?;
        counts[s - 1] += 1;
        records.push(ShotRecord {
            shot,
            outcome: s,
            input: to_pairs(psi.canonical().amplitudes()),
            post_state: to_pairs(post.canonical().amplitudes()),
        });
    }
    let total = shots.max(1) as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();

    if json {
        write_json(
            &SimulationRecord {
                shots: records,
                counts,
                frequencies,
            },
            out,
        )?;
        return Ok(0);
    }
    writeln!(out, "shot,outcome,post_state")?;
    for r in &records {
        let amps: Vec<Complex64> = r.post_state.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        writeln!(out, "{},{},{}", r.shot, r.outcome, fmt_state(&amps))?;
    }
    writeln!(out)?;
    writeln!(out, "outcome,count,frequency")?;
    for (i, (c, f)) in counts.iter().zip(&frequencies).enumerate() {
        writeln!(out, "{},{c},{f}", i + 1)?;
    }
    Ok(0)
}

pub fn parse_domain_dim(token: &str) -> Result<DomainDim, CliError> {
    let t = token.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(DomainDim::Infinite);
    }
    match t.parse::<usize>() {
        Ok(d) if d >= 2 => Ok(DomainDim::Finite(d)),
        _ => Err(CliError::Domain(format!("bad dimension `{t}`: expected an integer >= 2 or `inf`"))),
    }
}

fn domain(dims: &[String], steps: usize, json: bool, out: &mut dyn Write) -> Result<u8, CliError> {
    let parsed = dims.iter().map(|t| parse_domain_dim(t)).collect::<Result<Vec<_>, _>>()?;
    let mut curves = Vec::with_capacity(parsed.len());
    for dim in parsed {
        let points = domain_boundary(dim, steps)?;
        curves.push(CurveRecord {
            d: match dim {
                DomainDim::Finite(d) => d.to_string(),
                DomainDim::Infinite => "inf".into(),
            },
            analytic_limit: dim == DomainDim::Infinite,
            points: points.iter().map(|p| [p.g_post, p.max_f]).collect(),
        });
    }
    if json {
        write_json(&DomainRecord { curves }, out)?;
        return Ok(0);
    }
    let mut csv = String::from("d,g_post,max_f\n");
    for c in &curves {
        for [g, f] in &c.points {
            csv.push_str(&format!("{},{g:?},{f:?}\n", c.d));
        }
    }
    out.write_all(csv.as_bytes())?;
    Ok(0)
}

fn catalog(params: &DeviceSpecParams, path: Option<&Path>, out: &mut dyn Write) -> Result<u8, CliError> {
    let m = params.build()?;
    let text = to_json_string(&DeviceSpecFile::from_measurement(&m));
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        })?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}
