use std::f64::consts::TAU;
use std::path::PathBuf;

use berryline::berryphase::{self, MabClass, NodeSet};
use berryline::cilocate::{locate_ci, CIResult};
use berryline::comoving::{
    ac_loop_phase, adiabatic_transport, adiabaticity_ratio, band_state, frame_equivalence_fidelity,
    integrate_spin, ACPhase, TransportPhases,
};
use berryline::eigenpath::DEFAULT_GAP_TOL;
use berryline::jahnteller::{dalpha_dtheta, jt_point_data, nodal_map, ring_loop, Band, CIRCLE_CLEARANCE};
use berryline::ringspectrum::{jt_ring_problem, spectrum, Barrier, Boundary};
use berryline::{
    ACConfig, Chart, CiOptions, DiscretizedPath, FluxParity, Frame, JTParams, JahnTellerField,
    NuclearTrajectory, RingProblem, SearchRect,
};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{parse_enum, parse_num, parse_path, parse_point, parse_tuple, RadiusGrid, Settings};
use crate::output::{csv, emit, json, num, FORMAT_VERSION};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandArg {
    Lower,
    Upper,
}

impl From<BandArg> for Band {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::Lower => Band::Lower,
            BandArg::Upper => Band::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

impl From<ParityArg> for FluxParity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Even => FluxParity::Even,
            ParityArg::Odd => FluxParity::Odd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Lab,
    Comoving,
}

impl From<FrameArg> for Frame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Lab => Frame::Lab,
            FrameArg::Comoving => Frame::Comoving,
        }
    }
}

/// Coupling constants shared by every model command.
#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ModelArgs {
    /// Linear coupling k [default: 1]
    #[arg(long)]
    k: Option<f64>,
    /// Quadratic coupling g [default: 1]
    #[arg(long)]
    g: Option<f64>,
}

impl ModelArgs {
    fn params(&self, s: &Settings) -> Result<JTParams, CliError> {
        let k = s.or(self.k, "k", parse_num, 1.0)?;
        let g = s.or(self.g, "g", parse_num, 1.0)?;
        JTParams::new(k, g).map_err(|e| CliError::Config(e.into()))
    }
}

fn positive(key: &'static str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: "must be positive and finite".to_string(),
        })
    }
}

fn at_least(key: &'static str, value: usize, min: usize) -> Result<usize, CliError> {
    if value >= min {
        Ok(value)
    } else {
        Err(CliError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: format!("must be at least {min}"),
        })
    }
}

fn out_dir(flag: Option<PathBuf>, s: &Settings) -> Result<Option<PathBuf>, CliError> {
    s.get(flag, "out-dir", parse_path)
}

fn numeric(e: impl Into<berryline::Error>) -> CliError {
    CliError::Numeric(e.into())
}

// nodal-map

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct NodalMapArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Radii: `start:stop:step` sweep or comma-separated list [default: 0.25:5:0.25]
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    /// Samples per circle [default: 2048]
    #[arg(long)]
    theta_samples: Option<usize>,
    /// Write nodal_map.csv and degeneracies.csv here instead of printing
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn nodal_map_cmd(a: NodalMapArgs, s: &Settings) -> Result<(), CliError> {
    let p = a.model.params(s)?;
    let grid = match s.text(a.r, "r", RadiusGrid::parse)? {
        Some(grid) => grid,
        None => RadiusGrid::parse("0.25:5:0.25").expect("default grid is valid"),
    };
    let theta_samples = at_least(
        "theta-samples",
        s.or(a.theta_samples, "theta-samples", parse_num, 2048)?,
        8,
    )?;
    let dir = out_dir(a.out_dir, s)?;
    s.finish("nodal-map")?;

    let radii = match grid {
        RadiusGrid::List(r) => r,
        RadiusGrid::Range(r) => match p.degeneracy_circle() {
            None => r,
            Some(circle) => r
                .into_iter()
                .filter(|&r| {
                    let on = (r - circle).abs() < CIRCLE_CLEARANCE;
                    if on {
                        eprintln!("note: skipping r = {r} on the degeneracy circle r = 2k/g = {circle}");
                    }
                    !on
                })
                .collect(),
        },
    };
    if radii.is_empty() {
        return Err(CliError::InvalidValue {
            key: "r".to_string(),
            value: String::new(),
            reason: "no radii left to evaluate".to_string(),
        });
    }
    let map = nodal_map(&p, &radii, theta_samples).map_err(CliError::Numeric)?;

    let nodes = csv(
        &["r", "theta_node", "source"],
        map.rows
            .iter()
            .map(|row| vec![num(row.r), num(row.theta_node), row.source.as_str().to_string()]),
    );
    let degeneracies = csv(
        &["x", "y", "r", "theta"],
        map.degeneracies.iter().map(|d| {
            let (x, y) = d.cartesian();
            vec![num(x), num(y), num(d.r), d.theta.map(num).unwrap_or_default()]
        }),
    );
    emit(dir.as_deref(), "nodal_map.csv", &nodes)?;
    if let Some(dir) = dir.as_deref() {
        emit(Some(dir), "degeneracies.csv", &degeneracies)?;
    }
    Ok(())
}

// berry

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BerryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Loop radius [default: 1]
    #[arg(long)]
    r: Option<f64>,
    /// Loop center `x,y`; omit for a circle about the origin
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Segments around the loop [default: 1024]
    #[arg(long)]
    samples: Option<usize>,
    /// Adiabatic band followed around the loop [default: lower]
    #[arg(long, value_enum)]
    band: Option<BandArg>,
    /// Write berry.json here instead of printing
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryReport {
    pub format_version: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub node_angles: Vec<f64>,
    pub geometric_phase: f64,
    pub mab_class: MabClass,
    pub holonomy: i8,
}

/// Circle about an arbitrary center, retried at half-step offsets if a
/// sample lands on a node.
fn offset_loop(
    p: &JTParams,
    center: (f64, f64),
    r: f64,
    samples: usize,
    band: Band,
) -> Result<(berryphase::LoopAnalysis, NodeSet), berryline::Error> {
    let field = JahnTellerField::new(*p, Chart::Cartesian);
    let run = |start: f64| {
        let path = DiscretizedPath::cartesian_circle(center, r, samples, start)?;
        berryphase::analyze_loop(
            &field,
            &path,
            band.index(),
            DEFAULT_GAP_TOL,
            berryphase::DEFAULT_ZERO_TOL,
        )
    };
    let analysis = match run(0.0) {
        Err(berryline::Error::Phase(berryphase::PhaseError::SampleOnNode { .. })) => {
            run(0.5 * TAU / samples as f64)?
        }
        other => other?,
    };
    let refined = berryphase::refine_nodes(&field, &analysis.branch, &analysis.nodes, 1e-12)?;
    Ok((analysis, refined))
}

pub fn berry_cmd(a: BerryArgs, s: &Settings) -> Result<(), CliError> {
    let p = a.model.params(s)?;
    let r = positive("r", s.or(a.r, "r", parse_num, 1.0)?)?;
    let center = s.text(a.center, "center", parse_point)?;
    let samples = at_least("samples", s.or(a.samples, "samples", parse_num, 1024)?, 3)?;
    let band: Band = s.or(a.band, "band", parse_enum, BandArg::Lower)?.into();
    let dir = out_dir(a.out_dir, s)?;
    s.finish("berry")?;

    let (analysis, refined) = match center {
        None => {
            let ring = ring_loop(&p, r, samples, band).map_err(CliError::Numeric)?;
            (ring.analysis, ring.refined)
        }
        Some(c) => offset_loop(&p, c, r, samples, band).map_err(CliError::Numeric)?,
    };
    let report = BerryReport {
        format_version: FORMAT_VERSION.to_string(),
        k: refined.count(),
        node_angles: refined.angles.iter().map(|t| t.rem_euclid(TAU)).collect(),
        geometric_phase: analysis.berry.geometric_phase,
        mab_class: berryphase::classify_mab(&refined),
        holonomy: analysis.holonomy,
    };
    emit(dir.as_deref(), "berry.json", &(json(&report) + "\n"))
}

// spectrum

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    /// Free ring (zero potential) instead of a Jahn-Teller sheet
    #[arg(long)]
    flat: bool,
    #[command(flatten)]
    model: ModelArgs,
    /// Ring radius r0 [default: 1]
    #[arg(long)]
    r0: Option<f64>,
    /// Adiabatic sheet supplying the potential [default: lower]
    #[arg(long, value_enum)]
    band: Option<BandArg>,
    /// Seam parity; required with --flat, taken from the node count otherwise
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    /// Grid points around the ring [default: 1024]
    #[arg(long = "M")]
    m: Option<usize>,
    /// Number of levels [default: 6]
    #[arg(long)]
    levels: Option<usize>,
    /// Impenetrable barrier on the angular interval `start:end`
    #[arg(long, allow_hyphen_values = true)]
    barrier: Option<String>,
    /// Write spectrum.csv here instead of printing
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SpectrumMeta {
    format_version: &'static str,
    model: &'static str,
    r0: f64,
    #[serde(rename = "M")]
    m: usize,
    dimension: usize,
    boundary: Boundary,
    parity: FluxParity,
    barrier: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<&'static str>,
}

pub fn spectrum_cmd(a: SpectrumArgs, s: &Settings) -> Result<(), CliError> {
    let flat = s.switch(a.flat, "flat")?;
    let r0 = positive("r0", s.or(a.r0, "r0", parse_num, 1.0)?)?;
    let m = s.or(a.m, "M", parse_num, 1024)?;
    let levels = at_least("levels", s.or(a.levels, "levels", parse_num, 6)?, 1)?;
    let barrier = s.text(a.barrier, "barrier", |t| parse_tuple(t, 2))?;
    let barrier_interval = match barrier {
        Some(v) if v[1] <= v[0] => {
            return Err(CliError::InvalidValue {
                key: "barrier".to_string(),
                value: format!("{}:{}", v[0], v[1]),
                reason: "end must exceed start".to_string(),
            })
        }
        Some(v) => Some([v[0], v[1]]),
        None => None,
    };
    let wall = barrier_interval
        .map(|[start, end]| Barrier::new(start, end - start))
        .transpose()
        .map_err(numeric)?;
    let parity = s.get(a.parity, "parity", parse_enum)?.map(FluxParity::from);

    let (problem, meta_model) = if flat {
        let parity = parity.ok_or(CliError::MissingValue { key: "parity" })?;
        (
            RingProblem::flat(r0, 0.0, m, parity, wall).map_err(numeric)?,
            None,
        )
    } else {
        let p = a.model.params(s)?;
        let band: BandArg = s.or(a.band, "band", parse_enum, BandArg::Lower)?;
        let mut problem = jt_ring_problem(&p, r0, band.into(), m, wall).map_err(CliError::Numeric)?;
        if let Some(parity) = parity {
            problem.flux_parity = parity;
        }
        let name = match band {
            BandArg::Lower => "lower",
            BandArg::Upper => "upper",
        };
        (problem, Some((p, name)))
    };
    let dir = out_dir(a.out_dir, s)?;
    s.finish("spectrum")?;

    let result = spectrum(&problem, levels).map_err(numeric)?;
    let meta = SpectrumMeta {
        format_version: FORMAT_VERSION,
        model: if flat { "flat" } else { "jahn-teller" },
        r0,
        m,
        dimension: result.dimension,
        boundary: result.boundary,
        parity: result.parity,
        barrier: barrier_interval,
        k: meta_model.map(|(p, _)| p.k()),
        g: meta_model.map(|(p, _)| p.g()),
        band: meta_model.map(|(_, b)| b),
    };
    let parity = result.parity.as_str();
    let body = csv(
        &["index", "energy", "degeneracy_flag", "parity"],
        result
            .levels
            .iter()
            .zip(&result.degeneracy_flags)
            .enumerate()
            .map(|(i, (e, flag))| vec![i.to_string(), num(*e), flag.to_string(), parity.to_string()]),
    );
    emit(
        dir.as_deref(),
        "spectrum.csv",
        &format!("# {}\n{body}", json(&meta)),
    )
}

// locate-ci

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct LocateCiArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Search rectangle `x_min:x_max:y_min:y_max` [default: -3:3:-3:3]
    #[arg(long, allow_hyphen_values = true)]
    rect: Option<String>,
    /// Adiabatic band whose gap is searched [default: lower]
    #[arg(long, value_enum)]
    band: Option<BandArg>,
    /// Gap below which a point counts as degenerate [default: 1e-8]
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Leaf cell diagonal [default: 1e-3]
    #[arg(long)]
    spatial_tol: Option<f64>,
    /// Deepest subdivision level [default: 24]
    #[arg(long)]
    max_depth: Option<usize>,
    /// Levels always subdivided before pruning [default: 4]
    #[arg(long)]
    min_depth: Option<usize>,
    /// Samples along each cell edge for the loop sign [default: 16]
    #[arg(long)]
    samples_per_edge: Option<usize>,
    /// Write ci.json here instead of printing
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiReport {
    pub format_version: String,
    #[serde(flatten)]
    pub result: CIResult,
}

pub fn locate_ci_cmd(a: LocateCiArgs, s: &Settings) -> Result<(), CliError> {
    let p = a.model.params(s)?;
    let rect = s
        .text(a.rect, "rect", |t| parse_tuple(t, 4))?
        .unwrap_or(vec![-3.0, 3.0, -3.0, 3.0]);
    let band: Band = s.or(a.band, "band", parse_enum, BandArg::Lower)?.into();
    let defaults = CiOptions::default();
    let opts = CiOptions {
        gap_tol: positive(
            "gap-tol",
            s.or(a.gap_tol, "gap-tol", parse_num, defaults.gap_tol)?,
        )?,
        spatial_tol: positive(
            "spatial-tol",
            s.or(a.spatial_tol, "spatial-tol", parse_num, defaults.spatial_tol)?,
        )?,
        max_depth: s.or(a.max_depth, "max-depth", parse_num, defaults.max_depth)?,
        min_depth: s.or(a.min_depth, "min-depth", parse_num, defaults.min_depth)?,
        samples_per_edge: s.or(
            a.samples_per_edge,
            "samples-per-edge",
            parse_num,
            defaults.samples_per_edge,
        )?,
        ..defaults
    };
    let dir = out_dir(a.out_dir, s)?;
    s.finish("locate-ci")?;

    let rect = SearchRect::new(rect[0], rect[1], rect[2], rect[3], band.index())
        .map_err(|e| CliError::Config(e.into()))?;
    let field = JahnTellerField::new(p, Chart::Cartesian);
    let result = locate_ci(&field, &rect, &opts).map_err(|e| match e {
        berryline::Error::ConicalSearch(berryline::cilocate::CiError::InvalidOptions { .. }) => {
            CliError::Config(e)
        }
        e => CliError::Numeric(e),
    })?;
    let report = CiReport {
        format_version: FORMAT_VERSION.to_string(),
        result,
    };
    emit(dir.as_deref(), "ci.json", &(json(&report) + "\n"))
}

// spin

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpinArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Orbit radius [default: 1]
    #[arg(long)]
    r: Option<f64>,
    /// Time for one revolution [default: 200]
    #[arg(long)]
    period: Option<f64>,
    /// Revolutions to integrate [default: 1]
    #[arg(long)]
    revolutions: Option<f64>,
    /// Starting angle [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    /// Time steps; chosen from the step-size limit when omitted
    #[arg(long)]
    steps: Option<usize>,
    /// Frame of the written time series [default: comoving]
    #[arg(long, value_enum)]
    frame: Option<FrameArg>,
    /// Adiabatic band the spin starts in [default: lower]
    #[arg(long, value_enum)]
    initial: Option<BandArg>,
    /// Keep every n-th sample in spin.csv [default: 1]
    #[arg(long)]
    stride: Option<usize>,
    /// Write spin.csv and spin_summary.json here; otherwise the CSV goes to
    /// stdout and the summary to stderr
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSummary {
    pub format_version: String,
    pub k: f64,
    pub g: f64,
    pub r: f64,
    pub period: f64,
    pub duration: f64,
    pub steps: usize,
    pub frame: Frame,
    pub adiabaticity_ratio: f64,
    pub final_norm: f64,
    pub frame_fidelity: f64,
    /// Present for a whole number of revolutions.
    pub transport: Option<TransportPhases>,
    pub ac: ACPhase,
}

/// Steps keeping `dt · max(2Δ𝓔, |α̇|)` at half the propagator's limit.
fn auto_steps(p: &JTParams, r: f64, omega: f64, duration: f64) -> Result<usize, CliError> {
    let mut rate = 0.0f64;
    for j in 0..4096 {
        let theta = TAU * j as f64 / 4096.0;
        let d = jt_point_data(p, r, theta).map_err(numeric)?;
        let da = dalpha_dtheta(p, r, theta).map_err(numeric)?;
        rate = rate.max(2.0 * d.delta_e).max((da * omega).abs());
    }
    Ok(((duration * rate / 0.05).ceil() as usize).max(16))
}

pub fn spin_cmd(a: SpinArgs, s: &Settings) -> Result<(), CliError> {
    let p = a.model.params(s)?;
    let r = positive("r", s.or(a.r, "r", parse_num, 1.0)?)?;
    let period = positive("period", s.or(a.period, "period", parse_num, 200.0)?)?;
    let revolutions = positive("revolutions", s.or(a.revolutions, "revolutions", parse_num, 1.0)?)?;
    let theta0: f64 = s.or(a.theta0, "theta0", parse_num, 0.0)?;
    let steps = s.get(a.steps, "steps", parse_num)?;
    let frame: Frame = s.or(a.frame, "frame", parse_enum, FrameArg::Comoving)?.into();
    let initial: Band = s.or(a.initial, "initial", parse_enum, BandArg::Lower)?.into();
    let stride = at_least("stride", s.or(a.stride, "stride", parse_num, 1)?, 1)?;
    let dir = out_dir(a.out_dir, s)?;
    s.finish("spin")?;

    let omega = TAU / period;
    let duration = revolutions * period;
    let steps = match steps {
        Some(n) => at_least("steps", n, 1)?,
        None => auto_steps(&p, r, omega, duration)?,
    };
    let traj = NuclearTrajectory::circular(r, theta0, omega, duration, steps).map_err(numeric)?;
    let psi0 = band_state(initial);
    let evolution = integrate_spin(&p, &traj, psi0, frame).map_err(numeric)?;
    let whole = revolutions.fract() == 0.0;
    let transport = if whole {
        Some(adiabatic_transport(&p, &traj, initial).map_err(numeric)?)
    } else {
        None
    };
    let field = JahnTellerField::new(p, Chart::Polar);
    let ac_path = DiscretizedPath::polar_circle(r, 4096).map_err(numeric)?;
    let summary = SpinSummary {
        format_version: FORMAT_VERSION.to_string(),
        k: p.k(),
        g: p.g(),
        r,
        period,
        duration,
        steps,
        frame,
        adiabaticity_ratio: adiabaticity_ratio(&p, &traj).map_err(numeric)?,
        final_norm: *evolution.norms.last().expect("trajectory has samples"),
        frame_fidelity: frame_equivalence_fidelity(&p, &traj, psi0).map_err(numeric)?,
        transport,
        ac: ac_loop_phase(&field, &ac_path, &ACConfig::default()).map_err(numeric)?,
    };

    let last = evolution.times.len() - 1;
    let series = csv(
        &["t", "sx", "sy", "sz", "norm", "sy_variance"],
        (0..=last).filter(|j| j % stride == 0 || *j == last).map(|j| {
            let [x, y, z] = evolution.expectations[j];
            vec![
                num(evolution.times[j]),
                num(x),
                num(y),
                num(z),
                num(evolution.norms[j]),
                num(evolution.sigma_y_variance[j]),
            ]
        }),
    );
    emit(dir.as_deref(), "spin.csv", &series)?;
    let summary = json(&summary) + "\n";
    match dir.as_deref() {
        Some(d) => emit(Some(d), "spin_summary.json", &summary),
        None => {
            eprint!("{summary}");
            Ok(())
        }
    }
}
