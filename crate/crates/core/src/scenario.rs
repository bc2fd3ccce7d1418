//! Declarative engagement scenarios: JSON config in, CSV and JSON out.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elode::{orthogonality_residual, solve_el_ode, OdeConfig};
use crate::energy::{energy_compare, energy_of, infer_engagement};
use crate::error::{Error, Result};
use crate::geometry::{perp_ccw, Vec3};
use crate::guidance::{simulate_mcpn, AccelRecord, GuidanceConfig, Integrator};
use crate::kpath::{reconstruct_shadower, uniform_times, EndCondition, Engagement, KPath, CAPTURE_FRACTION};
use crate::targets::{CircularOrbit, SampledTarget, TargetModel, TpnTarget};
use crate::trajectory::{Reference, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Analytic,
    Ode,
    Guidance,
    EnergyCompare,
    Infinity,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Ode => "ode",
            Mode::Guidance => "guidance",
            Mode::EnergyCompare => "energy-compare",
            Mode::Infinity => "infinity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    ConstantVelocity { r0: [f64; 3], v: [f64; 3] },
    Circular { center: [f64; 3], radius: f64, omega: f64, phase: f64 },
    /// CSV of `t,x,y,z`, relative to the config file.
    Sampled { file: PathBuf },
    Tpn { r0: [f64; 3], v0: [f64; 3], lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartesianStart {
    pub target_position: [f64; 3],
    pub target_velocity: [f64; 3],
    pub shadower_position: [f64; 3],
    pub shadower_velocity: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndSpec {
    Open,
    Capture,
    Track,
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub trajectory: Option<String>,
    pub accelerations: Option<String>,
    pub ccls: Option<String>,
    pub baseline: Option<String>,
    pub summary: Option<String>,
}

/// Config as written; every field optional so validation can report all problems.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    mode: Option<Mode>,
    static_point: Option<[f64; 3]>,
    #[serde(default)]
    infinity: bool,
    shadower_start: Option<[f64; 3]>,
    target: Option<TargetSpec>,
    k0: Option<f64>,
    k0_dot: Option<f64>,
    initial_conditions: Option<CartesianStart>,
    end: Option<EndSpec>,
    tf: Option<f64>,
    dt: Option<f64>,
    ccl_interval: Option<f64>,
    integrator: Option<String>,
    interception_time: Option<f64>,
    output_stride: Option<usize>,
    #[serde(default)]
    outputs: OutputSpec,
}

/// How the initial ratio state is given.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Ratio { k0: f64, k0_dot: f64 },
    Cartesian(CartesianStart),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    pub static_point: Option<Vec3>,
    pub shadower_start: Option<Vec3>,
    pub target: TargetSpec,
    pub start: Start,
    pub end: EndSpec,
    pub tf: f64,
    pub dt: f64,
    pub ccl_interval: Option<f64>,
    pub integrator: Integrator,
    pub interception_time: Option<f64>,
    /// Write every n-th sample of the trajectory files.
    pub output_stride: usize,
    pub outputs: OutputSpec,
    /// Directory that relative paths in the config resolve against.
    pub base_dir: PathBuf,
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ScenarioConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    pub fn from_json(text: &str, base_dir: PathBuf) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        raw.validate(base_dir)
    }

    pub fn with_step(mut self, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt: must be positive, got {dt}")));
        }
        self.dt = dt;
        Ok(self)
    }

    pub fn static_point_or_err(&self) -> Result<Vec3> {
        self.static_point
            .ok_or_else(|| Error::InvalidInput(format!("scenario {}: needs a static_point", self.name)))
    }

    pub fn target_model(&self) -> Result<TargetModel> {
        Ok(match &self.target {
            TargetSpec::ConstantVelocity { r0, v } => TargetModel::constant_velocity(vec3(*r0), vec3(*v)),
            TargetSpec::Circular {
                center,
                radius,
                omega,
                phase,
            } => TargetModel::circular(CircularOrbit {
                center: vec3(*center),
                radius: *radius,
                omega: *omega,
                phase: *phase,
            }),
            TargetSpec::Sampled { file } => {
                TargetModel::Sampled(SampledTarget::from_path(self.base_dir.join(file))?)
            }
            TargetSpec::Tpn { r0, v0, lambda } => TargetModel::Reactive(TpnTarget {
                r0: vec3(*r0),
                v0: vec3(*v0),
                lambda: *lambda,
            }),
        })
    }

    fn output(&self, chosen: &Option<String>, suffix: &str) -> String {
        chosen.clone().unwrap_or_else(|| format!("{}_{suffix}", self.name))
    }
}

impl RawConfig {
    fn validate(self, base_dir: PathBuf) -> Result<ScenarioConfig> {
        let mut problems = Vec::new();
        let name = self.name.clone().unwrap_or_default();
        if name.is_empty() {
            problems.push("name: missing".to_string());
        } else if name.contains(['/', '\\']) {
            problems.push("name: must not contain path separators".to_string());
        }
        if self.mode.is_none() {
            problems.push("mode: missing (analytic | ode | guidance | energy-compare | infinity)".into());
        }
        if self.target.is_none() {
            problems.push("target: missing".into());
        }
        match self.tf {
            None => problems.push("tf: missing".into()),
            Some(tf) if !(tf > 0.0) || !tf.is_finite() => problems.push(format!("tf: must be positive, got {tf}")),
            _ => {}
        }
        let default_dt = if self.mode == Some(Mode::Guidance) {
            crate::guidance::DEFAULT_STEP
        } else {
            crate::elode::DEFAULT_STEP
        };
        let dt = self.dt.unwrap_or(default_dt);
        if !(dt > 0.0) || !dt.is_finite() {
            problems.push(format!("dt: must be positive, got {dt}"));
        }
        if let Some(c) = self.ccl_interval {
            if !(c >= dt) {
                problems.push(format!("ccl_interval: must be at least dt = {dt}, got {c}"));
            }
        }
        let ratio = match (self.k0, self.k0_dot) {
            (Some(k0), Some(k0_dot)) => Some((k0, k0_dot)),
            (Some(k0), None) if matches!(self.end, Some(EndSpec::Capture)) => Some((k0, f64::NAN)),
            (None, None) => None,
            (Some(_), None) => {
                problems.push("k0_dot: missing (k0 and k0_dot come together unless end = capture)".into());
                None
            }
            (None, Some(_)) => {
                problems.push("k0: missing".into());
                None
            }
        };
        let infinity = self.infinity || self.mode == Some(Mode::Infinity);
        let start = match (ratio, self.initial_conditions.clone()) {
            (Some((k0, k0_dot)), None) => Some(Start::Ratio { k0, k0_dot }),
            (None, Some(ic)) => Some(Start::Cartesian(ic)),
            (Some(_), Some(_)) => {
                problems.push("k0/k0_dot and initial_conditions: give exactly one".into());
                None
            }
            (None, None) if infinity => Some(Start::Ratio {
                k0: 1.0,
                k0_dot: f64::NAN,
            }),
            (None, None) if problems.iter().any(|p| p.starts_with("k0")) => None,
            (None, None) => {
                problems.push("k0/k0_dot or initial_conditions: one is required".into());
                None
            }
        };
        if infinity {
            if self.shadower_start.is_none() {
                problems.push("shadower_start: required for camouflage at infinity".into());
            }
            if self.static_point.is_some() {
                problems.push("static_point: not used with camouflage at infinity".into());
            }
        } else if self.static_point.is_none() && !matches!(start, Some(Start::Cartesian(_))) {
            problems.push("static_point: missing".into());
        }
        let end = self.end.unwrap_or(EndSpec::Open);
        if end == EndSpec::Track && !infinity {
            problems.push("end: track is only defined for camouflage at infinity".into());
        }
        if infinity && end == EndSpec::Open && matches!(start, Some(Start::Ratio { k0_dot, .. }) if k0_dot.is_nan()) {
            problems.push("k0_dot: required for an open-ended engagement at infinity".into());
        }
        let integrator = match self.integrator.as_deref() {
            None | Some("semi_implicit_euler") => Integrator::SemiImplicitEuler,
            Some("rk4") => Integrator::Rk4,
            Some(other) => {
                problems.push(format!("integrator: unknown `{other}` (semi_implicit_euler | rk4)"));
                Integrator::SemiImplicitEuler
            }
        };
        if self.output_stride == Some(0) {
            problems.push("output_stride: must be at least 1".into());
        }
        if let Some(mode) = self.mode {
            let tpn = matches!(self.target, Some(TargetSpec::Tpn { .. }));
            if tpn && mode != Mode::Guidance {
                problems.push("target: a TPN target only exists inside the guidance simulation".into());
            }
            let cv = matches!(self.target, Some(TargetSpec::ConstantVelocity { .. }));
            if matches!(mode, Mode::Analytic | Mode::EnergyCompare | Mode::Infinity) && self.target.is_some() && !cv {
                problems.push(format!("target: mode {} needs a constant_velocity target", mode.as_str()));
            }
            if mode == Mode::Infinity && !infinity {
                problems.push("infinity: mode infinity implies camouflage at infinity".into());
            }
            if infinity && mode != Mode::Infinity {
                problems.push(format!("mode: camouflage at infinity is solved in mode infinity, not {}", mode.as_str()));
            }
        }
        if !problems.is_empty() {
            let label = if name.is_empty() { "<unnamed>" } else { &name };
            return Err(Error::InvalidInput(format!(
                "scenario {label}: {}",
                problems.join("; ")
            )));
        }
        Ok(ScenarioConfig {
            name,
            mode: self.mode.unwrap(),
            static_point: self.static_point.map(vec3),
            shadower_start: self.shadower_start.map(vec3),
            target: self.target.unwrap(),
            start: start.unwrap(),
            end,
            tf: self.tf.unwrap(),
            dt,
            ccl_interval: self.ccl_interval,
            integrator,
            interception_time: self.interception_time,
            output_stride: self.output_stride.unwrap_or(1),
            outputs: self.outputs,
            base_dir,
        })
    }
}

/// Flat summary written as `<name>_summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub mode: String,
    pub capture_time: Option<f64>,
    pub final_speed_shadower: f64,
    #[serde(rename = "energy_J")]
    pub energy_j: f64,
    pub max_orthogonality_cos: f64,
    pub max_collinearity_dev: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    #[serde(rename = "energy_J")]
    pub energy_j: f64,
    pub final_speed: f64,
    pub interception_time: f64,
    pub interception_point: [f64; 3],
}

/// Everything a scenario run produced, before anything is written.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub summary: Summary,
    pub engagement: Engagement,
    pub kpath: Option<KPath>,
    pub trajectory: Trajectory,
    pub baseline: Option<Trajectory>,
    pub accels: Option<Vec<AccelRecord>>,
}

/// Resolves the start state into an engagement.
pub fn build_engagement(cfg: &ScenarioConfig) -> Result<Engagement> {
    let target = cfg.target_model()?;
    let end = match cfg.end {
        EndSpec::Open => EndCondition::Open,
        EndSpec::Capture => EndCondition::Capture,
        EndSpec::Track => EndCondition::Track,
    };
    if cfg.mode == Mode::Infinity {
        let start = cfg.shadower_start.expect("validated");
        let k0_dot = match cfg.start {
            Start::Ratio { k0_dot, .. } => k0_dot,
            Start::Cartesian(_) => {
                return Err(Error::InvalidInput(
                    "camouflage at infinity takes shadower_start, not initial_conditions".into(),
                ))
            }
        };
        return Engagement::infinity(start, target, k0_dot, cfg.tf, end);
    }
    let (p, k0, mut k0_dot) = match &cfg.start {
        Start::Ratio { k0, k0_dot } => (cfg.static_point_or_err()?, *k0, *k0_dot),
        Start::Cartesian(ic) => {
            let inferred = infer_engagement(
                vec3(ic.target_position),
                vec3(ic.target_velocity),
                vec3(ic.shadower_position),
                vec3(ic.shadower_velocity),
            )?;
            if let Some(p) = cfg.static_point {
                if (p - inferred.p).norm() > 1e-6 * p.norm().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "static_point {p:?} disagrees with the one implied by initial_conditions {:?}",
                        inferred.p
                    )));
                }
            }
            (inferred.p, inferred.k0, inferred.k0_dot)
        }
    };
    if k0_dot.is_nan() {
        // capture horizon fixes the rate; take it from the closed form
        let cv = target.as_constant_velocity().ok_or_else(|| {
            Error::InvalidInput("k0_dot can only be derived from a capture horizon for a constant-velocity target".into())
        })?;
        k0_dot = crate::kpath::k_finite_horizon(p, cv, k0, cfg.tf)?.k_dot(0.0)?;
    }
    Engagement::static_point(p, target, k0, k0_dot, cfg.tf, end)
}

/// Runs a scenario without touching the filesystem (other than reading a
/// sampled target track).
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let engagement = build_engagement(cfg)?;
    let mut kpath = None;
    let mut baseline = None;
    let mut accels = None;
    let mut ratio = None;
    let mut baseline_summary = None;
    let (trajectory, capture_time) = match cfg.mode {
        Mode::Analytic | Mode::Infinity => {
            let path = engagement.solve_closed_form()?;
            let end = path.capture_time().map_or(cfg.tf, |t| t.min(cfg.tf));
            let traj = reconstruct_shadower(&engagement, &path, &uniform_times(0.0, end, cfg.dt))?;
            kpath = Some(path);
            let tc = traj.capture_time(CAPTURE_FRACTION);
            (traj, tc)
        }
        Mode::Ode => {
            let p = match engagement.reference {
                Reference::StaticPoint(p) => p,
                Reference::Infinity(_) => unreachable!("validated"),
            };
            let cfg_ode = OdeConfig::new(cfg.tf).with_step(cfg.dt);
            let path = solve_el_ode(p, &engagement.target, engagement.k0, engagement.k0_dot, cfg_ode)?;
            let end = path.domain().end;
            let traj = reconstruct_shadower(&engagement, &path, &uniform_times(0.0, end, cfg.dt))?;
            kpath = Some(path);
            let tc = traj.capture_time(CAPTURE_FRACTION);
            (traj, tc)
        }
        Mode::Guidance => {
            let run = simulate_mcpn(
                &engagement,
                GuidanceConfig {
                    dt: cfg.dt,
                    integrator: cfg.integrator,
                },
            )?;
            accels = Some(run.accels);
            (run.trajectory, run.capture_time)
        }
        Mode::EnergyCompare => {
            let p = match engagement.reference {
                Reference::StaticPoint(p) => p,
                Reference::Infinity(_) => unreachable!("validated"),
            };
            let cv = engagement.target.as_constant_velocity().expect("validated");
            let cmp = energy_compare(p, cv, engagement.k0, engagement.k0_dot, cfg.dt, cfg.interception_time)?;
            ratio = Some(cmp.report.ratio);
            baseline_summary = Some(BaselineSummary {
                energy_j: cmp.report.j_baseline,
                final_speed: cmp.report.final_speed_baseline,
                interception_time: cmp.report.interception_time,
                interception_point: cmp.report.interception_point,
            });
            baseline = Some(cmp.baseline);
            let tc = cmp.optimal.capture_time(CAPTURE_FRACTION);
            (cmp.optimal, tc)
        }
    };
    let residual = orthogonality_residual(&trajectory)?;
    let summary = Summary {
        scenario: cfg.name.clone(),
        mode: cfg.mode.as_str().to_string(),
        capture_time,
        final_speed_shadower: trajectory.last().vd.norm(),
        energy_j: energy_of(&trajectory)?,
        max_orthogonality_cos: residual.max_orthogonality_cos,
        max_collinearity_dev: residual.max_collinearity_dev,
        ratio,
        baseline: baseline_summary,
    };
    Ok(ScenarioResult {
        summary,
        engagement,
        kpath,
        trajectory,
        baseline,
        accels,
    })
}

/// Files a scenario wrote.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
}

/// Runs a scenario and writes its outputs under `out_dir`.
pub fn run_and_write(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(ScenarioResult, Written)> {
    let result = run_scenario(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let mut written = Written::default();

    let path = out_dir.join(cfg.output(&cfg.outputs.trajectory, "trajectory.csv"));
    write_trajectory_csv(&result.trajectory, cfg.output_stride, File::create(&path)?)?;
    written.files.push(path);

    if let Some(base) = &result.baseline {
        let path = out_dir.join(cfg.output(&cfg.outputs.baseline, "baseline.csv"));
        write_trajectory_csv(base, cfg.output_stride, File::create(&path)?)?;
        written.files.push(path);
    }
    if let Some(accels) = &result.accels {
        let path = out_dir.join(cfg.output(&cfg.outputs.accelerations, "accel.csv"));
        write_accel_csv(accels, cfg.output_stride, File::create(&path)?)?;
        written.files.push(path);
    }
    if let Some(interval) = cfg.ccl_interval {
        let path = out_dir.join(cfg.output(&cfg.outputs.ccls, "ccls.csv"));
        let end = result.trajectory.last().t;
        export_ccls(&result.engagement, &ccl_times(end, interval), File::create(&path)?)?;
        written.files.push(path);
    }
    let path = out_dir.join(cfg.output(&cfg.outputs.summary, "summary.json"));
    let mut f = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut f, &result.summary)?;
    writeln!(f)?;
    f.flush()?;
    written.files.push(path);
    Ok((result, written))
}

/// 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.11e}")
}

pub const TRAJECTORY_HEADER: [&str; 15] = [
    "t", "dx", "dy", "dz", "tx", "ty", "tz", "k", "k_dot", "vdx", "vdy", "vdz", "a_r", "a_theta", "J_cum",
];

/// Shadower acceleration split along the constraint line (`a_r`) and across it.
fn split_accel(reference: &Reference, rt: &Vec3, ad: &Vec3) -> (f64, f64) {
    let axis = match reference {
        Reference::StaticPoint(p) => rt - p,
        Reference::Infinity(e) => *e,
    };
    let Some(u) = axis.try_normalize(0.0) else {
        return (f64::NAN, f64::NAN);
    };
    let a_r = ad.dot(&u);
    let a_theta = if u.z == 0.0 && ad.z == 0.0 {
        ad.dot(&perp_ccw(&u))
    } else {
        (ad - a_r * u).norm()
    };
    (a_r, a_theta)
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, stride: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    let n = traj.len();
    for (i, s) in traj.samples.iter().enumerate() {
        if i % stride != 0 && i + 1 != n {
            continue;
        }
        let (a_r, a_theta) = split_accel(&traj.reference, &s.rt, &s.ad);
        let row = [
            s.t,
            s.rd.x,
            s.rd.y,
            s.rd.z,
            s.rt.x,
            s.rt.y,
            s.rt.z,
            s.k,
            s.k_dot,
            s.vd.x,
            s.vd.y,
            s.vd.z,
            a_r,
            a_theta,
            traj.cumulative_energy[i],
        ];
        w.write_record(row.iter().map(|x| fmt_num(*x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_accel_csv<W: Write>(accels: &[AccelRecord], stride: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "shadower_a_r", "shadower_a_theta", "target_a_r", "target_a_theta"])?;
    let n = accels.len();
    for (i, r) in accels.iter().enumerate() {
        if i % stride != 0 && i + 1 != n {
            continue;
        }
        let row = [r.t, r.shadower.a_r, r.shadower.a_theta, r.target.a_r, r.target.a_theta];
        w.write_record(row.iter().map(|x| fmt_num(*x)))?;
    }
    w.flush()?;
    Ok(())
}

/// `0, interval, 2·interval, …` up to `end`.
pub fn ccl_times(end: f64, interval: f64) -> Vec<f64> {
    let n = (end / interval + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * interval).collect()
}

/// One constraint-line segment `P → r_T(t)` per time.
pub fn export_ccls<W: Write>(engagement: &Engagement, times: &[f64], out: W) -> Result<()> {
    let p = match engagement.reference {
        Reference::StaticPoint(p) => p,
        Reference::Infinity(_) => {
            return Err(Error::InvalidInput(
                "constraint lines at infinity are all parallel to e; plot the direction e instead of exporting CCLs".into(),
            ))
        }
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "px", "py", "pz", "tx", "ty", "tz"])?;
    for &t in times {
        let rt = engagement.target.eval(t)?.position;
        let row = [t, p.x, p.y, p.z, rt.x, rt.y, rt.z];
        w.write_record(row.iter().map(|x| fmt_num(*x)))?;
    }
    w.flush()?;
    Ok(())
}
