//! Constrained trajectory fitting: a noisy spline demonstrator, a squared
//! imitation loss, the weighted constraint loss, and Adam on the waypoints.

mod output;
mod spline;

use std::fmt;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dsl::{parse_with_base, pretty, ParsedConstraint};
use crate::error::{Error, Result};
use crate::featmap::{apply_g, backprop_g, Feature, FeatureSpec, Trajectory};
use crate::loss::CompiledConstraint;
use crate::soft::Gamma;

pub use output::{plot_svg, write_outputs};
use spline::NaturalSpline;

/// Standard deviation of the demonstrator's per-coordinate noise.
pub const DEMO_NOISE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Test {
    Avoid,
    Patrol,
    Until,
    Compound,
}

impl Test {
    pub const ALL: [Test; 4] = [Test::Avoid, Test::Patrol, Test::Until, Test::Compound];

    pub fn name(self) -> &'static str {
        match self {
            Test::Avoid => "avoid",
            Test::Patrol => "patrol",
            Test::Until => "until",
            Test::Compound => "compound",
        }
    }

    /// Constraint text shipped for this test.
    pub fn constraint_text(self) -> &'static str {
        match self {
            Test::Avoid => include_str!("../../experiments/avoid.ltl"),
            Test::Patrol => include_str!("../../experiments/patrol.ltl"),
            Test::Until => include_str!("../../experiments/until.ltl"),
            Test::Compound => include_str!("../../experiments/compound.ltl"),
        }
    }

    /// Trajectory features, in the column order the constraint text uses.
    pub fn features(self) -> Vec<Feature> {
        match self {
            Test::Avoid => vec![Feature::DistanceTo([0.4, 0.4])],
            Test::Patrol => vec![
                Feature::DistanceTo([0.2, 0.4]),
                Feature::DistanceTo([0.85, 0.6]),
            ],
            Test::Until => vec![Feature::Coord(1), Feature::Coord(0)],
            Test::Compound => vec![
                Feature::DistanceTo([0.5, 0.5]),
                Feature::DistanceTo([0.7, 0.5]),
                Feature::Coord(1),
            ],
        }
    }

    /// Spline knots of the demonstrator, starting at the origin.
    pub fn control_points(self) -> Vec<[f64; 2]> {
        match self {
            Test::Avoid => vec![[0.0, 0.0], [0.3, 0.38], [0.55, 0.5], [1.0, 0.9]],
            Test::Patrol => vec![[0.0, 0.0], [0.15, 0.27], [0.55, 0.55], [0.8, 0.7], [1.0, 0.9]],
            Test::Until => vec![[0.0, 0.0], [0.3, 0.3], [0.55, 0.5], [0.8, 0.8], [1.0, 1.0]],
            Test::Compound => vec![[0.0, 0.0], [0.4, 0.45], [0.75, 0.6], [0.9, 0.85], [1.0, 0.85]],
        }
    }
}

impl fmt::Display for Test {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Test {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Test::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown test {s:?}")))
    }
}

/// Everything a training run depends on. Serialized as the experiment
/// config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub test: Test,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Constraint text file; the test's shipped constraint when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_file: Option<PathBuf>,
    /// Trajectory features; the test's own when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<Feature>>,
    /// Demonstrator spline knots; the test's own when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_points: Option<Vec<[f64; 2]>>,
}

fn default_gamma() -> f64 {
    0.005
}
fn default_eta() -> f64 {
    1.0
}
fn default_epochs() -> usize {
    200
}
fn default_learning_rate() -> f64 {
    1e-3
}
fn default_n() -> usize {
    100
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(test: Test) -> Self {
        ExperimentConfig {
            test,
            gamma: default_gamma(),
            eta: default_eta(),
            epochs: default_epochs(),
            learning_rate: default_learning_rate(),
            seed: 0,
            n: default_n(),
            output_dir: default_output_dir(),
            constraint_file: None,
            features: None,
            control_points: None,
        }
    }

    /// Reads a JSON config. A relative `constraint_file` is resolved against
    /// the directory holding the config.
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)?;
        if let (Some(file), Some(dir)) = (&config.constraint_file, path.parent()) {
            if file.is_relative() {
                config.constraint_file = Some(dir.join(file));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        Gamma(self.gamma).require_soft()?;
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("n must be at least 2, got {}", self.n)));
        }
        if self.control_points.as_ref().is_some_and(|c| c.len() < 2) {
            return Err(Error::InvalidArgument("at least two control points are needed".into()));
        }
        Ok(())
    }

    pub fn constraint_text(&self) -> Result<String> {
        match &self.constraint_file {
            Some(file) => Ok(std::fs::read_to_string(file)?),
            None => Ok(self.test.constraint_text().to_string()),
        }
    }

    pub fn trajectory_features(&self) -> Vec<Feature> {
        self.features.clone().unwrap_or_else(|| self.test.features())
    }

    pub fn knots(&self) -> Vec<[f64; 2]> {
        self.control_points.clone().unwrap_or_else(|| self.test.control_points())
    }

    /// Parses the constraint with its constants placed after the trajectory
    /// features, and the matching feature map.
    pub fn problem(&self) -> Result<(ParsedConstraint, FeatureSpec)> {
        let features = self.trajectory_features();
        let pc = parse_with_base(&self.constraint_text()?, features.len())?;
        let spec = FeatureSpec::with_constants(&features, &pc)?;
        Ok((pc, spec))
    }
}

/// Demonstrator for one of the named tests.
pub fn gen_demonstrator(test: Test, n: usize, seed: u64) -> Trajectory {
    demonstrator_from_knots(&test.control_points(), n, seed)
}

/// `n` evenly spaced samples of the natural spline through `knots`, each
/// coordinate perturbed by independent Gaussian noise.
pub fn demonstrator_from_knots(knots: &[[f64; 2]], n: usize, seed: u64) -> Trajectory {
    assert!(n >= 2 && knots.len() >= 2);
    let xs: Vec<f64> = knots.iter().map(|k| k[0]).collect();
    let ys: Vec<f64> = knots.iter().map(|k| k[1]).collect();
    let (sx, sy) = (NaturalSpline::new(&xs), NaturalSpline::new(&ys));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, DEMO_NOISE).expect("valid deviation");
    let points = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            [sx.at(t) + noise.sample(&mut rng), sy.at(t) + noise.sample(&mut rng)]
        })
        .collect();
    Trajectory::new(points)
}

/// Mean squared distance between corresponding points, and its gradient
/// with respect to `q`.
pub fn imitation_loss(q: &Trajectory, d: &Trajectory) -> Result<(f64, Vec<[f64; 2]>)> {
    if q.len() != d.len() || q.is_empty() {
        return Err(Error::DimensionMismatch {
            expected_rows: d.len(),
            expected_cols: 2,
            found_rows: q.len(),
            found_cols: 2,
        });
    }
    let n = q.len() as f64;
    let mut total = 0.0;
    let grad = q
        .points
        .iter()
        .zip(&d.points)
        .map(|(a, b)| {
            let r = [a[0] - b[0], a[1] - b[1]];
            total += r[0] * r[0] + r[1] * r[1];
            [2.0 * r[0] / n, 2.0 * r[1] / n]
        })
        .collect();
    Ok((total / n, grad))
}

/// Loss parts at one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub imitation: f64,
    pub constraint: f64,
    /// `imitation + eta * constraint`.
    pub total: f64,
    pub grad: Vec<[f64; 2]>,
}

/// The combined objective with the constraint compiled once.
#[derive(Debug, Clone)]
pub struct Objective {
    demo: Trajectory,
    compiled: CompiledConstraint,
    spec: FeatureSpec,
    gamma: Gamma,
    eta: f64,
}

impl Objective {
    pub fn new(demo: Trajectory, pc: &ParsedConstraint, spec: FeatureSpec, gamma: Gamma, eta: f64) -> Result<Self> {
        let gamma = gamma.require_soft()?;
        let compiled = CompiledConstraint::new(&pc.ast, spec.len())?;
        Ok(Objective {
            demo,
            compiled,
            spec,
            gamma,
            eta,
        })
    }

    pub fn evaluate(&self, q: &Trajectory) -> Result<LossBreakdown> {
        let (imitation, mut grad) = imitation_loss(q, &self.demo)?;
        let p = apply_g(q, &self.spec);
        let (constraint, dp) = self.compiled.loss_and_grad(&p, self.gamma)?;
        if self.eta != 0.0 {
            for (g, c) in grad.iter_mut().zip(backprop_g(q, &self.spec, &dp)?) {
                g[0] += self.eta * c[0];
                g[1] += self.eta * c[1];
            }
        }
        Ok(LossBreakdown {
            imitation,
            constraint,
            total: imitation + self.eta * constraint,
            grad,
        })
    }

    /// Hard evaluation of the constraint on `g(q)`.
    pub fn satisfied(&self, q: &Trajectory) -> Result<bool> {
        self.compiled.eval(&apply_g(q, &self.spec))
    }
}

pub fn total_loss_and_grad(
    q: &Trajectory,
    d: &Trajectory,
    pc: &ParsedConstraint,
    spec: &FeatureSpec,
    gamma: Gamma,
    eta: f64,
) -> Result<LossBreakdown> {
    Objective::new(d.clone(), pc, spec.clone(), gamma, eta)?.evaluate(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![[0.0; 2]; n],
            v: vec![[0.0; 2]; n],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected Adam update of `q` in place.
    pub fn step(&mut self, q: &mut Trajectory, grad: &[[f64; 2]], lr: f64) -> Result<()> {
        if grad.len() != q.len() || self.m.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected_rows: q.len(),
                expected_cols: 2,
                found_rows: grad.len(),
                found_cols: 2,
            });
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in q.points.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            for a in 0..2 {
                m[a] = self.beta1 * m[a] + (1.0 - self.beta1) * g[a];
                v[a] = self.beta2 * v[a] + (1.0 - self.beta2) * g[a] * g[a];
                p[a] -= lr * (m[a] / c1) / ((v[a] / c2).sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// Per-epoch losses, measured before that epoch's update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub imitation: f64,
    pub constraint: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub config: ExperimentConfig,
    pub constraint: String,
    pub demonstrator: Trajectory,
    pub trajectory: Trajectory,
    pub series: Vec<EpochLoss>,
    pub final_imitation: f64,
    pub final_constraint: f64,
    pub final_total: f64,
    pub satisfied: bool,
    pub wall_time: Duration,
    pc: ParsedConstraint,
    spec: FeatureSpec,
}

impl TrainResult {
    pub fn parsed_constraint(&self) -> &ParsedConstraint {
        &self.pc
    }

    pub fn feature_spec(&self) -> &FeatureSpec {
        &self.spec
    }
}

/// Fits a waypoint matrix, initialised at the demonstrator, to the combined
/// objective. With `eta = 0` this is the unconstrained baseline.
pub fn train(config: &ExperimentConfig) -> Result<TrainResult> {
    config.validate()?;
    let start = Instant::now();
    let (pc, spec) = config.problem()?;
    let demo = demonstrator_from_knots(&config.knots(), config.n, config.seed);
    let objective = Objective::new(demo.clone(), &pc, spec.clone(), Gamma(config.gamma), config.eta)?;

    let mut q = demo.clone();
    let mut adam = AdamState::new(q.len());
    let mut series = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let b = objective.evaluate(&q)?;
        series.push(EpochLoss {
            epoch,
            imitation: b.imitation,
            constraint: b.constraint,
            total: b.total,
        });
        adam.step(&mut q, &b.grad, config.learning_rate)?;
    }
    let last = objective.evaluate(&q)?;
    let satisfied = objective.satisfied(&q)?;
    Ok(TrainResult {
        config: config.clone(),
        constraint: pretty(&pc),
        demonstrator: demo,
        trajectory: q,
        series,
        final_imitation: last.imitation,
        final_constraint: last.constraint,
        final_total: last.total,
        satisfied,
        wall_time: start.elapsed(),
        pc,
        spec,
    })
}
