//! Row-wise feature map from a planar trajectory to a constraint path, and
//! the transpose of its Jacobian.

use serde::{Deserialize, Serialize};

use crate::dsl::ParsedConstraint;
use crate::error::{Error, Result};
use crate::logic::Path;
use crate::loss::GradMatrix;

/// Guard below which a distance gradient is treated as zero.
pub const DISTANCE_EPS: f64 = 1e-9;

/// Sequence of planar points, one per time-step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<[f64; 2]>,
}

impl Trajectory {
    pub fn new(points: Vec<[f64; 2]>) -> Self {
        Trajectory { points }
    }

    pub fn zeros(n: usize) -> Self {
        Trajectory {
            points: vec![[0.0; 2]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    /// One coordinate of the point: 0 for x, 1 for y.
    Coord(usize),
    /// Euclidean distance from the point to a fixed target.
    DistanceTo([f64; 2]),
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSpec {
    pub features: Vec<Feature>,
}

impl FeatureSpec {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("feature list is empty".into()));
        }
        if let Some(Feature::Coord(axis)) = features
            .iter()
            .find(|f| matches!(f, Feature::Coord(a) if *a > 1))
        {
            return Err(Error::InvalidArgument(format!(
                "coordinate axis {axis} is not 0 or 1"
            )));
        }
        Ok(FeatureSpec { features })
    }

    /// Trajectory features followed by one constant column per binding of
    /// `pc`, in binding order.
    pub fn with_constants(trajectory_features: &[Feature], pc: &ParsedConstraint) -> Result<Self> {
        if pc.state_width() != trajectory_features.len() {
            return Err(Error::InvalidArgument(format!(
                "constraint reads {} trajectory features but {} are defined",
                pc.state_width(),
                trajectory_features.len()
            )));
        }
        let mut features = trajectory_features.to_vec();
        features.extend(pc.bindings.iter().map(|b| Feature::Constant(b.value)));
        FeatureSpec::new(features)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

fn distance(q: [f64; 2], o: [f64; 2]) -> f64 {
    (q[0] - o[0]).hypot(q[1] - o[1])
}

/// Path whose row `i` holds every feature evaluated at point `i`.
pub fn apply_g(q: &Trajectory, spec: &FeatureSpec) -> Path {
    let k = spec.len();
    let mut values = Vec::with_capacity(q.len() * k);
    for &point in &q.points {
        values.extend(spec.features.iter().map(|f| match *f {
            Feature::Coord(axis) => point[axis],
            Feature::DistanceTo(o) => distance(point, o),
            Feature::Constant(v) => v,
        }));
    }
    Path::from_flat(k, values).expect("row-major values fill every row")
}

/// Pulls a path gradient back onto the trajectory: `Jᵀ·dP`, row by row.
pub fn backprop_g(q: &Trajectory, spec: &FeatureSpec, dp: &GradMatrix) -> Result<Vec<[f64; 2]>> {
    if dp.rows() != q.len() || dp.cols() != spec.len() {
        return Err(Error::DimensionMismatch {
            expected_rows: q.len(),
            expected_cols: spec.len(),
            found_rows: dp.rows(),
            found_cols: dp.cols(),
        });
    }
    let mut out = vec![[0.0; 2]; q.len()];
    for (i, (point, acc)) in q.points.iter().zip(out.iter_mut()).enumerate() {
        for (k, feature) in spec.features.iter().enumerate() {
            let g = dp[(i, k)];
            match *feature {
                Feature::Coord(axis) => acc[axis] += g,
                Feature::DistanceTo(o) => {
                    let d = distance(*point, o);
                    if d > DISTANCE_EPS {
                        acc[0] += g * (point[0] - o[0]) / d;
                        acc[1] += g * (point[1] - o[1]) / d;
                    }
                }
                Feature::Constant(_) => {}
            }
        }
    }
    Ok(out)
}
