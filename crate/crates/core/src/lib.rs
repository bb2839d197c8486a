//! Differentiable loss functions for finite-trace linear temporal logic
//! constraints, with a small training harness for 2-D trajectories.
//!
//! ```
//! use ltlf_loss::{eval, grad_l, loss_l, parse, soft::Gamma, Path};
//!
//! let pc = parse("G (0.1 <= s[0])")?;
//! let p = pc.bind(&Path::from_rows(&[[0.3], [0.05], [0.2]])?)?;
//! assert!(!eval(&pc.ast, &p)?);
//! let l = loss_l(&pc.ast, &p, Gamma(0.01))?;
//! let g = grad_l(&pc.ast, &p, Gamma(0.01))?;
//! assert!(l > 0.0 && g.row(1)[0] < 0.0);
//! # Ok::<(), ltlf_loss::Error>(())
//! ```

pub mod cli;
pub mod dsl;
pub mod error;
pub mod featmap;
pub mod gradcheck;
pub mod logic;
pub mod loss;
pub mod pathfile;
mod plan;
pub mod soft;
pub mod trainer;

pub use dsl::{parse, parse_with_base, pretty, ConstBinding, ParsedConstraint};
pub use error::{Error, Operator, Result};
pub use featmap::{apply_g, backprop_g, Feature, FeatureSpec, Trajectory};
pub use logic::{eval, not_constraint, validate, Comp, Constraint, Path, StateIndex};
pub use loss::{
    grad_l, loss_dl, loss_l, soft_depth, soundness_probe, update_path, CompiledConstraint,
    GradMatrix,
};
pub use soft::Gamma;
