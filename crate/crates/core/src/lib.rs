//! Lit-up segment (LitS) descriptors for 2D and 3D point clouds.
//!
//! A center point `p` is modelled as a ball of radius `r_p = λ·r_Q`; every
//! neighbor at distance at least `r_p` lights up an open arc of directions on
//! the ball's boundary. The regular LitS is the indicator of the union of those
//! arcs and the cumulative LitS counts how many arcs contain each direction.
//! Both are stored as [`circular_fn::StepFnS1`] values.

pub mod circular_fn;
pub mod descriptors;
pub mod error;
pub mod frames;
pub mod lits2d;
pub mod lits3d;
pub mod pcio;
pub mod surroundedness;
pub mod transform3d;

pub use circular_fn::{Angle, AngularInterval, StepFnS1, EPS_ANGLE};
pub use error::{LitsError, Result};
pub use lits2d::{LitSParams, Neighborhood2D, PolarNeighbor};
pub use lits3d::{FrameNeighbor, Neighborhood3D};

