//! Simulation and verification laboratory for noncommutative laws of large
//! numbers: random walks and ergodic cocycles on concrete metric spaces with
//! isometric group actions, drift estimation, horofunction limits, shadow
//! intersections, and Lyapunov spectra of matrix cocycles.

pub mod error;
pub mod horo;
pub mod lln;
pub mod shadows;
pub mod linalg;
pub mod matrixcocycle;
pub mod report;
pub mod rng;
pub mod spaces;
pub mod walks;

pub use error::{Error, Result};
pub use horo::{BoundaryDirection, Horofunction};
pub use spaces::{IsometryElement, PointedSpace, SpaceKind, SpacePoint};
pub use walks::{CocycleDriver, IncrementLaw, Trajectory};
