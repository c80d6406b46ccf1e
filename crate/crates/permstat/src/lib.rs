//! Two-descent permutation statistics and a bijection of `S_n` carrying
//! `(maj₂, d̃es₂, inv₂)` to `(maj − exc, des, exc)`, with its inverse, exact
//! generating-polynomial verification and diagram rendering.

pub mod distribution;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod perm;
pub mod render;
pub mod stats;
pub mod verify;

pub use distribution::{joint_distribution, oracle_inverse_table, verify_identity, Polynomial3};
pub use error::{Error, Result};
pub use forward::{phi, phi_trace};
pub use inverse::{phi_inverse, phi_inverse_trace};
pub use perm::{enumerate, parse_permutation, Permutation};
pub use render::{render_linear, render_planar, Diagram, DiagramKind, Format};
pub use stats::{stat_vector, StatTriple, StatVector};
pub use verify::{run_check, Check, CheckReport};
