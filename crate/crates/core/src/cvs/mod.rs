//! The discrete CVS bijection between labeled plane trees and rooted pointed
//! quadrangulations.

pub mod bijection;
pub mod enumerate;
pub mod quad;
pub mod scaling;
pub mod tree;

pub use bijection::{cvs_forward, cvs_forward_embedded, cvs_inverse};
pub use quad::Quadrangulation;
pub use scaling::scaling_profile;
pub use tree::{sample_uniform, LabeledPlaneTree};
