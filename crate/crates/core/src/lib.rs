pub mod classify;
pub mod davisjan;
pub mod descriptor;
pub mod intpoly;
pub mod invariants;
pub mod isosearch;
pub mod quotient;

pub use descriptor::{parse_descriptor, DescriptorError, Family, ManifoldDescriptor};
