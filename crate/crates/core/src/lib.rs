pub mod base_manifold;
pub mod error;
pub mod exprlang;
pub mod forms;
pub mod jet;
pub mod obata;
pub mod quatlin;
pub mod scenario;
pub mod surface2d;
pub mod tangent_bundle;
