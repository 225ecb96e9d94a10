pub mod char_invariants;
pub mod duality;
pub mod error;
pub mod lambda_poly;
pub mod limit_systems;
pub mod module_core;
pub mod padic_linalg;
