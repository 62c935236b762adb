pub mod diagnostics;
pub mod estimators;
pub mod linalg;
pub mod pattern;
pub mod patterns;
pub mod weight;
