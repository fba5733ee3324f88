//! Head-shape checking of unboxed constructors, with a trace-annotated
//! normalizer that detects non-terminating type unfolding on the fly.

pub mod calculus;
pub mod measure;
pub mod shapes;
pub mod decls;
pub mod cppmacro;
pub mod oracle;
pub mod cli;
