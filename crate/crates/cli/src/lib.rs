//! Command-line layer over `wigmaj-core`: versioned JSON inputs, CSV and
//! manifest outputs, figure bundles and the regression corpus.

pub mod cli;
pub mod corpus;
pub mod figures;
pub mod io;
pub mod par;
pub mod profile;

pub use cli::{run, Cli};
