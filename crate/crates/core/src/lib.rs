pub mod analysis;
pub mod cli;
pub mod config;
pub mod dhw;
pub mod field;
pub mod io;
pub mod ode;
pub mod semiclassical;
pub mod sweep;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
