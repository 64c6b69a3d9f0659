pub mod averaging;
pub mod crystal;
pub mod error;
pub mod exact;
pub mod io;
pub mod nvmorph;
pub mod oracle;
pub mod par;
pub mod trace;
pub mod unionfind;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
