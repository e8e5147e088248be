pub mod certificates;
pub mod channel;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod sdp;
pub mod su2;

pub use error::{Error, Result};
