//! Exact symbolic engine for interaction-graph machines.
//!
//! Graphings live over `Z × [0,1]^N`. Every set is a finite union of rational
//! boxes and every edge is realised by a rigid transformation of that space.
//! Machines are run against word representations and decided by a test
//! family; multihead automata are translated to machines and back.
//!
//! All arithmetic is exact; there is no floating point in the core.

pub mod automata;
pub mod cells;
pub mod encodings;
pub mod error;
pub mod execution;
pub mod graphings;
pub mod machines;
pub mod measurement;
pub mod microcosm;
pub mod rational;
pub mod space;
pub mod words;

pub use error::{Error, Result};
pub use rational::Q;
