//! Jet-level normal forms and Loewner chains for discrete and continuous
//! dilation evolution families of `C^N`.

pub mod error;
pub mod jet;
pub mod chains;
pub mod continuous;
pub mod families;
pub mod normalize;
pub mod scenarios;
pub mod spectrum;

pub use error::{Error, Result};
pub use jet::{JetMap, MultiIndex};
pub use families::{DiscreteFamily, TriangularFamily};
pub use spectrum::{Spectrum, SpectrumMode};
pub use num_complex::Complex64;
