//! Truncated polynomial jets of origin-fixing maps of `C^N`.

mod basis;
mod compose;
mod map;
mod multi_index;
mod serial;

pub use map::JetMap;
pub use multi_index::MultiIndex;
pub use serial::{Complex, JetJson, MonomialJson};
