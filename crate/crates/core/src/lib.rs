pub mod edges;
pub mod electron_dynamics;
pub mod error;
pub mod graphstate;
pub mod ionization;
pub mod lattice;
pub mod mbqc;
pub mod resources;
pub mod scheduler;

pub use edges::EdgeSet;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/scheduling.md")]
    mod scheduling {}
    #[doc = include_str!("../../../book/src/graph-states.md")]
    mod graph_states {}
    #[doc = include_str!("../../../book/src/measurement-patterns.md")]
    mod measurement_patterns {}
    #[doc = include_str!("../../../book/src/ionization.md")]
    mod ionization {}
    #[doc = include_str!("../../../book/src/electron-guiding.md")]
    mod electron_guiding {}
    #[doc = include_str!("../../../book/src/resources.md")]
    mod resources {}
}
