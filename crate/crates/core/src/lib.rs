//! Shared-blackboard communication model simulator.
//!
//! Vertices of a graph each know their own neighborhood and post short
//! messages to a common blackboard in synchronous rounds; a referee reads the
//! blackboard and outputs a maximal independent set or a matching. The crate
//! provides the execution model, brute-force oracles, recursive hard input
//! distributions, exact information measures, a protocol library, and an
//! exact analysis of the round-elimination simulation at toy scale.

pub mod bits;
pub mod coins;
pub mod distributions;
pub mod embedding;
pub mod exec;
pub mod infotheory;
pub mod layout;
pub mod model;
pub mod oracles;
pub mod protocols;
pub mod verify;

pub use bits::Bits;
pub use coins::Coins;
pub use exec::Exec;
pub use layout::{BlockLayout, Role, Side};
pub use model::{run_protocol, Graph, Matching, Output, Protocol, Transcript, VertexView};
