//! Star partitions of simple graphs: a local-search approximation with a
//! potential-function audit trail, an exact bitmask oracle for small
//! instances, and an exact-rational checker for the token-based ratio
//! argument.
//!
//! The main entry points are [`search::approx1`], [`oracle::min_star_partition`]
//! and [`verify::verify`].

pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod init;
pub mod oracle;
pub mod partition;
pub mod search;
pub mod verify;

pub use error::{ContractViolation, Error, GraphError, ParamError};
pub use graph::{parse_edge_list, Graph, ParsedGraph, VertexId};
pub use partition::{Star, StarPartition};
pub use search::{approx1, SolveStats};
pub use verify::{verify, VerifyReport, VerifyStatus};
