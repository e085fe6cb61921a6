//! Symbolic calculus for embedded Morse functions on cobordisms with
//! boundary: critical point data, flow-line bookkeeping, level-set
//! topology, the elementary moves and the handle-splitting normal form.

pub mod error;
pub mod generate;
pub mod io;
pub mod morse_data;
pub mod moves;
pub mod normal_form;
pub mod oracle;
pub mod slice_topology;
pub mod trajectory;
pub mod value;

pub use error::{Error, Result, Stage};
pub use morse_data::{
    dimension_profile, validate_datum, Ambient, ComponentId, Configuration, CriticalPoint,
    DimensionProfile, Flags, Kind, MorseDatum, PointId, Violation,
};
pub use moves::{
    cancel_pair, realize_configuration, rearrange_pair, rearrange_point, replay_script,
    split_interior, Move, MoveRecord, Script,
};
pub use normal_form::{global_split, verify_decomposition, Decomposition, Segment};
pub use trajectory::{broken_closure, can_rearrange, generic_disjoint, FlowEdge, Locus, Multiplicity};
pub use value::Value;
