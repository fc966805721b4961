//! Module decomposition: reaction partitions, boundary classification,
//! environment stubs and trace comparison.

mod classify;
mod compare;
mod extract;
mod fit;
mod partition;
mod stubs;

pub use classify::{classify_species, Boundary, SpeciesClass, SpeciesClassification};
pub use compare::{compare_traces, CompareError, SpeciesMetrics, TraceComparison, DEFAULT_THRESHOLD};
pub use extract::{extract_module, ExtractError, ExtractedModule};
pub use fit::{fit_stub, FitError, StubHint};
pub use partition::{ModulePartition, PartitionError};
pub use stubs::{parse_stubs, stubs_to_toml, EnvironmentStub, StubError, StubStrategy};
