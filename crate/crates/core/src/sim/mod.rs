//! Query traces, replay through the scheduler and accelerator model, and
//! serving metrics.

mod metrics;
mod replay;
mod trace;

pub use metrics::{aggregate, cache_hit_ratio, Summary};
pub use replay::{read_records, replay, write_records, ServingRecord, RECORD_HEADER};
pub use trace::{generate_trace, QueryTrace, TraceMix, TraceParams, ACCURACY_EPSILON};
