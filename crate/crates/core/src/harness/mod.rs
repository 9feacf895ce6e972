//! Configuration generators, cross-method verification and conjecture scans.

pub mod generate;
pub mod report;
pub mod scan;
pub mod verify;

pub use generate::{generate, GeneratorKind, GeneratorSpec, Rotation};
pub use report::{ConfigDump, ExitStatus};
pub use scan::{epsilon_sweep, rows_to_csv, scan_conjecture2, ScanFlags, ScanOptions, ScanReport, ScanRow, CSV_HEADER, VIOLATION_MARGIN};
pub use verify::{evaluate, verify_methods, Disagreement, PairStats, VerifyOptions, VerifyReport, DEFAULT_TOLERANCE};
