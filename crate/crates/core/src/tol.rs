//! Repository-wide numerical tolerances. Tests and the acceptance suite quote
//! these values directly.

/// Primal feasibility tolerance for solver outputs and certificates.
pub const TOL_FEAS: f64 = 1e-8;

/// Objective accuracy expected from the conic backend.
pub const TOL_OBJ: f64 = 1e-7;

/// Two parametric breakpoints closer than this are merged.
pub const BREAKPOINT_MERGE: f64 = 1e-9;

/// Default iteration cap of the conic backend.
pub const DEFAULT_MAX_ITER: usize = 10_000;
