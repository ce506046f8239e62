//! Published reference numbers for the benchmark problems, in kN.
//!
//! These are stored values for comparison only and are never recomputed.

/// Axial load levels of the benchmark-3 sweep.
pub const TABLE1_AXIAL_KN: [f64; 6] = [0.0, 75.0, 150.0, 225.0, 300.0, 375.0];

/// Benchmark 3 peak lateral load, single DB element, per axial level.
pub const TABLE1_DB_KN: [f64; 6] = [12.15, 16.95, 19.38, 20.71, 21.37, 21.69];

/// Benchmark 3 peak lateral load, single FSDB element, per axial level.
pub const TABLE1_FSDB_KN: [f64; 6] = [8.28, 12.57, 14.84, 17.28, 18.11, 18.42];

/// Benchmark 3 peak lateral load, force-based element, per axial level.
pub const TABLE1_FB_KN: [f64; 6] = [6.97, 9.60, 12.11, 13.91, 15.19, 15.74];

/// Benchmark 1 monotonic peaks.
pub const B1_FB_PEAK_KN: f64 = 78.6;
pub const B1_DB_PEAK_KN: f64 = 126.0;
/// Single FSDB element over-estimates the FB peak by 18.1 %.
pub const B1_FSDB_ERROR: f64 = 0.181;

pub fn b1_fsdb_peak_kn() -> f64 {
    B1_FB_PEAK_KN * (1.0 + B1_FSDB_ERROR)
}

/// Benchmark 1 cyclic peaks, (positive, negative).
pub const B1_CYCLIC_FSDB_KN: (f64, f64) = (83.2, -80.45);
pub const B1_CYCLIC_DB_KN: (f64, f64) = (120.60, -119.14);
pub const B1_CYCLIC_FB_KN: (f64, f64) = (73.91, -72.67);

/// Percent deviation of `measured` from `reference`.
pub fn deviation_pct(measured: f64, reference: f64) -> f64 {
    100.0 * (measured - reference) / reference
}
