//! Exercises the fit-input CSV reader on arbitrary bytes. Any defect in
//! the stream must surface as an error value, never as a panic, and
//! accepted points must be finite and nonnegative.

#![no_main]

use cubefree::report::read_fit_points;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(points) = read_fit_points(data) {
        for (_, err) in points {
            assert!(err.is_finite() && err >= 0.0, "accepted error must be clean");
        }
    }
});
