//! Exercises the exact-rational parser on arbitrary input. Parsing may
//! reject, but must never panic, and an accepted value must round-trip
//! through its display form unchanged.

#![no_main]

use cubefree::rational::Rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(value) = text.parse::<Rational>() {
        let redisplayed = value.to_string();
        let reparsed: Rational = redisplayed
            .parse()
            .expect("display form of a parsed rational must reparse");
        assert_eq!(value, reparsed, "round trip changed {text:?}");
    }
});
