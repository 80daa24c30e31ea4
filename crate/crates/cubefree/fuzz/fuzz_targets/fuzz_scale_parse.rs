//! Exercises the small config-string parsers: scale literals (plain and
//! scientific), base-set names, signs, phases and output formats. All of
//! them must reject cleanly instead of panicking, and an accepted scale
//! must reparse to the same value from its decimal form.

#![no_main]

use cubefree::decomp::Sign;
use cubefree::expsum::RationalPhase;
use cubefree::rational::parse_scale;
use cubefree::report::Format;
use cubefree::sieve::BaseSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_scale(text) {
        assert_eq!(parse_scale(&v.to_string()), Ok(v));
    }
    let _ = text.parse::<BaseSet>();
    let _ = text.parse::<Sign>();
    let _ = text.parse::<Format>();
    let _ = text.parse::<RationalPhase>();
});
