#![no_main]

use libfuzzer_sys::fuzz_target;
use wpcsma::point::parse_point;
use wpcsma::scenario::bundled;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(point) = parse_point(text) else { return };
    let scen = bundled("example2").unwrap();
    let _ = point.decision(&scen);
    let _ = point.sim_point(&scen);
});
