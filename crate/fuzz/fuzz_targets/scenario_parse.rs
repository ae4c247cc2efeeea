#![no_main]

use libfuzzer_sys::fuzz_target;
use wpcsma::scenario::{parse_scenario, to_json_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(scen) = parse_scenario(text) else {
        return;
    };
    let emitted = to_json_string(&scen).expect("accepted scenario must serialize");
    let again = parse_scenario(&emitted).expect("emitted scenario must parse");
    assert_eq!(to_json_string(&again).unwrap(), emitted);
});
