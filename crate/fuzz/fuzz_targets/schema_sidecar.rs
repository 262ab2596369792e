#![no_main]

use egd_core::bitcodec::{format_schema_sidecar, parse_schema_sidecar};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(schema) = parse_schema_sidecar(text) else { return };
    assert_eq!(parse_schema_sidecar(&format_schema_sidecar(&schema)).unwrap(), schema);
});
