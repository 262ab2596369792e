#![no_main]

use egd_core::imgpipe::Manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = Manifest::parse(text) else { return };
    assert_eq!(Manifest::parse(&m.to_text()).unwrap(), m);
    let _ = m.chain();
});
