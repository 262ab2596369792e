#![no_main]

use egd_core::imgpipe::{read_pnm, write_pnm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(img) = read_pnm(data) else { return };
    assert_eq!(read_pnm(&write_pnm(&img).unwrap()).unwrap(), img);
});
