#![no_main]

use egd_core::imgpipe::{parse_idx, write_idx};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(arr) = parse_idx(data) else { return };
    assert_eq!(arr.data.len(), arr.dims.iter().product::<usize>());
    assert_eq!(parse_idx(&write_idx(&arr.dims, &arr.data)).unwrap(), arr);
});
