#![no_main]

use egd_core::bitcodec::{decode_tabular, encode_tabular, read_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = read_csv(data) else { return };
    let Ok(schema) = table.infer_schema() else { return };
    let bm = encode_tabular(&table.rows, &schema).expect("inferred schema fits its rows");
    let rows = decode_tabular(&bm, None).expect("encoded rows decode");
    assert_eq!(format!("{rows:?}"), format!("{:?}", table.rows));
});
