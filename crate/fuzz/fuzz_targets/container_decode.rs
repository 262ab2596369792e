#![no_main]

use std::io::Cursor;

use egd_core::gede::{compressed_size, decompress, random_access, CompressedDataset, ContainerReader};
use libfuzzer_sys::fuzz_target;

// Built with `--cfg fuzzing`, checksums are not enforced so mutations
// reach the block decoders.
fuzz_target!(|data: &[u8]| {
    let Ok(cd) = CompressedDataset::from_bytes(data) else {
        if let Ok(mut rd) = ContainerReader::open(Cursor::new(data)) {
            for i in 0..rd.len().min(16) {
                let _ = rd.record(i);
            }
        }
        return;
    };
    let size = compressed_size(cd.n_b(), u64::from(cd.l_b()), u64::from(cd.l_d()), cd.n(), cd.m(), 0);
    assert_eq!(cd.best_size(), size);
    let body = data.len() - 8;
    assert_eq!(cd.to_bytes()[..body], data[..body]);
    let bm = decompress(&cd).expect("parsed container decodes");
    let mut rd = ContainerReader::open(Cursor::new(data)).expect("parsed container opens lazily");
    assert_eq!(rd.len(), cd.n());
    for i in 0..cd.n().min(16) {
        let row = bm.decode_row(i as usize);
        assert_eq!(random_access(&cd, i).unwrap(), row);
        assert_eq!(rd.record(i).unwrap(), row);
    }
});
