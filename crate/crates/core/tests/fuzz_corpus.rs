//! Replays the fuzz seeds through the same invariants the fuzz targets
//! check, plus truncations of each seed.

use std::fs;
use std::io::Cursor;
use std::path::PathBuf;

use egd_core::bitcodec::{decode_tabular, encode_tabular, format_schema_sidecar, parse_schema_sidecar, read_csv};
use egd_core::gede::{compressed_size, decompress, random_access, CompressedDataset, ContainerReader};
use egd_core::imgpipe::{parse_idx, read_pnm, write_idx, write_pnm, Manifest};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn container_seeds() {
    for (name, bytes) in seeds("container_decode") {
        let cd = CompressedDataset::from_bytes(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        let size = compressed_size(cd.n_b(), u64::from(cd.l_b()), u64::from(cd.l_d()), cd.n(), cd.m(), 0);
        assert_eq!(cd.best_size(), size, "{name}");
        assert_eq!(cd.to_bytes(), bytes, "{name}");
        let bm = decompress(&cd).unwrap();
        let mut rd = ContainerReader::open(Cursor::new(&bytes)).unwrap();
        rd.verify().unwrap();
        for i in 0..cd.n() {
            assert_eq!(random_access(&cd, i).unwrap(), bm.decode_row(i as usize));
            assert_eq!(rd.record(i).unwrap(), bm.decode_row(i as usize));
        }
        for cut in 0..bytes.len() {
            assert!(CompressedDataset::from_bytes(&bytes[..cut]).is_err(), "{name} cut at {cut}");
        }
    }
}

#[test]
fn csv_seeds() {
    for (name, bytes) in seeds("csv_table") {
        let table = read_csv(bytes.as_slice()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let schema = table.infer_schema().unwrap();
        let rows = decode_tabular(&encode_tabular(&table.rows, &schema).unwrap(), None).unwrap();
        assert_eq!(format!("{rows:?}"), format!("{:?}", table.rows), "{name}");
    }
}

#[test]
fn sidecar_seeds() {
    for (name, bytes) in seeds("schema_sidecar") {
        let schema = parse_schema_sidecar(std::str::from_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_schema_sidecar(&format_schema_sidecar(&schema)).unwrap(), schema);
    }
}

#[test]
fn idx_seeds() {
    for (name, bytes) in seeds("idx_decode") {
        let arr = parse_idx(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(arr.data.len(), arr.dims.iter().product::<usize>());
        assert_eq!(parse_idx(&write_idx(&arr.dims, &arr.data)).unwrap(), arr);
        for cut in 0..bytes.len() {
            assert!(parse_idx(&bytes[..cut]).is_err(), "{name} cut at {cut}");
        }
    }
}

#[test]
fn pnm_seeds() {
    for (name, bytes) in seeds("pnm_decode") {
        let img = read_pnm(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(read_pnm(&write_pnm(&img).unwrap()).unwrap(), img);
        for cut in 0..bytes.len() {
            assert!(read_pnm(&bytes[..cut]).is_err(), "{name} cut at {cut}");
        }
    }
}

#[test]
fn manifest_seeds() {
    for (name, bytes) in seeds("manifest_parse") {
        let m = Manifest::parse(std::str::from_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(Manifest::parse(&m.to_text()).unwrap(), m);
        m.chain().unwrap();
    }
}
