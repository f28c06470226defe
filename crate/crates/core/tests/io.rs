mod common;

use deeplrr::{
    generate_subspaces, read_labels, read_matrix, write_labels, write_matrix, DataMatrix, Error, MatrixFormat,
    SynthSpec,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn synthetic_matrix_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (x, labels) = generate_subspaces(&SynthSpec::default()).unwrap();
    for format in [MatrixFormat::Binary, MatrixFormat::Csv] {
        let path = dir.path().join(format!("x.{}", format.extension()));
        write_matrix(&x, &path, format).unwrap();
        let back = read_matrix(&path, format).unwrap();
        assert_eq!(back.row_major(), x.row_major(), "{format:?}");
    }
    let bin = std::fs::read(dir.path().join("x.dlrm")).unwrap();
    assert_eq!(bin.len(), 12 + 8 * 200 * 90);

    let lp = dir.path().join("labels.txt");
    write_labels(&labels, &lp).unwrap();
    assert_eq!(read_labels(&lp).unwrap(), labels);
    assert_eq!(std::fs::read_to_string(&lp).unwrap().lines().count(), 90);
}

#[test]
fn file_errors_are_distinguishable() {
    let dir = tempfile::tempdir().unwrap();
    let missing = read_matrix(dir.path().join("none.dlrm"), MatrixFormat::Binary).unwrap_err();
    assert!(matches!(missing, Error::Io { .. }));

    let cases: [(&str, &[u8], MatrixFormat); 4] = [
        ("short.dlrm", b"DLR", MatrixFormat::Binary),
        (
            "trunc.dlrm",
            b"DLRM\x01\x00\x00\x00\x01\x00\x00\x00\x00",
            MatrixFormat::Binary,
        ),
        ("word.csv", b"1,2\n3,four\n", MatrixFormat::Csv),
        ("nan.csv", b"1,NaN\n", MatrixFormat::Csv),
    ];
    let mut codes = Vec::new();
    for (name, bytes, format) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, bytes).unwrap();
        codes.push(read_matrix(&p, format).unwrap_err().code());
    }
    codes.push(missing.code());
    let mut unique = codes.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), codes.len(), "{codes:?}");
}

proptest! {
    #[test]
    fn csv_round_trip_is_exact(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>(), scale in -300i32..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::gaussian(rows, cols, &mut rng) * 10f64.powi(scale);
        let x = DataMatrix::new(m).unwrap();
        let back = deeplrr::io::decode_csv(&deeplrr::io::encode_csv(&x)).unwrap();
        prop_assert_eq!(back.row_major(), x.row_major());
    }
}
