use std::fs;

use momentlab::cuspform::{cache_file_name, read_cache, write_cache, CoefficientTable};

#[test]
fn round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for weight in [12, 26] {
        let table = CoefficientTable::new(weight, 500).unwrap();
        let path = dir.path().join(cache_file_name(weight, 500));
        write_cache(&table, &path).unwrap();
        let back = read_cache(&path, Some(weight)).unwrap();
        assert_eq!(back.coefficients(), table.coefficients());
        assert_eq!(back.prefix_sums(), table.prefix_sums());
    }
}

#[test]
fn file_name() {
    assert_eq!(cache_file_name(16, 1000), "coeffs_w16_n1000.dat");
}

#[test]
fn rejects_damage() {
    let dir = tempfile::tempdir().unwrap();
    let table = CoefficientTable::new(12, 50).unwrap();
    let path = dir.path().join(cache_file_name(12, 50));
    write_cache(&table, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();

    assert!(read_cache(&path, Some(16)).is_err());

    let edited = text.replacen("2 -24\n", "2 -25\n", 1);
    fs::write(&path, edited).unwrap();
    assert!(read_cache(&path, None).unwrap_err().to_string().contains("checksum"));

    let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
    fs::write(&path, cut).unwrap();
    assert!(read_cache(&path, None).is_err());

    fs::write(&path, "hello\n").unwrap();
    assert!(read_cache(&path, None).is_err());
}

#[test]
fn checksum_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let table = CoefficientTable::new(18, 40).unwrap();
    let path = dir.path().join("plain.dat");
    write_cache(&table, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with("checksum=")).map(|l| format!("{l}\n")).collect();
    fs::write(&path, body).unwrap();
    assert_eq!(read_cache(&path, None).unwrap().coefficients(), table.coefficients());
}
