mod common;

use common::{cache, ctx, cz, dd, rel};
use zetapfrac::zeros::{load_cache, locate_zeros, save_cache, smooth_count, ZeroTarget};
use zetapfrac::Error;

#[test]
fn ordinates_match_reference_values() {
    let z = cache();
    assert_eq!(z.len(), 100);
    assert!((z.gamma(1).unwrap() - dd("14.13472514173469379045725198356247")).abs().to_f64() < 1e-28);
    assert!((z.gamma(100).unwrap() - dd("236.5242296658162058024755079556630")).abs().to_f64() < 1e-27);
}

#[test]
fn ordinates_increase_and_match_the_count() {
    let z = cache();
    assert!(z.records.windows(2).all(|w| w[0].gamma < w[1].gamma));
    let t = z.t_max;
    assert!((smooth_count(t) - z.len() as f64).abs() < 2.0);
}

#[test]
fn zeta_prime_matches_reference_value() {
    let r = cache().get(1).unwrap();
    let want = cz("0.7832965118670309286496572092390651", "0.1246998297481710894099284915089054");
    assert!(rel(r.zeta_prime.value(), want) < 1e-24);
}

#[test]
fn height_target_counts_zeros_below() {
    let (z, w) = locate_zeros(ZeroTarget::Height(50.0), &ctx()).unwrap();
    assert_eq!(z.len(), 10);
    assert!(w.is_empty());
}

#[test]
fn cache_round_trips_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.csv");
    let small = cache().truncated(20);
    save_cache(&small, &path).unwrap();
    let (back, warnings) = load_cache(&path, &ctx()).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(back.records, small.records);
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 2;
    bytes[last] = if bytes[last] == b'1' { b'2' } else { b'1' };
    std::fs::write(&path, bytes).unwrap();
    assert!(matches!(load_cache(&path, &ctx()), Err(Error::Checksum { .. })));
    assert!(matches!(load_cache(&dir.path().join("none.csv"), &ctx()), Err(Error::MissingCache(_))));
}
