use coulomb_mot::counterexample::{refute_class_T, CounterexampleSpec};
use coulomb_mot::density::{DensityFile, RadialDensity};
use coulomb_mot::radialcost::MinimizeOptions;

fn round_trip(rho: &RadialDensity) -> RadialDensity {
    let text = DensityFile::from_density(rho).to_json().unwrap();
    DensityFile::from_json(&text).unwrap().build().unwrap()
}

#[test]
fn blocks_round_trip() {
    let rho =
        RadialDensity::blocks(&[(0.0, 1.0), (2.0, 3.0), (15.0, 16.0)], &[1.0 / 3.0; 3]).unwrap();
    let back = round_trip(&rho);
    for k in 0..=160 {
        let x = k as f64 * 0.1;
        assert_eq!(rho.pdf(x), back.pdf(x));
        assert_eq!(rho.cdf(x), back.cdf(x));
    }
}

#[test]
fn counterexample_round_trip_keeps_certificates() {
    let rho = CounterexampleSpec::default().build().unwrap();
    let back = round_trip(&rho);
    let (_, sup) = rho.support();
    assert_eq!(back.support().1, sup);
    for k in 1..200 {
        let x = sup * k as f64 / 200.0;
        assert_eq!(rho.pdf(x), back.pdf(x), "pdf at {x}");
    }
    let opts = MinimizeOptions::default();
    let a = refute_class_T(&rho, &opts).unwrap();
    let b = refute_class_T(&back, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn schema_errors_name_the_segment() {
    let text = r#"{"schema_version": 1, "segments": [
        {"interval": [0, 1], "kind": "poly", "data": {"coefficients": [0.5]}},
        {"interval": [1, 2], "kind": "table", "data": {"x": [1, 2], "y": [0.5]}}
    ]}"#;
    let err = DensityFile::from_json(text).unwrap().build().unwrap_err();
    assert!(err.is_input_error());
    assert!(err.to_string().contains("segment 1"), "{err}");
    let err = DensityFile::from_json("{\"schema_version\": 1,\n\"segments\": 3}").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let err = DensityFile::from_json(r#"{"schema_version": 2, "segments": []}"#)
        .unwrap()
        .build()
        .unwrap_err();
    assert!(err.to_string().contains("schema_version"));
}
