use gibbs_demo::{geometry, ising_series, thresholds};
use serde_json::Value;

fn parse(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn geometry_of_a_diagonal_pair() {
    let v = parse(&geometry("[[0,0],[1,1]]").unwrap());
    assert_eq!(v["size"], 2);
    assert_eq!(v["edges"].as_array().unwrap().len(), 2);
    assert_eq!(v["track"].as_array().unwrap().len(), 5);
    assert!(geometry("[[0],[1,1]]").is_err());
    assert!(geometry("not json").is_err());
}

#[test]
fn series_agrees_with_enumeration() {
    let v = parse(&ising_series(0.6, 1.0 / 9600.0, 4, 5).unwrap());
    assert_eq!(v["certificate"], "certified");
    assert!(v["oracle"]["difference"].as_f64().unwrap() < 1e-15);
    let refused = parse(&ising_series(0.6, 0.05, 3, 4).unwrap());
    assert_eq!(refused["certificate"], "refused");
    assert!(ising_series(0.6, 0.0, 9, 4).is_err());
    assert!(ising_series(1.5, 0.0, 2, 4).is_err());
}

#[test]
fn threshold_table() {
    let v = parse(&thresholds(2, 1).unwrap());
    let rows = v.as_array().unwrap();
    assert_eq!(rows[0]["denominator"], "9600");
    assert_eq!(rows[1]["denominator"], "89600");
    assert_eq!(rows[1]["l"], 7);
    assert!(thresholds(0, 1).is_err());
}
