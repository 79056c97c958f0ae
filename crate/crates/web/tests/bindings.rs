use bmchain_web::{outer_mean_json, separate_json, solve_polygon_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn square_polygon() {
    let r = parse(&solve_polygon_json("[[1,1],[-1,1],[-1,-1],[1,-1]]").unwrap());
    assert!((r["ratio"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert_eq!(r["verified"], true);
    assert_eq!(r["hull"].as_array().unwrap().len(), 4);
    for p in r["inner"].as_array().unwrap() {
        let (x, y) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        assert!((x.hypot(y) - 1.0).abs() < 1e-6);
    }
    assert_eq!(r["inner_contacts"].as_array().unwrap().len(), 4);
}

#[test]
fn polygon_errors_are_messages() {
    assert!(solve_polygon_json("[[0,0],[1,1],[2,2]]").is_err());
    assert!(solve_polygon_json("[[0,0,0]]").is_err());
    assert!(solve_polygon_json("not json").is_err());
}

#[test]
fn counterexample_mean() {
    let r = parse(&outer_mean_json(0.5, 0.3, 0.8).unwrap());
    assert_eq!(r["contains_x"], true);
    assert_eq!(r["mean"].as_array().unwrap().len(), 120);
    let r = parse(&outer_mean_json(0.5, 0.9, 0.8).unwrap());
    assert!(r["error"].is_string());
    assert!(r["mean"].as_array().unwrap().is_empty());
    assert!(outer_mean_json(1.5, 0.5, 0.5).is_err());
}

#[test]
fn separation_on_a_line() {
    let k = "[[1,0],[0,1],[-0.25,-0.25]]";
    let r = parse(&separate_json(k, "[[0,-1],[0.25,0.25]]", 0.0).unwrap());
    assert_eq!(r["verdict"], "intersecting");
    assert!((r["point"][0].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let r = parse(&separate_json(k, "[[0,-1]]", 0.0).unwrap());
    assert_eq!(r["verdict"], "separated");
}
