use helicoid_web::{mesh_json, orbit_json, portrait_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn portrait_layers() {
    let v = parse(portrait_json("t^2+1", 1.0, 1.0, 4.0).unwrap());
    assert_eq!(v["nullcline"].as_array().unwrap().len(), 1);
    assert_eq!(v["markers"][0], serde_json::json!(["e0", 0.5, 0.0]));
    assert!(!v["axis_orbit"].as_array().unwrap().is_empty());
    assert_eq!(v["field"].as_array().unwrap().len(), 400);

    let v = parse(portrait_json("t^2+1", 1.0, -1.0, 4.0).unwrap());
    assert!(v["nullcline"].as_array().unwrap().is_empty());
    let v = parse(portrait_json("(t-0.6)^2", 1.0, 1.0, 4.0).unwrap());
    assert_eq!(v["beta0"].as_array().unwrap().len(), 1);
}

#[test]
fn orbit_views() {
    let v = parse(orbit_json("t^2+1", 1.0, 1.0, 0.0, 0.0, true, 10.0).unwrap());
    assert_eq!(v["surface"], "AxisPeriodic");
    let v = parse(orbit_json("t^2+1", 1.0, 1.0, 1.5, 0.0, false, 20.0).unwrap());
    assert_eq!(v["surface"], "NodoidFamily");
    assert!(v["switches"].as_u64().unwrap() > 0);
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn mesh_view() {
    let v = parse(mesh_json("t^2+1", 1.0, 1.0, 0.45, 0.0, false, 20.0, 24).unwrap());
    let n = v["vertices"].as_array().unwrap().len();
    assert_eq!(n % 3, 0);
    assert_eq!(v["nu"].as_array().unwrap().len(), n / 3);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn errors_are_messages() {
    assert!(portrait_json("t^", 1.0, 1.0, 4.0).unwrap_err().contains("syntax error"));
    assert!(portrait_json("1", 0.0, 1.0, 4.0).unwrap_err().contains("c0"));
    assert!(orbit_json("1", 1.0, 1.0, 2.0, 1.0, false, 5.0)
        .unwrap_err()
        .contains("outside the open strip"));
}
