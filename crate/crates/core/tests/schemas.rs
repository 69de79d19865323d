//! The committed JSON schemas list exactly the fields the types serialize.

use std::collections::BTreeSet;

use retrofit_core::estimate::{estimate, EstimateRequest, McRequest, Preset};
use retrofit_core::retrofit::Project;
use serde_json::Value;

fn schema(name: &str) -> Value {
    let path = format!("{}/../../schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn request_schema_matches_type() {
    let s = schema("estimate_request.json");
    let req = serde_json::to_value(EstimateRequest::default()).unwrap();
    assert_eq!(keys(&s["properties"]), keys(&req));
    assert_eq!(keys(&s["$defs"]["dwelling"]["properties"]), keys(&req["dwelling"]));
    for section in ["thermal", "fractions", "conversion", "cost"] {
        assert_eq!(keys(&s["properties"]["params"]["properties"][section]["properties"]), keys(&req["params"][section]), "{section}");
        for (k, v) in req["params"][section].as_object().unwrap() {
            let d = &s["properties"]["params"]["properties"][section]["properties"][k]["default"];
            assert_eq!(d.as_f64(), v.as_f64(), "{section}.{k}");
        }
    }
}

#[test]
fn response_schema_matches_type() {
    let s = schema("estimate_response.json");
    let req = EstimateRequest {
        preset: Some(Preset::BareHouse),
        projects: Project::ALL.to_vec(),
        mc: Some(McRequest { n: 20, seed: 1, money_floor: None }),
        ..Default::default()
    };
    let resp = serde_json::to_value(estimate(&req, None).unwrap()).unwrap();
    let required: BTreeSet<String> =
        s["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(required, keys(&resp));
    assert_eq!(keys(&s["properties"]), keys(&resp));
    let mc_required: BTreeSet<String> =
        s["$defs"]["mc_report"]["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(mc_required, keys(&resp["mc"]));
}
