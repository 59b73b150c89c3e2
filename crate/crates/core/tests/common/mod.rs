#![allow(dead_code)]

use groupsize::{make_family, FamilyF64};

/// Certified (family, parameter, value) cases used across the integration tests.
pub fn certified_matrix() -> Vec<(&'static str, &'static str, f64)> {
    let mut m = Vec::new();
    for i in 0..=10 {
        m.push(("yunus", "p", 0.5 + 0.05 * i as f64));
    }
    for r in [0.501, 0.6, 0.75, 0.9, 0.999] {
        m.push(("power", "r", r));
    }
    for p in [0.5, 0.6, 0.75] {
        m.push(("xlnx", "p", p));
    }
    for p in [0.1, 1.0, 10.0] {
        m.push(("lnln", "p", p));
    }
    for p in [0.5, 0.75] {
        m.push(("combo", "p", p));
    }
    for p in [0.5, 0.75, 1.0] {
        m.push(("logpow", "p", p));
    }
    m
}

pub fn counterexamples() -> Vec<(&'static str, &'static str, f64)> {
    vec![
        ("power", "r", 1.0),
        ("power", "r", 1.5),
        ("power", "r", 2.0),
        ("exp", "r", 1.0),
        ("exp", "r", 2.0),
    ]
}

pub fn family(name: &str, param: &str, value: f64) -> FamilyF64 {
    make_family(name, [(param, value)]).unwrap()
}
