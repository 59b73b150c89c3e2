mod common;

use common::{certified_matrix, family};
use groupsize::analysis::{g, objective_u_increment};
use groupsize::optimizer::{optimize_family, sweep};
use groupsize::simulation::brute_force_integer_argmax;

#[test]
fn three_methods_agree() {
    for (name, param, v) in certified_matrix() {
        let (_, opt) = optimize_family(&family(name, param, v)).unwrap();
        let xs = [opt.x_star, opt.x_star_fixed_point, opt.x_star_golden];
        let spread = xs.iter().cloned().fold(f64::MIN, f64::max)
            - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6, "{name} {v}: {xs:?}");
        assert!((opt.method_agreement - spread).abs() < 1e-15);
    }
}

#[test]
fn stationary_local_maximum_inside_bracket() {
    for (name, param, v) in certified_matrix() {
        let fam = family(name, param, v);
        let (_, opt) = optimize_family(&fam).unwrap();
        assert!(opt.a < opt.x_star && opt.x_star < opt.b, "{name} {v}");
        assert!(g(&fam, opt.x_star).unwrap().abs() < 1e-9, "{name} {v}");
        // U is nearly flat at large x*, so compare through the accurate increment
        for d in [-1e-4, 1e-4] {
            let x = opt.x_star + d;
            if x >= fam.x_min() {
                let du = objective_u_increment(&fam, opt.x_star, x).unwrap();
                assert!(du < 0.0, "{name} {v} at {x}: U increment {du}");
            }
        }
    }
}

#[test]
fn yunus_maximizers_lie_in_narrowed_interval() {
    for i in 0..=50 {
        let p = 0.5 + 0.01 * i as f64;
        let (_, opt) = optimize_family(&family("yunus", "p", p)).unwrap();
        assert!(
            opt.x_star > 3.4 && opt.x_star < 5.2,
            "p={p}: {}",
            opt.x_star
        );
    }
}

#[test]
fn integer_optimum_matches_brute_force() {
    for (name, param, v) in certified_matrix() {
        let fam = family(name, param, v);
        let (_, opt) = optimize_family(&fam).unwrap();
        let k_max = 2 * opt.x_star.ceil() as u64 + 10;
        let (k, _) = brute_force_integer_argmax(&fam, 2, k_max).unwrap();
        assert_eq!(k, opt.k_star, "{name} {v}: x* = {}", opt.x_star);
    }
}

#[test]
fn rounding_rule_in_the_five_window() {
    let rows = sweep("yunus", "p", 0.5, 1.0, 0.01).unwrap();
    for r in rows {
        let x = r.x_star.unwrap();
        if (4.5..5.5).contains(&x) {
            assert_eq!(r.k_star_rounded, Some(5));
        }
    }
}

#[test]
fn boundary_flag_below_smallest_group() {
    let (_, opt) = optimize_family(&family("power", "r", 0.501)).unwrap();
    assert!(opt.x_star < 2.0);
    assert!(opt.boundary);
    assert_eq!(opt.k_star, 2);
}

#[test]
fn optimum_serializes_round_trip() {
    let (_, opt) = optimize_family(&family("yunus", "p", 0.5)).unwrap();
    let back: groupsize::OptimumF64 =
        serde_json::from_str(&serde_json::to_string(&opt).unwrap()).unwrap();
    assert_eq!(back, opt);
}
