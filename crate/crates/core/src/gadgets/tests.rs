use proptest::prelude::*;

use super::*;
use crate::gleason::DensityMatrix;
use crate::io::to_graph_json;
use crate::lp::{frac, q};
use crate::state::{slack_check, verify_report, Semantics, StatePolytope};

fn deg(x: f64) -> f64 {
    x.to_radians()
}

fn forge() -> Forge {
    Forge::default()
}

fn polar(colat: f64, lon: f64) -> Ray {
    Ray::from_polar(&Ray::E3, deg(colat), deg(lon)).unwrap()
}

/// b at colatitude `tb` reachable from a at `ta` in one perpendicular step.
fn one_step_pair(ta: f64, tb: f64) -> (Ray, Ray) {
    let dphi = (deg(ta).tan() / deg(tb).tan()).acos();
    (polar(ta, 0.0), Ray::from_polar(&Ray::E3, deg(tb), dphi).unwrap())
}

fn all_hold(g: &OrthoGraph) -> bool {
    verify_report(g, Semantics::default())
        .unwrap()
        .iter()
        .all(|c| c.holds)
}

#[test]
fn piron_shape_and_claim() {
    let z = Ray::E3;
    let qr = polar(30.0, 10.0);
    let r = perp_step(&z, &qr, deg(40.0)).unwrap();
    let g = forge().piron(&z, &qr, &r).unwrap();
    assert_eq!(g.len(), 7);
    assert_eq!(g.triples.len(), 3);
    g.check_invariants().unwrap();
    let (iz, iq, ir) = (g.named("z").unwrap(), g.named("q").unwrap(), g.named("r").unwrap());
    let poly = StatePolytope::new(&g).pin(iz, q(1)).unwrap();
    let out = poly.optimize(&[(ir, q(1)), (iq, q(-1))], true);
    assert_eq!(out.optimum, Some(q(0)));
    assert!(all_hold(&g));
}

#[test]
fn piron_with_r_equal_q_collapses() {
    let z = Ray::E3;
    let qr = polar(25.0, 0.0);
    let g = forge().piron(&z, &qr, &qr).unwrap();
    assert!(g.len() < 7);
    assert!(all_hold(&g));
}

#[test]
fn piron_rejects_r_off_circle() {
    let z = Ray::E3;
    let err = forge().piron(&z, &polar(30.0, 0.0), &polar(50.0, 0.0));
    assert!(matches!(err, Err(Error::Precondition(_))));
    let err = forge().piron(&z, &Ray::E1, &Ray::E2);
    assert!(matches!(err, Err(Error::Precondition(_))));
}

#[test]
fn g_prime_one_and_many_steps() {
    let z = Ray::E3;
    let (a, b) = one_step_pair(30.0, 45.0);
    let g = forge().g_prime(&z, &a, &b).unwrap();
    assert_eq!(g.report().unwrap().reals.iter().find(|r| r.name == "steps").unwrap().value, 1.0);
    assert!(all_hold(&g));

    let g = forge().g_prime(&z, &polar(30.0, 0.0), &polar(40.0, 100.0)).unwrap();
    let steps = g.report().unwrap().reals.iter().find(|r| r.name == "steps").unwrap().value;
    assert!(steps > 1.0);
    assert!(all_hold(&g));
}

#[test]
fn descent_ends_orthogonal_with_shrinking_steps() {
    let a = Ray::E3;
    let b = polar(45.0, 20.0);
    let cs = forge().descent_sequence(&a, &b).unwrap();
    assert!(a.dot(cs.last().unwrap()).abs() < 1e-12);
    let mut pos = vec![angle(&a, &b)];
    pos.extend(cs.iter().map(|c| angle(&a, c)));
    let steps: Vec<f64> = pos.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|s| *s > 0.0));
    assert!(steps.windows(2).all(|w| w[1] < w[0]));
    assert!(forge().descent_sequence(&a, &Ray::E1).is_err());
    assert!(forge().descent_sequence(&a, &a).is_err());
}

#[test]
fn g_double_prime_blocks_both_ones() {
    let g = forge().g_double_prime(&Ray::E3, &polar(45.0, 0.0)).unwrap();
    g.check_invariants().unwrap();
    assert!(all_hold(&g));
}

#[test]
fn gamma_at_sixty_degrees() {
    let g = forge().gamma(&Ray::E3, &polar(60.0, 0.3)).unwrap();
    let certs = verify_report(&g, Semantics::default()).unwrap();
    assert_eq!(certs.len(), 4);
    assert!(certs.iter().all(|c| c.holds));
    assert!(certs[3].witness.is_some());
}

#[test]
fn d_margin_is_frozen() {
    let (a, b) = one_step_pair(20.0, 50.0);
    let g = forge().d(&Ray::E3, &a, &b).unwrap();
    let certs = verify_report(&g, Semantics::default()).unwrap();
    assert!(certs[0].holds);
    assert_eq!(certs[0].optimum.as_deref(), Some("-1/49"));
    assert!(crate::lp::parse_rational("-1/49").unwrap() < frac(0, 1));
    assert!(forge().d(&Ray::E3, &b, &a).is_err());
}

#[test]
fn lambda_two_is_one_d_gadget() {
    let z = Ray::E3;
    let ws = forge().lambda_witnesses(&z, 2).unwrap();
    assert!((angle(&z, &ws[0]) - deg(15.0)).abs() < 1e-12);
    assert!((angle(&z, &ws[1]) - deg(75.0)).abs() < 1e-12);
    let g = forge().lambda_k(&z, 2).unwrap();
    assert_eq!(g.report().unwrap().claims.len(), 1);
    assert!(all_hold(&g));
    assert!(forge().lambda_k(&z, 1).is_err());
}

#[test]
fn frame_basis_shape() {
    let g = forge().frame_basis();
    assert_eq!(g.len(), 6);
    assert_eq!(g.triples.len(), 1);
    let n = |s| g.named(s).unwrap();
    let pair = |i: usize, j: usize| g.pairs.contains(&[i.min(j), i.max(j)]);
    assert!(pair(n("e3"), n("b12")));
    assert!(!pair(n("b12"), n("b13")));
    assert!(all_hold(&g));
}

#[test]
fn rebuilds_are_byte_identical() {
    let (a, b) = one_step_pair(40.0, 80.0);
    let x = to_graph_json(&forge().d(&Ray::E3, &a, &b).unwrap());
    let y = to_graph_json(&forge().d(&Ray::E3, &a, &b).unwrap());
    assert_eq!(x, y);
}

fn random_state(m: [f64; 9]) -> Option<DensityMatrix> {
    let a = nalgebra::Matrix3::from_row_slice(&m);
    let w = a * a.transpose();
    let t = w.trace();
    (t > 1e-3).then(|| DensityMatrix::from_matrix(&(w / t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn born_values_fit_d1(m in prop::array::uniform9(-1.0f64..1.0), lon in 0.0f64..3.0) {
        let Some(w) = random_state(m) else { return Ok(()) };
        let z = Ray::E3;
        let qr = polar(30.0, lon.to_degrees());
        let r = perp_step(&z, &qr, deg(35.0)).unwrap();
        let g = forge().d1(&z, &qr, &r).unwrap();
        prop_assert!(slack_check(&g, &w.born_values(&g)).within(1e-9));
    }
}
