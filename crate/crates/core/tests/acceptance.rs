//! Acceptance suite. Run with `cargo test -p ksforge --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ksforge::gleason::{basis_rays, basis_samples, fit_w, indeterminacy_interval, residual, IndeterminacyQuery};
use ksforge::io::to_graph_json;
use ksforge::lp::{frac, parse_rational, q, Rational};
use ksforge::search::two_valued_search;
use ksforge::state::verify_report;
use ksforge::{DensityMatrix, Forge, OrthoGraph, Ray, Semantics, StatePolytope};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const GAMMA_ANGLES: [f64; 5] = [15.0, 30.0, 45.0, 60.0, 75.0];
const D_PAIRS: [(f64, f64); 3] = [(10.0, 30.0), (20.0, 50.0), (40.0, 80.0)];
const GAMMA_BUDGET: Duration = Duration::from_secs(60);

fn report(n: u32, ok: bool, what: &str) {
    println!("{} criterion {n}: {what}", if ok { "PASS" } else { "FAIL" });
}

fn polar(colat: f64, lon_rad: f64) -> Ray {
    Ray::from_polar(&Ray::E3, colat.to_radians(), lon_rad).unwrap()
}

/// b at colatitude `tb` one perpendicular step away from a at `ta`.
fn d_pair(ta: f64, tb: f64) -> (Ray, Ray) {
    let dphi = (ta.to_radians().tan() / tb.to_radians().tan()).acos();
    (polar(ta, 0.0), polar(tb, dphi))
}

struct Built {
    gammas: Vec<(f64, OrthoGraph, Duration)>,
    ds: Vec<((f64, f64), OrthoGraph)>,
    lambda: OrthoGraph,
}

fn built() -> &'static Built {
    static CELL: OnceLock<Built> = OnceLock::new();
    CELL.get_or_init(|| {
        let f = Forge::default();
        let gammas = GAMMA_ANGLES
            .iter()
            .map(|&t| {
                let start = Instant::now();
                let g = f.gamma(&Ray::E3, &polar(t, 0.3)).unwrap();
                (t, g, start.elapsed())
            })
            .collect();
        let ds = D_PAIRS
            .iter()
            .map(|&(ta, tb)| {
                let (a, b) = d_pair(ta, tb);
                ((ta, tb), f.d(&Ray::E3, &a, &b).unwrap())
            })
            .collect();
        let lambda = f.lambda_k(&Ray::E3, 5).unwrap();
        Built { gammas, ds, lambda }
    })
}

/// Exact check of a state: bounds, pins, triple sums and bare pair sums.
fn is_exact_state(g: &OrthoGraph, x: &[Rational], pins: &[(usize, Rational)]) -> bool {
    let zero = q(0);
    let one = q(1);
    x.len() == g.len()
        && x.iter().all(|v| *v >= zero && *v <= one)
        && pins.iter().all(|(i, v)| x[*i] == *v)
        && g.triples.iter().all(|t| &x[t[0]] + &x[t[1]] + &x[t[2]] == one)
        && g.pairs.iter().all(|p| &x[p[0]] + &x[p[1]] <= one)
}

fn random_state(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    loop {
        let a = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let w = a * a.transpose();
        let t = w.trace();
        if t > 1e-3 {
            return w / t;
        }
    }
}

/// Largest violation of the triple and pair constraints by `p`.
fn born_violation(g: &OrthoGraph, w: &Matrix3<f64>) -> f64 {
    let p: Vec<f64> = g
        .rays
        .iter()
        .map(|r| {
            let v = Vector3::from(r.coords());
            v.dot(&(w * v))
        })
        .collect();
    let tri = g
        .triples
        .iter()
        .map(|t| (p[t[0]] + p[t[1]] + p[t[2]] - 1.0).abs())
        .fold(0.0, f64::max);
    let pair = g
        .pairs
        .iter()
        .map(|e| p[e[0]] + p[e[1]] - 1.0)
        .fold(0.0, f64::max);
    let neg = p.iter().map(|v| -v).fold(0.0, f64::max);
    tri.max(pair).max(neg)
}

#[test]
fn criterion_1_gamma_verdicts() {
    let mut ok = true;
    for (t, g, build) in &built().gammas {
        let start = Instant::now();
        let certs = verify_report(g, Semantics::default()).unwrap();
        let elapsed = *build + start.elapsed();
        let (a, b) = (g.named("a").unwrap(), g.named("b").unwrap());
        let expected = ["infeasible", "infeasible", "infeasible", "feasible"];
        let verdicts_ok = certs.len() == 4
            && certs.iter().zip(expected).all(|(c, e)| c.holds && c.status == e);
        let witness: Option<Vec<Rational>> = certs.get(3).and_then(|c| c.witness.as_ref()).map(|w| {
            w.iter().map(|s| parse_rational(s).unwrap()).collect()
        });
        let witness_ok = witness
            .as_ref()
            .is_some_and(|x| is_exact_state(g, x, &[(a, q(0)), (b, q(0))]));
        let fast = elapsed < GAMMA_BUDGET;
        println!(
            "  gamma {t:>4} deg: {} rays, verdicts {:?}, exact witness {witness_ok}, {:.1}s",
            g.len(),
            certs.iter().map(|c| c.status.as_str()).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        );
        ok &= verdicts_ok && witness_ok && fast;
    }
    report(1, ok, "gamma(a,b) at 15..75 deg: three pin pairs infeasible, p(a)=p(b)=0 feasible with exact witness, each < 60 s");
    assert!(ok);
}

#[test]
fn criterion_2_monotone_margins() {
    let mut ok = true;
    for ((ta, tb), g) in &built().ds {
        let (z, a, b) = (g.named("z").unwrap(), g.named("a").unwrap(), g.named("b").unwrap());
        let poly = StatePolytope::new(g).pin(z, q(1)).unwrap();
        let out = poly.optimize(&[(b, q(1)), (a, q(-1))], true);
        let opt = out.optimum.clone().unwrap();
        let w = out.witness.unwrap();
        let attained = is_exact_state(g, &w, &[(z, q(1))]) && &w[b] - &w[a] == opt;
        println!("  d({ta}, {tb}): {} rays, max p(b)-p(a) = {opt}, margin {}", g.len(), -&opt);
        ok &= opt < q(0) && attained;
    }
    report(2, ok, "d(z,a,b): exact max of p(b)-p(a) under p(z)=1 is strictly negative");
    assert!(ok);
}

#[test]
fn criterion_3_lambda_five() {
    let g = &built().lambda;
    let z = g.named("z").unwrap();
    let poly = StatePolytope::new(g).pin(z, q(1)).unwrap();
    let mut ok = true;
    for i in 1..5 {
        let lo = g.named(&format!("a{i}")).unwrap();
        let hi = g.named(&format!("a{}", i + 1)).unwrap();
        let out = poly.optimize(&[(hi, q(1)), (lo, q(-1))], true);
        let opt = out.optimum.unwrap();
        println!("  max p(a{})-p(a{i}) = {opt}", i + 1);
        ok &= opt < q(0);
    }
    report(3, ok, "Lambda_5: all four strictness optima negative, so at least 5 distinct values");
    assert!(ok);
}

#[test]
fn criterion_4_fit_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_fit: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for _ in 0..100 {
        let e: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let m = Matrix3::new(e[0], e[3], e[4], e[3], e[1], e[5], e[4], e[5], e[2]);
        let born = |r: &Ray| {
            let v = Vector3::from(r.coords());
            v.dot(&(m * v))
        };
        let w = fit_w(&basis_samples(born)).unwrap();
        let err = (w.matrix() - m).abs().max();
        let rays = basis_rays();
        let vals: Vec<f64> = rays.iter().map(born).collect();
        let res = residual(&rays, &vals, &w).iter().fold(0.0f64, |a, r| a.max(r.abs()));
        worst_fit = worst_fit.max(err);
        worst_res = worst_res.max(res);
    }
    println!("  max |W_fit - W| = {worst_fit:.3e}, max basis residual = {worst_res:.3e}");
    let ok = worst_fit < 1e-12 && worst_res < 1e-12;
    report(4, ok, "fit_W reproduces 100 random symmetric W within 1e-12");
    assert!(ok);
}

#[test]
fn criterion_5_born_containment() {
    let b = built();
    let mut graphs: Vec<&OrthoGraph> = b.gammas.iter().map(|(_, g, _)| g).collect();
    graphs.extend(b.ds.iter().map(|(_, g)| g));
    graphs.push(&b.lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let states: Vec<Matrix3<f64>> = (0..20).map(|_| random_state(&mut rng)).collect();
    let mut worst: f64 = 0.0;
    let mut lib_ok = true;
    for g in &graphs {
        for w in &states {
            worst = worst.max(born_violation(g, w));
            let dm = DensityMatrix::from_matrix(w);
            lib_ok &= ksforge::state::slack_check(g, &dm.born_values(g)).within(1e-9);
        }
    }
    println!("  {} gadgets x {} states, worst violation {worst:.3e}", graphs.len(), states.len());
    let ok = worst <= 1e-9 && lib_ok;
    report(5, ok, "Born values of random states satisfy every triple and pair within 1e-9");
    assert!(ok);
}

#[test]
fn criterion_6_interval() {
    let query = IndeterminacyQuery {
        z0: Ray::E3,
        x: polar(30.0, 0.0),
        epsilon: 0.05,
        stages: 3,
    };
    let stages = indeterminacy_interval(&Forge::default(), &query).unwrap();
    let born = frac(3, 4);
    let mut ok = stages.len() == 4 && stages[0].lo == q(0) && stages[0].hi == q(1);
    for s in &stages {
        println!(
            "  stage {}: {} rays, [{:.9}, {:.9}], width {:.9}",
            s.stage,
            s.rays,
            ksforge::lp::to_f64(&s.lo),
            ksforge::lp::to_f64(&s.hi),
            ksforge::lp::to_f64(&s.width())
        );
        ok &= s.lo <= born && born <= s.hi;
    }
    ok &= stages.windows(2).all(|w| w[1].width() <= w[0].width());
    report(6, ok, "interval stages contain 3/4 exactly, widths nonincreasing, stage 0 is [0,1]");
    assert!(ok);
}

#[test]
fn criterion_7_two_valued_consistency() {
    let g = Forge::default().gamma(&Ray::E3, &polar(45.0, 0.3)).unwrap();
    let sem = Semantics::default();
    let (a, b) = (g.named("a").unwrap(), g.named("b").unwrap());
    let none_for_a = two_valued_search(&g, &[(a, true)], sem).is_none();
    // any 0/1 state with p(a) = 1 has p(b) in {0, 1}
    let lp_a = [q(1), q(0)].map(|vb| {
        StatePolytope::new(&g)
            .pin(a, q(1))
            .unwrap()
            .pin(b, vb)
            .unwrap()
            .feasible()
            .is_feasible()
    });
    let mut ok = none_for_a && lp_a == [false, false];
    let found = two_valued_search(&g, &[(a, false), (b, false)], sem);
    let desc = match &found {
        Some(bits) => {
            let x: Vec<Rational> = bits.iter().map(|v| q(i64::from(*v))).collect();
            let mut poly = StatePolytope::new(&g);
            for (i, v) in x.iter().enumerate() {
                poly = poly.pin(i, v.clone()).unwrap();
            }
            ok &= !bits[a] && !bits[b];
            ok &= is_exact_state(&g, &x, &[]) && poly.feasible().is_feasible();
            "witness, and its 0/1 pins are LP feasible"
        }
        None => {
            let lp = StatePolytope::new(&g).pin(a, q(0)).unwrap().pin(b, q(0)).unwrap();
            ok &= lp.feasible().is_feasible();
            "none, fractional states remain"
        }
    };
    println!("  p(a)=1: none={none_for_a}, LP feasible with p(b)=1,0: {lp_a:?}; p(a)=p(b)=0: {desc}");
    report(7, ok, "two-valued search on gamma at 45 deg agrees with the LP");
    assert!(ok);
}

#[test]
fn criterion_8_determinism() {
    let f = Forge::default();
    let z = Ray::E3;
    let (a, b) = d_pair(20.0, 50.0);
    let q1 = polar(30.0, 0.1);
    let r1 = ksforge::sphere::perp_step(&z, &q1, 40f64.to_radians()).unwrap();
    type Builder<'a> = Box<dyn Fn() -> OrthoGraph + 'a>;
    let builds: Vec<(&str, Builder)> = vec![
        ("piron", Box::new(|| f.piron(&z, &q1, &r1).unwrap())),
        ("gprime", Box::new(|| f.g_prime(&z, &polar(30.0, 0.0), &polar(40.0, 1.5)).unwrap())),
        ("gdouble", Box::new(|| f.g_double_prime(&z, &polar(45.0, 0.3)).unwrap())),
        ("gamma", Box::new(|| f.gamma(&z, &polar(45.0, 0.3)).unwrap())),
        ("d", Box::new(|| f.d(&z, &a, &b).unwrap())),
        ("lambda", Box::new(|| f.lambda_k(&z, 3).unwrap())),
        ("frame", Box::new(|| f.frame_basis())),
    ];
    let mut ok = true;
    for (name, make) in &builds {
        let h1 = Sha256::digest(to_graph_json(&make()).as_bytes());
        let h2 = Sha256::digest(to_graph_json(&make()).as_bytes());
        let hex: String = h1.iter().take(8).map(|b| format!("{b:02x}")).collect();
        println!("  {name}: sha256 {hex}.. identical={}", h1 == h2);
        ok &= h1 == h2;
    }
    report(8, ok, "rebuilding each gadget gives byte-identical graph-json");
    assert!(ok);
}
