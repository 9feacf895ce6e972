use as_lab::angular::{v, AngularExpression, Factor, Monomial};
use as_lab::det::direct_d;
use as_lab::discovery::{
    build_system, discover, enumerate_basis, holdout_configurations, solve_coefficients, training_configurations,
    DiscoveryOptions, LinearSystem, SolveOptions,
};
use as_lab::harness::{generate, GeneratorKind, GeneratorSpec};
use as_lab::{Coefficient, Error};

const SEED: u64 = 20190314;

fn apply(sys: &LinearSystem, x: &[f64]) -> Vec<f64> {
    sys.matrix.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

#[test]
fn formula_term_shapes_are_in_the_basis() {
    let b = enumerate_basis(4, 6).unwrap();
    let d = |a: (usize, usize), c: (usize, usize)| Factor::dot(v(a.0, a.1), v(c.0, c.1));
    let shapes = [
        vec![d((1, 2), (1, 3))],
        vec![d((1, 2), (1, 3)), d((1, 4), (2, 4))],
        vec![d((1, 2), (3, 4)), d((1, 3), (2, 4))],
        vec![d((1, 2), (1, 4)), d((1, 3), (2, 3)), d((2, 4), (3, 4))],
        vec![Factor::det(v(1, 2), v(1, 3), v(2, 4))],
        vec![Factor::det(v(1, 2), v(1, 4), v(2, 3)), d((2, 4), (3, 4))],
    ];
    for s in shapes {
        let m = Monomial::new(s);
        assert!(b.locate(&m).is_some(), "{m} missing");
    }
    assert_eq!(b.reps[0], Monomial::constant());
    assert_eq!((b.raw_count, b.len(), b.self_cancelling.len()), (1208, 69, 11));
}

#[test]
fn recovery_diagnostics() {
    let (basis, f) = discover(&DiscoveryOptions::new(4, 6, SEED)).unwrap();
    assert!(f.fully_rationalized() && f.parity_consistent);
    assert_eq!(f.rank + f.dependent.len(), basis.len());
    assert_eq!(f.rows, 3 * basis.len());
    assert!(f.holdout_rows >= 100);
    assert!(f.re.training_residual <= 1e-9 && f.im.training_residual <= 1e-9);
    let v = f.to_json_value();
    for key in ["rank", "pivots", "training_residual", "holdout_residual", "seed"] {
        assert!(v["diagnostics"].get(key).is_some(), "{key}");
    }
    assert_eq!(v["re"].as_array().unwrap().len(), 5);
    assert_eq!(v["im"].as_array().unwrap().len(), 2);
}

#[test]
fn square_system_also_recovers() {
    let mut o = DiscoveryOptions::new(4, 6, SEED + 1);
    o.row_factor = 1;
    let (_, f) = discover(&o).unwrap();
    assert!(f.fully_rationalized());
    assert!(f.re.holdout_residual <= 1e-7 && f.im.holdout_residual <= 1e-7);
}

#[test]
fn serialization_is_deterministic() {
    let o = DiscoveryOptions::new(4, 6, 77);
    assert_eq!(discover(&o).unwrap().1.to_json(), discover(&o).unwrap().1.to_json());
}

#[test]
fn recovered_formula_passes_the_residual_gate() {
    let (_, f) = discover(&DiscoveryOptions::new(4, 6, SEED)).unwrap();
    let (re, im) = (f.re_expression().unwrap(), f.im_expression().unwrap());
    // reload through the JSON format, as the command line does
    let re = AngularExpression::from_json(&re.to_json(), 4, true).unwrap();
    let im = AngularExpression::from_json(&im.to_json(), 4, true).unwrap();
    let re = re.expanded().unwrap();
    let im = im.expanded().unwrap();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let c = generate(&GeneratorSpec::new(GeneratorKind::UniformBall, 4, 4242).with_stream(i)).unwrap();
        let d = direct_d(&c).unwrap().d;
        worst = worst.max((re.eval(&c).unwrap() - d.re).abs()).max((im.eval(&c).unwrap() - d.im).abs());
    }
    assert!(worst <= 1e-7, "{worst}");
}

#[test]
fn rationals_reproduce_the_float_solution() {
    let (_, f) = discover(&DiscoveryOptions::new(4, 6, SEED)).unwrap();
    for fit in [&f.re, &f.im] {
        for (x, q) in fit.float.iter().zip(fit.rational.as_ref().unwrap()) {
            assert!((x - *q.numer() as f64 / *q.denom() as f64).abs() <= 1e-6);
        }
    }
}

#[test]
fn planted_coefficients_come_back() {
    let (basis, f) = discover(&DiscoveryOptions::new(4, 6, 5)).unwrap();
    let rows = 3 * basis.len();
    let mut train = build_system(&basis, &training_configurations(4, rows, 5).unwrap()).unwrap();
    let mut hold = build_system(&basis, &holdout_configurations(4, basis.len() + 31, 5).unwrap()).unwrap();
    let q = |n, d| Coefficient::new(n, d);
    let sel = &f.selected;
    let planted_re = [(sel[0], q(-7, 3)), (sel[4], q(5, 16)), (sel[17], q(11, 9))];
    let planted_im = [(sel[2], q(1, 64)), (sel[9], q(-3, 5)), (sel[30], q(2, 7))];
    let dense = |p: &[(usize, Coefficient)]| {
        let mut x = vec![0.0; basis.len()];
        for &(j, c) in p {
            x[j] = *c.numer() as f64 / *c.denom() as f64;
        }
        x
    };
    let (xr, xi) = (dense(&planted_re), dense(&planted_im));
    train.rhs_re = apply(&train, &xr);
    train.rhs_im = apply(&train, &xi);
    hold.rhs_re = apply(&hold, &xr);
    hold.rhs_im = apply(&hold, &xi);
    let g = solve_coefficients(&basis, &train, &hold, &SolveOptions::default()).unwrap();
    for (fit, planted) in [(&g.re, &planted_re), (&g.im, &planted_im)] {
        let q = fit.rational.as_ref().expect("rationalized");
        for (j, c) in q.iter().enumerate() {
            let want = planted.iter().find(|p| p.0 == j).map_or(Coefficient::from_integer(0), |p| p.1);
            assert_eq!(*c, want, "column {j}");
        }
    }
}

#[test]
fn collinear_training_is_rank_deficient() {
    let basis = enumerate_basis(4, 6).unwrap();
    let configs: Vec<_> = (0..2 * basis.len() as u64)
        .map(|i| generate(&GeneratorSpec::new(GeneratorKind::Collinear, 4, 9).with_stream(i)).unwrap())
        .collect();
    let hold = build_system(&basis, &holdout_configurations(4, basis.len(), 9).unwrap()).unwrap();
    let sys = build_system(&basis, &configs).unwrap();
    let f = solve_coefficients(&basis, &sys, &hold, &SolveOptions::default()).unwrap();
    assert!(f.rank < basis.len() / 2, "rank {}", f.rank);
    // every column containing a triple product vanishes on the line
    for (j, m) in basis.reps.iter().enumerate() {
        if m.det_count() > 0 {
            assert!(f.dependent.contains(&j));
        }
    }
    // the fit reproduces D = 1 on collinear inputs but not on generic ones
    assert!(f.re.training_residual <= 1e-9);
    assert!(f.re.holdout_residual > 1e-7);
}

#[test]
fn too_few_configurations() {
    let basis = enumerate_basis(4, 4).unwrap();
    let configs = training_configurations(4, basis.len() - 1, 1).unwrap();
    assert_eq!(
        build_system(&basis, &configs).unwrap_err(),
        Error::Underdetermined { rows: basis.len() - 1, cols: basis.len() }
    );
}

#[test]
fn cap_and_bad_options() {
    let mut o = DiscoveryOptions::new(4, 6, 1);
    o.raw_cap = 10;
    assert_eq!(discover(&o).unwrap_err(), Error::BasisTooLarge { cap: 10 });
    let mut o = DiscoveryOptions::new(4, 6, 1);
    o.holdout = 0;
    assert!(discover(&o).is_err());
}

#[test]
fn five_points_small_basis_runs() {
    // no completeness claim: with few slots the residual is reported, not hidden
    let (basis, f) = discover(&DiscoveryOptions::new(5, 2, 3)).unwrap();
    assert_eq!(f.basis.len(), basis.len());
    assert!(f.re.holdout_residual.is_finite());
    assert!(f.re.holdout_residual > 1e-7);
}
