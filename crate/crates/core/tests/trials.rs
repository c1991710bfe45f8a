mod common;

use revineq::error::Error;
use revineq::group::{NormKind, QuasiNorm};
use revineq::inequalities::*;
use revineq::quadrature::QuadratureSpec;
use revineq::trials::*;

use common::{abelian, hardy_ratio_exp, heisenberg, sobolev_ratio_exp};

fn h1() -> QuasiNorm {
    heisenberg(NormKind::Koranyi)
}

fn single(q_dim: f64) -> InequalityParams {
    InequalityParams::new(q_dim, 0.5, 0.5, 0.0, 0.0, 0.0)
}

fn search(method: SearchMethod, budget: usize) -> SearchSpec {
    SearchSpec {
        method,
        budget,
        ..SearchSpec::default()
    }
}

fn estimate(kind: InequalityKind, fam: FamilyTag, s: &SearchSpec) -> BestConstantEstimate {
    estimate_best_constant(kind, &single(4.0), &[TrialFamily::new(fam)], s, &h1(), &QuadratureSpec::default()).unwrap()
}

/// `e^{-cr}` ratios do not depend on `c`, so every search lands on the
/// closed-form value.
#[test]
fn flat_families_reproduce_closed_forms() {
    for method in [SearchMethod::Grid, SearchMethod::NelderMead] {
        let e = estimate(InequalityKind::ReverseHardy, FamilyTag::ExpDecay, &search(method, 12));
        assert!((e.min_ratio / hardy_ratio_exp(4.0, 0.5) - 1.0).abs() < 1e-8, "{method:?}: {}", e.min_ratio);
        assert!((e.min_ratio - 0.15340).abs() < 1e-5);
        assert!((e.analytic_constant - 1.0 / 7.0).abs() < 1e-15);
        let e = estimate(InequalityKind::ReverseSobolev, FamilyTag::ExpDecay, &search(method, 12));
        assert!((e.min_ratio / sobolev_ratio_exp(4.0, 0.5) - 1.0).abs() < 1e-8);
        assert!((e.min_ratio - 0.13304).abs() < 1e-5);
    }
}

#[test]
fn minimum_is_attained_in_the_trace() {
    for fam in FamilyTag::ALL {
        let e = estimate(InequalityKind::ReverseSobolev, fam, &SearchSpec::default());
        assert_eq!(e.evaluations, e.trace.len());
        let mut found = false;
        for (i, t) in e.trace.iter().enumerate() {
            assert_eq!(t.index, i);
            if let Some(r) = t.ratio {
                assert!(e.min_ratio <= r, "{fam}: {} > {r}", e.min_ratio);
                found |= r == e.min_ratio && t.params == e.argmin;
            }
        }
        assert!(found, "{fam}");
        assert!(e.min_ratio >= e.analytic_constant, "{fam}: {}", e.min_ratio);
    }
}

#[test]
fn larger_budgets_never_raise_the_minimum() {
    for method in [SearchMethod::Grid, SearchMethod::NelderMead] {
        let mut last = f64::INFINITY;
        for budget in [3, 7, 15, 31, 60] {
            let e = estimate(InequalityKind::ReverseSobolev, FamilyTag::PowerDecay, &search(method, budget));
            assert_eq!(e.evaluations, budget);
            assert!(e.min_ratio <= last, "{method:?} budget {budget}: {} > {last}", e.min_ratio);
            last = e.min_ratio;
        }
    }
}

#[test]
fn estimates_are_identical_across_thread_counts() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let prm = InequalityParams::balanced(2.0, 0.5, 0.5, 0.0, 0.0);
            let fams = [TrialFamily::new(FamilyTag::ExpDecay), TrialFamily::new(FamilyTag::Gaussian)];
            let spec = QuadratureSpec::monte_carlo(256, 4);
            estimate_best_constant(InequalityKind::ReverseSteinWeiss, &prm, &fams, &search(SearchMethod::NelderMead, 12), &abelian(2), &spec)
                .unwrap()
        })
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert_eq!(a.min_ratio.to_bits(), b.min_ratio.to_bits());
    assert_eq!(a.param_names, vec!["f.c", "h.c"]);
}

#[test]
fn ratios_are_invariant_under_rescaling() {
    let spec = QuadratureSpec::monte_carlo(256, 1);
    let n = abelian(2);
    let bilinear = InequalityParams::balanced(2.0, 0.5, 0.5, 0.0, 0.0);
    for fam in FamilyTag::ALL {
        let f = make_profile(&TrialFamily::new(fam), &fam.default_params()).unwrap();
        for kind in [
            InequalityKind::ReverseHardy,
            InequalityKind::ReverseSobolev,
            InequalityKind::ReverseCkn,
            InequalityKind::ReverseSteinWeiss,
            InequalityKind::ReverseHls,
        ] {
            let prm = if kind.uses_bilinear_params() { bilinear } else { single(2.0) };
            let h = (kind.arity() == 2).then(|| f.clone());
            let base = verify(kind, &f, h.as_ref(), &prm, &n, &spec).unwrap().ratio;
            let hs = h.as_ref().map(|h| h.scaled(0.25));
            let scaled = verify(kind, &f.scaled(7.0), hs.as_ref(), &prm, &n, &spec).unwrap().ratio;
            assert!((scaled / base - 1.0).abs() < 1e-12, "{kind} {fam}: {scaled} vs {base}");
        }
    }
}

#[test]
fn grid_search_starts_at_the_box_centre() {
    let fam = TrialFamily::new(FamilyTag::ExpDecay).with_box(vec![(0.25, 4.0)]).unwrap();
    let e = estimate_best_constant(
        InequalityKind::ReverseHardy,
        &single(4.0),
        &[fam],
        &search(SearchMethod::Grid, 5),
        &h1(),
        &QuadratureSpec::default(),
    )
    .unwrap();
    assert!((e.trace[0].params[0] - 1.0).abs() < 1e-12, "{:?}", e.trace[0].params);
    for t in &e.trace {
        assert!((0.25..=4.0).contains(&t.params[0]));
    }
}

#[test]
fn forward_inequalities_are_not_estimated() {
    let e = estimate_best_constant(
        InequalityKind::ForwardHardy,
        &single(4.0),
        &[TrialFamily::new(FamilyTag::SmoothBump)],
        &SearchSpec::default(),
        &h1(),
        &QuadratureSpec::default(),
    )
    .unwrap_err();
    assert!(matches!(e, Error::Parameter { .. }), "{e}");
}

#[test]
fn wrong_family_count_and_bad_boxes_are_rejected() {
    let fams = [TrialFamily::new(FamilyTag::ExpDecay)];
    let prm = InequalityParams::balanced(4.0, 0.5, 0.5, 0.0, 0.0);
    let e = estimate_best_constant(InequalityKind::ReverseSteinWeiss, &prm, &fams, &SearchSpec::default(), &h1(), &QuadratureSpec::default())
        .unwrap_err();
    assert!(matches!(e, Error::Parameter { .. }), "{e}");
    assert!(TrialFamily::new(FamilyTag::ExpDecay).with_box(vec![(2.0, 1.0)]).is_err());
    assert!(TrialFamily::new(FamilyTag::ExpDecay).with_box(vec![(0.0, 1.0)]).is_err());
    let e = make_profile(&TrialFamily::new(FamilyTag::Gaussian), &[20.0]).unwrap_err();
    assert!(matches!(e, Error::Parameter { .. }) && e.to_string().contains("outside"), "{e}");
}

/// Every trial point of the complement variant without an outer weight has
/// a divergent right side.
#[test]
fn all_failed_evaluations_are_an_estimation_error() {
    let prm = InequalityParams::balanced(4.0, 0.5, 0.5, 0.0, 0.0);
    let e = estimate_best_constant(
        InequalityKind::ReverseIntegralHardyComplement,
        &prm,
        &[TrialFamily::new(FamilyTag::ExpDecay)],
        &search(SearchMethod::Grid, 4),
        &h1(),
        &QuadratureSpec::default(),
    )
    .unwrap_err();
    assert!(matches!(e, Error::Estimation { .. }), "{e}");
    assert!(e.to_string().contains("all 4 evaluations failed"), "{e}");
}

#[test]
fn profiles_are_nonnegative_and_decreasing() {
    for fam in FamilyTag::ALL {
        let family = TrialFamily::new(fam);
        for &(lo, hi) in &family.param_box {
            for a in [lo, (lo * hi).sqrt(), hi] {
                let f = make_profile(&family, &[a]).unwrap();
                f.check_decreasing(500).unwrap();
                let mut prev = f64::INFINITY;
                for r in f.sample_radii(500) {
                    let v = f.value(r);
                    assert!(v >= 0.0 && v <= prev, "{fam} a = {a} r = {r}");
                    assert!(f.derivative(r) <= 0.0);
                    prev = v;
                }
            }
        }
    }
}
