use super::*;
use crate::shift::ShiftSystem;

fn ln2() -> f64 {
    2f64.ln()
}

fn full2() -> System {
    System::builtin("full-shift-2").unwrap()
}

fn sched_d(sys: &System, ds: &[usize]) -> Schedule {
    let mut s = Schedule::default_for(sys).unwrap();
    s.sigmas = ds.iter().map(|&d| SoficMap::cyclic(d).unwrap()).collect();
    s
}

#[test]
fn full_shift_topological_contains_log2() {
    let sys = full2();
    let r = h_topological(&sys, &Schedule::default_for(&sys).unwrap()).unwrap();
    assert!(r.headline.contains_within(ln2(), 1e-12), "{}", r.headline);
    assert!(r.headline.width() <= 0.2);
    assert_eq!(r.cells.len(), 3);
    assert!(r.checks_hold());
}

#[test]
fn golden_mean_topological_is_max_over_lucas_counts() {
    let sys = System::builtin("golden-mean").unwrap();
    let r = h_topological(&sys, &Schedule::default_for(&sys).unwrap()).unwrap();
    let want = 7f64.ln() / 4.0;
    assert!((r.headline.lo.value() - want).abs() < 1e-12, "{}", r.headline);
    assert!((r.headline.hi.value() - want).abs() < 1e-12);
}

#[test]
fn fixed_point_is_zero() {
    let sys = System::builtin("fixed-point").unwrap();
    let r = h_topological(&sys, &Schedule::default_for(&sys).unwrap()).unwrap();
    assert_eq!(r.headline, Bracket::exact(ExtReal::ZERO));
}

#[test]
fn odometer_topological_is_small() {
    let sys = System::builtin("odometer-2adic").unwrap();
    let r = h_topological(&sys, &Schedule::default_for(&sys).unwrap()).unwrap();
    assert!(r.headline.hi.value() <= 0.05, "{}", r.headline);
    assert!(r.headline.lo.is_neg_inf());
    assert!(r.neg_inf);
}

#[test]
fn cover_examples() {
    let sys = full2();
    let sched = sched_d(&sys, &[4, 8]);
    let whole = h_cover(&sys, &sys.whole_cover(), &sched).unwrap();
    assert_eq!(whole.headline, Bracket::exact(ExtReal::ZERO));
    let std = h_cover(&sys, &sys.standard_partition().unwrap(), &sched).unwrap();
    assert!(std.headline.contains_within(ln2(), 1e-12));
    assert!(std.checks_hold(), "{:?}", std.checks);
    assert_eq!(cover_number(&sys, &sys.standard_partition().unwrap()).unwrap(), CountBracket::exact(2.0));
}

#[test]
fn conditional_examples() {
    let sys = full2();
    let sched = sched_d(&sys, &[4, 8]);
    let std = sys.standard_partition().unwrap();
    let given_whole = h_cover_conditional(&sys, &std, &sys.whole_cover(), &sched).unwrap();
    let plain = h_cover(&sys, &std, &sched).unwrap();
    assert_eq!(given_whole.headline, plain.headline);
    let self_cond = h_cover_conditional(&sys, &std, &std, &sched).unwrap();
    assert_eq!(self_cond.headline, Bracket::exact(ExtReal::ZERO));
    let finer = CoverSpec::window_partition(sys.as_shift().unwrap(), 1).unwrap();
    let coarse = h_cover_conditional(&sys, &std, &finer, &sched).unwrap();
    assert_eq!(coarse.headline.hi, ExtReal::ZERO);
}

#[test]
fn space_conditional_and_star_are_small_for_full_shift() {
    let sys = full2();
    let sched = sched_d(&sys, &[4, 8]);
    let std = sys.standard_partition().unwrap();
    let family = sys.refining_family(2).unwrap();
    let r = h_space_conditional(&sys, &std, &family, &sched).unwrap();
    assert!(r.headline.hi.value() <= 0.05, "{}", r.headline);
    assert_eq!(r.label.as_deref(), Some(CYLINDER_LABEL));
    let whole = h_space_conditional(&sys, &sys.whole_cover(), &family, &sched).unwrap();
    assert!(whole.headline.contains_within(ln2(), 1e-12));
    let star = h_star(&sys, &sys.refining_family(1).unwrap(), &family, &sched).unwrap();
    let top = h_topological(&sys, &sched).unwrap();
    assert!(star.headline.hi <= top.headline.hi);
    assert!(star.checks_hold());
}

#[test]
fn measure_cover_examples() {
    let sys = full2();
    let g = sys.group();
    let sched = Schedule::default_for(&sys).unwrap();
    let std = sys.standard_partition().unwrap();
    let l = vec![vec![CylinderIndicator::symbol_at_origin(&g, 1)]];
    let half = InvariantMeasure::bernoulli2(0.5).unwrap();
    let r = h_measure_cover(&sys, &half, &std, &l, &sched).unwrap();
    assert!(r.headline.contains_within(ln2(), 0.15), "{}", r.headline);
    assert!(r.checks_hold(), "{:?}", r.checks);
    let skew = InvariantMeasure::bernoulli2(0.01).unwrap();
    let mut tight = sched.clone();
    tight.delta_list = vec![0.05];
    let r = h_measure_cover(&sys, &skew, &std, &l, &tight).unwrap();
    assert!(r.headline.hi.value() <= 0.2, "{}", r.headline);
}

#[test]
fn bowen_examples() {
    let sys = full2();
    let mut sched = Schedule::default_for(&sys).unwrap();
    let g = sys.group();
    sched.f_list = vec![
        FiniteSubset::from_ints(&g, &[0]).unwrap(),
        FiniteSubset::from_ints(&g, &[0, 1]).unwrap(),
    ];
    sched.eps_list = vec![1.0, 0.5];
    let half = InvariantMeasure::bernoulli2(0.5).unwrap();
    let r = bowen_measure_entropy(&sys, &half, &sys.standard_partition().unwrap(), &sched).unwrap();
    assert!(r.headline.contains_within(ln2(), 0.15), "{}", r.headline);
    assert!(r.headline.width() <= 0.3);
    assert!(r.checks_hold());
    assert_eq!(r.mode, Mode::Exact);
}

#[test]
fn eps_conditional_examples() {
    let sys = full2();
    let sched = sched_d(&sys, &[4, 8, 12]);
    let r = h_eps_conditional(&sys, 0.3, &sys.whole_cover(), &sched).unwrap();
    assert!(r.headline.contains_within(ln2(), 0.1), "{}", r.headline);
    let r = h_eps_conditional(&sys, 1.0, &sys.whole_cover(), &sched).unwrap();
    assert_eq!(r.headline, Bracket::exact(ExtReal::ZERO));
    assert!(matches!(
        h_eps_conditional(&sys, 0.05, &sys.whole_cover(), &sched),
        Err(Error::MarginViolation { .. })
    ));
}

#[test]
fn sandwich_holds_for_window_partition() {
    let sys = full2();
    let sched = sched_d(&sys, &[4, 8]);
    let v = CoverSpec::window_partition(sys.as_shift().unwrap(), 1).unwrap();
    let c = sandwich_check(&sys, &sys.whole_cover(), &v, 0.35, 0.1, &sched).unwrap();
    assert!(c.holds, "{}", c.detail);
    assert!(sandwich_check(&sys, &sys.whole_cover(), &v, 0.2, 0.1, &sched).is_err());
}

#[test]
fn classify_examples() {
    let sys = full2();
    let c = classify(&sys, &sched_d(&sys, &[4, 8])).unwrap();
    assert!(c.expansive);
    assert!((c.expansive_constant.lo.value() - 1.0 / 3.0).abs() < 1e-15);
    assert!(c.h_expansive_evidence && c.asympt_h_expansive_evidence);

    let odo = System::builtin("odometer-2adic").unwrap();
    let c = classify(&odo, &Schedule::default_for(&odo).unwrap()).unwrap();
    assert!(!c.expansive);
    assert_eq!(c.depth_checks.len(), 6);
    for dc in &c.depth_checks {
        assert!(!dc.expansive);
        assert_eq!(dc.sup_distance, 0.5f64.powi(dc.depth as i32 + 1));
    }
    assert!(c.h_expansive_evidence && c.asympt_h_expansive_evidence);
}

#[test]
fn finite_system_is_expansive_with_zero_conditionals() {
    let g = GroupModel::cyclic(3).unwrap();
    let sys = System::Shift(ShiftSystem::full_shift_on(g, 2).unwrap());
    let sched = Schedule::default_for(&sys).unwrap();
    let c = classify(&sys, &sched).unwrap();
    assert!(c.expansive);
    for e in &c.evidence {
        assert_eq!(e.headline, Bracket::exact(ExtReal::ZERO), "{}", e.quantity);
    }
}

#[test]
fn schedule_validation() {
    let sys = full2();
    let good = Schedule::default_for(&sys).unwrap();
    assert!(good.validate(&sys).is_ok());
    let mut s = good.clone();
    s.delta_list = vec![0.1, 0.2];
    assert!(s.validate(&sys).is_err());
    let mut s = good.clone();
    s.eps_list = vec![0.05];
    assert!(matches!(s.validate(&sys), Err(Error::MarginViolation { .. })));
    let mut s = good.clone();
    let g = sys.group();
    s.f_list = vec![
        FiniteSubset::from_ints(&g, &[0, 1]).unwrap(),
        FiniteSubset::from_ints(&g, &[2]).unwrap(),
    ];
    assert!(s.validate(&sys).is_err());
    let mut s = good;
    s.sigmas = vec![SoficMap::torus(2, 2).unwrap()];
    assert!(s.validate(&sys).is_err());
}

