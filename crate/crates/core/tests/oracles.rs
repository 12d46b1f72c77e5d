use sel_core::amenable::{h_a_conditional, m_value};
use sel_core::entropy::{bowen_measure_entropy, h_topological, Schedule};
use sel_core::microstate::bowen::{bowen_ap_count, ApMode};
use sel_core::microstate::MicrostateSpace;
use sel_core::shift::transfer_matrix_entropy;
use sel_core::{
    Bracket, CountBracket, CoverSpec, ExtReal, FiniteSubset, GroupModel, InvariantMeasure, ShiftSystem, SoficMap,
    System,
};

fn ints(xs: &[i64]) -> FiniteSubset {
    FiniteSubset::from_ints(&GroupModel::integers(), xs).unwrap()
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn golden_mean_transfer_matrix_is_log_phi() {
    let h = transfer_matrix_entropy(&ShiftSystem::golden_mean()).unwrap();
    assert!((h - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-8);
}

#[test]
fn golden_mean_sofic_cells_are_lucas_numbers() {
    let sys = System::builtin("golden-mean").unwrap();
    let r = h_topological(&sys, &Schedule::default_for(&sys).unwrap()).unwrap();
    let his: Vec<f64> = r.cells.iter().map(|c| c.hi.value()).collect();
    let want = [7f64.ln() / 4.0, 47f64.ln() / 8.0, 322f64.ln() / 12.0];
    for (h, w) in his.iter().zip(want) {
        assert!((h - w).abs() < 1e-12, "{his:?}");
    }
}

#[test]
fn golden_mean_microstates_at_d4() {
    let sys = System::builtin("golden-mean").unwrap();
    let sigma = SoficMap::cyclic(4).unwrap();
    let space = MicrostateSpace::new(&sys, &sigma, &ints(&[0, 1]), 4).unwrap();
    let e = space.enumerate(0.25).unwrap();
    assert_eq!(e.certified_in.len() + e.unknown.len(), 7);
}

#[test]
fn golden_mean_m_is_log_fibonacci() {
    let sys = ShiftSystem::golden_mean();
    let std = CoverSpec::standard_partition(&sys);
    let whole = CoverSpec::whole(sys.group());
    let (mut a, mut b) = (2u64, 3u64);
    for n in 1..=20i64 {
        let m = m_value(&sys, &std, &whole, &ints(&(0..n).collect::<Vec<_>>())).unwrap();
        assert_eq!(m, Bracket::exact(ExtReal::ln_count(a as f64)), "n = {n}");
        (a, b) = (b, a + b);
    }
}

#[test]
fn amenable_golden_mean_at_twenty() {
    let sys = System::builtin("golden-mean").unwrap();
    let e = h_a_conditional(&sys, &sys.standard_partition().unwrap(), &sys.whole_cover(), &[20]).unwrap();
    assert!((e.report.headline.hi.value() - 0.489097).abs() < 1e-6);
}

#[test]
fn odometer_upper_bound_is_log_modulus_over_d() {
    let sys = System::builtin("odometer-2adic").unwrap();
    let r = h_topological(&sys, &Schedule::default_for(&sys).unwrap()).unwrap();
    assert!(r.headline.lo.is_neg_inf());
    assert!((r.headline.hi.value() - 64f64.ln() / 256.0).abs() < 1e-12);
}

#[test]
fn bowen_counts_match_type_classes() {
    let sys = ShiftSystem::full_shift(2).unwrap();
    let alpha = CoverSpec::standard_partition(&sys);
    let mu = InvariantMeasure::bernoulli2(0.5).unwrap();
    let mode = ApMode::Auto {
        cap: (1u64 << 24) as f64,
        samples: 10_000,
        seed: 3,
    };
    let d = 12u64;
    let got = bowen_ap_count(&sys, &SoficMap::cyclic(d as usize).unwrap(), &alpha, &ints(&[0]), 0.25, &mu, mode).unwrap();
    let want: u64 = (0..=d)
        .filter(|&c| 2.0 * (0.5 - c as f64 / d as f64).abs() <= 0.25 + 1e-12)
        .map(|c| binom(d, c))
        .sum();
    assert_eq!(got.count, CountBracket::exact(want as f64));
    assert_eq!(want, 2508);
}

#[test]
fn bowen_full_shift_headline() {
    let sys = System::builtin("full-shift-2").unwrap();
    let mut sched = Schedule::default_for(&sys).unwrap();
    sched.f_list = vec![ints(&[0]), ints(&[0, 1])];
    sched.eps_list = vec![1.0, 0.5];
    let r = bowen_measure_entropy(&sys, &InvariantMeasure::bernoulli2(0.5).unwrap(), &sys.standard_partition().unwrap(), &sched).unwrap();
    assert!((r.headline.hi.value() - 0.680707).abs() < 1e-6);
    assert!(r.headline.hi.value() <= 2f64.ln());
}

#[test]
fn usc_probe_values() {
    use sel_core::entropy::h_measure_cover;
    use sel_core::shift::CylinderIndicator;
    let sys = System::builtin("full-shift-2").unwrap();
    let mut sched = Schedule::default_for(&sys).unwrap();
    sched.delta_list = vec![0.05];
    let l = vec![vec![CylinderIndicator::symbol_at_origin(&sys.group(), 1)]];
    let std = sys.standard_partition().unwrap();
    let at = |p: f64| {
        h_measure_cover(&sys, &InvariantMeasure::bernoulli2(p).unwrap(), &std, &l, &sched)
            .unwrap()
            .headline
            .hi
            .value()
    };
    // The largest σ wins: six ones out of twelve at p = 0.5, five at 0.4 and 0.45.
    assert!((at(0.5) - 924f64.ln() / 12.0).abs() < 1e-12);
    assert!((at(0.4) - 792f64.ln() / 12.0).abs() < 1e-12);
    assert!((at(0.45) - 792f64.ln() / 12.0).abs() < 1e-12);
}
