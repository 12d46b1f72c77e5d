use proptest::prelude::*;

use sel_core::amenable::m_value;
use sel_core::microstate::MicrostateSpace;
use sel_core::{Bracket, CoverSpec, ExtReal, FiniteSubset, GroupElement, GroupModel, ShiftSystem, SoficMap, System};

fn interval(a: i64, len: i64) -> FiniteSubset {
    FiniteSubset::from_ints(&GroupModel::integers(), &(a..a + len).collect::<Vec<_>>()).unwrap()
}

fn shift(i: usize) -> ShiftSystem {
    match i {
        0 => ShiftSystem::full_shift(2).unwrap(),
        1 => ShiftSystem::golden_mean(),
        _ => ShiftSystem::fixed_point(),
    }
}

fn ext() -> impl Strategy<Value = ExtReal> {
    prop_oneof![Just(ExtReal::NEG_INF), (-10.0f64..10.0).prop_map(ExtReal::new)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn m_is_subadditive(i in 0usize..3, a in -4i64..4, l in 1i64..6, b in -4i64..4, k in 1i64..6, fine in any::<bool>()) {
        let sys = shift(i);
        let w1 = if fine {
            CoverSpec::window_partition(&sys, 1).unwrap()
        } else {
            CoverSpec::standard_partition(&sys)
        };
        let w2 = CoverSpec::whole(sys.group());
        let (e, f) = (interval(a, l), interval(b, k));
        let m = |s: &FiniteSubset| m_value(&sys, &w1, &w2, s).unwrap();
        let (u, me, mf) = (m(&e.union(&f)), m(&e), m(&f));
        prop_assert!(u.hi.value() <= (me.hi + mf.hi).value() + 1e-12);
    }

    #[test]
    fn m_is_translation_invariant(i in 0usize..3, a in -4i64..4, l in 1i64..8, g in -500i64..500) {
        let sys = shift(i);
        let std = CoverSpec::standard_partition(&sys);
        let whole = CoverSpec::whole(sys.group());
        let f = interval(a, l);
        let moved = f.translate(sys.group(), GroupElement::scalar(g));
        prop_assert_eq!(m_value(&sys, &std, &whole, &f).unwrap(), m_value(&sys, &std, &whole, &moved).unwrap());
    }

    #[test]
    fn conditioning_on_a_finer_partition_gives_zero(i in 0usize..2, l in 1i64..10) {
        let sys = shift(i);
        let std = CoverSpec::standard_partition(&sys);
        let fine = CoverSpec::window_partition(&sys, 1).unwrap();
        prop_assert_eq!(m_value(&sys, &std, &fine, &interval(0, l)).unwrap(), Bracket::exact(ExtReal::ZERO));
    }

    #[test]
    fn neg_inf_absorbs_sums(x in ext(), y in ext()) {
        let s = x + y;
        prop_assert_eq!(s.is_neg_inf(), x.is_neg_inf() || y.is_neg_inf());
        prop_assert_eq!(ExtReal::NEG_INF.max(x), x);
        prop_assert_eq!(ExtReal::NEG_INF.min(x), ExtReal::NEG_INF);
    }

    #[test]
    fn bracket_lattice_ops_keep_order(a in ext(), b in ext(), c in ext(), d in ext()) {
        let p = Bracket::new(a.min(b), a.max(b));
        let q = Bracket::new(c.min(d), c.max(d));
        let (hi, lo) = (p.max(q), p.min(q));
        prop_assert!(hi.lo <= hi.hi && lo.lo <= lo.hi);
        prop_assert!(lo.hi <= hi.hi && lo.lo <= hi.lo);
    }

    #[test]
    fn membership_shrinks_with_delta(d in 3usize..8, lo in 0.05f64..0.4, step in 0.01f64..0.3, r in 2u64..6) {
        let sys = System::builtin("golden-mean").unwrap();
        let sigma = SoficMap::cyclic(d).unwrap();
        let f = FiniteSubset::from_ints(&GroupModel::integers(), &[0, 1]).unwrap();
        let space = MicrostateSpace::new(&sys, &sigma, &f, r).unwrap();
        let small = space.enumerate(lo).unwrap();
        let big = space.enumerate(lo + step).unwrap();
        prop_assert!(small.certified_in.iter().all(|m| big.certified_in.contains(m)));
        let opt = big.optimistic();
        prop_assert!(small.optimistic().iter().all(|m| opt.contains(m)));
    }
}
