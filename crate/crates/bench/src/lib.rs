//! Benchmark fixtures shared by the criterion targets.

use sel_core::{FiniteSubset, GroupModel, SoficMap, System};

pub fn system(name: &str) -> System {
    System::builtin(name).expect("built-in system")
}

pub fn window(xs: &[i64]) -> FiniteSubset {
    FiniteSubset::from_ints(&GroupModel::integers(), xs).expect("integer window")
}

pub fn cyclic(d: usize) -> SoficMap {
    SoficMap::cyclic(d).expect("cyclic sofic map")
}
