pub mod amenable;
pub mod entropy;
pub mod error;
pub mod extreal;
pub mod group;
pub mod microstate;
pub mod perm;
pub mod report;
pub mod shift;
pub mod sofic;
pub mod system;

pub use amenable::{AmenableEstimate, CrossCheck, JoinCover, SubadditiveTrace};
pub use entropy::{Caps, Schedule};
pub use error::{Error, Result};
pub use extreal::{Bracket, CountBracket, ExtReal, Mode};
pub use group::{FiniteSubset, FolnerSet, GroupElement, GroupModel, SubgroupChain};
pub use shift::{CoverSpec, InvariantMeasure, OdometerSystem, ShiftSystem, Symbol};
pub use sofic::{GoodnessReport, Permutation, SoficMap};
pub use system::System;
pub use report::{Cell, Check, Directionality, EntropyReport, Pipeline};
