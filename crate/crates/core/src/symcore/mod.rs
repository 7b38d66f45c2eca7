//! Exact symmetric-polynomial arithmetic in the power-sum basis.

mod mpoly;
mod partition;
mod powersum;
mod rational;
mod reduce;

pub use mpoly::MPoly;
pub use partition::{compositions, partitions_in_box, partitions_of_weight, Partition};
pub use powersum::{PowerSumPoly, PowerSumTerm};
pub use rational::{
    cr_from_c64, cr_int, cr_ratio, cr_to_c64, format_rational, parse_crational, parse_rational,
    Coeff, CRational,
};
pub use reduce::{eval_powersum, monomial_expansion, reduce_length};
