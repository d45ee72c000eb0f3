//! Finite-scale semantics and brute-force oracles. Everything here is exact
//! rational arithmetic; real codes are queried at chosen indices only.

pub mod atoms;
pub mod fan;
pub mod ivt;
pub mod mu;
pub mod realfn;
pub mod riemann;
pub mod scalar;
pub mod structure;
pub mod verify;

use thiserror::Error;

use crate::kernel::{EvalError, FinType};

pub use fan::{check_scf, fan_modulus_muc, special_fan_from_muc, CantorTable, FanWitness};
pub use ivt::approx_ivt_oracle;
pub use mu::{exact_rate, leuk_sequence, mct_rate, mu_bounded, mu_from_rate, TailSpread};
pub use realfn::RealExpr;
pub use riemann::{riemann_sum, Partition};
pub use scalar::{Scalar, Q, Q128};
pub use structure::FiniteStructure;
pub use verify::{
    suite, verify_contract, verify_with, verify_witness, Augment, DomainSpec, Failure,
    VerificationReport, SUITES,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("type {0} is not representable in this structure")]
    Unrepresentable(FinType),
    #[error("real argument is not an exact rational: {0}")]
    Inexact(String),
    #[error("no zero below the bound")]
    NoZero,
    #[error("window of {window} terms is too small for precision {k}")]
    WindowTooSmall { window: usize, k: u64 },
    #[error("functional depends on more than {0} bits")]
    NotUniform(usize),
    #[error("tree depth {depth} exceeds the enumeration cap {cap}")]
    DepthTooLarge { depth: usize, cap: usize },
    #[error("not a partition of the unit interval: {0}")]
    NotPartition(String),
    #[error("no grid point with |f| < 1/{k} at denominator {denom}")]
    NoApproxRoot { k: u64, denom: u64 },
    #[error("free variable {0}")]
    Free(String),
    #[error("bad atom {0}")]
    BadAtom(String),
    #[error("unknown suite {0}")]
    UnknownSuite(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
