//! Checkers and generators for the classification criteria.

mod ratio;
mod thm13;

pub use ratio::{
    check_prop24, defect_experiment, defect_of, kp_classify, prop21_diagnostic, Defect,
    DefectOutcome, KpClass, KpReport, Prop21Report, Prop24Report, Prop24Row,
};
pub use thm13::{
    check_proof_bounds, check_thm13, extract_Ei, gen_thm13_witnesses, mk_family, MkFamily, MkRow,
    Thm13Witness, WITNESS_NORM_TOL,
};
