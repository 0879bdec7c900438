//! Block-Hankel matrices and the data-based certificates built on them:
//! persistency of excitation, the shifted-pencil R-controllability test and
//! Fundamental-Lemma membership.

mod bundle;
mod controllability;
mod excitation;
mod hankel;
mod lemma;

pub use bundle::{partition_bundle, HankelBundle};
pub use controllability::{r_controllability_test, ControllabilityReport, LambdaRank, ShiftedHankelPair};
pub use excitation::{combined_pe_check, is_persistently_exciting, ExcitationReport};
pub use hankel::{block_hankel, block_hankel_range, HankelMatrix};
pub use lemma::{fl_membership, LemmaOrder, MembershipReport, MEMBERSHIP_TOL};

use crate::linalg::RANK_EPS;

/// Numeric-rank threshold policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankTol {
    /// `sigma_max * max(rows, cols) * 1e-12`, for noise-free data.
    #[default]
    Default,
    /// `sigma_max * rel`.
    Relative(f64),
    Absolute(f64),
}

impl RankTol {
    pub fn threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match *self {
            RankTol::Default => sigma_max * rows.max(cols) as f64 * RANK_EPS,
            RankTol::Relative(rel) => sigma_max * rel,
            RankTol::Absolute(abs) => abs,
        }
    }
}
