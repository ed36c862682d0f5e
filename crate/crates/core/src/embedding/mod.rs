//! Exact joint laws of protocol transcripts on level-1 hard instances, the
//! leakage quantities of round elimination, and the simulation protocol τ_i
//! with its sampled law ν_i.

mod audit;
mod joint;
mod leakage;
mod nu;

pub use audit::{check_pinsker, pinsker_budget, round_elim_audit, AuditCheck, AuditReport, BlockAudit};
pub use joint::{
    edge_mask, enumerate_joint, enumerate_law, mask_edges, message_from_id, message_id, pair_index, JointLaw, RowEval,
    ENUMERATION_LIMIT, LAW_SEED,
};
pub use leakage::{
    check_product_property, check_sum_info, fooling_entropy, mi_first_round, mi_round_t, rectangle_gap, Budgets,
    RectangleGap, RoundTerms, SumInfo, INFO_TOLERANCE,
};
pub use nu::{build_nu, expected_tvd_mu_nu, monte_carlo_tau, simulate_tau, MonteCarlo, NuAtom, NuLaw, TauRun};

use crate::distributions::LawError;
use crate::infotheory::InfoError;
use crate::layout::LayoutError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("{count} configurations exceed the enumeration limit {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error("protocol gave a different transcript when re-run on row {0}")]
    Nondeterministic(usize),
    #[error("no principal block {0}")]
    BadBlock(usize),
    #[error("rounds are numbered from 1, got {0}")]
    BadRound(usize),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Info(#[from] InfoError),
}
