//! The two attacks a rewrite has to survive: embedding-based attribution
//! retrieval (scored with R@k and MRR) and character n-gram verification
//! (scored with c@1).

pub mod attribution;
pub mod verification;

pub use attribution::{attribute, mrr, recall_at_k, RetrievalResult};
pub use verification::{
    c_at_1, calibrate, calibration_pairs, cng_similarity, verify, CngModel, Decision, PairRecord, ProfilePair,
    VerificationProblem,
    Weighting,
};
