//! Sparse additive regression with PAC-Bayesian Gibbs estimators.
//!
//! Each covariate `j` contributes a truncated expansion `Σ_k θ_jk φ_k(x_j)` on
//! the trigonometric dictionary. A model is the vector of per-covariate
//! expansion sizes; the prior penalizes both the number of active covariates
//! and the total expansion size, and the Gibbs posterior tilts the prior by
//! `exp(-δ · empirical risk)`. The posterior is explored by a subspace
//! Carlin-Chib Markov chain that scores every model in a local neighborhood
//! before proposing a jump.
//!
//! Covariate indices are zero-based throughout the library; dictionary
//! indices `k` are one-based (`φ_1 ≡ 1`).
//!
//! ```
//! use pacbam::prelude::*;
//!
//! let sim = simulate(&SimSpec::new(1, 60, 6, 3).unwrap()).unwrap();
//! let config = SamplerConfig::builder(sim.data.p())
//!     .temperature(Temperature::Practical { noise_var: sim.noise_var })
//!     .iterations(40)
//!     .seed(11)
//!     .build()
//!     .unwrap();
//! let trace = Sampler::new(&sim.data, config).unwrap().run().unwrap();
//! let agg = aggregated_estimate(&trace, 20).unwrap();
//! let err = rss(&agg, &sim.truth, sim.data.x(), sim.data.p()).unwrap();
//! assert!(err.is_finite());
//! ```

pub mod basis;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod model_space;
pub mod prior;
pub mod proposal;
pub mod risk;
pub mod rng;
pub mod sampler;
pub mod sim;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::basis::{eval_additive, eval_basis, AdditiveFunction, BasisIndex};
    pub use crate::error::{Error, Result};
    pub use crate::estimator::{
        aggregated_estimate, fit, predict, randomized_estimate, rss, FitResult, FitSummary, MoveStats,
    };
    pub use crate::model_space::{neighborhood, support, ModelIndex, MoveKind};
    pub use crate::prior::{
        log_ball_volume, log_eta, log_prior_density, Coefficients, PriorParams, LOG_ZERO,
    };
    pub use crate::proposal::{
        build_design, gaussian_log_density, lse, sample_proposal, DesignMatrix, ProposalParams,
    };
    pub use crate::risk::{
        empirical_risk, estimate_noise_var, excess_risk_mc, log_gibbs_score, resolve_delta, Dataset,
        ExcessRiskEstimate, Temperature,
    };
    pub use crate::sampler::{
        acceptance_probability, effective_move_probs, init_chain, run_chain, selection_probabilities,
        CandidateScore, ChainState, ChainTrace, IterationRecord, MoveProbs, RejectionPolicy, Sampler,
        SamplerConfig, SamplerConfigBuilder, TraceState,
    };
    pub use crate::sim::{gen_covariates, simulate, truth_fn, SimModel, SimOutput, SimSpec};
}
