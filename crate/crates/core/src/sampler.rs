//! Subspace Carlin-Chib sampler over `(m, θ)`.
//!
//! Each iteration picks a move kind, draws a coefficient vector for every
//! candidate in the move's neighborhood from `N(lse_k, σ²I)`, scores it with
//! the importance weight `A_k = ρ_δ(θ_k) / φ(θ_k; lse_k, σ²I)`, proposes a
//! candidate proportionally to `A_k`, and accepts it with the ratio of the
//! forward and reverse neighborhood weight sums.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::log_sum_exp;
use crate::model_space::{neighborhood, ModelIndex, MoveKind};
use crate::prior::{log_prior_density_unchecked, Coefficients, PriorParams, LOG_ZERO};
use crate::proposal::{gaussian_log_density_sq, GramCache, ProposalParams};
use crate::risk::{Dataset, Temperature};
use crate::rng::{substream, Phase};

/// Move-kind probabilities `(q[+], q[−], q[=])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveProbs {
    pub addition: f64,
    pub deletion: f64,
    pub adjustment: f64,
}

impl MoveProbs {
    pub fn new(addition: f64, deletion: f64, adjustment: f64) -> Result<Self> {
        let q = Self { addition, deletion, adjustment };
        if q.as_array().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("move probabilities must be non-negative: {q:?}")));
        }
        if (q.total() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "move probabilities must sum to 1, got {}",
                q.total()
            )));
        }
        Ok(q)
    }

    pub fn uniform() -> Self {
        Self { addition: 1.0 / 3.0, deletion: 1.0 / 3.0, adjustment: 1.0 / 3.0 }
    }

    pub fn get(&self, kind: MoveKind) -> f64 {
        self.as_array()[kind.index()]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.addition, self.deletion, self.adjustment]
    }

    fn total(&self) -> f64 {
        self.addition + self.deletion + self.adjustment
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MoveKind {
        let u: f64 = rng.random::<f64>() * self.total();
        let mut acc = 0.0;
        let mut last = MoveKind::Adjustment;
        for kind in MoveKind::ALL {
            let q = self.get(kind);
            if q > 0.0 {
                acc += q;
                last = kind;
                if u < acc {
                    return kind;
                }
            }
        }
        last
    }
}

/// What a rejected move leaves as the current coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionPolicy {
    /// Adopt the fresh proposal draw made for the current model during the
    /// iteration (reverse-neighborhood draw for `+`/`−`, the dedicated redraw
    /// for `=`).
    FreshDraw,
    /// Keep `θ(t−1)` unchanged.
    KeepPrevious,
}

/// Tuning constants of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub prior: PriorParams,
    pub temperature: Temperature,
    /// `None` selects `1/δ`, the per-coordinate posterior scale when columns
    /// have unit mean square.
    pub sigma2_prop: Option<f64>,
    /// `None` selects `1e-8 · n`.
    pub ridge_lambda: Option<f64>,
    pub k_max: usize,
    pub move_probs: MoveProbs,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub rejection: RejectionPolicy,
}

impl SamplerConfig {
    pub fn builder(p: usize) -> SamplerConfigBuilder {
        SamplerConfigBuilder {
            p,
            alpha: 0.25,
            c_radius: 1e6,
            temperature: None,
            sigma2_prop: None,
            ridge_lambda: None,
            k_max: 8,
            move_probs: MoveProbs::uniform(),
            iterations: 1000,
            burn_in: None,
            seed: 0,
            rejection: RejectionPolicy::FreshDraw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if self.prior.p() == 1 && self.k_max == 1 {
            return Err(Error::NoAvailableMove);
        }
        MoveProbs::new(self.move_probs.addition, self.move_probs.deletion, self.move_probs.adjustment)?;
        ProposalParams::new(self.sigma2_prop.unwrap_or(1.0), self.ridge_lambda.unwrap_or(0.0))?;
        if self.burn_in >= self.iterations && !(self.iterations == 0 && self.burn_in == 0) {
            return Err(Error::BurnIn { burn_in: self.burn_in, iterations: self.iterations });
        }
        Ok(())
    }

    pub fn proposal_params(&self, n: usize, delta: f64) -> Result<ProposalParams> {
        ProposalParams::new(
            self.sigma2_prop.unwrap_or(1.0 / delta),
            self.ridge_lambda.unwrap_or_else(|| ProposalParams::default_ridge(n)),
        )
    }
}

#[derive(Debug, Clone)]
pub struct SamplerConfigBuilder {
    p: usize,
    alpha: f64,
    c_radius: f64,
    temperature: Option<Temperature>,
    sigma2_prop: Option<f64>,
    ridge_lambda: Option<f64>,
    k_max: usize,
    move_probs: MoveProbs,
    iterations: usize,
    burn_in: Option<usize>,
    seed: u64,
    rejection: RejectionPolicy,
}

impl SamplerConfigBuilder {
    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn c_radius(mut self, c: f64) -> Self {
        self.c_radius = c;
        self
    }

    pub fn temperature(mut self, t: Temperature) -> Self {
        self.temperature = Some(t);
        self
    }

    pub fn sigma2_prop(mut self, s2: f64) -> Self {
        self.sigma2_prop = Some(s2);
        self
    }

    pub fn ridge_lambda(mut self, lambda: f64) -> Self {
        self.ridge_lambda = Some(lambda);
        self
    }

    pub fn k_max(mut self, k: usize) -> Self {
        self.k_max = k;
        self
    }

    pub fn move_probs(mut self, q: MoveProbs) -> Self {
        self.move_probs = q;
        self
    }

    pub fn iterations(mut self, t: usize) -> Self {
        self.iterations = t;
        self
    }

    /// Defaults to `T / 2`.
    pub fn burn_in(mut self, b: usize) -> Self {
        self.burn_in = Some(b);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rejection(mut self, policy: RejectionPolicy) -> Self {
        self.rejection = policy;
        self
    }

    pub fn build(self) -> Result<SamplerConfig> {
        let temperature = self
            .temperature
            .ok_or_else(|| Error::InvalidParameter("an inverse temperature must be given".into()))?;
        let config = SamplerConfig {
            prior: PriorParams::new(self.alpha, self.c_radius, self.p)?,
            temperature,
            sigma2_prop: self.sigma2_prop,
            ridge_lambda: self.ridge_lambda,
            k_max: self.k_max,
            move_probs: self.move_probs,
            iterations: self.iterations,
            burn_in: self.burn_in.unwrap_or(self.iterations / 2),
            seed: self.seed,
            rejection: self.rejection,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Current `(m, θ)` with its cached unnormalized log posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub model: ModelIndex,
    pub coefficients: Coefficients,
    pub cached_log_score: f64,
    pub empirical_risk: f64,
}

/// One scored candidate `(k, θ_k)` with `log A_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub model: ModelIndex,
    pub theta: Coefficients,
    /// `log ρ_δ(θ_k)` up to the global normalizer.
    pub log_score: f64,
    pub log_proposal: f64,
    pub log_weight: f64,
    pub empirical_risk: f64,
    pub singular_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub kind: MoveKind,
    /// `None` when every forward candidate had zero weight.
    pub proposed: Option<ModelIndex>,
    pub acceptance_prob: f64,
    pub accepted: bool,
    /// Empirical risk of `θ(t)`.
    pub empirical_risk: f64,
    pub support_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    pub model: ModelIndex,
    pub coefficients: Coefficients,
    pub empirical_risk: f64,
}

/// `(m(t), θ(t))` for `t = 0..=T` plus per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub p: usize,
    pub delta: f64,
    pub states: Vec<TraceState>,
    pub records: Vec<IterationRecord>,
}

impl ChainTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> &TraceState {
        self.states.last().expect("a trace holds at least the initial state")
    }
}

/// Zero the probabilities of moves that are impossible from `m` and
/// renormalize the rest.
pub fn effective_move_probs(m: &ModelIndex, q: &MoveProbs, k_max: usize) -> Result<MoveProbs> {
    let s = m.support_size();
    let mut eff = *q;
    if s >= m.p() {
        eff.addition = 0.0;
    }
    if s <= 1 {
        eff.deletion = 0.0;
    }
    if k_max <= 1 || s == 0 {
        eff.adjustment = 0.0;
    }
    let total = eff.total();
    if total <= 0.0 {
        return Err(Error::NoAvailableMove);
    }
    Ok(MoveProbs {
        addition: eff.addition / total,
        deletion: eff.deletion / total,
        adjustment: eff.adjustment / total,
    })
}

/// Acceptance probability of a jump `m → k` made by a move of `kind`, given
/// the log weight totals of the forward neighborhood of `m` and the reverse
/// neighborhood of `k`. `q_cur` and `q_new` are the effective move
/// probabilities at `m` and `k`.
pub fn acceptance_probability(
    kind: MoveKind,
    q_cur: &MoveProbs,
    q_new: &MoveProbs,
    log_forward_total: f64,
    log_reverse_total: f64,
) -> f64 {
    let log_ratio =
        q_new.get(kind.reverse()).ln() + log_forward_total - q_cur.get(kind).ln() - log_reverse_total;
    if log_ratio.is_nan() {
        return 0.0;
    }
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

/// `γ_k = A_k / Σ_h A_h`, computed in log space.
pub fn selection_probabilities(scores: &[CandidateScore]) -> Vec<f64> {
    let w: Vec<f64> = scores.iter().map(|c| c.log_weight).collect();
    let total = log_sum_exp(&w);
    if total == f64::NEG_INFINITY {
        return vec![0.0; w.len()];
    }
    w.iter().map(|v| (v - total).exp()).collect()
}

fn sample_index(log_weights: &[f64], total: f64, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in log_weights.iter().enumerate() {
        if *w == f64::NEG_INFINITY {
            continue;
        }
        acc += (w - total).exp();
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// A sampler bound to one dataset.
pub struct Sampler<'a> {
    data: &'a Dataset,
    config: SamplerConfig,
    delta: f64,
    proposal: ProposalParams,
    cache: GramCache,
}

impl<'a> Sampler<'a> {
    pub fn new(data: &'a Dataset, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        if config.prior.p() != data.p() {
            return Err(Error::DimensionMismatch { expected: data.p(), got: config.prior.p() });
        }
        let delta = config.temperature.resolve(data.n())?;
        let proposal = config.proposal_params(data.n(), delta)?;
        let cache = GramCache::new(data, config.k_max);
        Ok(Self { data, config, delta, proposal, cache })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn proposal(&self) -> &ProposalParams {
        &self.proposal
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    pub fn effective_move_probs(&self, m: &ModelIndex) -> Result<MoveProbs> {
        effective_move_probs(m, &self.config.move_probs, self.config.k_max)
    }

    fn score_with<R: Rng + ?Sized>(&self, model: &ModelIndex, rng: &mut R) -> CandidateScore {
        let cols = self.cache.columns(model);
        let sol = self.cache.lse(&cols, self.proposal.ridge_lambda());
        let sigma2 = self.proposal.sigma2_prop();
        let sd = sigma2.sqrt();
        let mut theta = sol.beta.clone();
        let mut sq = 0.0;
        for t in theta.iter_mut() {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            let step = sd * z;
            *t += step;
            sq += step * step;
        }
        let log_proposal = gaussian_log_density_sq(theta.len(), sq, sigma2);
        let l1: f64 = theta.iter().map(|v| v.abs()).sum();
        let empirical_risk = self.cache.rss(&cols, &theta) / self.data.n() as f64;
        let log_prior = log_prior_density_unchecked(model, l1, &self.config.prior);
        let log_score = if log_prior == LOG_ZERO { LOG_ZERO } else { log_prior - self.delta * empirical_risk };
        CandidateScore {
            model: model.clone(),
            theta: Coefficients::from_flat(model, &theta).expect("layout matches the model"),
            log_score,
            log_proposal,
            log_weight: log_score - log_proposal,
            empirical_risk,
            singular_fallback: sol.singular_fallback,
        }
    }

    /// Draw and score one coefficient vector per candidate. Candidate `i`
    /// uses the substream `(seed, iteration, phase, i)`, so results do not
    /// depend on evaluation order.
    pub fn score_candidates(&self, models: &[ModelIndex], iteration: u64, phase: Phase) -> Vec<CandidateScore> {
        models
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mut rng = substream(self.config.seed, iteration, phase, i as u64);
                self.score_with(m, &mut rng)
            })
            .collect()
    }

    /// Starting state: the single covariate most correlated with `y`, with
    /// one basis function, and `θ(0)` drawn from its proposal.
    pub fn init(&self) -> ChainState {
        let p = self.data.p();
        let mut best = (0, f64::NEG_INFINITY);
        for j in 0..p {
            let c = self.data.correlation(j).abs();
            if c > best.1 {
                best = (j, c);
            }
        }
        let model = ModelIndex::unit(p, best.0, 1);
        let mut rng = substream(self.config.seed, 0, Phase::Init, 0);
        state_from(self.score_with(&model, &mut rng))
    }

    /// One full iteration `t ≥ 1` from `state`.
    pub fn step(&self, t: usize, state: &ChainState) -> Result<(ChainState, IterationRecord)> {
        let it = t as u64;
        let current = &state.model;
        let q_cur = self.effective_move_probs(current)?;
        let mut ctrl = substream(self.config.seed, it, Phase::Control, 0);
        let kind = q_cur.sample(&mut ctrl);
        let u_select: f64 = ctrl.random();
        let u_accept: f64 = ctrl.random();

        let forward_models = neighborhood(current, kind, self.config.k_max);
        let mut forward = self.score_candidates(&forward_models, it, Phase::Forward);
        let forward_w: Vec<f64> = forward.iter().map(|c| c.log_weight).collect();
        let forward_total = log_sum_exp(&forward_w);

        if forward_total == f64::NEG_INFINITY {
            let record = IterationRecord {
                iteration: t,
                kind,
                proposed: None,
                acceptance_prob: 0.0,
                accepted: false,
                empirical_risk: state.empirical_risk,
                support_size: current.support_size(),
            };
            return Ok((state.clone(), record));
        }

        let chosen = forward.swap_remove(sample_index(&forward_w, forward_total, u_select));
        let reverse_models = neighborhood(&chosen.model, kind.reverse(), self.config.k_max);
        let back = reverse_models
            .iter()
            .position(|m| m == current)
            .expect("the current model lies in the reverse neighborhood");
        let mut reverse = self.score_candidates(&reverse_models, it, Phase::Reverse);
        if kind == MoveKind::Adjustment {
            // Dedicated redraw of θ for the current model.
            let mut rng = substream(self.config.seed, it, Phase::Current, 0);
            reverse[back] = self.score_with(current, &mut rng);
        }
        let reverse_w: Vec<f64> = reverse.iter().map(|c| c.log_weight).collect();
        let reverse_total = log_sum_exp(&reverse_w);

        let q_new = self.effective_move_probs(&chosen.model)?;
        let acceptance_prob = acceptance_probability(kind, &q_cur, &q_new, forward_total, reverse_total);
        let accepted = u_accept < acceptance_prob;
        let proposed = chosen.model.clone();

        let next = if accepted {
            state_from(chosen)
        } else {
            match self.config.rejection {
                RejectionPolicy::FreshDraw => state_from(reverse.swap_remove(back)),
                RejectionPolicy::KeepPrevious => state.clone(),
            }
        };
        debug_assert!(self.cached_score_is_consistent(&next));

        let record = IterationRecord {
            iteration: t,
            kind,
            proposed: Some(proposed),
            acceptance_prob,
            accepted,
            empirical_risk: next.empirical_risk,
            support_size: next.model.support_size(),
        };
        Ok((next, record))
    }

    /// `T` iterations from [`Sampler::init`].
    pub fn run(&self) -> Result<ChainTrace> {
        let mut state = self.init();
        let mut states = Vec::with_capacity(self.config.iterations + 1);
        let mut records = Vec::with_capacity(self.config.iterations);
        states.push(trace_state(&state));
        for t in 1..=self.config.iterations {
            let (next, record) = self.step(t, &state)?;
            state = next;
            states.push(trace_state(&state));
            records.push(record);
        }
        Ok(ChainTrace { p: self.data.p(), delta: self.delta, states, records })
    }

    fn cached_score_is_consistent(&self, state: &ChainState) -> bool {
        let direct = crate::risk::log_gibbs_score(
            &state.model,
            &state.coefficients,
            self.data,
            self.delta,
            &self.config.prior,
        )
        .expect("chain states are conformal");
        if direct == LOG_ZERO || state.cached_log_score == LOG_ZERO {
            return direct == state.cached_log_score;
        }
        (direct - state.cached_log_score).abs() <= 1e-7 * (1.0 + direct.abs())
    }
}

fn state_from(c: CandidateScore) -> ChainState {
    ChainState {
        model: c.model,
        coefficients: c.theta,
        cached_log_score: c.log_score,
        empirical_risk: c.empirical_risk,
    }
}

fn trace_state(s: &ChainState) -> TraceState {
    TraceState {
        model: s.model.clone(),
        coefficients: s.coefficients.clone(),
        empirical_risk: s.empirical_risk,
    }
}

pub fn init_chain(data: &Dataset, config: &SamplerConfig) -> Result<ChainState> {
    Ok(Sampler::new(data, config.clone())?.init())
}

pub fn run_chain(data: &Dataset, config: &SamplerConfig) -> Result<ChainTrace> {
    Sampler::new(data, config.clone())?.run()
}
