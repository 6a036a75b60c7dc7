//! Model indices and the three local move neighborhoods.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-covariate expansion sizes `m = (m_1, …, m_p)`; `m_j = 0` marks an
/// inactive covariate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelIndex {
    sizes: Vec<usize>,
}

impl ModelIndex {
    /// Validates `p ≥ 1` and `m_j ≤ k_max`.
    pub fn new(sizes: Vec<usize>, k_max: usize) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidModel("a model needs at least one covariate slot".into()));
        }
        if let Some((j, &s)) = sizes.iter().enumerate().find(|(_, &s)| s > k_max) {
            return Err(Error::InvalidModel(format!(
                "expansion size {s} of covariate {j} exceeds K = {k_max}"
            )));
        }
        Ok(Self { sizes })
    }

    pub fn empty(p: usize) -> Self {
        Self { sizes: vec![0; p] }
    }

    /// `size · e_j`.
    pub fn unit(p: usize, j: usize, size: usize) -> Self {
        let mut sizes = vec![0; p];
        sizes[j] = size;
        Self { sizes }
    }

    pub fn p(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, j: usize) -> usize {
        self.sizes[j]
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.sizes[j] > 0
    }

    /// Active covariates in ascending order.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.sizes.iter().enumerate().filter(|(_, &s)| s > 0).map(|(j, _)| j)
    }

    pub fn support_size(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    /// `Σ_j m_j`, the number of coefficients.
    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn with_size(&self, j: usize, size: usize) -> Self {
        let mut sizes = self.sizes.clone();
        sizes[j] = size;
        Self { sizes }
    }

    /// Coefficient slots `(j, k)` in canonical order: `j` ascending, then
    /// `k = 1..=m_j`.
    pub fn layout(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.active().flat_map(move |j| (1..=self.sizes[j]).map(move |k| (j, k)))
    }
}

impl fmt::Display for ModelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

pub fn support(m: &ModelIndex) -> BTreeSet<usize> {
    m.active().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Addition,
    Deletion,
    Adjustment,
}

impl MoveKind {
    pub const ALL: [MoveKind; 3] = [MoveKind::Addition, MoveKind::Deletion, MoveKind::Adjustment];

    /// The move that undoes this one.
    pub fn reverse(self) -> Self {
        match self {
            MoveKind::Addition => MoveKind::Deletion,
            MoveKind::Deletion => MoveKind::Addition,
            MoveKind::Adjustment => MoveKind::Adjustment,
        }
    }

    pub fn index(self) -> usize {
        match self {
            MoveKind::Addition => 0,
            MoveKind::Deletion => 1,
            MoveKind::Adjustment => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            MoveKind::Addition => '+',
            MoveKind::Deletion => '-',
            MoveKind::Adjustment => '=',
        }
    }
}

/// Candidate models reachable from `m` by one move of the given kind.
///
/// * addition: `m + x e_j` for inactive `j`, `x ∈ 1..=K`
/// * deletion: `m - m_j e_j` for active `j`
/// * adjustment: change one active `m_j` to another value in `1..=K`
pub fn neighborhood(m: &ModelIndex, kind: MoveKind, k_max: usize) -> Vec<ModelIndex> {
    match kind {
        MoveKind::Addition => (0..m.p())
            .filter(|&j| !m.is_active(j))
            .flat_map(|j| (1..=k_max).map(move |x| m.with_size(j, x)))
            .collect(),
        MoveKind::Deletion => m.active().map(|j| m.with_size(j, 0)).collect(),
        MoveKind::Adjustment => m
            .active()
            .flat_map(|j| {
                let cur = m.size(j);
                (1..=k_max).filter(move |&x| x != cur).map(move |x| m.with_size(j, x))
            })
            .collect(),
    }
}
