use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::null_space;
use crate::model::top_r_support;

/// Above this many columns the forced off-support index of the restricted
/// conditions is chosen greedily instead of by trying every candidate.
const EXACT_FORCED_INDEX_LIMIT: usize = 16;

/// One null-space-type condition to probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NspQuery {
    /// `Σ_S |d_i| ≤ γ Σ_{Sᶜ} |d_i| + τ√(r/m)‖Ad‖` for all `|S| = r`.
    RobustNsp { r: usize, gamma: f64, tau: f64 },
    /// Restricted variant with capped on-support terms over `|I| = l`, for
    /// directions with `‖d_{Sᶜ}‖∞ ≥ η`.
    Rrnsp { r: usize, l: usize, eta: f64, cap: f64, gamma: f64, tau: f64 },
    /// The restricted variant for every `l = 1..r` with `η = α_{r−l}`.
    Rsrnsp { r: usize, alpha: Vec<f64>, cap: f64, gamma: f64, tau: f64 },
    /// Restricted eigenvalue `χ(c)` over the cone `‖d_{Sᶜ}‖₁ ≤ c‖d_S‖₁`.
    Rec { r: usize, c: f64 },
}

/// Outcome of a witness search. `Violated` is a proof; `NoViolationFound`
/// only reports that the budget was exhausted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum NspVerdict {
    Violated {
        witness: Vec<f64>,
        support: Vec<usize>,
        subset: Vec<usize>,
        lhs: f64,
        rhs: f64,
    },
    NoViolationFound {
        budget: usize,
        /// For REC queries, the smallest sampled `‖Ad‖/(√m‖d‖)` in the cone.
        estimate: Option<f64>,
        certified: bool,
    },
}

impl NspVerdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, NspVerdict::Violated { .. })
    }
}

/// Unit candidate directions: the null-space basis, random combinations of
/// it, random Gaussian directions and sparse perturbations of null vectors.
fn candidates(a: &DMatrix<f64>, budget: usize, seed: u64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    let null = null_space(a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng, len: usize| DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut out: Vec<DVector<f64>> = null.column_iter().map(|c| c.into_owned()).take(budget).collect();
    let mut turn = 0usize;
    while out.len() < budget {
        turn += 1;
        let mut d = match (turn % 3, null.ncols()) {
            (0, k) if k > 0 => &null * gauss(&mut rng, k),
            (2, k) if k > 0 => {
                let mut d = &null * gauss(&mut rng, k);
                let spread = d.amax().max(1e-12);
                let count = rng.gen_range(1..=n.min(3));
                for i in sample(&mut rng, n, count).into_iter() {
                    d[i] += 0.1 * spread * rng.sample::<f64, _>(StandardNormal);
                }
                d
            }
            _ => gauss(&mut rng, n),
        };
        let norm = d.norm();
        if norm > 0.0 {
            d /= norm;
            out.push(d);
        }
    }
    out
}

fn residual_term(a: &DMatrix<f64>, d: &DVector<f64>, r: usize, tau: f64) -> f64 {
    tau * (r as f64 / a.nrows() as f64).sqrt() * (a * d).norm()
}

fn violates(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + 1e-12 * (1.0 + lhs.abs())
}

fn check_robust(a: &DMatrix<f64>, d: &DVector<f64>, r: usize, gamma: f64, tau: f64) -> Option<NspVerdict> {
    let support = top_r_support(d, r);
    let lhs: f64 = support.iter().map(|&i| d[i].abs()).sum();
    let off = d.iter().map(|v| v.abs()).sum::<f64>() - lhs;
    let rhs = gamma * off + residual_term(a, d, r, tau);
    violates(lhs, rhs).then(|| NspVerdict::Violated {
        witness: d.iter().copied().collect(),
        support: support.clone(),
        subset: support,
        lhs,
        rhs,
    })
}

/// Best `(I, S)` for the restricted inequality with index `forced` kept
/// outside `S`: maximizes `Σ_I g_i + γ Σ_S |d_i|` by dynamic programming.
fn best_sets(mags: &[f64], caps: &[f64], r: usize, l: usize, gamma: f64, forced: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = mags.len();
    if n < r + 1 || l > r {
        return None;
    }
    let rest = r - l;
    let neg = f64::NEG_INFINITY;
    let width = (l + 1) * (rest + 1);
    let at = |p: usize, q: usize| p * (rest + 1) + q;
    // choice: 0 = skip, 1 = into I, 2 = into S \ I
    let mut value = vec![neg; width];
    value[at(0, 0)] = 0.0;
    let mut choice = vec![0u8; n * width];
    for i in 0..n {
        let mut next = value.clone();
        let row = &mut choice[i * width..(i + 1) * width];
        if i != forced {
            for p in 0..=l {
                for q in 0..=rest {
                    let cur = value[at(p, q)];
                    if cur == neg {
                        continue;
                    }
                    if p < l {
                        let cand = cur + caps[i] + gamma * mags[i];
                        if cand > next[at(p + 1, q)] {
                            next[at(p + 1, q)] = cand;
                            row[at(p + 1, q)] = 1;
                        }
                    }
                    if q < rest {
                        let cand = cur + gamma * mags[i];
                        if cand > next[at(p, q + 1)] {
                            next[at(p, q + 1)] = cand;
                            row[at(p, q + 1)] = 2;
                        }
                    }
                }
            }
        }
        value = next;
    }
    if value[at(l, rest)] == neg {
        return None;
    }
    let (mut p, mut q) = (l, rest);
    let mut subset = Vec::new();
    let mut support = Vec::new();
    for i in (0..n).rev() {
        match choice[i * width + at(p, q)] {
            1 => {
                subset.push(i);
                support.push(i);
                p -= 1;
            }
            2 => {
                support.push(i);
                q -= 1;
            }
            _ => {}
        }
    }
    subset.sort_unstable();
    support.sort_unstable();
    Some((subset, support))
}

#[allow(clippy::too_many_arguments)]
fn check_restricted(
    a: &DMatrix<f64>,
    d: &DVector<f64>,
    r: usize,
    l: usize,
    eta: f64,
    cap: f64,
    gamma: f64,
    tau: f64,
) -> Option<NspVerdict> {
    let n = d.len();
    let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let caps: Vec<f64> = mags.iter().map(|&t| t.min(2.0 * cap - t)).collect();
    let eligible: Vec<usize> = (0..n).filter(|&j| mags[j] >= eta).collect();
    let forced: Vec<usize> = if n <= EXACT_FORCED_INDEX_LIMIT {
        eligible
    } else {
        eligible.into_iter().min_by(|&i, &j| mags[i].total_cmp(&mags[j])).into_iter().collect()
    };
    let resid = residual_term(a, d, r, tau);
    let total: f64 = mags.iter().sum();
    let mut best: Option<NspVerdict> = None;
    let mut best_gap = 0.0;
    for j in forced {
        let Some((subset, support)) = best_sets(&mags, &caps, r, l, gamma, j) else { continue };
        let lhs: f64 = subset.iter().map(|&i| caps[i]).sum();
        let on: f64 = support.iter().map(|&i| mags[i]).sum();
        let rhs = gamma * (total - on) + resid;
        if violates(lhs, rhs) && lhs - rhs > best_gap {
            best_gap = lhs - rhs;
            best = Some(NspVerdict::Violated { witness: d.iter().copied().collect(), support, subset, lhs, rhs });
        }
    }
    best
}

/// Scaled copies of a unit direction worth testing for scale-dependent conditions.
fn scales(d: &DVector<f64>, r: usize, eta: f64, cap: f64) -> Vec<f64> {
    let peak = d.amax();
    let mut out = vec![1.0];
    if peak > 0.0 {
        for f in [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
            out.push(f * cap / peak);
        }
    }
    let mut mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    mags.sort_by(|x, y| y.total_cmp(x));
    if let Some(&next) = mags.get(r) {
        if next > 0.0 && eta > 0.0 {
            out.push(eta / next);
            out.push(1.5 * eta / next);
        }
    }
    out
}

fn check_rec(a: &DMatrix<f64>, d: &DVector<f64>, r: usize, c: f64) -> Option<(f64, Vec<usize>)> {
    let support = top_r_support(d, r);
    let on: f64 = support.iter().map(|&i| d[i].abs()).sum();
    let off = d.iter().map(|v| v.abs()).sum::<f64>() - on;
    (off <= c * on * (1.0 + 1e-12)).then(|| ((a * d).norm() / ((a.nrows() as f64).sqrt() * d.norm()), support))
}

/// Searches up to `search_budget` candidate directions for a violation of `query`.
pub fn nsp_witness_search(a: &DMatrix<f64>, query: &NspQuery, search_budget: usize, seed: u64) -> NspVerdict {
    let dirs = candidates(a, search_budget, seed);
    let none = |estimate| NspVerdict::NoViolationFound { budget: search_budget, estimate, certified: false };
    match query {
        NspQuery::RobustNsp { r, gamma, tau } => {
            dirs.iter().find_map(|d| check_robust(a, d, *r, *gamma, *tau)).unwrap_or_else(|| none(None))
        }
        NspQuery::Rrnsp { r, l, eta, cap, gamma, tau } => dirs
            .iter()
            .find_map(|d| {
                scales(d, *r, *eta, *cap)
                    .into_iter()
                    .find_map(|s| check_restricted(a, &(d * s), *r, *l, *eta, *cap, *gamma, *tau))
            })
            .unwrap_or_else(|| none(None)),
        NspQuery::Rsrnsp { r, alpha, cap, gamma, tau } => dirs
            .iter()
            .find_map(|d| {
                (1..=*r).find_map(|l| {
                    let eta = alpha.get(r - l).copied().unwrap_or(0.0);
                    scales(d, *r, eta, *cap)
                        .into_iter()
                        .find_map(|s| check_restricted(a, &(d * s), *r, l, eta, *cap, *gamma, *tau))
                })
            })
            .unwrap_or_else(|| none(None)),
        NspQuery::Rec { r, c } => {
            let scale = a.column_iter().map(|col| col.norm()).fold(0.0, f64::max) / (a.nrows() as f64).sqrt();
            let mut best: Option<(f64, Vec<usize>, &DVector<f64>)> = None;
            for d in &dirs {
                if let Some((val, support)) = check_rec(a, d, *r, *c) {
                    if best.as_ref().map_or(true, |b| val < b.0) {
                        best = Some((val, support, d));
                    }
                }
            }
            match best {
                Some((val, support, d)) if val <= 1e-10 * (1.0 + scale) => NspVerdict::Violated {
                    witness: d.iter().copied().collect(),
                    subset: support.clone(),
                    support,
                    lhs: val,
                    rhs: 0.0,
                },
                Some((val, ..)) => none(Some(val)),
                None => none(None),
            }
        }
    }
}
