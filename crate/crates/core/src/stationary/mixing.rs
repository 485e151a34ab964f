//! Exact total-variation mixing times of the fixed-rate activity process.
//!
//! The transition matrix `P(t) = exp(tQ)` is obtained for every initial state
//! at once. A short base step `t₀` is computed by uniformization, longer times
//! by repeated squaring (`P(2t) = P(t)²`), and the first crossing of `ε` is
//! located by bisection using products of the stored powers.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use super::product_form::{product_form, FixedRates};
use crate::error::{Error, Result};
use crate::topology::StateSpace;

/// Default largest state space for exact mixing times.
pub const DEFAULT_MIXING_CAP: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct MixingOptions {
    pub cap: usize,
    /// Relative accuracy of the reported `t_mix`.
    pub rel_tol: f64,
    /// Smallest Poisson weight kept in the uniformization series.
    pub truncation: f64,
    /// Base step as a fraction of the mean uniformized holding time `1/Λ`.
    pub base_fraction: f64,
    /// Give up after this many squarings.
    pub max_doublings: usize,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_MIXING_CAP,
            rel_tol: 0.01,
            truncation: 1e-18,
            base_fraction: 0.5,
            max_doublings: 160,
        }
    }
}

/// `t_mix(ε)` together with the sampled distance curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingProfile {
    pub epsilon: f64,
    pub t_mix: f64,
    /// `(t, d(t))` pairs sorted by `t`.
    pub d_curve: Vec<(f64, f64)>,
}

/// Exact `t_mix(ε) = inf{t : d(t) ≤ ε}` with the default options.
pub fn mixing_time(ss: &StateSpace, rates: &FixedRates, epsilon: f64) -> Result<MixingProfile> {
    mixing_time_with(ss, rates, epsilon, MixingOptions::default())
}

pub fn mixing_time_with(
    ss: &StateSpace,
    rates: &FixedRates,
    epsilon: f64,
    opts: MixingOptions,
) -> Result<MixingProfile> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("ε = {epsilon} must lie in (0, 1/2)")));
    }
    let n = ss.len();
    if n > opts.cap {
        return Err(Error::Resource {
            what: "exact mixing-time state space",
            estimate: n,
            cap: opts.cap,
        });
    }
    let pi = product_form(ss, rates)?.pi;
    let chain = Uniformized::new(ss, rates);
    let t0 = opts.base_fraction / chain.lambda;
    let mut curve = Vec::new();
    let dist = |m: &DMatrix<f64>| worst_tv(m, &pi);

    let base = chain.expm(t0, opts.truncation);
    let d0 = dist(&base);
    curve.push((t0, d0));
    if d0 <= epsilon {
        // Already mixed within the base step: bisect on [0, t0] directly.
        let (mut lo, mut hi) = (0.0, t0);
        while (hi - lo) > opts.rel_tol * 0.5 * hi {
            let mid = 0.5 * (lo + hi);
            let d = dist(&chain.expm(mid, opts.truncation));
            curve.push((mid, d));
            if d <= epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(finish(epsilon, hi, curve));
    }

    // levels[b] = P(t0 · 2^b); only the most recent ones are needed for bisection.
    let keep = (2.0 / opts.rel_tol).log2().ceil() as usize + 2;
    let mut levels: VecDeque<(usize, DMatrix<f64>)> = VecDeque::new();
    levels.push_back((0, base));
    let mut j = 0;
    loop {
        if j >= opts.max_doublings {
            return Err(Error::Solver(format!(
                "d(t) still above ε = {epsilon} at t = {}",
                t0 * 2f64.powi(j as i32)
            )));
        }
        let next = {
            let last = &levels.back().expect("nonempty").1;
            last * last
        };
        j += 1;
        let d = dist(&next);
        curve.push((t0 * 2f64.powi(j as i32), d));
        levels.push_back((j, next));
        if levels.len() > keep {
            levels.pop_front();
        }
        if d <= epsilon {
            break;
        }
    }

    // d(t0 2^(j-1)) > ε >= d(t0 2^j). Bisect in steps of t0 2^b, b = j-2, j-3, ...
    let level = |b: usize| levels.iter().find(|(k, _)| *k == b).map(|(_, m)| m);
    let mut lo_mat = level(j - 1).expect("previous level kept").clone();
    let mut lo = t0 * 2f64.powi(j as i32 - 1);
    let mut hi = t0 * 2f64.powi(j as i32);
    let mut b = j as isize - 2;
    while (hi - lo) > opts.rel_tol * 0.5 * hi {
        let h = 0.5 * (hi - lo);
        let mid_mat = match (b >= 0).then(|| level(b as usize)).flatten() {
            Some(step) => &lo_mat * step,
            None => &lo_mat * chain.expm(h, opts.truncation),
        };
        let mid = lo + h;
        let d = dist(&mid_mat);
        curve.push((mid, d));
        if d <= epsilon {
            hi = mid;
        } else {
            lo = mid;
            lo_mat = mid_mat;
        }
        b -= 1;
    }
    Ok(finish(epsilon, hi, curve))
}

fn finish(epsilon: f64, t_mix: f64, mut curve: Vec<(f64, f64)>) -> MixingProfile {
    curve.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
    MixingProfile {
        epsilon,
        t_mix,
        d_curve: curve,
    }
}

/// `d(t) = max_u ½ Σ_v |P_t(u, v) − π(v)|` from a full transition matrix.
pub fn worst_tv(p: &DMatrix<f64>, pi: &[f64]) -> f64 {
    (0..p.nrows())
        .map(|r| 0.5 * pi.iter().enumerate().map(|(c, &q)| (p[(r, c)] - q).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Sparse uniformized kernel `P = I + Q/Λ`.
struct Uniformized {
    lambda: f64,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Uniformized {
    fn new(ss: &StateSpace, rates: &FixedRates) -> Self {
        let out: Vec<f64> = (0..ss.len())
            .map(|u| ss.moves(u).map(|m| rates.rate(m)).sum())
            .collect();
        let lambda = out.iter().cloned().fold(0.0, f64::max);
        let rows = (0..ss.len())
            .map(|u| {
                let mut row: Vec<(usize, f64)> =
                    ss.moves(u).map(|m| (m.to, rates.rate(m) / lambda)).collect();
                row.push((u, 1.0 - out[u] / lambda));
                row
            })
            .collect();
        Self { lambda, rows }
    }

    /// `exp(tQ) = Σ_k e^{-Λt} (Λt)^k / k! P^k`, truncated past the Poisson
    /// mode once the weights drop below `tail`.
    fn expm(&self, t: f64, tail: f64) -> DMatrix<f64> {
        let n = self.rows.len();
        let mean = self.lambda * t;
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut weight = (-mean).exp();
        let mut acc = &term * weight;
        let mut k = 0usize;
        loop {
            k += 1;
            weight *= mean / k as f64;
            if (k as f64 > mean && weight < tail) || k > 100_000 {
                break;
            }
            term = self.right_multiply(&term);
            acc += &term * weight;
        }
        acc
    }

    fn right_multiply(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.rows.len();
        let mut out = DMatrix::<f64>::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                // out[:, j] += m[:, i] * p
                let src = m.column(i).clone_owned();
                let mut dst = out.column_mut(j);
                dst.axpy(p, &src, 1.0);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_topology, enumerate_state_space, TopologySpec};

    fn single() -> StateSpace {
        let g = build_topology(&TopologySpec::Explicit { n: 1, edges: vec![], labels: None }).unwrap();
        enumerate_state_space(&g).unwrap()
    }

    #[test]
    fn two_state_closed_form() {
        // d(t) = ½ e^{-2t}, so t_mix(0.05) = ln(10) / 2.
        let ss = single();
        let p = mixing_time(&ss, &FixedRates::uniform(1, 1.0).unwrap(), 0.05).unwrap();
        let exact = 10f64.ln() / 2.0;
        assert!((p.t_mix - exact).abs() / exact < 0.01, "t_mix = {}", p.t_mix);
        assert!(p.t_mix >= exact * (1.0 - 1e-9));
        for &(t, d) in &p.d_curve {
            assert!((d - 0.5 * (-2.0 * t).exp()).abs() < 1e-10, "d({t}) = {d}");
        }
    }

    #[test]
    fn curve_is_monotone_and_brackets() {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![2, 2] }).unwrap();
        let ss = enumerate_state_space(&g).unwrap();
        let p = mixing_time(&ss, &FixedRates::uniform(4, 5.0).unwrap(), 0.05).unwrap();
        for w in p.d_curve.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        for &(t, d) in &p.d_curve {
            if t < p.t_mix {
                assert!(d > 0.05);
            } else {
                assert!(d <= 0.05);
            }
        }
    }

    #[test]
    fn epsilon_domain() {
        let ss = single();
        let r = FixedRates::uniform(1, 1.0).unwrap();
        assert!(matches!(mixing_time(&ss, &r, 0.5), Err(Error::Domain(_))));
        assert!(matches!(mixing_time(&ss, &r, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cap_is_enforced() {
        let ss = single();
        let opts = MixingOptions { cap: 1, ..MixingOptions::default() };
        assert!(matches!(
            mixing_time_with(&ss, &FixedRates::uniform(1, 1.0).unwrap(), 0.1, opts),
            Err(Error::Resource { .. })
        ));
    }
}
