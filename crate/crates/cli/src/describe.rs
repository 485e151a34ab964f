//! Human-readable topology summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use csma_core::topology::{
    build_topology, compute_zeta, enumerate_cliques, enumerate_state_space_capped, partite_decomposition,
    TopologySpec,
};
use csma_core::Error;

use crate::Result;

/// Structural facts about a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Description {
    pub n: usize,
    pub edges: usize,
    /// `Ok(|Ω|)` or `Err(cap)` when enumeration hit the cap.
    pub states: std::result::Result<usize, usize>,
    /// Maximal-clique count by size.
    pub clique_census: BTreeMap<usize, usize>,
    pub components: Option<Vec<Vec<usize>>>,
    pub complete: bool,
    pub zeta: Option<f64>,
    /// Ω* as bit strings.
    pub omega_star: Vec<String>,
    /// Why ζ is unavailable.
    pub zeta_note: Option<String>,
}

pub fn describe(spec: &TopologySpec, state_cap: usize) -> Result<Description> {
    let g = build_topology(spec)?;
    let n = g.n_nodes();
    let mut census = BTreeMap::new();
    for c in enumerate_cliques(&g, None) {
        *census.entry(c.len()).or_insert(0) += 1;
    }
    let d = partite_decomposition(&g, None).ok();
    let (states, space) = match enumerate_state_space_capped(&g, state_cap) {
        Ok(ss) => (Ok(ss.len()), Some(ss)),
        Err(Error::Resource { cap, .. }) => (Err(cap), None),
        Err(e) => return Err(e.into()),
    };
    let mut zeta = None;
    let mut omega_star = Vec::new();
    let mut zeta_note = None;
    match (&d, &space) {
        (Some(d), Some(ss)) => match compute_zeta(ss, d) {
            Ok(s) => {
                zeta = Some(s.zeta);
                omega_star = s.omega_star.iter().map(|&i| ss.state(i).to_bits(n)).collect();
            }
            Err(e) => zeta_note = Some(e.to_string()),
        },
        (None, _) => zeta_note = Some("no partite decomposition".into()),
        (_, None) => zeta_note = Some("state space exceeds the cap".into()),
    }
    Ok(Description {
        n,
        edges: g.n_edges(),
        states,
        clique_census: census,
        complete: d.as_ref().is_some_and(|d| d.is_complete()),
        components: d.map(|d| d.components().to_vec()),
        zeta,
        omega_star,
        zeta_note,
    })
}

impl Description {
    pub fn render(&self, spec: &TopologySpec) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "topology: {spec}");
        let _ = writeln!(out, "N = {}", self.n);
        let _ = writeln!(out, "|E| = {}", self.edges);
        match self.states {
            Ok(s) => {
                let _ = writeln!(out, "|Ω| = {s}");
            }
            Err(cap) => {
                let _ = writeln!(out, "|Ω| > {cap} (enumeration cap)");
            }
        }
        let census: Vec<String> = self.clique_census.iter().map(|(s, c)| format!("{c} of size {s}")).collect();
        let _ = writeln!(out, "maximal cliques: {}", census.join(", "));
        match &self.components {
            Some(c) => {
                let sizes: Vec<String> = c.iter().map(|v| v.len().to_string()).collect();
                let _ = writeln!(
                    out,
                    "partite decomposition: K = {}, M = {}, sizes [{}]{}",
                    c.len(),
                    c.iter().map(Vec::len).max().unwrap_or(0),
                    sizes.join(", "),
                    if self.complete { ", complete" } else { "" }
                );
                for (k, v) in c.iter().enumerate() {
                    let nodes: Vec<String> = v.iter().map(usize::to_string).collect();
                    let _ = writeln!(out, "  V{} = {{{}}}", k + 1, nodes.join(", "));
                }
            }
            None => {
                let _ = writeln!(out, "partite decomposition: none");
            }
        }
        match self.zeta {
            Some(z) => {
                match as_fraction(z) {
                    Some((p, q)) => {
                        let _ = writeln!(out, "ζ = {p}/{q} ({z})");
                    }
                    None => {
                        let _ = writeln!(out, "ζ = {z}");
                    }
                }
                let _ = writeln!(out, "Ω* = {{{}}}", self.omega_star.join(", "));
            }
            None => {
                let _ = writeln!(out, "ζ unavailable: {}", self.zeta_note.as_deref().unwrap_or(""));
            }
        }
        out
    }
}

/// `p/q` with `q ≤ 1000` within `1e-12` of `x`.
pub fn as_fraction(x: f64) -> Option<(i64, i64)> {
    (1..=1000i64).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() < 1e-12).then_some((p as i64, q))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Description {
        describe(&text.parse().unwrap(), 1_000_000).unwrap()
    }

    #[test]
    fn k55() {
        let d = run("complete_partite(5,5)");
        assert_eq!((d.n, d.states, d.components.as_ref().unwrap().len()), (10, Ok(63), 2));
        assert!((d.zeta.unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(d.omega_star, vec!["1111100000", "0000011111"]);
        assert_eq!(d.clique_census.get(&2), Some(&25));
    }

    #[test]
    fn grid_and_line() {
        let d = run("grid(2,2)");
        assert_eq!(d.states, Ok(7));
        assert!((d.zeta.unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(run("line(3)").states, Ok(5));
    }

    #[test]
    fn fractions() {
        assert_eq!(as_fraction(0.19999999999999996), Some((1, 5)));
        assert_eq!(as_fraction(0.5), Some((1, 2)));
        assert_eq!(as_fraction(std::f64::consts::PI), None);
    }

    #[test]
    fn cap_is_reported() {
        let d = describe(&"line(20)".parse().unwrap(), 100).unwrap();
        assert_eq!(d.states, Err(100));
        assert!(d.render(&"line(20)".parse().unwrap()).contains("|Ω| > 100"));
    }
}
