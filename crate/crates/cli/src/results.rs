//! The `results.csv` table: one row per (scenario, ρ, quantity).

use std::io::Write;

use csma_core::bounds::BoundReport;
use csma_core::io::num;

use crate::Result;

pub const RESULTS_HEADER: [&str; 6] = ["scenario", "rho", "quantity", "value", "provenance", "vacuous"];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    /// Empty for quantities that do not depend on the load.
    pub rho: Option<f64>,
    pub quantity: String,
    pub value: f64,
    /// Seeds, witness or strategy the value came from.
    pub provenance: String,
    pub vacuous: bool,
}

impl ResultRow {
    pub fn new(scenario: &str, rho: Option<f64>, quantity: impl Into<String>, value: f64, provenance: impl Into<String>) -> Self {
        Self {
            scenario: scenario.to_string(),
            rho,
            quantity: quantity.into(),
            value,
            provenance: provenance.into(),
            vacuous: false,
        }
    }

    /// `bound_<kind>_<target>[<tag>]`, provenance the witness.
    pub fn from_bound(scenario: &str, tag: Option<&str>, r: &BoundReport, rho: f64) -> Self {
        let mut quantity = format!("bound_{}_{}", r.kind, r.target);
        if let Some(t) = tag {
            quantity.push_str(&format!("[{t}]"));
        }
        Self {
            scenario: scenario.to_string(),
            rho: Some(rho),
            quantity,
            value: r.value,
            provenance: r.witness.descriptor(),
            vacuous: r.vacuous,
        }
    }

    fn record(&self) -> [String; 6] {
        [
            self.scenario.clone(),
            self.rho.map(num).unwrap_or_default(),
            self.quantity.clone(),
            num(self.value),
            self.provenance.clone(),
            self.vacuous.to_string(),
        ]
    }
}

pub fn write_results<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULTS_HEADER)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let rows = vec![ResultRow::new("s", Some(0.5), "theta_0[a]", 0.75, "a")];
        let mut buf = Vec::new();
        write_results(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "scenario,rho,quantity,value,provenance,vacuous\ns,0.5,theta_0[a],0.75,a,false\n"
        );
    }
}
