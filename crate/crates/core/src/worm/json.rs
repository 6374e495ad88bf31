use serde::{Deserialize, Serialize};

use super::{Generator, IndexSet, Monomial, Worm};
use crate::chart::Chart;
use crate::error::{Result, WormError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoFactorJson {
    #[serde(rename = "S")]
    pub set: Vec<usize>,
    pub coord: String,
    pub exp: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WormTermJson {
    pub coeff: String,
    pub mono: Vec<MonoFactorJson>,
}

/// Serialized worm: a list of `coeff * monomial` terms in canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WormJson {
    pub terms: Vec<WormTermJson>,
}

impl Worm {
    pub fn to_json(&self) -> WormJson {
        let terms = self
            .terms()
            .map(|(m, c)| WormTermJson {
                coeff: c.to_string(),
                mono: m
                    .factors()
                    .iter()
                    .map(|(g, e)| MonoFactorJson {
                        set: g.set.elements(),
                        coord: self.chart().coord(g.coord).to_string(),
                        exp: *e,
                    })
                    .collect(),
            })
            .collect();
        WormJson { terms }
    }

    pub fn from_json(chart: &std::sync::Arc<Chart>, json: &WormJson) -> Result<Worm> {
        let mut out = Worm::zero(chart);
        for t in &json.terms {
            let coeff = crate::dsl::parse_expr(&t.coeff)?;
            let mut seq = Vec::new();
            for f in &t.mono {
                let g = Generator::new(chart, IndexSet::from_indices(&f.set)?, chart.coord_index(&f.coord)?)?;
                if g.is_odd() && f.exp > 1 {
                    return Err(WormError::Grading(format!("odd generator {} raised to {}", g.label(chart), f.exp)));
                }
                seq.extend(std::iter::repeat_n(g, f.exp as usize));
            }
            if let Some((sign, m)) = Monomial::from_sequence(&seq) {
                out.add_term(m, if sign < 0 { -coeff } else { coeff });
            }
        }
        Ok(out)
    }
}
