//! Domain spec files: `{"primitives": [{"kind": "disk", "params": [cx, cy, r]}, ...], "grid": {"h": .., "margin": ..}}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Primitive};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSpec {
    pub kind: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub h: f64,
    #[serde(default = "default_margin")]
    pub margin: usize,
}

fn default_margin() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub primitives: Vec<PrimitiveSpec>,
    pub grid: GridSpec,
}

impl DomainSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_primitives(primitives: &[Primitive], h: f64, margin: usize) -> Self {
        let primitives = primitives
            .iter()
            .map(|p| match *p {
                Primitive::Disk { center, radius } => PrimitiveSpec {
                    kind: "disk".into(),
                    params: vec![center.x, center.y, radius],
                },
                Primitive::Rect { min, max } => PrimitiveSpec {
                    kind: "rect".into(),
                    params: vec![min.x, min.y, max.x, max.y],
                },
            })
            .collect();
        DomainSpec { primitives, grid: GridSpec { h, margin } }
    }

    pub fn build(&self) -> Result<(Domain, Grid)> {
        let prims = self
            .primitives
            .iter()
            .map(|p| match (p.kind.as_str(), p.params.as_slice()) {
                ("disk", &[cx, cy, r]) => Ok(Primitive::disk(cx, cy, r)),
                ("rect", &[x0, y0, x1, y1]) => Ok(Primitive::rect(x0, y0, x1, y1)),
                (kind, params) => Err(Error::DegeneratePrimitive(format!(
                    "unknown primitive {kind:?} with {} params",
                    params.len()
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let domain = Domain::new(prims)?;
        let grid = Grid::covering(domain.bbox, self.grid.h, self.grid.margin)?;
        Ok((domain, grid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dumbbell() {
        let text = r#"{
            "primitives": [
                {"kind": "disk", "params": [-4, 0, 3]},
                {"kind": "disk", "params": [4, 0, 3]},
                {"kind": "rect", "params": [-4, -1, 4, 1]}
            ],
            "grid": {"h": 0.05, "margin": 2}
        }"#;
        let (domain, grid) = DomainSpec::parse(text).unwrap().build().unwrap();
        assert_eq!(domain, Domain::dumbbell());
        assert_eq!(grid.h, 0.05);
    }

    #[test]
    fn rejects_unknown_kind_and_bad_arity() {
        let spec = DomainSpec {
            primitives: vec![PrimitiveSpec { kind: "ellipse".into(), params: vec![0.0; 4] }],
            grid: GridSpec { h: 0.1, margin: 2 },
        };
        assert!(spec.build().is_err());
        let spec = DomainSpec {
            primitives: vec![PrimitiveSpec { kind: "disk".into(), params: vec![0.0; 2] }],
            grid: GridSpec { h: 0.1, margin: 2 },
        };
        assert!(spec.build().is_err());
        let empty = DomainSpec { primitives: vec![], grid: GridSpec { h: 0.1, margin: 2 } };
        assert!(matches!(empty.build(), Err(Error::EmptyDomain)));
    }

    #[test]
    fn margin_defaults() {
        let s = DomainSpec::parse(r#"{"primitives":[{"kind":"disk","params":[0,0,1]}],"grid":{"h":0.1}}"#).unwrap();
        assert_eq!(s.grid.margin, 3);
    }
}
