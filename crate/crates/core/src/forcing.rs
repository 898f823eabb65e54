//! Source terms `f = (f, f_Gamma)`.
//!
//! Tabulated forcing is read from CSV with header `t,node,value`. Node ids
//! `0..N` address bulk nodes and `N..N+B` address boundary-chain positions.
//! Rows sharing a time form one frame; a frame holds from its time until the
//! next one (piecewise constant), nodes absent from a frame are zero, and
//! the forcing vanishes before the first frame.

use std::io::Read;

use serde::Deserialize;

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::spaces::FieldPair;

#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Zero,
    Constant { bulk: f64, boundary: f64 },
    /// `amplitude * cos(k pi x) cos(k pi y) * cos(2 pi frequency t)` on bulk
    /// and boundary alike.
    Mode {
        amplitude: f64,
        wavenumber: f64,
        frequency: f64,
    },
    Table(ForcingTable),
    /// Linear combination `sum_i c_i f_i`.
    Combination(Vec<(f64, Forcing)>),
}

impl Forcing {
    pub fn sample(&self, dom: &DiscreteDomain, t: f64) -> FieldPair {
        match self {
            Forcing::Zero => FieldPair::zeros(dom),
            Forcing::Constant { bulk, boundary } => FieldPair::new(
                vec![*bulk; dom.num_nodes()],
                vec![*boundary; dom.num_boundary()],
            ),
            Forcing::Mode {
                amplitude,
                wavenumber,
                frequency,
            } => {
                let pi = std::f64::consts::PI;
                let time = (2.0 * pi * frequency * t).cos();
                let bulk = dom.interpolate(|x, y| {
                    amplitude * (wavenumber * pi * x).cos() * (wavenumber * pi * y).cos() * time
                });
                FieldPair::from_bulk(dom, bulk)
            }
            Forcing::Table(table) => table.sample(dom, t),
            Forcing::Combination(parts) => {
                let mut acc = FieldPair::zeros(dom);
                for (c, f) in parts {
                    acc = acc.add_scaled(*c, &f.sample(dom, t));
                }
                acc
            }
        }
    }

    /// `self + scale * other`.
    pub fn perturbed(self, scale: f64, other: Forcing) -> Forcing {
        Forcing::Combination(vec![(1.0, self), (scale, other)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTable {
    times: Vec<f64>,
    /// Bulk values followed by boundary-chain values.
    frames: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct Row {
    t: f64,
    node: usize,
    value: f64,
}

impl ForcingTable {
    pub fn from_csv<R: Read>(reader: R, source_name: &str, dom: &DiscreteDomain) -> Result<Self> {
        let total = dom.num_nodes() + dom.num_boundary();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut times: Vec<f64> = Vec::new();
        let mut frames: Vec<Vec<f64>> = Vec::new();
        for (k, row) in rdr.deserialize::<Row>().enumerate() {
            // Header is line 1.
            let line = k + 2;
            let row = row.map_err(|e| Error::Parse {
                source_name: source_name.to_string(),
                line,
                message: e.to_string(),
            })?;
            if row.node >= total {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line,
                    message: format!("node id {} out of range 0..{total}", row.node),
                });
            }
            if !row.t.is_finite() || !row.value.is_finite() {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line,
                    message: "non-finite entry".into(),
                });
            }
            match times.last() {
                Some(&last) if last == row.t => {}
                Some(&last) if row.t < last => {
                    return Err(Error::Parse {
                        source_name: source_name.to_string(),
                        line,
                        message: format!("time {} decreases (previous {last})", row.t),
                    })
                }
                _ => {
                    times.push(row.t);
                    frames.push(vec![0.0; total]);
                }
            }
            frames.last_mut().unwrap()[row.node] = row.value;
        }
        Ok(ForcingTable { times, frames })
    }

    pub fn sample(&self, dom: &DiscreteDomain, t: f64) -> FieldPair {
        let nn = dom.num_nodes();
        let idx = self.times.partition_point(|&s| s <= t + 1e-12);
        if idx == 0 {
            return FieldPair::zeros(dom);
        }
        let frame = &self.frames[idx - 1];
        FieldPair::new(frame[..nn].to_vec(), frame[nn..].to_vec())
    }

    pub fn num_frames(&self) -> usize {
        self.times.len()
    }
}
