//! Simulated trial data and the `time,event,group` CSV format.
//!
//! Event times are drawn by inverse-CDF sampling from the arm's uncured law;
//! cured subjects carry an infinite latent time and can only ever be
//! censored. Administrative censoring is uniform on the follow-up window
//! [τ_accrual, τ], so every observed time is at most τ.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::followup::FollowUp;
use crate::mixture::{CureArm, TwoArmDesign};

/// Right-censored two-group survival data in parallel vectors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: Vec<f64>,
    pub event: Vec<bool>,
    pub group: Vec<u8>,
}

impl Sample {
    pub fn from_vectors(time: Vec<f64>, event: Vec<bool>, group: Vec<u8>) -> Result<Self> {
        let s = Sample { time, event, group };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.time.len()
    }

    pub fn n_events(&self) -> usize {
        self.event.iter().filter(|&&e| e).count()
    }

    pub fn n_events_in(&self, group: u8) -> usize {
        self.event
            .iter()
            .zip(&self.group)
            .filter(|&(&e, &g)| e && g == group)
            .count()
    }

    /// (times, event flags) of one arm, in input order.
    pub fn arm(&self, group: u8) -> (Vec<f64>, Vec<bool>) {
        let mut t = Vec::new();
        let mut e = Vec::new();
        for i in 0..self.n() {
            if self.group[i] == group {
                t.push(self.time[i]);
                e.push(self.event[i]);
            }
        }
        (t, e)
    }

    /// Same data with group labels 0 and 1 exchanged.
    pub fn with_groups_swapped(&self) -> Sample {
        Sample {
            time: self.time.clone(),
            event: self.event.clone(),
            group: self.group.iter().map(|&g| 1 - g).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.time.is_empty() {
            return Err(Error::InvalidData("sample is empty".into()));
        }
        if self.time.len() != self.event.len() || self.time.len() != self.group.len() {
            return Err(Error::InvalidData(format!(
                "column lengths differ: {} times, {} events, {} groups",
                self.time.len(),
                self.event.len(),
                self.group.len()
            )));
        }
        for (i, &t) in self.time.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidData(format!(
                    "observed time must be finite and non-negative, got {t} at row {i}"
                )));
            }
        }
        for (i, &g) in self.group.iter().enumerate() {
            if g > 1 {
                return Err(Error::InvalidData(format!(
                    "group label must be 0 or 1, got {g} at row {i}"
                )));
            }
        }
        if !self.group.contains(&0) || !self.group.contains(&1) {
            return Err(Error::InvalidData("both groups must be present".into()));
        }
        Ok(())
    }

    // ── CSV round trip ──

    /// Writes `time,event,group` rows. `meta` lines, if any, are emitted
    /// first as `#`-prefixed comments (readers skip them).
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[String]) -> Result<()> {
        for line in meta {
            writeln!(w, "# {line}")?;
        }
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["time", "event", "group"])?;
        for i in 0..self.n() {
            wtr.write_record(&[
                format!("{}", self.time[i]),
                format!("{}", u8::from(self.event[i])),
                format!("{}", self.group[i]),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(r);
        {
            let headers = rdr.headers()?;
            let want = ["time", "event", "group"];
            if headers.len() != 3 || headers.iter().zip(want).any(|(h, w)| h != w) {
                return Err(Error::InvalidData(format!(
                    "expected CSV header time,event,group, got {headers:?}"
                )));
            }
        }
        let mut time = Vec::new();
        let mut event = Vec::new();
        let mut group = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse_f = |field: &str| -> Result<f64> {
                field.parse::<f64>().map_err(|_| {
                    Error::InvalidData(format!("row {}: cannot parse '{field}'", row + 2))
                })
            };
            time.push(parse_f(&rec[0])?);
            let ev = match &rec[1] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::InvalidData(format!(
                        "row {}: event must be 0 or 1, got '{other}'",
                        row + 2
                    )))
                }
            };
            event.push(ev);
            let g = rec[2].parse::<u8>().map_err(|_| {
                Error::InvalidData(format!("row {}: cannot parse group '{}'", row + 2, &rec[2]))
            })?;
            group.push(g);
        }
        Sample::from_vectors(time, event, group)
    }

    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Sample::read_csv(std::io::BufReader::new(f))
    }
}

/// Latent event time for one subject: +∞ when the subject is cured,
/// otherwise an inverse-CDF draw from the arm's uncured law.
pub fn sample_event_time<R: Rng + ?Sized>(arm: &CureArm, rng: &mut R) -> f64 {
    if rng.random::<f64>() < arm.cure_fraction() {
        f64::INFINITY
    } else {
        arm.uncured_quantile_unchecked(rng.random::<f64>())
    }
}

/// Uniform administrative censoring time on [τ_accrual, τ].
pub fn sample_censoring_time<R: Rng + ?Sized>(fu: &FollowUp, rng: &mut R) -> f64 {
    fu.tau_accrual + (fu.tau - fu.tau_accrual) * rng.random::<f64>()
}

/// Simulates one balanced trial: `n_per_arm` subjects in each arm, control
/// first. Observed time is min(latent, censoring) and the event flag marks
/// latent ≤ censoring.
pub fn generate_trial<R: Rng + ?Sized>(
    design: &TwoArmDesign,
    fu: &FollowUp,
    n_per_arm: usize,
    rng: &mut R,
) -> Result<Sample> {
    if n_per_arm < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 subjects per arm, got {n_per_arm}"
        )));
    }
    let n = 2 * n_per_arm;
    let mut time = Vec::with_capacity(n);
    let mut event = Vec::with_capacity(n);
    let mut group = Vec::with_capacity(n);
    for (g, arm) in [(0u8, design.control()), (1u8, design.treatment())] {
        for _ in 0..n_per_arm {
            let latent = sample_event_time(arm, rng);
            let censor = sample_censoring_time(fu, rng);
            if latent <= censor {
                time.push(latent);
                event.push(true);
            } else {
                time.push(censor);
                event.push(false);
            }
            group.push(g);
        }
    }
    Ok(Sample { time, event, group })
}
