//! Ensemble statistics over per-state collapse/revival records.
//!
//! Records are always reduced in ascending state-index order, so a
//! statistic does not depend on the order the records were produced in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::EventRecord;

/// Width of the initial-correlation bins.
pub const BIN_WIDTH: f64 = 0.1;
const N_BINS: usize = 10;
// Initial values this far outside [0, 1] are still binned at the edges.
const EDGE_SLACK: f64 = 1e-9;

/// One state's record together with its index in the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexedRecord {
    pub index: u64,
    pub record: EventRecord,
}

/// Initial-correlation bin `[lower, upper)`; the last bin is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcBin {
    pub lower: f64,
    pub upper: f64,
    pub regenerations_in_bin: u64,
    pub collapsed_in_bin: u64,
}

impl QcBin {
    /// Regenerations per collapsed state; `None` when nothing in the bin collapsed.
    pub fn normalized_regeneration(&self) -> Option<f64> {
        (self.collapsed_in_bin > 0).then(|| self.regenerations_in_bin as f64 / self.collapsed_in_bin as f64)
    }
}

/// Bin index of an initial value, or `None` outside `[0, 1]`.
pub fn qc_bin_index(q: f64) -> Option<usize> {
    if !(-EDGE_SLACK..=1.0 + EDGE_SLACK).contains(&q) {
        return None;
    }
    let i = (q.max(0.0) / BIN_WIDTH).floor() as usize;
    Some(i.min(N_BINS - 1))
}

/// A mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.collect();
        let n = v.len();
        if n == 0 {
            return None;
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { value: mean, stderr })
    }
}

/// Aggregated statistics of one (channel, sides, rank, α, measure) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_total: u64,
    pub n_collapsed: u64,
    pub n_regenerated: u64,
    pub bins: Vec<QcBin>,
    /// Regenerations per collapsed state, i.e. the bin average weighted by
    /// collapsed populations.
    pub mean_regeneration: Option<Estimate>,
    /// Unweighted sum of the per-bin ratios divided by the collapsed count.
    pub mean_regeneration_unweighted: Option<f64>,
    pub mean_p_collapse: Option<Estimate>,
    pub mean_p_regeneration: Option<Estimate>,
    pub mean_initial_qc: Option<Estimate>,
    pub regeneration_percent: Option<Estimate>,
}

impl EnsembleStats {
    pub fn from_records(records: &[IndexedRecord]) -> Result<Self> {
        let sorted = sorted_by_index(records)?;
        let collapsed: Vec<&EventRecord> = sorted.iter().filter(|r| r.collapsed).collect();
        let revived: Vec<&EventRecord> = sorted.iter().filter(|r| r.regenerated).collect();
        let bins = bin_records(&sorted);
        let n_collapsed = collapsed.len() as u64;

        let mean_regeneration_unweighted = (n_collapsed > 0).then(|| {
            bins.iter().filter_map(QcBin::normalized_regeneration).sum::<f64>() / n_collapsed as f64
        });
        let regeneration_percent = Estimate::of(collapsed.iter().map(|r| if r.regenerated { 100.0 } else { 0.0 }));

        Ok(Self {
            n_total: sorted.len() as u64,
            n_collapsed,
            n_regenerated: revived.len() as u64,
            mean_regeneration: Estimate::of(collapsed.iter().map(|r| r.regeneration_count as f64)),
            mean_regeneration_unweighted,
            mean_p_collapse: Estimate::of(collapsed.iter().filter_map(|r| r.p_c)),
            mean_p_regeneration: Estimate::of(revived.iter().filter_map(|r| r.p_reg)),
            mean_initial_qc: Estimate::of(revived.iter().map(|r| r.initial_qc)),
            regeneration_percent,
            bins,
        })
    }

    pub fn normalized_regeneration(&self) -> Vec<Option<f64>> {
        self.bins.iter().map(QcBin::normalized_regeneration).collect()
    }
}

fn sorted_by_index(records: &[IndexedRecord]) -> Result<Vec<EventRecord>> {
    let mut v: Vec<&IndexedRecord> = records.iter().collect();
    v.sort_by_key(|r| r.index);
    if let Some(w) = v.windows(2).find(|w| w[0].index == w[1].index) {
        return Err(Error::InvalidState(format!("duplicate record for state {}", w[0].index)));
    }
    Ok(v.into_iter().map(|r| r.record).collect())
}

fn empty_bins() -> Vec<QcBin> {
    (0..N_BINS)
        .map(|i| QcBin {
            lower: i as f64 * BIN_WIDTH,
            upper: (i + 1) as f64 * BIN_WIDTH,
            regenerations_in_bin: 0,
            collapsed_in_bin: 0,
        })
        .collect()
}

fn bin_records(records: &[EventRecord]) -> Vec<QcBin> {
    let mut bins = empty_bins();
    for r in records.iter().filter(|r| r.collapsed) {
        match qc_bin_index(r.initial_qc) {
            Some(i) => {
                bins[i].collapsed_in_bin += 1;
                bins[i].regenerations_in_bin += u64::from(r.regeneration_count);
            }
            None => log::warn!("initial value {} outside [0, 1] left unbinned", r.initial_qc),
        }
    }
    bins
}

/// Per-bin regenerations over collapsed states, `None` for bins without collapses.
pub fn normalized_regeneration(records: &[IndexedRecord]) -> Result<Vec<Option<f64>>> {
    Ok(bin_records(&sorted_by_index(records)?)
        .iter()
        .map(QcBin::normalized_regeneration)
        .collect())
}

pub fn mean_regeneration(records: &[IndexedRecord]) -> Result<Option<f64>> {
    Ok(EnsembleStats::from_records(records)?.mean_regeneration.map(|e| e.value))
}

pub fn mean_critical_noise(records: &[IndexedRecord]) -> Result<Option<f64>> {
    Ok(EnsembleStats::from_records(records)?.mean_p_collapse.map(|e| e.value))
}

pub fn mean_regeneration_noise(records: &[IndexedRecord]) -> Result<Option<f64>> {
    Ok(EnsembleStats::from_records(records)?.mean_p_regeneration.map(|e| e.value))
}

pub fn mean_initial_qc(records: &[IndexedRecord]) -> Result<Option<f64>> {
    Ok(EnsembleStats::from_records(records)?.mean_initial_qc.map(|e| e.value))
}

pub fn regeneration_percent(records: &[IndexedRecord]) -> Result<Option<f64>> {
    Ok(EnsembleStats::from_records(records)?.regeneration_percent.map(|e| e.value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub frequency: f64,
}

/// Normalized frequency distribution of values in `[0, 1]`.
pub fn qc_histogram(values: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::Config(format!("histogram bin width {bin_width} not in (0, 1]")));
    }
    let n_bins = (1.0 / bin_width - 1e-9).ceil() as usize;
    let mut counts = vec![0u64; n_bins];
    let mut n = 0u64;
    for &q in values {
        if !(-EDGE_SLACK..=1.0 + EDGE_SLACK).contains(&q) {
            return Err(Error::OutOfRange {
                name: "histogram value",
                value: q,
                min: 0.0,
                max: 1.0,
            });
        }
        let i = ((q.max(0.0) / bin_width).floor() as usize).min(n_bins - 1);
        counts[i] += 1;
        n += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| HistogramBin {
            lower: i as f64 * bin_width,
            upper: ((i + 1) as f64 * bin_width).min(1.0),
            frequency: if n == 0 { 0.0 } else { c as f64 / n as f64 },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rec(q: f64, p_c: Option<f64>, regs: u32, p_reg: Option<f64>) -> EventRecord {
        EventRecord {
            initial_qc: q,
            collapsed: p_c.is_some(),
            p_c,
            regenerated: regs > 0,
            p_reg,
            regeneration_count: regs,
        }
    }

    fn indexed(v: Vec<EventRecord>) -> Vec<IndexedRecord> {
        v.into_iter()
            .enumerate()
            .map(|(i, record)| IndexedRecord { index: i as u64, record })
            .collect()
    }

    #[test]
    fn bin_edges() {
        assert_eq!(qc_bin_index(0.0), Some(0));
        assert_eq!(qc_bin_index(0.0999), Some(0));
        assert_eq!(qc_bin_index(0.1), Some(1));
        assert_eq!(qc_bin_index(0.9), Some(9));
        assert_eq!(qc_bin_index(1.0), Some(9));
        assert_eq!(qc_bin_index(-1e-15), Some(0));
        assert_eq!(qc_bin_index(1.5), None);
        for b in empty_bins() {
            assert_abs_diff_eq!(b.upper - b.lower, 0.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn bin_ratios() {
        let all_revive = indexed((0..10).map(|_| rec(0.55, Some(0.2), 1, Some(0.3))).collect());
        let nr = normalized_regeneration(&all_revive).unwrap();
        assert_eq!(nr[5], Some(1.0));
        assert!(nr.iter().enumerate().all(|(i, v)| i == 5 || v.is_none()));

        let none_revive = indexed((0..4).map(|_| rec(0.25, Some(0.2), 0, None)).collect());
        assert_eq!(normalized_regeneration(&none_revive).unwrap()[2], Some(0.0));
        assert_eq!(regeneration_percent(&none_revive).unwrap(), Some(0.0));
    }

    #[test]
    fn weighted_and_unweighted_means() {
        // bin 1: 3 collapsed, 3 regenerations; bin 8: 1 collapsed, none; plus a survivor
        let rs = indexed(vec![
            rec(0.15, Some(0.1), 1, Some(0.2)),
            rec(0.12, Some(0.1), 2, Some(0.2)),
            rec(0.18, Some(0.3), 0, None),
            rec(0.85, Some(0.4), 0, None),
            rec(0.5, None, 0, None),
        ]);
        let s = EnsembleStats::from_records(&rs).unwrap();
        assert_eq!((s.n_total, s.n_collapsed, s.n_regenerated), (5, 4, 2));
        assert_abs_diff_eq!(s.mean_regeneration.unwrap().value, 0.75);
        assert_abs_diff_eq!(s.mean_regeneration_unweighted.unwrap(), 0.25);
        assert_abs_diff_eq!(s.mean_p_collapse.unwrap().value, 0.225);
        assert_abs_diff_eq!(s.mean_p_regeneration.unwrap().value, 0.2);
        assert_abs_diff_eq!(s.mean_initial_qc.unwrap().value, 0.135);
        assert_abs_diff_eq!(s.regeneration_percent.unwrap().value, 50.0);
    }

    #[test]
    fn undefined_statistics() {
        let rs = indexed(vec![rec(0.5, None, 0, None); 3]);
        let s = EnsembleStats::from_records(&rs).unwrap();
        assert_eq!(s.n_collapsed, 0);
        assert!(s.mean_regeneration.is_none() && s.mean_p_collapse.is_none());
        assert!(s.mean_p_regeneration.is_none() && s.mean_initial_qc.is_none());
        assert!(s.regeneration_percent.is_none() && s.mean_regeneration_unweighted.is_none());
        assert!(s.normalized_regeneration().iter().all(Option::is_none));
    }

    #[test]
    fn identical_collapse_points() {
        let rs = indexed((0..7).map(|i| rec(0.1 * i as f64, Some(0.37), 0, None)).collect());
        let s = EnsembleStats::from_records(&rs).unwrap();
        assert_abs_diff_eq!(s.mean_p_collapse.unwrap().value, 0.37, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_p_collapse.unwrap().stderr, 0.0, epsilon = 1e-15);
        let one = indexed(vec![rec(0.9, Some(0.3), 1, Some(0.42))]);
        assert_eq!(mean_regeneration_noise(&one).unwrap(), Some(0.42));
        assert_eq!(mean_initial_qc(&one).unwrap(), Some(0.9));
    }

    #[test]
    fn duplicate_indices_rejected() {
        let mut rs = indexed(vec![rec(0.5, None, 0, None); 2]);
        rs[1].index = 0;
        assert!(EnsembleStats::from_records(&rs).is_err());
    }

    #[test]
    fn histogram() {
        let h = qc_histogram(&[0.33, 0.31, 0.35], 0.1).unwrap();
        assert_eq!(h.len(), 10);
        assert_eq!(h[3].frequency, 1.0);
        assert_abs_diff_eq!(h.iter().map(|b| b.frequency).sum::<f64>(), 1.0);
        let h = qc_histogram(&[0.0, 1.0, 0.5, 0.95], 0.25).unwrap();
        assert_eq!(h.iter().map(|b| b.frequency).collect::<Vec<_>>(), vec![0.25, 0.0, 0.25, 0.5]);
        assert!(qc_histogram(&[1.2], 0.1).is_err());
        assert!(qc_histogram(&[0.2], 0.0).is_err());
    }

    fn arb_record() -> impl Strategy<Value = EventRecord> {
        (0.0..=1.0f64, prop::option::of(0.0..0.5f64), 0u32..3, 0.0..0.5f64).prop_map(|(q, pc, regs, dp)| match pc {
            Some(pc) => rec(q, Some(pc), regs, (regs > 0).then_some(pc + dp + 1e-3)),
            None => rec(q, None, 0, None),
        })
    }

    proptest! {
        #[test]
        fn permutation_invariant(records in prop::collection::vec(arb_record(), 1..80), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let rs = indexed(records);
            let mut shuffled = rs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = EnsembleStats::from_records(&rs).unwrap();
            let b = EnsembleStats::from_records(&shuffled).unwrap();
            // bit-identical, including NaN-free float fields
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }

        #[test]
        fn count_invariants(records in prop::collection::vec(arb_record(), 1..80)) {
            let s = EnsembleStats::from_records(&indexed(records)).unwrap();
            prop_assert!(s.n_regenerated <= s.n_collapsed && s.n_collapsed <= s.n_total);
            if let Some(r) = s.regeneration_percent {
                prop_assert!((0.0..=100.0).contains(&r.value));
            }
            let binned: u64 = s.bins.iter().map(|b| b.collapsed_in_bin).sum();
            prop_assert_eq!(binned, s.n_collapsed);
        }
    }
}
