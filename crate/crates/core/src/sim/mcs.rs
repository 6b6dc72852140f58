//! Modulation and coding scheme table and SINR-to-MCS selection.
//!
//! The default table uses the 15 LTE CQI spectral efficiencies. Each entry's
//! `sinr_threshold_db` is the SINR at which the BLER model yields exactly the
//! target BLER, so selection at the threshold is calibrated by construction.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: u8,
    /// Bits per modulation symbol.
    pub modulation_order: u8,
    pub code_rate: f64,
    /// bits/s/Hz
    pub spectral_efficiency: f64,
    /// Minimum SINR (dB) at which the predicted BLER is at or below target.
    pub sinr_threshold_db: f64,
}

/// A validated MCS table, sorted by strictly increasing spectral efficiency
/// and SINR threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

// (modulation order, code rate x 1024, spectral efficiency, SINR threshold dB)
const LTE_CQI: [(u8, f64, f64, f64); 15] = [
    (2, 78.0, 0.1523, -6.7),
    (2, 120.0, 0.2344, -4.7),
    (2, 193.0, 0.3770, -2.3),
    (2, 308.0, 0.6016, 0.2),
    (2, 449.0, 0.8770, 2.4),
    (2, 602.0, 1.1758, 4.3),
    (4, 378.0, 1.4766, 5.9),
    (4, 490.0, 1.9141, 8.1),
    (4, 616.0, 2.4063, 10.3),
    (6, 466.0, 2.7305, 11.7),
    (6, 567.0, 3.3223, 14.1),
    (6, 666.0, 3.9023, 16.3),
    (6, 772.0, 4.5234, 18.7),
    (6, 873.0, 5.1152, 21.0),
    (6, 948.0, 5.5547, 22.7),
];

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(config_err("MCS table is empty"));
        }
        for e in &entries {
            if !(e.spectral_efficiency.is_finite() && e.spectral_efficiency > 0.0) {
                return Err(config_err(format!(
                    "MCS {} has non-positive spectral efficiency",
                    e.index
                )));
            }
            if !e.sinr_threshold_db.is_finite() {
                return Err(config_err(format!("MCS {} has non-finite threshold", e.index)));
            }
        }
        for w in entries.windows(2) {
            if w[1].spectral_efficiency <= w[0].spectral_efficiency {
                return Err(config_err(format!(
                    "spectral efficiency not strictly increasing at MCS {}",
                    w[1].index
                )));
            }
            if w[1].sinr_threshold_db <= w[0].sinr_threshold_db {
                return Err(config_err(format!(
                    "SINR threshold not strictly increasing at MCS {}",
                    w[1].index
                )));
            }
        }
        Ok(Self { entries })
    }

    /// The 15-entry LTE CQI table.
    pub fn lte_cqi() -> Self {
        let entries = LTE_CQI
            .iter()
            .enumerate()
            .map(|(i, &(q, rate, se, thr))| McsEntry {
                index: i as u8 + 1,
                modulation_order: q,
                code_rate: rate / 1024.0,
                spectral_efficiency: se,
                sinr_threshold_db: thr,
            })
            .collect();
        Self { entries }
    }

    /// Parses a CSV table with header
    /// `index,modulation_order,code_rate,spectral_efficiency,sinr_threshold_db`.
    /// Lines starting with `#` are comments.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let entries = rdr
            .deserialize::<McsEntry>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_reader(file)
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, pos: usize) -> Option<&McsEntry> {
        self.entries.get(pos)
    }

    pub fn max_spectral_efficiency(&self) -> f64 {
        self.entries[self.entries.len() - 1].spectral_efficiency
    }

    /// Position (not `index` field) of the entry chosen for the given
    /// reported SINR and OLLA offset.
    pub fn select_position(&self, sinr_reported_db: f64, olla_offset_db: f64) -> usize {
        select_position(&self.entries, sinr_reported_db + olla_offset_db)
    }
}

impl Default for McsTable {
    fn default() -> Self {
        Self::lte_cqi()
    }
}

fn select_position(table: &[McsEntry], effective_sinr_db: f64) -> usize {
    let qualifying = table.partition_point(|e| e.sinr_threshold_db <= effective_sinr_db);
    qualifying.saturating_sub(1)
}

/// Highest entry whose threshold is at or below `sinr_reported_db +
/// olla_offset_db`, or the lowest entry if none qualifies.
///
/// `table` must be non-empty and sorted by threshold.
pub fn select_mcs(sinr_reported_db: f64, olla_offset_db: f64, table: &[McsEntry]) -> &McsEntry {
    &table[select_position(table, sinr_reported_db + olla_offset_db)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_is_valid_and_spans_cqi_range() {
        let t = McsTable::lte_cqi();
        assert_eq!(t.len(), 15);
        McsTable::new(t.entries().to_vec()).unwrap();
        assert_eq!(t.entries()[0].spectral_efficiency, 0.1523);
        assert_eq!(t.max_spectral_efficiency(), 5.5547);
    }

    #[test]
    fn floor_and_ceiling_clamps() {
        let t = McsTable::lte_cqi();
        assert_eq!(select_mcs(-40.0, 0.0, t.entries()).index, 1);
        assert_eq!(select_mcs(60.0, 0.0, t.entries()).index, 15);
    }

    #[test]
    fn threshold_is_inclusive() {
        let t = McsTable::lte_cqi();
        for (k, e) in t.entries().iter().enumerate() {
            assert_eq!(select_mcs(e.sinr_threshold_db, 0.0, t.entries()).index, e.index);
            assert_eq!(t.select_position(e.sinr_threshold_db, 1e-9), k);
            assert_eq!(t.select_position(e.sinr_threshold_db, -1e-9), k.saturating_sub(1));
        }
    }

    #[test]
    fn offset_shifts_selection() {
        let t = McsTable::lte_cqi();
        // 10.3 dB is MCS 9; a -2 dB offset lands between 8.1 and 10.3.
        assert_eq!(select_mcs(10.3, 0.0, t.entries()).index, 9);
        assert_eq!(select_mcs(10.3, -2.0, t.entries()).index, 8);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(McsTable::new(vec![]).is_err());
        let mut e = McsTable::lte_cqi().entries().to_vec();
        e.swap(3, 4);
        assert!(McsTable::new(e).is_err());
        let mut e = McsTable::lte_cqi().entries().to_vec();
        e[0].spectral_efficiency = 0.0;
        assert!(McsTable::new(e).is_err());
        let mut e = McsTable::lte_cqi().entries().to_vec();
        e[5].sinr_threshold_db = e[4].sinr_threshold_db;
        assert!(McsTable::new(e).is_err());
    }

    #[test]
    fn parses_csv_with_comments() {
        let text = "\
# three-entry test table
index,modulation_order,code_rate,spectral_efficiency,sinr_threshold_db
1, 2, 0.25, 0.5, -3.0
2, 4, 0.5, 2.0, 6.0
3, 6, 0.75, 4.5, 15.0
";
        let t = McsTable::from_reader(text.as_bytes()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.entries()[2].modulation_order, 6);
        assert_eq!(select_mcs(7.0, 0.0, t.entries()).index, 2);
    }

    #[test]
    fn csv_with_unsorted_rows_is_rejected() {
        let text = "index,modulation_order,code_rate,spectral_efficiency,sinr_threshold_db\n\
                    1,4,0.5,2.0,6.0\n2,2,0.25,0.5,-3.0\n";
        assert!(McsTable::from_reader(text.as_bytes()).is_err());
    }
}
