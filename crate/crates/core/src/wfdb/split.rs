//! Inter-patient DS1/DS2 partition of the MIT-BIH arrhythmia database.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::annotation::Annotation;
use crate::{Error, Result};

pub const DS1: [&str; 22] = [
    "101", "106", "108", "109", "112", "114", "115", "116", "118", "119", "122", "124", "201",
    "203", "205", "207", "208", "209", "215", "220", "223", "230",
];

pub const DS2: [&str; 22] = [
    "100", "103", "105", "111", "113", "117", "121", "123", "200", "202", "210", "212", "213",
    "214", "219", "221", "222", "228", "231", "232", "233", "234",
];

/// Records containing paced beats.
pub const PACED: [&str; 4] = ["102", "104", "107", "217"];

/// Per-symbol beat counts of the two sets, in the order
/// N L R A a J S V F e j E Q.
pub const TABLE_SYMBOLS: [char; 13] = ['N', 'L', 'R', 'A', 'a', 'J', 'S', 'V', 'F', 'e', 'j', 'E', 'Q'];
pub const DS1_COUNTS: [usize; 13] = [38102, 3949, 3783, 810, 100, 32, 2, 3683, 415, 16, 16, 105, 8];
pub const DS2_COUNTS: [usize; 13] = [36444, 4126, 3476, 1736, 50, 51, 0, 3220, 388, 0, 213, 1, 7];

/// Beat-symbol histogram of one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub record_id: String,
    pub symbol_counts: BTreeMap<char, usize>,
}

impl RecordSummary {
    pub fn from_annotations(record_id: &str, annotations: &[Annotation]) -> Self {
        let mut symbol_counts = BTreeMap::new();
        for a in annotations.iter().filter(|a| a.is_beat()) {
            *symbol_counts.entry(a.symbol).or_insert(0) += 1;
        }
        RecordSummary {
            record_id: record_id.to_string(),
            symbol_counts,
        }
    }

    pub fn count(&self, symbol: char) -> usize {
        self.symbol_counts.get(&symbol).copied().unwrap_or(0)
    }

    pub fn total_beats(&self) -> usize {
        self.symbol_counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub ds1_records: Vec<String>,
    pub ds2_records: Vec<String>,
    pub excluded_paced: Vec<String>,
}

impl DatasetSplit {
    /// The fixed literature partition, without validation.
    pub fn literature() -> Self {
        let own = |ids: &[&str]| ids.iter().map(|s| s.to_string()).collect();
        DatasetSplit {
            ds1_records: own(&DS1),
            ds2_records: own(&DS2),
            excluded_paced: own(&PACED),
        }
    }
}

/// Partitions the 48 records into DS1/DS2 (paced records removed) and checks
/// every per-symbol count of both sets against the reference table.
pub fn split_ds(records: &[RecordSummary]) -> Result<DatasetSplit> {
    let split = DatasetSplit::literature();
    let expected: BTreeSet<&str> = DS1.iter().chain(&DS2).chain(&PACED).copied().collect();
    let mut seen = BTreeSet::new();
    for r in records {
        if !expected.contains(r.record_id.as_str()) {
            return Err(Error::Integrity(format!("unexpected record {}", r.record_id)));
        }
        if !seen.insert(r.record_id.as_str()) {
            return Err(Error::Integrity(format!("record {} given twice", r.record_id)));
        }
    }
    let missing: Vec<&str> = expected.difference(&seen).copied().collect();
    if !missing.is_empty() {
        return Err(Error::Integrity(format!("missing records: {}", missing.join(","))));
    }

    for (name, ids, counts) in [("DS1", &DS1, &DS1_COUNTS), ("DS2", &DS2, &DS2_COUNTS)] {
        let members: Vec<&RecordSummary> = records
            .iter()
            .filter(|r| ids.contains(&r.record_id.as_str()))
            .collect();
        for (sym, &want) in TABLE_SYMBOLS.iter().zip(counts.iter()) {
            let got: usize = members.iter().map(|r| r.count(*sym)).sum();
            if got != want {
                return Err(Error::Integrity(format!(
                    "{name} count for beat type '{sym}' is {got}, expected {want} (records {})",
                    ids.join(",")
                )));
            }
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Summaries whose per-set totals equal the reference table: the whole
    /// DS1 histogram sits in record 101 and DS2's in record 100.
    fn table_summaries() -> Vec<RecordSummary> {
        DS1.iter()
            .chain(&DS2)
            .chain(&PACED)
            .map(|&id| {
                let mut symbol_counts = BTreeMap::new();
                let counts = match id {
                    "101" => Some(&DS1_COUNTS),
                    "100" => Some(&DS2_COUNTS),
                    _ => None,
                };
                if let Some(c) = counts {
                    for (s, &n) in TABLE_SYMBOLS.iter().zip(c) {
                        symbol_counts.insert(*s, n);
                    }
                }
                if PACED.contains(&id) {
                    symbol_counts.insert('/', 1500);
                }
                RecordSummary {
                    record_id: id.to_string(),
                    symbol_counts,
                }
            })
            .collect()
    }

    #[test]
    fn partition_is_disjoint_and_complete() {
        let s = DatasetSplit::literature();
        assert_eq!(s.ds1_records.len(), 22);
        assert_eq!(s.ds2_records.len(), 22);
        assert_eq!(s.excluded_paced.len(), 4);
        let all: BTreeSet<&String> = s
            .ds1_records
            .iter()
            .chain(&s.ds2_records)
            .chain(&s.excluded_paced)
            .collect();
        assert_eq!(all.len(), 48);
    }

    #[test]
    fn table_counts_pass() {
        let split = split_ds(&table_summaries()).unwrap();
        assert_eq!(split, DatasetSplit::literature());
        assert_eq!(DS1_COUNTS[0], 38102);
        assert_eq!(DS2_COUNTS[10], 213);
    }

    #[test]
    fn table_rows_sum_to_all_records_row() {
        // The published all-records row lists 3903 V beats, which does not
        // equal the two set rows; the set rows are what the split checks.
        let all = [74546, 8075, 7259, 2546, 150, 83, 2, 6903, 803, 16, 229, 106, 15];
        for i in 0..13 {
            assert_eq!(DS1_COUNTS[i] + DS2_COUNTS[i], all[i]);
        }
    }

    #[test]
    fn count_mismatch_names_class_and_set() {
        let mut s = table_summaries();
        let r = s.iter_mut().find(|r| r.record_id == "100").unwrap();
        *r.symbol_counts.get_mut(&'j').unwrap() -= 1;
        let msg = split_ds(&s).unwrap_err().to_string();
        assert!(msg.contains("DS2") && msg.contains("'j'") && msg.contains("212"), "{msg}");
    }

    #[test]
    fn missing_record_is_integrity_error() {
        let mut s = table_summaries();
        s.retain(|r| r.record_id != "232");
        assert!(split_ds(&s).unwrap_err().to_string().contains("232"));
    }
}
