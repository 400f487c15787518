use serde::{Deserialize, Serialize};

/// Beat-by-beat comparison counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    #[serde(rename = "TP")]
    pub tp: usize,
    #[serde(rename = "FN")]
    pub fn_: usize,
    #[serde(rename = "FP")]
    pub fp: usize,
}

impl DetectionScore {
    pub fn se(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn ppv(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn add(&mut self, other: &DetectionScore) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.fp += other.fp;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

/// Greedy one-to-one matching of detections to reference beats, closest pairs
/// first, within `tol` samples.
pub fn score_detection(detected: &[usize], reference: &[usize], tol: usize) -> DetectionScore {
    let mut pairs = Vec::new();
    let mut lo = 0;
    for (ri, &r) in reference.iter().enumerate() {
        while lo < detected.len() && detected[lo] + tol < r {
            lo += 1;
        }
        let mut k = lo;
        while k < detected.len() && detected[k] <= r + tol {
            pairs.push((detected[k].abs_diff(r), ri, k));
            k += 1;
        }
    }
    pairs.sort_unstable();
    let mut ref_used = vec![false; reference.len()];
    let mut det_used = vec![false; detected.len()];
    let mut tp = 0;
    for (_, ri, di) in pairs {
        if !ref_used[ri] && !det_used[di] {
            ref_used[ri] = true;
            det_used[di] = true;
            tp += 1;
        }
    }
    DetectionScore {
        tp,
        fn_: reference.len() - tp,
        fp: detected.len() - tp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_lists() {
        let r = [100, 400, 700];
        let s = score_detection(&r, &r, 54);
        assert_eq!((s.tp, s.fn_, s.fp), (3, 0, 0));
        assert_eq!((s.se(), s.ppv()), (1.0, 1.0));
    }

    #[test]
    fn shift_beyond_tolerance() {
        let r: Vec<usize> = (1..20).map(|k| k * 400).collect();
        let d: Vec<usize> = r.iter().map(|v| v + 55).collect();
        assert_eq!(score_detection(&d, &r, 54).tp, 0);
        assert_eq!(score_detection(&d, &r, 55).tp, 19);
    }

    #[test]
    fn one_missed_one_spurious() {
        let reference: Vec<usize> = (0..10).map(|k| 200 + 360 * k).collect();
        let mut detected: Vec<usize> = reference[..9].iter().map(|v| v + 3).collect();
        detected.push(reference[9] + 200);
        let s = score_detection(&detected, &reference, 54);
        assert_eq!((s.tp, s.fn_, s.fp), (9, 1, 1));
        assert!((s.se() - 0.9).abs() < 1e-12 && (s.ppv() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn closest_pair_claims_first() {
        // Detection 105 is nearest to 100; 140 then goes to 150.
        let s = score_detection(&[105, 140], &[100, 150], 54);
        assert_eq!(s.tp, 2);
    }

    proptest! {
        #[test]
        fn counts_consistent(d in proptest::collection::btree_set(0usize..10_000, 0..80),
                             r in proptest::collection::btree_set(0usize..10_000, 0..80),
                             tol in 0usize..100) {
            let d: Vec<usize> = d.into_iter().collect();
            let r: Vec<usize> = r.into_iter().collect();
            let s = score_detection(&d, &r, tol);
            prop_assert!(s.tp <= d.len().min(r.len()));
            prop_assert_eq!(s.tp + s.fn_, r.len());
            prop_assert_eq!(s.tp + s.fp, d.len());
            prop_assert!((0.0..=1.0).contains(&s.se()) && (0.0..=1.0).contains(&s.ppv()));
        }
    }
}
