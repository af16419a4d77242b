use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{apply_holm, paired_t, TestResult};
use crate::conditions::{Cell, Condition, Noise};
use crate::decoder::TrackingScore;
use crate::error::{Error, Result};

/// Per-subject cell means, indexed `[noise][condition]` in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectCells {
    pub subject_id: String,
    pub values: [[Option<f64>; 4]; 2],
}

fn index(cell: Cell) -> (usize, usize) {
    let n = Noise::ALL.iter().position(|&x| x == cell.noise).expect("closed set");
    let c = Condition::ALL.iter().position(|&x| x == cell.condition).expect("closed set");
    (n, c)
}

impl SubjectCells {
    pub fn get(&self, cell: Cell) -> Option<f64> {
        let (n, c) = index(cell);
        self.values[n][c]
    }

    /// All eight cells, or `None` if any is missing.
    pub fn complete(&self) -> Option<[[f64; 4]; 2]> {
        let mut out = [[0.0; 4]; 2];
        for (n, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                out[n][c] = (*v)?;
            }
        }
        Some(out)
    }
}

/// Mean r_z per subject and cell, subjects in sorted order.
pub fn cell_means_by_subject(scores: &[TrackingScore]) -> Vec<SubjectCells> {
    let mut acc: BTreeMap<&str, [[(f64, usize); 4]; 2]> = BTreeMap::new();
    for s in scores {
        let (n, c) = index(s.cell);
        let e = &mut acc.entry(s.subject_id.as_str()).or_insert([[(0.0, 0); 4]; 2])[n][c];
        e.0 += s.r_z;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(id, sums)| SubjectCells {
            subject_id: id.to_string(),
            values: sums.map(|row| row.map(|(s, k)| (k > 0).then(|| s / k as f64))),
        })
        .collect()
}

const fn cell(condition: Condition, noise: Noise) -> Cell {
    Cell { condition, noise }
}

/// The seven planned comparisons (first minus second).
pub const PLANNED_TESTS: [(Cell, Cell); 7] = [
    (cell(Condition::AV, Noise::Noise), cell(Condition::A, Noise::Noise)),
    (cell(Condition::AV, Noise::Noise), cell(Condition::ML, Noise::Noise)),
    (cell(Condition::A, Noise::Noise), cell(Condition::ML, Noise::Noise)),
    (cell(Condition::AV, Noise::Quiet), cell(Condition::A, Noise::Quiet)),
    (cell(Condition::AV, Noise::Quiet), cell(Condition::ML, Noise::Quiet)),
    (cell(Condition::A, Noise::Quiet), cell(Condition::ML, Noise::Quiet)),
    (cell(Condition::AV, Noise::Noise), cell(Condition::AV, Noise::Quiet)),
];

/// Paired t-tests over subjects for the planned comparisons, Holm-adjusted
/// as one family. Every subject must have both cells of every comparison.
pub fn planned_comparisons(subjects: &[SubjectCells]) -> Result<Vec<TestResult>> {
    let mut results = Vec::with_capacity(PLANNED_TESTS.len());
    for (a, b) in PLANNED_TESTS {
        let mut x = Vec::with_capacity(subjects.len());
        let mut y = Vec::with_capacity(subjects.len());
        for s in subjects {
            match (s.get(a), s.get(b)) {
                (Some(va), Some(vb)) => {
                    x.push(va);
                    y.push(vb);
                }
                _ => {
                    return Err(Error::invalid(format!(
                        "subject {} lacks cell {a} or {b}",
                        s.subject_id
                    )))
                }
            }
        }
        let mut r = paired_t(&x, &y)?;
        r.label = format!("{a} vs {b}");
        results.push(r);
    }
    apply_holm(&mut results)?;
    Ok(results)
}
