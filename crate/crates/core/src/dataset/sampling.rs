use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};

use super::table::Table;
use crate::math::{floor, round};
use crate::seed::rng;
use crate::{Error, Result};

fn class_rows(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut rows = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        rows[usize::from(y.min(1))].push(i);
    }
    rows
}

/// Row indices kept by random undersampling, ascending.
pub fn undersample_indices(labels: &[u8], seed: u64) -> Result<Vec<usize>> {
    let [zeros, ones] = class_rows(labels);
    if zeros.is_empty() || ones.is_empty() {
        return Err(Error::DegenerateTarget);
    }
    if zeros.len() == ones.len() {
        return Ok((0..labels.len()).collect());
    }
    let (minority, majority) = if zeros.len() < ones.len() {
        (zeros, ones)
    } else {
        (ones, zeros)
    };
    let mut r = rng(seed);
    let picked = index::sample(&mut r, majority.len(), minority.len());
    let mut keep: Vec<usize> = picked.iter().map(|i| majority[i]).collect();
    keep.extend_from_slice(&minority);
    keep.sort_unstable();
    Ok(keep)
}

/// Drops majority-class rows until both classes have the minority count.
/// Surviving rows keep their original relative order.
pub fn undersample(table: &Table, seed: u64) -> Result<Table> {
    let labels = table.target_labels()?;
    Ok(table.select_rows(&undersample_indices(&labels, seed)?))
}

/// Stratified `(train, test)` row indices, each ascending.
///
/// The test size is `round(test_fraction · n)`, apportioned across classes by
/// largest remainder and then clamped so that each class keeps at least one
/// row on each side.
pub fn split_indices(labels: &[u8], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    let n = labels.len();
    if n < 4 {
        return Err(Error::TooFewRows { needed: 4, found: n });
    }
    let mut classes = class_rows(labels);
    if classes.iter().any(|c| c.len() < 2) {
        return Err(Error::DegenerateTarget);
    }

    let total = round(test_fraction * n as f64) as usize;
    let exact: Vec<f64> = classes
        .iter()
        .map(|c| total as f64 * c.len() as f64 / n as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|&e| floor(e) as usize).collect();
    let mut short = total - quota.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - floor(exact[a]);
        let fb = exact[b] - floor(exact[b]);
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if short == 0 {
            break;
        }
        quota[c] += 1;
        short -= 1;
    }
    for (q, c) in quota.iter_mut().zip(&classes) {
        *q = (*q).clamp(1, c.len() - 1);
    }

    let mut r = rng(seed);
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::new();
    for (rows, &q) in classes.iter_mut().zip(&quota) {
        rows.shuffle(&mut r);
        test.extend_from_slice(&rows[..q]);
        train.extend_from_slice(&rows[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(table: &Table, test_fraction: f64, seed: u64) -> Result<(Table, Table)> {
    let labels = table.target_labels()?;
    let (train, test) = split_indices(&labels, test_fraction, seed)?;
    Ok((table.select_rows(&train), table.select_rows(&test)))
}
