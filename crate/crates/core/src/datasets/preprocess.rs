use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

use super::load::{ColumnValues, RawTable};
use super::table::{DataTable, Matrix};

/// Train/test partition of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: DataTable,
    pub test: DataTable,
    pub train_fraction: f64,
    pub seed: u64,
}

/// Lexicographic code book for a set of strings.
fn code_book<'a>(values: impl Iterator<Item = &'a str>) -> BTreeMap<&'a str, usize> {
    let mut book: BTreeMap<&str, usize> = values.map(|v| (v, 0)).collect();
    for (code, slot) in book.values_mut().enumerate() {
        *slot = code;
    }
    book
}

fn min_max_scale(col: &mut [f64]) {
    let (lo, hi) = col
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        col.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    for v in col.iter_mut() {
        *v = ((*v - lo) / range).clamp(0.0, 1.0);
    }
}

/// Imputes, encodes and min-max scales every column, and encodes labels.
///
/// Infinities count as missing. Missing numeric cells take the column mean of
/// the remaining cells. Categorical columns and labels are coded by the
/// lexicographic order of their distinct values. Constant columns become 0.
pub fn clean_and_encode(raw: &RawTable) -> Result<DataTable> {
    let n = raw.n_rows();
    if n == 0 {
        return Err(Error::Config("cannot encode a table with zero rows".into()));
    }
    if raw.columns.is_empty() {
        return Err(Error::Config("table has no feature columns".into()));
    }
    let d = raw.columns.len();
    let mut features = Matrix::zeros(n, d);
    let mut column = vec![0.0; n];
    for (j, col) in raw.columns.iter().enumerate() {
        if col.values.len() != n {
            return Err(Error::LengthMismatch {
                left: col.values.len(),
                right: n,
            });
        }
        match &col.values {
            ColumnValues::Numeric(cells) => {
                let (sum, count) = cells
                    .iter()
                    .flatten()
                    .filter(|v| v.is_finite())
                    .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
                if count == 0 {
                    return Err(Error::EmptyColumn(col.name.clone()));
                }
                let mean = sum / count as f64;
                for (slot, cell) in column.iter_mut().zip(cells) {
                    *slot = match cell {
                        Some(v) if v.is_finite() => *v,
                        _ => mean,
                    };
                }
            }
            ColumnValues::Categorical(cells) => {
                let book = code_book(cells.iter().map(String::as_str));
                for (slot, cell) in column.iter_mut().zip(cells) {
                    *slot = book[cell.as_str()] as f64;
                }
            }
        }
        min_max_scale(&mut column);
        for (i, &v) in column.iter().enumerate() {
            features.set(i, j, v);
        }
    }

    let book = code_book(raw.labels.iter().map(String::as_str));
    let class_names: Vec<String> = book.keys().map(|s| s.to_string()).collect();
    let labels = raw.labels.iter().map(|l| book[l.as_str()]).collect();
    let feature_names = raw.columns.iter().map(|c| c.name.clone()).collect();
    DataTable::new(features, labels, feature_names, class_names)
}

/// Caps every class at `per_class_cap` rows, sampled uniformly without
/// replacement. Output is grouped by class, then shuffled as a whole.
pub fn downsample(table: &DataTable, per_class_cap: usize, seed: u64) -> Result<DataTable> {
    if per_class_cap == 0 {
        return Err(Error::Config("downsample cap must be at least 1".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); table.n_classes()];
    for (i, &l) in table.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut keep = Vec::new();
    for (c, rows) in by_class.iter_mut().enumerate() {
        let mut rng = rng::stream(seed, &[0xD0, c as u64]);
        rows.shuffle(&mut rng);
        keep.extend(rows.iter().take(per_class_cap));
    }
    keep.shuffle(&mut rng::stream(seed, &[0xD1]));
    Ok(table.select_rows(&keep))
}

/// Seeded shuffle followed by a cut at `floor(n * train_fraction)`.
pub fn split(table: &DataTable, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::InvalidSplit(format!("need at least 2 rows to split, got {n}")));
    }
    if !train_fraction.is_finite() {
        return Err(Error::InvalidSplit("train fraction must be finite".into()));
    }
    let cut = (n as f64 * train_fraction + 1e-9).floor().max(0.0) as usize;
    if cut == 0 {
        return Err(Error::InvalidSplit("empty train set".into()));
    }
    if cut >= n {
        return Err(Error::InvalidSplit("empty test set".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::seeded(seed));
    Ok(SplitPair {
        train: table.select_rows(&perm[..cut]),
        test: table.select_rows(&perm[cut..]),
        train_fraction,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{DatasetSchema, RawTable};
    use proptest::prelude::*;

    fn raw(cols: Vec<(&str, Vec<&str>)>, labels: Vec<&str>) -> RawTable {
        let mut header: Vec<String> = cols.iter().map(|(n, _)| n.to_string()).collect();
        let mut columns: Vec<Vec<String>> = cols
            .into_iter()
            .map(|(_, c)| c.into_iter().map(String::from).collect())
            .collect();
        header.push("label".into());
        columns.push(labels.into_iter().map(String::from).collect());
        RawTable::from_strings(header, columns, &DatasetSchema::generic("label", vec![])).unwrap()
    }

    #[test]
    fn mean_imputation_then_scaling() {
        let t = clean_and_encode(&raw(vec![("a", vec!["1", "", "3"])], vec!["x", "y", "x"])).unwrap();
        assert_eq!(t.features.column(0), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn infinity_is_imputed() {
        let t = clean_and_encode(&raw(
            vec![("a", vec!["0", "inf", "4", "-Infinity"])],
            vec!["x", "y", "x", "y"],
        ))
        .unwrap();
        assert_eq!(t.features.column(0), vec![0.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn constant_column_is_zero() {
        let t = clean_and_encode(&raw(vec![("a", vec!["7", "7", "7"])], vec!["x", "y", "x"])).unwrap();
        assert_eq!(t.features.column(0), vec![0.0; 3]);
    }

    #[test]
    fn lexicographic_label_codes() {
        let t = clean_and_encode(&raw(vec![("a", vec!["1", "2", "3"])], vec!["Syn", "LDAP", "UDP"])).unwrap();
        assert_eq!(t.class_names, vec!["LDAP", "Syn", "UDP"]);
        assert_eq!(t.labels, vec![1, 0, 2]);
    }

    #[test]
    fn categorical_columns_are_coded() {
        let t = clean_and_encode(&raw(vec![("p", vec!["udp", "tcp", "icmp", "tcp"])], vec!["a"; 4])).unwrap();
        // icmp=0, tcp=1, udp=2, scaled by 2
        assert_eq!(t.features.column(0), vec![1.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn all_missing_column_is_an_error() {
        let err = clean_and_encode(&raw(vec![("ghost", vec!["", "NaN"])], vec!["a", "b"])).unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    fn grouped(counts: &[usize]) -> DataTable {
        let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &k)| vec![c; k]).collect();
        let n = labels.len();
        let features = Matrix::new(n, 1, (0..n).map(|i| i as f64 / n as f64).collect()).unwrap();
        let names = (0..counts.len()).map(|c| format!("c{c}")).collect();
        DataTable::new(features, labels, vec!["f".into()], names).unwrap()
    }

    #[test]
    fn downsample_caps_each_class() {
        let t = grouped(&[2500, 600, 1000]);
        let d = downsample(&t, 1000, 42).unwrap();
        assert_eq!(d.class_counts(), vec![1000, 600, 1000]);
        let again = downsample(&t, 1000, 42).unwrap();
        assert_eq!(d, again);
        assert_ne!(downsample(&t, 1000, 43).unwrap().row_ids, d.row_ids);
    }

    #[test]
    fn split_sizes_and_errors() {
        let t = grouped(&[3000, 3000]);
        let s = split(&t, 0.8, 42).unwrap();
        assert_eq!((s.train.n_rows(), s.test.n_rows()), (4800, 1200));
        let small = grouped(&[5, 5]);
        let a = split(&small, 0.5, 7).unwrap();
        let b = split(&small, 0.5, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.train.n_rows(), a.test.n_rows()), (5, 5));
        let err = split(&small, 1.0, 7).unwrap_err();
        assert!(err.to_string().contains("empty test set"));
        assert!(split(&small, 0.0, 7).unwrap_err().to_string().contains("empty train set"));
    }

    proptest! {
        #[test]
        fn split_partitions_rows(n in 2usize..200, frac in 0.05f64..0.95, seed: u64) {
            let t = grouped(&[n]);
            if let Ok(s) = split(&t, frac, seed) {
                let mut ids: Vec<usize> = s.train.row_ids.iter().chain(&s.test.row_ids).copied().collect();
                ids.sort_unstable();
                prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
            }
        }

        #[test]
        fn downsample_conserves_counts(counts in proptest::collection::vec(1usize..60, 1..5), cap in 1usize..70, seed: u64) {
            let t = grouped(&counts);
            let d = downsample(&t, cap, seed).unwrap();
            let expected: Vec<usize> = counts.iter().map(|&c| c.min(cap)).collect();
            prop_assert_eq!(d.n_rows(), expected.iter().sum::<usize>());
            prop_assert_eq!(d.class_counts(), expected);
        }

        #[test]
        fn scaling_bounds_and_idempotence(cols in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 6), 1..4)) {
            let strs: Vec<Vec<String>> = cols.iter().map(|c| c.iter().map(|v| v.to_string()).collect()).collect();
            let named: Vec<(String, Vec<&str>)> = strs.iter().enumerate()
                .map(|(j, c)| (format!("f{j}"), c.iter().map(String::as_str).collect())).collect();
            let r = raw(named.iter().map(|(n, c)| (n.as_str(), c.clone())).collect(), vec!["a", "b", "a", "b", "a", "b"]);
            let t = clean_and_encode(&r).unwrap();
            for j in 0..t.n_features() {
                let col = t.features.column(j);
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo == 0.0 && (hi == 1.0 || hi == 0.0));
            }
            // Feed the scaled output back through as text.
            let strs2: Vec<Vec<String>> = (0..t.n_features()).map(|j| t.features.column(j).iter().map(|v| format!("{v:?}")).collect()).collect();
            let named2: Vec<(String, Vec<&str>)> = strs2.iter().enumerate()
                .map(|(j, c)| (format!("f{j}"), c.iter().map(String::as_str).collect())).collect();
            let r2 = raw(named2.iter().map(|(n, c)| (n.as_str(), c.clone())).collect(), vec!["a", "b", "a", "b", "a", "b"]);
            let t2 = clean_and_encode(&r2).unwrap();
            for (a, b) in t.features.as_slice().iter().zip(t2.features.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn encoding_ignores_row_order(labels in proptest::collection::vec(0usize..4, 2..30), seed: u64) {
            let names = ["UDP", "Syn", "LDAP", "MSSQL"];
            let ls: Vec<&str> = labels.iter().map(|&l| names[l]).collect();
            let vals: Vec<String> = (0..ls.len()).map(|i| i.to_string()).collect();
            let t = clean_and_encode(&raw(vec![("a", vals.iter().map(String::as_str).collect())], ls.clone())).unwrap();
            let mut perm: Vec<usize> = (0..ls.len()).collect();
            perm.shuffle(&mut rng::seeded(seed));
            let ls2: Vec<&str> = perm.iter().map(|&i| ls[i]).collect();
            let t2 = clean_and_encode(&raw(vec![("a", vals.iter().map(String::as_str).collect())], ls2.clone())).unwrap();
            prop_assert_eq!(&t.class_names, &t2.class_names);
            for (i, &p) in perm.iter().enumerate() {
                prop_assert_eq!(t2.labels[i], t.labels[p]);
            }
        }
    }
}
