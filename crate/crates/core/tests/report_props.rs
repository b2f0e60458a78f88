use std::collections::BTreeMap;

use proptest::prelude::*;
use redispatch_core::report::binned_mean;

proptest! {
    #[test]
    fn marginal_means_equal_group_means(
        rows in prop::collection::vec((0u32..=60, 0u32..=60, -50.0f64..500.0), 2..300),
    ) {
        // Pin the range to [0, 60] so 30 bins are exactly 2 wide.
        let mut rows = rows;
        rows.push((0, 0, 1.0));
        rows.push((60, 60, 2.0));
        let x: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
        let z: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let h = binned_mean(("x", &x), ("y", &y), &z, 30, 30).unwrap();

        let mut groups: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        for r in &rows {
            let e = groups.entry((r.0 / 2).min(29)).or_default();
            e.0 += r.2;
            e.1 += 1;
        }
        let marg = h.x_marginal_means();
        for (bin, m) in marg.iter().enumerate() {
            match groups.get(&(bin as u32)) {
                Some((s, n)) => prop_assert!((m.unwrap() - s / *n as f64).abs() <= 1e-9 * (s / *n as f64).abs().max(1.0)),
                None => prop_assert!(m.is_none()),
            }
        }
        let total: usize = h.count.iter().flatten().sum();
        prop_assert_eq!(total, rows.len());
    }
}
