//! Subset selection: the bound depends on a subset only through its
//! squared-index sum, so picking the antennas furthest from the reference
//! end is optimal. Checked here against exhaustive enumeration.
//!
//! Run with: cargo run --example antenna_selection

use aoa_lab::selection::{
    brute_force_best_subset, evaluate_all, furthest_subset, normalized_objective,
};

fn main() {
    let m = 12;
    println!("exhaustive search over C({m}, F) subsets per size F");
    println!("{:>4} {:>26} {:>14} {:>8}", "F", "best subset", "objective", "match");
    for f in 1..=m {
        let (best, obj) = brute_force_best_subset(m, f).unwrap();
        let fur = furthest_subset(m, f).unwrap();
        let ok = best == fur;
        println!("{f:>4} {:>26} {obj:>14.6} {ok:>8}", best.label());
        assert!(ok, "furthest rule must match the exhaustive optimum");
    }

    // The full objective landscape for one size: the worst subset hugs the
    // reference end, the best one hugs the far end.
    let table = evaluate_all(8, 3).unwrap();
    let best = table
        .values
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let worst = table
        .values
        .iter()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    println!(
        "M=8 F=3: {} subsets, best {} ({:.4}), worst {} ({:.4})",
        table.values.len(),
        best.0.label(),
        best.1,
        worst.0.label(),
        worst.1
    );
    assert_eq!(best.0.indices(), &[5, 6, 7]);
    assert_eq!(worst.0.indices(), &[0, 1, 2]);
    assert_eq!(*best.1, normalized_objective(best.0));

    // Enumeration cost guard: a 64-choose-32 search is refused rather than
    // attempted.
    let err = brute_force_best_subset(64, 32).unwrap_err();
    println!("budget guard: {err}");
}
