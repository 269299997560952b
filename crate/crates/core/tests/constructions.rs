mod common;

use sphere_disc::covering::{find_uncovered_point, CoverInstance};
use sphere_disc::geometry::{cap_angle_from_volume, Cap};
use sphere_disc::hardness::*;
use sphere_disc::komlos::*;
use sphere_disc::linalg::{dot, norm, UnitVector};
use sphere_disc::packing::{generate_packing, max_pair_inner};
use sphere_disc::solver::{solve, SolverConfig};

fn unit_vectors(seed: u64, n: usize, m: usize) -> Vec<UnitVector> {
    common::random_vectors(seed, n, m)
        .into_iter()
        .map(|v| UnitVector::new(v).unwrap())
        .collect()
}

#[test]
fn certified_witness_lies_outside_every_cap() {
    let n = 10;
    for seed in 0..4 {
        let poles = unit_vectors(seed, n, 160);
        let angle = cap_angle_from_volume(n, 1e-3).unwrap();
        let cover = CoverInstance::caps(poles.clone(), angle).unwrap();
        let r = find_uncovered_point(&cover, &SolverConfig::with_iterations(20_000)).unwrap();
        assert!(r.certified);
        for p in &poles {
            let cap = Cap::new(p.clone(), angle).unwrap();
            assert!(!cap.contains(r.witness.as_slice()));
        }
        assert!(r.max_inner <= r.certified_bound.value + 1e-6);
    }
}

#[test]
fn halfspace_and_cap_views_agree() {
    let n = 12;
    let poles = unit_vectors(9, n, 200);
    let angle = 0.9;
    let caps = CoverInstance::caps(poles.clone(), angle).unwrap();
    let threshold = (n as f64).sqrt() * angle.cos();
    let hs = CoverInstance::halfspaces(poles, threshold).unwrap();
    let cfg = SolverConfig::with_iterations(10_000);
    let a = find_uncovered_point(&caps, &cfg).unwrap();
    let b = find_uncovered_point(&hs, &cfg).unwrap();
    assert_eq!(a.witness, b.witness);
    assert_eq!(a.certified, b.certified);
}

#[test]
fn packing_pairs_respect_the_bound() {
    let (n, m) = (8, 40);
    let r = generate_packing(n, m, &SolverConfig::with_iterations(20_000)).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..m {
        for j in 0..i {
            worst = worst.max(dot(r.points[i].as_slice(), r.points[j].as_slice()));
        }
    }
    assert_eq!(worst, max_pair_inner(&r.points));
    assert!(worst <= r.certified_bound.value + 1e-6);
    let min_angle = worst.acos();
    assert!((2.0 * r.radius - min_angle).abs() < 1e-12);
}

fn random_columns(seed: u64, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    common::random_vectors(seed, rows, cols)
}

#[test]
fn komlos_postconditions() {
    let n = 48;
    let input = KomlosInput::new(random_columns(1, 48, n)).unwrap();
    let out = spherical_komlos(&input, 7).unwrap();
    let x = out.x.as_slice();
    assert!((norm(x) - 1.0).abs() < 1e-12);
    assert!(out.inf_norm <= CERTIFIED_K / (n as f64).sqrt());
    assert!((out.inf_norm - input.apply_inf_norm(x)).abs() < 1e-15);
    let c = &out.coloring.x;
    let big = c.iter().filter(|v| v.abs() >= 0.5).count();
    assert!(2 * big >= n);
    assert!(norm(c) >= (n as f64).sqrt() / (2.0 * 2f64.sqrt()));
    for row in input.rows() {
        assert!(dot(&row, c).abs() <= LIGHT_ROW_THRESHOLD * norm(&row) + 1e-6);
    }
    assert_eq!(spherical_komlos(&input, 7).unwrap(), out);
}

#[test]
fn heavy_row_is_held_at_zero() {
    // 400 copies of e₁: the first row has norm 20 and must be balanced exactly.
    let n = 400;
    let cols = vec![vec![1.0, 0.0]; n];
    let input = KomlosInput::new(cols).unwrap();
    let out = spherical_komlos(&input, 3).unwrap();
    assert_eq!(out.heavy_rows, vec![0]);
    assert!(out.heavy_rows.len() as f64 <= n as f64 / 400.0);
    let s: f64 = out.x.as_slice().iter().sum();
    assert!(s.abs() <= 1e-10, "{s}");
    let sc: f64 = out.coloring.x.iter().sum();
    assert!(sc.abs() <= 1e-10 * (n as f64).sqrt());
}

#[test]
fn heavy_rows_at_the_limit() {
    // Σ‖row‖² = Σ‖column‖² ≤ n, so n/400 heavy rows is the most possible.
    let n = 800;
    let s = 1.0 / 2f64.sqrt();
    let input = KomlosInput::new(vec![vec![s, s]; n]).unwrap();
    let out = spherical_komlos(&input, 0).unwrap();
    assert_eq!(out.heavy_rows, vec![0, 1]);
    for row in input.rows() {
        assert!(dot(&row, out.x.as_slice()).abs() <= 1e-10);
    }
    let long = KomlosInput::new(vec![vec![1.0, 1.0]]);
    assert!(matches!(long, Err(KomlosError::ColumnTooLong { .. })));
}

#[test]
fn partial_coloring_respects_thresholds() {
    let n = 64;
    let rows = common::random_vectors(4, n, 96)
        .into_iter()
        .map(|r| r.into_iter().map(|v| v * 3.0).collect())
        .collect::<Vec<Vec<f64>>>();
    let problem = ColoringProblem::new(rows.clone(), vec![8.0; 96], vec![0.0; n], 0.1).unwrap();
    let pc = partial_coloring(&problem, 11, 50).unwrap();
    assert!(problem.is_partial_coloring(&pc.x));
    assert!(pc.x.iter().all(|v| v.abs() <= 1.0));
    let near = pc.x.iter().filter(|v| v.abs() >= 0.9).count();
    assert!(2 * near >= n);
    for r in &rows {
        assert!(dot(r, &pc.x).abs() <= 8.0 * norm(r) + 1e-6);
    }
}

#[test]
fn reduction_value_tracks_satisfied_clauses() {
    // 3×3 grid: rows and columns are the clauses.
    let c = |a, b, d| [Literal::pos(a), Literal::pos(b), Literal::pos(d)];
    let clauses = vec![c(0, 1, 2), c(3, 4, 5), c(6, 7, 8), c(0, 3, 6), c(1, 4, 7), c(2, 5, 8)];
    let f = NaeFormula::new(9, clauses).unwrap();
    let inst = reduce_nae_e3sat(&f);
    assert_eq!(inst.len(), 2 * 6 + 2 * 9);
    for mask in 0u32..512 {
        let a: Vec<bool> = (0..9).map(|i| mask >> i & 1 == 1).collect();
        let v = evaluate_instance(&inst, &coloring_vector(&a)).unwrap();
        let expect = if f.satisfied_count(&a) == 6 { 1.0 / 3.0 } else { (3.0f64 / 9.0).sqrt() };
        assert!((v - expect).abs() < 1e-12, "{a:?}");
    }
    // The solver never reports below what the instance evaluates to.
    let sol = solve(&inst.to_instance().unwrap(), &SolverConfig::with_iterations(50_000)).unwrap();
    assert_eq!(sol.value, evaluate_instance(&inst, sol.x.as_slice()).unwrap());
    assert!(sol.within_guarantee());
}

#[test]
fn negated_literals_use_signed_indicators() {
    let f = NaeFormula::parse("p nae3 3 1\n1 -2 3 0\n").unwrap();
    let inst = reduce_nae_e3sat(&f);
    let s = 1.0 / 3f64.sqrt();
    assert_eq!(inst.vectors()[0], vec![s, -s, s]);
    // x₁ = x₂ = x₃ = true reads as (T, F, T): satisfied.
    let v = evaluate_instance(&inst, &coloring_vector(&[true, true, true])).unwrap();
    assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-12);
}
