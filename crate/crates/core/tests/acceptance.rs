//! Acceptance gate: one check per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`.

use std::time::Instant;

use num_complex::Complex64;

use ellax::report::{
    acceptance_checks, cybe_suite, degrees_suite, elliptic_suite, gs_suite, hamiltonian_suite,
    jacobi_suite, lax_suite, rll_suite, root_data_suite, table4_suite, transition_suite,
    CheckRecord, Tolerances, GS_CASES, TAU_DEFAULT,
};

const SEED: u64 = 1;
const DRAWS: usize = 20;

fn tau() -> Complex64 {
    Complex64::new(TAU_DEFAULT.0, TAU_DEFAULT.1)
}

fn gate(criterion: &str, checks: &[CheckRecord]) {
    let ok = checks.iter().all(|c| c.passed());
    let verdict = if ok { "pass" } else { "FAIL" };
    println!("[{verdict}] {criterion} ({} checks)", checks.len());
    if !ok {
        for c in checks.iter().filter(|c| !c.passed()) {
            println!("        {} status={} residual={:?}", c.name, c.status, c.residual);
        }
    }
    assert!(ok, "criterion failed: {criterion}");
}

#[test]
fn criterion_01_root_data() {
    gate(
        "root data: #roots, Cartan determinant, center order, 15 algebras",
        &root_data_suite(),
    );
}

#[test]
fn criterion_02_jacobi() {
    gate(
        "structure constants satisfy Jacobi exactly (rank <= 4 and E6)",
        &jacobi_suite(),
    );
}

#[test]
fn criterion_03_transition() {
    gate(
        "kappa shift, symmetry action, pairing identity; brute-force Weyl rank <= 3",
        &transition_suite(),
    );
}

#[test]
fn criterion_04_graded_basis() {
    let tols = Tolerances::default();
    let checks: Vec<CheckRecord> = GS_CASES
        .iter()
        .flat_map(|&(label, node)| gs_suite(label, node, tols.gram, SEED))
        .collect();
    gate("graded basis: Gram closed forms, eigenvectors, grading (six cases)", &checks);
}

#[test]
fn criterion_05_invariant_subalgebras() {
    gate("invariant subalgebra table (six cases)", &table4_suite());
}

#[test]
fn criterion_06_elliptic_kernels() {
    gate(
        "Fay identities, kernel quasi-periodicity, wp-phi relation (1000 points)",
        &elliptic_suite(SEED, 1000, Tolerances::default().elliptic),
    );
}

#[test]
fn criterion_07_lax() {
    gate(
        "Lax quasi-periodicity and residue (A1/A2/A3/B3, 20 draws)",
        &lax_suite(tau(), SEED, DRAWS, &Tolerances::default()),
    );
}

#[test]
fn criterion_08_hamiltonians() {
    gate(
        "E2 fit of (1/2)(L,L), closed-form Hamiltonians, trivial-class spin-CM",
        &hamiltonian_suite(tau(), SEED, &Tolerances::default()),
    );
}

#[test]
fn criterion_09_rll_cybe() {
    let tols = Tolerances::default();
    let mut checks = rll_suite(tau(), SEED, DRAWS, &tols);
    checks.extend(cybe_suite(tau(), SEED, DRAWS, &tols));
    gate("dynamical RLL and Yang-Baxter residuals with ablation controls", &checks);
}

#[test]
fn criterion_10_degree_table() {
    let t = Instant::now();
    let checks = degrees_suite();
    let elapsed = t.elapsed();
    gate("conformal degree table, seven rows, exact residues", &checks);
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "degree table took {elapsed:?}, budget is 1s"
    );
}

#[test]
fn full_battery_under_ten_minutes() {
    let t = Instant::now();
    let checks = acceptance_checks(tau(), SEED, DRAWS, &Tolerances::default());
    let elapsed = t.elapsed();
    gate("full battery", &checks);
    println!("full battery wall time: {elapsed:?}");
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "full battery took {elapsed:?}, budget is 600s"
    );
}
