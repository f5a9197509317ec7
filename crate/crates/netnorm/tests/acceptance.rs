//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured figures. Run with `cargo test -p netnorm --test acceptance`
//! (add `-- --nocapture` to see the lines).

use netnorm::algorithms::{hsep_basic, hsep_multipartite, hsep_sparse, s1_to_banach};
use netnorm::apps::{eb_channel_max_output_norm, two_to_q_norm};
use netnorm::feascheck::{check_feasible, FeasStatus, SolverConfig};
use netnorm::matlib::{CVector, DensityMatrix, Exponent, HermitianMatrix};
use netnorm::model::{
    banach_constants, BElements, EbChannel, LoccTerm, MultipartiteLocc, NormFamily, OneWayLocc,
};
use netnorm::oracle;
use netnorm::rng::{
    random_contraction, random_density, random_gaussian_matrix, random_povm, rng_from,
};
use netnorm::sparsify::sparsify_locc;

const BUDGET: u64 = 10_000_000;

fn cfg() -> SolverConfig<f64> {
    SolverConfig::default()
}

fn projector(dim: usize, i: usize) -> HermitianMatrix<f64> {
    HermitianMatrix::new_unchecked(CVector::basis(dim, i).outer())
}

fn random_locc(
    d1: usize,
    d2: usize,
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> OneWayLocc<f64> {
    let xs = random_povm::<f64>(d1, n, rng);
    let terms = xs
        .into_iter()
        .map(|x| LoccTerm {
            x,
            y: random_contraction::<f64>(d2, rng),
        })
        .collect();
    OneWayLocc::new(d1, d2, terms).unwrap()
}

/// Criterion 1: the exact minimum over the fully enumerated net satisfies
/// the covering bound on 100/100 random (p, Y) instances.
#[test]
fn acceptance_01_net_covering() {
    let res = oracle::net_covering_check(100, 1001);
    assert_eq!(
        res.failures, 0,
        "ACCEPTANCE 1 (net covering): FAIL — {} of {} instances exceeded the bound",
        res.failures, res.trials
    );
    println!(
        "ACCEPTANCE 1 (net covering): PASS — 100/100 within bound, worst margin {:.3e}",
        res.worst_margin
    );
}

/// Criterion 2: h_Sep vs the alternating oracle at k = 60 on 20 random
/// bipartite instances: sound above in 20/20, within δ_att below in ≥ 19/20.
#[test]
fn acceptance_02_hsep_vs_oracle() {
    // δ chosen so the k-selection formula lands exactly on 60.
    let delta = (9.0 * 2f64.ln() / 60.0).sqrt() * 1.000_000_1;
    assert_eq!(netnorm::nets::choose_k_basic::<f64>(2, delta).unwrap(), 60);
    let mut lower_ok = 0;
    let mut upper_ok = 0;
    let trials = 20;
    for t in 0..trials {
        let mut rng = rng_from(2000 + t as u64);
        let n = 1 + (t % 3);
        let m = random_locc(2, 2, n, &mut rng);
        let report = hsep_basic(&m, delta, BUDGET, &cfg()).unwrap();
        assert_eq!(report.k_used, 60, "k must be 60 for this suite");
        let (oracle_v, _, _) =
            oracle::hsep_alternating(&m.assemble(), 2, 2, 50, 200, 3000 + t as u64);
        if oracle_v - report.value <= report.attained_delta {
            lower_ok += 1;
        }
        if report.value <= oracle_v + 2.0 * report.solver_tol {
            upper_ok += 1;
        }
    }
    assert_eq!(
        upper_ok, trials,
        "ACCEPTANCE 2: FAIL — upper soundness {upper_ok}/{trials}"
    );
    assert!(
        lower_ok >= 19,
        "ACCEPTANCE 2: FAIL — lower guarantee {lower_ok}/{trials}"
    );
    println!(
        "ACCEPTANCE 2 (h_Sep vs oracle): PASS — upper {upper_ok}/{trials}, lower {lower_ok}/{trials}"
    );
}

/// Criterion 3: sparsification meets ‖M−M′‖ ≤ 0.3 with a valid output on
/// 10/10 random n = 50 instances.
#[test]
fn acceptance_03_sparsification() {
    let mut ok = 0;
    let mut retries_total = 0;
    for t in 0..10 {
        let mut rng = rng_from(4000 + t as u64);
        let m = random_locc(2, 2, 50, &mut rng);
        let (out, stats) = sparsify_locc(&m, 0.3, 5000 + t as u64, 64).unwrap();
        retries_total += stats.retries_used;
        let dev = out.assemble().sub(&m.assemble()).op_norm();
        if dev <= 0.3 && out.validate().is_empty() {
            ok += 1;
        }
    }
    assert_eq!(ok, 10, "ACCEPTANCE 3: FAIL — {ok}/10 met the bound");
    println!("ACCEPTANCE 3 (sparsification): PASS — 10/10 verified ≤ 0.3 ({retries_total} retries total)");
}

/// Criterion 4: depolarizing-channel values match d₂^{−1+1/α}.
#[test]
fn acceptance_04_depolarizing_channel() {
    let mut worst = 0.0f64;
    for d2 in [2usize, 3] {
        for alpha in [2.0f64, 4.0] {
            let ch = EbChannel::new(
                d2,
                d2,
                vec![(
                    HermitianMatrix::<f64>::identity(d2),
                    DensityMatrix::maximally_mixed(d2),
                )],
            )
            .unwrap();
            let report =
                eb_channel_max_output_norm(&ch, Exponent::Finite(alpha), 0.1, BUDGET, &cfg())
                    .unwrap();
            let want = (d2 as f64).powf(-1.0 + 1.0 / alpha);
            let err = (report.value - want).abs();
            worst = worst.max(err);
            assert!(
                err <= report.attained_delta,
                "ACCEPTANCE 4: FAIL — d2={d2} α={alpha}: |{}−{want}| > δ_att {}",
                report.value,
                report.attained_delta
            );
        }
    }
    println!(
        "ACCEPTANCE 4 (depolarizing channel): PASS — worst |value − d₂^(1/α−1)| = {worst:.3e}"
    );
}

/// Criterion 5: 2→q consistency (q=2 exact), accuracy against the gradient
/// oracle at q=4, and scale covariance.
#[test]
fn acceptance_05_two_to_q() {
    // (a) q = 2 equals the squared top singular value on 50 random matrices.
    let mut rng = rng_from(6001);
    for t in 0..50 {
        let (r, c) = [(2usize, 3usize), (3, 3), (3, 4), (4, 2)][t % 4];
        let a = random_gaussian_matrix::<f64>(r, c, &mut rng);
        let report = two_to_q_norm(&a, 2.0, 0.1, BUDGET, &cfg()).unwrap();
        let sigma = netnorm::matlib::schatten_norm(&a, Exponent::Infinity).unwrap();
        assert!(
            (report.value - sigma * sigma).abs() <= 1e-6 * (sigma * sigma).max(1.0),
            "ACCEPTANCE 5a: FAIL at trial {t}"
        );
    }

    // (b) q = 4 on random 4×6 matrices vs the multi-start gradient oracle.
    let mut ok = 0;
    let trials = 20;
    for t in 0..trials {
        let mut rng = rng_from(6100 + t as u64);
        let a = random_gaussian_matrix::<f64>(4, 6, &mut rng);
        let report = two_to_q_norm(&a, 4.0, 0.25, BUDGET, &cfg()).unwrap();
        let oracle_v = oracle::two_to_q_gradient(&a, 4.0, 500, 200, 6200 + t as u64);
        // report.value and attained_delta are already in ‖A‖²-scaled units.
        if (report.value - oracle_v * oracle_v).abs() <= report.attained_delta + 2e-4 {
            ok += 1;
        }
    }
    assert!(
        ok >= 18,
        "ACCEPTANCE 5b: FAIL — {ok}/{trials} within tolerance"
    );

    // (c) scale covariance under c = 3.
    let mut rng = rng_from(6301);
    let a = random_gaussian_matrix::<f64>(3, 4, &mut rng);
    let scaled = a.scale_re(3.0);
    let r1 = two_to_q_norm(&a, 4.0, 0.25, BUDGET, &cfg()).unwrap();
    let r2 = two_to_q_norm(&scaled, 4.0, 0.25, BUDGET, &cfg()).unwrap();
    let rel = (r2.value - 9.0 * r1.value).abs() / r2.value.max(1e-30);
    assert!(
        rel <= 1e-6,
        "ACCEPTANCE 5c: FAIL — relative drift {rel:.3e}"
    );

    println!("ACCEPTANCE 5 (2→q): PASS — q=2 exact on 50/50, q=4 {ok}/{trials}, covariance drift {rel:.3e}");
}

/// Criterion 6: matrix-Hoeffding empirical tails below the bound on the
/// whole (d, k, δ) grid at 2000 trials per cell.
#[test]
fn acceptance_06_hoeffding_tails() {
    let deltas = [0.25, 0.5, 1.0];
    let mut worst_ratio = 0.0f64;
    for d in [2usize, 4] {
        for k in [50usize, 200] {
            let rows = oracle::hoeffding_tail_check(
                d,
                k,
                1.0,
                2000,
                &deltas,
                7000 + d as u64 * 10 + k as u64,
            );
            for row in rows {
                assert!(
                    row.pass,
                    "ACCEPTANCE 6: FAIL — d={d} k={k} δ={}: empirical {} > bound {}",
                    row.delta, row.empirical, row.bound
                );
                if row.bound > 0.0 {
                    worst_ratio = worst_ratio.max(row.empirical / row.bound);
                }
            }
        }
    }
    println!(
        "ACCEPTANCE 6 (matrix Hoeffding): PASS — worst empirical/bound ratio {worst_ratio:.3}"
    );
}

/// Criterion 7: type-constant suite — ℓ₂ ratio exactly 1 under exact sign
/// enumeration, S₄ ratio ≤ 3 within 3σ, symmetrization inequality within 3σ.
#[test]
fn acceptance_07_type_constants() {
    let l2 = banach_constants::<f64>(NormFamily::Ell, Exponent::Finite(2.0), 6).unwrap();
    for k in [4usize, 8, 12] {
        let res = oracle::type_constant_check(&l2, k, 30, 8000 + k as u64);
        assert!(res.exact_signs);
        assert!(
            (res.max_ratio - 1.0).abs() <= 1e-9,
            "ACCEPTANCE 7: FAIL — ℓ₂ ratio {} at k={k}",
            res.max_ratio
        );
    }

    let s4 = banach_constants::<f64>(NormFamily::Schatten, Exponent::Finite(4.0), 4).unwrap();
    let res4 = oracle::type_constant_check(&s4, 8, 50, 8100);
    assert!(
        res4.pass && res4.max_ratio <= 3.0 + 3.0 * res4.mc_sigma + 1e-9,
        "ACCEPTANCE 7: FAIL — S₄ ratio {} vs C² = 3",
        res4.max_ratio
    );

    let s2 = banach_constants::<f64>(NormFamily::Schatten, Exponent::Finite(2.0), 3).unwrap();
    let sym2 = oracle::symmetrization_check(&s2, 6, 20, 400, 8200);
    let sym4 = oracle::symmetrization_check(&s4, 6, 20, 400, 8300);
    assert!(
        sym2.pass,
        "ACCEPTANCE 7: FAIL — S₂ symmetrization lhs {} vs 2·rhs {}",
        sym2.lhs, sym2.rhs_doubled
    );
    assert!(
        sym4.pass,
        "ACCEPTANCE 7: FAIL — S₄ symmetrization lhs {} vs 2·rhs {}",
        sym4.lhs, sym4.rhs_doubled
    );
    println!(
        "ACCEPTANCE 7 (type constants): PASS — ℓ₂ exact, S₄ ratio {:.3} ≤ 3, symmetrization S₂ {:.3}≤{:.3}, S₄ {:.3}≤{:.3}",
        res4.max_ratio, sym2.lhs, sym2.rhs_doubled, sym4.lhs, sym4.rhs_doubled
    );
}

/// Criterion 8: multipartite consistency — l=2 equals the flattened scan,
/// the product-projector chain returns 1, and l=3 diagonal trees track the
/// grid oracle.
#[test]
fn acceptance_08_multipartite() {
    // (a) l = 2 trees match the flattened bipartite run to 1e-9.
    for t in 0..10 {
        let mut rng = rng_from(9000 + t as u64);
        let xs = random_povm::<f64>(2, 2, &mut rng);
        let leaves: Vec<HermitianMatrix<f64>> = (0..2)
            .map(|_| random_contraction::<f64>(2, &mut rng))
            .collect();
        let tree = MultipartiteLocc::new(vec![2, 2], vec![2, 1], vec![xs, leaves]).unwrap();
        let flat = tree.flatten_bipartite().unwrap();
        let rt = hsep_multipartite(&tree, 0.5, BUDGET, &cfg()).unwrap();
        let rf = hsep_basic(&flat, 0.5, BUDGET, &cfg()).unwrap();
        assert!(
            (rt.value - rf.value).abs() <= 1e-9,
            "ACCEPTANCE 8a: FAIL at trial {t}: {} vs {}",
            rt.value,
            rf.value
        );
    }

    // (b) product projector chain.
    let chain = MultipartiteLocc::new(
        vec![2, 2, 2],
        vec![1, 1, 1],
        vec![
            vec![projector(2, 0)],
            vec![projector(2, 0)],
            vec![projector(2, 0)],
        ],
    )
    .unwrap();
    let rp = hsep_multipartite(&chain, 1.0, BUDGET, &cfg()).unwrap();
    assert!(
        (rp.value - 1.0).abs() <= 1e-6,
        "ACCEPTANCE 8b: FAIL — chain value {}",
        rp.value
    );

    // (c) l = 3 classical diagonal trees vs an exhaustive product grid.
    let mut ok = 0;
    let trials = 10;
    for t in 0..trials {
        let mut rng = rng_from(9100 + t as u64);
        let tree = random_diag_tree(&mut rng);
        let report = hsep_multipartite(&tree, 0.75, BUDGET, &cfg()).unwrap();
        let grid = diag_tree_grid_oracle(&tree, 101);
        let val_ok = (grid - report.value) <= report.attained_delta
            && report.value <= grid + 2.0 * report.solver_tol + 1e-9;
        if val_ok {
            ok += 1;
        }
    }
    assert!(
        ok >= 9,
        "ACCEPTANCE 8c: FAIL — {ok}/{trials} within δ_att of the grid oracle"
    );
    println!("ACCEPTANCE 8 (multipartite): PASS — l=2 10/10, chain 1±1e-6, diagonal {ok}/{trials}");
}

/// Random three-party diagonal (classical) tree, branching two with exact
/// per-node completeness (children sum to I on the diagonal).
fn random_diag_tree(rng: &mut rand_chacha::ChaCha8Rng) -> MultipartiteLocc<f64> {
    let mut pair = || -> [HermitianMatrix<f64>; 2] {
        let a = netnorm::rng::uniform(rng);
        let b = netnorm::rng::uniform(rng);
        [
            HermitianMatrix::diag(&[a, b]),
            HermitianMatrix::diag(&[1.0 - a, 1.0 - b]),
        ]
    };
    let level1: Vec<HermitianMatrix<f64>> = pair().to_vec();
    let mut level2 = Vec::new();
    for _ in 0..2 {
        level2.extend(pair());
    }
    let mut level3 = Vec::new();
    for _ in 0..4 {
        level3.extend(pair());
    }
    MultipartiteLocc::new(vec![2, 2, 2], vec![2, 2, 2], vec![level1, level2, level3]).unwrap()
}

/// Exhaustive scan of tr[M(α₁⊗α₂⊗α₃)] over diagonal product states on a
/// uniform grid; exact for diagonal trees up to grid resolution.
fn diag_tree_grid_oracle(tree: &MultipartiteLocc<f64>, steps: usize) -> f64 {
    let m = tree.assemble();
    let diag: Vec<f64> = (0..8).map(|i| m.as_cmatrix().get(i, i).re).collect();
    let mut best = f64::NEG_INFINITY;
    for i1 in 0..=steps {
        let t1 = i1 as f64 / steps as f64;
        for i2 in 0..=steps {
            let t2 = i2 as f64 / steps as f64;
            for i3 in 0..=steps {
                let t3 = i3 as f64 / steps as f64;
                let mut v = 0.0;
                for b in 0..8usize {
                    let p1 = if b & 4 == 0 { t1 } else { 1.0 - t1 };
                    let p2 = if b & 2 == 0 { t2 } else { 1.0 - t2 };
                    let p3 = if b & 1 == 0 { t3 } else { 1.0 - t3 };
                    v += diag[b] * p1 * p2 * p3;
                }
                best = best.max(v);
            }
        }
    }
    best
}

/// Criterion 9: the analytically forced infeasible case and 50 constructed
/// membership cases.
#[test]
fn acceptance_09_feasibility_forced_cases() {
    let solver = cfg();
    let desc = netnorm::model::operator_norm_descriptor::<f64>(2);
    let xs = vec![
        HermitianMatrix::<f64>::identity(2).scale(0.5),
        HermitianMatrix::<f64>::identity(2).scale(0.5),
    ];
    let ys = BElements::Matrices(vec![projector(2, 0), projector(2, 1)]);
    let res = check_feasible(&[1.0, 0.0], &xs, &ys, &desc, 0.1, &solver, 0).unwrap();
    assert_eq!(
        res.status,
        FeasStatus::Infeasible,
        "ACCEPTANCE 9: FAIL — forced case status"
    );
    assert!(
        (res.achieved - 0.5).abs() <= 1e-3,
        "ACCEPTANCE 9: FAIL — forced case achieved {}",
        res.achieved
    );

    let mut feasible = 0;
    for t in 0..50u64 {
        let mut rng = rng_from(9500 + t);
        let d = 2 + (t % 2) as usize;
        let n = 2 + (t % 3) as usize;
        let xs = random_povm::<f64>(d, n, &mut rng);
        let ys = BElements::Matrices((0..n).map(|i| projector(n, i)).collect());
        let desc = netnorm::model::operator_norm_descriptor::<f64>(n);
        let alpha0 = random_density::<f64>(d, &mut rng);
        let p: Vec<f64> = xs.iter().map(|x| x.hs_inner_re(alpha0.as_herm())).collect();
        let res = check_feasible(&p, &xs, &ys, &desc, 1e-3, &solver, t).unwrap();
        if res.status == FeasStatus::Feasible {
            feasible += 1;
        }
    }
    assert_eq!(
        feasible, 50,
        "ACCEPTANCE 9: FAIL — membership {feasible}/50"
    );
    println!(
        "ACCEPTANCE 9 (feasibility forced cases): PASS — forced 0.5 Infeasible, membership 50/50"
    );
}

/// Criterion 10: byte-identical reports (timing zeroed) at 1 and 8 worker
/// threads across every estimator entry point.
#[test]
fn acceptance_10_determinism() {
    fn run_all(threads: usize) -> Vec<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let solver = cfg();
            let mut out = Vec::new();
            let mut push = |r: netnorm::EstimateReport64| {
                let mut r = r;
                r.wall_time_ms = 0;
                out.push(serde_json::to_string(&r).unwrap());
            };

            let mut rng = rng_from(42);
            let m = random_locc(2, 2, 3, &mut rng);
            push(hsep_basic(&m, 0.45, BUDGET, &solver).unwrap());
            push(hsep_sparse(&m, 0.6, 7, BUDGET, &solver).unwrap());

            let mut rng = rng_from(43);
            let xs = random_povm::<f64>(2, 2, &mut rng);
            let leaves: Vec<HermitianMatrix<f64>> = (0..2)
                .map(|_| random_contraction::<f64>(2, &mut rng))
                .collect();
            let tree = MultipartiteLocc::new(vec![2, 2], vec![2, 1], vec![xs, leaves]).unwrap();
            push(hsep_multipartite(&tree, 0.5, BUDGET, &solver).unwrap());

            let ch = EbChannel::new(
                2,
                2,
                vec![(
                    HermitianMatrix::<f64>::identity(2),
                    DensityMatrix::maximally_mixed(2),
                )],
            )
            .unwrap();
            push(
                eb_channel_max_output_norm(&ch, Exponent::Finite(2.0), 0.2, BUDGET, &solver)
                    .unwrap(),
            );

            let mut rng = rng_from(44);
            let a = random_gaussian_matrix::<f64>(3, 4, &mut rng);
            push(two_to_q_norm(&a, 4.0, 0.3, BUDGET, &solver).unwrap());
            push(two_to_q_norm(&a, 2.0, 0.3, BUDGET, &solver).unwrap());

            let mut rng = rng_from(45);
            let xs = random_povm::<f64>(2, 3, &mut rng);
            let ys: Vec<HermitianMatrix<f64>> = (0..3)
                .map(|_| random_contraction::<f64>(2, &mut rng))
                .collect();
            let desc =
                banach_constants::<f64>(NormFamily::Schatten, Exponent::Finite(2.0), 2).unwrap();
            let g =
                netnorm::model::GeneralDecomposition::new(2, xs, BElements::Matrices(ys)).unwrap();
            push(s1_to_banach(&g, &desc, 0.35, BUDGET, &solver, None, None).unwrap());

            let desc4 = banach_constants::<f64>(NormFamily::Ell, Exponent::Finite(4.0), 2).unwrap();
            let xstar = netnorm::feascheck::Functionals::Real(vec![vec![0.6, 0.0], vec![0.0, 0.6]]);
            let yv = BElements::Vectors(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
            push(
                netnorm::algorithms::injective_norm(
                    &xstar,
                    &yv,
                    netnorm::algorithms::InputFamily::L2,
                    2,
                    &desc4,
                    0.4,
                    BUDGET,
                    &solver,
                )
                .unwrap(),
            );
            out
        })
    }

    let one = run_all(1);
    let eight = run_all(8);
    assert_eq!(one.len(), eight.len());
    for (i, (a, b)) in one.iter().zip(&eight).enumerate() {
        assert_eq!(
            a, b,
            "ACCEPTANCE 10: FAIL — estimator {i} differs across thread counts"
        );
    }
    println!(
        "ACCEPTANCE 10 (determinism): PASS — {} reports byte-identical at 1 and 8 threads",
        one.len()
    );
}
