use kuramoto_core::graph::{
    audit, bernstein_bound, deviation_norm_exact, deviation_norm_heuristic, gen_erdos_renyi,
    gen_random_regular, mixing_bound, second_eigenvalue, SparseGraph,
};
use kuramoto_core::torus::{bl_lower_bound, MeasureRef};
use kuramoto_core::particle::InitialCondition;

/// `max_{s,t} Σ_ij M_ij s_j t_i` over all 2^{2n} sign pairs, with a dense `M`.
#[allow(clippy::needless_range_loop)]
fn brute_force_norm(g: &SparseGraph) -> f64 {
    let n = g.n();
    let p = g.dilution();
    let mut m = vec![vec![-1.0; n]; n];
    for (i, j, w) in g.entries() {
        m[i][j] += w as f64 / p;
    }
    let sign = |bits: u32, k: usize| if bits >> k & 1 == 1 { 1.0 } else { -1.0 };
    let mut best = f64::NEG_INFINITY;
    for s in 0..1u32 << n {
        for t in 0..1u32 << n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += m[i][j] * sign(s, j) * sign(t, i);
                }
            }
            best = best.max(acc);
        }
    }
    best
}

#[test]
fn exact_norm_matches_double_enumeration() {
    for (seed, sym) in [(1, false), (2, true)] {
        let g = gen_erdos_renyi(10, 0.5, seed, sym).unwrap();
        let exact = deviation_norm_exact(&g).unwrap().value;
        let brute = brute_force_norm(&g);
        assert!((exact - brute).abs() < 1e-9, "{exact} vs {brute}");
    }
}

#[test]
fn erdos_renyi_edge_counts_follow_the_binomial_law() {
    let (n, p) = (1000usize, 0.1);
    let slots = (n * (n - 1)) as f64;
    let counts: Vec<f64> = (0..50)
        .map(|seed| gen_erdos_renyi(n, p, seed, false).unwrap().nnz() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    // Standard error of the mean of 50 Binomial(slots, p) draws.
    let sigma = (slots * p * (1.0 - p) / counts.len() as f64).sqrt();
    assert!((mean - p * slots).abs() <= 3.0 * sigma, "mean {mean}, expected {}", p * slots);
    for &c in &counts {
        assert!((c - p * slots).abs() <= 6.0 * (slots * p * (1.0 - p)).sqrt());
    }
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(gen_erdos_renyi(300, 0.05, 9, true).unwrap(), gen_erdos_renyi(300, 0.05, 9, true).unwrap());
    assert_eq!(gen_random_regular(200, 6, 9).unwrap(), gen_random_regular(200, 6, 9).unwrap());
    assert_ne!(gen_random_regular(200, 6, 9).unwrap(), gen_random_regular(200, 6, 10).unwrap());
}

#[test]
fn random_regular_graphs_are_nearly_ramanujan() {
    let d = 20usize;
    let ramanujan = 2.0 * ((d - 1) as f64).sqrt();
    let good = (0..20)
        .filter(|&seed| {
            let g = gen_random_regular(500, d, seed).unwrap();
            second_eigenvalue(&g).unwrap() <= ramanujan * 1.2
        })
        .count();
    assert!(good >= 18, "{good} of 20 within 1.2 × 2√(d−1)");
    let m = mixing_bound(&gen_random_regular(500, d, 0).unwrap()).unwrap();
    assert!(m.bound <= 4.0 * ramanujan / d as f64 * 1.2);
}

/// `P(|X/(np) − 1| ≥ δ)` for `X ~ Binomial(trials, p)`, summed exactly.
fn binomial_deviation_probability(trials: u64, n: usize, p: f64, delta: f64) -> f64 {
    let ln_choose = |k: u64| {
        libm::lgamma(trials as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((trials - k) as f64 + 1.0)
    };
    (0..=trials)
        .filter(|&k| (k as f64 / (n as f64 * p) - 1.0).abs() >= delta)
        .map(|k| (ln_choose(k) + k as f64 * p.ln() + (trials - k) as f64 * (1.0 - p).ln()).exp())
        .sum()
}

#[test]
fn erdos_renyi_degrees_concentrate() {
    let (n, p, delta) = (2000usize, 0.05, 0.2);
    let expected = binomial_deviation_probability(n as u64 - 1, n, p, delta);
    let seeds = 20;
    let mut total = 0.0;
    for seed in 0..seeds {
        let g = gen_erdos_renyi(n, p, seed, false).unwrap();
        let a = audit(&g, delta).unwrap();
        assert_eq!(a.giant_fraction, 1.0);
        total += a.bad_fraction;
    }
    // Out-degrees of a directed graph are independent binomials.
    let mean = total / seeds as f64;
    let se = (expected * (1.0 - expected) / (n as f64 * seeds as f64)).sqrt();
    assert!((mean - expected).abs() <= 4.0 * se, "mean bad fraction {mean}, binomial {expected}");
}

#[test]
fn dense_enough_graphs_are_connected() {
    for seed in 0..5 {
        for (n, p) in [(200usize, 0.12), (1000, 0.03)] {
            assert!(n as f64 * p >= 4.0 * (n as f64).ln());
            let a = audit(&gen_erdos_renyi(n, p, seed, true).unwrap(), 0.2).unwrap();
            assert_eq!(a.giant_fraction, 1.0);
        }
        let r = audit(&gen_random_regular(300, 24, seed).unwrap(), 0.2).unwrap();
        assert_eq!(r.component_count, 1);
    }
}

#[test]
fn erdos_renyi_norm_respects_bernstein() {
    for n in [200usize, 500, 1000] {
        for p in [0.05, 0.1] {
            let bound = bernstein_bound(n, p).unwrap();
            for seed in 0..20 {
                let g = gen_erdos_renyi(n, p, seed, false).unwrap();
                let v = deviation_norm_heuristic(&g, 16, seed).unwrap().normalized(n);
                assert!(v <= bound, "n={n} p={p} seed={seed}: {v} > {bound}");
            }
        }
    }
}

#[test]
fn regular_norm_respects_mixing_lemma() {
    for (n, d) in [(100usize, 10usize), (256, 16), (400, 20)] {
        for seed in 0..5 {
            let g = gen_random_regular(n, d, seed).unwrap();
            let v = deviation_norm_heuristic(&g, 32, seed).unwrap().normalized(n);
            let m = mixing_bound(&g).unwrap();
            assert!(v <= m.bound + 1e-9, "n={n} d={d}: {v} > {}", m.bound);
        }
    }
}

#[test]
fn uniform_samples_are_close_to_uniform_in_test_function_distance() {
    for seed in 0..20 {
        let a = InitialCondition::IidUniform { seed }.realize(10_000).unwrap();
        let v = bl_lower_bound(MeasureRef::Atoms(&a), MeasureRef::Uniform, 32, seed).unwrap();
        assert!(v <= 0.05, "seed {seed}: {v}");
    }
}
