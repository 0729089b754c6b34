//! Acceptance suite. One test per criterion; each prints a single
//! `[PASS]` / `[FAIL]` line (visible with `--nocapture`) before asserting.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use num_rational::BigRational;
use superminhash::analytics::{
    alpha, alpha_exact, conditional_match_probability, indicator_covariance, rational_to_f64, runtime_bound,
    superminhash_variance,
};
use superminhash::io::{decode_signature, encode_signature, read_signature, FormatError, HEADER_LEN};
use superminhash::rng::ElementStream;
use superminhash::sim::{run_runtime_sim, run_variance_sim, RuntimeSimSpec, SetProfile, SimReport, TrialSets, VarianceSimSpec};
use superminhash::{Algorithm, Signature, SketchBuilder, SketchConfig};

fn report(id: &str, what: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {what}: {detail}");
}

fn bits(sig: &Signature) -> Vec<u64> {
    sig.values().iter().map(|v| v.to_bits()).collect()
}

fn element(x: u64) -> [u8; 8] {
    x.to_le_bytes()
}

#[test]
fn c01_optimized_matches_reference() {
    let mut rng = ElementStream::from_state(0xA11CE);
    let sizes = [1u32, 2, 3, 16, 64];
    let (mut cases, mut mismatches) = (0, 0);
    for i in 0..1500u64 {
        let m = sizes[(i % 5) as usize];
        let n = rng.next_uniform_int(0, 4 * u64::from(m)).unwrap();
        let with_duplicates = i % 2 == 1;
        let universe = if with_duplicates { (n / 2).max(1) } else { u64::MAX };
        let seq: Vec<u64> = (0..n).map(|_| rng.next_uniform_int(0, universe - 1).unwrap()).collect();
        let seed = rng.next_u64();
        let mut reference = SketchBuilder::new(SketchConfig::new(m, Algorithm::SuperMinHashReference, seed).unwrap());
        let mut optimized = SketchBuilder::new(SketchConfig::new(m, Algorithm::SuperMinHash, seed).unwrap());
        for &x in &seq {
            reference.add(&element(x));
            optimized.add(&element(x));
        }
        cases += 1;
        if bits(&reference.finalize()) != bits(&optimized.finalize()) {
            mismatches += 1;
        }
    }
    let ok = cases >= 1000 && mismatches == 0;
    report("C1", "optimized == reference (bitwise)", ok, &format!("{cases} sequences, {mismatches} mismatches"));
    assert!(ok);
}

#[test]
fn c02_merge_equals_union() {
    let mut rng = ElementStream::from_state(0xB0B);
    let (mut cases, mut mismatches) = (0, 0);
    for i in 0..400u64 {
        let m = rng.next_uniform_int(1, 128).unwrap() as u32;
        let algo = Algorithm::ALL[(i % 4) as usize];
        let config = SketchConfig::new(m, algo, rng.next_u64()).unwrap();
        let universe = rng.next_uniform_int(1, 300).unwrap();
        let draw = |rng: &mut ElementStream| -> BTreeSet<u64> {
            let k = rng.next_uniform_int(1, 200).unwrap();
            (0..k).map(|_| rng.next_uniform_int(0, universe - 1).unwrap()).collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let union: BTreeSet<u64> = a.union(&b).copied().collect();
        let sig = |s: &BTreeSet<u64>| Signature::from_elements(config, s.iter().map(|&x| element(x)));
        let merged = sig(&a).merge(&sig(&b)).unwrap();
        cases += 1;
        if bits(&merged) != bits(&sig(&union)) {
            mismatches += 1;
        }
    }
    let ok = cases >= 200 && mismatches == 0;
    report("C2", "merge(sig A, sig B) == sig(A u B)", ok, &format!("{cases} pairs, {mismatches} mismatches"));
    assert!(ok);
}

#[test]
fn c03_unbiased() {
    let profiles = [(1, 1, 1), (2, 1, 1), (1, 1, 2)];
    let mut ok = true;
    let mut details = Vec::new();
    for (pi, &(a, b, s)) in profiles.iter().enumerate() {
        for (mi, m) in [16u32, 256].into_iter().enumerate() {
            let seed = 300 + (pi * 2 + mi) as u64;
            let spec = VarianceSimSpec::new(m, SetProfile::new(a, b, s).unwrap(), 10_000, seed);
            let r = run_variance_sim(&spec).unwrap();
            let dev = (r.mean_estimate - r.jaccard).abs();
            let pass = dev <= 3.0 * r.std_error;
            ok &= pass;
            details.push(format!("J={:.4} m={m}: |dev|={dev:.2e} ({:.2} se)", r.jaccard, dev / r.std_error));
        }
    }
    report("C3", "|mean - J| <= 3 se", ok, &details.join("; "));
    assert!(ok);
}

const VARIANCE_SIZES: [u32; 3] = [16, 64, 256];

/// Profiles (k, k, k) give J = 1/3 and u = 3k.
fn variance_grid(algorithm: Algorithm) -> Vec<SimReport> {
    let mut out = Vec::new();
    for (mi, m) in VARIANCE_SIZES.into_iter().enumerate() {
        let mut ks = vec![1u64, 4, 16, u64::from(m)];
        ks.dedup();
        for (ki, k) in ks.into_iter().enumerate() {
            let seed = 400 + (mi * 4 + ki) as u64;
            let spec = VarianceSimSpec::new(m, SetProfile::new(k, k, k).unwrap(), 10_000, seed).with_algorithm(algorithm);
            out.push(run_variance_sim(&spec).unwrap());
        }
    }
    out
}

fn superminhash_grid() -> &'static [SimReport] {
    static GRID: OnceLock<Vec<SimReport>> = OnceLock::new();
    GRID.get_or_init(|| variance_grid(Algorithm::SuperMinHash))
}

#[test]
fn c04_variance_matches_alpha() {
    let mut ok = true;
    let mut details = Vec::new();
    for r in superminhash_grid() {
        let dev = (r.empirical_alpha - r.theoretical_alpha).abs();
        ok &= dev <= 0.06;
        details.push(format!("m={} u={}: {:.4} vs {:.4}", r.m, r.union, r.empirical_alpha, r.theoretical_alpha));
    }
    report("C4", "empirical alpha within 0.06 of alpha(m,u)", ok, &details.join("; "));
    assert!(ok);
}

#[test]
fn c04_variance_halved_for_small_unions() {
    let mut ok = true;
    let mut details = Vec::new();
    for r in superminhash_grid().iter().filter(|r| 4 * r.union <= u64::from(r.m)) {
        let pass = (0.42..=0.58).contains(&r.empirical_alpha);
        ok &= pass;
        details.push(format!(
            "m={} u={}: {:.4} (alpha {:.4}){}",
            r.m,
            r.union,
            r.empirical_alpha,
            r.theoretical_alpha,
            if pass { "" } else { " OUT" }
        ));
    }
    report("C4", "empirical alpha in [0.42, 0.58] for u <= m/4", ok, &details.join("; "));
    assert!(ok);
}

#[test]
fn c05_minhash_control() {
    let mut ok = true;
    let mut details = Vec::new();
    for r in variance_grid(Algorithm::MinHash) {
        let dev = (r.empirical_alpha - 1.0).abs();
        ok &= dev <= 0.06;
        details.push(format!("m={} u={}: {:.4}", r.m, r.union, r.empirical_alpha));
    }
    report("C5", "MinHash empirical alpha within 0.06 of 1", ok, &details.join("; "));
    assert!(ok);
}

#[test]
fn c06_runtime() {
    // (a) the first insertion visits every slot
    let mut first_ok = true;
    for m in [1u32, 2, 16, 64, 256, 1000] {
        let mut b = SketchBuilder::new(SketchConfig::new(m, Algorithm::SuperMinHash, u64::from(m)).unwrap());
        b.add(b"first");
        first_ok &= b.inner_iterations() == u64::from(m);
    }
    report("C6a", "first insertion costs m iterations", first_ok, "m in {1,2,16,64,256,1000}");

    // (b)
    let r = run_runtime_sim(&RuntimeSimSpec { m: 256, n: 1 << 15, trials: 30, master_seed: 600 }).unwrap();
    let large_ok = r.mean_iters_per_element <= 1.6;
    report(
        "C6b",
        "m=256, n=2^15 mean iterations per element <= 1.6",
        large_ok,
        &format!("{:.4} (se {:.1e})", r.mean_iters_per_element, r.std_error),
    );

    // (c), (d)
    let (mut bound_ok, mut cap_ok) = (true, true);
    let mut worst = (f64::NEG_INFINITY, String::new());
    for (mi, m) in VARIANCE_SIZES.into_iter().enumerate() {
        for k in 0..=17u32 {
            let n = 1u64 << k;
            let spec = RuntimeSimSpec { m, n, trials: 30, master_seed: 610 + (mi as u64) * 32 + u64::from(k) };
            let r = run_runtime_sim(&spec).unwrap();
            let mean_total = r.mean_iters_per_element * n as f64;
            let se_total = r.std_error * n as f64;
            let bound = runtime_bound(n, u64::from(m)).unwrap();
            let slack = (mean_total - bound) / bound;
            if slack > worst.0 {
                worst = (slack, format!("m={m} n=2^{k}: mean {mean_total:.1} bound {bound:.1}"));
            }
            bound_ok &= mean_total <= bound + 4.0 * se_total;
            cap_ok &= r.max_total_iterations <= u64::from(m) * n;
        }
    }
    report("C6c", "mean total <= runtime_bound + 4 se", bound_ok, &format!("closest {}", worst.1));
    report("C6d", "total iterations <= m n on every run", cap_ok, "m in {16,64,256}, n = 2^0..2^17, 30 trials each");
    assert!(first_ok && large_ok && bound_ok && cap_ok);
}

#[test]
fn c07_alpha_numerics() {
    let mut worst = (0.0f64, 0, 0);
    let us: Vec<u64> = (2..=64).chain([1 << 10, 1 << 14]).collect();
    for m in [2u64, 4, 16, 64, 256] {
        for &u in &us {
            let exact = rational_to_f64(&alpha_exact(m, u).unwrap());
            let fast = alpha(m, u).unwrap();
            let rel = ((fast - exact) / exact).abs();
            if rel > worst.0 {
                worst = (rel, m, u);
            }
        }
    }
    let half = alpha_exact(2, 2).unwrap() == BigRational::new(1.into(), 2.into());
    let ok = worst.0 < 1e-9 && half;
    report(
        "C7",
        "log-space alpha vs exact",
        ok,
        &format!("max rel err {:.2e} at m={} u={}; alpha(2,2) == 1/2: {half}", worst.0, worst.1, worst.2),
    );
    assert!(ok);
}

#[test]
fn c08_covariance_identity() {
    let mut rng = ElementStream::from_state(0xC0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let j = loop {
            let x = rng.next_uniform_double();
            if x > 0.0 {
                break x;
            }
        };
        let m = rng.next_uniform_int(2, 4096).unwrap();
        let u = rng.next_uniform_int(2, 10_000).unwrap();
        let same = indicator_covariance(j, m, u, true).unwrap();
        let cross = indicator_covariance(j, m, u, false).unwrap();
        let mf = m as f64;
        let reconstructed = (mf * same + mf * (mf - 1.0) * cross) / (mf * mf);
        let direct = superminhash_variance(j, m, u).unwrap();
        worst = worst.max(((reconstructed - direct) / direct).abs());
    }
    let identity_ok = worst <= 16.0 * f64::EPSILON;
    report("C8", "covariance sum == superminhash_variance", identity_ok, &format!("100 triples, max rel err {worst:.2e}"));

    // fixed slot pair per trial, rotating over all ordered pairs
    let (m, trials) = (64u32, 100_000u64);
    let profile = SetProfile::new(2, 2, 4).unwrap();
    let config = SketchConfig::new(m, Algorithm::SuperMinHash, 800).unwrap();
    let (mut conditioned, mut joint) = (0u64, 0u64);
    for t in 0..trials {
        let (a, b) = TrialSets::new(profile, 800, t).signatures(config);
        let k = (t % u64::from(m)) as usize;
        let l = (k + 1 + (t / u64::from(m)) as usize % (m as usize - 1)) % m as usize;
        if a.values()[k] == b.values()[k] {
            conditioned += 1;
            if a.values()[l] == b.values()[l] {
                joint += 1;
            }
        }
    }
    let freq = joint as f64 / conditioned as f64;
    let p = conditional_match_probability(0.5, u64::from(m), 8).unwrap();
    let sigma = (p * (1.0 - p) / conditioned as f64).sqrt();
    let cond_ok = (freq - p).abs() <= 3.0 * sigma;
    report(
        "C8",
        "conditional match frequency within 3 sigma",
        cond_ok,
        &format!("{freq:.5} vs {p:.5} (sigma {sigma:.5}, {conditioned} conditioned trials)"),
    );
    assert!(identity_ok && cond_ok);
}

#[test]
fn c09_format() {
    let mut rng = ElementStream::from_state(0x5E);
    let mut ok = true;
    for i in 0..200u64 {
        let m = rng.next_uniform_int(1, 300).unwrap() as u32;
        let config = SketchConfig::new(m, Algorithm::ALL[(i % 4) as usize], rng.next_u64()).unwrap();
        let n = rng.next_uniform_int(0, 50).unwrap();
        let sig = Signature::from_elements(config, (0..n).map(|_| element(rng.next_u64())));
        let bytes = encode_signature(&sig);
        ok &= bytes.len() == HEADER_LEN + 8 * m as usize;
        let back = decode_signature(&bytes).unwrap();
        ok &= back.config() == sig.config() && bits(&back) == bits(&sig);
        ok &= encode_signature(&back) == bytes;

        let mut bad = bytes.clone();
        bad[0] = b'X';
        ok &= matches!(decode_signature(&bad), Err(FormatError::BadMagic(_)));
        let cut = rng.next_uniform_int(0, bytes.len() as u64 - 1).unwrap() as usize;
        ok &= matches!(read_signature(&bytes[..cut]), Err(FormatError::Truncated(_)));
    }
    report("C9", "format round trip, length, error handling", ok, "200 signatures, m in 1..=300");
    assert!(ok);
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_superminhash")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn c10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.txt"), (0..300).map(|i| format!("item{i}\n")).collect::<String>()).unwrap();
    fs::write(d.join("b.txt"), (150..500).map(|i| format!("item{i}\n")).collect::<String>()).unwrap();

    let mut ok = true;
    let mut checked = Vec::new();
    for run in 0..2 {
        let r = d.join(format!("run{run}"));
        fs::create_dir(&r).unwrap();
        let mut outputs = Vec::new();
        for algo in ["minhash", "superminhash-naive", "superminhash-ref", "superminhash"] {
            for input in ["a", "b"] {
                let out = r.join(format!("{algo}-{input}.sig"));
                let src = d.join(format!("{input}.txt"));
                outputs.push(("sketch", cli(&["sketch", "--m", "128", "--algo", algo, "--seed", "3", "--in", path(&src), "--out", path(&out)])));
            }
            let (sa, sb) = (r.join(format!("{algo}-a.sig")), r.join(format!("{algo}-b.sig")));
            outputs.push(("estimate", cli(&["estimate", path(&sa), path(&sb)])));
            outputs.push(("merge", cli(&["merge", path(&sa), path(&sb), "--out", path(&r.join(format!("{algo}-ab.sig")))])));
        }
        outputs.push(("alpha", cli(&["alpha", "--m", "256", "--u", "40"])));
        outputs.push(("variance", cli(&["variance", "--j", "0.3", "--m", "64", "--u", "100"])));
        outputs.push(("bound", cli(&["bound", "--n", "1000", "--m", "64"])));
        outputs.push(("sim-variance", cli(&["sim-variance", "--m", "32", "--profile", "3,4,5", "--trials", "500", "--seed", "9"])));
        cli(&["sim-variance", "--m", "32", "--profile", "3,4,5", "--trials", "500", "--seed", "9", "--algo", "minhash", "--csv", path(&r.join("var.csv"))]);
        outputs.push(("sim-runtime", cli(&["sim-runtime", "--m", "64", "--n", "1000", "--trials", "20", "--seed", "4"])));
        cli(&["sim-runtime", "--m", "64", "--n", "1000", "--trials", "20", "--seed", "4", "--csv", path(&r.join("rt.csv"))]);
        checked.push(outputs);
    }
    for ((name, first), (_, second)) in checked[0].iter().zip(&checked[1]) {
        ok &= first == second;
        ok &= *name == "sketch" || *name == "merge" || !first.is_empty();
    }
    let mut files: Vec<_> = fs::read_dir(d.join("run0")).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    for f in &files {
        ok &= fs::read(d.join("run0").join(f)).unwrap() == fs::read(d.join("run1").join(f)).unwrap();
    }
    report(
        "C10",
        "CLI subcommands are deterministic",
        ok,
        &format!("{} stdout captures, {} output files compared", checked[0].len(), files.len()),
    );
    assert!(ok);
}
