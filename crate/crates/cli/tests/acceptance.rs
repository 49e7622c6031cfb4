//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use qclab::apset::{self, DEFAULT_K2_SAMPLES};
use qclab::diffraction::{self, Atom, GaussianSpec, LogDerivOptions, PointMeasure};
use qclab::reconstruct::{self, Verdict, DEFAULT_T3_BUDGET};
use qclab::wiener::{neumann_inverse, neumann_residual, Height, NeumannOptions};
use qclab::zeros::{find_real_zeros, ZeroOptions};
use qclab::{AlgebraConfig, ExpSum, Term, ZeroSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cos_sum() -> ExpSum<f64> {
    ExpSum::cosine(0.5)
}

fn union_sum() -> ExpSum<f64> {
    cos_sum()
        .multiply(&ExpSum::cosine(0.5f64.sqrt()), &AlgebraConfig::default())
        .unwrap()
}

fn zeros_of(f: &ExpSum<f64>, w: (f64, f64)) -> ZeroSet<f64> {
    find_real_zeros(f, w, &ZeroOptions::default()).unwrap().zeros
}

fn logderiv(f: &ExpSum<f64>, cutoff: f64) -> PointMeasure<f64> {
    let opts = LogDerivOptions {
        cutoff,
        ..LogDerivOptions::default()
    };
    diffraction::logderiv_measure(f, &opts).unwrap().measure
}

/// Bohr scan on the quarter grid plus tracked peaks, `|γ| < cutoff`.
fn bohr_measure(a: &ZeroSet<f64>, t: f64, cutoff: f64) -> PointMeasure<f64> {
    let peaks = diffraction::bohr_peaks(a, cutoff, t, 0.1).unwrap();
    let k = (4.0 * cutoff).ceil() as i64 - 1;
    let mut grid: Vec<f64> = (-k..=k).map(|j| j as f64 / 4.0).collect();
    for p in peaks {
        if grid.iter().all(|g| (g - p).abs() >= 1.0 / (4.0 * t)) {
            grid.push(p);
            grid.push(-p);
        }
    }
    diffraction::bohr_scan(a, &grid, t, 0.1).unwrap()
}

/// Largest per-atom difference, a missing partner counting as mass zero.
fn atom_gap(x: &PointMeasure<f64>, y: &PointMeasure<f64>) -> f64 {
    let one_way = |p: &PointMeasure<f64>, q: &PointMeasure<f64>| {
        p.atoms.iter().fold(0.0f64, |m, a| {
            let b = q.mass_at(a.gamma, 1e-6).unwrap_or_default();
            m.max((a.b - b).norm())
        })
    };
    one_way(x, y).max(one_way(y, x)).max((x.d - y.d).abs())
}

fn lattice_measure(k: i64) -> PointMeasure<f64> {
    let atoms = (-k..=k)
        .filter(|&j| j != 0)
        .map(|j| Atom {
            gamma: j as f64,
            b: Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
        })
        .collect();
    PointMeasure::new(1.0, atoms, Some(k as f64 + 0.5)).unwrap()
}

fn zero_match(x: &ZeroSet<f64>, y: &ZeroSet<f64>) -> Option<f64> {
    let (p, q) = (x.expanded(), y.expanded());
    (p.len() == q.len()).then(|| {
        p.iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    })
}

struct Shared {
    cos_zeros: ZeroSet<f64>,
    union_zeros: ZeroSet<f64>,
    union_bohr: PointMeasure<f64>,
    cos_bohr: PointMeasure<f64>,
}

fn c1() -> Outcome {
    let start = Instant::now();
    let f = cos_sum();
    let found = find_real_zeros(&f, (-1000.0, 1000.0), &ZeroOptions::default())
        .map_err(|e| e.to_string())?;
    let z = &found.zeros;
    let simple = z.points().iter().all(|p| p.mult == 1);
    let err = z
        .points()
        .iter()
        .map(|p| (p.a - ((p.a - 0.5).round() + 0.5)).abs())
        .fold(0.0, f64::max);
    let d = apset::density(z).map_err(|e| e.to_string())?.d;
    let mu = logderiv(&f, 10.5);
    let mut atom_err = (mu.d - 1.0).abs();
    for k in 1..=10i64 {
        let want = if k % 2 == 0 { 1.0 } else { -1.0 };
        for g in [k as f64, -(k as f64)] {
            let b = mu.mass_at(g, 1e-9).unwrap_or_default();
            atom_err = atom_err.max((b - Complex64::new(want, 0.0)).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        z.total_count() == 2000 && z.len() == 2000 && simple && err < 1e-10
            && (d - 1.0).abs() <= 0.01
            && atom_err < 1e-10
            && secs < 10.0,
        format!(
            "zeros={} simple={simple} max_err={err:.2e} d={d} atom_err={atom_err:.2e} time={secs:.2}s",
            z.total_count()
        ),
    )
}

fn c2(s: &Shared) -> Outcome {
    let start = Instant::now();
    let cos_gap = atom_gap(&s.cos_bohr, &logderiv(&cos_sum(), 10.5));
    let union_gap = atom_gap(&s.union_bohr, &logderiv(&union_sum(), 10.5));
    let d = apset::density(&s.union_zeros).map_err(|e| e.to_string())?.d;
    let want = 1.0 + 2f64.sqrt();
    let secs = start.elapsed().as_secs_f64() + s_setup_secs();
    check(
        cos_gap < 0.01 && union_gap < 0.01 && (d - want).abs() <= 0.02 && secs < 60.0,
        format!(
            "cos_gap={cos_gap:.2e} union_gap={union_gap:.2e} atoms={} union_d={d:.6} time={secs:.2}s",
            s.union_bohr.atoms.len()
        ),
    )
}

static SETUP_SECS: std::sync::OnceLock<f64> = std::sync::OnceLock::new();

fn s_setup_secs() -> f64 {
    *SETUP_SECS.get().unwrap_or(&0.0)
}

fn c3(s: &Shared) -> Outcome {
    let spec = GaussianSpec::default();
    let exact = lattice_measure(40);
    let r_exact = diffraction::poisson_residual(&s.cos_zeros, &exact, &spec)
        .map_err(|e| e.to_string())?
        .residual;
    let r_union = diffraction::poisson_residual(&s.union_zeros, &s.union_bohr, &spec)
        .map_err(|e| e.to_string())?
        .residual;
    let dropped = exact.without_atom(1.0, 1e-9);
    let r_drop = diffraction::poisson_residual(&s.cos_zeros, &dropped, &spec)
        .map_err(|e| e.to_string())?
        .residual;
    check(
        r_exact < 1e-8 && r_union < 1e-3 && r_drop > 1e-2,
        format!("lattice={r_exact:.2e} union_scan={r_union:.2e} dropped_atom={r_drop:.2e}"),
    )
}

fn c4(s: &Shared) -> Outcome {
    let mut coef_err = 0.0f64;
    let mut routes = Vec::new();
    let refined = diffraction::refine_masses(&s.cos_zeros, &s.cos_bohr, 1000.0)
        .map_err(|e| e.to_string())?;
    routes.push(refined);
    routes.push(logderiv(&cos_sum(), 10.5));
    for mu in &routes {
        let f = reconstruct::rebuild_dirichlet(mu, mu.d, DEFAULT_T3_BUDGET)
            .map_err(|e| e.to_string())?
            .sum;
        let want = [(-0.5, 0.5), (0.5, 0.5)];
        if f.len() != 2 {
            return Err(format!("rebuilt cos has {} terms", f.len()));
        }
        for (t, (w, q)) in f.terms().iter().zip(want) {
            coef_err = coef_err
                .max((t.omega - w).abs())
                .max((t.q - Complex64::new(q, 0.0)).norm());
        }
    }

    let w = (-20.0, 20.0);
    let original = s.union_zeros.restrict(w.0, w.1).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let union_routes = [
        diffraction::refine_masses(&s.union_zeros, &s.union_bohr, 2000.0)
            .map_err(|e| e.to_string())?,
        logderiv(&union_sum(), 10.5),
    ];
    for mu in &union_routes {
        let f = reconstruct::rebuild_dirichlet(mu, mu.d, DEFAULT_T3_BUDGET)
            .map_err(|e| e.to_string())?
            .sum;
        let z = zeros_of(&f, w);
        match zero_match(&original, &z) {
            Some(e) => worst = worst.max(e),
            None => {
                return Err(format!(
                    "rebuilt union has {} zeros on [-20,20], expected {}",
                    z.total_count(),
                    original.total_count()
                ))
            }
        }
    }
    check(
        coef_err < 1e-8 && worst < 1e-4,
        format!("cos_coef_err={coef_err:.2e} union_zero_err={worst:.2e}"),
    )
}

fn c5(s: &Shared) -> Outcome {
    let xs: Vec<f64> = (0..7).map(|k| 10.0 * f64::from(1u32 << k)).collect();
    let g_cos = reconstruct::g_boundedness(&lattice_measure(40), &xs);
    let g_union = reconstruct::g_boundedness(&logderiv(&union_sum(), 10.5), &xs);
    let single = PointMeasure::new(
        1.0,
        vec![
            Atom {
                gamma: -0.6,
                b: Complex64::new(-0.6, 0.0),
            },
            Atom {
                gamma: 0.6,
                b: Complex64::new(-0.6, 0.0),
            },
        ],
        None,
    )
    .map_err(|e| e.to_string())?;
    let g1 = reconstruct::g_boundedness(&single, &xs);
    let sup1 = g1.windows.iter().fold(0.0f64, |m, w| m.max(w.1));

    let ys = [4.0, 8.0];
    let mut worst = 0.0f64;
    let mut rel = |est: f64, d: f64| {
        let pd = std::f64::consts::PI * d;
        worst = worst.max((est - pd).abs() / pd);
    };
    let d_union = 1.0 + 2f64.sqrt();
    for (f, d) in [(cos_sum(), 1.0), (union_sum(), d_union)] {
        rel(
            reconstruct::exponential_type(&f, &ys)
                .map_err(|e| e.to_string())?
                .estimate(),
            d,
        );
    }
    for (a, d) in [(&s.cos_zeros, 1.0), (&s.union_zeros, d_union)] {
        rel(
            reconstruct::exponential_type_of_zeros(a, &ys)
                .map_err(|e| e.to_string())?
                .estimate(),
            d,
        );
    }
    let bounded = g_cos.bounded_verdict == Verdict::Bounded
        && g_union.bounded_verdict == Verdict::Bounded;
    check(
        bounded && (sup1 - 2.0).abs() < 1e-9 && worst < 0.05,
        format!(
            "verdicts={:?}/{:?} single_atom_sup={sup1:.12} worst_type_rel_err={worst:.2e}",
            g_cos.bounded_verdict, g_union.bounded_verdict
        ),
    )
}

fn c6(s: &Shared) -> Outcome {
    let quarter = ZeroSet::lattice(0.75, 1.0, (-1_000_001.0, 1_000_001.0), 1)
        .map_err(|e| e.to_string())?;
    let fixtures: [(&str, &ZeroSet<f64>); 3] = [
        ("cos", &s.cos_zeros),
        ("union", &s.union_zeros),
        ("z+3/4", &quarter),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = Vec::new();
    let mut periods = 0;
    for (name, a) in fixtures {
        let small = a.restrict(-1000.0, 1000.0).map_err(|e| e.to_string())?;
        let a = if a.window_length() > 1e4 { &small } else { a };
        let kc = apset::counting_constants(a, DEFAULT_K2_SAMPLES, 0).map_err(|e| e.to_string())?;
        let (k1, k2) = (kc.k1 as f64, kc.k2 as f64);
        let c = a.counter();
        let (lo, hi) = a.window();
        for _ in 0..10_000 {
            let h = rng.gen_range(1e-3..16.0);
            let m = rng.gen_range(2..=8u32);
            let span = f64::from(m) * h;
            let x1 = rng.gen_range(lo..hi - span);
            let x2 = rng.gen_range(lo..hi - span);
            let n1 = c.half_open(x1, x1 + h) as f64;
            let n2 = c.half_open(x2, x2 + h) as f64;
            let nm = c.half_open(x1, x1 + span) as f64 / f64::from(m);
            if n1 > k1 * (h + 1.0) || (n1 - n2).abs() > k2 || (n1 - nm).abs() > k2 {
                violations.push(format!("{name}: h={h} x1={x1} x2={x2} M={m}"));
                break;
            }
        }
        let d = apset::density(a).map_err(|e| e.to_string())?.d;
        let eps = 0.05;
        let rep = apset::almost_periods(a, eps, (0.0, 20.0), Some(d)).map_err(|e| e.to_string())?;
        for p in &rep.periods {
            if (p.tau - p.shift_h as f64 / d).abs() > eps || p.sup_dev > eps {
                violations.push(format!("{name}: period {p:?}"));
            }
        }
        if rep.periods.is_empty() {
            violations.push(format!("{name}: no almost periods"));
        }
        periods += rep.periods.len();
        let phi = apset::phi_representation(a, d).map_err(|e| e.to_string())?;
        let pts = a.expanded();
        let exact = phi
            .phi
            .iter()
            .all(|&(n, _)| phi.point(n) == Some(pts[(n + phi.index_offset) as usize]));
        if !exact {
            violations.push(format!("{name}: phi identity"));
        }
    }
    let lind = apset::lindelof_sum(&quarter, &[1e6]).map_err(|e| e.to_string())?;
    let l_err = (lind.sums[0].1 + std::f64::consts::PI).abs();
    check(
        violations.is_empty() && l_err < 1e-3,
        format!(
            "violations={:?} periods_checked={periods} lindelof_err={l_err:.2e}",
            violations
        ),
    )
}

fn random_sum(rng: &mut ChaCha8Rng, max_terms: usize, lattice: bool) -> ExpSum<f64> {
    let terms = rng.gen_range(1..=max_terms);
    let raw: Vec<Term<f64>> = (0..terms)
        .map(|_| {
            let w = if lattice {
                f64::from(rng.gen_range(-4..=4i32))
            } else {
                rng.gen_range(-3.0..3.0)
            };
            Term::new(
                w,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    ExpSum::canonicalize(raw, &AlgebraConfig::default()).unwrap()
}

/// `1 + H` with `‖H‖_W` drawn from `(0, 2/3)`, spectrum of `H` in `(0, 3]`.
fn one_plus_h(rng: &mut ChaCha8Rng, lattice: bool) -> (ExpSum<f64>, f64) {
    let n = rng.gen_range(1..=if lattice { 4 } else { 2 });
    let target = rng.gen_range(0.05..0.66);
    let mut raw = vec![Term::new(0.0, Complex64::new(1.0, 0.0))];
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let omega = if lattice {
            f64::from(rng.gen_range(1..=3i32))
        } else {
            rng.gen_range(0.1..3.0)
        };
        let q = Complex64::from_polar(target * w / total, rng.gen_range(0.0..std::f64::consts::TAU));
        raw.push(Term::new(omega, q));
    }
    let f = ExpSum::canonicalize(raw, &AlgebraConfig::default()).unwrap();
    let h = f.wiener_norm() - 1.0;
    (f, h)
}

fn c7() -> Outcome {
    let cfg = AlgebraConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sub_fail = 0;
    for i in 0..1000 {
        let lattice = i % 2 == 0;
        let f = random_sum(&mut rng, 6, lattice);
        let g = random_sum(&mut rng, 6, lattice);
        let p = f.multiply(&g, &cfg).map_err(|e| e.to_string())?;
        if p.wiener_norm() > f.wiener_norm() * g.wiener_norm() * (1.0 + 1e-12) {
            sub_fail += 1;
        }
    }

    let fixed = NeumannOptions {
        height: Height::Fixed(0.0),
        ..NeumannOptions::default()
    };
    let mut worst_resid = 0.0f64;
    let mut trials = 0;
    for i in 0..200 {
        let (f, h) = one_plus_h(&mut rng, i % 2 == 0);
        if h >= 2.0 / 3.0 {
            continue;
        }
        let inv = neumann_inverse(&f, &fixed, &cfg).map_err(|e| e.to_string())?;
        let r = neumann_residual(&f, &inv, &cfg).map_err(|e| e.to_string())?;
        worst_resid = worst_resid.max(r);
        trials += 1;
    }

    let mut worst_norm = 0.0f64;
    for i in 0..200 {
        let lattice = i % 2 == 0;
        let f = random_sum(&mut rng, 5, lattice);
        if f.len() < 2 {
            continue;
        }
        let inv = neumann_inverse(&f, &NeumannOptions::default(), &cfg)
            .map_err(|e| e.to_string())?;
        worst_norm = worst_norm.max(inv.normalized_norm());
    }
    check(
        sub_fail == 0 && worst_resid < 1e-10 && worst_norm < 3.0,
        format!(
            "submult_failures={sub_fail}/1000 neumann_trials={trials} worst_residual={worst_resid:.2e} worst_inverse_norm={worst_norm:.4}"
        ),
    )
}

fn run_cli(input: &Path, out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_qclab"))
        .args(["analyze", "--seed", "11", "--input"])
        .arg(input)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("qclab exited with {status}"));
    }
    std::fs::read(out.join("report.json")).map_err(|e| e.to_string())
}

fn c8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut same = true;
    let mut sizes = Vec::new();
    for (name, f) in [("cos", cos_sum()), ("union", union_sum())] {
        let input = dir.path().join(format!("{name}.csv"));
        let file = std::fs::File::create(&input).map_err(|e| e.to_string())?;
        qclab::io::write_exp_sum(file, &f).map_err(|e| e.to_string())?;
        let a = run_cli(&input, &dir.path().join(format!("{name}-a")))?;
        let b = run_cli(&input, &dir.path().join(format!("{name}-b")))?;
        same &= a == b;
        sizes.push(a.len());
    }
    check(same, format!("identical={same} report_bytes={sizes:?}"))
}

fn main() {
    let start = Instant::now();
    let cos_zeros = zeros_of(&cos_sum(), (-1000.0, 1000.0));
    let union_zeros = zeros_of(&union_sum(), (-2000.0, 2000.0));
    let cos_bohr = bohr_measure(&cos_zeros, 1000.0, 10.5);
    let union_bohr = bohr_measure(&union_zeros, 2000.0, 10.5);
    let _ = SETUP_SECS.set(start.elapsed().as_secs_f64());
    let shared = Shared {
        cos_zeros,
        union_zeros,
        union_bohr,
        cos_bohr,
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("1 lattice pipeline", c1()),
        ("2 route agreement", c2(&shared)),
        ("3 poisson identity", c3(&shared)),
        ("4 roundtrip", c4(&shared)),
        ("5 g-criterion and type", c5(&shared)),
        ("6 point-set properties", c6(&shared)),
        ("7 algebra", c7()),
        ("8 determinism", c8()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
