//! Self-check suites behind `wickchaos verify`.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wickchaos::chaos::{
    remainder, wick_analytic, wick_analytic_direct, wick_product, AnalyticFunction, CosCosh,
    ExpFamily, Polynomial,
};
use wickchaos::diagnostics::fs_norm;
use wickchaos::multiindex::decompositions;
use wickchaos::pde::FnBoundary;
use wickchaos::propagator::{linear_crosscheck, FnForcing};
use wickchaos::{
    BoundaryKind, ChaosField, Field, Grid1D, IndexSet, LinearOperatorSpec, MultiIndex, Problem,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn max_modes(self) -> usize {
        match self {
            Level::Quick => 3,
            Level::Full => 4,
        }
    }

    fn max_order(self) -> usize {
        match self {
            Level::Quick => 3,
            Level::Full => 5,
        }
    }

    fn seeds(self) -> u64 {
        match self {
            Level::Quick => 5,
            Level::Full => 20,
        }
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level `{other}` (quick|full)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub rows: Vec<Row>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed() {
            0
        } else {
            3
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &self.rows {
            let tag = if r.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:w$}  {:>7.2}s  {}", r.name, r.seconds, r.detail)?;
        }
        Ok(())
    }
}

pub type Product<'a> = &'a dyn Fn(&Field, &Field) -> wickchaos::Result<Field>;

pub const COMMUTATIVITY: &str = "commutativity";

fn random_field(set: &Arc<IndexSet>, n_x: usize, rng: &mut ChaCha8Rng) -> Field {
    ChaosField::from_fn(set.clone(), n_x, |_, _, _| rng.gen_range(-0.5..=0.5))
}

/// Index sets `I_{K,N}` for every `K` up to the level's cap.
fn sets(level: Level) -> Vec<Arc<IndexSet>> {
    (1..=level.max_modes())
        .map(|k| Arc::new(IndexSet::enumerate(k, level.max_order()).expect("small index set")))
        .collect()
}

/// Fields `(f, g, h)` for each seed and each index set.
fn triples(level: Level) -> Vec<(Field, Field, Field)> {
    let mut out = Vec::new();
    for set in sets(level) {
        for seed in 0..level.seeds() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((set.modes() as u64) << 32));
            let f = random_field(&set, 4, &mut rng);
            let g = random_field(&set, 4, &mut rng);
            let h = random_field(&set, 4, &mut rng);
            out.push((f, g, h));
        }
    }
    out
}

fn algebra_rows(level: Level, product: Product, rows: &mut Vec<Row>) -> wickchaos::Result<()> {
    let start = Instant::now();
    let cases = triples(level);
    let (mut comm, mut fact) = (0usize, 0usize);
    let (mut assoc, mut dist) = (0.0f64, 0.0f64);
    for (f, g, h) in &cases {
        let fg = product(f, g)?;
        if fg.data() != product(g, f)?.data() {
            comm += 1;
        }
        let expect: Vec<f64> = f
            .coeff(0)
            .iter()
            .zip(g.coeff(0))
            .map(|(a, b)| a * b)
            .collect();
        if fg.coeff(0) != expect.as_slice() {
            fact += 1;
        }
        let left = product(&fg, h)?;
        let right = product(f, &product(g, h)?)?;
        assoc = assoc.max(left.max_abs_diff(&right)?);
        let lhs = product(f, &g.add(h)?)?;
        let rhs = fg.add(&product(f, h)?)?;
        dist = dist.max(lhs.max_abs_diff(&rhs)?);
    }
    let secs = start.elapsed().as_secs_f64();
    let n = cases.len();
    rows.push(Row {
        name: COMMUTATIVITY,
        pass: comm == 0,
        detail: format!("{} of {n} pairs differ bitwise", comm),
        seconds: secs,
    });
    rows.push(Row {
        name: "associativity",
        pass: assoc <= 1e-12,
        detail: format!("max deviation {assoc:.2e} (limit 1e-12)"),
        seconds: 0.0,
    });
    rows.push(Row {
        name: "distributivity",
        pass: dist <= 1e-13,
        detail: format!("max deviation {dist:.2e} (limit 1e-13)"),
        seconds: 0.0,
    });
    rows.push(Row {
        name: "expectation factorization",
        pass: fact == 0,
        detail: format!("{} of {n} products break E[f g] = E[f] E[g]", fact),
        seconds: 0.0,
    });
    Ok(())
}

fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || n < k {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Ordered `k`-tuples of non-zero parts summing to `alpha`, by
/// inclusion-exclusion over the parts forced to zero.
fn count_formula(alpha: &[u32], k: usize) -> f64 {
    (0..=k)
        .map(|j| {
            let parts = (k - j) as i64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let ways: f64 = if parts == 0 {
                if alpha.iter().all(|&a| a == 0) {
                    1.0
                } else {
                    0.0
                }
            } else {
                alpha
                    .iter()
                    .map(|&a| binomial(a as i64 + parts - 1, parts - 1))
                    .product()
            };
            sign * binomial(k as i64, j as i64) * ways
        })
        .sum()
}

fn decomposition_row(level: Level) -> Row {
    let start = Instant::now();
    let (mut cases, mut bad) = (0usize, Vec::new());
    for set in sets(level) {
        for alpha in set.indices().iter().skip(1) {
            let order = alpha.order() as usize;
            for k in 1..=order {
                let n = decompositions(alpha, k).count();
                let expected = count_formula(alpha.entries(), k);
                if n as f64 != expected || (k >= 2 && n as f64 > 2f64.powi((k * order) as i32)) {
                    bad.push(format!("{alpha} k={k}: {n} vs {expected}"));
                }
                cases += 1;
            }
        }
    }
    Row {
        name: "decomposition counts",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{cases} (alpha, k) cases match inclusion-exclusion and 2^(k|alpha|)")
        } else {
            bad.join("; ")
        },
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn test_functions() -> Vec<Box<dyn AnalyticFunction<f64>>> {
    vec![
        Box::new(ExpFamily::fujita_gelfand()),
        Box::new(Polynomial::new("cubic", vec![0.3, -1.0, 0.5, 2.0])),
        Box::new(CosCosh),
    ]
}

fn analytic_row(level: Level) -> wickchaos::Result<Row> {
    let start = Instant::now();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for (u, _, _) in triples(level) {
        for phi in test_functions() {
            let a = wick_analytic(phi.as_ref(), &u);
            let d = wick_analytic_direct(phi.as_ref(), &u, 40)?;
            let dev = a.max_abs_diff(&d.field)?;
            worst = worst.max(dev);
            worst_excess = worst_excess.max(dev - (1e-9 + d.tail_bound));
        }
    }
    Ok(Row {
        name: "analytic vs direct series",
        pass: worst_excess <= 0.0,
        detail: format!("max deviation {worst:.2e} (limit 1e-9 + tail bound)"),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `sum_k Phi^(k)(u_0)/k! * sum over ordered k-tuples of prod u_beta`.
fn nested_remainder(
    phi: &dyn AnalyticFunction<f64>,
    u: &Field,
    alpha: &MultiIndex,
    x: usize,
) -> f64 {
    let u0 = u.coeff(0)[x];
    let set = u.index_set();
    let mut total = 0.0;
    let mut k_fact = 1.0;
    for k in 2..=alpha.order() as usize {
        k_fact *= k as f64;
        let inner: f64 = decompositions(alpha, k)
            .map(|parts| {
                parts
                    .iter()
                    .map(|b| u.coeff(set.position(b).expect("sub-index in set"))[x])
                    .product::<f64>()
            })
            .sum();
        total += phi.derivative(k, u0) / k_fact * inner;
    }
    total
}

fn remainder_row(level: Level) -> wickchaos::Result<Row> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for (u, _, _) in triples(level).into_iter().step_by(level.seeds() as usize) {
        for phi in test_functions() {
            for alpha in u.index_set().indices().iter().skip(1) {
                let r = remainder(phi.as_ref(), &u, alpha)?;
                for (x, &v) in r.iter().enumerate() {
                    let oracle = nested_remainder(phi.as_ref(), &u, alpha, x);
                    worst = worst.max((v - oracle).abs() / oracle.abs().max(1.0));
                    checked += 1;
                }
            }
        }
    }
    Ok(Row {
        name: "remainder vs nested sums",
        pass: worst <= 1e-12,
        detail: format!("{checked} values, max relative deviation {worst:.2e} (limit 1e-12)"),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn linear_row(level: Level) -> wickchaos::Result<Row> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let set = Arc::new(IndexSet::enumerate(level.max_modes(), 3)?);
    for bc in [
        BoundaryKind::Periodic,
        BoundaryKind::Neumann,
        BoundaryKind::Dirichlet,
    ] {
        let grid = Grid1D::new(0.0, 2.0, 33, bc)?;
        let xs = grid.points();
        let initial = ChaosField::from_fn(set.clone(), 33, |ord, _, i| {
            (std::f64::consts::PI * xs[i]).cos() * (1.0 + 0.1 * ord as f64)
        });
        let p = Problem {
            phi: Arc::new(Polynomial::affine(0.2, -0.8)),
            operator: LinearOperatorSpec::new(0.05, 0.1)?,
            grid,
            boundary: Arc::new(FnBoundary(|t: f64, _| (-t).exp())),
            t_final: 0.2,
            dt: 0.01,
            initial,
            forcing: Arc::new(FnForcing(|t: f64, f: &mut Field| {
                f.data_mut().fill(0.0);
                f.coeff_mut(1).fill((2.0 * t).sin());
            })),
        };
        worst = worst.max(linear_crosscheck(&p, 3)?);
    }
    Ok(Row {
        name: "linear cross-check",
        pass: worst == 0.0,
        detail: format!("max deviation {worst:.2e} over three boundary kinds (must be 0)"),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn nesting_row(level: Level) -> wickchaos::Result<Row> {
    let start = Instant::now();
    let rs = [2.0, 4.0, 8.0, 32.0];
    let ps = [0.0, 1.0, 3.0];
    let mut violations = 0usize;
    let mut cases = 0usize;
    for (u, _, _) in triples(level) {
        for &p in &ps {
            let vals: Vec<f64> = rs
                .iter()
                .map(|&r| fs_norm(&u, r, p))
                .collect::<Result<_, _>>()?;
            violations += vals.windows(2).filter(|w| w[1] > w[0]).count();
            cases += vals.len() - 1;
        }
        for &r in &rs {
            let vals: Vec<f64> = ps
                .iter()
                .map(|&p| fs_norm(&u, r, p))
                .collect::<Result<_, _>>()?;
            violations += vals.windows(2).filter(|w| w[1] > w[0]).count();
            cases += vals.len() - 1;
        }
    }
    Ok(Row {
        name: "norm nesting",
        pass: violations == 0,
        detail: format!("{violations} of {cases} comparisons increase with r or p"),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every suite; `product` is the Wick product under test.
pub fn run_verify(level: Level, product: Product) -> VerifyReport {
    let mut rows = Vec::new();
    let failed = |name: &'static str, e: wickchaos::Error| Row {
        name,
        pass: false,
        detail: format!("error: {e}"),
        seconds: 0.0,
    };
    if let Err(e) = algebra_rows(level, product, &mut rows) {
        rows.push(failed("wick algebra", e));
    }
    rows.push(decomposition_row(level));
    for (name, f) in [
        (
            "analytic vs direct series",
            analytic_row as fn(Level) -> wickchaos::Result<Row>,
        ),
        ("remainder vs nested sums", remainder_row),
        ("linear cross-check", linear_row),
        ("norm nesting", nesting_row),
    ] {
        rows.push(f(level).unwrap_or_else(|e| failed(name, e)));
    }
    VerifyReport { rows }
}

pub fn cmd_verify(level: Level) -> VerifyReport {
    run_verify(level, &|f, g| wick_product(f, g))
}
