//! Random system generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use selinf::jdc::{system_from_hidden, FineSystem, HiddenSpace, JdcProblem, DEFAULT_HIDDEN_CAP};
use selinf::probspace::{Design, Input, JointTable, OutcomeSpace, System, Treatment, TreatmentTable};
use selinf::Num;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Num {
    Num::ratio(n, d)
}

pub fn rat(n: &Num) -> BigRational {
    n.as_exact().cloned().expect("exact")
}

/// Random probability vector with small integer weights, some zero.
pub fn prob_vec(rng: &mut ChaCha8Rng, n: usize, max_weight: i64, zero_chance: f64) -> Vec<Num> {
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| if rng.gen_bool(zero_chance) { 0 } else { rng.gen_range(1..=max_weight) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| Num::ratio(x, total)).collect();
        }
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: &Num, hi: &Num, denom: i64) -> Num {
    let k = rng.gen_range(0..=denom);
    lo + &(&(hi - lo) * &Num::ratio(k, denom))
}

/// Marginally selective 2x2 binary system. About a third are mixtures
/// with the PR box so infeasible cases are common.
pub fn random_fine_system(rng: &mut ChaCha8Rng) -> FineSystem {
    let d = rng.gen_range(2..=12);
    let mut m = || Num::ratio(rng.gen_range(0..=d), d);
    let (a, a_prime, b, b_prime) = (m(), m(), m(), m());
    let mut cell = |x: &Num, y: &Num| {
        let lo = (&(x + y) - &Num::one()).max(Num::zero());
        let hi = x.clone().min(y.clone());
        let denom = rng.gen_range(1..=10);
        uniform_in(rng, &lo, &hi, denom)
    };
    let local = FineSystem {
        p11: cell(&a, &b),
        q11: cell(&a, &b_prime),
        r11: cell(&a_prime, &b),
        s11: cell(&a_prime, &b_prime),
        a,
        a_prime,
        b,
        b_prime,
    };
    if rng.gen_ratio(1, 3) {
        let lam = Num::ratio(rng.gen_range(0..=8), 8);
        let mix = |u: &Num, v: &Num| &(&lam * u) + &(&(Num::one() - &lam) * v);
        let pr = FineSystem::pr_box();
        FineSystem {
            a: mix(&pr.a, &local.a),
            a_prime: mix(&pr.a_prime, &local.a_prime),
            b: mix(&pr.b, &local.b),
            b_prime: mix(&pr.b_prime, &local.b_prime),
            p11: mix(&pr.p11, &local.p11),
            q11: mix(&pr.q11, &local.q11),
            r11: mix(&pr.r11, &local.r11),
            s11: mix(&pr.s11, &local.s11),
        }
    } else {
        local
    }
}

/// The eight inequalities computed straight from the four tables:
/// `-1 <= e_k <= 0` with `e_k` built from first-outcome cells.
pub fn fine_oracle(system: &System) -> bool {
    let t = |x: usize, y: usize| system.table(&Treatment(vec![x, y])).unwrap().table.clone();
    let (p, qq, r, s) = (t(0, 0), t(0, 1), t(1, 0), t(1, 1));
    let c = |tab: &JointTable| rat(tab.get(&[0, 0]));
    let row = |tab: &JointTable| rat(tab.get(&[0, 0])) + rat(tab.get(&[0, 1]));
    let col = |tab: &JointTable| rat(tab.get(&[0, 0])) + rat(tab.get(&[1, 0]));
    let (a, a1, b, b1) = (row(&p), row(&r), col(&p), col(&qq));
    let (p11, q11, r11, s11) = (c(&p), c(&qq), c(&r), c(&s));
    let e = [
        &p11 + &r11 + &s11 - &q11 - &a1 - &b,
        &q11 + &s11 + &r11 - &p11 - &a1 - &b1,
        &r11 + &p11 + &q11 - &s11 - &a - &b,
        &s11 + &q11 + &p11 - &r11 - &a - &b1,
    ];
    let zero = BigRational::from_integer(BigInt::from(0));
    let minus_one = BigRational::from_integer(BigInt::from(-1));
    e.iter().all(|v| *v <= zero && *v >= minus_one)
}

/// The four `e_k` computed from the tables.
pub fn fine_values(system: &System) -> [BigRational; 4] {
    let t = |x: usize, y: usize| system.table(&Treatment(vec![x, y])).unwrap().table.clone();
    let (p, qq, r, s) = (t(0, 0), t(0, 1), t(1, 0), t(1, 1));
    let c = |tab: &JointTable| rat(tab.get(&[0, 0]));
    let row = |tab: &JointTable| rat(tab.get(&[0, 0])) + rat(tab.get(&[0, 1]));
    let col = |tab: &JointTable| rat(tab.get(&[0, 0])) + rat(tab.get(&[1, 0]));
    let (a, a1, b, b1) = (row(&p), row(&r), col(&p), col(&qq));
    let (p11, q11, r11, s11) = (c(&p), c(&qq), c(&r), c(&s));
    [
        &p11 + &r11 + &s11 - &q11 - &a1 - &b,
        &q11 + &s11 + &r11 - &p11 - &a1 - &b1,
        &r11 + &p11 + &q11 - &s11 - &a - &b,
        &s11 + &q11 + &p11 - &r11 - &a - &b1,
    ]
}

pub fn inputs(values: &[usize]) -> Vec<Input> {
    values
        .iter()
        .enumerate()
        .map(|(i, &k)| Input::new(format!("{}", i + 1), (0..k).map(|v| format!("w{v}")).collect::<Vec<_>>()))
        .collect()
}

pub fn outputs(design: &Design, k: usize) -> OutcomeSpace {
    let vals: Vec<String> = (0..k).map(|o| o.to_string()).collect();
    OutcomeSpace::per_input(design, vec![vals; design.num_inputs()]).unwrap()
}

/// Random explicit treatment set covering every input point.
pub fn random_restricted_design(rng: &mut ChaCha8Rng, max_inputs: usize, max_values: usize) -> Design {
    loop {
        let n = rng.gen_range(2..=max_inputs);
        let values: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_values)).collect();
        let full = Design::full(inputs(&values)).unwrap();
        let all: Vec<Treatment> = full.treatments().collect();
        let keep = rng.gen_range(0.3..0.8);
        let chosen: Vec<Treatment> = all.iter().filter(|_| rng.gen_bool(keep)).cloned().collect();
        if chosen.len() < 2 || chosen.len() == all.len() {
            continue;
        }
        let covered = full.points().iter().all(|p| chosen.iter().any(|t| t.contains(*p)));
        if covered {
            return Design::explicit(inputs(&values), chosen).unwrap();
        }
    }
}

/// A hidden distribution with `atoms` random support points.
pub fn sparse_hidden(rng: &mut ChaCha8Rng, size: usize, atoms: usize) -> Vec<Num> {
    let mut q = vec![Num::zero(); size];
    let mut idx: Vec<usize> = (0..size).collect();
    idx.shuffle(rng);
    let w = prob_vec(rng, atoms.min(size), 9, 0.0);
    for (i, p) in idx.into_iter().zip(w) {
        q[i] = p;
    }
    q
}

/// Tables of a random explicit joint distribution over all input points.
pub fn jdc_system(rng: &mut ChaCha8Rng, design: &Design, outcomes: &OutcomeSpace) -> System {
    let size = HiddenSpace::new(design, outcomes, DEFAULT_HIDDEN_CAP).unwrap().size();
    let atoms = rng.gen_range(1..=size.min(12));
    let q = sparse_hidden(rng, size, atoms);
    system_from_hidden(design, outcomes, &q, DEFAULT_HIDDEN_CAP).unwrap()
}

/// `(1 + t) T1 - t T2` for tables `T1` (full-support hidden distribution)
/// and `T2` (sparse), with `t` a random fraction of the largest value
/// keeping every cell nonnegative. Marginally selective, but may fall
/// outside the set of systems with a joint distribution.
pub fn signed_mixture_system(rng: &mut ChaCha8Rng, design: &Design, outcomes: &OutcomeSpace) -> System {
    let problem = JdcProblem::new(design, outcomes, DEFAULT_HIDDEN_CAP).unwrap();
    let size = problem.hidden.size();
    let q1 = prob_vec(rng, size, 6, 0.0);
    let atoms = rng.gen_range(1..=3);
    let q2 = sparse_hidden(rng, size, atoms);
    let t1 = problem.project(&q1).unwrap();
    let t2 = problem.project(&q2).unwrap();
    let mut t_max: Option<BigRational> = None;
    for (u, v) in t1.iter().zip(&t2) {
        let (u, v) = (rat(u), rat(v));
        if v > u {
            let bound = &u / (&v - &u);
            t_max = Some(match t_max {
                Some(b) if b < bound => b,
                _ => bound,
            });
        }
    }
    let t_max = t_max.unwrap_or_else(|| BigRational::from_integer(BigInt::from(1)));
    let frac = Num::ratio(rng.gen_range(1..=4), 4);
    let t = &Num::Exact(t_max) * &frac;
    let one_t = &Num::one() + &t;
    let cells: Vec<Num> = t1.iter().zip(&t2).map(|(u, v)| &(&one_t * u) - &(&t * v)).collect();
    let mut tables = Vec::new();
    let mut start = 0;
    for tr in design.treatments() {
        let axes = outcomes.axes_for(&tr);
        let n: usize = axes.iter().map(Vec::len).product();
        tables.push(TreatmentTable::new(tr, JointTable::new(axes, cells[start..start + n].to_vec()).unwrap()));
        start += n;
    }
    System::new(design.clone(), outcomes.clone(), tables, 0.0).unwrap()
}

/// Simpson's rule over `[-L, 0] x [0, L]` of the standard bivariate
/// normal density with correlation `rho`.
pub fn quadrant_quadrature(rho: f64, n: usize) -> f64 {
    let l = 9.0;
    let h = l / n as f64;
    let det = 1.0 - rho * rho;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
    let dens = |a: f64, b: f64| norm * (-(a * a - 2.0 * rho * a * b + b * b) / (2.0 * det)).exp();
    let w = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    for i in 0..=n {
        let a = -l + i as f64 * h;
        let mut row = 0.0;
        for j in 0..=n {
            let b = j as f64 * h;
            row += w(j) * dens(a, b);
        }
        total += w(i) * row;
    }
    total * h * h / 9.0
}

/// Binary-output system mixing a signed mixture with a PR box placed on
/// two random inputs: the values of each of those inputs are split into
/// two classes `c`, and outputs satisfy `o_i xor o_j = c_i and c_j`.
/// Every other output is a fair coin. Marginally selective.
pub fn pr_embedded_system(rng: &mut ChaCha8Rng, design: &Design, outcomes: &OutcomeSpace) -> System {
    let base = signed_mixture_system(rng, design, outcomes);
    let n = design.num_inputs();
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    let mut class = |input: usize| -> Vec<usize> {
        let k = design.inputs()[input].values.len();
        let mut c: Vec<usize> = (0..k).map(|v| usize::from(v == 0)).collect();
        for x in c.iter_mut().skip(2) {
            *x = rng.gen_range(0..2);
        }
        c.shuffle(rng);
        c
    };
    let (ci, cj) = (class(i), class(j));
    let lam = Num::ratio(rng.gen_range(2..=4), 4);
    let half = Num::ratio(1, 2);
    let mut tables = Vec::new();
    for tr in design.treatments() {
        let base_table = &base.table(&tr).unwrap().table;
        let axes = outcomes.axes_for(&tr);
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let mut cells = Vec::with_capacity(base_table.probs().len());
        for (flat, p) in base_table.probs().iter().enumerate() {
            let mut o = vec![0; n];
            let mut rest = flat;
            for ax in (0..n).rev() {
                o[ax] = rest % dims[ax];
                rest /= dims[ax];
            }
            let mut pr = Num::one();
            for _ in 0..n.saturating_sub(2) {
                pr = &pr * &half;
            }
            let want = ci[tr.0[i]] & cj[tr.0[j]];
            pr = if (o[i] ^ o[j]) == want { &pr * &half } else { Num::zero() };
            cells.push(&(&lam * &pr) + &(&(&Num::one() - &lam) * p));
        }
        tables.push(TreatmentTable::new(tr, JointTable::new(axes, cells).unwrap()));
    }
    System::new(design.clone(), outcomes.clone(), tables, 0.0).unwrap()
}
