//! Golden examples bundled with the binary.

use std::fmt::Write as _;

use serde::Serialize;

use distchar::asymptotics::{continued_fraction_convergents, delta_constant};
use distchar::{
    concordance, correlation, expectation, io, neighbor_sets, rob_minus, rob_plus, Coefficient, DataMatrix,
    DistanceMatrix, SampleSpace, TiePolicy,
};

const EX4: &str = include_str!("../fixtures/ex4.csv");
const EX5: &str = include_str!("../fixtures/ex5.csv");
const EX6: &str = include_str!("../fixtures/ex6.csv");
const EX7: &str = include_str!("../fixtures/ex7.csv");
const EX8_Y: &str = include_str!("../fixtures/ex8_y.csv");
const EX9: &str = include_str!("../fixtures/ex9.csv");

const P1: Coefficient = Coefficient::MANHATTAN;
const P2: Coefficient = Coefficient::EUCLIDEAN;
const PINF: Coefficient = Coefficient::CHEBYSHEV;
const L: Coefficient = Coefficient::SquaredEuclidean;
const GRID: SampleSpace = SampleSpace::FullGrid;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

type Outcome = Result<(), String>;

fn data(text: &str) -> DataMatrix {
    io::parse_data_matrix(text).expect("bundled fixture parses")
}

fn close_matrix(d: &DistanceMatrix, expected: &[Vec<f64>], rel: f64) -> Outcome {
    if d.order() != expected.len() {
        return Err(format!("order {} vs {}", d.order(), expected.len()));
    }
    for (i, row) in expected.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            let got = d.get(i, j);
            if (got - e).abs() > rel * e.abs() {
                return Err(format!("entry ({},{}) = {got}, expected {e}", i + 1, j + 1));
            }
        }
    }
    Ok(())
}

fn close(got: f64, expected: f64, tol: f64) -> Outcome {
    if (got - expected).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{got} vs {expected}"))
    }
}

fn equal<T: PartialEq + std::fmt::Debug>(got: T, expected: T) -> Outcome {
    if got == expected {
        Ok(())
    } else {
        Err(format!("{got:?} vs {expected:?}"))
    }
}

fn sets(c: Coefficient, x: &DataMatrix) -> Vec<Vec<usize>> {
    neighbor_sets(c, x, &TiePolicy::default())
        .sets()
        .iter()
        .map(|s| s.iter().map(|j| j + 1).collect())
        .collect()
}

fn frac(s: distchar::RationalScore) -> (u64, u64) {
    let r = s.ratio();
    (*r.numer(), *r.denom())
}

fn rho(m: Coefficient, n: Coefficient, x: &DataMatrix) -> Option<f64> {
    correlation(m, n, x, GRID).ok().and_then(|r| r.rho)
}

fn ex0() -> Outcome {
    let x = DataMatrix::from_rows(&[[3.0, -1.0]]).unwrap();
    for c in [P1, P2, PINF, L] {
        equal(DistanceMatrix::build(c, &x).to_rows(), vec![vec![0.0]])?;
        equal(neighbor_sets(c, &x, &TiePolicy::default()).total(), 0)?;
    }
    equal(frac(concordance(P1, PINF, &x, &TiePolicy::default())), (1, 1))?;
    equal(rho(P1, P2, &x), None)
}

fn ex1() -> Outcome {
    let x = DataMatrix::from_rows(&[[1.0, 2.0], [4.0, -2.0]]).unwrap();
    for (c, v) in [(P1, 7.0), (P2, 5.0), (PINF, 4.0)] {
        equal(DistanceMatrix::build(c, &x).to_rows(), vec![vec![0.0, v], vec![v, 0.0]])?;
        equal(sets(c, &x), vec![vec![2], vec![1]])?;
    }
    equal(frac(concordance(P1, PINF, &x, &TiePolicy::default())), (1, 1))?;
    close(rho(P1, PINF, &x).ok_or("rho undefined")?, 1.0, 1e-12)?;
    let same = DataMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0]]).unwrap();
    equal(rho(P1, P2, &same), None)
}

fn ex2() -> Outcome {
    let x = DataMatrix::column(&[0.5, -2.0, 3.0, 1.0]).unwrap();
    let base = DistanceMatrix::build(P1, &x);
    for c in [P2, PINF, Coefficient::p_norm(3.5).unwrap()] {
        close_matrix(&DistanceMatrix::build(c, &x), &base.to_rows(), 1e-15)?;
        equal(frac(concordance(P1, c, &x, &TiePolicy::default())), (1, 1))?;
        close(rho(P1, c, &x).ok_or("rho undefined")?, 1.0, 1e-12)?;
    }
    Ok(())
}

fn ex3() -> Outcome {
    let w = [1.0, -2.0, 0.5];
    let a = [1.0, 3.0, 4.0];
    let rows: Vec<Vec<f64>> = a.iter().map(|ai| w.iter().map(|wj| ai * wj).collect()).collect();
    let x = DataMatrix::from_rows(&rows).unwrap();
    for c in [P1, P2, PINF] {
        let s = c.evaluate(&w).unwrap();
        let expected = vec![vec![0.0, 2.0 * s, 3.0 * s], vec![2.0 * s, 0.0, s], vec![3.0 * s, s, 0.0]];
        close_matrix(&DistanceMatrix::build(c, &x), &expected, 1e-12)?;
        equal(sets(c, &x), vec![vec![2], vec![3], vec![2]])?;
    }
    Ok(())
}

fn ex4() -> Outcome {
    let x = data(EX4);
    let t = 2.0 * 3f64.sqrt();
    close_matrix(
        &DistanceMatrix::build(P2, &x),
        &[
            vec![0.0, 2.0, 2.0, 2.0],
            vec![2.0, 0.0, t, t],
            vec![2.0, t, 0.0, t],
            vec![2.0, t, t, 0.0],
        ],
        1e-12,
    )?;
    let y = x.remove_row(0).unwrap();
    equal(neighbor_sets(P2, &y, &TiePolicy::default()).total(), 6)?;
    equal(frac(concordance(P1, P2, &y, &TiePolicy::default())), (1, 3))
}

fn ex5() -> Outcome {
    let r = 2f64.sqrt();
    let t = 2.0 * r;
    close_matrix(
        &DistanceMatrix::build(P2, &data(EX5)),
        &[
            vec![0.0, r, r, r, r],
            vec![r, 0.0, 2.0, t, 2.0],
            vec![r, 2.0, 0.0, 2.0, t],
            vec![r, t, 2.0, 0.0, 2.0],
            vec![r, 2.0, t, 2.0, 0.0],
        ],
        1e-12,
    )
}

fn ex6() -> Outcome {
    let xp = data(EX6);
    let x = xp.leading_columns(1).unwrap();
    equal(
        DistanceMatrix::build(P1, &x).to_rows(),
        vec![vec![0.0, 3.0, 1.0], vec![3.0, 0.0, 4.0], vec![1.0, 4.0, 0.0]],
    )?;
    equal(sets(P1, &x), vec![vec![3], vec![1], vec![1]])?;
    equal(
        DistanceMatrix::build(PINF, &xp).to_rows(),
        vec![vec![0.0, 30.0, 40.0], vec![30.0, 0.0, 10.0], vec![40.0, 10.0, 0.0]],
    )?;
    for c in [P1, P2, Coefficient::p_norm(7.0).unwrap(), PINF] {
        equal(sets(c, &xp), vec![vec![2], vec![3], vec![2]])?;
        let s = rob_plus(c, &x, &xp, &TiePolicy::default()).map_err(|e| e.to_string())?;
        equal((s.numerator(), s.denominator()), (0, 3))?;
    }
    Ok(())
}

fn ex7() -> Outcome {
    let z = data(EX7);
    for p in [1.0, 2.0, 3.0] {
        let c = Coefficient::p_norm(p).unwrap();
        let r = 2f64.powf(1.0 / p);
        close_matrix(
            &DistanceMatrix::build(c, &z),
            &[vec![0.0, 1.0, r], vec![1.0, 0.0, 1.0], vec![r, 1.0, 0.0]],
            1e-12,
        )?;
        equal(
            DistanceMatrix::build(c, &z.remove_column(0).unwrap()).to_rows(),
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
        )?;
        equal(
            DistanceMatrix::build(c, &z.remove_column(1).unwrap()).to_rows(),
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
        )?;
    }
    Ok(())
}

fn ex7_leave_one_out() -> Outcome {
    let z = data(EX7);
    let tie = TiePolicy::default();
    for c in [P1, P2, Coefficient::p_norm(3.0).unwrap(), PINF] {
        let s = rob_minus(c, &z, &tie).map_err(|e| e.to_string())?;
        equal((c, frac(s)), (c, (1, 3)))?;
    }
    let tri = data(EX9);
    for (c, expected) in [(P1, (2, 3)), (P2, (1, 3)), (PINF, (2, 3))] {
        let s = rob_minus(c, &tri, &tie).map_err(|e| e.to_string())?;
        equal((c, frac(s)), (c, expected))?;
    }
    Ok(())
}

fn ex8() -> Outcome {
    let y = data(EX8_Y);
    let x = y.leading_columns(1).unwrap();
    let dx = DistanceMatrix::build(P1, &x);
    let dl = DistanceMatrix::build(L, &x);
    equal(dl.to_rows(), dx.hadamard(&dx).unwrap().to_rows())?;
    let e = |d: &DistanceMatrix| expectation(d, GRID).unwrap();
    close(e(&dx), 8.0 / 9.0, 1e-14)?;
    close(e(&dl), 12.0 / 9.0, 1e-14)?;
    close(e(&dl.hadamard(&dl).unwrap()), 36.0 / 9.0, 1e-14)?;
    close(e(&dx.hadamard(&dl).unwrap()), 20.0 / 9.0, 1e-14)?;
    for c in [P1, P2, PINF] {
        close(rho(c, L, &x).ok_or("rho undefined")?, 7.0 / 55f64.sqrt(), 1e-6)?;
    }
    close(rho(P1, L, &y).ok_or("rho undefined")?, 14.0 / 213f64.sqrt(), 1e-6)?;
    close(rho(PINF, L, &y).ok_or("rho undefined")?, 53.0 / (2.0 * 781f64.sqrt()), 1e-6)?;
    close(rho(P1, L, &y).unwrap(), 0.959264, 1e-6)
}

fn ex9() -> Outcome {
    let x = data(EX9);
    let r = 3f64.sqrt();
    let d1 = DistanceMatrix::build(P1, &x);
    close_matrix(
        &d1,
        &[vec![0.0, 3.0 + r, 3.0 + r], vec![3.0 + r, 0.0, 2.0 * r], vec![3.0 + r, 2.0 * r, 0.0]],
        1e-12,
    )?;
    let e = expectation(&d1, GRID).unwrap();
    close(e, 2.0 / 9.0 * (6.0 + 4.0 * r), 1e-12)?;
    let var = correlation(P1, P1, &x, GRID).unwrap().var_m;
    close(var, 8.0 / 27.0 * (13.0 + r), 1e-12)?;
    for (m, n, v) in [(P1, P2, 0.972335), (P1, PINF, 0.9375373), (P2, PINF, 0.9928629)] {
        close(rho(m, n, &x).ok_or("rho undefined")?, v, 1e-5)?;
    }
    Ok(())
}

fn delta() -> Outcome {
    equal(delta_constant(15).map_err(|e| e.to_string())?.to_string(), "0.570376001675023".to_string())?;
    let d = delta_constant(20).map_err(|e| e.to_string())?;
    let report = continued_fraction_convergents(&d, 200_000_000).map_err(|e| e.to_string())?;
    let qs: Vec<u64> = report.convergents.iter().map(|c| c.q).collect();
    if !qs.contains(&5_382_609) || !qs.contains(&169_229_911) {
        return Err(format!("denominators {qs:?}"));
    }
    match report.next_q {
        Some(q) if q > 169_229_911 => Ok(()),
        other => Err(format!("next denominator {other:?}, truncated {}", report.truncated)),
    }
}

type Golden = (&'static str, fn() -> Outcome);

pub fn run_all() -> Vec<Check> {
    let suite: [Golden; 12] = [
        ("Ex0 single row", ex0),
        ("Ex1 two rows", ex1),
        ("Ex2 one column", ex2),
        ("Ex3 rank-one data", ex3),
        ("Ex4 origin and triangle", ex4),
        ("Ex5 origin and square", ex5),
        ("Ex6 distance matrices and rob+ = 0", ex6),
        ("Ex7 distance matrices", ex7),
        ("Ex7 and triangle rob-", ex7_leave_one_out),
        ("Ex8 correlations", ex8),
        ("Ex9 triangle correlations", ex9),
        ("delta and its convergents", delta),
    ];
    suite
        .iter()
        .map(|(name, f)| {
            let r = f();
            Check {
                name: (*name).to_string(),
                passed: r.is_ok(),
                detail: r.err(),
            }
        })
        .collect()
}

pub fn text(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = match &c.detail {
            Some(d) => writeln!(out, "{status} {}: {d}", c.name),
            None => writeln!(out, "{status} {}", c.name),
        };
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(out, "{passed}/{} passed", checks.len());
    out
}
