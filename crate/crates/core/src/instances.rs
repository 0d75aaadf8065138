//! Worked instances and seeded random generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dist::JointDistribution;
use crate::error::Result;
use crate::separation::Separation;

/// `Y` uniform on `{0,1}^n`, `X` the fraction of ones in `Y`.
pub fn example1_joint(n: u32) -> Result<JointDistribution> {
    let ny = 1usize << n;
    let mass = 1.0 / ny as f64;
    let mut pmf = vec![vec![0.0; ny]; n as usize + 1];
    for y in 0..ny {
        pmf[y.count_ones() as usize][y] = mass;
    }
    let x_labels = (0..=n).map(|k| format!("{k}/{n}")).collect();
    let y_labels = (0..ny)
        .map(|y| format!("{y:0width$b}", width = n as usize))
        .collect();
    JointDistribution::new(pmf, x_labels, y_labels)
}

/// Twelve symbols, ten of mass 0.005 and two of mass 0.475, observed
/// through a fair coin.
pub fn example2_joint() -> JointDistribution {
    let pmf = example2_px()
        .into_iter()
        .map(|p| vec![p / 2.0, p / 2.0])
        .collect();
    let x_labels = (1..=12).map(|x| x.to_string()).collect();
    JointDistribution::new(pmf, x_labels, vec!["0".into(), "1".into()])
        .expect("valid by construction")
}

pub fn example2_px() -> Vec<f64> {
    let mut p = vec![0.005; 10];
    p.extend([0.475, 0.475]);
    p
}

/// Small-integer weights, roughly a third of them zero, normalized.
fn weights<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    rng.random_range(1..=9) as f64
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|v| v / total).collect();
        }
    }
}

fn reshape(flat: Vec<f64>, cols: usize) -> Vec<Vec<f64>> {
    flat.chunks(cols).map(<[f64]>::to_vec).collect()
}

/// Arbitrary joint on a `nx x ny` grid.
pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize) -> JointDistribution {
    JointDistribution::from_matrix(reshape(weights(rng, nx * ny), ny)).expect("normalized")
}

/// Joint with `X = f(Y)` for a random surjective f; needs `ny >= nx`.
pub fn random_functional_joint<R: Rng + ?Sized>(
    rng: &mut R,
    nx: usize,
    ny: usize,
) -> JointDistribution {
    assert!(ny >= nx && nx >= 1);
    let mut f: Vec<usize> = (0..nx)
        .chain((nx..ny).map(|_| rng.random_range(0..nx)))
        .collect();
    f.shuffle(rng);
    let total_w: Vec<f64> = (0..ny).map(|_| rng.random_range(1..=9) as f64).collect();
    let total: f64 = total_w.iter().sum();
    let mut pmf = vec![vec![0.0; ny]; nx];
    for y in 0..ny {
        pmf[f[y]][y] = total_w[y] / total;
    }
    JointDistribution::from_matrix(pmf).expect("normalized")
}

/// A joint on `rows * cols` symbols with a random row-major separation.
pub fn random_split_instance<R: Rng + ?Sized>(rng: &mut R) -> (JointDistribution, Separation) {
    let (rows, cols) = [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3)][rng.random_range(0..5)];
    let ny = rng.random_range(2..=4);
    loop {
        let j = random_joint(rng, rows * cols, ny);
        let mut cells: Vec<usize> = (0..rows * cols).collect();
        cells.shuffle(rng);
        let grid = cells
            .chunks(cols)
            .map(|r| r.iter().map(|&x| Some(x)).collect())
            .collect();
        if let Ok(sep) = Separation::new(grid, &j.p_x()) {
            return (j, sep);
        }
    }
}

/// A joint on an `r x c` grid where X2 = f(X1): each row puts its mass in
/// one column, and Y depends on the row.
pub fn random_functional_grid<R: Rng + ?Sized>(rng: &mut R) -> (JointDistribution, Separation) {
    let rows = rng.random_range(2..=4);
    let cols = rng.random_range(2..=3);
    let ny = rng.random_range(2..=4);
    let row_w = loop {
        let w = weights(rng, rows);
        if w.iter().filter(|&&p| p > 0.0).count() >= 2 {
            break w;
        }
    };
    let mut pmf = vec![vec![0.0; ny]; rows * cols];
    for (r, &pr) in row_w.iter().enumerate() {
        let c = rng.random_range(0..cols);
        let cond = loop {
            let w = weights(rng, ny);
            if w.iter().any(|&p| p > 0.0) {
                break w;
            }
        };
        for y in 0..ny {
            pmf[r * cols + c][y] = pr * cond[y];
        }
    }
    let j = JointDistribution::from_matrix(pmf).expect("normalized");
    let sep = Separation::row_major(rows, cols, &j.p_x()).expect("valid grid");
    (j, sep)
}
