//! Small reference problems used by tests, benchmarks and the sample data files.

use crate::lp_engine::{GeneralLP, ParamRow, Sense, VarBound};

fn row(a: &[f64], w: f64, f: &[f64]) -> ParamRow {
    ParamRow { a: a.to_vec(), w, f: f.to_vec() }
}

/// Two free variables, `min x₁ + x₂` over five parametric half-planes, box `[0,1]²`.
pub fn two_by_five() -> GeneralLP {
    GeneralLP {
        sense: Sense::Min,
        c: vec![1.0, 1.0],
        ineq: vec![
            row(&[0.0, 1.0], 2.0, &[0.0, 0.0]),
            row(&[1.0, 0.0], 3.0, &[0.0, 0.0]),
            row(&[-1.0, 0.0], -1.0, &[0.0, 0.0]),
            row(&[0.0, -1.0], -1.0, &[-1.0, 0.0]),
            row(&[-1.0, -1.0], -2.0, &[0.0, -1.0]),
        ],
        eq: vec![],
        bounds: vec![],
        q: 2,
    }
}

pub fn two_by_five_box() -> (Vec<f64>, Vec<f64>) {
    (vec![0.0, 0.0], vec![1.0, 1.0])
}

/// Three free variables with `|xᵢ| ≤ 3` written as six inequality rows;
/// `max x₁ + x₂ + x₃`, box `[0,2.5]×[0,3]`.
pub fn three_var_sum() -> GeneralLP {
    let mut ineq = vec![
        row(&[1.0, 1.0, 1.0], 10.0, &[-1.0, -1.0]),
        row(&[1.0, -2.0, 0.0], 4.0, &[-1.0, -2.0]),
        row(&[-1.0, 0.0, -2.0], 3.0, &[-1.0, -2.0]),
    ];
    for i in 0..3 {
        let mut a = [0.0; 3];
        a[i] = 1.0;
        ineq.push(row(&a, 3.0, &[0.0, 0.0]));
        a[i] = -1.0;
        ineq.push(row(&a, 3.0, &[0.0, 0.0]));
    }
    GeneralLP { sense: Sense::Max, c: vec![1.0, 1.0, 1.0], ineq, eq: vec![], bounds: vec![], q: 2 }
}

pub fn three_var_sum_box() -> (Vec<f64>, Vec<f64>) {
    (vec![0.0, 0.0], vec![2.5, 3.0])
}

/// A one-dimensional sanity problem: `max x` with `0 ≤ x ≤ 1 + θ`.
pub fn interval() -> GeneralLP {
    GeneralLP {
        sense: Sense::Max,
        c: vec![1.0],
        ineq: vec![row(&[1.0], 1.0, &[1.0])],
        eq: vec![],
        bounds: vec![VarBound { var: 0, lo: Some(0.0), hi: None, lo_param: None }],
        q: 1,
    }
}
