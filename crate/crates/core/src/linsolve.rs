//! Exact Gaussian elimination over `Q(sqrt(n))`.

use crate::error::{Error, Result};
use crate::qfield::QuadNum;

/// Solves the square system `m x = rhs` exactly. Fails if `m` is singular.
pub fn solve(mut m: Vec<Vec<QuadNum>>, mut rhs: Vec<QuadNum>) -> Result<Vec<QuadNum>> {
    let k = rhs.len();
    if m.len() != k || m.iter().any(|row| row.len() != k) {
        return Err(Error::Malformed("system is not square".into()));
    }
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::Precondition(format!("singular system at column {col}")))?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = m[col][col].inv()?;
        for j in col..k {
            m[col][j] = &m[col][j] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..k {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in col..k {
                let t = &f * &m[col][j];
                m[r][j] = &m[r][j] - &t;
            }
            let t = &f * &rhs[col];
            rhs[r] = &rhs[r] - &t;
        }
    }
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{rat, QuadNum};

    fn q(a: i64, b: i64) -> QuadNum {
        QuadNum::new(rat(a, 1), rat(b, 1), 2)
    }

    #[test]
    fn solves_over_quadratic_field() {
        // [[1, sqrt2], [sqrt2, 3]] x = [1, 0]
        let m = vec![vec![q(1, 0), q(0, 1)], vec![q(0, 1), q(3, 0)]];
        let x = solve(m.clone(), vec![q(1, 0), q(0, 0)]).unwrap();
        for (i, row) in m.iter().enumerate() {
            let lhs = &(&row[0] * &x[0]) + &(&row[1] * &x[1]);
            assert_eq!(lhs, if i == 0 { q(1, 0) } else { q(0, 0) });
        }
    }

    #[test]
    fn singular_is_error() {
        let m = vec![vec![q(1, 1), q(2, 2)], vec![q(1, 1), q(2, 2)]];
        assert!(solve(m, vec![q(1, 0), q(0, 0)]).is_err());
    }
}
